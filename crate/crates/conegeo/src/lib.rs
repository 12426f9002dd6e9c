//! Sphere geometries in light-cone homogeneous coordinates.
//!
//! This crate models points, oriented hyperspheres and planes of the
//! conformal n-sphere as vectors of the pseudo-Euclidean spaces
//! R^{n+1,1} (Moebius geometry) and R^{n+1,2} (Lie sphere geometry).
//! Fixing "absolute" vectors inside these spaces breaks the symmetry
//! group down to a subgeometry; the crate computes the data attached to
//! such a choice:
//!
//! * [`pseudo_euclidean`] - indefinite-signature linear algebra over the
//!   fixed coordinate spaces (inner products, reflections, signatures,
//!   orthogonal complements);
//! * [`sphere_models`] - lifts and projections between Euclidean sphere
//!   data and homogeneous coordinates, incidence and oriented-contact
//!   pairings, parallel transformations, circumspheres;
//! * [`symmetry_breaking`] - point-sphere complexes and space-form
//!   vectors, sphere pencil classification, Dupin cyclide
//!   decompositions and their invariants;
//! * [`surfaces`] - grid-sampled surfaces with analytic curvature data,
//!   their Q^3 x P^3 lifts, central sphere congruences and the scalar
//!   residuals of the classical surface classes (isothermic, Willmore,
//!   Guichard, linear Weingarten, constant mean curvature);
//! * [`connections`] - discrete loops of flat connections built from
//!   wedge endomorphisms, polynomial conserved quantities with their
//!   characteristic polynomials and Gram determinants, nilpotent gauge
//!   transformations;
//! * [`discrete_nets`] - circular nets, Miquel completion, Ribaucour
//!   transforms, cross-ratio machinery, Christoffel duals and discrete
//!   Darboux transforms;
//! * [`configurations`] - the four-point in-/ex-centre configuration on
//!   the 2-sphere, desmic perspectivity centres and antipodal
//!   normalization.
//!
//! All values are immutable after construction and all operations are
//! pure functions, so everything can be shared freely across threads.
//! With the `parallel` feature (on by default) the per-sample and
//! per-edge scans run on rayon; reductions are performed in a fixed
//! lexicographic order either way, so results do not depend on the
//! thread schedule.

pub mod configurations;
pub mod connections;
pub mod discrete_nets;
pub mod grid;
pub mod par;
pub mod pseudo_euclidean;
pub mod sphere_models;
pub mod surfaces;
pub mod symmetry_breaking;

pub use grid::Grid;
pub use pseudo_euclidean::{Space, SpaceKind, Vector};
