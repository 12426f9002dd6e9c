//! Lifts and projections between Euclidean sphere data and homogeneous
//! coordinates, plus the elementary pairings of the models.
//!
//! A point `x` of R^n lifts to the null vector
//!
//! ```text
//!   xi(x) = o + x + |x|^2 inf ,
//! ```
//!
//! a sphere with centre `c` and signed radius `r` to the unit spacelike
//! vector `s = (o + c + (|c|^2 - r^2) inf) / r` of the Moebius model and
//! to the null vector `sigma = o + c + (|c|^2 - r^2) inf + r p` of the
//! Lie model; an oriented plane `x . n = d` to `s = n + 2 d inf` and
//! `sigma = s + p`. With `(o, inf) = -1/2` the Euclidean space form
//! vector is `q = 2 inf`, so `(xi, q) = -1` holds with integer
//! coefficients and `kappa = -(q, q) = 0`.
//!
//! Incidence of a point and a sphere and oriented contact of two Lie
//! spheres are the raw inner products of the stored representatives;
//! for lift-normalized data they evaluate to the classical distance
//! expressions documented on the operations. The boolean predicates
//! normalize by the representatives' coordinate norms first, so that
//! they are independent of ambient scalings.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::pseudo_euclidean::{self as pe, inner, quadratic, Space, SpaceKind, Vector};

/// Relative tolerance for homogeneous-coordinate invariant checks.
pub const EPS_REL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SphereModelError {
    #[error("vector is not null: (v,v) = {value:.3e} relative to scale {scale:.3e}")]
    NotNull { value: f64, scale: f64 },
    #[error("vector is not unit spacelike: (v,v) = {value:.3e}")]
    NotUnitSpacelike { value: f64 },
    #[error("point lies on the chart's hyperplane at infinity: (v,q) = {pairing:.3e}")]
    InfinitePoint { pairing: f64 },
    #[error("a point (zero radius) has no unit spacelike Moebius lift")]
    ZeroRadius,
    #[error("degenerate homogeneous vector cannot be decoded as sphere data")]
    DegenerateVector,
    #[error("operation requires the Euclidean gauge q = 2 inf")]
    NonEuclideanGauge,
    #[error("expected a {expected:?} model vector")]
    WrongModel { expected: SpaceKind },
    #[error("circumsphere input is degenerate (affinely dependent or deficient points)")]
    DegeneratePoints,
}

/// A point of the conformal sphere: a null homogeneous vector.
#[derive(Debug, Clone, PartialEq)]
pub struct HomPoint {
    v: Vector,
}

impl HomPoint {
    /// Wraps a null vector, checking `|(v,v)| < eps * |v|^2`.
    pub fn new(v: Vector) -> Result<Self, SphereModelError> {
        let scale = v.euclid_norm();
        if scale == 0.0 {
            return Err(SphereModelError::DegenerateVector);
        }
        let q = quadratic(&v);
        if q.abs() > EPS_REL * scale * scale {
            return Err(SphereModelError::NotNull {
                value: q,
                scale: scale * scale,
            });
        }
        Ok(HomPoint { v })
    }

    pub fn vector(&self) -> &Vector {
        &self.v
    }

    pub fn space(&self) -> Space {
        self.v.space()
    }
}

/// An oriented hypersphere in homogeneous coordinates: unit spacelike
/// in the Moebius model, null in the Lie model.
#[derive(Debug, Clone, PartialEq)]
pub struct HomSphere {
    v: Vector,
    model: SpaceKind,
}

impl HomSphere {
    pub fn new(v: Vector) -> Result<Self, SphereModelError> {
        let model = v.space().kind();
        match model {
            SpaceKind::Moebius => {
                let q = quadratic(&v);
                if (q - 1.0).abs() > EPS_REL {
                    return Err(SphereModelError::NotUnitSpacelike { value: q });
                }
            }
            SpaceKind::Lie => {
                let scale = v.euclid_norm();
                let q = quadratic(&v);
                if q.abs() > EPS_REL * scale * scale {
                    return Err(SphereModelError::NotNull {
                        value: q,
                        scale: scale * scale,
                    });
                }
            }
        }
        Ok(HomSphere { v, model })
    }

    /// Normalizes a spacelike Moebius vector to `(v,v) = 1` and wraps it.
    pub fn from_spacelike(v: Vector) -> Result<Self, SphereModelError> {
        if v.space().kind() != SpaceKind::Moebius {
            return Err(SphereModelError::WrongModel {
                expected: SpaceKind::Moebius,
            });
        }
        let q = quadratic(&v);
        if q <= 0.0 {
            return Err(SphereModelError::NotUnitSpacelike { value: q });
        }
        Ok(HomSphere {
            v: v.scale(1.0 / q.sqrt()),
            model: SpaceKind::Moebius,
        })
    }

    pub fn vector(&self) -> &Vector {
        &self.v
    }

    pub fn model(&self) -> SpaceKind {
        self.model
    }

    pub fn space(&self) -> Space {
        self.v.space()
    }

    /// The oppositely oriented sphere. In the Moebius model `+s` and
    /// `-s` are the two orientations; in the Lie model negation is a
    /// projective no-op and the flip is the reflection in `{p}^perp`,
    /// which negates the `p` coefficient.
    pub fn flipped(&self) -> HomSphere {
        match self.model {
            SpaceKind::Moebius => HomSphere {
                v: self.v.scale(-1.0),
                model: self.model,
            },
            SpaceKind::Lie => {
                let space = self.space();
                let mut coords = self.v.coords().clone();
                coords[space.slot_p()] = -coords[space.slot_p()];
                HomSphere {
                    v: Vector::from_dvector(space, coords),
                    model: self.model,
                }
            }
        }
    }
}

/// Euclidean data of an oriented sphere or plane in R^n.
#[derive(Debug, Clone, PartialEq)]
pub enum EuclideanSphereData {
    /// Centre and signed radius; `radius = 0` encodes a point.
    Sphere { center: Vec<f64>, radius: f64 },
    /// Oriented plane `x . normal = offset` with a unit normal.
    Plane { normal: Vec<f64>, offset: f64 },
}

impl EuclideanSphereData {
    pub fn sphere(center: &[f64], radius: f64) -> Self {
        EuclideanSphereData::Sphere {
            center: center.to_vec(),
            radius,
        }
    }

    pub fn plane(normal: &[f64], offset: f64) -> Self {
        let norm = normal.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(norm > 0.0, "plane normal must be nonzero");
        EuclideanSphereData::Plane {
            normal: normal.iter().map(|x| x / norm).collect(),
            offset,
        }
    }
}

fn euclidean_dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The Euclidean space form vector `q = 2 inf` with `kappa = -(q,q) = 0`.
pub fn euclidean_gauge_q(space: Space) -> Vector {
    space.infinity().scale(2.0)
}

/// A spherical space form vector `q = o + inf` with `(q,q) = -1`,
/// `kappa = 1`; its quadric is a round model of S^n.
pub fn spherical_gauge_q(space: Space) -> Vector {
    space.origin().add(&space.infinity())
}

/// Lifts a Euclidean point: `xi(x) = o + x + |x|^2 inf`.
pub fn lift_point(space: Space, x: &[f64]) -> HomPoint {
    assert_eq!(x.len(), space.geometry_dim(), "point dimension mismatch");
    let mut v = space.origin();
    for (i, &xi) in x.iter().enumerate() {
        v = v.add(&space.e(i + 1).scale(xi));
    }
    let norm2 = euclidean_dot(x, x);
    v = v.add(&space.infinity().scale(norm2));
    HomPoint { v }
}

/// Lifts a point `u` of the round sphere S^n (unit vector of R^{n+1})
/// into the light cone: the representative with `(y, o + inf) = -1`.
///
/// The last coordinate of `u` pairs with the spacelike direction
/// `o - inf`, so the Euclidean chart of the same projective point is
/// the stereographic image `u' / (1 + u_{n+1})`.
pub fn lift_sphere_point(space: Space, u: &[f64]) -> HomPoint {
    let n = space.geometry_dim();
    assert_eq!(u.len(), n + 1, "S^n point needs n+1 coordinates");
    let last = u[n];
    let mut v = space
        .origin()
        .scale(1.0 + last)
        .add(&space.infinity().scale(1.0 - last));
    for i in 0..n {
        v = v.add(&space.e(i + 1).scale(u[i]));
    }
    HomPoint { v }
}

/// Chart coordinates of a homogeneous point in the space form of `q`.
///
/// The representative is rescaled to `(y, q) = -1` and the Euclidean
/// chart coordinates `e-slots / o-slot` are extracted. Fails for points
/// on the chart's hyperplane at infinity, where either condition is
/// unattainable.
pub fn project_point(hp: &HomPoint, q: &Vector) -> Result<Vec<f64>, SphereModelError> {
    let space = hp.space();
    let pairing = inner(hp.vector(), q);
    let scale = hp.vector().euclid_norm() * q.euclid_norm();
    if pairing.abs() <= EPS_REL * scale.max(1e-300) {
        return Err(SphereModelError::InfinitePoint { pairing });
    }
    let y = hp.vector().scale(-1.0 / pairing);
    let o = y.coord(space.slot_o());
    if o.abs() <= EPS_REL * y.euclid_norm() {
        return Err(SphereModelError::InfinitePoint { pairing: o });
    }
    Ok((1..=space.geometry_dim())
        .map(|i| y.coord(space.slot_e(i)) / o)
        .collect())
}

/// Projects a homogeneous point onto the round sphere S^n: coordinates
/// with respect to `(e_1, ..., e_n, o - inf)` after normalizing
/// `(y, o + inf) = -1`. Inverse of [`lift_sphere_point`].
pub fn project_sphere_point(hp: &HomPoint) -> Result<Vec<f64>, SphereModelError> {
    let space = hp.space();
    let q = spherical_gauge_q(space);
    let pairing = inner(hp.vector(), &q);
    if pairing.abs() <= EPS_REL * hp.vector().euclid_norm() {
        return Err(SphereModelError::InfinitePoint { pairing });
    }
    let y = hp.vector().scale(-1.0 / pairing);
    let mut u: Vec<f64> = (1..=space.geometry_dim())
        .map(|i| y.coord(space.slot_e(i)))
        .collect();
    u.push(0.5 * (y.coord(space.slot_o()) - y.coord(space.slot_inf())));
    Ok(u)
}

/// Lifts Euclidean sphere data into the Moebius model (unit spacelike).
/// Fails for zero radius, which has no spacelike representative.
pub fn lift_sphere_moebius(
    space: Space,
    data: &EuclideanSphereData,
) -> Result<HomSphere, SphereModelError> {
    let v = match data {
        EuclideanSphereData::Sphere { center, radius } => {
            if *radius == 0.0 {
                return Err(SphereModelError::ZeroRadius);
            }
            assert_eq!(center.len(), space.geometry_dim());
            let c2 = euclidean_dot(center, center);
            let mut v = space.origin();
            for (i, &ci) in center.iter().enumerate() {
                v = v.add(&space.e(i + 1).scale(ci));
            }
            v = v.add(&space.infinity().scale(c2 - radius * radius));
            v.scale(1.0 / radius)
        }
        EuclideanSphereData::Plane { normal, offset } => {
            assert_eq!(normal.len(), space.geometry_dim());
            let mut v = space.infinity().scale(2.0 * offset);
            for (i, &ni) in normal.iter().enumerate() {
                v = v.add(&space.e(i + 1).scale(ni));
            }
            v
        }
    };
    Ok(HomSphere {
        v,
        model: SpaceKind::Moebius,
    })
}

/// Lifts Euclidean sphere data into the Lie quadric (null vector);
/// zero radius gives the point lift, planes get `sigma = s + p`.
pub fn lift_sphere_lie(space: Space, data: &EuclideanSphereData) -> HomSphere {
    assert_eq!(space.kind(), SpaceKind::Lie, "Lie lift needs a Lie space");
    let v = match data {
        EuclideanSphereData::Sphere { center, radius } => {
            assert_eq!(center.len(), space.geometry_dim());
            let c2 = euclidean_dot(center, center);
            let mut v = space.origin();
            for (i, &ci) in center.iter().enumerate() {
                v = v.add(&space.e(i + 1).scale(ci));
            }
            v = v.add(&space.infinity().scale(c2 - radius * radius));
            v.add(&space.point_sphere_complex().scale(*radius))
        }
        EuclideanSphereData::Plane { normal, offset } => {
            assert_eq!(normal.len(), space.geometry_dim());
            let mut v = space
                .infinity()
                .scale(2.0 * offset)
                .add(&space.point_sphere_complex());
            for (i, &ni) in normal.iter().enumerate() {
                v = v.add(&space.e(i + 1).scale(ni));
            }
            v
        }
    };
    HomSphere {
        v,
        model: SpaceKind::Lie,
    }
}

/// Decodes a homogeneous sphere vector back into Euclidean data.
///
/// Only the Euclidean gauge is supported: `q` must be `2 inf` (the v1
/// chart restriction shared with the surface lifts).
pub fn sphere_data(hs: &HomSphere, q: &Vector) -> Result<EuclideanSphereData, SphereModelError> {
    let space = hs.space();
    let q_ref = euclidean_gauge_q(space);
    if q.sub(&q_ref).euclid_norm() > EPS_REL * q.euclid_norm().max(1.0) {
        return Err(SphereModelError::NonEuclideanGauge);
    }
    let n = space.geometry_dim();
    let v = match hs.model {
        SpaceKind::Moebius => hs.v.clone(),
        SpaceKind::Lie => hs.v.clone(),
    };
    let scale = v.euclid_norm();
    if scale == 0.0 {
        return Err(SphereModelError::DegenerateVector);
    }
    let o = v.coord(space.slot_o());
    match hs.model {
        SpaceKind::Moebius => {
            if o.abs() > EPS_REL * scale {
                // s = (o + c + (|c|^2 - r^2) inf) / r  =>  r = 1/s_o.
                let r = 1.0 / o;
                let center: Vec<f64> = (1..=n).map(|i| v.coord(space.slot_e(i)) * r).collect();
                Ok(EuclideanSphereData::Sphere { center, radius: r })
            } else {
                // Plane s = n + 2 d inf with |n| = (s,s)^{1/2}.
                let norm = quadratic(&v);
                if norm <= 0.0 {
                    return Err(SphereModelError::DegenerateVector);
                }
                let inv = 1.0 / norm.sqrt();
                let normal: Vec<f64> = (1..=n).map(|i| v.coord(space.slot_e(i)) * inv).collect();
                let offset = 0.5 * v.coord(space.slot_inf()) * inv;
                Ok(EuclideanSphereData::Plane { normal, offset })
            }
        }
        SpaceKind::Lie => {
            let p = v.coord(space.slot_p());
            if o.abs() > EPS_REL * scale {
                let inv = 1.0 / o;
                let center: Vec<f64> = (1..=n).map(|i| v.coord(space.slot_e(i)) * inv).collect();
                Ok(EuclideanSphereData::Sphere {
                    center,
                    radius: p * inv,
                })
            } else if p.abs() > EPS_REL * scale {
                let inv = 1.0 / p;
                let normal: Vec<f64> = (1..=n).map(|i| v.coord(space.slot_e(i)) * inv).collect();
                let nn = euclidean_dot(&normal, &normal).sqrt();
                if nn <= EPS_REL {
                    return Err(SphereModelError::DegenerateVector);
                }
                let offset = 0.5 * v.coord(space.slot_inf()) * inv / nn;
                Ok(EuclideanSphereData::Plane {
                    normal: normal.iter().map(|x| x / nn).collect(),
                    offset,
                })
            } else {
                Err(SphereModelError::DegenerateVector)
            }
        }
    }
}

/// The raw incidence pairing `(point, sphere)`.
///
/// Zero iff the point lies on the sphere. For lift-normalized Moebius
/// data it equals `-(|x - c|^2 - r^2) / (2r)`, and for a plane lift
/// `x . n - d`. Being a plain inner product it is preserved exactly by
/// every isometry applied to both arguments.
pub fn incidence_residual(hp: &HomPoint, hs: &HomSphere) -> f64 {
    match hs.model {
        SpaceKind::Moebius => inner(hp.vector(), hs.vector()),
        SpaceKind::Lie => inner(hp.vector(), hs.vector()),
    }
}

/// Scale-invariant incidence predicate: normalizes both representatives
/// by their coordinate norms before thresholding.
pub fn is_incident(hp: &HomPoint, hs: &HomSphere, tol: f64) -> bool {
    let scale = hp.vector().euclid_norm() * hs.vector().euclid_norm();
    incidence_residual(hp, hs).abs() <= tol * scale.max(f64::MIN_POSITIVE)
}

/// The raw oriented-contact pairing `(sigma_1, sigma_2)` of two Lie
/// sphere vectors; zero iff the spheres are in oriented contact. For
/// lift-normalized data it equals `-(|c1-c2|^2 - (r1-r2)^2)/2`.
pub fn contact_residual(s1: &HomSphere, s2: &HomSphere) -> f64 {
    assert_eq!(s1.model, SpaceKind::Lie, "contact pairing is Lie-model");
    assert_eq!(s2.model, SpaceKind::Lie, "contact pairing is Lie-model");
    inner(s1.vector(), s2.vector())
}

/// Scale-invariant oriented-contact predicate.
pub fn is_in_contact(s1: &HomSphere, s2: &HomSphere, tol: f64) -> bool {
    let scale = s1.vector().euclid_norm() * s2.vector().euclid_norm();
    contact_residual(s1, s2).abs() <= tol * scale.max(f64::MIN_POSITIVE)
}

/// The Lie-geometric parallel transformation: the linear isometry of
/// the Lie space adding `delta` to the signed radius of every sphere,
/// `T_delta lift(c, r) = lift(c, r + delta)` on lift-normalized
/// representatives. It moves the point sphere complex, which is the
/// algebraic witness that it is a Lie but not a Moebius transformation.
pub fn parallel_transformation(space: Space, delta: f64) -> DMatrix<f64> {
    assert_eq!(space.kind(), SpaceKind::Lie);
    let d = space.dim();
    let (o, inf, p) = (space.slot_o(), space.slot_inf(), space.slot_p());
    let mut m = DMatrix::identity(d, d);
    // o -> o + delta p - delta^2 inf, p -> p - 2 delta inf.
    m[(p, o)] = delta;
    m[(inf, o)] = -delta * delta;
    m[(inf, p)] = -2.0 * delta;
    m
}

/// The circumsphere through `n+1` points of R^n: the unique (up to
/// sign) unit spacelike vector orthogonal to all point lifts.
pub fn circumsphere(space: Space, points: &[Vec<f64>]) -> Result<HomSphere, SphereModelError> {
    assert_eq!(space.kind(), SpaceKind::Moebius, "circumsphere is Moebius");
    let n = space.geometry_dim();
    if points.len() != n + 1 {
        return Err(SphereModelError::DegeneratePoints);
    }
    let lifts: Vec<Vector> = points
        .iter()
        .map(|x| lift_point(space, x).v)
        .collect();
    let comp = pe::orthogonal_complement(space, &lifts);
    if comp.len() != 1 {
        return Err(SphereModelError::DegeneratePoints);
    }
    let v = comp.into_iter().next().unwrap();
    let q = quadratic(&v);
    if q <= EPS_REL {
        // Affinely dependent points: the polar vector degenerates to a
        // plane or worse.
        return Err(SphereModelError::DegeneratePoints);
    }
    let s = v.scale(1.0 / q.sqrt());
    let o = s.coord(space.slot_o());
    if o.abs() <= EPS_REL {
        // Affinely dependent points: the circumsphere degenerates to a
        // plane (a sphere through infinity).
        return Err(SphereModelError::DegeneratePoints);
    }
    // Orientation: positive radius representative.
    let s = if o < 0.0 { s.scale(-1.0) } else { s };
    Ok(HomSphere {
        v: s,
        model: SpaceKind::Moebius,
    })
}
