//! Grid-sampled surfaces in R^3 with analytic curvature data and their
//! light-cone lifts.
//!
//! A surface sample carries position `f`, unit normal `n`, principal
//! curvatures `kappa_1, kappa_2` (along u resp v) and the fundamental
//! coefficients E, F, G, L, M, N with the sign convention
//! `II = -(df, dn)`. Normals are oriented so that the round sphere has
//! `kappa_1 = kappa_2 = +1/r` (inward mean curvature vector); all other
//! generators follow the same convention.
//!
//! Samples sit at cell midpoints, `u_i = u_0 + (i + 1/2) h_u`, so the
//! plain sample sum is the composite midpoint rule and closed
//! directions never duplicate the seam. Difference quotients use
//! central stencils in the interior (with wraparound on closed
//! directions) and one-sided second-order stencils at open boundaries.
//!
//! Lifting into the Lie space of the Euclidean gauge `q = 2 inf`:
//!
//! ```text
//!   xi = o + f + |f|^2 inf          (point lift, in Q^3)
//!   nu = n + 2 (f.n) inf + p        (tangent plane lift, in P^3)
//! ```

use nalgebra::Vector3;
use thiserror::Error;

use crate::grid::Grid;
use crate::par;
use crate::pseudo_euclidean::{inner, quadratic, Space, SpaceKind, Vector};
use crate::symmetry_breaking::SubgeometryGauge;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("invalid surface parameters: {reason}")]
    InvalidParams { reason: String },
    #[error("surface lifts are only implemented for the Euclidean gauge q = 2 inf")]
    NonEuclideanGauge,
    #[error("operation requires a curvature-line parametrization (max |F|/E = {f_rel:.3e}, max |M|/E = {m_rel:.3e})")]
    NonCurvatureLine { f_rel: f64, m_rel: f64 },
    #[error("grid shape mismatch")]
    GridMismatch,
}

/// Whether sampled data comes from closed forms or difference quotients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Analytic,
    Estimated,
}

/// Sampling layout of the parameter rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nu: usize,
    pub nv: usize,
    pub u_range: (f64, f64),
    pub v_range: (f64, f64),
    pub closed_u: bool,
    pub closed_v: bool,
}

impl GridSpec {
    pub fn h_u(&self) -> f64 {
        (self.u_range.1 - self.u_range.0) / self.nu as f64
    }

    pub fn h_v(&self) -> f64 {
        (self.v_range.1 - self.v_range.0) / self.nv as f64
    }

    /// Midpoint sample coordinate along u.
    pub fn u(&self, i: usize) -> f64 {
        self.u_range.0 + (i as f64 + 0.5) * self.h_u()
    }

    pub fn v(&self, j: usize) -> f64 {
        self.v_range.0 + (j as f64 + 0.5) * self.h_v()
    }
}

/// First and second fundamental coefficients at a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FundamentalForms {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
}

/// A sampled parametrized surface with curvature data.
#[derive(Debug, Clone)]
pub struct SampledSurface {
    spec: GridSpec,
    positions: Grid<Vector3<f64>>,
    normals: Grid<Vector3<f64>>,
    kappa1: Grid<f64>,
    kappa2: Grid<f64>,
    forms: Grid<FundamentalForms>,
    conformal_factor: Option<Grid<f64>>,
    provenance: Provenance,
    curvature_line: bool,
}

impl SampledSurface {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn positions(&self) -> &Grid<Vector3<f64>> {
        &self.positions
    }

    pub fn normals(&self) -> &Grid<Vector3<f64>> {
        &self.normals
    }

    pub fn kappa1(&self) -> &Grid<f64> {
        &self.kappa1
    }

    pub fn kappa2(&self) -> &Grid<f64> {
        &self.kappa2
    }

    pub fn forms(&self) -> &Grid<FundamentalForms> {
        &self.forms
    }

    pub fn conformal_factor(&self) -> Option<&Grid<f64>> {
        self.conformal_factor.as_ref()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn is_curvature_line(&self) -> bool {
        self.curvature_line
    }

    pub fn mean_curvature(&self) -> Grid<f64> {
        Grid::from_fn(self.spec.nu, self.spec.nv, |i, j| {
            0.5 * (self.kappa1.at(i, j) + self.kappa2.at(i, j))
        })
    }

    pub fn gauss_curvature(&self) -> Grid<f64> {
        Grid::from_fn(self.spec.nu, self.spec.nv, |i, j| {
            self.kappa1.at(i, j) * self.kappa2.at(i, j)
        })
    }
}

/// The surface generators of the test corpus.
#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceKind {
    /// The plane z = 0 over `[-extent, extent]^2`.
    Plane { extent: f64 },
    /// Round sphere of radius `radius` in polar coordinates, sampled
    /// away from the poles.
    Sphere { radius: f64 },
    /// Cylinder of radius `radius` about the z-axis, parametrized by
    /// circumferential arc length and height (conformal curvature-line
    /// coordinates for every radius).
    Cylinder { radius: f64, height: f64 },
    /// Catenoid with waist radius `waist` in its standard conformal
    /// curvature-line coordinates.
    Catenoid { waist: f64, v_extent: f64 },
    /// Cone with half-angle `half_angle`, sampled on `v in [v_min, v_max]`
    /// (distance from the apex), `v_min > 0`.
    Cone {
        half_angle: f64,
        v_min: f64,
        v_max: f64,
    },
    /// Torus with tube radius `minor` about the circle of radius `major`.
    Torus { major: f64, minor: f64 },
    /// Surface of revolution from profile samples `(rho_j, z_j)` given
    /// at the `nv` midpoint samples of `v_range`; derivatives are
    /// estimated by difference quotients.
    RevolutionSamples {
        rho: Vec<f64>,
        z: Vec<f64>,
        v_range: (f64, f64),
    },
}

struct RevolutionProfile {
    rho: f64,
    drho: f64,
    ddrho: f64,
    z: f64,
    dz: f64,
    ddz: f64,
}

fn revolution_sample(
    u: f64,
    p: &RevolutionProfile,
) -> (Vector3<f64>, Vector3<f64>, f64, f64, FundamentalForms) {
    let (cu, su) = (u.cos(), u.sin());
    let w2 = p.drho * p.drho + p.dz * p.dz;
    let w = w2.sqrt();
    let position = Vector3::new(p.rho * cu, p.rho * su, p.z);
    let normal = Vector3::new(-p.dz * cu, -p.dz * su, p.drho) / w;
    let e = p.rho * p.rho;
    let g = w2;
    let l = p.rho * p.dz / w;
    let n = (p.drho * p.ddz - p.dz * p.ddrho) / w;
    let kappa1 = p.dz / (p.rho * w);
    let kappa2 = (p.drho * p.ddz - p.dz * p.ddrho) / (w * w2);
    (
        position,
        normal,
        kappa1,
        kappa2,
        FundamentalForms {
            e,
            f: 0.0,
            g,
            l,
            m: 0.0,
            n,
        },
    )
}

/// Builds a sampled surface of the given kind on an `nu x nv` grid.
pub fn make_surface(
    kind: &SurfaceKind,
    nu: usize,
    nv: usize,
) -> Result<SampledSurface, SurfaceError> {
    use std::f64::consts::PI;
    let invalid = |reason: &str| SurfaceError::InvalidParams {
        reason: reason.to_string(),
    };
    if nu < 2 || nv < 2 {
        return Err(invalid("grid must be at least 2 x 2"));
    }
    match kind {
        SurfaceKind::Plane { extent } => {
            if *extent <= 0.0 {
                return Err(invalid("plane extent must be positive"));
            }
            let spec = GridSpec {
                nu,
                nv,
                u_range: (-extent, *extent),
                v_range: (-extent, *extent),
                closed_u: false,
                closed_v: false,
            };
            Ok(build_analytic(
                spec,
                |u, v| {
                    (
                        Vector3::new(u, v, 0.0),
                        Vector3::new(0.0, 0.0, 1.0),
                        0.0,
                        0.0,
                        FundamentalForms {
                            e: 1.0,
                            f: 0.0,
                            g: 1.0,
                            l: 0.0,
                            m: 0.0,
                            n: 0.0,
                        },
                    )
                },
                Some(|_u: f64, _v: f64| 0.0),
                true,
            ))
        }
        SurfaceKind::Sphere { radius } => {
            let r = *radius;
            if r <= 0.0 {
                return Err(invalid("sphere radius must be positive"));
            }
            let spec = GridSpec {
                nu,
                nv,
                u_range: (0.0, 2.0 * PI),
                v_range: (0.0, PI),
                closed_u: true,
                closed_v: false,
            };
            Ok(build_analytic(
                spec,
                move |u, v| {
                    let p = RevolutionProfile {
                        rho: r * v.sin(),
                        drho: r * v.cos(),
                        ddrho: -r * v.sin(),
                        z: -r * v.cos(),
                        dz: r * v.sin(),
                        ddz: r * v.cos(),
                    };
                    revolution_sample(u, &p)
                },
                None::<fn(f64, f64) -> f64>,
                true,
            ))
        }
        SurfaceKind::Cylinder { radius, height } => {
            let r = *radius;
            if r <= 0.0 || *height <= 0.0 {
                return Err(invalid("cylinder needs positive radius and height"));
            }
            let spec = GridSpec {
                nu,
                nv,
                u_range: (0.0, 2.0 * PI * r),
                v_range: (0.0, *height),
                closed_u: true,
                closed_v: false,
            };
            Ok(build_analytic(
                spec,
                move |u, v| {
                    let phi = u / r;
                    let (c, s) = (phi.cos(), phi.sin());
                    (
                        Vector3::new(r * c, r * s, v),
                        Vector3::new(-c, -s, 0.0),
                        1.0 / r,
                        0.0,
                        FundamentalForms {
                            e: 1.0,
                            f: 0.0,
                            g: 1.0,
                            l: 1.0 / r,
                            m: 0.0,
                            n: 0.0,
                        },
                    )
                },
                Some(|_u: f64, _v: f64| 0.0),
                true,
            ))
        }
        SurfaceKind::Catenoid { waist, v_extent } => {
            let a = *waist;
            if a <= 0.0 || *v_extent <= 0.0 {
                return Err(invalid("catenoid needs positive waist and extent"));
            }
            let spec = GridSpec {
                nu,
                nv,
                u_range: (0.0, 2.0 * PI),
                v_range: (-v_extent, *v_extent),
                closed_u: true,
                closed_v: false,
            };
            Ok(build_analytic(
                spec,
                move |u, v| {
                    let p = RevolutionProfile {
                        rho: a * v.cosh(),
                        drho: a * v.sinh(),
                        ddrho: a * v.cosh(),
                        z: a * v,
                        dz: a,
                        ddz: 0.0,
                    };
                    revolution_sample(u, &p)
                },
                Some(move |_u: f64, v: f64| (a * v.cosh()).ln()),
                true,
            ))
        }
        SurfaceKind::Cone {
            half_angle,
            v_min,
            v_max,
        } => {
            let alpha = *half_angle;
            if !(alpha > 0.0 && alpha < PI / 2.0) {
                return Err(invalid("cone half-angle must lie in (0, pi/2)"));
            }
            if !(*v_min > 0.0 && v_max > v_min) {
                return Err(invalid("cone needs 0 < v_min < v_max"));
            }
            let spec = GridSpec {
                nu,
                nv,
                u_range: (0.0, 2.0 * PI),
                v_range: (*v_min, *v_max),
                closed_u: true,
                closed_v: false,
            };
            let (sa, ca) = (alpha.sin(), alpha.cos());
            Ok(build_analytic(
                spec,
                move |u, v| {
                    let p = RevolutionProfile {
                        rho: v * sa,
                        drho: sa,
                        ddrho: 0.0,
                        z: v * ca,
                        dz: ca,
                        ddz: 0.0,
                    };
                    revolution_sample(u, &p)
                },
                None::<fn(f64, f64) -> f64>,
                true,
            ))
        }
        SurfaceKind::Torus { major, minor } => {
            let (rr, rt) = (*major, *minor);
            if !(rr > rt && rt > 0.0) {
                return Err(invalid("torus needs major > minor > 0"));
            }
            let spec = GridSpec {
                nu,
                nv,
                u_range: (0.0, 2.0 * PI),
                v_range: (0.0, 2.0 * PI),
                closed_u: true,
                closed_v: true,
            };
            Ok(build_analytic(
                spec,
                move |u, v| {
                    let p = RevolutionProfile {
                        rho: rr + rt * v.cos(),
                        drho: -rt * v.sin(),
                        ddrho: -rt * v.cos(),
                        z: rt * v.sin(),
                        dz: rt * v.cos(),
                        ddz: -rt * v.sin(),
                    };
                    revolution_sample(u, &p)
                },
                None::<fn(f64, f64) -> f64>,
                true,
            ))
        }
        SurfaceKind::RevolutionSamples { rho, z, v_range } => {
            if rho.len() != nv || z.len() != nv {
                return Err(invalid("profile sample count must equal nv"));
            }
            if rho.iter().any(|&r| r <= 0.0) {
                return Err(invalid("profile radii must be positive"));
            }
            if nv < 4 {
                return Err(invalid("profile needs at least 4 samples"));
            }
            let spec = GridSpec {
                nu,
                nv,
                u_range: (0.0, 2.0 * PI),
                v_range: *v_range,
                closed_u: true,
                closed_v: false,
            };
            let h = spec.h_v();
            // Difference-quotient profile derivatives: central in the
            // interior, one-sided second order at the ends.
            let d1 = |f: &[f64], j: usize| -> f64 {
                if j == 0 {
                    (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
                } else if j == nv - 1 {
                    (3.0 * f[nv - 1] - 4.0 * f[nv - 2] + f[nv - 3]) / (2.0 * h)
                } else {
                    (f[j + 1] - f[j - 1]) / (2.0 * h)
                }
            };
            let d2 = |f: &[f64], j: usize| -> f64 {
                if j == 0 {
                    (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h)
                } else if j == nv - 1 {
                    (2.0 * f[nv - 1] - 5.0 * f[nv - 2] + 4.0 * f[nv - 3] - f[nv - 4]) / (h * h)
                } else {
                    (f[j + 1] - 2.0 * f[j] + f[j - 1]) / (h * h)
                }
            };
            let mut positions = Vec::with_capacity(nu * nv);
            let mut normals = Vec::with_capacity(nu * nv);
            let mut k1 = Vec::with_capacity(nu * nv);
            let mut k2 = Vec::with_capacity(nu * nv);
            let mut forms = Vec::with_capacity(nu * nv);
            for i in 0..nu {
                let u = spec.u(i);
                for j in 0..nv {
                    let p = RevolutionProfile {
                        rho: rho[j],
                        drho: d1(rho, j),
                        ddrho: d2(rho, j),
                        z: z[j],
                        dz: d1(z, j),
                        ddz: d2(z, j),
                    };
                    let (pos, nrm, kappa1, kappa2, ff) = revolution_sample(u, &p);
                    positions.push(pos);
                    normals.push(nrm);
                    k1.push(kappa1);
                    k2.push(kappa2);
                    forms.push(ff);
                }
            }
            Ok(SampledSurface {
                spec,
                positions: Grid::from_vec(nu, nv, positions),
                normals: Grid::from_vec(nu, nv, normals),
                kappa1: Grid::from_vec(nu, nv, k1),
                kappa2: Grid::from_vec(nu, nv, k2),
                forms: Grid::from_vec(nu, nv, forms),
                conformal_factor: None,
                provenance: Provenance::Estimated,
                curvature_line: true,
            })
        }
    }
}

fn build_analytic<S, P>(
    spec: GridSpec,
    sample: S,
    phi: Option<P>,
    curvature_line: bool,
) -> SampledSurface
where
    S: Fn(f64, f64) -> (Vector3<f64>, Vector3<f64>, f64, f64, FundamentalForms) + Sync + Send,
    P: Fn(f64, f64) -> f64,
{
    let (nu, nv) = (spec.nu, spec.nv);
    let samples = par::map_indexed(nu * nv, |k| {
        let (i, j) = (k / nv, k % nv);
        sample(spec.u(i), spec.v(j))
    });
    let positions = Grid::from_vec(nu, nv, samples.iter().map(|s| s.0).collect());
    let normals = Grid::from_vec(nu, nv, samples.iter().map(|s| s.1).collect());
    let kappa1 = Grid::from_vec(nu, nv, samples.iter().map(|s| s.2).collect());
    let kappa2 = Grid::from_vec(nu, nv, samples.iter().map(|s| s.3).collect());
    let forms = Grid::from_vec(nu, nv, samples.iter().map(|s| s.4).collect());
    let conformal_factor = phi.map(|phi| Grid::from_fn(nu, nv, |i, j| phi(spec.u(i), spec.v(j))));
    SampledSurface {
        spec,
        positions,
        normals,
        kappa1,
        kappa2,
        forms,
        conformal_factor,
        provenance: Provenance::Analytic,
        curvature_line,
    }
}

/// A lifted surface: point lifts `xi` in Q^3 and tangent plane lifts
/// `nu` in P^3, together with the gauge and the mean curvature grid.
#[derive(Debug, Clone)]
pub struct LiftedSurface {
    spec: GridSpec,
    xi: Grid<Vector>,
    nu: Grid<Vector>,
    mean_curvature: Grid<f64>,
    gauge: SubgeometryGauge,
}

impl LiftedSurface {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn xi(&self) -> &Grid<Vector> {
        &self.xi
    }

    pub fn nu(&self) -> &Grid<Vector> {
        &self.nu
    }

    pub fn mean_curvature(&self) -> &Grid<f64> {
        &self.mean_curvature
    }

    pub fn gauge(&self) -> &SubgeometryGauge {
        &self.gauge
    }
}

/// Lifts a sampled surface into the Lie space of the Euclidean gauge.
pub fn lift_surface(
    surface: &SampledSurface,
    gauge: &SubgeometryGauge,
) -> Result<LiftedSurface, SurfaceError> {
    let space = gauge.space();
    if space.kind() != SpaceKind::Lie || space.geometry_dim() != 3 {
        return Err(SurfaceError::NonEuclideanGauge);
    }
    let q_ref = space.infinity().scale(2.0);
    if gauge.q().sub(&q_ref).euclid_norm() > 1e-12 || gauge.p().is_none() {
        return Err(SurfaceError::NonEuclideanGauge);
    }
    let (nu_dim, nv_dim) = (surface.spec.nu, surface.spec.nv);
    let lifted = par::map_indexed(nu_dim * nv_dim, |k| {
        let (i, j) = (k / nv_dim, k % nv_dim);
        let f = surface.positions.at(i, j);
        let n = surface.normals.at(i, j);
        let xi = lift_position(space, f);
        let nu = lift_tangent_plane(space, f, n);
        (xi, nu)
    });
    let xi = Grid::from_vec(nu_dim, nv_dim, lifted.iter().map(|t| t.0.clone()).collect());
    let nu = Grid::from_vec(nu_dim, nv_dim, lifted.iter().map(|t| t.1.clone()).collect());
    Ok(LiftedSurface {
        spec: surface.spec,
        xi,
        nu,
        mean_curvature: surface.mean_curvature(),
        gauge: gauge.clone(),
    })
}

fn lift_position(space: Space, f: &Vector3<f64>) -> Vector {
    space
        .origin()
        .add(&space.e(1).scale(f.x))
        .add(&space.e(2).scale(f.y))
        .add(&space.e(3).scale(f.z))
        .add(&space.infinity().scale(f.norm_squared()))
}

fn lift_tangent_plane(space: Space, f: &Vector3<f64>, n: &Vector3<f64>) -> Vector {
    space
        .e(1)
        .scale(n.x)
        .add(&space.e(2).scale(n.y))
        .add(&space.e(3).scale(n.z))
        .add(&space.infinity().scale(2.0 * f.dot(n)))
        .add(&space.point_sphere_complex())
}

/// Maximum residual of the seven lift conditions
/// `(xi,xi) = (nu,nu) = (xi,nu) = (xi,p) = 0`, `(xi,q) = -1`,
/// `(nu,p) = -1`, `(nu,q) = 0` over all samples.
pub fn lift_invariant_audit(ls: &LiftedSurface) -> f64 {
    let p = ls.gauge.p().expect("lifted surfaces carry a Lie gauge");
    let q = ls.gauge.q();
    let n = ls.xi.len();
    let nv = ls.spec.nv;
    let residuals = par::map_indexed(n, |k| {
        let (i, j) = (k / nv, k % nv);
        let xi = ls.xi.at(i, j);
        let nu = ls.nu.at(i, j);
        let mut r: f64 = 0.0;
        r = r.max(quadratic(xi).abs());
        r = r.max(quadratic(nu).abs());
        r = r.max(inner(xi, nu).abs());
        r = r.max(inner(xi, p).abs());
        r = r.max((inner(xi, q) + 1.0).abs());
        r = r.max((inner(nu, p) + 1.0).abs());
        r = r.max(inner(nu, q).abs());
        r
    });
    par::max_residual(&residuals)
}

/// The central sphere congruence `gamma = nu + H xi` for a given mean
/// curvature grid; each value is null.
pub fn central_sphere_congruence(
    ls: &LiftedSurface,
    h: &Grid<f64>,
) -> Result<Grid<Vector>, SurfaceError> {
    if !h.same_shape(ls.xi()) {
        return Err(SurfaceError::GridMismatch);
    }
    let nv = ls.spec.nv;
    let values = par::map_indexed(h.len(), |k| {
        let (i, j) = (k / nv, k % nv);
        ls.nu.at(i, j).add(&ls.xi.at(i, j).scale(*h.at(i, j)))
    });
    Ok(Grid::from_vec(h.nu(), h.nv(), values))
}

/// Constant mean curvature residual against the target value `h0`.
///
/// The central sphere congruence `gamma = nu + H xi` is built from the
/// surface's own mean curvature grid; the residual combines the edge
/// differences `(Delta gamma, q)` (the discrete form of
/// `d gamma perp q`) with the sample values `-(gamma, q) - h0` (the
/// mean curvature of the central spheres against the target). It
/// vanishes iff the surface has constant mean curvature `h0` in the
/// space form of `q`.
pub fn cmc_residual(ls: &LiftedSurface, h0: f64, q: &Vector) -> f64 {
    let gamma = central_sphere_congruence(ls, &ls.mean_curvature)
        .expect("grid shapes agree by construction");
    let (nu, nv) = (ls.spec.nu, ls.spec.nv);
    let value_res = par::map_indexed(nu * nv, |k| {
        let (i, j) = (k / nv, k % nv);
        (-inner(gamma.at(i, j), q) - h0).abs()
    });
    let mut res = par::max_residual(&value_res);
    for ((i, j), g) in gamma.iter_indexed() {
        if i + 1 < nu {
            res = res.max(inner(&gamma.at(i + 1, j).sub(g), q).abs());
        }
        if j + 1 < nv {
            res = res.max(inner(&gamma.at(i, j + 1).sub(g), q).abs());
        }
    }
    res
}

fn d1_stencil(len: usize, closed: bool, idx: usize) -> [(usize, f64); 3] {
    // Coefficients for the first derivative, to be divided by h.
    if closed {
        let prev = (idx + len - 1) % len;
        let next = (idx + 1) % len;
        [(prev, -0.5), (idx, 0.0), (next, 0.5)]
    } else if idx == 0 {
        [(0, -1.5), (1, 2.0), (2, -0.5)]
    } else if idx == len - 1 {
        [(len - 1, 1.5), (len - 2, -2.0), (len - 3, 0.5)]
    } else {
        [(idx - 1, -0.5), (idx, 0.0), (idx + 1, 0.5)]
    }
}

/// Difference-quotient partial derivatives of the position grid.
pub fn position_derivatives(s: &SampledSurface) -> (Grid<Vector3<f64>>, Grid<Vector3<f64>>) {
    let spec = &s.spec;
    let (h_u, h_v) = (spec.h_u(), spec.h_v());
    let fu = Grid::from_fn(spec.nu, spec.nv, |i, j| {
        let mut acc = Vector3::zeros();
        for (k, c) in d1_stencil(spec.nu, spec.closed_u, i) {
            acc += s.positions.at(k, j) * c;
        }
        acc / h_u
    });
    let fv = Grid::from_fn(spec.nu, spec.nv, |i, j| {
        let mut acc = Vector3::zeros();
        for (k, c) in d1_stencil(spec.nv, spec.closed_v, j) {
            acc += s.positions.at(i, k) * c;
        }
        acc / h_v
    });
    (fu, fv)
}

/// Willmore energy `W = integral (H^2 - K) dA` by the composite
/// midpoint rule.
///
/// The integrand comes from the stored curvature grids; the area
/// element is measured from the sampled immersion by difference
/// quotients, `dA = |f_u x f_v| du dv`, keeping the quadrature
/// consistent with the discrete geometry (and uniformly second order
/// on open and closed grids). Summation is lexicographic.
pub fn willmore_energy(s: &SampledSurface) -> f64 {
    let (fu, fv) = position_derivatives(s);
    let spec = &s.spec;
    let weight = spec.h_u() * spec.h_v();
    let nv = spec.nv;
    let terms = par::map_indexed(spec.nu * spec.nv, |k| {
        let (i, j) = (k / nv, k % nv);
        let h = 0.5 * (s.kappa1.at(i, j) + s.kappa2.at(i, j));
        let kk = s.kappa1.at(i, j) * s.kappa2.at(i, j);
        let area = fu.at(i, j).cross(fv.at(i, j)).norm();
        (h * h - kk) * area * weight
    });
    terms.iter().sum()
}

/// Deviations from conformal curvature-line coordinates:
/// `max |E - G| / E`, `max |F| / E` and `max |M| / E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsothermicResidual {
    pub e_minus_g: f64,
    pub f_rel: f64,
    pub m_rel: f64,
}

pub fn isothermic_residual(s: &SampledSurface) -> IsothermicResidual {
    let nv = s.spec.nv;
    let vals = par::map_indexed(s.forms.len(), |k| {
        let (i, j) = (k / nv, k % nv);
        let ff = s.forms.at(i, j);
        let scale = ff.e.abs().max(f64::MIN_POSITIVE);
        (
            (ff.e - ff.g).abs() / scale,
            ff.f.abs() / scale,
            ff.m.abs() / scale,
        )
    });
    let mut out = IsothermicResidual {
        e_minus_g: 0.0,
        f_rel: 0.0,
        m_rel: 0.0,
    };
    for (a, b, c) in vals {
        out.e_minus_g = out.e_minus_g.max(a);
        out.f_rel = out.f_rel.max(b);
        out.m_rel = out.m_rel.max(c);
    }
    out
}

/// Tolerance on the curvature-line residuals accepted by the Guichard
/// check.
pub const EPS_CURVATURE_LINE: f64 = 1e-8;

/// Residual of the Calapso-Guichard condition
/// `c E G (kappa_1 - kappa_2)^2 = E - eps G` with `eps in {+1, -1}`.
/// Requires a curvature-line parametrization.
pub fn guichard_surface_residual(s: &SampledSurface, c: f64, eps: i8) -> Result<f64, SurfaceError> {
    let iso = isothermic_residual(s);
    if iso.f_rel > EPS_CURVATURE_LINE || iso.m_rel > EPS_CURVATURE_LINE {
        return Err(SurfaceError::NonCurvatureLine {
            f_rel: iso.f_rel,
            m_rel: iso.m_rel,
        });
    }
    let eps = eps.signum() as f64;
    let nv = s.spec.nv;
    let vals = par::map_indexed(s.forms.len(), |k| {
        let (i, j) = (k / nv, k % nv);
        let ff = s.forms.at(i, j);
        let dk = s.kappa1.at(i, j) - s.kappa2.at(i, j);
        (c * ff.e * ff.g * dk * dk - (ff.e - eps * ff.g)).abs()
    });
    Ok(par::max_residual(&vals))
}

/// `max |a K + 2 b H + c|` over all samples.
pub fn linear_weingarten_residual(s: &SampledSurface, a: f64, b: f64, c: f64) -> f64 {
    let nv = s.spec.nv;
    let vals = par::map_indexed(s.kappa1.len(), |k| {
        let (i, j) = (k / nv, k % nv);
        let kk = s.kappa1.at(i, j) * s.kappa2.at(i, j);
        let h = 0.5 * (s.kappa1.at(i, j) + s.kappa2.at(i, j));
        (a * kk + 2.0 * b * h + c).abs()
    });
    par::max_residual(&vals)
}

/// Least-squares linear Weingarten fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearWeingartenFit {
    /// Unit coefficient vector (a, b, c).
    pub coefficients: [f64; 3],
    /// `max |a K + 2 b H + c|` of the fitted coefficients.
    pub residual: f64,
    /// The type invariant `b^2 - a c`.
    pub discriminant: f64,
}

/// Fits the best unit triple `(a, b, c)` for `a K + 2 b H + c = 0` by
/// the smallest right singular vector of the sample matrix.
pub fn linear_weingarten_fit(s: &SampledSurface) -> LinearWeingartenFit {
    let n = s.kappa1.len();
    let nv = s.spec.nv;
    let mut m = nalgebra::DMatrix::zeros(n, 3);
    for k in 0..n {
        let (i, j) = (k / nv, k % nv);
        let kk = s.kappa1.at(i, j) * s.kappa2.at(i, j);
        let h = 0.5 * (s.kappa1.at(i, j) + s.kappa2.at(i, j));
        m[(k, 0)] = kk;
        m[(k, 1)] = 2.0 * h;
        m[(k, 2)] = 1.0;
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("svd requested v_t");
    let last = vt.nrows() - 1;
    let row = vt.row(last);
    let mut coeff = [row[0], row[1], row[2]];
    // Deterministic sign: make the first nonzero coefficient positive.
    if let Some(first) = coeff.iter().find(|x| x.abs() > 1e-14) {
        if *first < 0.0 {
            for c in &mut coeff {
                *c = -*c;
            }
        }
    }
    let residual = linear_weingarten_residual(s, coeff[0], coeff[1], coeff[2]);
    LinearWeingartenFit {
        coefficients: coeff,
        residual,
        discriminant: coeff[1] * coeff[1] - coeff[0] * coeff[2],
    }
}
