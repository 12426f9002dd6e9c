//! Absolute configurations and the subgeometry data they induce.
//!
//! A point sphere complex `p` (timelike, `(p,p) = -1`) cuts Moebius
//! geometry out of Lie sphere geometry; a space form vector `q` in
//! `{p}^perp` selects the quadric of constant curvature
//! `kappa = -(q,q)` together with its dual hyperplane complex:
//!
//! ```text
//!   Q^n = { y null | (y,p) =  0, (y,q) = -1 }   (points)
//!   P^n = { y null | (y,p) = -1, (y,q) =  0 }   (tangent hyperplanes)
//! ```
//!
//! Other absolute configurations handled here are sphere pencils
//! (projective lines of spheres, classified elliptic / parabolic /
//! hyperbolic by their span signature) and Dupin cyclide decompositions
//! `R^{4,2} = R^{2,1} (+)_perp R^{2,1}`.

use thiserror::Error;

use crate::pseudo_euclidean::{
    inner, quadratic, signature_of_span_with, Space, SpaceKind, SignatureTriple, Vector,
    EPS_SIG_REL,
};
use crate::sphere_models::{HomPoint, HomSphere};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymmetryBreakingError {
    #[error("point sphere complex must satisfy (p,p) = -1, got {value:.3e}")]
    InvalidPointSphereComplex { value: f64 },
    #[error("gauge requires (p,q) = 0, got {value:.3e}")]
    GaugeNotOrthogonal { value: f64 },
    #[error("pencil basis vectors are dependent or span a degenerate plane")]
    DegenerateSpan,
    #[error("sphere vector is not normalized: (s,s) = {value:.3e}")]
    UnnormalizedSphere { value: f64 },
    #[error("contact element must be a null, isotropic 2-plane (residual {residual:.3e})")]
    NotContactElement { residual: f64 },
    #[error("the contact element admits no representative for the affine conditions")]
    DegenerateProjection,
    #[error("cyclide decomposition invariant violated: {reason}")]
    InvalidDecomposition { reason: &'static str },
}

/// Tolerance for gauge and contact-element invariants.
pub const EPS_GAUGE: f64 = 1e-10;

/// The pair (p, q) of point sphere complex and space form vector that
/// performs the symmetry breaking. In Moebius-only mode `p` is absent.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgeometryGauge {
    p: Option<Vector>,
    q: Vector,
}

impl SubgeometryGauge {
    /// A Lie-space gauge: requires `(p,p) = -1` and `(p,q) = 0`.
    /// A non-orthogonal pair is rejected rather than orthogonalized,
    /// since the Q/P duality assumes the conditions exactly.
    pub fn lie(p: Vector, q: Vector) -> Result<Self, SymmetryBreakingError> {
        let pp = quadratic(&p);
        if (pp + 1.0).abs() > EPS_GAUGE {
            return Err(SymmetryBreakingError::InvalidPointSphereComplex { value: pp });
        }
        let pq = inner(&p, &q);
        if pq.abs() > EPS_GAUGE * p.euclid_norm() * q.euclid_norm() {
            return Err(SymmetryBreakingError::GaugeNotOrthogonal { value: pq });
        }
        Ok(SubgeometryGauge { p: Some(p), q })
    }

    /// A Moebius-only gauge (no point sphere complex).
    pub fn moebius(q: Vector) -> Self {
        SubgeometryGauge { p: None, q }
    }

    /// The standard Euclidean gauge of a Lie space: `p` the basis slot,
    /// `q = 2 inf`.
    pub fn euclidean_lie(space: Space) -> Self {
        assert_eq!(space.kind(), SpaceKind::Lie);
        SubgeometryGauge {
            p: Some(space.point_sphere_complex()),
            q: space.infinity().scale(2.0),
        }
    }

    pub fn p(&self) -> Option<&Vector> {
        self.p.as_ref()
    }

    pub fn q(&self) -> &Vector {
        &self.q
    }

    pub fn space(&self) -> Space {
        self.q.space()
    }
}

/// Sectional curvature of the space form selected by `q`:
/// `kappa = -(q,q)`. Zero is Euclidean, positive spherical, negative
/// hyperbolic.
pub fn space_form_curvature(q: &Vector) -> f64 {
    -quadratic(q)
}

/// Mean curvature of a normalized hypersphere vector in the space form
/// of `q`: `H = -(s,q)`. Requires `(s,s) = 1`; spheres with `(s,q) = 0`
/// are exactly the hyperplanes of the space form.
pub fn sphere_mean_curvature(s: &HomSphere, q: &Vector) -> Result<f64, SymmetryBreakingError> {
    let ss = quadratic(s.vector());
    if (ss - 1.0).abs() > EPS_GAUGE {
        return Err(SymmetryBreakingError::UnnormalizedSphere { value: ss });
    }
    Ok(-inner(s.vector(), q))
}

/// The three kinds of sphere pencil, by how the projective line meets
/// the point-sphere quadric.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PencilClass {
    /// Span signature (2,0): the pencil spheres intersect in a circle.
    Elliptic,
    /// Span signature (1,0,1): the pencil touches the quadric in one point.
    Parabolic,
    /// Span signature (1,1): two base point spheres.
    Hyperbolic,
}

/// A pencil of spheres spanned by two independent Moebius sphere
/// vectors, with its span signature cached at construction.
#[derive(Debug, Clone)]
pub struct SpherePencil {
    s1: HomSphere,
    s2: HomSphere,
    signature: SignatureTriple,
}

impl SpherePencil {
    pub fn new(s1: HomSphere, s2: HomSphere) -> Result<Self, SymmetryBreakingError> {
        Self::with_eps(s1, s2, EPS_SIG_REL)
    }

    pub fn with_eps(
        s1: HomSphere,
        s2: HomSphere,
        eps_sig: f64,
    ) -> Result<Self, SymmetryBreakingError> {
        let signature =
            signature_of_span_with(&[s1.vector().clone(), s2.vector().clone()], eps_sig)
                .map_err(|_| SymmetryBreakingError::DegenerateSpan)?;
        if signature.dim() != 2 {
            return Err(SymmetryBreakingError::DegenerateSpan);
        }
        Ok(SpherePencil { s1, s2, signature })
    }

    pub fn basis(&self) -> (&HomSphere, &HomSphere) {
        (&self.s1, &self.s2)
    }

    pub fn signature(&self) -> SignatureTriple {
        self.signature
    }
}

/// Classifies a pencil from its cached span signature.
pub fn classify_pencil(pencil: &SpherePencil) -> Result<PencilClass, SymmetryBreakingError> {
    match (
        pencil.signature.positive,
        pencil.signature.negative,
        pencil.signature.null,
    ) {
        (2, 0, 0) => Ok(PencilClass::Elliptic),
        (1, 0, 1) => Ok(PencilClass::Parabolic),
        (1, 1, 0) => Ok(PencilClass::Hyperbolic),
        _ => Err(SymmetryBreakingError::DegenerateSpan),
    }
}

/// The point spheres contained in the pencil: real projective roots of
/// `(a s1 + b s2, a s1 + b s2) = 0`. The count is 0 / 1 / 2 for
/// elliptic / parabolic / hyperbolic pencils.
pub fn pencil_base_points(pencil: &SpherePencil) -> Vec<HomPoint> {
    pencil_base_points_with(pencil, EPS_SIG_REL)
}

pub fn pencil_base_points_with(pencil: &SpherePencil, eps_rel: f64) -> Vec<HomPoint> {
    let s1 = pencil.s1.vector();
    let s2 = pencil.s2.vector();
    let g11 = quadratic(s1);
    let g12 = inner(s1, s2);
    let g22 = quadratic(s2);
    // Projective quadratic a^2 g11 + 2ab g12 + b^2 g22 = 0.
    let disc = g12 * g12 - g11 * g22;
    let scale = (g11.abs().max(g22.abs()).max(g12.abs())).max(1.0);
    let eps = eps_rel * scale * scale;
    let mut roots: Vec<(f64, f64)> = Vec::new();
    if disc.abs() <= eps {
        // Double root: parabolic tangency direction.
        if g11.abs() >= g22.abs() && g11.abs() > eps {
            roots.push((-g12, g11));
        } else if g22.abs() > eps {
            roots.push((g22, -g12));
        }
    } else if disc > 0.0 {
        let sq = disc.sqrt();
        if g11.abs() >= g22.abs() && g11.abs() > eps {
            // Solve g11 t^2 + 2 g12 t + g22 = 0 for t = a/b.
            for t in [(-g12 + sq) / g11, (-g12 - sq) / g11] {
                roots.push((t, 1.0));
            }
        } else if g22.abs() > eps {
            for t in [(-g12 + sq) / g22, (-g12 - sq) / g22] {
                roots.push((1.0, t));
            }
        } else {
            // g11 ~ g22 ~ 0: the basis vectors are already null.
            roots.push((1.0, 0.0));
            roots.push((0.0, 1.0));
        }
    }
    roots
        .into_iter()
        .filter_map(|(a, b)| {
            let v = s1.combine(a, s2, b);
            let norm = v.euclid_norm();
            if norm < 1e-12 {
                return None;
            }
            HomPoint::new(v.scale(1.0 / norm)).ok()
        })
        .collect()
}

/// A contact element: a null, totally isotropic 2-plane of the Lie
/// space, spanned by two null, mutually orthogonal sphere vectors.
#[derive(Debug, Clone)]
pub struct ContactElement {
    sigma1: Vector,
    sigma2: Vector,
}

impl ContactElement {
    pub fn new(sigma1: Vector, sigma2: Vector) -> Result<Self, SymmetryBreakingError> {
        let scale1 = sigma1.euclid_norm();
        let scale2 = sigma2.euclid_norm();
        let r = quadratic(&sigma1).abs() / (scale1 * scale1).max(f64::MIN_POSITIVE)
            + quadratic(&sigma2).abs() / (scale2 * scale2).max(f64::MIN_POSITIVE)
            + inner(&sigma1, &sigma2).abs() / (scale1 * scale2).max(f64::MIN_POSITIVE);
        if r > 3.0 * EPS_GAUGE {
            return Err(SymmetryBreakingError::NotContactElement { residual: r });
        }
        Ok(ContactElement { sigma1, sigma2 })
    }

    pub fn span(&self) -> (&Vector, &Vector) {
        (&self.sigma1, &self.sigma2)
    }
}

/// The space form projection of a contact element: the unique
/// representatives `xi` (in Q^n) and `nu` (in P^n) inside the span.
pub fn space_form_projection(
    ce: &ContactElement,
    gauge: &SubgeometryGauge,
) -> Result<(HomPoint, HomSphere), SymmetryBreakingError> {
    let p = gauge
        .p()
        .ok_or(SymmetryBreakingError::DegenerateProjection)?;
    let q = gauge.q();
    let (s1, s2) = ce.span();
    let a = inner(s1, p);
    let b = inner(s2, p);
    let c = inner(s1, q);
    let d = inner(s2, q);
    let det = a * d - b * c;
    let scale = (a.abs() + b.abs()) * (c.abs() + d.abs());
    if det.abs() <= 1e-14 * scale.max(1e-300) {
        return Err(SymmetryBreakingError::DegenerateProjection);
    }
    // xi: (xi,p) = 0, (xi,q) = -1; nu: (nu,p) = -1, (nu,q) = 0.
    let (x1, x2) = ((-1.0) * (-b) / det, (-1.0) * a / det);
    let xi = s1.combine(x1, s2, x2);
    let (n1, n2) = ((-1.0) * d / det, (-1.0) * (-c) / det);
    let nu = s1.combine(n1, s2, n2);
    let xi = HomPoint::new(xi).map_err(|_| SymmetryBreakingError::DegenerateProjection)?;
    let nu = HomSphere::new(nu).map_err(|_| SymmetryBreakingError::DegenerateProjection)?;
    Ok((xi, nu))
}

/// An orthogonal decomposition of the Lie space of S^3 into two
/// signature-(2,1) subspaces; the algebraic carrier of a Dupin cyclide.
#[derive(Debug, Clone)]
pub struct CyclideDecomposition {
    v_plus: [Vector; 3],
    v_minus: [Vector; 3],
}

impl CyclideDecomposition {
    pub fn new(
        v_plus: [Vector; 3],
        v_minus: [Vector; 3],
    ) -> Result<Self, SymmetryBreakingError> {
        let space = v_plus[0].space();
        if space.kind() != SpaceKind::Lie || space.geometry_dim() != 3 {
            return Err(SymmetryBreakingError::InvalidDecomposition {
                reason: "decomposition lives in the Lie space of S^3",
            });
        }
        for a in &v_plus {
            for b in &v_minus {
                let denom = (a.euclid_norm() * b.euclid_norm()).max(f64::MIN_POSITIVE);
                if inner(a, b).abs() > EPS_GAUGE * denom {
                    return Err(SymmetryBreakingError::InvalidDecomposition {
                        reason: "subspaces are not orthogonal",
                    });
                }
            }
        }
        let expect = SignatureTriple {
            positive: 2,
            negative: 1,
            null: 0,
        };
        for half in [&v_plus, &v_minus] {
            let sig = signature_of_span_with(&half.to_vec(), EPS_SIG_REL)
                .map_err(|_| SymmetryBreakingError::InvalidDecomposition {
                    reason: "empty span",
                })?;
            if sig != expect {
                return Err(SymmetryBreakingError::InvalidDecomposition {
                    reason: "subspace signature is not (2,1)",
                });
            }
        }
        Ok(CyclideDecomposition { v_plus, v_minus })
    }

    /// The decomposition carrying the torus with tube radius `minor`
    /// about the circle of radius `major`: V+ is spanned by the lifts
    /// of the first sphere family (radius `minor`, centres on the
    /// circle), V- by its orthogonal complement.
    pub fn torus(major: f64, minor: f64) -> Result<Self, SymmetryBreakingError> {
        if !(major > minor && minor > 0.0) {
            return Err(SymmetryBreakingError::InvalidDecomposition {
                reason: "torus decomposition needs major > minor > 0",
            });
        }
        let s = Space::lie(3);
        let r2 = major * major - minor * minor;
        let v0 = s
            .origin()
            .add(&s.infinity().scale(r2))
            .add(&s.point_sphere_complex().scale(minor));
        let v_plus = [v0, s.e(1), s.e(2)];
        let w1 = s.e(3);
        let w2 = s.origin().sub(&s.infinity().scale(r2));
        let w3 = s
            .point_sphere_complex()
            .sub(&s.infinity().scale(2.0 * minor));
        Self::new(v_plus, [w1, w2, w3])
    }

    pub fn v_plus(&self) -> &[Vector; 3] {
        &self.v_plus
    }

    pub fn v_minus(&self) -> &[Vector; 3] {
        &self.v_minus
    }

    pub fn space(&self) -> Space {
        self.v_plus[0].space()
    }

    fn half_frame(half: &[Vector; 3]) -> ([Vector; 2], Vector) {
        // Orthonormalize the (2,1) subspace into two unit spacelike
        // vectors and one unit timelike vector, via the restricted Gram.
        let space = half[0].space();
        let mut gram = nalgebra::DMatrix::zeros(3, 3);
        for i in 0..3 {
            for j in 0..3 {
                gram[(i, j)] = inner(&half[i], &half[j]);
            }
        }
        let eig = nalgebra::SymmetricEigen::new(gram);
        let mut spacelike: Vec<Vector> = Vec::new();
        let mut timelike: Option<Vector> = None;
        for k in 0..3 {
            let l = eig.eigenvalues[k];
            let col = eig.eigenvectors.column(k);
            let mut v = space.zero();
            for i in 0..3 {
                v = v.add(&half[i].scale(col[i]));
            }
            let v = v.scale(1.0 / l.abs().sqrt());
            if l > 0.0 {
                spacelike.push(v);
            } else {
                timelike = Some(v);
            }
        }
        (
            [spacelike[0].clone(), spacelike[1].clone()],
            timelike.expect("signature (2,1) has a timelike direction"),
        )
    }

    /// Parametrizes the null cone of one half: for orthonormalized
    /// spacelike u1, u2 and timelike u3 the curve
    /// `sigma(theta) = cos(theta) u1 + sin(theta) u2 + u3` is null.
    pub fn null_curve_plus(&self, theta: f64) -> Vector {
        let (sp, t) = Self::half_frame(&self.v_plus);
        sp[0]
            .scale(theta.cos())
            .add(&sp[1].scale(theta.sin()))
            .add(&t)
    }

    pub fn null_curve_minus(&self, theta: f64) -> Vector {
        let (sp, t) = Self::half_frame(&self.v_minus);
        sp[0]
            .scale(theta.cos())
            .add(&sp[1].scale(theta.sin()))
            .add(&t)
    }
}

/// The contact element of the cyclide at parameters `(theta_plus,
/// theta_minus)`: the span of one null direction from each half, which
/// is automatically isotropic because the halves are orthogonal.
pub fn cyclide_contact_elements(
    cd: &CyclideDecomposition,
    theta_plus: f64,
    theta_minus: f64,
) -> Result<ContactElement, SymmetryBreakingError> {
    ContactElement::new(
        cd.null_curve_plus(theta_plus),
        cd.null_curve_minus(theta_minus),
    )
}

/// The classifying invariants of a cyclide with respect to a point
/// sphere complex: the squared norms of the components of `p` along the
/// two halves (their sum is `(p,p) = -1`) and their causal characters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclideClassification {
    pub pp_plus: f64,
    pub pp_minus: f64,
    pub plus_character: CausalCharacter,
    pub minus_character: CausalCharacter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausalCharacter {
    Spacelike,
    Timelike,
    Null,
}

fn character(value: f64, eps: f64) -> CausalCharacter {
    if value > eps {
        CausalCharacter::Spacelike
    } else if value < -eps {
        CausalCharacter::Timelike
    } else {
        CausalCharacter::Null
    }
}

/// Splits the gauge's point sphere complex along the decomposition and
/// reports `(p^+, p^+)` and `(p^-, p^-)`.
pub fn classify_cyclide(
    cd: &CyclideDecomposition,
    gauge: &SubgeometryGauge,
) -> Result<CyclideClassification, SymmetryBreakingError> {
    let p = gauge
        .p()
        .ok_or(SymmetryBreakingError::InvalidDecomposition {
            reason: "classification needs a point sphere complex",
        })?;
    let p_plus = project_onto(cd.v_plus(), p);
    let p_minus = project_onto(cd.v_minus(), p);
    let pp_plus = quadratic(&p_plus);
    let pp_minus = quadratic(&p_minus);
    Ok(CyclideClassification {
        pp_plus,
        pp_minus,
        plus_character: character(pp_plus, EPS_GAUGE),
        minus_character: character(pp_minus, EPS_GAUGE),
    })
}

/// Orthogonal projection of `v` onto the nondegenerate subspace spanned
/// by `basis`, with respect to the ambient inner product.
fn project_onto(basis: &[Vector; 3], v: &Vector) -> Vector {
    let mut gram = nalgebra::DMatrix::zeros(3, 3);
    let mut rhs = nalgebra::DVector::zeros(3);
    for i in 0..3 {
        rhs[i] = inner(&basis[i], v);
        for j in 0..3 {
            gram[(i, j)] = inner(&basis[i], &basis[j]);
        }
    }
    let coeffs = gram.lu().solve(&rhs).expect("nondegenerate Gram");
    let mut out = basis[0].space().zero();
    for i in 0..3 {
        out = out.add(&basis[i].scale(coeffs[i]));
    }
    out
}

/// Convenience: the residual of membership of a vector in the span of a
/// contact element (Euclidean distance to the span of unit basis).
pub fn span_membership_residual(ce: &ContactElement, v: &Vector) -> f64 {
    let (s1, s2) = ce.span();
    let d = v.space().dim();
    let mut a = nalgebra::DMatrix::zeros(d, 2);
    a.set_column(0, s1.coords());
    a.set_column(1, s2.coords());
    let svd = a.svd(true, false);
    let u = svd.u.as_ref().unwrap();
    let proj = u * (u.transpose() * v.coords());
    (v.coords() - proj).norm() / v.euclid_norm().max(f64::MIN_POSITIVE)
}

pub use crate::pseudo_euclidean::apply as apply_matrix;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_models::{
        euclidean_gauge_q, lift_point, lift_sphere_moebius, EuclideanSphereData,
        incidence_residual,
    };
    use approx::assert_abs_diff_eq;

    fn m3() -> Space {
        Space::moebius(3)
    }

    #[test]
    fn curvature_examples() {
        let s = m3();
        assert_eq!(space_form_curvature(&euclidean_gauge_q(s)), 0.0);
        // (q,q) = -1 -> kappa = 1 (spherical).
        let q = s.origin().add(&s.infinity());
        assert_abs_diff_eq!(space_form_curvature(&q), 1.0, epsilon = 1e-15);
        // (q,q) = +1 -> kappa = -1 (hyperbolic).
        let q = s.origin().sub(&s.infinity());
        assert_abs_diff_eq!(space_form_curvature(&q), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn mean_curvature_examples() {
        let s = m3();
        let q = euclidean_gauge_q(s);
        let sphere =
            lift_sphere_moebius(s, &EuclideanSphereData::sphere(&[1.0, 0.0, 2.0], 2.0)).unwrap();
        assert_abs_diff_eq!(sphere_mean_curvature(&sphere, &q).unwrap(), 0.5, epsilon = 1e-14);
        let plane =
            lift_sphere_moebius(s, &EuclideanSphereData::plane(&[0.0, 0.0, 1.0], 3.0)).unwrap();
        assert_abs_diff_eq!(sphere_mean_curvature(&plane, &q).unwrap(), 0.0, epsilon = 1e-15);
    }

    fn pencil_of(
        a: &EuclideanSphereData,
        b: &EuclideanSphereData,
    ) -> SpherePencil {
        let s = m3();
        SpherePencil::new(
            lift_sphere_moebius(s, a).unwrap(),
            lift_sphere_moebius(s, b).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn pencil_trichotomy_hand_cases() {
        let unit = EuclideanSphereData::sphere(&[0.0; 3], 1.0);
        let plane0 = EuclideanSphereData::plane(&[0.0, 0.0, 1.0], 0.0);
        let plane1 = EuclideanSphereData::plane(&[0.0, 0.0, 1.0], 1.0);
        let twice = EuclideanSphereData::sphere(&[0.0; 3], 2.0);

        let elliptic = pencil_of(&unit, &plane0);
        assert_eq!(classify_pencil(&elliptic).unwrap(), PencilClass::Elliptic);
        assert_eq!(pencil_base_points(&elliptic).len(), 0);

        let parabolic = pencil_of(&unit, &plane1);
        assert_eq!(classify_pencil(&parabolic).unwrap(), PencilClass::Parabolic);
        let base = pencil_base_points(&parabolic);
        assert_eq!(base.len(), 1);
        let q = euclidean_gauge_q(m3());
        let x = crate::sphere_models::project_point(&base[0], &q).unwrap();
        assert_abs_diff_eq!(x[0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(x[2], 1.0, epsilon = 1e-9);

        let hyperbolic = pencil_of(&unit, &twice);
        assert_eq!(classify_pencil(&hyperbolic).unwrap(), PencilClass::Hyperbolic);
        let base = pencil_base_points(&hyperbolic);
        assert_eq!(base.len(), 2);
        // The two base points are the common centre and infinity.
        let mut seen_centre = false;
        let mut seen_infinity = false;
        for hp in &base {
            match crate::sphere_models::project_point(&hp, &q) {
                Ok(x) => {
                    if x.iter().all(|&c| c.abs() < 1e-9) {
                        seen_centre = true;
                    }
                }
                Err(_) => seen_infinity = true,
            }
        }
        assert!(seen_centre && seen_infinity);
    }

    #[test]
    fn parabolic_base_point_lies_on_every_pencil_sphere() {
        // The tangency point of a parabolic pencil is incident with all
        // pencil members.
        let unit = EuclideanSphereData::sphere(&[0.0; 3], 1.0);
        let plane1 = EuclideanSphereData::plane(&[0.0, 0.0, 1.0], 1.0);
        let pencil = pencil_of(&unit, &plane1);
        let (s1, s2) = pencil.basis();
        let base = pencil_base_points(&pencil);
        assert_eq!(base.len(), 1);
        // lambda = 1 is the tangency direction itself; skip it.
        for lambda in [0.0, 0.5, 2.0, -2.0] {
            let member =
                HomSphere::from_spacelike(s1.vector().combine(1.0, s2.vector(), lambda)).unwrap();
            assert!(incidence_residual(&base[0], &member).abs() < 1e-10);
        }
    }

    #[test]
    fn hyperbolic_base_points_are_null_members_of_the_pencil() {
        // The two base points of a hyperbolic pencil are the limit
        // point-spheres inside the pencil: null combinations of the
        // basis, not common points of the member spheres.
        let unit = EuclideanSphereData::sphere(&[0.0; 3], 1.0);
        let twice = EuclideanSphereData::sphere(&[0.0; 3], 2.0);
        let pencil = pencil_of(&unit, &twice);
        let base = pencil_base_points(&pencil);
        assert_eq!(base.len(), 2);
        for hp in &base {
            assert!(quadratic(hp.vector()).abs() < 1e-12);
            // Membership: the point vector lies in the pencil span.
            let (s1, s2) = pencil.basis();
            let ce_like = [s1.vector().clone(), s2.vector().clone(), hp.vector().clone()];
            let sig = signature_of_span_with(&ce_like, EPS_SIG_REL).unwrap();
            assert_eq!(sig.dim(), 2, "base point escapes the pencil span");
        }
    }

    #[test]
    fn space_form_projection_plane_contact_element() {
        let s = Space::lie(3);
        let gauge = SubgeometryGauge::euclidean_lie(s);
        // Contact element of the plane z = 0 at the origin.
        let ce = ContactElement::new(s.origin(), s.e(3).add(&s.point_sphere_complex())).unwrap();
        let (xi, nu) = space_form_projection(&ce, &gauge).unwrap();
        assert!((xi.vector().sub(&s.origin())).euclid_norm() < 1e-13);
        let expected_nu = s.e(3).add(&s.point_sphere_complex());
        assert!((nu.vector().sub(&expected_nu)).euclid_norm() < 1e-13);
    }

    #[test]
    fn space_form_projection_sphere_contact_element() {
        // Contact element of the unit sphere at (0,0,1): the pencil of
        // the sphere and its tangent plane z = 1 there.
        let s = Space::lie(3);
        let gauge = SubgeometryGauge::euclidean_lie(s);
        let sphere = crate::sphere_models::lift_sphere_lie(
            s,
            &EuclideanSphereData::sphere(&[0.0; 3], 1.0),
        );
        // Inward co-orientation: the tangent plane's normal points
        // towards the sphere centre.
        let plane = crate::sphere_models::lift_sphere_lie(
            s,
            &EuclideanSphereData::plane(&[0.0, 0.0, -1.0], -1.0),
        );
        let ce = ContactElement::new(sphere.vector().clone(), plane.vector().clone()).unwrap();
        let (xi, nu) = space_form_projection(&ce, &gauge).unwrap();
        // xi is (proportional to) the lift of the touch point (0,0,1).
        let q = gauge.q();
        let x = crate::sphere_models::project_point(&xi, q).unwrap();
        assert_abs_diff_eq!(x[2], 1.0, epsilon = 1e-12);
        assert!(x[0].abs() < 1e-12 && x[1].abs() < 1e-12);
        // nu decodes to the tangent plane z = 1.
        match crate::sphere_models::sphere_data(&nu, q).unwrap() {
            EuclideanSphereData::Plane { normal, offset } => {
                assert_abs_diff_eq!(normal[2].abs(), 1.0, epsilon = 1e-12);
                assert_abs_diff_eq!(offset * normal[2].signum(), 1.0, epsilon = 1e-12);
            }
            _ => panic!("expected the tangent plane"),
        }
        // The projected representatives satisfy all four conditions.
        let p = gauge.p().unwrap();
        assert!(inner(xi.vector(), p).abs() < 1e-12);
        assert_abs_diff_eq!(inner(xi.vector(), q), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(inner(nu.vector(), p), -1.0, epsilon = 1e-12);
        assert!(inner(nu.vector(), q).abs() < 1e-12);
        // And they lie in the span.
        assert!(span_membership_residual(&ce, xi.vector()) < 1e-12);
        assert!(span_membership_residual(&ce, nu.vector()) < 1e-12);
    }

    #[test]
    fn torus_decomposition_null_curves() {
        let cd = CyclideDecomposition::torus(2.0, 1.0).unwrap();
        for k in 0..8 {
            let theta = k as f64 * std::f64::consts::PI / 4.0 + 0.1;
            let sp = cd.null_curve_plus(theta);
            let sm = cd.null_curve_minus(1.3 * theta);
            assert!(quadratic(&sp).abs() < 1e-12 * sp.euclid_norm().powi(2));
            assert!(quadratic(&sm).abs() < 1e-12 * sm.euclid_norm().powi(2));
            assert!(inner(&sp, &sm).abs() < 1e-12 * sp.euclid_norm() * sm.euclid_norm());
        }
    }

    #[test]
    fn torus_contact_elements_sweep_the_torus() {
        let (major, minor) = (2.0, 1.0);
        let cd = CyclideDecomposition::torus(major, minor).unwrap();
        let gauge = SubgeometryGauge::euclidean_lie(Space::lie(3));
        for a in 0..6 {
            for b in 0..6 {
                let tp = a as f64 + 0.05;
                let tm = 0.7 * b as f64 + 0.2;
                let ce = cyclide_contact_elements(&cd, tp, tm).unwrap();
                let (xi, _nu) = space_form_projection(&ce, &gauge).unwrap();
                let x = crate::sphere_models::project_point(&xi, gauge.q()).unwrap();
                let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let implicit = (rho - major).powi(2) + x[2] * x[2] - minor * minor;
                assert!(implicit.abs() < 1e-10, "implicit residual {implicit}");
            }
        }
    }

    #[test]
    fn classify_cyclide_torus() {
        let cd = CyclideDecomposition::torus(2.0, 1.0).unwrap();
        let gauge = SubgeometryGauge::euclidean_lie(Space::lie(3));
        let report = classify_cyclide(&cd, &gauge).unwrap();
        assert_abs_diff_eq!(report.pp_plus + report.pp_minus, -1.0, epsilon = 1e-12);
        assert_eq!(report.plus_character, CausalCharacter::Timelike);
        assert_abs_diff_eq!(report.pp_plus, -0.25, epsilon = 1e-12);
    }

    #[test]
    fn gauge_rejects_non_orthogonal_pair() {
        let s = Space::lie(3);
        let p = s.point_sphere_complex();
        let q = s.infinity().scale(2.0).add(&p.scale(0.5));
        assert!(matches!(
            SubgeometryGauge::lie(p, q),
            Err(SymmetryBreakingError::GaugeNotOrthogonal { .. })
        ));
    }

    #[test]
    fn lifted_points_project_on_sphere_pencil_classification_consistency() {
        // Tangent spheres: parabolic; verified against the root-count
        // discriminant oracle.
        let s = m3();
        let a = lift_sphere_moebius(s, &EuclideanSphereData::sphere(&[0.0; 3], 1.0)).unwrap();
        let b =
            lift_sphere_moebius(s, &EuclideanSphereData::sphere(&[3.0, 0.0, 0.0], 2.0)).unwrap();
        let pencil = SpherePencil::new(a.clone(), b.clone()).unwrap();
        assert_eq!(classify_pencil(&pencil).unwrap(), PencilClass::Parabolic);
        let g11 = quadratic(a.vector());
        let g12 = inner(a.vector(), b.vector());
        let g22 = quadratic(b.vector());
        assert!((g12 * g12 - g11 * g22).abs() < 1e-12);
        assert_eq!(pencil_base_points(&pencil).len(), 1);
    }

    #[test]
    fn lift_point_on_torus_example() {
        // Independent check that the first torus sphere family consists
        // of lifts of spheres centred on the major circle.
        let s = Space::lie(3);
        let cd = CyclideDecomposition::torus(2.0, 1.0).unwrap();
        let sp = cd.null_curve_plus(0.4);
        let q = euclidean_gauge_q(s);
        let hs = HomSphere::new(sp).unwrap();
        match crate::sphere_models::sphere_data(&hs, &q).unwrap() {
            EuclideanSphereData::Sphere { center, radius } => {
                let rho = (center[0] * center[0] + center[1] * center[1]).sqrt();
                assert_abs_diff_eq!(rho, 2.0, epsilon = 1e-12);
                assert_abs_diff_eq!(center[2], 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(radius.abs(), 1.0, epsilon = 1e-12);
            }
            _ => panic!("expected a sphere"),
        }
        let _ = lift_point(s, &[0.0, 0.0, 0.0]);
    }
}
