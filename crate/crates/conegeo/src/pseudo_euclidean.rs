//! Indefinite-signature linear algebra over the fixed coordinate spaces.
//!
//! The models of sphere geometry live in two pseudo-Euclidean spaces:
//! R^{n+1,1} for Moebius geometry and R^{n+1,2} for Lie sphere geometry.
//! Both are represented over the null basis
//!
//! ```text
//!   (o, e_1, ..., e_n, inf [, p])
//! ```
//!
//! with the pairings `(o,o) = (inf,inf) = 0`, `(o,inf) = -1/2`,
//! `(e_i,e_j) = delta_ij`, `(p,p) = -1` and all other basis pairings 0.
//! The extra timelike vector `p` (the point sphere complex slot) is only
//! present in Lie spaces. The null pair `(o, inf)` keeps the lift
//! formulas of [`crate::sphere_models`] rational and exact.
//!
//! An orthonormal view (diagonal Gram) is available through
//! [`Space::orthonormal_frame`]: the timelike directions are `o + inf`
//! (and `p`), the spacelike ones `e_1, ..., e_n` and `o - inf`. It is
//! used internally whenever an honest symmetric eigenproblem is needed.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Which sphere-geometry model a coordinate space belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// Signature (n+1, 1), dimension n+2, no point sphere complex slot.
    Moebius,
    /// Signature (n+1, 2), dimension n+3, with the timelike slot `p`.
    Lie,
}

/// A fixed pseudo-Euclidean coordinate space for sphere geometry on S^n.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Space {
    n: usize,
    kind: SpaceKind,
}

/// Errors of the linear-algebra layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PseudoEuclideanError {
    /// The mirror vector of a reflection is null (or numerically so).
    #[error("reflection mirror is null: |(m,m)| = {norm:.3e} below tolerance")]
    NullMirror { norm: f64 },
    /// A spanning set was empty where a nonempty one is required.
    #[error("empty spanning set")]
    EmptySpan,
}

impl Space {
    pub fn moebius(n: usize) -> Self {
        Space {
            n,
            kind: SpaceKind::Moebius,
        }
    }

    pub fn lie(n: usize) -> Self {
        Space {
            n,
            kind: SpaceKind::Lie,
        }
    }

    /// Geometry dimension n (the ambient sphere is S^n).
    pub fn geometry_dim(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    /// Coordinate dimension: n+2 for Moebius spaces, n+3 for Lie spaces.
    pub fn dim(&self) -> usize {
        match self.kind {
            SpaceKind::Moebius => self.n + 2,
            SpaceKind::Lie => self.n + 3,
        }
    }

    /// Index of the `o` slot.
    pub fn slot_o(&self) -> usize {
        0
    }

    /// Index of the `e_i` slot, `i` in `1..=n`.
    pub fn slot_e(&self, i: usize) -> usize {
        assert!(i >= 1 && i <= self.n, "basis index e_{i} out of range");
        i
    }

    /// Index of the `inf` slot.
    pub fn slot_inf(&self) -> usize {
        self.n + 1
    }

    /// Index of the `p` slot of a Lie space.
    pub fn slot_p(&self) -> usize {
        assert_eq!(self.kind, SpaceKind::Lie, "Moebius space has no p slot");
        self.n + 2
    }

    /// The Moebius space obtained by dropping the `p` slot.
    pub fn moebius_reduction(&self) -> Space {
        Space::moebius(self.n)
    }

    /// Gram matrix of the null basis.
    pub fn gram(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut g = DMatrix::zeros(d, d);
        g[(self.slot_o(), self.slot_inf())] = -0.5;
        g[(self.slot_inf(), self.slot_o())] = -0.5;
        for i in 1..=self.n {
            g[(i, i)] = 1.0;
        }
        if self.kind == SpaceKind::Lie {
            let p = self.slot_p();
            g[(p, p)] = -1.0;
        }
        g
    }

    /// Change of basis into an orthonormal frame: the columns are the
    /// frame vectors in null-basis coordinates, ordered so that the
    /// first `n+1` columns are spacelike (`e_1, ..., e_n, o - inf`) and
    /// the remaining ones timelike (`o + inf` and, for Lie spaces, `p`).
    pub fn orthonormal_frame(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for i in 1..=self.n {
            m[(i, i - 1)] = 1.0;
        }
        // spacelike o - inf
        m[(self.slot_o(), self.n)] = 1.0;
        m[(self.slot_inf(), self.n)] = -1.0;
        // timelike o + inf
        m[(self.slot_o(), self.n + 1)] = 1.0;
        m[(self.slot_inf(), self.n + 1)] = 1.0;
        if self.kind == SpaceKind::Lie {
            m[(self.slot_p(), self.n + 2)] = 1.0;
        }
        m
    }

    // --- basis vectors ---

    pub fn origin(&self) -> Vector {
        self.basis(self.slot_o())
    }

    pub fn infinity(&self) -> Vector {
        self.basis(self.slot_inf())
    }

    pub fn e(&self, i: usize) -> Vector {
        self.basis(self.slot_e(i))
    }

    /// The point sphere complex vector `p` of a Lie space.
    pub fn point_sphere_complex(&self) -> Vector {
        self.basis(self.slot_p())
    }

    fn basis(&self, slot: usize) -> Vector {
        let mut coords = DVector::zeros(self.dim());
        coords[slot] = 1.0;
        Vector {
            space: *self,
            coords,
        }
    }

    pub fn zero(&self) -> Vector {
        Vector {
            space: *self,
            coords: DVector::zeros(self.dim()),
        }
    }
}

/// A vector of a fixed [`Space`], stored over the null basis.
///
/// Mixing vectors from different spaces is a programming error and
/// panics, like a dimension mismatch in any linear-algebra crate.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    space: Space,
    coords: DVector<f64>,
}

impl Vector {
    pub fn new(space: Space, coords: &[f64]) -> Self {
        assert_eq!(
            coords.len(),
            space.dim(),
            "coordinate length does not match space dimension"
        );
        Vector {
            space,
            coords: DVector::from_row_slice(coords),
        }
    }

    pub fn from_dvector(space: Space, coords: DVector<f64>) -> Self {
        assert_eq!(coords.len(), space.dim());
        Vector { space, coords }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn coord(&self, slot: usize) -> f64 {
        self.coords[slot]
    }

    /// Euclidean norm of the coordinate vector (used for relative tolerances).
    pub fn euclid_norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn scale(&self, s: f64) -> Vector {
        Vector {
            space: self.space,
            coords: &self.coords * s,
        }
    }

    pub fn add(&self, other: &Vector) -> Vector {
        check_same_space(self, other);
        Vector {
            space: self.space,
            coords: &self.coords + &other.coords,
        }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        check_same_space(self, other);
        Vector {
            space: self.space,
            coords: &self.coords - &other.coords,
        }
    }

    /// Linear combination `a*self + b*other`.
    pub fn combine(&self, a: f64, other: &Vector, b: f64) -> Vector {
        check_same_space(self, other);
        Vector {
            space: self.space,
            coords: &self.coords * a + &other.coords * b,
        }
    }

    /// Embeds a Moebius vector into the Lie space of the same geometry
    /// dimension (zero `p` component).
    pub fn into_lie(&self) -> Vector {
        assert_eq!(self.space.kind, SpaceKind::Moebius);
        let lie = Space::lie(self.space.n);
        let mut coords = DVector::zeros(lie.dim());
        coords.rows_mut(0, self.space.dim()).copy_from(&self.coords);
        Vector { space: lie, coords }
    }

    /// Drops the `p` component of a Lie vector, landing in `{p}^perp`.
    pub fn moebius_part(&self) -> Vector {
        assert_eq!(self.space.kind, SpaceKind::Lie);
        let moebius = self.space.moebius_reduction();
        let coords = DVector::from_iterator(
            moebius.dim(),
            self.coords.iter().take(moebius.dim()).copied(),
        );
        Vector {
            space: moebius,
            coords,
        }
    }
}

#[inline]
fn check_same_space(u: &Vector, v: &Vector) {
    assert_eq!(
        u.space, v.space,
        "vectors belong to different pseudo-Euclidean spaces"
    );
}

/// Signature of a restricted bilinear form: counts of positive,
/// negative and (numerically) null eigenvalue directions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignatureTriple {
    pub positive: usize,
    pub negative: usize,
    pub null: usize,
}

impl SignatureTriple {
    pub fn dim(&self) -> usize {
        self.positive + self.negative + self.null
    }
}

/// Default relative factor for the zero-eigenvalue threshold of
/// [`signature_of_span`]: `eps = EPS_SIG_REL * max(|lambda|_max, 1)`.
pub const EPS_SIG_REL: f64 = 1e-9;

/// Relative tolerance used to decide that a coordinate vector is zero
/// or that a quadratic value vanishes against the vector scale.
pub const EPS_NULL_REL: f64 = 1e-12;

/// The inner product of the space, evaluated over the null basis.
pub fn inner(u: &Vector, v: &Vector) -> f64 {
    check_same_space(u, v);
    let s = u.space;
    let uo = u.coords[s.slot_o()];
    let ui = u.coords[s.slot_inf()];
    let vo = v.coords[s.slot_o()];
    let vi = v.coords[s.slot_inf()];
    let mut acc = -0.5 * (uo * vi + ui * vo);
    for i in 1..=s.n {
        acc += u.coords[i] * v.coords[i];
    }
    if s.kind == SpaceKind::Lie {
        let p = s.slot_p();
        acc -= u.coords[p] * v.coords[p];
    }
    acc
}

/// `(v, v)` of a single vector.
pub fn quadratic(v: &Vector) -> f64 {
    inner(v, v)
}

/// Signature of the span of `vs`, with the default zero threshold.
///
/// Linearly dependent spanning sets are reduced to a basis first, so
/// the triple always sums to the dimension of the span and is invariant
/// under invertible recombination of the input.
pub fn signature_of_span(vs: &[Vector]) -> Result<SignatureTriple, PseudoEuclideanError> {
    signature_of_span_with(vs, EPS_SIG_REL)
}

/// [`signature_of_span`] with a configurable relative zero threshold.
pub fn signature_of_span_with(
    vs: &[Vector],
    eps_rel: f64,
) -> Result<SignatureTriple, PseudoEuclideanError> {
    if vs.is_empty() {
        return Err(PseudoEuclideanError::EmptySpan);
    }
    let space = vs[0].space;
    for v in vs {
        check_same_space(&vs[0], v);
    }
    let d = space.dim();
    let mut a = DMatrix::zeros(d, vs.len());
    for (k, v) in vs.iter().enumerate() {
        a.set_column(k, v.coords());
    }
    // Rank-revealing reduction of the spanning set (Euclidean SVD; the
    // span is a purely linear notion, independent of the ambient form).
    let svd = a.clone().svd(true, false);
    let smax = svd.singular_values.max().max(f64::MIN_POSITIVE);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-12 * smax)
        .count();
    if rank == 0 {
        return Ok(SignatureTriple {
            positive: 0,
            negative: 0,
            null: 0,
        });
    }
    let u = svd.u.as_ref().expect("svd requested u");
    let basis = u.columns(0, rank).into_owned();
    let restricted = basis.transpose() * space.gram() * &basis;
    let sym = nalgebra::SymmetricEigen::new(restricted);
    let lmax = sym.eigenvalues.iter().fold(0.0_f64, |m, &l| m.max(l.abs()));
    let eps = eps_rel * lmax.max(1.0);
    let mut sig = SignatureTriple {
        positive: 0,
        negative: 0,
        null: 0,
    };
    for &l in sym.eigenvalues.iter() {
        if l > eps {
            sig.positive += 1;
        } else if l < -eps {
            sig.negative += 1;
        } else {
            sig.null += 1;
        }
    }
    Ok(sig)
}

/// Reflection of `x` in the hyperplane polar to `m`:
/// `x - 2 (x,m)/(m,m) m`. Fails when the mirror is null.
pub fn reflect(x: &Vector, m: &Vector) -> Result<Vector, PseudoEuclideanError> {
    check_same_space(x, m);
    let mm = quadratic(m);
    let scale = m.euclid_norm();
    if mm.abs() <= EPS_NULL_REL * scale * scale {
        return Err(PseudoEuclideanError::NullMirror { norm: mm.abs() });
    }
    let factor = 2.0 * inner(x, m) / mm;
    Ok(x.sub(&m.scale(factor)))
}

/// Result of an isometry check: the Frobenius residual of
/// `M^T G M - G` and the thresholded verdict.
#[derive(Debug, Clone, Copy)]
pub struct IsometryCheck {
    pub residual: f64,
    pub is_isometry: bool,
}

/// Default absolute threshold for [`is_isometry`].
pub const EPS_ISOMETRY: f64 = 1e-9;

/// Checks whether `m` preserves the inner product of `space`.
pub fn is_isometry(m: &DMatrix<f64>, space: Space) -> IsometryCheck {
    is_isometry_with(m, space, EPS_ISOMETRY)
}

pub fn is_isometry_with(m: &DMatrix<f64>, space: Space, eps: f64) -> IsometryCheck {
    assert_eq!(m.nrows(), space.dim(), "matrix dimension mismatch");
    assert_eq!(m.ncols(), space.dim(), "matrix dimension mismatch");
    let g = space.gram();
    let residual = (m.transpose() * &g * m - &g).norm();
    IsometryCheck {
        residual,
        is_isometry: residual < eps,
    }
}

/// Applies a matrix (in null-basis coordinates) to a vector.
pub fn apply(m: &DMatrix<f64>, v: &Vector) -> Vector {
    assert_eq!(m.ncols(), v.space.dim(), "matrix dimension mismatch");
    Vector {
        space: v.space,
        coords: m * &v.coords,
    }
}

/// An orthonormal (in the Euclidean sense) basis of the orthogonal
/// complement `{vs}^perp` with respect to the space's inner product.
///
/// The dimension of the result is `dim - rank(vs)`; for an empty input
/// the whole space is returned.
pub fn orthogonal_complement(space: Space, vs: &[Vector]) -> Vec<Vector> {
    let d = space.dim();
    if vs.is_empty() {
        return (0..d)
            .map(|k| {
                let mut c = DVector::zeros(d);
                c[k] = 1.0;
                Vector {
                    space,
                    coords: c,
                }
            })
            .collect();
    }
    for v in vs {
        assert_eq!(v.space, space, "vector from a different space");
    }
    // x in {vs}^perp  <=>  (G v_k)^T x = 0 for all k. The constraint
    // matrix is padded with zero rows to square shape so that the SVD
    // returns a full set of right singular vectors.
    let g = space.gram();
    let mut rows = DMatrix::zeros(vs.len().max(d), d);
    for (k, v) in vs.iter().enumerate() {
        let gv = &g * v.coords();
        // Normalize rows for a scale-independent rank decision.
        let norm = gv.norm().max(f64::MIN_POSITIVE);
        rows.set_row(k, &(gv.transpose() / norm));
    }
    let svd = rows.svd(false, true);
    let smax = svd.singular_values.max().max(f64::MIN_POSITIVE);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-12 * smax)
        .count();
    let vt = svd.v_t.expect("svd requested v_t");
    (rank..d)
        .map(|k| Vector {
            space,
            coords: vt.row(k).transpose(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn lie3() -> Space {
        Space::lie(3)
    }

    #[test]
    fn basis_gram_entries() {
        let s = lie3();
        assert_eq!(inner(&s.e(1), &s.e(1)), 1.0);
        assert_eq!(
            inner(&s.point_sphere_complex(), &s.point_sphere_complex()),
            -1.0
        );
        assert_eq!(inner(&s.origin(), &s.infinity()), -0.5);
        assert_eq!(inner(&s.origin(), &s.origin()), 0.0);
        assert_eq!(inner(&s.e(1), &s.infinity()), 0.0);
    }

    #[test]
    fn inner_sign_weighted_sum() {
        // u = e1 + 2 e2 + 3 p, v = 2 e1 + p  ->  2*1 + 3*(-1) = -1.
        let s = lie3();
        let u = s
            .e(1)
            .add(&s.e(2).scale(2.0))
            .add(&s.point_sphere_complex().scale(3.0));
        let v = s.e(1).scale(2.0).add(&s.point_sphere_complex());
        assert_abs_diff_eq!(inner(&u, &v), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn inner_null_pair_expansion() {
        // (o + inf, o + inf) = 2 (o, inf) = -1.
        let s = lie3();
        let w = s.origin().add(&s.infinity());
        assert_abs_diff_eq!(quadratic(&w), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn space_signature_via_full_span() {
        let s = lie3();
        let all: Vec<_> = (0..s.dim())
            .map(|k| {
                let mut c = vec![0.0; s.dim()];
                c[k] = 1.0;
                Vector::new(s, &c)
            })
            .collect();
        let sig = signature_of_span(&all).unwrap();
        assert_eq!(
            sig,
            SignatureTriple {
                positive: 4,
                negative: 2,
                null: 0
            }
        );
        let m = Space::moebius(3);
        let all: Vec<_> = (0..m.dim())
            .map(|k| {
                let mut c = vec![0.0; m.dim()];
                c[k] = 1.0;
                Vector::new(m, &c)
            })
            .collect();
        let sig = signature_of_span(&all).unwrap();
        assert_eq!(
            sig,
            SignatureTriple {
                positive: 4,
                negative: 1,
                null: 0
            }
        );
    }

    #[test]
    fn signature_examples() {
        let s = lie3();
        let sig = signature_of_span(&[s.e(1)]).unwrap();
        assert_eq!(
            sig,
            SignatureTriple {
                positive: 1,
                negative: 0,
                null: 0
            }
        );
        // e1 + p is null.
        let v = s.e(1).add(&s.point_sphere_complex());
        let sig = signature_of_span(&[v]).unwrap();
        assert_eq!(
            sig,
            SignatureTriple {
                positive: 0,
                negative: 0,
                null: 1
            }
        );
        // {e1 + p, e1 - p} spans {e1, p}: signature (1,1).
        let a = s.e(1).add(&s.point_sphere_complex());
        let b = s.e(1).sub(&s.point_sphere_complex());
        let sig = signature_of_span(&[a, b]).unwrap();
        assert_eq!(
            sig,
            SignatureTriple {
                positive: 1,
                negative: 1,
                null: 0
            }
        );
    }

    #[test]
    fn signature_of_dependent_set_reduces_dimension() {
        let s = lie3();
        let a = s.e(1);
        let b = s.e(1).scale(2.0);
        let sig = signature_of_span(&[a, b]).unwrap();
        assert_eq!(sig.dim(), 1);
        assert_eq!(sig.positive, 1);
    }

    #[test]
    fn reflect_examples() {
        let s = lie3();
        let p = s.point_sphere_complex();
        let r = reflect(&p, &p).unwrap();
        assert_abs_diff_eq!(r.coords()[s.slot_p()], -1.0, epsilon = 1e-15);
        // e1 is orthogonal to the mirror p.
        let r = reflect(&s.e(1), &p).unwrap();
        assert_eq!(r, s.e(1));
        // sigma = p + s flips orientation under reflection in {p}^perp.
        let sphere = s.origin().sub(&s.infinity()); // unit sphere vector
        let sigma = p.add(&sphere);
        let r = reflect(&sigma, &p).unwrap();
        let expected = p.scale(-1.0).add(&sphere);
        assert!((r.sub(&expected)).euclid_norm() < 1e-15);
    }

    #[test]
    fn reflect_null_mirror_fails() {
        let s = lie3();
        let m = s.origin(); // null
        assert!(matches!(
            reflect(&s.e(1), &m),
            Err(PseudoEuclideanError::NullMirror { .. })
        ));
    }

    #[test]
    fn reflection_matrix_is_isometry() {
        let s = lie3();
        let d = s.dim();
        let m = s.point_sphere_complex();
        let mut mat = DMatrix::identity(d, d);
        for k in 0..d {
            let mut c = vec![0.0; d];
            c[k] = 1.0;
            let basis = Vector::new(s, &c);
            let img = reflect(&basis, &m).unwrap();
            mat.set_column(k, img.coords());
        }
        let check = is_isometry(&mat, s);
        assert!(check.is_isometry, "residual = {}", check.residual);
    }

    #[test]
    fn rotation_block_is_isometry() {
        let s = lie3();
        let d = s.dim();
        let (c, sn) = (0.6, 0.8);
        let mut mat = DMatrix::identity(d, d);
        mat[(1, 1)] = c;
        mat[(1, 2)] = -sn;
        mat[(2, 1)] = sn;
        mat[(2, 2)] = c;
        assert!(is_isometry(&mat, s).is_isometry);
        // A shear in the e-block is not.
        mat[(1, 2)] = 1.0;
        assert!(!is_isometry(&mat, s).is_isometry);
    }

    #[test]
    fn identity_isometry_residual_zero() {
        let s = lie3();
        let id = DMatrix::identity(s.dim(), s.dim());
        let check = is_isometry(&id, s);
        assert_eq!(check.residual, 0.0);
        assert!(check.is_isometry);
    }

    #[test]
    fn complement_of_p_contains_moebius_basis() {
        let s = lie3();
        let comp = orthogonal_complement(s, &[s.point_sphere_complex()]);
        assert_eq!(comp.len(), 5);
        for v in &comp {
            assert_abs_diff_eq!(
                inner(v, &s.point_sphere_complex()),
                0.0,
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn complement_of_o_inf() {
        let s = lie3();
        let comp = orthogonal_complement(s, &[s.origin(), s.infinity()]);
        assert_eq!(comp.len(), 4);
        for v in &comp {
            assert!(inner(v, &s.origin()).abs() < 1e-13);
            assert!(inner(v, &s.infinity()).abs() < 1e-13);
            // span{e1..e3, p}: no o/inf components.
            assert!(v.coord(s.slot_o()).abs() < 1e-13);
            assert!(v.coord(s.slot_inf()).abs() < 1e-13);
        }
    }

    #[test]
    fn orthonormal_frame_diagonalizes_gram() {
        for space in [Space::moebius(2), Space::moebius(3), Space::lie(3)] {
            let f = space.orthonormal_frame();
            let g = f.transpose() * space.gram() * &f;
            for i in 0..space.dim() {
                for j in 0..space.dim() {
                    let expected = if i != j {
                        0.0
                    } else if i <= space.geometry_dim() {
                        1.0
                    } else {
                        -1.0
                    };
                    assert_abs_diff_eq!(g[(i, j)], expected, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    #[should_panic(expected = "different pseudo-Euclidean spaces")]
    fn mixed_spaces_panic() {
        let a = Space::lie(3).e(1);
        let b = Space::moebius(3).e(1);
        let _ = inner(&a, &b);
    }
}
