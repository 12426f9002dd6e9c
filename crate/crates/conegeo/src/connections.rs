//! Discrete loops of flat connections and their polynomial conserved
//! quantities.
//!
//! The connection 1-forms are sums of wedge endomorphisms
//! `(a /\ b) x = (a,x) b - (b,x) a`, which are skew with respect to the
//! ambient inner product. An edge `e` from `src` to `dst` transports by
//!
//! ```text
//!   M_e = exp( t * sum_k c_k * W(mid(base_k), Delta(diff_k)) )
//! ```
//!
//! with midpoint-averaged base values and endpoint differences, so each
//! transport is an exact isometry of the form and the discretization is
//! second order. For a smoothly flat connection the per-plaquette
//! holonomy defect then decays at third order in the grid step, while
//! the per-edge parallelism defect of a true conserved quantity decays
//! at second order once measured per unit parameter length.
//!
//! The loops in use:
//!
//! * `d^+- = d + t gamma^+- /\ d gamma^-+` for an enveloped pair of
//!   null congruences;
//! * the middle connection
//!   `d + t c xi /\ d xi - t b (xi /\ d nu + nu /\ d xi) + t a nu /\ d nu`
//!   of a linear Weingarten surface with `a K + 2 b H + c = 0`;
//! * its constant mean curvature specialization
//!   `d + (t/2)(2 H xi /\ d xi + xi /\ d nu + nu /\ d xi)`, which equals
//!   the middle connection with `(a, b, c) = (0, -1/2, H)`.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::grid::Grid;
use crate::par;
use crate::pseudo_euclidean::{inner, quadratic, Space, Vector};
use crate::surfaces::LiftedSurface;
use crate::symmetry_breaking::SubgeometryGauge;

/// Default spectral parameter samples for identity checks.
pub const DEFAULT_T_SAMPLES: [f64; 5] = [-0.5, -0.1, 0.1, 0.5, 1.0];

/// Grid-constancy threshold for conserved-quantity coefficients:
/// `max deviation < EPS_CONSERVED * (1 + |coefficient|)`.
pub const EPS_CONSERVED: f64 = 1e-8;

/// Tolerance for the closed-form Gram matrix comparisons.
pub const EPS_GRAM: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConnectionError {
    #[error("envelope condition violated at sample ({i}, {j}): residual {residual:.3e}")]
    EnvelopeViolation { i: usize, j: usize, residual: f64 },
    #[error("grid shape mismatch")]
    GridMismatch,
    #[error("characteristic polynomial coefficient {index} varies over the grid by {deviation:.3e}")]
    NonConserved { index: usize, deviation: f64 },
    #[error("Gram matrix deviates from the closed form by {max_deviation:.3e}")]
    FormulaViolation { max_deviation: f64 },
}

/// The skew endomorphism `x -> (a,x) b - (b,x) a`.
#[derive(Debug, Clone)]
pub struct WedgeEndo {
    a: Vector,
    b: Vector,
}

/// Builds `a /\ b`; panics if the vectors live in different spaces.
pub fn wedge_endo(a: Vector, b: Vector) -> WedgeEndo {
    assert_eq!(
        a.space(),
        b.space(),
        "wedge of vectors from different spaces"
    );
    WedgeEndo { a, b }
}

impl WedgeEndo {
    pub fn apply(&self, x: &Vector) -> Vector {
        self.b
            .scale(inner(&self.a, x))
            .sub(&self.a.scale(inner(&self.b, x)))
    }

    /// Matrix form over the null basis: `b (G a)^T - a (G b)^T`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let space = self.a.space();
        let g = space.gram();
        let ga = &g * self.a.coords();
        let gb = &g * self.b.coords();
        self.b.coords() * ga.transpose() - self.a.coords() * gb.transpose()
    }
}

/// Accumulates `coeff * W(base, diff)` into a matrix.
fn add_wedge(acc: &mut DMatrix<f64>, space: Space, coeff: f64, base: &Vector, diff: &Vector) {
    let g = space.gram();
    let gb = &g * base.coords();
    let gd = &g * diff.coords();
    *acc += (diff.coords() * gb.transpose() - base.coords() * gd.transpose()) * coeff;
}

/// Construction recipe of a discrete connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConnectionRecipe {
    Mid,
    Plus,
    Minus,
    Cmc,
}

/// Per-edge transports of one member `d_t` of a connection loop on a
/// rectangular grid. Edges are `(i,j) -> (i+1,j)` along u and
/// `(i,j) -> (i,j+1)` along v.
#[derive(Debug, Clone)]
pub struct DiscreteConnection {
    nu: usize,
    nv: usize,
    h_u: f64,
    h_v: f64,
    t: f64,
    recipe: ConnectionRecipe,
    space: Space,
    u_edges: Vec<DMatrix<f64>>,
    v_edges: Vec<DMatrix<f64>>,
}

impl DiscreteConnection {
    pub fn grid_shape(&self) -> (usize, usize) {
        (self.nu, self.nv)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Parameter steps `(h_u, h_v)` of the underlying grid.
    pub fn steps(&self) -> (f64, f64) {
        (self.h_u, self.h_v)
    }

    pub fn recipe(&self) -> ConnectionRecipe {
        self.recipe
    }

    pub fn space(&self) -> Space {
        self.space
    }

    /// Transport along the u-edge `(i,j) -> (i+1,j)`.
    pub fn u_transport(&self, i: usize, j: usize) -> &DMatrix<f64> {
        &self.u_edges[i * self.nv + j]
    }

    /// Transport along the v-edge `(i,j) -> (i,j+1)`.
    pub fn v_transport(&self, i: usize, j: usize) -> &DMatrix<f64> {
        &self.v_edges[i * (self.nv - 1) + j]
    }

    /// Largest isometry defect `|M^T G M - G|` over all transports.
    pub fn isometry_audit(&self) -> f64 {
        let g = self.space.gram();
        let all = self.u_edges.iter().chain(self.v_edges.iter());
        let mut worst: f64 = 0.0;
        for m in all {
            worst = worst.max((m.transpose() * &g * m - &g).norm());
        }
        worst
    }
}

/// Term of a connection 1-form: `coeff * base /\ d(diff)`.
struct FormTerm<'a> {
    coeff: f64,
    base: &'a Grid<Vector>,
    diff: &'a Grid<Vector>,
}

fn build_connection(
    space: Space,
    (h_u, h_v): (f64, f64),
    terms: &[FormTerm<'_>],
    t: f64,
    t_scale: f64,
    recipe: ConnectionRecipe,
) -> DiscreteConnection {
    let (nu, nv) = (terms[0].base.nu(), terms[0].base.nv());
    let d = space.dim();
    // A section parallel for d + t eta satisfies d sigma = -eta sigma,
    // so the edge transport is exp(-A) with A the midpoint-sampled
    // connection form contracted with the edge (midpoint base values
    // against the endpoint difference). The raw per-edge parallelism
    // defect of a true conserved quantity is then O(h^3) and the raw
    // per-plaquette holonomy defect of a flat loop O(h^4); measured as
    // rates per unit parameter step they are O(h^2) resp O(h^3).
    let edge_matrix = |src: (usize, usize), dst: (usize, usize)| -> DMatrix<f64> {
        let mut a = DMatrix::zeros(d, d);
        for term in terms {
            let mid = term
                .base
                .at(src.0, src.1)
                .add(term.base.at(dst.0, dst.1))
                .scale(0.5);
            let delta = term.diff.at(dst.0, dst.1).sub(term.diff.at(src.0, src.1));
            add_wedge(&mut a, space, -term.coeff * t * t_scale, &mid, &delta);
        }
        a.exp()
    };
    let u_edges = par::map_indexed((nu - 1) * nv, |k| {
        let (i, j) = (k / nv, k % nv);
        edge_matrix((i, j), (i + 1, j))
    });
    let v_edges = par::map_indexed(nu * (nv - 1), |k| {
        let (i, j) = (k / (nv - 1), k % (nv - 1));
        edge_matrix((i, j), (i, j + 1))
    });
    DiscreteConnection {
        nu,
        nv,
        h_u,
        h_v,
        t,
        recipe,
        space,
        u_edges,
        v_edges,
    }
}

fn check_envelope(
    gamma_plus: &Grid<Vector>,
    gamma_minus: &Grid<Vector>,
) -> Result<(), ConnectionError> {
    if !gamma_plus.same_shape(gamma_minus) {
        return Err(ConnectionError::GridMismatch);
    }
    for ((i, j), gp) in gamma_plus.iter_indexed() {
        let gm = gamma_minus.at(i, j);
        let sp = gp.euclid_norm().max(f64::MIN_POSITIVE);
        let sm = gm.euclid_norm().max(f64::MIN_POSITIVE);
        let residual = quadratic(gp).abs() / (sp * sp)
            + quadratic(gm).abs() / (sm * sm)
            + inner(gp, gm).abs() / (sp * sm);
        if residual > 3e-10 {
            return Err(ConnectionError::EnvelopeViolation { i, j, residual });
        }
    }
    Ok(())
}

/// The pair `d^+- = d + t gamma^+- /\ d gamma^-+` for an enveloped pair
/// of null, mutually orthogonal congruences.
pub fn pair_connections(
    gamma_plus: &Grid<Vector>,
    gamma_minus: &Grid<Vector>,
    steps: (f64, f64),
    t: f64,
) -> Result<(DiscreteConnection, DiscreteConnection), ConnectionError> {
    check_envelope(gamma_plus, gamma_minus)?;
    let space = gamma_plus.at(0, 0).space();
    let plus = build_connection(
        space,
        steps,
        &[FormTerm {
            coeff: 1.0,
            base: gamma_plus,
            diff: gamma_minus,
        }],
        t,
        1.0,
        ConnectionRecipe::Plus,
    );
    let minus = build_connection(
        space,
        steps,
        &[FormTerm {
            coeff: 1.0,
            base: gamma_minus,
            diff: gamma_plus,
        }],
        t,
        1.0,
        ConnectionRecipe::Minus,
    );
    Ok((plus, minus))
}

/// The middle connection of a linear Weingarten surface:
/// `d + t c xi /\ d xi - t b (xi /\ d nu + nu /\ d xi) + t a nu /\ d nu`.
pub fn middle_connection(ls: &LiftedSurface, a: f64, b: f64, c: f64, t: f64) -> DiscreteConnection {
    let space = ls.gauge().space();
    let steps = (ls.spec().h_u(), ls.spec().h_v());
    build_connection(
        space,
        steps,
        &[
            FormTerm {
                coeff: c,
                base: ls.xi(),
                diff: ls.xi(),
            },
            FormTerm {
                coeff: -b,
                base: ls.xi(),
                diff: ls.nu(),
            },
            FormTerm {
                coeff: -b,
                base: ls.nu(),
                diff: ls.xi(),
            },
            FormTerm {
                coeff: a,
                base: ls.nu(),
                diff: ls.nu(),
            },
        ],
        t,
        1.0,
        ConnectionRecipe::Mid,
    )
}

/// The constant mean curvature form of the middle connection,
/// `d + (t/2)(2 H xi /\ d xi + xi /\ d nu + nu /\ d xi)`. Identical (up
/// to rounding) to `middle_connection(ls, 0, -1/2, h, t)`.
pub fn cmc_connection(ls: &LiftedSurface, h: f64, t: f64) -> DiscreteConnection {
    let space = ls.gauge().space();
    let steps = (ls.spec().h_u(), ls.spec().h_v());
    build_connection(
        space,
        steps,
        &[
            FormTerm {
                coeff: 2.0 * h,
                base: ls.xi(),
                diff: ls.xi(),
            },
            FormTerm {
                coeff: 1.0,
                base: ls.xi(),
                diff: ls.nu(),
            },
            FormTerm {
                coeff: 1.0,
                base: ls.nu(),
                diff: ls.xi(),
            },
        ],
        t,
        0.5,
        ConnectionRecipe::Cmc,
    )
}

/// A vector-coefficient polynomial `p(t) = sum_k a_k t^k` with grid
/// coefficient fields.
#[derive(Debug, Clone)]
pub struct PolynomialConservedQuantity {
    coeffs: Vec<Grid<Vector>>,
}

impl PolynomialConservedQuantity {
    pub fn new(coeffs: Vec<Grid<Vector>>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "polynomial needs at least one coefficient"
        );
        for c in &coeffs[1..] {
            assert!(c.same_shape(&coeffs[0]), "coefficient grid shapes differ");
        }
        PolynomialConservedQuantity { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[Grid<Vector>] {
        &self.coeffs
    }

    pub fn grid_shape(&self) -> (usize, usize) {
        (self.coeffs[0].nu(), self.coeffs[0].nv())
    }

    /// The value grid `p(t)`.
    pub fn eval(&self, t: f64) -> Grid<Vector> {
        Grid::from_fn(self.coeffs[0].nu(), self.coeffs[0].nv(), |i, j| {
            self.eval_at(t, i, j)
        })
    }

    /// Pointwise value at one node.
    pub fn eval_at(&self, t: f64, i: usize, j: usize) -> Vector {
        let mut acc = self.coeffs[0].at(i, j).clone();
        let mut power = 1.0;
        for c in &self.coeffs[1..] {
            power *= t;
            acc = acc.add(&c.at(i, j).scale(power));
        }
        acc
    }
}

/// The linear conserved quantities of the middle connection of a linear
/// Weingarten surface:
///
/// ```text
///   p(t) = p + t (-b xi + a nu),     q(t) = q + t (c xi - b nu).
/// ```
pub fn lw_conserved_quantities(
    ls: &LiftedSurface,
    a: f64,
    b: f64,
    c: f64,
    gauge: &SubgeometryGauge,
) -> (PolynomialConservedQuantity, PolynomialConservedQuantity) {
    let (nu, nv) = (ls.spec().nu, ls.spec().nv);
    let p = gauge.p().expect("LW quantities need a point sphere complex");
    let q = gauge.q();
    let p0 = Grid::constant(nu, nv, p.clone());
    let p1 = Grid::from_fn(nu, nv, |i, j| {
        ls.xi().at(i, j).scale(-b).add(&ls.nu().at(i, j).scale(a))
    });
    let q0 = Grid::constant(nu, nv, q.clone());
    let q1 = Grid::from_fn(nu, nv, |i, j| {
        ls.xi().at(i, j).scale(c).add(&ls.nu().at(i, j).scale(-b))
    });
    (
        PolynomialConservedQuantity::new(vec![p0, p1]),
        PolynomialConservedQuantity::new(vec![q0, q1]),
    )
}

/// A real-coefficient polynomial, lowest degree first.
pub type RealPoly = Vec<f64>;

fn poly_mul(a: &[f64], b: &[f64]) -> RealPoly {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// The pairing polynomial `(p(t), q(t))` of two vector polynomials on
/// the same grid: coefficients are checked to be grid-constant and the
/// mean values are returned.
pub fn pairing_polynomial(
    p: &PolynomialConservedQuantity,
    q: &PolynomialConservedQuantity,
) -> Result<RealPoly, ConnectionError> {
    if p.grid_shape() != q.grid_shape() {
        return Err(ConnectionError::GridMismatch);
    }
    let (nu, nv) = p.grid_shape();
    let deg = p.degree() + q.degree();
    let n = nu * nv;
    let mut samples = vec![vec![0.0; n]; deg + 1];
    for k in 0..n {
        let (i, j) = (k / nv, k % nv);
        for (di, pc) in p.coefficients().iter().enumerate() {
            for (dj, qc) in q.coefficients().iter().enumerate() {
                samples[di + dj][k] += inner(pc.at(i, j), qc.at(i, j));
            }
        }
    }
    let means: Vec<f64> = samples
        .iter()
        .map(|vals| vals.iter().sum::<f64>() / n as f64)
        .collect();
    for (idx, vals) in samples.iter().enumerate() {
        let tol = EPS_CONSERVED * (1.0 + means[idx].abs());
        let deviation = vals
            .iter()
            .fold(0.0_f64, |m, v| m.max((v - means[idx]).abs()));
        if deviation > tol {
            return Err(ConnectionError::NonConserved {
                index: idx,
                deviation,
            });
        }
    }
    Ok(means)
}

/// The characteristic polynomial `(p(t), p(t))` of a conserved
/// quantity; fails with `NonConserved` when a coefficient varies over
/// the grid.
pub fn characteristic_polynomial(
    p: &PolynomialConservedQuantity,
) -> Result<RealPoly, ConnectionError> {
    pairing_polynomial(p, p)
}

/// Surface classes distinguished by the characteristic polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CqClass {
    /// `(p(t), p(t)) = -1`.
    Isothermic,
    /// `(p(t), p(t)) = 0`.
    LIsothermic,
    /// Degree exactly one.
    Guichard,
    Other,
}

/// Classifies a characteristic polynomial.
pub fn classify_cq(poly: &[f64]) -> CqClass {
    let scale = poly.iter().fold(1.0_f64, |m, c| m.max(c.abs()));
    let tol = EPS_CONSERVED * scale;
    let degree = poly.iter().rposition(|c| c.abs() > tol).unwrap_or(0);
    let c0 = poly.first().copied().unwrap_or(0.0);
    if degree == 0 {
        if (c0 + 1.0).abs() <= tol {
            CqClass::Isothermic
        } else if c0.abs() <= tol {
            CqClass::LIsothermic
        } else {
            CqClass::Other
        }
    } else if degree == 1 {
        CqClass::Guichard
    } else {
        CqClass::Other
    }
}

/// Gram data of a conserved-quantity pair against the closed forms
/// `(p,p) = -1 - 2at`, `(q,q) = -kappa - 2ct`, `(p,q) = 2bt` and
/// `det G = kappa + 2(a kappa + c) t + 4(ac - b^2) t^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramReport {
    pub pp: RealPoly,
    pub qq: RealPoly,
    pub pq: RealPoly,
    pub det: RealPoly,
    pub expected_pp: RealPoly,
    pub expected_qq: RealPoly,
    pub expected_pq: RealPoly,
    pub expected_det: RealPoly,
    pub max_deviation: f64,
}

fn poly_deviation(actual: &[f64], expected: &[f64]) -> f64 {
    let len = actual.len().max(expected.len());
    let mut worst: f64 = 0.0;
    for k in 0..len {
        let a = actual.get(k).copied().unwrap_or(0.0);
        let e = expected.get(k).copied().unwrap_or(0.0);
        worst = worst.max((a - e).abs());
    }
    worst
}

/// Computes the Gram polynomials of `(p(t), q(t))` and verifies the
/// closed forms; `kappa` is the space form curvature and `(a, b, c)`
/// the linear Weingarten coefficients.
pub fn gram_det(
    p: &PolynomialConservedQuantity,
    q: &PolynomialConservedQuantity,
    kappa: f64,
    a: f64,
    b: f64,
    c: f64,
) -> Result<GramReport, ConnectionError> {
    let pp = characteristic_polynomial(p)?;
    let qq = characteristic_polynomial(q)?;
    let pq = pairing_polynomial(p, q)?;
    let mut det = poly_mul(&pp, &qq);
    let cross = poly_mul(&pq, &pq);
    for (d, x) in det.iter_mut().zip(cross.iter()) {
        *d -= x;
    }
    let expected_pp = vec![-1.0, -2.0 * a];
    let expected_qq = vec![-kappa, -2.0 * c];
    let expected_pq = vec![0.0, 2.0 * b];
    let expected_det = vec![kappa, 2.0 * (a * kappa + c), 4.0 * (a * c - b * b)];
    let max_deviation = poly_deviation(&pp, &expected_pp)
        .max(poly_deviation(&qq, &expected_qq))
        .max(poly_deviation(&pq, &expected_pq))
        .max(poly_deviation(&det, &expected_det));
    let report = GramReport {
        pp,
        qq,
        pq,
        det,
        expected_pp,
        expected_qq,
        expected_pq,
        expected_det,
        max_deviation,
    };
    if max_deviation > EPS_GRAM {
        return Err(ConnectionError::FormulaViolation { max_deviation });
    }
    Ok(report)
}

/// Parallelism defect of a section under the connection transports:
/// the largest edge defect `|M_e p(src) - p(dst)|` measured per unit
/// parameter step. Second order in the grid step for true conserved
/// quantities of the loop.
pub fn parallel_residual(
    conn: &DiscreteConnection,
    pcq: &PolynomialConservedQuantity,
) -> Result<f64, ConnectionError> {
    if pcq.grid_shape() != (conn.nu, conn.nv) {
        return Err(ConnectionError::GridMismatch);
    }
    let values = pcq.eval(conn.t);
    let nv = conn.nv;
    let u_res = par::map_indexed((conn.nu - 1) * conn.nv, |k| {
        let (i, j) = (k / nv, k % nv);
        let transported = conn.u_transport(i, j) * values.at(i, j).coords();
        (transported - values.at(i + 1, j).coords()).norm() / conn.h_u
    });
    let v_res = par::map_indexed(conn.nu * (conn.nv - 1), |k| {
        let (i, j) = (k / (nv - 1), k % (nv - 1));
        let transported = conn.v_transport(i, j) * values.at(i, j).coords();
        (transported - values.at(i, j + 1).coords()).norm() / conn.h_v
    });
    Ok(par::max_residual(&u_res).max(par::max_residual(&v_res)))
}

/// Largest plaquette holonomy defect
/// `|M_W^{-1} M_N^{-1} M_E M_S - I|` over all faces, measured per unit
/// parameter step `sqrt(h_u h_v)`. Third order in the grid step for
/// the loops of flat connections on analytic data.
pub fn flatness_residual(conn: &DiscreteConnection) -> f64 {
    let (nu, nv) = (conn.nu, conn.nv);
    assert!(nu >= 2 && nv >= 2, "flatness needs at least a 2 x 2 grid");
    let d = conn.space.dim();
    let id = DMatrix::<f64>::identity(d, d);
    let step = (conn.h_u * conn.h_v).sqrt();
    let faces = par::map_indexed((nu - 1) * (nv - 1), |k| {
        let (i, j) = (k / (nv - 1), k % (nv - 1));
        let m_s = conn.u_transport(i, j);
        let m_e = conn.v_transport(i + 1, j);
        let m_n = conn.u_transport(i, j + 1);
        let m_w = conn.v_transport(i, j);
        let n_inv = m_n.clone().try_inverse().expect("transports are invertible");
        let w_inv = m_w.clone().try_inverse().expect("transports are invertible");
        (w_inv * n_inv * m_e * m_s - &id).norm() / step
    });
    par::max_residual(&faces)
}

/// A per-sample gauge field with its exact inverse.
#[derive(Debug, Clone)]
pub struct GaugeField {
    pub forward: Grid<DMatrix<f64>>,
    pub inverse: Grid<DMatrix<f64>>,
}

/// The nilpotent gauge `exp(t tau) = I + t tau` with
/// `tau = gamma^+ /\ gamma^-` for an enveloped pair; `tau^2 = 0`, so
/// the inverse is `I - t tau` exactly.
pub fn gauge_exp_tau(
    gamma_plus: &Grid<Vector>,
    gamma_minus: &Grid<Vector>,
    t: f64,
) -> Result<GaugeField, ConnectionError> {
    check_envelope(gamma_plus, gamma_minus)?;
    let space = gamma_plus.at(0, 0).space();
    let d = space.dim();
    let id = DMatrix::<f64>::identity(d, d);
    let forward = Grid::from_fn(gamma_plus.nu(), gamma_plus.nv(), |i, j| {
        let tau = wedge_endo(gamma_plus.at(i, j).clone(), gamma_minus.at(i, j).clone()).matrix();
        &id + tau * t
    });
    let inverse = Grid::from_fn(gamma_plus.nu(), gamma_plus.nv(), |i, j| {
        let tau = wedge_endo(gamma_plus.at(i, j).clone(), gamma_minus.at(i, j).clone()).matrix();
        &id - tau * t
    });
    Ok(GaugeField { forward, inverse })
}

/// Conjugates every edge transport by a gauge field:
/// `M'_e = g(dst) M_e g(src)^{-1}`.
pub fn apply_gauge(conn: &DiscreteConnection, gauge: &GaugeField) -> DiscreteConnection {
    let (nu, nv) = (conn.nu, conn.nv);
    assert_eq!(gauge.forward.nu(), nu);
    assert_eq!(gauge.forward.nv(), nv);
    let u_edges = (0..(nu - 1) * nv)
        .map(|k| {
            let (i, j) = (k / nv, k % nv);
            gauge.forward.at(i + 1, j) * conn.u_transport(i, j) * gauge.inverse.at(i, j)
        })
        .collect();
    let v_edges = (0..nu * (nv - 1))
        .map(|k| {
            let (i, j) = (k / (nv - 1), k % (nv - 1));
            gauge.forward.at(i, j + 1) * conn.v_transport(i, j) * gauge.inverse.at(i, j)
        })
        .collect();
    DiscreteConnection {
        nu,
        nv,
        h_u: conn.h_u,
        h_v: conn.h_v,
        t: conn.t,
        recipe: conn.recipe,
        space: conn.space,
        u_edges,
        v_edges,
    }
}

/// Applies a gauge field to a section grid.
pub fn gauge_section(gauge: &GaugeField, section: &Grid<Vector>) -> Grid<Vector> {
    Grid::from_fn(section.nu(), section.nv(), |i, j| {
        let v = section.at(i, j);
        Vector::from_dvector(v.space(), gauge.forward.at(i, j) * v.coords())
    })
}
