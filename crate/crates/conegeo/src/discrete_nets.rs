//! Circular nets on Z^2 windows and their integrable transforms.
//!
//! A quad net is circular when every face is concircular. The Miquel
//! configuration completes the eighth point of a Ribaucour step: given
//! a circular face `(x_i, x_j, x_k, x_l)` and transforms of three of
//! its corners with circular edge-quads, the remaining transform is the
//! second intersection of the circles through `(x_j, x_k, xhat_j)` and
//! `(x_l, x_k, xhat_l)`; the construction is overdetermined and the
//! circularity of the transformed face is reported as a residual.
//!
//! Cross-ratios are evaluated by charting the face circle's plane into
//! the complex plane. Faces are cyclically ordered
//! `(x, x_u, x_uv, x_v)`; a net with edge labels `alpha` (per u-column)
//! and `beta` (per v-row) is discrete isothermic when
//! `cr(face) = -alpha_i / beta_j`. The Christoffel dual and the
//! discrete Darboux transform both use the signed edge weights
//! `alpha_i` on u-edges and `-beta_j` on v-edges; the Darboux vertical
//! quads carry cross-ratio `lambda * (signed weight)`, which is the
//! assignment forced by the consistency of the cross-ratio cube.

use nalgebra::{Complex, Vector3};
use thiserror::Error;

use crate::grid::Grid;

/// Default relative circularity tolerance (scaled by configuration
/// size where applicable).
pub const EPS_CIRCULAR: f64 = 1e-8;

/// Smallest admissible |lambda| for the Darboux transform.
pub const MIN_DARBOUX_LAMBDA: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("collinear points admit no circumcircle")]
    Collinear,
    #[error("points are not concircular: residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NonCircular { residual: f64, tol: f64 },
    #[error("coincident points")]
    CoincidentPoints,
    #[error("configuration does not lie on a common sphere or plane (residual {residual:.3e})")]
    NoCommonSphere { residual: f64 },
    #[error("circle intersection is tangential or empty")]
    DegenerateIntersection,
    #[error("net has no edge labels")]
    MissingLabels,
    #[error("label vector lengths do not match the net window")]
    LabelShapeMismatch,
    #[error("net is not discrete isothermic: closure residual {residual:.3e}")]
    NonIsothermic { residual: f64 },
    #[error("|lambda| = {value:.3e} is below the guarded minimum")]
    DegenerateParameter { value: f64 },
    #[error("Cauchy data shape does not match the net window")]
    CauchyShapeMismatch,
    #[error("propagation degenerated at face ({i}, {j}): {source}")]
    PropagationDegenerate {
        i: usize,
        j: usize,
        source: Box<NetError>,
    },
}

/// A circle in R^3.
#[derive(Debug, Clone, PartialEq)]
pub struct Circle3D {
    pub center: Vector3<f64>,
    pub radius: f64,
    pub normal: Vector3<f64>,
}

/// Circumcircle of three points.
pub fn circumcircle3(
    p1: &Vector3<f64>,
    p2: &Vector3<f64>,
    p3: &Vector3<f64>,
) -> Result<Circle3D, NetError> {
    let a = p2 - p1;
    let b = p3 - p1;
    let n = a.cross(&b);
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        return Err(NetError::CoincidentPoints);
    }
    if n.norm() <= 1e-12 * scale * scale {
        return Err(NetError::Collinear);
    }
    // |c - p1| = |c - p2| = |c - p3| with c = p1 + s a + t b.
    let (aa, ab, bb) = (a.dot(&a), a.dot(&b), b.dot(&b));
    let det = aa * bb - ab * ab;
    let s = 0.5 * (bb * aa - ab * bb) / det;
    let t = 0.5 * (aa * bb - ab * aa) / det;
    let center = p1 + a * s + b * t;
    let radius = (center - p1).norm();
    Ok(Circle3D {
        center,
        radius,
        normal: n.normalize(),
    })
}

/// Distance from a point to a circle in R^3.
pub fn point_circle_distance(x: &Vector3<f64>, circle: &Circle3D) -> f64 {
    let v = x - circle.center;
    let axial = v.dot(&circle.normal);
    let radial = (v - circle.normal * axial).norm();
    (axial * axial + (radial - circle.radius) * (radial - circle.radius)).sqrt()
}

/// Circularity residual of four points: the largest distance of a
/// point from the circumcircle of the other three, symmetrized over
/// the four leave-one-out choices.
pub fn circularity_residual(quad: &[Vector3<f64>; 4]) -> Result<f64, NetError> {
    let mut worst: f64 = 0.0;
    for leave in 0..4 {
        let kept: Vec<&Vector3<f64>> = (0..4).filter(|&k| k != leave).map(|k| &quad[k]).collect();
        let circle = circumcircle3(kept[0], kept[1], kept[2])?;
        worst = worst.max(point_circle_distance(&quad[leave], &circle));
    }
    Ok(worst)
}

fn chart_frame(circle: &Circle3D, reference: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let u = (reference - circle.center).normalize();
    let w = circle.normal.cross(&u);
    (u, w)
}

fn to_complex(
    x: &Vector3<f64>,
    circle: &Circle3D,
    frame: &(Vector3<f64>, Vector3<f64>),
) -> Complex<f64> {
    let v = x - circle.center;
    Complex::new(v.dot(&frame.0), v.dot(&frame.1))
}

/// Cross-ratio of four concircular points, via an isometric chart of
/// the circle plane into the complex plane:
/// `cr = (z1 - z2)(z3 - z4) / ((z2 - z3)(z4 - z1))`.
pub fn cross_ratio(quad: &[Vector3<f64>; 4]) -> Result<f64, NetError> {
    let diameter = quad_diameter(quad);
    if diameter == 0.0 {
        return Err(NetError::CoincidentPoints);
    }
    let residual = circularity_residual(quad)?;
    let tol = EPS_CIRCULAR * diameter;
    if residual > tol {
        return Err(NetError::NonCircular { residual, tol });
    }
    let circle = circumcircle3(&quad[0], &quad[1], &quad[2])?;
    let frame = chart_frame(&circle, &quad[0]);
    let z: Vec<Complex<f64>> = quad.iter().map(|p| to_complex(p, &circle, &frame)).collect();
    let num = (z[0] - z[1]) * (z[2] - z[3]);
    let den = (z[1] - z[2]) * (z[3] - z[0]);
    if den.norm() <= 1e-300 {
        return Err(NetError::CoincidentPoints);
    }
    let cr = num / den;
    Ok(cr.re)
}

fn quad_diameter(quad: &[Vector3<f64>; 4]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            d = d.max((quad[i] - quad[j]).norm());
        }
    }
    d
}

/// Per-column u-edge labels and per-row v-edge labels.
#[derive(Debug, Clone, PartialEq)]
pub struct NetLabels {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

/// A quad net on the window `[0..U] x [0..V]`: `(U+1) x (V+1)` vertices
/// in R^3, optionally with edge labels.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadNet {
    vertices: Grid<Vector3<f64>>,
    labels: Option<NetLabels>,
}

impl QuadNet {
    pub fn new(vertices: Grid<Vector3<f64>>, labels: Option<NetLabels>) -> Result<Self, NetError> {
        if let Some(l) = &labels {
            if l.alpha.len() != vertices.nu() - 1 || l.beta.len() != vertices.nv() - 1 {
                return Err(NetError::LabelShapeMismatch);
            }
        }
        Ok(QuadNet { vertices, labels })
    }

    pub fn vertices(&self) -> &Grid<Vector3<f64>> {
        &self.vertices
    }

    pub fn labels(&self) -> Option<&NetLabels> {
        self.labels.as_ref()
    }

    /// Number of u-columns of faces (U) and v-rows of faces (V).
    pub fn window(&self) -> (usize, usize) {
        (self.vertices.nu() - 1, self.vertices.nv() - 1)
    }

    pub fn at(&self, i: usize, j: usize) -> &Vector3<f64> {
        self.vertices.at(i, j)
    }

    /// Cyclically ordered corners of face `(i, j)`.
    pub fn face(&self, i: usize, j: usize) -> [Vector3<f64>; 4] {
        [
            *self.vertices.at(i, j),
            *self.vertices.at(i + 1, j),
            *self.vertices.at(i + 1, j + 1),
            *self.vertices.at(i, j + 1),
        ]
    }

    /// Largest pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        let vs = self.vertices.as_slice();
        let mut d: f64 = 0.0;
        for i in 0..vs.len() {
            for j in i + 1..vs.len() {
                d = d.max((vs[i] - vs[j]).norm());
            }
        }
        d.max(f64::MIN_POSITIVE)
    }

    /// Largest face circularity residual, normalized by the net
    /// diameter.
    pub fn circularity_audit(&self) -> Result<f64, NetError> {
        let (u, v) = self.window();
        let diam = self.diameter();
        let mut worst: f64 = 0.0;
        for i in 0..u {
            for j in 0..v {
                worst = worst.max(circularity_residual(&self.face(i, j))?);
            }
        }
        Ok(worst / diam)
    }
}

/// Output of a Miquel completion.
#[derive(Debug, Clone)]
pub struct MiquelResult {
    /// The completed transform point `xhat_k`.
    pub point: Vector3<f64>,
    /// Circularity residual of the transformed face
    /// `(xhat_i, xhat_j, xhat_k, xhat_l)` (the unconstrained third
    /// constraint).
    pub third_residual: f64,
    /// Circularity residuals of the two quads used for construction.
    pub used_residuals: [f64; 2],
    /// Whether the nearer intersection point also satisfies all three
    /// constraints (the farther-point rule is then a genuine choice).
    pub alternative_also_valid: bool,
}

/// Intersection points of two circles lying on a common sphere or
/// plane.
fn circle_intersection(
    c1: &Circle3D,
    c2: &Circle3D,
    scale: f64,
) -> Result<(Vector3<f64>, Vector3<f64>), NetError> {
    let cross = c1.normal.cross(&c2.normal);
    if cross.norm() <= 1e-9 {
        // Coplanar circles: classic two-circle intersection in-plane.
        let d_vec = c2.center - c1.center;
        let off_plane = d_vec.dot(&c1.normal);
        if off_plane.abs() > 1e-9 * scale {
            return Err(NetError::DegenerateIntersection);
        }
        let d = d_vec.norm();
        if d <= 1e-14 * scale {
            return Err(NetError::DegenerateIntersection);
        }
        let a = (c1.radius * c1.radius - c2.radius * c2.radius + d * d) / (2.0 * d);
        let h2 = c1.radius * c1.radius - a * a;
        if h2 <= 0.0 {
            return Err(NetError::DegenerateIntersection);
        }
        let h = h2.sqrt();
        let dhat = d_vec / d;
        let perp = c1.normal.cross(&dhat);
        let base = c1.center + dhat * a;
        Ok((base + perp * h, base - perp * h))
    } else {
        // Intersection line of the two circle planes.
        let n12 = c1.normal.dot(&c2.normal);
        let det = 1.0 - n12 * n12;
        let d1 = c1.normal.dot(&c1.center);
        let d2 = c2.normal.dot(&c2.center);
        let alpha = (d1 - n12 * d2) / det;
        let beta = (d2 - n12 * d1) / det;
        let x0 = c1.normal * alpha + c2.normal * beta;
        let dir = cross.normalize();
        // Intersect the line with circle 1 (inside its plane).
        let w = x0 - c1.center;
        let b = w.dot(&dir);
        let c = w.dot(&w) - c1.radius * c1.radius;
        let disc = b * b - c;
        if disc <= 0.0 {
            return Err(NetError::DegenerateIntersection);
        }
        let sq = disc.sqrt();
        Ok((x0 + dir * (-b + sq), x0 + dir * (-b - sq)))
    }
}

/// Least-squares residual of the best common sphere or plane through a
/// point set: smallest singular value of the normalized rows
/// `(|x|^2, x, 1)` of the affine circumsphere equation.
fn common_sphere_residual(points: &[Vector3<f64>]) -> f64 {
    let n = points.len();
    let mut m = nalgebra::DMatrix::zeros(n.max(5), 5);
    for (k, x) in points.iter().enumerate() {
        let row = [x.norm_squared(), x.x, x.y, x.z, 1.0];
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (c, val) in row.iter().enumerate() {
            m[(k, c)] = val / norm;
        }
    }
    let svd = m.svd(false, false);
    svd.singular_values[svd.singular_values.len() - 1]
}

/// Completes the Miquel configuration: `face = (x_i, x_j, x_k, x_l)`
/// cyclic, `xhat = (xhat_i, xhat_j, xhat_l)`.
pub fn miquel_completion(
    face: &[Vector3<f64>; 4],
    xhat: &[Vector3<f64>; 3],
) -> Result<MiquelResult, NetError> {
    let [xi, xj, xk, xl] = *face;
    let [hi, hj, hl] = *xhat;
    let scale = quad_diameter(face).max((hi - xi).norm());
    let tol = EPS_CIRCULAR * scale;

    let face_res = circularity_residual(face)?;
    if face_res > tol {
        return Err(NetError::NonCircular {
            residual: face_res,
            tol,
        });
    }
    let quad_ij = [xi, xj, hj, hi];
    let quad_il = [xi, xl, hl, hi];
    let res_ij = circularity_residual(&quad_ij)?;
    let res_il = circularity_residual(&quad_il)?;
    if res_ij > tol || res_il > tol {
        return Err(NetError::NonCircular {
            residual: res_ij.max(res_il),
            tol,
        });
    }
    // All constructed circles and points lie on one 2-sphere or plane.
    let sphere_res = common_sphere_residual(&[xi, xj, xk, xl, hi, hj, hl]);
    if sphere_res > 1e-7 {
        return Err(NetError::NoCommonSphere {
            residual: sphere_res,
        });
    }

    let c1 = circumcircle3(&xj, &xk, &hj)?;
    let c2 = circumcircle3(&xl, &xk, &hl)?;
    let (p_a, p_b) = circle_intersection(&c1, &c2, scale)?;
    // The shared point of the two circles is x_k; the transform is the
    // second intersection, selected as the root farther from x_k.
    let (near, far) = if (p_a - xk).norm() < (p_b - xk).norm() {
        (p_a, p_b)
    } else {
        (p_b, p_a)
    };
    if (far - xk).norm() <= 10.0 * tol {
        return Err(NetError::DegenerateIntersection);
    }
    let third = circularity_residual(&[hi, hj, far, hl])?;
    let alternative_also_valid = (near - xk).norm() > 10.0 * tol
        && circularity_residual(&[hi, hj, near, hl])
            .map(|r| r <= tol)
            .unwrap_or(false);
    Ok(MiquelResult {
        point: far,
        third_residual: third,
        used_residuals: [res_ij, res_il],
        alternative_also_valid,
    })
}

/// Result of a Ribaucour propagation.
#[derive(Debug, Clone)]
pub struct RibaucourResult {
    pub net: QuadNet,
    /// Largest transformed-face circularity residual (diameter
    /// normalized).
    pub max_third_residual: f64,
    /// Largest edge-quad circularity residual between the two nets
    /// (diameter normalized).
    pub max_edge_residual: f64,
    /// Faces where the nearer intersection also satisfied all
    /// constraints.
    pub ambiguous_faces: Vec<(usize, usize)>,
}

/// Propagates a Ribaucour transform from Cauchy data on row 0 (`v = 0`)
/// and column 0 (`u = 0`) by Miquel completion in lexicographic face
/// order.
pub fn ribaucour_propagate(
    net: &QuadNet,
    row0: &[Vector3<f64>],
    col0: &[Vector3<f64>],
) -> Result<RibaucourResult, NetError> {
    let (u, v) = net.window();
    if row0.len() != u + 1 || col0.len() != v + 1 {
        return Err(NetError::CauchyShapeMismatch);
    }
    if (row0[0] - col0[0]).norm() > 1e-12 * net.diameter() {
        return Err(NetError::CauchyShapeMismatch);
    }
    let diam = net.diameter();
    let tol = EPS_CIRCULAR * diam;
    // Validate the Cauchy data edge-quads.
    for i in 0..u {
        let quad = [*net.at(i, 0), *net.at(i + 1, 0), row0[i + 1], row0[i]];
        let r = circularity_residual(&quad)?;
        if r > tol {
            return Err(NetError::NonCircular { residual: r, tol });
        }
    }
    for j in 0..v {
        let quad = [*net.at(0, j), *net.at(0, j + 1), col0[j + 1], col0[j]];
        let r = circularity_residual(&quad)?;
        if r > tol {
            return Err(NetError::NonCircular { residual: r, tol });
        }
    }
    let mut hat: Grid<Option<Vector3<f64>>> = Grid::constant(u + 1, v + 1, None);
    for (i, p) in row0.iter().enumerate() {
        *hat.at_mut(i, 0) = Some(*p);
    }
    for (j, p) in col0.iter().enumerate() {
        *hat.at_mut(0, j) = Some(*p);
    }
    let mut max_third: f64 = 0.0;
    let mut ambiguous = Vec::new();
    for i in 0..u {
        for j in 0..v {
            let face = net.face(i, j);
            let xhat = [
                hat.at(i, j).expect("filled by propagation order"),
                hat.at(i + 1, j).expect("filled by propagation order"),
                hat.at(i, j + 1).expect("filled by propagation order"),
            ];
            let result =
                miquel_completion(&face, &xhat).map_err(|e| NetError::PropagationDegenerate {
                    i,
                    j,
                    source: Box::new(e),
                })?;
            max_third = max_third.max(result.third_residual);
            if result.alternative_also_valid {
                ambiguous.push((i, j));
            }
            *hat.at_mut(i + 1, j + 1) = Some(result.point);
        }
    }
    let vertices = Grid::from_fn(u + 1, v + 1, |i, j| hat.at(i, j).unwrap());
    let out = QuadNet::new(vertices, net.labels.clone())?;
    // Edge-quad audit over the full window.
    let mut max_edge: f64 = 0.0;
    for i in 0..=u {
        for j in 0..=v {
            if i < u {
                let quad = [*net.at(i, j), *net.at(i + 1, j), *out.at(i + 1, j), *out.at(i, j)];
                max_edge = max_edge.max(circularity_residual(&quad)?);
            }
            if j < v {
                let quad = [*net.at(i, j), *net.at(i, j + 1), *out.at(i, j + 1), *out.at(i, j)];
                max_edge = max_edge.max(circularity_residual(&quad)?);
            }
        }
    }
    Ok(RibaucourResult {
        net: out,
        max_third_residual: max_third / diam,
        max_edge_residual: max_edge / diam,
        ambiguous_faces: ambiguous,
    })
}

/// Samples admissible Ribaucour Cauchy data: each successive transform
/// point is drawn from the admissible circle through the previous one
/// and the corresponding net edge. `unit` supplies uniform samples in
/// `[0, 1)`.
pub fn sample_cauchy_data(
    net: &QuadNet,
    start: Vector3<f64>,
    mut unit: impl FnMut() -> f64,
) -> Result<(Vec<Vector3<f64>>, Vec<Vector3<f64>>), NetError> {
    let (u, v) = net.window();
    let pick = |circle: &Circle3D,
                avoid: &[Vector3<f64>],
                unit: &mut dyn FnMut() -> f64|
     -> Vector3<f64> {
        let (cu, cw) = {
            let seed = if circle.normal.x.abs() < 0.9 {
                Vector3::x()
            } else {
                Vector3::y()
            };
            let cu = (seed - circle.normal * seed.dot(&circle.normal)).normalize();
            (cu, circle.normal.cross(&cu))
        };
        loop {
            let theta = 2.0 * std::f64::consts::PI * unit();
            let p = circle.center + (cu * theta.cos() + cw * theta.sin()) * circle.radius;
            if avoid.iter().all(|a| (p - a).norm() > 0.05 * circle.radius) {
                return p;
            }
        }
    };
    let mut row = vec![start];
    for i in 0..u {
        let prev = row[i];
        let circle = circumcircle3(net.at(i, 0), net.at(i + 1, 0), &prev)?;
        let p = pick(&circle, &[*net.at(i, 0), *net.at(i + 1, 0), prev], &mut unit);
        row.push(p);
    }
    let mut col = vec![start];
    for j in 0..v {
        let prev = col[j];
        let circle = circumcircle3(net.at(0, j), net.at(0, j + 1), &prev)?;
        let p = pick(&circle, &[*net.at(0, j), *net.at(0, j + 1), prev], &mut unit);
        col.push(p);
    }
    Ok((row, col))
}

/// Largest deviation `|cr(face) + alpha_i / beta_j|` over all faces: a
/// discrete isothermic net has factorized cross-ratios
/// `cr = -alpha_i / beta_j`.
pub fn isothermic_residual_discrete(net: &QuadNet) -> Result<f64, NetError> {
    let labels = net.labels().ok_or(NetError::MissingLabels)?;
    let (u, v) = net.window();
    let mut worst: f64 = 0.0;
    for i in 0..u {
        for j in 0..v {
            let cr = cross_ratio(&net.face(i, j))?;
            worst = worst.max((cr + labels.alpha[i] / labels.beta[j]).abs());
        }
    }
    Ok(worst)
}

/// Christoffel dual: integrates the edge rule
/// `Delta x* = alpha_i Delta x / |Delta x|^2` on u-edges and
/// `Delta x* = -beta_j Delta x / |Delta x|^2` on v-edges from the base
/// vertex. Fails when the face closure (exactness) residual exceeds
/// tolerance, which happens iff the net is not discrete isothermic.
pub fn christoffel_dual(net: &QuadNet) -> Result<(QuadNet, f64), NetError> {
    let labels = net.labels().ok_or(NetError::MissingLabels)?;
    let (u, v) = net.window();
    let diam = net.diameter();
    let du = |i: usize, j: usize| -> Vector3<f64> {
        let d = net.at(i + 1, j) - net.at(i, j);
        d * (labels.alpha[i] / d.norm_squared())
    };
    let dv = |i: usize, j: usize| -> Vector3<f64> {
        let d = net.at(i, j + 1) - net.at(i, j);
        d * (-labels.beta[j] / d.norm_squared())
    };
    // Closure: the dual edge increments around every face must sum to
    // zero for x* to be well-defined.
    let mut closure: f64 = 0.0;
    for i in 0..u {
        for j in 0..v {
            let gap = du(i, j) + dv(i + 1, j) - du(i, j + 1) - dv(i, j);
            closure = closure.max(gap.norm());
        }
    }
    let closure = closure / diam.max(1.0);
    if closure > 1e-6 {
        return Err(NetError::NonIsothermic { residual: closure });
    }
    let mut vertices = Grid::constant(u + 1, v + 1, Vector3::zeros());
    for i in 0..u {
        let next = *vertices.at(i, 0) + du(i, 0);
        *vertices.at_mut(i + 1, 0) = next;
    }
    for i in 0..=u {
        for j in 0..v {
            let next = *vertices.at(i, j) + dv(i, j);
            *vertices.at_mut(i, j + 1) = next;
        }
    }
    let dual = QuadNet::new(vertices, Some(labels.clone()))?;
    Ok((dual, closure))
}

/// Result of a discrete Darboux transform.
#[derive(Debug, Clone)]
pub struct DarbouxResult {
    pub net: QuadNet,
    /// Largest face-closure gap of the propagation (diameter
    /// normalized): the transform of the fourth corner computed along
    /// the two edge paths must agree.
    pub max_face_gap: f64,
}

/// Solves the cross-ratio equation for the third vertex of
/// `(z1, z2, z3, z4)` given the target value and the other three
/// vertices: charting the circle (or line) through `p1, p2, p4`.
fn solve_fourth_point(
    p1: &Vector3<f64>,
    p2: &Vector3<f64>,
    p4: &Vector3<f64>,
    cr: f64,
) -> Result<Vector3<f64>, NetError> {
    let (origin, frame_u, frame_w, z1, z2, z4) = match circumcircle3(p1, p2, p4) {
        Ok(circle) => {
            let frame = chart_frame(&circle, p1);
            (
                circle.center,
                frame.0,
                frame.1,
                to_complex(p1, &circle, &frame),
                to_complex(p2, &circle, &frame),
                to_complex(p4, &circle, &frame),
            )
        }
        Err(NetError::Collinear) => {
            // Chart the common line; a real cross-ratio keeps the
            // solution on it.
            let dir = (p2 - p1).normalize();
            let w = if dir.x.abs() < 0.9 {
                dir.cross(&Vector3::x()).normalize()
            } else {
                dir.cross(&Vector3::y()).normalize()
            };
            (
                *p1,
                dir,
                w,
                Complex::new(0.0, 0.0),
                Complex::new((p2 - p1).dot(&dir), 0.0),
                Complex::new((p4 - p1).dot(&dir), 0.0),
            )
        }
        Err(e) => return Err(e),
    };
    let cr = Complex::new(cr, 0.0);
    let den = (z1 - z2) + cr * (z4 - z1);
    if den.norm() <= 1e-14 * (z1.norm() + z2.norm() + z4.norm()).max(1e-14) {
        return Err(NetError::DegenerateIntersection);
    }
    let z3 = ((z1 - z2) * z4 + cr * (z4 - z1) * z2) / den;
    Ok(origin + frame_u * z3.re + frame_w * z3.im)
}

/// Discrete Darboux transform with spectral parameter `lambda` from a
/// seed transform of the base vertex. Vertical quads
/// `(x, x_u, xhat_u, xhat)` carry cross-ratio `lambda * alpha_i`,
/// v-quads `(x, x_v, xhat_v, xhat)` carry `-lambda * beta_j`.
pub fn darboux_transform_discrete(
    net: &QuadNet,
    lambda: f64,
    seed: Vector3<f64>,
) -> Result<DarbouxResult, NetError> {
    if lambda.abs() < MIN_DARBOUX_LAMBDA {
        return Err(NetError::DegenerateParameter { value: lambda });
    }
    let labels = net.labels().ok_or(NetError::MissingLabels)?.clone();
    let (u, v) = net.window();
    let mut hat: Grid<Option<Vector3<f64>>> = Grid::constant(u + 1, v + 1, None);
    *hat.at_mut(0, 0) = Some(seed);
    let step_u = |i: usize, j: usize, from: &Vector3<f64>| -> Result<Vector3<f64>, NetError> {
        solve_fourth_point(net.at(i, j), net.at(i + 1, j), from, lambda * labels.alpha[i]).map_err(
            |e| NetError::PropagationDegenerate {
                i,
                j,
                source: Box::new(e),
            },
        )
    };
    let step_v = |i: usize, j: usize, from: &Vector3<f64>| -> Result<Vector3<f64>, NetError> {
        solve_fourth_point(net.at(i, j), net.at(i, j + 1), from, -lambda * labels.beta[j]).map_err(
            |e| NetError::PropagationDegenerate {
                i,
                j,
                source: Box::new(e),
            },
        )
    };
    for i in 0..u {
        let from = hat.at(i, 0).unwrap();
        let p = step_u(i, 0, &from)?;
        *hat.at_mut(i + 1, 0) = Some(p);
    }
    for j in 0..v {
        let from = hat.at(0, j).unwrap();
        let p = step_v(0, j, &from)?;
        *hat.at_mut(0, j + 1) = Some(p);
    }
    let mut max_gap: f64 = 0.0;
    for i in 0..u {
        for j in 0..v {
            let via_u = step_v(i + 1, j, &hat.at(i + 1, j).unwrap())?;
            let via_v = step_u(i, j + 1, &hat.at(i, j + 1).unwrap())?;
            max_gap = max_gap.max((via_u - via_v).norm());
            *hat.at_mut(i + 1, j + 1) = Some(via_u);
        }
    }
    let vertices = Grid::from_fn(u + 1, v + 1, |i, j| hat.at(i, j).unwrap());
    let out = QuadNet::new(vertices, Some(labels))?;
    Ok(DarbouxResult {
        net: out,
        max_face_gap: max_gap / net.diameter(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn v3(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z)
    }

    /// Moebius image of the square grid: exactly circular.
    fn moebius_grid(u: usize, v: usize) -> QuadNet {
        let map = |z: Complex<f64>| -> Complex<f64> {
            let a = Complex::new(1.0, 0.2);
            let b = Complex::new(0.3, -0.1);
            let c = Complex::new(0.05, 0.08);
            let d = Complex::new(1.0, 0.0);
            (a * z + b) / (c * z + d)
        };
        let vertices = Grid::from_fn(u + 1, v + 1, |i, j| {
            let z = map(Complex::new(i as f64, j as f64));
            v3(z.re, z.im, 0.0)
        });
        QuadNet::new(vertices, None).unwrap()
    }

    fn square_grid(u: usize, v: usize) -> QuadNet {
        let vertices = Grid::from_fn(u + 1, v + 1, |i, j| v3(i as f64, j as f64, 0.0));
        let labels = NetLabels {
            alpha: vec![1.0; u],
            beta: vec![1.0; v],
        };
        QuadNet::new(vertices, Some(labels)).unwrap()
    }

    /// Rectangle strip net: column widths a_i, unit row heights; labels
    /// alpha_i = a_i^2, beta = 1.
    fn rectangle_net(widths: &[f64], v: usize) -> QuadNet {
        let mut xs = vec![0.0];
        for w in widths {
            xs.push(xs.last().unwrap() + w);
        }
        let vertices = Grid::from_fn(widths.len() + 1, v + 1, |i, j| v3(xs[i], j as f64, 0.0));
        let labels = NetLabels {
            alpha: widths.iter().map(|w| w * w).collect(),
            beta: vec![1.0; v],
        };
        QuadNet::new(vertices, Some(labels)).unwrap()
    }

    fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut state = seed;
        move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64)
        }
    }

    #[test]
    fn circumcircle_examples() {
        let c = circumcircle3(&v3(0.0, 0.0, 0.0), &v3(1.0, 0.0, 0.0), &v3(0.0, 1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(c.center.x, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.center.y, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c.radius, 0.5_f64.sqrt(), epsilon = 1e-14);

        // Equilateral triangle with side 1: circumradius 1/sqrt(3).
        let h = 3.0_f64.sqrt() / 2.0;
        let c = circumcircle3(&v3(0.0, 0.0, 0.0), &v3(1.0, 0.0, 0.0), &v3(0.5, h, 0.0)).unwrap();
        assert_abs_diff_eq!(c.radius, 1.0 / 3.0_f64.sqrt(), epsilon = 1e-14);

        assert!(matches!(
            circumcircle3(&v3(0.0, 0.0, 0.0), &v3(1.0, 0.0, 0.0), &v3(2.0, 0.0, 0.0)),
            Err(NetError::Collinear)
        ));
    }

    #[test]
    fn circularity_examples() {
        let square = [
            v3(0.0, 0.0, 0.0),
            v3(1.0, 0.0, 0.0),
            v3(1.0, 1.0, 0.0),
            v3(0.0, 1.0, 0.0),
        ];
        assert!(circularity_residual(&square).unwrap() < 1e-14);
        let mut lifted = square;
        lifted[2].z = 0.1;
        assert!(circularity_residual(&lifted).unwrap() > 0.01);
    }

    #[test]
    fn cross_ratio_examples() {
        // Unit square 0, 1, 1+i, i: cr = -1.
        let square = [
            v3(0.0, 0.0, 0.0),
            v3(1.0, 0.0, 0.0),
            v3(1.0, 1.0, 0.0),
            v3(0.0, 1.0, 0.0),
        ];
        assert_abs_diff_eq!(cross_ratio(&square).unwrap(), -1.0, epsilon = 1e-13);
        // Rectangle with sides a, b: cr = -a^2/b^2.
        let (a, b) = (2.0, 1.0);
        let rect = [
            v3(0.0, 0.0, 0.0),
            v3(a, 0.0, 0.0),
            v3(a, b, 0.0),
            v3(0.0, b, 0.0),
        ];
        assert_abs_diff_eq!(cross_ratio(&rect).unwrap(), -4.0, epsilon = 1e-12);
        // Non-circular input is rejected.
        let mut bad = square;
        bad[1].z = 0.2;
        assert!(matches!(
            cross_ratio(&bad),
            Err(NetError::NonCircular { .. })
        ));
    }

    #[test]
    fn cross_ratio_invariance_under_similarity() {
        let quad = [
            v3(0.0, 0.0, 0.0),
            v3(1.3, 0.0, 0.0),
            v3(1.3, 0.7, 0.0),
            v3(0.0, 0.7, 0.0),
        ];
        let reference = cross_ratio(&quad).unwrap();
        let axis = nalgebra::Unit::new_normalize(Vector3::new(1.0, 2.0, -0.5));
        let rot = nalgebra::Rotation3::from_axis_angle(&axis, 1.1);
        let scale = 2.7;
        let shift = v3(3.0, -1.0, 2.0);
        let moved: Vec<Vector3<f64>> = quad.iter().map(|p| rot * p * scale + shift).collect();
        let moved = [moved[0], moved[1], moved[2], moved[3]];
        assert_abs_diff_eq!(cross_ratio(&moved).unwrap(), reference, epsilon = 1e-12);
    }

    #[test]
    fn moebius_grid_is_circular() {
        let net = moebius_grid(6, 5);
        assert!(net.circularity_audit().unwrap() < 1e-12);
    }

    #[test]
    fn miquel_planar_instance() {
        let face = [
            v3(0.0, 0.0, 0.0),
            v3(1.0, 0.0, 0.0),
            v3(1.0, 1.0, 0.0),
            v3(0.0, 1.0, 0.0),
        ];
        // In-plane transforms chosen on the required circles.
        let hi = v3(-0.3, -0.3, 0.0);
        let c_ij = circumcircle3(&face[0], &face[1], &hi).unwrap();
        let c_il = circumcircle3(&face[0], &face[3], &hi).unwrap();
        let on_circle = |c: &Circle3D, theta: f64| {
            let u = Vector3::x();
            let w = c.normal.cross(&u);
            c.center + (u * theta.cos() + w * theta.sin()) * c.radius
        };
        let hj = on_circle(&c_ij, 0.9);
        let hl = on_circle(&c_il, 0.7);
        let result = miquel_completion(&face, &[hi, hj, hl]).unwrap();
        assert!(
            result.third_residual < 1e-9,
            "third residual {:.3e}",
            result.third_residual
        );
        // Over-determination: the third constraint is within 10x of
        // the constructed ones (floored at arithmetic precision).
        let constructed = result.used_residuals[0].max(result.used_residuals[1]);
        assert!(result.third_residual < (10.0 * constructed).max(1e-10));
    }

    #[test]
    fn ribaucour_identity_cauchy_data_degenerates() {
        // Identity Cauchy data coincides with the net itself; the
        // Miquel circles degenerate (coincident points), which is
        // reported as an error rather than silently accepted.
        let net = moebius_grid(3, 3);
        let row0: Vec<_> = (0..4).map(|i| *net.at(i, 0)).collect();
        let col0: Vec<_> = (0..4).map(|j| *net.at(0, j)).collect();
        assert!(ribaucour_propagate(&net, &row0, &col0).is_err());
    }

    #[test]
    fn ribaucour_propagation_stays_circular() {
        let net = moebius_grid(8, 8);
        let mut unit = lcg(0x9e3779b97f4a7c15);
        let start = *net.at(0, 0) + v3(0.08, -0.03, 0.0);
        let (row0, col0) = sample_cauchy_data(&net, start, &mut unit).unwrap();
        let result = ribaucour_propagate(&net, &row0, &col0).unwrap();
        let audit = result.net.circularity_audit().unwrap();
        assert!(audit < 1e-8, "audit {audit:.3e}");
        assert!(result.max_edge_residual < 1e-8);
        assert!(result.max_third_residual < 1e-8);
    }

    #[test]
    fn ribaucour_involution_on_small_window() {
        let net = moebius_grid(3, 3);
        let mut unit = lcg(42);
        let start = *net.at(0, 0) + v3(0.1, 0.05, 0.0);
        let (row0, col0) = sample_cauchy_data(&net, start, &mut unit).unwrap();
        let transformed = ribaucour_propagate(&net, &row0, &col0).unwrap();
        // Reflected Cauchy data: the original net's row and column.
        let back_row: Vec<_> = (0..4).map(|i| *net.at(i, 0)).collect();
        let back_col: Vec<_> = (0..4).map(|j| *net.at(0, j)).collect();
        let back = ribaucour_propagate(&transformed.net, &back_row, &back_col).unwrap();
        let (u, v) = net.window();
        for i in 0..=u {
            for j in 0..=v {
                let gap = (back.net.at(i, j) - net.at(i, j)).norm();
                assert!(gap < 1e-7 * net.diameter(), "gap {gap:.3e} at ({i},{j})");
            }
        }
    }

    #[test]
    fn isothermic_residual_examples() {
        let net = square_grid(4, 4);
        assert!(isothermic_residual_discrete(&net).unwrap() < 1e-12);

        let rect = rectangle_net(&[1.0, 2.0, 0.5], 3);
        assert!(isothermic_residual_discrete(&rect).unwrap() < 1e-12);

        // Perturbing a vertex in-plane keeps faces circular-checkable
        // or fails the circularity gate; either way the isothermic
        // structure is broken.
        let mut vertices = rect.vertices().clone();
        let p = *vertices.at(1, 1) + v3(0.1, -0.05, 0.0);
        *vertices.at_mut(1, 1) = p;
        let perturbed = QuadNet::new(vertices, rect.labels().cloned()).unwrap();
        match isothermic_residual_discrete(&perturbed) {
            Ok(r) => assert!(r > 1e-3),
            Err(NetError::NonCircular { .. }) => {}
            Err(e) => panic!("unexpected error {e:?}"),
        }
    }

    #[test]
    fn christoffel_dual_examples() {
        // Square grid: dual is again a square grid (self-dual family).
        let net = square_grid(3, 3);
        let (dual, closure) = christoffel_dual(&net).unwrap();
        assert!(closure < 1e-14);
        assert!(isothermic_residual_discrete(&dual).unwrap() < 1e-12);

        // Rectangle strips: closure holds, dual of dual returns the
        // original net up to translation.
        let rect = rectangle_net(&[1.0, 2.0, 0.5], 3);
        let (dual, closure) = christoffel_dual(&rect).unwrap();
        assert!(closure < 1e-13, "closure {closure:.3e}");
        let (ddual, _) = christoffel_dual(&dual).unwrap();
        let offset = ddual.at(0, 0) - rect.at(0, 0);
        let (u, v) = rect.window();
        for i in 0..=u {
            for j in 0..=v {
                let gap = (ddual.at(i, j) - rect.at(i, j) - offset).norm();
                assert!(gap < 1e-10, "gap {gap:.3e}");
            }
        }

        // Non-isothermic input: closure fails.
        let mut vertices = rect.vertices().clone();
        let p = *vertices.at(1, 1) + v3(0.2, 0.1, 0.0);
        *vertices.at_mut(1, 1) = p;
        let bad = QuadNet::new(vertices, rect.labels().cloned()).unwrap();
        assert!(matches!(
            christoffel_dual(&bad),
            Err(NetError::NonIsothermic { .. })
        ));
    }

    #[test]
    fn darboux_transform_examples() {
        let net = rectangle_net(&[1.0, 0.8, 1.3, 0.6, 1.1, 0.9, 1.2, 0.7], 8);
        let seed = v3(-0.4, -0.5, 0.0);
        let result = darboux_transform_discrete(&net, 0.7, seed).unwrap();
        assert!(
            result.max_face_gap < 1e-9,
            "face gap {:.3e}",
            result.max_face_gap
        );
        // The transform is circular and isothermic with the same labels.
        assert!(result.net.circularity_audit().unwrap() < 1e-8);
        let res = isothermic_residual_discrete(&result.net).unwrap();
        assert!(res < 1e-8, "residual {res:.3e}");

        // Guarded parameter domain.
        assert!(matches!(
            darboux_transform_discrete(&net, 1e-9, seed),
            Err(NetError::DegenerateParameter { .. })
        ));
    }

    #[test]
    fn miquel_moebius_equivariance() {
        // Inversion of all inputs maps the output to the inversion of
        // the previous output.
        let face = [
            v3(0.0, 0.0, 0.0),
            v3(1.0, 0.0, 0.0),
            v3(1.0, 1.0, 0.0),
            v3(0.0, 1.0, 0.0),
        ];
        let hi = v3(-0.3, -0.25, 0.0);
        let c_ij = circumcircle3(&face[0], &face[1], &hi).unwrap();
        let c_il = circumcircle3(&face[0], &face[3], &hi).unwrap();
        let on_circle = |c: &Circle3D, theta: f64| {
            let seed = if c.normal.x.abs() < 0.9 {
                Vector3::x()
            } else {
                Vector3::y()
            };
            let u = (seed - c.normal * seed.dot(&c.normal)).normalize();
            let w = c.normal.cross(&u);
            c.center + (u * theta.cos() + w * theta.sin()) * c.radius
        };
        let hj = on_circle(&c_ij, 1.2);
        let hl = on_circle(&c_il, 0.4);
        let result = miquel_completion(&face, &[hi, hj, hl]).unwrap();

        let center = v3(2.5, -1.5, 1.0);
        let r2 = 4.0;
        let invert = |p: &Vector3<f64>| -> Vector3<f64> {
            let d = p - center;
            center + d * (r2 / d.norm_squared())
        };
        let inv_face = [
            invert(&face[0]),
            invert(&face[1]),
            invert(&face[2]),
            invert(&face[3]),
        ];
        let inv_hat = [invert(&hi), invert(&hj), invert(&hl)];
        let inv_result = miquel_completion(&inv_face, &inv_hat).unwrap();
        let gap = (inv_result.point - invert(&result.point)).norm();
        assert!(gap < 1e-8, "equivariance gap {gap:.3e}");
    }

    #[test]
    fn circular_quads_survive_inversion() {
        let square = [
            v3(0.0, 0.0, 0.0),
            v3(1.0, 0.0, 0.0),
            v3(1.0, 1.0, 0.0),
            v3(0.0, 1.0, 0.0),
        ];
        let center = v3(3.0, 1.0, 2.0);
        let invert = |p: &Vector3<f64>| -> Vector3<f64> {
            let d = p - center;
            center + d * (2.0 / d.norm_squared())
        };
        let image = [
            invert(&square[0]),
            invert(&square[1]),
            invert(&square[2]),
            invert(&square[3]),
        ];
        assert!(circularity_residual(&image).unwrap() < 1e-10);
    }
}
