//! t-embeddings of the augmented dual: angle, proper and perfect checks,
//! origami square root and origami map, boundary angles, Lipschitz and
//! fatness diagnostics, fan splittings.

use std::collections::{HashSet, VecDeque};
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::domain::XiFunction;
use crate::dual::{AugmentedDual, Side};
use crate::error::{Error, Result};
use crate::graph::Color;
use crate::kasteleyn::kasteleyn_from_positions;
use crate::C64;

pub(crate) fn unit(z: C64) -> C64 {
    z / z.norm()
}

/// Interior angle at `c` of a counterclockwise polygon `... p, c, n ...`.
pub fn interior_angle(p: C64, c: C64, n: C64) -> f64 {
    let a = ((p - c) / (n - c)).arg();
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

/// Positions of augmented-dual nodes.
#[derive(Clone, Debug)]
pub struct TEmbedding {
    pub dual: Arc<AugmentedDual>,
    pub t: Vec<C64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AngleReport {
    pub max_deviation: f64,
    pub failing: Vec<usize>,
    pub pass: bool,
}

impl TEmbedding {
    pub fn new(dual: Arc<AugmentedDual>, t: Vec<C64>) -> Result<Self> {
        if t.len() != dual.n_nodes() {
            return Err(Error::Input("position count does not match dual".into()));
        }
        if t.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::DegenerateEmbedding("non-finite position".into()));
        }
        Ok(Self { dual, t })
    }

    /// `T(right) - T(left)` across G-edge `e`.
    pub fn dt(&self, e: usize) -> C64 {
        let [a, b] = self.dual.edge_nodes(e);
        self.t[b] - self.t[a]
    }

    /// `T(v_{k+1}) - T(v_k)`.
    pub fn boundary_dt(&self, k: usize) -> C64 {
        let n = self.dual.n_boundary();
        self.t[self.dual.boundary_node((k + 1) % n)] - self.t[self.dual.boundary_node(k)]
    }

    pub fn boundary_point(&self, k: usize) -> C64 {
        self.t[self.dual.boundary_node(k)]
    }

    pub fn side_dt(&self, v: usize, j: usize) -> C64 {
        let p = self.dual.polygon(v);
        let d = p.nodes.len();
        self.t[p.nodes[(j + 1) % d]] - self.t[p.nodes[j]]
    }

    pub fn polygon_points(&self, v: usize) -> Vec<C64> {
        self.dual
            .polygon(v)
            .nodes
            .iter()
            .map(|&i| self.t[i])
            .collect()
    }

    pub fn diameter(&self) -> f64 {
        let (mut lo, mut hi) = (C64::new(f64::MAX, f64::MAX), C64::new(f64::MIN, f64::MIN));
        for z in &self.t {
            lo = C64::new(lo.re.min(z.re), lo.im.min(z.im));
            hi = C64::new(hi.re.max(z.re), hi.im.max(z.im));
        }
        (hi - lo).norm()
    }

    /// `z -> a z + b`.
    pub fn affine(&self, a: C64, b: C64) -> Self {
        Self {
            dual: self.dual.clone(),
            t: self.t.iter().map(|z| a * z + b).collect(),
        }
    }

    pub fn kasteleyn(&self) -> Result<DMatrix<C64>> {
        kasteleyn_from_positions(&self.dual, &self.t)
    }

    /// Per inner node `|sum of black angles - pi|`.
    pub fn check_angle_condition(&self, tol: f64) -> AngleReport {
        let g = self.dual.graph();
        let mut black = vec![0.0; self.dual.n_nodes()];
        for v in 0..g.n_vertices() {
            if g.color(v) != Color::Black {
                continue;
            }
            let pts = self.polygon_points(v);
            let nodes = &self.dual.polygon(v).nodes;
            let d = pts.len();
            for j in 0..d {
                black[nodes[j]] += interior_angle(pts[(j + d - 1) % d], pts[j], pts[(j + 1) % d]);
            }
        }
        let mut max_deviation: f64 = 0.0;
        let mut failing = Vec::new();
        for (v, angle) in black.iter().enumerate().take(self.dual.n_inner()) {
            let dev = (angle - PI).abs();
            max_deviation = max_deviation.max(dev);
            if dev > tol {
                failing.push(v);
            }
        }
        AngleReport {
            max_deviation,
            pass: failing.is_empty(),
            failing,
        }
    }

    /// Convexity and orientation of every face, and coverage of sample
    /// points inside the boundary polygon exactly once.
    pub fn check_proper(&self, tol: f64) -> ProperReport {
        let g = self.dual.graph();
        let scale = self.diameter().max(1e-300);
        let mut min_turn = f64::INFINITY;
        let mut min_area = f64::INFINITY;
        let mut samples = Vec::new();
        for v in 0..g.n_vertices() {
            let pts = self.polygon_points(v);
            let d = pts.len();
            let mut area = 0.0;
            for j in 0..d {
                let (a, b, c) = (pts[j], pts[(j + 1) % d], pts[(j + 2) % d]);
                let cr =
                    ((b - a).conj() * (c - b)).im / ((b - a).norm() * (c - b).norm()).max(1e-300);
                min_turn = min_turn.min(cr);
                area += (a.conj() * b).im / 2.0;
            }
            min_area = min_area.min(area / (scale * scale));
            for j in 1..d - 1 {
                samples.push((pts[0] + pts[j] + pts[j + 1]) / 3.0);
            }
        }
        let coverage = |z: C64| -> i64 {
            (0..g.n_vertices())
                .map(|v| winding_number(&self.polygon_points(v), z))
                .sum()
        };
        let coverage_failures = samples.iter().filter(|&&z| coverage(z) != 1).count();
        let convex = min_turn > -tol;
        let oriented = min_area > 0.0;
        ProperReport {
            convex,
            min_turn,
            oriented,
            min_area,
            samples: samples.len(),
            coverage_failures,
            pass: convex && oriented && coverage_failures == 0,
        }
    }

    /// Tangency of boundary lines to the unit circle and bisection of the
    /// boundary angles by the spokes.
    pub fn check_perfect(&self, tol: f64) -> PerfectReport {
        let n = self.dual.n_boundary();
        let mut tangency: f64 = 0.0;
        let mut bisector: f64 = 0.0;
        let mut outward = true;
        for k in 0..n {
            let a = self.boundary_point(k);
            let b = self.boundary_point((k + 1) % n);
            let dir = b - a;
            let dist = (a.conj() * dir).im / dir.norm();
            tangency = tangency.max((dist.abs() - 1.0).abs());
            if dist <= 0.0 {
                outward = false;
            }
            let s = self.t[self.dual.v_in(k)] - a;
            let u1 = b - a;
            let u2 = self.boundary_point((k + n - 1) % n) - a;
            bisector = bisector.max(((u1 / s).arg() + (u2 / s).arg()).abs());
        }
        PerfectReport {
            tangency_residual: tangency,
            bisector_residual: bisector,
            outward_side: outward,
            pass: tangency < tol && bisector < tol,
        }
    }

    /// Lipschitz diagnostic of `O` against `T` on node pairs inside the
    /// region at distance at least `delta`; sampled above `cap` pairs.
    pub fn check_lip(
        &self,
        o: &[C64],
        region: impl Fn(C64) -> bool,
        kappa: f64,
        delta: f64,
        cap: usize,
    ) -> LipReport {
        let nodes: Vec<usize> = (0..self.t.len()).filter(|&i| region(self.t[i])).collect();
        let n = nodes.len();
        let total = n * n.saturating_sub(1) / 2;
        let stride = if total > cap { total.div_ceil(cap) } else { 1 };
        let mut worst: f64 = 0.0;
        let mut checked = 0;
        let mut violations = 0;
        let mut idx = 0usize;
        for i in 0..n {
            for j in i + 1..n {
                idx += 1;
                if idx % stride != 0 {
                    continue;
                }
                let (a, b) = (nodes[i], nodes[j]);
                let dz = (self.t[a] - self.t[b]).norm();
                if dz < delta {
                    continue;
                }
                let r = (o[a] - o[b]).norm() / dz;
                checked += 1;
                worst = worst.max(r);
                if r > kappa {
                    violations += 1;
                }
            }
        }
        LipReport {
            worst_ratio: worst,
            pairs_checked: checked,
            violations,
            pass: violations == 0,
        }
    }

    /// Fan triangulation of all faces of one color from their minimal node.
    pub fn split(&self, color: Color, eta: &OrigamiSqrt) -> Splitting {
        let g = self.dual.graph();
        let mut triangles = Vec::new();
        let mut diagonals = Vec::new();
        for v in 0..g.n_vertices() {
            let poly = self.dual.polygon(v);
            let d = poly.nodes.len();
            let sides: Vec<SplitSide> = poly
                .sides
                .iter()
                .map(|s| match *s {
                    Side::Edge(e) => SplitSide::Edge(e),
                    Side::Boundary(k) => SplitSide::Boundary(k),
                })
                .collect();
            if g.color(v) != color || d <= 3 {
                triangles.push(SplitTriangle {
                    face: v,
                    nodes: poly.nodes.clone(),
                    sides,
                });
                continue;
            }
            let s0 = (0..d).min_by_key(|&j| poly.nodes[j]).unwrap();
            let p: Vec<usize> = (0..d).map(|j| poly.nodes[(s0 + j) % d]).collect();
            let ps: Vec<SplitSide> = (0..d).map(|j| sides[(s0 + j) % d]).collect();
            let mut diag_id = vec![usize::MAX; d];
            for (j, slot) in diag_id.iter_mut().enumerate().take(d - 1).skip(2) {
                let dir = self.t[p[j]] - self.t[p[0]];
                *slot = diagonals.len();
                diagonals.push(Diagonal {
                    face: v,
                    nodes: [p[0], p[j]],
                    eta: unit(dir).conj() * eta.eta[v].conj(),
                });
            }
            for i in 1..d - 1 {
                let a = if i == 1 {
                    ps[0]
                } else {
                    SplitSide::Diagonal(diag_id[i])
                };
                let c = if i + 1 == d - 1 {
                    ps[d - 1]
                } else {
                    SplitSide::Diagonal(diag_id[i + 1])
                };
                triangles.push(SplitTriangle {
                    face: v,
                    nodes: vec![p[0], p[i], p[i + 1]],
                    sides: vec![a, ps[i], c],
                });
            }
        }
        Splitting {
            color,
            triangles,
            diagonals,
        }
    }

    /// Faces of the splitting containing a disc of radius `exp(-beta/delta)`
    /// are fat; reports the largest diameter of a vertex-connected cluster of
    /// thin faces meeting the region.
    pub fn check_exp_fat(
        &self,
        split: &Splitting,
        delta: f64,
        beta: f64,
        region: impl Fn(C64) -> bool,
    ) -> FatReport {
        let rho = (-beta / delta).exp();
        let thin: Vec<usize> = (0..split.triangles.len())
            .filter(|&i| {
                let pts: Vec<C64> = split.triangles[i]
                    .nodes
                    .iter()
                    .map(|&j| self.t[j])
                    .collect();
                inradius(&pts) < rho && pts.iter().any(|&z| region(z))
            })
            .collect();
        let mut by_node: std::collections::HashMap<usize, Vec<usize>> = Default::default();
        for (slot, &i) in thin.iter().enumerate() {
            for &j in &split.triangles[i].nodes {
                by_node.entry(j).or_default().push(slot);
            }
        }
        let mut comp = vec![usize::MAX; thin.len()];
        let mut max_diam: f64 = 0.0;
        for s in 0..thin.len() {
            if comp[s] != usize::MAX {
                continue;
            }
            comp[s] = s;
            let mut q = VecDeque::from([s]);
            let mut pts = Vec::new();
            while let Some(x) = q.pop_front() {
                for &j in &split.triangles[thin[x]].nodes {
                    pts.push(self.t[j]);
                    for &y in &by_node[&j] {
                        if comp[y] == usize::MAX {
                            comp[y] = s;
                            q.push_back(y);
                        }
                    }
                }
            }
            for a in &pts {
                for b in &pts {
                    max_diam = max_diam.max((a - b).norm());
                }
            }
        }
        FatReport {
            radius_threshold: rho,
            thin_faces: thin.len(),
            max_component_diameter: max_diam,
        }
    }
}

fn inradius(pts: &[C64]) -> f64 {
    let d = pts.len();
    let mut area = 0.0;
    let mut per = 0.0;
    for j in 0..d {
        area += (pts[j].conj() * pts[(j + 1) % d]).im / 2.0;
        per += (pts[(j + 1) % d] - pts[j]).norm();
    }
    if d == 3 {
        2.0 * area.abs() / per
    } else {
        // lower bound for convex polygons
        area.abs() / per
    }
}

/// Winding number of a closed polygon around `z`.
pub fn winding_number(pts: &[C64], z: C64) -> i64 {
    let d = pts.len();
    let mut total = 0.0;
    for j in 0..d {
        total += ((pts[(j + 1) % d] - z) / (pts[j] - z)).arg();
    }
    (total / TAU).round() as i64
}

#[derive(Clone, Debug, Serialize)]
pub struct ProperReport {
    pub convex: bool,
    pub min_turn: f64,
    pub oriented: bool,
    pub min_area: f64,
    pub samples: usize,
    pub coverage_failures: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerfectReport {
    pub tangency_residual: f64,
    pub bisector_residual: f64,
    /// Unit disc on the inner side of every boundary line.
    pub outward_side: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LipReport {
    pub worst_ratio: f64,
    pub pairs_checked: usize,
    pub violations: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FatReport {
    pub radius_threshold: f64,
    pub thin_faces: usize,
    pub max_component_diameter: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SplitSide {
    Edge(usize),
    Boundary(usize),
    Diagonal(usize),
}

#[derive(Clone, Debug)]
pub struct SplitTriangle {
    /// Original face (G-vertex).
    pub face: usize,
    /// Counterclockwise nodes; unsplit faces keep their full polygon.
    pub nodes: Vec<usize>,
    /// `sides[j]` joins `nodes[j]` and `nodes[j+1]`.
    pub sides: Vec<SplitSide>,
}

/// Inserted zero-angle 2-gon of the opposite color along a diagonal.
#[derive(Clone, Debug)]
pub struct Diagonal {
    pub face: usize,
    pub nodes: [usize; 2],
    pub eta: C64,
}

#[derive(Clone, Debug)]
pub struct Splitting {
    pub color: Color,
    pub triangles: Vec<SplitTriangle>,
    pub diagonals: Vec<Diagonal>,
}

/// Unit-modulus `eta` per face with `dT in conj(eta_b) conj(eta_w) R`.
/// `eta_out[k]` belongs to the outer face beyond boundary edge `k`.
#[derive(Clone, Debug)]
pub struct OrigamiSqrt {
    pub eta: Vec<C64>,
    pub eta_out: Vec<C64>,
    /// Max angular residue over G-edges and boundary edges.
    pub residual: f64,
    /// Max angular residue over the outer rays (zero for perfect embeddings).
    pub ray_residual: f64,
}

impl OrigamiSqrt {
    /// `eta_b -> lambda eta_b`, `eta_w -> conj(lambda) eta_w`.
    pub fn rotate(&self, dual: &AugmentedDual, lambda: C64) -> Self {
        let g = dual.graph();
        let f = |c: Color| {
            if c == Color::Black {
                lambda
            } else {
                lambda.conj()
            }
        };
        Self {
            eta: (0..g.n_vertices())
                .map(|v| self.eta[v] * f(g.color(v)))
                .collect(),
            eta_out: (0..dual.n_boundary())
                .map(|k| self.eta_out[k] * f(dual.outer_face_color(k)))
                .collect(),
            residual: self.residual,
            ray_residual: self.ray_residual,
        }
    }

    /// `eta` of the white face on either side of boundary edge `k`.
    pub fn boundary_white(&self, dual: &AugmentedDual, k: usize) -> C64 {
        let v = dual.boundary_face(k);
        if dual.graph().color(v) == Color::White {
            self.eta[v]
        } else {
            self.eta_out[k]
        }
    }
}

fn eta_residue(dt: C64, a: C64, b: C64) -> f64 {
    (dt * a * b).im.abs() / dt.norm()
}

/// Propagate `eta` by breadth-first search from G-vertex 0 with value 1.
pub fn compute_origami_sqrt(t: &TEmbedding, tol: f64) -> Result<OrigamiSqrt> {
    let dual = &t.dual;
    let g = dual.graph();
    let mut eta = vec![C64::new(0.0, 0.0); g.n_vertices()];
    let mut seen = vec![false; g.n_vertices()];
    seen[0] = true;
    eta[0] = C64::new(1.0, 0.0);
    let mut q = VecDeque::from([0usize]);
    while let Some(v) = q.pop_front() {
        for &e in g.rotation(v) {
            let u = g.edge(e).other(v);
            if !seen[u] {
                seen[u] = true;
                eta[u] = unit(t.dt(e)).conj() * eta[v].conj();
                q.push_back(u);
            }
        }
    }
    let mut residual: f64 = 0.0;
    for (e, ed) in g.edges().iter().enumerate() {
        residual = residual.max(eta_residue(t.dt(e), eta[ed.black], eta[ed.white]));
    }
    let n = dual.n_boundary();
    let eta_out: Vec<C64> = (0..n)
        .map(|k| unit(t.boundary_dt(k)).conj() * eta[dual.boundary_face(k)].conj())
        .collect();
    let mut ray_residual: f64 = 0.0;
    for k in 0..n {
        let ray = t.boundary_point(k) - t.t[dual.v_in(k)];
        ray_residual = ray_residual.max(eta_residue(ray, eta_out[(k + n - 1) % n], eta_out[k]));
    }
    if residual > tol {
        return Err(Error::NotATEmbedding(format!(
            "origami square root inconsistent, residue {residual:e}"
        )));
    }
    Ok(OrigamiSqrt {
        eta,
        eta_out,
        residual,
        ray_residual,
    })
}

/// Origami map values per node.
#[derive(Clone, Debug)]
pub struct OrigamiMap {
    pub o: Vec<C64>,
    pub base: usize,
    pub closedness: f64,
}

/// `dO = eta_w^2 dT`, integrated from `base`.
pub fn compute_origami(
    t: &TEmbedding,
    eta: &OrigamiSqrt,
    base: usize,
    base_value: C64,
    tol: f64,
) -> Result<OrigamiMap> {
    let dual = &t.dual;
    let g = dual.graph();
    let d_o = |e: usize| eta.eta[g.edge(e).white].powi(2) * t.dt(e);
    let mut o = vec![C64::new(0.0, 0.0); dual.n_nodes()];
    o[base] = base_value;
    for (v, p) in dual.bfs_tree(base) {
        if let Some((u, e, s)) = p {
            o[v] = o[u] + d_o(e) * s as f64;
        }
    }
    let mut closedness: f64 = 0.0;
    for e in 0..g.n_edges() {
        let [a, b] = dual.edge_nodes(e);
        closedness = closedness.max((o[b] - o[a] - d_o(e)).norm());
    }
    let n = dual.n_boundary();
    for k in 0..n {
        let (a, b) = (dual.boundary_node(k), dual.boundary_node((k + 1) % n));
        let want = eta.boundary_white(dual, k).powi(2) * t.boundary_dt(k);
        closedness = closedness.max((o[b] - o[a] - want).norm());
    }
    if closedness > tol {
        return Err(Error::NotATEmbedding(format!(
            "origami map not closed, residue {closedness:e}"
        )));
    }
    Ok(OrigamiMap {
        o,
        base,
        closedness,
    })
}

/// Boundary angles of a perfect embedding, `T(v_k) = e^{i phi_k}/cos xi_k`,
/// `O(v_k) = o_sign tan xi_k`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryData {
    pub phi: Vec<f64>,
    pub xi: Vec<f64>,
    /// `+1` if `O(v_k) = tan xi_k`, `-1` if the identities needed `-O`.
    pub o_sign: f64,
    pub identity_residual: f64,
    pub angle_sum_residual: f64,
    pub hyperboloid_residual: f64,
}

impl BoundaryData {
    pub fn xi_function(&self) -> Result<XiFunction> {
        XiFunction::new(self.phi.clone(), self.xi.clone())
    }

    /// Max violation of both chains of tangency identities.
    pub fn identity_residual_of(phi: &[f64], xi: &[f64]) -> f64 {
        let n = phi.len();
        let mut r: f64 = 0.0;
        for k in 0..n {
            let (p1, x1) = if k + 1 < n {
                (phi[k + 1], xi[k + 1])
            } else {
                (phi[0] + TAU, xi[0])
            };
            let s = if k % 2 == 0 { -1.0 } else { 1.0 };
            r = r.max(((phi[k] + s * xi[k]) - (p1 + s * x1)).abs());
        }
        r
    }
}

fn unwrap_increasing(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    for (k, &a) in raw.iter().enumerate() {
        let mut x = a;
        if k > 0 {
            while x <= out[k - 1] {
                x += TAU;
            }
        }
        out.push(x);
    }
    out
}

pub fn boundary_angles(t: &TEmbedding, o: &[C64], tol: f64) -> Result<BoundaryData> {
    let dual = &t.dual;
    let n = dual.n_boundary();
    let mut hyper: f64 = 0.0;
    for k in 0..n {
        let (z, w) = (t.boundary_point(k), o[dual.boundary_node(k)]);
        hyper = hyper
            .max((z.norm_sqr() - w.re * w.re - 1.0).abs())
            .max(w.im.abs());
    }
    if hyper > tol {
        return Err(Error::NotPerfect(format!(
            "boundary off the hyperboloid by {hyper:e}"
        )));
    }
    let phi = unwrap_increasing(
        &(0..n)
            .map(|k| t.boundary_point(k).arg())
            .collect::<Vec<_>>(),
    );
    let xi: Vec<f64> = (0..n).map(|k| o[dual.boundary_node(k)].re.atan()).collect();
    let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
    let (rp, rn) = (
        BoundaryData::identity_residual_of(&phi, &xi),
        BoundaryData::identity_residual_of(&phi, &neg),
    );
    let (xi, o_sign, identity_residual) = if rp <= rn {
        (xi, 1.0, rp)
    } else {
        (neg, -1.0, rn)
    };
    let sum: f64 = (0..n).step_by(2).map(|k| phi[k + 1] - phi[k]).sum();
    Ok(BoundaryData {
        phi,
        xi,
        o_sign,
        identity_residual,
        angle_sum_residual: (sum - PI).abs(),
        hyperboloid_residual: hyper,
    })
}

/// Rotate `eta` so that `conj(eta_b)^2 = -i e^{i(phi_j + xi_j)}` on black
/// boundary faces `j` (odd) and `conj(eta_w)^2 = i e^{i(phi_{j+1} - xi_{j+1})}`
/// on white boundary faces `j` (even). Returns the rotated root and the
/// spread of the rotation estimates.
pub fn normalize_perfect_eta(
    dual: &AugmentedDual,
    eta: &OrigamiSqrt,
    bd: &BoundaryData,
) -> (OrigamiSqrt, f64) {
    let n = dual.n_boundary();
    let i = C64::new(0.0, 1.0);
    let mut est = Vec::with_capacity(n);
    for j in 0..n {
        let v = dual.boundary_face(j);
        let cur = eta.eta[v].conj().powi(2);
        if j % 2 == 1 {
            let target = -i * C64::from_polar(1.0, bd.phi[j] + bd.xi[j]);
            // lambda-bar^2 = target / cur
            est.push((target / cur).conj());
        } else {
            let jn = (j + 1) % n;
            let target = i * C64::from_polar(1.0, bd.phi[jn] - bd.xi[jn]);
            est.push(target / cur);
        }
    }
    let lam2 = unit(est.iter().sum::<C64>());
    let spread = est.iter().map(|e| (e - lam2).norm()).fold(0.0, f64::max);
    (eta.rotate(dual, lam2.sqrt()), spread)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbeddingJson {
    /// Node id -> `[x, y]`.
    pub positions: Vec<[f64; 2]>,
    /// G-vertex id -> `eta` as `[re, im]`.
    pub eta: Vec<[f64; 2]>,
    pub eta_out: Vec<[f64; 2]>,
    /// Node id -> origami value `[ox, oy]`.
    pub origami: Vec<[f64; 2]>,
    pub phi: Vec<f64>,
    pub xi: Vec<f64>,
}

pub fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

impl EmbeddingJson {
    pub fn new(
        t: &TEmbedding,
        eta: &OrigamiSqrt,
        o: &OrigamiMap,
        bd: Option<&BoundaryData>,
    ) -> Self {
        Self {
            positions: t.t.iter().map(|&z| pair(z)).collect(),
            eta: eta.eta.iter().map(|&z| pair(z)).collect(),
            eta_out: eta.eta_out.iter().map(|&z| pair(z)).collect(),
            origami: o.o.iter().map(|&z| pair(z)).collect(),
            phi: bd.map(|b| b.phi.clone()).unwrap_or_default(),
            xi: bd.map(|b| b.xi.clone()).unwrap_or_default(),
        }
    }

    pub fn positions(&self) -> Vec<C64> {
        self.positions
            .iter()
            .map(|p| C64::new(p[0], p[1]))
            .collect()
    }
}

/// Boundary nodes reached by a minimal set of inner nodes; used by callers
/// that want node lists restricted to a region.
pub fn inner_nodes_in(t: &TEmbedding, region: impl Fn(C64) -> bool) -> Vec<usize> {
    (0..t.dual.n_inner()).filter(|&v| region(t.t[v])).collect()
}

/// Set of nodes on the polygon of a G-vertex.
pub fn polygon_node_set(dual: &AugmentedDual, v: usize) -> HashSet<usize> {
    dual.polygon(v).nodes.iter().copied().collect()
}
