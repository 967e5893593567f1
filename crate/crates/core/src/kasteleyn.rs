//! Kasteleyn signs and matrices, determinants, inverses and the exact
//! determinantal formulas for edge probabilities and height correlations.

use std::collections::{BinaryHeap, HashSet, VecDeque};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::dual::AugmentedDual;
use crate::error::{Error, Result};
use crate::graph::BipartiteDimerGraph;

/// Signed weighted adjacency matrix, rows indexed by black class index and
/// columns by white class index.
#[derive(Clone, Debug)]
pub struct RealKasteleyn {
    pub signs: Vec<f64>,
    pub matrix: DMatrix<f64>,
}

/// Inverse `K^{-1}(w, b)`: rows white, columns black.
#[derive(Clone, Debug)]
pub struct InverseKasteleyn {
    pub matrix: DMatrix<C64>,
    /// `max |K K^{-1} - I|`.
    pub residual: f64,
}

impl InverseKasteleyn {
    pub fn get(&self, g: &BipartiteDimerGraph, w: usize, b: usize) -> C64 {
        self.matrix[(g.class_index(w), g.class_index(b))]
    }
}

/// Product of edge signs around every inner face must equal
/// `(-1)^(d/2 - 1)`. Returns the ids of violating faces.
pub fn sign_violations(g: &BipartiteDimerGraph, signs: &[f64]) -> Vec<usize> {
    (0..g.n_faces())
        .filter(|&f| f != g.outer_face())
        .filter(|&f| {
            let face = &g.faces()[f];
            let p: f64 = face.iter().map(|d| signs[d.edge]).product();
            let target = if (face.len() / 2 - 1) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            p != target
        })
        .collect()
}

/// Signs: +1 on a breadth-first spanning tree of G, then inner faces with a
/// single undetermined edge are peeled off one at a time.
pub fn assign_kasteleyn_signs(g: &BipartiteDimerGraph) -> Result<RealKasteleyn> {
    let ne = g.n_edges();
    let mut sign = vec![0.0f64; ne];
    let mut seen = vec![false; g.n_vertices()];
    seen[0] = true;
    let mut q = VecDeque::from([0usize]);
    while let Some(v) = q.pop_front() {
        for &e in g.rotation(v) {
            let u = g.edge(e).other(v);
            if !seen[u] {
                seen[u] = true;
                sign[e] = 1.0;
                q.push_back(u);
            }
        }
    }
    let mut changed = true;
    while changed {
        changed = false;
        for (f, face) in g.faces().iter().enumerate() {
            if f == g.outer_face() {
                continue;
            }
            let und: Vec<usize> = face
                .iter()
                .map(|d| d.edge)
                .filter(|&e| sign[e] == 0.0)
                .collect();
            if und.len() == 1 {
                let target = if (face.len() / 2 - 1) % 2 == 0 {
                    1.0
                } else {
                    -1.0
                };
                let p: f64 = face
                    .iter()
                    .map(|d| sign[d.edge])
                    .filter(|&s| s != 0.0)
                    .product();
                sign[und[0]] = target * p;
                changed = true;
            }
        }
    }
    if sign.iter().any(|&s| s == 0.0) || !sign_violations(g, &sign).is_empty() {
        return Err(Error::Structure(
            "Kasteleyn sign system inconsistent".into(),
        ));
    }
    let matrix = real_matrix(g, &sign);
    Ok(RealKasteleyn {
        signs: sign,
        matrix,
    })
}

pub fn real_matrix(g: &BipartiteDimerGraph, signs: &[f64]) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(g.black_vertices().len(), g.white_vertices().len());
    for (e, ed) in g.edges().iter().enumerate() {
        k[(g.class_index(ed.black), g.class_index(ed.white))] += signs[e] * ed.weight;
    }
    k
}

pub fn to_complex(k: &DMatrix<f64>) -> DMatrix<C64> {
    k.map(|x| C64::new(x, 0.0))
}

/// Complex Kasteleyn matrix `K(b, w) = T(right) - T(left)` read off the
/// dual edges of an embedding.
pub fn kasteleyn_from_positions(dual: &AugmentedDual, t: &[C64]) -> Result<DMatrix<C64>> {
    let g = dual.graph();
    let mut k = DMatrix::zeros(g.black_vertices().len(), g.white_vertices().len());
    let scale = t.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    for (e, ed) in g.edges().iter().enumerate() {
        let [a, b] = dual.edge_nodes(e);
        let d = t[b] - t[a];
        if d.norm() <= 1e-14 * scale {
            return Err(Error::DegenerateEmbedding(format!(
                "edge {e} has zero length"
            )));
        }
        k[(g.class_index(ed.black), g.class_index(ed.white))] = d;
    }
    Ok(k)
}

/// `log |det K|` by partial-pivoting LU; `-inf` when singular.
pub fn log_abs_det(k: &DMatrix<C64>) -> f64 {
    if k.nrows() != k.ncols() {
        return f64::NEG_INFINITY;
    }
    if k.nrows() == 0 {
        return 0.0;
    }
    let lu = k.clone().lu();
    let u = lu.u();
    let mut s = 0.0;
    for i in 0..u.nrows() {
        let d = u[(i, i)].norm();
        if d == 0.0 {
            return f64::NEG_INFINITY;
        }
        s += d.ln();
    }
    s
}

pub fn partition_function(k: &DMatrix<C64>) -> f64 {
    log_abs_det(k).exp()
}

pub fn invert(k: &DMatrix<C64>) -> Result<InverseKasteleyn> {
    if k.nrows() != k.ncols() {
        return Err(Error::NoPerfectMatching);
    }
    let scale = k.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ld = log_abs_det(k);
    if !ld.is_finite() || ld < k.nrows() as f64 * (1e-13 * scale.max(1e-300)).ln() {
        return Err(Error::NoPerfectMatching);
    }
    let inv = k
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::NoPerfectMatching)?;
    let prod = k * &inv;
    let mut residual: f64 = 0.0;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            let id = if i == j { 1.0 } else { 0.0 };
            residual = residual.max((prod[(i, j)] - id).norm());
        }
    }
    Ok(InverseKasteleyn {
        matrix: inv,
        residual,
    })
}

fn check_disjoint(g: &BipartiteDimerGraph, edges: &[usize]) -> Result<()> {
    let mut hit = HashSet::new();
    for &e in edges {
        let ed = g.edge(e);
        if !hit.insert(ed.black) || !hit.insert(ed.white) {
            return Err(Error::Input("edges are not vertex-disjoint".into()));
        }
    }
    Ok(())
}

/// `det[K^{-1}(w_j, b_k)] * prod K(b_k, w_k)`; the imaginary part is a
/// numerical residue.
pub fn joint_edge_probability(
    g: &BipartiteDimerGraph,
    k: &DMatrix<C64>,
    kinv: &InverseKasteleyn,
    edges: &[usize],
) -> Result<C64> {
    check_disjoint(g, edges)?;
    let n = edges.len();
    let m = DMatrix::from_fn(n, n, |j, l| {
        kinv.get(g, g.edge(edges[j]).white, g.edge(edges[l]).black)
    });
    let mut p = if n == 0 {
        C64::new(1.0, 0.0)
    } else {
        m.determinant()
    };
    for &e in edges {
        let ed = g.edge(e);
        p *= k[(g.class_index(ed.black), g.class_index(ed.white))];
    }
    Ok(p)
}

/// Path in the augmented dual: steps `(edge, s)` with `s = +1` when the step
/// runs from the left face to the right face of the edge.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPath {
    pub nodes: Vec<usize>,
    pub steps: Vec<(usize, i8)>,
}

impl DualPath {
    pub fn from_nodes(dual: &AugmentedDual, nodes: Vec<usize>) -> Result<Self> {
        let mut steps = Vec::with_capacity(nodes.len().saturating_sub(1));
        for w in nodes.windows(2) {
            let (u, v) = (w[0], w[1]);
            let st = dual
                .adjacency(u)
                .iter()
                .find(|(x, _, _)| *x == v)
                .ok_or_else(|| Error::Input(format!("nodes {u},{v} are not adjacent")))?;
            steps.push((st.1, st.2));
        }
        Ok(Self { nodes, steps })
    }
}

/// Dijkstra over inner dual nodes avoiding `banned`, edge lengths from `len`.
pub fn shortest_dual_path(
    dual: &AugmentedDual,
    s: usize,
    t: usize,
    banned: &HashSet<usize>,
    len: impl Fn(usize, usize) -> f64,
) -> Result<DualPath> {
    #[derive(PartialEq)]
    struct Item(f64, usize);
    impl Eq for Item {}
    impl PartialOrd for Item {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Item {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
        }
    }
    let n = dual.n_nodes();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    dist[s] = 0.0;
    let mut pq = BinaryHeap::from([Item(0.0, s)]);
    while let Some(Item(d, u)) = pq.pop() {
        if u == t {
            break;
        }
        if d > dist[u] {
            continue;
        }
        for &(v, _, _) in dual.adjacency(u) {
            if banned.contains(&v) || (dual.is_boundary(v) && v != t) {
                continue;
            }
            let nd = d + len(u, v);
            if nd < dist[v] {
                dist[v] = nd;
                prev[v] = u;
                pq.push(Item(nd, v));
            }
        }
    }
    if !dist[t].is_finite() {
        return Err(Error::Input(format!("no dual path from {s} to {t}")));
    }
    let mut nodes = vec![t];
    let mut v = t;
    while v != s {
        v = prev[v];
        nodes.push(v);
    }
    nodes.reverse();
    DualPath::from_nodes(dual, nodes)
}

/// Alternating sum of centred height moments at the path endpoints:
/// `E[prod_k (h(end_k) - h(start_k) - E[...])]` computed as the nested sum
/// over one edge per path of `prod(-s_k) det[1_{j != k} K^{-1}(w_j, b_k)]
/// prod K(b_k, w_k)`.
pub fn correlation_gradient(
    g: &BipartiteDimerGraph,
    k: &DMatrix<C64>,
    kinv: &InverseKasteleyn,
    paths: &[DualPath],
) -> Result<C64> {
    let n = paths.len();
    let mut nodes = HashSet::new();
    for p in paths {
        for &v in &p.nodes {
            if !nodes.insert(v) {
                return Err(Error::Input("dual paths intersect".into()));
            }
        }
    }
    if n == 0 {
        return Ok(C64::new(1.0, 0.0));
    }
    if paths.iter().any(|p| p.steps.is_empty()) {
        return Ok(C64::new(0.0, 0.0));
    }
    // per path, per step: (black idx, white idx, -s * K(b, w))
    let data: Vec<Vec<(usize, usize, C64)>> = paths
        .iter()
        .map(|p| {
            p.steps
                .iter()
                .map(|&(e, s)| {
                    let ed = g.edge(e);
                    let (bi, wi) = (g.class_index(ed.black), g.class_index(ed.white));
                    (bi, wi, k[(bi, wi)] * (-(s as f64)))
                })
                .collect()
        })
        .collect();
    let mut idx = vec![0usize; n];
    let mut total = C64::new(0.0, 0.0);
    let mut m = DMatrix::<C64>::zeros(n, n);
    loop {
        let mut factor = C64::new(1.0, 0.0);
        for j in 0..n {
            let (_, wj, f) = data[j][idx[j]];
            factor *= f;
            for l in 0..n {
                m[(j, l)] = if j == l {
                    C64::new(0.0, 0.0)
                } else {
                    kinv.matrix[(wj, data[l][idx[l]].0)]
                };
            }
        }
        total += factor * det_small(&m);
        // odometer
        let mut p = 0;
        loop {
            if p == n {
                return Ok(total);
            }
            idx[p] += 1;
            if idx[p] < data[p].len() {
                break;
            }
            idx[p] = 0;
            p += 1;
        }
    }
}

fn det_small(m: &DMatrix<C64>) -> C64 {
    match m.nrows() {
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        _ => m.determinant(),
    }
}

/// Gauge transform `K(b, w) -> g(b) K(b, w) g(w)`.
pub fn gauge_transform(g: &BipartiteDimerGraph, k: &DMatrix<C64>, gv: &[f64]) -> DMatrix<C64> {
    let mut out = k.clone();
    for (bi, &b) in g.black_vertices().iter().enumerate() {
        for (wi, &w) in g.white_vertices().iter().enumerate() {
            out[(bi, wi)] *= gv[b] * gv[w];
        }
    }
    out
}

/// Matrix dump rows `(row, col, re, im)` for the nonzero entries.
pub fn matrix_csv(m: &DMatrix<C64>) -> String {
    let mut s = String::from("row,col,re,im\n");
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if z != C64::new(0.0, 0.0) {
                s.push_str(&format!("{i},{j},{:.17e},{:.17e}\n", z.re, z.im));
            }
        }
    }
    s
}
