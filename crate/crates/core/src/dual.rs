//! Augmented dual: one node per inner face of G plus a cycle of boundary
//! nodes replacing the outer face, one boundary node per outer-face edge.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::{BipartiteDimerGraph, Color, DimerCover};

/// Side of a face polygon of the augmented dual.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Crosses the G-edge.
    Edge(usize),
    /// Boundary cycle edge `v_k -> v_{k+1}`.
    Boundary(usize),
}

/// Counterclockwise polygon of dual nodes around one vertex of G.
/// `sides[j]` joins `nodes[j]` to `nodes[j+1]`.
#[derive(Clone, Debug)]
pub struct FacePolygon {
    pub nodes: Vec<usize>,
    pub sides: Vec<Side>,
}

#[derive(Clone, Debug)]
pub struct AugmentedDual {
    graph: BipartiteDimerGraph,
    n_inner: usize,
    inner_face: Vec<usize>,
    face_node: Vec<Option<usize>>,
    boundary_edges: Vec<usize>,
    boundary_faces: Vec<usize>,
    edge_nodes: Vec<[usize; 2]>,
    polygons: Vec<FacePolygon>,
    adjacency: Vec<Vec<(usize, usize, i8)>>,
    v_in: Vec<usize>,
}

impl AugmentedDual {
    pub fn build(graph: BipartiteDimerGraph) -> Result<Arc<Self>> {
        let g = &graph;
        let outer = g.outer_face();
        let mut face_node = vec![None; g.n_faces()];
        let mut inner_face = Vec::new();
        for f in 0..g.n_faces() {
            if f != outer {
                face_node[f] = Some(inner_face.len());
                inner_face.push(f);
            }
        }
        let n_inner = inner_face.len();
        let ccw = g.outer_boundary_ccw();
        let n2 = ccw.len();
        if n2 < 4 || n2 % 2 != 0 {
            return Err(Error::Structure(format!("outer face degree {n2} invalid")));
        }
        for e in 0..g.n_edges() {
            if g.left_face(e) == outer && g.right_face(e) == outer {
                return Err(Error::Structure(format!("edge {e} is a bridge")));
            }
        }
        // ccw dart k arrives at the vertex shared with dart k+1
        let starts: Vec<usize> = (0..n2)
            .filter(|&k| g.color(g.head(ccw[k])) == Color::White)
            .collect();
        let st = *starts
            .iter()
            .min_by_key(|&&k| ccw[k].edge)
            .ok_or_else(|| Error::Structure("no white boundary vertex".into()))?;
        let boundary_edges: Vec<usize> = (0..n2).map(|i| ccw[(st + i) % n2].edge).collect();
        let boundary_faces: Vec<usize> = (0..n2).map(|i| g.head(ccw[(st + i) % n2])).collect();
        let mut seen = vec![false; g.n_vertices()];
        for &v in &boundary_faces {
            if seen[v] {
                return Err(Error::Structure(format!(
                    "vertex {v} meets the outer face twice (cut vertex)"
                )));
            }
            seen[v] = true;
        }
        let mut bpos = vec![usize::MAX; g.n_edges()];
        for (k, &e) in boundary_edges.iter().enumerate() {
            bpos[e] = k;
        }
        let node = |f: usize, e: usize| -> usize {
            match face_node[f] {
                Some(i) => i,
                None => n_inner + bpos[e],
            }
        };
        let edge_nodes: Vec<[usize; 2]> = (0..g.n_edges())
            .map(|e| [node(g.left_face(e), e), node(g.right_face(e), e)])
            .collect();
        let nn = n_inner + n2;
        let mut adjacency = vec![Vec::new(); nn];
        for (e, [a, b]) in edge_nodes.iter().enumerate() {
            adjacency[*a].push((*b, e, 1i8));
            adjacency[*b].push((*a, e, -1i8));
        }
        let mut v_in = vec![0; n2];
        for k in 0..n2 {
            let e = boundary_edges[k];
            let [a, b] = edge_nodes[e];
            v_in[k] = if a == n_inner + k { b } else { a };
            if v_in[k] >= n_inner {
                return Err(Error::Structure(format!(
                    "boundary spoke {k} joins two boundary nodes"
                )));
            }
        }
        let mut polygons = Vec::with_capacity(g.n_vertices());
        for v in 0..g.n_vertices() {
            let r = g.rotation(v);
            let d = r.len();
            let mut nodes = Vec::new();
            let mut sides = Vec::new();
            for i in 0..d {
                let (e, en) = (r[i], r[(i + 1) % d]);
                let f = g.face_of_dart(v, e);
                if f == outer {
                    nodes.push(n_inner + bpos[e]);
                    sides.push(Side::Boundary(bpos[e]));
                    nodes.push(n_inner + bpos[en]);
                } else {
                    nodes.push(face_node[f].unwrap());
                }
                sides.push(Side::Edge(en));
            }
            polygons.push(FacePolygon { nodes, sides });
        }
        Ok(Arc::new(Self {
            graph,
            n_inner,
            inner_face,
            face_node,
            boundary_edges,
            boundary_faces,
            edge_nodes,
            polygons,
            adjacency,
            v_in,
        }))
    }

    pub fn graph(&self) -> &BipartiteDimerGraph {
        &self.graph
    }
    pub fn n_nodes(&self) -> usize {
        self.n_inner + self.boundary_edges.len()
    }
    pub fn n_inner(&self) -> usize {
        self.n_inner
    }
    /// Number of boundary nodes (outer-face degree of G).
    pub fn n_boundary(&self) -> usize {
        self.boundary_edges.len()
    }
    pub fn is_boundary(&self, node: usize) -> bool {
        node >= self.n_inner
    }
    /// Node id of boundary vertex `v_k`.
    pub fn boundary_node(&self, k: usize) -> usize {
        self.n_inner + k
    }
    /// G-face of an inner node.
    pub fn inner_face(&self, node: usize) -> usize {
        self.inner_face[node]
    }
    pub fn face_node(&self, f: usize) -> Option<usize> {
        self.face_node[f]
    }
    /// G-edge dual to the spoke at `v_k`.
    pub fn boundary_edge(&self, k: usize) -> usize {
        self.boundary_edges[k]
    }
    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }
    /// G-vertex whose polygon contains the boundary cycle edge `v_k v_{k+1}`.
    pub fn boundary_face(&self, k: usize) -> usize {
        self.boundary_faces[k]
    }
    pub fn boundary_faces(&self) -> &[usize] {
        &self.boundary_faces
    }
    /// The position `k` of `v` in the boundary face list, if any.
    pub fn boundary_index_of_vertex(&self, v: usize) -> Option<usize> {
        self.boundary_faces.iter().position(|&x| x == v)
    }
    /// Dual edge of G-edge `e`, oriented from left face to right face
    /// (black vertex on the right).
    pub fn edge_nodes(&self, e: usize) -> [usize; 2] {
        self.edge_nodes[e]
    }
    pub fn polygon(&self, v: usize) -> &FacePolygon {
        &self.polygons[v]
    }
    pub fn polygons(&self) -> &[FacePolygon] {
        &self.polygons
    }
    /// Neighbours `(node, edge, s)` with `s = +1` when the step runs along the
    /// edge orientation. Boundary cycle edges are not included.
    pub fn adjacency(&self, node: usize) -> &[(usize, usize, i8)] {
        &self.adjacency[node]
    }
    /// Inner endpoint of the spoke at `v_k`.
    pub fn v_in(&self, k: usize) -> usize {
        self.v_in[k]
    }
    /// Color of the outer face lying beyond boundary edge `v_k v_{k+1}`.
    pub fn outer_face_color(&self, k: usize) -> Color {
        self.graph.color(self.boundary_faces[k]).flip()
    }

    /// Visit order and parent links of a breadth-first tree over the dual
    /// edges from `root`.
    pub fn bfs_tree(&self, root: usize) -> Vec<(usize, Option<(usize, usize, i8)>)> {
        let mut seen = vec![false; self.n_nodes()];
        let mut out = vec![(root, None)];
        seen[root] = true;
        let mut q = VecDeque::from([root]);
        while let Some(u) = q.pop_front() {
            for &(v, e, s) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    out.push((v, Some((u, e, s))));
                    q.push_back(v);
                }
            }
        }
        out
    }

    /// Orientation of polygon sides around `v`: crossing a G-edge
    /// counterclockwise around a white vertex runs along the edge (+1),
    /// around a black vertex against it (-1).
    pub fn polygon_sign(&self, v: usize) -> f64 {
        match self.graph.color(v) {
            Color::White => 1.0,
            Color::Black => -1.0,
        }
    }
}

/// Integer height function relative to a reference cover.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeightFunction {
    pub values: Vec<i64>,
    pub root: usize,
}

/// Height of `d` relative to `d0`: across each dual edge (left, right),
/// `h(left) - h(right) = 1[e in d] - 1[e in d0]`.
pub fn height_function(
    d: &DimerCover,
    d0: &DimerCover,
    dual: &AugmentedDual,
    root: usize,
) -> Result<HeightFunction> {
    let g = dual.graph();
    if !d.is_perfect_matching(g) || !d0.is_perfect_matching(g) {
        return Err(Error::Input(
            "height function needs two dimer covers".into(),
        ));
    }
    let m = d.mask(g.n_edges());
    let m0 = d0.mask(g.n_edges());
    let delta = |e: usize| m[e] as i64 - m0[e] as i64;
    let mut h = vec![i64::MIN; dual.n_nodes()];
    h[root] = 0;
    for (v, p) in dual.bfs_tree(root) {
        if let Some((u, e, s)) = p {
            h[v] = h[u] - s as i64 * delta(e);
        }
    }
    // every dual edge must agree
    for e in 0..g.n_edges() {
        let [a, b] = dual.edge_nodes(e);
        if h[a] - h[b] != delta(e) {
            return Err(Error::Internal(format!(
                "height increment mismatch at edge {e}"
            )));
        }
    }
    Ok(HeightFunction { values: h, root })
}
