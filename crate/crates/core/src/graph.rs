//! Weighted planar bipartite graphs given by a rotation system, plus the
//! brute-force dimer oracles used by the tests.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    White,
}

impl Color {
    pub fn flip(self) -> Color {
        match self {
            Color::Black => Color::White,
            Color::White => Color::Black,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub black: usize,
    pub white: usize,
    pub weight: f64,
}

impl Edge {
    pub fn other(&self, v: usize) -> usize {
        if v == self.black {
            self.white
        } else {
            self.black
        }
    }

    pub fn touches(&self, v: usize) -> bool {
        v == self.black || v == self.white
    }
}

/// Half-edge: `edge` traversed starting at `tail`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dart {
    pub tail: usize,
    pub edge: usize,
}

/// Planar bipartite graph. Faces are dart cycles with the face on the left,
/// so inner faces run counterclockwise and the outer face clockwise.
#[derive(Clone, Debug)]
pub struct BipartiteDimerGraph {
    colors: Vec<Color>,
    edges: Vec<Edge>,
    faces: Vec<Vec<Dart>>,
    outer: usize,
    rot: Vec<Vec<usize>>,
    left: Vec<usize>,
    right: Vec<usize>,
    black: Vec<usize>,
    white: Vec<usize>,
    class_index: Vec<usize>,
}

fn head(edges: &[Edge], d: Dart) -> usize {
    edges[d.edge].other(d.tail)
}

/// Face cycles of a rotation system (`rot[v]` = incident edges counterclockwise).
pub fn trace_faces(edges: &[Edge], rot: &[Vec<usize>]) -> Vec<Vec<Dart>> {
    let mut pos: HashMap<(usize, usize), usize> = HashMap::new();
    for (v, r) in rot.iter().enumerate() {
        for (i, &e) in r.iter().enumerate() {
            pos.insert((v, e), i);
        }
    }
    let mut used: HashMap<(usize, usize), bool> = HashMap::new();
    let mut faces = Vec::new();
    for (e, edge) in edges.iter().enumerate() {
        for tail in [edge.black, edge.white] {
            if used.contains_key(&(tail, e)) {
                continue;
            }
            let mut face = Vec::new();
            let mut d = Dart { tail, edge: e };
            while !used.contains_key(&(d.tail, d.edge)) {
                used.insert((d.tail, d.edge), true);
                face.push(d);
                let u = head(edges, d);
                let r = &rot[u];
                let i = pos[&(u, d.edge)];
                d = Dart {
                    tail: u,
                    edge: r[(i + r.len() - 1) % r.len()],
                };
            }
            faces.push(face);
        }
    }
    faces
}

impl BipartiteDimerGraph {
    /// Build from a rotation system; `pick_outer` selects the outer face among
    /// the traced faces.
    pub fn from_rotation(
        colors: Vec<Color>,
        edges: Vec<Edge>,
        rot: Vec<Vec<usize>>,
        pick_outer: impl FnOnce(&[Vec<Dart>]) -> usize,
    ) -> Result<Self> {
        check_edges(&colors, &edges)?;
        if rot.len() != colors.len() {
            return Err(Error::Structure("rotation system size mismatch".into()));
        }
        for (v, r) in rot.iter().enumerate() {
            for &e in r {
                if e >= edges.len() || !edges[e].touches(v) {
                    return Err(Error::Structure(format!(
                        "rotation at vertex {v} lists non-incident edge {e}"
                    )));
                }
            }
        }
        let faces = trace_faces(&edges, &rot);
        let outer = pick_outer(&faces);
        Self::finish(colors, edges, faces, outer, rot)
    }

    /// Build from face cycles given as edge lists (face on the left).
    pub fn from_face_edges(
        colors: Vec<Color>,
        edges: Vec<Edge>,
        face_edges: Vec<Vec<usize>>,
        outer: usize,
    ) -> Result<Self> {
        check_edges(&colors, &edges)?;
        let mut faces = Vec::with_capacity(face_edges.len());
        for (fi, cyc) in face_edges.iter().enumerate() {
            let d = cyc.len();
            if d < 3 {
                return Err(Error::Structure(format!(
                    "face {fi} has degree {d}; two-gons are ambiguous in edge-list form"
                )));
            }
            let mut darts = Vec::with_capacity(d);
            for i in 0..d {
                let (ep, ec) = (cyc[(i + d - 1) % d], cyc[i]);
                if ep >= edges.len() || ec >= edges.len() {
                    return Err(Error::Structure(format!("face {fi} lists unknown edge")));
                }
                let a = &edges[ep];
                let b = &edges[ec];
                let shared: Vec<usize> = [b.black, b.white]
                    .into_iter()
                    .filter(|&v| a.touches(v))
                    .collect();
                if shared.len() != 1 {
                    return Err(Error::Structure(format!(
                        "face {fi}: consecutive edges {ep},{ec} do not share exactly one vertex"
                    )));
                }
                darts.push(Dart {
                    tail: shared[0],
                    edge: ec,
                });
            }
            faces.push(darts);
        }
        if outer >= faces.len() {
            return Err(Error::Structure("outer face id out of range".into()));
        }
        // Rotation: consecutive darts (u->v, e1), (v->x, e2) mean e1 follows e2
        // counterclockwise at v.
        let n = colors.len();
        let mut next: HashMap<(usize, usize), usize> = HashMap::new();
        for face in &faces {
            let d = face.len();
            for i in 0..d {
                let (a, b) = (face[i], face[(i + 1) % d]);
                if head(&edges, a) != b.tail {
                    return Err(Error::Structure("face cycle is not a closed walk".into()));
                }
                if next.insert((b.tail, b.edge), a.edge).is_some() {
                    return Err(Error::Structure(format!(
                        "dart ({}, {}) used twice",
                        b.tail, b.edge
                    )));
                }
            }
        }
        let mut incident = vec![Vec::new(); n];
        for (e, edge) in edges.iter().enumerate() {
            incident[edge.black].push(e);
            incident[edge.white].push(e);
        }
        let mut rot = vec![Vec::new(); n];
        for v in 0..n {
            let Some(&start) = incident[v].iter().min() else {
                continue;
            };
            let mut e = start;
            loop {
                rot[v].push(e);
                e = *next.get(&(v, e)).ok_or_else(|| {
                    Error::Structure(format!("vertex {v}: dart on edge {e} in no face"))
                })?;
                if e == start {
                    break;
                }
                if rot[v].len() > incident[v].len() {
                    return Err(Error::Structure(format!("vertex {v}: rotation loops")));
                }
            }
            if rot[v].len() != incident[v].len() {
                return Err(Error::Structure(format!(
                    "vertex {v}: faces do not close into a single rotation"
                )));
            }
        }
        Self::finish(colors, edges, faces, outer, rot)
    }

    fn finish(
        colors: Vec<Color>,
        edges: Vec<Edge>,
        faces: Vec<Vec<Dart>>,
        outer: usize,
        rot: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let (nv, ne, nf) = (colors.len(), edges.len(), faces.len());
        if nv as i64 - ne as i64 + nf as i64 != 2 {
            return Err(Error::Structure(format!(
                "Euler formula violated: V-E+F = {}-{}+{} != 2",
                nv, ne, nf
            )));
        }
        let mut left = vec![usize::MAX; ne];
        let mut right = vec![usize::MAX; ne];
        for (fi, face) in faces.iter().enumerate() {
            for d in face {
                let slot = if d.tail == edges[d.edge].black {
                    &mut left[d.edge]
                } else {
                    &mut right[d.edge]
                };
                if *slot != usize::MAX {
                    return Err(Error::Structure("dart in two faces".into()));
                }
                *slot = fi;
            }
        }
        if left.iter().chain(right.iter()).any(|&f| f == usize::MAX) {
            return Err(Error::Structure("dart in no face".into()));
        }
        // connectivity
        let mut seen = vec![false; nv];
        let mut q = VecDeque::from([0usize]);
        seen[0] = nv > 0;
        while let Some(v) = q.pop_front() {
            for &e in &rot[v] {
                let u = edges[e].other(v);
                if !seen[u] {
                    seen[u] = true;
                    q.push_back(u);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Structure("graph is not connected".into()));
        }
        let mut black = Vec::new();
        let mut white = Vec::new();
        let mut class_index = vec![0; nv];
        for (v, c) in colors.iter().enumerate() {
            match c {
                Color::Black => {
                    class_index[v] = black.len();
                    black.push(v);
                }
                Color::White => {
                    class_index[v] = white.len();
                    white.push(v);
                }
            }
        }
        Ok(Self {
            colors,
            edges,
            faces,
            outer,
            rot,
            left,
            right,
            black,
            white,
            class_index,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.colors.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn colors(&self) -> &[Color] {
        &self.colors
    }
    pub fn color(&self, v: usize) -> Color {
        self.colors[v]
    }
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }
    pub fn faces(&self) -> &[Vec<Dart>] {
        &self.faces
    }
    pub fn outer_face(&self) -> usize {
        self.outer
    }
    /// Incident edges of `v` in counterclockwise order.
    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rot[v]
    }
    pub fn degree(&self, v: usize) -> usize {
        self.rot[v].len()
    }
    /// Face on the left of the edge traversed from black to white.
    pub fn left_face(&self, e: usize) -> usize {
        self.left[e]
    }
    pub fn right_face(&self, e: usize) -> usize {
        self.right[e]
    }
    pub fn black_vertices(&self) -> &[usize] {
        &self.black
    }
    pub fn white_vertices(&self) -> &[usize] {
        &self.white
    }
    /// Row/column index of a vertex inside its color class.
    pub fn class_index(&self, v: usize) -> usize {
        self.class_index[v]
    }
    pub fn outer_degree(&self) -> usize {
        self.faces[self.outer].len()
    }
    pub fn head(&self, d: Dart) -> usize {
        head(&self.edges, d)
    }

    /// Face containing the dart leaving `v` along `e`; it occupies the
    /// counterclockwise sector from `e` to the next edge at `v`.
    pub fn face_of_dart(&self, v: usize, e: usize) -> usize {
        if v == self.edges[e].black {
            self.left[e]
        } else {
            self.right[e]
        }
    }

    /// Same graph with new edge weights.
    pub fn with_weights(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.edges.len() || weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Input(
                "weights must be positive, one per edge".into(),
            ));
        }
        let mut g = self.clone();
        for (e, w) in g.edges.iter_mut().zip(weights) {
            e.weight = *w;
        }
        Ok(g)
    }

    pub fn cover_weight(&self, cover: &DimerCover) -> f64 {
        cover.edges.iter().map(|&e| self.edges[e].weight).product()
    }

    /// Exhaustive list of dimer covers by backtracking over black vertices.
    pub fn enumerate_dimer_covers(&self, cap: usize) -> Result<Vec<DimerCover>> {
        if self.edges.len() > cap {
            return Err(Error::CapExceeded {
                edges: self.edges.len(),
                cap,
            });
        }
        if self.black.len() != self.white.len() {
            return Ok(Vec::new());
        }
        let mut out = Vec::new();
        let mut used = vec![false; self.n_vertices()];
        let mut chosen = Vec::new();
        self.enum_rec(0, &mut used, &mut chosen, &mut out);
        Ok(out)
    }

    fn enum_rec(
        &self,
        i: usize,
        used: &mut [bool],
        chosen: &mut Vec<usize>,
        out: &mut Vec<DimerCover>,
    ) {
        if i == self.black.len() {
            let mut edges = chosen.clone();
            edges.sort_unstable();
            out.push(DimerCover { edges });
            return;
        }
        let b = self.black[i];
        for &e in &self.rot[b] {
            let w = self.edges[e].white;
            if !used[w] {
                used[w] = true;
                chosen.push(e);
                self.enum_rec(i + 1, used, chosen, out);
                chosen.pop();
                used[w] = false;
            }
        }
    }

    /// Counterclockwise boundary of the outer face: darts in domain order.
    pub fn outer_boundary_ccw(&self) -> Vec<Dart> {
        self.faces[self.outer]
            .iter()
            .rev()
            .map(|d| Dart {
                tail: self.head(*d),
                edge: d.edge,
            })
            .collect()
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self
                .colors
                .iter()
                .enumerate()
                .map(|(id, &color)| VertexJson { id, color })
                .collect(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(id, e)| EdgeJson {
                    id,
                    black: e.black,
                    white: e.white,
                    weight: e.weight,
                })
                .collect(),
            faces: self
                .faces
                .iter()
                .enumerate()
                .map(|(id, f)| FaceJson {
                    id,
                    edges: f.iter().map(|d| d.edge).collect(),
                })
                .collect(),
            outer_face: self.outer,
        }
    }

    pub fn from_json(j: &GraphJson) -> Result<Self> {
        let n = j.vertices.len();
        let mut colors = vec![Color::Black; n];
        let mut seen = vec![false; n];
        for v in &j.vertices {
            if v.id >= n || seen[v.id] {
                return Err(Error::Input("vertex ids must be 0..n-1, unique".into()));
            }
            seen[v.id] = true;
            colors[v.id] = v.color;
        }
        let m = j.edges.len();
        let mut edges = vec![
            Edge {
                black: 0,
                white: 0,
                weight: 0.0
            };
            m
        ];
        let mut seen = vec![false; m];
        for e in &j.edges {
            if e.id >= m || seen[e.id] {
                return Err(Error::Input("edge ids must be 0..m-1, unique".into()));
            }
            seen[e.id] = true;
            edges[e.id] = Edge {
                black: e.black,
                white: e.white,
                weight: e.weight,
            };
        }
        let nf = j.faces.len();
        let mut faces = vec![Vec::new(); nf];
        let mut seen = vec![false; nf];
        for f in &j.faces {
            if f.id >= nf || seen[f.id] {
                return Err(Error::Input("face ids must be 0..F-1, unique".into()));
            }
            seen[f.id] = true;
            faces[f.id] = f.edges.clone();
        }
        Self::from_face_edges(colors, edges, faces, j.outer_face)
    }
}

fn check_edges(colors: &[Color], edges: &[Edge]) -> Result<()> {
    for (i, e) in edges.iter().enumerate() {
        if e.black >= colors.len() || e.white >= colors.len() {
            return Err(Error::Structure(format!("edge {i} has unknown endpoint")));
        }
        if colors[e.black] != Color::Black || colors[e.white] != Color::White {
            return Err(Error::Structure(format!(
                "edge {i} does not join a black and a white vertex"
            )));
        }
        if !(e.weight > 0.0) || !e.weight.is_finite() {
            return Err(Error::Structure(format!(
                "edge {i} has non-positive weight"
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DimerCover {
    /// Sorted edge ids.
    pub edges: Vec<usize>,
}

impl DimerCover {
    pub fn mask(&self, n_edges: usize) -> Vec<bool> {
        let mut m = vec![false; n_edges];
        for &e in &self.edges {
            m[e] = true;
        }
        m
    }

    pub fn is_perfect_matching(&self, g: &BipartiteDimerGraph) -> bool {
        let mut hit = vec![0u32; g.n_vertices()];
        for &e in &self.edges {
            hit[g.edge(e).black] += 1;
            hit[g.edge(e).white] += 1;
        }
        hit.iter().all(|&h| h == 1)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: usize,
    pub color: Color,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: usize,
    pub black: usize,
    pub white: usize,
    pub weight: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaceJson {
    pub id: usize,
    pub edges: Vec<usize>,
}

/// Graph interchange document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<EdgeJson>,
    pub faces: Vec<FaceJson>,
    pub outer_face: usize,
}
