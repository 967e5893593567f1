//! t-holomorphic functions built from the inverse Kasteleyn matrix of an
//! embedding: true complex values on splittings, outer boundary values,
//! primitives with monodromy, form identities, the coupled functions
//! `F^{++}, F^{+-}` and the boundary same-sign check.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dual::AugmentedDual;
use crate::embedding::{
    compute_origami, compute_origami_sqrt, normalize_perfect_eta, BoundaryData, OrigamiMap,
    OrigamiSqrt, SplitSide, Splitting, TEmbedding,
};
use crate::error::{Error, Result};
use crate::graph::Color;
use crate::kasteleyn::{invert, InverseKasteleyn};
use crate::C64;

/// `Pr(z, eta R) = eta Re(conj(eta) z)`.
pub fn project(z: C64, eta: C64) -> C64 {
    eta * (eta.conj() * z).re
}

/// Embedding with everything needed to evaluate t-holomorphic functions.
pub struct HoloContext {
    pub t: TEmbedding,
    pub eta: OrigamiSqrt,
    pub o: OrigamiMap,
    /// Complex Kasteleyn matrix `K(b, w) = dT`.
    pub k: DMatrix<C64>,
    pub kinv: InverseKasteleyn,
    pub split_black: Splitting,
    pub split_white: Splitting,
    /// `(first triangle, count)` per G-vertex in each splitting.
    tri_black: Vec<(usize, usize)>,
    tri_white: Vec<(usize, usize)>,
}

fn triangle_ranges(split: &Splitting, nv: usize) -> Vec<(usize, usize)> {
    let mut r = vec![(usize::MAX, 0); nv];
    for (i, tr) in split.triangles.iter().enumerate() {
        let e = &mut r[tr.face];
        if e.0 == usize::MAX {
            e.0 = i;
        }
        e.1 += 1;
    }
    r
}

impl HoloContext {
    pub fn new(t: TEmbedding, eta: OrigamiSqrt, o: OrigamiMap) -> Result<Self> {
        let k = t.kasteleyn()?;
        let kinv = invert(&k)?;
        let split_black = t.split(Color::Black, &eta);
        let split_white = t.split(Color::White, &eta);
        let nv = t.dual.graph().n_vertices();
        Ok(Self {
            tri_black: triangle_ranges(&split_black, nv),
            tri_white: triangle_ranges(&split_white, nv),
            t,
            eta,
            o,
            k,
            kinv,
            split_black,
            split_white,
        })
    }

    /// Context for a perfect embedding with origami normalized so that
    /// `O(v_k) = tan(xi_k)`.
    pub fn from_perfect(t: TEmbedding, bd: &BoundaryData, tol: f64) -> Result<Self> {
        let eta = compute_origami_sqrt(&t, tol)?;
        let (eta, _) = normalize_perfect_eta(&t.dual, &eta, bd);
        let base = t.dual.boundary_node(0);
        let o = compute_origami(&t, &eta, base, C64::new(bd.xi[0].tan(), 0.0), tol)?;
        Self::new(t, eta, o)
    }

    pub fn dual(&self) -> &AugmentedDual {
        &self.t.dual
    }

    pub fn splitting(&self, c: Color) -> &Splitting {
        match c {
            Color::Black => &self.split_black,
            Color::White => &self.split_white,
        }
    }

    /// Triangles of G-vertex `v` in the splitting of its own color.
    pub fn triangles_of(&self, v: usize) -> std::ops::Range<usize> {
        let (s, n) = match self.t.dual.graph().color(v) {
            Color::Black => self.tri_black[v],
            Color::White => self.tri_white[v],
        };
        s..s + n
    }

    pub fn kinv(&self, w: usize, b: usize) -> C64 {
        self.kinv.get(self.t.dual.graph(), w, b)
    }

    pub fn kmat(&self, b: usize, w: usize) -> C64 {
        let g = self.t.dual.graph();
        self.k[(g.class_index(b), g.class_index(w))]
    }

    /// `F_b` for black `b` (t-black-holomorphic) or `F_w` for white `w`.
    pub fn from_inverse_kasteleyn(&self, p: usize) -> Result<THolo> {
        let g = self.t.dual.graph();
        let kind = g.color(p);
        let other = kind.flip();
        let mut fake = vec![C64::new(0.0, 0.0); g.n_vertices()];
        for v in 0..g.n_vertices() {
            if g.color(v) == other {
                let kv = match kind {
                    Color::Black => self.kinv(v, p),
                    Color::White => self.kinv(p, v),
                };
                fake[v] = self.eta.eta[p].conj() * kv;
            }
        }
        THolo::from_fake(self, kind, Some(p), fake)
    }
}

/// One t-holomorphic function. `kind = Black` means t-black-holomorphic:
/// fake values on white faces, true values on split black faces.
#[derive(Clone, Debug)]
pub struct THolo {
    pub kind: Color,
    pub puncture: Option<usize>,
    /// Per G-vertex of the opposite color; zero elsewhere.
    pub fake: Vec<C64>,
    /// Per triangle of the splitting of color `kind`.
    pub true_values: Vec<Option<C64>>,
    /// Projected values on the inserted 2-gons.
    pub diagonals: Vec<C64>,
    /// Unused-projection residual per G-vertex of color `kind`.
    pub witness: Vec<f64>,
    /// Per boundary index whose outer face has color `kind`: the two values
    /// tied to the next and previous outer faces.
    pub outer: Vec<Option<(C64, C64)>>,
}

struct Line {
    eta: C64,
    r: f64,
}

fn solve_lines(lines: &[Line]) -> Option<(C64, f64)> {
    let det = |a: &Line, b: &Line| (a.eta.conj() * b.eta).im;
    let mut best = (0usize, 0usize, 0.0f64);
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let d = det(&lines[i], &lines[j]).abs();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    if best.2 < 1e-13 {
        return None;
    }
    let solve2 = |a: &Line, b: &Line| {
        // Re(conj(eta) z) = r  <=>  eta.re x + eta.im y = r
        let d = a.eta.re * b.eta.im - a.eta.im * b.eta.re;
        let x = (a.r * b.eta.im - b.r * a.eta.im) / d;
        let y = (a.eta.re * b.r - b.eta.re * a.r) / d;
        C64::new(x, y)
    };
    let z = if best.2 >= 1e-6 || lines.len() == 2 {
        solve2(&lines[best.0], &lines[best.1])
    } else {
        // normal equations over all lines
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for l in lines {
            a11 += l.eta.re * l.eta.re;
            a12 += l.eta.re * l.eta.im;
            a22 += l.eta.im * l.eta.im;
            b1 += l.eta.re * l.r;
            b2 += l.eta.im * l.r;
        }
        let d = a11 * a22 - a12 * a12;
        C64::new((a22 * b1 - a12 * b2) / d, (a11 * b2 - a12 * b1) / d)
    };
    let res = lines
        .iter()
        .map(|l| ((l.eta.conj() * z).re - l.r).abs())
        .fold(0.0, f64::max);
    Some((z, res))
}

impl THolo {
    /// Fill true values triangle by triangle: two known projection lines
    /// determine the value, the remaining ones are the witness.
    pub fn from_fake(
        ctx: &HoloContext,
        kind: Color,
        puncture: Option<usize>,
        fake: Vec<C64>,
    ) -> Result<Self> {
        let dual = ctx.dual();
        let g = dual.graph();
        let split = ctx.splitting(kind);
        let mut true_values = vec![None; split.triangles.len()];
        let mut diagonals = vec![C64::new(0.0, 0.0); split.diagonals.len()];
        let mut known_diag = vec![false; split.diagonals.len()];
        let mut witness = vec![0.0; g.n_vertices()];
        let side_line = |s: SplitSide, diag: &[C64], known: &[bool]| -> Option<Line> {
            match s {
                SplitSide::Edge(e) => {
                    let ed = g.edge(e);
                    let v = if kind == Color::Black {
                        ed.white
                    } else {
                        ed.black
                    };
                    let eta = ctx.eta.eta[v];
                    Some(Line {
                        eta,
                        r: (eta.conj() * fake[v]).re,
                    })
                }
                // the outer face across a boundary side carries value 0
                SplitSide::Boundary(k) => Some(Line {
                    eta: ctx.eta.eta_out[k],
                    r: 0.0,
                }),
                SplitSide::Diagonal(d) => known[d].then(|| Line {
                    eta: split.diagonals[d].eta,
                    r: (split.diagonals[d].eta.conj() * diag[d]).re,
                }),
            }
        };
        for v in 0..g.n_vertices() {
            if g.color(v) != kind {
                continue;
            }
            if Some(v) == puncture {
                witness[v] = f64::NAN;
                continue;
            }
            for ti in ctx.triangles_of(v) {
                let tr = &split.triangles[ti];
                let lines: Vec<Line> = tr
                    .sides
                    .iter()
                    .filter_map(|&s| side_line(s, &diagonals, &known_diag))
                    .collect();
                let (z, res) = solve_lines(&lines).ok_or_else(|| {
                    Error::DegenerateFace(format!("face {v}: projection lines parallel"))
                })?;
                witness[v] = f64::max(witness[v], res);
                true_values[ti] = Some(z);
                for &s in &tr.sides {
                    if let SplitSide::Diagonal(d) = s {
                        if !known_diag[d] {
                            known_diag[d] = true;
                            diagonals[d] = project(z, split.diagonals[d].eta);
                        }
                    }
                }
            }
        }
        let mut h = Self {
            kind,
            puncture,
            fake,
            true_values,
            diagonals,
            witness,
            outer: vec![None; dual.n_boundary()],
        };
        h.outer = h.boundary_true_values(ctx)?;
        Ok(h)
    }

    /// Values on the outer faces of color `kind`: projection onto the inner
    /// boundary face line equals its fake value, projection onto the next
    /// (resp. previous) outer face line vanishes.
    pub fn boundary_true_values(&self, ctx: &HoloContext) -> Result<Vec<Option<(C64, C64)>>> {
        let dual = ctx.dual();
        let n = dual.n_boundary();
        let mut out = vec![None; n];
        for (k, slot) in out.iter_mut().enumerate() {
            if dual.outer_face_color(k) != self.kind {
                continue;
            }
            let v = dual.boundary_face(k);
            let eta = ctx.eta.eta[v];
            let inner = Line {
                eta,
                r: (eta.conj() * self.fake[v]).re,
            };
            let mut vals = [C64::new(0.0, 0.0); 2];
            for (slot_i, j) in [(k + 1) % n, (k + n - 1) % n].into_iter().enumerate() {
                let lines = [
                    Line {
                        eta: inner.eta,
                        r: inner.r,
                    },
                    Line {
                        eta: ctx.eta.eta_out[j],
                        r: 0.0,
                    },
                ];
                let (z, _) = solve_lines(&lines).ok_or_else(|| {
                    Error::DegenerateFace(format!("outer face {k}: boundary lines parallel"))
                })?;
                vals[slot_i] = z;
            }
            *slot = Some((vals[0], vals[1]));
        }
        Ok(out)
    }

    /// `max |F^fake(v) / eta_v|` imaginary part, i.e. phase residue.
    pub fn phase_residual(&self, ctx: &HoloContext) -> f64 {
        let g = ctx.dual().graph();
        (0..g.n_vertices())
            .filter(|&v| g.color(v) != self.kind)
            .map(|v| (ctx.eta.eta[v].conj() * self.fake[v]).im.abs())
            .fold(0.0, f64::max)
    }

    /// `sum_{u ~ v} F(u) K` at every face `v` of color `kind`, the
    /// t-holomorphicity residue (puncture included).
    pub fn fake_residues(&self, ctx: &HoloContext) -> Vec<C64> {
        let g = ctx.dual().graph();
        (0..g.n_vertices())
            .map(|v| {
                if g.color(v) != self.kind {
                    return C64::new(0.0, 0.0);
                }
                g.rotation(v)
                    .iter()
                    .map(|&e| {
                        let ed = g.edge(e);
                        self.fake[ed.other(v)] * ctx.kmat(ed.black, ed.white)
                    })
                    .sum()
            })
            .collect()
    }

    /// Max witness over faces other than the puncture.
    pub fn max_witness(&self) -> f64 {
        self.witness
            .iter()
            .filter(|x| !x.is_nan())
            .fold(0.0, |a, &b| a.max(b))
    }

    /// Value of the form `2 F dT` on the dual G-edge `e`.
    fn edge_factor(&self, ctx: &HoloContext, e: usize) -> C64 {
        let ed = ctx.dual().graph().edge(e);
        let u = if self.kind == Color::Black {
            ed.white
        } else {
            ed.black
        };
        2.0 * self.fake[u]
    }

    /// Factor on boundary cycle edge `k`: the fake value of the adjacent face
    /// of the opposite color, zero on outer faces.
    fn boundary_factor(&self, ctx: &HoloContext, k: usize) -> C64 {
        let dual = ctx.dual();
        let v = dual.boundary_face(k);
        if dual.graph().color(v) != self.kind {
            2.0 * self.fake[v]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// Form value along a polygon side from node `a` to node `c`.
    fn side_value(&self, ctx: &HoloContext, side: crate::dual::Side, a: usize, c: usize) -> C64 {
        let dz = ctx.t.t[c] - ctx.t.t[a];
        match side {
            crate::dual::Side::Edge(e) => self.edge_factor(ctx, e) * dz,
            crate::dual::Side::Boundary(k) => self.boundary_factor(ctx, k) * dz,
        }
    }

    /// `oint 2 F dT` counterclockwise around the polygon of `v`.
    pub fn circulation(&self, ctx: &HoloContext, v: usize) -> C64 {
        let p = ctx.dual().polygon(v);
        let d = p.nodes.len();
        (0..d)
            .map(|j| self.side_value(ctx, p.sides[j], p.nodes[j], p.nodes[(j + 1) % d]))
            .sum()
    }

    /// Primitive of `2 F dT` over the augmented dual, slit along a primal
    /// path from the puncture to the outer face.
    pub fn primitive(&self, ctx: &HoloContext, base: usize) -> FormPrimitive {
        let dual = ctx.dual();
        let g = dual.graph();
        let n = dual.n_boundary();
        let mut cut_edges = vec![false; g.n_edges()];
        let mut cut_boundary = vec![false; n];
        let mut cut_faces = Vec::new();
        if let Some(p) = self.puncture {
            // shortest primal path to a vertex on the outer face
            let mut prev = vec![usize::MAX; g.n_vertices()];
            let mut seen = vec![false; g.n_vertices()];
            seen[p] = true;
            let mut q = VecDeque::from([p]);
            let mut end = None;
            while let Some(v) = q.pop_front() {
                if dual.boundary_index_of_vertex(v).is_some() {
                    end = Some(v);
                    break;
                }
                for &e in g.rotation(v) {
                    let u = g.edge(e).other(v);
                    if !seen[u] {
                        seen[u] = true;
                        prev[u] = e;
                        q.push_back(u);
                    }
                }
            }
            let end = end.expect("connected graph reaches the outer face");
            cut_boundary[dual.boundary_index_of_vertex(end).unwrap()] = true;
            let mut v = end;
            cut_faces.push(v);
            while v != p {
                let e = prev[v];
                cut_edges[e] = true;
                v = g.edge(e).other(v);
                cut_faces.push(v);
            }
        }
        let mut adj: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dual.n_nodes()];
        for e in 0..g.n_edges() {
            if cut_edges[e] {
                continue;
            }
            let [a, c] = dual.edge_nodes(e);
            let val = self.edge_factor(ctx, e) * ctx.t.dt(e);
            adj[a].push((c, val));
            adj[c].push((a, -val));
        }
        for k in 0..n {
            if cut_boundary[k] {
                continue;
            }
            let (a, c) = (dual.boundary_node(k), dual.boundary_node((k + 1) % n));
            let val = self.boundary_factor(ctx, k) * ctx.t.boundary_dt(k);
            adj[a].push((c, val));
            adj[c].push((a, -val));
        }
        let mut values = vec![C64::new(f64::NAN, 0.0); dual.n_nodes()];
        values[base] = C64::new(0.0, 0.0);
        let mut q = VecDeque::from([base]);
        while let Some(a) = q.pop_front() {
            for &(c, val) in &adj[a] {
                if values[c].re.is_nan() {
                    values[c] = values[a] + val;
                    q.push_back(c);
                }
            }
        }
        let mut closedness: f64 = 0.0;
        for v in 0..g.n_vertices() {
            if Some(v) != self.puncture {
                closedness = closedness.max(self.circulation(ctx, v).norm());
            }
        }
        let mut slit: f64 = 0.0;
        for a in 0..dual.n_nodes() {
            for &(c, val) in &adj[a] {
                slit = slit.max((values[c] - values[a] - val).norm());
            }
        }
        FormPrimitive {
            monodromy: self
                .puncture
                .map(|p| self.circulation(ctx, p))
                .unwrap_or(C64::new(0.0, 0.0)),
            values,
            base,
            closedness,
            slit_consistency: slit,
            cut_faces,
        }
    }

    /// The two sides of the single-edge identity
    /// `2 F^fake dT = F^true dT + conj(F^true) dO` (black) or with `conj(dO)`
    /// (white), on every triangle side away from the puncture. Returns the
    /// max discrepancy.
    pub fn closed_forms_residual(&self, ctx: &HoloContext) -> f64 {
        let split = ctx.splitting(self.kind);
        let g = ctx.dual().graph();
        let t = &ctx.t.t;
        let o = &ctx.o.o;
        let mut worst: f64 = 0.0;
        for (ti, tr) in split.triangles.iter().enumerate() {
            let Some(ft) = self.true_values[ti] else {
                continue;
            };
            let d = tr.nodes.len();
            for j in 0..d {
                let (a, c) = (tr.nodes[j], tr.nodes[(j + 1) % d]);
                let dz = t[c] - t[a];
                let d_o = o[c] - o[a];
                let d_o = if self.kind == Color::Black {
                    d_o
                } else {
                    d_o.conj()
                };
                let fake = match tr.sides[j] {
                    SplitSide::Edge(e) => {
                        let u = g.edge(e).other(tr.face);
                        if Some(u) == self.puncture {
                            continue;
                        }
                        self.fake[u]
                    }
                    SplitSide::Boundary(_) => C64::new(0.0, 0.0),
                    SplitSide::Diagonal(dg) => self.diagonals[dg],
                };
                let lhs = 2.0 * fake * dz;
                let rhs = ft * dz + ft.conj() * d_o;
                worst = worst.max((lhs - rhs).norm());
            }
        }
        worst
    }

    /// True value of the split face of `v` containing the side crossing
    /// G-edge `e` (which must be incident to `v`).
    pub fn true_at_edge(&self, ctx: &HoloContext, v: usize, e: usize) -> Option<C64> {
        let split = ctx.splitting(self.kind);
        ctx.triangles_of(v).find_map(|ti| {
            split.triangles[ti]
                .sides
                .contains(&SplitSide::Edge(e))
                .then(|| self.true_values[ti])
                .flatten()
        })
    }

    /// Per-face CSV rows `(face_id, re, im, residual)` of the fake values and
    /// the per-face witness of the true values.
    pub fn csv(&self, ctx: &HoloContext) -> String {
        let g = ctx.dual().graph();
        let mut s = String::from("face_id,re,im,residual\n");
        for v in 0..g.n_vertices() {
            let (z, r) = if g.color(v) == self.kind {
                let z = ctx
                    .triangles_of(v)
                    .next()
                    .and_then(|ti| self.true_values[ti])
                    .unwrap_or(C64::new(f64::NAN, f64::NAN));
                (z, self.witness[v])
            } else {
                (self.fake[v], 0.0)
            };
            s.push_str(&format!("{v},{:.17e},{:.17e},{:.3e}\n", z.re, z.im, r));
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct FormPrimitive {
    /// `I_C[F]` per node on the slit domain.
    pub values: Vec<C64>,
    pub base: usize,
    /// Circulation around the puncture.
    pub monodromy: C64,
    /// Max circulation around faces other than the puncture.
    pub closedness: f64,
    /// Max mismatch on non-tree edges of the slit domain.
    pub slit_consistency: f64,
    /// G-vertices along the slit, from the outer face to the puncture.
    pub cut_faces: Vec<usize>,
}

impl FormPrimitive {
    /// `Pr(I_C, alpha R)` as the real coordinate `Re(conj(alpha) I_C)`.
    pub fn projected(&self, alpha: C64) -> Vec<f64> {
        self.values.iter().map(|z| (alpha.conj() * z).re).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairingReport {
    /// Max `|lhs - rhs|` of the pairing identity over edges away from punctures.
    pub identity: f64,
    /// Max imaginary part of the left-hand side.
    pub realness: f64,
    /// Max circulation of the real form around faces away from punctures.
    pub closedness: f64,
    /// Max value of the form on boundary cycle edges (true-value side).
    pub boundary: f64,
    pub edges_checked: usize,
}

/// Pairing of a t-black-holomorphic `fb` with a t-white-holomorphic `fw`.
pub fn pairing_form_check(ctx: &HoloContext, fb: &THolo, fw: &THolo) -> Result<PairingReport> {
    if fb.kind != Color::Black || fw.kind != Color::White {
        return Err(Error::Input("expected a black and a white function".into()));
    }
    let dual = ctx.dual();
    let g = dual.graph();
    let punct = |v: usize| Some(v) == fb.puncture || Some(v) == fw.puncture;
    let mut identity: f64 = 0.0;
    let mut realness: f64 = 0.0;
    let mut checked = 0;
    let form = |e: usize| -> C64 {
        let ed = g.edge(e);
        fb.fake[ed.white] * fw.fake[ed.black] * ctx.t.dt(e)
    };
    for (e, ed) in g.edges().iter().enumerate() {
        if punct(ed.black) || punct(ed.white) {
            continue;
        }
        let lhs = form(e);
        let (Some(tb), Some(tw)) = (
            fb.true_at_edge(ctx, ed.black, e),
            fw.true_at_edge(ctx, ed.white, e),
        ) else {
            continue;
        };
        let [a, c] = dual.edge_nodes(e);
        let dz = ctx.t.t[c] - ctx.t.t[a];
        let d_o = ctx.o.o[c] - ctx.o.o[a];
        let rhs = 0.5 * (tb * tw * dz + tb.conj() * tw * d_o).re;
        identity = identity.max((lhs.re - rhs).abs());
        realness = realness.max(lhs.im.abs());
        checked += 1;
    }
    let mut closedness: f64 = 0.0;
    for v in 0..g.n_vertices() {
        let near = punct(v) || g.rotation(v).iter().any(|&e| punct(g.edge(e).other(v)));
        if near {
            continue;
        }
        let s: f64 = g.rotation(v).iter().map(|&e| form(e).re).sum();
        closedness = closedness.max(s.abs());
    }
    // boundary cycle edges: one adjacent face is outer, where a true value
    // from the outer boundary data is paired with the inner fake/true value
    let mut boundary: f64 = 0.0;
    let n = dual.n_boundary();
    for k in 0..n {
        let v = dual.boundary_face(k);
        if punct(v) {
            continue;
        }
        let dz = ctx.t.boundary_dt(k);
        let d_o = ctx.o.o[dual.boundary_node((k + 1) % n)] - ctx.o.o[dual.boundary_node(k)];
        let val = match g.color(v) {
            Color::White => {
                let Some((p, _)) = fb.outer[k] else { continue };
                let Some(tw) = true_on_boundary_side(ctx, fw, v, k) else {
                    continue;
                };
                0.5 * (p * tw * dz + p.conj() * tw * d_o).re
            }
            Color::Black => {
                let Some((p, _)) = fw.outer[k] else { continue };
                let Some(tb) = true_on_boundary_side(ctx, fb, v, k) else {
                    continue;
                };
                0.5 * (tb * p * dz + tb.conj() * p * d_o).re
            }
        };
        boundary = boundary.max(val.abs());
    }
    Ok(PairingReport {
        identity,
        realness,
        closedness,
        boundary,
        edges_checked: checked,
    })
}

fn true_on_boundary_side(ctx: &HoloContext, h: &THolo, v: usize, k: usize) -> Option<C64> {
    let split = ctx.splitting(h.kind);
    ctx.triangles_of(v).find_map(|ti| {
        split.triangles[ti]
            .sides
            .contains(&SplitSide::Boundary(k))
            .then(|| h.true_values[ti])
            .flatten()
    })
}

/// `F^{++}, F^{+-}` for one pair of split faces; `F^{--}`, `F^{-+}` are
/// their conjugates.
#[derive(Clone, Copy, Debug)]
pub struct CoupledValue {
    pub pp: C64,
    pub pm: C64,
}

impl CoupledValue {
    pub fn mm(&self) -> C64 {
        self.pp.conj()
    }
    pub fn mp(&self) -> C64 {
        self.pm.conj()
    }
    /// `(F^{++} + eta_b^2 F^{+-} + eta_w^2 F^{-+} + eta_w^2 eta_b^2 F^{--}) / 4`.
    pub fn reconstruct(&self, eta_w: C64, eta_b: C64) -> C64 {
        let (b2, w2) = (eta_b * eta_b, eta_w * eta_w);
        0.25 * (self.pp + b2 * self.pm + w2 * self.mp() + w2 * b2 * self.mm())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CoupledReport {
    pub pairs: usize,
    pub underdetermined: usize,
    /// Max `|F_b(u_black) - (conj(eta_b) F^{++} + eta_b F^{+-})/2|` over the
    /// adjacent black faces not used in the solve.
    pub black_consistency: f64,
    /// Max deviation of the white-side relation for `F_w(u_white)`.
    pub white_consistency: f64,
    /// Max `|K^{-1}(w, b) - reconstruction|`.
    pub reconstruction: f64,
    pub reconstructions: usize,
}

/// Per-pair solver for the coupled values: `F^{++}, F^{+-}` at
/// `(u_black, u_white)` from the true values of `F_b` for the black
/// faces adjacent to `u_white`.
pub struct CoupledSolver<'a> {
    ctx: &'a HoloContext,
    fb: Vec<Option<THolo>>,
    fw: Vec<Option<THolo>>,
}

pub struct CoupledSolve {
    pub value: CoupledValue,
    /// `(eta_b, F_b(u_black))` for every black face adjacent to `u_white`.
    pub equations: Vec<(usize, C64, C64)>,
    /// Indices into `equations` used by the 2x2 solve.
    pub used: (usize, usize),
}

impl<'a> CoupledSolver<'a> {
    pub fn new(ctx: &'a HoloContext) -> Result<Self> {
        let g = ctx.dual().graph();
        let mut fb = vec![None; g.n_vertices()];
        let mut fw = vec![None; g.n_vertices()];
        for v in 0..g.n_vertices() {
            let h = ctx.from_inverse_kasteleyn(v)?;
            match g.color(v) {
                Color::Black => fb[v] = Some(h),
                Color::White => fw[v] = Some(h),
            }
        }
        Ok(Self { ctx, fb, fw })
    }

    pub fn black(&self, b: usize) -> Option<&THolo> {
        self.fb[b].as_ref()
    }

    pub fn white(&self, w: usize) -> Option<&THolo> {
        self.fw[w].as_ref()
    }

    /// `None` when the faces are adjacent, not of the expected colors, or
    /// the adjacent directions are too close to parallel.
    pub fn solve(&self, ub: usize, uw: usize) -> Option<CoupledSolve> {
        let ctx = self.ctx;
        let g = ctx.dual().graph();
        let trb = &ctx.split_black.triangles[ub];
        let trw = &ctx.split_white.triangles[uw];
        let adjacent = g.rotation(trb.face).iter().any(|&e| g.edge(e).white == trw.face);
        if g.color(trb.face) != Color::Black || g.color(trw.face) != Color::White || adjacent {
            return None;
        }
        let eqs: Vec<(usize, C64, C64)> = trw
            .sides
            .iter()
            .filter_map(|s| match s {
                SplitSide::Edge(e) => Some(g.edge(*e).black),
                _ => None,
            })
            .map(|b| (b, ctx.eta.eta[b], self.fb[b].as_ref().unwrap().true_values[ub].unwrap()))
            .collect();
        // best-conditioned pair: 2 F = conj(eta) x + eta y
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..eqs.len() {
            for j in i + 1..eqs.len() {
                let (e1, e2) = (eqs[i].1, eqs[j].1);
                let det = (e1.conj() * e2 - e2.conj() * e1).norm();
                if best.is_none_or(|(_, _, d)| det > d) {
                    best = Some((i, j, det));
                }
            }
        }
        let (i, j, det) = best?;
        if det < 1e-8 {
            return None;
        }
        let ((_, e1, f1), (_, e2, f2)) = (eqs[i], eqs[j]);
        let d = e1.conj() * e2 - e2.conj() * e1;
        let pp = (2.0 * f1 * e2 - 2.0 * f2 * e1) / d;
        let pm = (e1.conj() * 2.0 * f2 - e2.conj() * 2.0 * f1) / d;
        Some(CoupledSolve {
            value: CoupledValue { pp, pm },
            equations: eqs,
            used: (i, j),
        })
    }
}

/// Solve the coupled values on all pairs `(u_black, u_white)` of split
/// triangles coming from non-adjacent faces, and check both relations and
/// the `K^{-1}` reconstruction.
pub fn coupled_fpmpm(
    ctx: &HoloContext,
    max_pairs: usize,
) -> Result<(Vec<((usize, usize), CoupledValue)>, CoupledReport)> {
    let g = ctx.dual().graph();
    let solver = CoupledSolver::new(ctx)?;
    let mut out = Vec::new();
    let mut rep = CoupledReport {
        pairs: 0,
        underdetermined: 0,
        black_consistency: 0.0,
        white_consistency: 0.0,
        reconstruction: 0.0,
        reconstructions: 0,
    };
    let sb = &ctx.split_black;
    let sw = &ctx.split_white;
    'outer: for (ub, trb) in sb.triangles.iter().enumerate() {
        if g.color(trb.face) != Color::Black {
            continue;
        }
        for (uw, trw) in sw.triangles.iter().enumerate() {
            let adjacent = g.rotation(trb.face).iter().any(|&e| g.edge(e).white == trw.face);
            if g.color(trw.face) != Color::White || adjacent {
                continue;
            }
            if out.len() >= max_pairs {
                break 'outer;
            }
            let Some(sol) = solver.solve(ub, uw) else {
                rep.underdetermined += 1;
                continue;
            };
            let cv = sol.value;
            for (l, &(_, eb, fv)) in sol.equations.iter().enumerate() {
                if l != sol.used.0 && l != sol.used.1 {
                    let pred = 0.5 * (eb.conj() * cv.pp + eb * cv.pm);
                    rep.black_consistency = rep.black_consistency.max((pred - fv).norm());
                }
            }
            // white side: for w adjacent to u_black
            for s in &trb.sides {
                if let SplitSide::Edge(e) = s {
                    let w = g.edge(*e).white;
                    let ew = ctx.eta.eta[w];
                    let fwv = solver.white(w).unwrap().true_values[uw].unwrap();
                    let pred = 0.5 * (ew.conj() * cv.pp + ew * cv.mp());
                    rep.white_consistency = rep.white_consistency.max((pred - fwv).norm());
                    for &(b, eb, _) in &sol.equations {
                        let want = ctx.kinv(w, b);
                        let got = cv.reconstruct(ew, eb);
                        rep.reconstruction = rep.reconstruction.max((want - got).norm());
                        rep.reconstructions += 1;
                    }
                }
            }
            rep.pairs += 1;
            out.push(((ub, uw), cv));
        }
    }
    Ok((out, rep))
}

#[derive(Clone, Debug, Serialize)]
pub struct SameSignReport {
    pub face: usize,
    pub boundary_index: usize,
    pub lambda: [f64; 2],
    /// Increments of `2 Re(conj(lambda) I_C[F_b])` along the outer boundary,
    /// starting after the face's own boundary edge.
    pub increments: Vec<f64>,
    /// `+1` or `-1` when all increments share that sign (zeros allowed).
    pub sign: i32,
    pub total: f64,
    /// `2 Re(conj(lambda) m)` with `m` the monodromy around the face, i.e.
    /// `-4 Re(lambda eta_b)`.
    pub expected_total: f64,
    /// Max `|Re(conj(lambda) I_C)|` over all nodes after centering the
    /// boundary range.
    pub max_abs_normalized: f64,
    pub pass: bool,
}

/// Boundary same-sign check for a black boundary face `b`, using
/// `lambda = conj(eta_b) e^{-i xi}` with `xi` the angle at the boundary
/// vertex following the face's boundary edge.
pub fn same_sign_check(
    ctx: &HoloContext,
    b: usize,
    xi: &[f64],
    tol: f64,
) -> Result<SameSignReport> {
    let dual = ctx.dual();
    let n = dual.n_boundary();
    let j = dual
        .boundary_index_of_vertex(b)
        .ok_or_else(|| Error::Input(format!("face {b} is not a boundary face")))?;
    if dual.graph().color(b) != Color::Black {
        return Err(Error::Input("same-sign check expects a black face".into()));
    }
    let f = ctx.from_inverse_kasteleyn(b)?;
    let start = dual.boundary_node((j + 1) % n);
    let prim = f.primitive(ctx, start);
    let lambda = ctx.eta.eta[b].conj() * C64::from_polar(1.0, -xi[(j + 1) % n]);
    let h: Vec<f64> = prim
        .values
        .iter()
        .map(|z| 2.0 * (lambda.conj() * z).re)
        .collect();
    let mut increments = Vec::with_capacity(n - 1);
    for s in 1..n {
        let a = dual.boundary_node((j + s) % n);
        let c = dual.boundary_node((j + s + 1) % n);
        increments.push(h[c] - h[a]);
    }
    let pos = increments.iter().all(|&x| x >= -tol);
    let neg = increments.iter().all(|&x| x <= tol);
    let sign = if pos && !neg {
        1
    } else if neg && !pos {
        -1
    } else if pos && neg {
        0
    } else {
        2
    };
    let total: f64 = increments.iter().sum();
    let expected_total = 2.0 * (lambda.conj() * prim.monodromy).re;
    let bvals: Vec<f64> = (0..n).map(|k| h[dual.boundary_node(k)] / 2.0).collect();
    let (lo, hi) = bvals
        .iter()
        .fold((f64::MAX, f64::MIN), |(a, c), &x| (a.min(x), c.max(x)));
    let mid = 0.5 * (lo + hi);
    let max_abs_normalized = h.iter().map(|x| (x / 2.0 - mid).abs()).fold(0.0, f64::max);
    Ok(SameSignReport {
        face: b,
        boundary_index: j,
        lambda: [lambda.re, lambda.im],
        pass: (sign == 1 || sign == -1)
            && (total - expected_total).abs() <= 1e-8 * (1.0 + expected_total.abs())
            && max_abs_normalized <= 1.0 + tol,
        increments,
        sign,
        total,
        expected_total,
        max_abs_normalized,
    })
}
