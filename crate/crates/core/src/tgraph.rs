//! T-graphs `T + alpha^2 O` and `T + alpha^2 conj(O)` with their martingale
//! jump chain, harmonic primitives and discrete gradients.

use serde::Serialize;

use crate::dual::AugmentedDual;
use crate::embedding::{OrigamiSqrt, TEmbedding};
use crate::error::{Error, Result};
use crate::graph::Color;
use crate::tholo::{FormPrimitive, HoloContext, THolo};
use crate::C64;

/// `White` is `T + alpha^2 O` (black faces become segments, harmonic for
/// t-white-holomorphic primitives); `Black` is `T + alpha^2 conj(O)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Variant {
    White,
    Black,
}

impl Variant {
    /// Color of the faces mapped to segments.
    pub fn segment_color(self) -> Color {
        match self {
            Variant::White => Color::Black,
            Variant::Black => Color::White,
        }
    }
    /// Kind of t-holomorphic function whose primitives are harmonic.
    pub fn harmonic_kind(self) -> Color {
        self.segment_color().flip()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SegmentFace {
    pub face: usize,
    /// Unit direction `alpha conj(eta)`.
    pub direction: [f64; 2],
    /// Node ids of the two extreme points.
    pub minus: usize,
    pub plus: usize,
    pub length: f64,
}

#[derive(Clone, Debug)]
pub struct TGraphEmbedding {
    pub alpha: C64,
    pub variant: Variant,
    pub dual: std::sync::Arc<AugmentedDual>,
    pub positions: Vec<C64>,
    /// Per G-vertex of the segment color.
    pub segments: Vec<Option<SegmentFace>>,
    /// Per node: the G-vertex whose segment contains it in its interior.
    pub carrier: Vec<Option<usize>>,
    pub absorbing: Vec<bool>,
    /// Max distance of a segment-face node from its line, over diameter.
    pub collinearity_residual: f64,
    /// Max deviation of polygon faces from `(1 + alpha^2 eta^2) T`, over diameter.
    pub similarity_residual: f64,
    /// Faces whose image collapses to a point.
    pub degenerate_faces: Vec<usize>,
    pub diameter: f64,
}

fn diameter(p: &[C64]) -> f64 {
    let (mut lo, mut hi) = (C64::new(f64::MAX, f64::MAX), C64::new(f64::MIN, f64::MIN));
    for z in p {
        lo = C64::new(lo.re.min(z.re), lo.im.min(z.im));
        hi = C64::new(hi.re.max(z.re), hi.im.max(z.im));
    }
    (hi - lo).norm()
}

/// Build the T-graph; fails with `DegenerateAlpha` when some inner node lies
/// in the interior of no segment or of more than one.
pub fn build_tgraph(
    t: &TEmbedding,
    o: &[C64],
    eta: &OrigamiSqrt,
    alpha: C64,
    variant: Variant,
) -> Result<TGraphEmbedding> {
    let dual = t.dual.clone();
    let g = dual.graph();
    let a2 = alpha * alpha;
    let positions: Vec<C64> = t
        .t
        .iter()
        .zip(o)
        .map(|(&z, &w)| match variant {
            Variant::White => z + a2 * w,
            Variant::Black => z + a2 * w.conj(),
        })
        .collect();
    let diam = diameter(&positions).max(1e-300);
    let tdiam = t.diameter().max(1e-300);
    let tol = 1e-9 * diam;
    let seg_color = variant.segment_color();
    let mut segments = vec![None; g.n_vertices()];
    let mut collinearity: f64 = 0.0;
    let mut similarity: f64 = 0.0;
    let mut degenerate = Vec::new();
    let mut carrier = vec![None; dual.n_nodes()];
    let mut ambiguous = Vec::new();
    for v in 0..g.n_vertices() {
        let nodes = &dual.polygon(v).nodes;
        if g.color(v) != seg_color {
            let factor = C64::new(1.0, 0.0) + a2 * eta.eta[v] * eta.eta[v];
            if factor.norm() < 1e-9 {
                degenerate.push(v);
            }
            let p0 = nodes[0];
            for &n in nodes {
                let want = factor * (t.t[n] - t.t[p0]);
                similarity = similarity.max((positions[n] - positions[p0] - want).norm() / tdiam);
            }
            continue;
        }
        let u = alpha * eta.eta[v].conj();
        let p0 = positions[nodes[0]];
        let s: Vec<f64> = nodes.iter().map(|&n| (u.conj() * (positions[n] - p0)).re).collect();
        for &n in nodes {
            collinearity = collinearity.max((u.conj() * (positions[n] - p0)).im.abs() / diam);
        }
        let (mut jmin, mut jmax) = (0, 0);
        for j in 0..s.len() {
            if s[j] < s[jmin] {
                jmin = j;
            }
            if s[j] > s[jmax] {
                jmax = j;
            }
        }
        let length = s[jmax] - s[jmin];
        if length <= tol {
            degenerate.push(v);
        }
        for (j, &n) in nodes.iter().enumerate() {
            if s[j] > s[jmin] + tol && s[j] < s[jmax] - tol {
                if carrier[n].is_some() {
                    ambiguous.push(n);
                }
                carrier[n] = Some(v);
            }
        }
        segments[v] = Some(SegmentFace {
            face: v,
            direction: [u.re, u.im],
            minus: nodes[jmin],
            plus: nodes[jmax],
            length,
        });
    }
    let absorbing: Vec<bool> = (0..dual.n_nodes()).map(|n| dual.is_boundary(n)).collect();
    if let Some(n) = ambiguous.into_iter().find(|&n| !absorbing[n]) {
        return Err(Error::DegenerateAlpha(format!("node {n} is interior to two segments")));
    }
    if let Some(n) = (0..dual.n_nodes()).find(|&n| !absorbing[n] && carrier[n].is_none()) {
        return Err(Error::DegenerateAlpha(format!("node {n} is interior to no segment")));
    }
    Ok(TGraphEmbedding {
        alpha,
        variant,
        dual,
        positions,
        segments,
        carrier,
        absorbing,
        collinearity_residual: collinearity,
        similarity_residual: similarity,
        degenerate_faces: degenerate,
        diameter: diam,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Jump {
    pub carrier: usize,
    pub minus: usize,
    pub plus: usize,
    /// Probability of jumping to `plus`.
    pub p_plus: f64,
}

#[derive(Clone, Debug)]
pub struct WalkKernel {
    /// `None` at absorbing nodes.
    pub jumps: Vec<Option<Jump>>,
}

impl WalkKernel {
    /// Next node from `v` given a uniform sample `u` in `[0, 1)`.
    pub fn step(&self, v: usize, u: f64) -> usize {
        match self.jumps[v] {
            None => v,
            Some(j) if u < j.p_plus => j.plus,
            Some(j) => j.minus,
        }
    }

    /// `max |E[X_next] - x|` over non-absorbing nodes.
    pub fn martingale_residual(&self, tg: &TGraphEmbedding) -> f64 {
        let x = &tg.positions;
        self.jumps
            .iter()
            .enumerate()
            .filter_map(|(v, j)| {
                j.map(|j| (j.p_plus * x[j.plus] + (1.0 - j.p_plus) * x[j.minus] - x[v]).norm())
            })
            .fold(0.0, f64::max)
    }
}

/// Jump chain of the T-graph: from `x` on `[p-, p+]` to `p+` with
/// probability `|x - p-| / |p+ - p-|`.
pub fn walk_kernel(tg: &TGraphEmbedding) -> Result<WalkKernel> {
    let x = &tg.positions;
    let mut jumps = vec![None; x.len()];
    for (v, slot) in jumps.iter_mut().enumerate() {
        if tg.absorbing[v] {
            continue;
        }
        let c = tg.carrier[v].ok_or_else(|| Error::DegenerateAlpha(format!("node {v} has no carrier")))?;
        let s = tg.segments[c].as_ref().unwrap();
        let len = (x[s.plus] - x[s.minus]).norm();
        if len <= 1e-14 * tg.diameter {
            return Err(Error::DegenerateAlpha(format!("carrier {c} has zero length")));
        }
        *slot = Some(Jump {
            carrier: c,
            minus: s.minus,
            plus: s.plus,
            p_plus: (x[v] - x[s.minus]).norm() / len,
        });
    }
    Ok(WalkKernel { jumps })
}

#[derive(Clone, Debug, Serialize)]
pub struct HarmonicReport {
    pub max_residual: f64,
    pub checked: usize,
    pub excluded: usize,
}

/// `max |E[H(X_next)] - H(x)|` over non-absorbing nodes not in `exclude`.
pub fn check_harmonic(h: &[f64], kernel: &WalkKernel, exclude: &[bool]) -> HarmonicReport {
    let mut rep = HarmonicReport {
        max_residual: 0.0,
        checked: 0,
        excluded: 0,
    };
    for (v, j) in kernel.jumps.iter().enumerate() {
        let Some(j) = j else { continue };
        if exclude.get(v).copied().unwrap_or(false) {
            rep.excluded += 1;
            continue;
        }
        let r = j.p_plus * h[j.plus] + (1.0 - j.p_plus) * h[j.minus] - h[v];
        rep.max_residual = rep.max_residual.max(r.abs());
        rep.checked += 1;
    }
    rep
}

/// Harmonic `Re(conj(alpha) I_C[F])` for `F` of the matching kind, with the
/// nodes whose carrier is crossed by the primitive's slit marked excluded.
pub struct ProjectedPrimitive {
    pub values: Vec<f64>,
    pub exclude: Vec<bool>,
    pub primitive: FormPrimitive,
}

pub fn projected_primitive(ctx: &HoloContext, tg: &TGraphEmbedding, f: &THolo) -> Result<ProjectedPrimitive> {
    if f.kind != tg.variant.harmonic_kind() {
        return Err(Error::Input("function kind does not match the T-graph variant".into()));
    }
    let prim = f.primitive(ctx, ctx.dual().boundary_node(0));
    let values = prim.projected(tg.alpha);
    let on_cut = |c: usize| prim.cut_faces.contains(&c);
    let exclude = tg.carrier.iter().map(|c| c.is_some_and(on_cut)).collect();
    Ok(ProjectedPrimitive {
        values,
        exclude,
        primitive: prim,
    })
}

/// `D[H](b) = alpha (H(p+) - H(p-)) / (P(p+) - P(p-))` per segment face;
/// `None` for faces in `skip`.
pub fn discrete_gradient(h: &[f64], tg: &TGraphEmbedding, skip: &[usize]) -> Vec<Option<C64>> {
    tg.segments
        .iter()
        .map(|s| {
            let s = s.as_ref()?;
            if skip.contains(&s.face) || s.length <= 0.0 {
                return None;
            }
            let dp = tg.positions[s.plus] - tg.positions[s.minus];
            Some(tg.alpha * (h[s.plus] - h[s.minus]) / dp)
        })
        .collect()
}

/// Gradient of the projected primitive of `f` compared with its fake values.
pub fn gradient_round_trip(ctx: &HoloContext, tg: &TGraphEmbedding, f: &THolo) -> Result<f64> {
    let pp = projected_primitive(ctx, tg, f)?;
    let d = discrete_gradient(&pp.values, tg, &pp.primitive.cut_faces);
    Ok(d
        .iter()
        .enumerate()
        .filter_map(|(v, z)| z.map(|z| (z - f.fake[v]).norm()))
        .fold(0.0, f64::max))
}

#[derive(Clone, Debug, Serialize)]
pub struct DistortionReport {
    pub pairs: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub pass: bool,
}

/// Ratio `|P(v') - P(v)| / |T(v') - T(v)|` over node pairs with
/// `|T(v') - T(v)| >= delta`, expected within `[1 - kappa, 1 + kappa]`.
pub fn distortion(tg: &TGraphEmbedding, t: &TEmbedding, delta: f64, kappa: f64) -> DistortionReport {
    let n = t.t.len();
    let (mut lo, mut hi, mut pairs) = (f64::MAX, 0.0f64, 0);
    for i in 0..n {
        for j in i + 1..n {
            let dt = (t.t[j] - t.t[i]).norm();
            if dt < delta {
                continue;
            }
            let r = (tg.positions[j] - tg.positions[i]).norm() / dt;
            lo = lo.min(r);
            hi = hi.max(r);
            pairs += 1;
        }
    }
    DistortionReport {
        pairs,
        min_ratio: lo,
        max_ratio: hi,
        pass: pairs > 0 && lo >= 1.0 - kappa - 1e-12 && hi <= 1.0 + kappa + 1e-12,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OscillationReport {
    pub osc_r: f64,
    pub osc_big_r: f64,
    /// `osc_r / osc_R`; `None` when `osc_R` vanishes.
    pub ratio: Option<f64>,
    /// `min / max` of `H` on the small ball, for positive `H`.
    pub harnack: Option<f64>,
    pub nodes_r: usize,
    pub nodes_big_r: usize,
}

/// Oscillation of `h` over T-graph balls of radii `r < big_r` around node
/// `center`, skipping `exclude`d nodes.
pub fn oscillation_report(
    h: &[f64],
    tg: &TGraphEmbedding,
    center: usize,
    r: f64,
    big_r: f64,
    exclude: &[bool],
) -> OscillationReport {
    let c = tg.positions[center];
    let ball = |rad: f64| {
        let vals: Vec<f64> = (0..h.len())
            .filter(|&v| !exclude.get(v).copied().unwrap_or(false) && (tg.positions[v] - c).norm() <= rad)
            .map(|v| h[v])
            .collect();
        let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
        let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
        (vals.len(), lo, hi)
    };
    let (nr, lo_r, hi_r) = ball(r);
    let (nbig, lo_big, hi_big) = ball(big_r);
    let osc_r = if nr > 0 { hi_r - lo_r } else { 0.0 };
    let osc_big_r = if nbig > 0 { hi_big - lo_big } else { 0.0 };
    OscillationReport {
        osc_r,
        osc_big_r,
        ratio: (osc_big_r > 0.0).then(|| osc_r / osc_big_r),
        harnack: (nr > 0 && lo_r > 0.0).then(|| lo_r / hi_r),
        nodes_r: nr,
        nodes_big_r: nbig,
    }
}
