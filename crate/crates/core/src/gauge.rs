//! Perfect Coulomb gauges: interior nullspaces, realization of `(T, O)`,
//! the hyperboloid boundary system and its Levenberg-Marquardt solve, and
//! the verdict combining the three boundary conditions with the proper and
//! perfect checks.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dual::AugmentedDual;
use crate::embedding::{
    boundary_angles, winding_number, BoundaryData, PerfectReport, ProperReport, TEmbedding,
};
use crate::error::{Error, Result};
use crate::graph::{BipartiteDimerGraph, Color};
use crate::kasteleyn::RealKasteleyn;
use crate::lsq::{self, LsqConfig};
use crate::C64;

/// Orthonormal bases of the interior solution spaces.
#[derive(Clone, Debug)]
pub struct NullspaceBases {
    /// `B x d` basis of `{F : [K^T F](w) = 0, w interior}`.
    pub black: DMatrix<f64>,
    /// `W x d` basis of `{F : [K F](b) = 0, b interior}`.
    pub white: DMatrix<f64>,
}

fn real_nullspace(m: &DMatrix<f64>, ncols: usize) -> DMatrix<f64> {
    if m.nrows() == 0 {
        return DMatrix::identity(ncols, ncols);
    }
    let eig = (m.transpose() * m).symmetric_eigen();
    let max = eig.eigenvalues.amax().max(1e-300);
    let cols: Vec<usize> = (0..ncols)
        .filter(|&j| eig.eigenvalues[j] <= 1e-12 * max)
        .collect();
    DMatrix::from_fn(ncols, cols.len(), |i, j| eig.eigenvectors[(i, cols[j])])
}

fn boundary_sets(dual: &AugmentedDual) -> (Vec<usize>, Vec<usize>) {
    let g = dual.graph();
    let mut whites = Vec::new();
    let mut blacks = Vec::new();
    for &v in dual.boundary_faces() {
        match g.color(v) {
            Color::White => whites.push(v),
            Color::Black => blacks.push(v),
        }
    }
    (whites, blacks)
}

/// Since `K` is real, the complex solution spaces are complexifications of
/// the real ones.
pub fn coulomb_nullspace(dual: &AugmentedDual, k: &RealKasteleyn) -> Result<NullspaceBases> {
    let g = dual.graph();
    let (bw, bb) = boundary_sets(dual);
    let int_w: Vec<usize> = g
        .white_vertices()
        .iter()
        .copied()
        .filter(|v| !bw.contains(v))
        .collect();
    let int_b: Vec<usize> = g
        .black_vertices()
        .iter()
        .copied()
        .filter(|v| !bb.contains(v))
        .collect();
    let kt_rows = DMatrix::from_fn(int_w.len(), k.matrix.nrows(), |i, j| {
        k.matrix[(j, g.class_index(int_w[i]))]
    });
    let k_rows = DMatrix::from_fn(int_b.len(), k.matrix.ncols(), |i, j| {
        k.matrix[(g.class_index(int_b[i]), j)]
    });
    let black = real_nullspace(&kt_rows, k.matrix.nrows());
    let white = real_nullspace(&k_rows, k.matrix.ncols());
    if black.ncols() == 0 || white.ncols() == 0 {
        return Err(Error::NoGauge("interior solution space is trivial".into()));
    }
    Ok(NullspaceBases { black, white })
}

/// `F^black` on B and `F^white` on W, indexed by class index.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoulombGauge {
    pub f_black: Vec<C64>,
    pub f_white: Vec<C64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GaugeResidual {
    /// `max |[K^T F^black](w)|` over interior w.
    pub black: f64,
    /// `max |[K F^white](b)|` over interior b.
    pub white: f64,
    pub min_abs_black: f64,
    pub min_abs_white: f64,
    /// `min |[K^T F^black](w)|` over boundary w.
    pub min_boundary_black: f64,
    pub min_boundary_white: f64,
}

impl CoulombGauge {
    pub fn residual(&self, dual: &AugmentedDual, k: &DMatrix<f64>) -> GaugeResidual {
        let g = dual.graph();
        let (bw, bb) = boundary_sets(dual);
        let fb = DVector::from_vec(self.f_black.clone());
        let fw = DVector::from_vec(self.f_white.clone());
        let kc = k.map(|x| C64::new(x, 0.0));
        let ktf = kc.transpose() * &fb;
        let kf = &kc * &fw;
        let mut r = GaugeResidual {
            black: 0.0,
            white: 0.0,
            min_abs_black: self
                .f_black
                .iter()
                .map(|z| z.norm())
                .fold(f64::INFINITY, f64::min),
            min_abs_white: self
                .f_white
                .iter()
                .map(|z| z.norm())
                .fold(f64::INFINITY, f64::min),
            min_boundary_black: f64::INFINITY,
            min_boundary_white: f64::INFINITY,
        };
        for &w in g.white_vertices() {
            let x = ktf[g.class_index(w)].norm();
            if bw.contains(&w) {
                r.min_boundary_black = r.min_boundary_black.min(x);
            } else {
                r.black = r.black.max(x);
            }
        }
        for &b in g.black_vertices() {
            let x = kf[g.class_index(b)].norm();
            if bb.contains(&b) {
                r.min_boundary_white = r.min_boundary_white.min(x);
            } else {
                r.white = r.white.max(x);
            }
        }
        r
    }

    pub fn is_nondegenerate(&self, dual: &AugmentedDual, k: &DMatrix<f64>, eps: f64) -> bool {
        let r = self.residual(dual, k);
        r.min_abs_black > eps
            && r.min_abs_white > eps
            && r.min_boundary_black > eps
            && r.min_boundary_white > eps
    }

    fn map(&self, fb: impl Fn(C64) -> C64, fw: impl Fn(C64) -> C64) -> Self {
        Self {
            f_black: self.f_black.iter().map(|&z| fb(z)).collect(),
            f_white: self.f_white.iter().map(|&z| fw(z)).collect(),
        }
    }

    /// `(lambda F^black, F^white / lambda)`.
    pub fn scale(&self, lambda: C64) -> Self {
        self.map(|z| z * lambda, |z| z / lambda)
    }

    /// `(alpha F^black, alpha F^white)`: `T -> alpha^2 T`, `O` fixed.
    pub fn rotate(&self, alpha: C64) -> Self {
        self.map(|z| z * alpha, |z| z * alpha)
    }

    /// Lorentz boost with rapidity `s` acting on `(Re T, Im T, Re O)`.
    pub fn boost(&self, s: f64) -> Self {
        let (c, sh) = ((s / 2.0).cosh(), (s / 2.0).sinh());
        self.map(|z| z * c - z.conj() * sh, |z| z * c - z.conj() * sh)
    }

    /// `(i F^black, -i F^white)`: `T` fixed, `O -> -O`.
    pub fn negate_origami(&self) -> Self {
        let i = C64::new(0.0, 1.0);
        self.map(|z| z * i, |z| -z * i)
    }
}

/// Boost of a point `(T, O)` matching [`CoulombGauge::boost`].
pub fn boost_point(t: C64, o: C64, s: f64) -> (C64, C64) {
    let (ch, sh) = (s.cosh(), s.sinh());
    (
        C64::new(t.re * ch - o.re * sh, t.im),
        C64::new(o.re * ch - t.re * sh, o.im),
    )
}

#[derive(Clone, Debug)]
pub struct GaugeRealization {
    pub t: Vec<C64>,
    pub o: Vec<C64>,
    pub base: usize,
    pub closedness: f64,
}

impl GaugeRealization {
    pub fn embedding(&self, dual: &Arc<AugmentedDual>) -> Result<TEmbedding> {
        TEmbedding::new(dual.clone(), self.t.clone())
    }
}

/// `(dT, dO)` on G-edge `e`.
pub fn gauge_increments(
    g: &BipartiteDimerGraph,
    k: &DMatrix<f64>,
    gauge: &CoulombGauge,
    e: usize,
) -> (C64, C64) {
    let ed = g.edge(e);
    let (bi, wi) = (g.class_index(ed.black), g.class_index(ed.white));
    let kb = gauge.f_black[bi] * k[(bi, wi)];
    (kb * gauge.f_white[wi], kb * gauge.f_white[wi].conj())
}

/// Integrate `(dT, dO)` over a breadth-first dual tree from `base`.
pub fn realize(
    dual: &AugmentedDual,
    k: &DMatrix<f64>,
    gauge: &CoulombGauge,
    base: usize,
    base_values: (C64, C64),
    tol: f64,
) -> Result<GaugeRealization> {
    let g = dual.graph();
    let incs: Vec<(C64, C64)> = (0..g.n_edges())
        .map(|e| gauge_increments(g, k, gauge, e))
        .collect();
    let mut t = vec![C64::new(0.0, 0.0); dual.n_nodes()];
    let mut o = t.clone();
    t[base] = base_values.0;
    o[base] = base_values.1;
    for (v, p) in dual.bfs_tree(base) {
        if let Some((u, e, s)) = p {
            t[v] = t[u] + incs[e].0 * s as f64;
            o[v] = o[u] + incs[e].1 * s as f64;
        }
    }
    let mut closedness: f64 = 0.0;
    for (e, &(dt, d_o)) in incs.iter().enumerate() {
        let [a, b] = dual.edge_nodes(e);
        closedness = closedness
            .max((t[b] - t[a] - dt).norm())
            .max((o[b] - o[a] - d_o).norm());
    }
    if closedness > 10.0 * tol {
        return Err(Error::InconsistentGauge(closedness));
    }
    Ok(GaugeRealization {
        t,
        o,
        base,
        closedness,
    })
}

/// Per boundary vertex `(|T|^2 - (Re O)^2 - 1, Im O)`, flattened.
pub fn hyperboloid_residual(dual: &AugmentedDual, t: &[C64], o: &[C64]) -> Vec<f64> {
    (0..dual.n_boundary())
        .flat_map(|k| {
            let v = dual.boundary_node(k);
            [t[v].norm_sqr() - o[v].re * o[v].re - 1.0, o[v].im]
        })
        .collect()
}

/// Boundary values as bilinear forms in the boundary data `g` (on boundary
/// whites) and `f` (on boundary blacks): `F^black = K^{-T} g`,
/// `F^white = K^{-1} f`, `T(v_k) = T_0 + g^T M_k f`,
/// `O(v_k) = O_0 + g^T M_k conj(f)`.
#[derive(Clone, Debug)]
pub struct BoundarySystem {
    pub n_white: usize,
    pub n_black: usize,
    /// Real `K^{-1}`, rows white, columns black.
    pub kinv: DMatrix<f64>,
    pub k: DMatrix<f64>,
    /// Class indices of boundary whites / blacks in boundary order.
    pub white_idx: Vec<usize>,
    pub black_idx: Vec<usize>,
    /// One `n_white x n_black` matrix per boundary vertex.
    pub m: Vec<DMatrix<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Fit,
    Hyperboloid,
}

impl BoundarySystem {
    pub fn new(dual: &AugmentedDual, k: &RealKasteleyn) -> Result<Self> {
        let g = dual.graph();
        let kinv = k
            .matrix
            .clone()
            .lu()
            .try_inverse()
            .ok_or(Error::NoPerfectMatching)?;
        let (bw, bb) = boundary_sets(dual);
        let white_idx: Vec<usize> = bw.iter().map(|&v| g.class_index(v)).collect();
        let black_idx: Vec<usize> = bb.iter().map(|&v| g.class_index(v)).collect();
        let (nw, nb) = (white_idx.len(), black_idx.len());
        let root = dual.boundary_node(0);
        let mut per_node = vec![DMatrix::<f64>::zeros(nw, nb); dual.n_nodes()];
        for (v, p) in dual.bfs_tree(root) {
            if let Some((u, e, s)) = p {
                let ed = g.edge(e);
                let (bi, wi) = (g.class_index(ed.black), g.class_index(ed.white));
                let c = s as f64 * k.matrix[(bi, wi)];
                let inc = DMatrix::from_fn(nw, nb, |j, l| {
                    c * kinv[(white_idx[j], bi)] * kinv[(wi, black_idx[l])]
                });
                per_node[v] = &per_node[u] + inc;
            }
        }
        let m = (0..dual.n_boundary())
            .map(|q| per_node[dual.boundary_node(q)].clone())
            .collect();
        Ok(Self {
            n_white: nw,
            n_black: nb,
            kinv,
            k: k.matrix.clone(),
            white_idx,
            black_idx,
            m,
        })
    }

    pub fn n_params(&self) -> usize {
        2 * self.n_white + 2 * self.n_black + 4
    }

    pub fn unpack(&self, x: &DVector<f64>) -> (Vec<C64>, Vec<C64>, C64, C64) {
        let (nw, nb) = (self.n_white, self.n_black);
        let g = (0..nw).map(|j| C64::new(x[j], x[nw + j])).collect();
        let f = (0..nb)
            .map(|l| C64::new(x[2 * nw + l], x[2 * nw + nb + l]))
            .collect();
        let o = 2 * (nw + nb);
        (g, f, C64::new(x[o], x[o + 1]), C64::new(x[o + 2], x[o + 3]))
    }

    pub fn gauge(&self, x: &DVector<f64>) -> CoulombGauge {
        let (g, f, _, _) = self.unpack(x);
        let nbk = self.kinv.ncols();
        let nwh = self.kinv.nrows();
        let f_black = (0..nbk)
            .map(|b| {
                self.white_idx
                    .iter()
                    .zip(&g)
                    .map(|(&w, &gj)| gj * self.kinv[(w, b)])
                    .sum()
            })
            .collect();
        let f_white = (0..nwh)
            .map(|w| {
                self.black_idx
                    .iter()
                    .zip(&f)
                    .map(|(&b, &fl)| fl * self.kinv[(w, b)])
                    .sum()
            })
            .collect();
        CoulombGauge { f_black, f_white }
    }

    pub fn integration_constants(&self, x: &DVector<f64>) -> (C64, C64) {
        let (_, _, t0, o0) = self.unpack(x);
        (t0, o0)
    }

    /// `T(v_k), O(v_k)` and their derivatives along each real parameter.
    fn boundary_with_jacobian(
        &self,
        x: &DVector<f64>,
    ) -> (Vec<C64>, Vec<C64>, Vec<Vec<C64>>, Vec<Vec<C64>>) {
        let (g, f, t0, o0) = self.unpack(x);
        let (nw, nb) = (self.n_white, self.n_black);
        let np = self.n_params();
        let i = C64::new(0.0, 1.0);
        let mut ts = Vec::with_capacity(self.m.len());
        let mut os = Vec::with_capacity(self.m.len());
        let mut jt = Vec::with_capacity(self.m.len());
        let mut jo = Vec::with_capacity(self.m.len());
        for m in &self.m {
            let mc = m.map(|v| C64::new(v, 0.0));
            let fv = DVector::from_vec(f.clone());
            let gv = DVector::from_vec(g.clone());
            let mf = &mc * &fv;
            let mfc = &mc * fv.map(|z| z.conj());
            let mtg = mc.transpose() * &gv;
            ts.push(t0 + gv.dot(&mf));
            os.push(o0 + gv.dot(&mfc));
            let mut dt = vec![C64::new(0.0, 0.0); np];
            let mut d_o = dt.clone();
            for j in 0..nw {
                dt[j] = mf[j];
                dt[nw + j] = i * mf[j];
                d_o[j] = mfc[j];
                d_o[nw + j] = i * mfc[j];
            }
            for l in 0..nb {
                dt[2 * nw + l] = mtg[l];
                dt[2 * nw + nb + l] = i * mtg[l];
                d_o[2 * nw + l] = mtg[l];
                d_o[2 * nw + nb + l] = -i * mtg[l];
            }
            let o = 2 * (nw + nb);
            dt[o] = C64::new(1.0, 0.0);
            dt[o + 1] = i;
            d_o[o + 2] = C64::new(1.0, 0.0);
            d_o[o + 3] = i;
            jt.push(dt);
            jo.push(d_o);
        }
        (ts, os, jt, jo)
    }

    pub fn boundary_values(&self, x: &DVector<f64>) -> (Vec<C64>, Vec<C64>) {
        let (t, o, _, _) = self.boundary_with_jacobian(x);
        (t, o)
    }

    fn eval(
        &self,
        x: &DVector<f64>,
        mode: Mode,
        target: &[(C64, f64)],
    ) -> (DVector<f64>, DMatrix<f64>) {
        let (ts, os, jt, jo) = self.boundary_with_jacobian(x);
        let np = self.n_params();
        let nk = ts.len();
        match mode {
            Mode::Hyperboloid => {
                let mut r = DVector::zeros(2 * nk);
                let mut j = DMatrix::zeros(2 * nk, np);
                for k in 0..nk {
                    r[2 * k] = ts[k].norm_sqr() - os[k].re * os[k].re - 1.0;
                    r[2 * k + 1] = os[k].im;
                    for p in 0..np {
                        j[(2 * k, p)] =
                            2.0 * (ts[k].conj() * jt[k][p]).re - 2.0 * os[k].re * jo[k][p].re;
                        j[(2 * k + 1, p)] = jo[k][p].im;
                    }
                }
                (r, j)
            }
            Mode::Fit => {
                let mut r = DVector::zeros(4 * nk);
                let mut j = DMatrix::zeros(4 * nk, np);
                for k in 0..nk {
                    let (tt, to) = target[k];
                    let dt = ts[k] - tt;
                    let d_o = os[k] - to;
                    r[4 * k] = dt.re;
                    r[4 * k + 1] = dt.im;
                    r[4 * k + 2] = d_o.re;
                    r[4 * k + 3] = d_o.im;
                    for p in 0..np {
                        j[(4 * k, p)] = jt[k][p].re;
                        j[(4 * k + 1, p)] = jt[k][p].im;
                        j[(4 * k + 2, p)] = jo[k][p].re;
                        j[(4 * k + 3, p)] = jo[k][p].im;
                    }
                }
                (r, j)
            }
        }
    }

    pub fn hyperboloid(&self, x: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        self.eval(x, Mode::Hyperboloid, &[])
    }

    pub fn fit(&self, x: &DVector<f64>, target: &[(C64, f64)]) -> (DVector<f64>, DMatrix<f64>) {
        self.eval(x, Mode::Fit, target)
    }
}

/// Regular tangential target: `phi_k = k pi / n`, `xi_k = (-1)^{k+1} pi / 2n`.
pub fn regular_boundary_angles(n2: usize) -> (Vec<f64>, Vec<f64>) {
    let n = n2 as f64 / 2.0;
    let phi = (0..n2)
        .map(|k| k as f64 * std::f64::consts::PI / n)
        .collect();
    let xi = (0..n2)
        .map(|k| {
            let s = if k % 2 == 0 { -1.0 } else { 1.0 };
            s * std::f64::consts::PI / (2.0 * n)
        })
        .collect();
    (phi, xi)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum GaugeInit {
    /// Fit to a tangential polygon with the given boundary angles, then release.
    Target { phi: Vec<f64>, xi: Vec<f64> },
    /// Regular tangential polygon target.
    Regular,
    /// Gaussian start, no fit stage.
    Random,
    /// Start from these parameters.
    Warm(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub tol: f64,
    pub restarts: usize,
    pub seed: u64,
    pub patience: usize,
    pub init: GaugeInit,
    /// Pin `F^black(b_1) = 1` and `Im F^white(w_1) = 0` on boundary faces.
    pub pin: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            restarts: 10,
            seed: 0,
            patience: 400,
            init: GaugeInit::Regular,
            pin: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GaugeEmbeddingReport {
    pub hyperboloid_max: f64,
    pub cond_hyperboloid: bool,
    /// Smallest of the signed quantities in the boundary sign condition.
    pub sign_margin: f64,
    pub cond_sign: bool,
    pub winding: i64,
    pub cond_winding: bool,
    pub proper: Option<ProperReport>,
    pub perfect: Option<PerfectReport>,
    pub boundary: Option<BoundaryData>,
    /// The three boundary conditions hold.
    pub pass: bool,
    /// `pass` and the embedding is proper and perfect.
    pub conclusion_holds: bool,
}

/// Check the three boundary conditions, then proper and perfect.
pub fn verify_gauge_embedding(t: &TEmbedding, o: &[C64], tol: f64) -> GaugeEmbeddingReport {
    let dual = &t.dual;
    let n = dual.n_boundary();
    let hyperboloid_max = hyperboloid_residual(dual, &t.t, o)
        .iter()
        .fold(0.0f64, |a, b| a.max(b.abs()));
    let mut sign_margin = f64::INFINITY;
    for k in 0..n {
        let d = t.boundary_point(k) - t.t[dual.v_in(k)];
        let next = (t.boundary_point((k + 1) % n) - t.boundary_point(k)) * d.conj();
        let prev = (t.boundary_point((k + n - 1) % n) - t.boundary_point(k)) * d.conj();
        sign_margin = sign_margin.min(next.im).min(-prev.im);
    }
    let poly: Vec<C64> = (0..n).map(|k| t.boundary_point(k)).collect();
    let winding = winding_number(&poly, C64::new(0.0, 0.0));
    let cond_hyperboloid = hyperboloid_max < tol;
    let cond_sign = sign_margin > 1e-10;
    let cond_winding = winding == 1;
    let pass = cond_hyperboloid && cond_sign && cond_winding;
    let (proper, perfect, boundary) = if pass {
        (
            Some(t.check_proper(tol)),
            Some(t.check_perfect(tol)),
            boundary_angles(t, o, tol).ok(),
        )
    } else {
        (None, None, None)
    };
    let conclusion_holds =
        pass && proper.as_ref().is_some_and(|p| p.pass) && perfect.as_ref().is_some_and(|p| p.pass);
    GaugeEmbeddingReport {
        hyperboloid_max,
        cond_hyperboloid,
        sign_margin,
        cond_sign,
        winding,
        cond_winding,
        proper,
        perfect,
        boundary,
        pass,
        conclusion_holds,
    }
}

#[derive(Clone, Debug)]
pub struct GaugeSolution {
    pub params: Vec<f64>,
    pub gauge: CoulombGauge,
    pub realization: GaugeRealization,
    pub hyperboloid_max: f64,
    pub restarts_used: usize,
    pub evaluations: usize,
    pub jacobian_nullity: usize,
    pub verdict: GaugeEmbeddingReport,
}

impl GaugeSolution {
    pub fn embedding(&self, dual: &Arc<AugmentedDual>) -> Result<TEmbedding> {
        self.realization.embedding(dual)
    }
}

fn pinned(
    sys: &BoundarySystem,
    x: &DVector<f64>,
    base: (DVector<f64>, DMatrix<f64>),
) -> (DVector<f64>, DMatrix<f64>) {
    let (r, j) = base;
    let np = sys.n_params();
    let m = r.len();
    let mut rp = DVector::zeros(m + 3);
    rp.rows_mut(0, m).copy_from(&r);
    let mut jp = DMatrix::zeros(m + 3, np);
    jp.rows_mut(0, m).copy_from(&j);
    // F^black at the first boundary black, F^white at the first boundary white
    let (b1, w1) = (sys.black_idx[0], sys.white_idx[0]);
    let (g, f, _, _) = sys.unpack(x);
    let nw = sys.n_white;
    let nb = sys.n_black;
    let fb: C64 = (0..nw)
        .map(|j| g[j] * sys.kinv[(sys.white_idx[j], b1)])
        .sum();
    let fw: C64 = (0..nb)
        .map(|l| f[l] * sys.kinv[(w1, sys.black_idx[l])])
        .sum();
    rp[m] = fb.re - 1.0;
    rp[m + 1] = fb.im;
    rp[m + 2] = fw.im;
    for j in 0..nw {
        let c = sys.kinv[(sys.white_idx[j], b1)];
        jp[(m, j)] = c;
        jp[(m + 1, nw + j)] = c;
    }
    for l in 0..nb {
        jp[(m + 2, 2 * nw + nb + l)] = sys.kinv[(w1, sys.black_idx[l])];
    }
    (rp, jp)
}

/// Fit-then-release Levenberg-Marquardt over the boundary data, restarted
/// from seeded Gaussian starts until the realization passes the verdict.
pub fn solve_perfect_gauge(
    dual: &Arc<AugmentedDual>,
    k: &RealKasteleyn,
    cfg: &SolverConfig,
) -> Result<GaugeSolution> {
    if cfg.tol <= 0.0 {
        return Err(Error::Input("tolerance must be positive".into()));
    }
    if dual.n_boundary() % 2 != 0 {
        return Err(Error::Structure("odd outer degree".into()));
    }
    let sys = BoundarySystem::new(dual, k)?;
    let np = sys.n_params();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let target: Option<Vec<(C64, f64)>> = match &cfg.init {
        GaugeInit::Regular => {
            let (phi, xi) = regular_boundary_angles(dual.n_boundary());
            Some(target_points(&phi, &xi))
        }
        GaugeInit::Target { phi, xi } => {
            if phi.len() != dual.n_boundary() || xi.len() != phi.len() {
                return Err(Error::Input(
                    "target angles do not match outer degree".into(),
                ));
            }
            Some(target_points(phi, xi))
        }
        _ => None,
    };
    let lcfg = LsqConfig {
        tol: 1e-15,
        patience: cfg.patience,
    };
    let mut best = f64::INFINITY;
    let mut evaluations = 0;
    for attempt in 0..cfg.restarts.max(1) {
        let mut x = match (&cfg.init, attempt) {
            (GaugeInit::Warm(p), 0) if p.len() == np => DVector::from_vec(p.clone()),
            _ => DVector::from_fn(np, |_, _| StandardNormal.sample(&mut rng)),
        };
        if let Some(target) = &target {
            let fit = |y: &DVector<f64>| sys.fit(y, target);
            let out = lsq::minimize(x, &fit, lcfg);
            evaluations += out.evaluations;
            x = out.x;
        }
        let release = |y: &DVector<f64>| {
            let base = sys.hyperboloid(y);
            if cfg.pin {
                pinned(&sys, y, base)
            } else {
                base
            }
        };
        let out = lsq::minimize(x, &release, lcfg);
        evaluations += out.evaluations;
        let x = out.x;
        let (r, j) = sys.hyperboloid(&x);
        let hmax = r.amax();
        best = best.min(hmax);
        if hmax >= cfg.tol {
            continue;
        }
        let mut gauge = sys.gauge(&x);
        let (t0, o0) = sys.integration_constants(&x);
        let scale = gauge
            .f_black
            .iter()
            .chain(&gauge.f_white)
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if !gauge.is_nondegenerate(dual, &k.matrix, 1e-9 * scale.max(1e-300)) {
            continue;
        }
        let base = dual.boundary_node(0);
        let mut real = realize(dual, &k.matrix, &gauge, base, (t0, o0), cfg.tol)?;
        let Ok(emb) = real.embedding(dual) else {
            continue;
        };
        let mut verdict = verify_gauge_embedding(&emb, &real.o, cfg.tol.max(1e-8));
        if let Some(bd) = &verdict.boundary {
            if bd.o_sign < 0.0 {
                gauge = gauge.negate_origami();
                real = realize(dual, &k.matrix, &gauge, base, (t0, -o0), cfg.tol)?;
                verdict = verify_gauge_embedding(&emb, &real.o, cfg.tol.max(1e-8));
            }
        }
        if !verdict.conclusion_holds {
            continue;
        }
        let o_base = real.o[base];
        let params = params_from_gauge(&sys, &gauge, t0, o_base);
        return Ok(GaugeSolution {
            params,
            hyperboloid_max: hmax,
            restarts_used: attempt + 1,
            evaluations,
            jacobian_nullity: lsq::numerical_nullity(&j, 1e-8),
            gauge,
            realization: real,
            verdict,
        });
    }
    Err(Error::SolveFailed { best })
}

/// Boundary data `(g, f)` reproducing `gauge`: `g = K^T F^black` on
/// boundary whites, `f = K F^white` on boundary blacks.
pub fn params_from_gauge(sys: &BoundarySystem, gauge: &CoulombGauge, t0: C64, o0: C64) -> Vec<f64> {
    let (nw, nb) = (sys.n_white, sys.n_black);
    let mut x = vec![0.0; sys.n_params()];
    for (j, &w) in sys.white_idx.iter().enumerate() {
        let gj: C64 = (0..sys.k.nrows())
            .map(|b| gauge.f_black[b] * sys.k[(b, w)])
            .sum();
        x[j] = gj.re;
        x[nw + j] = gj.im;
    }
    for (l, &b) in sys.black_idx.iter().enumerate() {
        let fl: C64 = (0..sys.k.ncols())
            .map(|w| gauge.f_white[w] * sys.k[(b, w)])
            .sum();
        x[2 * nw + l] = fl.re;
        x[2 * nw + nb + l] = fl.im;
    }
    let o = 2 * (nw + nb);
    x[o] = t0.re;
    x[o + 1] = t0.im;
    x[o + 2] = o0.re;
    x[o + 3] = o0.im;
    x
}

pub fn target_points(phi: &[f64], xi: &[f64]) -> Vec<(C64, f64)> {
    phi.iter()
        .zip(xi)
        .map(|(&p, &x)| (C64::from_polar(1.0 / x.cos(), p), x.tan()))
        .collect()
}

/// Gauge reproducing an embedding: `F^black(b) = conj(eta_b) a(b)`,
/// `F^white(w) = conj(eta_w) c(w)` with real `a, c` solving
/// `a(b) K(b,w) c(w) = eta_b eta_w dT`. Returns the gauge and the
/// factorization residual.
pub fn gauge_from_embedding(
    t: &TEmbedding,
    eta: &crate::embedding::OrigamiSqrt,
    k: &DMatrix<f64>,
) -> Result<(CoulombGauge, f64)> {
    let dual = &t.dual;
    let g = dual.graph();
    let ratio = |e: usize| {
        let ed = g.edge(e);
        let r = eta.eta[ed.black] * eta.eta[ed.white] * t.dt(e);
        r.re / k[(g.class_index(ed.black), g.class_index(ed.white))]
    };
    let mut val = vec![f64::NAN; g.n_vertices()];
    val[0] = 1.0;
    let mut q = std::collections::VecDeque::from([0usize]);
    while let Some(v) = q.pop_front() {
        for &e in g.rotation(v) {
            let u = g.edge(e).other(v);
            if val[u].is_nan() {
                val[u] = ratio(e) / val[v];
                q.push_back(u);
            }
        }
    }
    let mut residual: f64 = 0.0;
    for (e, ed) in g.edges().iter().enumerate() {
        let r = ratio(e);
        residual = residual.max((val[ed.black] * val[ed.white] - r).abs() / r.abs().max(1e-300));
    }
    let mut f_black = vec![C64::new(0.0, 0.0); g.black_vertices().len()];
    let mut f_white = vec![C64::new(0.0, 0.0); g.white_vertices().len()];
    for v in 0..g.n_vertices() {
        let z = eta.eta[v].conj() * val[v];
        match g.color(v) {
            Color::Black => f_black[g.class_index(v)] = z,
            Color::White => f_white[g.class_index(v)] = z,
        }
    }
    Ok((CoulombGauge { f_black, f_white }, residual))
}

#[derive(Clone, Debug, Serialize)]
pub struct MaxPrincipleReport {
    /// Largest product of outgoing real increments at an inner node.
    pub max_product: f64,
    pub violations: Vec<usize>,
    /// Balls where an interior node beat the ball boundary.
    pub ball_failures: usize,
    pub balls_checked: usize,
}

/// Real projections `Re(conj(alpha) F^black)`, `Re(conj(beta) F^white)`:
/// products of increments at inner nodes and extrema on random balls.
pub fn maximum_principle_probe(
    dual: &AugmentedDual,
    k: &DMatrix<f64>,
    gauge: &CoulombGauge,
    alpha: C64,
    beta: C64,
    seed: u64,
) -> MaxPrincipleReport {
    let real = CoulombGauge {
        f_black: gauge
            .f_black
            .iter()
            .map(|z| C64::new((alpha.conj() * z).re, 0.0))
            .collect(),
        f_white: gauge
            .f_white
            .iter()
            .map(|z| C64::new((beta.conj() * z).re, 0.0))
            .collect(),
    };
    let g = dual.graph();
    let dt: Vec<f64> = (0..g.n_edges())
        .map(|e| gauge_increments(g, k, &real, e).0.re)
        .collect();
    let mut tv = vec![0.0; dual.n_nodes()];
    for (v, p) in dual.bfs_tree(0) {
        if let Some((u, e, s)) = p {
            tv[v] = tv[u] + dt[e] * s as f64;
        }
    }
    let scale = dt.iter().map(|x| x.abs()).fold(0.0, f64::max).max(1e-300);
    let mut max_product = f64::NEG_INFINITY;
    let mut violations = Vec::new();
    for v in 0..dual.n_inner() {
        let p: f64 = dual
            .adjacency(v)
            .iter()
            .map(|&(_, e, s)| s as f64 * dt[e] / scale)
            .product();
        max_product = max_product.max(p);
        if p > 1e-12 {
            violations.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ball_failures = 0;
    let balls = 20.min(dual.n_inner());
    for _ in 0..balls {
        let c = rand::Rng::random_range(&mut rng, 0..dual.n_inner());
        let radius = rand::Rng::random_range(&mut rng, 1..4usize);
        let mut dist = vec![usize::MAX; dual.n_nodes()];
        dist[c] = 0;
        let mut q = std::collections::VecDeque::from([c]);
        while let Some(u) = q.pop_front() {
            for &(w, _, _) in dual.adjacency(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    q.push_back(w);
                }
            }
        }
        // interior: inner nodes strictly inside the ball
        let inside: Vec<usize> = (0..dual.n_inner()).filter(|&v| dist[v] < radius).collect();
        let rim: Vec<usize> = (0..dual.n_nodes())
            .filter(|&v| dist[v] == radius || (dist[v] < radius && dual.is_boundary(v)))
            .collect();
        if inside.is_empty() || rim.is_empty() {
            continue;
        }
        let (imax, imin) = inside.iter().fold((f64::MIN, f64::MAX), |(a, b), &v| {
            (a.max(tv[v]), b.min(tv[v]))
        });
        let (rmax, rmin) = rim.iter().fold((f64::MIN, f64::MAX), |(a, b), &v| {
            (a.max(tv[v]), b.min(tv[v]))
        });
        let eps = 1e-12 * scale;
        if imax > rmax + eps || imin < rmin - eps {
            ball_failures += 1;
        }
    }
    MaxPrincipleReport {
        max_product,
        violations,
        ball_failures,
        balls_checked: balls,
    }
}
