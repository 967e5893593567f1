//! Height-gradient correlations on perfect t-embeddings of Aztec graphs
//! against derivatives of the disc Green function in conformal coordinates.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use tembed_core::dual::AugmentedDual;
use tembed_core::embedding::{pair, TEmbedding};
use tembed_core::kasteleyn::{correlation_gradient, shortest_dual_path, DualPath};
use tembed_core::{Error, C64};
use tembed_surface::green::gff_npoint;
use tembed_surface::invert::Inverter;
use tembed_surface::plateau::{plateau_solve, ConformalParam, PlateauReport};
use tembed_surface::SurfaceMap;

use crate::config::{ExperimentConfig, PointTuple};
use crate::error::{LabError, Result};
use crate::pipeline::Instance;

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceRow {
    pub tuple: String,
    pub n: usize,
    pub m: usize,
    pub discrete: f64,
    pub discrete_imag: f64,
    pub target: f64,
    pub abs_err: f64,
    /// `None` when the target vanishes.
    pub rel_err: Option<f64>,
    /// Change of the discrete value when the paths are routed in reverse order.
    pub reroute_delta: Option<f64>,
    pub path_steps: Vec<usize>,
    pub snapped: Vec<[[f64; 2]; 2]>,
    pub zeta: Vec<[[f64; 2]; 2]>,
    pub verified: bool,
    #[serde(skip)]
    pub runtime_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SizeSummary {
    pub m: usize,
    pub vertices: usize,
    pub dual_nodes: usize,
    pub verified: bool,
    pub hyperboloid_max: f64,
    pub gauge_evaluations: usize,
    pub gauge_restarts: usize,
    /// Max `|Re O(v) - theta(zeta(T(v)))|` over inner nodes with
    /// `|x| + |y| <= 1.2`.
    pub origami_gap: f64,
    pub max_imag_origami: f64,
    #[serde(skip)]
    pub build_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SizeFailure {
    pub m: usize,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FittedConstant {
    pub tuple: String,
    /// Least-squares `c` in `discrete ~ c * target`.
    pub constant: f64,
    pub rel_err_fitted: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Trend {
    pub tuple: String,
    pub sizes: Vec<usize>,
    pub values: Vec<f64>,
    pub rel_errors: Vec<Option<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentResult {
    pub rows: Vec<ConvergenceRow>,
    pub sizes: Vec<SizeSummary>,
    pub failures: Vec<SizeFailure>,
    pub fits: Vec<FittedConstant>,
    pub surface: PlateauReport,
}

pub struct ExperimentRun {
    pub result: ExperimentResult,
    pub instances: Vec<Instance>,
    pub param: ConformalParam,
}

impl ExperimentResult {
    /// Rows of one tuple over the verified sizes, in increasing `m`.
    pub fn trend(&self, tuple: &str) -> Trend {
        let mut rows: Vec<&ConvergenceRow> = self.rows.iter().filter(|r| r.tuple == tuple && r.verified).collect();
        rows.sort_by_key(|r| r.m);
        Trend {
            tuple: tuple.into(),
            sizes: rows.iter().map(|r| r.m).collect(),
            values: rows.iter().map(|r| r.discrete).collect(),
            rel_errors: rows.iter().map(|r| r.rel_err).collect(),
        }
    }
}

impl Trend {
    /// Keep the three largest sizes.
    pub fn last_three(&self) -> Trend {
        let k = self.sizes.len().saturating_sub(3);
        Trend {
            tuple: self.tuple.clone(),
            sizes: self.sizes[k..].to_vec(),
            values: self.values[k..].to_vec(),
            rel_errors: self.rel_errors[k..].to_vec(),
        }
    }

    pub fn strictly_decreasing(&self) -> bool {
        let e: Option<Vec<f64>> = self.rel_errors.iter().copied().collect();
        e.is_some_and(|e| e.len() >= 2 && e.windows(2).all(|w| w[1] < w[0]))
    }
}

/// Nearest inner dual node to each point, distinct across the tuple.
fn snap(t: &TEmbedding, points: &[[C64; 2]]) -> Result<Vec<[usize; 2]>> {
    let mut used = HashSet::new();
    let mut out = Vec::new();
    for pr in points {
        let mut ends = [0; 2];
        for (r, z) in pr.iter().enumerate() {
            let v = (0..t.dual.n_inner())
                .filter(|v| !used.contains(v))
                .min_by(|&a, &b| (t.t[a] - z).norm().total_cmp(&(t.t[b] - z).norm()))
                .ok_or_else(|| Error::Input("no inner node left to snap to".into()))?;
            used.insert(v);
            ends[r] = v;
        }
        out.push(ends);
    }
    Ok(out)
}

/// Vertex-disjoint near-geodesic paths, routed in `order`; each avoids
/// the paths already routed and every endpoint of the other pairs.
fn route(dual: &AugmentedDual, t: &TEmbedding, ends: &[[usize; 2]], order: &[usize]) -> Result<Vec<DualPath>> {
    let mut taken: HashSet<usize> = HashSet::new();
    let mut paths: Vec<Option<DualPath>> = vec![None; ends.len()];
    for &k in order {
        let mut banned = taken.clone();
        for (j, e) in ends.iter().enumerate() {
            if j != k {
                banned.extend(e.iter().copied());
            }
        }
        let p = shortest_dual_path(dual, ends[k][0], ends[k][1], &banned, |u, v| (t.t[u] - t.t[v]).norm())?;
        taken.extend(p.nodes.iter().copied());
        paths[k] = Some(p);
    }
    Ok(paths.into_iter().map(|p| p.unwrap()).collect())
}

/// `pi^{-n/2} sum_r (-1)^{|r|} G_n(zeta_{1, r_1}, ..., zeta_{n, r_n})`.
pub fn continuum_target(zeta: &[[C64; 2]]) -> Result<f64> {
    let n = zeta.len();
    let mut total = 0.0;
    for mask in 0..(1usize << n) {
        let pts: Vec<C64> = (0..n).map(|k| zeta[k][(mask >> k) & 1]).collect();
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * gff_npoint(&pts)?;
    }
    Ok(total * PI.powf(-(n as f64) / 2.0))
}

/// Discrete alternating sum of one tuple on one embedding.
#[derive(Clone, Debug)]
pub struct DiscreteSum {
    pub ends: Vec<[usize; 2]>,
    pub paths: Vec<DualPath>,
    pub value: C64,
    pub reroute_delta: Option<f64>,
}

pub fn discrete_alternating_sum(inst: &Instance, tuple: &PointTuple) -> Result<DiscreteSum> {
    let t = inst.t();
    let g = inst.graph();
    let ends = snap(t, &tuple.points())?;
    let order: Vec<usize> = (0..ends.len()).collect();
    let paths = route(&inst.dual, t, &ends, &order)?;
    let value = correlation_gradient(g, &inst.ctx.k, &inst.ctx.kinv, &paths)?;
    let reversed: Vec<usize> = order.iter().rev().copied().collect();
    let reroute_delta = route(&inst.dual, t, &ends, &reversed)
        .and_then(|p| Ok(correlation_gradient(g, &inst.ctx.k, &inst.ctx.kinv, &p)?))
        .ok()
        .map(|v| (v - value).norm());
    Ok(DiscreteSum {
        ends,
        paths,
        value,
        reroute_delta,
    })
}

fn row(inst: &Instance, inv: &Inverter, tuple: &PointTuple) -> Result<ConvergenceRow> {
    let start = Instant::now();
    let t = inst.t();
    let DiscreteSum {
        ends,
        paths,
        value,
        reroute_delta,
    } = discrete_alternating_sum(inst, tuple)?;
    let zeta: Vec<[C64; 2]> = ends
        .iter()
        .map(|e| -> Result<[C64; 2]> {
            Ok([inv.invert(t.t[e[0]])?, inv.invert(t.t[e[1]])?])
        })
        .collect::<Result<_>>()?;
    let target = continuum_target(&zeta)?;
    let abs_err = (value.re - target).abs();
    Ok(ConvergenceRow {
        tuple: tuple.name.clone(),
        n: ends.len(),
        m: inst.m,
        discrete: value.re,
        discrete_imag: value.im,
        target,
        abs_err,
        rel_err: (target != 0.0).then(|| abs_err / target.abs()),
        reroute_delta,
        path_steps: paths.iter().map(|p| p.steps.len()).collect(),
        snapped: ends.iter().map(|e| [pair(t.t[e[0]]), pair(t.t[e[1]])]).collect(),
        zeta: zeta.iter().map(|z| [pair(z[0]), pair(z[1])]).collect(),
        verified: inst.verdict.conclusion_holds,
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

fn summary(inst: &Instance, map: &dyn SurfaceMap, inv: &Inverter, build_s: f64) -> SizeSummary {
    let t = inst.t();
    let o = &inst.ctx.o.o;
    let mut gap = 0.0f64;
    let mut imag = 0.0f64;
    for v in 0..t.dual.n_nodes() {
        imag = imag.max(o[v].im.abs());
        let z = t.t[v];
        if v < t.dual.n_inner() && z.re.abs() + z.im.abs() <= 1.2 {
            if let Ok(zeta) = inv.invert(z) {
                gap = gap.max((o[v].re - map.theta(zeta)).abs());
            }
        }
    }
    SizeSummary {
        m: inst.m,
        vertices: inst.graph().n_vertices(),
        dual_nodes: t.dual.n_nodes(),
        verified: inst.verdict.conclusion_holds,
        hyperboloid_max: inst.verdict.hyperboloid_max,
        gauge_evaluations: inst.solution.evaluations,
        gauge_restarts: inst.solution.restarts_used,
        origami_gap: gap,
        max_imag_origami: imag,
        build_s,
    }
}

fn fits(rows: &[ConvergenceRow], tuples: &[PointTuple]) -> Vec<FittedConstant> {
    tuples
        .iter()
        .filter_map(|t| {
            let rs: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.tuple == t.name && r.verified).collect();
            let den: f64 = rs.iter().map(|r| r.target * r.target).sum();
            if rs.is_empty() || den == 0.0 {
                return None;
            }
            let c = rs.iter().map(|r| r.discrete * r.target).sum::<f64>() / den;
            Some(FittedConstant {
                tuple: t.name.clone(),
                constant: c,
                rel_err_fitted: rs
                    .iter()
                    .map(|r| (r.discrete - c * r.target).abs() / (c * r.target).abs())
                    .collect(),
            })
        })
        .collect()
}

/// One job per size; sizes that fail are recorded and skipped.
pub fn run_convergence_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRun> {
    cfg.validate().map_err(LabError::Config)?;
    let param = plateau_solve(&cfg.xi(), &cfg.mesh)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| LabError::Config(e.to_string()))?;
    let built: Vec<(usize, Result<Instance>, f64)> = pool.install(|| {
        cfg.sizes
            .par_iter()
            .map(|&m| {
                let start = Instant::now();
                let inst = Instance::build(cfg.family, m, &cfg.solver, cfg.seed);
                (m, inst, start.elapsed().as_secs_f64())
            })
            .collect()
    });
    let map = param.map();
    let inv = Inverter::new(map, 32, 128);
    let mut rows = Vec::new();
    let mut sizes = Vec::new();
    let mut failures = Vec::new();
    let mut instances = Vec::new();
    for (m, inst, build_s) in built {
        let inst = match inst {
            Ok(i) => i,
            Err(e) => {
                failures.push(SizeFailure { m, reason: e.to_string() });
                continue;
            }
        };
        sizes.push(summary(&inst, map, &inv, build_s));
        for tuple in &cfg.tuples {
            match row(&inst, &inv, tuple) {
                Ok(r) => rows.push(r),
                Err(e) => failures.push(SizeFailure {
                    m,
                    reason: format!("tuple {}: {e}", tuple.name),
                }),
            }
        }
        instances.push(inst);
    }
    let fits = fits(&rows, &cfg.tuples);
    Ok(ExperimentRun {
        result: ExperimentResult {
            rows,
            sizes,
            failures,
            fits,
            surface: param.report.clone(),
        },
        instances,
        param,
    })
}
