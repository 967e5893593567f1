//! Graph -> perfect gauge -> verified embedding -> t-holomorphic context.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tembed_core::dual::AugmentedDual;
use tembed_core::embedding::TEmbedding;
use tembed_core::families::{aztec_diamond, prism, reduced_aztec_diamond};
use tembed_core::gauge::{solve_perfect_gauge, verify_gauge_embedding, GaugeInit, GaugeSolution, SolverConfig, GaugeEmbeddingReport};
use tembed_core::graph::BipartiteDimerGraph;
use tembed_core::kasteleyn::{assign_kasteleyn_signs, RealKasteleyn};
use tembed_core::tholo::HoloContext;
use tembed_core::Error;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Aztec,
    ReducedAztec,
    Prism,
}

impl Family {
    pub fn build(self, m: usize) -> tembed_core::Result<BipartiteDimerGraph> {
        match self {
            Family::Aztec => aztec_diamond(m),
            Family::ReducedAztec => reduced_aztec_diamond(m),
            Family::Prism => prism(m),
        }
    }

    /// Gauge start: the Aztec limit square for Aztec graphs, a regular
    /// tangential polygon otherwise.
    pub fn gauge_init(self, n_boundary: usize) -> GaugeInit {
        match self {
            Family::Aztec | Family::ReducedAztec if n_boundary == 4 => GaugeInit::Target {
                phi: (0..4).map(|k| k as f64 * FRAC_PI_2).collect(),
                xi: (0..4).map(|k| if k % 2 == 0 { -1.0 } else { 1.0 } * FRAC_PI_2 / 2.0).collect(),
            },
            _ => GaugeInit::Regular,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverSettings {
    pub tol: f64,
    pub restarts: usize,
    pub patience: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            tol: d.tol,
            restarts: d.restarts,
            patience: d.patience,
        }
    }
}

impl SolverSettings {
    pub fn config(&self, family: Family, n_boundary: usize, seed: u64) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            restarts: self.restarts,
            seed,
            patience: self.patience,
            init: family.gauge_init(n_boundary),
            pin: false,
        }
    }
}

pub struct Instance {
    pub family: Family,
    pub m: usize,
    pub signs: RealKasteleyn,
    pub dual: Arc<AugmentedDual>,
    pub solution: GaugeSolution,
    /// Independent re-check of the realized embedding.
    pub verdict: GaugeEmbeddingReport,
    pub ctx: HoloContext,
}

impl Instance {
    pub fn build(family: Family, m: usize, solver: &SolverSettings, seed: u64) -> Result<Self> {
        let g = family.build(m)?;
        let signs = assign_kasteleyn_signs(&g)?;
        let dual = AugmentedDual::build(g)?;
        let cfg = solver.config(family, dual.n_boundary(), seed);
        let solution = solve_perfect_gauge(&dual, &signs, &cfg).map_err(|e| match (family, m >= 2) {
            (Family::Aztec, true) => Error::NotPerfect(format!(
                "{e}; the plain Aztec diamond of order {m} has degree-2 boundary vertices and no perfect t-embedding, use reduced-aztec"
            )),
            _ => e,
        })?;
        let t = solution.embedding(&dual)?;
        let verdict = verify_gauge_embedding(&t, &solution.realization.o, 1e-8);
        if !verdict.conclusion_holds {
            return Err(Error::NotPerfect(format!("{family:?} m = {m}: embedding failed verification")).into());
        }
        let bd = verdict
            .boundary
            .clone()
            .ok_or_else(|| Error::NotPerfect("no boundary data".into()))?;
        let ctx = HoloContext::from_perfect(t, &bd, 1e-9)?;
        Ok(Self {
            family,
            m,
            signs,
            dual,
            solution,
            verdict,
            ctx,
        })
    }

    pub fn t(&self) -> &TEmbedding {
        &self.ctx.t
    }

    pub fn graph(&self) -> &BipartiteDimerGraph {
        self.dual.graph()
    }
}
