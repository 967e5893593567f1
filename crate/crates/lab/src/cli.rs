//! Command line front end.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use tembed_core::domain::XiFunction;
use tembed_core::embedding::{EmbeddingJson, TEmbedding};
use tembed_core::gauge::verify_gauge_embedding;
use tembed_core::graph::{BipartiteDimerGraph, GraphJson};
use tembed_core::dual::AugmentedDual;
use tembed_core::kasteleyn::{assign_kasteleyn_signs, invert, log_abs_det, matrix_csv, to_complex};
use tembed_core::C64;
use tembed_surface::invert::Inverter;
use tembed_surface::plateau::{plateau_solve, verify_spacelike};

use crate::config::ExperimentConfig;
use crate::error::{LabError, Result};
use crate::experiment::{discrete_alternating_sum, run_convergence_experiment, ExperimentRun};
use crate::pipeline::{Family, Instance};
use crate::report::{convergence_csv, emit_reports, ReportInput};
use crate::residue::{residue_diagnostic, ResidueReport};

#[derive(Debug, Parser)]
#[command(name = "tembed", version, about = "Perfect t-embeddings of dimer graphs and height-gradient correlations")]
pub struct Cli {
    /// Experiment configuration (JSON); missing fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for the size jobs; 0 picks the number of cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Graph generators.
    Graph {
        #[command(subcommand)]
        action: GraphCommand,
    },
    /// Solve the perfect Coulomb gauge and write the embedding.
    GaugeSolve {
        #[arg(long, value_enum)]
        family: Option<Family>,
        #[arg(long)]
        m: usize,
    },
    /// Re-verify a written embedding against its graph.
    CheckEmbedding {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        embedding: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Kasteleyn matrix operations.
    Kasteleyn {
        #[command(subcommand)]
        action: KasteleynCommand,
    },
    /// Discrete alternating sums of the configured tuples at one size.
    Correlations {
        #[arg(long)]
        m: usize,
    },
    /// Conformal parametrization of the maximal surface over a profile.
    SurfaceSolve {
        /// `aztec`, `flat` or a JSON file with `phi` and `xi` knots.
        #[arg(long, default_value = "aztec")]
        xi: String,
        #[arg(long)]
        mesh: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Run the convergence experiment and the residue diagnostic.
    GffCompare,
    /// Everything `gff-compare` does, plus all tables and figures.
    Report,
}

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    Gen {
        #[arg(long, value_enum, default_value = "aztec")]
        family: Family,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum KasteleynCommand {
    /// Sign the graph, invert the real Kasteleyn matrix and write `K^{-1}`.
    Invert {
        #[arg(long)]
        graph: PathBuf,
    },
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Aztec => "aztec",
        Family::ReducedAztec => "reduced-aztec",
        Family::Prism => "prism",
    }
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn read_graph(path: &Path) -> Result<BipartiteDimerGraph> {
    let j: GraphJson = serde_json::from_str(&fs::read_to_string(path)?)?;
    Ok(BipartiteDimerGraph::from_json(&j)?)
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = match &cli.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    Ok(cfg)
}

fn parse_xi(arg: &str) -> Result<XiFunction> {
    match arg {
        "aztec" => Ok(XiFunction::aztec()),
        "flat" => Ok(XiFunction::flat()),
        path => {
            let xi: XiFunction = serde_json::from_str(&fs::read_to_string(path)?)?;
            Ok(XiFunction::new(xi.phi, xi.xi)?)
        }
    }
}

/// Residue diagnostic on the largest verified size.
pub fn largest_residue(run: &ExperimentRun, cfg: &ExperimentConfig) -> Option<Result<ResidueReport>> {
    let inst = run.instances.iter().filter(|i| i.verdict.conclusion_holds).max_by_key(|i| i.m)?;
    let map = run.param.map();
    let inv = Inverter::new(map, 32, 128);
    Some(residue_diagnostic(inst, map, &inv, &cfg.residue))
}

fn print_rows(run: &ExperimentRun) {
    println!("{:<16} {:>2} {:>4} {:>13} {:>13} {:>10}", "tuple", "n", "m", "discrete", "target", "rel_err");
    for r in &run.result.rows {
        let rel = r.rel_err.map(|e| format!("{e:.4}")).unwrap_or_else(|| "-".into());
        println!("{:<16} {:>2} {:>4} {:>13.6e} {:>13.6e} {:>10}", r.tuple, r.n, r.m, r.discrete, r.target, rel);
    }
    for f in &run.result.failures {
        println!("size m = {} failed: {}", f.m, f.reason);
    }
}

fn print_residue(r: &ResidueReport) {
    println!(
        "residue m = {}: |c| = {:.4} (2/pi = {:.4}, dev {:.3}), arg c = {:.3}, max|psi-+| = {:.3}, {} samples",
        r.m,
        r.c_abs,
        r.c_target,
        r.c_rel_dev,
        r.c_phase,
        r.psi_mp_max,
        r.samples.len()
    );
}

#[derive(Serialize)]
struct GaugeOutput<'a> {
    family: Family,
    m: usize,
    hyperboloid_max: f64,
    restarts_used: usize,
    evaluations: usize,
    verdict: &'a tembed_core::gauge::GaugeEmbeddingReport,
}

#[derive(Serialize)]
struct CheckOutput {
    gauge_embedding: tembed_core::gauge::GaugeEmbeddingReport,
    proper: tembed_core::embedding::ProperReport,
    perfect: tembed_core::embedding::PerfectReport,
}

#[derive(Serialize)]
struct KasteleynOutput {
    log_abs_det: f64,
    inverse_residual: f64,
    sign_products_ok: bool,
}

#[derive(Serialize)]
struct CorrelationOutput {
    tuple: String,
    m: usize,
    real: f64,
    imag: f64,
    reroute_delta: Option<f64>,
    path_steps: Vec<usize>,
}

#[derive(Serialize)]
struct SurfaceOutput {
    report: tembed_surface::plateau::PlateauReport,
    spacelike: Option<tembed_surface::plateau::SpacelikeReport>,
    spacelike_error: Option<String>,
    jump_points: Option<Vec<f64>>,
}

pub fn run(cli: Cli) -> Result<()> {
    let out = cli.out.clone();
    fs::create_dir_all(&out)?;
    match &cli.command {
        Command::Graph {
            action: GraphCommand::Gen { family, m },
        } => {
            let g = family.build(*m)?;
            println!("{} m = {m}: {} vertices, {} edges", family_name(*family), g.n_vertices(), g.n_edges());
            write_json(&out.join(format!("graph_{}_m{m}.json", family_name(*family))), &g.to_json())?;
        }
        Command::GaugeSolve { family, m } => {
            let cfg = load_config(&cli)?;
            let family = family.unwrap_or(cfg.family);
            let inst = Instance::build(family, *m, &cfg.solver, cfg.seed)?;
            let stem = format!("{}_m{m}", family_name(family));
            write_json(&out.join(format!("graph_{stem}.json")), &inst.graph().to_json())?;
            let emb = EmbeddingJson::new(inst.t(), &inst.ctx.eta, &inst.ctx.o, inst.verdict.boundary.as_ref());
            write_json(&out.join(format!("embedding_{stem}.json")), &emb)?;
            let verdict = GaugeOutput {
                family,
                m: *m,
                hyperboloid_max: inst.solution.hyperboloid_max,
                restarts_used: inst.solution.restarts_used,
                evaluations: inst.solution.evaluations,
                verdict: &inst.verdict,
            };
            write_json(&out.join(format!("gauge_{stem}.json")), &verdict)?;
            println!("verified: {}", inst.verdict.conclusion_holds);
        }
        Command::CheckEmbedding { graph, embedding, tol } => {
            let g = read_graph(graph)?;
            let emb: EmbeddingJson = serde_json::from_str(&fs::read_to_string(embedding)?)?;
            let dual = AugmentedDual::build(g)?;
            let t = TEmbedding::new(dual, emb.positions())?;
            let o: Vec<C64> = emb.origami.iter().map(|p| C64::new(p[0], p[1])).collect();
            let report = CheckOutput {
                gauge_embedding: verify_gauge_embedding(&t, &o, *tol),
                proper: t.check_proper(*tol),
                perfect: t.check_perfect(*tol),
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.gauge_embedding.conclusion_holds {
                return Err(LabError::Config("embedding failed verification".into()));
            }
        }
        Command::Kasteleyn {
            action: KasteleynCommand::Invert { graph },
        } => {
            let g = read_graph(graph)?;
            let signs = assign_kasteleyn_signs(&g)?;
            let k = to_complex(&signs.matrix);
            let kinv = invert(&k)?;
            let summary = KasteleynOutput {
                log_abs_det: log_abs_det(&k),
                inverse_residual: kinv.residual,
                sign_products_ok: tembed_core::kasteleyn::sign_violations(&g, &signs.signs).is_empty(),
            };
            let p = out.join("kasteleyn_inverse.csv");
            fs::write(&p, matrix_csv(&kinv.matrix))?;
            println!("wrote {}", p.display());
            write_json(&out.join("kasteleyn.json"), &summary)?;
        }
        Command::Correlations { m } => {
            let cfg = load_config(&cli)?;
            let inst = Instance::build(cfg.family, *m, &cfg.solver, cfg.seed)?;
            let mut rows = Vec::new();
            for tuple in &cfg.tuples {
                let s = discrete_alternating_sum(&inst, tuple)?;
                println!("{:<16} {:>13.6e} (imag {:.1e})", tuple.name, s.value.re, s.value.im);
                rows.push(CorrelationOutput {
                    tuple: tuple.name.clone(),
                    m: *m,
                    real: s.value.re,
                    imag: s.value.im,
                    reroute_delta: s.reroute_delta,
                    path_steps: s.paths.iter().map(|p| p.steps.len()).collect(),
                });
            }
            write_json(&out.join(format!("correlations_m{m}.json")), &rows)?;
        }
        Command::SurfaceSolve { xi, mesh, tol } => {
            let cfg = load_config(&cli)?;
            let mut mc = cfg.mesh.clone();
            if let Some(n) = mesh {
                mc.n = *n;
            }
            if let Some(t) = tol {
                mc.tol = *t;
            }
            let param = plateau_solve(&parse_xi(xi)?, &mc)?;
            let sl = verify_spacelike(param.map(), mc.collar, mc.radial, mc.angular);
            let r = &param.report;
            println!(
                "mesh {}: conformality L2 {:.3e} (normalized {:.3e}), boundary hyperboloid {:.1e}",
                r.n, r.conformality.l2, r.conformality.l2_normalized, r.boundary_hyperboloid
            );
            if let Some(w) = &r.warning {
                println!("warning: {w}");
            }
            let output = SurfaceOutput {
                report: param.report.clone(),
                spacelike_error: sl.as_ref().err().map(|e| e.to_string()),
                spacelike: sl.ok(),
                jump_points: param.exact.as_ref().map(|p| p.theta.clone()),
            };
            write_json(&out.join("surface.json"), &output)?;
        }
        Command::GffCompare | Command::Report => {
            let cfg = load_config(&cli)?;
            let run = run_convergence_experiment(&cfg)?;
            print_rows(&run);
            let residue: Vec<ResidueReport> = match largest_residue(&run, &cfg) {
                Some(Ok(r)) => {
                    print_residue(&r);
                    vec![r]
                }
                Some(Err(e)) => {
                    println!("residue diagnostic failed: {e}");
                    vec![]
                }
                None => vec![],
            };
            if matches!(cli.command, Command::Report) {
                let input = ReportInput {
                    result: &run.result,
                    instances: &run.instances,
                    map: run.param.map(),
                    residue: &residue,
                };
                let files = emit_reports(&input, &out)?;
                println!("wrote {} files to {}", files.len(), out.display());
            } else {
                let p = out.join("convergence.csv");
                fs::write(&p, convergence_csv(&run.result.rows)?)?;
                println!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}
