use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use clap::Parser;
use proptest::prelude::*;
use tembed_core::C64;
use tembed_lab::cli::{Cli, Command};
use tembed_lab::config::{ExperimentConfig, PointTuple};
use tembed_lab::experiment::{continuum_target, run_convergence_experiment};
use tembed_lab::report::{emit_reports, ReportInput};

fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.sizes = vec![4, 6];
    cfg.mesh.n = 64;
    cfg
}

fn emit(cfg: &ExperimentConfig, dir: &Path) -> Vec<String> {
    let run = run_convergence_experiment(cfg).unwrap();
    let input = ReportInput {
        result: &run.result,
        instances: &run.instances,
        map: run.param.map(),
        residue: &[],
    };
    let files = emit_reports(&input, dir).unwrap();
    files
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect()
}

fn contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timings.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}

#[test]
fn single_pair_gives_zero_on_both_sides() {
    let mut cfg = small_config();
    cfg.tuples = vec![PointTuple {
        name: "one".into(),
        pairs: vec![[[-0.3, -0.2], [0.4, 0.3]]],
    }];
    let run = run_convergence_experiment(&cfg).unwrap();
    assert_eq!(run.result.rows.len(), 2);
    for r in &run.result.rows {
        assert!(r.discrete.abs() < 1e-12 && r.discrete_imag.abs() < 1e-12, "{r:?}");
        assert_eq!(r.target, 0.0);
        assert!(r.rel_err.is_none());
    }
    assert_eq!(
        continuum_target(&[[C64::new(0.1, 0.2), C64::new(-0.3, 0.0)]]).unwrap(),
        0.0
    );
}

#[test]
fn reruns_are_byte_identical_and_complete() {
    let base = std::env::temp_dir().join(format!("tembed-lab-{}", std::process::id()));
    let (a, b) = (base.join("a"), base.join("b"));
    let mut cfg = small_config();
    cfg.threads = 1;
    let names = emit(&cfg, &a);
    cfg.threads = 3;
    emit(&cfg, &b);
    let (ca, cb) = (contents(&a), contents(&b));
    assert_eq!(ca.keys().collect::<Vec<_>>(), cb.keys().collect::<Vec<_>>());
    for (k, v) in &ca {
        assert!(v == &cb[k], "{k} differs between runs");
    }
    for m in [4, 6] {
        let svgs = ["embedding", "origami", "tgraph"].map(|s| format!("{s}_m{m}.svg"));
        let csvs = ["nodes", "points"].map(|s| format!("{s}_m{m}.csv"));
        for f in svgs.iter().chain(&csvs) {
            assert!(names.contains(f), "missing {f}");
        }
    }
    for f in ["convergence.csv", "error_vs_m.svg", "verdicts.json", "timings.json"] {
        assert!(names.contains(&f.to_string()), "missing {f}");
    }
    let conv = String::from_utf8(ca["convergence.csv"].clone()).unwrap();
    assert_eq!(conv.lines().count(), 1 + 2 * cfg.tuples.len());
    fs::remove_dir_all(&base).unwrap();
}

#[test]
fn rows_carry_verdicts_and_reroute_witnesses() {
    let run = run_convergence_experiment(&small_config()).unwrap();
    assert!(run.result.failures.is_empty(), "{:?}", run.result.failures);
    for r in &run.result.rows {
        assert!(r.verified);
        assert!(r.discrete_imag.abs() < 1e-8);
        assert!(r.reroute_delta.is_some_and(|d| d < 1e-10), "{r:?}");
        assert!(r.path_steps.iter().all(|&s| s > 0));
    }
    for s in &run.result.sizes {
        assert!(s.hyperboloid_max < 1e-8);
    }
}

#[test]
fn invalid_tuples_are_rejected() {
    let bad = |pairs: Vec<[[f64; 2]; 2]>| {
        let mut cfg = ExperimentConfig::default();
        cfg.tuples = vec![PointTuple { name: "bad".into(), pairs }];
        cfg.validate()
    };
    assert!(bad(vec![[[0.0, 0.0], [0.0, 0.0]]]).is_err());
    assert!(bad(vec![[[0.0, 0.0], [1.2, 0.0]]]).is_err());
    assert!(bad(vec![[[0.0, 0.0], [3.0, 0.0]]]).is_err());
    assert!(bad(vec![[[0.0, 0.0], [0.2, 0.1]]]).is_ok());
    let mut cfg = ExperimentConfig::default();
    cfg.family = tembed_lab::pipeline::Family::Prism;
    assert!(cfg.validate().is_err());
}

#[test]
fn config_fields_are_optional() {
    let cfg: ExperimentConfig = serde_json::from_str(r#"{"sizes": [4], "seed": 3}"#).unwrap();
    assert_eq!(cfg.sizes, vec![4]);
    assert_eq!(cfg.seed, 3);
    assert_eq!(cfg.tuples.len(), ExperimentConfig::default().tuples.len());
    assert_eq!(cfg.mesh.n, 256);
}

#[test]
fn command_line_parses() {
    let c = Cli::try_parse_from(["tembed", "--seed", "4", "--out", "x", "surface-solve", "--mesh", "128"]).unwrap();
    assert_eq!(c.seed, Some(4));
    assert!(matches!(c.command, Command::SurfaceSolve { mesh: Some(128), .. }));
    let c = Cli::try_parse_from(["tembed", "graph", "gen", "--family", "reduced-aztec", "--m", "5"]).unwrap();
    assert!(matches!(c.command, Command::Graph { .. }));
    assert!(Cli::try_parse_from(["tembed", "kasteleyn", "invert"]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn target_flips_with_orientation_and_ignores_pair_order(
        a in (-0.7..0.7f64, -0.7..0.7f64), b in (-0.7..0.7f64, -0.7..0.7f64),
        c in (-0.7..0.7f64, -0.7..0.7f64), d in (-0.7..0.7f64, -0.7..0.7f64),
    ) {
        let z = |p: (f64, f64)| C64::new(p.0, p.1);
        let pts = [z(a), z(b), z(c), z(d)];
        for i in 0..4 {
            for j in i + 1..4 {
                prop_assume!((pts[i] - pts[j]).norm() > 1e-3);
            }
        }
        let t = continuum_target(&[[pts[0], pts[1]], [pts[2], pts[3]]]).unwrap();
        let flipped = continuum_target(&[[pts[1], pts[0]], [pts[2], pts[3]]]).unwrap();
        let swapped = continuum_target(&[[pts[2], pts[3]], [pts[0], pts[1]]]).unwrap();
        prop_assert!((t + flipped).abs() < 1e-12 * (1.0 + t.abs()));
        prop_assert!((t - swapped).abs() < 1e-12 * (1.0 + t.abs()));
    }
}
