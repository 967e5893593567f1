use std::f64::consts::PI;

use tembed_core::dual::AugmentedDual;
use tembed_core::embedding::{compute_origami, compute_origami_sqrt, normalize_perfect_eta};
use tembed_core::families::{aztec_diamond, prism, reduced_aztec_diamond};
use tembed_core::gauge::{
    boost_point, coulomb_nullspace, gauge_from_embedding, hyperboloid_residual,
    maximum_principle_probe, realize, solve_perfect_gauge, verify_gauge_embedding, SolverConfig,
};
use tembed_core::graph::BipartiteDimerGraph;
use tembed_core::kasteleyn::assign_kasteleyn_signs;
use tembed_core::C64;

fn solve(
    g: BipartiteDimerGraph,
) -> (
    std::sync::Arc<AugmentedDual>,
    tembed_core::kasteleyn::RealKasteleyn,
    tembed_core::gauge::GaugeSolution,
) {
    let k = assign_kasteleyn_signs(&g).unwrap();
    let d = AugmentedDual::build(g).unwrap();
    let sol = solve_perfect_gauge(&d, &k, &SolverConfig::default()).unwrap();
    (d, k, sol)
}

#[test]
fn small_cases_are_perfect() {
    let cases = [
        ("four-cycle", aztec_diamond(1).unwrap()),
        ("cube", prism(4).unwrap()),
        ("reduced aztec 2", reduced_aztec_diamond(2).unwrap()),
        ("reduced aztec 3", reduced_aztec_diamond(3).unwrap()),
    ];
    for (name, g) in cases {
        let (d, _, sol) = solve(g);
        let v = &sol.verdict;
        assert!(v.pass && v.conclusion_holds, "{name}: {v:?}");
        assert!(sol.hyperboloid_max < 1e-8, "{name}");
        let bd = v.boundary.as_ref().unwrap();
        assert!(bd.angle_sum_residual < 1e-8, "{name}");
        assert!(bd.identity_residual < 1e-8, "{name}");
        assert_eq!(bd.o_sign, 1.0, "{name}");
        let t = sol.embedding(&d).unwrap();
        assert!(t.check_angle_condition(1e-9).pass, "{name}");
        let p = v.perfect.as_ref().unwrap();
        assert!(
            p.tangency_residual < 1e-8 && p.bisector_residual < 1e-8,
            "{name} {p:?}"
        );
    }
}

#[test]
fn nullspace_dimensions_match_boundary_faces() {
    for g in [
        aztec_diamond(1).unwrap(),
        aztec_diamond(2).unwrap(),
        prism(6).unwrap(),
    ] {
        let k = assign_kasteleyn_signs(&g).unwrap();
        let d = AugmentedDual::build(g).unwrap();
        let nb = coulomb_nullspace(&d, &k).unwrap();
        assert_eq!(nb.black.ncols(), d.n_boundary() / 2);
        assert_eq!(nb.white.ncols(), d.n_boundary() / 2);
    }
}

#[test]
fn origami_from_embedding_matches_gauge_origami() {
    let (d, k, sol) = solve(reduced_aztec_diamond(3).unwrap());
    let t = sol.embedding(&d).unwrap();
    let bd = sol.verdict.boundary.clone().unwrap();
    let eta = compute_origami_sqrt(&t, 1e-9).unwrap();
    let (eta, spread) = normalize_perfect_eta(&d, &eta, &bd);
    assert!(spread < 1e-8, "spread {spread}");
    let base = d.boundary_node(0);
    let o = compute_origami(&t, &eta, base, C64::new(bd.xi[0].tan(), 0.0), 1e-9).unwrap();
    for k in 0..d.n_boundary() {
        let v = d.boundary_node(k);
        assert!(
            (o.o[v] - C64::new(bd.xi[k].tan(), 0.0)).norm() < 1e-8,
            "k={k}"
        );
    }
    let dev =
        o.o.iter()
            .zip(&sol.realization.o)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
    assert!(dev < 1e-8, "origami maps differ by {dev}");
    let (gauge, resid) = gauge_from_embedding(&t, &eta, &k.matrix).unwrap();
    assert!(resid < 1e-9);
    let again = realize(&d, &k.matrix, &gauge, base, (t.t[base], o.o[base]), 1e-10).unwrap();
    let h = again
        .t
        .iter()
        .zip(&t.t)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(h < 1e-8);
}

#[test]
fn isometries_preserve_the_hyperboloid() {
    let (d, k, sol) = solve(prism(4).unwrap());
    let base = sol.realization.base;
    let (t0, o0) = (sol.realization.t[base], sol.realization.o[base]);
    let alpha = C64::from_polar(1.0, 0.7);
    let rot = realize(
        &d,
        &k.matrix,
        &sol.gauge.rotate(alpha),
        base,
        (alpha * alpha * t0, o0),
        1e-10,
    )
    .unwrap();
    let s = 0.4;
    let (bt, bo) = boost_point(t0, o0, s);
    let boosted = realize(&d, &k.matrix, &sol.gauge.boost(s), base, (bt, bo), 1e-10).unwrap();
    for r in [&rot, &boosted] {
        let h = hyperboloid_residual(&d, &r.t, &r.o);
        assert!(h.iter().all(|x| x.abs() < 1e-10), "{h:?}");
    }
    for v in 0..d.n_nodes() {
        let (x, y) = boost_point(sol.realization.t[v], sol.realization.o[v], s);
        assert!((boosted.t[v] - x).norm() < 1e-10 && (boosted.o[v] - y).norm() < 1e-10);
    }
    let lam = C64::new(0.3, -1.2);
    let scaled = realize(&d, &k.matrix, &sol.gauge.scale(lam), base, (t0, o0), 1e-10).unwrap();
    assert!(scaled
        .t
        .iter()
        .zip(&sol.realization.t)
        .all(|(a, b)| (a - b).norm() < 1e-10));
}

#[test]
fn negated_origami_and_reflection() {
    let (d, _, sol) = solve(reduced_aztec_diamond(2).unwrap());
    let t = sol.embedding(&d).unwrap();
    let neg: Vec<C64> = sol.realization.o.iter().map(|z| -z).collect();
    let v = verify_gauge_embedding(&t, &neg, 1e-8);
    assert!(v.pass && v.conclusion_holds);
    assert_eq!(v.boundary.unwrap().o_sign, -1.0);
    let refl =
        tembed_core::embedding::TEmbedding::new(d.clone(), t.t.iter().map(|z| z.conj()).collect())
            .unwrap();
    let v = verify_gauge_embedding(&refl, &sol.realization.o, 1e-8);
    assert!(!v.cond_winding && !v.pass);
}

#[test]
fn maximum_principle_on_projections() {
    let (d, k, sol) = solve(reduced_aztec_diamond(3).unwrap());
    let rep = maximum_principle_probe(
        &d,
        &k.matrix,
        &sol.gauge,
        C64::from_polar(1.0, 0.3),
        C64::from_polar(1.0, 1.1),
        7,
    );
    assert!(rep.violations.is_empty(), "{rep:?}");
    assert_eq!(rep.ball_failures, 0);
    // flipping one sign breaks the Kasteleyn condition
    let mut bad = k.matrix.clone();
    bad[(0, 0)] = -bad[(0, 0)];
    let mut any = false;
    for s in 0..8 {
        let a = C64::from_polar(1.0, 0.2 + s as f64);
        let rep =
            maximum_principle_probe(&d, &bad, &sol.gauge, a, a * C64::from_polar(1.0, 0.5), s);
        any |= !rep.violations.is_empty();
    }
    assert!(any);
    let _ = PI;
}
