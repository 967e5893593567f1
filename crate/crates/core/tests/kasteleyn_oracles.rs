use std::collections::HashSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tembed_core::dual::{height_function, AugmentedDual};
use tembed_core::families::{aztec_diamond, prism, reduced_aztec_diamond};
use tembed_core::graph::BipartiteDimerGraph;
use tembed_core::kasteleyn::*;
use tembed_core::C64;

fn grid_2x3() -> BipartiteDimerGraph {
    use tembed_core::graph::{Color, Edge};
    let pos: Vec<(f64, f64)> = (0..6).map(|i| ((i % 3) as f64, (i / 3) as f64)).collect();
    let colors: Vec<Color> = (0..6)
        .map(|i| {
            if (i % 3 + i / 3) % 2 == 0 {
                Color::Black
            } else {
                Color::White
            }
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..6usize {
        let (x, y) = (i % 3, i / 3);
        let mut nb = vec![];
        if x < 2 {
            nb.push(i + 1);
        }
        if y < 1 {
            nb.push(i + 3);
        }
        for j in nb {
            let (b, w) = if colors[i] == Color::Black {
                (i, j)
            } else {
                (j, i)
            };
            edges.push(Edge {
                black: b,
                white: w,
                weight: 1.0,
            });
        }
    }
    tembed_core::families::from_positions(colors, edges, &pos).unwrap()
}

fn small_graphs() -> Vec<BipartiteDimerGraph> {
    let mut out = vec![aztec_diamond(1).unwrap(), prism(4).unwrap(), grid_2x3()];
    for m in 2..=3 {
        let g = reduced_aztec_diamond(m).unwrap();
        if g.n_edges() <= 12 {
            out.push(g);
        }
    }
    out
}

fn randomize(g: &BipartiteDimerGraph, rng: &mut ChaCha8Rng) -> BipartiteDimerGraph {
    let w: Vec<f64> = (0..g.n_edges())
        .map(|_| rng.random_range(0.3..3.0))
        .collect();
    g.with_weights(&w).unwrap()
}

fn disjoint_subsets(g: &BipartiteDimerGraph) -> Vec<Vec<usize>> {
    let n = g.n_edges();
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let edges: Vec<usize> = (0..n).filter(|&e| mask >> e & 1 == 1).collect();
        let mut hit = HashSet::new();
        if edges
            .iter()
            .all(|&e| hit.insert(g.edge(e).black) && hit.insert(g.edge(e).white))
        {
            out.push(edges);
        }
    }
    out
}

#[test]
fn probabilities_match_enumeration_on_small_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for g0 in small_graphs() {
        assert!(g0.n_edges() <= 12);
        for trial in 0..3 {
            let g = if trial == 0 {
                g0.clone()
            } else {
                randomize(&g0, &mut rng)
            };
            let k = to_complex(&assign_kasteleyn_signs(&g).unwrap().matrix);
            let kinv = invert(&k).unwrap();
            let covers = g.enumerate_dimer_covers(24).unwrap();
            let masks: Vec<Vec<bool>> = covers.iter().map(|c| c.mask(g.n_edges())).collect();
            let wts: Vec<f64> = covers.iter().map(|c| g.cover_weight(c)).collect();
            let z: f64 = wts.iter().sum();
            for s in disjoint_subsets(&g) {
                let exact: f64 = masks
                    .iter()
                    .zip(&wts)
                    .filter(|(m, _)| s.iter().all(|&e| m[e]))
                    .map(|(_, w)| w)
                    .sum::<f64>()
                    / z;
                let p = joint_edge_probability(&g, &k, &kinv, &s).unwrap();
                worst = worst.max((p.re - exact).abs()).max(p.im.abs());
            }
        }
    }
    assert!(worst < 1e-10, "worst {worst}");
}

#[test]
fn probability_examples() {
    let g = aztec_diamond(1).unwrap();
    let k = to_complex(&assign_kasteleyn_signs(&g).unwrap().matrix);
    let kinv = invert(&k).unwrap();
    assert!(kinv.residual < 1e-12);
    let p0 = joint_edge_probability(&g, &k, &kinv, &[]).unwrap();
    assert_eq!(p0, C64::new(1.0, 0.0));
    for e in 0..4 {
        let p = joint_edge_probability(&g, &k, &kinv, &[e]).unwrap();
        assert!((p.re - 0.5).abs() < 1e-12);
    }
    // edges sharing a vertex are rejected
    let e0 = g.rotation(0)[0];
    let e1 = g.rotation(0)[1];
    assert!(joint_edge_probability(&g, &k, &kinv, &[e0, e1]).is_err());
}

#[test]
fn partition_function_examples() {
    let one = nalgebra::DMatrix::from_element(1, 1, C64::new(4.0, 0.0));
    assert!((invert(&one).unwrap().matrix[(0, 0)] - C64::new(0.25, 0.0)).norm() < 1e-15);
    let zero = nalgebra::DMatrix::<C64>::zeros(2, 2);
    assert_eq!(partition_function(&zero), 0.0);
    assert!(invert(&zero).is_err());
    let g = aztec_diamond(2).unwrap();
    let k = assign_kasteleyn_signs(&g).unwrap();
    let z = partition_function(&to_complex(&k.matrix));
    assert!((z - 8.0).abs() < 1e-9);
    let c = 1.7;
    let scaled = to_complex(&(k.matrix.clone() * c));
    let zc = partition_function(&scaled);
    assert!((zc / (z * c.powi(g.black_vertices().len() as i32)) - 1.0).abs() < 1e-12);
}

#[test]
fn permuted_identity_inverts_to_its_transpose() {
    let mut p = nalgebra::DMatrix::<C64>::zeros(3, 3);
    p[(0, 2)] = C64::new(1.0, 0.0);
    p[(1, 0)] = C64::new(1.0, 0.0);
    p[(2, 1)] = C64::new(1.0, 0.0);
    let inv = invert(&p).unwrap();
    assert!((inv.matrix.clone() - p.transpose()).norm() < 1e-15);
}

fn enumerated_moment(
    g: &BipartiteDimerGraph,
    dual: &AugmentedDual,
    pairs: &[(usize, usize)],
) -> f64 {
    let covers = g.enumerate_dimer_covers(usize::MAX).unwrap();
    let wts: Vec<f64> = covers.iter().map(|c| g.cover_weight(c)).collect();
    let z: f64 = wts.iter().sum();
    let root = dual.boundary_node(0);
    let xs: Vec<Vec<f64>> = covers
        .iter()
        .map(|c| {
            let h = height_function(c, &covers[0], dual, root).unwrap();
            pairs
                .iter()
                .map(|&(a, b)| (h.values[b] - h.values[a]) as f64)
                .collect()
        })
        .collect();
    let means: Vec<f64> = (0..pairs.len())
        .map(|k| xs.iter().zip(&wts).map(|(x, w)| x[k] * w).sum::<f64>() / z)
        .collect();
    xs.iter()
        .zip(&wts)
        .map(|(x, w)| w * x.iter().zip(&means).map(|(a, m)| a - m).product::<f64>())
        .sum::<f64>()
        / z
}

fn disjoint_paths(dual: &AugmentedDual, pairs: &[(usize, usize)]) -> Option<Vec<DualPath>> {
    let mut banned = HashSet::new();
    for &(a, b) in pairs {
        banned.insert(a);
        banned.insert(b);
    }
    let mut out = Vec::new();
    for &(a, b) in pairs {
        banned.remove(&a);
        banned.remove(&b);
        let p = shortest_dual_path(dual, a, b, &banned, |_, _| 1.0).ok()?;
        banned.extend(p.nodes.iter().copied());
        out.push(p);
    }
    Some(out)
}

fn check_correlations(g: BipartiteDimerGraph, n: usize, trials: usize, seed: u64) -> usize {
    let k = to_complex(&assign_kasteleyn_signs(&g).unwrap().matrix);
    let kinv = invert(&k).unwrap();
    let dual = AugmentedDual::build(g.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checked = 0;
    for _ in 0..trials {
        let mut nodes = HashSet::new();
        let mut pairs = Vec::new();
        while pairs.len() < n {
            let a = rng.random_range(0..dual.n_nodes());
            let b = rng.random_range(0..dual.n_nodes());
            if a != b && nodes.insert(a) {
                if nodes.insert(b) {
                    pairs.push((a, b));
                } else {
                    nodes.remove(&a);
                }
            }
        }
        let Some(paths) = disjoint_paths(&dual, &pairs) else {
            continue;
        };
        let formula = correlation_gradient(&g, &k, &kinv, &paths).unwrap();
        let exact = enumerated_moment(&g, &dual, &pairs);
        assert!(
            (formula.re - exact).abs() < 1e-10 && formula.im.abs() < 1e-10,
            "n={n} formula {formula} exact {exact}"
        );
        checked += 1;
    }
    checked
}

#[test]
fn two_point_correlation_matches_enumeration_on_aztec_2() {
    assert!(check_correlations(aztec_diamond(2).unwrap(), 2, 200, 1) > 10);
}

#[test]
fn two_and_three_point_correlations_match_enumeration_on_reduced_aztec_4() {
    let g = reduced_aztec_diamond(4).unwrap();
    assert!(check_correlations(g.clone(), 2, 30, 2) > 10);
    assert!(check_correlations(g, 3, 40, 3) > 5);
}

#[test]
fn three_point_correlation_matches_enumeration_on_aztec_3() {
    assert!(check_correlations(aztec_diamond(3).unwrap(), 3, 30, 4) > 5);
}

#[test]
fn one_point_correlation_vanishes() {
    let g = aztec_diamond(2).unwrap();
    let k = to_complex(&assign_kasteleyn_signs(&g).unwrap().matrix);
    let kinv = invert(&k).unwrap();
    let dual = AugmentedDual::build(g.clone()).unwrap();
    let p = shortest_dual_path(
        &dual,
        dual.boundary_node(0),
        dual.boundary_node(5),
        &HashSet::new(),
        |_, _| 1.0,
    )
    .unwrap();
    let c = correlation_gradient(&g, &k, &kinv, &[p]).unwrap();
    assert!(c.norm() < 1e-14);
}

#[test]
fn intersecting_paths_rejected() {
    let g = aztec_diamond(2).unwrap();
    let k = to_complex(&assign_kasteleyn_signs(&g).unwrap().matrix);
    let kinv = invert(&k).unwrap();
    let dual = AugmentedDual::build(g.clone()).unwrap();
    let p = shortest_dual_path(&dual, 0, 3, &HashSet::new(), |_, _| 1.0).unwrap();
    assert!(correlation_gradient(&g, &k, &kinv, &[p.clone(), p]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauge_covariance(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = randomize(&reduced_aztec_diamond(3).unwrap(), &mut rng);
        let k = to_complex(&assign_kasteleyn_signs(&g).unwrap().matrix);
        let gv: Vec<f64> = (0..g.n_vertices()).map(|_| rng.random_range(0.2..4.0)).collect();
        let kg = gauge_transform(&g, &k, &gv);
        let lz = log_abs_det(&k) + gv.iter().map(|x| x.ln()).sum::<f64>();
        prop_assert!((log_abs_det(&kg) - lz).abs() < 1e-10);
        let (ki, kgi) = (invert(&k).unwrap(), invert(&kg).unwrap());
        for e in 0..g.n_edges() {
            let p = joint_edge_probability(&g, &k, &ki, &[e]).unwrap();
            let q = joint_edge_probability(&g, &kg, &kgi, &[e]).unwrap();
            prop_assert!((p - q).norm() < 1e-10);
            prop_assert!(p.re > -1e-9 && p.re < 1.0 + 1e-9);
        }
    }

    #[test]
    fn path_independence_under_rerouting(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = randomize(&reduced_aztec_diamond(5).unwrap(), &mut rng);
        let k = to_complex(&assign_kasteleyn_signs(&g).unwrap().matrix);
        let kinv = invert(&k).unwrap();
        let dual = AugmentedDual::build(g.clone()).unwrap();
        let n = dual.n_inner();
        let (a, b, c, d) = (0, n / 3, n / 2, n - 1);
        prop_assume!(a != b && c != d && b != c);
        let banned: HashSet<usize> = [c, d].into_iter().collect();
        let Ok(p1) = shortest_dual_path(&dual, a, b, &banned, |_, _| 1.0) else { return Ok(()) };
        let mut ban2: HashSet<usize> = p1.nodes.iter().copied().collect();
        let Ok(p2) = shortest_dual_path(&dual, c, d, &ban2, |_, _| 1.0) else { return Ok(()) };
        // reroute the first path with random edge lengths
        ban2 = p2.nodes.iter().copied().collect();
        let lens: Vec<f64> = (0..dual.n_nodes() * dual.n_nodes().min(64)).map(|_| rng.random_range(0.5..2.0)).collect();
        let nn = dual.n_nodes().min(64);
        let Ok(q1) = shortest_dual_path(&dual, a, b, &ban2, |u, v| lens[(u % nn) * nn + v % nn]) else { return Ok(()) };
        let x = correlation_gradient(&g, &k, &kinv, &[p1, p2.clone()]).unwrap();
        let y = correlation_gradient(&g, &k, &kinv, &[q1, p2]).unwrap();
        prop_assert!((x - y).norm() < 1e-9);
    }

    #[test]
    fn determinant_is_the_weighted_cover_sum(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for g0 in [aztec_diamond(2).unwrap(), reduced_aztec_diamond(3).unwrap(), prism(6).unwrap()] {
            let g = randomize(&g0, &mut rng);
            let z: f64 = g.enumerate_dimer_covers(usize::MAX).unwrap().iter().map(|c| g.cover_weight(c)).sum();
            let k = to_complex(&assign_kasteleyn_signs(&g).unwrap().matrix);
            prop_assert!((partition_function(&k) - z).abs() < 1e-9 * z);
        }
    }
}
