use tembed_core::dual::{height_function, AugmentedDual};
use tembed_core::families::{aztec_diamond, prism, reduced_aztec_diamond};
use tembed_core::graph::{BipartiteDimerGraph, Color, Edge};
use tembed_core::kasteleyn::{
    assign_kasteleyn_signs, partition_function, sign_violations, to_complex,
};

fn four_cycle() -> BipartiteDimerGraph {
    aztec_diamond(1).unwrap()
}

#[test]
fn aztec_vertex_counts() {
    for (m, v) in [(1, 4), (2, 12), (3, 24), (4, 40)] {
        let g = aztec_diamond(m).unwrap();
        assert_eq!(g.n_vertices(), v);
        assert_eq!(g.n_vertices(), 2 * m * (m + 1));
    }
    assert_eq!(aztec_diamond(1).unwrap().n_edges(), 4);
}

#[test]
fn aztec_outer_degree() {
    for m in 1..=5 {
        let g = aztec_diamond(m).unwrap();
        let expect = if m == 1 { 4 } else { 8 * m - 4 };
        assert_eq!(g.outer_degree(), expect, "m={m}");
    }
}

#[test]
fn cover_counts_match_frozen_values() {
    let frozen = [(1usize, 2usize), (2, 8), (3, 64)];
    for (m, n) in frozen {
        let g = aztec_diamond(m).unwrap();
        let covers = g.enumerate_dimer_covers(usize::MAX).unwrap();
        assert_eq!(covers.len(), n);
        let mut dedup = covers.clone();
        dedup.sort_by(|a, b| a.edges.cmp(&b.edges));
        dedup.dedup();
        assert_eq!(dedup.len(), n);
        assert!(covers.iter().all(|c| c.is_perfect_matching(&g)));
    }
    assert_eq!(four_cycle().enumerate_dimer_covers(24).unwrap().len(), 2);
}

#[test]
fn enumeration_cap_refuses() {
    let g = aztec_diamond(3).unwrap();
    assert!(g.enumerate_dimer_covers(24).is_err());
}

#[test]
fn reduced_aztec_preserves_partition_function() {
    for m in 1..=6 {
        let g = reduced_aztec_diamond(m).unwrap();
        assert_eq!(g.outer_degree(), 4, "m={m}");
        let k = assign_kasteleyn_signs(&g).unwrap();
        let z = partition_function(&to_complex(&k.matrix));
        let expect = 2f64.powi((m * (m + 1) / 2) as i32);
        assert!((z / expect - 1.0).abs() < 1e-9, "m={m} z={z}");
    }
    assert_eq!(reduced_aztec_diamond(3).unwrap().n_vertices(), 8);
    assert_eq!(reduced_aztec_diamond(4).unwrap().n_vertices(), 16);
}

#[test]
fn reduced_aztec_cover_weights_sum_to_z() {
    let g = reduced_aztec_diamond(4).unwrap();
    let covers = g.enumerate_dimer_covers(usize::MAX).unwrap();
    let z: f64 = covers.iter().map(|c| g.cover_weight(c)).sum();
    assert!((z - 1024.0).abs() < 1e-9);
}

#[test]
fn prism_boundaries() {
    let cube = prism(4).unwrap();
    assert_eq!(cube.outer_degree(), 4);
    let oct = prism(8).unwrap();
    let d = AugmentedDual::build(oct).unwrap();
    assert_eq!(d.n_boundary(), 8);
}

#[test]
fn sign_products_on_generated_graphs() {
    let graphs = [
        aztec_diamond(2).unwrap(),
        aztec_diamond(5).unwrap(),
        reduced_aztec_diamond(5).unwrap(),
        prism(4).unwrap(),
        prism(8).unwrap(),
    ];
    for g in &graphs {
        let k = assign_kasteleyn_signs(g).unwrap();
        assert!(sign_violations(g, &k.signs).is_empty());
    }
    // octagonal face: (-1)^(8/2-1) = -1
    let oct = prism(8).unwrap();
    let k = assign_kasteleyn_signs(&oct).unwrap();
    let f8 = (0..oct.n_faces())
        .find(|&f| f != oct.outer_face() && oct.faces()[f].len() == 8)
        .unwrap();
    let p: f64 = oct.faces()[f8].iter().map(|d| k.signs[d.edge]).product();
    assert_eq!(p, -1.0);
}

#[test]
fn hexagonal_face_has_positive_sign_product() {
    let g = prism(6).unwrap();
    let k = assign_kasteleyn_signs(&g).unwrap();
    let f6 = (0..g.n_faces())
        .find(|&f| f != g.outer_face() && g.faces()[f].len() == 6)
        .unwrap();
    let p: f64 = g.faces()[f6].iter().map(|d| k.signs[d.edge]).product();
    assert_eq!(p, 1.0);
}

#[test]
fn dual_of_four_cycle() {
    let d = AugmentedDual::build(four_cycle()).unwrap();
    assert_eq!(d.n_boundary(), 4);
    assert_eq!(d.n_inner(), 1);
    for k in 0..4 {
        assert_eq!(d.v_in(k), 0);
        assert!(d.is_boundary(d.boundary_node(k)));
    }
    // v_1 edge separates a white face
    assert_eq!(d.graph().color(d.boundary_face(0)), Color::White);
}

#[test]
fn euler_violation_rejected() {
    // two disjoint-looking faces that do not close into a sphere
    let colors = vec![Color::Black, Color::White, Color::Black, Color::White];
    let edges: Vec<Edge> = [(0, 1), (2, 1), (2, 3), (0, 3)]
        .iter()
        .map(|&(b, w)| Edge {
            black: b,
            white: w,
            weight: 1.0,
        })
        .collect();
    // same cycle listed as both faces plus a stray extra face
    let faces = vec![vec![0, 1, 2, 3], vec![3, 2, 1, 0], vec![0, 1, 2, 3]];
    assert!(BipartiteDimerGraph::from_face_edges(colors, edges, faces, 0).is_err());
}

#[test]
fn json_round_trip() {
    let g = reduced_aztec_diamond(3).unwrap();
    let j = serde_json::to_string(&g.to_json()).unwrap();
    let back = BipartiteDimerGraph::from_json(&serde_json::from_str(&j).unwrap()).unwrap();
    assert_eq!(back.n_edges(), g.n_edges());
    for v in 0..g.n_vertices() {
        assert_eq!(back.rotation(v).len(), g.rotation(v).len());
    }
    let k1 = assign_kasteleyn_signs(&g).unwrap();
    let k2 = assign_kasteleyn_signs(&back).unwrap();
    let (z1, z2) = (
        partition_function(&to_complex(&k1.matrix)),
        partition_function(&to_complex(&k2.matrix)),
    );
    assert!((z1 - z2).abs() < 1e-9);
}

#[test]
fn height_examples() {
    let g = four_cycle();
    let covers = g.enumerate_dimer_covers(24).unwrap();
    let d = AugmentedDual::build(g).unwrap();
    let root = d.boundary_node(0);
    let h0 = height_function(&covers[0], &covers[0], &d, root).unwrap();
    assert!(h0.values.iter().all(|&x| x == 0));
    let h = height_function(&covers[0], &covers[1], &d, root).unwrap();
    let hs = height_function(&covers[1], &covers[0], &d, root).unwrap();
    for (a, b) in h.values.iter().zip(&hs.values) {
        assert_eq!(*a, -*b);
    }
    let nonzero: Vec<_> = h.values.iter().filter(|&&x| x != 0).collect();
    assert_eq!(nonzero.len(), 1);
    assert_eq!(nonzero[0].abs(), 1);
}

#[test]
fn heights_close_around_inner_polygons() {
    let g = aztec_diamond(2).unwrap();
    let covers = g.enumerate_dimer_covers(24).unwrap();
    let d = AugmentedDual::build(g).unwrap();
    for c in &covers {
        for c0 in &covers {
            // construction checks every dual edge increment
            height_function(c, c0, &d, d.boundary_node(0)).unwrap();
        }
    }
}
