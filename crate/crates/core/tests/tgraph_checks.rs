use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tembed_core::dual::AugmentedDual;
use tembed_core::families::reduced_aztec_diamond;
use tembed_core::gauge::{solve_perfect_gauge, SolverConfig};
use tembed_core::graph::Color;
use tembed_core::kasteleyn::assign_kasteleyn_signs;
use tembed_core::tgraph::{
    build_tgraph, check_harmonic, discrete_gradient, distortion, gradient_round_trip, oscillation_report,
    projected_primitive, walk_kernel, TGraphEmbedding, Variant,
};
use tembed_core::tholo::HoloContext;
use tembed_core::{Error, C64};

fn context(m: usize) -> HoloContext {
    let g = reduced_aztec_diamond(m).unwrap();
    let k = assign_kasteleyn_signs(&g).unwrap();
    let d = AugmentedDual::build(g).unwrap();
    let sol = solve_perfect_gauge(&d, &k, &SolverConfig::default()).unwrap();
    let bd = sol.verdict.boundary.clone().unwrap();
    HoloContext::from_perfect(sol.embedding(&d).unwrap(), &bd, 1e-9).unwrap()
}

// retry with a small rotation when alpha hits a degenerate direction
fn tgraph(ctx: &HoloContext, alpha: C64, variant: Variant) -> TGraphEmbedding {
    for k in 0..20 {
        let a = alpha * C64::from_polar(1.0, 1e-3 * k as f64);
        match build_tgraph(&ctx.t, &ctx.o.o, &ctx.eta, a, variant) {
            Ok(tg) => return tg,
            Err(Error::DegenerateAlpha(_)) => continue,
            Err(e) => panic!("{e}"),
        }
    }
    panic!("no generic direction near {alpha}");
}

#[test]
fn face_shapes_and_martingale() {
    let ctx = context(3);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let alpha = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        for variant in [Variant::White, Variant::Black] {
            let tg = tgraph(&ctx, alpha, variant);
            assert!(tg.collinearity_residual < 1e-10, "{}", tg.collinearity_residual);
            assert!(tg.similarity_residual < 1e-10, "{}", tg.similarity_residual);
            let k = walk_kernel(&tg).unwrap();
            assert!(k.martingale_residual(&tg) < 1e-13, "{}", k.martingale_residual(&tg));
        }
    }
}

#[test]
fn affine_functions_are_harmonic_and_convex_ones_are_not() {
    let ctx = context(3);
    let tg = tgraph(&ctx, C64::from_polar(1.0, 0.4), Variant::White);
    let k = walk_kernel(&tg).unwrap();
    let affine: Vec<f64> = tg.positions.iter().map(|z| 0.3 * z.re - 1.7 * z.im + 2.0).collect();
    assert!(check_harmonic(&affine, &k, &[]).max_residual < 1e-12);
    // gradient of an affine map along a segment is its projection onto the segment line
    let d = discrete_gradient(&affine, &tg, &[]);
    let a = C64::new(0.3, -1.7);
    for (s, z) in tg.segments.iter().zip(&d) {
        let (Some(s), Some(z)) = (s, z) else { continue };
        let u = C64::new(s.direction[0], s.direction[1]);
        let want = tg.alpha * (a.conj() * u).re / u;
        assert!((z - want).norm() < 1e-10, "{z} vs {want}");
    }
    let zero = vec![0.0; tg.positions.len()];
    assert!(discrete_gradient(&zero, &tg, &[]).iter().flatten().all(|z| z.norm() == 0.0));
    let convex: Vec<f64> = tg.positions.iter().map(|z| z.norm_sqr()).collect();
    let r = check_harmonic(&convex, &k, &[]);
    assert!(r.max_residual > 1e-6, "{r:?}");
}

#[test]
fn jump_probabilities_are_interior() {
    let ctx = context(2);
    let tg = tgraph(&ctx, C64::from_polar(1.0, 0.9), Variant::Black);
    let k = walk_kernel(&tg).unwrap();
    for j in k.jumps.iter().flatten() {
        assert!(j.p_plus > 0.0 && j.p_plus < 1.0);
        assert!(k.step(j.plus, 0.0) != usize::MAX);
    }
}

#[test]
fn primitives_are_harmonic_and_gradients_round_trip() {
    let ctx = context(3);
    let g = ctx.dual().graph();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..4 {
        let alpha = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
        for variant in [Variant::White, Variant::Black] {
            let tg = tgraph(&ctx, alpha, variant);
            let k = walk_kernel(&tg).unwrap();
            let kind = variant.harmonic_kind();
            for p in (0..g.n_vertices()).filter(|&p| g.color(p) == kind) {
                let f = ctx.from_inverse_kasteleyn(p).unwrap();
                let pp = projected_primitive(&ctx, &tg, &f).unwrap();
                let r = check_harmonic(&pp.values, &k, &pp.exclude);
                assert!(r.checked > 0 && r.max_residual < 1e-9, "p={p} {r:?}");
                let rt = gradient_round_trip(&ctx, &tg, &f).unwrap();
                assert!(rt < 1e-9, "p={p} round trip {rt}");
            }
            // wrong variant is rejected
            let other = (0..g.n_vertices()).find(|&p| g.color(p) != kind).unwrap();
            let f = ctx.from_inverse_kasteleyn(other).unwrap();
            assert!(projected_primitive(&ctx, &tg, &f).is_err());
        }
    }
}

#[test]
fn mismatched_primitive_is_not_harmonic() {
    // a t-black primitive fails harmonicity on the white variant
    let ctx = context(3);
    let tg = tgraph(&ctx, C64::from_polar(1.0, 1.3), Variant::White);
    let k = walk_kernel(&tg).unwrap();
    let g = ctx.dual().graph();
    let b = (0..g.n_vertices()).find(|&v| g.color(v) == Color::Black).unwrap();
    let f = ctx.from_inverse_kasteleyn(b).unwrap();
    let prim = f.primitive(&ctx, ctx.dual().boundary_node(0));
    let h = prim.projected(tg.alpha);
    let r = check_harmonic(&h, &k, &[]);
    assert!(r.max_residual > 1e-6, "{r:?}");
}

#[test]
fn distortion_and_oscillation() {
    let ctx = context(4);
    let tg = tgraph(&ctx, C64::from_polar(1.0, 0.2), Variant::White);
    // origami is 1-Lipschitz, so distances change by at most a factor of two
    let d = distortion(&tg, &ctx.t, 0.0, 1.0);
    assert!(d.pass, "{d:?}");
    let center = (0..tg.positions.len())
        .min_by(|&a, &b| tg.positions[a].norm().total_cmp(&tg.positions[b].norm()))
        .unwrap();
    let h: Vec<f64> = tg.positions.iter().map(|z| 3.0 + z.re).collect();
    let o = oscillation_report(&h, &tg, center, 0.2, 0.8, &[]);
    assert!(o.ratio.unwrap() < 1.0 && o.harnack.is_some(), "{o:?}");
    let c = vec![1.0; h.len()];
    assert!(oscillation_report(&c, &tg, center, 0.2, 0.8, &[]).ratio.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn walks_are_martingales_in_every_direction(theta in 0.0..std::f64::consts::TAU, black in any::<bool>()) {
        let ctx = context(3);
        let variant = if black { Variant::Black } else { Variant::White };
        let tg = build_tgraph(&ctx.t, &ctx.o.o, &ctx.eta, C64::from_polar(1.0, theta), variant);
        prop_assume!(!matches!(tg, Err(Error::DegenerateAlpha(_))));
        let tg = tg.unwrap();
        let k = walk_kernel(&tg).unwrap();
        prop_assert!(k.martingale_residual(&tg) < 1e-13);
        for j in k.jumps.iter().flatten() {
            prop_assert!(j.p_plus > 0.0 && j.p_plus < 1.0);
        }
    }
}
