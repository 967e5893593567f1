use tembed_core::dual::AugmentedDual;
use tembed_core::families::{prism, reduced_aztec_diamond};
use tembed_core::gauge::{solve_perfect_gauge, SolverConfig};
use tembed_core::graph::{BipartiteDimerGraph, Color};
use tembed_core::kasteleyn::assign_kasteleyn_signs;
use tembed_core::tholo::{coupled_fpmpm, pairing_form_check, same_sign_check, HoloContext};
use tembed_core::C64;

fn context(g: BipartiteDimerGraph) -> HoloContext {
    let k = assign_kasteleyn_signs(&g).unwrap();
    let d = AugmentedDual::build(g).unwrap();
    let sol = solve_perfect_gauge(&d, &k, &SolverConfig::default()).unwrap();
    let bd = sol.verdict.boundary.clone().unwrap();
    HoloContext::from_perfect(sol.embedding(&d).unwrap(), &bd, 1e-9).unwrap()
}

#[test]
fn fake_values_have_origami_phases_and_unit_residue() {
    let ctx = context(reduced_aztec_diamond(3).unwrap());
    let g = ctx.dual().graph();
    for p in 0..g.n_vertices() {
        let f = ctx.from_inverse_kasteleyn(p).unwrap();
        assert!(f.phase_residual(&ctx) < 1e-10, "p={p}: {}", f.phase_residual(&ctx));
        let r = f.fake_residues(&ctx);
        for (v, z) in r.iter().enumerate() {
            let want = if v == p { ctx.eta.eta[p].conj() } else { C64::new(0.0, 0.0) };
            assert!((z - want).norm() < 1e-10, "p={p} v={v} {z}");
        }
        assert!(f.max_witness() < 1e-10, "p={p} witness {}", f.max_witness());
    }
}

#[test]
fn primitive_monodromy_and_closed_forms() {
    let ctx = context(reduced_aztec_diamond(3).unwrap());
    let g = ctx.dual().graph();
    for p in 0..g.n_vertices() {
        let f = ctx.from_inverse_kasteleyn(p).unwrap();
        let prim = f.primitive(&ctx, ctx.dual().boundary_node(0));
        let sign = if g.color(p) == Color::Black { -2.0 } else { 2.0 };
        let want = sign * ctx.eta.eta[p].conj();
        assert!((prim.monodromy - want).norm() < 1e-9, "p={p} {} vs {want}", prim.monodromy);
        assert!(prim.closedness < 1e-10, "p={p} closedness {}", prim.closedness);
        assert!(prim.slit_consistency < 1e-10, "p={p} slit {}", prim.slit_consistency);
        assert!(prim.values.iter().all(|z| z.re.is_finite()));
        let c = f.closed_forms_residual(&ctx);
        assert!(c < 1e-10, "p={p} closed forms {c}");
    }
}

#[test]
fn pairing_form_is_real_and_closed() {
    let ctx = context(reduced_aztec_diamond(3).unwrap());
    let g = ctx.dual().graph();
    let b = g.black_vertices()[0];
    let w = *g.white_vertices().last().unwrap();
    let fb = ctx.from_inverse_kasteleyn(b).unwrap();
    let fw = ctx.from_inverse_kasteleyn(w).unwrap();
    let r = pairing_form_check(&ctx, &fb, &fw).unwrap();
    assert!(r.edges_checked > 0);
    assert!(r.identity < 1e-10 && r.realness < 1e-10, "{r:?}");
    assert!(r.closedness < 1e-10 && r.boundary < 1e-10, "{r:?}");
}

#[test]
fn coupled_values_reconstruct_the_inverse() {
    let ctx = context(reduced_aztec_diamond(3).unwrap());
    let (vals, r) = coupled_fpmpm(&ctx, usize::MAX).unwrap();
    assert!(!vals.is_empty() && r.reconstructions > 0, "{r:?}");
    assert!(r.black_consistency < 1e-9, "{r:?}");
    assert!(r.white_consistency < 1e-9, "{r:?}");
    assert!(r.reconstruction < 1e-9, "{r:?}");
}

#[test]
fn boundary_same_sign() {
    for g in [reduced_aztec_diamond(3).unwrap(), prism(4).unwrap()] {
        let k = assign_kasteleyn_signs(&g).unwrap();
        let d = AugmentedDual::build(g).unwrap();
        let sol = solve_perfect_gauge(&d, &k, &SolverConfig::default()).unwrap();
        let bd = sol.verdict.boundary.clone().unwrap();
        let ctx = HoloContext::from_perfect(sol.embedding(&d).unwrap(), &bd, 1e-9).unwrap();
        for j in 0..d.n_boundary() {
            let b = d.boundary_face(j);
            if d.graph().color(b) != Color::Black {
                continue;
            }
            let r = same_sign_check(&ctx, b, &bd.xi, 1e-10).unwrap();
            eprintln!(
                "j={j} sign={} total={:.6} expected={:.6} max={:.6}",
                r.sign, r.total, r.expected_total, r.max_abs_normalized
            );
            assert!(r.pass, "{r:?}");
        }
    }
}
