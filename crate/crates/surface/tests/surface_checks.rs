use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2, PI, TAU};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tembed_core::domain::XiFunction;
use tembed_core::C64;
use tembed_surface::boundary::{rotate_xi, BoundaryContour};
use tembed_surface::coeffs::{deriv_coeffs, holomorphy_residual, psi_transform, DiscGrid, PsiKind, MINUS, PLUS};
use tembed_surface::green::{green_disc, gff_npoint};
use tembed_surface::invert::{invert_param, Inverter};
use tembed_surface::plateau::{conformality, plateau_solve, verify_spacelike, MeshConfig};
use tembed_surface::polygon::{harmonic_measure, PolygonMap};
use tembed_surface::{SurfaceError, SurfaceMap};

fn mesh(n: usize) -> MeshConfig {
    MeshConfig { n, ..MeshConfig::default() }
}

fn random_disc_point(rng: &mut ChaCha8Rng, rmax: f64) -> C64 {
    C64::from_polar(rmax * rng.random::<f64>().sqrt(), rng.random_range(0.0..TAU))
}

#[test]
fn flat_profile_gives_the_identity() {
    let p = plateau_solve(&XiFunction::flat(), &mesh(64)).unwrap();
    assert!(p.exact.is_none());
    assert!(p.report.conformality.linf < 1e-10, "{:?}", p.report);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..50 {
        let zeta = random_disc_point(&mut rng, 0.95);
        assert!((p.z(zeta) - zeta).norm() < 1e-10);
        assert!(p.theta(zeta).abs() < 1e-10);
        let c = deriv_coeffs(&p, zeta).unwrap();
        assert!((c.beta[PLUS][PLUS] - 1.0).norm() < 1e-10);
        assert!(c.beta[MINUS][PLUS].norm() < 1e-10);
        let f = C64::new(0.3, -0.8);
        assert!((c.psi(PsiKind::Black, f) - f).norm() < 1e-10);
    }
    let s = verify_spacelike(&p, 0.05, 20, 64).unwrap();
    assert!(s.max_ratio < 1e-10);
    assert!((invert_param(&p, C64::new(0.2, -0.4)).unwrap() - C64::new(0.2, -0.4)).norm() < 1e-8);
}

#[test]
fn aztec_jump_points_are_symmetric() {
    let c = BoundaryContour::new(XiFunction::aztec(), 1e-3).unwrap();
    let corners = c.polygon_corners().unwrap();
    assert_eq!(corners.len(), 4);
    let poly = PolygonMap::solve(&corners).unwrap();
    for (k, t) in poly.theta.iter().enumerate() {
        assert!((t - (-FRAC_PI_4 + k as f64 * FRAC_PI_2)).abs() < 1e-12, "{:?}", poly.theta);
    }
    let r = conformality(&poly, 0.05, 30, 256);
    assert!(r.linf < 1e-12, "{r:?}");
    assert!((poly.z(C64::new(0.0, 0.0))).norm() < 1e-12);
}

// light-like polygon from alternating tangency angles on the unit circle
fn tangential_polygon(rng: &mut ChaCha8Rng, n: usize) -> XiFunction {
    loop {
        let gaps: Vec<f64> = (0..n).map(|_| rng.random_range(0.3..1.0)).collect();
        let s: f64 = gaps.iter().sum();
        let gaps: Vec<f64> = gaps.iter().map(|g| g / s * TAU).collect();
        if gaps.iter().any(|&g| g > 0.9 * PI) {
            continue;
        }
        let mut theta = vec![0.0];
        for g in &gaps[..n - 1] {
            theta.push(theta.last().unwrap() + g);
        }
        let mut knots: Vec<(f64, f64)> = (0..n)
            .map(|k| {
                let a = theta[k];
                let b = if k + 1 < n { theta[k + 1] } else { theta[0] + TAU };
                let xi = if k % 2 == 0 { (b - a) / 2.0 } else { -(b - a) / 2.0 };
                (((a + b) / 2.0).rem_euclid(TAU), xi)
            })
            .collect();
        knots.sort_by(|a, b| a.0.total_cmp(&b.0));
        return XiFunction::new(knots.iter().map(|k| k.0).collect(), knots.iter().map(|k| k.1).collect()).unwrap();
    }
}

#[test]
fn random_light_like_polygons_are_solved_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in [4, 6, 8] {
        let xi = tangential_polygon(&mut rng, n);
        let corners = BoundaryContour::new(xi, 1e-3).unwrap().polygon_corners().unwrap();
        assert_eq!(corners.len(), n);
        let poly = PolygonMap::solve(&corners).unwrap();
        assert!(poly.equation_residual < 1e-11);
        let r = conformality(&poly, 0.05, 20, 128);
        assert!(r.linf_normalized < 1e-10, "n={n} {r:?}");
        let s = verify_spacelike(&poly, 0.05, 20, 128).unwrap();
        assert!(s.max_ratio < 1.0 && s.max_lower_ratio <= 1.0 + 1e-9, "{s:?}");
    }
}

#[test]
fn aztec_mesh_refinement() {
    let coarse = plateau_solve(&XiFunction::aztec(), &mesh(128)).unwrap();
    let fine = plateau_solve(&XiFunction::aztec(), &mesh(256)).unwrap();
    let (a, b) = (coarse.report.conformality.l2, fine.report.conformality.l2);
    assert!(b < 1e-3, "{:?}", fine.report);
    assert!(b / a < 0.6, "ratio {}", b / a);
    assert!(fine.report.boundary_hyperboloid < 1e-12);
    assert!(fine.phi.windows(2).all(|w| w[1] >= w[0]));
    let s = verify_spacelike(&fine.fourier, 0.05, 30, 256).unwrap();
    assert!(s.max_ratio < 1.0, "{s:?}");
    // the mesh map approaches the exact one at first order
    let gap = |q: &tembed_surface::plateau::ConformalParam| {
        let e = q.exact.as_ref().unwrap();
        (0..200)
            .map(|k| C64::from_polar(0.08 * (k % 10) as f64, 0.37 * k as f64))
            .map(|z| (q.fourier.z(z) - e.z(z)).norm())
            .fold(0.0, f64::max)
    };
    let (ga, gb) = (gap(&coarse), gap(&fine));
    assert!(gb < 0.05 && gb < 0.6 * ga, "{ga} {gb}");
    assert!(fine.report.energy_final <= fine.report.energy_initial);
}

#[test]
fn rotating_the_profile_rotates_the_map() {
    let phi0 = 0.3;
    let p = plateau_solve(&XiFunction::aztec(), &mesh(64)).unwrap();
    let q = plateau_solve(&rotate_xi(&XiFunction::aztec(), phi0), &mesh(64)).unwrap();
    let rot = C64::from_polar(1.0, phi0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let zeta = random_disc_point(&mut rng, 0.9);
        let want = rot * p.z(zeta / rot);
        assert!((q.z(zeta) - want).norm() < 1e-10, "{} vs {want}", q.z(zeta));
        assert!((q.theta(zeta) - p.theta(zeta / rot)).abs() < 1e-10);
    }
}

#[test]
fn inversion_round_trips() {
    let p = plateau_solve(&XiFunction::aztec(), &mesh(128)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for map in [p.map(), &p.fourier as &dyn SurfaceMap] {
        let inv = Inverter::new(map, 24, 96);
        let mut done = 0;
        while done < 100 {
            let z0 = C64::new(rng.random_range(-1.4..1.4), rng.random_range(-1.4..1.4));
            if p.xi.radial_margin(z0) < 0.1 {
                continue;
            }
            let zeta = inv.invert(z0).unwrap();
            assert!((map.z(zeta) - z0).norm() < 1e-8);
            done += 1;
        }
        // a mesh point maps back to itself
        let zeta = C64::from_polar(0.5, 1.0);
        assert!((inv.invert(map.z(zeta)).unwrap() - zeta).norm() < 1e-7);
    }
    assert!(matches!(
        invert_param(p.map(), C64::new(3.0, 0.0)),
        Err(SurfaceError::OutOfDomain(_))
    ));
}

#[test]
fn coefficients_decompose_the_differentials() {
    let p = plateau_solve(&XiFunction::aztec(), &mesh(64)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let zeta = random_disc_point(&mut rng, 0.95);
        let c = deriv_coeffs(&p, zeta).unwrap();
        assert!(c.decomposition_residual(&p) < 1e-9, "{}", c.decomposition_residual(&p));
        assert!(c.beta[PLUS][PLUS].norm() > c.beta[MINUS][PLUS].norm());
        assert!((c.beta[MINUS][MINUS] - c.beta[PLUS][PLUS].conj()).norm() < 1e-14);
        assert!((c.beta[PLUS][MINUS] - c.beta[MINUS][PLUS].conj()).norm() < 1e-14);
        // the branch is continuous along the ray
        let near = deriv_coeffs(&p, zeta * 0.999).unwrap();
        assert!((near.beta[PLUS][PLUS] - c.beta[PLUS][PLUS]).norm() < 0.1);
    }
}

#[test]
fn psi_transform_inverts() {
    let p = plateau_solve(&XiFunction::aztec(), &mesh(64)).unwrap();
    let psi = |z: C64| 1.0 / (z - C64::new(2.0, 0.5)) + z * z;
    let grid = DiscGrid { center: C64::new(0.1, -0.2), h: 0.01, n: 21 };
    for kind in [PsiKind::Black, PsiKind::White] {
        let pts = grid.points();
        let f: Vec<(C64, C64)> = pts
            .iter()
            .map(|&zeta| (zeta, deriv_coeffs(&p, zeta).unwrap().psi_inverse(kind, psi(zeta))))
            .collect();
        let back = psi_transform(&p, kind, &f).unwrap();
        for (z, b) in pts.iter().zip(&back) {
            assert!((psi(*z) - b).norm() < 1e-12);
        }
        assert!(holomorphy_residual(&grid, &back) < 1e-4);
        // the field itself is not holomorphic in zeta
        let raw: Vec<C64> = f.iter().map(|x| x.1).collect();
        assert!(holomorphy_residual(&grid, &raw) > 1e-2);
        let zero = psi_transform(&p, kind, &pts.iter().map(|&z| (z, C64::new(0.0, 0.0))).collect::<Vec<_>>()).unwrap();
        assert!(zero.iter().all(|z| z.norm() == 0.0));
    }
}

#[test]
fn green_function_values() {
    let g = green_disc(C64::new(0.0, 0.0), C64::new(0.5, 0.0)).unwrap();
    assert!((g - LN_2 / TAU).abs() < 1e-14);
    assert!((g - 0.110318).abs() < 1e-6);
    assert!(matches!(green_disc(C64::new(0.1, 0.0), C64::new(0.1, 0.0)), Err(SurfaceError::Coincident)));
    let pts = [C64::new(0.1, 0.2), C64::new(-0.3, 0.1), C64::new(0.4, -0.5), C64::new(0.0, 0.6)];
    assert_eq!(gff_npoint(&pts[..3]).unwrap(), 0.0);
    let g = |a: usize, b: usize| green_disc(pts[a], pts[b]).unwrap();
    let want = g(0, 1) * g(2, 3) + g(0, 2) * g(1, 3) + g(0, 3) * g(1, 2);
    assert!((gff_npoint(&pts).unwrap() - want).abs() < 1e-15);
    assert!((gff_npoint(&pts[..2]).unwrap() - g(0, 1)).abs() < 1e-15);
}

#[test]
fn harmonic_measures_partition_unity() {
    let p = plateau_solve(&XiFunction::aztec(), &mesh(32)).unwrap();
    let poly = p.exact.unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let zeta = random_disc_point(&mut rng, 0.99);
        let s: f64 = (0..4).map(|k| { let (a, b) = poly.arc(k); harmonic_measure(zeta, a, b) }).sum();
        assert!((s - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn green_is_symmetric_positive_and_vanishes_on_the_circle(
        r1 in 0.0..0.95f64, a1 in 0.0..TAU, r2 in 0.0..0.95f64, a2 in 0.0..TAU, t in 0.0..TAU,
    ) {
        let (z1, z2) = (C64::from_polar(r1, a1), C64::from_polar(r2, a2));
        prop_assume!((z1 - z2).norm() > 1e-6);
        let g12 = green_disc(z1, z2).unwrap();
        prop_assert!((g12 - green_disc(z2, z1).unwrap()).abs() < 1e-12);
        prop_assert!(g12 > 0.0);
        let edge = C64::from_polar(1.0 - 1e-9, t);
        prop_assert!(green_disc(z1, edge).unwrap().abs() < 1e-8);
    }
}

#[test]
fn smooth_profile_uses_the_spectral_path() {
    let knots = 48;
    let phi: Vec<f64> = (0..knots).map(|k| TAU * k as f64 / knots as f64).collect();
    let xi = XiFunction::new(phi.clone(), phi.iter().map(|p| 0.3 * (2.0 * p).sin()).collect()).unwrap();
    let a = plateau_solve(&xi, &mesh(64)).unwrap();
    let b = plateau_solve(&xi, &mesh(128)).unwrap();
    assert!(b.exact.is_none());
    assert!(b.report.conformality.l2 < a.report.conformality.l2, "{:?} {:?}", a.report, b.report);
    assert!(b.report.conformality.l2_normalized < 1e-3, "{:?}", b.report);
    assert!(b.report.boundary_hyperboloid < 1e-12);
    verify_spacelike(&b, 0.05, 20, 64).unwrap();
}
