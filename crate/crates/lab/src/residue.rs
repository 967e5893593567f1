//! Near-diagonal behaviour of the coupled functions pushed to the
//! conformal coordinate: `psi^{++} ~ c / (zeta2 - zeta1)` with
//! `c = 2 / (pi i)`, and `psi^{-+}` bounded.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;
use tembed_core::embedding::{pair, SplitTriangle};
use tembed_core::graph::Color;
use tembed_core::tholo::{CoupledSolver, CoupledValue, HoloContext};
use tembed_core::C64;
use tembed_surface::coeffs::{deriv_coeffs, DerivCoeffs, MINUS, PLUS};
use tembed_surface::invert::Inverter;
use tembed_surface::SurfaceMap;

use crate::config::ResidueConfig;
use crate::error::Result;
use crate::pipeline::Instance;

#[derive(Clone, Debug, Serialize)]
pub struct ResidueSample {
    pub white_triangle: usize,
    pub zeta2: [f64; 2],
    pub psi_pp: [f64; 2],
    pub psi_mp: [f64; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidueReport {
    pub m: usize,
    pub black_triangle: usize,
    pub zeta1: [f64; 2],
    pub samples: Vec<ResidueSample>,
    /// Least-squares `c` in `psi^{++} ~ c / (zeta2 - zeta1) + d`.
    pub c: [f64; 2],
    pub c_abs: f64,
    pub c_target: f64,
    /// `| |c| - 2/pi | / (2/pi)`.
    pub c_rel_dev: f64,
    pub c_phase: f64,
    /// Angular distance of `arg c` to `-pi/2`.
    pub phase_dev: f64,
    pub psi_mp_max: f64,
    /// RMS of the fit residual relative to RMS of `psi^{++}`.
    pub fit_residual: f64,
    pub modulus_ok: bool,
    pub phase_ok: bool,
    pub bounded_ok: bool,
}

fn centroid(ctx: &HoloContext, tr: &SplitTriangle) -> C64 {
    let s: C64 = tr.nodes.iter().map(|&v| ctx.t.t[v]).sum();
    s / tr.nodes.len() as f64
}

/// `psi^{r1 r2} = sum_{s1, s2} beta^{s1 r1}(zeta1) alpha^{s2 r2}(zeta2) f^{s1 s2}`.
fn psi(d1: &DerivCoeffs, d2: &DerivCoeffs, v: &CoupledValue, r1: usize, r2: usize) -> C64 {
    let f = [[v.pp, v.pm], [v.mp(), v.mm()]];
    let mut s = C64::new(0.0, 0.0);
    for s1 in [PLUS, MINUS] {
        for s2 in [PLUS, MINUS] {
            s += d1.beta[s1][r1] * d2.alpha[s2][r2] * f[s1][s2];
        }
    }
    s
}

/// Fit `y ~ c u + d`, returning `(c, relative RMS residual)`.
fn fit_pole(u: &[C64], y: &[C64]) -> (C64, f64) {
    let n = u.len() as f64;
    let um: C64 = u.iter().sum::<C64>() / n;
    let ym: C64 = y.iter().sum::<C64>() / n;
    let num: C64 = u.iter().zip(y).map(|(a, b)| (a - um).conj() * (b - ym)).sum();
    let den: f64 = u.iter().map(|a| (a - um).norm_sqr()).sum();
    let c = num / den;
    let d = ym - c * um;
    let res: f64 = u.iter().zip(y).map(|(a, b)| (b - c * a - d).norm_sqr()).sum();
    let tot: f64 = y.iter().map(|b| b.norm_sqr()).sum();
    (c, (res / tot).sqrt())
}

fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

pub fn residue_diagnostic(
    inst: &Instance,
    map: &dyn SurfaceMap,
    inv: &Inverter,
    cfg: &ResidueConfig,
) -> Result<ResidueReport> {
    let ctx = &inst.ctx;
    let g = ctx.dual().graph();
    let target_z = map.z(C64::new(cfg.zeta1[0], cfg.zeta1[1]));
    let (ub, zb) = ctx
        .split_black
        .triangles
        .iter()
        .enumerate()
        .filter(|(_, tr)| g.color(tr.face) == Color::Black)
        .map(|(i, tr)| (i, centroid(ctx, tr)))
        .min_by(|a, b| (a.1 - target_z).norm().total_cmp(&(b.1 - target_z).norm()))
        .expect("embedding has black faces");
    let zeta1 = inv.invert(zb)?;
    let d1 = deriv_coeffs(map, zeta1)?;
    let solver = CoupledSolver::new(ctx)?;
    let mut samples = Vec::new();
    let (mut u, mut y) = (Vec::new(), Vec::new());
    let mut psi_mp_max = 0.0f64;
    for (uw, tr) in ctx.split_white.triangles.iter().enumerate() {
        if g.color(tr.face) != Color::White {
            continue;
        }
        let Ok(zeta2) = inv.invert(centroid(ctx, tr)) else {
            continue;
        };
        let dist = (zeta2 - zeta1).norm();
        if dist < cfg.min_offset || dist > cfg.max_offset {
            continue;
        }
        let Some(sol) = solver.solve(ub, uw) else {
            continue;
        };
        let d2 = deriv_coeffs(map, zeta2)?;
        let pp = psi(&d1, &d2, &sol.value, PLUS, PLUS);
        let mp = psi(&d1, &d2, &sol.value, MINUS, PLUS);
        psi_mp_max = psi_mp_max.max(mp.norm());
        u.push(1.0 / (zeta2 - zeta1));
        y.push(pp);
        samples.push(ResidueSample {
            white_triangle: uw,
            zeta2: pair(zeta2),
            psi_pp: pair(pp),
            psi_mp: pair(mp),
        });
    }
    let c_target = 2.0 / PI;
    let (c, fit_residual) = if u.len() >= 2 {
        fit_pole(&u, &y)
    } else {
        (C64::new(f64::NAN, f64::NAN), f64::NAN)
    };
    let c_abs = c.norm();
    let c_rel_dev = (c_abs - c_target).abs() / c_target;
    let c_phase = c.arg();
    let phase_dev = wrap_angle(c_phase + FRAC_PI_2).abs();
    Ok(ResidueReport {
        m: inst.m,
        black_triangle: ub,
        zeta1: pair(zeta1),
        samples,
        c: pair(c),
        c_abs,
        c_target,
        c_rel_dev,
        c_phase,
        phase_dev,
        psi_mp_max,
        fit_residual,
        modulus_ok: c_rel_dev <= 0.25,
        phase_ok: phase_dev <= 0.3,
        bounded_ok: psi_mp_max <= 5.0 * c_abs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pole_fit_recovers_exact_data() {
        let c = C64::new(0.3, -0.7);
        let d = C64::new(-0.1, 0.2);
        let u: Vec<C64> = (1..9).map(|k| 1.0 / C64::from_polar(0.05 + 0.01 * k as f64, k as f64)).collect();
        let y: Vec<C64> = u.iter().map(|a| c * a + d).collect();
        let (cf, res) = fit_pole(&u, &y);
        assert!((cf - c).norm() < 1e-12);
        assert!(res < 1e-12);
    }

    #[test]
    fn angle_wrap() {
        assert!((wrap_angle(3.0 * PI / 2.0) + FRAC_PI_2).abs() < 1e-15);
        assert!(wrap_angle(0.1).abs() - 0.1 < 1e-15);
    }
}
