//! Square-root coefficients of the differentials of `z` and `theta` in
//! the conformal coordinate, and the holomorphic transforms built on them.
//!
//! Index `0` stands for `+` and `1` for `-`. Coordinates are
//! `Z[+][+] = z`, `Z[+][-] = conj z`, `Z[-][+] = theta`, `Z[-][-] = conj theta`;
//! for signs `p, q` one has
//! `d Z[pq][q] = beta[p][+] alpha[q][+] d zeta + beta[p][-] alpha[q][-] d conj zeta`.

use serde::{Deserialize, Serialize};
use tembed_core::C64;

use crate::error::{Result, SurfaceError};
use crate::map::SurfaceMap;

pub const PLUS: usize = 0;
pub const MINUS: usize = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivCoeffs {
    pub zeta: C64,
    pub beta: [[C64; 2]; 2],
    pub alpha: [[C64; 2]; 2],
}

/// Branch of `sqrt(d_zeta z)` continued along the segment from 0,
/// principal at 0.
fn sqrt_along_ray(map: &dyn SurfaceMap, zeta: C64, steps: usize) -> Result<C64> {
    let mut s: C64 = map.complex_gradient(C64::new(0.0, 0.0)).0.sqrt();
    for k in 1..=steps {
        let w = zeta * (k as f64 / steps as f64);
        let dz = map.complex_gradient(w).0;
        if dz.norm() < 1e-10 {
            return Err(SurfaceError::Singular(w));
        }
        let c = dz.sqrt();
        s = if (c - s).norm() <= (c + s).norm() { c } else { -c };
    }
    Ok(s)
}

pub fn deriv_coeffs(map: &dyn SurfaceMap, zeta: C64) -> Result<DerivCoeffs> {
    let dz = map.complex_gradient(zeta).0;
    if dz.norm() < 1e-10 {
        return Err(SurfaceError::Singular(zeta));
    }
    let dt = map.complex_gradient(zeta).2;
    let steps = (64.0 * zeta.norm()).ceil() as usize + 1;
    let s = sqrt_along_ray(map, zeta, steps)?;
    // theta is real, so the branch of sqrt(dbar conj z) is conj(s) and
    // d_zeta conj(theta) = d_zeta theta
    let sb = s.conj();
    let beta = [[s, dt.conj() / sb], [dt / s, sb]];
    let alpha = [[s, dt.conj() / sb], [dt / s, sb]];
    Ok(DerivCoeffs { zeta, beta, alpha })
}

impl DerivCoeffs {
    /// Max defect of `d Z[pq][q] = sum_r beta[p][r] alpha[q][r] d zeta^r`
    /// against the derivatives of `map`.
    pub fn decomposition_residual(&self, map: &dyn SurfaceMap) -> f64 {
        let (dz, dzc, dt) = map.complex_gradient(self.zeta);
        // (d_zeta, d_conj_zeta) of z, conj z, theta, conj theta
        let d = [[dz, dzc.conj()], [dzc, dz.conj()], [dt, dt.conj()], [dt, dt.conj()]];
        let coord = |pq: usize, q: usize| match (pq, q) {
            (PLUS, PLUS) => 0,
            (PLUS, MINUS) => 1,
            (MINUS, PLUS) => 2,
            _ => 3,
        };
        let mut worst = 0.0f64;
        for p in [PLUS, MINUS] {
            for q in [PLUS, MINUS] {
                let pq = if p == q { PLUS } else { MINUS };
                let c = coord(pq, q);
                for r in [PLUS, MINUS] {
                    let lhs = self.beta[p][r] * self.alpha[q][r];
                    worst = worst.max((lhs - d[c][r]).norm());
                }
            }
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PsiKind {
    Black,
    White,
}

impl DerivCoeffs {
    fn psi_pair(&self, kind: PsiKind) -> (C64, C64) {
        match kind {
            PsiKind::Black => (self.beta[PLUS][PLUS], self.beta[MINUS][PLUS]),
            PsiKind::White => (self.alpha[PLUS][PLUS], self.alpha[MINUS][PLUS]),
        }
    }

    /// `psi = c++ f + c-+ conj f`.
    pub fn psi(&self, kind: PsiKind, f: C64) -> C64 {
        let (a, c) = self.psi_pair(kind);
        a * f + c * f.conj()
    }

    /// Inverse of [`psi`](Self::psi); requires `|c++| > |c-+|`.
    pub fn psi_inverse(&self, kind: PsiKind, psi: C64) -> C64 {
        let (a, c) = self.psi_pair(kind);
        (a.conj() * psi - c * psi.conj()) / (a.norm_sqr() - c.norm_sqr())
    }
}

/// `psi` at each `(zeta, f(z(zeta)))`.
pub fn psi_transform(map: &dyn SurfaceMap, kind: PsiKind, values: &[(C64, C64)]) -> Result<Vec<C64>> {
    values
        .iter()
        .map(|&(zeta, f)| Ok(deriv_coeffs(map, zeta)?.psi(kind, f)))
        .collect()
}

/// Square grid of spacing `h` centered at `center`, row-major.
#[derive(Clone, Copy, Debug)]
pub struct DiscGrid {
    pub center: C64,
    pub h: f64,
    pub n: usize,
}

impl DiscGrid {
    pub fn point(&self, i: usize, j: usize) -> C64 {
        let o = 0.5 * (self.n - 1) as f64;
        self.center + C64::new((j as f64 - o) * self.h, (i as f64 - o) * self.h)
    }

    pub fn points(&self) -> Vec<C64> {
        (0..self.n)
            .flat_map(|i| (0..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.point(i, j))
            .collect()
    }
}

/// Max of `|dbar psi| / max |d psi|` by central differences at interior
/// grid nodes.
pub fn holomorphy_residual(grid: &DiscGrid, values: &[C64]) -> f64 {
    let n = grid.n;
    let at = |i: usize, j: usize| values[i * n + j];
    let (mut dbar, mut d) = (0.0f64, 0.0f64);
    for i in 1..n.saturating_sub(1) {
        for j in 1..n - 1 {
            let fx = (at(i, j + 1) - at(i, j - 1)) / (2.0 * grid.h);
            let fy = (at(i + 1, j) - at(i - 1, j)) / (2.0 * grid.h);
            let i_ = C64::i();
            dbar = dbar.max((0.5 * (fx + i_ * fy)).norm());
            d = d.max((0.5 * (fx - i_ * fy)).norm());
        }
    }
    if d > 0.0 {
        dbar / d
    } else {
        dbar
    }
}
