//! Inverse of `zeta -> z(zeta)` by seeded damped Newton.

use std::f64::consts::TAU;

use tembed_core::C64;

use crate::error::{Result, SurfaceError};
use crate::map::SurfaceMap;

pub struct Inverter<'a> {
    map: &'a dyn SurfaceMap,
    seeds: Vec<(C64, C64)>,
    pub tol: f64,
}

impl<'a> Inverter<'a> {
    pub fn new(map: &'a dyn SurfaceMap, radial: usize, angular: usize) -> Self {
        let mut seeds = vec![(C64::new(0.0, 0.0), map.z(C64::new(0.0, 0.0)))];
        for i in 1..=radial {
            let r = 0.995 * i as f64 / radial as f64;
            for j in 0..angular {
                let zeta = C64::from_polar(r, TAU * (j as f64 + 0.5 * (i % 2) as f64) / angular as f64);
                seeds.push((zeta, map.z(zeta)));
            }
        }
        Self { map, seeds, tol: 1e-8 }
    }

    fn newton(&self, mut zeta: C64, z0: C64) -> (C64, f64) {
        let mut res = (self.map.z(zeta) - z0).norm();
        for _ in 0..80 {
            if res < 1e-14 {
                break;
            }
            let delta = z0 - self.map.z(zeta);
            let (a, zc, _) = self.map.complex_gradient(zeta);
            let b = zc.conj();
            let det = a.norm_sqr() - b.norm_sqr();
            if !(det.abs() > 0.0) {
                break;
            }
            let step = (a.conj() * delta - b * delta.conj()) / det;
            let mut lam = 1.0;
            let mut moved = false;
            while lam > 1e-10 {
                let cand = zeta + step * lam;
                if cand.norm() < 1.0 {
                    let r = (self.map.z(cand) - z0).norm();
                    if r < res {
                        zeta = cand;
                        res = r;
                        moved = true;
                        break;
                    }
                }
                lam *= 0.5;
            }
            if !moved {
                break;
            }
        }
        (zeta, res)
    }

    /// `zeta` with `|z(zeta) - z0| < tol`; seeds are tried nearest first.
    pub fn invert(&self, z0: C64) -> Result<C64> {
        let mut order: Vec<usize> = (0..self.seeds.len()).collect();
        order.sort_by(|&a, &b| (self.seeds[a].1 - z0).norm().total_cmp(&(self.seeds[b].1 - z0).norm()));
        for &k in order.iter().take(8) {
            let (zeta, res) = self.newton(self.seeds[k].0, z0);
            if res < self.tol {
                return Ok(zeta);
            }
        }
        Err(SurfaceError::OutOfDomain(z0))
    }
}

pub fn invert_param(map: &dyn SurfaceMap, z0: C64) -> Result<C64> {
    Inverter::new(map, 24, 96).invert(z0)
}
