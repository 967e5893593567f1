//! 1-Lipschitz boundary profile `xi` on the circle and the star-convex
//! domain `{ r e^{i phi} : r < 1 / cos xi(phi) }`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Periodic piecewise-linear function through knots `(phi_k, xi_k)`,
/// `phi` strictly increasing within one period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct XiFunction {
    pub phi: Vec<f64>,
    pub xi: Vec<f64>,
}

impl XiFunction {
    pub fn new(phi: Vec<f64>, xi: Vec<f64>) -> Result<Self> {
        if phi.len() != xi.len() || phi.is_empty() {
            return Err(Error::Input("xi knots: length mismatch".into()));
        }
        for w in phi.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Input("xi knots must be strictly increasing".into()));
            }
        }
        if phi[phi.len() - 1] - phi[0] >= TAU {
            return Err(Error::Input("xi knots span more than one period".into()));
        }
        if xi.iter().any(|x| x.abs() >= FRAC_PI_2) {
            return Err(Error::Input("xi must lie in (-pi/2, pi/2)".into()));
        }
        let f = Self { phi, xi };
        if f.lipschitz_excess() > 1e-12 {
            return Err(Error::Input("xi is not 1-Lipschitz".into()));
        }
        Ok(f)
    }

    pub fn flat() -> Self {
        Self {
            phi: vec![0.0],
            xi: vec![0.0],
        }
    }

    /// Limit profile of the Aztec diamond: -pi/4 at 0 and pi, +pi/4 at
    /// pi/2 and 3pi/2, slopes alternating +1, -1.
    pub fn aztec() -> Self {
        Self {
            phi: (0..4).map(|k| k as f64 * FRAC_PI_2).collect(),
            xi: vec![-FRAC_PI_4, FRAC_PI_4, -FRAC_PI_4, FRAC_PI_4],
        }
    }

    fn segment(&self, k: usize) -> (f64, f64, f64, f64) {
        let n = self.phi.len();
        let (p0, x0) = (self.phi[k], self.xi[k]);
        let (p1, x1) = if k + 1 < n {
            (self.phi[k + 1], self.xi[k + 1])
        } else {
            (self.phi[0] + TAU, self.xi[0])
        };
        (p0, x0, p1, x1)
    }

    /// Slopes of the linear pieces.
    pub fn slopes(&self) -> Vec<f64> {
        (0..self.phi.len())
            .map(|k| {
                let (p0, x0, p1, x1) = self.segment(k);
                (x1 - x0) / (p1 - p0)
            })
            .collect()
    }

    fn lipschitz_excess(&self) -> f64 {
        if self.phi.len() == 1 {
            return 0.0;
        }
        self.slopes()
            .iter()
            .map(|s| s.abs() - 1.0)
            .fold(f64::MIN, f64::max)
    }

    pub fn eval(&self, phi: f64) -> f64 {
        let n = self.phi.len();
        if n == 1 {
            return self.xi[0];
        }
        let p = self.phi[0] + (phi - self.phi[0]).rem_euclid(TAU);
        let k = match self.phi.iter().rposition(|&q| q <= p) {
            Some(k) => k,
            None => n - 1,
        };
        let (p0, x0, p1, x1) = self.segment(k);
        x0 + (x1 - x0) * (p - p0) / (p1 - p0)
    }

    /// Boundary contour point `(e^{i phi} / cos xi, tan xi)` on the hyperboloid.
    pub fn contour(&self, phi: f64) -> (C64, f64) {
        let x = self.eval(phi);
        (C64::from_polar(1.0 / x.cos(), phi), x.tan())
    }

    /// Radial extent `1 / cos xi(phi)` of the domain.
    pub fn radius(&self, phi: f64) -> f64 {
        1.0 / self.eval(phi).cos()
    }

    pub fn contains(&self, z: C64) -> bool {
        z.norm() < self.radius(z.arg())
    }

    /// Radial margin `1 - |z| / radius`, negative outside.
    pub fn radial_margin(&self, z: C64) -> f64 {
        1.0 - z.norm() / self.radius(z.arg())
    }

    /// Euclidean distance from `z` to the boundary curve, by dense sampling.
    pub fn distance_to_boundary(&self, z: C64) -> f64 {
        let n = 4096;
        (0..n)
            .map(|j| {
                let phi = TAU * j as f64 / n as f64;
                (C64::from_polar(self.radius(phi), phi) - z).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }
}
