//! Boundary contour `(e^{i phi} / cos xi, tan xi)` on the hyperboloid
//! `|z|^2 - theta^2 = 1`.

use std::f64::consts::{FRAC_PI_2, TAU};

use tembed_core::domain::XiFunction;

use crate::error::{Result, SurfaceError};

/// Knot where the slope of `xi` flips between +1 and -1: a vertex of the
/// light-like boundary polygon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Corner {
    pub phi: f64,
    pub xi: f64,
}

impl Corner {
    pub fn point(&self) -> [f64; 3] {
        lift(self.phi, self.xi)
    }
}

pub fn lift(phi: f64, xi: f64) -> [f64; 3] {
    let s = 1.0 / xi.cos();
    [phi.cos() * s, phi.sin() * s, xi.tan()]
}

#[derive(Clone, Debug)]
pub struct BoundaryContour {
    pub xi: XiFunction,
}

impl BoundaryContour {
    /// Rejects profiles with `sup |xi| >= pi/2 - margin`.
    pub fn new(xi: XiFunction, margin: f64) -> Result<Self> {
        let sup = xi.xi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if sup >= FRAC_PI_2 - margin {
            return Err(SurfaceError::Input(format!(
                "sup |xi| = {sup} leaves less than {margin} to pi/2"
            )));
        }
        Ok(Self { xi })
    }

    pub fn point(&self, phi: f64) -> [f64; 3] {
        lift(phi, self.xi.eval(phi))
    }

    /// `|z|^2 - theta^2 - 1` at the contour point.
    pub fn hyperboloid_residual(p: [f64; 3]) -> f64 {
        p[0] * p[0] + p[1] * p[1] - p[2] * p[2] - 1.0
    }

    /// Vertices of the boundary polygon when every piece of `xi` has slope
    /// exactly +1 or -1; `None` otherwise.
    pub fn polygon_corners(&self) -> Option<Vec<Corner>> {
        let n = self.xi.phi.len();
        if n < 2 {
            return None;
        }
        let slopes = self.xi.slopes();
        if slopes.iter().any(|s| (s.abs() - 1.0).abs() > 1e-12) {
            return None;
        }
        let corners: Vec<Corner> = (0..n)
            .filter(|&k| slopes[(k + n - 1) % n].signum() != slopes[k].signum())
            .map(|k| Corner {
                phi: self.xi.phi[k],
                xi: self.xi.xi[k],
            })
            .collect();
        (corners.len() >= 4).then_some(corners)
    }
}

/// `xi(. - phi0)`, i.e. the profile rotated by `phi0`.
pub fn rotate_xi(xi: &XiFunction, phi0: f64) -> XiFunction {
    let mut knots: Vec<(f64, f64)> = xi
        .phi
        .iter()
        .zip(&xi.xi)
        .map(|(&p, &x)| ((p + phi0).rem_euclid(TAU), x))
        .collect();
    knots.sort_by(|a, b| a.0.total_cmp(&b.0));
    XiFunction {
        phi: knots.iter().map(|k| k.0).collect(),
        xi: knots.iter().map(|k| k.1).collect(),
    }
}
