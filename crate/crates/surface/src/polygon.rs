//! Exact harmonic map for a light-like boundary polygon.
//!
//! Each corner is the image of a whole boundary arc; the map jumps across
//! an edge at a single point `e^{i theta_i}`. Conformality reduces to one
//! real equation per jump point,
//! `sum_{j != i} <J_i, J_j> cot((theta_j - theta_i) / 2) = 0`,
//! with `J_i = C_i - C_{i-1}` light-like. Three jump points are pinned at
//! edge midpoint angles to fix the Moebius freedom.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use tembed_core::lsq::{minimize, LsqConfig};
use tembed_core::C64;

use crate::boundary::Corner;
use crate::error::{Result, SurfaceError};
use crate::map::{minkowski, SurfaceMap};

#[derive(Clone, Debug)]
pub struct PolygonMap {
    pub corners: Vec<Corner>,
    pub points: Vec<[f64; 3]>,
    /// `theta[i]` is the jump from corner `i - 1` to corner `i`; corner `k`
    /// owns the arc `(theta[k], theta[k + 1])`.
    pub theta: Vec<f64>,
    pub equation_residual: f64,
}

/// Angle halfway along the edge entering corner `i`.
fn edge_midpoint(corners: &[Corner], i: usize) -> f64 {
    let n = corners.len();
    let prev = if i == 0 { corners[n - 1].phi - TAU } else { corners[i - 1].phi };
    0.5 * (prev + corners[i].phi)
}

fn jump_matrix(points: &[[f64; 3]]) -> DMatrix<f64> {
    let n = points.len();
    let jumps: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let (a, b) = (points[(i + n - 1) % n], points[i]);
            [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| minkowski(jumps[i], jumps[j]))
}

fn equations(m: &DMatrix<f64>, theta: &[f64]) -> DVector<f64> {
    let n = theta.len();
    DVector::from_fn(n, |i, _| {
        (0..n)
            .filter(|&j| j != i)
            .map(|j| m[(i, j)] / (0.5 * (theta[j] - theta[i])).tan())
            .sum()
    })
}

impl PolygonMap {
    pub fn solve(corners: &[Corner]) -> Result<Self> {
        let n = corners.len();
        if n < 4 {
            return Err(SurfaceError::Input("boundary polygon needs at least four corners".into()));
        }
        let points: Vec<[f64; 3]> = corners.iter().map(Corner::point).collect();
        let m = jump_matrix(&points);
        let mut theta: Vec<f64> = (0..n).map(|i| edge_midpoint(corners, i)).collect();
        let free: Vec<usize> = (3..n).collect();
        if !free.is_empty() {
            let base = theta.clone();
            let compose = |x: &DVector<f64>| {
                let mut t = base.clone();
                for (k, &i) in free.iter().enumerate() {
                    t[i] = x[k];
                }
                t
            };
            let eval = |x: &DVector<f64>| {
                let t = compose(x);
                let r = equations(&m, &t);
                let mut jac = DMatrix::zeros(n, free.len());
                for i in 0..n {
                    for (k, &j) in free.iter().enumerate() {
                        jac[(i, k)] = if j == i {
                            (0..n)
                                .filter(|&l| l != i)
                                .map(|l| 0.5 * m[(i, l)] / (0.5 * (t[l] - t[i])).sin().powi(2))
                                .sum()
                        } else {
                            -0.5 * m[(i, j)] / (0.5 * (t[j] - t[i])).sin().powi(2)
                        };
                    }
                }
                (r, jac)
            };
            let x0 = DVector::from_iterator(free.len(), free.iter().map(|&i| theta[i]));
            let out = minimize(x0, &eval, LsqConfig::default());
            theta = compose(&out.x);
        }
        let scale = m.amax().max(1.0);
        let residual = equations(&m, &theta).amax() / scale;
        let ordered = theta.windows(2).all(|w| w[1] > w[0]) && theta[n - 1] < theta[0] + TAU;
        if !ordered || !(residual < 1e-11) {
            return Err(SurfaceError::JumpSolve(residual));
        }
        Ok(Self {
            corners: corners.to_vec(),
            points,
            theta,
            equation_residual: residual,
        })
    }

    /// Arc `(a, b)` of boundary angles owned by corner `k`.
    pub fn arc(&self, k: usize) -> (f64, f64) {
        let n = self.theta.len();
        let b = if k + 1 < n { self.theta[k + 1] } else { self.theta[0] + TAU };
        (self.theta[k], b)
    }

    /// Boundary value at angle `t`: the corner owning `t`, or the edge
    /// between two corners exactly at a jump.
    pub fn boundary_owner(&self, t: f64) -> usize {
        let n = self.theta.len();
        let s = self.theta[0] + (t - self.theta[0]).rem_euclid(TAU);
        (0..n).rev().find(|&k| self.theta[k] <= s).unwrap_or(n - 1)
    }
}

/// Harmonic measure of the arc `(a, b)` seen from `zeta`.
pub fn harmonic_measure(zeta: C64, a: f64, b: f64) -> f64 {
    let ea = C64::from_polar(1.0, a);
    let eb = C64::from_polar(1.0, b);
    let v = ((eb - zeta) / (ea - zeta)).arg() / PI - (b - a) / TAU;
    v - v.floor()
}

fn harmonic_measure_dz(zeta: C64, a: f64, b: f64) -> C64 {
    let ea = C64::from_polar(1.0, a);
    let eb = C64::from_polar(1.0, b);
    (1.0 / (ea - zeta) - 1.0 / (eb - zeta)) / C64::new(0.0, TAU)
}

impl SurfaceMap for PolygonMap {
    fn point(&self, zeta: C64) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (k, c) in self.points.iter().enumerate() {
            let (a, b) = self.arc(k);
            let w = harmonic_measure(zeta, a, b);
            for i in 0..3 {
                out[i] += c[i] * w;
            }
        }
        out
    }

    fn gradient(&self, zeta: C64) -> [C64; 3] {
        let mut out = [C64::new(0.0, 0.0); 3];
        for (k, c) in self.points.iter().enumerate() {
            let (a, b) = self.arc(k);
            let w = harmonic_measure_dz(zeta, a, b);
            for i in 0..3 {
                out[i] += c[i] * w;
            }
        }
        out
    }
}
