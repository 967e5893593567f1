//! Harmonic extension of sampled boundary data by truncated Fourier series.

use std::f64::consts::{PI, TAU};

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use tembed_core::C64;

use crate::map::{minkowski_c, SurfaceMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Discretization {
    /// Point samples; coefficients `DFT_k / N`, `k < N / 2`.
    Spectral,
    /// Samples read as cell averages of a piecewise constant boundary
    /// function; suited to boundary maps with jumps.
    Cells,
}

/// `X(zeta) = c0 + 2 Re sum_k c_k zeta^k`.
#[derive(Clone, Debug)]
pub struct FourierMap {
    pub c0: [f64; 3],
    /// `c[k - 1]` is the coefficient of `zeta^k`.
    pub c: Vec<[C64; 3]>,
}

fn dft(samples: &[[f64; 3]]) -> [Vec<C64>; 3] {
    let n = samples.len();
    let fft = FftPlanner::new().plan_fft_forward(n);
    std::array::from_fn(|i| {
        let mut buf: Vec<C64> = samples.iter().map(|s| C64::new(s[i], 0.0)).collect();
        fft.process(&mut buf);
        buf
    })
}

impl FourierMap {
    /// Coefficients from samples at `t_j = 2 pi j / N`.
    pub fn from_samples(samples: &[[f64; 3]], kind: Discretization) -> Self {
        let n = samples.len();
        let d = dft(samples);
        let h = TAU / n as f64;
        let (count, weight): (usize, Box<dyn Fn(usize) -> f64>) = match kind {
            Discretization::Spectral => (n.div_ceil(2).saturating_sub(1), Box::new(move |_| 1.0 / n as f64)),
            Discretization::Cells => (
                n / 2,
                Box::new(move |k| (2.0 * (k as f64 * h / 2.0).sin() / k as f64) / TAU),
            ),
        };
        let c0 = std::array::from_fn(|i| d[i][0].re / n as f64);
        let c = (1..=count)
            .map(|k| std::array::from_fn(|i| d[i][k % n] * weight(k)))
            .collect();
        Self { c0, c }
    }

    /// Taylor coefficients of the Hopf differential `<dX, dX>`, orders
    /// `0..count`.
    pub fn hopf_coefficients(&self, count: usize) -> Vec<C64> {
        let k = self.c.len();
        let d: Vec<[C64; 3]> = self
            .c
            .iter()
            .enumerate()
            .map(|(j, c)| c.map(|v| v * (j + 1) as f64))
            .collect();
        (0..count)
            .map(|n| {
                (0..=n)
                    .filter(|&a| a < k && n - a < k)
                    .map(|a| minkowski_c(d[a], d[n - a]))
                    .sum()
            })
            .collect()
    }

    /// Lorentz-Dirichlet energy `int |grad x|^2 + |grad y|^2 - |grad theta|^2`.
    pub fn energy(&self) -> f64 {
        4.0 * PI
            * self
                .c
                .iter()
                .enumerate()
                .map(|(j, c)| (j + 1) as f64 * (c[0].norm_sqr() + c[1].norm_sqr() - c[2].norm_sqr()))
                .sum::<f64>()
    }
}

impl SurfaceMap for FourierMap {
    fn point(&self, zeta: C64) -> [f64; 3] {
        let mut acc = [C64::new(0.0, 0.0); 3];
        for c in self.c.iter().rev() {
            for i in 0..3 {
                acc[i] = (acc[i] + c[i]) * zeta;
            }
        }
        std::array::from_fn(|i| self.c0[i] + 2.0 * acc[i].re)
    }

    fn gradient(&self, zeta: C64) -> [C64; 3] {
        let mut acc = [C64::new(0.0, 0.0); 3];
        for (j, c) in self.c.iter().enumerate().rev() {
            let k = (j + 1) as f64;
            for i in 0..3 {
                acc[i] = acc[i] * zeta + c[i] * k;
            }
        }
        acc
    }
}
