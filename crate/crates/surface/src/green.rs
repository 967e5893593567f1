//! Dirichlet Green function of the unit disc and Wick sums.

use std::f64::consts::TAU;

use tembed_core::C64;

use crate::error::{Result, SurfaceError};

/// `-(1 / 2 pi) log |(a - b) / (1 - a conj b)|`.
pub fn green_disc(a: C64, b: C64) -> Result<f64> {
    let d = (a - b).norm();
    if d == 0.0 {
        return Err(SurfaceError::Coincident);
    }
    if a.norm() >= 1.0 || b.norm() >= 1.0 {
        return Err(SurfaceError::OutOfDomain(if a.norm() >= 1.0 { a } else { b }));
    }
    Ok(-(d / (1.0 - a * b.conj()).norm()).ln() / TAU)
}

/// Sum over perfect pairings of products of `green_disc`; zero for an
/// odd number of points.
pub fn gff_npoint(points: &[C64]) -> Result<f64> {
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if a == b {
                return Err(SurfaceError::Coincident);
            }
        }
    }
    if points.len() % 2 == 1 {
        return Ok(0.0);
    }
    wick(points)
}

fn wick(points: &[C64]) -> Result<f64> {
    if points.is_empty() {
        return Ok(1.0);
    }
    let mut total = 0.0;
    for k in 1..points.len() {
        let rest: Vec<C64> = points[1..]
            .iter()
            .enumerate()
            .filter(|&(j, _)| j + 1 != k)
            .map(|(_, &z)| z)
            .collect();
        total += green_disc(points[0], points[k])? * wick(&rest)?;
    }
    Ok(total)
}
