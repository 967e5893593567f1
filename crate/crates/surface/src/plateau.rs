//! Douglas-type solve for the conformal harmonic parametrization.
//!
//! The unknowns are the boundary correspondence values `phi(t_j)` at
//! `t_j = 2 pi j / N`. For light-like polygons the correspondence is
//! initialized from the exact jump-point solution; otherwise from the
//! identity. Both are then refined by Levenberg-Marquardt on the low Taylor
//! coefficients of the Hopf differential, with three pinned nodes.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use tembed_core::domain::XiFunction;
use tembed_core::lsq::{minimize, LsqConfig};
use tembed_core::C64;

use crate::boundary::{BoundaryContour, Corner};
use crate::error::{Result, SurfaceError};
use crate::fourier::{Discretization, FourierMap};
use crate::map::SurfaceMap;
use crate::polygon::PolygonMap;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeshConfig {
    /// Number of boundary nodes.
    pub n: usize,
    /// Target for the normalized interior L2 conformality residual.
    pub tol: f64,
    /// Residuals are measured on `|zeta| <= 1 - collar`.
    pub collar: f64,
    pub radial: usize,
    pub angular: usize,
    pub refine: bool,
    pub patience: usize,
    /// Required gap between `sup |xi|` and `pi / 2`.
    pub margin: f64,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            n: 256,
            tol: 1e-4,
            collar: 0.05,
            radial: 30,
            angular: 256,
            refine: true,
            patience: 20,
            margin: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct ConformalityReport {
    pub l2: f64,
    pub linf: f64,
    /// Residual divided by `|d z|^2 + |d conj z|^2`.
    pub l2_normalized: f64,
    pub linf_normalized: f64,
    pub samples: usize,
}

/// Hopf differential on the polar grid `r in [0, 1 - collar]`.
pub fn conformality(map: &dyn SurfaceMap, collar: f64, radial: usize, angular: usize) -> ConformalityReport {
    let rmax = 1.0 - collar;
    let (mut s2, mut m, mut n2, mut nm, mut count) = (0.0, 0.0f64, 0.0, 0.0f64, 0);
    for i in 0..radial {
        let r = if radial > 1 { rmax * i as f64 / (radial - 1) as f64 } else { 0.0 };
        for j in 0..angular {
            let zeta = C64::from_polar(r, TAU * j as f64 / angular as f64);
            let f = map.hopf(zeta).norm();
            let (dz, dzb, _) = map.complex_gradient(zeta);
            let rel = f / (dz.norm_sqr() + dzb.norm_sqr());
            s2 += f * f;
            n2 += rel * rel;
            m = m.max(f);
            nm = nm.max(rel);
            count += 1;
        }
    }
    ConformalityReport {
        l2: (s2 / count as f64).sqrt(),
        linf: m,
        l2_normalized: (n2 / count as f64).sqrt(),
        linf_normalized: nm,
        samples: count,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlateauReport {
    pub n: usize,
    pub discretization: Discretization,
    pub initial: ConformalityReport,
    pub conformality: ConformalityReport,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub refinement_accepted: bool,
    pub refinement_evaluations: usize,
    /// Max `| |z|^2 - theta^2 - 1 |` over boundary samples.
    pub boundary_hyperboloid: f64,
    pub jump_equation_residual: Option<f64>,
    pub warning: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ConformalParam {
    pub xi: XiFunction,
    pub t: Vec<f64>,
    /// Lifted, non-decreasing boundary correspondence.
    pub phi: Vec<f64>,
    pub samples: Vec<[f64; 3]>,
    pub fourier: FourierMap,
    /// Closed-form map for light-like polygons.
    pub exact: Option<PolygonMap>,
    pub report: PlateauReport,
}

impl ConformalParam {
    /// Exact map when available, the mesh discretization otherwise.
    pub fn map(&self) -> &dyn SurfaceMap {
        match &self.exact {
            Some(p) => p,
            None => &self.fourier,
        }
    }
}

impl SurfaceMap for ConformalParam {
    fn point(&self, zeta: C64) -> [f64; 3] {
        self.map().point(zeta)
    }

    fn gradient(&self, zeta: C64) -> [C64; 3] {
        self.map().gradient(zeta)
    }
}

fn lift_sequence(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    for (j, &p) in raw.iter().enumerate() {
        if j == 0 {
            out.push(p);
        } else {
            let prev: f64 = out[j - 1];
            let d = (p - prev + TAU / 2.0).rem_euclid(TAU) - TAU / 2.0;
            out.push(prev + d);
        }
    }
    out
}

/// Correspondence sampled from the exact polygon map: constant on arcs,
/// and on a cell straddling a jump the point of the edge equal to the
/// cell average.
fn polygon_correspondence(poly: &PolygonMap, n: usize) -> Vec<f64> {
    let h = TAU / n as f64;
    let nc = poly.corners.len();
    let raw: Vec<f64> = (0..n)
        .map(|j| {
            let t = h * j as f64;
            let (lo, hi) = (t - h / 2.0, t + h / 2.0);
            let mut weight = vec![0.0; nc];
            for (k, w) in weight.iter_mut().enumerate() {
                let (a, b) = poly.arc(k);
                for shift in [-TAU, 0.0, TAU] {
                    *w += ((hi).min(b + shift) - (lo).max(a + shift)).max(0.0) / h;
                }
            }
            let mut order: Vec<usize> = (0..nc).collect();
            order.sort_by(|&a, &b| weight[b].total_cmp(&weight[a]));
            let (k0, k1) = (order[0], order[1]);
            if weight[k1] <= 1e-15 {
                return poly.corners[k0].phi;
            }
            // consecutive corners share a light-like edge
            let (prev, next) = if (k0 + 1) % nc == k1 { (k0, k1) } else if (k1 + 1) % nc == k0 { (k1, k0) } else {
                return poly.corners[k0].phi;
            };
            let lam = weight[next] / (weight[prev] + weight[next]);
            let (a, b) = (poly.points[prev], poly.points[next]);
            let theta = (1.0 - lam) * a[2] + lam * b[2];
            edge_angle(&poly.corners[prev], &poly.corners[next], theta.atan())
        })
        .collect();
    lift_sequence(&raw)
}

/// Angle on the edge between two corners where `xi` takes the value `x`.
fn edge_angle(a: &Corner, b: &Corner, x: f64) -> f64 {
    let mut dphi = b.phi - a.phi;
    if dphi <= 0.0 {
        dphi += TAU;
    }
    let s = (b.xi - a.xi) / dphi;
    a.phi + (x - a.xi) / s
}

fn hopf_residual(
    contour: &BoundaryContour,
    phi: &[f64],
    kind: Discretization,
    count: usize,
) -> DVector<f64> {
    if phi.windows(2).any(|w| w[1] < w[0]) || phi[phi.len() - 1] > phi[0] + TAU {
        // reject steps that break monotonicity
        return DVector::from_element(2 * count, 1e3);
    }
    let samples: Vec<[f64; 3]> = phi.iter().map(|&p| contour.point(p)).collect();
    let c = FourierMap::from_samples(&samples, kind).hopf_coefficients(count);
    DVector::from_iterator(2 * count, c.iter().map(|z| z.re).chain(c.iter().map(|z| z.im)))
}

pub fn plateau_solve(xi: &XiFunction, cfg: &MeshConfig) -> Result<ConformalParam> {
    let n = cfg.n;
    if n < 8 || n % 4 != 0 {
        return Err(SurfaceError::Input("mesh size must be a multiple of 4, at least 8".into()));
    }
    let contour = BoundaryContour::new(xi.clone(), cfg.margin)?;
    let h = TAU / n as f64;
    let t: Vec<f64> = (0..n).map(|j| h * j as f64).collect();
    let (exact, kind, mut phi) = match contour.polygon_corners() {
        Some(corners) => {
            let poly = PolygonMap::solve(&corners)?;
            let phi = polygon_correspondence(&poly, n);
            (Some(poly), Discretization::Cells, phi)
        }
        None => (None, Discretization::Spectral, t.clone()),
    };
    let build = |phi: &[f64]| {
        let samples: Vec<[f64; 3]> = phi.iter().map(|&p| contour.point(p)).collect();
        let f = FourierMap::from_samples(&samples, kind);
        (samples, f)
    };
    let measure = |f: &FourierMap| conformality(f, cfg.collar, cfg.radial, cfg.angular);
    let (mut samples, mut fourier) = build(&phi);
    let initial = measure(&fourier);
    let energy_initial = fourier.energy();
    let mut current = initial;
    let mut accepted = false;
    let mut evaluations = 0;
    if cfg.refine && initial.l2 > 1e-13 {
        let pins = [0, n / 4, n / 2];
        let free: Vec<usize> = (0..n).filter(|j| !pins.contains(j)).collect();
        let count = match kind {
            Discretization::Cells => n / 2 - 1,
            Discretization::Spectral => n / 2 - 3,
        };
        let base = phi.clone();
        let compose = |x: &DVector<f64>| {
            let mut p = base.clone();
            for (k, &j) in free.iter().enumerate() {
                p[j] = x[k];
            }
            p
        };
        let eval = |x: &DVector<f64>| {
            let r = hopf_residual(&contour, &compose(x), kind, count);
            let mut jac = DMatrix::zeros(r.len(), x.len());
            let step = 1e-7;
            for k in 0..x.len() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[k] += step;
                xm[k] -= step;
                let d = (hopf_residual(&contour, &compose(&xp), kind, count)
                    - hopf_residual(&contour, &compose(&xm), kind, count))
                    / (2.0 * step);
                jac.set_column(k, &d);
            }
            (r, jac)
        };
        let x0 = DVector::from_iterator(free.len(), free.iter().map(|&j| phi[j]));
        let out = minimize(
            x0,
            &eval,
            LsqConfig {
                tol: 1e-15,
                patience: cfg.patience,
            },
        );
        evaluations = out.evaluations;
        let candidate = compose(&out.x);
        if candidate.windows(2).all(|w| w[1] >= w[0]) {
            let (s, f) = build(&candidate);
            let c = measure(&f);
            if c.l2 < current.l2 {
                phi = candidate;
                samples = s;
                fourier = f;
                current = c;
                accepted = true;
            }
        }
    }
    if phi.windows(2).any(|w| w[1] < w[0]) {
        return Err(SurfaceError::Monotonicity);
    }
    let boundary_hyperboloid = samples
        .iter()
        .map(|&p| BoundaryContour::hyperboloid_residual(p).abs())
        .fold(0.0, f64::max);
    let warning = (current.l2_normalized > cfg.tol).then(|| {
        format!(
            "normalized L2 residual {:.3e} above tolerance {:.1e} at N = {n}",
            current.l2_normalized, cfg.tol
        )
    });
    let report = PlateauReport {
        n,
        discretization: kind,
        initial,
        conformality: current,
        energy_initial,
        energy_final: fourier.energy(),
        refinement_accepted: accepted,
        refinement_evaluations: evaluations,
        boundary_hyperboloid,
        jump_equation_residual: exact.as_ref().map(|p| p.equation_residual),
        warning,
    };
    Ok(ConformalParam {
        xi: xi.clone(),
        t,
        phi,
        samples,
        fourier,
        exact,
        report,
    })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SpacelikeReport {
    /// Max of `|d theta| / |d z|`.
    pub max_ratio: f64,
    /// Max of `|dbar z| / |d theta|`, the lower inequality.
    pub max_lower_ratio: f64,
    pub worst: [f64; 2],
    pub samples: usize,
}

/// Pointwise `|d z| > |d theta| >= |dbar z|` on `|zeta| <= 1 - collar`.
pub fn verify_spacelike(map: &dyn SurfaceMap, collar: f64, radial: usize, angular: usize) -> Result<SpacelikeReport> {
    let rmax = 1.0 - collar;
    let mut rep = SpacelikeReport {
        max_ratio: 0.0,
        max_lower_ratio: 0.0,
        worst: [0.0; 2],
        samples: 0,
    };
    for i in 0..radial {
        let r = if radial > 1 { rmax * i as f64 / (radial - 1) as f64 } else { 0.0 };
        for j in 0..angular {
            let zeta = C64::from_polar(r, TAU * j as f64 / angular as f64);
            let (dz, dzc, dt) = map.complex_gradient(zeta);
            let ratio = dt.norm() / dz.norm();
            if !(ratio < 1.0) {
                return Err(SurfaceError::NotSpacelike(ratio, zeta));
            }
            if dt.norm() > 0.0 {
                rep.max_lower_ratio = rep.max_lower_ratio.max(dzc.conj().norm() / dt.norm());
            }
            if ratio >= rep.max_ratio {
                rep.max_ratio = ratio;
                rep.worst = [zeta.re, zeta.im];
            }
            rep.samples += 1;
        }
    }
    Ok(rep)
}
