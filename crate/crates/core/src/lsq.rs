//! Dense Levenberg-Marquardt driver over closures.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::storage::Owned;
use nalgebra::{DMatrix, DVector, Dyn};

pub struct LsqOutcome {
    pub x: DVector<f64>,
    /// Max absolute residual at `x`.
    pub max_residual: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct LsqConfig {
    pub tol: f64,
    pub patience: usize,
}

impl Default for LsqConfig {
    fn default() -> Self {
        Self {
            tol: 1e-15,
            patience: 200,
        }
    }
}

struct Problem<'a> {
    x: DVector<f64>,
    eval: &'a dyn Fn(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
    cache: Option<(DVector<f64>, DMatrix<f64>)>,
}

impl Problem<'_> {
    // zero-padded so the system is never wider than tall
    fn padded(&self) -> (DVector<f64>, DMatrix<f64>) {
        let (r, j) = self.cache.clone().unwrap_or_else(|| (self.eval)(&self.x));
        let n = self.x.len();
        if r.len() >= n {
            return (r, j);
        }
        let mut rp = DVector::zeros(n);
        rp.rows_mut(0, r.len()).copy_from(&r);
        let mut jp = DMatrix::zeros(n, n);
        jp.rows_mut(0, r.len()).copy_from(&j);
        (rp, jp)
    }
}

impl LeastSquaresProblem<f64, Dyn, Dyn> for Problem<'_> {
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, x: &DVector<f64>) {
        self.x.copy_from(x);
        self.cache = Some((self.eval)(&self.x));
    }

    fn params(&self) -> DVector<f64> {
        self.x.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let (r, _) = self.padded();
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        let (_, j) = self.padded();
        j.iter().all(|v| v.is_finite()).then_some(j)
    }
}

/// Minimize `|r(x)|^2` where `eval` returns residuals and Jacobian.
pub fn minimize(
    x0: DVector<f64>,
    eval: &dyn Fn(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
    cfg: LsqConfig,
) -> LsqOutcome {
    let problem = Problem {
        cache: None,
        x: x0,
        eval,
    };
    let lm = LevenbergMarquardt::new()
        .with_ftol(cfg.tol)
        .with_xtol(cfg.tol)
        .with_gtol(cfg.tol)
        .with_patience(cfg.patience);
    let (p, report) = lm.minimize(problem);
    let (r, _) = eval(&p.x);
    LsqOutcome {
        max_residual: r.amax(),
        x: p.x,
        evaluations: report.number_of_evaluations,
        converged: report.termination.was_successful(),
    }
}

/// Number of singular values below `rel * max` plus the column deficit.
pub fn numerical_nullity(j: &DMatrix<f64>, rel: f64) -> usize {
    let n = j.ncols();
    let jt_j = j.transpose() * j;
    let eig = jt_j.symmetric_eigen();
    let max = eig.eigenvalues.amax();
    let rank = eig
        .eigenvalues
        .iter()
        .filter(|&&l| l > (rel * rel) * max)
        .count();
    n - rank
}
