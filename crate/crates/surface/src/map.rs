//! Disc parametrizations `zeta -> (x0, x1, theta)` of a surface in R^{2,1}.

use tembed_core::C64;

/// Harmonic map from the unit disc. `gradient` returns `d/dzeta` of the
/// three real coordinates.
pub trait SurfaceMap {
    fn point(&self, zeta: C64) -> [f64; 3];
    fn gradient(&self, zeta: C64) -> [C64; 3];

    fn z(&self, zeta: C64) -> C64 {
        let p = self.point(zeta);
        C64::new(p[0], p[1])
    }

    fn theta(&self, zeta: C64) -> f64 {
        self.point(zeta)[2]
    }

    /// `(d_zeta z, d_zeta conj(z), d_zeta theta)`.
    fn complex_gradient(&self, zeta: C64) -> (C64, C64, C64) {
        let g = self.gradient(zeta);
        let i = C64::i();
        (g[0] + i * g[1], g[0] - i * g[1], g[2])
    }

    /// Hopf differential `<dX, dX>` in the Lorentz metric.
    fn hopf(&self, zeta: C64) -> C64 {
        let g = self.gradient(zeta);
        g[0] * g[0] + g[1] * g[1] - g[2] * g[2]
    }
}

pub(crate) fn minkowski(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] - a[2] * b[2]
}

pub(crate) fn minkowski_c(a: [C64; 3], b: [C64; 3]) -> C64 {
    a[0] * b[0] + a[1] * b[1] - a[2] * b[2]
}
