use std::f64::consts::SQRT_2;

use crate::spectral::{from_spectral, sobolev_norm_sq, spectral_derivative, to_spectral, Field};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CancellationCheck {
    /// `|int u_x^2 u_xx dx|`.
    pub residual: f64,
    /// `||u||_{H^2}^3`.
    pub scale: f64,
}

impl CancellationCheck {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            self.residual
        }
    }
}

/// Evaluates `int_0^l u_x^2 u_xx dx`, which vanishes for fields obeying either
/// boundary family. The cubic integrand is sampled on a grid twice as fine as
/// the field's, where the quadrature of the trigonometric interpolant is exact.
pub fn cancellation_check(u: &Field) -> CancellationCheck {
    let n = u.grid().len();
    let u_hat = to_spectral(u);
    let ux = spectral_derivative(&u_hat, 1).expect("order 1");
    let uxx = spectral_derivative(&u_hat, 2).expect("order 2");
    let ux = from_spectral(&ux.resample(2 * n).expect("refined grid is valid"));
    let uxx = from_spectral(&uxx.resample(2 * n).expect("refined grid is valid"));
    let sum: f64 = ux
        .values()
        .iter()
        .zip(uxx.values())
        .map(|(g, c)| g * g * c)
        .sum();
    let integral = sum * ux.grid().spacing();
    CancellationCheck {
        residual: integral.abs(),
        scale: sobolev_norm_sq(&u_hat, 2).powf(1.5),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgmonCheck {
    /// `||v||_inf`.
    pub lhs: f64,
    /// `sqrt(2) ||v_x||^{1/2} ||v||^{1/2} + l^{-1/2} ||v||`.
    pub rhs: f64,
    pub margin: f64,
}

impl AgmonCheck {
    /// `lhs <= rhs`, up to a relative round-off allowance of 1e-12.
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + 1e-12)
    }
}

/// Interpolation bound `||v||_inf <= c1 ||v_x||^{1/2} ||v||^{1/2} + c2 ||v||`
/// with `c1 = sqrt(2)`, `c2 = l^{-1/2}`. The supremum is taken over the grid
/// samples and a fourfold spectral refinement.
pub fn agmon_check(v: &Field) -> AgmonCheck {
    let l = v.grid().length();
    let v_hat = to_spectral(v);
    let norm = v_hat.norm();
    let norm_x = spectral_derivative(&v_hat, 1).expect("order 1").norm();
    let fine = from_spectral(&v_hat.resample(4 * v.grid().len()).expect("refined grid is valid"));
    let lhs = v.max_abs().max(fine.max_abs());
    let rhs = SQRT_2 * (norm_x * norm).sqrt() + norm / l.sqrt();
    AgmonCheck {
        lhs,
        rhs,
        margin: rhs - lhs,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCheck {
    /// `max |u_x|` over `x = 0, l`.
    pub ux: f64,
    /// `max |u_xxx|` over `x = 0, l`.
    pub uxxx: f64,
    /// `||u||_{H^3}`.
    pub h3: f64,
}

impl BoundaryCheck {
    pub fn relative(&self) -> f64 {
        let worst = self.ux.max(self.uxxx);
        if self.h3 > 0.0 {
            worst / self.h3
        } else {
            worst
        }
    }
}

/// Evaluates `u_x` and `u_xxx` of the spectral interpolant at both endpoints.
/// Meaningful for Neumann grids; periodic fields are reported as well.
pub fn neumann_boundary_check(u: &Field) -> BoundaryCheck {
    let l = u.grid().length();
    let u_hat = to_spectral(u);
    let d1 = spectral_derivative(&u_hat, 1).expect("order 1");
    let d3 = spectral_derivative(&u_hat, 3).expect("order 3");
    let at_ends = |c: &crate::spectral::SpectralCoeffs| c.evaluate_at(0.0).abs().max(c.evaluate_at(l).abs());
    BoundaryCheck {
        ux: at_ends(&d1),
        uxxx: at_ends(&d3),
        h3: sobolev_norm_sq(&u_hat, 3).sqrt(),
    }
}
