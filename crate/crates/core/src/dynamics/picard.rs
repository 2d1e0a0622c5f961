//! Picard iteration on the mild (variation-of-constants) formulation
//!
//! ```text
//! u(t) = e^{-sigma t} u0 + int_0^t e^{-sigma (t - s)} N(u(s)) ds
//! ```
//!
//! on a fixed substep grid `t_j = j T / M`. The convolution uses the
//! exponential rectangle rule, `int_{t_j}^{t_{j+1}} e^{-sigma (t_{j+1} - s)} ds
//! N(u_j) = dt phi_1(-sigma dt) N(u_j)`, so a fixed point of the iteration is
//! exactly the ETD1 trajectory with step `T / M`.

use super::{nonlinear_tendency, DynamicsError, Params, SchemeChoice, Stepper};
use crate::eos::EquationOfState;
use crate::spectral::{from_spectral, to_spectral, Field, SpectralCoeffs};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Quadrature substeps `M` on `[0, T]`.
    pub substeps: usize,
    pub max_iterations: usize,
    /// Convergence threshold on `sup_j ||u^{(k+1)}(t_j) - u^{(k)}(t_j)||`.
    pub tol: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            substeps: 10,
            max_iterations: 50,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    /// Last iterate at `t = T`.
    pub solution: Field,
    pub converged: bool,
    pub iterations: usize,
    /// `sup_j ||u^{(k+1)} - u^{(k)}||_{L^2}` for each iteration; infinite for
    /// an iterate that overflowed, which ends the iteration.
    pub increments: Vec<f64>,
    /// `r_k = increment_k / increment_{k-1}`.
    pub ratios: Vec<f64>,
}

pub fn picard_solve(
    u0: &Field,
    params: &Params,
    eos: &EquationOfState,
    horizon: f64,
    options: PicardOptions,
) -> Result<PicardOutcome, DynamicsError> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(DynamicsError::InvalidParams(format!("horizon must be positive, got {horizon}")));
    }
    if options.substeps == 0 || options.max_iterations == 0 {
        return Err(DynamicsError::InvalidParams("substeps and max_iterations must be at least 1".into()));
    }
    let dt = horizon / options.substeps as f64;
    let kernel = Stepper::new(u0.grid(), params, SchemeChoice::Etd1, dt)?;
    let u0_hat = to_spectral(u0);

    // u^{(0)}(t) = u0 for all t
    let mut path: Vec<SpectralCoeffs> = vec![u0_hat.clone(); options.substeps + 1];
    let mut increments = Vec::new();
    let mut ratios = Vec::new();
    let mut converged = false;

    'outer: for _ in 0..options.max_iterations {
        let mut next = Vec::with_capacity(path.len());
        next.push(u0_hat.clone());
        for (j, prev) in path[..options.substeps].iter().enumerate() {
            let advanced = match nonlinear_tendency(&from_spectral(prev), prev, params, eos) {
                Ok(n_hat) => kernel.advance(&next[j], &n_hat),
                Err(DynamicsError::NonFinite) => break 'outer,
                Err(e) => return Err(e),
            };
            if !advanced.is_finite() {
                // divergent iterate: report it and keep the last finite one
                if let Some(&last) = increments.last() {
                    ratios.push(f64::INFINITY / last);
                }
                increments.push(f64::INFINITY);
                break 'outer;
            }
            next.push(advanced);
        }
        let increment = next
            .iter()
            .zip(&path)
            .map(|(a, b)| a.add_scaled(b, -1.0).norm())
            .fold(0.0, f64::max);
        if let Some(&last) = increments.last() {
            ratios.push(if last > 0.0 { increment / last } else { 0.0 });
        }
        increments.push(increment);
        path = next;
        if increment < options.tol {
            converged = true;
            break;
        }
    }

    Ok(PicardOutcome {
        solution: from_spectral(path.last().expect("path has M + 1 entries")),
        converged,
        iterations: increments.len(),
        increments,
        ratios,
    })
}
