//! Time evolution of
//!
//! ```text
//! u_t = (1 - nu d_xx)^{-1} [ d_xx (p(u) - eps u_x^2) - delta d_xxxx u ]
//! ```
//!
//! In spectral space the linear part is diagonal with decay rate
//! `sigma(xi) = delta xi^4 / (1 + nu xi^2)`; everything else is collected in the
//! dealiased nonlinear tendency `N(u)`.

mod initial;
mod picard;
mod stepper;

pub use initial::{InitialCondition, InitialError};
pub use picard::{picard_solve, PicardOptions, PicardOutcome};
pub use stepper::{
    auto_time_step, integrate, phi1, step_etd1, step_imex, Snapshot, Stepper, Trajectory,
};

use thiserror::Error;

use crate::eos::EquationOfState;
use crate::spectral::{
    dealias, from_spectral, spectral_derivative, to_spectral, BoundaryCondition, Field, Grid, SpectralCoeffs,
    SpectralError,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("grid (l = {grid_length}, {grid_bc}) does not match parameters (l = {length}, {bc})")]
    GridMismatch {
        grid_length: f64,
        grid_bc: BoundaryCondition,
        length: f64,
        bc: BoundaryCondition,
    },
    #[error("state contains non-finite values")]
    NonFinite,
    #[error("numerical blow-up at t = {time}")]
    BlowUp {
        time: f64,
        last_valid: Box<SimulationState>,
    },
    #[error("time step must be positive, got {0}")]
    InvalidTimeStep(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Model constants. `epsilon_sign = +1` follows `-eps (u_x^2)_xx`; `-1` flips
/// the gradient term to the grouping with `+eps u_x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub nu: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub length: f64,
    pub bc: BoundaryCondition,
    pub epsilon_sign: f64,
}

impl Params {
    pub fn new(nu: f64, epsilon: f64, delta: f64, length: f64, bc: BoundaryCondition) -> Result<Self, DynamicsError> {
        let p = Params {
            nu,
            epsilon,
            delta,
            length,
            bc,
            epsilon_sign: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_epsilon_sign(mut self, sign: f64) -> Result<Self, DynamicsError> {
        self.epsilon_sign = sign;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |what: &str| Err(DynamicsError::InvalidParams(what.to_string()));
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            return bad("nu must be finite and >= 0");
        }
        if !self.epsilon.is_finite() {
            return bad("epsilon must be finite");
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return bad("delta must be finite and > 0");
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return bad("length must be finite and > 0");
        }
        if self.epsilon_sign != 1.0 && self.epsilon_sign != -1.0 {
            return bad("epsilon_sign must be +1 or -1");
        }
        Ok(())
    }

    pub fn check_grid(&self, grid: &Grid) -> Result<(), DynamicsError> {
        if grid.length() != self.length || grid.bc() != self.bc {
            return Err(DynamicsError::GridMismatch {
                grid_length: grid.length(),
                grid_bc: grid.bc(),
                length: self.length,
                bc: self.bc,
            });
        }
        Ok(())
    }

    /// Coefficient of `u_x^2` inside `d_xx(p(u) + c u_x^2)`.
    pub(crate) fn gradient_coefficient(&self) -> f64 {
        -self.epsilon_sign * self.epsilon
    }
}

/// Integrator family used for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeChoice {
    /// Linear part backward Euler, nonlinear part forward Euler.
    Imex1,
    /// First-order exponential time differencing.
    Etd1,
}

impl SchemeChoice {
    pub fn name(self) -> &'static str {
        match self {
            SchemeChoice::Imex1 => "imex1",
            SchemeChoice::Etd1 => "etd1",
        }
    }
}

impl std::str::FromStr for SchemeChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "imex1" | "imex" => Ok(SchemeChoice::Imex1),
            "etd1" | "etd" => Ok(SchemeChoice::Etd1),
            other => Err(format!("unknown scheme `{other}` (expected imex1 or etd1)")),
        }
    }
}

/// Solution at one instant, kept both on the grid and in spectral form.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    pub t: f64,
    u: Field,
    u_hat: SpectralCoeffs,
}

impl SimulationState {
    pub fn new(t: f64, u: Field) -> Self {
        let u_hat = to_spectral(&u);
        SimulationState { t, u, u_hat }
    }

    pub fn from_spectral(t: f64, u_hat: SpectralCoeffs) -> Result<Self, DynamicsError> {
        if !u_hat.is_finite() {
            return Err(DynamicsError::NonFinite);
        }
        let u = from_spectral(&u_hat);
        Ok(SimulationState { t, u, u_hat })
    }

    pub fn field(&self) -> &Field {
        &self.u
    }

    pub fn spectral(&self) -> &SpectralCoeffs {
        &self.u_hat
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }
}

/// Decay rate of the linear semigroup: `sigma(xi) = delta xi^4 / (1 + nu xi^2)`.
pub fn linear_symbol(xi: f64, params: &Params) -> f64 {
    let xi2 = xi * xi;
    params.delta * xi2 * xi2 / (1.0 + params.nu * xi2)
}

/// Dealiased nonlinear tendency `-xi^2 (p(u) - eps u_x^2)^ / (1 + nu xi^2)`.
pub fn nonlinear_tendency(
    u: &Field,
    u_hat: &SpectralCoeffs,
    params: &Params,
    eos: &EquationOfState,
) -> Result<SpectralCoeffs, DynamicsError> {
    let ux = from_spectral(&spectral_derivative(u_hat, 1)?);
    let c = params.gradient_coefficient();
    let q: Vec<f64> = u
        .values()
        .iter()
        .zip(ux.values())
        .map(|(&v, &g)| eos.pressure(v) + c * g * g)
        .collect();
    let q = Field::new(u.grid().clone(), q).map_err(|_| DynamicsError::NonFinite)?;
    let nu = params.nu;
    Ok(dealias(&to_spectral(&q).scale_by(|xi| -xi * xi / (1.0 + nu * xi * xi))))
}

/// `u_t` in spectral form.
pub fn rhs_spectral(state: &SimulationState, params: &Params, eos: &EquationOfState) -> Result<SpectralCoeffs, DynamicsError> {
    params.check_grid(state.grid())?;
    if !state.u_hat.is_finite() {
        return Err(DynamicsError::NonFinite);
    }
    let n_hat = nonlinear_tendency(&state.u, &state.u_hat, params, eos)?;
    let linear = state.u_hat.scale_by(|xi| linear_symbol(xi, params));
    Ok(n_hat.add_scaled(&linear, -1.0))
}

/// Time derivative `u_t` on the grid.
pub fn rhs(state: &SimulationState, params: &Params, eos: &EquationOfState) -> Result<Field, DynamicsError> {
    Ok(from_spectral(&rhs_spectral(state, params, eos)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    fn params(nu: f64, eps: f64, delta: f64) -> Params {
        Params::new(nu, eps, delta, 1.0, BoundaryCondition::Periodic).unwrap()
    }

    #[test]
    fn symbol_values() {
        assert_eq!(linear_symbol(0.0, &params(1.0, 0.0, 1.0)), 0.0);
        assert_eq!(linear_symbol(1.0, &params(1.0, 0.0, 1.0)), 0.5);
        let s = linear_symbol(2.0, &params(0.1, 0.0, 0.01));
        assert!((s - 0.16 / 1.4).abs() < 1e-16);
    }

    #[test]
    fn constant_state_is_stationary() {
        let g = Grid::new(1.0, 32, BoundaryCondition::Periodic).unwrap();
        let state = SimulationState::new(0.0, Field::constant(&g, 0.4).unwrap());
        let ut = rhs(&state, &params(0.1, 0.1, 0.001), &EquationOfState::default()).unwrap();
        assert!(ut.max_abs() < 1e-14);
    }

    #[test]
    fn single_mode_is_an_eigenfunction_of_the_linear_part() {
        let p = params(0.1, 0.0, 0.01);
        for bc in [BoundaryCondition::Periodic, BoundaryCondition::Neumann] {
            let p = Params { bc, ..p };
            let g = Grid::new(1.0, 32, bc).unwrap();
            let u = Field::from_fn(&g, |x| (2.0 * PI * x).cos()).unwrap();
            let ut = rhs(&SimulationState::new(0.0, u.clone()), &p, &EquationOfState::zero()).unwrap();
            let s = linear_symbol(2.0 * PI, &p);
            for (a, b) in ut.values().iter().zip(u.values()) {
                assert!((a + s * b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(-1.0, 0.0, 1.0, 1.0, BoundaryCondition::Periodic).is_err());
        assert!(Params::new(0.0, 0.0, 0.0, 1.0, BoundaryCondition::Periodic).is_err());
        assert!(Params::new(0.0, 0.0, 1.0, -1.0, BoundaryCondition::Periodic).is_err());
        assert!(params(0.1, 0.1, 0.1).with_epsilon_sign(0.5).is_err());
        assert_eq!(params(0.1, 0.2, 0.1).with_epsilon_sign(-1.0).unwrap().gradient_coefficient(), 0.2);
    }

    #[test]
    fn rejects_mismatched_grid() {
        let g = Grid::new(2.0, 16, BoundaryCondition::Periodic).unwrap();
        let state = SimulationState::new(0.0, Field::zeros(&g));
        assert!(matches!(
            rhs(&state, &params(0.1, 0.0, 1.0), &EquationOfState::zero()),
            Err(DynamicsError::GridMismatch { .. })
        ));
    }

    #[test]
    fn scheme_names_parse() {
        assert_eq!("etd1".parse::<SchemeChoice>().unwrap(), SchemeChoice::Etd1);
        assert_eq!("IMEX1".parse::<SchemeChoice>().unwrap(), SchemeChoice::Imex1);
        assert!("rk4".parse::<SchemeChoice>().is_err());
    }
}
