//! Norms, energies and inequality checks along trajectories.
//!
//! All norms are discrete `L^2(0, l)` norms evaluated spectrally, so that the
//! identities between them hold to round-off. Fields named `l2*` hold
//! *squared* norms.

mod certificate;
mod checks;

pub use certificate::{
    check_energy_inequality, check_rate_inequality, default_constant_grid, energy_report, gronwall_envelope, rate_report,
    time_derivative, CertificateReport, Constants, EnvelopeCheck, Estimate, GronwallEnvelope,
};
pub use checks::{agmon_check, cancellation_check, neumann_boundary_check, AgmonCheck, BoundaryCheck, CancellationCheck};

use thiserror::Error;

use crate::dynamics::{rhs_spectral, DynamicsError, Params, SimulationState};
use crate::eos::EquationOfState;
use crate::spectral::{spectral_derivative, to_spectral, Field, SpectralCoeffs};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("certificate needs at least 3 snapshots, got {0}")]
    TooFewSnapshots(usize),
    #[error("Gronwall envelope unavailable: {0}")]
    EnvelopeUnavailable(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Squared norms and energies at one instant.
///
/// `e0 = (l2u + nu l2ux) / 2` and `e1 = (l2ut + nu l2uxt) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyRecord {
    pub t: f64,
    pub mass: f64,
    pub l2u: f64,
    pub l2ux: f64,
    pub l2uxx: f64,
    pub e0: f64,
    pub l2ut: f64,
    pub l2uxt: f64,
    pub l2uxxt: f64,
    pub e1: f64,
}

impl EnergyRecord {
    pub const CSV_HEADER: &'static str = "t,mass,l2u,l2ux,l2uxx,E0,l2ut,l2uxt,l2uxxt,E1";

    pub fn columns(&self) -> [f64; 10] {
        [
            self.t, self.mass, self.l2u, self.l2ux, self.l2uxx, self.e0, self.l2ut, self.l2uxt, self.l2uxxt, self.e1,
        ]
    }
}

/// `(||v||^2, ||v_x||^2, ||v_xx||^2)`.
fn derivative_norms(v: &SpectralCoeffs) -> (f64, f64, f64) {
    let d1 = spectral_derivative(v, 1).expect("order 1");
    let d2 = spectral_derivative(v, 2).expect("order 2");
    (v.norm_sq(), d1.norm_sq(), d2.norm_sq())
}

/// `u`-part of the record; the `u_t` fields are left at zero.
pub fn state_norms(t: f64, u: &Field, nu: f64) -> EnergyRecord {
    let u_hat = to_spectral(u);
    let (l2u, l2ux, l2uxx) = derivative_norms(&u_hat);
    EnergyRecord {
        t,
        mass: u_hat.mean() * u.grid().length(),
        l2u,
        l2ux,
        l2uxx,
        e0: 0.5 * (l2u + nu * l2ux),
        ..EnergyRecord::default()
    }
}

/// Full record; `u_t` comes from the right-hand side and is differentiated
/// spectrally.
pub fn norms(state: &SimulationState, params: &Params, eos: &EquationOfState) -> Result<EnergyRecord, DynamicsError> {
    let mut rec = state_norms(state.t, state.field(), params.nu);
    let ut = rhs_spectral(state, params, eos)?;
    let (l2ut, l2uxt, l2uxxt) = derivative_norms(&ut);
    rec.l2ut = l2ut;
    rec.l2uxt = l2uxt;
    rec.l2uxxt = l2uxxt;
    rec.e1 = 0.5 * (l2ut + params.nu * l2uxt);
    Ok(rec)
}

/// Total concentration `int u dx`.
pub fn mass(u: &Field) -> f64 {
    to_spectral(u).mean() * u.grid().length()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{BoundaryCondition, Grid};
    use std::f64::consts::PI;

    #[test]
    fn one_mode_record() {
        let g = Grid::new(1.0, 64, BoundaryCondition::Periodic).unwrap();
        let u = Field::from_fn(&g, |x| (2.0 * PI * x).cos()).unwrap();
        let r = state_norms(0.0, &u, 0.1);
        assert!((r.l2u - 0.5).abs() < 1e-14);
        assert!((r.l2ux - 2.0 * PI * PI).abs() < 1e-11);
        assert!((r.l2uxx - 8.0 * PI.powi(4)).abs() < 1e-9);
        assert!((r.e0 - 0.5 * (0.5 + 0.1 * 2.0 * PI * PI)).abs() < 1e-12);
        assert!(r.mass.abs() < 1e-15);
    }

    #[test]
    fn constant_record() {
        for bc in [BoundaryCondition::Periodic, BoundaryCondition::Neumann] {
            let g = Grid::new(2.0, 16, bc).unwrap();
            let r = state_norms(0.0, &Field::constant(&g, 0.3).unwrap(), 0.1);
            assert!((r.l2u - 0.09 * 2.0).abs() < 1e-15);
            assert_eq!(r.l2ux, 0.0);
            assert!((r.mass - 0.6).abs() < 1e-15);
        }
    }

    #[test]
    fn mass_of_simple_fields() {
        let g = Grid::new(1.0, 16, BoundaryCondition::Periodic).unwrap();
        assert!((mass(&Field::constant(&g, 0.3).unwrap()) - 0.3).abs() < 1e-16);
        assert_eq!(mass(&Field::zeros(&g)), 0.0);
    }

    #[test]
    fn time_derivative_fields_from_rhs() {
        let p = Params::new(0.1, 0.0, 0.01, 1.0, BoundaryCondition::Periodic).unwrap();
        let g = Grid::new(1.0, 32, BoundaryCondition::Periodic).unwrap();
        let u = Field::from_fn(&g, |x| (2.0 * PI * x).cos()).unwrap();
        let r = norms(&SimulationState::new(0.0, u), &p, &EquationOfState::zero()).unwrap();
        let s = crate::dynamics::linear_symbol(2.0 * PI, &p);
        assert!((r.l2ut - s * s * 0.5).abs() < 1e-12);
        assert!((r.e1 - s * s * r.e0).abs() < 1e-12);
    }
}
