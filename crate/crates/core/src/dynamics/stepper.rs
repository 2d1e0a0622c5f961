use super::{linear_symbol, nonlinear_tendency, DynamicsError, Params, SchemeChoice, SimulationState};
use crate::eos::EquationOfState;
use crate::spectral::{Field, Grid, SpectralCoeffs};

/// `phi_1(z) = (e^z - 1) / z`, with a six-term Taylor series near zero.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-5 {
        // 1 + z/2 + z^2/6 + z^3/24 + z^4/120 + z^5/720
        let mut term = 1.0;
        let mut sum = 1.0;
        for m in 2..=6 {
            term *= z / m as f64;
            sum += term;
        }
        sum
    } else {
        z.exp_m1() / z
    }
}

/// One-step update `u_hat <- decay * u_hat + forcing * N(u)` with per-mode
/// factors fixed by the scheme and the time step.
#[derive(Debug, Clone)]
pub struct Stepper {
    scheme: SchemeChoice,
    dt: f64,
    decay: Vec<f64>,
    forcing: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: &Grid, params: &Params, scheme: SchemeChoice, dt: f64) -> Result<Self, DynamicsError> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(DynamicsError::InvalidTimeStep(dt));
        }
        params.validate()?;
        params.check_grid(grid)?;
        let sigma: Vec<f64> = grid.wavenumbers().iter().map(|&xi| linear_symbol(xi, params)).collect();
        let (decay, forcing) = match scheme {
            SchemeChoice::Imex1 => sigma
                .iter()
                .map(|&s| {
                    let d = 1.0 / (1.0 + dt * s);
                    (d, dt * d)
                })
                .unzip(),
            SchemeChoice::Etd1 => sigma
                .iter()
                .map(|&s| ((-s * dt).exp(), dt * phi1(-s * dt)))
                .unzip(),
        };
        Ok(Stepper {
            scheme,
            dt,
            decay,
            forcing,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn scheme(&self) -> SchemeChoice {
        self.scheme
    }

    /// Applies the update to given coefficients and a precomputed tendency.
    pub(crate) fn advance(&self, u_hat: &SpectralCoeffs, tendency: &SpectralCoeffs) -> SpectralCoeffs {
        let mut out = u_hat.clone();
        for (((c, n), d), f) in out
            .values_mut()
            .iter_mut()
            .zip(tendency.values())
            .zip(&self.decay)
            .zip(&self.forcing)
        {
            *c = *c * *d + n * *f;
        }
        out
    }

    /// Advances the state to `t + dt`.
    pub fn step(&self, state: &SimulationState, params: &Params, eos: &EquationOfState) -> Result<SimulationState, DynamicsError> {
        let t = state.t + self.dt;
        let blow_up = || DynamicsError::BlowUp {
            time: t,
            last_valid: Box::new(state.clone()),
        };
        let n_hat = match nonlinear_tendency(state.field(), state.spectral(), params, eos) {
            Err(DynamicsError::NonFinite) => return Err(blow_up()),
            other => other?,
        };
        let next = self.advance(state.spectral(), &n_hat);
        if !next.is_finite() {
            return Err(blow_up());
        }
        SimulationState::from_spectral(t, next)
    }
}

/// One IMEX step: `u_hat <- (u_hat + dt N) / (1 + dt sigma)`.
pub fn step_imex(
    state: &SimulationState,
    dt: f64,
    params: &Params,
    eos: &EquationOfState,
) -> Result<SimulationState, DynamicsError> {
    Stepper::new(state.grid(), params, SchemeChoice::Imex1, dt)?.step(state, params, eos)
}

/// One ETD1 step: `u_hat <- e^{-sigma dt} u_hat + dt phi_1(-sigma dt) N`.
pub fn step_etd1(
    state: &SimulationState,
    dt: f64,
    params: &Params,
    eos: &EquationOfState,
) -> Result<SimulationState, DynamicsError> {
    Stepper::new(state.grid(), params, SchemeChoice::Etd1, dt)?.step(state, params, eos)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: Field,
}

/// Recorded solution: snapshots every `stride` steps plus run provenance.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: Params,
    pub eos: EquationOfState,
    pub scheme: SchemeChoice,
    pub dt: f64,
    pub stride: usize,
    pub snapshots: Vec<Snapshot>,
    pub final_state: SimulationState,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Smallest and largest sample over all snapshots.
    pub fn range(&self) -> (f64, f64) {
        self.snapshots.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            let (a, b) = s.u.min_max();
            (lo.min(a), hi.max(b))
        })
    }

    /// Builds a trajectory from externally stored snapshots (e.g. a run directory).
    pub fn from_snapshots(
        params: Params,
        eos: EquationOfState,
        scheme: SchemeChoice,
        dt: f64,
        stride: usize,
        snapshots: Vec<Snapshot>,
    ) -> Option<Self> {
        let last = snapshots.last()?;
        let final_state = SimulationState::new(last.t, last.u.clone());
        Some(Trajectory {
            params,
            eos,
            scheme,
            dt,
            stride,
            snapshots,
            final_state,
        })
    }
}

/// Number of steps of size `dt` that reaches `t_end` (within one step).
pub(crate) fn step_count(dt: f64, t_end: f64) -> usize {
    ((t_end / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize
}

/// Integrates from `u0` until `t_end`, recording every `stride`-th step.
pub fn integrate(
    u0: &Field,
    params: &Params,
    eos: &EquationOfState,
    scheme: SchemeChoice,
    dt: f64,
    t_end: f64,
    stride: usize,
) -> Result<Trajectory, DynamicsError> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(DynamicsError::InvalidParams(format!("t_end must be positive, got {t_end}")));
    }
    if stride == 0 {
        return Err(DynamicsError::InvalidParams("stride must be at least 1".into()));
    }
    let stepper = Stepper::new(u0.grid(), params, scheme, dt)?;
    let steps = step_count(dt, t_end);
    let mut state = SimulationState::new(0.0, u0.clone());
    let mut snapshots = vec![Snapshot {
        t: 0.0,
        u: u0.clone(),
    }];
    for i in 1..=steps {
        let mut next = stepper.step(&state, params, eos)?;
        // time from the step index, not by accumulation
        next.t = i as f64 * dt;
        state = next;
        if i % stride == 0 {
            snapshots.push(Snapshot {
                t: state.t,
                u: state.field().clone(),
            });
        }
    }
    Ok(Trajectory {
        params: *params,
        eos: eos.clone(),
        scheme,
        dt,
        stride,
        snapshots,
        final_state: state,
    })
}

/// Step size for `dt = auto`: at most `0.5 / max_xi [k xi^2 / (1 + nu xi^2)]`
/// with `k` the Lipschitz bound of `p` on the range of `u0`, and at most
/// `t_end / 1000`; rounded down so that it divides `t_end`.
pub fn auto_time_step(u0: &Field, params: &Params, eos: &EquationOfState, t_end: f64) -> f64 {
    let (lo, hi) = u0.min_max();
    let k = eos.lipschitz_bound(lo, hi);
    let cutoff = u0.grid().dealias_cutoff() as i64;
    let rate = u0
        .grid()
        .wavenumbers()
        .iter()
        .zip(u0.grid().modes())
        .filter(|(_, &m)| m.abs() <= cutoff)
        .map(|(&xi, _)| k * xi * xi / (1.0 + params.nu * xi * xi))
        .fold(0.0, f64::max);
    let stability = if rate > 0.0 { 0.5 / rate } else { f64::INFINITY };
    let dt = stability.min(t_end / 1000.0);
    t_end / (t_end / dt).ceil()
}
