//! Pointwise-in-time certificates for the two energy inequalities
//!
//! ```text
//! (E0)  d/dt E0 + delta ||u_xx||^2  <= k ||u_x||^2
//! (E1)  d/dt E1 + delta0 ||u_xxt||^2 <= c1 ||u_t||^2 + c2 ||u_xt||^2
//! ```
//!
//! with `E0 = (||u||^2 + nu ||u_x||^2) / 2`, `E1 = (||u_t||^2 + nu ||u_xt||^2) / 2`,
//! together with the integrated bounds that follow from Gronwall's lemma.
//! Energy rates are centered differences of the recorded series; residuals are
//! checked at interior snapshots only.

use std::fmt;

use super::{norms, state_norms, DiagnosticsError, EnergyRecord};
use crate::dynamics::{SimulationState, Trajectory};

/// Which inequality a report certifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Estimate {
    /// Bound on `E0`, `||u_x||` and the time integral of `||u_xx||^2`.
    Energy,
    /// Bound on `E1`, `||u_xt||` and the time integral of `||u_xxt||^2`.
    TimeDerivative,
}

impl Estimate {
    pub fn name(self) -> &'static str {
        match self {
            Estimate::Energy => "energy estimate (E0)",
            Estimate::TimeDerivative => "time-derivative estimate (E1)",
        }
    }
}

/// Constants used by a certificate; unused ones are zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Constants {
    pub k: f64,
    pub c1: f64,
    pub c2: f64,
    pub delta0: f64,
}

/// Result of comparing an integrated quantity with its Gronwall constant.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeCheck {
    /// `c(t) = E(0) exp(rate t)` at each snapshot.
    pub envelope: Vec<f64>,
    /// Whether `E(t) <= c(t)` at every snapshot.
    pub energy_below: bool,
    /// `sup_t (||w||^2 + ||w_x||^2) + int_0^T ||w_xx||^2 dt`.
    pub integrated: f64,
    pub constant: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub estimate: Estimate,
    /// Times of the interior snapshots at which residuals are evaluated.
    pub times: Vec<f64>,
    /// `lhs - rhs` of the inequality at each interior snapshot.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub constants: Constants,
    pub pass: bool,
    /// `None` when no envelope exists for the parameters (e.g. `nu = 0`).
    pub envelope: Option<EnvelopeCheck>,
}

impl CertificateReport {
    /// Pointwise certificate and, where available, the integrated bound.
    pub fn certified(&self) -> bool {
        self.pass && self.envelope.as_ref().is_none_or(|e| e.holds)
    }
}

impl fmt::Display for CertificateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "[{}]", self.estimate.name())?;
        writeln!(f, "status = {}", if self.certified() { "PASS" } else { "FAIL" })?;
        writeln!(f, "pointwise = {}", if self.pass { "pass" } else { "fail" })?;
        writeln!(f, "interior_snapshots = {}", self.residuals.len())?;
        writeln!(f, "max_residual = {:.16e}", self.max_residual)?;
        writeln!(f, "tolerance = {:.16e}", self.tolerance)?;
        let c = &self.constants;
        match self.estimate {
            Estimate::Energy => writeln!(f, "k = {:.16e}", c.k)?,
            Estimate::TimeDerivative => {
                writeln!(f, "c1 = {:.16e}", c.c1)?;
                writeln!(f, "c2 = {:.16e}", c.c2)?;
                writeln!(f, "delta0 = {:.16e}", c.delta0)?;
            }
        }
        match &self.envelope {
            Some(e) => {
                writeln!(f, "energy_below_envelope = {}", e.energy_below)?;
                writeln!(f, "integrated_bound = {:.16e}", e.integrated)?;
                writeln!(f, "gronwall_constant = {:.16e}", e.constant)?;
                writeln!(f, "integrated_bound_holds = {}", e.holds)?;
            }
            None => writeln!(f, "gronwall_constant = unavailable")?,
        }
        Ok(())
    }
}

/// `E(t) <= E(0) exp(rate t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GronwallEnvelope {
    pub initial: f64,
    pub rate: f64,
    pub nu: f64,
    pub horizon: f64,
}

impl GronwallEnvelope {
    /// Envelope for an energy `E = (||w||^2 + nu ||w_x||^2) / 2` whose growth
    /// term is bounded by `rate * E`.
    pub fn with_rate(initial: f64, rate: f64, nu: f64, horizon: f64) -> Self {
        GronwallEnvelope {
            initial,
            rate,
            nu,
            horizon,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.initial * (self.rate * t).exp()
    }

    /// Constant bounding `sup_t (||w||^2 + ||w_x||^2) + int_0^T ||w_xx||^2 dt`
    /// when `dissipation * ||w_xx||^2` enters the energy balance. Needs `nu > 0`.
    pub fn estimate_constant(&self, dissipation: f64) -> Option<f64> {
        if !(self.nu > 0.0 && dissipation > 0.0) {
            return None;
        }
        let peak = self.value(self.horizon);
        Some(2.0 * peak / self.nu.min(1.0) + peak / dissipation)
    }
}

/// Gronwall envelope for the `E0` inequality: `k ||u_x||^2 <= lambda E0` with
/// `lambda = 2k / min(1, nu)`.
pub fn gronwall_envelope(e0_initial: f64, k: f64, nu: f64, horizon: f64) -> Result<GronwallEnvelope, DiagnosticsError> {
    if k < 0.0 || nu < 0.0 {
        return Err(DiagnosticsError::EnvelopeUnavailable(format!("need k >= 0 and nu >= 0, got k = {k}, nu = {nu}")));
    }
    if k == 0.0 {
        return Ok(GronwallEnvelope::with_rate(e0_initial, 0.0, nu, horizon));
    }
    if nu == 0.0 {
        return Err(DiagnosticsError::EnvelopeUnavailable(
            "nu = 0: E0 does not control ||u_x||".into(),
        ));
    }
    Ok(GronwallEnvelope::with_rate(e0_initial, 2.0 * k / nu.min(1.0), nu, horizon))
}

/// Derivative of a sampled series: centered in the interior, second-order
/// one-sided at the ends.
pub fn time_derivative(t: &[f64], y: &[f64]) -> Vec<f64> {
    let m = t.len();
    assert_eq!(m, y.len());
    assert!(m >= 3, "need at least 3 samples");
    let mut d = vec![0.0; m];
    for i in 1..m - 1 {
        d[i] = (y[i + 1] - y[i - 1]) / (t[i + 1] - t[i - 1]);
    }
    let h0 = t[1] - t[0];
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h0);
    let h1 = t[m - 1] - t[m - 2];
    d[m - 1] = (3.0 * y[m - 1] - 4.0 * y[m - 2] + y[m - 3]) / (2.0 * h1);
    d
}

fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2)
        .zip(y.windows(2))
        .map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0] + yw[1]))
        .sum()
}

fn check_snapshot_count(traj: &Trajectory) -> Result<(), DiagnosticsError> {
    if traj.len() < 3 {
        return Err(DiagnosticsError::TooFewSnapshots(traj.len()));
    }
    Ok(())
}

/// Envelope comparison shared by both certificates. `parts` yields
/// `(energy, ||w||^2 + ||w_x||^2, ||w_xx||^2)` per snapshot.
fn envelope_check(
    envelope: &GronwallEnvelope,
    dissipation: f64,
    times: &[f64],
    energy: &[f64],
    h1: &[f64],
    second: &[f64],
) -> Option<EnvelopeCheck> {
    let constant = envelope.estimate_constant(dissipation)?;
    let values: Vec<f64> = times.iter().map(|&t| envelope.value(t)).collect();
    let energy_below = energy
        .iter()
        .zip(&values)
        .all(|(e, c)| *e <= c * (1.0 + 1e-12) + 1e-300);
    let integrated = h1.iter().fold(0.0, |m: f64, v| m.max(*v)) + trapezoid(times, second);
    Some(EnvelopeCheck {
        envelope: values,
        energy_below,
        integrated,
        constant,
        holds: energy_below && integrated <= constant,
    })
}

/// Certifies `dE0/dt + delta ||u_xx||^2 <= k ||u_x||^2 + tol` at every interior
/// snapshot, where `k` is the Lipschitz bound of `p` on the attained range and
/// `tol = rel_tol * max_t (k ||u_x||^2 + delta ||u_xx||^2)`.
pub fn check_energy_inequality(traj: &Trajectory, rel_tol: f64) -> Result<CertificateReport, DiagnosticsError> {
    check_snapshot_count(traj)?;
    let params = &traj.params;
    let records: Vec<EnergyRecord> = traj
        .snapshots
        .iter()
        .map(|s| state_norms(s.t, &s.u, params.nu))
        .collect();
    let (lo, hi) = traj.range();
    let k = traj.eos.lipschitz_bound(lo, hi);
    energy_report(&records, k, params.nu, params.delta, rel_tol)
}

/// Same certificate from precomputed records (e.g. read back from a run directory).
pub fn energy_report(
    records: &[EnergyRecord],
    k: f64,
    nu: f64,
    delta: f64,
    rel_tol: f64,
) -> Result<CertificateReport, DiagnosticsError> {
    if records.len() < 3 {
        return Err(DiagnosticsError::TooFewSnapshots(records.len()));
    }
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let e0: Vec<f64> = records.iter().map(|r| r.e0).collect();
    let de0 = time_derivative(&t, &e0);
    let m = records.len();
    let residuals: Vec<f64> = (1..m - 1)
        .map(|i| de0[i] + delta * records[i].l2uxx - k * records[i].l2ux)
        .collect();
    let scale = records
        .iter()
        .map(|r| k * r.l2ux + delta * r.l2uxx)
        .fold(0.0, f64::max);
    let tolerance = rel_tol * scale;
    let max_residual = residuals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let horizon = t[m - 1] - t[0];
    let envelope = gronwall_envelope(e0[0], k, nu, horizon).ok().and_then(|env| {
        let rel_t: Vec<f64> = t.iter().map(|x| x - t[0]).collect();
        let h1: Vec<f64> = records.iter().map(|r| r.l2u + r.l2ux).collect();
        let second: Vec<f64> = records.iter().map(|r| r.l2uxx).collect();
        envelope_check(&env, delta, &rel_t, &e0, &h1, &second)
    });
    Ok(CertificateReport {
        estimate: Estimate::Energy,
        times: t[1..m - 1].to_vec(),
        residuals,
        max_residual,
        tolerance,
        constants: Constants {
            k,
            ..Constants::default()
        },
        pass: max_residual <= tolerance,
        envelope,
    })
}

/// `{0} ∪ {10^-2, 10^-1.5, ..., 10^3}`.
pub fn default_constant_grid() -> Vec<f64> {
    std::iter::once(0.0)
        .chain((0..=10).map(|j| 10f64.powf(-2.0 + 0.5 * j as f64)))
        .collect()
}

/// Searches `constant_grid^2` for `(c1, c2)` certifying
/// `dE1/dt + delta0 ||u_xxt||^2 <= c1 ||u_t||^2 + c2 ||u_xt||^2 + tol` at every
/// interior snapshot, with `delta0 = delta / 2` and
/// `tol = rel_tol * max_t (|dE1/dt| + delta0 ||u_xxt||^2)`.
///
/// Reports the feasible pair with the smallest `c1 + c2`, or the pair with the
/// smallest worst residual if none is feasible.
pub fn check_rate_inequality(
    traj: &Trajectory,
    constant_grid: &[f64],
    rel_tol: f64,
) -> Result<CertificateReport, DiagnosticsError> {
    check_snapshot_count(traj)?;
    let params = &traj.params;
    let records = traj
        .snapshots
        .iter()
        .map(|s| norms(&SimulationState::new(s.t, s.u.clone()), params, &traj.eos))
        .collect::<Result<Vec<_>, _>>()?;
    rate_report(&records, params.nu, params.delta, constant_grid, rel_tol)
}

pub fn rate_report(
    records: &[EnergyRecord],
    nu: f64,
    delta: f64,
    constant_grid: &[f64],
    rel_tol: f64,
) -> Result<CertificateReport, DiagnosticsError> {
    if records.len() < 3 {
        return Err(DiagnosticsError::TooFewSnapshots(records.len()));
    }
    assert!(!constant_grid.is_empty(), "empty constant grid");
    let delta0 = 0.5 * delta;
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let e1: Vec<f64> = records.iter().map(|r| r.e1).collect();
    let de1 = time_derivative(&t, &e1);
    let m = records.len();
    let tolerance = rel_tol
        * (0..m)
            .map(|i| de1[i].abs() + delta0 * records[i].l2uxxt)
            .fold(0.0, f64::max);

    let residuals_for = |c1: f64, c2: f64| -> Vec<f64> {
        (1..m - 1)
            .map(|i| {
                let r = &records[i];
                de1[i] + delta0 * r.l2uxxt - c1 * r.l2ut - c2 * r.l2uxt
            })
            .collect()
    };
    let worst = |res: &[f64]| res.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    // (c1 + c2, c1, c1, c2, worst residual)
    let mut best_feasible: Option<(f64, f64, f64, f64, f64)> = None;
    let mut least_bad: Option<(f64, f64, f64)> = None;
    for &c1 in constant_grid {
        for &c2 in constant_grid {
            let w = worst(&residuals_for(c1, c2));
            if w <= tolerance {
                let key = (c1 + c2, c1);
                if best_feasible.is_none_or(|b| key < (b.0, b.1)) {
                    best_feasible = Some((key.0, key.1, c1, c2, w));
                }
            }
            if least_bad.is_none_or(|b| w < b.2) {
                least_bad = Some((c1, c2, w));
            }
        }
    }
    let (c1, c2, pass) = match (best_feasible, least_bad) {
        (Some((_, _, c1, c2, _)), _) => (c1, c2, true),
        (None, Some((c1, c2, _))) => (c1, c2, false),
        (None, None) => unreachable!("grid is non-empty"),
    };
    let residuals = residuals_for(c1, c2);
    let max_residual = worst(&residuals);

    let envelope = if nu > 0.0 {
        let rate = 2.0 * c1.max(c2 / nu);
        let env = GronwallEnvelope::with_rate(e1[0], rate, nu, t[m - 1] - t[0]);
        let rel_t: Vec<f64> = t.iter().map(|x| x - t[0]).collect();
        let h1: Vec<f64> = records.iter().map(|r| r.l2ut + r.l2uxt).collect();
        let second: Vec<f64> = records.iter().map(|r| r.l2uxxt).collect();
        envelope_check(&env, delta0, &rel_t, &e1, &h1, &second)
    } else {
        None
    };

    Ok(CertificateReport {
        estimate: Estimate::TimeDerivative,
        times: t[1..m - 1].to_vec(),
        residuals,
        max_residual,
        tolerance,
        constants: Constants {
            k: 0.0,
            c1,
            c2,
            delta0,
        },
        pass,
        envelope,
    })
}
