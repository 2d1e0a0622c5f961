use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use super::config::{parse_config, ConfigError, RunConfig, TimeStep};
use super::output::{
    fmt_float, read_energies, read_snapshot_range, write_energies, write_snapshots, CsvError, CONFIG_FILE, ENERGIES_FILE,
    REPORT_FILE, SNAPSHOTS_FILE,
};
use crate::diagnostics::{
    default_constant_grid, energy_report, neumann_boundary_check, norms, rate_report, CertificateReport,
    DiagnosticsError, EnergyRecord,
};
use crate::dynamics::{
    auto_time_step, integrate, linear_symbol, picard_solve, DynamicsError, InitialError, PicardOptions, SchemeChoice,
    SimulationState, Snapshot, Trajectory,
};
use crate::eos::EquationOfState;
use crate::spectral::{from_spectral, to_spectral, BoundaryCondition, Field};

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("configuration error: {0}")]
    Config(#[from] ConfigError),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("numerical blow-up at t = {time}; last valid state at t = {last_valid}")]
    BlowUp { time: f64, last_valid: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CommandError {
    /// 2 for input and I/O problems, 3 for numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CommandError::BlowUp { .. } | CommandError::Numerical(_) => 3,
            _ => 2,
        }
    }
}

impl From<CsvError> for CommandError {
    fn from(e: CsvError) -> Self {
        CommandError::Input(e.to_string())
    }
}

impl From<InitialError> for CommandError {
    fn from(e: InitialError) -> Self {
        CommandError::Input(e.to_string())
    }
}

impl From<DynamicsError> for CommandError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::BlowUp { time, last_valid } => CommandError::BlowUp {
                time,
                last_valid: last_valid.t,
            },
            DynamicsError::NonFinite => CommandError::Numerical(e.to_string()),
            other => CommandError::Input(other.to_string()),
        }
    }
}

impl From<DiagnosticsError> for CommandError {
    fn from(e: DiagnosticsError) -> Self {
        match e {
            DiagnosticsError::Dynamics(d) => d.into(),
            other => CommandError::Input(other.to_string()),
        }
    }
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CommandError + '_ {
    move |source| CommandError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads and parses a configuration file; `None` gives the defaults.
pub fn load_config(path: Option<&Path>) -> Result<(RunConfig, String), CommandError> {
    match path {
        None => {
            let cfg = RunConfig::default();
            let text = cfg.serialize();
            Ok((cfg, text))
        }
        Some(p) => {
            let text = fs::read_to_string(p).map_err(io_error(p))?;
            let cfg = parse_config(&text).map_err(|e| ConfigError {
                message: format!("{}: {}", p.display(), e.message),
                ..e
            })?;
            Ok((cfg, text))
        }
    }
}

fn resolve_dt(cfg: &RunConfig, u0: &Field, eos: &EquationOfState) -> f64 {
    match cfg.dt {
        TimeStep::Fixed(dt) => dt,
        TimeStep::Auto => auto_time_step(u0, &cfg.params(), eos, cfg.t_end),
    }
}

fn config_eos(cfg: &RunConfig) -> Result<EquationOfState, CommandError> {
    cfg.eos().map_err(|e| CommandError::Input(e.to_string()))
}

/// Everything `run` computes before writing files.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trajectory: Trajectory,
    pub records: Vec<EnergyRecord>,
    pub energy: Option<CertificateReport>,
    pub rate: Option<CertificateReport>,
    pub mass_drift: f64,
    /// Worst wall residual relative to `||u||_{H^3}` (Neumann runs only).
    pub boundary: Option<f64>,
    pub steps: usize,
}

pub fn simulate(cfg: &RunConfig) -> Result<RunOutput, CommandError> {
    cfg.validate()?;
    let params = cfg.params();
    let eos = config_eos(cfg)?;
    let u0 = cfg.initial().sample(&cfg.grid())?;
    let dt = resolve_dt(cfg, &u0, &eos);
    let trajectory = integrate(&u0, &params, &eos, cfg.scheme, dt, cfg.t_end, cfg.stride)?;
    let records = trajectory
        .snapshots
        .iter()
        .map(|s| norms(&SimulationState::new(s.t, s.u.clone()), &params, &eos))
        .collect::<Result<Vec<_>, _>>()?;
    let mass0 = records[0].mass;
    let mass_drift = records.iter().map(|r| (r.mass - mass0).abs()).fold(0.0, f64::max);
    let boundary = (cfg.bc == BoundaryCondition::Neumann).then(|| {
        trajectory
            .snapshots
            .iter()
            .map(|s| neumann_boundary_check(&s.u).relative())
            .fold(0.0, f64::max)
    });
    let (energy, rate) = certificates(&records, trajectory.range(), cfg, &eos)?;
    let steps = (cfg.t_end / dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    Ok(RunOutput {
        trajectory,
        records,
        energy,
        rate,
        mass_drift,
        boundary,
        steps,
    })
}

type Certificates = (Option<CertificateReport>, Option<CertificateReport>);

/// Both certificates, or `None` when there are fewer than three records.
fn certificates(
    records: &[EnergyRecord],
    range: (f64, f64),
    cfg: &RunConfig,
    eos: &EquationOfState,
) -> Result<Certificates, CommandError> {
    if records.len() < 3 {
        return Ok((None, None));
    }
    let k = eos.lipschitz_bound(range.0, range.1);
    let tol = cfg.tolerances.certificate;
    let energy = energy_report(records, k, cfg.nu, cfg.delta, tol)?;
    let rate = rate_report(records, cfg.nu, cfg.delta, &default_constant_grid(), tol)?;
    Ok((Some(energy), Some(rate)))
}

fn report_text(cfg: &RunConfig, out: &RunOutput) -> String {
    let mut s = String::new();
    let traj = &out.trajectory;
    let (lo, hi) = traj.range();
    let _ = writeln!(s, "# spinodal run report");
    let _ = writeln!(s, "bc = {}", cfg.bc);
    let _ = writeln!(s, "n = {}", cfg.n);
    let _ = writeln!(s, "scheme = {}", traj.scheme.name());
    let _ = writeln!(s, "dt = {}", fmt_float(traj.dt));
    let _ = writeln!(s, "steps = {}", out.steps);
    let _ = writeln!(s, "t_final = {}", fmt_float(traj.final_state.t));
    let _ = writeln!(s, "snapshots = {}", traj.len());
    let _ = writeln!(s, "u_min = {}", fmt_float(lo));
    let _ = writeln!(s, "u_max = {}", fmt_float(hi));
    let _ = writeln!(s, "mass_drift = {}", fmt_float(out.mass_drift));
    let _ = writeln!(s, "mass_conserved = {}", out.mass_drift <= cfg.tolerances.mass);
    if let Some(b) = out.boundary {
        let _ = writeln!(s, "wall_residual = {}", fmt_float(b));
        let _ = writeln!(s, "walls_compliant = {}", b <= cfg.tolerances.boundary);
    }
    for rep in [&out.energy, &out.rate] {
        let _ = writeln!(s);
        match rep {
            Some(r) => {
                let _ = write!(s, "{r}");
            }
            None => {
                let _ = writeln!(s, "certificate skipped: fewer than 3 snapshots");
            }
        }
    }
    s
}

fn blow_up_report(time: f64, last: &SimulationState) -> String {
    format!(
        "# spinodal run report\nstatus = BLOW-UP\nfailure_time = {}\nlast_valid_time = {}\n",
        fmt_float(time),
        fmt_float(last.t)
    )
}

fn write_file(path: &Path, write: impl FnOnce(BufWriter<fs::File>) -> std::io::Result<()>) -> Result<(), CommandError> {
    let file = fs::File::create(path).map_err(io_error(path))?;
    write(BufWriter::new(file)).map_err(io_error(path))
}

/// Runs a configuration and writes `energies.csv`, `snapshots.csv`,
/// `report.txt` and a verbatim copy of the configuration into `dir`.
///
/// On blow-up the last valid state is written as the only snapshot.
pub fn cmd_run(cfg: &RunConfig, config_text: &str, dir: &Path) -> Result<RunOutput, CommandError> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let cfg_path = dir.join(CONFIG_FILE);
    fs::write(&cfg_path, config_text).map_err(io_error(&cfg_path))?;

    let out = match simulate(cfg) {
        Ok(out) => out,
        Err(CommandError::BlowUp { .. }) => {
            // rerun to recover the state; the run is deterministic
            let params = cfg.params();
            let eos = config_eos(cfg)?;
            let u0 = cfg.initial().sample(&cfg.grid())?;
            let dt = resolve_dt(cfg, &u0, &eos);
            let err = integrate(&u0, &params, &eos, cfg.scheme, dt, cfg.t_end, cfg.stride).unwrap_err();
            if let DynamicsError::BlowUp { time, last_valid } = &err {
                let snap = [Snapshot {
                    t: last_valid.t,
                    u: last_valid.field().clone(),
                }];
                write_file(&dir.join(SNAPSHOTS_FILE), |w| write_snapshots(w, &snap))?;
                write_file(&dir.join(ENERGIES_FILE), |w| write_energies(w, &[]))?;
                let report = dir.join(REPORT_FILE);
                fs::write(&report, blow_up_report(*time, last_valid)).map_err(io_error(&report))?;
            }
            return Err(err.into());
        }
        Err(e) => return Err(e),
    };

    write_file(&dir.join(ENERGIES_FILE), |w| write_energies(w, &out.records))?;
    write_file(&dir.join(SNAPSHOTS_FILE), |w| write_snapshots(w, &out.trajectory.snapshots))?;
    let report = dir.join(REPORT_FILE);
    fs::write(&report, report_text(cfg, &out)).map_err(io_error(&report))?;
    Ok(out)
}

/// Re-checks both certificates from the files of a run directory.
/// `tol` overrides the configured certificate tolerance.
pub fn cmd_certify(dir: &Path, tol: Option<f64>) -> Result<(CertificateReport, CertificateReport), CommandError> {
    let (mut cfg, _) = load_config(Some(&dir.join(CONFIG_FILE)))?;
    if let Some(t) = tol {
        if !(t.is_finite() && t > 0.0) {
            return Err(CommandError::Input(format!("--tol must be positive, got {t}")));
        }
        cfg.tolerances.certificate = t;
    }
    let eos = config_eos(&cfg)?;
    let records = read_energies(&dir.join(ENERGIES_FILE))?;
    let range = read_snapshot_range(&dir.join(SNAPSHOTS_FILE))?;
    if records.len() < 3 {
        return Err(DiagnosticsError::TooFewSnapshots(records.len()).into());
    }
    let (energy, rate) = certificates(&records, range, &cfg, &eos)?;
    Ok((energy.expect("checked length"), rate.expect("checked length")))
}

fn thread_pool() -> rayon::ThreadPool {
    let cap = std::env::var("SPINODAL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cap {
        builder = builder.num_threads(n);
    }
    builder.build().expect("thread pool")
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalStudy {
    /// `(dt, max |u_dt - u_ref|)` for `dt`, `dt/2`, `dt/4`; the reference uses `dt/16`.
    pub errors: Vec<(f64, f64)>,
    /// `log2(|u_dt - u_{dt/2}| / |u_{dt/2} - u_{dt/4}|)`; `None` when the
    /// differences are at round-off.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialStudy {
    /// `(n, max |u_n - u_ref|)` for `n` and `2n`; the reference uses `4n`.
    pub errors: Vec<(usize, f64)>,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub scheme: SchemeChoice,
    pub dt: f64,
    pub temporal: TemporalStudy,
    pub spatial: SpatialStudy,
}

/// Solution at `t_end` for the configuration with `n` points and step `dt`.
fn final_field(cfg: &RunConfig, n: usize, dt: f64) -> Result<Field, CommandError> {
    let mut c = cfg.clone();
    c.n = n;
    c.validate()?;
    let eos = config_eos(&c)?;
    let u0 = c.initial().sample(&c.grid())?;
    let traj = integrate(&u0, &c.params(), &eos, c.scheme, dt, c.t_end, usize::MAX)?;
    Ok(traj.final_state.field().clone())
}

/// Max-norm distance after interpolating `coarse` onto the grid of `fine`.
fn distance(coarse: &Field, fine: &Field) -> f64 {
    let lifted = to_spectral(coarse).resample(fine.grid().len()).expect("valid grid");
    from_spectral(&lifted).max_abs_diff(fine)
}

const ROUND_OFF: f64 = 1e-14;

/// Richardson triplet in `dt` and an `(n, 2n)` refinement, both against finer
/// references, run in parallel.
pub fn convergence_study(cfg: &RunConfig) -> Result<ConvergenceStudy, CommandError> {
    cfg.validate()?;
    let eos = config_eos(cfg)?;
    let u0 = cfg.initial().sample(&cfg.grid())?;
    let dt = resolve_dt(cfg, &u0, &eos);
    let n = cfg.n;
    let jobs: Vec<(usize, f64)> = vec![
        (n, dt),
        (n, dt / 2.0),
        (n, dt / 4.0),
        (n, dt / 16.0),
        (2 * n, dt),
        (4 * n, dt),
    ];
    let fields = thread_pool().install(|| {
        jobs.par_iter()
            .map(|&(n, dt)| final_field(cfg, n, dt))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let (u1, u2, u4, uref) = (&fields[0], &fields[1], &fields[2], &fields[3]);
    let d12 = u1.max_abs_diff(u2);
    let d24 = u2.max_abs_diff(u4);
    let order = (d24 > ROUND_OFF && d12 > ROUND_OFF).then(|| (d12 / d24).log2());
    let temporal = TemporalStudy {
        errors: vec![
            (dt, u1.max_abs_diff(uref)),
            (dt / 2.0, u2.max_abs_diff(uref)),
            (dt / 4.0, u4.max_abs_diff(uref)),
        ],
        order,
    };
    let (s1, s2, sref) = (&fields[0], &fields[4], &fields[5]);
    let e1 = distance(s1, sref);
    let e2 = distance(s2, sref);
    let spatial = SpatialStudy {
        errors: vec![(n, e1), (2 * n, e2)],
        ratio: e1 / e2.max(f64::MIN_POSITIVE),
    };
    Ok(ConvergenceStudy {
        scheme: cfg.scheme,
        dt,
        temporal,
        spatial,
    })
}

pub fn convergence_table(study: &ConvergenceStudy) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scheme = {}", study.scheme.name());
    let _ = writeln!(s, "# temporal (reference dt/16)");
    let _ = writeln!(s, "{:>24} {:>24}", "dt", "max_error");
    for (dt, e) in &study.temporal.errors {
        let _ = writeln!(s, "{:>24} {:>24}", fmt_float(*dt), fmt_float(*e));
    }
    match study.temporal.order {
        Some(p) => {
            let _ = writeln!(s, "observed_order = {p:.4}");
        }
        None => {
            let _ = writeln!(s, "observed_order = n/a (differences at round-off)");
        }
    }
    let _ = writeln!(s, "# spatial (reference 4n)");
    let _ = writeln!(s, "{:>24} {:>24}", "n", "max_error");
    for (n, e) in &study.spatial.errors {
        let _ = writeln!(s, "{:>24} {:>24}", n, fmt_float(*e));
    }
    let _ = writeln!(s, "error_ratio = {}", fmt_float(study.spatial.ratio));
    s
}

#[derive(Debug, Clone)]
pub struct PicardStudy {
    pub outcome: crate::dynamics::PicardOutcome,
    /// `max |u_picard(T) - u_integrate(T)|` with the integrator at step `T / M`;
    /// `None` when the integrator blows up before `T`.
    pub agreement: Option<f64>,
}

pub fn picard_study(cfg: &RunConfig, horizon: f64, options: PicardOptions) -> Result<PicardStudy, CommandError> {
    cfg.validate()?;
    let params = cfg.params();
    let eos = config_eos(cfg)?;
    let u0 = cfg.initial().sample(&cfg.grid())?;
    let outcome = picard_solve(&u0, &params, &eos, horizon, options)?;
    let dt = horizon / options.substeps as f64;
    let agreement = match integrate(&u0, &params, &eos, cfg.scheme, dt, horizon, usize::MAX) {
        Ok(traj) => Some(outcome.solution.max_abs_diff(traj.final_state.field())),
        Err(DynamicsError::BlowUp { .. } | DynamicsError::NonFinite) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(PicardStudy { outcome, agreement })
}

pub fn picard_table(study: &PicardStudy) -> String {
    let o = &study.outcome;
    let mut s = String::new();
    let _ = writeln!(s, "{:>4} {:>24} {:>24}", "k", "increment", "ratio");
    for (k, inc) in o.increments.iter().enumerate() {
        let ratio = if k == 0 { "-".to_string() } else { fmt_float(o.ratios[k - 1]) };
        let _ = writeln!(s, "{:>4} {:>24} {:>24}", k + 1, fmt_float(*inc), ratio);
    }
    let _ = writeln!(s, "converged = {}", o.converged);
    let _ = writeln!(s, "iterations = {}", o.iterations);
    match study.agreement {
        Some(a) => writeln!(s, "agreement_linf = {}", fmt_float(a)),
        None => writeln!(s, "agreement_linf = unavailable (integrator blew up)"),
    }
    .ok();
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearCheck {
    pub scheme: SchemeChoice,
    pub dt: f64,
    pub sigma: f64,
    /// `(t, measured amplitude)` per snapshot.
    pub amplitudes: Vec<(f64, f64)>,
    /// Worst relative deviation from `exp(-sigma t)`.
    pub exact_error: f64,
    /// Worst relative deviation from the scheme's own amplification factor.
    pub discrete_error: f64,
    pub tolerance: f64,
}

impl LinearCheck {
    /// ETD1 is judged against the exact decay; IMEX against `(1 + dt sigma)^{-m}`.
    pub fn pass(&self) -> bool {
        let err = match self.scheme {
            SchemeChoice::Etd1 => self.exact_error,
            SchemeChoice::Imex1 => self.discrete_error,
        };
        err <= self.tolerance
    }
}

/// `(2/n) sum_j u_j cos(xi x_j)`, the amplitude of a single resolved cosine.
fn cosine_amplitude(u: &Field, xi: f64) -> f64 {
    let n = u.grid().len() as f64;
    2.0 / n
        * u.grid()
            .points()
            .iter()
            .zip(u.values())
            .map(|(x, v)| v * (xi * x).cos())
            .sum::<f64>()
}

/// Linear benchmark: `epsilon = 0`, `p = 0`, `u0 = cos(2 pi x / l)`, with the
/// remaining settings taken from `cfg`.
pub fn linear_check(cfg: &RunConfig) -> Result<LinearCheck, CommandError> {
    cfg.validate()?;
    let mut params = cfg.params();
    params.epsilon = 0.0;
    let eos = EquationOfState::zero();
    let grid = cfg.grid();
    let xi = 2.0 * std::f64::consts::PI / cfg.length;
    let u0 = Field::from_fn(&grid, |x| (xi * x).cos()).map_err(|e| CommandError::Input(e.to_string()))?;
    let dt = resolve_dt(cfg, &u0, &eos);
    let traj = integrate(&u0, &params, &eos, cfg.scheme, dt, cfg.t_end, cfg.stride)?;
    let sigma = linear_symbol(xi, &params);
    let mut amplitudes = Vec::new();
    let mut exact_error: f64 = 0.0;
    let mut discrete_error: f64 = 0.0;
    for (i, s) in traj.snapshots.iter().enumerate() {
        let a = cosine_amplitude(&s.u, xi);
        let m = (i * cfg.stride) as i32;
        let exact = (-sigma * s.t).exp();
        let discrete = match cfg.scheme {
            SchemeChoice::Etd1 => (-sigma * dt).exp().powi(m),
            SchemeChoice::Imex1 => (1.0 + dt * sigma).powi(-m),
        };
        exact_error = exact_error.max((a / exact - 1.0).abs());
        discrete_error = discrete_error.max((a / discrete - 1.0).abs());
        amplitudes.push((s.t, a));
    }
    Ok(LinearCheck {
        scheme: cfg.scheme,
        dt,
        sigma,
        amplitudes,
        exact_error,
        discrete_error,
        tolerance: cfg.tolerances.linear,
    })
}

pub fn linear_table(check: &LinearCheck) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scheme = {}", check.scheme.name());
    let _ = writeln!(s, "dt = {}", fmt_float(check.dt));
    let _ = writeln!(s, "sigma = {}", fmt_float(check.sigma));
    let _ = writeln!(s, "{:>24} {:>24} {:>24}", "t", "amplitude", "exp(-sigma t)");
    for (t, a) in &check.amplitudes {
        let _ = writeln!(s, "{:>24} {:>24} {:>24}", fmt_float(*t), fmt_float(*a), fmt_float((-check.sigma * t).exp()));
    }
    let _ = writeln!(s, "max_relative_error_exact = {}", fmt_float(check.exact_error));
    let _ = writeln!(s, "max_relative_error_discrete = {}", fmt_float(check.discrete_error));
    let _ = writeln!(s, "tolerance = {}", fmt_float(check.tolerance));
    let _ = writeln!(s, "status = {}", if check.pass() { "PASS" } else { "FAIL" });
    s
}
