use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::SpectralError;

/// Boundary-condition family on `[0, l]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    /// `u` and its first three derivatives agree at `x = 0` and `x = l`.
    Periodic,
    /// `u_x = u_xxx = 0` at both endpoints (cosine basis).
    Neumann,
}

impl BoundaryCondition {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::Periodic => "periodic",
            BoundaryCondition::Neumann => "neumann",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "periodic" => Ok(BoundaryCondition::Periodic),
            "neumann" => Ok(BoundaryCondition::Neumann),
            other => Err(format!("unknown boundary condition `{other}` (expected periodic or neumann)")),
        }
    }
}

/// Uniform sample layout on `[0, l]` together with the transform plans for it.
///
/// Periodic grids exclude the right endpoint, `x_j = j l / n`. Neumann grids use
/// cell midpoints, `x_j = (j + 1/2) l / n`, which are the nodes of the type-II
/// cosine transform. Cloning is cheap; the plans are shared.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    length: f64,
    n: usize,
    bc: BoundaryCondition,
    points: Vec<f64>,
    modes: Vec<i64>,
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // e^{-i pi k / 2n}, k = 0..n, for the half-sample shift of the midpoint nodes
    shift: Vec<Complex64>,
}

pub const MIN_POINTS: usize = 8;

/// Builds a grid of `n` nodes on `[0, l]`.
pub fn make_grid(length: f64, n: usize, bc: BoundaryCondition) -> Result<Grid, SpectralError> {
    Grid::new(length, n, bc)
}

impl Grid {
    pub fn new(length: f64, n: usize, bc: BoundaryCondition) -> Result<Self, SpectralError> {
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::InvalidLength(length));
        }
        if n < MIN_POINTS || n % 2 != 0 {
            return Err(SpectralError::InvalidPointCount(n));
        }
        let h = length / n as f64;
        let mut planner = FftPlanner::<f64>::new();
        let inner = match bc {
            BoundaryCondition::Periodic => {
                let modes: Vec<i64> = (0..n)
                    .map(|i| if i <= n / 2 { i as i64 } else { i as i64 - n as i64 })
                    .collect();
                GridInner {
                    length,
                    n,
                    bc,
                    points: (0..n).map(|j| j as f64 * h).collect(),
                    wavenumbers: modes.iter().map(|&k| 2.0 * PI * k as f64 / length).collect(),
                    modes,
                    forward: planner.plan_fft_forward(n),
                    inverse: planner.plan_fft_inverse(n),
                    shift: Vec::new(),
                }
            }
            BoundaryCondition::Neumann => {
                let modes: Vec<i64> = (0..n as i64).collect();
                GridInner {
                    length,
                    n,
                    bc,
                    points: (0..n).map(|j| (j as f64 + 0.5) * h).collect(),
                    wavenumbers: modes.iter().map(|&k| PI * k as f64 / length).collect(),
                    modes,
                    forward: planner.plan_fft_forward(2 * n),
                    inverse: planner.plan_fft_inverse(2 * n),
                    shift: (0..=n)
                        .map(|k| Complex64::from_polar(1.0, -PI * k as f64 / (2 * n) as f64))
                        .collect(),
                }
            }
        };
        Ok(Grid { inner: Arc::new(inner) })
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn len(&self) -> usize {
        self.inner.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.inner.bc
    }

    pub fn spacing(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    pub fn points(&self) -> &[f64] {
        &self.inner.points
    }

    /// Signed mode index `k` of each coefficient slot.
    pub fn modes(&self) -> &[i64] {
        &self.inner.modes
    }

    /// Wavenumber `xi_k` of each coefficient slot: `2 pi k / l` (periodic) or
    /// `pi k / l` (Neumann).
    pub fn wavenumbers(&self) -> &[f64] {
        &self.inner.wavenumbers
    }

    /// Largest `|k|` kept by the two-thirds truncation.
    pub fn dealias_cutoff(&self) -> usize {
        match self.inner.bc {
            BoundaryCondition::Periodic => self.inner.n / 3,
            // the cosine series lives on a torus of 2n points
            BoundaryCondition::Neumann => 2 * self.inner.n / 3,
        }
    }

    /// The same domain and boundary condition at a different resolution.
    pub fn with_points(&self, n: usize) -> Result<Grid, SpectralError> {
        Grid::new(self.inner.length, n, self.inner.bc)
    }

    pub(crate) fn forward_plan(&self) -> &Arc<dyn Fft<f64>> {
        &self.inner.forward
    }

    pub(crate) fn inverse_plan(&self) -> &Arc<dyn Fft<f64>> {
        &self.inner.inverse
    }

    pub(crate) fn shift(&self) -> &[Complex64] {
        &self.inner.shift
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.length == other.inner.length
                && self.inner.n == other.inner.n
                && self.inner.bc == other.inner.bc)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("length", &self.inner.length)
            .field("n", &self.inner.n)
            .field("bc", &self.inner.bc)
            .finish()
    }
}
