use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::spectral::{BoundaryCondition, Field, Grid, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InitialError {
    #[error("mode {mode} is not resolved on a grid of {n} points")]
    UnresolvedMode { mode: u32, n: usize },
    #[error("spectral cutoff must be positive, got {0}")]
    InvalidCutoff(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Initial data `u0 in H^2`.
///
/// Mode numbers index the basis of the grid: `cos(2 pi m x / l)` on periodic
/// grids and `cos(pi m x / l)` on Neumann grids.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `mean + sum_i A_i cos(xi_{m_i} x)`.
    Cosine { mean: f64, modes: Vec<(u32, f64)> },
    /// `mean + amplitude * r(x)`, where `r` is a seeded random series with
    /// coefficient envelope `exp(-(k / cutoff)^2)`, scaled to unit peak.
    Random {
        mean: f64,
        amplitude: f64,
        seed: u64,
        cutoff: f64,
    },
}

/// Modes drawn per random field, independent of the grid so that the same
/// seed yields the same function at every resolution.
fn random_mode_count(cutoff: f64) -> usize {
    (3.0 * cutoff).ceil().max(1.0) as usize
}

const PEAK_SAMPLES: usize = 1024;

impl InitialCondition {
    pub fn sample(&self, grid: &Grid) -> Result<Field, InitialError> {
        let l = grid.length();
        let base = match grid.bc() {
            BoundaryCondition::Periodic => 2.0 * PI / l,
            BoundaryCondition::Neumann => PI / l,
        };
        match self {
            InitialCondition::Cosine { mean, modes } => {
                let limit = match grid.bc() {
                    BoundaryCondition::Periodic => grid.len() / 2,
                    BoundaryCondition::Neumann => grid.len(),
                };
                if let Some(&(mode, _)) = modes.iter().find(|(m, _)| *m as usize >= limit) {
                    return Err(InitialError::UnresolvedMode { mode, n: grid.len() });
                }
                Ok(Field::from_fn(grid, |x| {
                    mean + modes
                        .iter()
                        .map(|&(m, a)| a * (base * m as f64 * x).cos())
                        .sum::<f64>()
                })?)
            }
            InitialCondition::Random {
                mean,
                amplitude,
                seed,
                cutoff,
            } => {
                if !(cutoff.is_finite() && *cutoff > 0.0) {
                    return Err(InitialError::InvalidCutoff(*cutoff));
                }
                let series = random_series(grid.bc(), *seed, *cutoff, grid.dealias_cutoff());
                let eval = |x: f64| -> f64 {
                    series
                        .iter()
                        .map(|&(k, a, b)| {
                            let arg = base * k as f64 * x;
                            a * arg.cos() + b * arg.sin()
                        })
                        .sum()
                };
                let peak = (0..PEAK_SAMPLES)
                    .map(|j| eval(l * j as f64 / PEAK_SAMPLES as f64).abs())
                    .fold(0.0, f64::max);
                let scale = if peak > 0.0 { amplitude / peak } else { 0.0 };
                Ok(Field::from_fn(grid, |x| mean + scale * eval(x))?)
            }
        }
    }
}

/// `(k, cos coefficient, sin coefficient)`; Neumann series carry no sine part.
fn random_series(bc: BoundaryCondition, seed: u64, cutoff: f64, max_mode: usize) -> Vec<(usize, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=random_mode_count(cutoff))
        .map(|k| {
            let envelope = (-(k as f64 / cutoff).powi(2)).exp();
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            let b = if bc == BoundaryCondition::Periodic { b } else { 0.0 };
            (k, envelope * a, envelope * b)
        })
        .filter(|&(k, _, _)| k <= max_mode)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::to_spectral;

    #[test]
    fn cosine_modes_follow_grid_basis() {
        let ic = InitialCondition::Cosine {
            mean: 0.3,
            modes: vec![(1, 0.01)],
        };
        let g = Grid::new(1.0, 16, BoundaryCondition::Periodic).unwrap();
        let u = ic.sample(&g).unwrap();
        assert!((u.values()[0] - 0.31).abs() < 1e-15);
        assert!((u.values()[8] - 0.29).abs() < 1e-15);
        let g = Grid::new(1.0, 16, BoundaryCondition::Neumann).unwrap();
        let c = to_spectral(&ic.sample(&g).unwrap());
        assert!((c.real_values()[1] - 0.01).abs() < 1e-15);
    }

    #[test]
    fn unresolved_modes_are_rejected() {
        let ic = InitialCondition::Cosine {
            mean: 0.0,
            modes: vec![(8, 1.0)],
        };
        let g = Grid::new(1.0, 16, BoundaryCondition::Periodic).unwrap();
        assert_eq!(ic.sample(&g), Err(InitialError::UnresolvedMode { mode: 8, n: 16 }));
    }

    #[test]
    fn random_field_is_seeded_and_resolution_independent() {
        let ic = InitialCondition::Random {
            mean: 0.3,
            amplitude: 0.05,
            seed: 7,
            cutoff: 4.0,
        };
        let coarse = ic.sample(&Grid::new(1.0, 64, BoundaryCondition::Periodic).unwrap()).unwrap();
        let fine = ic.sample(&Grid::new(1.0, 128, BoundaryCondition::Periodic).unwrap()).unwrap();
        for (j, v) in coarse.values().iter().enumerate() {
            assert!((v - fine.values()[2 * j]).abs() < 1e-15);
        }
        let again = ic.sample(coarse.grid()).unwrap();
        assert_eq!(again, coarse);
        let (lo, hi) = coarse.min_max();
        assert!(lo >= 0.25 - 1e-12 && hi <= 0.35 + 1e-12);
        let other = InitialCondition::Random {
            mean: 0.3,
            amplitude: 0.05,
            seed: 8,
            cutoff: 4.0,
        };
        assert_ne!(other.sample(coarse.grid()).unwrap(), coarse);
    }

    #[test]
    fn random_field_respects_dealias_band() {
        let ic = InitialCondition::Random {
            mean: 0.0,
            amplitude: 1.0,
            seed: 1,
            cutoff: 10.0,
        };
        let g = Grid::new(1.0, 32, BoundaryCondition::Periodic).unwrap();
        let c = to_spectral(&ic.sample(&g).unwrap());
        for (v, &k) in c.values().iter().zip(g.modes()) {
            if k.abs() > 10 {
                assert!(v.norm() < 1e-15);
            }
        }
    }
}
