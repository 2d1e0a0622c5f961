//! Discrete fields on `[0, l]` and their spectral representations.
//!
//! Periodic fields use the complex Fourier series with `xi_k = 2 pi k / l`.
//! Neumann fields use a cosine series with `xi_k = pi k / l`, realized by even
//! reflection onto a torus of length `2l`; each cosine mode then satisfies
//! `u_x = u_xxx = 0` at both endpoints exactly. Odd derivatives of a cosine
//! series land in the companion sine series.
//!
//! Coefficients are normalized so that mode 0 is the mean of the samples, and
//! all norms are evaluated through the discrete Parseval identity.

mod field;
mod grid;

pub use field::Field;
pub use grid::{make_grid, BoundaryCondition, Grid, MIN_POINTS};

use rustfft::num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("domain length must be positive and finite, got {0}")]
    InvalidLength(f64),
    #[error("point count must be even and at least {MIN_POINTS}, got {0}")]
    InvalidPointCount(usize),
    #[error("expected {expected} samples, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("derivative order must be in 1..=4, got {0}")]
    InvalidOrder(u32),
    #[error("viscosity must be non-negative, got {0}")]
    NegativeViscosity(f64),
}

/// Which expansion a coefficient vector refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// `sum_k c_k exp(i xi_k x)`, complex coefficients.
    Fourier,
    /// `sum_k a_k cos(xi_k x)`, real coefficients.
    Cosine,
    /// `sum_k s_k sin(xi_k x)`, real coefficients.
    Sine,
}

/// Coefficients of a field in the basis matching its grid.
///
/// Cosine and sine coefficients are stored with zero imaginary part so that
/// all bases share the same per-mode arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    grid: Grid,
    basis: Basis,
    values: Vec<Complex64>,
}

impl SpectralCoeffs {
    pub fn zeros(grid: &Grid, basis: Basis) -> Self {
        SpectralCoeffs {
            grid: grid.clone(),
            basis,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Builds coefficients from raw values; the caller is responsible for
    /// conjugate symmetry in the Fourier basis.
    pub fn from_values(grid: &Grid, basis: Basis, values: Vec<Complex64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(SpectralCoeffs {
            grid: grid.clone(),
            basis,
            values,
        })
    }

    /// Cosine (or sine) coefficients from real values.
    pub fn from_real(grid: &Grid, basis: Basis, values: &[f64]) -> Result<Self, SpectralError> {
        Self::from_values(grid, basis, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn wavenumbers(&self) -> &[f64] {
        self.grid.wavenumbers()
    }

    /// Real parts; these are the coefficients themselves for cosine and sine.
    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.re).collect()
    }

    /// Coefficient of the constant mode (the mean of the field).
    pub fn mean(&self) -> f64 {
        match self.basis {
            Basis::Sine => 0.0,
            _ => self.values[0].re,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Multiplies every coefficient by a real factor depending on its wavenumber.
    pub fn scale_by(&self, factor: impl Fn(f64) -> f64) -> Self {
        let values = self
            .values
            .iter()
            .zip(self.grid.wavenumbers())
            .map(|(c, &xi)| c * factor(xi))
            .collect();
        SpectralCoeffs {
            grid: self.grid.clone(),
            basis: self.basis,
            values,
        }
    }

    /// `self + a * other`.
    pub fn add_scaled(&self, other: &SpectralCoeffs, a: f64) -> Self {
        assert_eq!(self.basis, other.basis, "basis mismatch");
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x + y * a).collect();
        SpectralCoeffs {
            grid: self.grid.clone(),
            basis: self.basis,
            values,
        }
    }

    /// Parseval weight of each slot: the discrete `L^2` inner product equals
    /// `l * sum_k w_k Re(a_k conj(b_k))`.
    fn weight(&self, slot: usize) -> f64 {
        match self.basis {
            Basis::Fourier => 1.0,
            Basis::Cosine | Basis::Sine => {
                if slot == 0 {
                    1.0
                } else {
                    0.5
                }
            }
        }
    }

    /// Discrete `L^2(0, l)` inner product, evaluated spectrally.
    pub fn inner(&self, other: &SpectralCoeffs) -> f64 {
        assert_eq!(self.basis, other.basis, "basis mismatch");
        assert_eq!(self.grid.len(), other.grid.len(), "grid mismatch");
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| self.weight(i) * (a * b.conj()).re)
            .sum();
        self.grid.length() * sum
    }

    /// Squared discrete `L^2` norm.
    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Evaluates the series at an arbitrary `x`.
    pub fn evaluate_at(&self, x: f64) -> f64 {
        let xi = self.grid.wavenumbers();
        match self.basis {
            Basis::Fourier => self
                .values
                .iter()
                .zip(xi)
                .map(|(c, &k)| (c * Complex64::from_polar(1.0, k * x)).re)
                .sum(),
            Basis::Cosine => self.values.iter().zip(xi).map(|(c, &k)| c.re * (k * x).cos()).sum(),
            Basis::Sine => self.values.iter().zip(xi).map(|(c, &k)| c.re * (k * x).sin()).sum(),
        }
    }

    /// The same trigonometric interpolant represented on a grid of `n` points:
    /// zero-padding when refining, truncation when coarsening.
    pub fn resample(&self, n: usize) -> Result<SpectralCoeffs, SpectralError> {
        let grid = self.grid.with_points(n)?;
        let n_old = self.grid.len();
        let mut out = SpectralCoeffs::zeros(&grid, self.basis);
        match self.basis {
            Basis::Fourier => {
                let half_new = (n / 2) as i64;
                let half_old = (n_old / 2) as i64;
                for (&k, &c) in self.grid.modes().iter().zip(&self.values) {
                    if k == half_old && n > n_old {
                        // split the old Nyquist mode symmetrically
                        out.values[k as usize] += c * 0.5;
                        out.values[n - k as usize] += c * 0.5;
                    } else if k.abs() <= half_new {
                        let slot = k.rem_euclid(n as i64) as usize;
                        out.values[slot] += c;
                    }
                }
            }
            Basis::Cosine | Basis::Sine => {
                let m = n.min(n_old);
                out.values[..m].copy_from_slice(&self.values[..m]);
            }
        }
        Ok(out)
    }
}

/// Forward transform of a field in the basis determined by its grid.
pub fn to_spectral(field: &Field) -> SpectralCoeffs {
    let grid = field.grid();
    let n = grid.len();
    match grid.bc() {
        BoundaryCondition::Periodic => {
            let mut buf: Vec<Complex64> = field.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
            grid.forward_plan().process(&mut buf);
            let scale = 1.0 / n as f64;
            buf.iter_mut().for_each(|c| *c *= scale);
            SpectralCoeffs {
                grid: grid.clone(),
                basis: Basis::Fourier,
                values: buf,
            }
        }
        BoundaryCondition::Neumann => {
            // even reflection about x = l onto 2n samples
            let mut buf = vec![Complex64::new(0.0, 0.0); 2 * n];
            for (j, &v) in field.values().iter().enumerate() {
                buf[j] = Complex64::new(v, 0.0);
                buf[2 * n - 1 - j] = Complex64::new(v, 0.0);
            }
            grid.forward_plan().process(&mut buf);
            let scale = 1.0 / (2 * n) as f64;
            let shift = grid.shift();
            let values = (0..n)
                .map(|k| {
                    let b = (buf[k] * shift[k]).re * scale;
                    Complex64::new(if k == 0 { b } else { 2.0 * b }, 0.0)
                })
                .collect();
            SpectralCoeffs {
                grid: grid.clone(),
                basis: Basis::Cosine,
                values,
            }
        }
    }
}

/// Inverse transform back to grid samples.
pub fn from_spectral(coeffs: &SpectralCoeffs) -> Field {
    let grid = coeffs.grid();
    let n = grid.len();
    let values = match coeffs.basis {
        Basis::Fourier => {
            let mut buf = coeffs.values.clone();
            grid.inverse_plan().process(&mut buf);
            buf.iter().map(|c| c.re).collect()
        }
        Basis::Cosine | Basis::Sine => {
            // exponential coefficients b_{+k}, b_{-k} of the reflected series
            let shift = grid.shift();
            let mut buf = vec![Complex64::new(0.0, 0.0); 2 * n];
            for k in 0..n {
                let a = coeffs.values[k].re;
                let (plus, minus) = match coeffs.basis {
                    Basis::Cosine if k == 0 => (Complex64::new(a, 0.0), Complex64::new(0.0, 0.0)),
                    Basis::Cosine => (Complex64::new(0.5 * a, 0.0), Complex64::new(0.5 * a, 0.0)),
                    _ if k == 0 => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
                    _ => (Complex64::new(0.0, -0.5 * a), Complex64::new(0.0, 0.5 * a)),
                };
                buf[k] += plus * shift[k].conj();
                if k > 0 {
                    buf[2 * n - k] += minus * shift[k];
                }
            }
            grid.inverse_plan().process(&mut buf);
            buf[..n].iter().map(|c| c.re).collect()
        }
    };
    Field::new_unchecked(grid.clone(), values)
}

/// Spectral derivative of order 1 through 4.
///
/// Periodic: multiplication by `(i xi)^order`, with the Nyquist mode dropped
/// for odd orders. Cosine/sine: each differentiation swaps the basis, so odd
/// derivatives of a cosine series are sine series (zero at both endpoints).
pub fn spectral_derivative(coeffs: &SpectralCoeffs, order: u32) -> Result<SpectralCoeffs, SpectralError> {
    if !(1..=4).contains(&order) {
        return Err(SpectralError::InvalidOrder(order));
    }
    let grid = coeffs.grid();
    let xi = grid.wavenumbers();
    match coeffs.basis {
        Basis::Fourier => {
            let nyquist = grid.len() / 2;
            let i_pow = Complex64::new(0.0, 1.0).powu(order);
            let values = coeffs
                .values
                .iter()
                .zip(xi)
                .enumerate()
                .map(|(slot, (c, &k))| {
                    if order % 2 == 1 && slot == nyquist {
                        Complex64::new(0.0, 0.0)
                    } else {
                        c * i_pow * k.powi(order as i32)
                    }
                })
                .collect();
            Ok(SpectralCoeffs {
                grid: grid.clone(),
                basis: Basis::Fourier,
                values,
            })
        }
        Basis::Cosine | Basis::Sine => {
            let mut basis = coeffs.basis;
            let mut values = coeffs.values.clone();
            for _ in 0..order {
                // d/dx cos(xi x) = -xi sin(xi x);  d/dx sin(xi x) = xi cos(xi x)
                let sign = if basis == Basis::Cosine { -1.0 } else { 1.0 };
                for (c, &k) in values.iter_mut().zip(xi) {
                    *c *= sign * k;
                }
                basis = if basis == Basis::Cosine { Basis::Sine } else { Basis::Cosine };
            }
            Ok(SpectralCoeffs {
                grid: grid.clone(),
                basis,
                values,
            })
        }
    }
}

/// Applies `(1 - nu d_xx)^{-1}`: each coefficient is divided by `1 + nu xi^2`.
pub fn helmholtz_inverse(coeffs: &SpectralCoeffs, nu: f64) -> Result<SpectralCoeffs, SpectralError> {
    if !(nu >= 0.0) {
        return Err(SpectralError::NegativeViscosity(nu));
    }
    Ok(coeffs.scale_by(|xi| 1.0 / (1.0 + nu * xi * xi)))
}

/// Two-thirds truncation: zeroes every mode above [`Grid::dealias_cutoff`].
pub fn dealias(coeffs: &SpectralCoeffs) -> SpectralCoeffs {
    let cutoff = coeffs.grid.dealias_cutoff() as i64;
    let mut out = coeffs.clone();
    for (c, &k) in out.values.iter_mut().zip(coeffs.grid.modes()) {
        if k.abs() > cutoff {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    out
}

/// Sum of squared `L^2` norms of the field and its first `order` derivatives.
pub fn sobolev_norm_sq(coeffs: &SpectralCoeffs, order: u32) -> f64 {
    let mut total = coeffs.norm_sq();
    for m in 1..=order {
        total += spectral_derivative(coeffs, m).expect("order in range").norm_sq();
    }
    total
}

/// Pointwise product of two fields, evaluated on a grid refined by `factor`
/// and projected back, so that products of band-limited inputs carry no
/// aliasing error for `factor >= 2`.
pub fn padded_product(a: &SpectralCoeffs, b: &SpectralCoeffs, factor: usize) -> Result<SpectralCoeffs, SpectralError> {
    let n = a.grid().len();
    let fine_a = from_spectral(&a.resample(factor * n)?);
    let fine_b = from_spectral(&b.resample(factor * n)?);
    let prod: Vec<f64> = fine_a.values().iter().zip(fine_b.values()).map(|(x, y)| x * y).collect();
    let fine = to_spectral(&Field::new(fine_a.grid().clone(), prod)?);
    fine.resample(n)
}
