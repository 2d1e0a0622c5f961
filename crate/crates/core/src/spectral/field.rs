use super::{Grid, SpectralError};

/// Point samples of `u(x_j)` on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite { index });
        }
        Ok(Field { grid, values })
    }

    /// Used by the transforms, whose output is finite whenever their input is.
    pub(crate) fn new_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self, SpectralError> {
        let values = grid.points().iter().map(|&x| f(x)).collect();
        Field::new(grid.clone(), values)
    }

    pub fn constant(grid: &Grid, c: f64) -> Result<Self, SpectralError> {
        Field::new(grid.clone(), vec![c; grid.len()])
    }

    pub fn zeros(grid: &Grid) -> Self {
        Field::new_unchecked(grid.clone(), vec![0.0; grid.len()])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Pointwise map; fails if the result is not finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Field, SpectralError> {
        Field::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::BoundaryCondition;

    #[test]
    fn validates_samples() {
        let g = Grid::new(1.0, 8, BoundaryCondition::Periodic).unwrap();
        assert!(matches!(
            Field::new(g.clone(), vec![0.0; 7]),
            Err(SpectralError::LengthMismatch { expected: 8, found: 7 })
        ));
        let mut v = vec![0.0; 8];
        v[3] = f64::INFINITY;
        assert!(matches!(Field::new(g.clone(), v), Err(SpectralError::NonFinite { index: 3 })));
        let f = Field::from_fn(&g, |x| x - 0.5).unwrap();
        assert_eq!(f.min_max(), (-0.5, 0.375));
        assert_eq!(f.max_abs(), 0.5);
    }
}
