//! Nonconvex equation of state `p(u)`.
//!
//! The core law is the odd cubic `p(u) = a3 u^3 + a1 u` on `|u| <= N`. Beyond
//! `|u| >= N + w` the pressure is the linear function
//! `L(u) = p(N) + s_inf (u - N)` (mirrored for negative `u`). On the blend
//! band `N < |u| < N + w` a degree-7 Hermite polynomial matches value and three
//! derivatives of both pieces, so `p` is `C^3` everywhere.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EosError {
    #[error("blend threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("blend width must be positive, got {0}")]
    InvalidWidth(f64),
    #[error("asymptotic slope must be positive, got {0}")]
    InvalidSlope(f64),
    #[error("coefficients must be finite")]
    NonFinite,
    #[error("p'(u) >= 0 everywhere: the equation of state has no spinodal interval")]
    NoSpinodal,
}

/// Pressure law used by the dynamics.
#[derive(Debug, Clone, PartialEq)]
pub enum EquationOfState {
    /// `p == 0`; used for the purely linear benchmarks.
    Zero,
    Blended(BlendedCubic),
}

/// Cubic core with a `C^3` blend onto linear growth.
#[derive(Debug, Clone, PartialEq)]
pub struct BlendedCubic {
    a3: f64,
    a1: f64,
    threshold: f64,
    slope_inf: f64,
    width: f64,
    // coefficients of q(s) = p(N + w s), s in [0, 1], ascending powers
    blend: [f64; 8],
}

impl Default for EquationOfState {
    fn default() -> Self {
        EquationOfState::Blended(BlendedCubic::new(1.0, -1.0, 2.0, None, 1.0).expect("default is valid"))
    }
}

impl EquationOfState {
    /// Cubic core `a3 u^3 + a1 u` blended at `threshold` over `width` onto a line
    /// of slope `slope_inf`; `None` continues the slope of the cubic at the knot.
    pub fn blended(a3: f64, a1: f64, threshold: f64, slope_inf: Option<f64>, width: f64) -> Result<Self, EosError> {
        Ok(EquationOfState::Blended(BlendedCubic::new(a3, a1, threshold, slope_inf, width)?))
    }

    pub fn zero() -> Self {
        EquationOfState::Zero
    }

    pub fn pressure(&self, u: f64) -> f64 {
        match self {
            EquationOfState::Zero => 0.0,
            EquationOfState::Blended(b) => b.derivative(u, 0),
        }
    }

    pub fn pressure_prime(&self, u: f64) -> f64 {
        match self {
            EquationOfState::Zero => 0.0,
            EquationOfState::Blended(b) => b.derivative(u, 1),
        }
    }

    pub fn pressure_second(&self, u: f64) -> f64 {
        match self {
            EquationOfState::Zero => 0.0,
            EquationOfState::Blended(b) => b.derivative(u, 2),
        }
    }

    pub fn pressure_third(&self, u: f64) -> f64 {
        match self {
            EquationOfState::Zero => 0.0,
            EquationOfState::Blended(b) => b.derivative(u, 3),
        }
    }

    /// Maximal open interval on which `p'(u) < 0`.
    pub fn spinodal_interval(&self) -> Result<(f64, f64), EosError> {
        match self {
            EquationOfState::Zero => Err(EosError::NoSpinodal),
            EquationOfState::Blended(b) => b.spinodal_interval(),
        }
    }

    /// `max |p'(u)|` over `[u_min, u_max]`.
    pub fn lipschitz_bound(&self, u_min: f64, u_max: f64) -> f64 {
        assert!(u_min <= u_max, "empty interval [{u_min}, {u_max}]");
        match self {
            EquationOfState::Zero => 0.0,
            EquationOfState::Blended(b) => b.lipschitz_bound(u_min, u_max),
        }
    }

    /// `(threshold, width)` of the blend band, if any.
    pub fn blend_knots(&self) -> Option<(f64, f64)> {
        match self {
            EquationOfState::Zero => None,
            EquationOfState::Blended(b) => Some((b.threshold, b.threshold + b.width)),
        }
    }
}

pub fn pressure(eos: &EquationOfState, u: f64) -> f64 {
    eos.pressure(u)
}

pub fn pressure_prime(eos: &EquationOfState, u: f64) -> f64 {
    eos.pressure_prime(u)
}

pub fn spinodal_interval(eos: &EquationOfState) -> Result<(f64, f64), EosError> {
    eos.spinodal_interval()
}

pub fn lipschitz_bound(eos: &EquationOfState, u_min: f64, u_max: f64) -> f64 {
    eos.lipschitz_bound(u_min, u_max)
}

const FACTORIAL: [f64; 8] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0];

impl BlendedCubic {
    pub fn new(a3: f64, a1: f64, threshold: f64, slope_inf: Option<f64>, width: f64) -> Result<Self, EosError> {
        if !(a3.is_finite() && a1.is_finite()) {
            return Err(EosError::NonFinite);
        }
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(EosError::InvalidThreshold(threshold));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(EosError::InvalidWidth(width));
        }
        let slope_inf = slope_inf.unwrap_or(3.0 * a3 * threshold * threshold + a1);
        if !(slope_inf.is_finite() && slope_inf > 0.0) {
            return Err(EosError::InvalidSlope(slope_inf));
        }
        let mut b = BlendedCubic {
            a3,
            a1,
            threshold,
            slope_inf,
            width,
            blend: [0.0; 8],
        };
        b.blend = b.hermite_blend();
        Ok(b)
    }

    pub fn a3(&self) -> f64 {
        self.a3
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn slope_inf(&self) -> f64 {
        self.slope_inf
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Intercept of the linear far field: `p(u) = s_inf u + offset` for `u >= N + w`.
    pub fn offset(&self) -> f64 {
        self.cubic(self.threshold, 0) - self.slope_inf * self.threshold
    }

    fn cubic(&self, u: f64, order: u32) -> f64 {
        match order {
            0 => self.a3 * u * u * u + self.a1 * u,
            1 => 3.0 * self.a3 * u * u + self.a1,
            2 => 6.0 * self.a3 * u,
            3 => 6.0 * self.a3,
            _ => 0.0,
        }
    }

    fn line(&self, u: f64, order: u32) -> f64 {
        match order {
            0 => self.cubic(self.threshold, 0) + self.slope_inf * (u - self.threshold),
            1 => self.slope_inf,
            _ => 0.0,
        }
    }

    /// Two-point Hermite data: Taylor part from the cubic at s = 0, plus
    /// s^4 (e0 + e1 s + e2 s^2 + e3 s^3) fitted to the line at s = 1.
    fn hermite_blend(&self) -> [f64; 8] {
        let (n, w) = (self.threshold, self.width);
        let mut coef = [0.0; 8];
        for (i, c) in coef.iter_mut().take(4).enumerate() {
            *c = w.powi(i as i32) * self.cubic(n, i as u32) / FACTORIAL[i];
        }
        // residual targets at s = 1 for derivatives 0..3
        let mut rhs = [0.0; 4];
        for (i, r) in rhs.iter_mut().enumerate() {
            let target = w.powi(i as i32) * self.line(n + w, i as u32);
            let taylor: f64 = (i..4).map(|p| coef[p] * FACTORIAL[p] / FACTORIAL[p - i]).sum();
            *r = target - taylor;
        }
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                let p = 4 + j;
                *entry = FACTORIAL[p] / FACTORIAL[p - i];
            }
        }
        let e = solve4(m, rhs);
        coef[4..].copy_from_slice(&e);
        coef
    }

    fn blend_eval(&self, s: f64, order: u32) -> f64 {
        // d^order/ds^order of the blend polynomial, Horner form
        let mut acc = 0.0;
        for p in (order as usize..8).rev() {
            acc = acc * s + self.blend[p] * FACTORIAL[p] / FACTORIAL[p - order as usize];
        }
        acc / self.width.powi(order as i32)
    }

    /// `d^order p / du^order` for `order` in 0..=3.
    fn derivative(&self, u: f64, order: u32) -> f64 {
        let a = u.abs();
        let raw = if a <= self.threshold {
            return self.cubic(u, order);
        } else if a < self.threshold + self.width {
            self.blend_eval((a - self.threshold) / self.width, order)
        } else {
            self.line(a, order)
        };
        // p is odd: even-order derivatives flip sign with u
        if u < 0.0 && order % 2 == 0 {
            -raw
        } else {
            raw
        }
    }

    fn spinodal_interval(&self) -> Result<(f64, f64), EosError> {
        if self.a3 > 0.0 && self.a1 < 0.0 {
            let root = (-self.a1 / (3.0 * self.a3)).sqrt();
            if root <= self.threshold {
                return Ok((-root, root));
            }
        }
        // p' is even; locate the negative region on u >= 0 numerically
        let p1 = |u: f64| self.derivative(u, 1);
        let end = self.threshold + self.width;
        let samples = 4096;
        let h = end / samples as f64;
        let mut lo = None;
        let mut hi = None;
        for i in 0..=samples {
            let u = i as f64 * h;
            if p1(u) < 0.0 {
                if lo.is_none() {
                    lo = Some(if i == 0 { 0.0 } else { bisect(p1, u - h, u) });
                }
            } else if lo.is_some() {
                hi = Some(bisect(p1, u - h, u));
                break;
            }
        }
        match (lo, hi) {
            (Some(lo), Some(hi)) if lo == 0.0 => Ok((-hi, hi)),
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(EosError::NoSpinodal),
        }
    }

    fn lipschitz_bound(&self, u_min: f64, u_max: f64) -> f64 {
        let (n, end) = (self.threshold, self.threshold + self.width);
        let mut candidates = vec![u_min, u_max];
        // critical point of the cubic slope
        if u_min <= 0.0 && 0.0 <= u_max {
            candidates.push(0.0);
        }
        for knot in [-end, -n, n, end] {
            if u_min <= knot && knot <= u_max {
                candidates.push(knot);
            }
        }
        // interior extrema of p' on the blend bands: roots of p''
        for sign in [1.0, -1.0] {
            let (a, b) = if sign > 0.0 { (n, end) } else { (-end, -n) };
            let (a, b) = (a.max(u_min), b.min(u_max));
            if a >= b {
                continue;
            }
            let p2 = |u: f64| self.derivative(u, 2);
            let pieces = 256;
            let h = (b - a) / pieces as f64;
            for i in 0..pieces {
                let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
                if p2(x0) == 0.0 {
                    candidates.push(x0);
                } else if p2(x0).signum() != p2(x1).signum() {
                    candidates.push(bisect(p2, x0, x1));
                }
            }
        }
        candidates
            .into_iter()
            .map(|u| self.derivative(u, 1).abs())
            .fold(0.0, f64::max)
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if (f(mid) < 0.0) == (fa < 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Gaussian elimination with partial pivoting for the 4x4 Hermite system.
fn solve4(mut m: [[f64; 4]; 4], mut rhs: [f64; 4]) -> [f64; 4] {
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| m[row][k] * x[k]).sum();
        x[row] = (rhs[row] - s) / m[row][row];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_eos() -> EquationOfState {
        EquationOfState::default()
    }

    #[test]
    fn default_core_values() {
        let eos = default_eos();
        assert_eq!(eos.pressure(0.0), 0.0);
        assert_eq!(eos.pressure(1.0), 0.0);
        assert_eq!(eos.pressure_prime(0.0), -1.0);
        assert_eq!(eos.pressure_prime(1.0), 2.0);
    }

    #[test]
    fn default_far_field_is_tangent_line() {
        let eos = default_eos();
        let EquationOfState::Blended(b) = &eos else { unreachable!() };
        // slope continues p'(2) = 11 and the line passes through p(2) = 6
        assert_eq!(b.slope_inf(), 11.0);
        assert_eq!(b.offset(), -16.0);
        assert!((eos.pressure(10.0) - 94.0).abs() < 1e-12);
        assert_eq!(eos.pressure_prime(10.0), 11.0);
        assert!((eos.pressure(-10.0) + 94.0).abs() < 1e-12);
    }

    #[test]
    fn blend_matches_both_sides_at_knots() {
        let eos = default_eos();
        let EquationOfState::Blended(b) = &eos else { unreachable!() };
        for order in 0..4 {
            let left = b.cubic(2.0, order);
            let right = b.blend_eval(0.0, order);
            assert!((left - right).abs() < 1e-12, "order {order}: {left} vs {right}");
            let left = b.blend_eval(1.0, order);
            let right = b.line(3.0, order);
            assert!((left - right).abs() < 1e-10, "order {order}: {left} vs {right}");
        }
    }

    #[test]
    fn spinodal_intervals() {
        let (lo, hi) = default_eos().spinodal_interval().unwrap();
        assert!((hi - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(lo, -hi);
        assert!((hi - 0.57735).abs() < 1e-5);
        let convex = EquationOfState::blended(1.0, 1.0, 2.0, None, 1.0).unwrap();
        assert_eq!(convex.spinodal_interval(), Err(EosError::NoSpinodal));
        let scaled = EquationOfState::blended(2.0, -2.0, 2.0, None, 1.0).unwrap();
        let (slo, shi) = scaled.spinodal_interval().unwrap();
        assert!((slo - lo).abs() < 1e-15 && (shi - hi).abs() < 1e-15);
        assert_eq!(EquationOfState::zero().spinodal_interval(), Err(EosError::NoSpinodal));
    }

    #[test]
    fn spinodal_reaching_into_blend_is_found_numerically() {
        // p' = a1 < 0 on the whole core; the blend turns it positive
        let eos = EquationOfState::blended(0.0, -0.5, 1.0, Some(1.0), 1.0).unwrap();
        let (lo, hi) = eos.spinodal_interval().unwrap();
        assert!(hi > 1.0 && hi < 2.0);
        assert_eq!(lo, -hi);
        assert!(eos.pressure_prime(hi).abs() < 1e-10);
    }

    #[test]
    fn lipschitz_simple_intervals() {
        let eos = default_eos();
        assert!((eos.lipschitz_bound(-1.0, 1.0) - 2.0).abs() < 1e-15);
        assert!((eos.lipschitz_bound(0.0, 0.1) - 1.0).abs() < 1e-15);
        assert_eq!(EquationOfState::zero().lipschitz_bound(-5.0, 5.0), 0.0);
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert_eq!(
            EquationOfState::blended(1.0, -1.0, 0.0, None, 1.0),
            Err(EosError::InvalidThreshold(0.0))
        );
        assert_eq!(
            EquationOfState::blended(1.0, -1.0, 2.0, None, -1.0),
            Err(EosError::InvalidWidth(-1.0))
        );
        assert_eq!(
            EquationOfState::blended(1.0, -1.0, 2.0, Some(-3.0), 1.0),
            Err(EosError::InvalidSlope(-3.0))
        );
        // cubic slope at the knot is negative, so no slope can be inherited
        assert!(matches!(
            EquationOfState::blended(0.0, -1.0, 2.0, None, 1.0),
            Err(EosError::InvalidSlope(_))
        ));
    }
}
