use proptest::prelude::*;
use spinodal::eos::{lipschitz_bound, pressure, pressure_prime, spinodal_interval, EosError, EquationOfState};

fn eos_strategy() -> impl Strategy<Value = EquationOfState> {
    (0.2f64..3.0, -3.0f64..-0.1, 1.2f64..4.0, 0.1f64..3.0, prop::option::of(0.5f64..60.0))
        .prop_filter_map("cubic must be increasing at the knot", |(a3, a1, n, w, s)| {
            (3.0 * a3 * n * n + a1 > 0.0)
                .then(|| EquationOfState::blended(a3, a1, n, s, w).ok())
                .flatten()
        })
}

/// `max |p'|` on `[lo, hi]`: dense sampling, then golden-section refinement
/// around the best sample.
fn dense_lipschitz(eos: &EquationOfState, lo: f64, hi: f64) -> f64 {
    let m = 10_000;
    let h = (hi - lo) / m as f64;
    let f = |u: f64| pressure_prime(eos, u).abs();
    let mut best = (lo, f(lo));
    for i in 1..=m {
        let u = lo + i as f64 * h;
        let v = f(u);
        if v > best.1 {
            best = (u, v);
        }
    }
    let (mut a, mut b) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.1.max(f(0.5 * (a + b)))
}

proptest! {
    #[test]
    fn pressure_is_odd(eos in eos_strategy(), u in -20.0f64..20.0) {
        prop_assert_eq!(pressure(&eos, -u), -pressure(&eos, u));
        prop_assert_eq!(pressure_prime(&eos, -u), pressure_prime(&eos, u));
    }

    #[test]
    fn derivative_matches_finite_difference(eos in eos_strategy(), u in -12.0f64..12.0) {
        let h = 1e-5;
        let fd = (pressure(&eos, u + h) - pressure(&eos, u - h)) / (2.0 * h);
        let scale = pressure_prime(&eos, u).abs().max(1.0);
        prop_assert!((fd - pressure_prime(&eos, u)).abs() <= 1e-6 * scale);
        let fd2 = (eos.pressure_prime(u + h) - eos.pressure_prime(u - h)) / (2.0 * h);
        prop_assert!((fd2 - eos.pressure_second(u)).abs() <= 1e-5 * eos.pressure_second(u).abs().max(1.0));
        let fd3 = (eos.pressure_second(u + h) - eos.pressure_second(u - h)) / (2.0 * h);
        prop_assert!((fd3 - eos.pressure_third(u)).abs() <= 1e-4 * eos.pressure_third(u).abs().max(1.0));
    }

    #[test]
    fn three_derivatives_are_continuous_at_the_knots(eos in eos_strategy()) {
        let (n, m) = eos.blend_knots().unwrap();
        // adjacent floats on either side of each knot
        let below = |u: f64| f64::from_bits(u.to_bits() - 1);
        let above = |u: f64| f64::from_bits(u.to_bits() + 1);
        for knot in [n, m] {
            let (l, r) = (below(knot), above(knot));
            let pairs = [
                (eos.pressure(l), eos.pressure(r)),
                (eos.pressure_prime(l), eos.pressure_prime(r)),
                (eos.pressure_second(l), eos.pressure_second(r)),
                (eos.pressure_third(l), eos.pressure_third(r)),
            ];
            for (order, (a, b)) in pairs.iter().enumerate() {
                prop_assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "order {} at {}: {} vs {}", order, knot, a, b);
            }
        }
    }

    #[test]
    fn far_field_is_linear(eos in eos_strategy(), d in 0.0f64..50.0) {
        let (_, m) = eos.blend_knots().unwrap();
        let u = m + d;
        let s = pressure_prime(&eos, m + 1.0);
        prop_assert!((pressure_prime(&eos, u) - s).abs() <= 1e-12 * s);
        prop_assert_eq!(eos.pressure_second(u), 0.0);
    }

    #[test]
    fn lipschitz_matches_dense_oracle(eos in eos_strategy(), a in -8.0f64..8.0, w in 0.0f64..8.0) {
        let (lo, hi) = (a, a + w);
        let k = lipschitz_bound(&eos, lo, hi);
        let oracle = dense_lipschitz(&eos, lo, hi);
        prop_assert!(k >= oracle * (1.0 - 1e-12));
        prop_assert!((k - oracle).abs() <= 1e-9 * oracle.max(1.0), "k = {}, oracle = {}", k, oracle);
    }

    #[test]
    fn lipschitz_is_monotone_in_the_interval(eos in eos_strategy(), a in -6.0f64..6.0, w in 0.0f64..4.0, grow in 0.0f64..3.0) {
        let inner = lipschitz_bound(&eos, a, a + w);
        let outer = lipschitz_bound(&eos, a - grow, a + w + grow);
        // interior maxima are located by bisection, so allow round-off
        prop_assert!(outer >= inner * (1.0 - 1e-14), "inner {} > outer {}", inner, outer);
    }

    #[test]
    fn spinodal_interval_brackets_negative_slope(eos in eos_strategy(), t in 0.0f64..1.0) {
        let (lo, hi) = spinodal_interval(&eos).unwrap();
        prop_assert!(lo < 0.0 && hi > 0.0);
        prop_assert!((lo + hi).abs() <= 1e-12);
        prop_assert!(pressure_prime(&eos, lo).abs() <= 1e-9);
        let inside = lo + t * (hi - lo);
        if inside > lo + 1e-9 && inside < hi - 1e-9 {
            prop_assert!(pressure_prime(&eos, inside) < 0.0);
        }
        prop_assert!(pressure_prime(&eos, hi + 1e-6) > 0.0);
    }
}

#[test]
fn default_law_values() {
    let eos = EquationOfState::default();
    assert_eq!(pressure(&eos, 0.5), 0.125 - 0.5);
    assert_eq!(pressure(&eos, 2.0), 6.0);
    assert!((pressure(&eos, 10.0) - 94.0).abs() < 1e-12);
    let (lo, hi) = spinodal_interval(&eos).unwrap();
    assert!((hi - 1.0 / 3f64.sqrt()).abs() < 1e-15 && lo == -hi);
    assert_eq!(lipschitz_bound(&eos, 0.0, 0.0), 1.0);
    assert!((lipschitz_bound(&eos, -1.0, 1.0) - 2.0).abs() < 1e-15);
}

#[test]
fn convex_law_has_no_spinodal() {
    let eos = EquationOfState::blended(1.0, 1.0, 2.0, None, 1.0).unwrap();
    assert_eq!(spinodal_interval(&eos), Err(EosError::NoSpinodal));
    assert_eq!(spinodal_interval(&EquationOfState::zero()), Err(EosError::NoSpinodal));
}
