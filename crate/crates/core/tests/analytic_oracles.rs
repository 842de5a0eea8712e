//! Analytic evaluators against independent numerical routes.

use proptest::prelude::*;
use satcox::analytic::{coverage_rayleigh, ergodic_rate, nosat_probability, RATE_CAP_BITS};
use satcox::{db_to_linear, CoxParams, GeometryParams, LinkBudget, QuadratureSpec};

/// Composite trapezoid rule on `[a, b]` with `n` panels.
fn trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h)).sum();
    h * (0.5 * (f(a) + f(b)) + inner)
}

#[test]
fn rate_matches_dense_trapezoid() {
    let g = GeometryParams::from_orbit_radius(6400.0, 6950.0).unwrap();
    let p = CoxParams::new(30.0, 30.0).unwrap();
    let lb = LinkBudget::default();
    let spec = QuadratureSpec::default();
    let cov = |u: f64| coverage_rayleigh(u.exp2() - 1.0, p, &g, &lb, &spec).unwrap();
    // Dense where the curve falls, coarse over the flat single-satellite tail.
    let body = trapezoid(cov, 0.0, 12.0, 1200);
    let tail = trapezoid(cov, 12.0, RATE_CAP_BITS, 112);
    let r = ergodic_rate(p, &g, &lb, &spec).unwrap();
    assert!((r.value - (body + tail)).abs() < 1e-3, "{} vs {}", r.value, body + tail);
}

#[test]
fn nosat_by_direct_orbit_sum() {
    // Orbits are Poisson, so P(no satellite) = exp(-lambda A) with A the
    // mean measure of orbits carrying a visible satellite: a 1-D integral
    // over the tilt of the orbit, summed here with the midpoint rule.
    let g = GeometryParams::table1();
    let spec = QuadratureSpec::default();
    let mu = 8.0;
    let bar = g.phi_bar();
    let n = 20_000;
    let mut acc = 0.0;
    for i in 0..n {
        // colatitude c of the orbit pole measured from the equator of the
        // observer; orbits with |c| < bar cross the cap.
        let c = (i as f64 + 0.5) / n as f64 * bar;
        let half = ((bar.cos().powi(2) / c.cos().powi(2)).min(1.0)).sqrt().acos();
        acc += c.cos() * (1.0 - (-mu * half / std::f64::consts::PI).exp()) * bar / n as f64;
    }
    let lambda = 5.0;
    let direct = (-lambda * acc).exp();
    let v = nosat_probability(CoxParams::new(lambda, mu).unwrap(), &g, &spec).unwrap();
    assert!((v / direct - 1.0).abs() < 1e-6, "{v} vs {direct}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coverage_is_a_ccdf(l in 1.0f64..60.0, m in 1.0f64..60.0, d1 in -10.0f64..20.0, d2 in -10.0f64..20.0) {
        let g = GeometryParams::table1();
        let lb = LinkBudget::default();
        let spec = QuadratureSpec::default();
        let p = CoxParams::new(l, m).unwrap();
        let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        let a = coverage_rayleigh(db_to_linear(lo), p, &g, &lb, &spec).unwrap();
        let b = coverage_rayleigh(db_to_linear(hi), p, &g, &lb, &spec).unwrap();
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(b <= a + 1e-6, "{} dB: {}, {} dB: {}", lo, a, hi, b);
        let none = nosat_probability(p, &g, &spec).unwrap();
        prop_assert!(a <= 1.0 - none + 1e-6);
    }

    #[test]
    fn more_gain_more_coverage(l in 2.0f64..40.0, m in 2.0f64..40.0, d in -5.0f64..15.0, extra in 0.5f64..10.0) {
        let g = GeometryParams::table1();
        let spec = QuadratureSpec::default();
        let p = CoxParams::new(l, m).unwrap();
        let tau = db_to_linear(d);
        let lo = coverage_rayleigh(tau, p, &g, &LinkBudget::default().with_gain_db(20.0), &spec).unwrap();
        let hi = coverage_rayleigh(tau, p, &g, &LinkBudget::default().with_gain_db(20.0 + extra), &spec).unwrap();
        prop_assert!(hi >= lo - 1e-6);
    }
}
