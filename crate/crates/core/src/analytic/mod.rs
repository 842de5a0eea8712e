//! Closed-form and integral results for the Cox model, evaluated numerically.
//!
//! All integrals are written in the cap angle `xi` rather than the distance
//! `z`: since `cos xi = (r_s^2 + r_e^2 - z^2) / (2 r_s r_e)`, the density
//! `z dz / (r_s r_e)` becomes `sin(xi) dxi`. Integrals over orbit co-latitude
//! that run up to the rim of a cap have a square-root endpoint; they are
//! integrated in `t` with `v = xi (1 - t^2)`.

mod bell;
mod coverage;
mod nakagami;

use serde::{Deserialize, Serialize};

use crate::constellation::CoxParams;
use crate::error::{Error, Result};
use crate::geometry::{cap_angle_unchecked, GeometryParams};
use crate::quadrature::{integrate, QuadratureSpec};

pub use bell::{bell_polynomials, complete_bell};
pub use coverage::{
    coverage_curve, coverage_rayleigh, coverage_sinr, coverage_with_noise, ergodic_rate, ergodic_rate_from,
    noise_scaling, RateEstimate, RATE_CAP_BITS,
};
pub use nakagami::{coverage_nakagami, NakagamiPlan};

/// Boltzmann constant, dBW/K/Hz.
pub const BOLTZMANN_DBW: f64 = -228.6;

/// Transmit power, gains, path loss and fading of the downlink.
///
/// The serving satellite is received with gain `g` (transmit and receive
/// antennas aligned), interferers with `g_r`. Distances enter the path loss in
/// metres, so `p` is the power received at 1 m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    /// W
    pub p: f64,
    pub g: f64,
    pub g_r: f64,
    pub alpha: f64,
    /// Nakagami shape; 1 is Rayleigh.
    pub m: u32,
    /// W
    pub noise_power: f64,
    pub with_noise: bool,
}

impl Default for LinkBudget {
    /// p = 30 dBW, g = 20 dB, g_r = 0 dB, alpha = 2, Rayleigh fading, and
    /// kTB for T = 290 K over 30 MHz; noise off.
    fn default() -> Self {
        Self {
            p: crate::db_to_linear(30.0),
            g: crate::db_to_linear(20.0),
            g_r: 1.0,
            alpha: 2.0,
            m: 1,
            noise_power: thermal_noise_power(290.0, 30e6),
            with_noise: false,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("g", self.g), ("g_r", self.g_r), ("alpha", self.alpha)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.m == 0 {
            return Err(Error::invalid("Nakagami shape m must be at least 1"));
        }
        if !(self.noise_power.is_finite() && self.noise_power >= 0.0) {
            return Err(Error::invalid("noise power must be finite and >= 0"));
        }
        Ok(())
    }

    /// `p * g` in dBW.
    pub fn eirp_dbw(&self) -> f64 {
        crate::linear_to_db(self.p * self.g)
    }

    pub fn with_m(self, m: u32) -> Self {
        Self { m, ..self }
    }

    pub fn with_gain_db(self, g_db: f64) -> Self {
        Self { g: crate::db_to_linear(g_db), ..self }
    }

    /// Interferer-to-serving gain ratio `g_r / g`.
    pub(crate) fn interferer_ratio(&self) -> f64 {
        self.g_r / self.g
    }

    /// Noise power that actually enters the SINR.
    pub fn effective_noise(&self) -> f64 {
        if self.with_noise {
            self.noise_power
        } else {
            0.0
        }
    }
}

/// `kTB` in W.
pub fn thermal_noise_power(temperature_k: f64, bandwidth_hz: f64) -> f64 {
    crate::db_to_linear(BOLTZMANN_DBW + crate::linear_to_db(temperature_k) + crate::linear_to_db(bandwidth_hz))
}

/// Coverage probability against SINR threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCurve {
    /// Linear thresholds.
    pub thresholds: Vec<f64>,
    pub values: Vec<f64>,
    /// Confidence bounds per threshold, for empirical curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<Vec<(f64, f64)>>,
}

impl CoverageCurve {
    /// Threshold (linear) at which the curve crosses `level`, by linear
    /// interpolation in dB; `None` if the curve never crosses it.
    pub fn threshold_at(&self, level: f64) -> Option<f64> {
        let db: Vec<f64> = self.thresholds.iter().map(|&t| crate::linear_to_db(t)).collect();
        for i in 1..self.values.len() {
            let (v0, v1) = (self.values[i - 1], self.values[i]);
            if (v0 - level) * (v1 - level) <= 0.0 && v0 != v1 {
                let f = (v0 - level) / (v0 - v1);
                return Some(crate::db_to_linear(db[i - 1] + f * (db[i] - db[i - 1])));
            }
        }
        None
    }
}

/// Mean number of satellites in the whole constellation.
pub fn mean_total(p: CoxParams) -> f64 {
    p.lambda * p.mu
}

/// Mean number of satellites above the typical user's horizon.
pub fn mean_visible(p: CoxParams, g: &GeometryParams, spec: &QuadratureSpec) -> Result<f64> {
    Ok(p.lambda * p.mu * visible_fraction(g, spec)?)
}

/// `(1/pi) int_0^phibar cos(v) asin(sqrt(1 - cos^2(phibar) sec^2(v))) dv`,
/// the fraction of all satellites that are visible on average.
pub fn visible_fraction(g: &GeometryParams, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    let xi = g.phi_bar();
    let v = integrate(|t| rim_weight(xi, t) * rim_colat(xi, t).cos() * rim_half_angle(xi, t), 0.0, 1.0, spec)?;
    Ok(v / std::f64::consts::PI)
}

/// Mean number of orbits with at least one visible satellite:
/// `lambda int_0^phibar cos(v) (1 - exp(-(mu/pi) w2(v))) dv`, which is
/// `-ln P(no satellite)`.
pub fn mean_visible_orbits(p: CoxParams, g: &GeometryParams, spec: &QuadratureSpec) -> Result<f64> {
    Ok(p.lambda * occupied_orbit_fraction(p.mu, g.phi_bar(), spec)?)
}

/// Mean number of orbits crossing the visibility cap, whether or not they
/// carry a visible satellite: `lambda sin(phibar)`.
pub fn mean_crossing_orbits(lambda: f64, g: &GeometryParams) -> f64 {
    lambda * g.phi_bar().sin()
}

/// Probability that no satellite is visible.
pub fn nosat_probability(p: CoxParams, g: &GeometryParams, spec: &QuadratureSpec) -> Result<f64> {
    void_probability(g.phi_bar(), p, spec)
}

/// Large-`mu` limit of [`nosat_probability`]: `exp(-lambda sin(phibar))`.
pub fn nosat_asymptotic(lambda: f64, g: &GeometryParams) -> f64 {
    (-lambda * g.phi_bar().sin()).exp()
}

/// `P(D > d)` for the distance `D` to the nearest visible satellite
/// (`D = inf` when none is visible).
pub fn nearest_ccdf(d: f64, p: CoxParams, g: &GeometryParams, spec: &QuadratureSpec) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::Domain { name: "d", value: d, lo: 0.0, hi: f64::INFINITY });
    }
    if d < g.d_min() {
        return Ok(1.0);
    }
    let xi = if d >= g.d_max() { g.phi_bar() } else { cap_angle_unchecked(d, g) };
    void_probability(xi, p, spec)
}

/// Probability that the cap of polar angle `xi` around the typical user holds
/// no satellite.
fn void_probability(xi: f64, p: CoxParams, spec: &QuadratureSpec) -> Result<f64> {
    p.validate()?;
    spec.validate()?;
    if p.lambda == 0.0 || p.mu == 0.0 || xi <= 0.0 {
        return Ok(1.0);
    }
    let inner = occupied_orbit_fraction(p.mu, xi, &spec.tightened(p.lambda.max(1.0)))?;
    Ok((-p.lambda * inner).exp())
}

/// `int_0^xi cos(v) (1 - exp(-(mu/pi) w(v))) dv`, `w` the half-angle of the
/// arc an orbit of co-latitude `v` cuts from the cap of polar angle `xi`.
fn occupied_orbit_fraction(mu: f64, xi: f64, spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if mu == 0.0 || xi <= 0.0 {
        return Ok(0.0);
    }
    let mu_pi = mu / std::f64::consts::PI;
    integrate(
        |t| {
            let v = rim_colat(xi, t);
            rim_weight(xi, t) * v.cos() * -(-mu_pi * rim_half_angle(xi, t)).exp_m1()
        },
        0.0,
        1.0,
        spec,
    )
}

// Helpers for integrals over a co-latitude `v` in `[0, xi]`, written in
// `t in [0, 1]` with `v = xi (1 - t^2)`.

/// `v(t)`.
#[inline]
pub(crate) fn rim_colat(xi: f64, t: f64) -> f64 {
    xi * (1.0 - t * t)
}

/// `dv/dt`.
#[inline]
pub(crate) fn rim_weight(xi: f64, t: f64) -> f64 {
    2.0 * xi * t
}

/// `sin(xi t^2) / t^2`, continuous at `t = 0`.
#[inline]
fn sinc_gap(xi: f64, t: f64) -> f64 {
    let u = t * t;
    if u == 0.0 {
        xi
    } else {
        (xi * u).sin() / u
    }
}

/// `sqrt(1 - cos^2(xi) sec^2(v(t)))` without cancellation near the rim.
#[inline]
pub(crate) fn rim_arc_sine(xi: f64, t: f64) -> f64 {
    let v = rim_colat(xi, t);
    (t * (sinc_gap(xi, t) * (xi + v).sin()).max(0.0).sqrt() / v.cos()).min(1.0)
}

/// Orbit/cap half-angle at co-latitude `v(t)`.
#[inline]
pub(crate) fn rim_half_angle(xi: f64, t: f64) -> f64 {
    rim_arc_sine(xi, t).asin()
}

/// `(dv/dt) / sqrt(1 - cos^2(xi) sec^2(v(t)))`, bounded as `t -> 0`.
#[inline]
pub(crate) fn rim_serving_weight(xi: f64, t: f64) -> f64 {
    let v = rim_colat(xi, t);
    let r = (sinc_gap(xi, t) * (xi + v).sin()).max(0.0).sqrt();
    if r == 0.0 {
        return 0.0;
    }
    2.0 * xi * v.cos() / r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{orbit_cap_half_angle_colat, GeometryParams};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn mean_total_values() {
        assert_eq!(mean_total(CoxParams::new(0.0, 7.0).unwrap()), 0.0);
        assert_eq!(mean_total(CoxParams::new(30.0, 40.0).unwrap()), 1200.0);
        assert_eq!(mean_total(CoxParams::new(28.0, 120.0).unwrap()), 3360.0);
    }

    #[test]
    fn visible_fraction_equals_cap_area() {
        // An isotropic pattern puts the cap's area share of all satellites
        // in the cap: (1 - r_e / r_s) / 2.
        for (re, ra) in [(6400.0, 550.0), (6371.0, 525.0), (6371.0, 1100.0), (6400.0, 20000.0), (6400.0, 1.0)] {
            let g = GeometryParams::new(re, ra).unwrap();
            let f = visible_fraction(&g, &QuadratureSpec { abs_tol: 1e-13, rel_tol: 1e-11, max_depth: 40 }).unwrap();
            assert_relative_eq!(f, g.cap_area_fraction(), max_relative = 1e-9);
        }
    }

    #[test]
    fn remark_mean_visible() {
        let g = GeometryParams::from_orbit_radius(6400.0, 6950.0).unwrap();
        let v = mean_visible(CoxParams::new(30.0, 30.0).unwrap(), &g, &spec()).unwrap();
        assert!((v - 35.0).abs() < 1.0, "{v}");
    }

    #[test]
    fn nosat_limits() {
        let g = GeometryParams::table1();
        assert_eq!(nosat_probability(CoxParams::new(0.0, 10.0).unwrap(), &g, &spec()).unwrap(), 1.0);
        assert_eq!(nosat_asymptotic(0.0, &g), 1.0);
        // Large mu: every orbit crossing the visibility cap carries a satellite there.
        let p = nosat_probability(CoxParams::new(5.0, 1e5).unwrap(), &g, &spec()).unwrap();
        assert_relative_eq!(p, nosat_asymptotic(5.0, &g), max_relative = 1e-3);
        // Single-orbit oracle: with lambda small, 1 - P ~ lambda * P(an orbit
        // crossing the cap is occupied), integrated by a different rule.
        let (lambda, mu) = (1e-6, 3.0);
        let direct = integrate(
            |c: f64| c.cos() * -(-mu / std::f64::consts::PI * orbit_cap_half_angle_colat(g.phi_bar(), c)).exp_m1(),
            0.0,
            g.phi_bar(),
            &QuadratureSpec { abs_tol: 1e-12, rel_tol: 1e-9, max_depth: 60 },
        )
        .unwrap();
        let p = nosat_probability(CoxParams::new(lambda, mu).unwrap(), &g, &spec()).unwrap();
        assert_relative_eq!((1.0 - p) / lambda, direct, max_relative = 1e-5);
    }

    #[test]
    fn nearest_ccdf_joins() {
        let g = GeometryParams::table1();
        let p = CoxParams::new(10.0, 10.0).unwrap();
        assert_eq!(nearest_ccdf(0.0, p, &g, &spec()).unwrap(), 1.0);
        assert_eq!(nearest_ccdf(g.d_min() - 1e-6, p, &g, &spec()).unwrap(), 1.0);
        assert_relative_eq!(nearest_ccdf(g.d_min(), p, &g, &spec()).unwrap(), 1.0, max_relative = 1e-12);
        let ns = nosat_probability(p, &g, &spec()).unwrap();
        assert_eq!(nearest_ccdf(g.d_max(), p, &g, &spec()).unwrap(), ns);
        assert_eq!(nearest_ccdf(g.d_max() * 3.0, p, &g, &spec()).unwrap(), ns);
        let below = nearest_ccdf(g.d_max() * (1.0 - 1e-12), p, &g, &spec()).unwrap();
        assert_relative_eq!(below, ns, max_relative = 1e-6);
        assert!(nearest_ccdf(-1.0, p, &g, &spec()).is_err());
    }

    #[test]
    fn rim_helpers_match_direct_forms() {
        for (xi, t) in [(0.3, 0.5), (0.4, 0.9), (0.1, 0.2), (0.39, 0.01)] {
            let v = rim_colat(xi, t);
            assert_relative_eq!(rim_half_angle(xi, t), orbit_cap_half_angle_colat(xi, v), max_relative = 1e-9);
            let direct = rim_weight(xi, t) / (1.0 - xi.cos().powi(2) / v.cos().powi(2)).sqrt();
            assert_relative_eq!(rim_serving_weight(xi, t), direct, max_relative = 1e-6);
        }
        assert!(rim_serving_weight(0.3, 0.0).is_finite());
    }

    proptest! {
        #[test]
        fn nosat_decreasing(l in 1.0f64..60.0, m in 1.0f64..60.0, dl in 0.5f64..5.0) {
            let g = GeometryParams::table1();
            let a = nosat_probability(CoxParams::new(l, m).unwrap(), &g, &spec()).unwrap();
            let b = nosat_probability(CoxParams::new(l + dl, m).unwrap(), &g, &spec()).unwrap();
            let c = nosat_probability(CoxParams::new(l, m + dl).unwrap(), &g, &spec()).unwrap();
            prop_assert!(a > 0.0 && a <= 1.0);
            prop_assert!(b < a && c < a);
        }

        #[test]
        fn ccdf_monotone(d1 in 500.0f64..3000.0, d2 in 500.0f64..3000.0) {
            let g = GeometryParams::table1();
            let p = CoxParams::new(20.0, 15.0).unwrap();
            let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            let a = nearest_ccdf(lo, p, &g, &spec()).unwrap();
            let b = nearest_ccdf(hi, p, &g, &spec()).unwrap();
            prop_assert!(b <= a + 1e-12);
        }

        #[test]
        fn visible_fraction_scale_free(l in 0.5f64..100.0, m in 0.5f64..100.0) {
            let g = GeometryParams::table1();
            let v = mean_visible(CoxParams::new(l, m).unwrap(), &g, &spec()).unwrap();
            prop_assert!((v / (l * m) - visible_fraction(&g, &spec()).unwrap()).abs() < 1e-12);
        }
    }
}
