//! Rayleigh-fading SIR coverage, its noise-scaled variants and the ergodic
//! rate.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rim_colat, rim_half_angle, rim_serving_weight, rim_weight, CoverageCurve, LinkBudget};
use crate::constellation::CoxParams;
use crate::error::{Error, Result};
use crate::geometry::{distance_of_cap_angle, orbit_cap_half_angle_colat, GeometryParams};
use crate::quadrature::{integrate, try_integrate, QuadratureSpec};

/// Largest spectral efficiency (bits/s/Hz) the rate integral runs to.
///
/// With a single visible satellite the SIR is infinite, so the coverage
/// curve has an atom at infinity and the plain rate integral diverges. Rates
/// are therefore `E[min(log2(1 + SINR), RATE_CAP_BITS)]`, analytic and
/// simulated alike.
pub const RATE_CAP_BITS: f64 = 40.0;

/// Interference kernel seen at serving distance `z`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Interference {
    pub re: f64,
    pub rs: f64,
    pub z2: f64,
    /// `tau * g_r / g`
    pub scale: f64,
    pub half_alpha: f64,
}

impl Interference {
    pub fn new(tau: f64, z: f64, g: &GeometryParams, lb: &LinkBudget) -> Self {
        Self {
            re: g.r_e(),
            rs: g.r_s(),
            z2: z * z,
            scale: tau * lb.interferer_ratio(),
            half_alpha: lb.alpha / 2.0,
        }
    }

    /// `x = tau (g_r / g) (z / K)^alpha` for an interferer at angle `w` from
    /// the apex of an orbit of co-latitude `colat` (with precomputed cosine).
    #[inline]
    pub fn x(&self, cos_colat: f64, w: f64) -> f64 {
        let k2 = self.rs * self.rs + self.re * self.re - 2.0 * self.rs * self.re * w.cos() * cos_colat;
        let r = self.z2 / k2;
        let p = if self.half_alpha == 1.0 { r } else { r.powf(self.half_alpha) };
        self.scale * p
    }

    /// `int_a^b (1 - 1 / (1 + x)) dw` for one orbit.
    fn rayleigh_load(&self, cos_colat: f64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
        if b <= a || self.scale == 0.0 {
            return Ok(0.0);
        }
        integrate(
            |w| {
                let x = self.x(cos_colat, w);
                x / (1.0 + x)
            },
            a,
            b,
            spec,
        )
    }
}

fn check_inputs(tau: f64, p: CoxParams, lb: &LinkBudget, spec: &QuadratureSpec) -> Result<()> {
    p.validate()?;
    lb.validate()?;
    spec.validate()?;
    if lb.m != 1 {
        return Err(Error::Contract(format!(
            "the Rayleigh evaluator needs m = 1 (got m = {}); use coverage_nakagami",
            lb.m
        )));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::Domain { name: "tau", value: tau, lo: 0.0, hi: f64::INFINITY });
    }
    Ok(())
}

/// SIR coverage `P(SIR > tau)` under Rayleigh fading.
pub fn coverage_rayleigh(
    tau: f64,
    p: CoxParams,
    g: &GeometryParams,
    lb: &LinkBudget,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_inputs(tau, p, lb, spec)?;
    coverage_integral(tau, p, g, lb, spec, None)
}

/// `exp(-N tau / (p g))`, the factor by which thermal noise scales the SIR
/// coverage in [`coverage_with_noise`].
pub fn noise_scaling(tau: f64, lb: &LinkBudget) -> f64 {
    (-lb.effective_noise() * tau / (lb.p * lb.g)).exp()
}

/// SIR coverage scaled by [`noise_scaling`].
pub fn coverage_with_noise(
    tau: f64,
    p: CoxParams,
    g: &GeometryParams,
    lb: &LinkBudget,
    spec: &QuadratureSpec,
) -> Result<f64> {
    Ok(noise_scaling(tau, lb) * coverage_rayleigh(tau, p, g, lb, spec)?)
}

/// SINR coverage with the noise term `exp(-N tau z^alpha / (p g))` kept
/// inside the distance integral (`z` in metres), i.e. without dropping the
/// serving path loss from the noise exponent.
pub fn coverage_sinr(
    tau: f64,
    p: CoxParams,
    g: &GeometryParams,
    lb: &LinkBudget,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_inputs(tau, p, lb, spec)?;
    let noise = lb.effective_noise() * tau / (lb.p * lb.g);
    coverage_integral(tau, p, g, lb, spec, Some(noise))
}

fn coverage_integral(
    tau: f64,
    p: CoxParams,
    g: &GeometryParams,
    lb: &LinkBudget,
    spec: &QuadratureSpec,
    noise: Option<f64>,
) -> Result<f64> {
    if p.lambda == 0.0 || p.mu == 0.0 {
        return Ok(0.0);
    }
    let phi_bar = g.phi_bar();
    let mu_pi = p.mu / PI;
    let mid = spec.tightened(10.0);
    let inner = spec.tightened(100.0);
    let alpha = lb.alpha;

    let integrand = |xi: f64| -> Result<f64> {
        if xi <= 0.0 {
            return Ok(0.0);
        }
        let z = distance_of_cap_angle(xi, g);
        let k = Interference::new(tau, z, g, lb);

        // Orbits missing the cap C_z but visible: interferers on [0, w2].
        let far = if xi < phi_bar {
            let span = phi_bar - xi;
            try_integrate(
                |t| {
                    let nu = phi_bar - span * t * t;
                    let w2 = orbit_cap_half_angle_colat(phi_bar, nu);
                    let cn = nu.cos();
                    let load = k.rayleigh_load(cn, 0.0, w2, &inner)?;
                    Ok(2.0 * span * t * cn * -(-mu_pi * load).exp_m1())
                },
                0.0,
                1.0,
                &mid,
            )?
        } else {
            0.0
        };

        // exp(-(mu/pi)(w1 + load on [w1, w2])) for an orbit crossing C_z.
        let crossing = |t: f64| -> Result<f64> {
            let v = rim_colat(xi, t);
            let w1 = rim_half_angle(xi, t);
            let w2 = orbit_cap_half_angle_colat(phi_bar, v);
            let load = k.rayleigh_load(v.cos(), w1, w2, &inner)?;
            Ok((-mu_pi * (w1 + load)).exp())
        };

        // Orbits crossing C_z: empty inside it, interferers beyond.
        let near = try_integrate(
            |t| Ok(rim_weight(xi, t) * rim_colat(xi, t).cos() * (1.0 - crossing(t)?)),
            0.0,
            1.0,
            &mid,
        )?;
        // Serving orbit: one satellite exactly at distance z.
        let serving = try_integrate(|t| Ok(rim_serving_weight(xi, t) * crossing(t)?), 0.0, 1.0, &mid)?;

        let mut value = xi.sin() * (-p.lambda * (far + near)).exp() * serving;
        if let Some(n) = noise {
            value *= (-n * (z * 1e3).powf(alpha)).exp();
        }
        Ok(value)
    };

    let v = try_integrate(integrand, 0.0, phi_bar, spec)?;
    Ok((p.lambda * mu_pi * v).clamp(0.0, 1.0))
}

/// Coverage on a grid of linear thresholds, evaluated in parallel. Uses the
/// noise-scaled form when `lb.with_noise` is set.
pub fn coverage_curve(
    thresholds: &[f64],
    p: CoxParams,
    g: &GeometryParams,
    lb: &LinkBudget,
    spec: &QuadratureSpec,
) -> Result<CoverageCurve> {
    if thresholds.is_empty() {
        return Err(Error::invalid("threshold grid is empty"));
    }
    let values = thresholds
        .par_iter()
        .map(|&tau| coverage_with_noise(tau, p, g, lb, spec))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoverageCurve { thresholds: thresholds.to_vec(), values, intervals: None })
}

/// Result of the rate integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// bits/s/Hz
    pub value: f64,
    /// Upper end `U` of the integral over `u`, at most [`RATE_CAP_BITS`].
    pub truncated_at: f64,
    /// Coverage at `tau = 2^U - 1`; bounds the integrand beyond `U`.
    pub tail_integrand: f64,
}

/// Ergodic rate `int_0^U P(SINR > 2^u - 1) du` of the Cox model under
/// Rayleigh fading. With noise, the integrand is [`coverage_sinr`].
pub fn ergodic_rate(p: CoxParams, g: &GeometryParams, lb: &LinkBudget, spec: &QuadratureSpec) -> Result<RateEstimate> {
    check_inputs(0.0, p, lb, spec)?;
    if lb.with_noise {
        // The rate integrand reaches thresholds where the serving path loss
        // in the noise term decides the SINR, so keep it exact.
        ergodic_rate_from(|tau| coverage_sinr(tau, p, g, lb, spec), spec)
    } else {
        ergodic_rate_from(|tau| coverage_rayleigh(tau, p, g, lb, spec), spec)
    }
}

/// Rate integral of an arbitrary non-increasing coverage function of the
/// linear threshold.
///
/// `U` is the first of 1, 2, 4, ... (capped at [`RATE_CAP_BITS`]) where
/// the coverage falls below `spec.abs_tol`.
pub fn ergodic_rate_from<F>(coverage: F, spec: &QuadratureSpec) -> Result<RateEstimate>
where
    F: Fn(f64) -> Result<f64>,
{
    spec.validate()?;
    let at = |u: f64| coverage(u.exp2() - 1.0);
    let mut hi: f64 = 1.0;
    let mut tail = at(hi)?;
    while tail >= spec.abs_tol && hi < RATE_CAP_BITS {
        hi = (2.0 * hi).min(RATE_CAP_BITS);
        tail = at(hi)?;
    }
    // A step in the coverage needs deep bisection to resolve.
    let outer = QuadratureSpec { max_depth: spec.max_depth.max(60), ..*spec };
    let value = try_integrate(at, 0.0, hi, &outer)?;
    Ok(RateEstimate { value, truncated_at: hi, tail_integrand: tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::nosat_probability;
    use approx::assert_relative_eq;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn small_threshold_is_one_minus_nosat() {
        let g = GeometryParams::table1();
        let lb = LinkBudget::default();
        for (l, m) in [(5.0, 5.0), (10.0, 10.0), (30.0, 30.0)] {
            let p = CoxParams::new(l, m).unwrap();
            let c = coverage_rayleigh(0.0, p, &g, &lb, &spec()).unwrap();
            let ns = nosat_probability(p, &g, &spec()).unwrap();
            assert_relative_eq!(c, 1.0 - ns, max_relative = 1e-6);
            let c = coverage_rayleigh(1e-9, p, &g, &lb, &spec()).unwrap();
            assert!((c - (1.0 - ns)).abs() < 1e-6);
        }
    }

    #[test]
    fn contract_and_domain() {
        let g = GeometryParams::table1();
        let p = CoxParams::new(10.0, 10.0).unwrap();
        let lb = LinkBudget::default().with_m(2);
        assert!(matches!(coverage_rayleigh(1.0, p, &g, &lb, &spec()), Err(Error::Contract(_))));
        assert!(coverage_rayleigh(-1.0, p, &g, &LinkBudget::default(), &spec()).is_err());
        assert_eq!(coverage_rayleigh(1.0, CoxParams::new(0.0, 3.0).unwrap(), &g, &LinkBudget::default(), &spec()).unwrap(), 0.0);
    }

    #[test]
    fn noise_forms() {
        let g = GeometryParams::table1();
        let p = CoxParams::new(10.0, 10.0).unwrap();
        let quiet = LinkBudget { with_noise: true, noise_power: 0.0, ..LinkBudget::default() };
        let a = coverage_with_noise(1.0, p, &g, &quiet, &spec()).unwrap();
        let b = coverage_rayleigh(1.0, p, &g, &quiet, &spec()).unwrap();
        assert_eq!(a, b);
        let noisy = LinkBudget { with_noise: true, ..LinkBudget::default() };
        for tau in [1e-3, 1.0, 1e3] {
            let s = noise_scaling(tau, &noisy);
            assert!(s > 0.0 && s <= 1.0);
        }
        // The path-loss-aware form is never above the noiseless one.
        let loud = LinkBudget { with_noise: true, noise_power: 1e-7, ..LinkBudget::default() };
        let c = coverage_sinr(1.0, p, &g, &loud, &spec()).unwrap();
        assert!(c < b && c > 0.0);
    }

    #[test]
    fn rate_of_trivial_curves() {
        let s = spec();
        assert_eq!(ergodic_rate_from(|_| Ok(0.0), &s).unwrap().value, 0.0);
        for u in [0.7, 3.0, 11.5] {
            let r = ergodic_rate_from(|tau: f64| Ok(if (1.0 + tau).log2() <= u { 1.0 } else { 0.0 }), &s).unwrap();
            assert!((r.value - u).abs() < 1e-6, "{} vs {u}", r.value);
            assert!(r.tail_integrand < s.abs_tol);
        }
        let r = ergodic_rate_from(|_| Ok(1.0), &s).unwrap();
        assert_eq!(r.truncated_at, RATE_CAP_BITS);
        assert_relative_eq!(r.value, RATE_CAP_BITS, max_relative = 1e-12);
    }
}
