//! SIR coverage under Nakagami-m fading: exact conditional Laplace-transform
//! derivatives, Monte Carlo over the orbit set.
//!
//! Given the orbits, the serving orbit and the serving distance `z`,
//!
//! ```text
//! P(cover | .) = sum_{k<m} (-s)^k / k! d^k/ds^k exp(G(s))
//!              = exp(G) sum_{k<m} B_k(y_1, ..., y_k) / k!
//! ```
//!
//! with `y_j = (mu/pi) sum_orbits int (m)_j x^j (1 + x)^(-m-j) dw >= 0` and
//! `G = -(mu/pi) sum_orbits int 1 - (1 + x)^(-m) dw`, where
//! `x = tau (g_r/g) (z/K)^alpha`. Both split into a serving-orbit part and a
//! part from the other orbits; the binomial identity
//! `B_n(a + b) = sum_k C(n, k) B_k(a) B_{n-k}(b)` lets the serving-orbit part
//! be integrated once, while the other orbits are sampled.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bell::bell_polynomials;
use super::coverage::Interference;
use super::{rim_colat, rim_half_angle, rim_serving_weight, LinkBudget};
use crate::constellation::CoxParams;
use crate::error::{Error, Result};
use crate::geometry::{distance_of_cap_angle, orbit_cap_half_angle_colat, GeometryParams};
use crate::montecarlo::EstimateWithCI;
use crate::quadrature::{gauss_legendre, integrate, QuadratureSpec};
use crate::rng::{self, StreamTag};

/// Sampling controls for [`coverage_nakagami`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NakagamiPlan {
    /// Number of sampled orbit sets; at least 100.
    pub n_orbit_samples: u32,
    pub seed: u64,
    /// Panels of the cap-angle grid (8 Gauss–Legendre nodes each).
    pub xi_panels: usize,
    pub ci_level: f64,
}

impl Default for NakagamiPlan {
    fn default() -> Self {
        Self { n_orbit_samples: 2000, seed: 1, xi_panels: 48, ci_level: 0.95 }
    }
}

const XI_NODES: usize = 8;
const OMEGA_NODES: usize = 24;

/// Fixed Gauss–Legendre rule used for the per-orbit angle integrals, so the
/// moments are smooth functions of every parameter.
struct OmegaRule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl OmegaRule {
    fn new() -> Self {
        let (x, w) = gauss_legendre(OMEGA_NODES);
        Self { x, w }
    }
}

/// `G` and `y_1..y_{m-1}` contributed by one orbit with interferers on
/// `[a, b]`.
struct OrbitTerms {
    m: u32,
    mu_pi: f64,
    /// Rising factorials `(m)_j`, `j = 0..=orders`.
    rising: Vec<f64>,
}

impl OrbitTerms {
    /// Terms for moments `y_1..y_orders`.
    fn new(m: u32, mu: f64, orders: usize) -> Self {
        let mut rising = vec![1.0; orders + 1];
        for j in 1..=orders {
            rising[j] = rising[j - 1] * (m as f64 + j as f64 - 1.0);
        }
        Self { m, mu_pi: mu / PI, rising }
    }

    /// Adds this orbit's `G` to `g` and `y_j` to `y[j - 1]`.
    fn accumulate(&self, k: &Interference, rule: &OmegaRule, cos_colat: f64, a: f64, b: f64, g: &mut f64, y: &mut [f64]) {
        if b <= a || k.scale == 0.0 {
            return;
        }
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mf = self.m as f64;
        for (xn, wn) in rule.x.iter().zip(&rule.w) {
            let x = k.x(cos_colat, mid + half * xn);
            let inv = 1.0 / (1.0 + x);
            let w = wn * half * self.mu_pi;
            // 1 - (1 + x)^-m without cancellation for small x.
            *g += w * (-mf * x.ln_1p()).exp_m1();
            let mut term = inv.powi(self.m as i32);
            for (j, yj) in y.iter_mut().enumerate() {
                term *= x * inv;
                *yj += w * self.rising[j + 1] * term;
            }
        }
    }
}

/// `sum_{n<m} sum_{k<=n} a[k] c[n-k]`: the Cauchy product truncated at `m`.
fn truncated_product(a: &[f64], c: &[f64]) -> f64 {
    let m = a.len();
    let mut s = 0.0;
    for n in 0..m {
        for k in 0..=n {
            s += a[k] * c[n - k];
        }
    }
    s
}

/// SIR coverage under Nakagami-m fading with integer `m >= 1`.
///
/// The expectation over the orbit set is estimated from
/// `plan.n_orbit_samples` independent draws; everything conditional on the
/// orbit set is integrated. The result carries a normal-approximation
/// confidence interval.
pub fn coverage_nakagami(
    tau: f64,
    p: CoxParams,
    g: &GeometryParams,
    lb: &LinkBudget,
    plan: &NakagamiPlan,
    spec: &QuadratureSpec,
) -> Result<EstimateWithCI> {
    p.validate()?;
    lb.validate()?;
    spec.validate()?;
    if plan.n_orbit_samples < 100 {
        return Err(Error::invalid(format!("n_orbit_samples must be at least 100, got {}", plan.n_orbit_samples)));
    }
    if plan.xi_panels == 0 {
        return Err(Error::invalid("xi_panels must be at least 1"));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::Domain { name: "tau", value: tau, lo: 0.0, hi: f64::INFINITY });
    }
    let n = plan.n_orbit_samples as usize;
    if p.lambda == 0.0 || p.mu == 0.0 {
        return Ok(EstimateWithCI::from_samples(&vec![0.0; n], plan.ci_level));
    }

    let m = lb.m as usize;
    let phi_bar = g.phi_bar();
    let mu_pi = p.mu / PI;
    let terms = OrbitTerms::new(lb.m, p.mu, m - 1);
    let rule = OmegaRule::new();

    // Cap-angle grid.
    let (gx, gw) = gauss_legendre(XI_NODES);
    let h = phi_bar / plan.xi_panels as f64;
    let mut grid = Vec::with_capacity(plan.xi_panels * XI_NODES);
    for panel in 0..plan.xi_panels {
        let c = h * (panel as f64 + 0.5);
        for (x, w) in gx.iter().zip(&gw) {
            grid.push((c + 0.5 * h * x, 0.5 * h * w));
        }
    }

    // Serving-orbit factors A_k(xi), k < m, independent of the orbit set.
    let inner = spec.tightened(10.0);
    let serving: Vec<(Interference, Vec<f64>)> = grid
        .par_iter()
        .map(|&(xi, _)| {
            let k = Interference::new(tau, distance_of_cap_angle(xi, g), g, lb);
            let a = (0..m)
                .map(|order| {
                    integrate(
                        |t| {
                            let v = rim_colat(xi, t);
                            let w1 = rim_half_angle(xi, t);
                            let w2 = orbit_cap_half_angle_colat(phi_bar, v);
                            let mut gsum = -mu_pi * w1;
                            let mut y = vec![0.0; m - 1];
                            terms.accumulate(&k, &rule, v.cos(), w1, w2, &mut gsum, &mut y);
                            let b = bell_polynomials(&y[..order]);
                            rim_serving_weight(xi, t) * gsum.exp() * b[order] / factorial(order)
                        },
                        0.0,
                        1.0,
                        &inner,
                    )
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((k, a))
        })
        .collect::<Result<_>>()?;

    let mean_orbits = p.lambda * phi_bar.sin();
    let prefactor = p.lambda * mu_pi;
    let samples: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(plan.seed, i as u64, StreamTag::OrbitSet);
            let count = if mean_orbits > 0.0 {
                Poisson::new(mean_orbits).expect("positive Poisson mean").sample(&mut rng) as usize
            } else {
                0
            };
            let colats: Vec<(f64, f64)> = (0..count)
                .map(|_| {
                    let u: f64 = rng.random();
                    let c = (u * phi_bar.sin()).asin();
                    (c, c.cos())
                })
                .collect();
            let mut total = 0.0;
            let mut y = vec![0.0; m - 1];
            for (&(xi, weight), (k, a)) in grid.iter().zip(&serving) {
                let mut gsum = 0.0;
                y.iter_mut().for_each(|v| *v = 0.0);
                for &(c, cc) in &colats {
                    let w2 = orbit_cap_half_angle_colat(phi_bar, c);
                    let w1 = if c < xi {
                        let w1 = orbit_cap_half_angle_colat(xi, c);
                        gsum -= mu_pi * w1;
                        w1
                    } else {
                        0.0
                    };
                    terms.accumulate(k, &rule, cc, w1, w2, &mut gsum, &mut y);
                }
                let b: Vec<f64> = bell_polynomials(&y)
                    .into_iter()
                    .enumerate()
                    .map(|(j, v)| v / factorial(j))
                    .collect();
                total += weight * xi.sin() * gsum.exp() * truncated_product(a, &b);
            }
            prefactor * total
        })
        .collect();
    Ok(EstimateWithCI::from_samples(&samples, plan.ci_level))
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::bell::complete_bell;
    use approx::assert_relative_eq;

    /// Finite-difference weights for the `k`-th derivative at 0 on the
    /// given offsets.
    fn fornberg(offsets: &[f64], k: usize) -> Vec<f64> {
        let n = offsets.len();
        let mut c = vec![vec![vec![0.0; n]; n]; k + 1];
        c[0][0][0] = 1.0;
        let mut c1 = 1.0;
        for i in 1..n {
            let mut c2 = 1.0;
            for j in 0..i {
                let c3 = offsets[i] - offsets[j];
                c2 *= c3;
                for d in 0..=k.min(i) {
                    let prev_ij = if i >= 1 { c[d][i - 1][j] } else { 0.0 };
                    let prev_d = if d >= 1 { c[d - 1][i - 1][j] } else { 0.0 };
                    c[d][i][j] = (offsets[i] * prev_ij - d as f64 * prev_d) / c3;
                }
            }
            for d in 0..=k.min(i) {
                let prev_d = if d >= 1 { c[d - 1][i - 1][i - 1] } else { 0.0 };
                let prev = c[d][i - 1][i - 1];
                c[d][i][i] = c1 / c2 * (d as f64 * prev_d - offsets[i - 1] * prev);
            }
            c1 = c2;
        }
        (0..n).map(|j| c[k][n - 1][j]).collect()
    }

    #[test]
    fn fornberg_reproduces_polynomial_derivatives() {
        let offs: Vec<f64> = (-3..=3).map(|i| i as f64 * 0.1).collect();
        let w = fornberg(&offs, 2);
        let d2: f64 = offs.iter().zip(&w).map(|(x, w)| w * (1.0 + x).powi(4)).sum();
        assert_relative_eq!(d2, 12.0, max_relative = 1e-9);
    }

    /// `G(tau)` and `y_1..y_4` for a fixed set of orbits.
    fn laplace_terms(tau: f64, m: u32) -> (f64, Vec<f64>) {
        let g = GeometryParams::table1();
        let lb = LinkBudget::default().with_m(m);
        let xi = 0.2;
        let k = Interference::new(tau, distance_of_cap_angle(xi, &g), &g, &lb);
        let terms = OrbitTerms::new(m, 150.0, 4);
        let rule = OmegaRule::new();
        let mut gsum = 0.0;
        let mut y = vec![0.0; 4];
        let bar = g.phi_bar();
        for c in [0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35] {
            let w1 = if c < xi { orbit_cap_half_angle_colat(xi, c) } else { 0.0 };
            terms.accumulate(&k, &rule, c.cos(), w1, orbit_cap_half_angle_colat(bar, c), &mut gsum, &mut y);
        }
        (gsum, y)
    }

    #[test]
    fn derivative_terms_match_finite_differences() {
        // y_j = (-tau)^j d^j G / d tau^j, and the j-th derivative of
        // exp(G) is exp(G) B_j(G', ..., G^(j)).
        for m in 1..=4u32 {
            let tau = 0.8;
            let (g0, y) = laplace_terms(tau, m);
            let h = 0.15 * tau;
            let offs: Vec<f64> = (-5..=5).map(|i| i as f64 * h).collect();
            let gs: Vec<f64> = offs.iter().map(|o| laplace_terms(tau + o, m).0).collect();
            let es: Vec<f64> = gs.iter().map(|v| v.exp()).collect();
            for order in 1..=4usize {
                let w = fornberg(&offs, order);
                let scale = (-tau).powi(order as i32);
                let fd_g: f64 = w.iter().zip(&gs).map(|(w, v)| w * v).sum();
                assert_relative_eq!(fd_g, y[order - 1] / scale, max_relative = 1e-5);
                let fd_e: f64 = w.iter().zip(&es).map(|(w, v)| w * v).sum();
                let derivs: Vec<f64> = (0..order).map(|j| y[j] / (-tau).powi(j as i32 + 1)).collect();
                let via_bell = g0.exp() * complete_bell(&derivs);
                assert_relative_eq!(fd_e, via_bell, max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn rejects_small_sample_counts() {
        let g = GeometryParams::table1();
        let plan = NakagamiPlan { n_orbit_samples: 99, ..NakagamiPlan::default() };
        let r = coverage_nakagami(1.0, CoxParams::new(5.0, 5.0).unwrap(), &g, &LinkBudget::default(), &plan, &QuadratureSpec::default());
        assert!(r.is_err());
    }

    #[test]
    fn omega_rule_matches_adaptive() {
        let g = GeometryParams::table1();
        let lb = LinkBudget::default().with_m(3);
        let k = Interference::new(5.0, 700.0, &g, &lb);
        let terms = OrbitTerms::new(3, 10.0, 2);
        let rule = OmegaRule::new();
        let (c, a, b) = (0.2f64, 0.1, orbit_cap_half_angle_colat(g.phi_bar(), 0.2));
        let mut gs = 0.0;
        let mut y = vec![0.0; 2];
        terms.accumulate(&k, &rule, c.cos(), a, b, &mut gs, &mut y);
        let spec = QuadratureSpec { abs_tol: 1e-14, rel_tol: 1e-12, max_depth: 40 };
        let gd = -10.0 / PI * integrate(|w| 1.0 - (1.0 + k.x(c.cos(), w)).powi(-3), a, b, &spec).unwrap();
        let y2 = 10.0 / PI * integrate(|w| { let x = k.x(c.cos(), w); 12.0 * x * x * (1.0 + x).powi(-5) }, a, b, &spec).unwrap();
        assert_relative_eq!(gs, gd, max_relative = 1e-10);
        assert_relative_eq!(y[1], y2, max_relative = 1e-10);
    }
}
