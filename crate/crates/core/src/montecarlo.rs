//! Direct simulation of constellation samples: visibility, nearest distance,
//! SINR and rate, with confidence intervals.
//!
//! Replicate `i` draws its constellation, observer longitude and fading from
//! streams keyed by `(master_seed, i)`, and per-replicate results are reduced
//! in index order, so output does not depend on the number of worker threads.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{CoverageCurve, LinkBudget, RATE_CAP_BITS};
use crate::constellation::{nearest_distance, visible_satellites, Constellation, ModelSpec, Observer};
use crate::error::{Error, Result};
use crate::geometry::GeometryParams;
use crate::rng::{self, StreamTag};
use crate::stats::normal_two_sided;

/// A Monte Carlo estimate with a confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateWithCI {
    pub value: f64,
    pub std_error: f64,
    /// Replicates.
    pub n: u64,
    pub ci_level: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl EstimateWithCI {
    /// Proportion `successes / n`: normal interval, or Wilson's when fewer
    /// than 30 successes or failures were seen.
    pub fn from_proportion(successes: u64, n: u64, ci_level: f64) -> Self {
        assert!(n >= 1, "a proportion needs at least one replicate");
        let nf = n as f64;
        let p = successes as f64 / nf;
        let se = (p * (1.0 - p) / nf).sqrt();
        let z = normal_two_sided(ci_level);
        let (lo, hi) = if successes < 30 || n - successes < 30 {
            let z2 = z * z;
            let denom = 1.0 + z2 / nf;
            let centre = (p + z2 / (2.0 * nf)) / denom;
            let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
            (centre - half, centre + half)
        } else {
            (p - z * se, p + z * se)
        };
        Self { value: p, std_error: se, n, ci_level, ci_low: lo.max(0.0), ci_high: hi.min(1.0) }
    }

    /// Sample mean with a normal-approximation interval.
    pub fn from_samples(xs: &[f64], ci_level: f64) -> Self {
        assert!(!xs.is_empty(), "a mean needs at least one replicate");
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        let se = (var / n).sqrt();
        let z = normal_two_sided(ci_level);
        Self { value: mean, std_error: se, n: xs.len() as u64, ci_level, ci_low: mean - z * se, ci_high: mean + z * se }
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    /// Whether `x` lies within `k` standard errors of the estimate.
    pub fn within_sigmas(&self, x: f64, k: f64) -> bool {
        (self.value - x).abs() <= k * self.std_error
    }
}

/// Everything a simulation run needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimPlan {
    pub model: ModelSpec,
    /// Orbit geometry; for shell models only `r_e` is used.
    pub geometry: GeometryParams,
    pub link: LinkBudget,
    /// dB, ascending.
    pub thresholds_db: Vec<f64>,
    pub replicates: u64,
    pub master_seed: u64,
    /// rad. Ignored for isotropic models, whose observer sits at the north
    /// point.
    pub observer_latitude: f64,
    pub ci_level: f64,
}

impl SimPlan {
    pub fn new(model: ModelSpec, geometry: GeometryParams) -> Self {
        Self {
            model,
            geometry,
            link: LinkBudget::default(),
            thresholds_db: Vec::new(),
            replicates: 10_000,
            master_seed: 1,
            observer_latitude: FRAC_PI_2,
            ci_level: 0.95,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.link.validate()?;
        if self.replicates == 0 {
            return Err(Error::invalid("replicates must be at least 1"));
        }
        if self.thresholds_db.iter().any(|t| !t.is_finite()) {
            return Err(Error::invalid("thresholds must be finite"));
        }
        if self.thresholds_db.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::invalid("thresholds must be sorted ascending"));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::invalid("ci_level must be in (0, 1)"));
        }
        Ok(())
    }

    /// Constellation and observer of replicate `i`.
    pub fn replicate(&self, i: u64) -> Result<(Constellation, Observer)> {
        let mut rng = rng::stream(self.master_seed, i, StreamTag::Constellation);
        let c = self.model.build(&self.geometry, &mut rng)?;
        let observer = if self.model.is_isotropic() {
            Observer::north_pole()
        } else {
            let lon = rng::stream(self.master_seed, i, StreamTag::Observer).random_range(0.0..2.0 * PI);
            Observer::new(self.observer_latitude, lon)
        };
        Ok((c, observer))
    }

    fn map_replicates<T, F>(&self, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64, &Constellation, &Observer) -> T + Sync,
    {
        self.validate()?;
        (0..self.replicates)
            .into_par_iter()
            .map(|i| {
                let (c, o) = self.replicate(i)?;
                Ok(f(i, &c, &o))
            })
            .collect()
    }
}

/// Fraction of replicates with no visible satellite.
pub fn run_nosat(plan: &SimPlan) -> Result<EstimateWithCI> {
    let empty = plan.map_replicates(|_, c, o| nearest_distance(c, o).is_none())?;
    let count = empty.iter().filter(|&&e| e).count() as u64;
    Ok(EstimateWithCI::from_proportion(count, plan.replicates, plan.ci_level))
}

/// Nearest visible distance per replicate, `inf` when none is visible.
pub fn nearest_samples(plan: &SimPlan) -> Result<Vec<f64>> {
    plan.map_replicates(|_, c, o| nearest_distance(c, o).unwrap_or(f64::INFINITY))
}

/// Empirical `P(D > d)` at each distance.
pub fn run_nearest_ccdf(plan: &SimPlan, distances: &[f64]) -> Result<Vec<EstimateWithCI>> {
    let ds = nearest_samples(plan)?;
    Ok(distances
        .iter()
        .map(|&d| {
            let count = ds.iter().filter(|&&x| x > d).count() as u64;
            EstimateWithCI::from_proportion(count, plan.replicates, plan.ci_level)
        })
        .collect())
}

/// Mean number of visible satellites.
pub fn run_visible_count(plan: &SimPlan) -> Result<EstimateWithCI> {
    let counts = plan.map_replicates(|_, c, o| {
        let mut n = 0u32;
        c.for_each_visible(o, |_, _, _| n += 1);
        n as f64
    })?;
    Ok(EstimateWithCI::from_samples(&counts, plan.ci_level))
}

/// SINR of the nearest-satellite link for one pattern, with fading drawn in
/// order of increasing distance. 0 when nothing is visible; `inf` when the
/// serving satellite has neither interferers nor noise.
pub fn sinr_of<R: Rng + ?Sized>(c: &Constellation, observer: &Observer, lb: &LinkBudget, rng: &mut R) -> f64 {
    let vis = visible_satellites(c, observer);
    if vis.is_empty() {
        return 0.0;
    }
    let fading = Gamma::new(lb.m as f64, 1.0 / lb.m as f64).expect("m >= 1");
    let loss = |d_km: f64| (d_km * 1e3).powf(-lb.alpha);
    let mut received = vis.iter().map(|v| fading.sample(rng) * loss(v.distance));
    let signal = lb.p * lb.g * received.next().expect("non-empty");
    let interference: f64 = lb.p * lb.g_r * received.sum::<f64>();
    let denom = lb.effective_noise() + interference;
    if denom == 0.0 {
        f64::INFINITY
    } else {
        signal / denom
    }
}

/// Per-replicate SINR values (see [`sinr_of`]).
pub fn sinr_samples(plan: &SimPlan) -> Result<Vec<f64>> {
    plan.map_replicates(|i, c, o| {
        let mut rng = rng::stream(plan.master_seed, i, StreamTag::Fading);
        sinr_of(c, o, &plan.link, &mut rng)
    })
}

/// Empirical coverage curve at the plan's thresholds.
pub fn run_sinr_ccdf(plan: &SimPlan) -> Result<CoverageCurve> {
    if plan.thresholds_db.is_empty() {
        return Err(Error::invalid("threshold grid is empty"));
    }
    let s = sinr_samples(plan)?;
    Ok(curve_from_samples(&s, &plan.thresholds_db, plan.ci_level))
}

/// Coverage curve from SINR samples.
pub fn curve_from_samples(sinr: &[f64], thresholds_db: &[f64], ci_level: f64) -> CoverageCurve {
    let thresholds: Vec<f64> = thresholds_db.iter().map(|&t| crate::db_to_linear(t)).collect();
    let est: Vec<EstimateWithCI> = thresholds
        .iter()
        .map(|&tau| {
            let k = sinr.iter().filter(|&&s| s > tau).count() as u64;
            EstimateWithCI::from_proportion(k, sinr.len() as u64, ci_level)
        })
        .collect();
    CoverageCurve {
        thresholds,
        values: est.iter().map(|e| e.value).collect(),
        intervals: Some(est.iter().map(|e| (e.ci_low, e.ci_high)).collect()),
    }
}

/// Mean of `min(log2(1 + SINR), RATE_CAP_BITS)`.
pub fn run_rate(plan: &SimPlan) -> Result<EstimateWithCI> {
    let s = sinr_samples(plan)?;
    let r: Vec<f64> = s.iter().map(|&x| rate_of(x)).collect();
    Ok(EstimateWithCI::from_samples(&r, plan.ci_level))
}

/// `min(log2(1 + sinr), RATE_CAP_BITS)`.
pub fn rate_of(sinr: f64) -> f64 {
    if sinr.is_infinite() {
        RATE_CAP_BITS
    } else {
        sinr.ln_1p().min(RATE_CAP_BITS * std::f64::consts::LN_2) / std::f64::consts::LN_2
    }
}
