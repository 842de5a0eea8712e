//! Moment matching: Cox parameters that reproduce a constellation's local
//! mean numbers of visible satellites and visible orbits.

use std::collections::HashSet;
use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{mean_visible, mean_visible_orbits, visible_fraction};
use crate::constellation::{CoxParams, ModelSpec, Observer};
use crate::error::{Error, Result};
use crate::geometry::GeometryParams;
use crate::quadrature::QuadratureSpec;
use crate::rng::{self, StreamTag};

/// Local first moments seen by an observer at one latitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalMoments {
    pub mean_visible_sats: f64,
    pub mean_visible_orbits: f64,
    /// rad
    pub latitude: f64,
    /// Replicates behind the means; 0 for exact targets.
    #[serde(default)]
    pub replicates: u64,
    #[serde(default)]
    pub sats_std_error: f64,
    #[serde(default)]
    pub orbits_std_error: f64,
}

impl LocalMoments {
    /// Exact target values, e.g. computed analytically.
    pub fn exact(mean_visible_sats: f64, mean_visible_orbits: f64, latitude: f64) -> Self {
        Self { mean_visible_sats, mean_visible_orbits, latitude, replicates: 0, sats_std_error: 0.0, orbits_std_error: 0.0 }
    }
}

/// Estimates [`LocalMoments`] of `model` for an observer at `latitude` with a
/// uniformly random longitude in each replicate.
pub fn measure_local(
    model: &ModelSpec,
    geometry: &GeometryParams,
    latitude: f64,
    replicates: u64,
    seed: u64,
) -> Result<LocalMoments> {
    if replicates < 1000 {
        return Err(Error::invalid(format!("measure_local needs at least 1000 replicates, got {replicates}")));
    }
    model.validate()?;
    let per_rep: Vec<(f64, f64)> = (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i, StreamTag::Constellation);
            let c = model.build(geometry, &mut rng)?;
            let lon = rng::stream(seed, i, StreamTag::Observer).random_range(0.0..2.0 * PI);
            let obs = Observer::new(latitude, lon);
            let mut sats = 0usize;
            let mut orbits = HashSet::new();
            c.for_each_visible(&obs, |_, orbit, _| {
                sats += 1;
                orbits.insert(orbit);
            });
            Ok((sats as f64, orbits.len() as f64))
        })
        .collect::<Result<_>>()?;
    let n = replicates as f64;
    let stats = |f: fn(&(f64, f64)) -> f64| {
        let mean = per_rep.iter().map(f).sum::<f64>() / n;
        let var = per_rep.iter().map(|x| (f(x) - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    };
    let (s, s_se) = stats(|x| x.0);
    let (o, o_se) = stats(|x| x.1);
    Ok(LocalMoments {
        mean_visible_sats: s,
        mean_visible_orbits: o,
        latitude,
        replicates,
        sats_std_error: s_se,
        orbits_std_error: o_se,
    })
}

/// Reference single-shell geometry for fitting: for shell models, the
/// satellite-weighted mean altitude.
pub fn fit_geometry(model: &ModelSpec, geometry: &GeometryParams) -> Result<GeometryParams> {
    match model {
        ModelSpec::Shells { shells } => {
            let w: f64 = shells.iter().map(|s| (s.planes * s.co_channel_per_plane) as f64).sum();
            let alt = shells.iter().map(|s| s.altitude * (s.planes * s.co_channel_per_plane) as f64).sum::<f64>() / w;
            GeometryParams::new(geometry.r_e(), alt)
        }
        _ => Ok(*geometry),
    }
}

/// How the two moments are matched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    /// `lambda` from the orbits crossing the visibility cap
    /// (`lambda sin(phibar)`, independent of `mu`), then `mu` from the
    /// visible satellites.
    OrbitsFirst,
    /// Starts from [`FitMethod::OrbitsFirst`] and then matches the orbits
    /// that carry at least one visible satellite, jointly with the visible
    /// satellites.
    #[default]
    Joint,
}

/// Outcome of [`fit_cox`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub target: LocalMoments,
    pub r_e: f64,
    pub altitude: f64,
    pub method: FitMethod,
    pub params: CoxParams,
    pub orbits_first: CoxParams,
    /// Fitted-minus-target over target, visible satellites.
    pub residual_sats: f64,
    /// Fitted-minus-target over target, for the orbit moment the method
    /// matches.
    pub residual_orbits: f64,
    pub iterations: u32,
    /// Whether the fixed-point iteration met the tolerance on its own
    /// (otherwise the last step was finished by bisection).
    pub fixed_point_converged: bool,
}

const MAX_ITER: u32 = 100;
const TOL: f64 = 1e-6;

/// Fits `(lambda, mu)` to `target` for orbits of geometry `g`.
pub fn fit_cox(target: &LocalMoments, g: &GeometryParams, method: FitMethod, spec: &QuadratureSpec) -> Result<FitReport> {
    let (s, o) = (target.mean_visible_sats, target.mean_visible_orbits);
    if !(s > 0.0 && o > 0.0 && s.is_finite() && o.is_finite()) {
        return Err(Error::Unreachable(format!(
            "target moments must be positive (visible satellites {s}, visible orbits {o})"
        )));
    }
    let frac = visible_fraction(g, spec)?;
    let lambda1 = o / g.phi_bar().sin();
    let mu1 = s / (lambda1 * frac);
    let stage1 = CoxParams::new(lambda1, mu1)?;

    let (params, iterations, converged) = match method {
        FitMethod::OrbitsFirst => (stage1, 0, true),
        FitMethod::Joint => {
            if o >= s {
                return Err(Error::Unreachable(format!(
                    "visible orbits ({o}) must be fewer than visible satellites ({s}): every counted orbit carries at least one visible satellite"
                )));
            }
            joint(s, o, frac, stage1, g, spec)?
        }
    };

    let fitted_s = mean_visible(params, g, spec)?;
    let fitted_o = match method {
        FitMethod::OrbitsFirst => params.lambda * g.phi_bar().sin(),
        FitMethod::Joint => mean_visible_orbits(params, g, spec)?,
    };
    Ok(FitReport {
        target: *target,
        r_e: g.r_e(),
        altitude: g.r_a(),
        method,
        params,
        orbits_first: stage1,
        residual_sats: (fitted_s - s) / s,
        residual_orbits: (fitted_o - o) / o,
        iterations,
        fixed_point_converged: converged,
    })
}

/// Solves `lambda h(mu) = o`, `lambda mu frac = s`, with `h(mu)` the
/// per-orbit probability mass of carrying a visible satellite.
fn joint(
    s: f64,
    o: f64,
    frac: f64,
    start: CoxParams,
    g: &GeometryParams,
    spec: &QuadratureSpec,
) -> Result<(CoxParams, u32, bool)> {
    let h = |mu: f64| mean_visible_orbits(CoxParams { lambda: 1.0, mu }, g, spec);
    let mut mu = start.mu;
    let mut lambda = start.lambda;
    for it in 1..=MAX_ITER {
        lambda = o / h(mu)?;
        let next = s / (lambda * frac);
        let done = (next - mu).abs() <= TOL * mu;
        mu = next;
        if done {
            lambda = o / h(mu)?;
            return Ok((CoxParams::new(lambda, mu)?, it, true));
        }
    }
    // h(mu)/mu falls strictly from frac (mu -> 0) towards 0, so the ratio
    // equation has one root; bracket and bisect it.
    let target = o * frac / s;
    let ratio = |mu: f64| -> Result<f64> { Ok(h(mu)? / mu) };
    let (mut lo, mut hi) = (mu.min(start.mu) / 2.0, mu.max(start.mu) * 2.0);
    while ratio(lo)? < target {
        lo /= 2.0;
        if lo < 1e-12 {
            return Err(Error::Unreachable("cannot bracket the satellite-per-orbit root".into()));
        }
    }
    while ratio(hi)? > target {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Unreachable("cannot bracket the satellite-per-orbit root".into()));
        }
    }
    while (hi - lo) > TOL * hi {
        let mid = 0.5 * (lo + hi);
        if ratio(mid)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mu = 0.5 * (lo + hi);
    let _ = lambda;
    lambda = o / h(mu)?;
    Ok((CoxParams::new(lambda, mu)?, MAX_ITER, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{NodeSpan, ShellSpec};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn measure_trivial_cases() {
        let g = GeometryParams::table1();
        let m = measure_local(&ModelSpec::Cox(CoxParams::new(0.0, 5.0).unwrap()), &g, 0.3, 1000, 1).unwrap();
        assert_eq!((m.mean_visible_sats, m.mean_visible_orbits), (0.0, 0.0));
        // One polar orbit densely filled: always visible from the pole.
        let polar = ModelSpec::Shells {
            shells: vec![ShellSpec {
                planes: 1,
                sats_per_plane: 400,
                altitude: g.r_a(),
                inclination: FRAC_PI_2,
                co_channel_per_plane: 400,
                node_span: NodeSpan::Half,
            }],
        };
        let m = measure_local(&polar, &g, FRAC_PI_2, 1000, 1).unwrap();
        assert_eq!(m.mean_visible_orbits, 1.0);
        assert!(measure_local(&polar, &g, 0.0, 999, 1).is_err());
    }

    #[test]
    fn round_trip_on_exact_moments() {
        let g = GeometryParams::table1();
        for (l, mu) in [(30.0, 30.0), (100.0, 21.0), (38.0, 80.0), (10.0, 3.0)] {
            let p = CoxParams::new(l, mu).unwrap();
            let target = LocalMoments::exact(
                mean_visible(p, &g, &spec()).unwrap(),
                mean_visible_orbits(p, &g, &spec()).unwrap(),
                0.0,
            );
            let r = fit_cox(&target, &g, FitMethod::Joint, &spec()).unwrap();
            assert_relative_eq!(r.params.lambda, l, max_relative = 1e-4);
            assert_relative_eq!(r.params.mu, mu, max_relative = 1e-4);
            assert!(r.residual_sats.abs() < 1e-6 && r.residual_orbits.abs() < 1e-5);
            assert!(r.iterations <= MAX_ITER);
        }
    }

    #[test]
    fn orbits_first_is_separable() {
        let g = GeometryParams::table1();
        let a = fit_cox(&LocalMoments::exact(40.0, 10.0, 0.0), &g, FitMethod::OrbitsFirst, &spec()).unwrap();
        let b = fit_cox(&LocalMoments::exact(90.0, 10.0, 0.0), &g, FitMethod::OrbitsFirst, &spec()).unwrap();
        assert_eq!(a.params.lambda, b.params.lambda);
        assert!(a.residual_sats.abs() < 1e-6);
    }

    #[test]
    fn round_trip_on_measured_cox() {
        let g = GeometryParams::table1();
        let p = CoxParams::new(40.0, 25.0).unwrap();
        let m = measure_local(&ModelSpec::Cox(p), &g, 0.4, 20_000, 3).unwrap();
        let r = fit_cox(&m, &g, FitMethod::Joint, &spec()).unwrap();
        assert!((r.params.lambda / 40.0 - 1.0).abs() < 0.05, "{:?}", r.params);
        assert!((r.params.mu / 25.0 - 1.0).abs() < 0.05, "{:?}", r.params);
    }

    #[test]
    fn unreachable_targets() {
        let g = GeometryParams::table1();
        assert!(matches!(fit_cox(&LocalMoments::exact(0.0, 0.0, 0.0), &g, FitMethod::Joint, &spec()), Err(Error::Unreachable(_))));
        assert!(matches!(fit_cox(&LocalMoments::exact(5.0, 6.0, 0.0), &g, FitMethod::Joint, &spec()), Err(Error::Unreachable(_))));
    }

    #[test]
    fn orbit_moment_monotone() {
        let g = GeometryParams::table1();
        let mut prev = 0.0;
        for mu in [0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 200.0] {
            let v = mean_visible_orbits(CoxParams::new(1.0, mu).unwrap(), &g, &spec()).unwrap();
            assert!(v > prev);
            assert!(v < g.phi_bar().sin());
            prev = v;
        }
    }

    #[test]
    fn shell_fit_geometry() {
        let g = GeometryParams::new(6400.0, 550.0).unwrap();
        let fg = fit_geometry(&ModelSpec::Shells { shells: ShellSpec::starlink_2a() }, &g).unwrap();
        assert_relative_eq!(fg.r_a(), 530.0, max_relative = 1e-12);
    }
}
