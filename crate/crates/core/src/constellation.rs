//! Satellite point patterns: the Cox orbit/satellite process, the binomial
//! baseline, and deterministic regular, Walker and multi-shell builders.
//!
//! Every pattern is a list of [`Orbit`]s. Isolated satellites (binomial model)
//! are stored as one-satellite polar orbits so that the visibility and SINR
//! code never needs to know which model produced the pattern.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{polar_orbit_through, wrap, GeometryParams, OrbitFrame, Point3};
use crate::rng::{self, StreamTag};

/// Parameters of the Cox model: mean number of orbits and mean number of
/// satellites per orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoxParams {
    pub lambda: f64,
    pub mu: f64,
}

impl CoxParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        let p = Self { lambda, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::invalid(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if !(self.mu.is_finite() && self.mu >= 0.0) {
            return Err(Error::invalid(format!("mu must be finite and >= 0, got {}", self.mu)));
        }
        Ok(())
    }
}

/// One circular orbit and the orbital angles of its satellites.
///
/// `theta` in `[0, pi)` is the longitude of the node, `phi` in `[0, pi)` the
/// inclination and `radius` the orbit radius in km.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub theta: f64,
    pub phi: f64,
    pub radius: f64,
    pub omegas: Vec<f64>,
}

impl Orbit {
    /// Builds an orbit from a possibly directed description (`theta` anywhere
    /// on the circle), folding it onto the undirected range
    /// `[0, pi) x [0, pi)` without moving any satellite.
    pub fn new(theta: f64, phi: f64, radius: f64, omegas: Vec<f64>) -> Self {
        let mut theta = wrap(theta, 2.0 * PI);
        let mut phi = wrap(phi, 2.0 * PI);
        let mut omegas = omegas;
        // (theta + pi, phi) is the circle (theta, pi - phi), traversed with
        // omega -> pi - omega.
        if theta >= PI {
            theta -= PI;
            phi = wrap(PI - phi, 2.0 * PI);
            for w in &mut omegas {
                *w = wrap(PI - *w, 2.0 * PI);
            }
        }
        if phi >= PI {
            // Inclination phi + pi is the same plane with the orbit reversed.
            phi -= PI;
            for w in &mut omegas {
                *w = wrap(-*w, 2.0 * PI);
            }
        }
        for w in &mut omegas {
            *w = wrap(*w, 2.0 * PI);
        }
        Self { theta, phi, radius, omegas }
    }

    pub fn frame(&self) -> OrbitFrame {
        OrbitFrame::new(self.theta, self.phi, self.radius)
    }
}

/// How the nodes of a regular shell are spread in longitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeSpan {
    /// Nodes at `(i - 1) pi / N + U` with a common inclination: the direct
    /// orbit representation over the undirected longitude range.
    #[default]
    Half,
    /// Nodes at `2 pi (i - 1) / N + U`, as in a Walker-delta shell.
    Full,
}

/// One shell of a deterministic multi-shell plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellSpec {
    pub planes: u32,
    pub sats_per_plane: u32,
    /// km
    pub altitude: f64,
    /// rad
    pub inclination: f64,
    /// Satellites per plane sharing the downlink channel after frequency reuse.
    pub co_channel_per_plane: u32,
    #[serde(default)]
    pub node_span: NodeSpan,
}

impl ShellSpec {
    pub fn validate(&self) -> Result<()> {
        if self.planes == 0 || self.sats_per_plane == 0 {
            return Err(Error::invalid("shell needs at least one plane and one satellite per plane"));
        }
        if self.co_channel_per_plane == 0 || self.co_channel_per_plane > self.sats_per_plane {
            return Err(Error::invalid(format!(
                "co_channel_per_plane must be in 1..={}, got {}",
                self.sats_per_plane, self.co_channel_per_plane
            )));
        }
        if !(self.altitude.is_finite() && self.altitude > 0.0) {
            return Err(Error::invalid("shell altitude must be positive"));
        }
        Ok(())
    }

    /// The three co-channel shells of the Starlink second-generation (2A)
    /// plan: 28 planes each of 120 satellites at 525/530/535 km with
    /// inclinations 43/53/33 degrees, reuse factor 4.
    pub fn starlink_2a() -> Vec<ShellSpec> {
        [(525.0, 43.0), (530.0, 53.0), (535.0, 33.0)]
            .into_iter()
            .map(|(altitude, inc)| ShellSpec {
                planes: 28,
                sats_per_plane: 120,
                altitude,
                inclination: f64::to_radians(inc),
                co_channel_per_plane: 30,
                node_span: NodeSpan::Full,
            })
            .collect()
    }
}

/// Generating model of a constellation, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelSpec {
    Cox(CoxParams),
    Binomial { n: u32 },
    Regular { n_orbits: u32, inclination: f64, sats_per_orbit: u32 },
    Walker { n_orbits: u32, sats_per_orbit: u32 },
    Shells { shells: Vec<ShellSpec> },
}

/// Alias used where the model is recorded as the origin of a pattern.
pub type Provenance = ModelSpec;

impl ModelSpec {
    /// Whether the model's law is invariant under all rotations, so that the
    /// observer can sit at the north point.
    pub fn is_isotropic(&self) -> bool {
        matches!(self, ModelSpec::Cox(_) | ModelSpec::Binomial { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Cox(p) => p.validate(),
            ModelSpec::Binomial { .. } => Ok(()),
            ModelSpec::Regular { n_orbits, sats_per_orbit, .. }
            | ModelSpec::Walker { n_orbits, sats_per_orbit } => {
                if *n_orbits == 0 || *sats_per_orbit == 0 {
                    Err(Error::invalid("regular constellations need n_orbits >= 1 and sats_per_orbit >= 1"))
                } else {
                    Ok(())
                }
            }
            ModelSpec::Shells { shells } => {
                if shells.is_empty() {
                    return Err(Error::invalid("shell model needs at least one shell"));
                }
                shells.iter().try_for_each(ShellSpec::validate)
            }
        }
    }

    /// Draws one pattern. For shell models only `g.r_e()` is used; each shell
    /// carries its own altitude.
    pub fn build<R: Rng + ?Sized>(&self, g: &GeometryParams, rng: &mut R) -> Result<Constellation> {
        self.validate()?;
        Ok(match self {
            ModelSpec::Cox(p) => sample_cox_with(*p, g, rng),
            ModelSpec::Binomial { n } => sample_binomial_with(*n, g, rng),
            ModelSpec::Regular { n_orbits, inclination, sats_per_orbit } => {
                build_regular_with(*n_orbits, *inclination, *sats_per_orbit, g, rng)?
            }
            ModelSpec::Walker { n_orbits, sats_per_orbit } => {
                let mut c = build_regular_with(*n_orbits, FRAC_PI_2, *sats_per_orbit, g, rng)?;
                c.provenance = self.clone();
                c
            }
            ModelSpec::Shells { shells } => build_shells_with(shells, g.r_e(), rng)?,
        })
    }

    /// Mean number of satellites the model places.
    pub fn mean_total(&self) -> f64 {
        match self {
            ModelSpec::Cox(p) => p.lambda * p.mu,
            ModelSpec::Binomial { n } => *n as f64,
            ModelSpec::Regular { n_orbits, sats_per_orbit, .. }
            | ModelSpec::Walker { n_orbits, sats_per_orbit } => (*n_orbits as f64) * (*sats_per_orbit as f64),
            ModelSpec::Shells { shells } => {
                shells.iter().map(|s| s.planes as f64 * s.co_channel_per_plane as f64).sum()
            }
        }
    }
}

/// A realised satellite pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    geometry: GeometryParams,
    orbits: Vec<Orbit>,
    provenance: Provenance,
    mixed_altitude: bool,
}

impl Constellation {
    pub fn new(geometry: GeometryParams, orbits: Vec<Orbit>, provenance: Provenance) -> Self {
        let r0 = orbits.first().map(|o| o.radius).unwrap_or(geometry.r_s());
        let mixed_altitude = orbits.iter().any(|o| (o.radius - r0).abs() > 1e-9 * r0);
        Self { geometry, orbits, provenance, mixed_altitude }
    }

    /// Reference geometry (the first shell's for multi-shell patterns).
    pub fn geometry(&self) -> &GeometryParams {
        &self.geometry
    }

    pub fn orbits(&self) -> &[Orbit] {
        &self.orbits
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_mixed_altitude(&self) -> bool {
        self.mixed_altitude
    }

    /// The geometry shared by every orbit; mixed-altitude patterns have none.
    pub fn single_geometry(&self) -> Result<GeometryParams> {
        if self.mixed_altitude {
            Err(Error::MixedAltitude)
        } else {
            Ok(self.geometry)
        }
    }

    pub fn satellite_count(&self) -> usize {
        self.orbits.iter().map(|o| o.omegas.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.satellite_count() == 0
    }

    /// All satellite positions, with the index of their orbit.
    pub fn positions(&self) -> impl Iterator<Item = (usize, f64, Point3)> + '_ {
        self.orbits.iter().enumerate().flat_map(|(i, o)| {
            let frame = o.frame();
            o.omegas.iter().map(move |&w| (i, w, frame.position(w)))
        })
    }

    /// Calls `f(distance, orbit_index, omega)` for every satellite above the
    /// observer's horizon, in storage order.
    pub fn for_each_visible<F>(&self, observer: &Observer, mut f: F)
    where
        F: FnMut(f64, usize, f64),
    {
        let re = self.geometry.r_e();
        let o = observer.position(re);
        let re2 = re * re;
        let o_unit = Point3::new(o.x / re, o.y / re, o.z / re);
        for (i, orbit) in self.orbits.iter().enumerate() {
            let frame = orbit.frame();
            // The highest point of the circle above the observer's tangent
            // plane has height r cos(beta), beta the tilt between the plane
            // and the observer direction.
            let s = frame.normal().dot(&o_unit);
            let cos_beta = (1.0 - s * s).max(0.0).sqrt();
            if orbit.radius * cos_beta < re * (1.0 - 1e-12) {
                continue;
            }
            for &w in &orbit.omegas {
                let p = frame.position(w);
                let dot = p.dot(&o);
                if dot >= re2 {
                    let r2 = orbit.radius * orbit.radius;
                    let d = (r2 + re2 - 2.0 * dot).max(0.0).sqrt();
                    f(d, i, w);
                }
            }
        }
    }
}

/// Where the user stands on the Earth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observer {
    /// rad
    pub latitude: f64,
    /// rad
    pub longitude: f64,
}

impl Observer {
    pub fn new(latitude: f64, longitude: f64) -> Self {
        Self { latitude, longitude }
    }

    /// The typical user `(0, 0, r_e)`.
    pub fn north_pole() -> Self {
        Self { latitude: FRAC_PI_2, longitude: 0.0 }
    }

    pub fn at_latitude(latitude: f64) -> Self {
        Self { latitude, longitude: 0.0 }
    }

    pub fn position(&self, r_e: f64) -> Point3 {
        if self.latitude == FRAC_PI_2 {
            return Point3::new(0.0, 0.0, r_e);
        }
        Point3::on_surface(r_e, self.latitude, self.longitude)
    }
}

/// A satellite seen by the observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visible {
    /// km
    pub distance: f64,
    pub orbit: usize,
    pub omega: f64,
}

/// Satellites above the observer's horizon, nearest first.
pub fn visible_satellites(c: &Constellation, observer: &Observer) -> Vec<Visible> {
    let mut out = Vec::new();
    c.for_each_visible(observer, |distance, orbit, omega| out.push(Visible { distance, orbit, omega }));
    out.sort_by(|a, b| a.distance.total_cmp(&b.distance));
    out
}

/// Distance to the nearest visible satellite; `None` when nothing is visible.
pub fn nearest_distance(c: &Constellation, observer: &Observer) -> Option<f64> {
    let mut best: Option<f64> = None;
    c.for_each_visible(observer, |d, _, _| {
        if best.is_none_or(|b| d < b) {
            best = Some(d);
        }
    });
    best
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let d: Poisson<f64> = Poisson::new(mean).expect("positive finite Poisson mean");
    d.sample(rng) as u64
}

/// Samples the Cox model with the given seed.
pub fn sample_cox(p: CoxParams, g: &GeometryParams, seed: u64) -> Constellation {
    sample_cox_with(p, g, &mut rng::stream(seed, 0, StreamTag::Constellation))
}

/// Samples the Cox model: Poisson(lambda) orbits with uniform longitude and
/// inclination density `sin(phi) / 2`, then Poisson(mu) uniformly placed
/// satellites on each orbit.
pub fn sample_cox_with<R: Rng + ?Sized>(p: CoxParams, g: &GeometryParams, rng: &mut R) -> Constellation {
    let n_orbits = poisson(p.lambda, rng);
    let mut orbits = Vec::with_capacity(n_orbits as usize);
    for _ in 0..n_orbits {
        let theta = rng.random_range(0.0..PI);
        // Inverse of the CDF (1 - cos x) / 2.
        let u: f64 = rng.random();
        let phi = (1.0 - 2.0 * u).clamp(-1.0, 1.0).acos();
        let n_sats = poisson(p.mu, rng);
        let omegas = (0..n_sats).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        orbits.push(Orbit { theta, phi, radius: g.r_s(), omegas });
    }
    Constellation::new(*g, orbits, ModelSpec::Cox(p))
}

/// Samples `n` independent uniform satellites with the given seed.
pub fn sample_binomial(n: u32, g: &GeometryParams, seed: u64) -> Constellation {
    sample_binomial_with(n, g, &mut rng::stream(seed, 0, StreamTag::Constellation))
}

/// `n` i.i.d. uniform points on the orbit sphere, each stored as its own
/// polar orbit.
pub fn sample_binomial_with<R: Rng + ?Sized>(n: u32, g: &GeometryParams, rng: &mut R) -> Constellation {
    let rs = g.r_s();
    let orbits = (0..n)
        .map(|_| {
            let v: f64 = rng.random_range(-1.0..1.0);
            let t: f64 = rng.random_range(0.0..2.0 * PI);
            let rho = (1.0 - v * v).max(0.0).sqrt();
            let p = Point3::new(rs * rho * t.cos(), rs * rho * t.sin(), rs * v);
            let (theta, phi, omega) = polar_orbit_through(&p);
            Orbit { theta, phi, radius: rs, omegas: vec![omega] }
        })
        .collect();
    Constellation::new(*g, orbits, ModelSpec::Binomial { n })
}

/// Regular constellation with the given seed; see [`build_regular_with`].
pub fn build_regular(
    n_orbits: u32,
    inclination: f64,
    sats_per_orbit: u32,
    g: &GeometryParams,
    seed: u64,
) -> Result<Constellation> {
    build_regular_with(n_orbits, inclination, sats_per_orbit, g, &mut rng::stream(seed, 0, StreamTag::Builder))
}

/// `n_orbits` orbits of common inclination with longitudes
/// `(i - 1) pi / N + U`, `U ~ Uniform(0, pi / N)`, each carrying
/// `sats_per_orbit` evenly spaced satellites with an independent uniform
/// phase.
pub fn build_regular_with<R: Rng + ?Sized>(
    n_orbits: u32,
    inclination: f64,
    sats_per_orbit: u32,
    g: &GeometryParams,
    rng: &mut R,
) -> Result<Constellation> {
    let spec = ModelSpec::Regular { n_orbits, inclination, sats_per_orbit };
    spec.validate()?;
    let shell = ShellSpec {
        planes: n_orbits,
        sats_per_plane: sats_per_orbit,
        altitude: g.r_a(),
        inclination,
        co_channel_per_plane: sats_per_orbit,
        node_span: NodeSpan::Half,
    };
    let orbits = shell_orbits(&shell, g.r_s(), rng);
    Ok(Constellation::new(*g, orbits, spec))
}

/// Walker constellation (polar regular orbits) with the given seed.
pub fn build_walker(n_orbits: u32, sats_per_orbit: u32, g: &GeometryParams, seed: u64) -> Result<Constellation> {
    ModelSpec::Walker { n_orbits, sats_per_orbit }.build(g, &mut rng::stream(seed, 0, StreamTag::Builder))
}

/// Multi-shell plan with the given seed; see [`build_shells_with`].
pub fn build_shells(specs: &[ShellSpec], r_e: f64, seed: u64) -> Result<Constellation> {
    build_shells_with(specs, r_e, &mut rng::stream(seed, 0, StreamTag::Builder))
}

/// Union of one regular constellation per shell, keeping only the
/// co-channel satellites of each plane.
pub fn build_shells_with<R: Rng + ?Sized>(specs: &[ShellSpec], r_e: f64, rng: &mut R) -> Result<Constellation> {
    let model = ModelSpec::Shells { shells: specs.to_vec() };
    model.validate()?;
    let geometry = GeometryParams::new(r_e, specs[0].altitude)?;
    let mut orbits = Vec::new();
    for s in specs {
        orbits.extend(shell_orbits(s, r_e + s.altitude, rng));
    }
    Ok(Constellation::new(geometry, orbits, model))
}

/// Indices of the co-channel satellites among `total` evenly spaced slots.
fn co_channel_slots(total: u32, keep: u32) -> impl Iterator<Item = u32> {
    (0..keep).map(move |k| ((k as u64 * total as u64) / keep as u64) as u32)
}

fn shell_orbits<R: Rng + ?Sized>(s: &ShellSpec, radius: f64, rng: &mut R) -> Vec<Orbit> {
    let n = s.planes as f64;
    let span = match s.node_span {
        NodeSpan::Half => PI,
        NodeSpan::Full => 2.0 * PI,
    };
    let shift = rng.random_range(0.0..span / n);
    let slot = 2.0 * PI / s.sats_per_plane as f64;
    (0..s.planes)
        .map(|i| {
            let theta = span * i as f64 / n + shift;
            let phase = rng.random_range(0.0..slot);
            let omegas = co_channel_slots(s.sats_per_plane, s.co_channel_per_plane)
                .map(|j| slot * j as f64 + phase)
                .collect();
            Orbit::new(theta, s.inclination, radius, omegas)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_one_sample, ks_two_sample, kolmogorov_critical};
    use approx::assert_relative_eq;

    fn g() -> GeometryParams {
        GeometryParams::table1()
    }

    #[test]
    fn empty_cox_when_lambda_zero() {
        for seed in 0..20 {
            let c = sample_cox(CoxParams::new(0.0, 40.0).unwrap(), &g(), seed);
            assert!(c.orbits().is_empty());
            assert!(visible_satellites(&c, &Observer::north_pole()).is_empty());
            assert_eq!(nearest_distance(&c, &Observer::north_pole()), None);
        }
    }

    #[test]
    fn seeds_reproduce_bit_identical_patterns() {
        let p = CoxParams::new(30.0, 40.0).unwrap();
        assert_eq!(sample_cox(p, &g(), 9), sample_cox(p, &g(), 9));
        assert_ne!(sample_cox(p, &g(), 9), sample_cox(p, &g(), 10));
        assert_eq!(sample_binomial(50, &g(), 3), sample_binomial(50, &g(), 3));
    }

    #[test]
    fn campbell_counts() {
        // E[#orbits] = lambda, E[#satellites] = lambda mu.
        let p = CoxParams::new(30.0, 40.0).unwrap();
        let seeds = 10_000u64;
        let (mut so, mut ss, mut ss2) = (0.0, 0.0, 0.0);
        for seed in 0..seeds {
            let c = sample_cox(p, &g(), seed);
            so += c.orbits().len() as f64;
            let n = c.satellite_count() as f64;
            ss += n;
            ss2 += n * n;
        }
        let n = seeds as f64;
        let mean_orbits = so / n;
        let mean_sats = ss / n;
        // Var(#orbits) = lambda; Var(#sats) = lambda mu + lambda mu^2.
        assert!((mean_orbits - 30.0).abs() < 3.0 * (30.0f64 / n).sqrt());
        let var_sats = ss2 / n - mean_sats * mean_sats;
        assert!((mean_sats - 1200.0).abs() < 3.0 * (var_sats / n).sqrt(), "mean {mean_sats}");
        assert_relative_eq!(var_sats, 1200.0 + 30.0 * 1600.0, max_relative = 0.05);
    }

    #[test]
    fn inclinations_follow_sine_law() {
        let p = CoxParams::new(100.0, 0.0).unwrap();
        let mut phis = Vec::new();
        let mut seed = 0;
        while phis.len() < 100_000 {
            phis.extend(sample_cox(p, &g(), seed).orbits().iter().map(|o| o.phi));
            seed += 1;
        }
        phis.truncate(100_000);
        let d = ks_one_sample(&mut phis, |x| (1.0 - x.cos()) / 2.0);
        assert!(d < kolmogorov_critical(0.01, 100_000), "KS statistic {d}");
    }

    #[test]
    fn binomial_moments() {
        let g = g();
        let c = sample_binomial(100_000, &g, 11);
        assert_eq!(c.satellite_count(), 100_000);
        let zs: Vec<f64> = c.positions().map(|(_, _, p)| p.z).collect();
        let n = zs.len() as f64;
        let rs2 = g.r_s() * g.r_s();
        let mean_z = zs.iter().sum::<f64>() / n;
        let mean_z2 = zs.iter().map(|z| z * z).sum::<f64>() / n;
        // Var(z) = rs^2 / 3, Var(z^2) = rs^4 (1/5 - 1/9).
        assert!(mean_z.abs() < 3.0 * (rs2 / 3.0 / n).sqrt());
        assert!((mean_z2 - rs2 / 3.0).abs() < 3.0 * (rs2 * rs2 * (0.2 - 1.0 / 9.0) / n).sqrt());
        for (_, _, p) in c.positions().take(1000) {
            assert_relative_eq!(p.norm(), g.r_s(), max_relative = 1e-12);
        }
        assert!(sample_binomial(0, &g, 1).is_empty());
    }

    #[test]
    fn binomial_nosat_near_reference() {
        let g = g();
        let reps = 100_000u64;
        let empty = (0..reps)
            .filter(|&s| nearest_distance(&sample_binomial(100, &g, s), &Observer::north_pole()).is_none())
            .count();
        let p_hat = empty as f64 / reps as f64;
        let p = (1.0 - g.cap_area_fraction()).powi(100);
        assert!((p_hat - p).abs() < 3.0 * (p * (1.0 - p) / reps as f64).sqrt());
        assert!((p - 0.0176).abs() < 5e-4);
    }

    #[test]
    fn regular_builder_layout() {
        let g = g();
        let c = build_regular(1, 0.75, 1, &g, 4).unwrap();
        assert_eq!(c.orbits().len(), 1);
        assert_eq!(c.satellite_count(), 1);
        let o = &c.orbits()[0];
        assert!(o.theta >= 0.0 && o.theta < PI);
        assert_relative_eq!(o.phi, 0.75);

        let c = build_regular(12, 0.75, 10, &g, 5).unwrap();
        let thetas: Vec<f64> = c.orbits().iter().map(|o| o.theta).collect();
        for w in thetas.windows(2) {
            assert_relative_eq!(w[1] - w[0], PI / 12.0, max_relative = 1e-12);
        }
        assert!(thetas[0] < PI / 12.0);
        for o in c.orbits() {
            let mut ws = o.omegas.clone();
            ws.sort_by(f64::total_cmp);
            for w in ws.windows(2) {
                assert_relative_eq!(w[1] - w[0], 2.0 * PI / 10.0, max_relative = 1e-9);
            }
        }
        let w = build_walker(6, 11, &g, 1).unwrap();
        assert!(w.orbits().iter().all(|o| (o.phi - FRAC_PI_2).abs() < 1e-12));
        assert!(matches!(w.provenance(), ModelSpec::Walker { .. }));
        assert!(build_regular(0, 0.75, 1, &g, 1).is_err());
    }

    #[test]
    fn folding_keeps_satellites_in_place() {
        let g = g();
        for (theta, phi) in [(4.0, 0.75), (3.5, 2.2), (1.0, 3.6), (6.0, 4.0)] {
            let ws = vec![0.1, 1.3, 2.9, 5.5];
            let raw = OrbitFrame::new(theta, phi, g.r_s());
            let o = Orbit::new(theta, phi, g.r_s(), ws.clone());
            assert!((0.0..PI).contains(&o.theta) && (0.0..PI).contains(&o.phi));
            for (w, w2) in ws.iter().zip(&o.omegas) {
                assert!(raw.position(*w).distance(&o.frame().position(*w2)) < 1e-9);
            }
        }
    }

    #[test]
    fn starlink_shells_counts() {
        let specs = ShellSpec::starlink_2a();
        let c = build_shells(&specs, 6400.0, 1).unwrap();
        assert_eq!(c.orbits().len(), 84);
        assert_eq!(c.satellite_count(), 2520);
        assert!(c.is_mixed_altitude());
        assert!(matches!(c.single_geometry(), Err(Error::MixedAltitude)));
        // Stride-4 decimation keeps regular spacing.
        for o in c.orbits() {
            let mut ws = o.omegas.clone();
            ws.sort_by(f64::total_cmp);
            for w in ws.windows(2) {
                assert_relative_eq!(w[1] - w[0], 2.0 * PI / 30.0, max_relative = 1e-9);
            }
        }
        let one = ShellSpec { planes: 1, sats_per_plane: 8, altitude: 550.0, inclination: 0.75, co_channel_per_plane: 8, node_span: NodeSpan::Half };
        let c = build_shells(&[one], 6400.0, 2).unwrap();
        assert_eq!(c.satellite_count(), 8);
        assert!(c.single_geometry().is_ok());
        let bad = ShellSpec { co_channel_per_plane: 121, ..ShellSpec::starlink_2a()[0].clone() };
        assert!(build_shells(&[bad], 6400.0, 1).is_err());
    }

    #[test]
    fn co_channel_slot_counts() {
        assert_eq!(co_channel_slots(120, 30).collect::<Vec<_>>(), (0..30).map(|k| 4 * k).collect::<Vec<_>>());
        assert_eq!(co_channel_slots(10, 3).collect::<Vec<_>>(), vec![0, 3, 6]);
    }

    #[test]
    fn visibility_sorted_and_bounded() {
        let g = g();
        let c = sample_cox(CoxParams::new(30.0, 30.0).unwrap(), &g, 3);
        let obs = Observer::north_pole();
        let vis = visible_satellites(&c, &obs);
        assert!(!vis.is_empty());
        for w in vis.windows(2) {
            assert!(w[0].distance <= w[1].distance);
        }
        for v in &vis {
            assert!(v.distance >= g.d_min() - 1e-9 && v.distance <= g.d_max() + 1e-9);
            let o = &c.orbits()[v.orbit];
            assert_relative_eq!(v.distance, crate::geometry::distance_to_typical(o.phi, v.omega, &g), max_relative = 1e-10);
        }
        assert_eq!(nearest_distance(&c, &obs), Some(vis[0].distance));
        // Brute force over all positions.
        let n = Point3::new(0.0, 0.0, g.r_e());
        let brute = c.positions().filter(|(_, _, p)| p.distance(&n) <= g.d_max()).count();
        assert_eq!(brute, vis.len());
    }

    #[test]
    fn mean_visible_count_near_35() {
        let g = GeometryParams::from_orbit_radius(6400.0, 6950.0).unwrap();
        let p = CoxParams::new(30.0, 30.0).unwrap();
        let seeds = 10_000u64;
        let mean = (0..seeds)
            .map(|s| visible_satellites(&sample_cox(p, &g, s), &Observer::north_pole()).len() as f64)
            .sum::<f64>()
            / seeds as f64;
        assert!((mean - 35.0).abs() < 1.0, "mean visible {mean}");
    }

    #[test]
    fn regular_model_longitude_invariance() {
        // Rotating all longitudes by a constant leaves the nearest-distance
        // law unchanged for a longitude-randomised observer.
        let g = g();
        let sample = |rot: f64, tag: u64| -> Vec<f64> {
            (0..4000u64)
                .map(|s| {
                    let mut c = build_regular(10, 0.75, 20, &g, s * 2 + tag).unwrap();
                    for o in &mut c.orbits {
                        *o = Orbit::new(o.theta + rot, o.phi, o.radius, o.omegas.clone());
                    }
                    let lon = rand::Rng::random_range(&mut rng::stream(s, tag, StreamTag::Observer), 0.0..2.0 * PI);
                    nearest_distance(&c, &Observer::new(0.5, lon)).unwrap_or(f64::INFINITY)
                })
                .collect()
        };
        let a = sample(0.0, 0);
        let b = sample(1.234, 1);
        let (_, p) = ks_two_sample(&a, &b);
        assert!(p > 0.01, "p = {p}");
    }
}
