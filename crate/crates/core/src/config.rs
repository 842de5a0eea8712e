//! Run configuration: TOML files with one section per concern, bundled
//! profiles, and `section.key=value` overrides.
//!
//! Precedence, lowest first: built-in defaults, bundled profile, config
//! file, `--set` overrides, dedicated command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytic::{thermal_noise_power, LinkBudget, NakagamiPlan};
use crate::constellation::{CoxParams, ModelSpec, NodeSpan, ShellSpec};
use crate::error::{Error, Result};
use crate::fitting::FitMethod;
use crate::geometry::GeometryParams;
use crate::montecarlo::SimPlan;
use crate::quadrature::QuadratureSpec;

/// Names of the bundled profiles.
pub const PROFILES: [&str; 2] = ["table1", "starlink-2a"];

/// Text of a bundled profile.
pub fn profile_text(name: &str) -> Result<&'static str> {
    match name {
        "table1" => Ok(include_str!("../profiles/table1.toml")),
        "starlink-2a" => Ok(include_str!("../profiles/starlink-2a.toml")),
        other => Err(Error::Config(format!("unknown profile {other:?}; available: {}", PROFILES.join(", ")))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub r_e_km: f64,
    /// Orbit altitude; for shell models, the reference altitude used when
    /// fitting.
    pub altitude_km: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self { r_e_km: 6400.0, altitude_km: 550.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellConfig {
    pub planes: u32,
    pub sats_per_plane: u32,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub co_channel_per_plane: u32,
    #[serde(default)]
    pub node_span: NodeSpan,
}

/// Constellation model; angles in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelConfig {
    Cox { lambda: f64, mu: f64 },
    Binomial { n: u32 },
    Regular { n_orbits: u32, inclination_deg: f64, sats_per_orbit: u32 },
    Walker { n_orbits: u32, sats_per_orbit: u32 },
    Shells { shells: Vec<ShellConfig> },
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::Cox { lambda: 30.0, mu: 30.0 }
    }
}

impl ModelConfig {
    pub fn to_spec(&self) -> ModelSpec {
        match self {
            ModelConfig::Cox { lambda, mu } => ModelSpec::Cox(CoxParams { lambda: *lambda, mu: *mu }),
            ModelConfig::Binomial { n } => ModelSpec::Binomial { n: *n },
            ModelConfig::Regular { n_orbits, inclination_deg, sats_per_orbit } => ModelSpec::Regular {
                n_orbits: *n_orbits,
                inclination: inclination_deg.to_radians(),
                sats_per_orbit: *sats_per_orbit,
            },
            ModelConfig::Walker { n_orbits, sats_per_orbit } => {
                ModelSpec::Walker { n_orbits: *n_orbits, sats_per_orbit: *sats_per_orbit }
            }
            ModelConfig::Shells { shells } => ModelSpec::Shells {
                shells: shells
                    .iter()
                    .map(|s| ShellSpec {
                        planes: s.planes,
                        sats_per_plane: s.sats_per_plane,
                        altitude: s.altitude_km,
                        inclination: s.inclination_deg.to_radians(),
                        co_channel_per_plane: s.co_channel_per_plane,
                        node_span: s.node_span,
                    })
                    .collect(),
            },
        }
    }
}

/// Link budget in the dB domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub power_dbw: f64,
    pub gain_db: f64,
    pub interferer_gain_db: f64,
    pub alpha: f64,
    pub nakagami_m: u32,
    pub noise_temperature_k: f64,
    pub bandwidth_hz: f64,
    /// Include thermal noise in coverage and rate.
    pub noise: bool,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self {
            power_dbw: 30.0,
            gain_db: 20.0,
            interferer_gain_db: 0.0,
            alpha: 2.0,
            nakagami_m: 1,
            noise_temperature_k: 290.0,
            bandwidth_hz: 30e6,
            noise: false,
        }
    }
}

impl LinkConfig {
    pub fn to_budget(&self) -> LinkBudget {
        LinkBudget {
            p: crate::db_to_linear(self.power_dbw),
            g: crate::db_to_linear(self.gain_db),
            g_r: crate::db_to_linear(self.interferer_gain_db),
            alpha: self.alpha,
            m: self.nakagami_m,
            noise_power: thermal_noise_power(self.noise_temperature_k, self.bandwidth_hz),
            with_noise: self.noise,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub thresholds_db: Vec<f64>,
    /// Distances for the nearest-satellite CCDF; empty picks a grid spanning
    /// the visible range.
    pub distances_km: Vec<f64>,
    pub replicates: u64,
    pub seed: u64,
    /// Observer latitude for non-isotropic models.
    pub latitude_deg: f64,
    pub ci_level: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            thresholds_db: (-5..=10).map(|i| 2.0 * i as f64).collect(),
            distances_km: Vec::new(),
            replicates: 10_000,
            seed: 1,
            latitude_deg: 90.0,
            ci_level: 0.95,
            out: None,
        }
    }
}

/// Parameter grid for the no-satellite table; empty lists fall back to the
/// model's own `lambda` and `mu`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub method: FitMethod,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometryConfig,
    pub model: ModelConfig,
    pub link: LinkConfig,
    pub run: RunSection,
    pub sweep: SweepConfig,
    pub fit: FitConfig,
    pub nakagami: NakagamiPlan,
    pub quadrature: QuadratureSpec,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn profile(name: &str) -> Result<Self> {
        Self::from_toml_str(profile_text(name)?)
    }

    /// Layers an optional profile, an optional file and `key.path=value`
    /// overrides, in that order, over the defaults.
    pub fn layered(profile: Option<&str>, file: Option<&Path>, sets: &[String]) -> Result<Self> {
        let mut table = toml::Table::new();
        if let Some(name) = profile {
            merge(&mut table, parse_table(profile_text(name)?)?);
        }
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            merge(&mut table, parse_table(&text)?);
        }
        for s in sets {
            apply_set(&mut table, s)?;
        }
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
    }

    pub fn geometry(&self) -> Result<GeometryParams> {
        GeometryParams::new(self.geometry.r_e_km, self.geometry.altitude_km)
    }

    pub fn model_spec(&self) -> ModelSpec {
        self.model.to_spec()
    }

    pub fn link_budget(&self) -> LinkBudget {
        self.link.to_budget()
    }

    /// Cox parameters of the model, or a configuration error for other
    /// models.
    pub fn cox_params(&self) -> Result<CoxParams> {
        match self.model {
            ModelConfig::Cox { lambda, mu } => CoxParams::new(lambda, mu),
            _ => Err(Error::Config("this command needs model.kind = \"cox\"".into())),
        }
    }

    pub fn sim_plan(&self) -> Result<SimPlan> {
        let mut plan = SimPlan::new(self.model_spec(), self.geometry()?);
        plan.link = self.link_budget();
        plan.thresholds_db = self.run.thresholds_db.clone();
        plan.replicates = self.run.replicates;
        plan.master_seed = self.run.seed;
        plan.observer_latitude = self.run.latitude_deg.to_radians();
        plan.ci_level = self.run.ci_level;
        Ok(plan)
    }

    /// Checks every section against the preconditions of the modules that
    /// consume it.
    pub fn validate(&self) -> Result<()> {
        self.geometry()?;
        self.model_spec().validate()?;
        self.link_budget().validate()?;
        self.quadrature.validate()?;
        if !(-90.0..=90.0).contains(&self.run.latitude_deg) {
            return Err(Error::Config(format!("latitude_deg = {} is outside [-90, 90]", self.run.latitude_deg)));
        }
        if self.sweep.lambda.iter().chain(&self.sweep.mu).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config("sweep values must be finite and non-negative".into()));
        }
        self.sim_plan()?.validate()
    }
}

fn parse_table(text: &str) -> Result<toml::Table> {
    text.parse::<toml::Table>().map_err(|e| Error::Config(e.to_string()))
}

/// Recursively overlays `top` on `base`; arrays and scalars are replaced.
fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Applies `section.key=value`, parsing `value` as a TOML value and falling
/// back to a bare string.
fn apply_set(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {assignment:?} is not of the form key.path=value")))?;
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let keys: Vec<&str> = path.trim().split('.').collect();
    let (last, parents) = keys.split_last().expect("split yields at least one item");
    let mut cur = table;
    for k in parents {
        let entry = cur.entry(k.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override {assignment:?}: {k} is not a section")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_parse_and_validate() {
        for name in PROFILES {
            let c = RunConfig::profile(name).unwrap();
            c.validate().unwrap();
        }
        let t = RunConfig::profile("table1").unwrap();
        assert_eq!(t.cox_params().unwrap(), CoxParams { lambda: 30.0, mu: 30.0 });
        assert_eq!(t.geometry().unwrap().r_s(), 6950.0);
        let lb = t.link_budget();
        assert!((lb.eirp_dbw() - 50.0).abs() < 1e-12);
        let s = RunConfig::profile("starlink-2a").unwrap();
        let from_file = s.model_spec();
        assert_eq!(from_file, ModelSpec::Shells { shells: ShellSpec::starlink_2a() });
        assert!(RunConfig::profile("nope").is_err());
    }

    #[test]
    fn round_trip() {
        for name in PROFILES {
            let c = RunConfig::profile(name).unwrap();
            let text = c.to_toml_string().unwrap();
            assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
        }
        let mut c = RunConfig::default();
        c.model = ModelConfig::Regular { n_orbits: 12, inclination_deg: 53.0, sats_per_orbit: 20 };
        c.run.out = Some("x.csv".into());
        c.sweep.lambda = vec![5.0, 10.0];
        let text = c.to_toml_string().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn layering_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("c.toml");
        std::fs::write(&file, "[model]\nkind = \"cox\"\nlambda = 50.0\nmu = 50.0\n[run]\nseed = 9\n").unwrap();
        let sets = vec!["run.seed=11".to_string(), "link.noise=true".to_string(), "sweep.mu=[1.0, 2.0]".to_string()];
        let c = RunConfig::layered(Some("table1"), Some(&file), &sets).unwrap();
        assert_eq!(c.cox_params().unwrap(), CoxParams { lambda: 50.0, mu: 50.0 });
        assert_eq!(c.run.seed, 11);
        assert!(c.link.noise);
        assert_eq!(c.sweep.mu, vec![1.0, 2.0]);
        // The profile's grid survives the file layer.
        assert_eq!(c.run.thresholds_db.len(), 16);
        assert!(RunConfig::layered(None, None, &["bogus".into()]).is_err());
        assert!(RunConfig::layered(None, None, &["run.nonsense=1".into()]).is_err());
    }

    #[test]
    fn validation_catches_bad_sections() {
        let mut c = RunConfig::default();
        c.geometry.altitude_km = -1.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.run.latitude_deg = 100.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.model = ModelConfig::Cox { lambda: -1.0, mu: 2.0 };
        assert!(c.validate().is_err());
        let mut c = RunConfig::default();
        c.run.thresholds_db = vec![3.0, 1.0];
        assert!(c.validate().is_err());
    }
}
