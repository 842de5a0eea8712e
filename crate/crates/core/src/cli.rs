//! The `satcox` command line.
//!
//! Exit codes: 0 success, 1 computation error (including a failed
//! `--verify`), 2 usage or configuration error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytic::{
    coverage_curve, coverage_nakagami, ergodic_rate, mean_visible, nearest_ccdf, nosat_probability, visible_fraction,
    CoverageCurve,
};
use crate::config::{ModelConfig, RunConfig};
use crate::constellation::CoxParams;
use crate::error::Error;
use crate::export::{self, curve_rows, Manifest};
use crate::fitting::{fit_cox, fit_geometry, measure_local, FitReport, LocalMoments};
use crate::montecarlo::{self, EstimateWithCI, SimPlan};

#[derive(Debug, Parser)]
#[command(name = "satcox", version, about = "Cox point-process model of satellite constellations")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// TOML configuration file, layered over the profile.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Bundled profile: table1 or starlink-2a.
    #[arg(long, global = true)]
    pub profile: Option<String>,
    /// Override a configuration value, e.g. `--set link.gain_db=25`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub replicates: Option<u64>,
    /// Output file; standard output when absent. A manifest is written next
    /// to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Cross-check analytic values against simulation; exit 1 on mismatch.
    #[arg(long, global = true)]
    pub verify: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    /// Satellite count of the binomial model.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Orbit altitude, km.
    #[arg(long, global = true)]
    pub altitude: Option<f64>,
    /// Observer latitude for non-isotropic models, degrees.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub latitude: Option<f64>,
    /// Threshold grid in dB: `start:stop:step` or a comma-separated list.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub thresholds: Option<String>,
    #[arg(long, global = true)]
    pub with_noise: bool,
    /// Nakagami shape.
    #[arg(long, global = true)]
    pub nakagami_m: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Cox,
    Binomial,
    Shells,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// No-satellite probability over a (lambda, mu) grid.
    Nosat {
        /// Comma-separated lambda values.
        #[arg(long)]
        lambdas: Option<String>,
        /// Comma-separated mu values.
        #[arg(long)]
        mus: Option<String>,
    },
    /// Mean number of visible satellites.
    MeanVisible,
    /// CCDF of the distance to the nearest satellite.
    NearestCcdf,
    /// SIR/SINR coverage curve (simulated for non-Cox models).
    Coverage {
        /// Report the ergodic rate instead of the curve.
        #[arg(long)]
        rate: bool,
    },
    /// Ergodic rate, bits/s/Hz.
    Rate,
    /// Simulated coverage curve.
    Simulate,
    /// Fit Cox parameters to the configured constellation.
    Fit {
        /// Fit to these mean visible satellites instead of measuring.
        #[arg(long, requires = "target_orbits")]
        target_sats: Option<f64>,
        #[arg(long, requires = "target_sats")]
        target_orbits: Option<f64>,
        /// Also write side-by-side coverage curves of target and fit here.
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Snapshot of one sampled constellation.
    Sample,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Nosat { .. } => "nosat",
            Command::MeanVisible => "mean-visible",
            Command::NearestCcdf => "nearest-ccdf",
            Command::Coverage { .. } => "coverage",
            Command::Rate => "rate",
            Command::Simulate => "simulate",
            Command::Fit { .. } => "fit",
            Command::Sample => "sample",
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Compute(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Compute(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::InvalidParameter(_) | Error::Domain { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs the command line and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let outcome = match cli.common.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli, &mut out, &mut err)),
            Err(e) => Err(Failure::Usage(e.to_string())),
        },
        None => execute(&cli, &mut out, &mut err),
    };
    let _ = stdout.write_all(&out);
    let _ = stderr.write_all(&err);
    match outcome {
        Ok(()) => 0,
        Err(f) => {
            let (Failure::Usage(m) | Failure::Compute(m)) = &f;
            let _ = writeln!(stderr, "satcox: {m}");
            f.code()
        }
    }
}

/// Resolves the configuration from profile, file, overrides and flags.
pub fn resolve_config(c: &Common) -> crate::Result<RunConfig> {
    let profile = c.profile.as_deref().or(if c.config.is_none() { Some("table1") } else { None });
    let mut cfg = RunConfig::layered(profile, c.config.as_deref(), &c.sets)?;
    if let Some(s) = c.seed {
        cfg.run.seed = s;
    }
    if let Some(r) = c.replicates {
        cfg.run.replicates = r;
    }
    if let Some(o) = &c.out {
        cfg.run.out = Some(o.clone());
    }
    if let Some(kind) = c.model {
        cfg.model = match kind {
            ModelKind::Cox => {
                let (l, m) = match cfg.model {
                    ModelConfig::Cox { lambda, mu } => (lambda, mu),
                    _ => (30.0, 30.0),
                };
                ModelConfig::Cox { lambda: l, mu: m }
            }
            ModelKind::Binomial => ModelConfig::Binomial { n: 300 },
            ModelKind::Shells => match &cfg.model {
                ModelConfig::Shells { .. } => cfg.model.clone(),
                _ => RunConfig::profile("starlink-2a")?.model,
            },
        };
    }
    match &mut cfg.model {
        ModelConfig::Cox { lambda, mu } => {
            if let Some(l) = c.lambda {
                *lambda = l;
            }
            if let Some(m) = c.mu {
                *mu = m;
            }
        }
        ModelConfig::Binomial { n } => {
            if let Some(v) = c.n {
                *n = v;
            }
        }
        _ => {}
    }
    if let Some(a) = c.altitude {
        cfg.geometry.altitude_km = a;
    }
    if let Some(l) = c.latitude {
        cfg.run.latitude_deg = l;
    }
    if let Some(t) = &c.thresholds {
        cfg.run.thresholds_db = parse_grid(t)?;
    }
    if c.with_noise {
        cfg.link.noise = true;
    }
    if let Some(m) = c.nakagami_m {
        cfg.link.nakagami_m = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `start:stop:step` (inclusive) or `a,b,c`.
pub fn parse_grid(s: &str) -> crate::Result<Vec<f64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let bad = || Error::Config(format!("cannot parse grid {s:?}"));
    if s.contains(':') {
        let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
        let [a, b, h] = parts[..] else { return Err(bad()) };
        if !(h > 0.0) || b < a {
            return Err(bad());
        }
        let n = ((b - a) / h + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| a + i as f64 * h).collect());
    }
    s.split(',').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect()
}

fn execute(cli: &Cli, stdout: &mut Vec<u8>, stderr: &mut Vec<u8>) -> CliResult<()> {
    let cfg = resolve_config(&cli.common)?;
    let start = Instant::now();
    let fmt = cli.common.format;
    let (doc, replicates) = match &cli.command {
        Command::Nosat { lambdas, mus } => cmd_nosat(&cfg, lambdas.as_deref(), mus.as_deref(), cli.common.verify)?,
        Command::MeanVisible => cmd_mean_visible(&cfg, cli.common.verify)?,
        Command::NearestCcdf => cmd_nearest_ccdf(&cfg, cli.common.verify)?,
        Command::Coverage { rate: true } | Command::Rate => cmd_rate(&cfg, cli.common.verify)?,
        Command::Coverage { rate: false } => cmd_coverage(&cfg, cli.common.verify)?,
        Command::Simulate => cmd_simulate(&cfg)?,
        Command::Fit { target_sats, target_orbits, compare } => {
            let target = target_sats.zip(*target_orbits);
            cmd_fit(&cfg, target, compare.as_deref(), stderr)?
        }
        Command::Sample => cmd_sample(&cfg)?,
    };
    let text = doc.render(fmt)?;
    match &cfg.run.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display())))?;
            let m = Manifest::new(cli.command.name(), cfg.run.seed, replicates, start.elapsed().as_secs_f64(), &cfg);
            export::write_manifest(path, &m)?;
        }
        None => stdout.write_all(text.as_bytes()).map_err(|e| Failure::Compute(e.to_string()))?,
    }
    Ok(())
}

/// Command output, renderable as CSV or JSON.
enum Doc {
    Table(Box<dyn Fn(Format) -> crate::Result<String>>),
}

impl Doc {
    fn rows<T: Serialize + 'static>(rows: Vec<T>, header: &'static str) -> Self {
        Doc::Table(Box::new(move |fmt| match fmt {
            Format::Csv => {
                if rows.is_empty() {
                    return Ok(format!("{header}\n"));
                }
                let mut buf = Vec::new();
                export::write_rows(&mut buf, &rows)?;
                Ok(String::from_utf8(buf).expect("csv output is UTF-8"))
            }
            Format::Json => Ok(serde_json::to_string_pretty(&rows)? + "\n"),
        }))
    }

    fn object<T: Serialize + 'static>(value: T) -> Self {
        Doc::Table(Box::new(move |_| Ok(serde_json::to_string_pretty(&value)? + "\n")))
    }

    fn render(&self, fmt: Format) -> CliResult<String> {
        let Doc::Table(f) = self;
        Ok(f(fmt)?)
    }
}

/// Whether an exact value is consistent with a simulated estimate: within
/// three standard errors, or inside the interval when the standard error
/// degenerates.
fn agrees(est: &EstimateWithCI, exact: f64) -> bool {
    est.within_sigmas(exact, 3.0) || (est.ci_low <= exact && exact <= est.ci_high)
}

#[derive(Debug, Serialize)]
struct NosatRow {
    lambda: f64,
    mu: f64,
    analytic: f64,
    empirical: f64,
    ci_low: f64,
    ci_high: f64,
}

fn sweep_values(flag: Option<&str>, from_cfg: &[f64], fallback: f64) -> crate::Result<Vec<f64>> {
    let v = match flag {
        Some(s) => parse_grid(s)?,
        None if !from_cfg.is_empty() => from_cfg.to_vec(),
        None => vec![fallback],
    };
    if v.is_empty() {
        return Err(Error::Config("empty parameter grid".into()));
    }
    Ok(v)
}

fn cmd_nosat(cfg: &RunConfig, lambdas: Option<&str>, mus: Option<&str>, verify: bool) -> CliResult<(Doc, u64)> {
    let base = cfg.cox_params()?;
    let ls = sweep_values(lambdas, &cfg.sweep.lambda, base.lambda)?;
    let ms = sweep_values(mus, &cfg.sweep.mu, base.mu)?;
    let g = cfg.geometry()?;
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for &lambda in &ls {
        for &mu in &ms {
            let p = CoxParams::new(lambda, mu)?;
            let analytic = nosat_probability(p, &g, &cfg.quadrature)?;
            let mut plan = cfg.sim_plan()?;
            plan.model = crate::ModelSpec::Cox(p);
            let e = montecarlo::run_nosat(&plan)?;
            if verify && !agrees(&e, analytic) {
                bad.push(format!("({lambda}, {mu}): analytic {analytic:.6}, empirical {:.6} +/- {:.6}", e.value, e.std_error));
            }
            rows.push(NosatRow { lambda, mu, analytic, empirical: e.value, ci_low: e.ci_low, ci_high: e.ci_high });
        }
    }
    verified(bad)?;
    Ok((Doc::rows(rows, "lambda,mu,analytic,empirical,ci_low,ci_high"), cfg.run.replicates))
}

fn verified(bad: Vec<String>) -> CliResult<()> {
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Failure::Compute(format!("verification failed:\n  {}", bad.join("\n  "))))
    }
}

#[derive(Debug, Serialize)]
struct EstimateRow {
    analytic: Option<f64>,
    empirical: f64,
    std_error: f64,
    ci_low: f64,
    ci_high: f64,
}

fn estimate_row(analytic: Option<f64>, e: &EstimateWithCI) -> EstimateRow {
    EstimateRow { analytic, empirical: e.value, std_error: e.std_error, ci_low: e.ci_low, ci_high: e.ci_high }
}

fn cmd_mean_visible(cfg: &RunConfig, verify: bool) -> CliResult<(Doc, u64)> {
    let g = cfg.geometry()?;
    let analytic = match cfg.model_spec() {
        crate::ModelSpec::Cox(p) => Some(mean_visible(p, &g, &cfg.quadrature)?),
        crate::ModelSpec::Binomial { n } => Some(n as f64 * visible_fraction(&g, &cfg.quadrature)?),
        _ => None,
    };
    let e = montecarlo::run_visible_count(&cfg.sim_plan()?)?;
    if let (true, Some(a)) = (verify, analytic) {
        if !agrees(&e, a) {
            verified(vec![format!("analytic {a:.4}, empirical {:.4} +/- {:.4}", e.value, e.std_error)])?;
        }
    }
    Ok((Doc::rows(vec![estimate_row(analytic, &e)], ""), cfg.run.replicates))
}

#[derive(Debug, Serialize)]
struct CcdfRow {
    distance_km: f64,
    analytic: Option<f64>,
    empirical: f64,
    ci_low: f64,
    ci_high: f64,
}

fn cmd_nearest_ccdf(cfg: &RunConfig, verify: bool) -> CliResult<(Doc, u64)> {
    let g = cfg.geometry()?;
    let distances = if cfg.run.distances_km.is_empty() {
        let (lo, hi) = (g.d_min(), g.d_max());
        (0..=24).map(|i| lo - 50.0 + (hi - lo + 100.0) * i as f64 / 24.0).collect()
    } else {
        cfg.run.distances_km.clone()
    };
    let cox = match cfg.model_spec() {
        crate::ModelSpec::Cox(p) => Some(p),
        _ => None,
    };
    let est = montecarlo::run_nearest_ccdf(&cfg.sim_plan()?, &distances)?;
    let mut rows = Vec::new();
    let mut bad = Vec::new();
    for (&d, e) in distances.iter().zip(&est) {
        let analytic = cox.map(|p| nearest_ccdf(d, p, &g, &cfg.quadrature)).transpose()?;
        if let (true, Some(a)) = (verify, analytic) {
            if !agrees(e, a) {
                bad.push(format!("d = {d:.1} km: analytic {a:.6}, empirical {:.6}", e.value));
            }
        }
        rows.push(CcdfRow { distance_km: d, analytic, empirical: e.value, ci_low: e.ci_low, ci_high: e.ci_high });
    }
    verified(bad)?;
    Ok((Doc::rows(rows, "distance_km,analytic,empirical,ci_low,ci_high"), cfg.run.replicates))
}

fn thresholds(cfg: &RunConfig) -> CliResult<Vec<f64>> {
    if cfg.run.thresholds_db.is_empty() {
        return Err(Failure::Usage("threshold grid is empty".into()));
    }
    Ok(cfg.run.thresholds_db.iter().map(|&d| crate::db_to_linear(d)).collect())
}

/// Analytic curve of a Cox model: exact for Rayleigh fading, hybrid for
/// Nakagami.
fn analytic_curve(cfg: &RunConfig, p: CoxParams) -> CliResult<CoverageCurve> {
    let taus = thresholds(cfg)?;
    let (g, lb) = (cfg.geometry()?, cfg.link_budget());
    if lb.m == 1 {
        return Ok(coverage_curve(&taus, p, &g, &lb, &cfg.quadrature)?);
    }
    if lb.with_noise {
        return Err(Failure::Usage(
            "analytic Nakagami coverage is interference-limited; drop the noise or use `simulate`".into(),
        ));
    }
    let plan = crate::analytic::NakagamiPlan { seed: cfg.run.seed, ci_level: cfg.run.ci_level, ..cfg.nakagami };
    let est = taus
        .iter()
        .map(|&t| coverage_nakagami(t, p, &g, &lb, &plan, &cfg.quadrature))
        .collect::<crate::Result<Vec<_>>>()?;
    Ok(CoverageCurve {
        thresholds: taus,
        values: est.iter().map(|e| e.value).collect(),
        intervals: Some(est.iter().map(|e| (e.ci_low, e.ci_high)).collect()),
    })
}

fn simulated_curve(cfg: &RunConfig) -> CliResult<CoverageCurve> {
    thresholds(cfg)?;
    Ok(montecarlo::run_sinr_ccdf(&cfg.sim_plan()?)?)
}

fn cmd_coverage(cfg: &RunConfig, verify: bool) -> CliResult<(Doc, u64)> {
    let (curve, reps) = match cfg.model_spec() {
        crate::ModelSpec::Cox(p) => {
            let c = analytic_curve(cfg, p)?;
            if verify {
                let sim = simulated_curve(cfg)?;
                let bad: Vec<String> = c
                    .values
                    .iter()
                    .zip(&sim.values)
                    .zip(&cfg.run.thresholds_db)
                    .filter(|((a, s), _)| (*a - *s).abs() > 0.02)
                    .map(|((a, s), d)| format!("{d} dB: analytic {a:.4}, simulated {s:.4}"))
                    .collect();
                verified(bad)?;
            }
            (c, if verify { cfg.run.replicates } else { 0 })
        }
        _ => (simulated_curve(cfg)?, cfg.run.replicates),
    };
    Ok((Doc::rows(curve_rows(&curve), "threshold_db,value,ci_low,ci_high"), reps))
}

fn cmd_simulate(cfg: &RunConfig) -> CliResult<(Doc, u64)> {
    let c = simulated_curve(cfg)?;
    Ok((Doc::rows(curve_rows(&c), "threshold_db,value,ci_low,ci_high"), cfg.run.replicates))
}

#[derive(Debug, Serialize)]
struct RateRow {
    analytic: Option<f64>,
    truncated_at_bits: Option<f64>,
    empirical: f64,
    std_error: f64,
    ci_low: f64,
    ci_high: f64,
}

fn cmd_rate(cfg: &RunConfig, verify: bool) -> CliResult<(Doc, u64)> {
    let lb = cfg.link_budget();
    let analytic = match cfg.model_spec() {
        crate::ModelSpec::Cox(p) if lb.m == 1 => Some(ergodic_rate(p, &cfg.geometry()?, &lb, &cfg.quadrature)?),
        _ => None,
    };
    let e = montecarlo::run_rate(&cfg.sim_plan()?)?;
    if let (true, Some(a)) = (verify, analytic) {
        if !agrees(&e, a.value) {
            verified(vec![format!("analytic {:.4}, empirical {:.4} +/- {:.4}", a.value, e.value, e.std_error)])?;
        }
    }
    let row = RateRow {
        analytic: analytic.map(|a| a.value),
        truncated_at_bits: analytic.map(|a| a.truncated_at),
        empirical: e.value,
        std_error: e.std_error,
        ci_low: e.ci_low,
        ci_high: e.ci_high,
    };
    Ok((Doc::rows(vec![row], ""), cfg.run.replicates))
}

#[derive(Debug, Serialize)]
struct CompareRow {
    threshold_db: f64,
    target: f64,
    target_ci_low: Option<f64>,
    target_ci_high: Option<f64>,
    fitted: f64,
}

fn cmd_fit(
    cfg: &RunConfig,
    target: Option<(f64, f64)>,
    compare: Option<&std::path::Path>,
    stderr: &mut Vec<u8>,
) -> CliResult<(Doc, u64)> {
    let model = cfg.model_spec();
    let g = fit_geometry(&model, &cfg.geometry()?)?;
    let lat = cfg.run.latitude_deg.to_radians();
    let moments = match target {
        Some((s, o)) => LocalMoments::exact(s, o, lat),
        None => measure_local(&model, &g, lat, cfg.run.replicates, cfg.run.seed)?,
    };
    let report: FitReport = fit_cox(&moments, &g, cfg.fit.method, &cfg.quadrature)?;
    let _ = writeln!(
        stderr,
        "fitted lambda = {:.3}, mu = {:.3} ({} iterations)",
        report.params.lambda, report.params.mu, report.iterations
    );
    if let Some(path) = compare {
        let target_curve = simulated_curve(cfg)?;
        let mut fitted_cfg = cfg.clone();
        fitted_cfg.geometry.altitude_km = g.r_a();
        fitted_cfg.model = ModelConfig::Cox { lambda: report.params.lambda, mu: report.params.mu };
        let fitted = analytic_curve(&fitted_cfg, report.params)?;
        let rows: Vec<CompareRow> = curve_rows(&target_curve)
            .into_iter()
            .zip(&fitted.values)
            .map(|(t, &f)| CompareRow {
                threshold_db: t.threshold_db,
                target: t.value,
                target_ci_low: t.ci_low,
                target_ci_high: t.ci_high,
                fitted: f,
            })
            .collect();
        let mut buf = Vec::new();
        export::write_rows(&mut buf, &rows)?;
        fs::write(path, buf).map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display())))?;
    }
    let reps = if target.is_some() { 0 } else { cfg.run.replicates };
    Ok((Doc::object(report), reps))
}

fn cmd_sample(cfg: &RunConfig) -> CliResult<(Doc, u64)> {
    let plan: SimPlan = cfg.sim_plan()?;
    let (c, _) = plan.replicate(0)?;
    let rows = export::snapshot_rows(&c);
    Ok((Doc::rows(rows, "orbit_id,theta_rad,phi_rad,omega_rad,x_km,y_km,z_km"), 1))
}
