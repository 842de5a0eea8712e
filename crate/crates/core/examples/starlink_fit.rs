//! Moment-matched Cox approximation of the Starlink 2A plan at 0 and 30
//! degrees latitude, with the SIR coverage of both.
//!
//! `cargo run --release --example starlink_fit [replicates]`

use satcox::analytic::coverage_curve;
use satcox::config::RunConfig;
use satcox::fitting::{fit_cox, fit_geometry, measure_local, FitMethod};
use satcox::montecarlo::run_sinr_ccdf;
use satcox::{db_to_linear, linear_to_db};

fn main() -> satcox::Result<()> {
    let replicates: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(10_000);
    let cfg = RunConfig::profile("starlink-2a")?;
    let model = cfg.model_spec();
    let g = fit_geometry(&model, &cfg.geometry()?)?;
    let spec = cfg.quadrature;
    let taus: Vec<f64> = cfg.run.thresholds_db.iter().map(|&d| db_to_linear(d)).collect();

    for lat_deg in [0.0f64, 30.0] {
        let m = measure_local(&model, &g, lat_deg.to_radians(), replicates, cfg.run.seed)?;
        println!(
            "latitude {lat_deg}: visible satellites {:.2} (se {:.2}), visible orbits {:.2} (se {:.2})",
            m.mean_visible_sats, m.sats_std_error, m.mean_visible_orbits, m.orbits_std_error
        );
        for method in [FitMethod::OrbitsFirst, FitMethod::Joint] {
            let r = fit_cox(&m, &g, method, &spec)?;
            println!(
                "  {method:?}: lambda {:.1}, mu {:.1} (lambda*mu {:.0}), residuals {:.1e}/{:.1e}, {} iterations",
                r.params.lambda,
                r.params.mu,
                r.params.lambda * r.params.mu,
                r.residual_sats,
                r.residual_orbits,
                r.iterations
            );
        }
        let fit = fit_cox(&m, &g, FitMethod::Joint, &spec)?;

        let mut plan = cfg.sim_plan()?;
        plan.observer_latitude = lat_deg.to_radians();
        plan.replicates = replicates;
        let target = run_sinr_ccdf(&plan)?;
        let cox = coverage_curve(&taus, fit.params, &g, &cfg.link_budget(), &spec)?;
        println!("  {:>7} {:>9} {:>9}", "tau_dB", "starlink", "cox");
        for ((d, s), c) in cfg.run.thresholds_db.iter().zip(&target.values).zip(&cox.values) {
            println!("  {d:>7.1} {s:>9.4} {c:>9.4}");
        }
        if let (Some(a), Some(b)) = (target.threshold_at(0.5), cox.threshold_at(0.5)) {
            println!("  offset at coverage 0.5: {:.2} dB", linear_to_db(b) - linear_to_db(a));
        }
    }
    Ok(())
}
