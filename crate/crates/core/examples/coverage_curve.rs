//! Rayleigh SIR coverage of the Cox model with the Table 1 link budget,
//! analytic against simulation, written as a curve CSV.
//!
//! `cargo run --release --example coverage_curve [replicates]`

use std::time::Instant;

use satcox::analytic::{coverage_curve, coverage_with_noise};
use satcox::export::write_curve_csv;
use satcox::montecarlo::run_sinr_ccdf;
use satcox::{db_to_linear, CoxParams, GeometryParams, LinkBudget, ModelSpec, QuadratureSpec, SimPlan};

fn main() -> satcox::Result<()> {
    let replicates: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20_000);
    let g = GeometryParams::table1();
    let lb = LinkBudget { with_noise: true, ..LinkBudget::default() };
    let spec = QuadratureSpec::default();
    let db: Vec<f64> = (-10..=20).step_by(2).map(f64::from).collect();
    let taus: Vec<f64> = db.iter().map(|&d| db_to_linear(d)).collect();

    for (l, m) in [(50.0, 50.0), (100.0, 50.0), (50.0, 100.0)] {
        let p = CoxParams::new(l, m)?;
        let t0 = Instant::now();
        let at0 = coverage_with_noise(1.0, p, &g, &lb, &spec)?;
        println!("lambda={l} mu={m}: P(SINR > 0 dB) = {at0:.4} ({:.2?})", t0.elapsed());
    }

    let p = CoxParams::new(50.0, 50.0)?;
    let t0 = Instant::now();
    let exact = coverage_curve(&taus, p, &g, &lb, &spec)?;
    println!("analytic curve: {:.2?}", t0.elapsed());

    let mut plan = SimPlan::new(ModelSpec::Cox(p), g);
    plan.link = lb;
    plan.thresholds_db = db.clone();
    plan.replicates = replicates;
    let t0 = Instant::now();
    let sim = run_sinr_ccdf(&plan)?;
    println!("simulated curve ({replicates} replicates): {:.2?}", t0.elapsed());

    println!("{:>8} {:>9} {:>9}", "tau_dB", "analytic", "sim");
    let mut sup: f64 = 0.0;
    for ((d, a), s) in db.iter().zip(&exact.values).zip(&sim.values) {
        println!("{d:>8.1} {a:>9.4} {s:>9.4}");
        sup = sup.max((a - s).abs());
    }
    println!("sup |analytic - sim| = {sup:.4}");

    let out = std::env::temp_dir().join("satcox_coverage_sim.csv");
    write_curve_csv(&out, &sim)?;
    println!("wrote {}", out.display());
    Ok(())
}
