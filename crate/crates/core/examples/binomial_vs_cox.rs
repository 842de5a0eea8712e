//! 300 satellites at 550 km: the binomial model gives one coverage curve,
//! the Cox model a family of curves as the split into orbits varies.

use satcox::analytic::coverage_curve;
use satcox::montecarlo::run_sinr_ccdf;
use satcox::{db_to_linear, CoxParams, GeometryParams, LinkBudget, ModelSpec, QuadratureSpec, SimPlan};

fn main() -> satcox::Result<()> {
    let g = GeometryParams::table1();
    let lb = LinkBudget::default();
    let db: Vec<f64> = (-10..=20).step_by(5).map(f64::from).collect();
    let taus: Vec<f64> = db.iter().map(|&d| db_to_linear(d)).collect();

    let mut plan = SimPlan::new(ModelSpec::Binomial { n: 300 }, g);
    plan.thresholds_db = db.clone();
    plan.replicates = 50_000;
    let bin = run_sinr_ccdf(&plan)?;

    let splits = [3.0, 10.0, 30.0, 100.0, 300.0];
    let cox = splits
        .iter()
        .map(|&l| coverage_curve(&taus, CoxParams::new(l, 300.0 / l)?, &g, &lb, &QuadratureSpec::default()))
        .collect::<satcox::Result<Vec<_>>>()?;

    print!("{:>6} {:>9}", "tau_dB", "binomial");
    for l in splits {
        print!(" {:>9}", format!("l={l}"));
    }
    println!();
    for (i, d) in db.iter().enumerate() {
        print!("{d:>6} {:>9.4}", bin.values[i]);
        for c in &cox {
            print!(" {:>9.4}", c.values[i]);
        }
        println!();
    }
    Ok(())
}
