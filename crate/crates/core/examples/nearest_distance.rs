//! Distribution of the distance to the nearest visible satellite.

use satcox::analytic::{nearest_ccdf, nosat_probability};
use satcox::montecarlo::run_nearest_ccdf;
use satcox::{CoxParams, GeometryParams, ModelSpec, QuadratureSpec, SimPlan};

fn main() -> satcox::Result<()> {
    let g = GeometryParams::table1();
    let p = CoxParams::new(10.0, 10.0)?;
    let spec = QuadratureSpec::default();
    let distances: Vec<f64> = (0..=12).map(|i| g.d_min() + (g.d_max() - g.d_min()) * i as f64 / 12.0).collect();
    let mut plan = SimPlan::new(ModelSpec::Cox(p), g);
    plan.replicates = 50_000;
    let sim = run_nearest_ccdf(&plan, &distances)?;
    println!("{:>9} {:>9} {:>9}", "d_km", "P(D > d)", "sim");
    for (d, e) in distances.iter().zip(&sim) {
        println!("{d:>9.1} {:>9.4} {:>9.4}", nearest_ccdf(*d, p, &g, &spec)?, e.value);
    }
    println!("no-satellite probability: {:.4}", nosat_probability(p, &g, &spec)?);
    Ok(())
}
