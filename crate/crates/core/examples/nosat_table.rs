//! Probability that no satellite is visible: closed form against
//! simulation, plus the regime where satellites are dense on every orbit.

use satcox::analytic::{nosat_asymptotic, nosat_probability};
use satcox::montecarlo::run_nosat;
use satcox::{CoxParams, GeometryParams, ModelSpec, QuadratureSpec, SimPlan};

fn main() -> satcox::Result<()> {
    let g = GeometryParams::new(6400.0, 550.0)?;
    let spec = QuadratureSpec::default();
    println!("{:>6} {:>5} {:>9} {:>9} {:>21}", "lambda", "mu", "analytic", "sim", "95% CI");
    for (l, m) in [(10.0, 10.0), (20.0, 5.0), (100.0, 1.0), (10.0, 20.0), (20.0, 10.0), (200.0, 1.0)] {
        let p = CoxParams::new(l, m)?;
        let exact = nosat_probability(p, &g, &spec)?;
        let mut plan = SimPlan::new(ModelSpec::Cox(p), g);
        plan.replicates = 100_000;
        let e = run_nosat(&plan)?;
        println!("{l:>6} {m:>5} {exact:>9.4} {:>9.4} [{:.4}, {:.4}]", e.value, e.ci_low, e.ci_high);
    }

    let g = GeometryParams::from_orbit_radius(6400.0, 7000.0)?;
    println!("\nmu = 1e4, r_s = 7000 km:");
    for l in [5.0, 20.0, 52.0] {
        let exact = nosat_probability(CoxParams::new(l, 1e4)?, &g, &spec)?;
        println!("  lambda {l:>4}: {exact:.3e}  (limit exp(-lambda sin phibar) = {:.3e})", nosat_asymptotic(l, &g));
    }
    Ok(())
}
