//! Ergodic rate from the coverage curve, against the simulated mean of
//! log2(1 + SINR).

use satcox::analytic::{ergodic_rate, RATE_CAP_BITS};
use satcox::montecarlo::run_rate;
use satcox::{CoxParams, GeometryParams, LinkBudget, ModelSpec, QuadratureSpec, SimPlan};

fn main() -> satcox::Result<()> {
    let g = GeometryParams::table1();
    let spec = QuadratureSpec::default();
    println!("rates capped at {RATE_CAP_BITS} bits/s/Hz (a lone visible satellite has infinite SIR)");
    for noise in [false, true] {
        let lb = LinkBudget { with_noise: noise, ..LinkBudget::default() };
        for (l, m) in [(10.0, 10.0), (30.0, 30.0), (50.0, 50.0)] {
            let p = CoxParams::new(l, m)?;
            let a = ergodic_rate(p, &g, &lb, &spec)?;
            let mut plan = SimPlan::new(ModelSpec::Cox(p), g);
            plan.link = lb;
            plan.replicates = 20_000;
            let e = run_rate(&plan)?;
            println!(
                "noise {noise:>5}, ({l}, {m}): analytic {:.3}, simulated {:.3} +/- {:.3}",
                a.value,
                e.value,
                e.half_width()
            );
        }
    }
    Ok(())
}
