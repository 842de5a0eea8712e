//! Coverage under Nakagami-m fading: the hybrid evaluator (orbit sets
//! sampled, everything else integrated) against full simulation.

use satcox::analytic::{coverage_nakagami, NakagamiPlan};
use satcox::montecarlo::run_sinr_ccdf;
use satcox::{db_to_linear, CoxParams, GeometryParams, LinkBudget, ModelSpec, QuadratureSpec, SimPlan};

fn main() -> satcox::Result<()> {
    let g = GeometryParams::table1();
    let p = CoxParams::new(10.0, 10.0)?;
    let db = [-5.0, 0.0, 5.0, 10.0, 15.0];
    let spec = QuadratureSpec::default();
    for m in [1u32, 2, 4] {
        let lb = LinkBudget::default().with_m(m);
        let mut plan = SimPlan::new(ModelSpec::Cox(p), g);
        plan.link = lb;
        plan.thresholds_db = db.to_vec();
        plan.replicates = 50_000;
        let sim = run_sinr_ccdf(&plan)?;
        println!("m = {m}");
        for (i, d) in db.iter().enumerate() {
            let h = coverage_nakagami(db_to_linear(*d), p, &g, &lb, &NakagamiPlan::default(), &spec)?;
            println!("  {d:>5} dB: hybrid {:.4} +/- {:.4}, simulated {:.4}", h.value, h.half_width(), sim.values[i]);
        }
    }
    Ok(())
}
