//! Draws one pattern from each constellation model and writes a snapshot
//! CSV for plotting.

use satcox::constellation::{build_shells, build_walker, sample_binomial, sample_cox, visible_satellites};
use satcox::export::write_snapshot_csv;
use satcox::{CoxParams, GeometryParams, Observer, ShellSpec};

fn main() -> satcox::Result<()> {
    let g = GeometryParams::table1();
    let seed = 7;
    let patterns = [
        ("cox", sample_cox(CoxParams::new(30.0, 40.0)?, &g, seed)),
        ("binomial", sample_binomial(1200, &g, seed)),
        ("walker", build_walker(30, 40, &g, seed)?),
        ("starlink-2a", build_shells(&ShellSpec::starlink_2a(), g.r_e(), seed)?),
    ];
    let observer = Observer::at_latitude(30f64.to_radians());
    for (name, c) in &patterns {
        let vis = visible_satellites(c, &observer);
        println!(
            "{name:>12}: {:>3} orbits, {:>4} satellites, {:>3} visible from 30 deg, nearest {}",
            c.orbits().len(),
            c.satellite_count(),
            vis.len(),
            vis.first().map_or("-".to_string(), |v| format!("{:.0} km", v.distance)),
        );
    }
    let out = std::env::temp_dir().join("satcox_cox_snapshot.csv");
    write_snapshot_csv(&out, &patterns[0].1)?;
    println!("wrote {}", out.display());
    Ok(())
}
