//! Orbit-sphere geometry: visibility limits, cap angles and the arc of an
//! orbit inside a distance cap.

use satcox::geometry::{
    cap_angle_of_distance, distance_of_cap_angle, distance_to_typical, interference_angle_bounds, orbit_cap_half_angle,
};
use satcox::GeometryParams;

fn main() -> satcox::Result<()> {
    for alt in [525.0, 550.0, 1100.0] {
        let g = GeometryParams::new(6371.0, alt)?;
        println!(
            "altitude {alt:>6} km: d_min {:.0} km, d_max {:.0} km, cap angle {:.2} deg, cap area fraction {:.5}",
            g.d_min(),
            g.d_max(),
            g.phi_bar().to_degrees(),
            g.cap_area_fraction()
        );
    }

    let g = GeometryParams::table1();
    let d = 1500.0;
    let xi = cap_angle_of_distance(d, &g)?;
    println!("\ndistance {d} km <-> cap angle {:.4} rad <-> {:.3} km", xi, distance_of_cap_angle(xi, &g));

    println!("\narc of an orbit inside the visible cap, by inclination:");
    for inc_deg in [90.0f64, 80.0, 75.0, 70.0] {
        let phi = inc_deg.to_radians();
        let half = orbit_cap_half_angle(g.phi_bar(), phi);
        println!("  inclination {inc_deg:>4}: half-angle {:.2} deg", half.to_degrees());
    }

    let colat = 0.05;
    let (w1, w2) = interference_angle_bounds(colat, 900.0, &g)?;
    println!("\ninterferers farther than 900 km on an orbit at co-latitude {colat}: apex angle in ({w1:.4}, {w2:.4}]");
    println!("distance at omega = pi/2 on a polar orbit: {:.1} km", distance_to_typical(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2, &g));
    Ok(())
}
