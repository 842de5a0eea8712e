//! Spherical and orbital geometry shared by the samplers and the analytic
//! evaluators.
//!
//! Conventions: lengths in kilometres, angles in radians. An orbit is the
//! great circle of radius `r_s` with longitude of the ascending node `theta`
//! and inclination `phi`; a satellite on it sits at orbital angle `omega`
//! measured from the node. The typical user is at `n = (0, 0, r_e)`.
//!
//! Several kernels are written in terms of the orbit *co-latitude*
//! `pi/2 - phi`, which is the angular distance between `n` and the orbital
//! plane.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Relative slack accepted on distance arguments before they are treated as
/// out of range. Absorbs rounding in values computed from the same geometry.
const DISTANCE_SLACK: f64 = 1e-9;

/// Earth and orbit radii, with the derived visibility constants.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GeometryParams {
    r_e: f64,
    r_a: f64,
    r_s: f64,
    d_max: f64,
    phi_bar: f64,
}

impl GeometryParams {
    /// Geometry for satellites at altitude `r_a` above an Earth of radius `r_e`.
    pub fn new(r_e: f64, r_a: f64) -> Result<Self> {
        if !(r_e.is_finite() && r_e > 0.0) {
            return Err(Error::invalid(format!("earth radius must be positive, got {r_e}")));
        }
        if !(r_a.is_finite() && r_a > 0.0) {
            return Err(Error::invalid(format!("altitude must be positive, got {r_a}")));
        }
        let r_s = r_e + r_a;
        // r_s^2 - r_e^2 factored to keep d_max^2 + r_e^2 = r_s^2 tight.
        let d_max = (r_a * (r_s + r_e)).sqrt();
        let phi_bar = (r_e / r_s).acos();
        Ok(Self { r_e, r_a, r_s, d_max, phi_bar })
    }

    /// Geometry from the orbit radius instead of the altitude.
    pub fn from_orbit_radius(r_e: f64, r_s: f64) -> Result<Self> {
        Self::new(r_e, r_s - r_e)
    }

    /// Earth radius 6400 km, orbit radius 6950 km.
    pub fn table1() -> Self {
        Self::new(6400.0, 550.0).expect("static geometry is valid")
    }

    pub fn r_e(&self) -> f64 {
        self.r_e
    }

    pub fn r_a(&self) -> f64 {
        self.r_a
    }

    pub fn r_s(&self) -> f64 {
        self.r_s
    }

    /// Largest distance at which a satellite is above the horizon.
    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    /// Polar angle of the rim of the visibility cap, `acos(r_e / r_s)`.
    pub fn phi_bar(&self) -> f64 {
        self.phi_bar
    }

    /// Smallest possible user-satellite distance (satellite at zenith).
    pub fn d_min(&self) -> f64 {
        self.r_a
    }

    /// Fraction of the orbit sphere's area that is visible from one point
    /// on the Earth, `(1 - r_e / r_s) / 2`.
    pub fn cap_area_fraction(&self) -> f64 {
        0.5 * self.r_a / self.r_s
    }
}

/// A point in Earth-centred Cartesian coordinates, km.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(&self, other: &Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Point on the Earth's surface at the given latitude and longitude.
    pub fn on_surface(r_e: f64, latitude: f64, longitude: f64) -> Self {
        let (slat, clat) = latitude.sin_cos();
        let (slon, clon) = longitude.sin_cos();
        Self::new(r_e * clat * clon, r_e * clat * slon, r_e * slat)
    }
}

/// Precomputed rotation for one orbit, mapping an orbital angle to a point.
///
/// The in-plane point `(r cos w, r sin w, 0)` is tilted by the inclination
/// about the x axis (the line of nodes) and then turned by the longitude
/// about the polar axis.
#[derive(Debug, Clone, Copy)]
pub struct OrbitFrame {
    radius: f64,
    cos_theta: f64,
    sin_theta: f64,
    cos_phi: f64,
    sin_phi: f64,
}

impl OrbitFrame {
    pub fn new(theta: f64, phi: f64, radius: f64) -> Self {
        let (sin_theta, cos_theta) = theta.sin_cos();
        let (sin_phi, cos_phi) = phi.sin_cos();
        Self { radius, cos_theta, sin_theta, cos_phi, sin_phi }
    }

    pub fn position(&self, omega: f64) -> Point3 {
        let (s, c) = omega.sin_cos();
        let x = self.radius * c;
        let y = self.radius * s * self.cos_phi;
        let z = self.radius * s * self.sin_phi;
        Point3::new(
            x * self.cos_theta - y * self.sin_theta,
            x * self.sin_theta + y * self.cos_theta,
            z,
        )
    }

    /// Unit normal of the orbital plane.
    pub fn normal(&self) -> Point3 {
        Point3::new(self.sin_theta * self.sin_phi, -self.cos_theta * self.sin_phi, self.cos_phi)
    }
}

/// Polar angle of the rim of the cap `C_d`: the set of points of the orbit
/// sphere within distance `d` of the typical user.
pub fn cap_angle_of_distance(d: f64, g: &GeometryParams) -> Result<f64> {
    let (lo, hi) = (g.d_min(), g.d_max());
    let slack = DISTANCE_SLACK * hi;
    if !(d >= lo - slack && d <= hi + slack) {
        return Err(Error::Domain { name: "distance", value: d, lo, hi });
    }
    Ok(cap_angle_unchecked(d.clamp(lo, hi), g))
}

/// Law of cosines on the triangle (centre, user, satellite).
pub(crate) fn cap_angle_unchecked(d: f64, g: &GeometryParams) -> f64 {
    let (rs, re) = (g.r_s(), g.r_e());
    // (rs^2 + re^2 - d^2) / (2 rs re) = 1 - (d^2 - ra^2) / (2 rs re)
    let ra = g.r_a();
    let cos_xi = 1.0 - (d - ra) * (d + ra) / (2.0 * rs * re);
    cos_xi.clamp(-1.0, 1.0).acos()
}

/// Inverse of [`cap_angle_of_distance`].
pub fn distance_of_cap_angle(xi: f64, g: &GeometryParams) -> f64 {
    let (rs, re) = (g.r_s(), g.r_e());
    (rs * rs + re * re - 2.0 * rs * re * xi.cos()).max(0.0).sqrt()
}

/// Half the angle subtended at the centre by the arc where the orbit of
/// inclination `phi` crosses a cap of polar angle `xi`.
///
/// The full arc length is `2 r_s` times the returned value. Orbits that miss
/// the cap (`|phi - pi/2| >= xi`) give 0.
pub fn orbit_cap_half_angle(xi: f64, phi: f64) -> f64 {
    orbit_cap_half_angle_colat(xi, FRAC_PI_2 - phi)
}

/// [`orbit_cap_half_angle`] with the orbit given by its co-latitude
/// `pi/2 - phi`.
pub fn orbit_cap_half_angle_colat(xi: f64, colat: f64) -> f64 {
    let c = colat.abs();
    if c >= xi {
        return 0.0;
    }
    // 1 - cos^2(xi) sec^2(c) = sin(xi - c) sin(xi + c) / cos^2(c)
    let num = (xi - c).sin() * (xi + c).sin();
    if num <= 0.0 {
        return 0.0;
    }
    (num.sqrt() / c.cos()).min(1.0).asin()
}

/// Cartesian position of the satellite at orbital angle `omega` on the orbit
/// with longitude `theta` and inclination `phi`.
pub fn satellite_position(theta: f64, phi: f64, omega: f64, g: &GeometryParams) -> Point3 {
    OrbitFrame::new(theta, phi, g.r_s()).position(omega)
}

/// Distance from the typical user `(0, 0, r_e)` to the satellite at orbital
/// angle `omega` on an orbit of inclination `phi`. Independent of the orbit
/// longitude.
pub fn distance_to_typical(phi: f64, omega: f64, g: &GeometryParams) -> f64 {
    let (rs, re) = (g.r_s(), g.r_e());
    let sq = rs * rs - 2.0 * rs * re * omega.sin() * phi.sin() + re * re;
    sq.max(0.0).sqrt()
}

/// Distance to the typical user from the point at angle `w` from the apex of
/// an orbit with co-latitude `colat`.
#[cfg(test)]
pub(crate) fn distance_from_apex(colat: f64, w: f64, g: &GeometryParams) -> f64 {
    let (rs, re) = (g.r_s(), g.r_e());
    (rs * rs - 2.0 * rs * re * w.cos() * colat.cos() + re * re).max(0.0).sqrt()
}

/// Angular limits, measured from the orbit apex, of the satellites that can
/// interfere once the serving satellite is at distance `z`.
///
/// Returns `(omega_1, omega_2)`: satellites with apex angle in
/// `(omega_1, omega_2]` are visible and farther than `z`. `omega_1` is 0 when
/// the orbit does not enter the cap `C_z`; both are 0 when the orbit is never
/// visible.
pub fn interference_angle_bounds(
    phi_colat: f64,
    z: f64,
    g: &GeometryParams,
) -> Result<(f64, f64)> {
    let xi = cap_angle_of_distance(z, g)?;
    let c = phi_colat.abs();
    if c >= g.phi_bar() {
        return Ok((0.0, 0.0));
    }
    let omega_2 = orbit_cap_half_angle_colat(g.phi_bar(), c);
    let omega_1 = orbit_cap_half_angle_colat(xi, c).min(omega_2);
    Ok((omega_1, omega_2))
}

/// Wraps an angle into `[0, period)`.
pub(crate) fn wrap(angle: f64, period: f64) -> f64 {
    let a = angle.rem_euclid(period);
    if a >= period {
        0.0
    } else {
        a
    }
}

/// Recovers `(theta, phi, omega)` for a polar orbit through the point `p`.
///
/// Used to store isolated satellites (the binomial model) as one-satellite
/// orbits. Requires `|p| > 0`.
pub(crate) fn polar_orbit_through(p: &Point3) -> (f64, f64, f64) {
    let rho = p.x.hypot(p.y);
    let mut theta = p.y.atan2(p.x);
    let mut horizontal = rho;
    if theta < 0.0 {
        theta += PI;
        horizontal = -rho;
    }
    if theta >= PI {
        theta -= PI;
        horizontal = -horizontal;
    }
    let omega = wrap(p.z.atan2(horizontal), 2.0 * PI);
    (theta, FRAC_PI_2, omega)
}
