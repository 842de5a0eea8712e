//! Small statistics helpers: Kolmogorov–Smirnov tests and normal quantiles.

use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided standard normal quantile `z` with `P(|Z| <= z) = level`.
pub fn normal_two_sided(level: f64) -> f64 {
    let n = Normal::standard();
    n.inverse_cdf(0.5 + level / 2.0)
}

/// Asymptotic Kolmogorov survival function `P(K > x)`.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 0.3 {
        // The alternating series converges slowly here; the value is 1 to
        // double precision.
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic critical value of the one-sample KS statistic at level `alpha`.
pub fn kolmogorov_critical(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// One-sample KS statistic of `xs` against the continuous CDF `cdf`. Sorts
/// `xs` in place.
pub fn ks_one_sample<F: Fn(f64) -> f64>(xs: &mut [f64], cdf: F) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Two-sample KS test. Returns the statistic and its asymptotic p-value.
///
/// Infinite values (e.g. "no satellite visible" encoded as `+inf`) are
/// ordinary sample points that tie with each other.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    if na == 0 || nb == 0 {
        return (0.0, 1.0);
    }
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = if a[i].total_cmp(&b[j]).is_le() { a[i] } else { b[j] };
        while i < na && a[i] == x {
            i += 1;
        }
        while j < nb && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let sn = ne.sqrt();
    let p = kolmogorov_sf((sn + 0.12 + 0.11 / sn) * d);
    (d, p)
}
