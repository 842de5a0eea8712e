//! Adaptive Gauss–Kronrod quadrature.
//!
//! Globally adaptive 10/21-point Gauss–Kronrod with the QUADPACK error
//! heuristic: the interval with the largest error estimate is bisected until
//! the summed error meets `max(abs_tol, rel_tol * |I|)`. Integrable endpoint
//! singularities are the caller's job (substitute them away first).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of bisections applied to any one piece of the range.
    pub max_depth: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { abs_tol: 1e-8, rel_tol: 1e-6, max_depth: 30 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::invalid("quadrature tolerances must be positive"));
        }
        if self.max_depth == 0 {
            return Err(Error::invalid("quadrature max_depth must be at least 1"));
        }
        Ok(())
    }

    /// Same spec with both tolerances divided by `factor`, for integrals
    /// nested inside another.
    pub fn tightened(&self, factor: f64) -> Self {
        Self { abs_tol: self.abs_tol / factor, rel_tol: self.rel_tol / factor, ..*self }
    }
}

/// Hard cap on the number of live subintervals.
const MAX_INTERVALS: usize = 4000;

const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077208640335013,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

/// Weights of the embedded 10-point Gauss rule, at XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut resk = fc * WGK[10];
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - reskh).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
    }
    let value = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let round_off = 50.0 * f64::EPSILON * resabs;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(round_off);
    }
    if !value.is_finite() || !err.is_finite() {
        return Err(Error::Quadrature { estimate: value, error: err });
    }
    Ok((value, err))
}

/// Integrates `f` over `[a, b]` to the tolerances in `spec`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), a, b, spec)
}

/// [`integrate`] for integrands that can themselves fail, e.g. because they
/// contain an inner quadrature.
pub fn try_integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate_with_breaks(f, a, b, &[], spec)
}

/// [`try_integrate`] with the range pre-split at `breaks`, for integrands
/// with known kinks. Breaks outside `(a, b)` are ignored.
pub fn try_integrate_with_breaks<F>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::invalid(format!("integration range [{a}, {b}] is not a finite interval")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut pieces = Vec::with_capacity(16);
    let mut lo = a;
    for hi in cuts.into_iter().chain(std::iter::once(b)) {
        let (value, error) = gk21(&mut f, lo, hi)?;
        pieces.push(Piece { a: lo, b: hi, value, error, depth: 0 });
        lo = hi;
    }

    loop {
        let total: f64 = pieces.iter().map(|p| p.value).sum();
        let error: f64 = pieces.iter().map(|p| p.error).sum();
        let target = spec.abs_tol.max(spec.rel_tol * total.abs());
        if error <= target {
            return Ok(total);
        }
        let worst = pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| p.depth < spec.max_depth)
            .max_by(|(_, x), (_, y)| x.error.total_cmp(&y.error))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            return Err(Error::Quadrature { estimate: total, error });
        };
        if pieces.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature { estimate: total, error });
        }
        let p = pieces.swap_remove(i);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Interval no longer representable; keep it but stop refining it.
            pieces.push(Piece { depth: spec.max_depth, ..p });
            continue;
        }
        let (v1, e1) = gk21(&mut f, p.a, mid)?;
        let (v2, e2) = gk21(&mut f, mid, p.b)?;
        pieces.push(Piece { a: p.a, b: mid, value: v1, error: e1, depth: p.depth + 1 });
        pieces.push(Piece { a: mid, b: p.b, value: v2, error: e2, depth: p.depth + 1 });
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
