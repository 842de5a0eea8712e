//! Complete exponential Bell polynomials.
//!
//! `d^n/ds^n exp(G(s)) = exp(G) B_n(G', G'', ..., G^(n))`.

/// `B_0, ..., B_n` evaluated at `x = (x_1, ..., x_n)`.
///
/// Uses `B_{k+1} = sum_{i=0}^{k} C(k, i) B_{k-i} x_{i+1}`.
pub fn bell_polynomials(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut b = Vec::with_capacity(n + 1);
    b.push(1.0);
    for k in 0..n {
        let mut binom = 1.0;
        let mut s = 0.0;
        for i in 0..=k {
            s += binom * b[k - i] * x[i];
            binom = binom * (k - i) as f64 / (i + 1) as f64;
        }
        b.push(s);
    }
    b
}

/// `B_n(x_1, ..., x_n)` with `n = x.len()`.
pub fn complete_bell(x: &[f64]) -> f64 {
    *bell_polynomials(x).last().expect("B_0 is always present")
}
