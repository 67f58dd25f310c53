//! Nonnegative reals represented by their natural logarithm.
//!
//! The truncation-energy recurrence drives E_k through double-exponential
//! decay (or growth); E_k underflows f64 near k ≈ 40 while its logarithm
//! stays perfectly representable. All recurrence iteration and the
//! induction bound work in this domain.

/// log(exp(a) + exp(b)) without leaving the log domain.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// k-th power in log domain: log(x^p) for x = exp(a).
#[inline]
pub fn log_pow(a: f64, p: f64) -> f64 {
    a * p
}
