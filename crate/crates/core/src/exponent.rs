//! Exact and asymptotic binomial arithmetic.
//!
//! The central estimate is `C(Cn, dn) ~ (C^C / (d^d (C-d)^(C-d)))^n`, which we
//! track through its natural logarithm so that quantities of the form
//! `base^n` never overflow. Exact big-integer binomials and the Stirling
//! sandwich `sqrt(2*pi) <= n!/(n^(n+1/2) e^-n) <= e` serve as ground truth.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExponentError {
    #[error("entropy_log requires C > 0, got C = {0}")]
    NonPositiveC(f64),
    #[error("entropy_log arguments must be finite, got C = {0}, d = {1}")]
    NonFinite(f64, f64),
    #[error("entropy_log strict mode rejects d > C (d = {d}, C = {c}); the true count is zero")]
    AboveRange { c: f64, d: f64 },
}

/// Natural logarithm of a per-`n` growth base: a quantity `~ exp(n * value)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogBase {
    pub value: f64,
}

impl LogBase {
    pub fn base(self) -> f64 {
        self.value.exp()
    }
}

/// Raw entropy exponent with the reference-code conventions: returns 0
/// whenever `d <= 0` or `d >= C`, including degenerate `C <= 0` inputs.
/// Callers that need domain checking go through [`entropy_log`].
pub(crate) fn entropy_log_raw(c: f64, d: f64) -> f64 {
    if d <= 0.0 || d >= c {
        return 0.0;
    }
    c * c.ln() - d * d.ln() - (c - d) * (c - d).ln()
}

/// Log growth base of `C(Cn, dn)`: `C ln C - d ln d - (C-d) ln(C-d)` for
/// `0 < d < C`, and 0 outside that range.
pub fn entropy_log(c: f64, d: f64) -> Result<LogBase, ExponentError> {
    if !c.is_finite() || !d.is_finite() {
        return Err(ExponentError::NonFinite(c, d));
    }
    if c <= 0.0 {
        return Err(ExponentError::NonPositiveC(c));
    }
    Ok(LogBase {
        value: entropy_log_raw(c, d),
    })
}

/// Like [`entropy_log`], but rejects `d > C` instead of returning the
/// zero-exponent convention, so misuse surfaces during certification.
pub fn entropy_log_strict(c: f64, d: f64) -> Result<LogBase, ExponentError> {
    let out = entropy_log(c, d)?;
    if d > c {
        return Err(ExponentError::AboveRange { c, d });
    }
    Ok(out)
}

/// Exact `C(a, b)` as a big integer; 0 for `b < 0` or `b > a`.
pub fn exact_binomial(a: u64, b: i64) -> BigUint {
    if b < 0 || b as u64 > a {
        return BigUint::zero();
    }
    let b = (b as u64).min(a - b as u64);
    let mut acc = BigUint::one();
    // Multiplicative formula; each intermediate division is exact.
    for i in 0..b {
        acc = acc * BigUint::from(a - i) / BigUint::from(i + 1);
    }
    acc
}

/// `n! / (n^(n+1/2) e^-n)`, evaluated in log space.
///
/// Equals `e` at `n = 1`, decreases strictly, and tends to `sqrt(2*pi)`.
pub fn stirling_ratio(n: u64) -> f64 {
    assert!(n >= 1, "stirling_ratio requires n >= 1");
    let nf = n as f64;
    let log_factorial: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    (log_factorial - (nf + 0.5) * nf.ln() + nf).exp()
}

/// Natural log of a big positive integer, for comparing exact counts with
/// entropy estimates.
pub fn ln_biguint(x: &BigUint) -> f64 {
    assert!(!x.is_zero(), "ln of zero");
    let bits = x.bits();
    if bits <= 52 {
        let v: u64 = x.try_into().expect("fits in u64");
        return (v as f64).ln();
    }
    // Take the top 64 bits as mantissa and track the shifted-out exponent.
    let shift = bits - 53;
    let top: u64 = (x >> shift).try_into().expect("53 bits fit in u64");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}
