//! Software extended precision for the certifier.
//!
//! Values are fixed-point `BigInt` scaled by `2^PREC` with `PREC = 192` bits
//! (about 57 decimal digits), comfortably past the 30 digits the margin
//! re-evaluation needs. Logarithms of positive rationals come from the
//! `atanh` series after range reduction into `[1, 2)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::sync::OnceLock;

pub const PREC: u64 = 192;

/// Fixed-point real: `value = raw / 2^PREC`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Hp(BigInt);

impl Hp {
    pub fn zero() -> Self {
        Hp(BigInt::zero())
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite());
        Self::from_rational(&BigRational::from_float(x).expect("finite"))
    }

    pub fn from_rational(r: &BigRational) -> Self {
        Hp(div_round(&(r.numer() << PREC), r.denom()))
    }

    pub fn to_f64(&self) -> f64 {
        let scale = 2f64.powi(-(PREC as i32));
        // Split into high/low to keep f64 conversion exact enough.
        self.0.to_f64().map(|v| v * scale).unwrap_or(f64::NAN)
    }

    pub fn add(&self, other: &Hp) -> Hp {
        Hp(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Hp) -> Hp {
        Hp(&self.0 - &other.0)
    }

    pub fn mul(&self, other: &Hp) -> Hp {
        Hp(&(&self.0 * &other.0) >> PREC)
    }

    /// Multiply by an exact rational.
    pub fn mul_rational(&self, r: &BigRational) -> Hp {
        Hp(div_round(&(&self.0 * r.numer()), r.denom()))
    }
}

fn div_round(num: &BigInt, den: &BigInt) -> BigInt {
    // Round-to-nearest keeps series truncation the only error source.
    let two_num = num << 1u32;
    let q = &two_num / den;
    (&q + if q.is_negative() { -1 } else { 1 }) >> 1u32
}

fn ln2() -> &'static Hp {
    static LN2: OnceLock<Hp> = OnceLock::new();
    // ln 2 = 2 atanh(1/3)
    LN2.get_or_init(|| atanh_series(&Hp(div_round(&(BigInt::from(1) << PREC), &BigInt::from(3)))))
}

/// 2 * (z + z^3/3 + z^5/5 + ...), for |z| <= 1/3.
fn atanh_series(z: &Hp) -> Hp {
    let z2 = z.mul(z);
    let mut term = z.clone();
    let mut sum = z.clone();
    let mut k: u32 = 1;
    while !term.0.is_zero() {
        term = term.mul(&z2);
        k += 2;
        let contrib = Hp(div_round(&term.0, &BigInt::from(k)));
        if contrib.0.is_zero() {
            break;
        }
        sum = sum.add(&contrib);
    }
    Hp(&sum.0 << 1u32)
}

/// Natural log of a positive rational.
pub fn ln_rational(r: &BigRational) -> Hp {
    assert!(r.is_positive(), "ln of non-positive rational");
    // Reduce r = m * 2^k with m in [1, 2).
    let k = r.numer().bits() as i64 - r.denom().bits() as i64;
    let mut k = k;
    let mut m = if k >= 0 {
        r / BigRational::from(BigInt::from(1) << k as u64)
    } else {
        r * BigRational::from(BigInt::from(1) << (-k) as u64)
    };
    let one = BigRational::from(BigInt::from(1));
    let two = BigRational::from(BigInt::from(2));
    while m < one {
        m = &m * &two;
        k -= 1;
    }
    while m >= two {
        m = &m / &two;
        k += 1;
    }
    // ln m = 2 atanh((m-1)/(m+1)), argument within [0, 1/3).
    let z = (&m - &one) / (&m + &one);
    let ln_m = atanh_series(&Hp::from_rational(&z));
    ln_m.add(&Hp(&ln2().0 * BigInt::from(k)))
}

/// Extended-precision entropy exponent `C ln C - d ln d - (C-d) ln (C-d)`,
/// with the same zero-return convention as the double-precision path.
pub fn entropy_log_rational(c: &BigRational, d: &BigRational) -> Hp {
    if !d.is_positive() || d >= c {
        return Hp::zero();
    }
    let cd = c - d;
    let term = |x: &BigRational| ln_rational(x).mul_rational(x);
    term(c).sub(&term(d)).sub(&term(&cd))
}

pub fn rational_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite f64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    /// First 48 decimal digits of an Hp value, as "i.ffff..." string.
    fn digits(v: &Hp, frac_digits: u32) -> String {
        let scaled = v.0.abs() * BigInt::from(10u32).pow(frac_digits);
        // Truncate so the result is a prefix of the exact expansion.
        let shifted = &scaled >> PREC;
        let s = shifted.to_string();
        let s = format!("{:0>width$}", s, width = (frac_digits + 1) as usize);
        let (int_part, frac) = s.split_at(s.len() - frac_digits as usize);
        format!(
            "{}{}.{}",
            if v.0.sign() == num_bigint::Sign::Minus { "-" } else { "" },
            int_part,
            frac
        )
    }

    fn ratio(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn ln_two_digits() {
        let got = digits(ln2(), 45);
        assert!(got.starts_with("0.693147180559945309417232121458176568075500134"));
    }

    #[test]
    fn ln_three_digits() {
        let got = digits(&ln_rational(&ratio(3, 1)), 45);
        assert!(
            got.starts_with("1.098612288668109691395245236922525704647490557"),
            "{got}"
        );
    }

    #[test]
    fn ln_tenth_digits() {
        let got = digits(&ln_rational(&ratio(1, 10)), 45);
        assert!(
            got.starts_with("-2.302585092994045684017991454684364207601101488"),
            "{got}"
        );
    }

    #[test]
    fn entropy_one_third_digits() {
        let got = digits(&entropy_log_rational(&ratio(1, 1), &ratio(1, 3)), 45);
        assert!(
            got.starts_with("0.636514168294812818450423822617074659263823801"),
            "{got}"
        );
    }

    #[test]
    fn entropy_slack_term_digits() {
        let got = digits(&entropy_log_rational(&ratio(5, 6), &ratio(1, 20)), 45);
        assert!(
            got.starts_with("0.189139602083837004602785370091130848737971614"),
            "{got}"
        );
    }

    #[test]
    fn entropy_zero_convention() {
        assert_eq!(
            entropy_log_rational(&ratio(1, 1), &ratio(0, 1)),
            Hp::zero()
        );
        assert_eq!(
            entropy_log_rational(&ratio(1, 1), &ratio(3, 2)),
            Hp::zero()
        );
    }

    #[test]
    fn matches_f64_path() {
        for (c, d) in [(1.0, 1.0 / 3.0), (5.0 / 3.0, 13.0 / 60.0), (0.4, 0.11)] {
            let hp = entropy_log_rational(&rational_from_f64(c), &rational_from_f64(d));
            let double = crate::exponent::entropy_log(c, d).unwrap().value;
            assert!(
                (hp.to_f64() - double).abs() < 1e-13,
                "c={c} d={d}: {} vs {double}",
                hp.to_f64()
            );
        }
    }

    #[test]
    fn round_trip_f64() {
        for x in [0.0, 1.0, -0.375, 1e-9, 123.456] {
            assert_eq!(Hp::from_f64(x).to_f64(), x);
        }
    }
}
