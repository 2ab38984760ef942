//! Fixed-point reals backed by big integers.
//!
//! A [`Real`] is `mantissa / 2^bits` together with an absolute uncertainty
//! of `err` units in the last place. Exact inputs (dyadic decimals, f64
//! values) carry `err == 0`.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Working precision used by the presets; at least 256 bits is required
/// for frequencies with positive beta.
pub const DEFAULT_BITS: u32 = 512;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Real {
    mant: BigInt,
    bits: u32,
    err: u32,
}

impl Real {
    pub fn from_parts(mant: BigInt, bits: u32, err: u32) -> Self {
        Real { mant, bits, err }
    }

    pub fn zero(bits: u32) -> Self {
        Real::from_parts(BigInt::zero(), bits, 0)
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Uncertainty in units of `2^-bits`.
    pub fn err_ulps(&self) -> u32 {
        self.err
    }

    pub fn is_exact(&self) -> bool {
        self.err == 0
    }

    /// Exact conversion when `x` fits in `bits` fractional bits, rounded
    /// to nearest (with `err = 1`) otherwise.
    pub fn from_f64(x: f64, bits: u32) -> Self {
        assert!(x.is_finite(), "non-finite input to Real::from_f64");
        if x == 0.0 {
            return Real::zero(bits);
        }
        let raw = x.to_bits();
        let exp_bits = ((raw >> 52) & 0x7ff) as i64;
        let frac = raw & ((1u64 << 52) - 1);
        let (m, e) = if exp_bits == 0 {
            (frac, -1074i64)
        } else {
            (frac | (1u64 << 52), exp_bits - 1075)
        };
        let mut mant = BigInt::from(m);
        let shift = e + bits as i64;
        let mut err = 0;
        if shift >= 0 {
            mant <<= shift as usize;
        } else {
            let s = (-shift) as usize;
            let (q, r) = mant.div_mod_floor(&(BigInt::one() << s));
            mant = q;
            if !r.is_zero() {
                err = 1;
                if r >= (BigInt::one() << (s - 1)) {
                    mant += 1;
                }
            }
        }
        if x < 0.0 {
            mant = -mant;
        }
        Real::from_parts(mant, bits, err)
    }

    /// `floor(num / den)` at the given precision.
    pub fn from_ratio(num: &BigInt, den: &BigInt, bits: u32) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let scaled = num << bits as usize;
        let (q, r) = scaled.div_mod_floor(den);
        Real::from_parts(q, bits, if r.is_zero() { 0 } else { 1 })
    }

    /// Parses a plain decimal literal such as `0.4142` or `-1.5e-3` into an
    /// exact rational `(num, den)`.
    pub fn parse_decimal_ratio(s: &str) -> Result<(BigInt, BigInt)> {
        let t = s.trim();
        let (body, exp) = match t.find(['e', 'E']) {
            Some(i) => {
                let e: i64 = t[i + 1..]
                    .parse()
                    .map_err(|_| Error::Parse(s.to_string()))?;
                (&t[..i], e)
            }
            None => (t, 0),
        };
        let (neg, body) = match body.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, body.strip_prefix('+').unwrap_or(body)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((a, b)) => (a, b),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(Error::Parse(s.to_string()));
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return Err(Error::Parse(s.to_string()));
        }
        let digits = format!("{int_part}{frac_part}");
        let mut num: BigInt = digits
            .parse::<BigInt>()
            .map_err(|_| Error::Parse(s.to_string()))?;
        let scale = frac_part.len() as i64 - exp;
        let mut den = BigInt::one();
        if scale >= 0 {
            den = num_traits::pow(BigInt::from(10), scale as usize);
        } else {
            num *= num_traits::pow(BigInt::from(10), (-scale) as usize);
        }
        if neg {
            num = -num;
        }
        let g = num.gcd(&den);
        if !g.is_zero() && !g.is_one() {
            num /= &g;
            den /= &g;
        }
        Ok((num, den))
    }

    /// Decimal literal at the given precision; dyadic values come back with
    /// `err == 0`.
    pub fn from_decimal(s: &str, bits: u32) -> Result<Self> {
        let (num, den) = Real::parse_decimal_ratio(s)?;
        Ok(Real::from_ratio(&num, &den, bits))
    }

    /// Exact decimal expansion of the stored mantissa (dyadic values have a
    /// terminating decimal expansion with at most `bits` digits).
    pub fn to_decimal_string(&self) -> String {
        let neg = self.mant.is_negative();
        let m = self.mant.abs();
        let one = BigInt::one() << self.bits as usize;
        let (int_part, frac) = m.div_rem(&one);
        let mut digits = (frac * num_traits::pow(BigInt::from(5), self.bits as usize)).to_string();
        if self.bits > 0 {
            let pad = self.bits as usize - digits.len().min(self.bits as usize);
            digits = "0".repeat(pad) + &digits;
        }
        let digits = digits.trim_end_matches('0');
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&int_part.to_string());
        if !digits.is_empty() {
            out.push('.');
            out.push_str(digits);
        }
        out
    }

    /// Changes the number of fractional bits (rounding down when reducing).
    pub fn rescale(&self, bits: u32) -> Real {
        match bits.cmp(&self.bits) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => {
                let s = (bits - self.bits) as usize;
                let err = self.err.saturating_mul(1u32.checked_shl(s as u32).unwrap_or(u32::MAX));
                Real::from_parts(&self.mant << s, bits, err)
            }
            Ordering::Less => {
                let s = (self.bits - bits) as usize;
                let (q, r) = self.mant.div_mod_floor(&(BigInt::one() << s));
                let extra = u32::from(!r.is_zero() || self.err > 0);
                Real::from_parts(q, bits, extra.max((self.err >> s).saturating_add(extra)))
            }
        }
    }

    /// Exact halving.
    pub fn half(&self) -> Real {
        Real::from_parts(self.mant.clone(), self.bits + 1, self.err)
    }

    pub fn mul_int(&self, k: &BigInt) -> Real {
        let kerr = k.abs().to_u32().unwrap_or(u32::MAX);
        Real::from_parts(&self.mant * k, self.bits, self.err.saturating_mul(kerr))
    }

    pub fn mul_i64(&self, k: i64) -> Real {
        self.mul_int(&BigInt::from(k))
    }

    pub fn sub(&self, other: &Real) -> Real {
        let bits = self.bits.max(other.bits);
        let a = self.rescale(bits);
        let b = other.rescale(bits);
        Real::from_parts(a.mant - b.mant, bits, a.err.saturating_add(b.err))
    }

    pub fn add(&self, other: &Real) -> Real {
        let bits = self.bits.max(other.bits);
        let a = self.rescale(bits);
        let b = other.rescale(bits);
        Real::from_parts(a.mant + b.mant, bits, a.err.saturating_add(b.err))
    }

    /// Distance to the nearest integer, `||x||_{R/Z}`, in [0, 1/2].
    pub fn torus_distance(&self) -> Real {
        let one = BigInt::one() << self.bits as usize;
        let frac = self.mant.mod_floor(&one);
        let other = &one - &frac;
        let d = if frac <= other { frac } else { other };
        Real::from_parts(d, self.bits, self.err)
    }

    pub fn to_f64(&self) -> f64 {
        if self.mant.is_zero() {
            return 0.0;
        }
        let nb = self.mant.bits() as i64;
        let (m, shift) = if nb > 64 {
            let s = nb - 64;
            (&self.mant >> s as usize, s)
        } else {
            (self.mant.clone(), 0)
        };
        let mf = m.to_f64().unwrap_or(f64::NAN);
        let e = shift - self.bits as i64;
        scale_pow2(mf, e)
    }

    /// `ln |x|`, finite for arbitrarily small nonzero values; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.mant.is_zero() {
            return f64::NEG_INFINITY;
        }
        ln_biguint(self.mant.magnitude()) - self.bits as f64 * std::f64::consts::LN_2
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn signum(&self) -> Sign {
        self.mant.sign()
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let bits = self.bits.max(other.bits);
        let a = &self.mant << (bits - self.bits) as usize;
        let b = &other.mant << (bits - other.bits) as usize;
        Some(a.cmp(&b))
    }
}

/// `x * 2^e` without intermediate overflow or premature underflow.
pub(crate) fn scale_pow2(x: f64, e: i64) -> f64 {
    let mut v = x;
    let mut e = e;
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
        if v == 0.0 {
            return 0.0;
        }
    }
    v * 2f64.powi(e as i32)
}

/// Natural log of a positive big integer.
pub fn ln_biguint(n: &BigUint) -> f64 {
    let nb = n.bits();
    if nb <= 64 {
        return n.to_f64().unwrap_or(0.0).ln();
    }
    let s = nb - 64;
    let top = (n >> s as usize).to_f64().unwrap_or(1.0);
    top.ln() + s as f64 * std::f64::consts::LN_2
}

/// `(sqrt(5) - 1) / 2` with one ulp of uncertainty.
pub fn golden_mean(bits: u32) -> Real {
    let s = (BigUint::from(5u32) << (2 * bits as usize)).sqrt();
    let one = BigUint::one() << bits as usize;
    let m = (s - one) >> 1usize;
    Real::from_parts(BigInt::from(m), bits, 1)
}

/// `sqrt(2) - 1` with one ulp of uncertainty.
pub fn silver_mean(bits: u32) -> Real {
    let s = (BigUint::from(2u32) << (2 * bits as usize)).sqrt();
    let one = BigUint::one() << bits as usize;
    Real::from_parts(BigInt::from(s - one), bits, 1)
}

/// `e - 2` as the tail sum of `1/k!`, `k >= 2`.
pub fn e_minus_two(bits: u32) -> Real {
    let guard = 16u32;
    let wb = bits + guard;
    let mut term = BigUint::one() << wb as usize;
    let mut sum = BigUint::zero();
    let mut k = 1u32;
    loop {
        k += 1;
        term /= k;
        if term.is_zero() {
            break;
        }
        sum += &term;
    }
    // Each truncating division loses < 1 ulp at the working precision.
    let r = Real::from_parts(BigInt::from(sum), wb, k + 1);
    let mut out = r.rescale(bits);
    out.err = 2;
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_roundtrip_is_exact() {
        for &x in &[0.1, 0.5, 0.618_033_988_749_894_9, 1e-30, 3.75] {
            let r = Real::from_f64(x, 512);
            assert!(r.is_exact());
            assert_eq!(r.to_f64(), x);
        }
    }

    #[test]
    fn decimal_string_roundtrip() {
        let g = golden_mean(256);
        let s = g.to_decimal_string();
        let back = Real::from_decimal(&s, 256).unwrap();
        assert_eq!(back.mantissa(), g.mantissa());
        assert!(back.is_exact());
    }

    #[test]
    fn presets_match_f64() {
        assert!((golden_mean(512).to_f64() - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-16);
        assert!((silver_mean(512).to_f64() - (2f64.sqrt() - 1.0)).abs() < 2e-16);
        assert!((e_minus_two(512).to_f64() - (std::f64::consts::E - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn ln_abs_of_tiny_value() {
        let r = Real::from_parts(BigInt::one(), 20_000, 0);
        let expect = -20_000.0 * std::f64::consts::LN_2;
        assert!((r.ln_abs() - expect).abs() < 1e-9);
        assert_eq!(r.to_f64(), 0.0);
    }

    #[test]
    fn torus_distance_folds() {
        let r = Real::from_f64(1.75, 64).torus_distance();
        assert_eq!(r.to_f64(), 0.25);
        let r = Real::from_f64(-0.5, 64).torus_distance();
        assert_eq!(r.to_f64(), 0.5);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Real::parse_decimal_ratio("0.1x").is_err());
        assert!(Real::parse_decimal_ratio(".").is_err());
        let (n, d) = Real::parse_decimal_ratio("2.5e-1").unwrap();
        assert_eq!((n, d), (BigInt::from(1), BigInt::from(4)));
    }
}
