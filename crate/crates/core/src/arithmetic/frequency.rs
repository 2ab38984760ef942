use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::real::{self, ln_biguint, Real, DEFAULT_BITS};
use crate::error::{Error, Result};

/// An irrational frequency in (0, 1) with its exact continued-fraction data.
///
/// `quotients[k - 1]` is the partial quotient `a_k` and `convergents[k - 1]`
/// is `(p_k, q_k)` for `k = 1..=depth`. The seeds `(p_{-1}, q_{-1}) = (1, 0)`
/// and `(p_0, q_0) = (0, 1)` are implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct Frequency {
    value: Real,
    alpha: f64,
    quotients: Vec<BigUint>,
    convergents: Vec<(BigUint, BigUint)>,
    truncated: bool,
}

impl Frequency {
    fn assemble(value: Real, quotients: Vec<BigUint>, truncated: bool) -> Frequency {
        let mut convergents = Vec::with_capacity(quotients.len());
        let (mut p_prev, mut q_prev) = (BigUint::one(), BigUint::zero());
        let (mut p, mut q) = (BigUint::zero(), BigUint::one());
        for a in &quotients {
            let p_next = a * &p + &p_prev;
            let q_next = a * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            convergents.push((p.clone(), q.clone()));
        }
        let alpha = value.to_f64();
        Frequency {
            value,
            alpha,
            quotients,
            convergents,
            truncated,
        }
    }

    /// Frequency whose expansion is exactly the given quotients; the stored
    /// value is `p_D / q_D` at a precision that resolves every stored level.
    pub fn from_quotients(quotients: Vec<BigUint>) -> Result<Frequency> {
        if quotients.is_empty() {
            return Err(Error::InvalidArgument("at least one partial quotient required".into()));
        }
        if quotients.iter().any(|a| a.is_zero()) {
            return Err(Error::InvalidArgument("partial quotients must be positive".into()));
        }
        let probe = Frequency::assemble(Real::zero(1), quotients, false);
        let (p, q) = probe.convergents.last().cloned().unwrap();
        let bits = DEFAULT_BITS.max(2 * q.bits() as u32 + 64);
        let value = Real::from_ratio(&BigInt::from(p), &BigInt::from(q), bits);
        let mut f = probe;
        f.alpha = value.to_f64();
        f.value = value;
        Ok(f)
    }

    pub fn golden(depth: usize) -> Frequency {
        continued_fraction(&real::golden_mean(DEFAULT_BITS), depth)
            .expect("golden mean expansion")
    }

    /// `sqrt(2) - 1 = [0; 2, 2, 2, ...]`.
    pub fn silver(depth: usize) -> Frequency {
        continued_fraction(&real::silver_mean(DEFAULT_BITS), depth)
            .expect("silver mean expansion")
    }

    /// `e - 2 = [0; 1, 2, 1, 1, 4, 1, 1, 6, ...]`.
    pub fn e_minus_two(depth: usize) -> Frequency {
        continued_fraction(&real::e_minus_two(DEFAULT_BITS), depth).expect("e - 2 expansion")
    }

    /// Exact decimal literal; a terminating expansion is rejected as rational.
    pub fn from_decimal(s: &str, depth: usize) -> Result<Frequency> {
        let (num, den) = Real::parse_decimal_ratio(s)?;
        continued_fraction_rational(&num, &den, depth)
    }

    /// A double-precision value read as the interval of width one ulp around
    /// it; the expansion stops where that interval no longer pins it down.
    pub fn from_f64_approx(x: f64, depth: usize) -> Result<Frequency> {
        let exact = Real::from_f64(x, 64);
        let widened = Real::from_parts(exact.mantissa().clone(), 64, 2048);
        continued_fraction(&widened, depth)
    }

    pub fn value(&self) -> &Real {
        &self.value
    }

    /// Double-precision value of the frequency.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn quotients(&self) -> &[BigUint] {
        &self.quotients
    }

    pub fn convergents(&self) -> &[(BigUint, BigUint)] {
        &self.convergents
    }

    pub fn depth(&self) -> usize {
        self.quotients.len()
    }

    /// True when the input precision ran out before the requested depth.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// `q_k` for `k = -1..=depth`.
    pub fn q(&self, k: isize) -> BigUint {
        match k {
            -1 => BigUint::zero(),
            0 => BigUint::one(),
            k => self.convergents[k as usize - 1].1.clone(),
        }
    }

    /// `p_k` for `k = -1..=depth`.
    pub fn p(&self, k: isize) -> BigUint {
        match k {
            -1 => BigUint::one(),
            0 => BigUint::zero(),
            k => self.convergents[k as usize - 1].0.clone(),
        }
    }

    /// `p_k q_{k-1} - p_{k-1} q_k` as an exact integer.
    pub fn determinant(&self, k: usize) -> BigInt {
        let k = k as isize;
        BigInt::from(self.p(k)) * BigInt::from(self.q(k - 1))
            - BigInt::from(self.p(k - 1)) * BigInt::from(self.q(k))
    }

    /// Checks `|alpha - p_k/q_k| < 1/(q_k q_{k+1})` against the stored value,
    /// allowing for its uncertainty.
    pub fn approximation_bound_holds(&self, k: usize) -> bool {
        if k + 1 > self.depth() {
            return false;
        }
        let (p, q) = (self.p(k as isize), self.q(k as isize));
        let q_next = self.q(k as isize + 1);
        let bits = self.value.bits() as usize;
        let diff = (self.value.mantissa() * BigInt::from(q.clone())
            - (BigInt::from(p) << bits))
            .abs();
        let slack = BigInt::from(q.clone()) * BigInt::from(self.value.err_ulps());
        let lhs = (diff - slack).max(BigInt::zero()) * BigInt::from(q_next);
        lhs < (BigInt::one() << bits)
    }

    /// Verifies the recurrences and the determinant identity exactly.
    pub fn check_invariants(&self) -> Result<()> {
        for k in 1..=self.depth() {
            let det = self.determinant(k);
            let expect = if (k - 1) % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            if det != expect {
                return Err(Error::InconsistentFrequency(format!(
                    "determinant identity fails at k = {k}"
                )));
            }
            let ki = k as isize;
            let a = &self.quotients[k - 1];
            if self.q(ki) != a * self.q(ki - 1) + self.q(ki - 2)
                || self.p(ki) != a * self.p(ki - 1) + self.p(ki - 2)
            {
                return Err(Error::InconsistentFrequency(format!("recurrence fails at k = {k}")));
            }
            if k >= 2 && self.q(ki) <= self.q(ki - 1) {
                return Err(Error::InconsistentFrequency(format!("q not increasing at k = {k}")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> FrequencyJson {
        FrequencyJson {
            value_decimal: self.value.to_decimal_string(),
            quotients: self.quotients.iter().map(|a| a.to_string()).collect(),
            convergents: self
                .convergents
                .iter()
                .map(|(p, q)| [p.to_string(), q.to_string()])
                .collect(),
        }
    }

    pub fn from_json(json: &FrequencyJson) -> Result<Frequency> {
        let parse = |s: &String| -> Result<BigUint> {
            s.parse::<BigUint>().map_err(|_| Error::Parse(s.clone()))
        };
        let quotients = json.quotients.iter().map(parse).collect::<Result<Vec<_>>>()?;
        let digits = json
            .value_decimal
            .split_once('.')
            .map(|(_, f)| f.len())
            .unwrap_or(0) as u32;
        let value = Real::from_decimal(&json.value_decimal, digits.max(DEFAULT_BITS))?;
        let value = Real::from_parts(value.mantissa().clone(), value.bits(), value.err_ulps().max(1));
        let f = Frequency::assemble(value, quotients, false);
        if json.convergents.len() != f.convergents.len() {
            return Err(Error::InconsistentFrequency("convergent count mismatch".into()));
        }
        for (k, (pq, (p, q))) in json.convergents.iter().zip(&f.convergents).enumerate() {
            if &parse(&pq[0])? != p || &parse(&pq[1])? != q {
                return Err(Error::InconsistentFrequency(format!(
                    "convergent {} does not match the quotients",
                    k + 1
                )));
            }
        }
        f.check_invariants()?;
        Ok(f)
    }
}

/// Wire format: big integers as decimal strings so they survive exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyJson {
    pub value_decimal: String,
    pub quotients: Vec<String>,
    pub convergents: Vec<[String; 2]>,
}

/// Expansion of `x` to `depth` levels.
///
/// An exact `x` whose expansion terminates is rejected as rational. For an
/// inexact `x` the expansion of both ends of its uncertainty interval is run
/// in lockstep and stops (with the truncation flag set) where they disagree.
pub fn continued_fraction(x: &Real, depth: usize) -> Result<Frequency> {
    let one = BigInt::one() << x.bits() as usize;
    let err = BigInt::from(x.err_ulps());
    let lo = x.mantissa() - &err;
    let hi = x.mantissa() + &err;
    if lo <= BigInt::zero() || hi >= one {
        return Err(Error::FrequencyOutOfRange(x.to_decimal_string()));
    }
    let quotients = expand_interval((lo, one.clone()), (hi, one), depth, x.is_exact())?;
    let truncated = quotients.len() < depth;
    Ok(Frequency::assemble(x.clone(), quotients, truncated))
}

/// Expansion of the exact rational `num/den`.
pub fn continued_fraction_rational(num: &BigInt, den: &BigInt, depth: usize) -> Result<Frequency> {
    if den.is_zero() || num <= &BigInt::zero() || num >= den {
        return Err(Error::FrequencyOutOfRange(format!("{num}/{den}")));
    }
    let quotients = expand_interval((num.clone(), den.clone()), (num.clone(), den.clone()), depth, true)?;
    let bits = DEFAULT_BITS.max(2 * den.bits() as u32 + 64);
    let value = Real::from_ratio(num, den, bits);
    Ok(Frequency::assemble(value, quotients, false))
}

fn expand_interval(
    lo: (BigInt, BigInt),
    hi: (BigInt, BigInt),
    depth: usize,
    exact: bool,
) -> Result<Vec<BigUint>> {
    let (mut n_lo, mut d_lo) = lo;
    let (mut n_hi, mut d_hi) = hi;
    let mut out = Vec::with_capacity(depth);
    while out.len() < depth {
        if n_lo.is_zero() || n_hi.is_zero() {
            break;
        }
        // 1/x reverses the order of the endpoints.
        let (a_small, r_small) = d_hi.div_rem(&n_hi);
        let (a_big, r_big) = d_lo.div_rem(&n_lo);
        if a_small != a_big {
            break;
        }
        out.push(a_small.to_biguint().expect("positive quotient"));
        if exact && r_small.is_zero() {
            return Err(Error::RationalFrequency { level: out.len() });
        }
        let (nl, dl) = (r_small, n_hi);
        let (nh, dh) = (r_big, n_lo);
        n_lo = nl;
        d_lo = dl;
        n_hi = nh;
        d_hi = dh;
    }
    Ok(out)
}

/// Parameters for a frequency with prescribed exponential approximation rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaConstruction {
    pub beta: f64,
    /// Leading partial quotients `a_1..a_s` used verbatim.
    pub seed: Vec<u32>,
    pub depth: usize,
    /// Upper bound on the bit length of any denominator.
    pub max_bits: u64,
}

impl BetaConstruction {
    pub fn new(beta: f64, depth: usize) -> Self {
        BetaConstruction {
            beta,
            seed: vec![1, 1],
            depth,
            max_bits: 1 << 16,
        }
    }

    pub fn with_seed(mut self, seed: Vec<u32>) -> Self {
        self.seed = seed;
        self
    }
}

/// Builds `[0; seed, a_{s+1}, ..., a_depth]` with
/// `a_{k+1} = ceil(exp(beta q_k) / q_k)`, so that `q_{k+1} >= exp(beta q_k)`
/// and `ln q_{k+1} / q_k` tends to `beta`.
pub fn build_frequency_with_beta(cfg: &BetaConstruction) -> Result<Frequency> {
    if !(cfg.beta > 0.0) || !cfg.beta.is_finite() {
        return Err(Error::NonPositiveBeta(cfg.beta));
    }
    if cfg.seed.contains(&0) {
        return Err(Error::InvalidArgument("seed quotients must be positive".into()));
    }
    let mut quotients: Vec<BigUint> = cfg
        .seed
        .iter()
        .take(cfg.depth)
        .map(|&a| BigUint::from(a))
        .collect();
    let (mut q_prev, mut q) = (BigUint::zero(), BigUint::one());
    for a in &quotients {
        let next = a * &q + &q_prev;
        q_prev = std::mem::replace(&mut q, next);
    }
    while quotients.len() < cfg.depth {
        let level = quotients.len();
        let too_big = Error::DepthBudget {
            requested: cfg.depth,
            attainable: level,
        };
        if q.bits() > 900 {
            return Err(too_big);
        }
        let qf = q.to_f64().unwrap();
        let log_a = cfg.beta * qf - qf.ln();
        let new_bits = (cfg.beta * qf) / std::f64::consts::LN_2 + 1.0;
        if new_bits > cfg.max_bits as f64 {
            return Err(too_big);
        }
        let a = ceil_exp(log_a);
        let next = &a * &q + &q_prev;
        q_prev = std::mem::replace(&mut q, next);
        quotients.push(a);
    }
    Frequency::from_quotients(quotients)
}

/// `ceil(exp(x))` as a big integer, carrying 53 significant bits.
fn ceil_exp(x: f64) -> BigUint {
    if x <= 0.0 {
        return BigUint::one();
    }
    if x < 700.0 {
        let v = x.exp().ceil();
        return BigUint::from(v as u128).max(BigUint::one());
    }
    let y = x / std::f64::consts::LN_2;
    let m = y.floor();
    let f = y - m;
    let mant = (2f64.powf(f) * 2f64.powi(52)).ceil() as u64;
    BigUint::from(mant) << (m as usize - 52)
}

/// Per-level growth rates and their trailing maximum as a proxy for
/// `limsup ln q_{k+1} / q_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    pub beta_hat: f64,
    /// `(k, ln q_{k+1} / q_k)` for `k = 0..depth`.
    pub per_level: Vec<(usize, f64)>,
    pub depth_used: usize,
}

pub const DEFAULT_TAIL_WINDOW: usize = 5;

pub fn beta_estimate(freq: &Frequency, tail_window: usize) -> Result<BetaEstimate> {
    let depth = freq.depth();
    if tail_window == 0 || depth < tail_window {
        return Err(Error::TooFewLevels {
            needed: tail_window.max(1) + 1,
            available: depth + 1,
        });
    }
    let per_level: Vec<(usize, f64)> = (0..depth)
        .map(|k| {
            let q = freq.q(k as isize);
            let q_next = freq.q(k as isize + 1);
            let qf = q.to_f64().unwrap_or(f64::INFINITY);
            (k, ln_biguint(&q_next) / qf)
        })
        .collect();
    let beta_hat = per_level[depth - tail_window..]
        .iter()
        .map(|&(_, v)| v)
        .fold(0.0f64, f64::max);
    Ok(BetaEstimate {
        beta_hat,
        per_level,
        depth_used: depth,
    })
}
