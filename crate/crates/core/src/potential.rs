//! Real-analytic potentials given by finitely many Fourier coefficients.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

const REALNESS_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierCoefficient {
    pub k: i32,
    pub re: f64,
    pub im: f64,
}

/// `lambda * v` with `v(x) = sum_k vhat_k exp(2 pi i k x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    lambda: f64,
    /// Sorted by `k`, zero coefficients dropped.
    coeffs: Vec<FourierCoefficient>,
    /// `(k, 2 re_k, -2 im_k)` for `k >= 1`, plus the mean, for fast real
    /// evaluation.
    mean: f64,
    harmonics: Vec<(f64, f64, f64)>,
}

/// Wire format `{lambda, coeffs: [{k, re, im}]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialJson {
    pub lambda: f64,
    pub coeffs: Vec<FourierCoefficient>,
}

impl PotentialSpec {
    /// Validates `vhat_{-k} = conj(vhat_k)`.
    pub fn new(lambda: f64, coeffs: Vec<FourierCoefficient>) -> Result<Self> {
        let mut merged: Vec<FourierCoefficient> = Vec::new();
        for c in coeffs {
            match merged.iter_mut().find(|m| m.k == c.k) {
                Some(m) => {
                    m.re += c.re;
                    m.im += c.im;
                }
                None => merged.push(c),
            }
        }
        merged.retain(|c| c.re != 0.0 || c.im != 0.0);
        merged.sort_by_key(|c| c.k);
        let get = |k: i32| {
            merged
                .iter()
                .find(|c| c.k == k)
                .map(|c| (c.re, c.im))
                .unwrap_or((0.0, 0.0))
        };
        for c in &merged {
            let (re, im) = get(-c.k);
            if (re - c.re).abs() > REALNESS_TOL || (im + c.im).abs() > REALNESS_TOL {
                return Err(Error::NotReal { k: c.k });
            }
        }
        let mean = get(0).0;
        let degree = merged.iter().map(|c| c.k.abs()).max().unwrap_or(0);
        let harmonics = (1..=degree)
            .map(|k| {
                let (re, im) = get(k);
                (k as f64, 2.0 * re, -2.0 * im)
            })
            .filter(|&(_, a, b)| a != 0.0 || b != 0.0)
            .collect();
        Ok(PotentialSpec {
            lambda,
            coeffs: merged,
            mean,
            harmonics,
        })
    }

    /// `v(x) = 2 cos(2 pi x)`.
    pub fn amo(lambda: f64) -> Self {
        PotentialSpec::new(
            lambda,
            vec![
                FourierCoefficient { k: -1, re: 1.0, im: 0.0 },
                FourierCoefficient { k: 1, re: 1.0, im: 0.0 },
            ],
        )
        .expect("AMO coefficients are conjugate-symmetric")
    }

    pub fn zero() -> Self {
        PotentialSpec::new(0.0, Vec::new()).expect("empty potential")
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        PotentialSpec {
            lambda,
            ..self.clone()
        }
    }

    pub fn coeffs(&self) -> &[FourierCoefficient] {
        &self.coeffs
    }

    /// `vhat_k` as `(re, im)`.
    pub fn coeff(&self, k: i32) -> (f64, f64) {
        self.coeffs
            .iter()
            .find(|c| c.k == k)
            .map(|c| (c.re, c.im))
            .unwrap_or((0.0, 0.0))
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(|c| c.k.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Trigonometric polynomials are entire.
    pub fn analyticity_radius(&self) -> f64 {
        f64::INFINITY
    }

    /// `v(x)` (without the coupling) from the real form; infallible because
    /// realness was validated at construction.
    #[inline]
    pub fn v(&self, x: f64) -> f64 {
        let mut s = self.mean;
        for &(k, a, b) in &self.harmonics {
            let (sin, cos) = (2.0 * PI * k * x).sin_cos();
            s += a * cos + b * sin;
        }
        s
    }

    /// `lambda v(x)`, the diagonal of the Schrödinger operator.
    #[inline]
    pub fn coupled(&self, x: f64) -> f64 {
        self.lambda * self.v(x)
    }

    pub fn to_json(&self) -> PotentialJson {
        PotentialJson {
            lambda: self.lambda,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn from_json(j: &PotentialJson) -> Result<Self> {
        PotentialSpec::new(j.lambda, j.coeffs.clone())
    }
}

/// `v(x)` from the complex Fourier sum, failing if the imaginary part does
/// not cancel.
pub fn eval_potential(v: &PotentialSpec, x: f64) -> Result<f64> {
    let (mut re, mut im) = (0.0, 0.0);
    for c in v.coeffs() {
        let (s, co) = (2.0 * PI * c.k as f64 * x).sin_cos();
        re += c.re * co - c.im * s;
        im += c.re * s + c.im * co;
    }
    if im.abs() > REALNESS_TOL * (1.0 + re.abs()) {
        return Err(Error::ImaginaryResidue { x, residue: im });
    }
    Ok(re)
}

/// Upper bound `sum_k |vhat_k| exp(2 pi eta |k|)` for `sup_{|Im x| < eta} |v|`.
pub fn strip_norm(v: &PotentialSpec, eta: f64) -> f64 {
    v.coeffs()
        .iter()
        .map(|c| c.re.hypot(c.im) * (2.0 * PI * eta * c.k.abs() as f64).exp())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn coeff(k: i32, re: f64, im: f64) -> FourierCoefficient {
        FourierCoefficient { k, re, im }
    }

    #[test]
    fn amo_values() {
        let v = PotentialSpec::amo(0.5);
        assert!((eval_potential(&v, 0.0).unwrap() - 2.0).abs() < 1e-15);
        let v = PotentialSpec::amo(1.0);
        assert!(eval_potential(&v, 0.25).unwrap().abs() < 1e-15);
        assert!((eval_potential(&v, 1.0 / 3.0).unwrap() + 1.0).abs() < 1e-12);
        assert_eq!(v.coeff(1), (1.0, 0.0));
        assert_eq!(v.coeff(-1), (1.0, 0.0));
        assert_eq!(v.coeff(0), (0.0, 0.0));
        assert_eq!(v.coeff(2), (0.0, 0.0));
        assert_eq!(v.degree(), 1);
    }

    #[test]
    fn zero_and_constant() {
        assert_eq!(eval_potential(&PotentialSpec::zero(), 0.3).unwrap(), 0.0);
        let c = PotentialSpec::new(1.0, vec![coeff(0, 3.0, 0.0)]).unwrap();
        assert_eq!(eval_potential(&c, 0.77).unwrap(), 3.0);
        assert_eq!(c.v(0.77), 3.0);
    }

    #[test]
    fn strip_norm_examples() {
        let v = PotentialSpec::amo(1.0);
        assert!((strip_norm(&v, 0.0) - 2.0).abs() < 1e-15);
        let expect = 2.0 * (2.0 * PI).exp();
        assert!((strip_norm(&v, 1.0) - expect).abs() < 1e-9);
        assert!((expect - 1070.98).abs() < 0.01);
        assert_eq!(strip_norm(&PotentialSpec::zero(), 3.0), 0.0);
    }

    #[test]
    fn rejects_non_real_coefficients() {
        let r = PotentialSpec::new(1.0, vec![coeff(1, 1.0, 0.5), coeff(-1, 1.0, 0.5)]);
        assert!(matches!(r, Err(Error::NotReal { .. })));
        let r = PotentialSpec::new(1.0, vec![coeff(2, 1.0, 0.0)]);
        assert!(matches!(r, Err(Error::NotReal { .. })));
    }

    #[test]
    fn sine_component_is_real() {
        // sin(2 pi x) = (e^{2 pi i x} - e^{-2 pi i x}) / 2i
        let v = PotentialSpec::new(1.0, vec![coeff(1, 0.0, -0.5), coeff(-1, 0.0, 0.5)]).unwrap();
        for &x in &[0.1, 0.25, 0.6] {
            let exact = (2.0 * PI * x).sin();
            assert!((eval_potential(&v, x).unwrap() - exact).abs() < 1e-14);
            assert!((v.v(x) - exact).abs() < 1e-14);
        }
    }

    #[test]
    fn json_roundtrip() {
        let v = PotentialSpec::new(0.3, vec![coeff(2, 0.5, 0.1), coeff(-2, 0.5, -0.1), coeff(0, 1.0, 0.0)]).unwrap();
        let s = serde_json::to_string(&v.to_json()).unwrap();
        let back = PotentialSpec::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, v);
    }

    fn arb_potential() -> impl Strategy<Value = PotentialSpec> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 0..4).prop_map(|cs| {
            let mut coeffs = Vec::new();
            for (k, (re, im)) in cs.into_iter().enumerate() {
                let k = k as i32;
                if k == 0 {
                    coeffs.push(coeff(0, re, 0.0));
                } else {
                    coeffs.push(coeff(k, re, im));
                    coeffs.push(coeff(-k, re, -im));
                }
            }
            PotentialSpec::new(1.0, coeffs).unwrap()
        })
    }

    proptest! {
        #[test]
        fn periodic_and_real(v in arb_potential(), x in -5.0f64..5.0) {
            let a = eval_potential(&v, x).unwrap();
            let b = eval_potential(&v, x + 1.0).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((a - v.v(x)).abs() < 1e-12);
        }

        #[test]
        fn strip_norm_monotone_and_dominates(v in arb_potential(), e1 in 0.0f64..1.0, e2 in 0.0f64..1.0) {
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            prop_assert!(strip_norm(&v, lo) <= strip_norm(&v, hi) + 1e-12);
            let sup = (0..1024).map(|i| v.v(i as f64 / 1024.0).abs()).fold(0.0, f64::max);
            prop_assert!(strip_norm(&v, 0.0) >= sup - 1e-12);
        }
    }
}
