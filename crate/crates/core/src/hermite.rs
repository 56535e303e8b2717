//! Probabilists' Hermite polynomials with exact integer coefficients.
//!
//! `h_0 = 1`, `h_1 = x`, `h_n = x h_{n-1} - (n-1) h_{n-2}`. Coefficients are
//! held as `i128` and every arithmetic step is checked, so a degree beyond
//! [`MAX_DEGREE`] is rejected instead of wrapping.
//!
//! Downstream code evaluates the homogeneous form
//! `H_n(x, v) = v^{n/2} h_n(x / sqrt(v))` through [`hermite_scaled_eval`],
//! which never divides by `sqrt(v)` and stays defined at `v = 0`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Largest supported degree.
pub const MAX_DEGREE: usize = 30;

/// Monic polynomial `h_n(x) = sum_k coeffs[k] x^k` with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChaosPolynomial {
    degree: usize,
    coeffs: Vec<i128>,
}

impl ChaosPolynomial {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficients in ascending powers, `coeffs()[k]` multiplies `x^k`.
    pub fn coeffs(&self) -> &[i128] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> i128 {
        self.coeffs.get(k).copied().unwrap_or(0)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c as f64)
    }

    /// Coefficients of `p(-x)`.
    pub fn reflect(&self) -> ChaosPolynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 1 { -c } else { c })
            .collect();
        ChaosPolynomial {
            degree: self.degree,
            coeffs,
        }
    }
}

fn check_degree(n: usize) -> Result<()> {
    if n > MAX_DEGREE {
        return Err(Error::DegreeOverflow {
            degree: n,
            max: MAX_DEGREE,
        });
    }
    Ok(())
}

fn overflow(n: usize) -> Error {
    Error::DegreeOverflow {
        degree: n,
        max: MAX_DEGREE,
    }
}

/// `h_n` built by the three-term recurrence.
pub fn hermite_coeffs(n: usize) -> Result<ChaosPolynomial> {
    check_degree(n)?;
    let mut prev: Vec<i128> = vec![1];
    if n == 0 {
        return Ok(ChaosPolynomial {
            degree: 0,
            coeffs: prev,
        });
    }
    let mut cur: Vec<i128> = vec![0, 1];
    for k in 2..=n {
        let mut next = vec![0i128; k + 1];
        // x * h_{k-1}
        for (j, &c) in cur.iter().enumerate() {
            next[j + 1] = c;
        }
        // - (k-1) * h_{k-2}
        let factor = (k - 1) as i128;
        for (j, &c) in prev.iter().enumerate() {
            let term = c.checked_mul(factor).ok_or_else(|| overflow(n))?;
            next[j] = next[j].checked_sub(term).ok_or_else(|| overflow(n))?;
        }
        prev = cur;
        cur = next;
    }
    Ok(ChaosPolynomial {
        degree: n,
        coeffs: cur,
    })
}

fn factorial(k: usize) -> Option<i128> {
    (1..=k as i128).try_fold(1i128, |acc, j| acc.checked_mul(j))
}

/// `h_n` built term by term from
/// `n! sum_m (-1)^m x^{n-2m} / (2^m m! (n-2m)!)`.
pub fn hermite_coeffs_explicit(n: usize) -> Result<ChaosPolynomial> {
    check_degree(n)?;
    let numerator = factorial(n).ok_or_else(|| overflow(n))?;
    let mut coeffs = vec![0i128; n + 1];
    for m in 0..=n / 2 {
        let denominator = factorial(m)
            .and_then(|mf| mf.checked_mul(1i128 << m))
            .and_then(|d| factorial(n - 2 * m).and_then(|r| d.checked_mul(r)))
            .ok_or_else(|| overflow(n))?;
        if numerator % denominator != 0 {
            return Err(Error::Internal(format!(
                "non-integral Hermite term n={n}, m={m}: {numerator}/{denominator}"
            )));
        }
        let magnitude = numerator / denominator;
        coeffs[n - 2 * m] = if m % 2 == 0 { magnitude } else { -magnitude };
    }
    Ok(ChaosPolynomial { degree: n, coeffs })
}

/// `h_n(x)`.
pub fn hermite_eval(n: usize, x: f64) -> Result<f64> {
    Ok(hermite_coeffs(n)?.eval(x))
}

/// Homogeneous form `H_n(x, v) = sum_m c_{n-2m} v^m x^{n-2m}` where `c_k` are
/// the coefficients of `h_n`. Equals `v^{n/2} h_n(x / sqrt(v))` for `v > 0`.
pub fn hermite_scaled_eval(n: usize, x: f64, v: f64) -> Result<f64> {
    let poly = hermite_coeffs(n)?;
    scaled_eval_with(&poly, x, v)
}

/// [`hermite_scaled_eval`] with precomputed coefficients.
pub fn scaled_eval_with(poly: &ChaosPolynomial, x: f64, v: f64) -> Result<f64> {
    if v < 0.0 || v.is_nan() {
        return Err(Error::Domain(format!(
            "quadratic variation must be nonnegative, got {v}"
        )));
    }
    let n = poly.degree();
    let mut total = 0.0;
    let mut vm = 1.0;
    for m in 0..=n / 2 {
        total += poly.coeff(n - 2 * m) as f64 * vm * powi(x, n - 2 * m);
        vm *= v;
    }
    Ok(total)
}

pub(crate) fn powi(base: f64, exp: usize) -> f64 {
    let mut result = 1.0;
    let mut b = base;
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result *= b;
        }
        b *= b;
        e >>= 1;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recurrence_low_degrees() {
        assert_eq!(hermite_coeffs(0).unwrap().coeffs(), &[1]);
        assert_eq!(hermite_coeffs(2).unwrap().coeffs(), &[-1, 0, 1]);
        assert_eq!(hermite_coeffs(3).unwrap().coeffs(), &[0, -3, 0, 1]);
    }

    #[test]
    fn explicit_low_degrees() {
        assert_eq!(hermite_coeffs_explicit(0).unwrap().coeffs(), &[1]);
        assert_eq!(hermite_coeffs_explicit(1).unwrap().coeffs(), &[0, 1]);
        assert_eq!(hermite_coeffs_explicit(4).unwrap().coeffs(), &[3, 0, -6, 0, 1]);
    }

    #[test]
    fn degree_guard() {
        assert_eq!(
            hermite_coeffs(31),
            Err(Error::DegreeOverflow { degree: 31, max: 30 })
        );
        assert!(matches!(
            hermite_coeffs_explicit(31),
            Err(Error::DegreeOverflow { .. })
        ));
        assert!(hermite_coeffs(30).is_ok());
    }

    #[test]
    fn evaluation() {
        assert_eq!(hermite_eval(1, 2.5).unwrap(), 2.5);
        assert_eq!(hermite_eval(2, 3.0).unwrap(), 8.0);
        assert_eq!(hermite_eval(4, 0.0).unwrap(), 3.0);
    }

    #[test]
    fn scaled_evaluation() {
        assert_eq!(hermite_scaled_eval(2, 3.0, 4.0).unwrap(), 5.0);
        assert_eq!(hermite_scaled_eval(3, 2.0, 0.0).unwrap(), 8.0);
        for n in 0..=10 {
            for x in [-2.0, 0.0, 1.5] {
                let a = hermite_scaled_eval(n, x, 1.0).unwrap();
                let b = hermite_eval(n, x).unwrap();
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn negative_variance_rejected() {
        assert!(matches!(
            hermite_scaled_eval(2, 1.0, -1e-9),
            Err(Error::Domain(_))
        ));
    }
}
