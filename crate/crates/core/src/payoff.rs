//! Terminal payoffs `phi(B_T)` shared by the Monte Carlo and PDE estimators.

use alloc::vec::Vec;

/// Catalog of terminal payoffs.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum Payoff {
    /// `x`
    Linear,
    /// `x^2`
    Square,
    /// `-x^2`
    NegSquare,
    /// `(x - strike)^+`
    Call { strike: f64 },
    /// `|x|`
    Abs,
    /// `sum_k coeffs[k] x^k`
    Polynomial { coeffs: Vec<f64> },
}

impl Payoff {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Payoff::Linear => x,
            Payoff::Square => x * x,
            Payoff::NegSquare => -x * x,
            Payoff::Call { strike } => (x - strike).max(0.0),
            Payoff::Abs => x.abs(),
            Payoff::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Payoff::Call { strike } => strike.is_finite(),
            Payoff::Polynomial { coeffs } => coeffs.iter().all(|c| c.is_finite()),
            _ => true,
        }
    }
}

impl core::fmt::Display for Payoff {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Payoff::Linear => write!(f, "x"),
            Payoff::Square => write!(f, "x^2"),
            Payoff::NegSquare => write!(f, "-x^2"),
            Payoff::Call { strike } => write!(f, "(x-{strike})+"),
            Payoff::Abs => write!(f, "|x|"),
            Payoff::Polynomial { coeffs } => write!(f, "poly{coeffs:?}"),
        }
    }
}
