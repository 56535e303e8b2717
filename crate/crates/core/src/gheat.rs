//! Explicit finite differences for the G-heat equation
//! `du/dt = G(d^2u/dx^2)`, `u(0, x) = phi(x)`, whose value `u(T, 0)` is the
//! sublinear expectation of `phi(B_T)`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::payoff::Payoff;
use crate::scenario::VolatilityBounds;

/// `G(alpha) = (sigma_hi^2 alpha^+ - sigma_lo^2 alpha^-) / 2`.
pub fn g_function(alpha: f64, bounds: &VolatilityBounds) -> f64 {
    bounds.g(alpha)
}

/// Largest admissible `sigma_hi^2 dt / dx^2`; the stencil is monotone up to it.
pub const MAX_CFL_RATIO: f64 = 1.0;
/// Ratio used by [`PdeConfig::auto`].
pub const AUTO_CFL_RATIO: f64 = 0.8;
/// Default half-width in units of `sigma_hi sqrt(T)`.
pub const DEFAULT_WIDTH_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PdeConfig {
    pub bounds: VolatilityBounds,
    pub horizon: f64,
    pub half_width: f64,
    pub space_steps: usize,
    pub time_steps: usize,
}

impl PdeConfig {
    /// `half_width = 6 sigma_hi sqrt(T)` and the fewest time steps keeping
    /// the CFL ratio at or below [`AUTO_CFL_RATIO`].
    pub fn auto(bounds: VolatilityBounds, horizon: f64, space_steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::PdeConfig(format!("horizon must be positive, got {horizon}")));
        }
        let half_width = DEFAULT_WIDTH_SIGMAS * bounds.sigma_hi() * libm::sqrt(horizon);
        let dx = 2.0 * half_width / space_steps.max(1) as f64;
        let s2 = bounds.sigma_hi() * bounds.sigma_hi();
        let time_steps = (libm::ceil(s2 * horizon / (AUTO_CFL_RATIO * dx * dx)) as usize).max(1);
        let cfg = PdeConfig {
            bounds,
            horizon,
            half_width,
            space_steps,
            time_steps,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.space_steps as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.time_steps as f64
    }

    /// `sigma_hi^2 dt / dx^2`.
    pub fn cfl_ratio(&self) -> f64 {
        let dx = self.dx();
        self.bounds.sigma_hi() * self.bounds.sigma_hi() * self.dt() / (dx * dx)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::PdeConfig(format!(
                "horizon must be positive, got {}",
                self.horizon
            )));
        }
        if !(self.half_width.is_finite() && self.half_width > 0.0) {
            return Err(Error::PdeConfig(format!(
                "half width must be positive, got {}",
                self.half_width
            )));
        }
        if self.space_steps < 4 || self.space_steps % 2 != 0 {
            return Err(Error::PdeConfig(format!(
                "space steps must be even and at least 4, got {}",
                self.space_steps
            )));
        }
        if self.time_steps == 0 {
            return Err(Error::PdeConfig("time steps must be positive".into()));
        }
        let ratio = self.cfl_ratio();
        if ratio > MAX_CFL_RATIO {
            return Err(Error::PdeConfig(format!(
                "CFL violated: sigma_hi^2 dt / dx^2 = {ratio} > {MAX_CFL_RATIO}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GHeatSolution {
    /// `u(T, 0)`
    pub value_at_zero: f64,
    pub xs: Vec<f64>,
    /// `u(T, x)` on `xs`.
    pub profile: Vec<f64>,
}

/// Marches `u^{k+1}_j = u^k_j + dt G((u^k_{j+1} - 2u^k_j + u^k_{j-1}) / dx^2)`
/// on `x_j = (j - M/2) dx`; the two boundary nodes are refreshed each step by
/// linear extrapolation from the interior.
pub fn solve_gheat(phi: &Payoff, cfg: &PdeConfig) -> Result<GHeatSolution> {
    cfg.validate()?;
    if !phi.is_finite() {
        return Err(Error::PdeConfig(format!("payoff {phi} has non-finite parameters")));
    }
    let m = cfg.space_steps;
    let dx = cfg.dx();
    let dt = cfg.dt();
    let inv_dx2 = 1.0 / (dx * dx);
    let xs: Vec<f64> = (0..=m).map(|j| (j as f64 - (m / 2) as f64) * dx).collect();
    let mut u: Vec<f64> = xs.iter().map(|&x| phi.eval(x)).collect();
    let mut next = u.clone();
    for _ in 0..cfg.time_steps {
        for j in 1..m {
            let second = (u[j + 1] - 2.0 * u[j] + u[j - 1]) * inv_dx2;
            next[j] = u[j] + dt * cfg.bounds.g(second);
        }
        next[0] = 2.0 * next[1] - next[2];
        next[m] = 2.0 * next[m - 1] - next[m - 2];
        core::mem::swap(&mut u, &mut next);
    }
    if let Some(bad) = u.iter().position(|v| !v.is_finite()) {
        return Err(Error::Internal(format!("non-finite PDE value at node {bad}")));
    }
    Ok(GHeatSolution {
        value_at_zero: u[m / 2],
        xs,
        profile: u,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds() -> VolatilityBounds {
        VolatilityBounds::new(0.5, 2.0).unwrap()
    }

    #[test]
    fn g_values() {
        assert_eq!(g_function(1.0, &bounds()), 2.0);
        assert_eq!(g_function(-1.0, &bounds()), -0.125);
        assert_eq!(g_function(0.0, &bounds()), 0.0);
    }

    #[test]
    fn linear_is_harmonic() {
        let cfg = PdeConfig::auto(bounds(), 1.0, 200).unwrap();
        let sol = solve_gheat(&Payoff::Linear, &cfg).unwrap();
        assert!(sol.value_at_zero.abs() < 1e-8);
    }

    #[test]
    fn convex_and_concave_extremes() {
        let cfg = PdeConfig::auto(bounds(), 1.0, 400).unwrap();
        let up = solve_gheat(&Payoff::Square, &cfg).unwrap().value_at_zero;
        let down = solve_gheat(&Payoff::NegSquare, &cfg).unwrap().value_at_zero;
        assert!((up - 4.0).abs() <= 0.01 * 4.0, "{up}");
        assert!((down + 0.25).abs() <= 0.01 * 0.25, "{down}");
    }

    #[test]
    fn cfl_guard() {
        let mut cfg = PdeConfig::auto(bounds(), 1.0, 100).unwrap();
        cfg.time_steps /= 2;
        assert!(matches!(solve_gheat(&Payoff::Square, &cfg), Err(Error::PdeConfig(_))));
        cfg.time_steps *= 2;
        cfg.space_steps = 101;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn profile_shape() {
        let cfg = PdeConfig::auto(bounds(), 0.5, 64).unwrap();
        let sol = solve_gheat(&Payoff::Abs, &cfg).unwrap();
        assert_eq!(sol.xs.len(), 65);
        assert_eq!(sol.xs[32], 0.0);
        assert_eq!(sol.profile[32], sol.value_at_zero);
    }
}
