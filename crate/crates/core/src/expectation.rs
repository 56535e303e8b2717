//! Sublinear expectations as maxima of Monte Carlo means over a finite
//! volatility-scenario sweep.
//!
//! All scenarios reuse the same Gaussian substreams (common random numbers).
//! Path values are reduced in index order with Welford's update, so results
//! do not depend on how a [`PathSampler`] schedules its work.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ito::{self, GridFunction};
use crate::payoff::Payoff;
use crate::rng::{self, DOMAIN_SCENARIO};
use crate::scenario::{
    build_scenario, simulate_path, BrownianPath, ScenarioKind, ScenarioPath, ScenarioSpec,
    TimeGrid, VolatilityBounds,
};

/// Standard-error multiple used by every acceptance margin.
pub const SE_MULTIPLIER: f64 = 3.0;
/// Highest chaos order accepted by [`chaos_moment_bound_check`].
pub const MAX_MOMENT_ORDER: usize = 5;

/// A path functional `X(path)`.
#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalSpec {
    Constant(f64),
    /// `phi(B_T)`
    Terminal(Payoff),
    /// `I_n(f^{(x) n})`
    Chaos { order: usize, f: GridFunction },
    /// `(int eta dB)^2`
    SquaredIto { eta: GridFunction },
    Square(Box<FunctionalSpec>),
    Neg(Box<FunctionalSpec>),
    Sum(Box<FunctionalSpec>, Box<FunctionalSpec>),
}

impl FunctionalSpec {
    pub fn square(self) -> Self {
        FunctionalSpec::Square(Box::new(self))
    }

    pub fn plus(self, other: FunctionalSpec) -> Self {
        FunctionalSpec::Sum(Box::new(self), Box::new(other))
    }

    /// Checks finiteness and that every integrand lives on `grid`.
    pub fn validate(&self, grid: &TimeGrid) -> Result<()> {
        let on_grid = |g: &GridFunction| {
            if g.grid() != grid {
                Err(Error::InvalidFunctional(format!(
                    "integrand on {} steps, sweep grid has {}",
                    g.grid().steps(),
                    grid.steps()
                )))
            } else {
                Ok(())
            }
        };
        match self {
            FunctionalSpec::Constant(c) if !c.is_finite() => {
                Err(Error::InvalidFunctional(format!("constant {c} is not finite")))
            }
            FunctionalSpec::Constant(_) => Ok(()),
            FunctionalSpec::Terminal(p) if !p.is_finite() => {
                Err(Error::InvalidFunctional(format!("payoff {p} has non-finite parameters")))
            }
            FunctionalSpec::Terminal(_) => Ok(()),
            FunctionalSpec::Chaos { f, .. } => on_grid(f),
            FunctionalSpec::SquaredIto { eta } => on_grid(eta),
            FunctionalSpec::Square(x) | FunctionalSpec::Neg(x) => x.validate(grid),
            FunctionalSpec::Sum(x, y) => {
                x.validate(grid)?;
                y.validate(grid)
            }
        }
    }

    pub fn evaluate(&self, path: &BrownianPath) -> Result<f64> {
        Ok(match self {
            FunctionalSpec::Constant(c) => *c,
            FunctionalSpec::Terminal(p) => p.eval(path.terminal()),
            FunctionalSpec::Chaos { order, f } => {
                ito::multiple_integral(ito::Integrand::Product { f, order: *order }, path)?
            }
            FunctionalSpec::SquaredIto { eta } => {
                let v = ito::ito_integral(eta, path)?;
                v * v
            }
            FunctionalSpec::Square(x) => {
                let v = x.evaluate(path)?;
                v * v
            }
            FunctionalSpec::Neg(x) => -x.evaluate(path)?,
            FunctionalSpec::Sum(x, y) => x.evaluate(path)? + y.evaluate(path)?,
        })
    }
}

impl core::ops::Neg for FunctionalSpec {
    type Output = FunctionalSpec;

    fn neg(self) -> FunctionalSpec {
        FunctionalSpec::Neg(Box::new(self))
    }
}

impl core::fmt::Display for FunctionalSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FunctionalSpec::Constant(c) => write!(f, "{c}"),
            FunctionalSpec::Terminal(p) => write!(f, "phi[{p}](B_T)"),
            FunctionalSpec::Chaos { order, .. } => write!(f, "I_{order}(f)"),
            FunctionalSpec::SquaredIto { .. } => write!(f, "(int eta dB)^2"),
            FunctionalSpec::Square(x) => write!(f, "({x})^2"),
            FunctionalSpec::Neg(x) => write!(f, "-({x})"),
            FunctionalSpec::Sum(x, y) => write!(f, "({x}) + ({y})"),
        }
    }
}

/// Evaluates a functional on paths `0..count` of one scenario.
pub trait PathSampler {
    /// Returns the values in path-index order.
    fn sample(
        &self,
        scenario: &ScenarioPath,
        functional: &FunctionalSpec,
        count: usize,
        seed: u64,
    ) -> Result<Vec<f64>>;
}

/// Single-threaded sampler.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl PathSampler for Sequential {
    fn sample(
        &self,
        scenario: &ScenarioPath,
        functional: &FunctionalSpec,
        count: usize,
        seed: u64,
    ) -> Result<Vec<f64>> {
        (0..count as u64)
            .map(|j| functional.evaluate(&simulate_path(scenario, seed, j)))
            .collect()
    }
}

/// Mean and standard error by Welford's update, in slice order.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (k, &x) in values.iter().enumerate() {
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    let n = values.len();
    if n < 2 {
        return (mean, 0.0);
    }
    let var = (m2 / (n - 1) as f64).max(0.0);
    (mean, libm::sqrt(var / n as f64))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ScenarioRow {
    pub id: usize,
    pub spec: ScenarioSpec,
    pub kind: ScenarioKind,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EstimateReport {
    pub functional: String,
    pub bounds: VolatilityBounds,
    pub grid: TimeGrid,
    pub rows: Vec<ScenarioRow>,
    pub paths_per_scenario: usize,
    pub upper: f64,
    pub lower: f64,
    pub argmax: usize,
    pub argmin: usize,
    pub seed: u64,
}

impl EstimateReport {
    pub fn upper_se(&self) -> f64 {
        self.rows[self.argmax].std_error
    }

    pub fn lower_se(&self) -> f64 {
        self.rows[self.argmin].std_error
    }
}

/// Seed handed to [`build_scenario`] for scenario number `index`.
pub fn scenario_seed(seed: u64, index: usize) -> u64 {
    rng::substream_key(seed, DOMAIN_SCENARIO, index as u64)
}

fn require_endpoints(bounds: &VolatilityBounds, scenarios: &[ScenarioSpec]) -> Result<()> {
    if scenarios.is_empty() {
        return Err(Error::EmptyScenarios);
    }
    let has = |target: f64| {
        scenarios
            .iter()
            .any(|s| matches!(s, ScenarioSpec::Constant { sigma } if *sigma == target))
    };
    if !has(bounds.sigma_lo()) || !has(bounds.sigma_hi()) {
        return Err(Error::ScenarioSpec(format!(
            "sweep must contain the constant scenarios {} and {}",
            bounds.sigma_lo(),
            bounds.sigma_hi()
        )));
    }
    Ok(())
}

/// `max` over scenarios of the Monte Carlo mean of `x`; the report also
/// carries the minimum.
#[allow(clippy::too_many_arguments)]
pub fn upper_expectation(
    x: &FunctionalSpec,
    bounds: &VolatilityBounds,
    grid: &TimeGrid,
    scenarios: &[ScenarioSpec],
    paths_per_scenario: usize,
    seed: u64,
    sampler: &dyn PathSampler,
) -> Result<EstimateReport> {
    require_endpoints(bounds, scenarios)?;
    if paths_per_scenario == 0 {
        return Err(Error::ScenarioSpec("paths per scenario must be positive".into()));
    }
    x.validate(grid)?;
    let mut rows = Vec::with_capacity(scenarios.len());
    for (id, spec) in scenarios.iter().enumerate() {
        let scenario = build_scenario(*bounds, *grid, spec, scenario_seed(seed, id))?;
        let values = sampler.sample(&scenario, x, paths_per_scenario, seed)?;
        let (mean, std_error) = mean_and_se(&values);
        rows.push(ScenarioRow {
            id,
            spec: spec.clone(),
            kind: scenario.kind(),
            mean,
            std_error,
        });
    }
    let mut argmax = 0;
    let mut argmin = 0;
    for (k, row) in rows.iter().enumerate() {
        if row.mean > rows[argmax].mean {
            argmax = k;
        }
        if row.mean < rows[argmin].mean {
            argmin = k;
        }
    }
    Ok(EstimateReport {
        functional: x.to_string(),
        bounds: *bounds,
        grid: *grid,
        upper: rows[argmax].mean,
        lower: rows[argmin].mean,
        rows,
        paths_per_scenario,
        argmax,
        argmin,
        seed,
    })
}

/// `-upper(-x)`, reported with the roles of the extremes swapped back so
/// that `lower` is the lower expectation of `x`.
#[allow(clippy::too_many_arguments)]
pub fn lower_expectation(
    x: &FunctionalSpec,
    bounds: &VolatilityBounds,
    grid: &TimeGrid,
    scenarios: &[ScenarioSpec],
    paths_per_scenario: usize,
    seed: u64,
    sampler: &dyn PathSampler,
) -> Result<EstimateReport> {
    let negated = -x.clone();
    let rep = upper_expectation(&negated, bounds, grid, scenarios, paths_per_scenario, seed, sampler)?;
    Ok(EstimateReport {
        functional: x.to_string(),
        upper: -rep.lower,
        lower: -rep.upper,
        argmax: rep.argmin,
        argmin: rep.argmax,
        rows: rep
            .rows
            .into_iter()
            .map(|r| ScenarioRow { mean: -r.mean, ..r })
            .collect(),
        ..rep
    })
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MomentBoundReport {
    pub lhs: EstimateReport,
    pub rhs: f64,
    /// `lhs.upper - rhs`
    pub slack: f64,
    /// `SE_MULTIPLIER` times the standard error of the maximizing scenario.
    pub allowance: f64,
    pub holds: bool,
}

impl MomentBoundReport {
    fn new(lhs: EstimateReport, rhs: f64) -> Self {
        let slack = lhs.upper - rhs;
        let allowance = SE_MULTIPLIER * lhs.upper_se();
        MomentBoundReport {
            holds: slack <= allowance,
            lhs,
            rhs,
            slack,
            allowance,
        }
    }
}

/// `E[(int eta dB)^2] <= sigma_hi^2 sum eta_i^2 dt` for a deterministic step
/// integrand.
#[allow(clippy::too_many_arguments)]
pub fn moment_bound_check(
    eta: &GridFunction,
    bounds: &VolatilityBounds,
    grid: &TimeGrid,
    scenarios: &[ScenarioSpec],
    paths_per_scenario: usize,
    seed: u64,
    sampler: &dyn PathSampler,
) -> Result<MomentBoundReport> {
    let x = FunctionalSpec::SquaredIto { eta: eta.clone() };
    let lhs = upper_expectation(&x, bounds, grid, scenarios, paths_per_scenario, seed, sampler)?;
    let rhs = bounds.sigma_hi() * bounds.sigma_hi() * eta.l2_norm_sq();
    Ok(MomentBoundReport::new(lhs, rhs))
}

/// `E[(I_n)^2] <= sigma_hi^{2n} n! (||f||^2)^n`.
#[allow(clippy::too_many_arguments)]
pub fn chaos_moment_bound_check(
    f: &GridFunction,
    order: usize,
    bounds: &VolatilityBounds,
    grid: &TimeGrid,
    scenarios: &[ScenarioSpec],
    paths_per_scenario: usize,
    seed: u64,
    sampler: &dyn PathSampler,
) -> Result<MomentBoundReport> {
    if order > MAX_MOMENT_ORDER {
        return Err(Error::CostLimit(format!(
            "chaos moment check limited to order {MAX_MOMENT_ORDER}, got {order}"
        )));
    }
    let x = FunctionalSpec::Chaos {
        order,
        f: f.clone(),
    }
    .square();
    let lhs = upper_expectation(&x, bounds, grid, scenarios, paths_per_scenario, seed, sampler)?;
    let s2n = crate::hermite::powi(bounds.sigma_hi() * bounds.sigma_hi(), order);
    let rhs = s2n * ito::factorial_f64(order) * crate::hermite::powi(f.l2_norm_sq(), order);
    Ok(MomentBoundReport::new(lhs, rhs))
}
