//! Pathwise residuals of the Hermite chaos identity, its three-term
//! recursion and the constant-integrand closed form, pooled over scenarios.

use gchaos_core::expectation::{mean_and_se, scenario_seed};
use gchaos_core::hermite::{hermite_coeffs, MAX_DEGREE};
use gchaos_core::ito::{
    chaos_inputs, closed_form, corollary_closed_form, corollary_magnitude, iterated_ladder,
    recurrence_gap, recurrence_scale,
};
use gchaos_core::scenario::{build_scenario, simulate_path};
use gchaos_core::{ChaosPolynomial, GridFunction, QvKind, Result, ScenarioPath, ScenarioSpec};
use rayon::prelude::*;

use crate::config::RunConfig;

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Residual statistics of one order on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStats {
    pub order: usize,
    pub steps: usize,
    pub paths: usize,
    /// RMS of `I_n - H_n(theta, ||f||^2)`.
    pub rms_error: f64,
    /// RMS of `H_n(theta, ||f||^2)`.
    pub rms_reference: f64,
    /// Largest closed-form recursion gap relative to its term scale.
    pub recursion_closed_max_rel: f64,
    /// RMS of the recursion gap with discrete `I_k`.
    pub recursion_discrete_rms: f64,
    /// Largest corollary discrepancy relative to its term magnitude.
    pub corollary_max_rel: f64,
    /// Moments of `I_n` on the first scenario.
    pub first_scenario: SampleMoments,
}

impl OrderStats {
    pub fn rel_rms(&self) -> f64 {
        relative(self.rms_error, self.rms_reference)
    }

    pub fn recursion_discrete_rel(&self) -> f64 {
        relative(self.recursion_discrete_rms, self.rms_reference)
    }
}

/// `err / reference`, or `err` itself when the reference vanishes.
pub fn relative(err: f64, reference: f64) -> f64 {
    if reference > 0.0 {
        err / reference
    } else {
        err
    }
}

/// Mean and variance of a sample with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleMoments {
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    /// `sqrt((m4 - variance^2) / n)`
    pub variance_se: f64,
}

impl SampleMoments {
    pub fn of(values: &[f64]) -> Self {
        let (mean, mean_se) = mean_and_se(values);
        let n = values.len() as f64;
        let variance = mean_se * mean_se * n;
        let m4 = values.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
        SampleMoments {
            mean,
            mean_se,
            variance,
            variance_se: ((m4 - variance * variance).max(0.0) / n).sqrt(),
        }
    }
}

/// Empirical convergence order between two grids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Order {
    /// Both errors are at rounding level.
    Exact,
    Value(f64),
}

impl Order {
    pub fn between(e0: f64, n0: usize, e1: f64, n1: usize, exact: f64) -> Order {
        if e0 <= exact && e1 <= exact {
            return Order::Exact;
        }
        Order::Value((e0 / e1).ln() / (n1 as f64 / n0 as f64).ln())
    }

    pub fn meets(&self, min: f64) -> bool {
        match self {
            Order::Exact => true,
            Order::Value(p) => *p >= min,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Order::Exact => "exact".to_string(),
            Order::Value(p) => format!("{p:.16e}"),
        }
    }
}

struct PathOutcome {
    /// Per order: `(I_n, H_n, closed rel gap, discrete gap, corollary rel)`.
    per_order: Vec<(f64, f64, f64, f64, f64)>,
}

fn path_outcome(
    f: &GridFunction,
    polys: &[ChaosPolynomial],
    orders: &[usize],
    scenario: &ScenarioPath,
    seed: u64,
    index: u64,
) -> Result<PathOutcome> {
    let path = simulate_path(scenario, seed, index);
    let top = *orders.iter().max().unwrap_or(&0);
    let ladder = iterated_ladder(f, &path, top)?;
    let discrete: Vec<f64> = ladder.iter().enumerate().map(|(k, j)| factorial(k) * j).collect();
    let (theta, v) = chaos_inputs(f, &path, QvKind::Realized)?;
    let closed: Vec<f64> = polys
        .iter()
        .take(top + 1)
        .map(|p| closed_form(p, theta, v))
        .collect::<Result<_>>()?;
    let b = path.terminal();
    let q = path.terminal_qv_realized();
    let mut per_order = Vec::with_capacity(orders.len());
    for &n in orders {
        let (closed_rel, disc_gap) = if n >= 2 {
            let gap = recurrence_gap(n, theta, v, closed[n], closed[n - 1], closed[n - 2]);
            let scale = recurrence_scale(n, theta, v, closed[n], closed[n - 1], closed[n - 2]);
            let d = recurrence_gap(n, theta, v, discrete[n], discrete[n - 1], discrete[n - 2]);
            (gap.abs() / scale, d)
        } else {
            (0.0, 0.0)
        };
        let cor = corollary_closed_form(&path, n, QvKind::Realized);
        let via_theorem = closed_form(&polys[n], b, q)? / factorial(n);
        let cor_rel = (cor - via_theorem).abs() / corollary_magnitude(n, b, q).max(f64::MIN_POSITIVE);
        per_order.push((discrete[n], closed[n], closed_rel, disc_gap, cor_rel));
    }
    Ok(PathOutcome { per_order })
}

/// Result of [`chaos_sweep`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosSweep {
    /// Orders that could be evaluated, ascending.
    pub orders: Vec<usize>,
    /// Orders rejected by the Hermite degree guard, with the error text.
    pub rejected: Vec<(usize, String)>,
    /// Indexed `[grid][order]` in config grid order.
    pub stats: Vec<Vec<OrderStats>>,
    /// Scenarios left after dropping duplicate schedules.
    pub distinct_scenarios: usize,
}

/// Runs every configured scenario on every grid size with
/// `paths_per_scenario` paths each.
pub fn chaos_sweep(cfg: &RunConfig) -> Result<ChaosSweep> {
    let mut orders: Vec<usize> = cfg.chaos_orders.clone();
    orders.sort_unstable();
    orders.dedup();
    let mut rejected = Vec::new();
    let mut polys = Vec::new();
    let top = orders.iter().copied().filter(|&n| n <= MAX_DEGREE).max().unwrap_or(0);
    for k in 0..=top {
        polys.push(hermite_coeffs(k)?);
    }
    orders.retain(|&n| match hermite_coeffs(n) {
        Ok(_) => true,
        Err(e) => {
            rejected.push((n, e.to_string()));
            false
        }
    });

    let mut stats = Vec::with_capacity(cfg.grid_sizes.len());
    let mut distinct_scenarios = 0;
    for &steps in &cfg.grid_sizes {
        let grid = cfg.grid(steps);
        let f = cfg.f.on_grid(grid)?;
        let scenarios = distinct(cfg, &cfg.scenarios, steps)?;
        distinct_scenarios = scenarios.len();
        let paths = cfg.paths_per_scenario;
        let mut outcomes: Vec<Vec<PathOutcome>> = Vec::with_capacity(scenarios.len());
        for scenario in &scenarios {
            let batch = (0..paths as u64)
                .into_par_iter()
                .map(|j| path_outcome(&f, &polys, &orders, scenario, cfg.seed, j))
                .collect::<Result<Vec<_>>>()?;
            outcomes.push(batch);
        }
        let total = (paths * scenarios.len()) as f64;
        let mut row = Vec::with_capacity(orders.len());
        for (k, &n) in orders.iter().enumerate() {
            let mut err2 = 0.0;
            let mut ref2 = 0.0;
            let mut closed_max: f64 = 0.0;
            let mut disc2 = 0.0;
            let mut cor_max: f64 = 0.0;
            for batch in &outcomes {
                for o in batch {
                    let (i_n, h_n, closed_rel, disc_gap, cor_rel) = o.per_order[k];
                    err2 += (i_n - h_n) * (i_n - h_n);
                    ref2 += h_n * h_n;
                    closed_max = closed_max.max(closed_rel);
                    disc2 += disc_gap * disc_gap;
                    cor_max = cor_max.max(cor_rel);
                }
            }
            let first: Vec<f64> = outcomes[0].iter().map(|o| o.per_order[k].0).collect();
            row.push(OrderStats {
                order: n,
                steps,
                paths: total as usize,
                rms_error: (err2 / total).sqrt(),
                rms_reference: (ref2 / total).sqrt(),
                recursion_closed_max_rel: closed_max,
                recursion_discrete_rms: (disc2 / total).sqrt(),
                corollary_max_rel: cor_max,
                first_scenario: SampleMoments::of(&first),
            });
        }
        stats.push(row);
    }
    Ok(ChaosSweep {
        orders,
        rejected,
        stats,
        distinct_scenarios,
    })
}

/// Builds the scenarios on `steps` and drops schedules identical to an
/// earlier one; with shared random numbers they would repeat the same paths.
pub(crate) fn distinct(cfg: &RunConfig, specs: &[ScenarioSpec], steps: usize) -> Result<Vec<ScenarioPath>> {
    let grid = cfg.grid(steps);
    let mut out: Vec<ScenarioPath> = Vec::new();
    for (id, spec) in specs.iter().enumerate() {
        let s = build_scenario(cfg.bounds, grid, spec, scenario_seed(cfg.seed, id))?;
        if !out.iter().any(|o| o.sigma() == s.sigma()) {
            out.push(s);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_rule() {
        assert_eq!(Order::between(0.0, 256, 1e-16, 1024, 1e-12), Order::Exact);
        let Order::Value(p) = Order::between(4e-2, 256, 1e-2, 1024, 1e-12) else {
            panic!()
        };
        assert!((p - 1.0).abs() < 1e-12);
        assert!(!Order::Value(f64::NAN).meets(0.4));
        assert!(Order::between(1e-3, 256, 0.0, 1024, 1e-12).meets(0.4));
    }

    #[test]
    fn relative_falls_back_to_absolute() {
        assert_eq!(relative(0.0, 0.0), 0.0);
        assert_eq!(relative(2.0, 4.0), 0.5);
    }
}
