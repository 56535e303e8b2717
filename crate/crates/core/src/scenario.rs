//! Time grids, admissible volatility scenarios and simulated paths.
//!
//! A path of G-Brownian motion is realized as a classical path whose
//! volatility on `[t_i, t_{i+1})` is `sigma_i` with
//! `sigma_lo <= sigma_i <= sigma_hi`, i.e. one admissible law inside
//! `N(0, [s sigma_lo^2, s sigma_hi^2])`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::{Stream, DOMAIN_INCREMENTS, DOMAIN_SCENARIO};

/// The volatility interval `[sigma_lo, sigma_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VolatilityBounds {
    sigma_lo: f64,
    sigma_hi: f64,
}

impl VolatilityBounds {
    pub fn new(sigma_lo: f64, sigma_hi: f64) -> Result<Self> {
        if !(sigma_lo.is_finite() && sigma_hi.is_finite()) {
            return Err(Error::InvalidBounds(format!(
                "bounds must be finite, got ({sigma_lo}, {sigma_hi})"
            )));
        }
        if sigma_lo < 0.0 {
            return Err(Error::InvalidBounds(format!(
                "sigma_lo must be nonnegative, got {sigma_lo}"
            )));
        }
        if sigma_hi <= 0.0 {
            return Err(Error::InvalidBounds(format!(
                "sigma_hi must be positive, got {sigma_hi}"
            )));
        }
        if sigma_lo > sigma_hi {
            return Err(Error::InvalidBounds(format!(
                "sigma_lo ({sigma_lo}) exceeds sigma_hi ({sigma_hi})"
            )));
        }
        Ok(VolatilityBounds { sigma_lo, sigma_hi })
    }

    /// `sigma_lo = sigma_hi = 1`: classical Brownian motion.
    pub fn classical() -> Self {
        VolatilityBounds {
            sigma_lo: 1.0,
            sigma_hi: 1.0,
        }
    }

    pub fn sigma_lo(&self) -> f64 {
        self.sigma_lo
    }

    pub fn sigma_hi(&self) -> f64 {
        self.sigma_hi
    }

    pub fn contains(&self, sigma: f64) -> bool {
        sigma >= self.sigma_lo && sigma <= self.sigma_hi
    }

    /// `G(alpha) = (sigma_hi^2 alpha^+ - sigma_lo^2 alpha^-) / 2`.
    pub fn g(&self, alpha: f64) -> f64 {
        if alpha >= 0.0 {
            0.5 * self.sigma_hi * self.sigma_hi * alpha
        } else {
            // alpha^- = -alpha
            0.5 * self.sigma_lo * self.sigma_lo * alpha
        }
    }
}

/// Uniform partition `0 = t_0 < ... < t_N = T`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidGrid("at least one step is required".into()));
        }
        Ok(TimeGrid { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    /// `t_i`; `t_N` is exactly the horizon.
    pub fn time(&self, i: usize) -> f64 {
        if i == self.steps {
            self.horizon
        } else {
            i as f64 * self.dt()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.steps).map(move |i| self.time(i))
    }
}

/// How a scenario is generated.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)
)]
pub enum ScenarioSpec {
    /// `sigma_i = sigma` for every step.
    Constant { sigma: f64 },
    /// Consecutive `(fraction_of_horizon, sigma)` segments; fractions sum to 1.
    Piecewise { segments: Vec<(f64, f64)> },
    /// Values in `{sigma_lo, sigma_hi}`, switching with probability
    /// `switch_prob` at each step.
    BangBang { switch_prob: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ScenarioKind {
    Constant,
    Piecewise,
    BangBangRandom,
}

/// One admissible volatility trajectory on a grid. Cloning is cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPath {
    grid: TimeGrid,
    bounds: VolatilityBounds,
    sigma: Arc<[f64]>,
    kind: ScenarioKind,
}

impl ScenarioPath {
    /// Wraps an explicit schedule after checking it against the bounds.
    pub fn from_schedule(
        bounds: VolatilityBounds,
        grid: TimeGrid,
        sigma: Vec<f64>,
        kind: ScenarioKind,
    ) -> Result<Self> {
        if sigma.len() != grid.steps() {
            return Err(Error::Shape(format!(
                "schedule has {} entries, grid has {} steps",
                sigma.len(),
                grid.steps()
            )));
        }
        if let Some(&bad) = sigma.iter().find(|&&s| !bounds.contains(s)) {
            return Err(Error::BoundsViolation {
                sigma: bad,
                lo: bounds.sigma_lo(),
                hi: bounds.sigma_hi(),
            });
        }
        Ok(ScenarioPath {
            grid,
            bounds,
            sigma: sigma.into(),
            kind,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn bounds(&self) -> &VolatilityBounds {
        &self.bounds
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }
}

/// Builds the volatility schedule described by `spec`.
///
/// Randomized switching draws from the scenario domain of `rng_seed`, a
/// stream disjoint from every Gaussian increment stream, so the schedule is
/// independent of the noise it will drive.
pub fn build_scenario(
    bounds: VolatilityBounds,
    grid: TimeGrid,
    spec: &ScenarioSpec,
    rng_seed: u64,
) -> Result<ScenarioPath> {
    let n = grid.steps();
    match spec {
        ScenarioSpec::Constant { sigma } => ScenarioPath::from_schedule(
            bounds,
            grid,
            alloc::vec![*sigma; n],
            ScenarioKind::Constant,
        ),
        ScenarioSpec::Piecewise { segments } => {
            if segments.is_empty() {
                return Err(Error::ScenarioSpec("piecewise scenario has no segments".into()));
            }
            if let Some(&(f, _)) = segments.iter().find(|(f, _)| !(f.is_finite() && *f > 0.0)) {
                return Err(Error::ScenarioSpec(format!(
                    "segment fractions must be positive, got {f}"
                )));
            }
            let total: f64 = segments.iter().map(|(f, _)| f).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::ScenarioSpec(format!(
                    "segment fractions sum to {total}, expected 1"
                )));
            }
            let mut edges = Vec::with_capacity(segments.len());
            let mut acc = 0.0;
            for (f, _) in segments {
                acc += f;
                edges.push(acc);
            }
            // Step i takes the segment containing its midpoint.
            let sigma = (0..n)
                .map(|i| {
                    let mid = (i as f64 + 0.5) / n as f64;
                    let k = edges
                        .iter()
                        .position(|&e| mid < e)
                        .unwrap_or(segments.len() - 1);
                    segments[k].1
                })
                .collect();
            ScenarioPath::from_schedule(bounds, grid, sigma, ScenarioKind::Piecewise)
        }
        ScenarioSpec::BangBang { switch_prob } => {
            if !(0.0..=1.0).contains(switch_prob) {
                return Err(Error::ScenarioSpec(format!(
                    "switch probability must lie in [0, 1], got {switch_prob}"
                )));
            }
            let mut stream = Stream::new(rng_seed, DOMAIN_SCENARIO, 0);
            let (lo, hi) = (bounds.sigma_lo(), bounds.sigma_hi());
            let mut high = stream.uniform() < 0.5;
            let mut sigma = Vec::with_capacity(n);
            for i in 0..n {
                if i > 0 && stream.uniform() < *switch_prob {
                    high = !high;
                }
                sigma.push(if high { hi } else { lo });
            }
            ScenarioPath::from_schedule(bounds, grid, sigma, ScenarioKind::BangBangRandom)
        }
    }
}

/// Constants on `points` equally spaced volatilities from `sigma_lo` to
/// `sigma_hi` (both ends included), followed by one bang-bang scenario per
/// switching probability.
pub fn sweep(bounds: &VolatilityBounds, points: usize, bang_bang: &[f64]) -> Vec<ScenarioSpec> {
    let (lo, hi) = (bounds.sigma_lo(), bounds.sigma_hi());
    let mut out: Vec<ScenarioSpec> = match points {
        0 => Vec::new(),
        1 => alloc::vec![ScenarioSpec::Constant { sigma: hi }],
        _ => (0..points)
            .map(|k| {
                let sigma = if k + 1 == points {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (points - 1) as f64
                };
                ScenarioSpec::Constant { sigma }
            })
            .collect(),
    };
    out.extend(
        bang_bang
            .iter()
            .map(|&switch_prob| ScenarioSpec::BangBang { switch_prob }),
    );
    out
}

/// One simulated path with both quadratic-variation records.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianPath {
    scenario: ScenarioPath,
    increments: Vec<f64>,
    values: Vec<f64>,
    qv_scenario: Vec<f64>,
    qv_realized: Vec<f64>,
}

impl BrownianPath {
    /// Assembles a path from explicit increments `dB_i`.
    pub fn from_increments(scenario: ScenarioPath, increments: Vec<f64>) -> Result<Self> {
        let n = scenario.grid().steps();
        if increments.len() != n {
            return Err(Error::Shape(format!(
                "{} increments for a grid of {} steps",
                increments.len(),
                n
            )));
        }
        let dt = scenario.grid().dt();
        let mut values = Vec::with_capacity(n + 1);
        let mut qv_scenario = Vec::with_capacity(n + 1);
        let mut qv_realized = Vec::with_capacity(n + 1);
        let (mut b, mut qs, mut qr) = (0.0, 0.0, 0.0);
        values.push(b);
        qv_scenario.push(qs);
        qv_realized.push(qr);
        for (&db, &s) in increments.iter().zip(scenario.sigma()) {
            b += db;
            qs += s * s * dt;
            qr += db * db;
            values.push(b);
            qv_scenario.push(qs);
            qv_realized.push(qr);
        }
        Ok(BrownianPath {
            scenario,
            increments,
            values,
            qv_scenario,
            qv_realized,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        self.scenario.grid()
    }

    pub fn scenario(&self) -> &ScenarioPath {
        &self.scenario
    }

    /// `dB_i = B_{t_{i+1}} - B_{t_i}`, length `N`.
    pub fn increments(&self) -> &[f64] {
        &self.increments
    }

    /// `B_{t_i}`, length `N + 1`, starting at 0.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn terminal(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Running `sum sigma_j^2 dt`, length `N + 1`.
    pub fn qv_scenario(&self) -> &[f64] {
        &self.qv_scenario
    }

    /// Running `sum (dB_j)^2`, length `N + 1`.
    pub fn qv_realized(&self) -> &[f64] {
        &self.qv_realized
    }

    pub fn terminal_qv_realized(&self) -> f64 {
        self.qv_realized[self.qv_realized.len() - 1]
    }

    pub fn terminal_qv_scenario(&self) -> f64 {
        self.qv_scenario[self.qv_scenario.len() - 1]
    }
}

/// Path number `index` of the family seeded by `master_seed`.
pub fn simulate_path(scenario: &ScenarioPath, master_seed: u64, index: u64) -> BrownianPath {
    let mut stream = Stream::new(master_seed, DOMAIN_INCREMENTS, index);
    let sqrt_dt = libm::sqrt(scenario.grid().dt());
    let increments = scenario
        .sigma()
        .iter()
        .map(|&s| s * sqrt_dt * stream.standard_normal())
        .collect();
    BrownianPath::from_increments(scenario.clone(), increments)
        .expect("increment count matches the grid by construction")
}

/// Paths `0..count`; path `j` depends only on `(master_seed, j)`.
pub fn simulate_paths(scenario: &ScenarioPath, count: usize, master_seed: u64) -> Vec<BrownianPath> {
    (0..count as u64)
        .map(|j| simulate_path(scenario, master_seed, j))
        .collect()
}

/// Partial sums `sum_{j<i} (dB_j)^2`, `i = 0..=N`.
pub fn realized_qv_series(path: &BrownianPath) -> Vec<f64> {
    path.qv_realized().to_vec()
}
