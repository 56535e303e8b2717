//! JSON run configuration.
//!
//! ```json
//! {
//!   "bounds": { "sigma_lo": 0.5, "sigma_hi": 2.0 },
//!   "horizon": 1.0,
//!   "grid_sizes": [256, 1024, 4096],
//!   "scenarios": [{ "kind": "sweep", "points": 9, "bang_bang": [0.05] }],
//!   "f": "affine(1, 0.5)",
//!   "chaos_orders": [2, 3, 4, 5],
//!   "paths_per_scenario": 1000,
//!   "seed": 42
//! }
//! ```
//!
//! Only `bounds`, `horizon` and `seed` are required; see [`RunConfig`] for the
//! defaults of the other keys.

use gchaos_core::expectation::SE_MULTIPLIER;
use gchaos_core::scenario::{build_scenario, sweep, ScenarioSpec, TimeGrid, VolatilityBounds};
use gchaos_core::{GridFunction, Payoff};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{path}: {message}")]
pub struct ConfigError {
    /// Dotted path of the offending field.
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Integrand `f` of the chaos checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FDescriptor {
    One,
    /// `f(t) = a + b t`
    Affine { a: f64, b: f64 },
    /// Piecewise constant on equal-width pieces of `[0, T]`.
    Samples(Vec<f64>),
}

impl FDescriptor {
    pub fn parse(text: &str) -> Result<Self, String> {
        let t = text.trim();
        if t == "one" {
            return Ok(FDescriptor::One);
        }
        if let Some(args) = t.strip_prefix("affine(").and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = args.split(',').map(str::trim).collect();
            if let [a, b] = parts.as_slice() {
                let a = a.parse::<f64>().map_err(|e| format!("affine intercept: {e}"))?;
                let b = b.parse::<f64>().map_err(|e| format!("affine slope: {e}"))?;
                if a.is_finite() && b.is_finite() {
                    return Ok(FDescriptor::Affine { a, b });
                }
            }
            return Err(format!("malformed affine descriptor `{t}`"));
        }
        Err(format!(
            "unknown integrand `{t}`, expected \"one\", \"affine(a,b)\" or {{\"samples\": [...]}}"
        ))
    }

    pub fn on_grid(&self, grid: TimeGrid) -> gchaos_core::Result<GridFunction> {
        match self {
            FDescriptor::One => GridFunction::constant(grid, 1.0),
            FDescriptor::Affine { a, b } => GridFunction::sample(grid, |t| a + b * t),
            FDescriptor::Samples(values) => {
                let pieces = values.len();
                let horizon = grid.horizon();
                GridFunction::sample(grid, |t| {
                    let k = ((t / horizon) * pieces as f64).floor() as usize;
                    values[k.min(pieces - 1)]
                })
            }
        }
    }

    pub fn is_one(&self) -> bool {
        matches!(self, FDescriptor::One)
    }
}

impl<'de> Deserialize<'de> for FDescriptor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Named(String),
            Samples {
                samples: Vec<f64>,
            },
        }
        match Raw::deserialize(d)? {
            Raw::Named(s) => FDescriptor::parse(&s).map_err(serde::de::Error::custom),
            Raw::Samples { samples } => {
                if samples.is_empty() || samples.iter().any(|v| !v.is_finite()) {
                    Err(serde::de::Error::custom("samples must be a nonempty list of finite numbers"))
                } else {
                    Ok(FDescriptor::Samples(samples))
                }
            }
        }
    }
}

/// A scenario entry: one of the core descriptors or a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioEntry {
    Constant { sigma: f64 },
    Piecewise { segments: Vec<(f64, f64)> },
    BangBang { switch_prob: f64 },
    /// `points` constants from `sigma_lo` to `sigma_hi` plus one bang-bang
    /// scenario per listed switching probability.
    Sweep {
        points: usize,
        #[serde(default)]
        bang_bang: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Relative RMS of the chaos identity at the finest grid.
    pub theorem_rel_rms: f64,
    /// Smallest acceptable empirical log2 convergence order.
    pub min_order: f64,
    /// Relative error below which a residual counts as rounding only.
    pub exact_rel: f64,
    pub recursion_rel: f64,
    pub corollary_rel: f64,
    pub se_multiplier: f64,
    /// Relative part of the PDE / Monte Carlo agreement margin.
    pub pde_rel: f64,
    /// Relative tolerance on the classical-limit variance `n! ||f||^{2n}`,
    /// widened by `se_multiplier` standard errors of the sample variance.
    pub classical_var_rel: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            theorem_rel_rms: 2e-2,
            min_order: 0.4,
            exact_rel: 1e-12,
            recursion_rel: 1e-10,
            corollary_rel: 1e-12,
            se_multiplier: SE_MULTIPLIER,
            pde_rel: 0.01,
            classical_var_rel: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsDoc {
    pub sigma_lo: f64,
    pub sigma_hi: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    bounds: BoundsDoc,
    horizon: f64,
    seed: u64,
    #[serde(default = "default_grid_sizes")]
    grid_sizes: Vec<usize>,
    #[serde(default = "default_scenarios")]
    scenarios: Vec<ScenarioEntry>,
    #[serde(default = "default_f")]
    f: FDescriptor,
    #[serde(default = "default_orders")]
    chaos_orders: Vec<usize>,
    #[serde(default = "default_paths")]
    paths_per_scenario: usize,
    #[serde(default)]
    output_dir: Option<String>,
    #[serde(default = "default_formats")]
    formats: Vec<Format>,
    #[serde(default)]
    thresholds: Thresholds,
    #[serde(default = "default_payoffs")]
    payoffs: Vec<Payoff>,
    #[serde(default = "default_pde_steps")]
    pde_space_steps: usize,
    #[serde(default)]
    export_paths: usize,
    #[serde(default = "default_moment_checks")]
    moment_checks: bool,
}

fn default_grid_sizes() -> Vec<usize> {
    vec![1024]
}
fn default_scenarios() -> Vec<ScenarioEntry> {
    vec![ScenarioEntry::Sweep {
        points: 9,
        bang_bang: vec![0.05],
    }]
}
fn default_f() -> FDescriptor {
    FDescriptor::One
}
fn default_orders() -> Vec<usize> {
    vec![2, 3, 4, 5]
}
fn default_paths() -> usize {
    1000
}
fn default_formats() -> Vec<Format> {
    vec![Format::Json, Format::Csv]
}
fn default_payoffs() -> Vec<Payoff> {
    vec![
        Payoff::Square,
        Payoff::NegSquare,
        Payoff::Abs,
        Payoff::Call { strike: 0.5 },
    ]
}
fn default_pde_steps() -> usize {
    400
}
fn default_moment_checks() -> bool {
    true
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub bounds: VolatilityBounds,
    pub horizon: f64,
    pub seed: u64,
    pub grid_sizes: Vec<usize>,
    pub scenario_entries: Vec<ScenarioEntry>,
    /// Entries with sweeps expanded.
    pub scenarios: Vec<ScenarioSpec>,
    pub f: FDescriptor,
    pub chaos_orders: Vec<usize>,
    pub paths_per_scenario: usize,
    pub output_dir: Option<String>,
    pub formats: Vec<Format>,
    pub thresholds: Thresholds,
    pub payoffs: Vec<Payoff>,
    pub pde_space_steps: usize,
    pub export_paths: usize,
    pub moment_checks: bool,
}

impl RunConfig {
    pub fn grid(&self, steps: usize) -> TimeGrid {
        TimeGrid::new(self.horizon, steps).expect("validated at parse time")
    }

    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }

    /// `sigma_lo = sigma_hi = 1`.
    pub fn is_classical(&self) -> bool {
        self.bounds == VolatilityBounds::classical()
    }

    /// Whether the scenario list contains the two endpoint constants needed
    /// by sublinear-expectation estimates.
    pub fn has_endpoint_scenarios(&self) -> bool {
        let has = |target: f64| {
            self.scenarios
                .iter()
                .any(|s| matches!(s, ScenarioSpec::Constant { sigma } if *sigma == target))
        };
        has(self.bounds.sigma_lo()) && has(self.bounds.sigma_hi())
    }
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." { "<root>".to_string() } else { path };
        ConfigError::new(path, e.into_inner().to_string())
    })?;
    validate(raw)
}

fn validate(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let bounds = VolatilityBounds::new(raw.bounds.sigma_lo, raw.bounds.sigma_hi)
        .map_err(|e| ConfigError::new("bounds", e.to_string()))?;
    if !(raw.horizon.is_finite() && raw.horizon > 0.0) {
        return Err(ConfigError::new("horizon", "must be positive and finite"));
    }
    if raw.grid_sizes.is_empty() {
        return Err(ConfigError::new("grid_sizes", "at least one grid size is required"));
    }
    for (k, &n) in raw.grid_sizes.iter().enumerate() {
        if !n.is_power_of_two() {
            return Err(ConfigError::new(
                format!("grid_sizes[{k}]"),
                format!("{n} is not a power of two"),
            ));
        }
    }
    if raw.scenarios.is_empty() {
        return Err(ConfigError::new("scenarios", "at least one scenario is required"));
    }
    let mut scenarios = Vec::new();
    for (k, entry) in raw.scenarios.iter().enumerate() {
        let expanded = match entry {
            ScenarioEntry::Constant { sigma } => vec![ScenarioSpec::Constant { sigma: *sigma }],
            ScenarioEntry::Piecewise { segments } => vec![ScenarioSpec::Piecewise {
                segments: segments.clone(),
            }],
            ScenarioEntry::BangBang { switch_prob } => vec![ScenarioSpec::BangBang {
                switch_prob: *switch_prob,
            }],
            ScenarioEntry::Sweep { points, bang_bang } => {
                if *points < 2 && bounds.sigma_lo() != bounds.sigma_hi() {
                    return Err(ConfigError::new(
                        format!("scenarios[{k}].points"),
                        "a sweep needs at least 2 points to reach both bounds",
                    ));
                }
                sweep(&bounds, (*points).max(1), bang_bang)
            }
        };
        let probe = TimeGrid::new(raw.horizon, raw.grid_sizes[0]).expect("checked above");
        for spec in &expanded {
            build_scenario(bounds, probe, spec, raw.seed)
                .map_err(|e| ConfigError::new(format!("scenarios[{k}]"), e.to_string()))?;
        }
        scenarios.extend(expanded);
    }
    if raw.chaos_orders.is_empty() {
        return Err(ConfigError::new("chaos_orders", "at least one order is required"));
    }
    if let Some(k) = raw.chaos_orders.iter().position(|&n| n == 0) {
        return Err(ConfigError::new(format!("chaos_orders[{k}]"), "orders start at 1"));
    }
    if raw.paths_per_scenario == 0 {
        return Err(ConfigError::new("paths_per_scenario", "must be positive"));
    }
    if raw.formats.is_empty() {
        return Err(ConfigError::new("formats", "at least one report format is required"));
    }
    for (k, p) in raw.payoffs.iter().enumerate() {
        if !p.is_finite() {
            return Err(ConfigError::new(format!("payoffs[{k}]"), "non-finite parameter"));
        }
    }
    if raw.pde_space_steps < 4 || raw.pde_space_steps % 2 != 0 {
        return Err(ConfigError::new("pde_space_steps", "must be even and at least 4"));
    }
    let t = raw.thresholds;
    for (name, v) in [
        ("theorem_rel_rms", t.theorem_rel_rms),
        ("min_order", t.min_order),
        ("exact_rel", t.exact_rel),
        ("recursion_rel", t.recursion_rel),
        ("corollary_rel", t.corollary_rel),
        ("se_multiplier", t.se_multiplier),
        ("pde_rel", t.pde_rel),
        ("classical_var_rel", t.classical_var_rel),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(ConfigError::new(
                format!("thresholds.{name}"),
                "must be finite and nonnegative",
            ));
        }
    }
    Ok(RunConfig {
        bounds,
        horizon: raw.horizon,
        seed: raw.seed,
        grid_sizes: raw.grid_sizes,
        scenario_entries: raw.scenarios,
        scenarios,
        f: raw.f,
        chaos_orders: raw.chaos_orders,
        paths_per_scenario: raw.paths_per_scenario,
        output_dir: raw.output_dir,
        formats: raw.formats,
        thresholds: raw.thresholds,
        payoffs: raw.payoffs,
        pde_space_steps: raw.pde_space_steps,
        export_paths: raw.export_paths,
        moment_checks: raw.moment_checks,
    })
}
