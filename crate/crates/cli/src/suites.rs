//! The five commands.

use gchaos_core::expectation::{
    chaos_moment_bound_check, moment_bound_check, upper_expectation, MomentBoundReport,
    MAX_MOMENT_ORDER,
};
use gchaos_core::gheat::solve_gheat;
use gchaos_core::hermite::hermite_coeffs;
use gchaos_core::scenario::simulate_path;
use gchaos_core::{FunctionalSpec, GridFunction, Payoff, PdeConfig};
use serde_json::json;

use crate::chaos::{chaos_sweep, distinct, factorial, ChaosSweep, Order};
use crate::config::{ConfigError, RunConfig};
use crate::report::{Cell, Check, Report, Table};
use crate::sampler::Parallel;

/// Highest order used by the classical-limit mean and variance checks.
pub const CLASSICAL_MAX_ORDER: usize = 3;

fn config_json(cfg: &RunConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

fn require_endpoints(cfg: &RunConfig) -> Result<(), ConfigError> {
    if cfg.has_endpoint_scenarios() {
        Ok(())
    } else {
        Err(ConfigError::new(
            "scenarios",
            format!(
                "expectation estimates need constant scenarios at sigma_lo = {} and sigma_hi = {}",
                cfg.bounds.sigma_lo(),
                cfg.bounds.sigma_hi()
            ),
        ))
    }
}

fn core_failure(report: &mut Report, name: &str, err: gchaos_core::Error) {
    report.check(Check::failed(name, err.to_string()));
}

fn grid_pair(a: usize, b: usize) -> String {
    format!("{a}->{b}")
}

/// Relative-RMS and order checks for one residual series.
fn convergence_checks(
    report: &mut Report,
    cfg: &RunConfig,
    prefix: &str,
    series: &[(usize, f64)],
    with_level: bool,
) -> Vec<Option<Order>> {
    let th = &cfg.thresholds;
    let mut orders = vec![None];
    for w in series.windows(2) {
        let ((n0, e0), (n1, e1)) = (w[0], w[1]);
        let order = Order::between(e0, n0, e1, n1, th.exact_rel);
        let name = format!("{prefix}.order[{}]", grid_pair(n0, n1));
        report.check(match order {
            Order::Exact => Check::passed(name, "rounding-level residual on both grids"),
            Order::Value(p) => Check::at_least(name, p, th.min_order, ""),
        });
        orders.push(Some(order));
    }
    if with_level {
        let &(n, e) = series.last().expect("at least one grid");
        report.check(Check::at_most(
            format!("{prefix}.rel_rms[N={n}]"),
            e,
            th.theorem_rel_rms,
            "",
        ));
    }
    orders
}

fn theorem_table(sweep: &ChaosSweep, orders: &[Vec<Option<Order>>]) -> Table {
    let mut t = Table::new("theorem", &["n", "N", "paths", "rms_error", "rel_rms", "order"]);
    for (k, &n) in sweep.orders.iter().enumerate() {
        for (g, row) in sweep.stats.iter().enumerate() {
            let s = &row[k];
            t.push(vec![
                n.into(),
                s.steps.into(),
                s.paths.into(),
                Cell::num(s.rms_error),
                Cell::num(s.rel_rms()),
                orders[k][g].map_or(Cell::text(""), |o| Cell::text(o.label())),
            ]);
        }
    }
    t
}

fn moment_row(t: &mut Table, name: &str, r: &MomentBoundReport) {
    t.push(vec![
        Cell::text(name),
        Cell::num(r.lhs.upper),
        Cell::num(r.lhs.upper_se()),
        Cell::num(r.rhs),
        Cell::num(r.slack),
        Cell::num(r.allowance),
        Cell::text(r.holds.to_string()),
    ]);
}

/// Chaos identity, recursion, closed form, moment bounds, endpoint
/// expectations and the PDE cross-check.
pub fn run_verify(cfg: &RunConfig) -> Result<Report, ConfigError> {
    let needs_mc = cfg.moment_checks || !cfg.payoffs.is_empty();
    if needs_mc {
        require_endpoints(cfg)?;
    }
    let mut report = Report::new("verify", config_json(cfg));
    let th = cfg.thresholds;

    match chaos_sweep(cfg) {
        Ok(sweep) => verify_chaos(&mut report, cfg, &sweep),
        Err(e) => core_failure(&mut report, "theorem", e),
    }

    let coarse = cfg.grid(cfg.grid_sizes[0]);
    if cfg.moment_checks {
        let mut t = Table::new(
            "moments",
            &["bound", "upper", "upper_se", "rhs", "slack", "allowance", "holds"],
        );
        let etas = [
            ("ito.eta=1", GridFunction::constant(coarse, 1.0)),
            ("ito.eta=t", GridFunction::sample(coarse, |s| s)),
        ];
        for (name, eta) in etas {
            let res = eta.and_then(|eta| {
                moment_bound_check(
                    &eta,
                    &cfg.bounds,
                    &coarse,
                    &cfg.scenarios,
                    cfg.paths_per_scenario,
                    cfg.seed,
                    &Parallel,
                )
            });
            moment_outcome(&mut report, &mut t, &format!("moment.{name}"), res, th.se_multiplier);
        }
        for &n in cfg.chaos_orders.iter().filter(|&&n| n <= MAX_MOMENT_ORDER) {
            let res = cfg.f.on_grid(coarse).and_then(|f| {
                chaos_moment_bound_check(
                    &f,
                    n,
                    &cfg.bounds,
                    &coarse,
                    &cfg.scenarios,
                    cfg.paths_per_scenario,
                    cfg.seed,
                    &Parallel,
                )
            });
            moment_outcome(&mut report, &mut t, &format!("moment.chaos.n={n}"), res, th.se_multiplier);
        }
        report.tables.push(t);
    }

    if !cfg.payoffs.is_empty() {
        verify_expectations(&mut report, cfg);
    }

    if cfg.export_paths > 0 {
        let steps = *cfg.grid_sizes.last().expect("nonempty");
        match distinct(cfg, &cfg.scenarios[..1], steps) {
            Ok(s) => {
                for j in 0..cfg.export_paths {
                    let path = simulate_path(&s[0], cfg.seed, j as u64);
                    report
                        .attachments
                        .push((format!("paths/path_{j}.csv"), crate::export::path_table(&path)));
                }
            }
            Err(e) => core_failure(&mut report, "export_paths", e),
        }
    }
    Ok(report)
}

fn moment_outcome(
    report: &mut Report,
    table: &mut Table,
    name: &str,
    res: gchaos_core::Result<MomentBoundReport>,
    se_multiplier: f64,
) {
    match res {
        Ok(r) => {
            let allowance = se_multiplier * r.lhs.upper_se();
            report.check(Check::at_most(
                name,
                r.slack,
                allowance,
                format!("upper {:.6e} vs bound {:.6e}", r.lhs.upper, r.rhs),
            ));
            moment_row(table, name, &r);
        }
        Err(e) => core_failure(report, name, e),
    }
}

fn verify_chaos(report: &mut Report, cfg: &RunConfig, sweep: &ChaosSweep) {
    let th = cfg.thresholds;
    for (n, msg) in &sweep.rejected {
        report.check(Check::failed(format!("theorem.n={n}"), msg.clone()));
    }
    let mut theorem_orders = Vec::new();
    let mut rec = Table::new(
        "recursion",
        &["n", "N", "closed_form_max_rel", "discrete_rel_rms", "discrete_order"],
    );
    let mut cor = Table::new("corollary", &["n", "N", "max_rel"]);
    for (k, &n) in sweep.orders.iter().enumerate() {
        let series: Vec<(usize, f64)> = sweep.stats.iter().map(|r| (r[k].steps, r[k].rel_rms())).collect();
        theorem_orders.push(convergence_checks(report, cfg, &format!("theorem.n={n}"), &series, true));

        if n >= 2 {
            let closed = sweep.stats.iter().map(|r| r[k].recursion_closed_max_rel).fold(0.0, f64::max);
            report.check(Check::at_most(
                format!("recursion.closed_form.n={n}"),
                closed,
                th.recursion_rel,
                "max over paths",
            ));
            let series: Vec<(usize, f64)> = sweep
                .stats
                .iter()
                .map(|r| (r[k].steps, r[k].recursion_discrete_rel()))
                .collect();
            let orders = convergence_checks(report, cfg, &format!("recursion.discrete.n={n}"), &series, true);
            for (g, row) in sweep.stats.iter().enumerate() {
                let s = &row[k];
                rec.push(vec![
                    n.into(),
                    s.steps.into(),
                    Cell::num(s.recursion_closed_max_rel),
                    Cell::num(s.recursion_discrete_rel()),
                    orders[g].map_or(Cell::text(""), |o| Cell::text(o.label())),
                ]);
            }
        }

        let cmax = sweep.stats.iter().map(|r| r[k].corollary_max_rel).fold(0.0, f64::max);
        report.check(Check::at_most(format!("corollary.n={n}"), cmax, th.corollary_rel, "max over paths"));
        for row in &sweep.stats {
            cor.push(vec![n.into(), row[k].steps.into(), Cell::num(row[k].corollary_max_rel)]);
        }

        if cfg.is_classical() && n <= CLASSICAL_MAX_ORDER {
            let s = &sweep.stats.last().expect("nonempty")[k];
            let m = s.first_scenario;
            report.check(Check::at_most(
                format!("classical.mean.n={n}"),
                m.mean.abs(),
                th.se_multiplier * m.mean_se,
                format!("N={}", s.steps),
            ));
            let f = cfg.f.on_grid(cfg.grid(s.steps)).expect("validated grid");
            let target = factorial(n) * f.l2_norm_sq().powi(n as i32);
            report.check(Check::at_most(
                format!("classical.variance.n={n}"),
                ((m.variance - target) / target).abs(),
                th.classical_var_rel + th.se_multiplier * m.variance_se / target,
                format!("variance {:.6e} vs {target:.6e}", m.variance),
            ));
        }
    }
    report.tables.insert(0, theorem_table(sweep, &theorem_orders));
    if sweep.orders.iter().any(|&n| n >= 2) {
        report.tables.push(rec);
    }
    report.tables.push(cor);
    report.results = json!({ "distinct_scenarios": sweep.distinct_scenarios });
}

fn verify_expectations(report: &mut Report, cfg: &RunConfig) {
    let th = cfg.thresholds;
    let grid = cfg.grid(cfg.grid_sizes[0]);
    let (lo, hi, horizon) = (cfg.bounds.sigma_lo(), cfg.bounds.sigma_hi(), cfg.horizon);
    let estimate = |p: &Payoff| {
        upper_expectation(
            &FunctionalSpec::Terminal(p.clone()),
            &cfg.bounds,
            &grid,
            &cfg.scenarios,
            cfg.paths_per_scenario,
            cfg.seed,
            &Parallel,
        )
    };
    let pde = |p: &Payoff| {
        PdeConfig::auto(cfg.bounds, horizon, cfg.pde_space_steps).and_then(|c| solve_gheat(p, &c))
    };

    match estimate(&Payoff::Square) {
        Ok(r) => {
            report.check(Check::at_most(
                "endpoint.upper",
                (r.upper - hi * hi * horizon).abs(),
                th.se_multiplier * r.upper_se(),
                format!("upper {:.6e} vs {:.6e}", r.upper, hi * hi * horizon),
            ));
            report.check(Check::at_most(
                "endpoint.lower",
                (r.lower - lo * lo * horizon).abs(),
                th.se_multiplier * r.lower_se(),
                format!("lower {:.6e} vs {:.6e}", r.lower, lo * lo * horizon),
            ));
        }
        Err(e) => core_failure(report, "endpoint", e),
    }
    for (name, p, target) in [
        ("endpoint.pde.upper", Payoff::Square, hi * hi * horizon),
        ("endpoint.pde.lower", Payoff::NegSquare, -lo * lo * horizon),
    ] {
        match pde(&p) {
            Ok(s) => report.check(Check::at_most(
                name,
                (s.value_at_zero - target).abs(),
                th.pde_rel * target.abs(),
                format!("pde {:.6e} vs {:.6e}", s.value_at_zero, target),
            )),
            Err(e) => core_failure(report, name, e),
        }
    }

    let mut t = Table::new(
        "cross_check",
        &["payoff", "pde", "mc_upper", "mc_se", "abs_diff", "margin"],
    );
    for p in &cfg.payoffs {
        let name = format!("cross_check[{p}]");
        let (sol, est) = match (pde(p), estimate(p)) {
            (Ok(s), Ok(e)) => (s, e),
            (Err(e), _) | (_, Err(e)) => {
                core_failure(report, &name, e);
                continue;
            }
        };
        let diff = (sol.value_at_zero - est.upper).abs();
        let margin = th.pde_rel * sol.value_at_zero.abs() + th.se_multiplier * est.upper_se();
        report.check(Check::at_most(&name, diff, margin, ""));
        t.push(vec![
            Cell::text(p.to_string()),
            Cell::num(sol.value_at_zero),
            Cell::num(est.upper),
            Cell::num(est.upper_se()),
            Cell::num(diff),
            Cell::num(margin),
        ]);
    }
    report.tables.push(t);
}

/// Grid-refinement study of the chaos identity. Needs three or more grid
/// sizes.
pub fn run_convergence(cfg: &RunConfig) -> Result<Report, ConfigError> {
    if cfg.grid_sizes.len() < 3 {
        return Err(ConfigError::new(
            "grid_sizes",
            format!("convergence needs at least 3 grid sizes, got {}", cfg.grid_sizes.len()),
        ));
    }
    let mut report = Report::new("convergence", config_json(cfg));
    let sweep = match chaos_sweep(cfg) {
        Ok(s) => s,
        Err(e) => {
            core_failure(&mut report, "convergence", e);
            return Ok(report);
        }
    };
    for (n, msg) in &sweep.rejected {
        report.check(Check::failed(format!("convergence.n={n}"), msg.clone()));
    }
    let mut t = Table::new("convergence", &["n", "N", "rms_error", "rel_rms", "order"]);
    for (k, &n) in sweep.orders.iter().enumerate() {
        let series: Vec<(usize, f64)> = sweep.stats.iter().map(|r| (r[k].steps, r[k].rel_rms())).collect();
        let orders = convergence_checks(&mut report, cfg, &format!("convergence.n={n}"), &series, false);
        for (g, row) in sweep.stats.iter().enumerate() {
            t.push(vec![
                n.into(),
                row[k].steps.into(),
                Cell::num(row[k].rms_error),
                Cell::num(row[k].rel_rms()),
                orders[g].map_or(Cell::text(""), |o| Cell::text(o.label())),
            ]);
        }
    }
    report.tables.push(t);
    Ok(report)
}

/// Upper and lower expectations of every configured payoff of `B_T`.
pub fn run_expectation(cfg: &RunConfig) -> Result<Report, ConfigError> {
    require_endpoints(cfg)?;
    if cfg.payoffs.is_empty() {
        return Err(ConfigError::new("payoffs", "expectation needs at least one payoff"));
    }
    let mut report = Report::new("expectation", config_json(cfg));
    let grid = cfg.grid(cfg.grid_sizes[0]);
    let mut t = Table::new(
        "estimates",
        &["payoff", "upper", "upper_se", "lower", "lower_se", "argmax", "argmin"],
    );
    let mut rows = Table::new("scenarios", &["payoff", "scenario", "kind", "mean", "std_error"]);
    let mut estimates = Vec::new();
    for p in &cfg.payoffs {
        let name = format!("estimate[{p}]");
        let x = FunctionalSpec::Terminal(p.clone());
        match upper_expectation(
            &x,
            &cfg.bounds,
            &grid,
            &cfg.scenarios,
            cfg.paths_per_scenario,
            cfg.seed,
            &Parallel,
        ) {
            Ok(r) => {
                report.check(if r.upper.is_finite() && r.lower.is_finite() {
                    Check::passed(&name, "")
                } else {
                    Check::failed(&name, "non-finite estimate")
                });
                t.push(vec![
                    Cell::text(p.to_string()),
                    Cell::num(r.upper),
                    Cell::num(r.upper_se()),
                    Cell::num(r.lower),
                    Cell::num(r.lower_se()),
                    r.argmax.into(),
                    r.argmin.into(),
                ]);
                for row in &r.rows {
                    rows.push(vec![
                        Cell::text(p.to_string()),
                        row.id.into(),
                        Cell::text(serde_json::to_string(&row.kind).expect("kind serializes").replace('"', "")),
                        Cell::num(row.mean),
                        Cell::num(row.std_error),
                    ]);
                }
                estimates.push(r);
            }
            Err(e) => core_failure(&mut report, &name, e),
        }
    }
    report.tables.push(t);
    report.tables.push(rows);
    report.results = json!({ "estimates": estimates });
    Ok(report)
}

/// G-heat values at the origin and terminal profiles for every payoff.
pub fn run_gheat(cfg: &RunConfig) -> Result<Report, ConfigError> {
    if cfg.payoffs.is_empty() {
        return Err(ConfigError::new("payoffs", "gheat needs at least one payoff"));
    }
    let pde = PdeConfig::auto(cfg.bounds, cfg.horizon, cfg.pde_space_steps)
        .map_err(|e| ConfigError::new("pde_space_steps", e.to_string()))?;
    let mut report = Report::new("gheat", config_json(cfg));
    let mut t = Table::new("values", &["payoff", "u_at_zero"]);
    let mut values = Vec::new();
    for (k, p) in cfg.payoffs.iter().enumerate() {
        let name = format!("gheat[{p}]");
        match solve_gheat(p, &pde) {
            Ok(sol) => {
                report.check(if sol.value_at_zero.is_finite() {
                    Check::passed(&name, "")
                } else {
                    Check::failed(&name, "non-finite value")
                });
                t.push(vec![Cell::text(p.to_string()), Cell::num(sol.value_at_zero)]);
                let mut prof = Table::new("profile", &["x", "u"]);
                for (x, u) in sol.xs.iter().zip(&sol.profile) {
                    prof.push(vec![Cell::num(*x), Cell::num(*u)]);
                }
                report.attachments.push((format!("gheat_profile_{k}.csv"), prof));
                values.push(json!({ "payoff": p, "value_at_zero": sol.value_at_zero }));
            }
            Err(e) => core_failure(&mut report, &name, e),
        }
    }
    report.tables.push(t);
    report.results = json!({
        "pde": pde,
        "cfl_ratio": pde.cfl_ratio(),
        "values": values,
    });
    Ok(report)
}

/// Coefficient table of `h_0, ..., h_max`.
pub fn run_hermite_table(max_degree: usize) -> Report {
    let mut report = Report::new("hermite-table", json!({ "max_degree": max_degree }));
    let mut t = Table::new("coefficients", &["n", "power", "coefficient"]);
    for n in 0..=max_degree {
        match hermite_coeffs(n) {
            Ok(p) => {
                for (k, &c) in p.coeffs().iter().enumerate() {
                    if c != 0 {
                        t.push(vec![n.into(), k.into(), Cell::Int(c)]);
                    }
                }
            }
            Err(e) => {
                core_failure(&mut report, &format!("hermite.n={n}"), e);
                break;
            }
        }
    }
    if report.failed_checks == 0 {
        report.check(Check::passed("hermite", format!("degrees 0..={max_degree}")));
    }
    report.tables.push(t);
    report
}
