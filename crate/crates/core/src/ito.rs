//! Pathwise discrete G-Ito integrals.
//!
//! Integrands are evaluated at left endpoints throughout: on `[t_i, t_{i+1})`
//! an integrand takes its value at `t_i`, which keeps every sum
//! non-anticipating.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::hermite::{self, ChaosPolynomial};
use crate::rng::Stream;
use crate::scenario::{BrownianPath, TimeGrid};

/// Which record of `<B>` an integral against `d<B>` uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum QvKind {
    /// `(dB_i)^2`
    Realized,
    /// `sigma_i^2 dt`
    Scenario,
}

/// Step function on a grid: `values[i]` holds on `[t_i, t_{i+1})`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GridFunction {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.steps() {
            return Err(Error::Shape(format!(
                "grid function has {} values, grid has {} steps",
                values.len(),
                grid.steps()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "grid function value {bad} is not finite"
            )));
        }
        Ok(GridFunction { grid, values })
    }

    /// Samples `f` at the left endpoints `t_0 .. t_{N-1}`.
    pub fn sample(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..grid.steps()).map(|i| f(grid.time(i))).collect();
        GridFunction::new(grid, values)
    }

    pub fn constant(grid: TimeGrid, c: f64) -> Result<Self> {
        GridFunction::new(grid, vec![c; grid.steps()])
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Pointwise square.
    pub fn squared(&self) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|v| v * v).collect(),
        }
    }

    /// `sum f_i^2 dt`, the discrete `||f||^2_{L^2[0,T]}`.
    pub fn l2_norm_sq(&self) -> f64 {
        let dt = self.grid.dt();
        self.values.iter().map(|v| v * v * dt).sum()
    }
}

type Evaluator = Box<dyn Fn(&[usize]) -> f64 + Send + Sync>;

/// Symmetric `g(t_{i_1}, ..., t_{i_n})` on grid nodes, order `1..=4`.
pub struct SimplexFunction {
    order: usize,
    grid: TimeGrid,
    evaluator: Evaluator,
}

impl core::fmt::Debug for SimplexFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("SimplexFunction")
            .field("order", &self.order)
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

/// Highest order accepted by [`SimplexFunction`].
pub const MAX_SIMPLEX_ORDER: usize = 4;
/// Largest grid accepted by [`iterated_general`].
pub const MAX_GENERAL_STEPS: usize = 512;

const SYMMETRY_SAMPLES: u64 = 64;
const SYMMETRY_SEED: u64 = 0x5359_4d4d;

impl SimplexFunction {
    /// Wraps `evaluator`, rejecting it if any sampled index tuple is not
    /// invariant under permutation.
    pub fn new(
        order: usize,
        grid: TimeGrid,
        evaluator: impl Fn(&[usize]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if order == 0 || order > MAX_SIMPLEX_ORDER {
            return Err(Error::CostLimit(format!(
                "simplex order {order} outside 1..={MAX_SIMPLEX_ORDER}"
            )));
        }
        let g = SimplexFunction {
            order,
            grid,
            evaluator: Box::new(evaluator),
        };
        g.check_symmetry()?;
        Ok(g)
    }

    /// `g(t_1, ..., t_n) = f(t_1) ... f(t_n)`.
    pub fn product(f: &GridFunction, order: usize) -> Result<Self> {
        let values = f.values.clone();
        SimplexFunction::new(order, f.grid, move |idx| {
            idx.iter().map(|&i| values[i]).product()
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn eval(&self, idx: &[usize]) -> f64 {
        (self.evaluator)(idx)
    }

    fn check_symmetry(&self) -> Result<()> {
        let n = self.order;
        if n == 1 {
            return Ok(());
        }
        let steps = self.grid.steps();
        let mut stream = Stream::new(SYMMETRY_SEED, 0, 0);
        let mut idx = vec![0usize; n];
        let mut perm: Vec<usize> = (0..n).collect();
        let mut permuted = vec![0usize; n];
        for _ in 0..SYMMETRY_SAMPLES {
            for slot in idx.iter_mut() {
                *slot = ((stream.uniform() * steps as f64) as usize).min(steps - 1);
            }
            let reference = self.eval(&idx);
            for (k, p) in perm.iter_mut().enumerate() {
                *p = k;
            }
            while next_permutation(&mut perm) {
                for (dst, &p) in permuted.iter_mut().zip(perm.iter()) {
                    *dst = idx[p];
                }
                let value = self.eval(&permuted);
                if (value - reference).abs() > 1e-12 * reference.abs().max(value.abs()).max(1.0) {
                    return Err(Error::NotSymmetric(format!("{idx:?} vs {permuted:?}")));
                }
            }
        }
        Ok(())
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn same_grid(a: &TimeGrid, b: &TimeGrid, what: &str) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!(
            "{what} lives on {} steps over {}, path on {} steps over {}",
            a.steps(),
            a.horizon(),
            b.steps(),
            b.horizon()
        )));
    }
    Ok(())
}

pub(crate) fn factorial_f64(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `sum_j eta_j dB_j`.
pub fn ito_integral(eta: &GridFunction, path: &BrownianPath) -> Result<f64> {
    same_grid(eta.grid(), path.grid(), "integrand")?;
    Ok(eta
        .values
        .iter()
        .zip(path.increments())
        .map(|(e, db)| e * db)
        .sum())
}

/// `sum_j eta_j d<B>_j`.
pub fn qv_integral(eta: &GridFunction, path: &BrownianPath, which: QvKind) -> Result<f64> {
    same_grid(eta.grid(), path.grid(), "integrand")?;
    let total = match which {
        QvKind::Realized => eta
            .values
            .iter()
            .zip(path.increments())
            .map(|(e, db)| e * db * db)
            .sum(),
        QvKind::Scenario => {
            let dt = path.grid().dt();
            eta.values
                .iter()
                .zip(path.scenario().sigma())
                .map(|(e, s)| e * s * s * dt)
                .sum()
        }
    };
    Ok(total)
}

/// `[J_0, J_1, ..., J_n]` for `g = f^{(x) k}`, via the running recursion
/// `X_k += X_{k-1} f_i dB_i` (updated from high `k` to low so each step uses
/// the values at `t_i`).
pub fn iterated_ladder(f: &GridFunction, path: &BrownianPath, n: usize) -> Result<Vec<f64>> {
    same_grid(f.grid(), path.grid(), "integrand")?;
    let mut x = vec![0.0; n + 1];
    x[0] = 1.0;
    for (fi, db) in f.values.iter().zip(path.increments()) {
        let y = fi * db;
        for k in (1..=n).rev() {
            x[k] += x[k - 1] * y;
        }
    }
    Ok(x)
}

/// `J_n(f^{(x) n})` over the discrete simplex, `O(N n)`.
pub fn iterated_product(f: &GridFunction, path: &BrownianPath, n: usize) -> Result<f64> {
    Ok(iterated_ladder(f, path, n)?[n])
}

/// `sum_{i_1 < ... < i_n} g(t_{i_1}, ..., t_{i_n}) dB_{i_1} ... dB_{i_n}` by
/// direct enumeration.
pub fn iterated_general(g: &SimplexFunction, path: &BrownianPath) -> Result<f64> {
    same_grid(g.grid(), path.grid(), "integrand")?;
    let steps = path.grid().steps();
    if steps > MAX_GENERAL_STEPS {
        return Err(Error::CostLimit(format!(
            "direct simplex sum limited to {MAX_GENERAL_STEPS} steps, got {steps}"
        )));
    }
    let mut idx = vec![0usize; g.order()];
    Ok(simplex_sum(g, path.increments(), &mut idx, 0, 0, 1.0))
}

fn simplex_sum(
    g: &SimplexFunction,
    db: &[f64],
    idx: &mut [usize],
    depth: usize,
    start: usize,
    weight: f64,
) -> f64 {
    let n = idx.len();
    let mut total = 0.0;
    // leave room for the remaining n - depth - 1 strictly larger indices
    for i in start..db.len() + depth + 1 - n {
        idx[depth] = i;
        let w = weight * db[i];
        total += if depth + 1 == n {
            g.eval(idx) * w
        } else {
            simplex_sum(g, db, idx, depth + 1, i + 1, w)
        };
    }
    total
}

/// Integrand of a multiple integral.
#[derive(Debug, Clone, Copy)]
pub enum Integrand<'a> {
    /// `g_n = f^{(x) n}`
    Product { f: &'a GridFunction, order: usize },
    General(&'a SimplexFunction),
}

/// `I_n = n! J_n`.
pub fn multiple_integral(g: Integrand<'_>, path: &BrownianPath) -> Result<f64> {
    let (order, j) = match g {
        Integrand::Product { f, order } => (order, iterated_product(f, path, order)?),
        Integrand::General(g) => (g.order(), iterated_general(g, path)?),
    };
    Ok(factorial_f64(order) * j)
}

/// `theta_T = int f dB` and `||f||_T^2 = int f^2 d<B>` on one path.
pub fn chaos_inputs(f: &GridFunction, path: &BrownianPath, which: QvKind) -> Result<(f64, f64)> {
    let theta = ito_integral(f, path)?;
    let norm_sq = qv_integral(&f.squared(), path, which)?;
    Ok((theta, norm_sq))
}

/// Closed form `||f||_T^n h_n(theta_T / ||f||_T)`, evaluated as
/// `H_n(theta_T, ||f||_T^2)`.
pub fn theorem1_rhs(f: &GridFunction, path: &BrownianPath, n: usize, which: QvKind) -> Result<f64> {
    let poly = hermite::hermite_coeffs(n)?;
    let (theta, norm_sq) = chaos_inputs(f, path, which)?;
    closed_form(&poly, theta, norm_sq)
}

/// `H_n(theta, norm_sq)` with an internal-consistency error on negative
/// `norm_sq`.
pub fn closed_form(poly: &ChaosPolynomial, theta: f64, norm_sq: f64) -> Result<f64> {
    if norm_sq < 0.0 {
        return Err(Error::Internal(format!(
            "negative quadratic-variation integral {norm_sq}"
        )));
    }
    hermite::scaled_eval_with(poly, theta, norm_sq)
}

/// Which side of the chaos identity supplies `I_k` in
/// [`recursion_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Side {
    ClosedForm,
    Discrete,
}

/// `I_n - [theta I_{n-1} - (n-1) ||f||^2 I_{n-2}]` with realized `<B>`.
pub fn recursion_residual(f: &GridFunction, path: &BrownianPath, n: usize, side: Side) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("recursion needs n >= 2, got {n}")));
    }
    let (theta, norm_sq) = chaos_inputs(f, path, QvKind::Realized)?;
    let (i_n, i_1, i_2) = match side {
        Side::ClosedForm => (
            closed_form(&hermite::hermite_coeffs(n)?, theta, norm_sq)?,
            closed_form(&hermite::hermite_coeffs(n - 1)?, theta, norm_sq)?,
            closed_form(&hermite::hermite_coeffs(n - 2)?, theta, norm_sq)?,
        ),
        Side::Discrete => {
            let j = iterated_ladder(f, path, n)?;
            (
                factorial_f64(n) * j[n],
                factorial_f64(n - 1) * j[n - 1],
                factorial_f64(n - 2) * j[n - 2],
            )
        }
    };
    Ok(recurrence_gap(n, theta, norm_sq, i_n, i_1, i_2))
}

/// `i_n - (theta i_{n-1} - (n-1) v i_{n-2})`.
pub fn recurrence_gap(n: usize, theta: f64, v: f64, i_n: f64, i_n1: f64, i_n2: f64) -> f64 {
    i_n - (theta * i_n1 - (n - 1) as f64 * v * i_n2)
}

/// `max(1, |i_n|, |theta i_{n-1}|, |(n-1) v i_{n-2}|)`: magnitude against
/// which a [`recurrence_gap`] is judged.
pub fn recurrence_scale(n: usize, theta: f64, v: f64, i_n: f64, i_n1: f64, i_n2: f64) -> f64 {
    1f64.max(i_n.abs())
        .max((theta * i_n1).abs())
        .max(((n - 1) as f64 * v * i_n2).abs())
}

/// Sum of the absolute terms of [`corollary_closed_form`]; rounding in either
/// closed form is bounded relative to this.
pub fn corollary_magnitude(n: usize, b: f64, q: f64) -> f64 {
    (0..=n / 2)
        .map(|m| {
            let denom = hermite::powi(2.0, m) * factorial_f64(m) * factorial_f64(n - 2 * m);
            hermite::powi(q.abs(), m) * hermite::powi(b.abs(), n - 2 * m) / denom
        })
        .sum()
}

/// `sum_m (-1)^m <B>_T^m B_T^{n-2m} / (2^m m! (n-2m)!)`, the closed form of
/// the `n`-fold iterated integral of the constant 1.
pub fn corollary_closed_form(path: &BrownianPath, n: usize, which: QvKind) -> f64 {
    let b = path.terminal();
    let q = match which {
        QvKind::Realized => path.terminal_qv_realized(),
        QvKind::Scenario => path.terminal_qv_scenario(),
    };
    corollary_sum(n, b, q)
}

pub(crate) fn corollary_sum(n: usize, b: f64, q: f64) -> f64 {
    let mut total = 0.0;
    for m in 0..=n / 2 {
        let denom = hermite::powi(2.0, m) * factorial_f64(m) * factorial_f64(n - 2 * m);
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * hermite::powi(q, m) * hermite::powi(b, n - 2 * m) / denom;
    }
    total
}

const MAX_QUADRATURE_NODES: usize = 1 << 27;

fn quadrature_guard(g: &SimplexFunction) -> Result<()> {
    let steps = g.grid().steps();
    let nodes = (0..g.order()).try_fold(1usize, |acc, _| acc.checked_mul(steps));
    match nodes {
        Some(k) if k <= MAX_QUADRATURE_NODES => Ok(()),
        _ => Err(Error::CostLimit(format!(
            "quadrature over {steps}^{} nodes",
            g.order()
        ))),
    }
}

/// Left-rectangle quadrature of `int_{[0,T]^n} g^2`.
pub fn cube_norm_sq(g: &SimplexFunction) -> Result<f64> {
    quadrature_guard(g)?;
    let n = g.order();
    let steps = g.grid().steps();
    let cell = hermite::powi(g.grid().dt(), n);
    let mut idx = vec![0usize; n];
    let mut total = 0.0;
    loop {
        let v = g.eval(&idx);
        total += v * v;
        // odometer increment
        let mut k = 0;
        loop {
            if k == n {
                return Ok(total * cell);
            }
            idx[k] += 1;
            if idx[k] < steps {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Left-rectangle quadrature of `int_{S_n} g^2` over strictly ordered nodes.
/// Ties `t_{i_j} = t_{i_k}` are a set of measure `O(1/N)` and are omitted.
pub fn simplex_norm_sq(g: &SimplexFunction) -> Result<f64> {
    quadrature_guard(g)?;
    let n = g.order();
    let cell = hermite::powi(g.grid().dt(), n);
    let ones = vec![1.0; g.grid().steps()];
    let mut idx = vec![0usize; n];
    Ok(simplex_sum_sq(g, &ones, &mut idx, 0, 0) * cell)
}

fn simplex_sum_sq(g: &SimplexFunction, ones: &[f64], idx: &mut [usize], depth: usize, start: usize) -> f64 {
    let n = idx.len();
    let mut total = 0.0;
    for i in start..ones.len() + depth + 1 - n {
        idx[depth] = i;
        total += if depth + 1 == n {
            let v = g.eval(idx);
            v * v
        } else {
            simplex_sum_sq(g, ones, idx, depth + 1, i + 1)
        };
    }
    total
}
