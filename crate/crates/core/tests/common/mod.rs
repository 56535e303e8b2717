#![allow(dead_code)]

use gchaos_core::scenario::{build_scenario, ScenarioSpec, TimeGrid, VolatilityBounds};
use gchaos_core::ScenarioPath;

/// Gauss-Hermite rule for the weight `exp(-x^2)` (Newton on the orthonormal
/// recurrence with the usual asymptotic starting guesses).
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    let mut z: f64 = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (PIM4, 0.0);
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `E[phi(sigma sqrt(T) Z)]` for standard normal `Z`.
pub fn classical_expectation(phi: impl Fn(f64) -> f64, sigma: f64, horizon: f64) -> f64 {
    let (x, w) = gauss_hermite(160);
    let scale = sigma * (2.0 * horizon).sqrt();
    x.iter()
        .zip(&w)
        .map(|(xi, wi)| wi * phi(scale * xi))
        .sum::<f64>()
        / std::f64::consts::PI.sqrt()
}

/// `E[phi(sigma sqrt(T) Z)]` by composite Simpson on `[-12 s, 12 s]`
/// (`s = sigma sqrt(T)`) with panel edges at the given kinks.
pub fn classical_expectation_kinked(
    phi: impl Fn(f64) -> f64,
    sigma: f64,
    horizon: f64,
    kinks: &[f64],
) -> f64 {
    let s = sigma * horizon.sqrt();
    let (lo, hi) = (-12.0 * s, 12.0 * s);
    let mut edges = vec![lo];
    edges.extend(kinks.iter().copied().filter(|k| *k > lo && *k < hi));
    edges.push(hi);
    let density = |x: f64| (-0.5 * (x / s).powi(2)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
    let panels = 20_000;
    edges
        .windows(2)
        .map(|w| {
            let h = (w[1] - w[0]) / panels as f64;
            let g = |x: f64| phi(x) * density(x);
            let mut acc = g(w[0]) + g(w[1]);
            for i in 1..panels {
                let x = w[0] + i as f64 * h;
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(x);
            }
            acc * h / 3.0
        })
        .sum()
}

pub fn scenario(lo: f64, hi: f64, horizon: f64, steps: usize, spec: ScenarioSpec) -> ScenarioPath {
    let bounds = VolatilityBounds::new(lo, hi).unwrap();
    let grid = TimeGrid::new(horizon, steps).unwrap();
    build_scenario(bounds, grid, &spec, 17).unwrap()
}

/// Least-squares slope of `log2 y` against `log2 x`.
pub fn log2_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.log2()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log2()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}
