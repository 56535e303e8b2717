//! Thread-pool path sampling.

use gchaos_core::scenario::simulate_path;
use gchaos_core::{FunctionalSpec, PathSampler, Result, ScenarioPath};
use rayon::prelude::*;

/// Evaluates paths on the rayon pool. Values come back in index order, so
/// reductions match [`gchaos_core::Sequential`] bit for bit.
#[derive(Debug, Clone, Copy, Default)]
pub struct Parallel;

impl PathSampler for Parallel {
    fn sample(
        &self,
        scenario: &ScenarioPath,
        functional: &FunctionalSpec,
        count: usize,
        seed: u64,
    ) -> Result<Vec<f64>> {
        (0..count as u64)
            .into_par_iter()
            .map(|j| functional.evaluate(&simulate_path(scenario, seed, j)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gchaos_core::scenario::{build_scenario, ScenarioSpec, TimeGrid, VolatilityBounds};
    use gchaos_core::{Payoff, Sequential};

    #[test]
    fn matches_sequential() {
        let b = VolatilityBounds::new(0.5, 2.0).unwrap();
        let g = TimeGrid::new(1.0, 64).unwrap();
        let s = build_scenario(b, g, &ScenarioSpec::BangBang { switch_prob: 0.3 }, 5).unwrap();
        let x = FunctionalSpec::Terminal(Payoff::Square);
        let a = Parallel.sample(&s, &x, 500, 11).unwrap();
        let c = Sequential.sample(&s, &x, 500, 11).unwrap();
        assert_eq!(a, c);
    }
}
