use gchaos_core::hermite::{
    hermite_coeffs, hermite_coeffs_explicit, hermite_eval, hermite_scaled_eval, MAX_DEGREE,
};
use proptest::prelude::*;

/// `h_n = (-1)^n e^{x^2/2} d^n/dx^n e^{-x^2/2}` computed by differentiating
/// `p(x) e^{-x^2/2}` symbolically: `(p e^{-x^2/2})' = (p' - x p) e^{-x^2/2}`.
fn rodrigues(n: usize) -> Vec<i128> {
    let mut p: Vec<i128> = vec![1];
    for _ in 0..n {
        let mut next = vec![0i128; p.len() + 1];
        for (k, &c) in p.iter().enumerate() {
            if k > 0 {
                next[k - 1] += k as i128 * c;
            }
            next[k + 1] -= c;
        }
        p = next;
    }
    if n % 2 == 1 {
        p.iter_mut().for_each(|c| *c = -*c);
    }
    p
}

/// Sum of |terms| of `H_n(x, v)`: the conditioning scale of the evaluation.
fn term_scale(n: usize, x: f64, v: f64) -> f64 {
    let c = hermite_coeffs(n).unwrap();
    (0..=n / 2)
        .map(|m| (c.coeff(n - 2 * m) as f64).abs() * v.powi(m as i32) * x.abs().powi((n - 2 * m) as i32))
        .sum()
}

#[test]
fn recurrence_matches_explicit_sum_and_rodrigues() {
    for n in 0..=MAX_DEGREE {
        let rec = hermite_coeffs(n).unwrap();
        let exp = hermite_coeffs_explicit(n).unwrap();
        assert_eq!(rec, exp, "n = {n}");
        assert_eq!(rec.coeffs(), rodrigues(n).as_slice(), "n = {n}");
    }
}

#[test]
fn structural_invariants() {
    for n in 0..=MAX_DEGREE {
        let h = hermite_coeffs(n).unwrap();
        assert_eq!(h.coeffs().len(), n + 1);
        assert_eq!(h.coeff(n), 1);
        for k in 0..=n {
            if (n - k) % 2 == 1 {
                assert_eq!(h.coeff(k), 0, "n={n} k={k}");
            }
        }
        let sign = if n % 2 == 0 { 1 } else { -1 };
        let scaled: Vec<i128> = h.coeffs().iter().map(|c| sign * c).collect();
        assert_eq!(h.reflect().coeffs(), scaled.as_slice());
    }
}

#[test]
fn third_degree_from_one_recurrence_step() {
    // h_3 = x h_2 - 2 h_1 = x^3 - x - 2x
    assert_eq!(hermite_coeffs(3).unwrap().coeffs(), &[0, -3, 0, 1]);
}

proptest! {
    #[test]
    fn homogeneity(n in 0usize..=10, x in -10.0f64..10.0, log_v in -6.0f64..3.0) {
        let v = 10f64.powf(log_v);
        let h = hermite_scaled_eval(n, x, v).unwrap();
        let direct = v.powf(n as f64 / 2.0) * hermite_eval(n, x / v.sqrt()).unwrap();
        let scale = h.abs().max(1.0).max(term_scale(n, x, v));
        prop_assert!((h - direct).abs() <= 1e-12 * scale, "H={h} direct={direct}");
    }

    #[test]
    fn scaled_recurrence(n in 2usize..=10, x in -10.0f64..10.0, v in 0.0f64..1e3) {
        let hn = hermite_scaled_eval(n, x, v).unwrap();
        let h1 = hermite_scaled_eval(n - 1, x, v).unwrap();
        let h2 = hermite_scaled_eval(n - 2, x, v).unwrap();
        let rhs = x * h1 - (n - 1) as f64 * v * h2;
        let scale = hn.abs().max(1.0).max(term_scale(n, x, v));
        prop_assert!((hn - rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn parity_in_evaluation(n in 0usize..=20, x in -5.0f64..5.0) {
        let a = hermite_eval(n, -x).unwrap();
        let b = hermite_eval(n, x).unwrap();
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((a - sign * b).abs() <= 1e-9 * b.abs().max(1.0));
    }
}
