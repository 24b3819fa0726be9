//! Oracle tests for nested independence: the joint and functional upper
//! expectations must agree with a direct recursion over full paths, written
//! here from the definition with no state projection or memoization.

mod common;

use common::{family_strategy, variable_strategy};
use proptest::prelude::*;
use subexp::expectation::TestFunction;
use subexp::independence::{
    functional_upper_expectation, joint_upper_expectation, Marginal, PartialSumFunctional,
    PathSummary, SequenceSpec,
};

const ORACLE_TOLERANCE: f64 = 1e-10;

/// Sup over adapted measure selections, by brute recursion on outcome paths:
/// at each depth pick the measure maximizing the expected continuation.
/// This is the defining nested expectation, evaluated without any of the
/// library's layering.
fn oracle_joint(spec: &SequenceSpec, depth: usize, args: &mut Vec<f64>, phi: &TestFunction) -> f64 {
    let n = spec.term_count().expect("finite spec");
    if depth == n {
        return phi.eval(args).expect("arity matches spec length");
    }
    let term = spec.term(depth + 1).expect("depth < term count");
    let mut best = f64::NEG_INFINITY;
    for measure in term.family.measures() {
        let mut acc = 0.0;
        for (outcome, &prob) in measure.probabilities().iter().enumerate() {
            args.push(term.variable.value(outcome));
            acc += prob * oracle_joint(spec, depth + 1, args, phi);
            args.pop();
        }
        best = best.max(acc);
    }
    best
}

fn oracle_functional(
    spec: &SequenceSpec,
    depth: usize,
    state: PathSummary,
    functional: &PartialSumFunctional,
) -> f64 {
    let n = spec.term_count().expect("finite spec");
    if depth == n {
        return functional.evaluate(state);
    }
    let term = spec.term(depth + 1).expect("depth < term count");
    let mut best = f64::NEG_INFINITY;
    for measure in term.family.measures() {
        let mut acc = 0.0;
        for (outcome, &prob) in measure.probabilities().iter().enumerate() {
            let sum = state.sum + term.variable.value(outcome);
            let next = PathSummary {
                sum,
                min_partial_sum: state.min_partial_sum.min(sum),
                max_partial_sum: state.max_partial_sum.max(sum),
            };
            acc += prob * oracle_functional(spec, depth + 1, next, functional);
        }
        best = best.max(acc);
    }
    best
}

fn initial_state() -> PathSummary {
    PathSummary {
        sum: 0.0,
        min_partial_sum: 0.0,
        max_partial_sum: 0.0,
    }
}

fn small_spec_strategy() -> impl Strategy<Value = SequenceSpec> {
    (1usize..=3).prop_flat_map(|n| {
        prop::collection::vec(
            (2usize..=3).prop_flat_map(|size| {
                (family_strategy(size, 3), variable_strategy(size)).prop_map(|(family, var)| {
                    Marginal::new(family, var).expect("aligned dimensions")
                })
            }),
            n,
        )
        .prop_map(|marginals| SequenceSpec::explicit(marginals).expect("nonempty"))
    })
}

fn polynomial_phi(arity: usize, linear: Vec<f64>, square: Vec<f64>, cross: f64) -> TestFunction {
    TestFunction::new("poly", arity, 2, 1.0, move |args: &[f64]| {
        let mut value = 0.0;
        for (i, &a) in args.iter().enumerate() {
            value += linear[i] * a + square[i] * a * a;
        }
        value + cross * args.iter().product::<f64>()
    })
    .expect("positive arity")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn joint_matches_path_recursion(
        spec in small_spec_strategy(),
        coeffs in prop::collection::vec(-2.0f64..2.0, 7),
    ) {
        let n = spec.term_count().unwrap();
        let phi = polynomial_phi(
            n,
            coeffs[0..3].to_vec(),
            coeffs[3..6].to_vec(),
            coeffs[6],
        );
        let fast = joint_upper_expectation(&spec, &phi).unwrap();
        let slow = oracle_joint(&spec, 0, &mut Vec::new(), &phi);
        prop_assert!(
            (fast - slow).abs() <= ORACLE_TOLERANCE * (1.0 + slow.abs()),
            "nested {} vs oracle {}",
            fast,
            slow
        );
    }

    #[test]
    fn functionals_match_path_recursion(
        spec in small_spec_strategy(),
        p in 1.0f64..2.0,
    ) {
        let functionals = [
            PartialSumFunctional::final_sum(p).unwrap(),
            PartialSumFunctional::max_suffix_drawdown(p).unwrap(),
            PartialSumFunctional::max_abs_partial_sum(p).unwrap(),
            PartialSumFunctional::custom(|s: PathSummary| {
                s.max_partial_sum - s.min_partial_sum
            }),
        ];
        for functional in &functionals {
            let fast = functional_upper_expectation(&spec, functional).unwrap();
            let slow = oracle_functional(&spec, 0, initial_state(), functional);
            prop_assert!(
                (fast - slow).abs() <= ORACLE_TOLERANCE * (1.0 + slow.abs()),
                "DP {} vs oracle {}",
                fast,
                slow
            );
        }
    }

    #[test]
    fn pointwise_dominated_functionals_stay_ordered(
        spec in small_spec_strategy(),
        p in 1.0f64..2.0,
    ) {
        // |S_n| <= max_k |S_k| and the drawdown is at most twice that, so
        // the upper expectations must inherit both orderings.
        let final_sum = functional_upper_expectation(
            &spec,
            &PartialSumFunctional::final_sum(p).unwrap(),
        )
        .unwrap();
        let max_abs = functional_upper_expectation(
            &spec,
            &PartialSumFunctional::max_abs_partial_sum(p).unwrap(),
        )
        .unwrap();
        let drawdown = functional_upper_expectation(
            &spec,
            &PartialSumFunctional::max_suffix_drawdown(p).unwrap(),
        )
        .unwrap();
        let slack = 1e-10 * (1.0 + max_abs.abs());
        prop_assert!(final_sum <= max_abs + slack);
        prop_assert!(drawdown <= 2.0f64.powf(p) * max_abs + slack);
    }
}

#[test]
fn identical_distribution_is_invariant_under_relabeling() {
    use subexp::independence::{check_identical_distribution, default_battery};
    use subexp::{DiscreteMeasure, MeasureFamily, RandomVariable};

    // Same distribution presented over permuted outcomes.
    let a = Marginal::new(
        MeasureFamily::new(vec![
            DiscreteMeasure::new(vec![0.7, 0.3]).unwrap(),
            DiscreteMeasure::new(vec![0.3, 0.7]).unwrap(),
        ])
        .unwrap(),
        RandomVariable::new(vec![-1.0, 1.0]).unwrap(),
    )
    .unwrap();
    let b = Marginal::new(
        MeasureFamily::new(vec![
            DiscreteMeasure::new(vec![0.3, 0.7]).unwrap(),
            DiscreteMeasure::new(vec![0.7, 0.3]).unwrap(),
        ])
        .unwrap(),
        RandomVariable::new(vec![1.0, -1.0]).unwrap(),
    )
    .unwrap();
    let report = check_identical_distribution(&a, &b, &default_battery()).unwrap();
    assert!(report.identical(), "{report:?}");
}
