//! Determinism across thread counts and seeds: every parallel sweep in the
//! crate chunks its work onto preassigned RNG streams and merges results in
//! a fixed order, so the thread pool size must never change a single bit of
//! any report.

use subexp::capacity::Event;
use subexp::independence::{Marginal, SequenceSpec};
use subexp::inequalities::{fuzz_all, rosenthal_exhaustive_sweep, RosenthalSweepConfig};
use subexp::slln::{
    borel_cantelli_probe, simulate_trajectories, BorelCantelliConfig, SelectionStrategy,
};
use subexp::{DiscreteMeasure, MeasureFamily, RandomVariable};

fn with_threads<T>(n: usize, job: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .expect("pool builds")
        .install(job)
}

fn mean_zero_spec() -> SequenceSpec {
    SequenceSpec::iid(
        Marginal::new(
            MeasureFamily::new(vec![
                DiscreteMeasure::new(vec![0.5, 0.0, 0.5]).unwrap(),
                DiscreteMeasure::new(vec![0.0, 1.0, 0.0]).unwrap(),
            ])
            .unwrap(),
            RandomVariable::new(vec![-1.0, 0.0, 1.0]).unwrap(),
        )
        .unwrap(),
    )
}

#[test]
fn fuzz_reports_are_thread_count_invariant() {
    let run = || fuzz_all(30_000, 424242);
    let single = with_threads(1, run);
    let four = with_threads(4, run);
    let a = serde_json::to_string(&single).unwrap();
    let b = serde_json::to_string(&four).unwrap();
    assert_eq!(a, b);
    assert!(single.iter().all(|o| o.clean()));
}

#[test]
fn rosenthal_sweep_is_thread_count_invariant() {
    let config = RosenthalSweepConfig {
        max_length: 2,
        widened_lengths: vec![16],
        ..RosenthalSweepConfig::default()
    };
    let single = with_threads(1, || rosenthal_exhaustive_sweep(&config).unwrap());
    let three = with_threads(3, || rosenthal_exhaustive_sweep(&config).unwrap());
    assert_eq!(
        serde_json::to_string(&single).unwrap(),
        serde_json::to_string(&three).unwrap()
    );
}

#[test]
fn trajectory_reports_are_thread_count_invariant() {
    let spec = mean_zero_spec();
    let strategies = vec![
        SelectionStrategy::FixedIndex { index: 0 },
        SelectionStrategy::IidRandom { seed: 5 },
        SelectionStrategy::GreedyAdversarial,
    ];
    let run = || simulate_trajectories(&spec, &strategies, 16, 2000, 1.5, 0.0, 31).unwrap();
    let single = with_threads(1, run);
    let four = with_threads(4, run);
    assert_eq!(
        serde_json::to_string(&single).unwrap(),
        serde_json::to_string(&four).unwrap()
    );
}

#[test]
fn borel_cantelli_reports_are_thread_count_invariant() {
    let marginals: Vec<Marginal> = (1..=1500usize)
        .map(|n| {
            let q = 1.0 / (n as f64 * n as f64);
            Marginal::new(
                MeasureFamily::new(vec![
                    DiscreteMeasure::new(vec![1.0 - q, q]).unwrap(),
                    DiscreteMeasure::new(vec![1.0 - 0.5 * q, 0.5 * q]).unwrap(),
                ])
                .unwrap(),
                RandomVariable::new(vec![0.0, 1.0]).unwrap(),
            )
            .unwrap()
        })
        .collect();
    let spec = SequenceSpec::explicit(marginals).unwrap();
    let config = BorelCantelliConfig {
        strategies: vec![
            SelectionStrategy::IidRandom { seed: 9 },
            SelectionStrategy::GreedyAdversarial,
        ],
        replicates: 64,
        horizon: 1500,
        seed: 77,
        epsilon: 1e-3,
        window: 100,
        cutoffs: vec![10, 100],
    };
    let run = || {
        borel_cantelli_probe(&spec, |_| Event::from_indices(2, &[1]).unwrap(), &config).unwrap()
    };
    let single = with_threads(1, run);
    let two = with_threads(2, run);
    assert_eq!(
        serde_json::to_string(&single).unwrap(),
        serde_json::to_string(&two).unwrap()
    );
}
