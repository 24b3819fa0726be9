//! Strong-law probes: Choquet moment hypotheses, the clamped square-sum
//! trace, adversarially sampled trajectory simulations, and a first
//! Borel-Cantelli occurrence probe.
//!
//! A simulation can only ever be consistent with an almost-sure statement,
//! never prove it; every verdict here is phrased accordingly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::capacity::{CapacityKind, CapacityPair, Event};
use crate::error::{Result, SubexpError};
use crate::expectation::{MeasureFamily, RandomVariable};
use crate::independence::SequenceSpec;
use crate::series::{convergence_verdict, ConvergenceVerdict};

/// Mean preconditions are enforced to this absolute tolerance.
pub const MEAN_TOLERANCE: f64 = 1e-9;

/// Choquet moment `C_up[|X|^p]` under the upper capacity.
///
/// This dominates the plain upper moment `E_up[|X|^p]`, so finiteness of the
/// Choquet moment is the stronger hypothesis.
pub fn choquet_moment(family: &MeasureFamily, variable: &RandomVariable, p: f64) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(SubexpError::InvalidParameter {
            name: "p",
            value: p,
            requirement: "p > 0 and finite",
        });
    }
    let pair = CapacityPair::new(family);
    Ok(pair
        .choquet_integral(&variable.abs_pow(p), CapacityKind::Upper)?
        .value)
}

/// Upper tail expectation `E_up[(|X| - a)^+]`, nonincreasing in `a` and zero
/// once `a` passes the support radius.
pub fn tail_expectation(family: &MeasureFamily, variable: &RandomVariable, a: f64) -> Result<f64> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(SubexpError::InvalidParameter {
            name: "a",
            value: a,
            requirement: "a >= 0 and finite",
        });
    }
    let excess = variable.map(|v| (v.abs() - a).max(0.0))?;
    family.upper_expectation(&excess)
}

/// Trace of `E_up[(|X| /\ n^{1/p})^2] / n^{2/p}` with a Cauchy-window
/// verdict on its partial sums.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SquareSumReport {
    pub p: f64,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub verdict: ConvergenceVerdict,
    pub final_value: f64,
    /// First `n` from which the clamp at `n^{1/p}` no longer binds; from
    /// there on each term equals `E_up[X^2] / n^{2/p}` exactly.
    pub clamp_inactive_from: Option<usize>,
}

pub fn square_sum_trace(
    family: &MeasureFamily,
    variable: &RandomVariable,
    p: f64,
    horizon: usize,
    epsilon: f64,
    window: usize,
) -> Result<SquareSumReport> {
    if !(p > 0.0 && p < 2.0) {
        return Err(SubexpError::InvalidParameter {
            name: "p",
            value: p,
            requirement: "0 < p < 2",
        });
    }
    let radius = variable.max_abs();
    let mut terms = Vec::with_capacity(horizon);
    let mut partial_sums = Vec::with_capacity(horizon);
    let mut acc = 0.0;
    let mut clamp_inactive_from = None;
    for n in 1..=horizon {
        let threshold = (n as f64).powf(1.0 / p);
        if clamp_inactive_from.is_none() && threshold >= radius {
            clamp_inactive_from = Some(n);
        }
        let clamped_square = variable.map(|v| {
            let w = v.abs().min(threshold);
            w * w
        })?;
        let term = family.upper_expectation(&clamped_square)? / threshold.powi(2);
        acc += term;
        terms.push(term);
        partial_sums.push(acc);
    }
    let verdict = convergence_verdict(&partial_sums, epsilon, window)?;
    Ok(SquareSumReport {
        p,
        terms,
        partial_sums,
        verdict,
        final_value: acc,
        clamp_inactive_from,
    })
}

/// How a trajectory picks one measure from the family at each step.
///
/// The family is an envelope, so a sampled path has no canonical law; the
/// strong law is supposed to hold for every selection, including one that
/// fights it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SelectionStrategy {
    /// Always the measure at this index.
    FixedIndex { index: usize },
    /// Uniformly random measure each step, from its own seed.
    IidRandom { seed: u64 },
    /// At step n, the measure maximizing the one-step expected value of the
    /// centered target (`|S_n - n mu|` for trajectories, the event
    /// probability for occurrence probes). Ties break to the lowest index.
    GreedyAdversarial,
}

impl SelectionStrategy {
    fn seed_salt(&self) -> u64 {
        match self {
            SelectionStrategy::FixedIndex { .. } => 0,
            SelectionStrategy::IidRandom { seed } => *seed,
            SelectionStrategy::GreedyAdversarial => 0,
        }
    }
}

/// Per-strategy checkpoint statistics: `statistics[r][c]` is the value of
/// `|S_n - n mu| / n^{1/p}` for replicate `r` at checkpoint `c`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StrategyTrajectories {
    pub strategy: SelectionStrategy,
    pub statistics: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub n: usize,
    pub median: f64,
    pub upper_decile: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SllnReport {
    pub p: f64,
    pub mu: f64,
    pub seed: u64,
    pub horizon: usize,
    pub replicates: usize,
    pub checkpoints: Vec<usize>,
    /// Set when `p = 1`: the simulation is still run, but the scaling
    /// statement being probed is outside the proven moment range.
    pub outside_proven_scope: bool,
    pub strategies: Vec<StrategyTrajectories>,
    /// Pooled over all strategies and replicates, per checkpoint.
    pub summaries: Vec<CheckpointSummary>,
    /// Ratio of consecutive checkpoint medians.
    pub decade_ratios: Vec<f64>,
    /// Pooled median at the last checkpoint over the pooled median at the
    /// first; 0 when both vanish. For a classical root-n walk at p = 1.5
    /// with checkpoints 10^2..10^5 this sits near (10^3)^{-1/6}, about 0.32.
    pub median_decay_ratio: f64,
    /// Largest statistic at the final checkpoint over all paths.
    pub final_max_statistic: f64,
}

fn median_of(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("statistics are finite"));
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

fn quantile_of(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

fn default_checkpoints(horizon: usize) -> Vec<usize> {
    let mut points = Vec::new();
    let mut n = 100usize;
    while n <= horizon {
        points.push(n);
        match n.checked_mul(10) {
            Some(next) => n = next,
            None => break,
        }
    }
    if points.last() != Some(&horizon) {
        points.push(horizon);
    }
    points
}

fn validate_strategies(strategies: &[SelectionStrategy]) -> Result<()> {
    if strategies.is_empty() {
        return Err(SubexpError::InvalidParameter {
            name: "strategies",
            value: 0.0,
            requirement: "at least one selection strategy",
        });
    }
    Ok(())
}

fn enforce_mean_preconditions(spec: &SequenceSpec, mu: f64, horizon: usize) -> Result<()> {
    for n in 1..=horizon {
        let term = spec.term(n)?;
        let upper = term.family.upper_expectation(&term.variable)?;
        let lower = term.family.lower_expectation(&term.variable)?;
        if (upper - mu).abs() > MEAN_TOLERANCE || (lower - mu).abs() > MEAN_TOLERANCE {
            return Err(SubexpError::MeanEqualityPrecondition {
                index: n,
                upper,
                lower,
                required: mu,
            });
        }
    }
    Ok(())
}

/// Simulates `replicates` trajectories per strategy and records the scaled
/// deviation `|S_n - n mu| / n^{1/p}` at geometric checkpoints.
///
/// Preconditions: for `p >= 1` every term must have upper and lower mean
/// equal to `mu`; for `p < 1` the statistic is uncentered, so `mu` must be 0.
/// Runs are deterministic in (seed, strategy list): replicate `r` of
/// strategy `s` draws from stream `(s << 32) | r` of a generator seeded with
/// the master seed xor the strategy's own seed salt.
pub fn simulate_trajectories(
    spec: &SequenceSpec,
    strategies: &[SelectionStrategy],
    replicates: usize,
    horizon: usize,
    p: f64,
    mu: f64,
    seed: u64,
) -> Result<SllnReport> {
    if !(p > 0.0 && p < 2.0) {
        return Err(SubexpError::InvalidParameter {
            name: "p",
            value: p,
            requirement: "0 < p < 2",
        });
    }
    if !mu.is_finite() {
        return Err(SubexpError::InvalidParameter {
            name: "mu",
            value: mu,
            requirement: "finite",
        });
    }
    if replicates == 0 {
        return Err(SubexpError::InvalidParameter {
            name: "replicates",
            value: 0.0,
            requirement: "replicates >= 1",
        });
    }
    if horizon == 0 {
        return Err(SubexpError::InvalidParameter {
            name: "horizon",
            value: 0.0,
            requirement: "horizon >= 1",
        });
    }
    validate_strategies(strategies)?;
    for strategy in strategies {
        if let SelectionStrategy::FixedIndex { index } = strategy {
            // Fail fast on the first term; later terms are checked as the
            // walk reaches them (explicit specs may vary in family size).
            let first = spec.term(1)?;
            if *index >= first.family.measure_count() {
                return Err(SubexpError::InvalidParameter {
                    name: "index",
                    value: *index as f64,
                    requirement: "index < measure count of every term family",
                });
            }
        }
    }
    if p >= 1.0 {
        enforce_mean_preconditions(spec, mu, horizon)?;
    } else if mu != 0.0 {
        return Err(SubexpError::InvalidParameter {
            name: "mu",
            value: mu,
            requirement: "mu = 0 when p < 1 (uncentered regime)",
        });
    }

    let checkpoints = default_checkpoints(horizon);
    let outside_proven_scope = p == 1.0;
    let inv_p = 1.0 / p;

    let pair_stats: Vec<Vec<f64>> = (0..strategies.len() * replicates)
        .into_par_iter()
        .map(|flat| {
            let si = flat / replicates;
            let r = flat % replicates;
            let strategy = &strategies[si];
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ strategy.seed_salt());
            rng.set_stream(((si as u64) << 32) | r as u64);

            let mut sum = 0.0_f64;
            let mut stats = Vec::with_capacity(checkpoints.len());
            let mut next_checkpoint = 0usize;
            for n in 1..=horizon {
                let term = spec.term(n)?;
                let chosen = match strategy {
                    SelectionStrategy::FixedIndex { index } => {
                        if *index >= term.family.measure_count() {
                            return Err(SubexpError::InvalidParameter {
                                name: "index",
                                value: *index as f64,
                                requirement: "index < measure count of every term family",
                            });
                        }
                        *index
                    }
                    SelectionStrategy::IidRandom { .. } => {
                        rng.random_range(0..term.family.measure_count())
                    }
                    SelectionStrategy::GreedyAdversarial => {
                        let center = n as f64 * mu;
                        let mut best = 0usize;
                        let mut best_value = f64::NEG_INFINITY;
                        for (mi, measure) in term.family.measures().iter().enumerate() {
                            let mut value = 0.0;
                            for (w, &prob) in measure.probabilities().iter().enumerate() {
                                value += prob * (sum + term.variable.value(w) - center).abs();
                            }
                            if value > best_value {
                                best_value = value;
                                best = mi;
                            }
                        }
                        best
                    }
                };
                let outcome = term.family.measures()[chosen].sample(rng.random::<f64>());
                sum += term.variable.value(outcome);
                if next_checkpoint < checkpoints.len() && n == checkpoints[next_checkpoint] {
                    let stat = (sum - n as f64 * mu).abs() / (n as f64).powf(inv_p);
                    stats.push(stat);
                    next_checkpoint += 1;
                }
            }
            Ok(stats)
        })
        .collect::<Result<_>>()?;

    let strategies_out: Vec<StrategyTrajectories> = strategies
        .iter()
        .enumerate()
        .map(|(si, strategy)| StrategyTrajectories {
            strategy: strategy.clone(),
            statistics: pair_stats[si * replicates..(si + 1) * replicates].to_vec(),
        })
        .collect();

    let mut summaries = Vec::with_capacity(checkpoints.len());
    for (ci, &n) in checkpoints.iter().enumerate() {
        let mut pooled: Vec<f64> = pair_stats.iter().map(|s| s[ci]).collect();
        pooled.sort_by(|a, b| a.partial_cmp(b).expect("statistics are finite"));
        summaries.push(CheckpointSummary {
            n,
            median: median_of(pooled.clone()),
            upper_decile: quantile_of(&pooled, 0.9),
            max: *pooled.last().expect("at least one path"),
        });
    }
    let decade_ratios: Vec<f64> = summaries
        .windows(2)
        .map(|w| {
            if w[0].median == 0.0 {
                if w[1].median == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                w[1].median / w[0].median
            }
        })
        .collect();
    let first_median = summaries.first().expect("nonempty checkpoints").median;
    let last_median = summaries.last().expect("nonempty checkpoints").median;
    let median_decay_ratio = if first_median == 0.0 {
        if last_median == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        last_median / first_median
    };
    let final_max_statistic = pair_stats
        .iter()
        .map(|s| s[s.len() - 1])
        .fold(0.0_f64, f64::max);

    Ok(SllnReport {
        p,
        mu,
        seed,
        horizon,
        replicates,
        checkpoints,
        outside_proven_scope,
        strategies: strategies_out,
        summaries,
        decade_ratios,
        median_decay_ratio,
        final_max_statistic,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailPoint {
    pub level: f64,
    pub value: f64,
}

/// Moment and tail hypotheses evaluated on the first term of the sequence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HypothesisChecks {
    pub choquet_moment: f64,
    pub upper_mean: f64,
    pub lower_mean: f64,
    pub mean_equality_required: bool,
    pub tail_profile: Vec<TailPoint>,
    pub tail_nonincreasing: bool,
    /// Tail expectation vanishes just past the support radius.
    pub tail_vanishes: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarcinkiewiczConfig {
    pub strategies: Vec<SelectionStrategy>,
    pub replicates: usize,
    pub horizon: usize,
    pub seed: u64,
    /// The run is consistent only if the final pooled max sits below this.
    pub final_statistic_threshold: f64,
    /// ... and the first-to-last checkpoint median ratio below this.
    pub decay_ratio_bound: f64,
    pub tail_grid: Vec<f64>,
}

impl Default for MarcinkiewiczConfig {
    fn default() -> Self {
        MarcinkiewiczConfig {
            strategies: vec![
                SelectionStrategy::FixedIndex { index: 0 },
                SelectionStrategy::IidRandom { seed: 0xC0FFEE },
                SelectionStrategy::GreedyAdversarial,
            ],
            replicates: 100,
            horizon: 100_000,
            seed: 7,
            final_statistic_threshold: 0.7,
            decay_ratio_bound: 0.5,
            tail_grid: vec![0.0, 0.5, 1.0, 2.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarcinkiewiczReport {
    pub p: f64,
    pub mu: f64,
    pub hypotheses: HypothesisChecks,
    pub slln: SllnReport,
    /// Trajectories shrink as the scaling law predicts: final pooled max
    /// below the threshold and median span ratio below the bound.
    pub consistent: bool,
}

/// Checks the moment/tail hypotheses on the first term, then runs the
/// trajectory simulation and judges consistency with the scaling law.
pub fn marcinkiewicz_check(
    spec: &SequenceSpec,
    p: f64,
    mu: f64,
    config: &MarcinkiewiczConfig,
) -> Result<MarcinkiewiczReport> {
    let first = spec.term(1)?;
    let family = first.family;
    let variable = first.variable.as_ref();

    let moment = choquet_moment(family, variable, p)?;
    let upper_mean = family.upper_expectation(variable)?;
    let lower_mean = family.lower_expectation(variable)?;

    let mut tail_profile = Vec::with_capacity(config.tail_grid.len() + 1);
    for &level in &config.tail_grid {
        tail_profile.push(TailPoint {
            level,
            value: tail_expectation(family, variable, level)?,
        });
    }
    let past_support = variable.max_abs() + 1.0;
    tail_profile.push(TailPoint {
        level: past_support,
        value: tail_expectation(family, variable, past_support)?,
    });
    let tail_nonincreasing = tail_profile
        .windows(2)
        .filter(|w| w[0].level <= w[1].level)
        .all(|w| w[1].value <= w[0].value + 1e-12);
    let tail_vanishes = tail_profile.last().expect("profile nonempty").value == 0.0;

    let slln = simulate_trajectories(
        spec,
        &config.strategies,
        config.replicates,
        config.horizon,
        p,
        mu,
        config.seed,
    )?;
    let consistent = slln.final_max_statistic < config.final_statistic_threshold
        && slln.median_decay_ratio < config.decay_ratio_bound;

    Ok(MarcinkiewiczReport {
        p,
        mu,
        hypotheses: HypothesisChecks {
            choquet_moment: moment,
            upper_mean,
            lower_mean,
            mean_equality_required: p >= 1.0,
            tail_profile,
            tail_nonincreasing,
            tail_vanishes,
        },
        slln,
        consistent,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BorelCantelliConfig {
    pub strategies: Vec<SelectionStrategy>,
    pub replicates: usize,
    pub horizon: usize,
    pub seed: u64,
    pub epsilon: f64,
    pub window: usize,
    /// Cutoffs n0 at which late-occurrence fractions are measured.
    pub cutoffs: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BorelCantelliRow {
    pub strategy_index: usize,
    pub cutoff: usize,
    /// Fraction of replicates with at least one occurrence after the cutoff.
    pub late_fraction: f64,
    /// Upper-capacity tail bound `sum_{n > cutoff} V_up(A_n)`, clipped to 1.
    pub tail_bound: f64,
    /// Tail bound plus three binomial standard errors.
    pub limit: f64,
    pub within: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BorelCantelliReport {
    pub premise: ConvergenceVerdict,
    pub total_capacity: f64,
    /// The first Borel-Cantelli conclusion is only asserted when the premise
    /// series was judged Converged.
    pub asserted: bool,
    pub rows: Vec<BorelCantelliRow>,
}

/// Probes the first Borel-Cantelli lemma: when `sum V_up(A_n)` converges,
/// sampled paths should stop hitting `A_n`, whatever the selection strategy.
///
/// `events(n)` must return the event for term `n` on that term's outcome
/// space. Greedy selection here maximizes the current event's probability.
pub fn borel_cantelli_probe(
    spec: &SequenceSpec,
    events: impl Fn(usize) -> Event + Sync,
    config: &BorelCantelliConfig,
) -> Result<BorelCantelliReport> {
    validate_strategies(&config.strategies)?;
    if config.replicates == 0 {
        return Err(SubexpError::InvalidParameter {
            name: "replicates",
            value: 0.0,
            requirement: "replicates >= 1",
        });
    }
    for &cutoff in &config.cutoffs {
        if cutoff >= config.horizon {
            return Err(SubexpError::InvalidParameter {
                name: "cutoff",
                value: cutoff as f64,
                requirement: "cutoff < horizon",
            });
        }
    }

    let horizon = config.horizon;
    let per_term: Vec<(Event, f64)> = (1..=horizon)
        .into_par_iter()
        .map(|n| {
            let term = spec.term(n)?;
            let event = events(n);
            let capacity = CapacityPair::new(term.family).upper_capacity(&event)?;
            Ok((event, capacity))
        })
        .collect::<Result<_>>()?;

    let mut partial_sums = Vec::with_capacity(horizon);
    let mut acc = 0.0;
    for (_, capacity) in &per_term {
        acc += capacity;
        partial_sums.push(acc);
    }
    let premise = convergence_verdict(&partial_sums, config.epsilon, config.window)?;
    let total_capacity = acc;

    let replicates = config.replicates;
    let last_hits: Vec<usize> = (0..config.strategies.len() * replicates)
        .into_par_iter()
        .map(|flat| {
            let si = flat / replicates;
            let r = flat % replicates;
            let strategy = &config.strategies[si];
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ strategy.seed_salt());
            rng.set_stream(((si as u64) << 32) | r as u64);

            let mut last_hit = 0usize;
            for n in 1..=horizon {
                let term = spec.term(n)?;
                let (event, _) = &per_term[n - 1];
                let chosen = match strategy {
                    SelectionStrategy::FixedIndex { index } => {
                        if *index >= term.family.measure_count() {
                            return Err(SubexpError::InvalidParameter {
                                name: "index",
                                value: *index as f64,
                                requirement: "index < measure count of every term family",
                            });
                        }
                        *index
                    }
                    SelectionStrategy::IidRandom { .. } => {
                        rng.random_range(0..term.family.measure_count())
                    }
                    SelectionStrategy::GreedyAdversarial => {
                        let mut best = 0usize;
                        let mut best_mass = f64::NEG_INFINITY;
                        for (mi, measure) in term.family.measures().iter().enumerate() {
                            let mass = measure.mass_on(event.membership())?;
                            if mass > best_mass {
                                best_mass = mass;
                                best = mi;
                            }
                        }
                        best
                    }
                };
                let outcome = term.family.measures()[chosen].sample(rng.random::<f64>());
                if event.contains(outcome) {
                    last_hit = n;
                }
            }
            Ok(last_hit)
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for si in 0..config.strategies.len() {
        let hits = &last_hits[si * replicates..(si + 1) * replicates];
        for &cutoff in &config.cutoffs {
            let late = hits.iter().filter(|&&h| h > cutoff).count();
            let late_fraction = late as f64 / replicates as f64;
            let tail_bound = (total_capacity - partial_sums[cutoff - 1]).min(1.0);
            let stderr = (tail_bound * (1.0 - tail_bound) / replicates as f64).sqrt();
            let limit = tail_bound + 3.0 * stderr;
            rows.push(BorelCantelliRow {
                strategy_index: si,
                cutoff,
                late_fraction,
                tail_bound,
                limit,
                within: late_fraction <= limit + 1e-12,
            });
        }
    }

    Ok(BorelCantelliReport {
        premise,
        total_capacity,
        asserted: premise == ConvergenceVerdict::Converged,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectation::DiscreteMeasure;
    use crate::independence::Marginal;

    fn mean_zero_family() -> MeasureFamily {
        MeasureFamily::new(vec![
            DiscreteMeasure::new(vec![0.5, 0.0, 0.5]).unwrap(),
            DiscreteMeasure::new(vec![0.0, 1.0, 0.0]).unwrap(),
        ])
        .unwrap()
    }

    fn mean_zero_variable() -> RandomVariable {
        RandomVariable::new(vec![-1.0, 0.0, 1.0]).unwrap()
    }

    fn fair_sign_spec() -> SequenceSpec {
        SequenceSpec::iid(
            Marginal::new(
                MeasureFamily::singleton(DiscreteMeasure::new(vec![0.5, 0.5]).unwrap()),
                RandomVariable::new(vec![-1.0, 1.0]).unwrap(),
            )
            .unwrap(),
        )
    }

    fn coin_family() -> MeasureFamily {
        MeasureFamily::new(vec![
            DiscreteMeasure::new(vec![0.7, 0.3]).unwrap(),
            DiscreteMeasure::new(vec![0.3, 0.7]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn choquet_moment_on_mean_zero_family() {
        // V_up(X^2 >= t) = 1 on (0, 1], so the layer cake integrates to 1.
        let value = choquet_moment(&mean_zero_family(), &mean_zero_variable(), 2.0).unwrap();
        assert!((value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn choquet_moment_dominates_upper_moment() {
        let family = coin_family();
        let x = RandomVariable::new(vec![-1.0, 2.0]).unwrap();
        for p in [1.0, 1.5, 2.0] {
            let choquet = choquet_moment(&family, &x, p).unwrap();
            let plain = family.upper_expectation(&x.abs_pow(p)).unwrap();
            assert!(choquet >= plain - 1e-12, "p = {p}: {choquet} < {plain}");
        }
    }

    #[test]
    fn choquet_moment_rejects_bad_exponent() {
        let x = RandomVariable::new(vec![-1.0, 1.0]).unwrap();
        assert!(choquet_moment(&coin_family(), &x, 0.0).is_err());
        assert!(choquet_moment(&coin_family(), &x, f64::INFINITY).is_err());
    }

    #[test]
    fn tail_expectation_profile() {
        let family = coin_family();
        let x = RandomVariable::new(vec![-1.0, 1.0]).unwrap();
        // |X| is identically 1, so the tail is (1 - a)^+ for every measure.
        assert!((tail_expectation(&family, &x, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((tail_expectation(&family, &x, 0.5).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(tail_expectation(&family, &x, 1.0).unwrap(), 0.0);
        assert_eq!(tail_expectation(&family, &x, 5.0).unwrap(), 0.0);
        assert!(tail_expectation(&family, &x, -0.5).is_err());
    }

    #[test]
    fn square_sum_trace_matches_closed_form_once_unclamped() {
        let family = mean_zero_family();
        let x = mean_zero_variable();
        let report = square_sum_trace(&family, &x, 1.5, 10_000, 1e-3, 100).unwrap();
        assert_eq!(report.verdict, ConvergenceVerdict::Converged);
        // max|X| = 1 and n^{2/3} >= 1 from the start.
        assert_eq!(report.clamp_inactive_from, Some(1));
        let second_moment = family.upper_expectation(&x.abs_pow(2.0)).unwrap();
        for (i, &term) in report.terms.iter().enumerate() {
            let n = (i + 1) as f64;
            let closed = second_moment / n.powf(2.0 / 1.5);
            assert!(
                (term - closed).abs() <= 1e-12 * (1.0 + closed.abs()),
                "term {} = {term}, closed form {closed}",
                i + 1
            );
        }
    }

    #[test]
    fn square_sum_trace_tracks_active_clamp() {
        let family = MeasureFamily::singleton(DiscreteMeasure::new(vec![0.5, 0.5]).unwrap());
        let x = RandomVariable::new(vec![-2.0, 2.0]).unwrap();
        let report = square_sum_trace(&family, &x, 0.5, 1000, 1e-3, 100).unwrap();
        // n^2 < 2 only at n = 1, where the clamp bites: E[(|X| /\ 1)^2] = 1.
        assert_eq!(report.clamp_inactive_from, Some(2));
        assert!((report.terms[0] - 1.0).abs() < 1e-12);
        assert!((report.terms[1] - 4.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn square_sum_trace_rejects_p_out_of_range() {
        let family = coin_family();
        let x = RandomVariable::new(vec![-1.0, 1.0]).unwrap();
        assert!(square_sum_trace(&family, &x, 2.0, 1000, 1e-3, 100).is_err());
        assert!(square_sum_trace(&family, &x, 0.0, 1000, 1e-3, 100).is_err());
    }

    #[test]
    fn pilot_decade_ratio_matches_root_n_scaling() {
        // Fair +-1 walk at p = 1: |S_n|/n medians shrink like 1/sqrt(10)
        // per decade, about 0.316.
        let report = simulate_trajectories(
            &fair_sign_spec(),
            &[SelectionStrategy::FixedIndex { index: 0 }],
            400,
            1000,
            1.0,
            0.0,
            20_260_401,
        )
        .unwrap();
        assert!(report.outside_proven_scope);
        assert_eq!(report.checkpoints, vec![100, 1000]);
        let ratio = report.decade_ratios[0];
        assert!(
            (0.20..=0.45).contains(&ratio),
            "decade ratio {ratio} outside the CLT band"
        );
        // With two checkpoints the decay ratio is the single decade ratio.
        assert_eq!(report.median_decay_ratio, ratio);
    }

    #[test]
    fn all_zero_spec_is_consistent() {
        let spec = SequenceSpec::iid(
            Marginal::new(
                MeasureFamily::singleton(DiscreteMeasure::new(vec![1.0]).unwrap()),
                RandomVariable::new(vec![0.0]).unwrap(),
            )
            .unwrap(),
        );
        let config = MarcinkiewiczConfig {
            replicates: 5,
            horizon: 500,
            ..MarcinkiewiczConfig::default()
        };
        let report = marcinkiewicz_check(&spec, 1.5, 0.0, &config).unwrap();
        assert_eq!(report.slln.final_max_statistic, 0.0);
        assert_eq!(report.slln.median_decay_ratio, 0.0);
        assert!(report.consistent);
    }

    #[test]
    fn trajectories_are_deterministic_in_the_seed() {
        let strategies = vec![
            SelectionStrategy::FixedIndex { index: 0 },
            SelectionStrategy::IidRandom { seed: 11 },
            SelectionStrategy::GreedyAdversarial,
        ];
        let spec = SequenceSpec::iid(
            Marginal::new(mean_zero_family(), mean_zero_variable()).unwrap(),
        );
        let a = simulate_trajectories(&spec, &strategies, 5, 500, 1.5, 0.0, 99).unwrap();
        let b = simulate_trajectories(&spec, &strategies, 5, 500, 1.5, 0.0, 99).unwrap();
        for (sa, sb) in a.strategies.iter().zip(&b.strategies) {
            assert_eq!(sa.statistics, sb.statistics);
        }
        let c = simulate_trajectories(&spec, &strategies, 5, 500, 1.5, 0.0, 100).unwrap();
        assert_ne!(
            a.strategies[1].statistics, c.strategies[1].statistics,
            "different seeds should move the random strategies"
        );
    }

    #[test]
    fn greedy_fights_harder_than_the_null_measure() {
        // Measure 1 is the point mass at 0: picking it forever pins S_n = 0.
        let spec = SequenceSpec::iid(
            Marginal::new(mean_zero_family(), mean_zero_variable()).unwrap(),
        );
        let report = simulate_trajectories(
            &spec,
            &[
                SelectionStrategy::FixedIndex { index: 1 },
                SelectionStrategy::GreedyAdversarial,
            ],
            20,
            2000,
            1.5,
            0.0,
            5,
        )
        .unwrap();
        let fixed_max: f64 = report.strategies[0]
            .statistics
            .iter()
            .flatten()
            .fold(0.0_f64, |m, &v| m.max(v));
        let greedy_max: f64 = report.strategies[1]
            .statistics
            .iter()
            .flatten()
            .fold(0.0_f64, |m, &v| m.max(v));
        assert_eq!(fixed_max, 0.0);
        assert!(greedy_max > 0.0);
    }

    #[test]
    fn simulate_enforces_mean_equality_above_p_one() {
        let spec = SequenceSpec::iid(
            Marginal::new(coin_family(), RandomVariable::new(vec![-1.0, 1.0]).unwrap()).unwrap(),
        );
        let err = simulate_trajectories(
            &spec,
            &[SelectionStrategy::FixedIndex { index: 0 }],
            2,
            200,
            1.5,
            0.0,
            1,
        )
        .unwrap_err();
        assert!(matches!(
            err,
            SubexpError::MeanEqualityPrecondition { index: 1, .. }
        ));
    }

    #[test]
    fn simulate_requires_zero_mu_below_p_one() {
        let err = simulate_trajectories(
            &fair_sign_spec(),
            &[SelectionStrategy::FixedIndex { index: 0 }],
            2,
            200,
            0.5,
            0.1,
            1,
        )
        .unwrap_err();
        assert!(matches!(err, SubexpError::InvalidParameter { name: "mu", .. }));
    }

    #[test]
    fn marcinkiewicz_fair_walk_is_consistent() {
        let config = MarcinkiewiczConfig {
            replicates: 50,
            horizon: 2000,
            seed: 17,
            ..MarcinkiewiczConfig::default()
        };
        let report = marcinkiewicz_check(&fair_sign_spec(), 0.5, 0.0, &config).unwrap();
        assert!(report.consistent, "{report:?}");
        assert!(report.hypotheses.tail_nonincreasing);
        assert!(report.hypotheses.tail_vanishes);
        assert!((report.hypotheses.choquet_moment - 1.0).abs() < 1e-12);
        assert!(!report.slln.outside_proven_scope);
    }

    fn bernoulli_decay_spec(horizon: usize) -> SequenceSpec {
        let marginals: Vec<Marginal> = (1..=horizon)
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
        SequenceSpec::explicit(marginals).unwrap()
    }

    #[test]
    fn borel_cantelli_summable_events_stop_occurring() {
        let horizon = 2000;
        let spec = bernoulli_decay_spec(horizon);
        let config = BorelCantelliConfig {
            strategies: vec![
                SelectionStrategy::FixedIndex { index: 0 },
                SelectionStrategy::IidRandom { seed: 3 },
                SelectionStrategy::GreedyAdversarial,
            ],
            replicates: 200,
            horizon,
            seed: 11,
            epsilon: 1e-3,
            window: 100,
            cutoffs: vec![10, 100, 1000],
        };
        let report =
            borel_cantelli_probe(&spec, |_| Event::from_indices(2, &[1]).unwrap(), &config)
                .unwrap();
        assert!(report.asserted, "premise: {:?}", report.premise);
        // sum 1/n^2 = pi^2/6.
        assert!((report.total_capacity - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-3);
        for row in &report.rows {
            assert!(
                row.within,
                "strategy {} cutoff {}: fraction {} over limit {}",
                row.strategy_index, row.cutoff, row.late_fraction, row.limit
            );
        }
    }

    #[test]
    fn borel_cantelli_divergent_premise_is_not_asserted() {
        let spec = fair_sign_spec();
        let config = BorelCantelliConfig {
            strategies: vec![SelectionStrategy::FixedIndex { index: 0 }],
            replicates: 20,
            horizon: 500,
            seed: 1,
            epsilon: 1e-3,
            window: 50,
            cutoffs: vec![100],
        };
        // A_n = {X_n = 1} has capacity 1/2 every step: the premise diverges.
        let report =
            borel_cantelli_probe(&spec, |_| Event::from_indices(2, &[1]).unwrap(), &config)
                .unwrap();
        assert!(!report.asserted);
        assert_eq!(report.premise, ConvergenceVerdict::NotConverged);
        let row = &report.rows[0];
        assert!(row.late_fraction > 0.9, "{row:?}");
    }
}
