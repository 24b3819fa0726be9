//! Verification oracles for the inequalities satisfied by the envelope
//! model: Holder, Chebyshev, Jensen, the Cr-inequality, positive-part
//! bounds, and the Rosenthal partial-sum inequality. Each verifier reports
//! both sides; a violation is a build-failing event, since these are
//! theorems for this model.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{CapacityPair, Event};
use crate::error::{Result, SubexpError};
use crate::expectation::{DiscreteMeasure, MeasureFamily, RandomVariable, TestFunction};
use crate::independence::{
    joint_upper_expectation, functional_upper_expectation, Marginal, PartialSumFunctional,
    SequenceSpec,
};

/// Scale-aware tolerance: the base 1e-12 grows with the magnitude of the
/// bound so that sums of large doubles (e.g. exponential moments) do not
/// trip on their own rounding.
pub fn comparison_tolerance(rhs: f64) -> f64 {
    1e-12 * (1.0 + rhs.abs())
}

/// One verified inequality instance: `lhs <= rhs` within `tolerance`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    pub slack: f64,
    pub holds: bool,
}

impl InequalityCheck {
    pub fn evaluate(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let tolerance = comparison_tolerance(rhs);
        InequalityCheck {
            name: name.into(),
            lhs,
            rhs,
            tolerance,
            slack: rhs - lhs,
            holds: lhs <= rhs + tolerance,
        }
    }
}

/// Holder: `E|XY| <= (E|X|^p)^(1/p) (E|Y|^q)^(1/q)` with `q = p/(p-1)`.
pub fn verify_holder(
    family: &MeasureFamily,
    x: &RandomVariable,
    y: &RandomVariable,
    p: f64,
) -> Result<InequalityCheck> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(SubexpError::InvalidParameter {
            name: "p",
            value: p,
            requirement: "p > 1",
        });
    }
    let q = p / (p - 1.0);
    let product = RandomVariable::new(
        x.values()
            .iter()
            .zip(y.values())
            .map(|(a, b)| (a * b).abs())
            .collect(),
    )?;
    if product.len() != x.len() {
        return Err(SubexpError::DimensionMismatch {
            what: "X vs Y",
            expected: x.len(),
            actual: y.len(),
        });
    }
    let lhs = family.upper_expectation(&product)?;
    let moment_x = family.upper_expectation(&x.abs_pow(p))?;
    let moment_y = family.upper_expectation(&y.abs_pow(q))?;
    let rhs = moment_x.powf(1.0 / p) * moment_y.powf(1.0 / q);
    Ok(InequalityCheck::evaluate(format!("holder(p={p})"), lhs, rhs))
}

/// Which Chebyshev form to verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChebyshevForm {
    /// `V_up(X >= x) <= E[f(X)]/f(x)` for positive nondecreasing `f`.
    Tail,
    /// `V_up(|X| >= x) <= E[f(X)]/f(x)` for even `f` nondecreasing on (0, inf).
    AbsoluteTail,
}

const PROPERTY_GRID: usize = 64;

fn spot_check_chebyshev_f(
    f: &TestFunction,
    form: ChebyshevForm,
    lo: f64,
    hi: f64,
) -> Result<()> {
    let step = (hi - lo) / (PROPERTY_GRID - 1) as f64;
    let grid: Vec<f64> = (0..PROPERTY_GRID).map(|i| lo + step * i as f64).collect();
    match form {
        ChebyshevForm::Tail => {
            let mut prev = f.eval(&[grid[0]])?;
            if prev <= 0.0 {
                return Err(SubexpError::InvalidParameter {
                    name: "f",
                    value: prev,
                    requirement: "f > 0 on the sampled range (tail form)",
                });
            }
            for &t in &grid[1..] {
                let value = f.eval(&[t])?;
                if value <= 0.0 {
                    return Err(SubexpError::InvalidParameter {
                        name: "f",
                        value,
                        requirement: "f > 0 on the sampled range (tail form)",
                    });
                }
                if value < prev - comparison_tolerance(prev) {
                    return Err(SubexpError::InvalidParameter {
                        name: "f",
                        value: value - prev,
                        requirement: "f nondecreasing on the sampled range (tail form)",
                    });
                }
                prev = value;
            }
        }
        ChebyshevForm::AbsoluteTail => {
            let bound = lo.abs().max(hi.abs());
            let step = bound / (PROPERTY_GRID - 1) as f64;
            let mut prev = f.eval(&[0.0])?;
            for i in 1..PROPERTY_GRID {
                let t = step * i as f64;
                let value = f.eval(&[t])?;
                let mirrored = f.eval(&[-t])?;
                if (value - mirrored).abs() > comparison_tolerance(value) {
                    return Err(SubexpError::InvalidParameter {
                        name: "f",
                        value: value - mirrored,
                        requirement: "f even on the sampled range (absolute form)",
                    });
                }
                if value < prev - comparison_tolerance(prev) {
                    return Err(SubexpError::InvalidParameter {
                        name: "f",
                        value: value - prev,
                        requirement: "f nondecreasing on (0, inf) (absolute form)",
                    });
                }
                prev = value;
            }
        }
    }
    Ok(())
}

/// Chebyshev: capacity of the tail bounded by the relative `f`-moment.
pub fn verify_chebyshev(
    family: &MeasureFamily,
    x: &RandomVariable,
    f: &TestFunction,
    threshold: f64,
    form: ChebyshevForm,
) -> Result<InequalityCheck> {
    if f.arity() != 1 {
        return Err(SubexpError::ArityMismatch {
            expected: 1,
            actual: f.arity(),
        });
    }
    let f_at_threshold = f.eval(&[threshold])?;
    if f_at_threshold <= 0.0 {
        return Err(SubexpError::InvalidParameter {
            name: "f(x)",
            value: f_at_threshold,
            requirement: "f(x) > 0",
        });
    }
    let lo = x
        .values()
        .iter()
        .fold(threshold, |m, &v| m.min(v))
        .min(-threshold.abs());
    let hi = x
        .values()
        .iter()
        .fold(threshold, |m, &v| m.max(v))
        .max(threshold.abs());
    spot_check_chebyshev_f(f, form, lo, hi)?;

    let tail = match form {
        ChebyshevForm::Tail => Event::where_value(x, |v| v >= threshold),
        ChebyshevForm::AbsoluteTail => Event::where_value(x, |v| v.abs() >= threshold),
    };
    let pair = CapacityPair::new(family);
    let lhs = pair.upper_capacity(&tail)?;
    let image = x.map(|v| f.eval(&[v]).unwrap_or(f64::NAN))?;
    let rhs = family.upper_expectation(&image)? / f_at_threshold;
    let label = match form {
        ChebyshevForm::Tail => "chebyshev-tail",
        ChebyshevForm::AbsoluteTail => "chebyshev-absolute",
    };
    Ok(InequalityCheck::evaluate(
        format!("{label}({}, x={threshold})", f.name()),
        lhs,
        rhs,
    ))
}

fn spot_check_convexity(f: &TestFunction, lo: f64, hi: f64) -> Result<()> {
    let step = (hi - lo) / (PROPERTY_GRID - 1) as f64;
    for i in 0..PROPERTY_GRID - 2 {
        let a = lo + step * i as f64;
        let b = a + step;
        let c = b + step;
        let fa = f.eval(&[a])?;
        let fb = f.eval(&[b])?;
        let fc = f.eval(&[c])?;
        // Midpoint convexity: f(b) <= (f(a) + f(c)) / 2 on the uniform grid.
        let chord = 0.5 * (fa + fc);
        if fb > chord + comparison_tolerance(chord) {
            return Err(SubexpError::InvalidParameter {
                name: "f",
                value: fb - chord,
                requirement: "f midpoint-convex on the sampled range",
            });
        }
    }
    Ok(())
}

/// Jensen: `E[f(X)] >= f(E[X])` for convex `f`.
pub fn verify_jensen(
    family: &MeasureFamily,
    x: &RandomVariable,
    f: &TestFunction,
) -> Result<InequalityCheck> {
    if f.arity() != 1 {
        return Err(SubexpError::ArityMismatch {
            expected: 1,
            actual: f.arity(),
        });
    }
    let lo = x.values().iter().fold(f64::INFINITY, |m, &v| m.min(v)) - 1.0;
    let hi = x.values().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) + 1.0;
    spot_check_convexity(f, lo, hi)?;
    let mean = family.upper_expectation(x)?;
    let lhs = f.eval(&[mean])?;
    let image = x.map(|v| f.eval(&[v]).unwrap_or(f64::NAN))?;
    let rhs = family.upper_expectation(&image)?;
    Ok(InequalityCheck::evaluate(
        format!("jensen({})", f.name()),
        lhs,
        rhs,
    ))
}

/// Cr-inequality: `|x+y|^p <= 2^(p-1) (|x|^p + |y|^p)` for `p` in [1, 2].
pub fn verify_cr(x: f64, y: f64, p: f64) -> Result<bool> {
    if !(1.0..=2.0).contains(&p) {
        return Err(SubexpError::InvalidParameter {
            name: "p",
            value: p,
            requirement: "1 <= p <= 2",
        });
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(SubexpError::InvalidParameter {
            name: "x",
            value: if x.is_finite() { y } else { x },
            requirement: "finite arguments",
        });
    }
    let lhs = (x + y).abs().powf(p);
    let rhs = 2.0_f64.powf(p - 1.0) * (x.abs().powf(p) + y.abs().powf(p));
    Ok(lhs <= rhs + comparison_tolerance(rhs))
}

/// Positive-part bounds: `(x+y)^+ <= x^+ + |y|` and `(x+y)^- <= x^- + |y|`.
pub fn verify_positive_part(x: f64, y: f64) -> bool {
    let plus = (x + y).max(0.0);
    let minus = (-(x + y)).max(0.0);
    let bound_plus = x.max(0.0) + y.abs();
    let bound_minus = (-x).max(0.0) + y.abs();
    plus <= bound_plus + comparison_tolerance(bound_plus)
        && minus <= bound_minus + comparison_tolerance(bound_minus)
}

/// Which Rosenthal bound to verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RosenthalForm {
    /// `E[|max_{k<=n}(S_n - S_k)|^p] <= 2^(2-p) sum_k E|X_k|^p`,
    /// requiring `E_up[X_k] <= 0` for every k.
    SuffixDrawdown,
    /// `E[max_{k<=n}|S_k|^p] <= 2 sum_k E|X_k|^p`, requiring
    /// `E_up[X_k] = E_low[X_k] = 0` for every k.
    MaxAbsPartialSum,
}

/// Result of one Rosenthal verification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RosenthalReport {
    pub form: RosenthalForm,
    pub p: f64,
    pub n: usize,
    pub moment_sum: f64,
    pub check: InequalityCheck,
}

/// Verifies the Rosenthal inequality for an explicit finite sequence; the
/// left side is the exact DP value.
pub fn verify_rosenthal(
    spec: &SequenceSpec,
    p: f64,
    form: RosenthalForm,
) -> Result<RosenthalReport> {
    let n = spec.term_count().ok_or_else(|| SubexpError::InvalidSequence {
        what: "rosenthal verification",
        reason: "unbounded i.i.d. spec; materialize a finite prefix first".to_string(),
    })?;
    let mean_tolerance = 1e-12;
    let mut moment_sum = 0.0;
    for k in 1..=n {
        let term = spec.term(k)?;
        let upper = term.family.upper_expectation(&term.variable)?;
        match form {
            RosenthalForm::SuffixDrawdown => {
                if upper > mean_tolerance {
                    return Err(SubexpError::MeanSignPrecondition {
                        index: k,
                        mean: upper,
                    });
                }
            }
            RosenthalForm::MaxAbsPartialSum => {
                let lower = term.family.lower_expectation(&term.variable)?;
                if upper.abs() > mean_tolerance || lower.abs() > mean_tolerance {
                    return Err(SubexpError::MeanEqualityPrecondition {
                        index: k,
                        upper,
                        lower,
                        required: 0.0,
                    });
                }
            }
        }
        moment_sum += term.family.upper_expectation(&term.variable.abs_pow(p))?;
    }
    let (functional, constant, label) = match form {
        RosenthalForm::SuffixDrawdown => (
            PartialSumFunctional::max_suffix_drawdown(p)?,
            2.0_f64.powf(2.0 - p),
            "rosenthal-drawdown",
        ),
        RosenthalForm::MaxAbsPartialSum => (
            PartialSumFunctional::max_abs_partial_sum(p)?,
            2.0,
            "rosenthal-maxabs",
        ),
    };
    let lhs = functional_upper_expectation(spec, &functional)?;
    let rhs = constant * moment_sum;
    Ok(RosenthalReport {
        form,
        p,
        n,
        moment_sum,
        check: InequalityCheck::evaluate(format!("{label}(p={p}, n={n})"), lhs, rhs),
    })
}

/// One fuzz family's aggregate result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FuzzOutcome {
    pub check: String,
    pub instances: u64,
    pub violations: u64,
    /// Largest observed `lhs - rhs` (negative when everything held).
    pub worst_defect: f64,
    pub worst_witness: Option<String>,
    pub seed: u64,
}

impl FuzzOutcome {
    pub fn clean(&self) -> bool {
        self.violations == 0
    }
}

const FUZZ_CHUNK: u64 = 10_000;

struct ChunkStats {
    violations: u64,
    worst_defect: f64,
    worst_witness: Option<String>,
}

fn run_fuzz(
    name: &str,
    instances: u64,
    seed: u64,
    body: impl Fn(&mut ChaCha8Rng, u64) -> (f64, f64) + Sync,
) -> FuzzOutcome {
    let chunks = instances.div_ceil(FUZZ_CHUNK);
    let stats: Vec<ChunkStats> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk + 1);
            let lo = chunk * FUZZ_CHUNK;
            let hi = (lo + FUZZ_CHUNK).min(instances);
            let mut out = ChunkStats {
                violations: 0,
                worst_defect: f64::NEG_INFINITY,
                worst_witness: None,
            };
            for i in lo..hi {
                let (lhs, rhs) = body(&mut rng, i);
                let defect = lhs - rhs;
                if defect > out.worst_defect {
                    out.worst_defect = defect;
                    if defect > comparison_tolerance(rhs) {
                        out.worst_witness = Some(format!(
                            "instance {i}: lhs={lhs:.17e} rhs={rhs:.17e}"
                        ));
                    }
                }
                if defect > comparison_tolerance(rhs) {
                    out.violations += 1;
                }
            }
            out
        })
        .collect();

    let mut outcome = FuzzOutcome {
        check: name.to_string(),
        instances,
        violations: 0,
        worst_defect: f64::NEG_INFINITY,
        worst_witness: None,
        seed,
    };
    for s in stats {
        outcome.violations += s.violations;
        if s.worst_defect > outcome.worst_defect {
            outcome.worst_defect = s.worst_defect;
            if s.worst_witness.is_some() {
                outcome.worst_witness = s.worst_witness;
            }
        }
    }
    outcome
}

fn random_family(rng: &mut ChaCha8Rng) -> MeasureFamily {
    let size = rng.random_range(2..=6);
    let count = rng.random_range(1..=4);
    let measures = (0..count)
        .map(|_| {
            let raw: Vec<f64> = (0..size).map(|_| rng.random_range(0.01..1.0)).collect();
            let total: f64 = raw.iter().sum();
            DiscreteMeasure::new(raw.into_iter().map(|w| w / total).collect())
                .expect("normalized positive weights form a measure")
        })
        .collect();
    MeasureFamily::new(measures).expect("nonempty family")
}

fn random_variable(rng: &mut ChaCha8Rng, size: usize) -> RandomVariable {
    RandomVariable::new((0..size).map(|_| rng.random_range(-10.0..10.0)).collect())
        .expect("finite samples")
}

/// Randomized sweep of all five inequality families; each runs `instances`
/// independent cases. Deterministic for a fixed seed, regardless of the
/// number of worker threads.
pub fn fuzz_all(instances: u64, seed: u64) -> Vec<FuzzOutcome> {
    let holder = run_fuzz("holder", instances, seed, |rng, _| {
        let family = random_family(rng);
        let size = family.outcome_count();
        let x = random_variable(rng, size);
        let y = random_variable(rng, size);
        let p = rng.random_range(1.1..4.0);
        let check = verify_holder(&family, &x, &y, p).expect("valid fuzz inputs");
        (check.lhs, check.rhs)
    });

    let chebyshev = run_fuzz("chebyshev", instances, seed, |rng, _| {
        let family = random_family(rng);
        let size = family.outcome_count();
        let x = random_variable(rng, size);
        let (f, threshold, form) = if rng.random::<bool>() {
            let lambda: f64 = [0.25, 0.5, 1.0][rng.random_range(0..3)];
            (
                TestFunction::unary(format!("exp({lambda}t)"), 0, 3.0 * lambda.exp(), move |t| {
                    (lambda * t).exp()
                })
                .expect("valid test function"),
                rng.random_range(-2.0..2.0),
                ChebyshevForm::Tail,
            )
        } else {
            let power = [1.0, 1.5, 2.0, 4.0][rng.random_range(0..4)];
            (
                TestFunction::unary(format!("|t|^{power}"), 4, 5.0, move |t| {
                    t.abs().powf(power)
                })
                .expect("valid test function"),
                rng.random_range(0.05..10.0),
                ChebyshevForm::AbsoluteTail,
            )
        };
        let check =
            verify_chebyshev(&family, &x, &f, threshold, form).expect("valid fuzz inputs");
        (check.lhs, check.rhs)
    });

    let jensen = run_fuzz("jensen", instances, seed, |rng, _| {
        let family = random_family(rng);
        let size = family.outcome_count();
        let x = random_variable(rng, size);
        let shift = rng.random_range(-2.0..2.0);
        let f = match rng.random_range(0..4) {
            0 => TestFunction::unary("t^2", 1, 1.0, |t| t * t),
            1 => TestFunction::unary("|t-a|", 0, 1.0, move |t| (t - shift).abs()),
            2 => TestFunction::unary("exp(t/2)", 0, 200.0, |t| (0.5 * t).exp()),
            _ => TestFunction::unary("(t-a)^+", 0, 1.0, move |t| (t - shift).max(0.0)),
        }
        .expect("valid test function");
        let check = verify_jensen(&family, &x, &f).expect("valid fuzz inputs");
        (check.lhs, check.rhs)
    });

    let cr = run_fuzz("cr", instances, seed, |rng, _| {
        let x: f64 = rng.random_range(-10.0..10.0);
        let y: f64 = rng.random_range(-10.0..10.0);
        let p = rng.random_range(1.0..=2.0);
        let lhs = (x + y).abs().powf(p);
        let rhs = 2.0_f64.powf(p - 1.0) * (x.abs().powf(p) + y.abs().powf(p));
        (lhs, rhs)
    });

    let positive_part = run_fuzz("positive-part", instances, seed, |rng, _| {
        let x: f64 = rng.random_range(-10.0..10.0);
        let y: f64 = rng.random_range(-10.0..10.0);
        let plus_defect = (x + y).max(0.0) - (x.max(0.0) + y.abs());
        let minus_defect = (-(x + y)).max(0.0) - ((-x).max(0.0) + y.abs());
        // Encode both bounds as one (lhs, rhs) pair via the worse defect.
        if plus_defect >= minus_defect {
            ((x + y).max(0.0), x.max(0.0) + y.abs())
        } else {
            ((-(x + y)).max(0.0), (-x).max(0.0) + y.abs())
        }
    });

    vec![holder, chebyshev, jensen, cr, positive_part]
}

/// Grid configuration of the exhaustive Rosenthal sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RosenthalSweepConfig {
    /// Candidate two-point supports are all ordered pairs from this set.
    pub support_points: Vec<f64>,
    /// Probability of the first support point.
    pub probability_grid: Vec<f64>,
    /// Sequences of every length `1..=max_length` are enumerated.
    pub max_length: usize,
    pub exponents: Vec<f64>,
    /// Tolerance for the DP vs full-path-enumeration cross-check.
    pub cross_check_tolerance: f64,
    /// An instance is "tight" when `slack < fraction * rhs`.
    pub tight_slack_fraction: f64,
    /// Fair-coin singleton lengths probed for a tight instance; the base
    /// grid's bound never gets within the fraction above, so the sweep
    /// widens to longer walks where the bound is near-attained.
    pub widened_lengths: Vec<usize>,
}

impl Default for RosenthalSweepConfig {
    fn default() -> Self {
        RosenthalSweepConfig {
            support_points: vec![-1.0, -0.5, 0.5, 1.0],
            probability_grid: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
            max_length: 3,
            exponents: vec![1.0, 1.5, 2.0],
            cross_check_tolerance: 1e-10,
            tight_slack_fraction: 0.1,
            widened_lengths: vec![16, 64, 256],
        }
    }
}

/// One widened-probe row: a fair +-1 walk of length `n` at `p = 2`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WidenedProbe {
    pub n: usize,
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Aggregate result of [`rosenthal_exhaustive_sweep`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RosenthalSweepReport {
    pub marginal_count: usize,
    pub sequences_checked: u64,
    pub instances_checked: u64,
    pub violations: u64,
    pub worst_violation: Option<String>,
    pub max_cross_check_error: f64,
    pub cross_check_tolerance: f64,
    /// Smallest `slack / rhs` over the base grid.
    pub min_relative_slack: f64,
    pub min_relative_slack_witness: Option<String>,
    pub widened: Vec<WidenedProbe>,
    /// First instance (base grid, then widened probes) with
    /// `slack < tight_slack_fraction * rhs`.
    pub tight_instance: Option<String>,
}

impl RosenthalSweepReport {
    pub fn clean(&self) -> bool {
        self.violations == 0 && self.max_cross_check_error <= self.cross_check_tolerance
    }
}

fn drawdown_test_function(n: usize, p: f64) -> TestFunction {
    TestFunction::new(format!("drawdown^{p}"), n, 2, 16.0, move |args| {
        let mut sum = 0.0;
        let mut min = 0.0_f64;
        for &x in args {
            sum += x;
            min = min.min(sum);
        }
        (sum - min).powf(p)
    })
    .expect("valid path functional")
}

struct SweepSlice {
    sequences: u64,
    instances: u64,
    violations: u64,
    worst_violation: Option<String>,
    max_cross_check_error: f64,
    min_relative_slack: f64,
    min_relative_slack_witness: Option<String>,
    tight_instance: Option<String>,
}

/// Enumerates every sequence of up to `max_length` grid marginals (upper
/// mean <= 0 enforced by the grid filter), verifies the drawdown Rosenthal
/// bound at each exponent with the exact DP, and cross-checks the DP against
/// full-path enumeration.
pub fn rosenthal_exhaustive_sweep(config: &RosenthalSweepConfig) -> Result<RosenthalSweepReport> {
    let mut marginals: Vec<(Marginal, String)> = Vec::new();
    for (i, &a) in config.support_points.iter().enumerate() {
        for &b in &config.support_points[i + 1..] {
            // Families are unordered pairs {g1, g2} of first-point masses.
            for (gi, &g1) in config.probability_grid.iter().enumerate() {
                for &g2 in &config.probability_grid[gi..] {
                    let family = MeasureFamily::new(vec![
                        DiscreteMeasure::new(vec![g1, 1.0 - g1])?,
                        DiscreteMeasure::new(vec![g2, 1.0 - g2])?,
                    ])?;
                    let variable = RandomVariable::new(vec![a, b])?;
                    let marginal = Marginal::new(family, variable)?;
                    if marginal.upper_mean() <= 1e-12 {
                        let label = format!("(({a},{b}); p1={g1}, p1'={g2})");
                        marginals.push((marginal, label));
                    }
                }
            }
        }
    }
    let marginal_count = marginals.len();
    if marginal_count == 0 {
        return Err(SubexpError::InvalidParameter {
            name: "grid",
            value: 0.0,
            requirement: "at least one marginal with upper mean <= 0",
        });
    }

    let functionals: Vec<(f64, PartialSumFunctional)> = config
        .exponents
        .iter()
        .map(|&p| Ok((p, PartialSumFunctional::max_suffix_drawdown(p)?)))
        .collect::<Result<Vec<_>>>()?;

    let mut total = SweepSlice {
        sequences: 0,
        instances: 0,
        violations: 0,
        worst_violation: None,
        max_cross_check_error: 0.0,
        min_relative_slack: f64::INFINITY,
        min_relative_slack_witness: None,
        tight_instance: None,
    };

    for length in 1..=config.max_length {
        let phis: Vec<(f64, TestFunction)> = config
            .exponents
            .iter()
            .map(|&p| (p, drawdown_test_function(length, p)))
            .collect();
        // Parallel over the first coordinate; each task enumerates the rest
        // in lexicographic order, so the merged stats are deterministic.
        let slices: Vec<SweepSlice> = (0..marginal_count)
            .into_par_iter()
            .map(|first| {
                sweep_slice(
                    &marginals, first, length, &functionals, &phis, config,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        for s in slices {
            total.sequences += s.sequences;
            total.instances += s.instances;
            total.violations += s.violations;
            if total.worst_violation.is_none() {
                total.worst_violation = s.worst_violation;
            }
            if s.max_cross_check_error > total.max_cross_check_error {
                total.max_cross_check_error = s.max_cross_check_error;
            }
            if s.min_relative_slack < total.min_relative_slack {
                total.min_relative_slack = s.min_relative_slack;
                total.min_relative_slack_witness = s.min_relative_slack_witness;
            }
            if total.tight_instance.is_none() {
                total.tight_instance = s.tight_instance;
            }
        }
    }

    // Widened probes: long fair +-1 walks at p = 2, where the drawdown
    // second moment approaches n and the bound 2^0 * n becomes near-tight.
    let fair = Marginal::new(
        MeasureFamily::singleton(DiscreteMeasure::new(vec![0.5, 0.5])?),
        RandomVariable::new(vec![-1.0, 1.0])?,
    )?;
    let mut widened = Vec::new();
    let mut tight_instance = total.tight_instance.clone();
    for &n in &config.widened_lengths {
        let spec = SequenceSpec::iid(fair.clone()).materialize_prefix(n)?;
        let report = verify_rosenthal(&spec, 2.0, RosenthalForm::SuffixDrawdown)?;
        let ratio = report.check.lhs / report.check.rhs;
        if report.check.slack < config.tight_slack_fraction * report.check.rhs
            && tight_instance.is_none()
        {
            tight_instance = Some(format!(
                "fair +-1 walk, n={n}, p=2: lhs={:.6} rhs={:.6}",
                report.check.lhs, report.check.rhs
            ));
        }
        if !report.check.holds {
            total.violations += 1;
            if total.worst_violation.is_none() {
                total.worst_violation = Some(format!(
                    "widened probe n={n}: lhs={} rhs={}",
                    report.check.lhs, report.check.rhs
                ));
            }
        }
        total.instances += 1;
        widened.push(WidenedProbe {
            n,
            p: 2.0,
            lhs: report.check.lhs,
            rhs: report.check.rhs,
            ratio,
        });
    }

    Ok(RosenthalSweepReport {
        marginal_count,
        sequences_checked: total.sequences,
        instances_checked: total.instances,
        violations: total.violations,
        worst_violation: total.worst_violation,
        max_cross_check_error: total.max_cross_check_error,
        cross_check_tolerance: config.cross_check_tolerance,
        min_relative_slack: total.min_relative_slack,
        min_relative_slack_witness: total.min_relative_slack_witness,
        widened,
        tight_instance,
    })
}

fn sweep_slice(
    marginals: &[(Marginal, String)],
    first: usize,
    length: usize,
    functionals: &[(f64, PartialSumFunctional)],
    phis: &[(f64, TestFunction)],
    config: &RosenthalSweepConfig,
) -> Result<SweepSlice> {
    let m = marginals.len();
    let mut slice = SweepSlice {
        sequences: 0,
        instances: 0,
        violations: 0,
        worst_violation: None,
        max_cross_check_error: 0.0,
        min_relative_slack: f64::INFINITY,
        min_relative_slack_witness: None,
        tight_instance: None,
    };
    // Odometer over the remaining length-1 coordinates.
    let mut rest = vec![0usize; length - 1];
    loop {
        let mut indices = Vec::with_capacity(length);
        indices.push(first);
        indices.extend_from_slice(&rest);
        let spec = SequenceSpec::explicit(
            indices.iter().map(|&i| marginals[i].0.clone()).collect(),
        )?;
        slice.sequences += 1;

        let describe = |p: f64| {
            let parts: Vec<&str> = indices.iter().map(|&i| marginals[i].1.as_str()).collect();
            format!("n={length} p={p} marginals=[{}]", parts.join(", "))
        };

        for ((p, functional), (p2, phi)) in functionals.iter().zip(phis) {
            debug_assert_eq!(p, p2);
            let moment_sum: f64 = indices
                .iter()
                .map(|&i| marginals[i].0.upper_abs_moment(*p))
                .sum();
            let lhs = functional_upper_expectation(&spec, functional)?;
            let rhs = 2.0_f64.powf(2.0 - p) * moment_sum;
            slice.instances += 1;

            if lhs > rhs + comparison_tolerance(rhs) {
                slice.violations += 1;
                if slice.worst_violation.is_none() {
                    slice.worst_violation =
                        Some(format!("{}: lhs={lhs} rhs={rhs}", describe(*p)));
                }
            }
            let relative_slack = if rhs > 0.0 {
                (rhs - lhs) / rhs
            } else {
                f64::INFINITY
            };
            if relative_slack < slice.min_relative_slack {
                slice.min_relative_slack = relative_slack;
                slice.min_relative_slack_witness =
                    Some(format!("{}: lhs={lhs} rhs={rhs}", describe(*p)));
            }
            if relative_slack < config.tight_slack_fraction && slice.tight_instance.is_none() {
                slice.tight_instance = Some(format!("{}: lhs={lhs} rhs={rhs}", describe(*p)));
            }

            let enumerated = joint_upper_expectation(&spec, phi)?;
            let error = (lhs - enumerated).abs();
            if error > slice.max_cross_check_error {
                slice.max_cross_check_error = error;
            }
        }

        // Advance the odometer.
        let mut pos = rest.len();
        loop {
            if pos == 0 {
                return Ok(slice);
            }
            pos -= 1;
            rest[pos] += 1;
            if rest[pos] < m {
                break;
            }
            rest[pos] = 0;
        }
    }
}
