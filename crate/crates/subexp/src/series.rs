//! Convergence machinery: the Cauchy-window surrogate verdict, the
//! summability criterion checker, the truncated three-series checker, and a
//! Kronecker-lemma probe.
//!
//! Numeric "convergence" of an infinite series is undecidable from finite
//! data. The surrogate used throughout: a trace is Converged when the last
//! `window` partial sums span less than `epsilon`; NotConverged when every
//! increment in that window stays at or above the floor `10 * epsilon` (terms
//! bounded away from zero) or the trace left the divergence guard `1e12`;
//! Inconclusive otherwise.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capacity::{CapacityPair, Event};
use crate::error::{Result, SubexpError};
use crate::expectation::DEFAULT_TOLERANCE;
use crate::independence::SequenceSpec;

/// Traces whose magnitude passes this guard are judged NotConverged.
pub const DIVERGENCE_GUARD: f64 = 1e12;

/// The NotConverged increment floor is this multiple of `epsilon`.
pub const DIVERGENCE_FLOOR_FACTOR: f64 = 10.0;

/// Three-valued outcome of the Cauchy-window surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceVerdict {
    Converged,
    NotConverged,
    Inconclusive,
}

impl std::fmt::Display for ConvergenceVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConvergenceVerdict::Converged => "converged",
            ConvergenceVerdict::NotConverged => "not-converged",
            ConvergenceVerdict::Inconclusive => "inconclusive",
        };
        write!(f, "{s}")
    }
}

fn validate_window(epsilon: f64, window: usize) -> Result<()> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(SubexpError::InvalidParameter {
            name: "epsilon",
            value: epsilon,
            requirement: "epsilon > 0 and finite",
        });
    }
    if window < 2 {
        return Err(SubexpError::InvalidParameter {
            name: "window",
            value: window as f64,
            requirement: "window >= 2",
        });
    }
    Ok(())
}

/// Cauchy-window verdict on a partial-sum trace.
pub fn convergence_verdict(
    partial_sums: &[f64],
    epsilon: f64,
    window: usize,
) -> Result<ConvergenceVerdict> {
    validate_window(epsilon, window)?;
    if partial_sums.len() < 2 * window {
        return Err(SubexpError::SequenceTooShort {
            len: partial_sums.len(),
            required: 2 * window,
        });
    }
    let tail = &partial_sums[partial_sums.len() - window..];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut min_increment = f64::INFINITY;
    let mut max_abs = 0.0_f64;
    for (i, &s) in tail.iter().enumerate() {
        lo = lo.min(s);
        hi = hi.max(s);
        max_abs = max_abs.max(s.abs());
        if i > 0 {
            min_increment = min_increment.min((s - tail[i - 1]).abs());
        }
    }
    if hi - lo < epsilon {
        return Ok(ConvergenceVerdict::Converged);
    }
    if min_increment >= DIVERGENCE_FLOOR_FACTOR * epsilon || max_abs > DIVERGENCE_GUARD {
        return Ok(ConvergenceVerdict::NotConverged);
    }
    Ok(ConvergenceVerdict::Inconclusive)
}

/// One judged partial-sum trace of a criterion condition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionTrace {
    pub name: String,
    pub verdict: ConvergenceVerdict,
    pub final_value: f64,
    pub partial_sums: Vec<f64>,
}

impl ConditionTrace {
    fn from_terms(name: impl Into<String>, terms: &[f64], epsilon: f64, window: usize) -> Result<Self> {
        let mut partial_sums = Vec::with_capacity(terms.len());
        let mut acc = 0.0;
        for &t in terms {
            acc += t;
            partial_sums.push(acc);
        }
        let verdict = convergence_verdict(&partial_sums, epsilon, window)?;
        Ok(ConditionTrace {
            name: name.into(),
            verdict,
            final_value: acc,
            partial_sums,
        })
    }
}

/// Verdicts and traces for one criterion run. `criterion_satisfied` means
/// only that every sufficient condition was judged Converged; it never
/// asserts divergence of the underlying random series.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesDiagnostics {
    pub horizon: usize,
    pub epsilon: f64,
    pub window: usize,
    pub conditions: Vec<ConditionTrace>,
    pub criterion_satisfied: bool,
}

impl SeriesDiagnostics {
    fn new(horizon: usize, epsilon: f64, window: usize, conditions: Vec<ConditionTrace>) -> Self {
        let criterion_satisfied = conditions
            .iter()
            .all(|c| c.verdict == ConvergenceVerdict::Converged);
        SeriesDiagnostics {
            horizon,
            epsilon,
            window,
            conditions,
            criterion_satisfied,
        }
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionTrace> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

fn validate_horizon(horizon: usize, window: usize) -> Result<()> {
    if horizon < 2 * window {
        return Err(SubexpError::InvalidParameter {
            name: "horizon",
            value: horizon as f64,
            requirement: "horizon >= 2 * window",
        });
    }
    Ok(())
}

fn validate_exponent(name: &'static str, p: f64) -> Result<()> {
    if !(1.0..=2.0).contains(&p) {
        return Err(SubexpError::InvalidParameter {
            name,
            value: p,
            requirement: "1 <= p <= 2",
        });
    }
    Ok(())
}

/// Checks the summability criterion: `sum E_up(X_n)` and `sum E_low(X_n)`
/// converge and `sum E_up(|X_n|^p)` is finite. All three judged by the
/// Cauchy-window surrogate on traces up to `horizon`.
pub fn theorem1_check(
    spec: &SequenceSpec,
    p: f64,
    horizon: usize,
    epsilon: f64,
    window: usize,
) -> Result<SeriesDiagnostics> {
    validate_exponent("p", p)?;
    validate_window(epsilon, window)?;
    validate_horizon(horizon, window)?;

    let terms: Vec<(f64, f64, f64)> = (1..=horizon)
        .into_par_iter()
        .map(|n| {
            let term = spec.term(n)?;
            let upper = term.family.upper_expectation(&term.variable)?;
            let lower = term.family.lower_expectation(&term.variable)?;
            let moment = term.family.upper_expectation(&term.variable.abs_pow(p))?;
            Ok((upper, lower, moment))
        })
        .collect::<Result<_>>()?;

    let upper: Vec<f64> = terms.iter().map(|t| t.0).collect();
    let lower: Vec<f64> = terms.iter().map(|t| t.1).collect();
    let moment: Vec<f64> = terms.iter().map(|t| t.2).collect();
    let conditions = vec![
        ConditionTrace::from_terms("sum-upper-mean", &upper, epsilon, window)?,
        ConditionTrace::from_terms("sum-lower-mean", &lower, epsilon, window)?,
        ConditionTrace::from_terms("sum-upper-abs-moment", &moment, epsilon, window)?,
    ];
    Ok(SeriesDiagnostics::new(horizon, epsilon, window, conditions))
}

/// Checks the truncated three-series criterion at level `c`:
/// (i) `sum V_up(|X_n| > c)`, (ii) `sum E_up(X_n^c)` and `sum E_low(X_n^c)`,
/// (iii) `sum E_up(|X_n^c|^q)`, all judged by the Cauchy-window surrogate.
///
/// A satisfied criterion is sufficient for almost-sure convergence under the
/// upper capacity; an unsatisfied one asserts nothing.
pub fn three_series_check(
    spec: &SequenceSpec,
    c: f64,
    q: f64,
    horizon: usize,
    epsilon: f64,
    window: usize,
) -> Result<SeriesDiagnostics> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(SubexpError::InvalidParameter {
            name: "c",
            value: c,
            requirement: "c > 0 and finite",
        });
    }
    validate_exponent("q", q)?;
    validate_window(epsilon, window)?;
    validate_horizon(horizon, window)?;

    let terms: Vec<(f64, f64, f64, f64)> = (1..=horizon)
        .into_par_iter()
        .map(|n| {
            let term = spec.term(n)?;
            let exceed = Event::where_value(&term.variable, |v| v.abs() > c);
            let tail = CapacityPair::new(term.family).upper_capacity(&exceed)?;
            let truncated = term.variable.truncated(c)?;
            let upper = term.family.upper_expectation(&truncated)?;
            let lower = term.family.lower_expectation(&truncated)?;
            debug_assert!(lower <= upper + DEFAULT_TOLERANCE);
            let moment = term.family.upper_expectation(&truncated.abs_pow(q))?;
            Ok((tail, upper, lower, moment))
        })
        .collect::<Result<_>>()?;

    let tail: Vec<f64> = terms.iter().map(|t| t.0).collect();
    let upper: Vec<f64> = terms.iter().map(|t| t.1).collect();
    let lower: Vec<f64> = terms.iter().map(|t| t.2).collect();
    let moment: Vec<f64> = terms.iter().map(|t| t.3).collect();
    let conditions = vec![
        ConditionTrace::from_terms("sum-tail-capacity", &tail, epsilon, window)?,
        ConditionTrace::from_terms("sum-upper-truncated-mean", &upper, epsilon, window)?,
        ConditionTrace::from_terms("sum-lower-truncated-mean", &lower, epsilon, window)?,
        ConditionTrace::from_terms("sum-upper-truncated-moment", &moment, epsilon, window)?,
    ];
    Ok(SeriesDiagnostics::new(horizon, epsilon, window, conditions))
}

/// Result of [`kronecker_check`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KroneckerReport {
    /// Verdict on the premise series `sum x_n / a_n`.
    pub premise: ConvergenceVerdict,
    /// `|sum_{i<=N} x_i| / a_N`.
    pub final_ratio: f64,
    pub conclusion_tolerance: f64,
    /// `Some(final_ratio < tolerance)` when the premise converged; `None`
    /// otherwise (the lemma asserts nothing without its premise).
    pub conclusion: Option<bool>,
}

/// Numeric probe of the Kronecker lemma: if `sum x_n / a_n` converges and
/// `0 < a_n` nondecreasing to a large final value, then
/// `(sum_{i<=N} x_i) / a_N` should be small.
pub fn kronecker_check(
    x: &[f64],
    a: &[f64],
    epsilon: f64,
    window: usize,
    conclusion_tolerance: f64,
    override_growth_guard: bool,
) -> Result<KroneckerReport> {
    validate_window(epsilon, window)?;
    if x.len() != a.len() {
        return Err(SubexpError::DimensionMismatch {
            what: "x vs a",
            expected: x.len(),
            actual: a.len(),
        });
    }
    if x.len() < 2 * window {
        return Err(SubexpError::SequenceTooShort {
            len: x.len(),
            required: 2 * window,
        });
    }
    let mut prev = 0.0;
    for (i, &an) in a.iter().enumerate() {
        if !(an > 0.0) || an < prev {
            return Err(SubexpError::InvalidSequence {
                what: "a",
                reason: format!("a[{i}] = {an} is not positive nondecreasing"),
            });
        }
        prev = an;
    }
    let last = *a.last().expect("nonempty by the window check");
    if !override_growth_guard && last <= 1e3 * a[0] {
        return Err(SubexpError::InvalidParameter {
            name: "a",
            value: last / a[0],
            requirement: "a_N > 1000 * a_1 (or override the growth guard)",
        });
    }
    if !(conclusion_tolerance > 0.0) {
        return Err(SubexpError::InvalidParameter {
            name: "conclusion_tolerance",
            value: conclusion_tolerance,
            requirement: "tolerance > 0",
        });
    }

    let mut premise_sums = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    for (xi, ai) in x.iter().zip(a) {
        acc += xi / ai;
        premise_sums.push(acc);
    }
    let premise = convergence_verdict(&premise_sums, epsilon, window)?;
    let total: f64 = x.iter().sum();
    let final_ratio = total.abs() / last;
    let conclusion = match premise {
        ConvergenceVerdict::Converged => Some(final_ratio < conclusion_tolerance),
        _ => None,
    };
    Ok(KroneckerReport {
        premise,
        final_ratio,
        conclusion_tolerance,
        conclusion,
    })
}
