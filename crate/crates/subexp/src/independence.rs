//! Peng-style independence for finite sequences.
//!
//! A sequence is specified by its ordered marginals; each next variable is
//! independent of the prefix, meaning the joint upper expectation nests the
//! marginal upper expectations with the LAST variable innermost:
//! `E[phi(X, Y)] = E[ x -> E[phi(x, Y)] evaluated at X ]`. The nesting order
//! matters; reversing it can change the value.

use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Result, SubexpError};
use crate::expectation::{MeasureFamily, RandomVariable, TestFunction};

/// Hard cap on enumerated path/state counts for the exact recursions.
pub const ENUMERATION_GUARD: u64 = 10_000_000;

/// One marginal: a measure family plus the variable's values per outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginal {
    family: MeasureFamily,
    variable: RandomVariable,
}

impl Marginal {
    pub fn new(family: MeasureFamily, variable: RandomVariable) -> Result<Self> {
        if variable.len() != family.outcome_count() {
            return Err(SubexpError::DimensionMismatch {
                what: "marginal variable vs family",
                expected: family.outcome_count(),
                actual: variable.len(),
            });
        }
        Ok(Marginal { family, variable })
    }

    pub fn family(&self) -> &MeasureFamily {
        &self.family
    }

    pub fn variable(&self) -> &RandomVariable {
        &self.variable
    }

    pub fn upper_mean(&self) -> f64 {
        self.family
            .upper_expectation(&self.variable)
            .expect("dimensions checked at construction")
    }

    pub fn lower_mean(&self) -> f64 {
        self.family
            .lower_expectation(&self.variable)
            .expect("dimensions checked at construction")
    }

    /// `E_up[|X|^p]`.
    pub fn upper_abs_moment(&self, p: f64) -> f64 {
        self.family
            .upper_expectation(&self.variable.abs_pow(p))
            .expect("dimensions checked at construction")
    }
}

/// Deterministic per-term scaling `a_n` applied to an i.i.d. base variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "rule")]
pub enum ScaleRule {
    /// `a_n = value` for all n.
    Constant { value: f64 },
    /// `a_n = coefficient * n^(-exponent)`, optionally with sign `(-1)^n`.
    PowerLaw {
        coefficient: f64,
        exponent: f64,
        alternating: bool,
    },
}

impl ScaleRule {
    pub fn identity() -> Self {
        ScaleRule::Constant { value: 1.0 }
    }

    fn validate(&self) -> Result<()> {
        let (name, value) = match self {
            ScaleRule::Constant { value } => ("scale value", *value),
            ScaleRule::PowerLaw { coefficient, .. } => ("scale coefficient", *coefficient),
        };
        if !value.is_finite() {
            return Err(SubexpError::InvalidParameter {
                name,
                value,
                requirement: "finite",
            });
        }
        if let ScaleRule::PowerLaw { exponent, .. } = self {
            if !exponent.is_finite() {
                return Err(SubexpError::InvalidParameter {
                    name: "scale exponent",
                    value: *exponent,
                    requirement: "finite",
                });
            }
        }
        Ok(())
    }

    /// The factor for term `n` (1-based).
    pub fn factor(&self, n: usize) -> f64 {
        match *self {
            ScaleRule::Constant { value } => value,
            ScaleRule::PowerLaw {
                coefficient,
                exponent,
                alternating,
            } => {
                let sign = if alternating && n % 2 == 1 { -1.0 } else { 1.0 };
                sign * coefficient * (n as f64).powf(-exponent)
            }
        }
    }
}

/// Ordered marginals of a Peng-independent sequence, indexed from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SequenceSpec {
    /// Finitely many explicit marginals.
    Explicit(Vec<Marginal>),
    /// Unbounded sequence `X_n = a_n * X` with `X` from a shared marginal.
    ScaledIid { base: Marginal, scale: ScaleRule },
}

/// Borrowed view of one term of a sequence.
#[derive(Debug, Clone)]
pub struct TermView<'a> {
    pub family: &'a MeasureFamily,
    pub variable: Cow<'a, RandomVariable>,
}

impl SequenceSpec {
    pub fn explicit(marginals: Vec<Marginal>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(SubexpError::InvalidSequence {
                what: "explicit sequence",
                reason: "needs at least one marginal".to_string(),
            });
        }
        Ok(SequenceSpec::Explicit(marginals))
    }

    pub fn iid(base: Marginal) -> Self {
        SequenceSpec::ScaledIid {
            base,
            scale: ScaleRule::identity(),
        }
    }

    pub fn scaled_iid(base: Marginal, scale: ScaleRule) -> Result<Self> {
        scale.validate()?;
        Ok(SequenceSpec::ScaledIid { base, scale })
    }

    /// Number of terms, or `None` for unbounded i.i.d. specs.
    pub fn term_count(&self) -> Option<usize> {
        match self {
            SequenceSpec::Explicit(ms) => Some(ms.len()),
            SequenceSpec::ScaledIid { .. } => None,
        }
    }

    /// The `n`-th term, `n >= 1`.
    pub fn term(&self, n: usize) -> Result<TermView<'_>> {
        if n == 0 {
            return Err(SubexpError::TermOutOfRange {
                index: 0,
                available: self.term_count().unwrap_or(usize::MAX),
            });
        }
        match self {
            SequenceSpec::Explicit(ms) => {
                let marginal = ms.get(n - 1).ok_or(SubexpError::TermOutOfRange {
                    index: n,
                    available: ms.len(),
                })?;
                Ok(TermView {
                    family: marginal.family(),
                    variable: Cow::Borrowed(marginal.variable()),
                })
            }
            SequenceSpec::ScaledIid { base, scale } => {
                let factor = scale.factor(n);
                let variable = if factor == 1.0 {
                    Cow::Borrowed(base.variable())
                } else {
                    Cow::Owned(base.variable().scaled(factor)?)
                };
                Ok(TermView {
                    family: base.family(),
                    variable,
                })
            }
        }
    }

    /// Materializes terms `1..=n` as an explicit spec.
    pub fn materialize_prefix(&self, n: usize) -> Result<SequenceSpec> {
        if n == 0 {
            return Err(SubexpError::InvalidParameter {
                name: "n",
                value: 0.0,
                requirement: "n >= 1",
            });
        }
        let marginals = (1..=n)
            .map(|k| {
                let view = self.term(k)?;
                Marginal::new(view.family.clone(), view.variable.into_owned())
            })
            .collect::<Result<Vec<_>>>()?;
        SequenceSpec::explicit(marginals)
    }

    fn views_for(&self, n: usize) -> Result<Vec<TermView<'_>>> {
        (1..=n).map(|k| self.term(k)).collect()
    }
}

/// Running description of a partial-sum path: the current sum and the
/// extremes over all partial sums seen so far, `S_0 = 0` included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub sum: f64,
    pub min_partial_sum: f64,
    pub max_partial_sum: f64,
}

impl PathSummary {
    fn initial() -> Self {
        PathSummary {
            sum: 0.0,
            min_partial_sum: 0.0,
            max_partial_sum: 0.0,
        }
    }

    fn advance(self, increment: f64) -> Self {
        let sum = self.sum + increment;
        PathSummary {
            sum,
            min_partial_sum: self.min_partial_sum.min(sum),
            max_partial_sum: self.max_partial_sum.max(sum),
        }
    }

    /// `max_{k<=n} |S_k|`, from the recorded extremes.
    pub fn max_abs_partial_sum(self) -> f64 {
        self.min_partial_sum.abs().max(self.max_partial_sum.abs())
    }

    /// `max_{k<=n} (S_n - S_k) = S_n - min_k S_k`, always non-negative.
    pub fn suffix_drawdown(self) -> f64 {
        self.sum - self.min_partial_sum
    }
}

/// Which scalar a [`PartialSumFunctional`] extracts from a path.
#[derive(Clone)]
pub enum FunctionalKind {
    /// `|S_n|^p`.
    FinalSum,
    /// `|max_{k<=n}(S_n - S_k)|^p`.
    MaxSuffixDrawdown,
    /// `max_{k<=n} |S_k|^p`.
    MaxAbsPartialSum,
    /// Arbitrary function of the final path summary.
    Custom(Arc<dyn Fn(PathSummary) -> f64 + Send + Sync>),
}

impl fmt::Debug for FunctionalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            FunctionalKind::FinalSum => "FinalSum",
            FunctionalKind::MaxSuffixDrawdown => "MaxSuffixDrawdown",
            FunctionalKind::MaxAbsPartialSum => "MaxAbsPartialSum",
            FunctionalKind::Custom(_) => "Custom",
        };
        write!(f, "{name}")
    }
}

/// A path functional that depends on the path only through
/// (running sum, running extremes), so the exact DP state stays small.
#[derive(Debug, Clone)]
pub struct PartialSumFunctional {
    kind: FunctionalKind,
    exponent: f64,
}

impl PartialSumFunctional {
    fn with_exponent(kind: FunctionalKind, p: f64) -> Result<Self> {
        if !(1.0..=2.0).contains(&p) {
            return Err(SubexpError::InvalidParameter {
                name: "p",
                value: p,
                requirement: "1 <= p <= 2",
            });
        }
        Ok(PartialSumFunctional { kind, exponent: p })
    }

    pub fn final_sum(p: f64) -> Result<Self> {
        Self::with_exponent(FunctionalKind::FinalSum, p)
    }

    pub fn max_suffix_drawdown(p: f64) -> Result<Self> {
        Self::with_exponent(FunctionalKind::MaxSuffixDrawdown, p)
    }

    pub fn max_abs_partial_sum(p: f64) -> Result<Self> {
        Self::with_exponent(FunctionalKind::MaxAbsPartialSum, p)
    }

    pub fn custom(f: impl Fn(PathSummary) -> f64 + Send + Sync + 'static) -> Self {
        PartialSumFunctional {
            kind: FunctionalKind::Custom(Arc::new(f)),
            exponent: 1.0,
        }
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn kind(&self) -> &FunctionalKind {
        &self.kind
    }

    /// Value of the functional on a completed path.
    pub fn evaluate(&self, state: PathSummary) -> f64 {
        match &self.kind {
            FunctionalKind::FinalSum => state.sum.abs().powf(self.exponent),
            FunctionalKind::MaxSuffixDrawdown => state.suffix_drawdown().powf(self.exponent),
            FunctionalKind::MaxAbsPartialSum => {
                state.max_abs_partial_sum().powf(self.exponent)
            }
            FunctionalKind::Custom(f) => f(state),
        }
    }

    /// DP key: the minimal projection of the state that determines both the
    /// final value and the key's own transitions.
    fn state_key(&self, state: PathSummary) -> StateKey {
        match &self.kind {
            FunctionalKind::FinalSum => [canonical_bits(state.sum), 0, 0],
            FunctionalKind::MaxSuffixDrawdown => [
                canonical_bits(state.sum),
                canonical_bits(state.min_partial_sum),
                0,
            ],
            FunctionalKind::MaxAbsPartialSum => [
                canonical_bits(state.sum),
                canonical_bits(state.max_abs_partial_sum()),
                0,
            ],
            FunctionalKind::Custom(_) => [
                canonical_bits(state.sum),
                canonical_bits(state.min_partial_sum),
                canonical_bits(state.max_partial_sum),
            ],
        }
    }
}

type StateKey = [u64; 3];

/// Bit pattern with `-0.0` folded into `+0.0` so equal reals share a key.
fn canonical_bits(x: f64) -> u64 {
    if x == 0.0 {
        0.0_f64.to_bits()
    } else {
        x.to_bits()
    }
}

/// Joint upper expectation of `phi(X_1, ..., X_n)` by the defining backward
/// recursion, last variable innermost:
/// `phi_{k-1}(x_1..x_{k-1}) = E_up over marginal k of phi_k(x_1..x_{k-1}, X_k)`.
///
/// For explicit specs `phi`'s arity must equal the sequence length; for
/// i.i.d. specs the arity selects how many leading terms are used.
pub fn joint_upper_expectation(spec: &SequenceSpec, phi: &TestFunction) -> Result<f64> {
    let n = phi.arity();
    if let Some(len) = spec.term_count() {
        if len != n {
            return Err(SubexpError::ArityMismatch {
                expected: len,
                actual: n,
            });
        }
    }
    let terms = spec.views_for(n)?;

    let mut paths: u128 = 1;
    for term in &terms {
        paths = paths.saturating_mul(term.family.outcome_count() as u128);
    }
    if paths > ENUMERATION_GUARD as u128 {
        return Err(SubexpError::StateSpaceExceeded {
            estimated: paths,
            limit: ENUMERATION_GUARD,
        });
    }

    let mut prefix = Vec::with_capacity(n);
    nested_expectation(&terms, phi, &mut prefix)
}

fn nested_expectation(
    terms: &[TermView<'_>],
    phi: &TestFunction,
    prefix: &mut Vec<f64>,
) -> Result<f64> {
    let k = prefix.len();
    let term = &terms[k];
    let m = term.family.outcome_count();
    let mut continuation = Vec::with_capacity(m);
    for outcome in 0..m {
        prefix.push(term.variable.value(outcome));
        let value = if k + 1 == terms.len() {
            phi.eval(prefix)?
        } else {
            nested_expectation(terms, phi, prefix)?
        };
        prefix.pop();
        continuation.push(value);
    }
    term.family.upper_expectation(&RandomVariable::new(continuation)?)
}

/// Exact `E_up[f(path)]` by backward recursion over reachable collapsed
/// (sum, extremum) states. Equals [`joint_upper_expectation`] applied to the
/// expanded path functional wherever both are feasible.
pub fn functional_upper_expectation(
    spec: &SequenceSpec,
    functional: &PartialSumFunctional,
) -> Result<f64> {
    let n = spec.term_count().ok_or_else(|| SubexpError::InvalidSequence {
        what: "functional recursion",
        reason: "unbounded i.i.d. spec; materialize a finite prefix first".to_string(),
    })?;
    let terms = spec.views_for(n)?;

    // Forward pass: reachable states per layer, keyed by their projection.
    let mut layers: Vec<BTreeMap<StateKey, PathSummary>> = Vec::with_capacity(n + 1);
    let init = PathSummary::initial();
    layers.push(BTreeMap::from([(functional.state_key(init), init)]));
    let mut total_states: u64 = 1;
    for term in &terms {
        let mut next: BTreeMap<StateKey, PathSummary> = BTreeMap::new();
        let last = layers.last().expect("at least the initial layer");
        for &state in last.values() {
            for outcome in 0..term.family.outcome_count() {
                let advanced = state.advance(term.variable.value(outcome));
                next.entry(functional.state_key(advanced)).or_insert(advanced);
            }
        }
        total_states += next.len() as u64;
        if total_states > ENUMERATION_GUARD {
            return Err(SubexpError::StateSpaceExceeded {
                estimated: u128::from(total_states),
                limit: ENUMERATION_GUARD,
            });
        }
        layers.push(next);
    }

    // Backward pass: value of a state is the max over the next marginal's
    // measures of the expected continuation value.
    let mut values: BTreeMap<StateKey, f64> = layers[n]
        .iter()
        .map(|(key, &state)| (*key, functional.evaluate(state)))
        .collect();
    for (k, term) in terms.iter().enumerate().rev() {
        let m = term.family.outcome_count();
        let mut layer_values: BTreeMap<StateKey, f64> = BTreeMap::new();
        for (key, &state) in &layers[k] {
            let continuation: Vec<f64> = (0..m)
                .map(|outcome| {
                    let advanced = state.advance(term.variable.value(outcome));
                    values[&functional.state_key(advanced)]
                })
                .collect();
            let value = term
                .family
                .upper_expectation(&RandomVariable::new(continuation)?)?;
            layer_values.insert(*key, value);
        }
        values = layer_values;
    }

    debug_assert_eq!(values.len(), 1);
    Ok(*values
        .values()
        .next()
        .expect("layer 0 holds exactly the initial state"))
}

/// Tolerance for the identical-distribution check.
pub const IDENTICAL_DISTRIBUTION_TOLERANCE: f64 = 1e-10;

/// Per-function row of an identical-distribution comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistributionComparison {
    pub function: String,
    pub upper_a: f64,
    pub upper_b: f64,
    pub lower_a: f64,
    pub lower_b: f64,
    /// Larger of the upper and lower gaps.
    pub discrepancy: f64,
}

/// Result of [`check_identical_distribution`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdenticalDistributionReport {
    pub tolerance: f64,
    pub comparisons: Vec<DistributionComparison>,
    pub max_discrepancy: f64,
    pub worst_function: Option<String>,
}

impl IdenticalDistributionReport {
    pub fn identical(&self) -> bool {
        self.max_discrepancy <= self.tolerance
    }
}

/// Compares `E_up[phi(X_a)]` with `E_up[phi(X_b)]` (and the lower analogues)
/// over a battery of unary test functions.
pub fn check_identical_distribution(
    a: &Marginal,
    b: &Marginal,
    battery: &[TestFunction],
) -> Result<IdenticalDistributionReport> {
    if battery.is_empty() {
        return Err(SubexpError::InvalidParameter {
            name: "battery",
            value: 0.0,
            requirement: "at least one test function",
        });
    }
    let mut comparisons = Vec::with_capacity(battery.len());
    let mut max_discrepancy = 0.0_f64;
    let mut worst_function = None;
    for phi in battery {
        if phi.arity() != 1 {
            return Err(SubexpError::ArityMismatch {
                expected: 1,
                actual: phi.arity(),
            });
        }
        let image_a = a.variable().map(|v| phi.eval(&[v]).unwrap_or(f64::NAN))?;
        let image_b = b.variable().map(|v| phi.eval(&[v]).unwrap_or(f64::NAN))?;
        let upper_a = a.family().upper_expectation(&image_a)?;
        let upper_b = b.family().upper_expectation(&image_b)?;
        let lower_a = a.family().lower_expectation(&image_a)?;
        let lower_b = b.family().lower_expectation(&image_b)?;
        let discrepancy = (upper_a - upper_b).abs().max((lower_a - lower_b).abs());
        if discrepancy > max_discrepancy {
            max_discrepancy = discrepancy;
            worst_function = Some(phi.name().to_string());
        }
        comparisons.push(DistributionComparison {
            function: phi.name().to_string(),
            upper_a,
            upper_b,
            lower_a,
            lower_b,
            discrepancy,
        });
    }
    Ok(IdenticalDistributionReport {
        tolerance: IDENTICAL_DISTRIBUTION_TOLERANCE,
        comparisons,
        max_discrepancy,
        worst_function,
    })
}

/// Default battery: polynomials to degree four, absolute value, two clamps.
pub fn default_battery() -> Vec<TestFunction> {
    vec![
        TestFunction::unary("x", 0, 1.0, |x| x).unwrap(),
        TestFunction::unary("x^2", 1, 1.0, |x| x * x).unwrap(),
        TestFunction::unary("x^3", 2, 2.0, |x| x * x * x).unwrap(),
        TestFunction::unary("x^4", 3, 3.0, |x| x.powi(4)).unwrap(),
        TestFunction::unary("abs", 0, 1.0, f64::abs).unwrap(),
        TestFunction::unary("clamp[-1,1]", 0, 1.0, |x| x.clamp(-1.0, 1.0)).unwrap(),
        TestFunction::unary("clamp[-0.5,0.5]", 0, 1.0, |x| x.clamp(-0.5, 0.5)).unwrap(),
    ]
}
