//! Sub-linear expectation engine over finite discrete outcome spaces.
//!
//! An upper expectation is represented as the envelope of a finite set of
//! ordinary probability vectors: `E_up[X] = max_P sum_w P(w) X(w)`. The
//! envelope is monotone, constant preserving, sub-additive and positively
//! homogeneous by construction, and the conjugate (lower) expectation is
//! `E_low[X] = -E_up[-X] = min_P E_P[X]`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SubexpError};

/// Absolute tolerance used for equality assertions on doubles.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Probability vectors must sum to one within this tolerance.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;

/// One point of a finite outcome space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outcome {
    /// Position of the outcome within its space.
    pub index: usize,
    /// Optional human-readable label, used in reports.
    pub label: Option<String>,
}

impl Outcome {
    pub fn new(index: usize) -> Self {
        Outcome { index, label: None }
    }

    pub fn labeled(index: usize, label: impl Into<String>) -> Self {
        Outcome {
            index,
            label: Some(label.into()),
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(label) => write!(f, "{label}"),
            None => write!(f, "w{}", self.index),
        }
    }
}

/// A single probability vector over a finite outcome space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    probabilities: Vec<f64>,
}

impl DiscreteMeasure {
    /// Validates non-negativity and normalization (sum within
    /// [`PROBABILITY_SUM_TOLERANCE`] of one).
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        Self::validated(probabilities, 0)
    }

    /// As [`DiscreteMeasure::new`], reporting `index` in error messages.
    pub fn validated(probabilities: Vec<f64>, index: usize) -> Result<Self> {
        if probabilities.is_empty() {
            return Err(SubexpError::InvalidProbabilities {
                index,
                reason: "empty probability vector".to_string(),
            });
        }
        for (i, &p) in probabilities.iter().enumerate() {
            if !p.is_finite() {
                return Err(SubexpError::InvalidProbabilities {
                    index,
                    reason: format!("entry {i} is not finite ({p})"),
                });
            }
            if p < 0.0 {
                return Err(SubexpError::InvalidProbabilities {
                    index,
                    reason: format!("entry {i} is negative ({p})"),
                });
            }
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(SubexpError::InvalidProbabilities {
                index,
                reason: format!("entries sum to {sum}, expected 1"),
            });
        }
        Ok(DiscreteMeasure { probabilities })
    }

    /// Point mass at outcome `index`.
    pub fn point_mass(size: usize, index: usize) -> Result<Self> {
        if index >= size {
            return Err(SubexpError::TermOutOfRange {
                index,
                available: size,
            });
        }
        let mut probabilities = vec![0.0; size];
        probabilities[index] = 1.0;
        Ok(DiscreteMeasure { probabilities })
    }

    /// Uniform measure over the outcomes selected by `support`.
    pub fn uniform_on(size: usize, support: &[usize]) -> Result<Self> {
        if support.is_empty() {
            return Err(SubexpError::InvalidProbabilities {
                index: 0,
                reason: "uniform measure needs a nonempty support".to_string(),
            });
        }
        let mut probabilities = vec![0.0; size];
        let weight = 1.0 / support.len() as f64;
        for &i in support {
            if i >= size {
                return Err(SubexpError::TermOutOfRange {
                    index: i,
                    available: size,
                });
            }
            probabilities[i] += weight;
        }
        Ok(DiscreteMeasure { probabilities })
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Classical expectation: a plain left-to-right dot product.
    pub fn expectation(&self, variable: &RandomVariable) -> Result<f64> {
        if variable.len() != self.len() {
            return Err(SubexpError::DimensionMismatch {
                what: "random variable vs measure",
                expected: self.len(),
                actual: variable.len(),
            });
        }
        let mut acc = 0.0;
        for (p, x) in self.probabilities.iter().zip(variable.values()) {
            acc += p * x;
        }
        Ok(acc)
    }

    /// Probability of the outcomes where `member` is true.
    pub fn mass_on(&self, member: &[bool]) -> Result<f64> {
        if member.len() != self.len() {
            return Err(SubexpError::DimensionMismatch {
                what: "event vs measure",
                expected: self.len(),
                actual: member.len(),
            });
        }
        let mut acc = 0.0;
        for (p, &m) in self.probabilities.iter().zip(member) {
            if m {
                acc += p;
            }
        }
        Ok(acc)
    }

    /// Inverse-CDF draw: maps a uniform `u` in `[0, 1)` to an outcome index.
    pub fn sample(&self, u: f64) -> usize {
        let mut cumulative = 0.0;
        for (i, &p) in self.probabilities.iter().enumerate() {
            cumulative += p;
            if u < cumulative {
                return i;
            }
        }
        self.probabilities.len() - 1
    }
}

/// A nonempty finite set of measures over a common outcome space; the
/// generator of the upper expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureFamily {
    measures: Vec<DiscreteMeasure>,
}

impl MeasureFamily {
    pub fn new(measures: Vec<DiscreteMeasure>) -> Result<Self> {
        let first = measures.first().ok_or(SubexpError::EmptyFamily)?;
        let size = first.len();
        for m in &measures {
            if m.len() != size {
                return Err(SubexpError::DimensionMismatch {
                    what: "measures within a family",
                    expected: size,
                    actual: m.len(),
                });
            }
        }
        Ok(MeasureFamily { measures })
    }

    /// Family with a single measure: the classical-reduction case.
    pub fn singleton(measure: DiscreteMeasure) -> Self {
        MeasureFamily {
            measures: vec![measure],
        }
    }

    pub fn measures(&self) -> &[DiscreteMeasure] {
        &self.measures
    }

    pub fn measure_count(&self) -> usize {
        self.measures.len()
    }

    /// Cardinality of the shared outcome space.
    pub fn outcome_count(&self) -> usize {
        self.measures[0].len()
    }

    fn check_dimension(&self, variable: &RandomVariable) -> Result<()> {
        if variable.len() != self.outcome_count() {
            return Err(SubexpError::DimensionMismatch {
                what: "random variable vs family",
                expected: self.outcome_count(),
                actual: variable.len(),
            });
        }
        Ok(())
    }

    /// Upper expectation `E_up[X] = max_P E_P[X]`.
    pub fn upper_expectation(&self, variable: &RandomVariable) -> Result<f64> {
        self.check_dimension(variable)?;
        let mut best = f64::NEG_INFINITY;
        for measure in &self.measures {
            let value = measure.expectation(variable)?;
            if value > best {
                best = value;
            }
        }
        Ok(best)
    }

    /// Conjugate (lower) expectation `E_low[X] = -E_up[-X] = min_P E_P[X]`.
    pub fn lower_expectation(&self, variable: &RandomVariable) -> Result<f64> {
        Ok(-self.upper_expectation(&variable.negated())?)
    }

    /// Index of a measure attaining the upper expectation (lowest on ties).
    pub fn argmax_measure(&self, variable: &RandomVariable) -> Result<usize> {
        self.check_dimension(variable)?;
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for (i, measure) in self.measures.iter().enumerate() {
            let value = measure.expectation(variable)?;
            if value > best {
                best = value;
                arg = i;
            }
        }
        Ok(arg)
    }
}

/// A real-valued map on the outcome space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomVariable {
    values: Vec<f64>,
}

impl RandomVariable {
    /// Rejects NaN and infinite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(SubexpError::NonFinite {
                    what: "random variable value",
                    index,
                    value,
                });
            }
        }
        Ok(RandomVariable { values })
    }

    pub fn constant(size: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; size])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, outcome: usize) -> f64 {
        self.values[outcome]
    }

    /// Pointwise transform; the result must stay finite.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn negated(&self) -> Self {
        RandomVariable {
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        RandomVariable {
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    /// `|X|^p`, the moment integrand.
    pub fn abs_pow(&self, p: f64) -> Self {
        RandomVariable {
            values: self.values.iter().map(|v| v.abs().powf(p)).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        self.map(|v| factor * v)
    }

    pub fn shifted(&self, offset: f64) -> Result<Self> {
        self.map(|v| v + offset)
    }

    pub fn add(&self, other: &RandomVariable) -> Result<Self> {
        if other.len() != self.len() {
            return Err(SubexpError::DimensionMismatch {
                what: "random variable sum",
                expected: self.len(),
                actual: other.len(),
            });
        }
        Self::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// Pointwise clamp to `[-c, c]`; see [`truncate`].
    pub fn truncated(&self, c: f64) -> Result<Self> {
        truncate(self, c)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Truncation `X^c = (-c) v (X ^ c)`: clamps every value to `[-c, c]`.
pub fn truncate(variable: &RandomVariable, c: f64) -> Result<RandomVariable> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(SubexpError::InvalidParameter {
            name: "c",
            value: c,
            requirement: "c > 0 and finite",
        });
    }
    variable.map(|v| v.clamp(-c, c))
}

/// A locally Lipschitz test function of several real arguments.
///
/// The envelope `|f(x) - f(y)| <= C (1 + |x|^m + |y|^m) |x - y|` is
/// spot-checked on sampled pairs, not proven.
#[derive(Clone)]
pub struct TestFunction {
    name: String,
    arity: usize,
    lipschitz_degree: u32,
    lipschitz_constant: f64,
    evaluator: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("lipschitz_degree", &self.lipschitz_degree)
            .field("lipschitz_constant", &self.lipschitz_constant)
            .finish()
    }
}

impl TestFunction {
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        lipschitz_degree: u32,
        lipschitz_constant: f64,
        evaluator: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if arity == 0 {
            return Err(SubexpError::InvalidParameter {
                name: "arity",
                value: 0.0,
                requirement: "arity >= 1",
            });
        }
        if !(lipschitz_constant > 0.0) {
            return Err(SubexpError::InvalidParameter {
                name: "lipschitz_constant",
                value: lipschitz_constant,
                requirement: "C > 0",
            });
        }
        Ok(TestFunction {
            name: name.into(),
            arity,
            lipschitz_degree,
            lipschitz_constant,
            evaluator: Arc::new(evaluator),
        })
    }

    /// One-argument test function.
    pub fn unary(
        name: impl Into<String>,
        lipschitz_degree: u32,
        lipschitz_constant: f64,
        evaluator: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        Self::new(name, 1, lipschitz_degree, lipschitz_constant, move |args| {
            evaluator(args[0])
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn eval(&self, args: &[f64]) -> Result<f64> {
        if args.len() != self.arity {
            return Err(SubexpError::ArityMismatch {
                expected: self.arity,
                actual: args.len(),
            });
        }
        Ok((self.evaluator)(args))
    }

    /// Samples argument pairs in `[-range, range]^arity` and reports the first
    /// pair violating the local-Lipschitz envelope, if any.
    pub fn spot_check_lipschitz(
        &self,
        samples: usize,
        range: f64,
        seed: u64,
    ) -> Result<Option<LipschitzViolation>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = i32::try_from(self.lipschitz_degree).unwrap_or(i32::MAX);
        for _ in 0..samples {
            let x: Vec<f64> = (0..self.arity)
                .map(|_| rng.random_range(-range..range))
                .collect();
            let y: Vec<f64> = (0..self.arity)
                .map(|_| rng.random_range(-range..range))
                .collect();
            let fx = self.eval(&x)?;
            let fy = self.eval(&y)?;
            let norm_x = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let norm_y = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            let dist = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let envelope = self.lipschitz_constant
                * (1.0 + norm_x.powi(m) + norm_y.powi(m))
                * dist;
            if (fx - fy).abs() > envelope + DEFAULT_TOLERANCE {
                return Ok(Some(LipschitzViolation {
                    x,
                    y,
                    difference: (fx - fy).abs(),
                    envelope,
                }));
            }
        }
        Ok(None)
    }
}

/// Witness of a failed local-Lipschitz spot check.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LipschitzViolation {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub difference: f64,
    pub envelope: f64,
}

/// The axioms checked by [`check_axioms`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axiom {
    Monotonicity,
    ConstantPreserving,
    SubAdditivity,
    PositiveHomogeneity,
    TranslationInvariance,
    UpperDominatesLower,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Axiom::Monotonicity => "monotonicity",
            Axiom::ConstantPreserving => "constant-preserving",
            Axiom::SubAdditivity => "sub-additivity",
            Axiom::PositiveHomogeneity => "positive-homogeneity",
            Axiom::TranslationInvariance => "translation-invariance",
            Axiom::UpperDominatesLower => "upper-dominates-lower",
        };
        write!(f, "{name}")
    }
}

/// Outcome of one axiom across all trials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomCheck {
    pub axiom: Axiom,
    pub cases: usize,
    pub violations: usize,
    /// Largest observed defect (how far past the required inequality the
    /// envelope landed). Non-positive or tiny values mean the axiom held.
    pub max_discrepancy: f64,
    pub worst_witness: Option<String>,
}

/// Result of the randomized axiom suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomReport {
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn is_clean(&self) -> bool {
        self.checks.iter().all(|c| c.violations == 0)
    }

    pub fn total_violations(&self) -> usize {
        self.checks.iter().map(|c| c.violations).sum()
    }
}

struct AxiomTally {
    axiom: Axiom,
    cases: usize,
    violations: usize,
    max_discrepancy: f64,
    worst_witness: Option<String>,
}

impl AxiomTally {
    fn new(axiom: Axiom) -> Self {
        AxiomTally {
            axiom,
            cases: 0,
            violations: 0,
            max_discrepancy: f64::NEG_INFINITY,
            worst_witness: None,
        }
    }

    fn record(&mut self, defect: f64, tolerance: f64, witness: impl Fn() -> String) {
        self.cases += 1;
        if defect > self.max_discrepancy {
            self.max_discrepancy = defect;
            if defect > tolerance {
                self.worst_witness = Some(witness());
            }
        }
        if defect > tolerance {
            self.violations += 1;
        }
    }

    fn finish(self) -> AxiomCheck {
        AxiomCheck {
            axiom: self.axiom,
            cases: self.cases,
            violations: self.violations,
            max_discrepancy: if self.cases == 0 {
                0.0
            } else {
                self.max_discrepancy
            },
            worst_witness: self.worst_witness,
        }
    }
}

/// Randomized check of the defining axioms plus translation invariance and
/// the upper/lower ordering, each within [`DEFAULT_TOLERANCE`].
///
/// Every trial draws `X`, an independent `W`, a dominated `Y <= X`, a scale
/// `lambda >= 0` and a constant `c`, then measures the defect of each axiom.
pub fn check_axioms(family: &MeasureFamily, trials: usize, seed: u64) -> Result<AxiomReport> {
    if trials == 0 {
        return Err(SubexpError::InvalidParameter {
            name: "trials",
            value: 0.0,
            requirement: "trials >= 1",
        });
    }
    let tolerance = DEFAULT_TOLERANCE;
    let size = family.outcome_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut tallies = [
        AxiomTally::new(Axiom::Monotonicity),
        AxiomTally::new(Axiom::ConstantPreserving),
        AxiomTally::new(Axiom::SubAdditivity),
        AxiomTally::new(Axiom::PositiveHomogeneity),
        AxiomTally::new(Axiom::TranslationInvariance),
        AxiomTally::new(Axiom::UpperDominatesLower),
    ];

    for trial in 0..trials {
        let x = RandomVariable::new((0..size).map(|_| rng.random_range(-10.0..10.0)).collect())?;
        let w = RandomVariable::new((0..size).map(|_| rng.random_range(-10.0..10.0)).collect())?;
        // Dominated pointwise, so monotonicity must order the expectations.
        let y = RandomVariable::new(
            x.values()
                .iter()
                .map(|&v| v - rng.random_range(0.0..5.0))
                .collect(),
        )?;
        let lambda = rng.random_range(0.0..4.0);
        let c = rng.random_range(-5.0..5.0);

        let e_x = family.upper_expectation(&x)?;
        let e_y = family.upper_expectation(&y)?;
        let e_w = family.upper_expectation(&w)?;

        tallies[0].record(e_y - e_x, tolerance, || {
            format!("trial {trial}: E[Y]={e_y} > E[X]={e_x} with Y <= X")
        });

        let e_const = family.upper_expectation(&RandomVariable::constant(size, c)?)?;
        tallies[1].record((e_const - c).abs(), tolerance, || {
            format!("trial {trial}: E[{c}] = {e_const}")
        });

        let e_sum = family.upper_expectation(&x.add(&w)?)?;
        tallies[2].record(e_sum - (e_x + e_w), tolerance, || {
            format!("trial {trial}: E[X+W]={e_sum} > E[X]+E[W]={}", e_x + e_w)
        });

        let e_scaled = family.upper_expectation(&x.scaled(lambda)?)?;
        tallies[3].record((e_scaled - lambda * e_x).abs(), tolerance, || {
            format!(
                "trial {trial}: E[{lambda}X]={e_scaled}, {lambda}E[X]={}",
                lambda * e_x
            )
        });

        let e_shifted = family.upper_expectation(&x.shifted(c)?)?;
        tallies[4].record((e_shifted - (e_x + c)).abs(), tolerance, || {
            format!("trial {trial}: E[X+{c}]={e_shifted}, E[X]+{c}={}", e_x + c)
        });

        let lower = family.lower_expectation(&x)?;
        tallies[5].record(lower - e_x, tolerance, || {
            format!("trial {trial}: lower {lower} > upper {e_x}")
        });
    }

    Ok(AxiomReport {
        trials,
        seed,
        tolerance,
        checks: tallies.into_iter().map(AxiomTally::finish).collect(),
    })
}
