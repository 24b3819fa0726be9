//! Capacity pair induced by an upper expectation, and Choquet integration.
//!
//! The upper capacity is `V_up(A) = E_up[I_A] = max_P P(A)`; the lower
//! capacity is its conjugate `V_low(A) = 1 - V_up(A^c) = min_P P(A)`.
//! `V_up` is sub-additive; `V_low` in general is not, but satisfies the
//! mixed bound `V_low(A u B) <= V_low(A) + V_up(B)`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SubexpError};
use crate::expectation::{MeasureFamily, RandomVariable, DEFAULT_TOLERANCE};

/// A subset of the outcome space, as a membership mask.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    membership: Vec<bool>,
}

impl Event {
    pub fn new(membership: Vec<bool>) -> Self {
        Event { membership }
    }

    pub fn empty(size: usize) -> Self {
        Event {
            membership: vec![false; size],
        }
    }

    pub fn full(size: usize) -> Self {
        Event {
            membership: vec![true; size],
        }
    }

    pub fn from_indices(size: usize, indices: &[usize]) -> Result<Self> {
        let mut membership = vec![false; size];
        for &i in indices {
            if i >= size {
                return Err(SubexpError::TermOutOfRange {
                    index: i,
                    available: size,
                });
            }
            membership[i] = true;
        }
        Ok(Event { membership })
    }

    /// Outcomes where `predicate` holds on the variable's value.
    pub fn where_value(variable: &RandomVariable, predicate: impl Fn(f64) -> bool) -> Self {
        Event {
            membership: variable.values().iter().map(|&v| predicate(v)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.membership.len()
    }

    pub fn is_empty(&self) -> bool {
        self.membership.is_empty()
    }

    pub fn membership(&self) -> &[bool] {
        &self.membership
    }

    pub fn contains(&self, outcome: usize) -> bool {
        self.membership[outcome]
    }

    pub fn complement(&self) -> Self {
        Event {
            membership: self.membership.iter().map(|m| !m).collect(),
        }
    }

    pub fn union(&self, other: &Event) -> Result<Self> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Event) -> Result<Self> {
        self.zip_with(other, |a, b| a && b)
    }

    fn zip_with(&self, other: &Event, op: impl Fn(bool, bool) -> bool) -> Result<Self> {
        if other.len() != self.len() {
            return Err(SubexpError::DimensionMismatch {
                what: "events",
                expected: self.len(),
                actual: other.len(),
            });
        }
        Ok(Event {
            membership: self
                .membership
                .iter()
                .zip(&other.membership)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }

    /// Indicator random variable of the event.
    pub fn indicator(&self) -> RandomVariable {
        RandomVariable::new(
            self.membership
                .iter()
                .map(|&m| if m { 1.0 } else { 0.0 })
                .collect(),
        )
        .expect("indicator values are finite")
    }

    /// Indices of the member outcomes, for report witnesses.
    pub fn member_indices(&self) -> Vec<usize> {
        self.membership
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }
}

/// Which of the two conjugate capacities to integrate against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityKind {
    Upper,
    Lower,
}

/// How a Choquet integral was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum ChoquetMethod {
    /// Closed-form layer-cake over the sorted distinct values.
    ExactDiscrete,
    /// Trapezoid rule on a user-supplied survival function.
    Quadrature { nodes: usize },
}

/// A Choquet integral value together with the evaluation method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChoquetValue {
    pub value: f64,
    #[serde(flatten)]
    pub method: ChoquetMethod,
}

/// The conjugate capacity pair of a measure family.
#[derive(Debug, Clone, Copy)]
pub struct CapacityPair<'a> {
    family: &'a MeasureFamily,
}

impl<'a> CapacityPair<'a> {
    pub fn new(family: &'a MeasureFamily) -> Self {
        CapacityPair { family }
    }

    pub fn family(&self) -> &'a MeasureFamily {
        self.family
    }

    fn check_dimension(&self, event: &Event) -> Result<()> {
        if event.len() != self.family.outcome_count() {
            return Err(SubexpError::DimensionMismatch {
                what: "event vs family",
                expected: self.family.outcome_count(),
                actual: event.len(),
            });
        }
        Ok(())
    }

    /// `V_up(A) = max_P P(A)`.
    pub fn upper_capacity(&self, event: &Event) -> Result<f64> {
        self.check_dimension(event)?;
        let mut best = 0.0_f64;
        for measure in self.family.measures() {
            best = best.max(measure.mass_on(event.membership())?);
        }
        Ok(best.min(1.0))
    }

    /// `V_low(A) = 1 - V_up(A^c) = min_P P(A)`.
    pub fn lower_capacity(&self, event: &Event) -> Result<f64> {
        Ok(1.0 - self.upper_capacity(&event.complement())?)
    }

    pub fn capacity(&self, event: &Event, which: CapacityKind) -> Result<f64> {
        match which {
            CapacityKind::Upper => self.upper_capacity(event),
            CapacityKind::Lower => self.lower_capacity(event),
        }
    }

    /// Exact layer-cake Choquet integral of a finite-valued variable.
    ///
    /// With distinct sorted values `v_1 < ... < v_k`, the survival map
    /// `t -> V(X >= t)` is constant on each `(v_{i-1}, v_i]`, so
    /// `C_V[X] = v_1 + sum_{i>=2} (v_i - v_{i-1}) V(X >= v_i)`.
    pub fn choquet_integral(
        &self,
        variable: &RandomVariable,
        which: CapacityKind,
    ) -> Result<ChoquetValue> {
        if variable.len() != self.family.outcome_count() {
            return Err(SubexpError::DimensionMismatch {
                what: "random variable vs family",
                expected: self.family.outcome_count(),
                actual: variable.len(),
            });
        }
        let mut values: Vec<f64> = variable.values().to_vec();
        values.sort_by(|a, b| a.partial_cmp(b).expect("values are finite"));
        values.dedup();

        let mut total = values[0];
        for window in values.windows(2) {
            let (lo, hi) = (window[0], window[1]);
            let level = Event::where_value(variable, |v| v >= hi);
            total += (hi - lo) * self.capacity(&level, which)?;
        }
        Ok(ChoquetValue {
            value: total,
            method: ChoquetMethod::ExactDiscrete,
        })
    }
}

/// Trapezoid-rule Choquet integral for a user-supplied survival function
/// `t -> V(X >= t)` of a variable supported in `[support_min, support_max]`.
///
/// Uses `C_V[X] = support_min + integral over [support_min, support_max] of
/// the survival function`, evaluated at `nodes` equally spaced points.
pub fn choquet_quadrature(
    survival: impl Fn(f64) -> f64,
    support_min: f64,
    support_max: f64,
    nodes: usize,
) -> Result<ChoquetValue> {
    if nodes < 2 {
        return Err(SubexpError::InvalidParameter {
            name: "nodes",
            value: nodes as f64,
            requirement: "nodes >= 2",
        });
    }
    if !(support_min <= support_max) || !support_min.is_finite() || !support_max.is_finite() {
        return Err(SubexpError::InvalidParameter {
            name: "support_max",
            value: support_max,
            requirement: "finite support_min <= support_max",
        });
    }
    let width = support_max - support_min;
    let step = width / (nodes - 1) as f64;
    let mut integral = 0.0;
    for i in 0..nodes {
        let t = support_min + step * i as f64;
        let weight = if i == 0 || i == nodes - 1 { 0.5 } else { 1.0 };
        integral += weight * survival(t);
    }
    integral *= step;
    Ok(ChoquetValue {
        value: support_min + integral,
        method: ChoquetMethod::Quadrature { nodes },
    })
}

/// How the sub-additivity sweep covered the event pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum SweepMode {
    /// Every ordered pair of events over the outcome space.
    Exhaustive,
    /// Random event pairs with i.i.d. fair membership.
    Sampled { seed: u64 },
}

/// Witness of one inequality instance: two events and the two sides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

/// Result of [`check_capacity_subadditivity`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SubadditivityReport {
    pub mode: SweepMode,
    pub pairs_checked: u64,
    pub tolerance: f64,
    /// Violations of `V_up(A u B) <= V_up(A) + V_up(B)`.
    pub upper_violations: u64,
    pub worst_upper: Option<PairWitness>,
    /// Violations of `V_low(A u B) <= V_low(A) + V_up(B)`.
    pub mixed_violations: u64,
    pub worst_mixed: Option<PairWitness>,
    /// A pair with `V_low(A u B) > V_low(A) + V_low(B)`, if one exists in the
    /// sweep: evidence that the lower capacity alone is not sub-additive.
    pub lower_counterexample: Option<PairWitness>,
}

impl SubadditivityReport {
    pub fn is_clean(&self) -> bool {
        self.upper_violations == 0 && self.mixed_violations == 0
    }
}

const EXHAUSTIVE_LIMIT: usize = 16;

/// Sweeps event pairs checking sub-additivity of the upper capacity and the
/// mixed bound, and searches for a lower-capacity sub-additivity
/// counterexample. Exhaustive when the outcome space has at most
/// 16 points, otherwise `samples` random pairs.
pub fn check_capacity_subadditivity(
    pair: &CapacityPair<'_>,
    samples: usize,
    seed: u64,
) -> Result<SubadditivityReport> {
    let n = pair.family().outcome_count();
    if n <= EXHAUSTIVE_LIMIT {
        check_subadditivity_exhaustive(pair, n)
    } else {
        check_subadditivity_sampled(pair, samples, seed)
    }
}

fn check_subadditivity_exhaustive(
    pair: &CapacityPair<'_>,
    n: usize,
) -> Result<SubadditivityReport> {
    let subsets: usize = 1 << n;
    let full_mask: usize = subsets - 1;

    // Subset-mass tables per measure, then envelope tables for both
    // capacities, so the pair loop is pure table lookups.
    let mut upper = vec![0.0_f64; subsets];
    for measure in pair.family().measures() {
        let probs = measure.probabilities();
        let mut mass = vec![0.0_f64; subsets];
        for s in 1..subsets {
            let low = s.trailing_zeros() as usize;
            mass[s] = mass[s & (s - 1)] + probs[low];
        }
        for s in 0..subsets {
            if mass[s] > upper[s] {
                upper[s] = mass[s];
            }
        }
    }
    for value in upper.iter_mut() {
        if *value > 1.0 {
            *value = 1.0;
        }
    }
    let lower: Vec<f64> = (0..subsets).map(|s| 1.0 - upper[full_mask & !s]).collect();

    let mut report = SubadditivityReport {
        mode: SweepMode::Exhaustive,
        pairs_checked: 0,
        tolerance: DEFAULT_TOLERANCE,
        upper_violations: 0,
        worst_upper: None,
        mixed_violations: 0,
        worst_mixed: None,
        lower_counterexample: None,
    };

    let mask_indices = |mask: usize| -> Vec<usize> {
        (0..n).filter(|i| mask & (1 << i) != 0).collect()
    };

    let mut worst_upper_defect = f64::NEG_INFINITY;
    let mut worst_mixed_defect = f64::NEG_INFINITY;
    for a in 0..subsets {
        for b in 0..subsets {
            let union = a | b;
            report.pairs_checked += 1;

            let upper_defect = upper[union] - (upper[a] + upper[b]);
            if upper_defect > DEFAULT_TOLERANCE {
                report.upper_violations += 1;
                if upper_defect > worst_upper_defect {
                    worst_upper_defect = upper_defect;
                    report.worst_upper = Some(PairWitness {
                        a: mask_indices(a),
                        b: mask_indices(b),
                        lhs: upper[union],
                        rhs: upper[a] + upper[b],
                    });
                }
            }

            let mixed_defect = lower[union] - (lower[a] + upper[b]);
            if mixed_defect > DEFAULT_TOLERANCE {
                report.mixed_violations += 1;
                if mixed_defect > worst_mixed_defect {
                    worst_mixed_defect = mixed_defect;
                    report.worst_mixed = Some(PairWitness {
                        a: mask_indices(a),
                        b: mask_indices(b),
                        lhs: lower[union],
                        rhs: lower[a] + upper[b],
                    });
                }
            }

            if report.lower_counterexample.is_none()
                && lower[union] > lower[a] + lower[b] + DEFAULT_TOLERANCE
            {
                report.lower_counterexample = Some(PairWitness {
                    a: mask_indices(a),
                    b: mask_indices(b),
                    lhs: lower[union],
                    rhs: lower[a] + lower[b],
                });
            }
        }
    }
    Ok(report)
}

fn check_subadditivity_sampled(
    pair: &CapacityPair<'_>,
    samples: usize,
    seed: u64,
) -> Result<SubadditivityReport> {
    if samples == 0 {
        return Err(SubexpError::InvalidParameter {
            name: "samples",
            value: 0.0,
            requirement: "samples >= 1 when the space is too large to enumerate",
        });
    }
    let n = pair.family().outcome_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut report = SubadditivityReport {
        mode: SweepMode::Sampled { seed },
        pairs_checked: 0,
        tolerance: DEFAULT_TOLERANCE,
        upper_violations: 0,
        worst_upper: None,
        mixed_violations: 0,
        worst_mixed: None,
        lower_counterexample: None,
    };

    let mut worst_upper_defect = f64::NEG_INFINITY;
    let mut worst_mixed_defect = f64::NEG_INFINITY;
    for _ in 0..samples {
        let a = Event::new((0..n).map(|_| rng.random::<bool>()).collect());
        let b = Event::new((0..n).map(|_| rng.random::<bool>()).collect());
        let union = a.union(&b)?;
        report.pairs_checked += 1;

        let v_union = pair.upper_capacity(&union)?;
        let v_a = pair.upper_capacity(&a)?;
        let v_b = pair.upper_capacity(&b)?;
        let l_union = pair.lower_capacity(&union)?;
        let l_a = pair.lower_capacity(&a)?;
        let l_b = pair.lower_capacity(&b)?;

        let upper_defect = v_union - (v_a + v_b);
        if upper_defect > DEFAULT_TOLERANCE {
            report.upper_violations += 1;
            if upper_defect > worst_upper_defect {
                worst_upper_defect = upper_defect;
                report.worst_upper = Some(PairWitness {
                    a: a.member_indices(),
                    b: b.member_indices(),
                    lhs: v_union,
                    rhs: v_a + v_b,
                });
            }
        }

        let mixed_defect = l_union - (l_a + v_b);
        if mixed_defect > DEFAULT_TOLERANCE {
            report.mixed_violations += 1;
            if mixed_defect > worst_mixed_defect {
                worst_mixed_defect = mixed_defect;
                report.worst_mixed = Some(PairWitness {
                    a: a.member_indices(),
                    b: b.member_indices(),
                    lhs: l_union,
                    rhs: l_a + v_b,
                });
            }
        }

        if report.lower_counterexample.is_none() && l_union > l_a + l_b + DEFAULT_TOLERANCE {
            report.lower_counterexample = Some(PairWitness {
                a: a.member_indices(),
                b: b.member_indices(),
                lhs: l_union,
                rhs: l_a + l_b,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectation::DiscreteMeasure;

    fn coin_family() -> MeasureFamily {
        MeasureFamily::new(vec![
            DiscreteMeasure::new(vec![0.7, 0.3]).unwrap(),
            DiscreteMeasure::new(vec![0.3, 0.7]).unwrap(),
        ])
        .unwrap()
    }

    fn mean_zero_family() -> MeasureFamily {
        MeasureFamily::new(vec![
            DiscreteMeasure::new(vec![0.5, 0.0, 0.5]).unwrap(),
            DiscreteMeasure::new(vec![0.0, 1.0, 0.0]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn coin_capacities() {
        let family = coin_family();
        let pair = CapacityPair::new(&family);
        let heads = Event::from_indices(2, &[1]).unwrap();
        assert!((pair.upper_capacity(&heads).unwrap() - 0.7).abs() < 1e-15);
        assert!((pair.lower_capacity(&heads).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn normalization() {
        let family = coin_family();
        let pair = CapacityPair::new(&family);
        assert_eq!(pair.upper_capacity(&Event::empty(2)).unwrap(), 0.0);
        assert_eq!(pair.upper_capacity(&Event::full(2)).unwrap(), 1.0);
        assert_eq!(pair.lower_capacity(&Event::full(2)).unwrap(), 1.0);
        assert_eq!(pair.lower_capacity(&Event::empty(2)).unwrap(), 0.0);
    }

    #[test]
    fn singleton_family_collapses_to_probability() {
        let family =
            MeasureFamily::singleton(DiscreteMeasure::new(vec![0.2, 0.3, 0.5]).unwrap());
        let pair = CapacityPair::new(&family);
        let event = Event::from_indices(3, &[0, 2]).unwrap();
        let p = pair.upper_capacity(&event).unwrap();
        assert!((p - 0.7).abs() < 1e-15);
        assert!((pair.lower_capacity(&event).unwrap() - p).abs() < 1e-15);
    }

    #[test]
    fn choquet_of_indicator_is_capacity() {
        let family = coin_family();
        let pair = CapacityPair::new(&family);
        let heads = Event::from_indices(2, &[1]).unwrap();
        let value = pair
            .choquet_integral(&heads.indicator(), CapacityKind::Upper)
            .unwrap();
        assert_eq!(value.method, ChoquetMethod::ExactDiscrete);
        assert!((value.value - 0.7).abs() < 1e-15);
    }

    #[test]
    fn choquet_of_constant_is_constant() {
        let family = coin_family();
        let pair = CapacityPair::new(&family);
        let c = RandomVariable::constant(2, -3.5).unwrap();
        for which in [CapacityKind::Upper, CapacityKind::Lower] {
            assert_eq!(pair.choquet_integral(&c, which).unwrap().value, -3.5);
        }
    }

    #[test]
    fn choquet_singleton_matches_dot_product() {
        let measure = DiscreteMeasure::new(vec![0.2, 0.3, 0.5]).unwrap();
        let family = MeasureFamily::singleton(measure.clone());
        let pair = CapacityPair::new(&family);
        let x = RandomVariable::new(vec![-1.5, 2.0, 0.25]).unwrap();
        let expected = measure.expectation(&x).unwrap();
        for which in [CapacityKind::Upper, CapacityKind::Lower] {
            let got = pair.choquet_integral(&x, which).unwrap().value;
            assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        }
    }

    #[test]
    fn choquet_signed_coin() {
        // X = +-1 under the coin family: survival is 0.7 on (-1, 1], so the
        // layer-cake gives -1 + 2 * 0.7 = 0.4, matching E_up[X].
        let family = coin_family();
        let pair = CapacityPair::new(&family);
        let x = RandomVariable::new(vec![-1.0, 1.0]).unwrap();
        let upper = pair.choquet_integral(&x, CapacityKind::Upper).unwrap();
        assert!((upper.value - 0.4).abs() < 1e-15);
        let lower = pair.choquet_integral(&x, CapacityKind::Lower).unwrap();
        assert!((lower.value + 0.4).abs() < 1e-15);
    }

    #[test]
    fn choquet_square_on_mean_zero_family() {
        // X^2 is the indicator of {w != 0}; the uniform measure puts full
        // mass there, so the upper survival is 1 on (0, 1].
        let family = mean_zero_family();
        let pair = CapacityPair::new(&family);
        let square = RandomVariable::new(vec![1.0, 0.0, 1.0]).unwrap();
        let upper = pair.choquet_integral(&square, CapacityKind::Upper).unwrap();
        assert!((upper.value - 1.0).abs() < 1e-15);
        let lower = pair.choquet_integral(&square, CapacityKind::Lower).unwrap();
        assert!(lower.value.abs() < 1e-15);
    }

    #[test]
    fn quadrature_approaches_exact() {
        let family = coin_family();
        let pair = CapacityPair::new(&family);
        let x = RandomVariable::new(vec![-1.0, 1.0]).unwrap();
        let exact = pair
            .choquet_integral(&x, CapacityKind::Upper)
            .unwrap()
            .value;
        let survival = |t: f64| {
            let event = Event::where_value(&x, |v| v >= t);
            pair.upper_capacity(&event).unwrap()
        };
        let approx = choquet_quadrature(survival, -1.0, 1.0, 20001).unwrap();
        assert_eq!(approx.method, ChoquetMethod::Quadrature { nodes: 20001 });
        // Trapezoid error on a piecewise-constant survival is O(step).
        assert!((approx.value - exact).abs() < 2.0 * 2.0 / 20000.0);
    }

    #[test]
    fn quadrature_rejects_bad_nodes() {
        assert!(choquet_quadrature(|_| 1.0, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn coin_subadditivity_exhaustive_is_clean() {
        let family = coin_family();
        let pair = CapacityPair::new(&family);
        let report = check_capacity_subadditivity(&pair, 0, 0).unwrap();
        assert_eq!(report.mode, SweepMode::Exhaustive);
        assert_eq!(report.pairs_checked, 16);
        assert!(report.is_clean(), "{report:?}");
    }

    #[test]
    fn coin_lower_capacity_not_subadditive() {
        // A = {0}, B = {1}: V_low(A u B) = 1 > 0.3 + 0.3.
        let family = coin_family();
        let pair = CapacityPair::new(&family);
        let report = check_capacity_subadditivity(&pair, 0, 0).unwrap();
        let witness = report.lower_counterexample.expect("witness must exist");
        assert!(witness.lhs > witness.rhs + 0.3);
    }

    #[test]
    fn singleton_has_no_lower_counterexample() {
        let family =
            MeasureFamily::singleton(DiscreteMeasure::new(vec![0.25, 0.25, 0.5]).unwrap());
        let pair = CapacityPair::new(&family);
        let report = check_capacity_subadditivity(&pair, 0, 0).unwrap();
        assert!(report.is_clean());
        assert!(report.lower_counterexample.is_none());
    }

    #[test]
    fn sampled_mode_on_large_space() {
        // 20 outcomes forces the sampled path.
        let probs = vec![0.05; 20];
        let family = MeasureFamily::new(vec![
            DiscreteMeasure::new(probs.clone()).unwrap(),
            DiscreteMeasure::new({
                let mut p = vec![0.0; 20];
                p[0] = 1.0;
                p
            })
            .unwrap(),
        ])
        .unwrap();
        let pair = CapacityPair::new(&family);
        let report = check_capacity_subadditivity(&pair, 2000, 11).unwrap();
        assert_eq!(report.mode, SweepMode::Sampled { seed: 11 });
        assert_eq!(report.pairs_checked, 2000);
        assert!(report.is_clean(), "{report:?}");
    }

    #[test]
    fn event_algebra() {
        let a = Event::from_indices(4, &[0, 1]).unwrap();
        let b = Event::from_indices(4, &[1, 2]).unwrap();
        assert_eq!(a.union(&b).unwrap().member_indices(), vec![0, 1, 2]);
        assert_eq!(a.intersection(&b).unwrap().member_indices(), vec![1]);
        assert_eq!(a.complement().member_indices(), vec![2, 3]);
        assert!(a.union(&Event::empty(3)).is_err());
    }

    #[test]
    fn translation_shifts_choquet() {
        let family = mean_zero_family();
        let pair = CapacityPair::new(&family);
        let x = RandomVariable::new(vec![-1.0, 0.25, 1.0]).unwrap();
        for which in [CapacityKind::Upper, CapacityKind::Lower] {
            let base = pair.choquet_integral(&x, which).unwrap().value;
            let shifted = pair
                .choquet_integral(&x.shifted(2.75).unwrap(), which)
                .unwrap()
                .value;
            assert!((shifted - (base + 2.75)).abs() < 1e-12);
        }
    }
}
