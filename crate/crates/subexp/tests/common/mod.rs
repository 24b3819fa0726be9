//! Proptest generators shared by the integration suites.
// Each test binary compiles this module separately and uses its own subset.
#![allow(dead_code)]

use proptest::prelude::*;
use subexp::{DiscreteMeasure, MeasureFamily, RandomVariable};

pub fn measure_strategy(size: usize) -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec(0.01f64..1.0, size).prop_map(|weights| {
        let total: f64 = weights.iter().sum();
        DiscreteMeasure::new(weights.into_iter().map(|w| w / total).collect())
            .expect("normalized weights form a valid measure")
    })
}

pub fn family_strategy(size: usize, max_measures: usize) -> impl Strategy<Value = MeasureFamily> {
    prop::collection::vec(measure_strategy(size), 1..=max_measures)
        .prop_map(|measures| MeasureFamily::new(measures).expect("nonempty aligned family"))
}

pub fn variable_strategy(size: usize) -> impl Strategy<Value = RandomVariable> {
    prop::collection::vec(-10.0f64..10.0, size)
        .prop_map(|values| RandomVariable::new(values).expect("finite values"))
}

/// A family over 2..=6 outcomes together with `n_vars` aligned variables.
pub fn family_and_variables(
    n_vars: usize,
) -> impl Strategy<Value = (MeasureFamily, Vec<RandomVariable>)> {
    (2usize..=6).prop_flat_map(move |size| {
        (
            family_strategy(size, 4),
            prop::collection::vec(variable_strategy(size), n_vars),
        )
    })
}
