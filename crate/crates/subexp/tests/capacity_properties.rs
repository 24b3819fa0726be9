//! Property tests for the capacity pair and the exact Choquet integral:
//! the Choquet/expectation sandwich, translation and scaling behavior,
//! capacity monotonicity, and the sub-additivity sweep.

mod common;

use common::{family_and_variables, family_strategy};
use proptest::prelude::*;
use subexp::capacity::{check_capacity_subadditivity, CapacityKind, CapacityPair, Event};
use subexp::MeasureFamily;

fn random_event(size: usize) -> impl Strategy<Value = Event> {
    prop::collection::vec(any::<bool>(), size).prop_map(Event::new)
}

fn family_and_events() -> impl Strategy<Value = (MeasureFamily, Event, Event)> {
    (2usize..=6).prop_flat_map(|size| {
        (
            family_strategy(size, 4),
            random_event(size),
            random_event(size),
        )
    })
}

proptest! {
    #[test]
    fn choquet_sandwich((family, vars) in family_and_variables(1)) {
        // C_up[X] >= E_up[X] >= E_low[X] >= C_low[X] for the envelope model.
        let x = &vars[0];
        let pair = CapacityPair::new(&family);
        let c_upper = pair.choquet_integral(x, CapacityKind::Upper).unwrap().value;
        let c_lower = pair.choquet_integral(x, CapacityKind::Lower).unwrap().value;
        let e_upper = family.upper_expectation(x).unwrap();
        let e_lower = family.lower_expectation(x).unwrap();
        let slack = 1e-10 * (1.0 + c_upper.abs() + c_lower.abs());
        prop_assert!(c_upper >= e_upper - slack);
        prop_assert!(e_upper >= e_lower - slack);
        prop_assert!(e_lower >= c_lower - slack);
    }

    #[test]
    fn choquet_translation_and_scaling(
        (family, vars) in family_and_variables(1),
        c in -5.0f64..5.0,
        lambda in 0.0f64..5.0,
    ) {
        let x = &vars[0];
        let pair = CapacityPair::new(&family);
        for kind in [CapacityKind::Upper, CapacityKind::Lower] {
            let base = pair.choquet_integral(x, kind).unwrap().value;
            let shifted = pair.choquet_integral(&x.shifted(c).unwrap(), kind).unwrap().value;
            prop_assert!((shifted - (base + c)).abs() <= 1e-10 * (1.0 + base.abs() + c.abs()));
            let scaled = pair.choquet_integral(&x.scaled(lambda).unwrap(), kind).unwrap().value;
            prop_assert!((scaled - lambda * base).abs() <= 1e-10 * (1.0 + (lambda * base).abs()));
        }
    }

    #[test]
    fn choquet_of_indicator_is_capacity((family, event, _unused) in family_and_events()) {
        let pair = CapacityPair::new(&family);
        for kind in [CapacityKind::Upper, CapacityKind::Lower] {
            let via_choquet = pair.choquet_integral(&event.indicator(), kind).unwrap().value;
            let direct = pair.capacity(&event, kind).unwrap();
            prop_assert!((via_choquet - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn capacities_are_monotone_and_ordered((family, a, b) in family_and_events()) {
        let pair = CapacityPair::new(&family);
        let union = a.union(&b).unwrap();

        // A subset of A union B, for both capacities.
        for kind in [CapacityKind::Upper, CapacityKind::Lower] {
            let va = pair.capacity(&a, kind).unwrap();
            let vu = pair.capacity(&union, kind).unwrap();
            prop_assert!(va <= vu + 1e-12);
        }

        // Lower never exceeds upper; the pair is conjugate through the
        // complement.
        let upper = pair.upper_capacity(&a).unwrap();
        let lower = pair.lower_capacity(&a).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&upper));
        prop_assert!(lower <= upper + 1e-12);
        let upper_complement = pair.upper_capacity(&a.complement()).unwrap();
        prop_assert!((lower + upper_complement - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn upper_capacity_subadditivity_sweep(family in (2usize..=6).prop_flat_map(|s| family_strategy(s, 4))) {
        // Exhaustive over all event pairs: the upper capacity is
        // sub-additive and the mixed bound holds; a lower-capacity
        // counterexample may legitimately exist.
        let pair = CapacityPair::new(&family);
        let report = check_capacity_subadditivity(&pair, 0, 0).unwrap();
        prop_assert!(report.is_clean(), "{:?}", report);
    }
}
