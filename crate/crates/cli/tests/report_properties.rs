use std::collections::BTreeMap;

use liouville_cli::report::{from_json, to_csv, to_json};
use liouville_cli::{Check, InputValue, VerificationReport};
use proptest::prelude::*;

fn value() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO,
        1 => Just(f64::NAN),
        1 => Just(f64::INFINITY),
    ]
}

fn check() -> impl Strategy<Value = Check> {
    ("[a-z_]{1,12}(\\.[a-z_]{1,8})?", value(), value(), 0.0..1.0f64, 1e-12..1.0f64)
        .prop_map(|(name, lhs, rhs, residual, tolerance)| Check::new(name, lhs, rhs, residual, tolerance))
}

fn report() -> impl Strategy<Value = VerificationReport> {
    (
        2usize..16,
        prop::collection::vec(check(), 0..20),
        prop::collection::btree_map("[a-z]{1,6}", -1e6..1e6f64, 0..5),
    )
        .prop_map(|(n, checks, inputs)| {
            let inputs: BTreeMap<String, InputValue> =
                inputs.into_iter().map(|(k, v)| (k, InputValue::Number(v))).collect();
            VerificationReport::new("verify all".into(), n, inputs, checks)
        })
}

fn same(a: f64, b: f64) -> bool {
    a == b || (!a.is_finite() && b.is_nan())
}

proptest! {
    #[test]
    fn summary_tallies_checks(r in report()) {
        prop_assert_eq!(r.summary.total, r.checks.len());
        prop_assert_eq!(r.summary.passed, r.checks.iter().filter(|c| c.pass).count());
        prop_assert_eq!(r.summary.passed + r.summary.failed, r.summary.total);
        for c in &r.checks {
            prop_assert_eq!(c.pass, c.residual <= c.tolerance);
        }
    }

    #[test]
    fn json_round_trips_every_float(r in report()) {
        let back = from_json(&to_json(&r)).unwrap();
        prop_assert_eq!(&back.inputs, &r.inputs);
        prop_assert_eq!(back.summary, r.summary);
        for (a, b) in r.checks.iter().zip(&back.checks) {
            prop_assert_eq!(&a.name, &b.name);
            prop_assert!(same(a.lhs, b.lhs) && same(a.rhs, b.rhs) && same(a.residual, b.residual));
            prop_assert_eq!(a.tolerance, b.tolerance);
            prop_assert_eq!(a.pass, b.pass);
        }
    }

    #[test]
    fn csv_one_row_per_check(r in report()) {
        let text = String::from_utf8(to_csv(&r)).unwrap();
        prop_assert!(!text.contains('\r'));
        prop_assert_eq!(text.lines().count(), r.checks.len() + 1);
        prop_assert!(text.lines().skip(1).all(|l| l.split(',').count() == 6));
    }
}
