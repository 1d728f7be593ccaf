use proptest::prelude::*;
use wreath_core::lifshitz::heat_kernel_from_measure;
use wreath_core::schrodinger::SpectralEstimate;
use wreath_core::walk::DEFAULT_STATE_CAP;
use wreath_core::{
    annealed_moments, lamp_moment_table, plancherel_moments, word_enumeration_oracle, wreath_measure, FiniteMeasure,
    GroupElement, GroupSpec, Weight,
};

/// A symmetric measure on `Z` with small positive integer weights.
fn symmetric_z(weights: Vec<i64>) -> FiniteMeasure<GroupSpec> {
    let mut atoms = Vec::new();
    for (k, w) in weights.into_iter().enumerate() {
        let k = k as i64 + 1;
        atoms.push((GroupElement::Int(k), Weight::integer(w)));
        atoms.push((GroupElement::Int(-k), Weight::integer(w)));
    }
    FiniteMeasure::new(GroupSpec::Z, atoms).unwrap()
}

/// A self-adjoint measure on `Z/3` with rational weights `m(1) = m(2)`.
fn symmetric_z3(a: i64, b: i64, q: i64) -> FiniteMeasure<GroupSpec> {
    FiniteMeasure::new(
        GroupSpec::CyclicZmod { n: 3 },
        [
            (GroupElement::Residue(0), Weight::ratio(a, q)),
            (GroupElement::Residue(1), Weight::ratio(b, q)),
            (GroupElement::Residue(2), Weight::ratio(b, q)),
        ],
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn plancherel_equals_annealed(w in prop::collection::vec(1i64..3, 1..3), a in -2i64..3, b in 1i64..3, q in 1i64..4) {
        let base = symmetric_z(w);
        let lamp = symmetric_z3(a, b, q);
        let exact = plancherel_moments(&wreath_measure(&base, &lamp).unwrap(), 6, DEFAULT_STATE_CAP).unwrap();
        let table = lamp_moment_table(&lamp, 6).unwrap();
        let annealed = annealed_moments(&base, &table, 6, DEFAULT_STATE_CAP).unwrap();
        prop_assert_eq!(&exact.values, &annealed.values);
        prop_assert_eq!(&exact.values[5], &word_enumeration_oracle(&base, &table, 5, None).unwrap());
    }

    #[test]
    fn moments_bounded_by_mass(w in prop::collection::vec(1i64..4, 1..4)) {
        let base = symmetric_z(w);
        let mass = base.total_abs_mass();
        let m = plancherel_moments(&base, 8, DEFAULT_STATE_CAP).unwrap();
        for (n, v) in m.values.iter().enumerate() {
            prop_assert!(v.abs() <= mass.powi(n as i32) * (1.0 + 1e-12));
            if n % 2 == 0 {
                prop_assert!(v.re() > 0.0);
            }
        }
    }

    #[test]
    fn heat_kernel_is_monotone_and_log_convex(
        atoms in prop::collection::vec((-1.0f64..=1.0, 0.01f64..1.0), 1..20),
    ) {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        let est = SpectralEstimate::Eigen {
            values: atoms.iter().map(|a| a.0).collect(),
            weights: atoms.iter().map(|a| a.1 / total).collect(),
        };
        let times: Vec<f64> = (0..40).map(|t| t as f64 * 0.5).collect();
        let hk = heat_kernel_from_measure(&est, &times).unwrap();
        prop_assert!(hk.values.iter().all(|k| *k > 0.0 && *k <= 1.0 + 1e-12));
        prop_assert!(hk.is_nonincreasing());
        prop_assert!(hk.is_log_convex());
    }
}

#[test]
fn even_moments_log_convex() {
    let m = plancherel_moments(&symmetric_z(vec![1, 1]), 16, DEFAULT_STATE_CAP).unwrap();
    let even: Vec<f64> = m.values.iter().step_by(2).map(Weight::re).collect();
    for k in 1..even.len() - 1 {
        assert!(even[k] * even[k] <= even[k - 1] * even[k + 1]);
    }
}
