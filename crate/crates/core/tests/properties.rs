use num_bigint::BigInt;
use proptest::prelude::*;

use kit_core::fixtures;
use kit_core::homology::{homology, invariant_factors, smith_normal_form, verify_snf};
use kit_core::io::{parse_structure, structure_to_json};
use kit_core::profile::Profile;
use kit_core::sign_lab::{verify_splitting_consistency, Case, DegreeVector, StratumDescriptor};
use kit_core::strip_lab::{weighted_index, WeightVector};
use kit_core::IntMatrix;

fn matrix(max: usize) -> impl Strategy<Value = IntMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        prop::collection::vec(-6i64..=6, r * c).prop_map(move |v| {
            let mut m = IntMatrix::zeros(r, c);
            for (idx, x) in v.into_iter().enumerate() {
                m.set(idx / c, idx % c, BigInt::from(x));
            }
            m
        })
    })
}

fn smooth_profile() -> impl Strategy<Value = Profile> {
    let bump = (-2.0..2.0f64, 0.3..2.0f64, -2.0..2.0f64).prop_map(|(c, r, h)| Profile::bump(c, r, h));
    let tanh = (-2.0..2.0f64, 0.2..1.5f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_map(|(center, width, left, right)| Profile::Tanh { center, width, left, right });
    let sech = (-2.0..2.0f64, 0.2..1.5f64, -1.0..1.0f64)
        .prop_map(|(center, width, height)| Profile::Sech { center, width, height });
    prop::collection::vec(prop_oneof![bump, tanh, sech], 1..4).prop_map(Profile::sum)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn profile_derivative_matches_central_difference(p in smooth_profile(), s in -4.0..4.0f64) {
        let h = 1e-5;
        if p.kinks().iter().all(|k| (k - s).abs() > 10.0 * h) {
            let fd = (p.mean(s + h) - p.mean(s - h)) / (2.0 * h);
            prop_assert!((fd - p.deriv(s)).abs() < 1e-5 * (1.0 + fd.abs()), "{} vs {}", fd, p.deriv(s));
        }
    }

    #[test]
    fn weighted_index_is_additive_under_gluing(
        first in prop::collection::vec(-4i64..=4, 1..5),
        second in prop::collection::vec(-4i64..=4, 1..5),
        mu in -4i64..=4,
        slot in 0usize..4,
    ) {
        let mut outer = first.clone();
        let at = 1 + slot % outer.len();
        outer.insert(at, mu);
        let mut inner = second.clone();
        inner[0] = mu;
        let glued: Vec<i64> = outer[..at].iter().chain(&inner[1..]).chain(&outer[at + 1..]).copied().collect();
        let sum = weighted_index(&WeightVector::disc(&outer)).unwrap() + weighted_index(&WeightVector::disc(&inner)).unwrap();
        prop_assert_eq!(weighted_index(&WeightVector::disc(&glued)).unwrap(), sum);
    }

    #[test]
    fn smith_form_post_conditions(m in matrix(8)) {
        prop_assert!(verify_snf(&m, &smith_normal_form(&m)));
    }

    #[test]
    fn invariant_factors_survive_unimodular_row_operations(m in matrix(6), k in -3i64..=3, src in 0usize..6, dst in 0usize..6) {
        let (src, dst) = (src % m.rows(), dst % m.rows());
        prop_assume!(src != dst);
        let mut e = IntMatrix::identity(m.rows());
        e.set(dst, src, BigInt::from(k));
        prop_assert_eq!(invariant_factors(&e.mul(&m)), invariant_factors(&m));
    }

    #[test]
    fn homology_ranks_add_up(m in matrix(6)) {
        let c = kit_core::homology::IntChainComplex::new(0, vec![m.cols(), m.rows()], vec![m.clone()]).unwrap();
        let h = homology(&c);
        let rank = smith_normal_form(&m).rank;
        prop_assert_eq!(h[&0].betti, m.cols() - rank);
        prop_assert_eq!(h[&1].betti, m.rows() - rank);
    }

    #[test]
    fn splitting_consistency_beyond_the_sweep(
        k in 0i64..=6,
        l in 0i64..=6,
        n in 0i64..=6,
        pick in any::<prop::sample::Index>(),
        raw in prop::collection::vec(-5i64..=5, 13),
    ) {
        let strata = StratumDescriptor::enumerate(Case::IV, k, l);
        prop_assume!(!strata.is_empty());
        let d = strata[pick.index(strata.len())];
        let v = DegreeVector::new(raw[..(k + l + 1) as usize].to_vec(), n);
        prop_assert!(verify_splitting_consistency(&d, &v).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn structure_json_round_trip(seed in 0u64..500) {
        let text = structure_to_json(&fixtures::random_dg_ainfty(seed, 6)).unwrap();
        let back = parse_structure(&text).unwrap();
        prop_assert_eq!(structure_to_json(&back).unwrap(), text);
    }
}
