use proptest::prelude::*;

use crysect_core::crystal::SpecialEndo;
use crysect_core::curve::FormalCurve;
use crysect_core::deformation::Pullbacks;
use crysect_core::intersection::{DegreeTable, LatticeModel};
use crysect_core::qlattice::density::{count_mod, count_mod_naive, DEFAULT_BUDGET};
use crysect_core::qlattice::padic::Zmod;
use crysect_core::qlattice::{kronecker, FormJson, QuadLattice};
use crysect_core::series::UniSeries;
use crysect_core::verify::key_lemma_curve;
use crysect_core::witt::{WittRing, WittScalar};

fn ring() -> WittRing {
    WittRing::auto(3, 4).unwrap()
}

fn scalar() -> impl Strategy<Value = WittScalar> {
    (0u64..81, 0u64..81).prop_map(|(a, b)| WittScalar::new(a, b))
}

fn endo(range: i64) -> impl Strategy<Value = SpecialEndo> {
    prop::array::uniform5(-range..=range).prop_map(SpecialEndo::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn witt_units_invert(x in scalar()) {
        let f = ring();
        let x = f.coerce(x);
        match f.inv(x) {
            Ok(y) => prop_assert_eq!(f.mul(x, y), f.one()),
            Err(_) => prop_assert!(!f.is_unit(x)),
        }
    }

    #[test]
    fn frobenius_is_multiplicative(x in scalar(), y in scalar()) {
        let f = ring();
        prop_assert_eq!(f.frobenius(f.mul(x, y)), f.mul(f.frobenius(x), f.frobenius(y)));
        prop_assert_eq!(f.frobenius_pow(x, 2), f.coerce(x));
    }

    #[test]
    fn series_inverse(c in prop::collection::vec(scalar(), 1..12)) {
        let f = WittRing::auto(3, 1).unwrap();
        let mut c: Vec<WittScalar> = c.into_iter().map(|s| f.coerce(s)).collect();
        c[0] = f.one();
        let s = UniSeries::from_coeffs(f, c.clone());
        let prod = s.mul(&s.inverse().unwrap());
        prop_assert_eq!(prod, UniSeries::monomial(f, c.len(), 0, f.one()));
    }

    #[test]
    fn kronecker_is_multiplicative_in_the_top(a in -200i64..200, b in -200i64..200, n in 1i64..60) {
        prop_assert_eq!(kronecker(a * b, n), kronecker(a, n) * kronecker(b, n));
    }

    #[test]
    fn split_counts_agree_with_naive(upper in prop::collection::vec(-2i64..=2, 6), m in 0i64..9) {
        let u = vec![vec![upper[0], upper[1], upper[2]], vec![0, upper[3], upper[4]], vec![0, 0, upper[5]]];
        if let Ok(lat) = QuadLattice::new(u) {
            for l in [2u64, 3] {
                prop_assert_eq!(count_mod(&lat, l, m, 2, DEFAULT_BUDGET).unwrap(), count_mod_naive(&lat, l, m, 2));
            }
        }
    }

    #[test]
    fn form_json_round_trip(upper in prop::collection::vec(-3i64..=3, 3)) {
        let u = vec![vec![1 + upper[0].abs(), upper[1]], vec![0, 1 + upper[2].abs()]];
        if let Ok(lat) = QuadLattice::new(u) {
            let text = serde_json::to_string(&lat.to_json()).unwrap();
            let back: FormJson = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(QuadLattice::from_json(&back).unwrap(), lat);
        }
    }

    #[test]
    fn model_coordinates_are_isometric(s in prop::array::uniform5(-20i64..=20)) {
        let model = LatticeModel::new(QuadLattice::model_p3(), 3, 2).unwrap();
        let qp = QuadLattice::new(crysect_core::crystal::q_prime_upper(3, 2)).unwrap();
        let w = model.omega_coords(&s);
        let z = Zmod::new(3, 16);
        let w64: Vec<i64> = w.iter().map(|&c| c as i64).collect();
        prop_assert_eq!(z.red(qp.value(&w64)), z.red(model.lattice().value(&s)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shift_identity_along_a_curve(w in endo(10)) {
        let pb = Pullbacks::new(&key_lemma_curve(120).unwrap());
        prop_assert_eq!(pb.defo(1, &w.scaled(3)), pb.defo(2, &w));
    }

    #[test]
    fn degrees_dominate_the_coordinate_minimum(s in prop::array::uniform5(-6i64..=6)) {
        let model = LatticeModel::new(QuadLattice::model_p3(), 3, 2).unwrap();
        let table = DegreeTable::compute(&key_lemma_curve(80).unwrap(), 1).unwrap();
        let w = model.omega_coords(&s);
        let (d, _) = table.degree(&w);
        prop_assert!(d >= table.degree_lower_bound(&w));
    }

    #[test]
    fn curve_json_round_trip(tail in prop::collection::vec((0u64..3, 0u64..3), 0..6)) {
        let f = WittRing::auto(3, 1).unwrap();
        let tail: Vec<WittScalar> = tail.into_iter().map(|(a, b)| WittScalar::new(a, b)).collect();
        let c = FormalCurve::normal_form(f, 1, 3, 2, f.one(), [&tail, &[], &[f.lambda()]], 20).unwrap();
        let text = serde_json::to_string(&c.to_json()).unwrap();
        let back = FormalCurve::from_json(f, &serde_json::from_str(&text).unwrap(), None).unwrap();
        prop_assert_eq!(back.coords(), c.coords());
    }
}

#[test]
fn filtration_is_monotone() {
    let table = DegreeTable::compute(&key_lemma_curve(80).unwrap(), 1).unwrap();
    let e = table.filtration(60);
    for w in e.windows(2) {
        for j in 0..5 {
            match (w[0][j], w[1][j]) {
                (Some(a), Some(b)) => assert!(b >= a),
                (None, Some(_)) => panic!("filtration regained a level"),
                _ => {}
            }
        }
    }
    // levels above min(a, b) = 1 drop the ω₃ direction first
    assert_eq!(e[1][2], Some(1));
}
