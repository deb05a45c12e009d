use num_complex::Complex64 as C;
use proptest::prelude::*;
use weylcouple::coupling::{canonical_pair, classify_boundary, verdict, BoundaryMatrixPair, Nonnegativity, SideClass};
use weylcouple::mobius::MobiusMap;
use weylcouple::nevanlinna::{NevanlinnaExpr, Tri};
use weylcouple::pipeline::example_config;
use weylcouple::properties::d_ratio;

fn map() -> impl Strategy<Value = MobiusMap> {
    prop::array::uniform4(-3.0f64..3.0)
        .prop_filter("invertible", |e| (e[0] * e[3] - e[1] * e[2]).abs() > 0.05)
        .prop_map(|e| MobiusMap::normalize(e[0], e[1], e[2], e[3]).unwrap())
}

fn upper() -> impl Strategy<Value = C> {
    (-5.0f64..5.0, 0.05f64..5.0).prop_map(|(x, y)| C::new(x, y))
}

fn power_law() -> impl Strategy<Value = NevanlinnaExpr> {
    (0.05f64..0.95, 0.1f64..5.0, any::<bool>()).prop_map(|(a, c, neg)| {
        if neg {
            NevanlinnaExpr::power(c, -a)
        } else {
            NevanlinnaExpr::power(-c, a)
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn composition_acts_as_function_composition(a in map(), b in map(), z in upper()) {
        let (Ok(inner), Ok(direct)) = (b.apply(z), a.compose(&b).apply(z)) else { return Ok(()) };
        let Ok(outer) = a.apply(inner) else { return Ok(()) };
        prop_assert!((outer - direct).norm() <= 1e-9 * (1.0 + direct.norm()));
    }

    #[test]
    fn inverse_round_trip(a in map(), z in upper()) {
        let w = a.apply(z).unwrap();
        let back = a.inverse().apply(w).unwrap();
        prop_assert!((back - z).norm() <= 1e-9 * (1.0 + z.norm()));
    }

    #[test]
    fn power_laws_are_nevanlinna(f in power_law(), z in upper()) {
        let v = f.evaluate(z).unwrap();
        prop_assert!(v.im >= 0.0);
        let w = f.evaluate(z.conj()).unwrap();
        prop_assert!((w - v.conj()).norm() <= 1e-12 * (1.0 + v.norm()));
    }

    #[test]
    fn d_ratio_is_symmetric(f in power_law(), g in power_law(), ly in -6.0f64..6.0) {
        let y = 10f64.powf(ly);
        let a = d_ratio(&f, &g, y).unwrap();
        let b = d_ratio(&g, &f, y).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert!(a > 0.0);
    }

    #[test]
    fn boundary_class_is_invariant_under_row_operations(
        ty in 1u8..=4,
        p in prop::array::uniform4(-3.0f64..3.0),
        g in prop::array::uniform4((-2.0f64..2.0, -2.0f64..2.0)),
    ) {
        let g: Vec<C> = g.iter().map(|(a, b)| C::new(*a, *b)).collect();
        prop_assume!((g[0] * g[3] - g[1] * g[2]).norm() > 0.1);
        let params = if ty == 3 { vec![p[0].abs() + 0.1, p[1], p[2]] } else { p.to_vec() };
        let base = canonical_pair(ty, &params);
        let mix = |m: [[C; 2]; 2]| [
            [g[0] * m[0][0] + g[1] * m[1][0], g[0] * m[0][1] + g[1] * m[1][1]],
            [g[2] * m[0][0] + g[3] * m[1][0], g[2] * m[0][1] + g[3] * m[1][1]],
        ];
        let a = classify_boundary(&base).unwrap();
        let b = classify_boundary(&BoundaryMatrixPair { m: mix(base.m), n: mix(base.n) }).unwrap();
        prop_assert_eq!(a.canonical_type, b.canonical_type);
        prop_assert_eq!(a.separated, b.separated);
        for (k, v) in &a.parameters {
            prop_assert!((v - b.parameters[k]).abs() <= 1e-8 * (1.0 + v.abs()), "{} {} {}", k, v, b.parameters[k]);
        }
    }
}

/// Replays rule evaluation on subsets of the certificates: more evidence may
/// resolve INCONCLUSIVE but never flips YES and NO.
#[test]
fn verdict_is_monotone_in_evidence() {
    use weylcouple::pipeline::run_analyze;
    for id in ["singular-zero", "quarter-power-coupling"] {
        let cfg = example_config(id).unwrap();
        let rep = run_analyze(&cfg).unwrap();
        let model = cfg.model.build("").unwrap();
        let nonneg = rep.nonnegativity.clone().unwrap();
        assert_ne!(nonneg.verdict, Nonnegativity::NotNonnegative);
        let plus = SideClass { class: rep.m_plus.class.as_ref().unwrap(), membership: rep.m_plus.membership.as_ref().unwrap() };
        let minus =
            SideClass { class: rep.m_minus.class.as_ref().unwrap(), membership: rep.m_minus.membership.as_ref().unwrap() };
        let full = verdict(&model, &nonneg, &plus, &minus, &rep.certificates).unwrap();
        let n = rep.certificates.len();
        let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig::with_cases(64));
        runner
            .run(&prop::collection::vec(any::<bool>(), n), |mask| {
                let sub: Vec<_> = rep.certificates.iter().zip(&mask).filter(|(_, k)| **k).map(|(c, _)| c.clone()).collect();
                let part = verdict(&model, &nonneg, &plus, &minus, &sub).unwrap();
                for (p, f) in [(part.infinity_regular, full.infinity_regular), (part.zero_regular, full.zero_regular)] {
                    prop_assert!(!(p == Tri::Yes && f == Tri::No) && !(p == Tri::No && f == Tri::Yes));
                }
                Ok(())
            })
            .unwrap();
    }
}
