use num_complex::Complex64 as C;
use weylcouple::asymptotics::Regime;
use weylcouple::coupling::{
    canonical_pair, classify_boundary, denominator, nonnegativity, resolvent_solve, uniform_grid, veselic_bound,
    BoundaryMatrixPair, CouplingModel, KernelCondition, Nonnegativity, Rhs,
};
use weylcouple::nevanlinna::NevanlinnaExpr;
use weylcouple::properties::{b_certify_schur, d_certify, DOptions};
use weylcouple::sl_weyl::{closed_form, HalfLineProblem, Triple};
use weylcouple::Error;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

#[test]
fn plain_boundary_types() {
    let z = c(0.0);
    let o = c(1.0);
    let t1 = BoundaryMatrixPair { m: [[z, z], [z, z]], n: [[o, z], [z, o]] };
    let r = classify_boundary(&t1).unwrap();
    assert_eq!((r.canonical_type, r.separated), (1, true));

    // the coupling itself: Γ0+ = Γ0-, Γ1+ = -Γ1-
    let r = classify_boundary(&canonical_pair(3, &[1.0, 0.0, 0.0])).unwrap();
    assert_eq!((r.canonical_type, r.separated), (3, false));

    let r = classify_boundary(&canonical_pair(4, &[0.0, 0.0, 1.0, 0.0])).unwrap();
    assert_eq!((r.canonical_type, r.separated), (4, false));
    let r = classify_boundary(&canonical_pair(4, &[0.5, -1.0, 0.0, 0.0])).unwrap();
    assert!(r.separated);
}

#[test]
fn mirrored_separated_form() {
    let (z, o) = (c(0.0), c(1.0));
    let pair = BoundaryMatrixPair { m: [[z, o], [z, z]], n: [[z, c(2.5)], [o, z]] };
    let r = classify_boundary(&pair).unwrap();
    assert!(r.mirrored && r.separated);
    assert_eq!(r.parameters["alpha"], 2.5);
}

#[test]
fn boundary_errors() {
    let (z, o) = (c(0.0), c(1.0));
    let low = BoundaryMatrixPair { m: [[o, z], [o, z]], n: [[z, z], [z, z]] };
    assert_eq!(classify_boundary(&low).unwrap_err(), Error::RankDeficient);
    let skew = BoundaryMatrixPair { m: [[o, z], [z, o]], n: [[C::new(0.0, 1.0), z], [z, z]] };
    assert_eq!(classify_boundary(&skew).unwrap_err(), Error::NonSelfAdjoint);
}

#[test]
fn quarter_power_coupling_is_nonnegative_by_friedrichs_route() {
    let m = CouplingModel::new(
        closed_form("free-dirichlet").unwrap().closed_form,
        closed_form("quarter-power").unwrap().closed_form,
        KernelCondition::True,
    );
    let r = nonnegativity(&m).unwrap();
    assert_eq!(r.verdict, Nonnegativity::Nonnegative);
    assert!(r.routes.iter().any(|s| s == "friedrichs-extension"));
}

#[test]
fn sum_with_zero_is_not_nonnegative() {
    // 1/sqrt(-x) - 1 changes sign at x = -1
    let m = CouplingModel::new(NevanlinnaExpr::power(1.0, -0.5), NevanlinnaExpr::constant(-1.0), KernelCondition::Unknown);
    let r = nonnegativity(&m).unwrap();
    assert_eq!(r.verdict, Nonnegativity::NotNonnegative);
    let x = r.zero_of_sum.unwrap();
    assert!(x < -0.9 && x > -1.1, "{x}");
}

#[test]
fn mirror_square_root_pair_has_eigenvalue_at_i() {
    // m+ = 1/sqrt(-z), m- = -sqrt(-z): the denominator vanishes exactly at z = i
    let mut model =
        CouplingModel::new(NevanlinnaExpr::power(1.0, -0.5), NevanlinnaExpr::power(-1.0, 0.5), KernelCondition::Unknown);
    assert!(denominator(&model, C::new(0.0, 1.0)).unwrap().norm() < 1e-15);
    model.sl_problem_plus = Some(HalfLineProblem::free(Triple::NeumannStyle));
    let one = |_: f64| c(1.0);
    let h = Rhs { f: &one, breaks: vec![] };
    let r = resolvent_solve(&model, C::new(0.0, 1.0), &h, &uniform_grid(5.0, 1e-2), 4.0);
    assert_eq!(r.unwrap_err(), Error::DenominatorZero);
    assert!(resolvent_solve(&model, C::new(0.5, 2.0), &h, &uniform_grid(20.0, 1e-3), 4.0).is_ok());
}

#[test]
fn zero_data_gives_zero_solution() {
    let mut model =
        CouplingModel::new(NevanlinnaExpr::power(1.0, -0.5), NevanlinnaExpr::power(1.0, -0.5), KernelCondition::Unknown);
    model.sl_problem_plus = Some(HalfLineProblem::free(Triple::NeumannStyle));
    let zero = |_: f64| c(0.0);
    let r = resolvent_solve(&model, C::new(0.0, 1.0), &Rhs { f: &zero, breaks: vec![] }, &uniform_grid(10.0, 1e-3), 5.0).unwrap();
    assert!(r.solution.f.iter().all(|v| v.norm() == 0.0));
    // the decaying solution reproduces m+ at z
    assert!((r.m_plus_ode - C::from_polar(1.0, std::f64::consts::FRAC_PI_4)).norm() < 1e-9);
}

#[test]
fn resolvent_needs_an_ode_side() {
    let model = CouplingModel::new(NevanlinnaExpr::power(1.0, -0.5), NevanlinnaExpr::power(1.0, -0.5), KernelCondition::Unknown);
    let one = |_: f64| c(1.0);
    let r = resolvent_solve(&model, C::new(0.0, 1.0), &Rhs { f: &one, breaks: vec![] }, &uniform_grid(1.0, 1e-2), 1.0);
    assert!(matches!(r, Err(Error::Precondition(_))));
}

#[test]
fn veselic_bound_formula_and_missing_constants() {
    let m = NevanlinnaExpr::power(1.0, -0.5);
    let mut d = d_certify(&m, &m, Regime::AtInf, DOptions::default()).unwrap();
    let mut b = b_certify_schur(&m, Regime::AtInf, None).unwrap();
    d.constants.insert("C1".into(), 1.0);
    b.constants.insert("C2".into(), 2.0);
    assert_eq!(veselic_bound(&d, &b, &b).unwrap(), 8.0);

    let real = veselic_bound(
        &d_certify(&m, &m, Regime::AtInf, DOptions::default()).unwrap(),
        &b_certify_schur(&m, Regime::AtInf, None).unwrap(),
        &b_certify_schur(&m, Regime::AtInf, None).unwrap(),
    )
    .unwrap();
    assert!(real.is_finite() && real > 0.0);

    let s = closed_form("singular-at-zero").unwrap().closed_form;
    let inconclusive = b_certify_schur(&s, Regime::AtZero, None).unwrap();
    assert!(matches!(veselic_bound(&d, &inconclusive, &b), Err(Error::MissingConstant(_))));
}
