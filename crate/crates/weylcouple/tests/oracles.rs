//! Frozen reference values, mostly closed forms worked out by hand.

use approx::assert_relative_eq;
use num_complex::Complex64 as C;
use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};
use weylcouple::asymptotics::{d_limit_predict, fit_power_law, PowerFit, Regime};
use weylcouple::mobius::MobiusMap;
use weylcouple::nevanlinna::{
    classify, explicit_stieltjes, extension_type, ExtReal, ExtensionType, NevanlinnaExpr, SamplingPlan, SpectralMeasure, Tri,
};
use weylcouple::sl_weyl::{closed_form, power_weight_constants, triple_convert, weyl_function, HalfLineProblem, Triple};
use weylcouple::Error;

fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

#[test]
fn power_weight_constants_match_gamma_formula() {
    // alpha = beta = 0 is the free problem, so C = 1
    let (nu, c) = power_weight_constants(0.0, 0.0);
    assert_relative_eq!(nu, 0.5);
    assert_relative_eq!(c, 1.0, max_relative = 1e-14);
    let (nu, c) = power_weight_constants(1.0, 0.0);
    assert_relative_eq!(nu, 1.0 / 3.0);
    let want = 3f64.powf(2.0 / 3.0) * gamma(4.0 / 3.0) / gamma(2.0 / 3.0);
    assert_relative_eq!(c, want, max_relative = 1e-14);
}

#[test]
fn power_weight_ode_at_i() {
    let (nu, c) = power_weight_constants(1.0, 0.0);
    let z = C::new(0.0, 1.0);
    let m = weyl_function(&HalfLineProblem::power_weights(1.0, 0.0), z).unwrap();
    let want = (-z).powf(-nu) * c;
    assert!((m - want).norm() / want.norm() < 1e-4);
}

#[test]
fn free_dirichlet_catalog_value() {
    let m = closed_form("free-dirichlet").unwrap().closed_form;
    let v = m.eval(0.0, 1.0).unwrap();
    let want = -C::from_polar(1.0, -FRAC_PI_4);
    assert!((v - want).norm() < 1e-15);
}

#[test]
fn catalog_entries_agree_with_their_odes() {
    let zs = [C::new(0.0, 1.0), C::new(1.0, 1.0), C::new(-2.0, 0.5), C::new(0.5, -3.0), C::new(-10.0, 0.1)];
    for id in ["free-neumann", "free-dirichlet", "power-weights(0,0)", "power-weights(2,0.5)", "power-weights(0,-1)"] {
        let e = closed_form(id).unwrap();
        let prob = e.problem.expect("ODE-backed entry");
        for z in zs {
            let a = e.closed_form.evaluate(z).unwrap();
            let b = weyl_function(&prob, z).unwrap();
            assert!((a - b).norm() / a.norm() < 1e-4, "{id} at {z}: {a} vs {b}");
        }
    }
}

#[test]
fn unknown_catalog_id() {
    assert!(matches!(closed_form("no-such-model"), Err(Error::UnknownId(_))));
    assert!(matches!(closed_form("power-weights(-2,0)"), Err(Error::UnknownId(_))));
}

#[test]
fn triple_conversion() {
    let m = NevanlinnaExpr::power(1.0, -0.5);
    let t = triple_convert(m.clone(), Triple::NeumannStyle, Triple::DirichletStyle);
    let back = triple_convert(t.clone(), Triple::DirichletStyle, Triple::NeumannStyle);
    for z in [C::new(0.3, 1.0), C::new(-4.0, 0.2), C::new(2.0, -1.0)] {
        assert!((t.evaluate(z).unwrap() + (-z).sqrt()).norm() < 1e-12);
        assert!((back.evaluate(z).unwrap() - m.evaluate(z).unwrap()).norm() < 1e-12);
    }
    // C(-z)^(-nu) -> -(1/C)(-z)^nu
    let p = NevanlinnaExpr::power(2.0, -0.25);
    let t = triple_convert(p, Triple::NeumannStyle, Triple::DirichletStyle);
    let z = C::new(1.0, 2.0);
    assert!((t.evaluate(z).unwrap() - (-z).powf(0.25) * -0.5).norm() < 1e-12);
}

#[test]
fn singular_example_classification() {
    let m = closed_form("singular-at-zero").unwrap().closed_form;
    let r = classify(&m, &SamplingPlan::standard()).unwrap();
    assert_eq!(r.in_sm, Tri::Yes);
    assert_eq!(r.is_stieltjes, Tri::Yes);
    assert!(r.pole_on_negative_axis.is_none());
    assert_eq!(r.m_zero_minus, ExtReal::PosInf);
    assert_eq!(extension_type(&m).unwrap(), ExtensionType::Krein);
}

#[test]
fn extension_types_of_free_functions() {
    assert_eq!(extension_type(&NevanlinnaExpr::power(-1.0, 0.5)).unwrap(), ExtensionType::Friedrichs);
    assert_eq!(extension_type(&NevanlinnaExpr::power(1.0, -0.5)).unwrap(), ExtensionType::Krein);
}

#[test]
fn explicit_measure_of_inverse_square_root() {
    let (gamma0, sigma) = explicit_stieltjes(&NevanlinnaExpr::power(1.0, -0.5)).unwrap();
    assert!(gamma0.abs() < 1e-12);
    for t in [1e-3, 1.0, 1e4] {
        assert_relative_eq!(sigma.density(t), t.powf(-0.5) / PI, max_relative = 1e-12);
        assert_relative_eq!(sigma.cumulative(t), 2.0 * t.sqrt() / PI, max_relative = 1e-9);
    }
}

#[test]
fn quarter_power_fit_at_zero() {
    let m = closed_form("quarter-power").unwrap().closed_form;
    let fit = fit_power_law(&m, Regime::AtZero).unwrap();
    assert_relative_eq!(fit.alpha0, 0.25, epsilon = 1e-10);
    assert_relative_eq!(fit.c0, -SQRT_2, max_relative = 1e-10);
}

fn one_term(regime: Regime, alpha0: f64, c0: f64) -> PowerFit {
    PowerFit { regime, alpha0, c0, alpha1: None, c1: None, residual: 0.0, window: regime.window() }
}

fn finite_close(l: ExtReal, want: f64) {
    match l {
        ExtReal::Finite(v) => assert_relative_eq!(v, want, max_relative = 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn d_limit_closed_forms() {
    // equal exponents: C sin(pi|a|/2) summed over |C+ e^{-i pi a/2} + C- e^{i pi a/2}|
    let l = d_limit_predict(&one_term(Regime::AtInf, -0.5, 1.0), &one_term(Regime::AtInf, -0.5, 1.0)).unwrap();
    finite_close(l, 1.0);
    // exponents -1/2 and -1/4 at infinity: the -1/4 term leads both parts
    let l = d_limit_predict(&one_term(Regime::AtInf, -0.5, 1.0), &one_term(Regime::AtInf, -0.25, 1.0)).unwrap();
    finite_close(l, (PI / 8.0).sin());
    let mixed = d_limit_predict(&one_term(Regime::AtZero, 0.5, -1.0), &one_term(Regime::AtZero, -0.5, 1.0)).unwrap();
    finite_close(mixed, FRAC_PI_4.sin());
}

#[test]
fn mobius_reflection_maps_power_laws() {
    // -m(1/z) for m = C(-z)^a is -C (-z)^(-a)
    let m = NevanlinnaExpr::power(-SQRT_2, 0.25);
    let r = NevanlinnaExpr::reflect(m);
    let z = C::new(-0.7, 0.4);
    assert!((r.evaluate(z).unwrap() - (-z).powf(-0.25) * SQRT_2).norm() < 1e-12);
    assert_eq!(MobiusMap::reciprocal().epsilon, -1);
}

#[test]
fn tauberian_constant_of_square_root_measure() {
    let sigma = SpectralMeasure::power_density(1.0 / PI, -0.5);
    let rep = weylcouple::asymptotics::tauberian_check(&sigma, 0.5, 1.0).unwrap();
    assert!(rep.max_forward() < 1e-6);
    assert!(rep.max_inverse() < 1e-9);
    let wrong = weylcouple::asymptotics::tauberian_check(&sigma, 0.5, 2.0);
    assert!(matches!(wrong, Err(Error::MismatchedPair(_))));
}
