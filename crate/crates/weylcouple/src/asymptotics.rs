//! Power-law asymptotics at 0 and ∞: fits, class membership, Tauberian
//! consistency of measure and transform, and the limiting D-ratio.

use crate::error::{Error, Result};
use crate::nevanlinna::{neg_pow, ClassReport, ExtReal, NevanlinnaExpr, SpectralMeasure, Tri};
use crate::quad::{geomspace, linear_fit};
use crate::sweep;
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    AtInf,
    AtZero,
}

impl Regime {
    pub fn window(self) -> (f64, f64) {
        match self {
            Regime::AtInf => (1e3, 1e7),
            Regime::AtZero => (1e-7, 1e-3),
        }
    }
}

pub const PROBES: [C; 3] = [C::new(0.0, 1.0), C::new(-1.0, 1.0), C::new(1.0, 2.0)];

/// `m(rz) ≈ C0 (-rz)^α0` or `m(rz) ≈ C0 + C1 (-rz)^α1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerFit {
    pub regime: Regime,
    pub alpha0: f64,
    pub c0: f64,
    pub alpha1: Option<f64>,
    pub c1: Option<f64>,
    pub residual: f64,
    pub window: (f64, f64),
}

impl PowerFit {
    pub fn model(&self, z: C) -> Result<C> {
        let mut v = neg_pow(z, self.alpha0)? * self.c0;
        if let (Some(a1), Some(c1)) = (self.alpha1, self.c1) {
            v += neg_pow(z, a1)? * c1;
        }
        Ok(v)
    }

    pub fn two_term(&self) -> bool {
        self.alpha1.is_some()
    }
}

const ZERO_BAND: f64 = 0.01;

fn max_rel_dev(vals: &[(f64, C, C)], model: impl Fn(C) -> Result<C>) -> Result<f64> {
    let mut r = 0.0f64;
    for (rr, p, m) in vals {
        let mm = model(*p * *rr)?;
        r = r.max((*m / mm - 1.0).norm());
    }
    Ok(r)
}

pub fn fit_power_law(f: &NevanlinnaExpr, regime: Regime) -> Result<PowerFit> {
    fit_power_law_window(f, regime, regime.window())
}

pub fn fit_power_law_window(f: &NevanlinnaExpr, regime: Regime, window: (f64, f64)) -> Result<PowerFit> {
    let rs = geomspace(window.0, window.1, 16);
    let pts: Vec<(f64, C)> = rs.iter().flat_map(|r| PROBES.iter().map(move |p| (*r, *p))).collect();
    let evals = sweep::map(&pts, |(r, p)| f.evaluate(*p * *r));
    let mut vals = Vec::with_capacity(pts.len());
    for ((r, p), m) in pts.iter().zip(evals) {
        vals.push((*r, *p, m?));
    }
    let on_axis: Vec<&(f64, C, C)> = vals.iter().filter(|v| v.1 == PROBES[0]).collect();
    let lx: Vec<f64> = on_axis.iter().map(|v| v.0.ln()).collect();
    let ly: Vec<f64> = on_axis.iter().map(|v| v.2.norm().ln()).collect();
    if ly.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitFailed("m vanishes on the probe ray".into()));
    }
    let (alpha0, _, _) = linear_fit(&lx, &ly);
    let c0 = vals.iter().map(|(r, p, m)| (m / neg_pow(*p * *r, alpha0).unwrap()).re).sum::<f64>() / vals.len() as f64;
    let one = PowerFit { regime, alpha0, c0, alpha1: None, c1: None, residual: 0.0, window };
    let res1 = max_rel_dev(&vals, |z| one.model(z))?;
    let mut best = PowerFit { residual: res1, ..one };

    // a constant either leads (α0 ≈ 0) or corrects the power law
    if alpha0.abs() < ZERO_BAND || res1 > 1e-6 {
        if let Some(two) = fit_two_term(&vals, &rs, regime, window)? {
            if two.residual < 0.5 * res1 {
                best = two;
            }
        }
    }
    if !(best.residual <= 0.05) {
        return Err(Error::FitFailed(format!("residual {:.3e} over {:?}", best.residual, window)));
    }
    Ok(best)
}

/// Second-term fit from successive differences along each probe ray, on the half
/// of the window nearest the regime endpoint.
fn fit_two_term(vals: &[(f64, C, C)], rs: &[f64], regime: Regime, window: (f64, f64)) -> Result<Option<PowerFit>> {
    let n = rs.len();
    let idx: Vec<usize> = match regime {
        Regime::AtInf => (n / 2..n).collect(),
        Regime::AtZero => (0..n / 2 + 1).collect(),
    };
    let q = rs[1] / rs[0];
    let at = |k: usize, p: usize| vals[k * PROBES.len() + p].2;
    let mut lx = vec![];
    let mut ly = vec![];
    let mut diffs = vec![];
    for (p, &probe) in PROBES.iter().enumerate() {
        for w in idx.windows(2) {
            let d = at(w[1], p) - at(w[0], p);
            if p == 0 {
                if d.norm() == 0.0 {
                    return Ok(None);
                }
                lx.push(rs[w[0]].ln());
                ly.push(d.norm().ln());
            }
            diffs.push((rs[w[0]], probe, d));
        }
    }
    let (alpha1, _, _) = linear_fit(&lx, &ly);
    let factor = q.powf(alpha1) - 1.0;
    if factor.abs() < 1e-12 {
        return Ok(None);
    }
    let c1 =
        diffs.iter().map(|(r, p, d)| (d / (neg_pow(*p * *r, alpha1).unwrap() * factor)).re).sum::<f64>() / diffs.len() as f64;
    let sel: Vec<(f64, C, C)> =
        idx.iter().flat_map(|k| (0..PROBES.len()).map(move |p| *k * PROBES.len() + p)).map(|i| vals[i]).collect();
    let c0 = sel.iter().map(|(r, p, m)| (m - neg_pow(*p * *r, alpha1).unwrap() * c1).re).sum::<f64>() / sel.len() as f64;
    let fit = PowerFit { regime, alpha0: 0.0, c0, alpha1: Some(alpha1), c1: Some(c1), residual: 0.0, window };
    let residual = max_rel_dev(vals, |z| fit.model(z))?;
    Ok(Some(PowerFit { residual, ..fit }))
}

/// Whether a fit has the shape required for membership at its regime.
pub fn fit_admissible(fit: &PowerFit) -> bool {
    let sign_ok = |a: f64, c: f64| (a < 0.0 && c > 0.0) || (a > 0.0 && c < 0.0);
    let power_ok = |a: f64, c: f64| a.abs() >= ZERO_BAND && a.abs() <= 1.0 - ZERO_BAND && sign_ok(a, c);
    if let (Some(a1), Some(c1)) = (fit.alpha1, fit.c1) {
        let constant_leads = match fit.regime {
            Regime::AtInf => a1 < 0.0,
            Regime::AtZero => a1 > 0.0,
        };
        if !constant_leads {
            return power_ok(a1, c1);
        }
        let range_ok = match fit.regime {
            Regime::AtInf => a1 > -1.0 + ZERO_BAND && a1 < -ZERO_BAND,
            Regime::AtZero => a1 > ZERO_BAND && a1 < 1.0 - ZERO_BAND,
        };
        return range_ok && sign_ok(a1, c1);
    }
    power_ok(fit.alpha0, fit.c0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMembership {
    pub in_a_inf: Tri,
    pub in_a_zero: Tri,
    pub fit_inf: Option<PowerFit>,
    pub fit_zero: Option<PowerFit>,
    pub fit_errors: Vec<String>,
}

pub fn class_membership(f: &NevanlinnaExpr, report: &ClassReport) -> ClassMembership {
    let mut errors = vec![];
    let mut fit = |r: Regime| match fit_power_law(f, r) {
        Ok(fit) => Some(fit),
        Err(e) => {
            errors.push(format!("{r:?}: {e}"));
            None
        }
    };
    let fit_inf = fit(Regime::AtInf);
    let fit_zero = fit(Regime::AtZero);
    let decide = |fit: &Option<PowerFit>| -> Tri {
        match report.in_sm {
            Tri::No => Tri::No,
            Tri::Inconclusive => Tri::Inconclusive,
            Tri::Yes => match fit {
                None => Tri::Inconclusive,
                Some(fit) => Tri::from_bool(fit_admissible(fit)),
            },
        }
    };
    ClassMembership { in_a_inf: decide(&fit_inf), in_a_zero: decide(&fit_zero), fit_inf, fit_zero, fit_errors: errors }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TauberianReport {
    pub alpha: f64,
    pub c: f64,
    /// `|m(rz) (-rz)^α / C - 1|` at `r = 1e2, 1e3, 1e4`, `z ∈ {i, -1}`.
    pub forward: Vec<f64>,
    /// `σ(t) / (C sin(πα) t^(1-α) / (π (1-α))) - 1` at `t = 1e2, 1e3, 1e4`.
    pub inverse: Vec<f64>,
    /// `|m(1e8 i)| / |m(i)|`, a test that the transform has no constant term.
    pub gamma_ratio: f64,
}

impl TauberianReport {
    pub fn max_forward(&self) -> f64 {
        self.forward.iter().cloned().fold(0.0, f64::max)
    }

    pub fn max_inverse(&self) -> f64 {
        self.inverse.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Both directions of the Stieltjes-transform Tauberian pair
/// `m(z) ~ C/(-z)^α  ⟺  σ(t) ~ C sin(πα) t^(1-α) / (π(1-α))`.
pub fn tauberian_check(sigma: &SpectralMeasure, alpha: f64, c: f64) -> Result<TauberianReport> {
    if !(alpha > 0.0 && alpha < 1.0) || !(c > 0.0) {
        return Err(Error::Precondition("need 0 < α < 1 and C > 0".into()));
    }
    sigma.growth_integral()?;
    let m = NevanlinnaExpr::stieltjes(0.0, sigma.clone());
    let mut forward = vec![];
    for r in [1e2, 1e3, 1e4] {
        for z in [C::new(0.0, 1.0), C::new(-1.0, 0.0)] {
            let v = m.evaluate(z * r)?;
            let model = neg_pow(z * r, -alpha)? * c;
            forward.push((v / model - 1.0).norm());
        }
    }
    let inverse = [1e2, 1e3, 1e4]
        .iter()
        .map(|t| sigma.cumulative(*t) / (c * (PI * alpha).sin() * t.powf(1.0 - alpha) / (PI * (1.0 - alpha))) - 1.0)
        .collect();
    let gamma_ratio = m.eval(0.0, 1e8)?.norm() / m.eval(0.0, 1.0)?.norm();
    let rep = TauberianReport { alpha, c, forward, inverse, gamma_ratio };
    if rep.gamma_ratio > 0.01 {
        return Err(Error::MismatchedPair(format!("transform does not vanish at i∞ (ratio {:.3e})", rep.gamma_ratio)));
    }
    if rep.max_forward() > 0.05 || rep.max_inverse() > 0.05 {
        return Err(Error::MismatchedPair(format!("forward {:.3e}, inverse {:.3e}", rep.max_forward(), rep.max_inverse())));
    }
    Ok(rep)
}

type Terms<T> = Vec<(f64, T)>;

/// Leading terms `(exponent, coefficient)` of `Im m₊(iy) + Im m₋(iy)` and of
/// `m₊(iy) + m₋(-iy)`.
fn leading_terms(plus: &PowerFit, minus: &PowerFit) -> (Terms<f64>, Terms<C>) {
    let mut num = vec![];
    let mut den = vec![];
    for (fit, dir) in [(plus, C::new(0.0, -1.0)), (minus, C::new(0.0, 1.0))] {
        let mut push = |a: f64, c: f64| {
            num.push((a, -c * (PI * a / 2.0).sin()));
            den.push((a, dir.powf(a) * c));
        };
        push(fit.alpha0, fit.c0);
        if let (Some(a1), Some(c1)) = (fit.alpha1, fit.c1) {
            push(a1, c1);
        }
    }
    (num, den)
}

/// Groups terms with exponents within `ZERO_BAND` and returns the dominant
/// non-cancelling group for the regime.
fn dominant<T>(terms: &[(f64, T)], regime: Regime, norm: impl Fn(&T) -> f64, add: impl Fn(&T, &T) -> T) -> Option<(f64, T)>
where
    T: Clone,
{
    let mut groups: Vec<(f64, T, f64)> = vec![];
    for (a, c) in terms {
        if let Some(g) = groups.iter_mut().find(|g| (g.0 - a).abs() < ZERO_BAND) {
            g.1 = add(&g.1, c);
            g.2 = g.2.max(norm(c));
        } else {
            groups.push((*a, c.clone(), norm(c)));
        }
    }
    groups.retain(|g| norm(&g.1) > 1e-9 * g.2);
    groups.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let g = match regime {
        Regime::AtInf => groups.pop()?,
        Regime::AtZero => groups.into_iter().next()?,
    };
    Some((g.0, g.1))
}

/// Limit of the D-ratio `(Im m₊(iy) + Im m₋(iy))/|m₊(iy) + m₋(-iy)|` toward the
/// regime endpoint predicted from the two fits. At ∞ the larger exponent
/// dominates, at 0 the smaller one; cancelling constants fall through to the
/// second terms.
pub fn d_limit_predict(fit_plus: &PowerFit, fit_minus: &PowerFit) -> Result<ExtReal> {
    if fit_plus.regime != fit_minus.regime {
        return Err(Error::Precondition("fits from different regimes".into()));
    }
    let regime = fit_plus.regime;
    let (num, den) = leading_terms(fit_plus, fit_minus);
    let (ed, cd) = dominant(&den, regime, |c| c.norm(), |a, b| a + b).ok_or(Error::DegenerateDenominator)?;
    let Some((en, cn)) = dominant(&num, regime, |c| c.abs(), |a, b| a + b) else {
        return Ok(ExtReal::Finite(0.0));
    };
    if (en - ed).abs() < ZERO_BAND {
        return Ok(ExtReal::Finite(cn.abs() / cd.norm()));
    }
    let num_wins = match regime {
        Regime::AtInf => en > ed,
        Regime::AtZero => en < ed,
    };
    Ok(if num_wins { ExtReal::PosInf } else { ExtReal::Finite(0.0) })
}
