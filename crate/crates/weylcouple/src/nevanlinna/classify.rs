use super::expr::NevanlinnaExpr;
use crate::error::{Error, Result};
use crate::quad::{decade_grid, linear_fit};
use crate::rkhs;
use crate::sweep;
use num_complex::Complex64 as C;
use serde::{Serialize, Serializer};

/// Three-valued outcome of a sampled predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Tri {
    Yes,
    No,
    Inconclusive,
}

impl Tri {
    pub fn from_bool(b: bool) -> Tri {
        if b {
            Tri::Yes
        } else {
            Tri::No
        }
    }

    pub fn and(self, other: Tri) -> Tri {
        match (self, other) {
            (Tri::No, _) | (_, Tri::No) => Tri::No,
            (Tri::Yes, Tri::Yes) => Tri::Yes,
            _ => Tri::Inconclusive,
        }
    }

    pub fn is_yes(self) -> bool {
        self == Tri::Yes
    }
}

/// Extended real limit; serializes as a number or one of `"+inf"`, `"-inf"`, `"unknown"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
    NegInf,
    Unknown,
}

impl ExtReal {
    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::PosInf | ExtReal::NegInf)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PosInf => s.serialize_str("+inf"),
            ExtReal::NegInf => s.serialize_str("-inf"),
            ExtReal::Unknown => s.serialize_str("unknown"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingPlan {
    pub upper: Vec<C>,
    /// Geometric grid of `|x|` on the negative axis, ascending.
    pub neg_abs: Vec<f64>,
}

impl SamplingPlan {
    pub fn with_density(per_decade: usize) -> Self {
        let upper = vec![
            C::new(0.0, 1.0),
            C::new(-1.0, 0.5),
            C::new(2.0, 3.0),
            C::new(0.3, 0.01),
            C::new(-50.0, 20.0),
            C::new(1e3, 10.0),
            C::new(1e-3, 1e-2),
            C::new(-1e-4, 2e-5),
        ];
        SamplingPlan { upper, neg_abs: decade_grid(1e-8, 1e8, per_decade) }
    }

    /// Enough resolution to be trusted for closed-form expressions.
    pub fn standard() -> Self {
        Self::with_density(64)
    }

    /// Coarser negative-axis grid for ODE-backed expressions.
    pub fn coarse() -> Self {
        Self::with_density(8)
    }

    pub fn for_expr(f: &NevanlinnaExpr) -> Self {
        if f.is_numerical() {
            Self::coarse()
        } else {
            Self::standard()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub is_nevanlinna: Tri,
    pub is_stieltjes: Tri,
    pub is_inverse_stieltjes: Tri,
    pub in_sm: Tri,
    pub m_minus_inf: ExtReal,
    pub m_zero_minus: ExtReal,
    pub pole_on_negative_axis: Option<f64>,
    pub gram_min_eig_ratio: f64,
}

const REAL_TOL: f64 = 1e-8;

/// Values on the negative axis ordered by increasing `x` (from `-max` to `-min`).
fn negative_axis_values(f: &NevanlinnaExpr, neg_abs: &[f64]) -> Vec<Result<C>> {
    let xs: Vec<f64> = neg_abs.iter().rev().map(|a| -a).collect();
    sweep::map(&xs, |x| f.evaluate(C::new(*x, 0.0)))
}

/// Extrapolated endpoint value from three samples approaching the endpoint.
/// `grows_up` is the direction in which an increasing function diverges.
fn extrapolate(m: [f64; 3], toward_zero: bool) -> ExtReal {
    let d1 = m[1] - m[0];
    let d2 = m[2] - m[1];
    let scale = 1.0 + m[2].abs();
    if d2.abs() <= 1e-12 * scale {
        return ExtReal::Finite(m[2]);
    }
    let rho = d2 / d1;
    if !rho.is_finite() || rho >= 0.95 {
        // Nevanlinna functions increase on the axis: toward 0- the blow-up is +∞,
        // toward -∞ it is -∞.
        return if (d2 > 0.0) == toward_zero {
            if toward_zero {
                ExtReal::PosInf
            } else {
                ExtReal::NegInf
            }
        } else {
            ExtReal::Unknown
        };
    }
    if (0.0..0.9).contains(&rho) {
        return ExtReal::Finite(m[2] + d2 * rho / (1.0 - rho));
    }
    ExtReal::Unknown
}

/// `(m(-∞), m(0-))` from samples at `|x| = 10^6..10^8` and `10^-6..10^-8`.
pub fn limits_on_negative_axis(f: &NevanlinnaExpr) -> (ExtReal, ExtReal) {
    let sample = |xs: [f64; 3]| -> Option<[f64; 3]> {
        let mut out = [0.0; 3];
        for (o, x) in out.iter_mut().zip(xs) {
            let v = f.evaluate(C::new(-x, 0.0)).ok()?;
            if v.im.abs() > REAL_TOL * (1.0 + v.norm()) {
                return None;
            }
            *o = v.re;
        }
        Some(out)
    };
    let at_inf = sample([1e6, 1e7, 1e8]).map_or(ExtReal::Unknown, |m| extrapolate(m, false));
    let at_zero = sample([1e-6, 1e-7, 1e-8]).map_or(ExtReal::Unknown, |m| extrapolate(m, true));
    (at_inf, at_zero)
}

pub fn classify(f: &NevanlinnaExpr, plan: &SamplingPlan) -> Result<ClassReport> {
    if plan.upper.is_empty() || plan.neg_abs.len() < 8 {
        return Err(Error::InsufficientGrid("classification needs both sample sets".into()));
    }
    let (gmin, gtrace) = rkhs::gram_min_eig(f, &plan.upper)?;
    let ratio = if gtrace > 0.0 { gmin / gtrace } else { 0.0 };
    let im_ok =
        plan.upper.iter().map(|z| f.evaluate(*z)).collect::<Result<Vec<_>>>()?.iter().all(|m| m.im >= -1e-10 * (1.0 + m.norm()));
    let is_nevanlinna = if ratio >= -1e-9 && im_ok {
        Tri::Yes
    } else if ratio < -1e-8 || !im_ok {
        Tri::No
    } else {
        Tri::Inconclusive
    };

    let vals = negative_axis_values(f, &plan.neg_abs);
    let mut real = true;
    let mut resolved = true;
    let mut v = Vec::with_capacity(vals.len());
    let xs: Vec<f64> = plan.neg_abs.iter().rev().map(|a| -a).collect();
    for r in &vals {
        match r {
            Ok(m) => {
                if m.im.abs() > REAL_TOL * (1.0 + m.norm()) {
                    real = false;
                }
                v.push(m.re);
            }
            Err(Error::PoleHit(_)) => v.push(f64::NAN),
            Err(Error::BranchCut(_)) => {
                real = false;
                v.push(f64::NAN);
            }
            Err(e) => return Err(e.clone()),
        }
    }
    // drops in an increasing sequence mark poles; other non-monotone steps are noise
    let mut poles = vec![];
    for k in 0..v.len() - 1 {
        let (a, b) = (v[k], v[k + 1]);
        if a.is_nan() || b.is_nan() {
            poles.push(if a.is_nan() { xs[k] } else { xs[k + 1] });
            continue;
        }
        if b < a {
            let tol = 1e-9 * (1.0 + a.abs().max(b.abs()));
            if a - b > 1e3 * tol {
                poles.push(0.5 * (xs[k] + xs[k + 1]));
            } else if a - b > tol {
                resolved = false;
            }
        }
    }
    poles.dedup();
    let pole = poles.first().copied();

    let (m_minus_inf, m_zero_minus) =
        if pole.is_none() && real { limits_on_negative_axis(f) } else { (ExtReal::Unknown, ExtReal::Unknown) };

    let finite: Vec<f64> = v.iter().cloned().filter(|x| x.is_finite()).collect();
    let vmin = finite.iter().cloned().fold(f64::INFINITY, f64::min);
    let vmax = finite.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sign_tol = 1e-10 * (1.0 + vmax.abs().max(vmin.abs()));
    let sign_class = |ok: bool, bad: bool| -> Tri {
        if !real || pole.is_some() || is_nevanlinna == Tri::No || bad {
            Tri::No
        } else if ok && resolved && is_nevanlinna == Tri::Yes {
            Tri::Yes
        } else {
            Tri::Inconclusive
        }
    };
    let is_stieltjes = sign_class(vmin >= -sign_tol, vmin < -10.0 * sign_tol);
    let is_inverse_stieltjes = sign_class(vmax <= sign_tol, vmax > 10.0 * sign_tol);

    let in_sm = if is_stieltjes == Tri::Yes || is_inverse_stieltjes == Tri::Yes {
        Tri::Yes
    } else if !real || poles.len() > 1 || is_nevanlinna == Tri::No {
        Tri::No
    } else if resolved && is_nevanlinna == Tri::Yes {
        Tri::Yes
    } else {
        Tri::Inconclusive
    };
    if in_sm == Tri::Inconclusive && !resolved {
        return Err(Error::InsufficientGrid("monotonicity on the negative axis not resolved".into()));
    }
    Ok(ClassReport {
        is_nevanlinna,
        is_stieltjes,
        is_inverse_stieltjes,
        in_sm,
        m_minus_inf,
        m_zero_minus,
        pole_on_negative_axis: pole,
        gram_min_eig_ratio: ratio,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ExtensionType {
    Friedrichs,
    Krein,
    Both,
    Neither,
    Indeterminate,
}

/// Friedrichs iff `m(-∞) = -∞`, Kreĭn iff `m(0-) = +∞`.
pub fn extension_type(f: &NevanlinnaExpr) -> Result<ExtensionType> {
    let rep = classify(f, &SamplingPlan::for_expr(f))?;
    if rep.pole_on_negative_axis.is_some() {
        return Err(Error::PoleOnAxis);
    }
    let fr = rep.m_minus_inf == ExtReal::NegInf;
    let kr = rep.m_zero_minus == ExtReal::PosInf;
    if rep.m_minus_inf == ExtReal::Unknown || rep.m_zero_minus == ExtReal::Unknown {
        return Ok(match (fr, kr) {
            (true, _) => ExtensionType::Friedrichs,
            (_, true) => ExtensionType::Krein,
            _ => ExtensionType::Indeterminate,
        });
    }
    Ok(match (fr, kr) {
        (true, true) => ExtensionType::Both,
        (true, false) => ExtensionType::Friedrichs,
        (false, true) => ExtensionType::Krein,
        (false, false) => ExtensionType::Neither,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DenseReport {
    pub verdict: Tri,
    /// log–log slope of `Im m(iy)/y` over `y ∈ [1e2, 1e8]`
    pub ratio_slope: f64,
    /// log–log slope of `y · Im m(iy)`
    pub product_slope: f64,
}

/// Densely-defined test: `Im m(iy)/y → 0` and `y Im m(iy) → ∞`.
pub fn densely_defined_check(f: &NevanlinnaExpr) -> Result<DenseReport> {
    let ys = decade_grid(1e2, 1e8, 4);
    let ims = sweep::map(&ys, |y| f.evaluate(C::new(0.0, *y)).map(|m| m.im));
    let mut lx = vec![];
    let mut lim = vec![];
    for (y, im) in ys.iter().zip(ims) {
        let im = im?;
        if im <= 1e-300 {
            return Ok(DenseReport { verdict: Tri::No, ratio_slope: f64::NAN, product_slope: f64::NAN });
        }
        lx.push(y.ln());
        lim.push(im.ln());
    }
    let (s, _, rms) = linear_fit(&lx, &lim);
    let ratio_slope = s - 1.0;
    let product_slope = s + 1.0;
    let tol = 0.02;
    let verdict = if rms > 0.1 { Tri::Inconclusive } else { Tri::from_bool(ratio_slope < -tol && product_slope > tol) };
    Ok(DenseReport { verdict, ratio_slope, product_slope })
}
