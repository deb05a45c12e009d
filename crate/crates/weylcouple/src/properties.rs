//! D- and B-property certificates on the imaginary axis, and the rules that
//! imply them from class membership.

use crate::asymptotics::{d_limit_predict, fit_power_law, ClassMembership, Regime};
use crate::error::{Error, Result};
use crate::nevanlinna::{explicit_stieltjes, ClassReport, ExtReal, NevanlinnaExpr, SpectralMeasure, Tri};
use crate::quad::{decade_grid, linear_fit, log_gauss_rule};
use crate::sweep;
use num_complex::Complex64 as C;
use serde::Serialize;
use std::collections::BTreeMap;

pub const SLOPE_TOL: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Property {
    DInf,
    DZero,
    BInf,
    BZero,
}

impl Property {
    pub fn regime(self) -> Regime {
        match self {
            Property::DInf | Property::BInf => Regime::AtInf,
            Property::DZero | Property::BZero => Regime::AtZero,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Property::DInf => "d-inf",
            Property::DZero => "d-zero",
            Property::BInf => "b-inf",
            Property::BZero => "b-zero",
        }
    }

    pub fn d(regime: Regime) -> Property {
        match regime {
            Regime::AtInf => Property::DInf,
            Regime::AtZero => Property::DZero,
        }
    }

    pub fn b(regime: Regime) -> Property {
        match regime {
            Regime::AtInf => Property::BInf,
            Regime::AtZero => Property::BZero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CertVerdict {
    Bounded,
    Divergent,
    Inconclusive,
    /// `m₊(iy) + m₋(-iy)` vanished on the grid: the resolvent set may be empty.
    DenominatorVanishes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE", tag = "kind", content = "rule")]
pub enum Method {
    GridRatio,
    SchurTest,
    DiscretizedNorm,
    ImpliedBy(String),
}

/// Which function(s) a certificate speaks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Subject {
    Pair,
    MPlus,
    MMinus,
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCertificate {
    pub id: String,
    pub property: Property,
    pub subject: Subject,
    pub verdict: CertVerdict,
    pub sup_value: f64,
    /// log–log slope of the monitored quantity over the last two decades toward the endpoint
    pub tail_slope: f64,
    pub fit_residual: f64,
    pub grid: String,
    pub method: Method,
    pub constants: BTreeMap<String, f64>,
    pub note: Option<String>,
}

impl PropertyCertificate {
    fn new(property: Property, subject: Subject, method: Method) -> Self {
        let id = format!(
            "{}:{}:{}",
            property.tag(),
            match subject {
                Subject::Pair => "pair",
                Subject::MPlus => "m_plus",
                Subject::MMinus => "m_minus",
                Subject::Single => "single",
            },
            match &method {
                Method::GridRatio => "grid".to_string(),
                Method::SchurTest => "schur".to_string(),
                Method::DiscretizedNorm => "norm".to_string(),
                Method::ImpliedBy(r) => r.clone(),
            }
        );
        PropertyCertificate {
            id,
            property,
            subject,
            verdict: CertVerdict::Inconclusive,
            sup_value: f64::NAN,
            tail_slope: f64::NAN,
            fit_residual: f64::NAN,
            grid: String::new(),
            method,
            constants: BTreeMap::new(),
            note: None,
        }
    }

    pub fn bounded(&self) -> bool {
        self.verdict == CertVerdict::Bounded
    }

    pub fn with_subject(mut self, subject: Subject) -> Self {
        let head = self.id.splitn(3, ':').collect::<Vec<_>>();
        let s = match subject {
            Subject::Pair => "pair",
            Subject::MPlus => "m_plus",
            Subject::MMinus => "m_minus",
            Subject::Single => "single",
        };
        self.id = format!("{}:{}:{}", head[0], s, head.get(2).unwrap_or(&""));
        self.subject = subject;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DOptions {
    pub per_decade: usize,
    /// Sample `m(-iy)` in place of `m(iy)` (the ratio is unchanged by symmetry).
    pub conjugate: bool,
}

impl Default for DOptions {
    fn default() -> Self {
        DOptions { per_decade: 64, conjugate: false }
    }
}

pub fn d_window(regime: Regime) -> (f64, f64) {
    match regime {
        Regime::AtInf => (1.0, 1e8),
        Regime::AtZero => (1e-8, 1.0),
    }
}

/// `(numerator, |denominator|)` of the D-ratio at `y`.
pub fn d_parts(m_plus: &NevanlinnaExpr, m_minus: &NevanlinnaExpr, y: f64, conjugate: bool) -> Result<(f64, f64)> {
    let (s, t) = if conjugate { (-1.0, 1.0) } else { (1.0, -1.0) };
    let p = m_plus.eval(0.0, s * y)?;
    let mm = m_minus.eval(0.0, s * y)?;
    let md = m_minus.eval(0.0, t * y)?;
    Ok((s * (p.im + mm.im), (p + md).norm()))
}

pub fn d_ratio(m_plus: &NevanlinnaExpr, m_minus: &NevanlinnaExpr, y: f64) -> Result<f64> {
    let (n, d) = d_parts(m_plus, m_minus, y, false)?;
    Ok(n / d)
}

/// Extrapolated endpoint value of a sequence sampled at three successive decades.
pub fn extrapolate_limit(v: [f64; 3]) -> ExtReal {
    let d1 = v[1] - v[0];
    let d2 = v[2] - v[1];
    if d2.abs() <= 1e-12 * (1.0 + v[2].abs()) {
        return ExtReal::Finite(v[2]);
    }
    let rho = d2 / d1;
    if !rho.is_finite() || rho >= 0.95 {
        return if d2 > 0.0 { ExtReal::PosInf } else { ExtReal::Unknown };
    }
    if rho.abs() < 0.9 {
        return ExtReal::Finite(v[2] + d2 * rho / (1.0 - rho));
    }
    ExtReal::Unknown
}

/// Empirical limit of the D-ratio from `y = 1e6, 1e7, 1e8` (or `1e-6, 1e-7, 1e-8`).
pub fn d_empirical_limit(m_plus: &NevanlinnaExpr, m_minus: &NevanlinnaExpr, regime: Regime) -> Result<ExtReal> {
    let ys = match regime {
        Regime::AtInf => [1e6, 1e7, 1e8],
        Regime::AtZero => [1e-6, 1e-7, 1e-8],
    };
    let mut v = [0.0; 3];
    for (o, y) in v.iter_mut().zip(ys) {
        *o = d_ratio(m_plus, m_minus, y)?;
    }
    Ok(extrapolate_limit(v))
}

/// Grid certificate for the D-property of the pair `(m₊, m₋)`.
pub fn d_certify(
    m_plus: &NevanlinnaExpr,
    m_minus: &NevanlinnaExpr,
    regime: Regime,
    opts: DOptions,
) -> Result<PropertyCertificate> {
    let (lo, hi) = d_window(regime);
    let per_decade = if m_plus.is_numerical() || m_minus.is_numerical() { opts.per_decade.min(8) } else { opts.per_decade };
    let ys = decade_grid(lo, hi, per_decade);
    let parts = sweep::map(&ys, |y| d_parts(m_plus, m_minus, *y, opts.conjugate));
    let mut cert = PropertyCertificate::new(Property::d(regime), Subject::Pair, Method::GridRatio);
    cert.grid = format!("y in [{lo:e}, {hi:e}], {per_decade} nodes/decade, geometric");
    let mut ratios = Vec::with_capacity(ys.len());
    for (y, p) in ys.iter().zip(parts) {
        let (n, d) = p?;
        if d < 1e-14 * n.abs() || d == 0.0 {
            cert.verdict = CertVerdict::DenominatorVanishes;
            cert.note = Some(format!("|m+(iy) + m-(-iy)| = {d:e} at y = {y:e}"));
            return Ok(cert);
        }
        ratios.push(n / d);
    }
    cert.sup_value = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // last two decades toward the endpoint
    let tail: Vec<usize> = match regime {
        Regime::AtInf => (0..ys.len()).filter(|&k| ys[k] >= hi / 100.0).collect(),
        Regime::AtZero => (0..ys.len()).filter(|&k| ys[k] <= lo * 100.0).collect(),
    };
    let lx: Vec<f64> = tail.iter().map(|&k| ys[k].ln()).collect();
    let ly: Vec<f64> = tail.iter().map(|&k| ratios[k].max(1e-300).ln()).collect();
    let (slope, _, rms) = linear_fit(&lx, &ly);
    cert.tail_slope = slope;
    cert.fit_residual = rms;
    let growth = match regime {
        Regime::AtInf => slope,
        Regime::AtZero => -slope,
    };
    cert.verdict = if growth < SLOPE_TOL {
        CertVerdict::Bounded
    } else if rms <= 0.1 {
        CertVerdict::Divergent
    } else {
        CertVerdict::Inconclusive
    };
    if cert.bounded() {
        cert.constants.insert("C1".into(), cert.sup_value);
    }
    let ends = match regime {
        Regime::AtInf => [ratios.len() - 1 - 2 * per_decade, ratios.len() - 1 - per_decade, ratios.len() - 1],
        Regime::AtZero => [2 * per_decade, per_decade, 0],
    };
    if let ExtReal::Finite(l) = extrapolate_limit([ratios[ends[0]], ratios[ends[1]], ratios[ends[2]]]) {
        cert.constants.insert("limit".into(), l);
    }
    Ok(cert)
}

/// A Stieltjes function in the same μ₂-orbit as `m` (itself or `-1/m`) with its
/// measure. For the zero regime the reflection `-m(1/z)` is taken first.
pub fn stieltjes_representative(m: &NevanlinnaExpr, regime: Regime) -> Result<(NevanlinnaExpr, f64, SpectralMeasure)> {
    let base = match regime {
        Regime::AtInf => m.clone(),
        Regime::AtZero => NevanlinnaExpr::reflect(m.clone()),
    };
    if let Ok((g, s)) = explicit_stieltjes(&base) {
        return Ok((base, g, s));
    }
    let tr = NevanlinnaExpr::transpose(base);
    let (g, s) = explicit_stieltjes(&tr)?;
    Ok((tr, g, s))
}

/// Decay exponent `α` of `g(z) ~ C/(-z)^α` at ∞ after removing a constant.
fn decay_exponent(g: &NevanlinnaExpr) -> Result<f64> {
    let fit = fit_power_law(g, Regime::AtInf)?;
    Ok(-fit.alpha1.unwrap_or(fit.alpha0))
}

fn inv_im(g: &NevanlinnaExpr, y: f64) -> Result<f64> {
    let im = g.eval(0.0, y)?.im;
    if im < 1e-300 {
        return Err(Error::Precondition(format!("Im m(iy) degenerate at y = {y:e}")));
    }
    Ok(1.0 / im)
}

/// Schur-test certificate for `H f(y) = ∫ f(x) dσ(x)/(x + y)` from `L²_σ` into
/// `L²((1, ∞), dy / Im m(iy))` with weights `q₁ = (1+x)^-β` and
/// `q₂(y) = ∫ q₁ dσ/(x + y)`. The zero regime goes through `-m(1/z)`.
/// The test is only sufficient, so the verdict is BOUNDED or INCONCLUSIVE.
pub fn b_certify_schur(m: &NevanlinnaExpr, regime: Regime, beta: Option<f64>) -> Result<PropertyCertificate> {
    let (g, _gamma, sigma) = stieltjes_representative(m, regime)?;
    let alpha = decay_exponent(&g).unwrap_or(f64::NAN);
    let beta = match beta {
        Some(b) => b,
        None if alpha > 0.0 && alpha < 1.0 => (1.0 - alpha) / 2.0,
        None => return Err(Error::Precondition(format!("no Schur weight for decay exponent {alpha}"))),
    };
    if !(beta > 0.0) || (alpha.is_finite() && alpha + beta >= 1.0) {
        return Err(Error::Precondition(format!("Schur weight needs β > 0 and α + β < 1 (α = {alpha}, β = {beta})")));
    }
    let ynodes = log_gauss_rule(1.0, 1e20, 8);
    let q2w: Vec<Result<(f64, f64, f64)>> = sweep::map(&ynodes, |(y, wt)| {
        let q2 = sigma.integrate(|x| C::new((1.0 + x).powf(-beta) / (x + y), 0.0), 1.0 + beta, &[*y])?.re;
        Ok((*y, q2 * inv_im(&g, *y)?, *wt))
    });
    let q2w = q2w.into_iter().collect::<Result<Vec<_>>>()?;
    let mut xs = decade_grid(1e-10, 1e10, 4);
    xs.extend(sigma.atoms.iter().filter(|a| a.t > 0.0).map(|a| a.t));
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let has_zero_atom = sigma.atoms.iter().any(|a| a.t == 0.0);
    let n = q2w.len();
    let schur = |x: f64| -> f64 {
        let body: f64 = q2w.iter().map(|(y, v, wt)| v * wt / (x + y)).sum();
        // tail beyond the last node from the local power law of the integrand
        let (y1, v1, _) = q2w[n - 9];
        let (y2, v2, _) = q2w[n - 1];
        let f1 = v1 / (x + y1);
        let f2 = v2 / (x + y2);
        let s = (f1 / f2).ln() / (y2 / y1).ln();
        let tail = if s > 1.0 { f2 * y2 / (s - 1.0) } else { f64::INFINITY };
        (1.0 + x).powf(beta) * (body + tail)
    };
    let mut cert = PropertyCertificate::new(Property::b(regime), Subject::Single, Method::SchurTest);
    cert.grid = format!("x in [1e-10, 1e10] at 4/decade plus atoms; y-rule 8 nodes/decade on [1, 1e20]; beta = {beta}");
    let mut vals: Vec<f64> = xs.iter().map(|x| schur(*x)).collect();
    if has_zero_atom {
        vals.push(schur(0.0));
    }
    let sup = vals.iter().cloned().fold(0.0, f64::max);
    let k = xs.iter().position(|x| *x >= 1e8).unwrap_or(xs.len() - 9);
    let lx: Vec<f64> = xs[k..].iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = vals[k..xs.len()].iter().map(|v| v.ln()).collect();
    let (slope, _, rms) = linear_fit(&lx, &ly);
    cert.sup_value = sup;
    cert.tail_slope = slope;
    cert.fit_residual = rms;
    cert.constants.insert("beta".into(), beta);
    if alpha.is_finite() {
        cert.constants.insert("alpha".into(), alpha);
    }
    if sup.is_finite() && slope <= SLOPE_TOL {
        cert.verdict = CertVerdict::Bounded;
        cert.constants.insert("C2".into(), sup.sqrt());
    }
    Ok(cert)
}

fn b_windows(regime: Regime) -> Vec<(f64, f64)> {
    match regime {
        Regime::AtInf => vec![(1.0, 1e2), (1.0, 1e4), (1.0, 1e6), (1.0, 1e8)],
        Regime::AtZero => vec![(1e-2, 1.0), (1e-4, 1.0), (1e-6, 1.0), (1e-8, 1.0)],
    }
}

/// `σ`-weighted nodes `(x_j, mass_j)` for the discretized operator.
fn sigma_nodes(sigma: &SpectralMeasure, per_decade: usize) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = sigma.atoms.iter().map(|a| (a.t, a.weight)).collect();
    for (x, w) in log_gauss_rule(1e-12, 1e12, per_decade) {
        let d = sigma.density(x);
        if d > 0.0 {
            out.push((x, w * d));
        }
    }
    out
}

/// Largest singular value of `A[k][j] = sqrt(ω_k w_k) sqrt(s_j)/(x_j + y_k)`.
pub fn operator_norm(xs: &[(f64, f64)], ys: &[(f64, f64)]) -> f64 {
    let a: Vec<Vec<f64>> = ys.iter().map(|(y, wy)| xs.iter().map(|(x, sx)| wy.sqrt() * sx.sqrt() / (x + y)).collect()).collect();
    let nx = xs.len();
    let mut v = vec![1.0 / (nx as f64).sqrt(); nx];
    let mut lambda = 0.0;
    for _ in 0..500 {
        let av: Vec<f64> = a.iter().map(|row| row.iter().zip(&v).map(|(r, x)| r * x).sum()).collect();
        let mut atav = vec![0.0; nx];
        for (row, s) in a.iter().zip(&av) {
            for (o, r) in atav.iter_mut().zip(row) {
                *o += r * s;
            }
        }
        let norm = atav.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        for (o, x) in v.iter_mut().zip(&atav) {
            *o = x / norm;
        }
        let done = (norm - lambda).abs() <= 1e-12 * norm;
        lambda = norm;
        if done {
            break;
        }
    }
    lambda.sqrt()
}

/// Discretized operator norm of `H` on a ladder of widening windows.
pub fn b_certify_discretized(m: &NevanlinnaExpr, regime: Regime, n: usize) -> Result<PropertyCertificate> {
    let (g, _gamma, sigma) = match explicit_stieltjes(m) {
        Ok((gm, s)) => (m.clone(), gm, s),
        Err(_) => {
            let tr = NevanlinnaExpr::transpose(m.clone());
            let (gm, s) = explicit_stieltjes(&tr)?;
            (tr, gm, s)
        }
    };
    let xs = sigma_nodes(&sigma, 8);
    let mut norms = vec![];
    for (lo, hi) in b_windows(regime) {
        let decades = (hi / lo).log10().max(1.0);
        let per = ((n as f64 / decades).ceil() as usize).max(8);
        let rule = log_gauss_rule(lo, hi, per);
        let ys = rule.iter().map(|(y, w)| Ok((*y, w * inv_im(&g, *y)?))).collect::<Result<Vec<_>>>()?;
        norms.push(operator_norm(&xs, &ys));
    }
    // truncation deficits of the windowed norms decay like 1/L in the window
    // length L (decades), so extrapolate pairwise in 1/L and watch the estimates
    let k = norms.len();
    let len: Vec<f64> = b_windows(regime).iter().map(|(lo, hi)| (hi / lo).log10()).collect();
    let est: Vec<f64> = (1..k).map(|i| (len[i] * norms[i] - len[i - 1] * norms[i - 1]) / (len[i] - len[i - 1])).collect();
    let e = est.len();
    let d1 = est[e - 2] - est[e - 3];
    let d2 = est[e - 1] - est[e - 2];
    let limit = est[e - 1].max(norms[k - 1]);
    let mut cert = PropertyCertificate::new(Property::b(regime), Subject::Single, Method::DiscretizedNorm);
    cert.grid = format!("window ladder {:?}, ~{n} y-nodes per window", b_windows(regime));
    cert.sup_value = limit;
    cert.tail_slope = d2 / limit;
    cert.fit_residual = d1 / limit;
    for (i, v) in norms.iter().enumerate() {
        cert.constants.insert(format!("norm_{i}"), *v);
    }
    let ratio = d2 / d1;
    cert.verdict = if d2.abs() <= 0.05 * limit && ratio < 0.7 {
        CertVerdict::Bounded
    } else if d2 > 0.05 * limit && ratio >= 0.7 {
        CertVerdict::Divergent
    } else {
        CertVerdict::Inconclusive
    };
    if cert.bounded() {
        cert.constants.insert("C2".into(), limit);
    }
    Ok(cert)
}

/// Inputs for the implication rules on one side of the pair.
#[derive(Debug, Clone)]
pub struct SideFacts<'a> {
    pub class: &'a ClassReport,
    pub membership: &'a ClassMembership,
    /// Single-function D certificates `(m, m)` at ∞ and 0, if computed.
    pub single_d: &'a [PropertyCertificate],
}

fn implied(property: Property, subject: Subject, rule: &str, note: String) -> PropertyCertificate {
    let mut c = PropertyCertificate::new(property, subject, Method::ImpliedBy(rule.into()));
    c.verdict = CertVerdict::Bounded;
    c.note = Some(note);
    c
}

/// Certificates implied by class membership and single-function D-properties.
pub fn derive_properties(plus: &SideFacts, minus: &SideFacts) -> Vec<PropertyCertificate> {
    let mut out = vec![];
    for (side, subj) in [(plus, Subject::MPlus), (minus, Subject::MMinus)] {
        if side.membership.in_a_inf.is_yes() {
            out.push(implied(Property::BInf, subj, "a-inf-implies-b-inf", "asymptotic class at infinity".into()));
        }
        if side.membership.in_a_zero.is_yes() {
            out.push(implied(Property::BZero, subj, "a-zero-implies-b-zero", "asymptotic class at zero".into()));
        }
        if side.class.is_stieltjes.is_yes() {
            for c in side.single_d.iter().filter(|c| c.bounded()) {
                let p = match c.property {
                    Property::DInf => Property::BInf,
                    _ => Property::BZero,
                };
                out.push(implied(p, subj, "stieltjes-d-implies-b", format!("from {}", c.id)));
            }
        }
    }
    if plus.class.is_stieltjes.is_yes() && minus.class.is_stieltjes.is_yes() {
        for side in [plus, minus] {
            for c in side.single_d.iter().filter(|c| c.bounded()) {
                if !out.iter().any(|o| o.property == c.property && o.subject == Subject::Pair) {
                    out.push(implied(c.property, Subject::Pair, "stieltjes-d-transfer", format!("from {}", c.id)));
                }
            }
        }
    }
    for (regime, a, b) in [
        (Regime::AtInf, plus.membership.in_a_inf, minus.membership.in_a_inf),
        (Regime::AtZero, plus.membership.in_a_zero, minus.membership.in_a_zero),
    ] {
        if !(a.is_yes() && b.is_yes()) {
            continue;
        }
        let (fp, fm) = match regime {
            Regime::AtInf => (&plus.membership.fit_inf, &minus.membership.fit_inf),
            Regime::AtZero => (&plus.membership.fit_zero, &minus.membership.fit_zero),
        };
        let mut c =
            implied(Property::d(regime), Subject::Pair, "asymptotic-d-limit", "both functions in the asymptotic class".into());
        if let (Some(fp), Some(fm)) = (fp, fm) {
            if let Ok(ExtReal::Finite(l)) = d_limit_predict(fp, fm) {
                c.constants.insert("predicted_limit".into(), l);
            }
        }
        out.retain(|o| !(o.property == c.property && o.subject == Subject::Pair));
        out.push(c);
    }
    out
}

/// Summary view used by the verdict engine.
pub fn has_bounded(certs: &[PropertyCertificate], property: Property, subject: Subject) -> bool {
    certs.iter().any(|c| c.property == property && c.subject == subject && c.bounded())
}

pub fn pair_verdict(certs: &[PropertyCertificate], property: Property) -> Tri {
    let pair: Vec<&PropertyCertificate> = certs.iter().filter(|c| c.property == property && c.subject == Subject::Pair).collect();
    let div = pair.iter().any(|c| c.verdict == CertVerdict::Divergent);
    let bnd = pair.iter().any(|c| c.bounded());
    match (bnd, div) {
        (true, false) => Tri::Yes,
        (false, true) => Tri::No,
        _ => Tri::Inconclusive,
    }
}
