//! Titchmarsh–Weyl coefficients of half-line Sturm–Liouville problems
//! `-(p f')' + q f = z w f` by backward Riccati integration, plus a catalog of
//! closed-form Weyl functions.

use crate::error::{Error, Result};
use crate::mobius::MobiusMap;
use crate::nevanlinna::NevanlinnaExpr;
use crate::ode::{dopri, OdeOptions};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::cell::Cell;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Coefficient {
    Constant {
        value: f64,
    },
    /// `coef · t^exponent`
    PowerLaw {
        coef: f64,
        exponent: f64,
    },
    /// `limit + amplitude · exp(-rate t)`
    Relaxing {
        limit: f64,
        amplitude: f64,
        rate: f64,
    },
    /// Piecewise linear through `(t, values)`, constant outside the table.
    Tabulated {
        t: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Coefficient {
    pub fn constant(value: f64) -> Self {
        Coefficient::Constant { value }
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            Coefficient::Constant { value } => *value,
            Coefficient::PowerLaw { coef, exponent } => {
                if *exponent == 0.0 {
                    *coef
                } else {
                    coef * t.powf(*exponent)
                }
            }
            Coefficient::Relaxing { limit, amplitude, rate } => limit + amplitude * (-rate * t).exp(),
            Coefficient::Tabulated { t: ts, values } => {
                if t <= ts[0] {
                    return values[0];
                }
                let n = ts.len();
                if t >= ts[n - 1] {
                    return values[n - 1];
                }
                let k = ts.partition_point(|&x| x <= t) - 1;
                let f = (t - ts[k]) / (ts[k + 1] - ts[k]);
                values[k] * (1.0 - f) + values[k + 1] * f
            }
        }
    }

    /// `s^e · c(s^k)` evaluated without forming `0 · ∞` at `s = 0` for power laws.
    fn scaled_at(&self, s: f64, k: f64, e: f64) -> f64 {
        match self {
            Coefficient::PowerLaw { coef, exponent } => coef * s.powf(e + k * exponent),
            _ => {
                if e == 0.0 {
                    self.at(s.powf(k))
                } else {
                    s.powf(e) * self.at(s.powf(k))
                }
            }
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if let Coefficient::Tabulated { t, values } = self {
            if t.len() < 2 || t.len() != values.len() || t.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Config(format!("tabulated coefficient {name} is malformed")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Side {
    Plus,
    Minus,
}

/// Boundary triple at the regular endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Triple {
    /// `Γ0 f = (p f')(0)`, `Γ1 f = -f(0)`
    NeumannStyle,
    /// `Γ0 f = f(0)`, `Γ1 f = f'(0)`
    DirichletStyle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    pub t_initial: f64,
    pub t_max: f64,
    pub rtol: f64,
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation { t_initial: 1.0, t_max: 1e9, rtol: 1e-8 }
    }
}

/// A half-line problem. For the minus side the coefficients are given in the
/// mirrored variable `s = -t > 0`; the Weyl function then has the same form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfLineProblem {
    pub side: Side,
    pub p: Coefficient,
    pub q: Coefficient,
    pub w: Coefficient,
    pub triple: Triple,
    #[serde(default)]
    pub truncation: Truncation,
}

impl HalfLineProblem {
    pub fn new(p: Coefficient, q: Coefficient, w: Coefficient, triple: Triple) -> Self {
        HalfLineProblem { side: Side::Plus, p, q, w, triple, truncation: Truncation::default() }
    }

    /// `p = w = 1`, `q = 0`.
    pub fn free(triple: Triple) -> Self {
        Self::new(Coefficient::constant(1.0), Coefficient::constant(0.0), Coefficient::constant(1.0), triple)
    }

    /// `p = t^beta`, `w = t^alpha`, `q = 0`.
    pub fn power_weights(alpha: f64, beta: f64) -> Self {
        Self::new(
            Coefficient::PowerLaw { coef: 1.0, exponent: beta },
            Coefficient::constant(0.0),
            Coefficient::PowerLaw { coef: 1.0, exponent: alpha },
            Triple::NeumannStyle,
        )
    }

    /// Loads `(t, p, q, w)` rows from CSV text with a header line.
    pub fn from_csv(text: &str, triple: Triple) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let (mut ts, mut ps, mut qs, mut ws) = (vec![], vec![], vec![], vec![]);
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Config(e.to_string()))?;
            let get = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Config("short CSV row".into()))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(e.to_string()))
            };
            ts.push(get(0)?);
            ps.push(get(1)?);
            qs.push(get(2)?);
            ws.push(get(3)?);
        }
        let tab = |v: Vec<f64>| Coefficient::Tabulated { t: ts.clone(), values: v };
        let prob = Self::new(tab(ps), tab(qs), tab(ws), triple);
        prob.validate()?;
        Ok(prob)
    }

    pub fn validate(&self) -> Result<()> {
        self.p.validate("p")?;
        self.q.validate("q")?;
        self.w.validate("w")?;
        for t in crate::quad::geomspace(1e-3, 1e3, 25) {
            if !(self.p.at(t) > 0.0) || !(self.w.at(t) > 0.0) {
                return Err(Error::Config(format!("p and w must be positive (t = {t})")));
            }
        }
        Ok(())
    }

    /// Exponent `k` of the substitution `t = s^k` that regularizes `1/p` at 0.
    fn substitution(&self) -> f64 {
        match self.p {
            Coefficient::PowerLaw { exponent, .. } if exponent > 0.0 && exponent < 1.0 => 1.0 / (1.0 - exponent),
            _ => 1.0,
        }
    }
}

fn sqrt_decaying(x: C) -> C {
    let r = x.sqrt();
    if r.re < 0.0 {
        -r
    } else {
        r
    }
}

/// Riccati variable `u = p ψ'/ψ` of the decaying solution at `t_end`, computed by
/// integrating from truncation point `big_t` with a WKB seed.
fn riccati_at(prob: &HalfLineProblem, z: C, big_t: f64, t_end: f64) -> Result<C> {
    let k = prob.substitution();
    let s_hi = big_t.powf(1.0 / k);
    let s_lo = t_end.powf(1.0 / k);
    let p_t = prob.p.at(big_t);
    let qzw = prob.q.at(big_t) - z * prob.w.at(big_t);
    let u0 = -sqrt_decaying(qzw * p_t);
    // inverse mode: v = 1/u
    let inverted = Cell::new(false);
    let rhs = |s: f64, y: &[C; 1]| -> [C; 1] {
        let t = if k == 1.0 { s } else { s.powf(k) };
        let pot = C::new(prob.q.at(t), 0.0) - z * prob.w.at(t);
        // dt/ds = k s^(k-1); the factor s^(k-1)/p(s^k) is formed directly.
        let (jac, jp) =
            if k == 1.0 { (1.0, 1.0 / prob.p.at(t)) } else { (k * s.powf(k - 1.0), k / prob.p.scaled_at(s, k, 1.0 - k)) };
        if inverted.get() {
            [C::new(jp, 0.0) - pot * jac * y[0] * y[0]]
        } else {
            [pot * jac - y[0] * y[0] * jp]
        }
    };
    let post = |_s: f64, y: &mut [C; 1]| {
        if y[0].norm() > 1e8 {
            y[0] = 1.0 / y[0];
            inverted.set(!inverted.get());
        }
    };
    let opts = OdeOptions { rtol: 1e-11, atol: 1e-14, ..Default::default() };
    let y = dopri(rhs, s_hi, s_lo, [u0], opts, post)?;
    let u = if inverted.get() { 1.0 / y[0] } else { y[0] };
    if !u.re.is_finite() || !u.im.is_finite() {
        return Err(Error::RiccatiBlowup("non-finite Riccati value".into()));
    }
    Ok(u)
}

fn m_from_u(prob: &HalfLineProblem, u: C) -> Result<C> {
    match prob.triple {
        Triple::NeumannStyle => {
            if u.norm() == 0.0 {
                return Err(Error::PoleHit("u(0) = 0".into()));
            }
            Ok(-1.0 / u)
        }
        Triple::DirichletStyle => {
            let p0 = prob.p.at(0.0);
            if !(p0 > 0.0 && p0.is_finite()) {
                return Err(Error::Precondition("Dirichlet-style triple needs 0 < p(0) < ∞".into()));
            }
            Ok(u / p0)
        }
    }
}

/// Riccati variable of the decaying solution at `t`, converged in the truncation point.
pub fn decaying_log_derivative(prob: &HalfLineProblem, z: C, t: f64) -> Result<C> {
    if z.im == 0.0 && z.re >= 0.0 {
        return Err(Error::BranchCut(format!("{z}")));
    }
    let tr = prob.truncation;
    let mut big_t = (tr.t_initial * (4.0 / z.norm().sqrt()).min(1.0)).max(t * 2.0).max(1e-6);
    let mut prev = riccati_at(prob, z, big_t, t)?;
    loop {
        big_t *= 2.0;
        if big_t > tr.t_max {
            return Err(Error::NoConvergence(format!("truncation exceeded {} at z = {z}", tr.t_max)));
        }
        let cur = riccati_at(prob, z, big_t, t)?;
        if (cur - prev).norm() <= tr.rtol * cur.norm() {
            return Ok(cur);
        }
        prev = cur;
    }
}

/// Titchmarsh–Weyl coefficient of `prob` at `z` (non-real, or negative real).
pub fn weyl_function(prob: &HalfLineProblem, z: C) -> Result<C> {
    let u = decaying_log_derivative(prob, z, 0.0)?;
    m_from_u(prob, u)
}

/// Closed-form Weyl function with the ODE problem that produces it, if any.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SLCatalogEntry {
    pub id: String,
    pub closed_form: NevanlinnaExpr,
    pub note: String,
    pub problem: Option<HalfLineProblem>,
}

/// `(ν, C)` of the power-weight problem `p = t^β`, `w = t^α` with the Neumann-style triple.
pub fn power_weight_constants(alpha: f64, beta: f64) -> (f64, f64) {
    let nu = (1.0 - beta) / (alpha - beta + 2.0);
    let k = (alpha - beta + 2.0) / 2.0;
    let c = (2.0 * k).powf(2.0 * nu) * gamma(1.0 + nu) / ((1.0 - beta) * gamma(1.0 - nu));
    (nu, c)
}

fn parse_args(id: &str, prefix: &str) -> Option<Vec<f64>> {
    let rest = id.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
    rest.split(',').map(|s| s.trim().parse::<f64>().ok()).collect()
}

pub fn closed_form(id: &str) -> Result<SLCatalogEntry> {
    let entry =
        |closed_form, note: &str, problem| SLCatalogEntry { id: id.to_string(), closed_form, note: note.to_string(), problem };
    match id {
        "free-neumann" => Ok(entry(
            NevanlinnaExpr::power(1.0, -0.5),
            "p = w = 1, q = 0, Neumann-style triple",
            Some(HalfLineProblem::free(Triple::NeumannStyle)),
        )),
        "free-dirichlet" => Ok(entry(
            NevanlinnaExpr::power(-1.0, 0.5),
            "p = w = 1, q = 0, Dirichlet-style triple",
            Some(HalfLineProblem::free(Triple::DirichletStyle)),
        )),
        "singular-at-zero" => Ok(entry(
            NevanlinnaExpr::sum(NevanlinnaExpr::power(1.0, -0.5), NevanlinnaExpr::neg_reciprocal()),
            "1/sqrt(-z) - 1/z; zero is a singular critical point of the mirrored coupling",
            None,
        )),
        "quarter-power" => Ok(entry(
            NevanlinnaExpr::power(-std::f64::consts::SQRT_2, 0.25),
            "-sqrt(2) (-z)^(1/4), Weyl function of a fourth-order half-line problem",
            None,
        )),
        _ => {
            if let Some(v) = parse_args(id, "power-weights") {
                if v.len() != 2 || !(v[0] > -1.0) || !(v[1] < 1.0) {
                    return Err(Error::UnknownId(id.to_string()));
                }
                let (nu, c) = power_weight_constants(v[0], v[1]);
                return Ok(entry(
                    NevanlinnaExpr::power(c, -nu),
                    "p = t^beta, w = t^alpha, q = 0, Neumann-style triple",
                    Some(HalfLineProblem::power_weights(v[0], v[1])),
                ));
            }
            if let Some(v) = parse_args(id, "short-range") {
                if v.len() != 2 || !(v[0] > 0.0) || !(v[1] > 0.0) {
                    return Err(Error::UnknownId(id.to_string()));
                }
                return Ok(entry(
                    short_range_model(v[0], v[1]),
                    "a/(b + sqrt(-z)): low-energy model of a short-range potential (asymptotic stand-in)",
                    None,
                ));
            }
            Err(Error::UnknownId(id.to_string()))
        }
    }
}

/// `a / (b + sqrt(-z))` written as a Möbius image of `-sqrt(-z)`.
pub fn short_range_model(a: f64, b: f64) -> NevanlinnaExpr {
    let mu2 = MobiusMap::normalize(0.0, a, -1.0, b).expect("a > 0");
    NevanlinnaExpr::mobius(MobiusMap::identity(), mu2, NevanlinnaExpr::power(-1.0, 0.5))
}

/// Converts between the two supported triples (the transpose `m -> -1/m`; it is
/// its own inverse up to the sign of the matrix).
pub fn triple_convert(m: NevanlinnaExpr, from: Triple, to: Triple) -> NevanlinnaExpr {
    if from == to {
        return m;
    }
    NevanlinnaExpr::mobius(MobiusMap::identity(), MobiusMap::transpose(), m)
}
