//! The coupled operator through its pair of Weyl functions: the resolvent
//! denominator, nonnegativity tests, resolvent solves for Sturm–Liouville
//! sides, boundary-condition classification and the regularity verdict.

use crate::asymptotics::ClassMembership;
use crate::error::{Error, Result};
use crate::nevanlinna::{
    classify, extension_type, limits_on_negative_axis, ClassReport, ExtReal, ExtensionType, NevanlinnaExpr, SamplingPlan, Tri,
};
use crate::ode::rk4_grid;
use crate::properties::{has_bounded, pair_verdict, CertVerdict, Property, PropertyCertificate, Subject};
use crate::sl_weyl::{decaying_log_derivative, HalfLineProblem, Triple};
use crate::sweep;
use nalgebra::{Matrix2, SMatrix};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum KernelCondition {
    #[serde(rename = "KER_EQUAL_KER_SQ_TRUE")]
    True,
    #[serde(rename = "FALSE")]
    False,
    #[default]
    #[serde(rename = "UNKNOWN")]
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingModel {
    pub m_plus: NevanlinnaExpr,
    pub m_minus: NevanlinnaExpr,
    #[serde(default)]
    pub kernel_condition: KernelCondition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sl_problem_plus: Option<HalfLineProblem>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sl_problem_minus: Option<HalfLineProblem>,
    #[serde(default)]
    pub label: String,
}

impl CouplingModel {
    pub fn new(m_plus: NevanlinnaExpr, m_minus: NevanlinnaExpr, kernel_condition: KernelCondition) -> Self {
        CouplingModel { m_plus, m_minus, kernel_condition, sl_problem_plus: None, sl_problem_minus: None, label: String::new() }
    }
}

/// `m₊(z) + m₋(-z)`.
pub fn denominator(model: &CouplingModel, z: C) -> Result<C> {
    Ok(model.m_plus.evaluate(z)? + NevanlinnaExpr::flip(model.m_minus.clone()).evaluate(z)?)
}

/// Looks for a vanishing denominator on a set of non-real probes.
pub fn probe_denominator(model: &CouplingModel, probes: &[C]) -> Result<Option<C>> {
    let vals = sweep::map(probes, |z| denominator(model, *z).map(|d| (d, *z)));
    for v in vals {
        let (d, z) = v?;
        let scale = model.m_plus.evaluate(z)?.norm() + 1.0;
        if d.norm() <= 1e-12 * scale {
            return Ok(Some(z));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Nonnegativity {
    Nonnegative,
    NotNonnegative,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonnegReport {
    pub verdict: Nonnegativity,
    /// Routes that certified nonnegativity: `zero-free-sum`, `krein-extension`, `friedrichs-extension`.
    pub routes: Vec<String>,
    pub zero_of_sum: Option<f64>,
    pub sum_limit_minus_inf: ExtReal,
    pub sum_limit_zero_minus: ExtReal,
    pub plus_extension: Option<ExtensionType>,
    pub evidence: String,
}

/// Nonnegativity of the coupled operator from `m₊(x) + m₋(x)` on the negative axis.
pub fn nonnegativity(model: &CouplingModel) -> Result<NonnegReport> {
    let sum = NevanlinnaExpr::sum(model.m_plus.clone(), model.m_minus.clone());
    let plan = SamplingPlan::for_expr(&sum);
    let xs: Vec<f64> = plan.neg_abs.iter().rev().map(|a| -a).collect();
    let vals = sweep::map(&xs, |x| sum.evaluate(C::new(*x, 0.0)));
    let mut v = Vec::with_capacity(xs.len());
    let mut real = true;
    for r in vals {
        match r {
            Ok(s) => {
                if s.im.abs() > 1e-8 * (1.0 + s.norm()) {
                    real = false;
                }
                v.push(s.re);
            }
            Err(Error::PoleHit(_)) => v.push(f64::NAN),
            Err(e) => return Err(e),
        }
    }
    let (lim_inf, lim_zero) = limits_on_negative_axis(&sum);
    let mut zero = None;
    let mut pole = false;
    let mut near_zero = false;
    for k in 0..v.len() - 1 {
        let (a, b) = (v[k], v[k + 1]);
        if a.is_nan() || b.is_nan() {
            pole = true;
            continue;
        }
        if a < 0.0 && b >= 0.0 {
            zero = Some(0.5 * (xs[k] + xs[k + 1]));
        } else if a > 0.0 && b < 0.0 {
            pole = true;
        }
        if a.abs() <= 1e-12 * (1.0 + b.abs()) {
            near_zero = true;
        }
    }
    // a sign change beyond the grid shows up in the extrapolated limits
    let first = v[0];
    let last = v[v.len() - 1];
    let scale = v.iter().cloned().filter(|x| x.is_finite()).fold(0.0, |a: f64, b| a.max(b.abs()));
    let slack = 1e-5 * (1.0 + scale);
    if zero.is_none() {
        if let ExtReal::Finite(l) = lim_inf {
            if first > 0.0 && l < -slack {
                zero = Some(-1e8);
            }
        }
        if let ExtReal::Finite(l) = lim_zero {
            if last < 0.0 && l > slack {
                zero = Some(-1e-8);
            }
        }
    }
    let plus_ext = extension_type(&model.m_plus).ok();
    let mut routes = vec![];
    if real && !pole && zero.is_none() && !near_zero {
        routes.push("zero-free-sum".to_string());
    }
    let minus_ok = classify(&model.m_minus, &SamplingPlan::for_expr(&model.m_minus))
        .map(|r| r.pole_on_negative_axis.is_none())
        .unwrap_or(false);
    let ge0 = |l: ExtReal| match l {
        ExtReal::Finite(v) => v >= -slack,
        ExtReal::PosInf => true,
        _ => false,
    };
    let le0 = |l: ExtReal| match l {
        ExtReal::Finite(v) => v <= slack,
        ExtReal::NegInf => true,
        _ => false,
    };
    if matches!(plus_ext, Some(ExtensionType::Krein | ExtensionType::Both)) && minus_ok && ge0(lim_inf) {
        routes.push("krein-extension".to_string());
    }
    if matches!(plus_ext, Some(ExtensionType::Friedrichs | ExtensionType::Both)) && minus_ok && le0(lim_zero) {
        routes.push("friedrichs-extension".to_string());
    }
    let verdict = if zero.is_some() && real {
        Nonnegativity::NotNonnegative
    } else if !routes.is_empty() {
        Nonnegativity::Nonnegative
    } else {
        Nonnegativity::Inconclusive
    };
    let evidence = format!(
        "m+(x)+m-(x) on {} nodes over [-1e8, -1e-8]: min {:.6e}, max {:.6e}",
        xs.len(),
        v.iter().cloned().filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min),
        v.iter().cloned().filter(|x| x.is_finite()).fold(f64::NEG_INFINITY, f64::max)
    );
    Ok(NonnegReport {
        verdict,
        routes,
        zero_of_sum: zero,
        sum_limit_minus_inf: lim_inf,
        sum_limit_zero_minus: lim_zero,
        plus_extension: plus_ext,
        evidence,
    })
}

// ---------------------------------------------------------------------------
// Resolvent solves

/// Right-hand side on a half-line with known jump locations.
pub struct Rhs<'a> {
    pub f: &'a (dyn Fn(f64) -> C + Sync),
    pub breaks: Vec<f64>,
}

/// Solution of a half-line problem sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSolution {
    pub t: Vec<f64>,
    pub f: Vec<C>,
    /// `p f'` in the side's own coordinate
    pub pf: Vec<C>,
}

struct Pieces {
    particular: HalfSolution,
    psi: Vec<C>,
    ppsi: Vec<C>,
    /// Weyl value `-ψ(0)` with `(pψ')(0) = 1`
    m: C,
}

pub fn uniform_grid(len: f64, step: f64) -> Vec<f64> {
    let n = (len / step).round() as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}

fn check_regular_start(prob: &HalfLineProblem) -> Result<()> {
    let p0 = prob.p.at(0.0);
    if !(p0 > 0.0 && p0.is_finite()) || prob.triple != Triple::NeumannStyle {
        return Err(Error::Precondition("resolvent solve needs 0 < p(0) < ∞ and the Neumann-style triple".into()));
    }
    Ok(())
}

/// `-(p f')' + (q - ζ w) f = w·rhs` on the grid with `-f(0) + M (p f')(0) = 0`
/// and decay at infinity, by variation of parameters.
fn solve_pieces(prob: &HalfLineProblem, zeta: C, m_bc: C, rhs: &Rhs, grid: &[f64]) -> Result<Pieces> {
    check_regular_start(prob)?;
    let nudge = |t: f64, side: i8| t + side as f64 * 1e-9 * (1.0 + t.abs());
    let deriv = |t: f64, side: i8, y: &[C; 3], sign: f64| -> [C; 3] {
        let s = nudge(t, side);
        let (p, q, w) = (prob.p.at(s), prob.q.at(s), prob.w.at(s));
        [y[1] / p, (q - zeta * w) * y[0], y[0] * w * (rhs.f)(s) * sign]
    };
    let chi = rk4_grid(|t, s, y| deriv(t, s, y, 1.0), grid, [m_bc, C::new(1.0, 0.0), C::new(0.0, 0.0)]);
    let l = *grid.last().unwrap();
    let u = decaying_log_derivative(prob, zeta, l)?;
    let rev: Vec<f64> = grid.iter().rev().cloned().collect();
    let mut psi = rk4_grid(|t, s, y| deriv(t, s, y, -1.0), &rev, [C::new(1.0, 0.0), u, C::new(0.0, 0.0)]);
    psi.reverse();
    let norm = psi[0][1];
    if norm.norm() == 0.0 || !norm.is_finite() {
        return Err(Error::RiccatiBlowup("decaying solution lost normalization".into()));
    }
    for y in &mut psi {
        for c in y.iter_mut() {
            *c /= norm;
        }
    }
    let wr = psi[0][0] - m_bc;
    if wr.norm() < 1e-14 {
        return Err(Error::DenominatorZero);
    }
    let mut f = Vec::with_capacity(grid.len());
    let mut pf = Vec::with_capacity(grid.len());
    for (c, s) in chi.iter().zip(&psi) {
        f.push((s[0] * c[2] + c[0] * s[2]) / wr);
        pf.push((s[1] * c[2] + c[1] * s[2]) / wr);
    }
    Ok(Pieces {
        particular: HalfSolution { t: grid.to_vec(), f, pf },
        psi: psi.iter().map(|y| y[0]).collect(),
        ppsi: psi.iter().map(|y| y[1]).collect(),
        m: -psi[0][0],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolventReport {
    pub solution: HalfSolution,
    pub boundary_residual: f64,
    pub ode_residual: f64,
    pub denominator: C,
    /// `m₊(z)` recovered from the decaying solution
    pub m_plus_ode: C,
}

/// Max residual of `f' = (p f')/p` and `(p f')' = (q - ζw) f - w·rhs` by fourth-order
/// central differences on `[0, t_max]`, skipping nodes near jumps of `rhs`.
pub fn ode_residual(prob: &HalfLineProblem, zeta: C, rhs: &Rhs, sol: &HalfSolution, t_max: f64) -> f64 {
    let n = sol.t.len();
    let h = sol.t[1] - sol.t[0];
    let d = |v: &[C], k: usize| (v[k - 2] - v[k - 1] * 8.0 + v[k + 1] * 8.0 - v[k + 2]) / (12.0 * h);
    let mut r = 0.0f64;
    for k in 2..n - 2 {
        let t = sol.t[k];
        if t > t_max {
            break;
        }
        if rhs.breaks.iter().any(|b| (t - b).abs() <= 2.5 * h) {
            continue;
        }
        let (p, q, w) = (prob.p.at(t), prob.q.at(t), prob.w.at(t));
        let r1 = (d(&sol.f, k) - sol.pf[k] / p).norm();
        let r2 = (d(&sol.pf, k) - ((q - zeta * w) * sol.f[k] - w * (rhs.f)(t))).norm();
        r = r.max(r1).max(r2);
    }
    r
}

/// Solves `(S₊* - z) f = h` with `Γ₁ f + m₋(-z) Γ₀ f = 0` for the Neumann-style triple
/// `Γ₀ f = (p f')(0)`, `Γ₁ f = -f(0)`.
pub fn resolvent_solve(model: &CouplingModel, z: C, h: &Rhs, grid: &[f64], check_to: f64) -> Result<ResolventReport> {
    let prob = model
        .sl_problem_plus
        .as_ref()
        .ok_or_else(|| Error::Precondition("model has no Sturm–Liouville problem for the plus side".into()))?;
    let d = denominator(model, z)?;
    let m_bc = model.m_minus.evaluate(-z)?;
    if d.norm() <= 1e-12 * (1.0 + m_bc.norm()) {
        return Err(Error::DenominatorZero);
    }
    let pieces = solve_pieces(prob, z, m_bc, h, grid)?;
    let sol = pieces.particular;
    let boundary_residual = (-sol.f[0] + m_bc * sol.pf[0]).norm();
    let ode = ode_residual(prob, z, h, &sol, check_to);
    Ok(ResolventReport { solution: sol, boundary_residual, ode_residual: ode, denominator: d, m_plus_ode: pieces.m })
}

/// Full-line solution: `plus` in `t > 0`, `minus` in the mirrored variable `s = -t`,
/// with `minus.pf` holding `p f_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullLineSolution {
    pub plus: HalfSolution,
    pub minus: HalfSolution,
    pub c_plus: C,
    pub c_minus: C,
}

impl FullLineSolution {
    pub fn max_diff(&self, other: &FullLineSolution, scale: C, third: &FullLineSolution) -> f64 {
        let side = |a: &HalfSolution, b: &HalfSolution, c: &HalfSolution| {
            a.f.iter().zip(&b.f).zip(&c.f).map(|((x, y), w)| (x - y - scale * w).norm()).fold(0.0, f64::max)
        };
        side(&self.plus, &other.plus, &third.plus).max(side(&self.minus, &other.minus, &third.minus))
    }
}

/// Resolvent `(A - z)^{-1}` of the coupled operator on the full line: on `t > 0`
/// the plus problem at `z`, on `t < 0` the minus problem at `-z` with the sign of
/// the data flipped, glued by continuity of `f` and `p f'` at 0.
pub fn two_sided_solve(
    plus: &HalfLineProblem,
    minus: &HalfLineProblem,
    z: C,
    h_plus: &Rhs,
    h_minus: &Rhs,
    grid: &[f64],
) -> Result<FullLineSolution> {
    let neg = |s: f64| -(h_minus.f)(s);
    let rhs_minus = Rhs { f: &neg, breaks: h_minus.breaks.clone() };
    let zero = C::new(0.0, 0.0);
    let (a, b) = rayon_join(|| solve_pieces(plus, z, zero, h_plus, grid), || solve_pieces(minus, -z, zero, &rhs_minus, grid));
    let (a, b) = (a?, b?);
    let (mp, mm) = (a.m, b.m);
    if (mp + mm).norm() <= 1e-12 * (1.0 + mp.norm()) {
        return Err(Error::DenominatorZero);
    }
    let p_plus = a.particular.pf[0];
    let p_minus = b.particular.pf[0];
    let c_plus = -(p_plus + p_minus) * mm / (mp + mm);
    let c_minus = c_plus * mp / mm;
    let combine = |piece: &Pieces, c: C| HalfSolution {
        t: piece.particular.t.clone(),
        f: piece.particular.f.iter().zip(&piece.psi).map(|(f, p)| f + c * p).collect(),
        pf: piece.particular.pf.iter().zip(&piece.ppsi).map(|(f, p)| f + c * p).collect(),
    };
    Ok(FullLineSolution { plus: combine(&a, c_plus), minus: combine(&b, c_minus), c_plus, c_minus })
}

#[cfg(feature = "parallel")]
fn rayon_join<A: Send, B: Send>(a: impl FnOnce() -> A + Send, b: impl FnOnce() -> B + Send) -> (A, B) {
    rayon::join(a, b)
}

#[cfg(not(feature = "parallel"))]
fn rayon_join<A, B>(a: impl FnOnce() -> A, b: impl FnOnce() -> B) -> (A, B) {
    (a(), b())
}

/// Piecewise cubic Hermite interpolant of a tabulated solution; zero past the grid.
pub struct HermiteTable<'a> {
    sol: &'a HalfSolution,
    p: &'a HalfLineProblem,
}

impl<'a> HermiteTable<'a> {
    pub fn new(sol: &'a HalfSolution, p: &'a HalfLineProblem) -> Self {
        HermiteTable { sol, p }
    }

    pub fn eval(&self, t: f64) -> C {
        let ts = &self.sol.t;
        let h = ts[1] - ts[0];
        let n = ts.len();
        if t < 0.0 || t > ts[n - 1] {
            return C::new(0.0, 0.0);
        }
        let k = ((t / h).floor() as usize).min(n - 2);
        let s = (t - ts[k]) / h;
        let (f0, f1) = (self.sol.f[k], self.sol.f[k + 1]);
        let d0 = self.sol.pf[k] / self.p.p.at(ts[k]) * h;
        let d1 = self.sol.pf[k + 1] / self.p.p.at(ts[k + 1]) * h;
        let h00 = 2.0 * s * s * s - 3.0 * s * s + 1.0;
        let h10 = s * s * s - 2.0 * s * s + s;
        let h01 = -2.0 * s * s * s + 3.0 * s * s;
        let h11 = s * s * s - s * s;
        f0 * h00 + d0 * h10 + f1 * h01 + d1 * h11
    }
}

// ---------------------------------------------------------------------------
// Boundary conditions `M (Γ₁⁺, Γ₁⁻)ᵀ = N (Γ₀⁺, Γ₀⁻)ᵀ`

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMatrixPair {
    pub m: [[C; 2]; 2],
    pub n: [[C; 2]; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryClass {
    /// 1..4; the mirrored separated form `[0 1 0 a; 0 0 1 0]` is reported as type 2 with `mirrored`
    pub canonical_type: u8,
    pub mirrored: bool,
    pub separated: bool,
    pub parameters: BTreeMap<String, f64>,
    pub rref: [[C; 4]; 2],
}

fn rref(mut a: SMatrix<C, 2, 4>) -> (SMatrix<C, 2, 4>, Vec<usize>) {
    let scale = a.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let tol = 1e-10 * scale;
    let mut pivots = vec![];
    let mut row = 0;
    for col in 0..4 {
        if row == 2 {
            break;
        }
        let (best, val) = (row..2).map(|r| (r, a[(r, col)].norm())).fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if val <= tol {
            continue;
        }
        a.swap_rows(row, best);
        let piv = a[(row, col)];
        for c in 0..4 {
            a[(row, c)] /= piv;
        }
        for r in 0..2 {
            if r != row {
                let f = a[(r, col)];
                for c in 0..4 {
                    let v = a[(row, c)];
                    a[(r, c)] -= f * v;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    for c in a.iter_mut() {
        if c.re.abs() <= tol {
            c.re = 0.0;
        }
        if c.im.abs() <= tol {
            c.im = 0.0;
        }
    }
    (a, pivots)
}

pub fn classify_boundary(pair: &BoundaryMatrixPair) -> Result<BoundaryClass> {
    let m = Matrix2::new(pair.m[0][0], pair.m[0][1], pair.m[1][0], pair.m[1][1]);
    let n = Matrix2::new(pair.n[0][0], pair.n[0][1], pair.n[1][0], pair.n[1][1]);
    let mn = m * n.adjoint();
    let herm = (mn - mn.adjoint()).iter().map(|c| c.norm()).fold(0.0, f64::max);
    let size = m.norm() * n.norm();
    let mut block = SMatrix::<C, 2, 4>::zeros();
    for r in 0..2 {
        for c in 0..2 {
            block[(r, c)] = pair.m[r][c];
            block[(r, c + 2)] = pair.n[r][c];
        }
    }
    let (a, piv) = rref(block);
    if piv.len() < 2 {
        return Err(Error::RankDeficient);
    }
    if herm > 1e-12 * size.max(1.0) {
        return Err(Error::NonSelfAdjoint);
    }
    let mut params = BTreeMap::new();
    let re_tol = 1e-8;
    let (ty, mirrored, separated) = match (piv[0], piv[1]) {
        (2, 3) => (1, false, true),
        (0, 3) => {
            params.insert("alpha".into(), a[(0, 2)].re);
            (2, false, true)
        }
        (1, 2) => {
            params.insert("alpha".into(), a[(0, 3)].re);
            (2, true, true)
        }
        (0, 2) => {
            let x = a[(0, 1)];
            let rho = x.norm();
            let theta = x.arg();
            let sigma = (a[(0, 3)] * C::from_polar(1.0, -theta)).re;
            params.insert("rho".into(), rho);
            params.insert("theta".into(), theta);
            params.insert("sigma".into(), sigma);
            (3, false, false)
        }
        (0, 1) => {
            let w = a[(0, 3)];
            params.insert("alpha".into(), a[(0, 2)].re);
            params.insert("beta".into(), a[(1, 3)].re);
            params.insert("omega_re".into(), w.re);
            params.insert("omega_im".into(), w.im);
            (4, false, w.norm() <= re_tol)
        }
        _ => return Err(Error::NonSelfAdjoint),
    };
    let mut out = [[C::new(0.0, 0.0); 4]; 2];
    for r in 0..2 {
        for c in 0..4 {
            out[r][c] = a[(r, c)];
        }
    }
    Ok(BoundaryClass { canonical_type: ty, mirrored, separated, parameters: params, rref: out })
}

/// Canonical representatives, for tests and examples.
pub fn canonical_pair(ty: u8, params: &[f64]) -> BoundaryMatrixPair {
    let c = |x: f64| C::new(x, 0.0);
    let z = c(0.0);
    let o = c(1.0);
    let rows: [[C; 4]; 2] = match ty {
        1 => [[z, z, o, z], [z, z, z, o]],
        2 => [[o, z, c(params[0]), z], [z, z, z, o]],
        3 => {
            let (rho, theta, sigma) = (params[0], params[1], params[2]);
            let e = C::from_polar(1.0, theta);
            [[o, e * rho, z, e * sigma], [z, z, o, -e / rho]]
        }
        _ => {
            let (alpha, beta, w) = (params[0], params[1], C::new(params[2], params[3]));
            [[o, z, c(alpha), w], [z, o, w.conj(), c(beta)]]
        }
    };
    BoundaryMatrixPair {
        m: [[rows[0][0], rows[0][1]], [rows[1][0], rows[1][1]]],
        n: [[rows[0][2], rows[0][3]], [rows[1][2], rows[1][3]]],
    }
}

// ---------------------------------------------------------------------------
// Verdict engine

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Justification {
    pub rule: String,
    pub conclusion: String,
    pub certificates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegularityVerdict {
    pub infinity_regular: Tri,
    pub zero_regular: Tri,
    pub fundamentally_reducible: Tri,
    pub justification: Vec<Justification>,
    pub necessity_flags: Vec<String>,
    pub conflicts: Vec<String>,
}

/// Class information for one side of the pair.
#[derive(Debug, Clone)]
pub struct SideClass<'a> {
    pub class: &'a ClassReport,
    pub membership: &'a ClassMembership,
}

fn ids(certs: &[PropertyCertificate], f: impl Fn(&PropertyCertificate) -> bool) -> Vec<String> {
    certs.iter().filter(|c| f(c)).map(|c| c.id.clone()).collect()
}

struct PointRules {
    yes: Vec<Justification>,
    no: Vec<Justification>,
}

/// Regularity of `∞` and `0` from class memberships and certificates. Rules,
/// in order: asymptotic classes on both sides, B-properties with the pair
/// D-property, Stieltjes functions with single-function D-properties, and the
/// necessity of the pair D-property.
pub fn verdict(
    model: &CouplingModel,
    nonneg: &NonnegReport,
    plus: &SideClass,
    minus: &SideClass,
    certs: &[PropertyCertificate],
) -> Result<RegularityVerdict> {
    if nonneg.verdict == Nonnegativity::NotNonnegative {
        return Err(Error::NotNonnegative);
    }
    let kernel = model.kernel_condition;
    let mut necessity = vec![];
    let mut justification = vec![];
    let mut conflicts = vec![];
    let mut results = [Tri::Inconclusive, Tri::Inconclusive];
    for (slot, (d, b, regime_name)) in
        [(Property::DInf, Property::BInf, "infinity"), (Property::DZero, Property::BZero, "zero")].into_iter().enumerate()
    {
        let at_zero = slot == 1;
        let mut rules = PointRules { yes: vec![], no: vec![] };
        let conclude = |rule: &str, yes: bool, used: Vec<String>| Justification {
            rule: rule.into(),
            conclusion: format!("{regime_name} {}", if yes { "regular" } else { "singular" }),
            certificates: used,
        };
        let (a_plus, a_minus) = if at_zero {
            (plus.membership.in_a_zero, minus.membership.in_a_zero)
        } else {
            (plus.membership.in_a_inf, minus.membership.in_a_inf)
        };
        if a_plus.is_yes() && a_minus.is_yes() && (!at_zero || kernel == KernelCondition::True) {
            let tag = if at_zero { "class:a-zero" } else { "class:a-inf" };
            rules.yes.push(conclude(
                "asymptotic-class-sufficiency",
                true,
                vec![format!("{tag}:m_plus"), format!("{tag}:m_minus")],
            ));
        }
        let b_both = has_bounded(certs, b, Subject::MPlus) && has_bounded(certs, b, Subject::MMinus);
        let pair_d = pair_verdict(certs, d);
        let b_ids = ids(certs, |c| c.property == b && c.bounded() && c.subject != Subject::Pair);
        let d_ids = ids(certs, |c| c.property == d && c.subject == Subject::Pair && c.verdict != CertVerdict::Inconclusive);
        let rule_bd = if at_zero { "b-and-d-equivalence-at-zero" } else { "b-and-d-equivalence-at-infinity" };
        if b_both {
            let used = [b_ids.clone(), d_ids.clone()].concat();
            if at_zero && kernel == KernelCondition::False {
                rules.no.push(conclude(rule_bd, false, vec!["kernel_condition:FALSE".into()]));
            } else if pair_d == Tri::Yes && (!at_zero || kernel == KernelCondition::True) {
                rules.yes.push(conclude(rule_bd, true, used));
            } else if pair_d == Tri::No {
                rules.no.push(conclude(rule_bd, false, used));
            }
        }
        let single_ok = |s: Subject| {
            certs
                .iter()
                .any(|c| c.property == d && c.subject == s && c.bounded() && c.method == crate::properties::Method::GridRatio)
        };
        if plus.class.is_stieltjes.is_yes()
            && minus.class.is_stieltjes.is_yes()
            && single_ok(Subject::MPlus)
            && single_ok(Subject::MMinus)
            && (!at_zero || kernel == KernelCondition::True)
        {
            let used = ids(certs, |c| c.property == d && matches!(c.subject, Subject::MPlus | Subject::MMinus) && c.bounded());
            rules.yes.push(conclude("stieltjes-single-d", true, used));
        }
        if pair_d == Tri::No {
            let j = conclude("d-property-necessity", false, d_ids.clone());
            necessity.push(format!("pair D-property fails at {regime_name}: {regime_name} is a singular critical point"));
            rules.no.push(j);
        }
        results[slot] = match (rules.yes.is_empty(), rules.no.is_empty()) {
            (false, true) => Tri::Yes,
            (true, false) => Tri::No,
            (false, false) => {
                conflicts.push(format!("{regime_name}: rules disagree"));
                Tri::Inconclusive
            }
            (true, true) => Tri::Inconclusive,
        };
        justification.extend(rules.yes);
        justification.extend(rules.no);
    }
    let [inf, zero] = results;
    let fr = if inf == Tri::No || zero == Tri::No || kernel == KernelCondition::False {
        Tri::No
    } else if inf.is_yes() && zero.is_yes() && kernel == KernelCondition::True {
        Tri::Yes
    } else {
        Tri::Inconclusive
    };
    if fr == Tri::Yes {
        let rules: Vec<String> = justification.iter().map(|j| j.rule.clone()).collect();
        justification.push(Justification {
            rule: "regular-critical-points-and-kernel".into(),
            conclusion: "fundamentally reducible".into(),
            certificates: [rules, vec!["kernel_condition:TRUE".into()]].concat(),
        });
    }
    Ok(RegularityVerdict {
        infinity_regular: inf,
        zero_regular: zero,
        fundamentally_reducible: fr,
        justification,
        necessity_flags: necessity,
        conflicts,
    })
}

/// `2 C₁ C₂²` with `C₂` the larger of the two B-constants.
pub fn veselic_bound(d_cert: &PropertyCertificate, b_plus: &PropertyCertificate, b_minus: &PropertyCertificate) -> Result<f64> {
    let get = |c: &PropertyCertificate, k: &str| -> Result<f64> {
        if !c.bounded() {
            return Err(Error::MissingConstant(format!("{k} ({} is not BOUNDED)", c.id)));
        }
        c.constants.get(k).copied().ok_or_else(|| Error::MissingConstant(format!("{k} in {}", c.id)))
    };
    let c1 = get(d_cert, "C1")?;
    let c2 = get(b_plus, "C2")?.max(get(b_minus, "C2")?);
    Ok(2.0 * c1 * c2 * c2)
}
