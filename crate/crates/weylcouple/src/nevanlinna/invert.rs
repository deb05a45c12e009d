use super::classify::{limits_on_negative_axis, ExtReal};
use super::expr::NevanlinnaExpr;
use super::measure::{Atom, DensitySegment, PowerTail, SpectralMeasure};
use crate::error::{Error, Result};
use crate::mobius::MobiusMap;
use crate::quad::decade_grid;
use crate::sweep;
use num_complex::Complex64 as C;
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct InversionOptions {
    /// Offsets `ε = t · eps_rel[k]`, decreasing.
    pub eps_rel: Vec<f64>,
    pub tol: f64,
}

impl Default for InversionOptions {
    fn default() -> Self {
        InversionOptions { eps_rel: vec![0.02, 0.01, 0.005, 0.0025, 0.00125], tol: 1e-5 }
    }
}

/// Neville extrapolation of `(x_k, y_k)` to `x = 0`; returns the value and the
/// change contributed by the last point.
fn neville_at_zero(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len();
    let mut p = ys.to_vec();
    let mut prev_top = p[0];
    let mut top = p[0];
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
        }
        prev_top = top;
        top = p[0];
    }
    (top, (top - prev_top).abs())
}

enum Point {
    Density(f64),
    Atom(f64),
}

fn invert_point(f: &NevanlinnaExpr, t: f64, opts: &InversionOptions) -> Result<Point> {
    let mut eps = vec![];
    let mut vals = vec![];
    for r in &opts.eps_rel {
        let e = t * r;
        let m = f.evaluate(C::new(t, e))?;
        eps.push(e);
        vals.push(m.im / PI);
    }
    let n = eps.len();
    let a_last = eps[n - 1] * vals[n - 1] * PI;
    let a_prev = eps[n - 2] * vals[n - 2] * PI;
    if a_last > 1e-10 && (a_last - a_prev).abs() <= 1e-2 * a_last {
        return Ok(Point::Atom(a_last));
    }
    let (v, err) = neville_at_zero(&eps, &vals);
    let scale = vals.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if !v.is_finite() || err > opts.tol * scale.max(v.abs()) + 1e-300 {
        return Err(Error::NonConvergent(format!("density extrapolation at t = {t}")));
    }
    Ok(Point::Density(if v > 1e-10 * scale { v } else { 0.0 }))
}

/// Recovers `σ` of a Stieltjes function from boundary values on `t_grid`.
/// The density between nodes is log–log interpolated; the head and tail are
/// the power laws of the first and last interval.
pub fn stieltjes_invert(f: &NevanlinnaExpr, t_grid: &[f64], opts: &InversionOptions) -> Result<SpectralMeasure> {
    if t_grid.len() < 2 || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] <= 0.0 {
        return Err(Error::InsufficientGrid("t_grid must be increasing and positive".into()));
    }
    let pts = sweep::map(t_grid, |t| invert_point(f, *t, opts));
    let mut atoms = vec![];
    let mut ts = vec![];
    let mut ds = vec![];
    for (t, p) in t_grid.iter().zip(pts) {
        match p? {
            Point::Atom(w) => atoms.push(Atom { t: *t, weight: w }),
            Point::Density(d) => {
                ts.push(*t);
                ds.push(d);
            }
        }
    }
    // atom at the origin: y · Im m(iy) as y -> 0
    let w0 = [1e-10, 1e-12].iter().map(|y| f.evaluate(C::new(0.0, *y)).map(|m| y * m.im)).collect::<Vec<_>>();
    if let (Ok(a), Ok(b)) = (&w0[0], &w0[1]) {
        if *b > 1e-6 && (a - b).abs() <= 1e-3 * b {
            atoms.insert(0, Atom { t: 0.0, weight: *b });
        }
    }
    let mut sigma = SpectralMeasure { atoms, ..Default::default() };
    if ds.iter().all(|d| *d == 0.0) || ts.len() < 2 {
        return Ok(sigma);
    }
    let power = |j: usize| -> Option<f64> {
        if ds[j] > 0.0 && ds[j + 1] > 0.0 {
            Some((ds[j + 1] / ds[j]).ln() / (ts[j + 1] / ts[j]).ln())
        } else {
            None
        }
    };
    let n = ts.len();
    if let Some(p) = power(0) {
        if p <= -1.0 {
            return Err(Error::GrowthViolated(format!("density exponent {p} near 0")));
        }
        sigma.segments.push(DensitySegment { t0: 0.0, t1: ts[0], power: p, coeffs: vec![ds[0] / ts[0].powf(p)] });
    }
    for j in 0..n - 1 {
        if let Some(p) = power(j) {
            sigma.segments.push(DensitySegment { t0: ts[j], t1: ts[j + 1], power: p, coeffs: vec![ds[j] / ts[j].powf(p)] });
        }
    }
    if let Some(p) = power(n - 2) {
        let alpha = -p;
        if alpha <= 0.0 {
            return Err(Error::GrowthViolated(format!("density tail exponent {p}")));
        }
        sigma.tail = Some(PowerTail { start: ts[n - 1], c: ds[n - 1] * ts[n - 1].powf(alpha), alpha });
    }
    Ok(sigma)
}

fn power_measure(c: f64, alpha: f64) -> Option<(f64, SpectralMeasure)> {
    if alpha == 0.0 && c >= 0.0 {
        return Some((c, SpectralMeasure::empty()));
    }
    if alpha > -1.0 && alpha < 0.0 && c > 0.0 {
        return Some((0.0, SpectralMeasure::power_density(c * (PI * alpha.abs()).sin() / PI, alpha)));
    }
    None
}

/// `(γ, σ)` with `f(z) = γ + ∫ dσ(t)/(t - z)`: exact for the closed-form atoms,
/// numerical inversion (validated by re-evaluation) otherwise.
pub fn explicit_stieltjes(f: &NevanlinnaExpr) -> Result<(f64, SpectralMeasure)> {
    use NevanlinnaExpr::*;
    let unavailable = || Error::MeasureUnavailable("not a Stieltjes function".into());
    match f {
        PowerLaw { c, alpha } => power_measure(*c, *alpha).ok_or_else(unavailable),
        AffinePlusPower { c0, c1, alpha } if *c0 >= 0.0 => {
            let (g, s) = power_measure(*c1, *alpha).ok_or_else(unavailable)?;
            Ok((g + c0, s))
        }
        StieltjesForm { gamma, sigma } => Ok((*gamma, sigma.clone())),
        Sum { left, right } => {
            let (g1, s1) = explicit_stieltjes(left)?;
            let (g2, s2) = explicit_stieltjes(right)?;
            Ok((g1 + g2, s1.plus(&s2)?))
        }
        Transpose { inner } => match inner.as_ref() {
            PowerLaw { c, alpha } if *c < 0.0 => power_measure(-1.0 / c, -alpha).ok_or_else(unavailable),
            _ => numeric_stieltjes(f),
        },
        MobiusOf { mu1, mu2, inner } => {
            if let PowerLaw { c, alpha } = inner.as_ref() {
                let reflect = mu1.same_map(&MobiusMap::reciprocal(), 1e-15) && mu2.same_map(&MobiusMap::negation(), 1e-15);
                if reflect && mu1.epsilon * mu2.epsilon == 1 {
                    return power_measure(-c, -alpha).ok_or_else(unavailable);
                }
                let transpose = mu1.same_map(&MobiusMap::identity(), 1e-15) && mu2.same_map(&MobiusMap::transpose(), 1e-15);
                if transpose && mu2.epsilon == 1 && *c < 0.0 {
                    return power_measure(-1.0 / c, -alpha).ok_or_else(unavailable);
                }
            }
            numeric_stieltjes(f)
        }
        SlWeyl { .. } => Err(Error::MeasureUnavailable("ODE-backed Weyl function".into())),
        Flip { .. } => Err(unavailable()),
        _ => numeric_stieltjes(f),
    }
}

fn numeric_stieltjes(f: &NevanlinnaExpr) -> Result<(f64, SpectralMeasure)> {
    if f.is_numerical() {
        return Err(Error::MeasureUnavailable("ODE-backed Weyl function".into()));
    }
    for x in [-1e-4, -1.0, -1e4] {
        let v =
            f.evaluate(C::new(x, 0.0)).map_err(|_| Error::MeasureUnavailable("not holomorphic on the negative axis".into()))?;
        if v.re < 0.0 || v.im.abs() > 1e-10 * (1.0 + v.norm()) {
            return Err(Error::MeasureUnavailable("negative values on the negative axis".into()));
        }
    }
    let gamma = match limits_on_negative_axis(f).0 {
        ExtReal::Finite(g) => g.max(0.0),
        _ => return Err(Error::MeasureUnavailable("no finite limit at -∞".into())),
    };
    let sigma = stieltjes_invert(f, &decade_grid(1e-10, 1e10, 16), &InversionOptions::default())
        .map_err(|e| Error::MeasureUnavailable(format!("inversion failed: {e}")))?;
    let model = NevanlinnaExpr::stieltjes(gamma, sigma.clone());
    for z in [C::new(0.0, 1.0), C::new(-1.0, 0.0), C::new(3.0, 0.5)] {
        let a = f.evaluate(z)?;
        let b = model.evaluate(z)?;
        if (a - b).norm() > 1e-3 * a.norm() {
            return Err(Error::MeasureUnavailable(format!("reconstructed measure misses f({z}) by {}", (a - b).norm())));
        }
    }
    Ok((gamma, sigma))
}
