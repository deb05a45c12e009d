//! Spectral measures on `[0, ∞)`: atoms, piecewise power-times-polynomial
//! densities, and an optional power-law tail.

use crate::error::{Error, Result};
use crate::quad::{integrate_pieces, QuadOptions};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub t: f64,
    pub weight: f64,
}

/// Density `t^power · Σ coeffs[k] t^k` on `(t0, t1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySegment {
    pub t0: f64,
    pub t1: f64,
    pub power: f64,
    pub coeffs: Vec<f64>,
}

/// Density `c · t^(-alpha)` for `t > start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerTail {
    pub start: f64,
    pub c: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpectralMeasure {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub segments: Vec<DensitySegment>,
    #[serde(default)]
    pub tail: Option<PowerTail>,
}

impl DensitySegment {
    fn poly(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn density(&self, t: f64) -> f64 {
        t.powf(self.power) * self.poly(t)
    }

    /// Mass of the segment on `(t0, min(t, t1)]`.
    fn mass_upto(&self, t: f64) -> f64 {
        let hi = t.min(self.t1);
        if hi <= self.t0 {
            return 0.0;
        }
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let e = self.power + k as f64 + 1.0;
                c * (hi.powf(e) - if self.t0 > 0.0 { self.t0.powf(e) } else { 0.0 }) / e
            })
            .sum()
    }
}

impl SpectralMeasure {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn atom(t: f64, weight: f64) -> Self {
        SpectralMeasure { atoms: vec![Atom { t, weight }], ..Default::default() }
    }

    /// `σ'(t) = c · t^p` on all of `(0, ∞)`, `p ∈ (-1, 0)` for a Stieltjes measure.
    pub fn power_density(c: f64, p: f64) -> Self {
        SpectralMeasure {
            atoms: vec![],
            segments: vec![DensitySegment { t0: 0.0, t1: 1.0, power: p, coeffs: vec![c] }],
            tail: Some(PowerTail { start: 1.0, c, alpha: -p }),
        }
    }

    /// Union of two measures (the tail of `other` is kept only if `self` has none).
    pub fn plus(&self, other: &SpectralMeasure) -> Result<SpectralMeasure> {
        let mut out = self.clone();
        out.atoms.extend(other.atoms.iter().cloned());
        out.segments.extend(other.segments.iter().cloned());
        out.tail = match (&self.tail, &other.tail) {
            (None, t) | (t, None) => t.clone(),
            (Some(a), Some(b)) if a.alpha == b.alpha && a.start == b.start => {
                Some(PowerTail { start: a.start, c: a.c + b.c, alpha: a.alpha })
            }
            _ => {
                return Err(Error::MeasureUnavailable("cannot merge unlike power tails".into()));
            }
        };
        Ok(out)
    }

    pub fn scaled(&self, k: f64) -> SpectralMeasure {
        let mut out = self.clone();
        for a in &mut out.atoms {
            a.weight *= k;
        }
        for s in &mut out.segments {
            for c in &mut s.coeffs {
                *c *= k;
            }
        }
        if let Some(t) = &mut out.tail {
            t.c *= k;
        }
        out
    }

    pub fn density(&self, t: f64) -> f64 {
        let mut d = 0.0;
        for s in &self.segments {
            if t > s.t0 && t <= s.t1 {
                d += s.density(t);
            }
        }
        if let Some(tl) = &self.tail {
            if t > tl.start {
                d += tl.c * t.powf(-tl.alpha);
            }
        }
        d
    }

    /// Normalized distribution function: `σ(0) = 0`, midpoint values at jumps.
    pub fn cumulative(&self, t: f64) -> f64 {
        let mut s = 0.0;
        for a in &self.atoms {
            if a.t < t {
                s += a.weight;
            } else if a.t == t {
                s += 0.5 * a.weight;
            }
            if a.t == 0.0 {
                s -= 0.5 * a.weight;
            }
        }
        for seg in &self.segments {
            s += seg.mass_upto(t);
        }
        if let Some(tl) = &self.tail {
            if t > tl.start {
                let e = 1.0 - tl.alpha;
                s += if e.abs() < 1e-14 { tl.c * (t / tl.start).ln() } else { tl.c * (t.powf(e) - tl.start.powf(e)) / e };
            }
        }
        s
    }

    /// `∫ dσ(t) / (1 + t)`, or an error when it diverges.
    pub fn growth_integral(&self) -> Result<f64> {
        Ok(self.integrate(|t| Complex64::new(1.0 / (1.0 + t), 0.0), 1.0, &[1.0])?.re)
    }

    /// `∫ g(t) dσ(t)` where `|g(t)| = O(t^-decay)` at infinity. `hints` are
    /// scales where `g` changes quickly (typically `|z|`).
    pub fn integrate<G: Fn(f64) -> Complex64>(&self, g: G, decay: f64, hints: &[f64]) -> Result<Complex64> {
        let opts = QuadOptions::default();
        let mut total = Complex64::new(0.0, 0.0);
        for a in &self.atoms {
            total += g(a.t) * a.weight;
        }
        for seg in &self.segments {
            total += integrate_segment(seg, &g, hints, opts)?;
        }
        if let Some(tl) = &self.tail {
            let e = tl.alpha + decay - 1.0;
            if e <= 0.0 {
                return Err(Error::GrowthViolated(format!("tail exponent {} against kernel decay {}", tl.alpha, decay)));
            }
            if tl.c != 0.0 {
                total += integrate_tail(tl, e, &g, hints, opts)?;
            }
        }
        Ok(total)
    }
}

fn t_breaks(lo: f64, hi: f64, hints: &[f64]) -> Vec<f64> {
    let mut pts = vec![lo, hi];
    let mut p = if lo > 0.0 { 10f64.powf(lo.log10().floor() + 1.0) } else { hi * 1e-16 };
    if lo == 0.0 {
        // decades below hi down to 1e-16 relative
        let mut q = hi / 10.0;
        while q > hi * 1e-16 {
            pts.push(q);
            q /= 10.0;
        }
        p = hi;
    }
    while p < hi {
        pts.push(p);
        p *= 10.0;
    }
    for &h in hints {
        for f in [0.25, 1.0, 4.0] {
            let x = h * f;
            if x > lo && x < hi {
                pts.push(x);
            }
        }
    }
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs());
    pts
}

fn integrate_segment<G: Fn(f64) -> Complex64>(
    seg: &DensitySegment,
    g: &G,
    hints: &[f64],
    opts: QuadOptions,
) -> Result<Complex64> {
    if seg.t1 <= seg.t0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if seg.t0 == 0.0 {
        let e = seg.power + 1.0;
        if e <= 0.0 {
            return Err(Error::GrowthViolated(format!("density exponent {} at 0", seg.power)));
        }
        // t = t1 · u^(1/e) removes the t^power singularity
        let t1 = seg.t1;
        let scale = t1.powf(e) / e;
        let f = |u: f64| {
            let t = t1 * u.powf(1.0 / e);
            g(t) * seg.poly(t) * scale
        };
        let mut us: Vec<f64> = t_breaks(0.0, t1, hints).iter().map(|t| (t / t1).powf(e)).collect();
        us[0] = 0.0;
        us.sort_by(|a, b| a.partial_cmp(b).unwrap());
        us.dedup();
        integrate_pieces(f, &us, opts)
    } else {
        let f = |s: f64| {
            let t = s.exp();
            g(t) * seg.density(t) * t
        };
        let ss: Vec<f64> = t_breaks(seg.t0, seg.t1, hints).iter().map(|t| t.ln()).collect();
        integrate_pieces(f, &ss, opts)
    }
}

fn integrate_tail<G: Fn(f64) -> Complex64>(tl: &PowerTail, e: f64, g: &G, hints: &[f64], opts: QuadOptions) -> Result<Complex64> {
    // t = T · u^(-k) with k = 1/e flattens the combined power at u -> 0
    let k = 1.0 / e;
    let big_t = tl.start;
    let f = |u: f64| {
        let t = big_t * u.powf(-k);
        g(t) * (tl.c * t.powf(-tl.alpha)) * (big_t * k * u.powf(-k - 1.0))
    };
    let far = big_t * 1e16_f64.max(hints.iter().cloned().fold(0.0, f64::max) * 1e6);
    let mut us: Vec<f64> = t_breaks(big_t, far, hints).iter().map(|t| (t / big_t).powf(-e)).collect();
    us.push(0.0);
    us.sort_by(|a, b| a.partial_cmp(b).unwrap());
    us.dedup();
    integrate_pieces(f, &us, opts)
}
