//! Adaptive Gauss–Kronrod quadrature for complex-valued integrands and
//! Gauss–Legendre rules for fixed discretizations.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel_tol: 1e-10, abs_tol: 1e-300, max_intervals: 2000 }
    }
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        rk += s * WGK[j];
        if j % 2 == 1 {
            rg += s * WG[j / 2];
        }
    }
    let rk = rk * h;
    let rg = rg * h;
    (rk, (rk - rg).norm())
}

struct Piece {
    a: f64,
    b: f64,
    val: Complex64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.partial_cmp(&o.err).unwrap_or(Ordering::Equal)
    }
}

/// Globally adaptive integration of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Complex64> {
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (v, e) = gk15(&f, a, b);
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
    }
    let mut heap = BinaryHeap::new();
    heap.push(Piece { a, b, val: v, err: e });
    let mut total = v;
    let mut err = e;
    while err > opts.abs_tol.max(opts.rel_tol * total.norm()) {
        if heap.len() >= opts.max_intervals {
            // accept when the remaining error is still tiny in absolute terms
            if err <= 1e-6 * total.norm().max(1e-300) {
                break;
            }
            return Err(Error::Quadrature(format!("interval budget exhausted on [{a}, {b}], error estimate {err:e}")));
        }
        let p = heap.pop().expect("heap is non-empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        if !(v1 + v2).re.is_finite() || !(v1 + v2).im.is_finite() {
            return Err(Error::Quadrature(format!("non-finite integrand near {m}")));
        }
        total += v1 + v2 - p.val;
        heap.push(Piece { a: p.a, b: m, val: v1, err: e1 });
        heap.push(Piece { a: m, b: p.b, val: v2, err: e2 });
        err += e1 + e2 - p.err;
        if err < 0.0 {
            err = heap.iter().map(|q| q.err).sum();
        }
    }
    // resum to limit cancellation drift
    Ok(heap.iter().map(|q| q.val).sum())
}

/// Integrates over consecutive breakpoints `pts[0] < pts[1] < ...`.
pub fn integrate_pieces<F: Fn(f64) -> Complex64>(f: F, pts: &[f64], opts: QuadOptions) -> Result<Complex64> {
    let mut s = Complex64::new(0.0, 0.0);
    for w in pts.windows(2) {
        s += integrate(&f, w[0], w[1], opts)?;
    }
    Ok(s)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss–Legendre rule in `ln t` over `[lo, hi]`, `per_panel` nodes per
/// decade. Returns `(t, weight)` pairs for `∫ g(t) dt`.
pub fn log_gauss_rule(lo: f64, hi: f64, per_panel: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(per_panel);
    let l0 = lo.ln();
    let l1 = hi.ln();
    let panels = (((l1 - l0) / std::f64::consts::LN_10).ceil() as usize).max(1);
    let h = (l1 - l0) / panels as f64;
    let mut out = Vec::with_capacity(panels * per_panel);
    for p in 0..panels {
        let a = l0 + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            let s = a + 0.5 * h * (xi + 1.0);
            let t = s.exp();
            out.push((t, 0.5 * h * wi * t));
        }
    }
    out
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn geomspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|k| {
            if k == 0 {
                lo
            } else if k == n - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Geometric grid with `per_decade` nodes per decade, endpoints included.
pub fn decade_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).round() as usize + 1;
    geomspace(lo, hi, n.max(2))
}

/// Least-squares slope and intercept of `y` against `x`, plus the RMS residual.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    (slope, icpt, rms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(6);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = integrate(|t| Complex64::new(t.powf(-0.5), t), 0.0, 1.0, QuadOptions::default()).unwrap();
        assert!((v - Complex64::new(2.0, 0.5)).norm() < 1e-8);
    }

    #[test]
    fn decade_grid_endpoints() {
        let g = decade_grid(1e-2, 1e3, 4);
        assert_eq!(g.len(), 21);
        assert_eq!((g[0], g[20]), (1e-2, 1e3));
    }
}
