//! Reproducing kernels `K_m(z, w) = (m(z) - m(w)*)/(z - w*)`, their Gram
//! matrices, and the pointwise identities of the Möbius isomorphism between
//! `H(m)` and `H(m̂)`.

use crate::error::{Error, Result};
use crate::mobius::MobiusMap;
use crate::nevanlinna::{NevanlinnaExpr, SpectralMeasure};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use serde::Serialize;

/// Non-real sample points with no conjugate pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePlan {
    pub points: Vec<C>,
}

impl SamplePlan {
    pub fn new(points: Vec<C>) -> Result<Self> {
        for (j, z) in points.iter().enumerate() {
            if z.im == 0.0 {
                return Err(Error::Precondition(format!("real sample point {z}")));
            }
            for w in &points[j + 1..] {
                if *z == *w || *z == w.conj() {
                    return Err(Error::Precondition(format!("repeated or conjugate pair {z}, {w}")));
                }
            }
        }
        Ok(SamplePlan { points })
    }
}

fn kernel_from_values(z: C, mz: C, w: C, mw: C) -> Result<C> {
    if z == w {
        return Ok(C::new(mz.im / z.im, 0.0));
    }
    let den = z - w.conj();
    if den.norm() == 0.0 {
        return Err(Error::DegeneratePair);
    }
    Ok((mz - mw.conj()) / den)
}

pub fn kernel(f: &NevanlinnaExpr, z: C, w: C) -> Result<C> {
    if z.im == 0.0 || w.im == 0.0 {
        return Err(Error::Precondition("kernel needs non-real points".into()));
    }
    if z != w && z == w.conj() {
        return Err(Error::DegeneratePair);
    }
    let mz = f.evaluate(z)?;
    let mw = if z == w { mz } else { f.evaluate(w)? };
    kernel_from_values(z, mz, w, mw)
}

pub fn gram(f: &NevanlinnaExpr, points: &[C]) -> Result<DMatrix<C>> {
    let vals = points.iter().map(|z| f.evaluate(*z)).collect::<Result<Vec<_>>>()?;
    let n = points.len();
    let mut g = DMatrix::from_element(n, n, C::new(0.0, 0.0));
    for j in 0..n {
        for k in 0..n {
            g[(j, k)] = kernel_from_values(points[j], vals[j], points[k], vals[k])?;
        }
    }
    Ok(g)
}

/// Smallest eigenvalue and trace of the (symmetrized) Gram matrix.
pub fn gram_min_eig(f: &NevanlinnaExpr, points: &[C]) -> Result<(f64, f64)> {
    let g = gram(f, points)?;
    let h = (&g + g.adjoint()) * C::new(0.5, 0.0);
    let trace = h.diagonal().iter().map(|c| c.re).sum::<f64>();
    let eig = nalgebra::SymmetricEigen::new(h);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((min, trace))
}

/// `|m(z) - m(w)* - (z - w*) <ψ(z), ψ(w)>_σ|` for the measure model
/// `m(z) = ∫ dσ(x)/(x - z)`, `ψ(z) = 1/(x - z)`.
pub fn q_identity_residual(f: &NevanlinnaExpr, sigma_model: &SpectralMeasure, z: C, w: C) -> Result<f64> {
    let inner = sigma_model.integrate(|x| 1.0 / ((x - z) * (x - w.conj())), 2.0, &[z.norm(), w.norm()])?;
    let lhs = f.evaluate(z)? - f.evaluate(w)?.conj();
    Ok((lhs - (z - w.conj()) * inner).norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VResiduals {
    pub kernel_section: f64,
    pub gram_preservation: f64,
}

fn rel(a: C, b: C) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

/// Checks on `plan` that `V` maps kernel sections of `m` to scaled kernel
/// sections of `m̂ = ε1 ε2 μ2(m(μ1(z)))`, and that it preserves their inner
/// products. Both residuals are relative.
pub fn v_transform_check(f: &NevanlinnaExpr, mu1: MobiusMap, mu2: MobiusMap, plan: &SamplePlan) -> Result<VResiduals> {
    let mhat = NevanlinnaExpr::mobius(mu1, mu2, f.clone());
    let inv1 = mu1.inverse();
    let (a1, c1) = (mu1.a, mu1.c);
    let (c2, d2) = (mu2.c, mu2.d);
    let pts = &plan.points;
    let mut sec = 0.0f64;
    for &w in pts {
        let wc = w.conj();
        let u = inv1.apply(w)?;
        let scale_w = (c2 * f.evaluate(wc)? + d2) / (c1 * wc - a1);
        for &z in pts {
            let mz = mu1.apply(z)?;
            let lhs = (c1 * mz - a1) / (c2 * f.evaluate(mz)? + d2) * kernel(f, mz, w)?;
            let rhs = scale_w * kernel(&mhat, z, u)?;
            sec = sec.max(rel(lhs, rhs));
        }
    }
    let mut gp = 0.0f64;
    for &v in pts {
        for &w in pts {
            let vc = v.conj();
            let fv = (c2 * f.evaluate(vc)? + d2) / (c1 * vc - a1);
            let fw = (c2 * f.evaluate(w)? + d2) / (c1 * w - a1);
            let lhs = fv * fw * kernel(&mhat, inv1.apply(w)?, inv1.apply(v)?)?;
            gp = gp.max(rel(lhs, kernel(f, w, v)?));
        }
    }
    Ok(VResiduals { kernel_section: sec, gram_preservation: gp })
}
