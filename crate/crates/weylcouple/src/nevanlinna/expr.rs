use super::measure::SpectralMeasure;
use crate::error::{Error, Result};
use crate::mobius::MobiusMap;
use crate::sl_weyl::{self, HalfLineProblem};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Closed expression tree over Nevanlinna atoms and combinators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NevanlinnaExpr {
    /// `C · (-z)^alpha`
    PowerLaw {
        c: f64,
        alpha: f64,
    },
    /// `C0 + C1 · (-z)^alpha`
    AffinePlusPower {
        c0: f64,
        c1: f64,
        alpha: f64,
    },
    /// `a + b z + ∫ (1/(t-z) - t/(1+t²)) dσ(t)`
    FromMeasure {
        a: f64,
        b: f64,
        sigma: SpectralMeasure,
    },
    /// `γ + ∫ dσ(t)/(t-z)`
    StieltjesForm {
        gamma: f64,
        sigma: SpectralMeasure,
    },
    /// `ε1 ε2 · μ2(m(μ1(z)))`
    MobiusOf {
        mu1: MobiusMap,
        mu2: MobiusMap,
        inner: Box<NevanlinnaExpr>,
    },
    Sum {
        left: Box<NevanlinnaExpr>,
        right: Box<NevanlinnaExpr>,
    },
    /// `-1/m(z)`
    Transpose {
        inner: Box<NevanlinnaExpr>,
    },
    /// `m(-z)`; only meaningful inside a coupling denominator.
    Flip {
        inner: Box<NevanlinnaExpr>,
    },
    SlWeyl {
        problem: HalfLineProblem,
    },
}

/// `(-z)^alpha` on the principal branch, `Arg ∈ (-π, π)`.
pub fn neg_pow(z: Complex64, alpha: f64) -> Result<Complex64> {
    if z.im == 0.0 && z.re >= 0.0 {
        if alpha == 0.0 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        return Err(Error::BranchCut(format!("{z}")));
    }
    let w = -z;
    let r = w.norm();
    let th = w.im.atan2(w.re);
    Ok(Complex64::from_polar(r.powf(alpha), alpha * th))
}

impl NevanlinnaExpr {
    pub fn power(c: f64, alpha: f64) -> Self {
        NevanlinnaExpr::PowerLaw { c, alpha }
    }

    pub fn affine_power(c0: f64, c1: f64, alpha: f64) -> Self {
        NevanlinnaExpr::AffinePlusPower { c0, c1, alpha }
    }

    pub fn constant(c: f64) -> Self {
        NevanlinnaExpr::AffinePlusPower { c0: c, c1: 0.0, alpha: 0.0 }
    }

    pub fn stieltjes(gamma: f64, sigma: SpectralMeasure) -> Self {
        NevanlinnaExpr::StieltjesForm { gamma, sigma }
    }

    /// The identity function `z`.
    pub fn linear() -> Self {
        NevanlinnaExpr::FromMeasure { a: 0.0, b: 1.0, sigma: SpectralMeasure::empty() }
    }

    /// `-1/z`, a unit atom at the origin.
    pub fn neg_reciprocal() -> Self {
        NevanlinnaExpr::StieltjesForm { gamma: 0.0, sigma: SpectralMeasure::atom(0.0, 1.0) }
    }

    pub fn mobius(mu1: MobiusMap, mu2: MobiusMap, inner: NevanlinnaExpr) -> Self {
        NevanlinnaExpr::MobiusOf { mu1, mu2, inner: Box::new(inner) }
    }

    pub fn sum(left: NevanlinnaExpr, right: NevanlinnaExpr) -> Self {
        NevanlinnaExpr::Sum { left: Box::new(left), right: Box::new(right) }
    }

    pub fn transpose(inner: NevanlinnaExpr) -> Self {
        NevanlinnaExpr::Transpose { inner: Box::new(inner) }
    }

    pub fn flip(inner: NevanlinnaExpr) -> Self {
        NevanlinnaExpr::Flip { inner: Box::new(inner) }
    }

    pub fn sl(problem: HalfLineProblem) -> Self {
        NevanlinnaExpr::SlWeyl { problem }
    }

    /// `-m(1/z)`: swaps the behaviour at 0 and ∞ and maps inverse Stieltjes
    /// functions to Stieltjes functions.
    pub fn reflect(inner: NevanlinnaExpr) -> Self {
        Self::mobius(MobiusMap::reciprocal(), MobiusMap::negation(), inner)
    }

    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        use NevanlinnaExpr::*;
        match self {
            PowerLaw { c, alpha } => Ok(neg_pow(z, *alpha)? * *c),
            AffinePlusPower { c0, c1, alpha } => {
                if *c1 == 0.0 {
                    return Ok(Complex64::new(*c0, 0.0));
                }
                Ok(neg_pow(z, *alpha)? * *c1 + *c0)
            }
            FromMeasure { a, b, sigma } => {
                check_support(sigma, z)?;
                let v = sigma.integrate(|t| (1.0 + t * z) / ((t - z) * (1.0 + t * t)), 2.0, &[z.norm()])?;
                Ok(v + *a + z * *b)
            }
            StieltjesForm { gamma, sigma } => {
                check_support(sigma, z)?;
                let v = sigma.integrate(|t| 1.0 / (t - z), 1.0, &[z.norm()])?;
                Ok(v + *gamma)
            }
            MobiusOf { mu1, mu2, inner } => {
                let w = mu1.apply(z)?;
                let m = inner.evaluate(w)?;
                let s = (mu1.epsilon * mu2.epsilon) as f64;
                Ok(mu2.apply(m)? * s)
            }
            Sum { left, right } => Ok(left.evaluate(z)? + right.evaluate(z)?),
            Transpose { inner } => {
                let m = inner.evaluate(z)?;
                if m.norm() == 0.0 {
                    return Err(Error::PoleHit(format!("{z}")));
                }
                Ok(-1.0 / m)
            }
            Flip { inner } => inner.evaluate(-z),
            SlWeyl { problem } => sl_weyl::weyl_function(problem, z),
        }
    }

    pub fn eval(&self, re: f64, im: f64) -> Result<Complex64> {
        self.evaluate(Complex64::new(re, im))
    }

    /// True when the tree contains an ODE-backed leaf (expensive to evaluate).
    pub fn is_numerical(&self) -> bool {
        use NevanlinnaExpr::*;
        match self {
            SlWeyl { .. } => true,
            MobiusOf { inner, .. } | Transpose { inner } | Flip { inner } => inner.is_numerical(),
            Sum { left, right } => left.is_numerical() || right.is_numerical(),
            _ => false,
        }
    }
}

fn check_support(sigma: &SpectralMeasure, z: Complex64) -> Result<()> {
    if z.im == 0.0 {
        let x = z.re;
        let hits_atom = sigma.atoms.iter().any(|a| a.t == x);
        let hits_density = x > 0.0 && (sigma.density(x) > 0.0 || sigma.tail.as_ref().is_some_and(|t| x > t.start));
        let hits_zero = x == 0.0 && !sigma.segments.is_empty();
        if hits_atom || hits_density || hits_zero {
            return Err(Error::BranchCut(format!("{z}")));
        }
    }
    Ok(())
}
