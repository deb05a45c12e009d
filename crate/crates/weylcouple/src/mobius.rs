//! Real Möbius maps `z -> (az + b)/(cz + d)` with determinant `±1`.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A real 2x2 matrix normalized to determinant `epsilon = ±1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MobiusMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub epsilon: i8,
}

#[derive(Deserialize)]
struct RawMap {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl<'de> Deserialize<'de> for MobiusMap {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let r = RawMap::deserialize(de)?;
        MobiusMap::normalize(r.a, r.b, r.c, r.d).map_err(serde::de::Error::custom)
    }
}

impl MobiusMap {
    pub fn normalize(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::ZeroDeterminant);
        }
        let s = det.abs().sqrt();
        Ok(MobiusMap { a: a / s, b: b / s, c: c / s, d: d / s, epsilon: if det > 0.0 { 1 } else { -1 } })
    }

    pub fn identity() -> Self {
        MobiusMap { a: 1.0, b: 0.0, c: 0.0, d: 1.0, epsilon: 1 }
    }

    /// `z -> -1/z`.
    pub fn transpose() -> Self {
        MobiusMap { a: 0.0, b: -1.0, c: 1.0, d: 0.0, epsilon: 1 }
    }

    /// `z -> 1/z`.
    pub fn reciprocal() -> Self {
        MobiusMap { a: 0.0, b: 1.0, c: 1.0, d: 0.0, epsilon: -1 }
    }

    /// `z -> -z`.
    pub fn negation() -> Self {
        MobiusMap { a: -1.0, b: 0.0, c: 0.0, d: 1.0, epsilon: -1 }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, z: Complex64) -> Result<Complex64> {
        let den = self.c * z + self.d;
        if den.norm() == 0.0 {
            return Err(Error::PoleHit(format!("{z}")));
        }
        Ok((self.a * z + self.b) / den)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> MobiusMap {
        let a = self.a * other.a + self.b * other.c;
        let b = self.a * other.b + self.b * other.d;
        let c = self.c * other.a + self.d * other.c;
        let d = self.c * other.b + self.d * other.d;
        // product of unit-determinant matrices; renormalize only to scrub round-off
        MobiusMap::normalize(a, b, c, d).expect("product of invertible maps")
    }

    pub fn inverse(&self) -> MobiusMap {
        let e = self.epsilon as f64;
        MobiusMap { a: self.d * e, b: -self.b * e, c: -self.c * e, d: self.a * e, epsilon: self.epsilon }
    }

    /// True when both matrices induce the same map (they may differ by sign).
    pub fn same_map(&self, other: &MobiusMap, tol: f64) -> bool {
        let diff = |s: f64| {
            (self.a - s * other.a).abs()
                + (self.b - s * other.b).abs()
                + (self.c - s * other.c).abs()
                + (self.d - s * other.d).abs()
        };
        diff(1.0) <= tol || diff(-1.0) <= tol
    }
}
