//! Nevanlinna functions: expression trees, spectral measures, class predicates
//! and Stieltjes inversion.

mod classify;
mod expr;
mod invert;
mod measure;

pub use classify::{
    classify, densely_defined_check, extension_type, limits_on_negative_axis, ClassReport, DenseReport, ExtReal, ExtensionType,
    SamplingPlan, Tri,
};
pub use expr::{neg_pow, NevanlinnaExpr};
pub use invert::{explicit_stieltjes, stieltjes_invert, InversionOptions};
pub use measure::{Atom, DensitySegment, PowerTail, SpectralMeasure};

use crate::mobius::MobiusMap;

/// `ε1 ε2 · μ2(f(μ1(z)))`.
pub fn mobius_transform(f: &NevanlinnaExpr, mu1: MobiusMap, mu2: MobiusMap) -> NevanlinnaExpr {
    NevanlinnaExpr::mobius(mu1, mu2, f.clone())
}
