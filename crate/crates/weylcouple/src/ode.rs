//! Explicit Runge–Kutta integrators in complex arithmetic.

use crate::error::{Error, Result};
use num_complex::Complex64 as C;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-14, max_steps: 2_000_000 }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn lin<const N: usize>(y: &[C; N], terms: &[(f64, &[C; N])], h: f64) -> [C; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += k[i] * (h * c);
        }
    }
    out
}

/// Adaptive Dormand–Prince 5(4) from `t0` to `t1` (either direction).
/// `post` runs after every accepted step and may rewrite the state.
pub fn dopri<const N: usize, F, P>(mut f: F, t0: f64, t1: f64, y0: [C; N], opts: OdeOptions, mut post: P) -> Result<[C; N]>
where
    F: FnMut(f64, &[C; N]) -> [C; N],
    P: FnMut(f64, &mut [C; N]),
{
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = span.abs() * 1e-3;
    for _ in 0..opts.max_steps {
        let rest = (t1 - t).abs();
        if rest <= 1e-15 * t1.abs().max(t0.abs()).max(1e-300) {
            return Ok(y);
        }
        let last = h >= rest;
        let hh = if last { rest } else { h } * dir;
        let k1 = f(t, &y);
        let k2 = f(t + hh * 0.2, &lin(&y, &[(A21, &k1)], hh));
        let k3 = f(t + hh * 0.3, &lin(&y, &[(A31, &k1), (A32, &k2)], hh));
        let k4 = f(t + hh * 0.8, &lin(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], hh));
        let k5 = f(t + hh * 8.0 / 9.0, &lin(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], hh));
        let k6 = f(t + hh, &lin(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], hh));
        let y5 = lin(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], hh);
        let k7 = f(t + hh, &y5);
        let mut err: f64 = 0.0;
        for i in 0..N {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hh;
            let sc = opts.atol + opts.rtol * y[i].norm().max(y5[i].norm());
            err = err.max(e.norm() / sc);
        }
        if !err.is_finite() {
            h *= 0.1;
            if h < 1e-300 {
                return Err(Error::RiccatiBlowup(format!("non-finite state near t = {t}")));
            }
            continue;
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + hh };
            y = y5;
            post(t, &mut y);
            if last {
                return Ok(y);
            }
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h < 1e-14 * span.abs() && h < 1e-300f64.max(1e-16 * t.abs()) {
            return Err(Error::RiccatiBlowup(format!("step size underflow near t = {t}")));
        }
    }
    Err(Error::NoConvergence("integrator step budget exhausted".into()))
}

/// Classical RK4 on a uniform grid. `f` receives a hint `side` in `{-1, 0, +1}`
/// for stages placed at the start, middle or end of a step, so integrands with
/// jumps at grid nodes can be sampled from inside the step.
pub fn rk4_grid<const N: usize, F>(mut f: F, grid: &[f64], y0: [C; N]) -> Vec<[C; N]>
where
    F: FnMut(f64, i8, &[C; N]) -> [C; N],
{
    let mut out = Vec::with_capacity(grid.len());
    let mut y = y0;
    out.push(y);
    for w in grid.windows(2) {
        let (t, h) = (w[0], w[1] - w[0]);
        let (start, end) = if h > 0.0 { (1, -1) } else { (-1, 1) };
        let k1 = f(t, start, &y);
        let k2 = f(t + 0.5 * h, 0, &lin(&y, &[(0.5, &k1)], h));
        let k3 = f(t + 0.5 * h, 0, &lin(&y, &[(0.5, &k2)], h));
        let k4 = f(t + h, end, &lin(&y, &[(1.0, &k3)], h));
        y = lin(&y, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)], h);
        out.push(y);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dopri_exponential() {
        let y = dopri(|_, y: &[C; 1]| [y[0] * C::new(0.0, 1.0)], 0.0, 3.0, [C::new(1.0, 0.0)], OdeOptions::default(), |_, _| {})
            .unwrap();
        assert!((y[0] - C::from_polar(1.0, 3.0)).norm() < 1e-6);
    }
}
