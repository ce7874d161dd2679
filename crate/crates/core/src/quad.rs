//! Adaptive Gauss-Kronrod (7-15) quadrature on finite intervals.

use crate::error::{PricingError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and recursion limit for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_depth: 40,
        }
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]`, bisecting until each panel meets its share
/// of the tolerance. Fails if a panel still misses it at `max_depth`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(PricingError::QuadratureFailure(format!(
            "non-finite interval [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let (whole, _) = gk15(&f, a, b);
    let tol = opts.abs_tol.max(opts.rel_tol * whole.abs());
    recurse(&f, a, b, whole, tol, 0, opts.max_depth)
}

fn recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    estimate: f64,
    tol: f64,
    depth: u32,
    max_depth: u32,
) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let (left, left_err) = gk15(f, a, mid);
    let (right, right_err) = gk15(f, mid, b);
    let refined = left + right;
    if !refined.is_finite() {
        return Err(PricingError::QuadratureFailure(format!(
            "non-finite integrand on [{a}, {b}]"
        )));
    }
    if left_err + right_err <= tol || (refined - estimate).abs() <= 1e-3 * tol {
        return Ok(refined);
    }
    if depth >= max_depth {
        return Err(PricingError::QuadratureFailure(format!(
            "depth limit {max_depth} reached on [{a}, {b}], error estimate {}",
            left_err + right_err
        )));
    }
    Ok(recurse(f, a, mid, left, 0.5 * tol, depth + 1, max_depth)?
        + recurse(f, mid, b, right, 0.5 * tol, depth + 1, max_depth)?)
}
