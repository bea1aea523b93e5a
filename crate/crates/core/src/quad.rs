//! Adaptive Gauss–Kronrod quadrature and cumulative integral tables.
//!
//! The 7/15-point Gauss–Kronrod pair is applied recursively: an interval is
//! accepted once |K15 − G7| falls under the local tolerance, otherwise it is
//! bisected. Cumulative tables cache antiderivative values on a uniform grid
//! so that per-node queries (metric volumes, geodesic radii) cost one short
//! panel integration instead of a full re-integration from zero.

use crate::error::{Error, Result};

/// Kronrod abscissae on [0, 1] half-interval (symmetric about the center).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_47,
    0.0,
];

/// Kronrod weights matching `XGK`.
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// 7-point Gauss weights; Gauss nodes are the odd-indexed entries of `XGK`.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_69,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

fn kronrod_panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut res_kronrod = fc * WGK[7];
    let mut res_gauss = fc * WG[3];

    for (i, &x) in XGK.iter().enumerate().take(7) {
        let dx = half * x;
        let fsum = f(center - dx) + f(center + dx);
        res_kronrod += WGK[i] * fsum;
        if i % 2 == 1 {
            res_gauss += WG[i / 2] * fsum;
        }
    }
    res_kronrod *= half;
    res_gauss *= half;
    (res_kronrod, (res_kronrod - res_gauss).abs())
}

/// Integrate `f` over `[a, b]` to relative tolerance `rel_tol` (with a small
/// absolute floor so that zero integrands terminate).
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (coarse, _) = kronrod_panel(f, a, b);
    let scale = coarse.abs().max(1e-300);
    let tol = (rel_tol * scale).max(1e-305);
    let mut total = 0.0;
    adaptive(f, a, b, tol, 0, &mut total).map_err(|_| Error::QuadratureFailure {
        a,
        b,
        tol: rel_tol,
    })?;
    Ok(total)
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    depth: usize,
    acc: &mut f64,
) -> std::result::Result<(), ()> {
    let (value, err) = kronrod_panel(f, a, b);
    if err <= tol || (b - a).abs() < 1e-14 * (a.abs() + b.abs() + 1.0) {
        if err > tol && depth >= 60 {
            return Err(());
        }
        *acc += value;
        return Ok(());
    }
    if depth >= 60 {
        return Err(());
    }
    let mid = 0.5 * (a + b);
    adaptive(f, a, mid, 0.5 * tol, depth + 1, acc)?;
    adaptive(f, mid, b, 0.5 * tol, depth + 1, acc)
}

/// Cumulative antiderivative table for a smooth nonnegative-cost integrand:
/// caches F(x_i) = ∫₀^{x_i} f on a uniform grid and answers F(x) for any
/// x ≥ 0 with one panel integration from the nearest cached node.
pub struct CumulativeTable<F: Fn(f64) -> f64> {
    f: F,
    dx: f64,
    values: Vec<f64>,
    rel_tol: f64,
}

impl<F: Fn(f64) -> f64> CumulativeTable<F> {
    pub fn build(f: F, x_max: f64, nodes: usize, rel_tol: f64) -> Result<Self> {
        assert!(x_max > 0.0 && nodes >= 2);
        let dx = x_max / (nodes - 1) as f64;
        let mut values = Vec::with_capacity(nodes);
        values.push(0.0);
        let mut acc = 0.0;
        for i in 1..nodes {
            let a = (i - 1) as f64 * dx;
            acc += integrate(&f, a, a + dx, rel_tol)?;
            values.push(acc);
        }
        Ok(Self {
            f,
            dx,
            values,
            rel_tol,
        })
    }

    /// F(x) for any x ≥ 0; extends past the table by integrating the tail.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let last = (self.values.len() - 1) as f64 * self.dx;
        if x >= last {
            return Ok(self.values[self.values.len() - 1]
                + integrate(&self.f, last, x, self.rel_tol)?);
        }
        let i = (x / self.dx).floor() as usize;
        let xi = i as f64 * self.dx;
        Ok(self.values[i] + integrate(&self.f, xi, x, self.rel_tol)?)
    }
}

/// Surface measure of the unit sphere S^{n-1}: 2 π^{n/2} / Γ(n/2),
/// evaluated exactly for integer n via the half-integer Γ recursion.
pub fn sphere_area(n: usize) -> f64 {
    use std::f64::consts::PI;
    // Γ(n/2): n even → (n/2 − 1)!, n odd → √π · (n−2)!! / 2^{(n−1)/2}
    let gamma_half_n = if n.is_multiple_of(2) {
        let mut g = 1.0;
        for k in 1..(n / 2) {
            g *= k as f64;
        }
        g
    } else {
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < n as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    };
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half_n
}
