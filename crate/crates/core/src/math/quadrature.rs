//! Gauss-Chebyshev nodes and a globally adaptive Gauss-Kronrod integrator.
//!
//! The integrator is the oracle behind every closed form in
//! [`crate::analysis`], so it favours robustness over speed.

use crate::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Bisection depth cap for a single interval.
const MAX_DEPTH: u32 = 50;
const MAX_INTERVALS: usize = 20_000;

// 15-point Kronrod abscissae (non-negative half) and weights, with the
// embedded 7-point Gauss weights on the odd Kronrod nodes.
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
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Chebyshev nodes of the first kind, `cos((2k-1)π / 2K)` for `k = 1..=K`,
/// in generation order (strictly decreasing).
pub fn chebyshev_nodes(k: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::domain("chebyshev_nodes needs at least one node"));
    }
    let kf = k as f64;
    Ok((1..=k)
        .map(|i| {
            let node = ((2 * i - 1) as f64 * std::f64::consts::PI / (2.0 * kf)).cos();
            // cos(π/2) is 6e-17 in floating point; the middle node is exactly 0.
            if 2 * i - 1 == k {
                0.0
            } else {
                node
            }
        })
        .collect())
}

/// Adaptive integration settings.
///
/// A result is accepted once the summed Kronrod error estimate is at most
/// `max(abs_tol, rel_tol * |I|)`.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature::new(DEFAULT_TOLERANCE)
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
}

impl Quadrature {
    /// Same tolerance used as both absolute and relative bound.
    pub fn new(tol: f64) -> Self {
        Quadrature {
            abs_tol: tol,
            rel_tol: tol,
        }
    }

    /// Purely relative tolerance, for positive integrands whose value may be
    /// many orders of magnitude below one.
    pub fn relative(tol: f64) -> Self {
        Quadrature {
            abs_tol: 0.0,
            rel_tol: tol,
        }
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<f64> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::domain("integration limits must be finite"));
        }
        if a == b {
            return Ok(0.0);
        }
        let requested = |value: f64| self.abs_tol.max(self.rel_tol * value.abs());

        let mut segments = vec![gauss_kronrod(&f, a, b, 0)];
        loop {
            let value: f64 = segments.iter().map(|s| s.value).sum();
            let error: f64 = segments.iter().map(|s| s.error).sum();
            if !value.is_finite() {
                return Err(Error::domain("integrand produced a non-finite value"));
            }
            if error <= requested(value) {
                return Ok(value);
            }
            // Split the worst segment that can still be bisected.
            let worst = segments
                .iter()
                .enumerate()
                .filter(|(_, s)| s.depth < MAX_DEPTH && s.error > 0.0)
                .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
                .map(|(i, _)| i);
            let Some(worst) = worst.filter(|_| segments.len() < MAX_INTERVALS) else {
                return Err(Error::Quadrature {
                    estimate: value,
                    achieved: error,
                    requested: requested(value),
                });
            };
            let s = segments.swap_remove(worst);
            let mid = 0.5 * (s.a + s.b);
            segments.push(gauss_kronrod(&f, s.a, mid, s.depth + 1));
            segments.push(gauss_kronrod(&f, mid, s.b, s.depth + 1));
        }
    }

    /// Integrates over `[a, ∞)` through the map `x = a + t / (1 - t)`.
    pub fn integrate_to_infinity<F: Fn(f64) -> f64>(&self, f: F, a: f64) -> Result<f64> {
        self.integrate(
            |t| {
                let u = 1.0 - t;
                let x = a + t / u;
                let v = f(x);
                if v == 0.0 {
                    0.0
                } else {
                    v / (u * u)
                }
            },
            0.0,
            1.0,
        )
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: u32) -> Segment {
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
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
        depth,
    }
}

/// `∫_a^b f` to absolute-or-relative accuracy `tol`.
///
/// Endpoint singularities of type `x^{-1/2}` must be removed by the caller
/// (substitute `t = √x`).
pub fn adaptive_quadrature<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    Quadrature::new(tol).integrate(f, a, b)
}

/// `∫_a^∞ f` to absolute-or-relative accuracy `tol`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> Result<f64> {
    Quadrature::new(tol).integrate_to_infinity(f, a)
}
