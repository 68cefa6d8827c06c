//! Modified Bessel functions of the first kind, the Gaussian Q-function and
//! the error function.

use crate::{Error, Result};

/// Below this argument the power series is used; above it the large-argument
/// asymptotic expansion.
const SERIES_LIMIT: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    Zero,
    One,
}

impl BesselOrder {
    fn nu(self) -> f64 {
        match self {
            BesselOrder::Zero => 0.0,
            BesselOrder::One => 1.0,
        }
    }
}

impl TryFrom<u32> for BesselOrder {
    type Error = Error;

    fn try_from(order: u32) -> Result<Self> {
        match order {
            0 => Ok(BesselOrder::Zero),
            1 => Ok(BesselOrder::One),
            n => Err(Error::domain(format!("bessel order must be 0 or 1, got {n}"))),
        }
    }
}

/// `I_ν(x)` for ν ∈ {0, 1} and `x ≥ 0`.
pub fn bessel_i(order: BesselOrder, x: f64) -> Result<f64> {
    check_argument(x)?;
    Ok(if x < SERIES_LIMIT {
        series(order.nu(), x)
    } else {
        x.exp() * asymptotic_scaled(order.nu(), x)
    })
}

/// Exponentially scaled `e^{-x} I_ν(x)`; finite for every finite `x ≥ 0`.
pub fn bessel_i_scaled(order: BesselOrder, x: f64) -> Result<f64> {
    check_argument(x)?;
    Ok(if x < SERIES_LIMIT {
        (-x).exp() * series(order.nu(), x)
    } else {
        asymptotic_scaled(order.nu(), x)
    })
}

pub fn bessel_i0(x: f64) -> Result<f64> {
    bessel_i(BesselOrder::Zero, x)
}

pub fn bessel_i1(x: f64) -> Result<f64> {
    bessel_i(BesselOrder::One, x)
}

pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    bessel_i_scaled(BesselOrder::Zero, x)
}

pub fn bessel_i1_scaled(x: f64) -> Result<f64> {
    bessel_i_scaled(BesselOrder::One, x)
}

fn check_argument(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::domain(format!("bessel argument must be finite, got {x}")));
    }
    if x < 0.0 {
        return Err(Error::domain(format!("bessel argument must be non-negative, got {x}")));
    }
    Ok(())
}

// Σ (x/2)^{2m+ν} / (m! (m+ν)!)
fn series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = if nu == 0.0 { 1.0 } else { half };
    let mut sum = term;
    let mut m = 0.0;
    loop {
        m += 1.0;
        term *= q / (m * (m + nu));
        sum += term;
        if term <= sum * 1e-17 {
            return sum;
        }
    }
}

// e^{-x} I_ν(x) ≈ (2πx)^{-1/2} Σ_k (-1)^k Π_{i=1..k} (4ν² - (2i-1)²) / (k! (8x)^k),
// summed until the terms stop shrinking.
fn asymptotic_scaled(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut term = 1.0f64;
    let mut sum = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let odd = 2.0 * kf - 1.0;
        let next = -term * (mu - odd * odd) / (kf * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// Gaussian tail probability `Q(x) = ½ erfc(x/√2)`.
///
/// Saturates to 0 or 1 in the far tails rather than failing.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    q_function(-x)
}

/// The odd error function `Φ(x) = (2/√π) ∫₀^x e^{-v²} dv`.
pub fn gauss_error_phi(x: f64) -> f64 {
    libm::erf(x)
}
