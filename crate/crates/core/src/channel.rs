//! Channel generation for the BS-RIS-UE link.
//!
//! The BS-RIS hop is i.i.d. Rayleigh, `g_{l,n} ~ CN(0, 1)`. The RIS-UE hop is
//! Rician with a UPA line-of-sight steering vector. The receiver only holds
//! an estimate `Ĥ` of the RIS-UE channel; the true channel is
//! `H = ζĤ + √(1-ζ²)ΔH` with `ΔH ~ CN(0, σ_e² I)` and `ζ = 1/√(1+σ_e²)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::math::{bessel_i0_scaled, bessel_i1_scaled, RngStream};
use crate::{Error, Result};

/// Rician factors at or above this value are treated as pure line of sight.
pub const KAPPA_LOS_LIMIT: f64 = 1e12;

/// Element spacing in wavelengths.
const SPACING_WAVELENGTHS: f64 = 0.5;

/// Line-of-sight geometry and Rician factor of the RIS-UE channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicianParams {
    /// Linear Rician factor.
    pub kappa: f64,
    /// Azimuth angle of departure (radians).
    pub phi_x: f64,
    /// Elevation angle of departure (radians).
    pub phi_y: f64,
    pub l_x: usize,
    pub l_y: usize,
}

impl RicianParams {
    /// Departure angles used when a scenario does not specify them.
    pub const DEFAULT_ANGLE: f64 = PI / 6.0;

    pub fn new(kappa: f64, l_x: usize, l_y: usize) -> Result<Self> {
        let p = RicianParams {
            kappa,
            phi_x: Self::DEFAULT_ANGLE,
            phi_y: Self::DEFAULT_ANGLE,
            l_x,
            l_y,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_angles(mut self, phi_x: f64, phi_y: f64) -> Result<Self> {
        self.phi_x = phi_x;
        self.phi_y = phi_y;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) {
            return Err(Error::domain(format!("rician factor must be >= 0, got {}", self.kappa)));
        }
        if self.l_x == 0 || self.l_y == 0 {
            return Err(Error::domain("RIS array dimensions must be positive"));
        }
        if !(self.phi_x.is_finite() && self.phi_y.is_finite()) {
            return Err(Error::domain("departure angles must be finite"));
        }
        Ok(())
    }

    /// Number of RIS elements `L = L_x · L_y`.
    pub fn elements(&self) -> usize {
        self.l_x * self.l_y
    }
}

/// How the RIS-UE estimation error variance is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsiErrorModel {
    /// `σ_e²` independent of the SNR.
    Fixed { sigma_e2: f64 },
    /// `σ_e² = 1/(N ρ)` for `N` pilot symbols.
    Variable { pilots: u32 },
}

impl CsiErrorModel {
    pub fn perfect() -> Self {
        CsiErrorModel::Fixed { sigma_e2: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CsiErrorModel::Fixed { sigma_e2 } if !(sigma_e2 >= 0.0 && sigma_e2.is_finite()) => {
                Err(Error::domain(format!("sigma_e2 must be finite and >= 0, got {sigma_e2}")))
            }
            CsiErrorModel::Variable { pilots: 0 } => {
                Err(Error::domain("pilot count must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Error variance at linear SNR `rho`.
    pub fn sigma_e2(&self, rho: f64) -> Result<f64> {
        self.validate()?;
        match *self {
            CsiErrorModel::Fixed { sigma_e2 } => Ok(sigma_e2),
            CsiErrorModel::Variable { pilots } => {
                if !(rho > 0.0) {
                    return Err(Error::domain(format!(
                        "variable CSI error needs a positive SNR, got {rho}"
                    )));
                }
                Ok(1.0 / (pilots as f64 * rho))
            }
        }
    }

    /// Correlation coefficient `ζ = 1/√(1+σ_e²)` at linear SNR `rho`.
    pub fn zeta(&self, rho: f64) -> Result<f64> {
        Ok(zeta_from_sigma_e2(self.sigma_e2(rho)?))
    }
}

pub fn zeta_from_sigma_e2(sigma_e2: f64) -> f64 {
    1.0 / (1.0 + sigma_e2).sqrt()
}

/// The `L × N_t` BS-RIS matrix, stored column by column so each transmit
/// antenna's channel is contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct BsRisChannel {
    elements: usize,
    antennas: usize,
    data: Vec<Complex64>,
}

impl BsRisChannel {
    pub fn zeros(elements: usize, antennas: usize) -> Self {
        BsRisChannel {
            elements,
            antennas,
            data: vec![Complex64::new(0.0, 0.0); elements * antennas],
        }
    }

    pub fn from_columns(columns: Vec<Vec<Complex64>>) -> Result<Self> {
        let antennas = columns.len();
        let elements = columns.first().map_or(0, Vec::len);
        if antennas == 0 || elements == 0 || columns.iter().any(|c| c.len() != elements) {
            return Err(Error::domain("BS-RIS columns must be non-empty and equally long"));
        }
        Ok(BsRisChannel {
            elements,
            antennas,
            data: columns.into_iter().flatten().collect(),
        })
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    /// Channel from transmit antenna `antenna` (0-based) to every element.
    pub fn column(&self, antenna: usize) -> &[Complex64] {
        &self.data[antenna * self.elements..(antenna + 1) * self.elements]
    }

    pub fn get(&self, element: usize, antenna: usize) -> Complex64 {
        self.column(antenna)[element]
    }

    fn resample(&mut self, rng: &mut RngStream) {
        for g in &mut self.data {
            *g = rng.complex_normal(1.0);
        }
    }
}

/// One channel draw with the receiver's estimate and the hidden truth.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// BS-RIS channel, known perfectly.
    pub g: BsRisChannel,
    /// Estimated RIS-UE channel `Ĥ`.
    pub h_hat: Vec<Complex64>,
    /// Estimation error `ΔH`.
    pub delta_h: Vec<Complex64>,
    /// True RIS-UE channel `H`.
    pub h: Vec<Complex64>,
    pub zeta: f64,
    pub sigma_e2: f64,
}

impl ChannelRealization {
    pub fn new(elements: usize, antennas: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        ChannelRealization {
            g: BsRisChannel::zeros(elements, antennas),
            h_hat: vec![zero; elements],
            delta_h: vec![zero; elements],
            h: vec![zero; elements],
            zeta: 1.0,
            sigma_e2: 0.0,
        }
    }

    /// Draws `G`, `Ĥ` and `ΔH` (in that order) and composes `H`.
    pub fn sample(
        params: &RicianParams,
        antennas: usize,
        sigma_e2: f64,
        rng: &mut RngStream,
    ) -> Result<Self> {
        params.validate()?;
        if !(sigma_e2 >= 0.0) {
            return Err(Error::domain(format!("sigma_e2 must be >= 0, got {sigma_e2}")));
        }
        let los = los_steering(params);
        let mut r = ChannelRealization::new(params.elements(), antennas);
        r.resample(params.kappa, &los, sigma_e2, rng);
        Ok(r)
    }

    /// In-place redraw reusing the buffers; `los` must come from
    /// [`los_steering`] for the same array.
    pub fn resample(&mut self, kappa: f64, los: &[Complex64], sigma_e2: f64, rng: &mut RngStream) {
        self.g.resample(rng);
        fill_rician(kappa, los, &mut self.h_hat, rng);
        let sd = sigma_e2.sqrt();
        for d in &mut self.delta_h {
            *d = rng.complex_normal(1.0) * sd;
        }
        let zeta = zeta_from_sigma_e2(sigma_e2);
        let err_gain = (1.0 - zeta * zeta).sqrt();
        for ((h, &hh), &d) in self.h.iter_mut().zip(&self.h_hat).zip(&self.delta_h) {
            *h = hh * zeta + d * err_gain;
        }
        self.zeta = zeta;
        self.sigma_e2 = sigma_e2;
    }
}

/// UPA line-of-sight steering vector with half-wavelength spacing.
///
/// Element `l` (0-based) sits at row `l mod L_x`, column `⌊l / L_x⌋`.
pub fn los_steering(params: &RicianParams) -> Vec<Complex64> {
    let k = 2.0 * PI * SPACING_WAVELENGTHS;
    let (sx, sy) = (params.phi_x.sin(), params.phi_y.sin());
    (0..params.elements())
        .map(|l| {
            let lx = (l % params.l_x) as f64;
            let ly = (l / params.l_x) as f64;
            Complex64::from_polar(1.0, k * (lx * sx + ly * sy))
        })
        .collect()
}

/// Splits the unit channel power into (LoS amplitude, scatter amplitude).
fn rician_gains(kappa: f64) -> (f64, f64) {
    if kappa >= KAPPA_LOS_LIMIT {
        (1.0, 0.0)
    } else {
        ((kappa / (kappa + 1.0)).sqrt(), (1.0 / (kappa + 1.0)).sqrt())
    }
}

fn fill_rician(kappa: f64, los: &[Complex64], out: &mut [Complex64], rng: &mut RngStream) {
    let (a_los, a_nlos) = rician_gains(kappa);
    for (h, &s) in out.iter_mut().zip(los) {
        // Scatter is always drawn so the stream position does not depend on κ.
        let w = rng.complex_normal(1.0);
        *h = s * a_los + w * a_nlos;
    }
}

/// Estimated RIS-UE channel `Ĥ = √(κ/(κ+1)) a + √(1/(κ+1)) w`.
pub fn sample_rician_channel(params: &RicianParams, rng: &mut RngStream) -> Result<Vec<Complex64>> {
    params.validate()?;
    let los = los_steering(params);
    let mut out = vec![Complex64::new(0.0, 0.0); los.len()];
    fill_rician(params.kappa, &los, &mut out, rng);
    Ok(out)
}

pub fn sample_rayleigh_matrix(
    elements: usize,
    antennas: usize,
    rng: &mut RngStream,
) -> Result<BsRisChannel> {
    if elements == 0 || antennas == 0 {
        return Err(Error::domain("rayleigh matrix dimensions must be positive"));
    }
    let mut g = BsRisChannel::zeros(elements, antennas);
    g.resample(rng);
    Ok(g)
}

/// `E(β̂)`, the mean amplitude of a unit-power Rician coefficient.
///
/// Evaluated with exponentially scaled Bessel functions so that
/// `e^{-κ/2} I_a(κ/2)` never overflows.
pub fn rician_amplitude_mean(kappa: f64) -> Result<f64> {
    if !(kappa >= 0.0) {
        return Err(Error::domain(format!("rician factor must be >= 0, got {kappa}")));
    }
    let k = kappa.min(KAPPA_LOS_LIMIT);
    let half = 0.5 * k;
    let bracket = (1.0 + k) * bessel_i0_scaled(half)? + k * bessel_i1_scaled(half)?;
    Ok((PI / (4.0 * k + 4.0)).sqrt() * bracket)
}

/// `Var(β̂) = 1 - E²(β̂)`.
pub fn rician_amplitude_variance(kappa: f64) -> Result<f64> {
    let m = rician_amplitude_mean(kappa)?;
    Ok(1.0 - m * m)
}

/// Builds the true channel from its estimate and the estimation error.
///
/// Returns `(H, ζ)`.
pub fn compose_imperfect_csi(
    h_hat: &[Complex64],
    delta_h: &[Complex64],
    csi: CsiErrorModel,
    rho: f64,
) -> Result<(Vec<Complex64>, f64)> {
    if h_hat.len() != delta_h.len() {
        return Err(Error::domain("estimate and error vectors differ in length"));
    }
    let zeta = csi.zeta(rho)?;
    let err_gain = (1.0 - zeta * zeta).sqrt();
    let h = h_hat
        .iter()
        .zip(delta_h)
        .map(|(&a, &d)| a * zeta + d * err_gain)
        .collect();
    Ok((h, zeta))
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn vec_c(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
        prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), n)
            .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
    }

    proptest! {
        #[test]
        fn variance_identity(kappa in 0.0f64..1e6) {
            let m = rician_amplitude_mean(kappa).unwrap();
            let v = rician_amplitude_variance(kappa).unwrap();
            prop_assert!((v - (1.0 - m * m)).abs() < 1e-15);
            prop_assert!(m <= 1.0 + 1e-12 && m >= PI.sqrt() / 2.0 - 1e-12);
        }

        #[test]
        fn composition_is_linear(
            a in vec_c(6), b in vec_c(6), c in vec_c(6), d in vec_c(6),
            s in -3.0f64..3.0, sigma in 0.0f64..4.0,
        ) {
            let csi = CsiErrorModel::Fixed { sigma_e2: sigma };
            let lin = |x: &[Complex64], y: &[Complex64]| -> Vec<Complex64> {
                x.iter().zip(y).map(|(&p, &q)| p * s + q).collect()
            };
            let (h1, _) = compose_imperfect_csi(&a, &b, csi, 1.0).unwrap();
            let (h2, _) = compose_imperfect_csi(&c, &d, csi, 1.0).unwrap();
            let (h, _) = compose_imperfect_csi(&lin(&a, &c), &lin(&b, &d), csi, 1.0).unwrap();
            for i in 0..6 {
                prop_assert!((h[i] - (h1[i] * s + h2[i])).norm() < 1e-10);
            }
        }
    }
}
