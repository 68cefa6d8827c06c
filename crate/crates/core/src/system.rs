//! SSK transmitter, RIS phase policies, received-signal synthesis and the
//! ML detectors.
//!
//! Transmit power is fixed at `P_s = 1` by the simulator, so the noise
//! power `N_0 = 1/ρ` is the only swept knob. Antenna indices are 0-based in
//! code; the bit label of antenna `n` is the natural binary of `n`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

use crate::channel::{BsRisChannel, ChannelRealization};
use crate::math::RngStream;
use crate::{Error, Result};

/// Rule the RIS uses to pick its reflection phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhasePolicy {
    /// Co-phase every reflected path for the active antenna.
    Intelligent,
    /// All phase shifts zero.
    Blind,
    /// Intelligent phases snapped to a uniform `2^bits`-level grid.
    Quantized { bits: u32 },
}

impl PhasePolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PhasePolicy::Quantized { bits } if !(1..=52).contains(&bits) => Err(Error::domain(
                format!("quantizer resolution must be in 1..=52 bits, got {bits}"),
            )),
            _ => Ok(()),
        }
    }

    /// Detector family used for this policy.
    pub fn detector(&self) -> DetectorKind {
        match self {
            PhasePolicy::Blind => DetectorKind::Blind,
            _ => DetectorKind::Intelligent,
        }
    }
}

impl fmt::Display for PhasePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhasePolicy::Intelligent => write!(f, "intelligent"),
            PhasePolicy::Blind => write!(f, "blind"),
            PhasePolicy::Quantized { bits } => write!(f, "quantized{bits}"),
        }
    }
}

/// Which RIS-UE phase the intelligent policy aligns to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseReference {
    /// The estimate `ψ̂`, the only phase the RIS controller can know.
    #[default]
    Estimated,
    /// The true channel phase `ψ` (genie alignment).
    True,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    Intelligent,
    Blind,
}

/// An SSK symbol: the index of the single active transmit antenna.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SskSymbol {
    index: usize,
    antennas: usize,
}

impl SskSymbol {
    pub fn new(index: usize, antennas: usize) -> Result<Self> {
        if !antennas.is_power_of_two() {
            return Err(Error::domain(format!(
                "antenna count must be a power of two, got {antennas}"
            )));
        }
        if index >= antennas {
            return Err(Error::domain(format!(
                "antenna index {index} out of range for {antennas} antennas"
            )));
        }
        Ok(SskSymbol { index, antennas })
    }

    /// Decodes `log2(N_t)` bits, most significant first.
    pub fn from_bits(bits: &[bool], antennas: usize) -> Result<Self> {
        if bits.len() != bits_per_symbol(antennas)? {
            return Err(Error::domain("bit count does not match the alphabet"));
        }
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b));
        SskSymbol::new(index, antennas)
    }

    /// 0-based antenna index.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn bits(&self) -> Vec<bool> {
        let n = self.antennas.trailing_zeros();
        (0..n).rev().map(|i| (self.index >> i) & 1 == 1).collect()
    }

    /// Number of differing label bits.
    pub fn hamming(&self, other: &SskSymbol) -> u32 {
        (self.index ^ other.index).count_ones()
    }
}

pub fn bits_per_symbol(antennas: usize) -> Result<usize> {
    if !antennas.is_power_of_two() {
        return Err(Error::domain(format!(
            "antenna count must be a power of two, got {antennas}"
        )));
    }
    Ok(antennas.trailing_zeros() as usize)
}

/// Hamming distance between the natural-binary labels of two antennas.
pub fn label_distance(a: usize, b: usize) -> u32 {
    (a ^ b).count_ones()
}

/// Wraps an angle into `(-π, π]`.
fn wrap_phase(x: f64) -> f64 {
    let y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Snaps a phase to the `2^bits`-level grid `-π + (k + 1/2)·2π/2^bits`.
pub fn quantize_phase(phase: f64, bits: u32) -> f64 {
    let levels = (1u64 << bits) as f64;
    let step = 2.0 * PI / levels;
    let k = ((wrap_phase(phase) + PI) / step).floor().clamp(0.0, levels - 1.0);
    -PI + (k + 0.5) * step
}

/// Reflection coefficients `e^{jφ_l}` currently applied by the RIS.
#[derive(Debug, Clone, PartialEq)]
pub struct RisConfiguration {
    phasors: Vec<Complex64>,
}

impl RisConfiguration {
    pub fn new(elements: usize) -> Self {
        RisConfiguration {
            phasors: vec![Complex64::new(1.0, 0.0); elements],
        }
    }

    pub fn phasors(&self) -> &[Complex64] {
        &self.phasors
    }

    pub fn phases(&self) -> Vec<f64> {
        self.phasors.iter().map(|p| p.arg()).collect()
    }

    /// Reconfigures for the active antenna.
    ///
    /// `reference_channel` is the RIS-UE channel the policy aligns to,
    /// normally the estimate `Ĥ`.
    pub fn configure(&mut self, policy: PhasePolicy, g_column: &[Complex64], reference_channel: &[Complex64]) {
        let one = Complex64::new(1.0, 0.0);
        match policy {
            PhasePolicy::Blind => self.phasors.iter_mut().for_each(|p| *p = one),
            PhasePolicy::Intelligent => {
                for ((p, &g), &h) in self.phasors.iter_mut().zip(g_column).zip(reference_channel) {
                    let z = g * h;
                    let r = z.norm();
                    *p = if r > 0.0 { z.conj() / r } else { one };
                }
            }
            PhasePolicy::Quantized { bits } if bits <= 8 => {
                let levels = 1usize << bits;
                let step = 2.0 * PI / levels as f64;
                let table: Vec<Complex64> =
                    (0..levels).map(|k| Complex64::from_polar(1.0, -PI + (k as f64 + 0.5) * step)).collect();
                for ((p, &g), &h) in self.phasors.iter_mut().zip(g_column).zip(reference_channel) {
                    let k = ((wrap_phase(-(g * h).arg()) + PI) / step).floor();
                    *p = table[(k as usize).min(levels - 1)];
                }
            }
            PhasePolicy::Quantized { bits } => {
                for ((p, &g), &h) in self.phasors.iter_mut().zip(g_column).zip(reference_channel) {
                    let phi = quantize_phase(-(g * h).arg(), bits);
                    *p = Complex64::from_polar(1.0, phi);
                }
            }
        }
    }

    /// `Σ_l h_l e^{jφ_l} g_l` for one antenna column.
    pub fn cascade(&self, g_column: &[Complex64], h: &[Complex64]) -> Complex64 {
        self.phasors
            .iter()
            .zip(g_column)
            .zip(h)
            .map(|((&p, &g), &h)| h * p * g)
            .sum()
    }
}

/// RIS phase vector for one antenna under `policy`, aligned to `h_hat`.
pub fn ris_phases(policy: PhasePolicy, g_column: &[Complex64], h_hat: &[Complex64]) -> Result<Vec<f64>> {
    policy.validate()?;
    if g_column.len() != h_hat.len() {
        return Err(Error::domain("BS-RIS column and RIS-UE vector differ in length"));
    }
    Ok(match policy {
        PhasePolicy::Blind => vec![0.0; h_hat.len()],
        PhasePolicy::Intelligent => g_column.iter().zip(h_hat).map(|(&g, &h)| -(g * h).arg()).collect(),
        PhasePolicy::Quantized { bits } => g_column
            .iter()
            .zip(h_hat)
            .map(|(&g, &h)| quantize_phase(-(g * h).arg(), bits))
            .collect(),
    })
}

/// Noiseless hypotheses `c_m = √P_s ζ Σ_l ĥ_l e^{jφ_l} g_{l,m}` seen
/// through the applied RIS configuration, written into `out`.
pub fn candidates(
    g: &BsRisChannel,
    h_hat: &[Complex64],
    config: &RisConfiguration,
    zeta: f64,
    ps: f64,
    out: &mut [Complex64],
) {
    let scale = ps.sqrt() * zeta;
    for (m, c) in out.iter_mut().enumerate().take(g.antennas()) {
        *c = config.cascade(g.column(m), h_hat) * scale;
    }
}

/// Received sample for active antenna `antenna` under the applied RIS
/// configuration. Noise is always drawn, even when `n0 = 0`, so stream
/// consumption does not depend on the SNR.
pub fn synthesize_rx(
    realization: &ChannelRealization,
    antenna: usize,
    config: &RisConfiguration,
    ps: f64,
    n0: f64,
    rng: &mut RngStream,
) -> Complex64 {
    let signal = config.cascade(realization.g.column(antenna), &realization.h) * ps.sqrt();
    signal + rng.complex_normal(n0)
}

/// Index minimising `|y - c_m|²`; ties go to the smaller index.
pub fn detect_ml(y: Complex64, candidates: &[Complex64]) -> usize {
    let mut best = 0;
    let mut best_metric = f64::INFINITY;
    for (m, &c) in candidates.iter().enumerate() {
        let d = (y - c).norm_sqr();
        if d < best_metric {
            best_metric = d;
            best = m;
        }
    }
    best
}

fn detect_with(
    y: Complex64,
    g: &BsRisChannel,
    h_hat: &[Complex64],
    config: &RisConfiguration,
    zeta: f64,
    ps: f64,
) -> Result<SskSymbol> {
    let mut c = vec![Complex64::new(0.0, 0.0); g.antennas()];
    candidates(g, h_hat, config, zeta, ps, &mut c);
    let m = detect_ml(y, &c);
    if g.antennas() == 1 {
        return Ok(SskSymbol { index: 0, antennas: 1 });
    }
    SskSymbol::new(m, g.antennas())
}

/// ML detection for the intelligent and quantized schemes.
pub fn detect_intelligent(
    y: Complex64,
    g: &BsRisChannel,
    h_hat: &[Complex64],
    config: &RisConfiguration,
    zeta: f64,
    ps: f64,
) -> Result<SskSymbol> {
    detect_with(y, g, h_hat, config, zeta, ps)
}

/// ML detection for the blind scheme, against `√P_s ζ Σ_l g_{l,m} ĥ_l`.
pub fn detect_blind(
    y: Complex64,
    g: &BsRisChannel,
    h_hat: &[Complex64],
    zeta: f64,
    ps: f64,
) -> Result<SskSymbol> {
    detect_with(y, g, h_hat, &RisConfiguration::new(h_hat.len()), zeta, ps)
}

/// Real operation counts of one detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub real_multiplications: u64,
    pub real_additions: u64,
}

pub fn complexity(kind: DetectorKind, elements: u64, antennas: u64) -> Result<ComplexityReport> {
    if elements == 0 || antennas == 0 {
        return Err(Error::domain("element and antenna counts must be positive"));
    }
    let (mul, add) = match kind {
        DetectorKind::Intelligent => (elements + 4, elements + 1),
        DetectorKind::Blind => (4 * elements + 6, 4 * elements + 1),
    };
    Ok(ComplexityReport {
        real_multiplications: mul * antennas,
        real_additions: add * antennas,
    })
}
