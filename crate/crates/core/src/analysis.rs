//! Analytical pairwise and bit error probabilities.
//!
//! For the intelligent scheme the decision variable is `X = |η - η̂|²`,
//! where the composite `η - η̂` is approximated by a Gaussian with
//! [`CompositeMoments`]. Then `X` is a scaled non-central χ² variable with
//! one degree of freedom and the unconditional PEP is `E[Q(√(τX))]`.
//!
//! For the blind scheme the composite is `CN(0, 2L)` and the PEP has a
//! closed form.
//!
//! Throughout, `A = 1 + ρ(1-ζ²)σ_e²L` is the noise inflation caused by
//! estimation error and `τ = ρζ²/(2A)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;

use crate::channel::{rician_amplitude_mean, zeta_from_sigma_e2, CsiErrorModel};
use crate::math::{chebyshev_nodes, q_function, Quadrature};
use crate::system::label_distance;
use crate::{Error, Result};

/// GCQ node count used when none is given.
pub const DEFAULT_GCQ_NODES: usize = 3;

/// Mean and variance of the Gaussian composite channel `η - η̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositeMoments {
    pub mu: f64,
    pub sigma2: f64,
}

impl CompositeMoments {
    /// Moments for `L` elements with Rician factor `kappa`.
    pub fn new(elements: usize, kappa: f64) -> Result<Self> {
        Self::from_amplitude_mean(elements, rician_amplitude_mean(kappa)?)
    }

    /// `μ = √π L E/2`, `σ² = L(8 - πE²)/4` for amplitude mean `E`.
    pub fn from_amplitude_mean(elements: usize, mean_amplitude: f64) -> Result<Self> {
        if elements == 0 {
            return Err(Error::domain("element count must be positive"));
        }
        let l = elements as f64;
        let e = mean_amplitude;
        Ok(CompositeMoments {
            mu: PI.sqrt() * l * e / 2.0,
            sigma2: l * (8.0 - PI * e * e) / 4.0,
        })
    }

    /// Moments under `bits`-bit phase quantisation: the mean shrinks by
    /// `sinc(π/2^Q)` and the lost coherent power reappears as variance.
    pub fn quantized(elements: usize, kappa: f64, bits: u32) -> Result<Self> {
        let e = rician_amplitude_mean(kappa)?;
        let base = Self::from_amplitude_mean(elements, e)?;
        let s = quantization_factor(bits)?;
        Ok(CompositeMoments {
            mu: base.mu * s,
            sigma2: base.sigma2 + elements as f64 * e * e * FRAC_PI_4 * (1.0 - s * s),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

/// SNR-dependent quantities shared by every UPEP expression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSnr {
    pub rho: f64,
    pub zeta2: f64,
    pub sigma_e2: f64,
    pub elements: usize,
    /// `A = 1 + ρ(1-ζ²)σ_e²L`.
    pub noise_inflation: f64,
    /// `τ = ρζ²/(2A)`.
    pub tau: f64,
}

impl EffectiveSnr {
    pub fn new(rho: f64, csi: CsiErrorModel, elements: usize) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::domain(format!("SNR must be finite and >= 0, got {rho}")));
        }
        let sigma_e2 = csi.sigma_e2(rho)?;
        Self::from_sigma_e2(rho, sigma_e2, elements)
    }

    pub fn from_sigma_e2(rho: f64, sigma_e2: f64, elements: usize) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::domain(format!("SNR must be finite and >= 0, got {rho}")));
        }
        if !(sigma_e2 >= 0.0 && sigma_e2.is_finite()) {
            return Err(Error::domain(format!("sigma_e2 must be finite and >= 0, got {sigma_e2}")));
        }
        if elements == 0 {
            return Err(Error::domain("element count must be positive"));
        }
        let zeta = zeta_from_sigma_e2(sigma_e2);
        let zeta2 = zeta * zeta;
        let noise_inflation = 1.0 + rho * (1.0 - zeta2) * sigma_e2 * elements as f64;
        Ok(EffectiveSnr {
            rho,
            zeta2,
            sigma_e2,
            elements,
            noise_inflation,
            tau: rho * zeta2 / (2.0 * noise_inflation),
        })
    }

    /// `ρζ²`, the useful-signal SNR.
    fn signal(&self) -> f64 {
        self.rho * self.zeta2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbepMethod {
    MonteCarlo,
    ExactIntegral,
    Gcq { nodes: usize },
    ClosedFormQApprox,
    Chernoff,
    Asymptotic,
    BlindClosedForm,
    BlindAsymptotic,
}

impl fmt::Display for AbepMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AbepMethod::MonteCarlo => write!(f, "mc"),
            AbepMethod::ExactIntegral => write!(f, "exact"),
            AbepMethod::Gcq { nodes } => write!(f, "gcq{nodes}"),
            AbepMethod::ClosedFormQApprox => write!(f, "closed"),
            AbepMethod::Chernoff => write!(f, "chernoff"),
            AbepMethod::Asymptotic => write!(f, "asymptotic"),
            AbepMethod::BlindClosedForm => write!(f, "blind_closed"),
            AbepMethod::BlindAsymptotic => write!(f, "blind_asymptotic"),
        }
    }
}

/// An error-probability value tagged with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbepEstimate {
    pub value: f64,
    pub method: AbepMethod,
    /// 95% half-width, Monte Carlo only.
    pub ci95: Option<f64>,
}

impl AbepEstimate {
    pub fn analytic(value: f64, method: AbepMethod) -> Self {
        AbepEstimate {
            value,
            method,
            ci95: None,
        }
    }
}

/// Density of `X = Z²` with `Z ~ N(μ, σ²)`.
pub fn noncentral_chi2_pdf(x: f64, m: &CompositeMoments) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("density argument must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(f64::INFINITY);
    }
    let r = x.sqrt();
    let s2 = m.sigma2;
    // exp(-(r-μ)²/2σ²)·(1 + e^{-2μr/σ²}) / (2√(2πσ²x))
    let log_f = -(r - m.mu).powi(2) / (2.0 * s2) + (-2.0 * m.mu * r / s2).exp().ln_1p()
        - (2.0 * (2.0 * PI * s2 * x).sqrt()).ln();
    Ok(log_f.exp())
}

pub fn noncentral_chi2_cdf(x: f64, m: &CompositeMoments) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("distribution argument must be >= 0, got {x}")));
    }
    let r = x.sqrt();
    let s = m.sigma();
    Ok((q_function((-r - m.mu) / s) - q_function((r - m.mu) / s)).clamp(0.0, 1.0))
}

/// `E[e^{sX}] = (1-2sσ²)^{-1/2} exp(sμ²/(1-2sσ²))`, for `s < 1/(2σ²)`.
pub fn mgf(s: f64, m: &CompositeMoments) -> Result<f64> {
    let d = 1.0 - 2.0 * s * m.sigma2;
    if !(d > 0.0) {
        return Err(Error::domain(format!("moment generating function undefined at s = {s}")));
    }
    Ok((s * m.mu * m.mu / d - 0.5 * d.ln()).exp())
}

/// Integrand `g(θ)` of `UPEP = (1/π)∫₀^{π/2} g(θ) dθ`, i.e.
/// `M_X(-τ/(2 sin²θ))` evaluated in log space.
pub fn exact_integrand(theta: f64, e: &EffectiveSnr, m: &CompositeMoments) -> f64 {
    let s2 = theta.sin().powi(2);
    let a = 2.0 * e.noise_inflation * s2;
    let d = a + e.signal() * m.sigma2;
    if d == 0.0 {
        // ρ = 0 and θ = 0: pure noise, Q(0) = 1/2 integrates to 1/2.
        return 1.0;
    }
    let log_g = 0.5 * (a / d).ln() - e.signal() * m.mu * m.mu / (2.0 * d);
    log_g.exp()
}

/// Exact single-integral UPEP of the intelligent scheme, by adaptive
/// quadrature to relative accuracy `tol`.
pub fn upep_intelligent_exact(e: &EffectiveSnr, m: &CompositeMoments, tol: f64) -> Result<AbepEstimate> {
    let v = Quadrature::relative(tol).integrate(|t| exact_integrand(t, e, m), 0.0, FRAC_PI_2)?;
    Ok(AbepEstimate::analytic(v / PI, AbepMethod::ExactIntegral))
}

/// Gauss-Chebyshev estimate of the exact UPEP with `nodes` nodes.
pub fn upep_intelligent_gcq(e: &EffectiveSnr, m: &CompositeMoments, nodes: usize) -> Result<AbepEstimate> {
    let sum: f64 = chebyshev_nodes(nodes)?
        .into_iter()
        .map(|v| (1.0 - v * v).sqrt() * exact_integrand(FRAC_PI_4 * v + FRAC_PI_4, e, m))
        .sum();
    Ok(AbepEstimate::analytic(
        PI / (4.0 * nodes as f64) * sum,
        AbepMethod::Gcq { nodes },
    ))
}

/// `E[exp(-cτX)]`, always inside the MGF's domain since `c ≥ 0`.
fn damped_mgf(e: &EffectiveSnr, m: &CompositeMoments, c: f64) -> f64 {
    mgf(-c * e.tau, m).unwrap_or(0.0)
}

/// Closed form from the two-exponential Q-function approximation.
pub fn upep_intelligent_closed(e: &EffectiveSnr, m: &CompositeMoments) -> AbepEstimate {
    let v = damped_mgf(e, m, 0.5) / 12.0 + damped_mgf(e, m, 2.0 / 3.0) / 4.0;
    AbepEstimate::analytic(v, AbepMethod::ClosedFormQApprox)
}

/// Chernoff upper bound `½ E[exp(-τX/2)]`.
pub fn upep_intelligent_chernoff(e: &EffectiveSnr, m: &CompositeMoments) -> AbepEstimate {
    AbepEstimate::analytic(0.5 * damped_mgf(e, m, 0.5), AbepMethod::Chernoff)
}

/// High-SNR limit of the Chernoff bound for a fixed `σ_e²`:
/// `√(2σ_e⁴/(8σ_e⁴+8-πE²)) · exp(-πLE²/(16σ_e⁴+16-2πE²))`.
pub fn intelligent_floor_fixed(sigma_e2: f64, elements: usize, kappa: f64) -> Result<AbepEstimate> {
    if !(sigma_e2 >= 0.0) {
        return Err(Error::domain(format!("sigma_e2 must be >= 0, got {sigma_e2}")));
    }
    let e2 = rician_amplitude_mean(kappa)?.powi(2);
    let s4 = sigma_e2 * sigma_e2;
    let l = elements as f64;
    let v = (2.0 * s4 / (8.0 * s4 + 8.0 - PI * e2)).sqrt()
        * (-PI * l * e2 / (16.0 * s4 + 16.0 - 2.0 * PI * e2)).exp();
    Ok(AbepEstimate::analytic(v, AbepMethod::Asymptotic))
}

/// Limit expression for `σ_e² = 1/(Nρ)`: `½ exp(-πLE²/(16-2πE²))`.
pub fn intelligent_limit_variable(elements: usize, kappa: f64) -> Result<AbepEstimate> {
    let e2 = rician_amplitude_mean(kappa)?.powi(2);
    let v = 0.5 * (-PI * elements as f64 * e2 / (16.0 - 2.0 * PI * e2)).exp();
    Ok(AbepEstimate::analytic(v, AbepMethod::Asymptotic))
}

/// Blind-scheme UPEP `½(1 - √(ρLζ²/(ρLζ² + 2A)))`.
pub fn upep_blind_closed(e: &EffectiveSnr) -> AbepEstimate {
    let x = e.signal() * e.elements as f64;
    let two_a = 2.0 * e.noise_inflation;
    // 1 - √r = (1 - r)/(1 + √r) avoids cancellation when r → 1.
    let r = x / (x + two_a);
    let v = 0.5 * (two_a / (x + two_a)) / (1.0 + r.sqrt());
    AbepEstimate::analytic(v, AbepMethod::BlindClosedForm)
}

/// Blind-scheme error floor `σ_e⁴/2`.
pub fn upep_blind_asymptotic(sigma_e2: f64) -> Result<AbepEstimate> {
    if !(sigma_e2 >= 0.0 && sigma_e2.is_finite()) {
        return Err(Error::domain(format!("sigma_e2 must be finite and >= 0, got {sigma_e2}")));
    }
    Ok(AbepEstimate::analytic(
        0.5 * sigma_e2 * sigma_e2,
        AbepMethod::BlindAsymptotic,
    ))
}

/// Mean aligned gain retained under `bits`-bit phase quantisation,
/// `sinc(π/2^Q)`.
pub fn quantization_factor(bits: u32) -> Result<f64> {
    if bits == 0 {
        return Err(Error::domain("quantizer needs at least one bit"));
    }
    let x = PI / 2f64.powi(bits.min(1000) as i32);
    Ok(if x < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x })
}

/// ABEP union bound
/// `(1/(N_t log₂N_t)) Σ_n Σ_m P(n → m) d_H(n, m)`.
///
/// `upep[n][m]` is the probability of deciding `m` when `n` was sent.
pub fn abep_union_bound(upep: &[Vec<f64>], antennas: usize) -> Result<f64> {
    if antennas < 2 || !antennas.is_power_of_two() {
        return Err(Error::domain(format!(
            "antenna count must be a power of two >= 2, got {antennas}"
        )));
    }
    if upep.len() != antennas || upep.iter().any(|row| row.len() != antennas) {
        return Err(Error::domain("pairwise error matrix must be N_t x N_t"));
    }
    let bits = antennas.trailing_zeros() as f64;
    let total: f64 = upep
        .iter()
        .enumerate()
        .flat_map(|(n, row)| {
            row.iter()
                .enumerate()
                .filter(move |&(m, _)| m != n)
                .map(move |(m, &p)| p * label_distance(n, m) as f64)
        })
        .sum();
    Ok(total / (antennas as f64 * bits))
}

/// Union bound when every ordered pair shares the same UPEP.
pub fn abep_uniform(upep: f64, antennas: usize) -> Result<f64> {
    let matrix = vec![vec![upep; antennas]; antennas];
    abep_union_bound(&matrix, antennas)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::db_to_linear;
    use crate::math::{adaptive_quadrature, gauss_error_phi, normal_cdf};

    fn moments(l: usize, kappa_db: f64) -> CompositeMoments {
        CompositeMoments::new(l, db_to_linear(kappa_db)).unwrap()
    }

    fn snr(rho_db: f64, sigma_e2: f64, l: usize) -> EffectiveSnr {
        EffectiveSnr::from_sigma_e2(db_to_linear(rho_db), sigma_e2, l).unwrap()
    }

    fn pdf_integral(m: &CompositeMoments, weight: impl Fn(f64) -> f64) -> f64 {
        // t = √x: f(x)dx = 2t f(t²) dt, integrated over the bulk of |Z|.
        let s = m.sigma();
        let hi = m.mu + 40.0 * s;
        let g = |t: f64| {
            if t == 0.0 {
                let m0 = m.mu / s;
                return 2.0 * (-0.5 * m0 * m0).exp() / (2.0 * PI).sqrt() / s * weight(0.0);
            }
            2.0 * t * noncentral_chi2_pdf(t * t, m).unwrap() * weight(t * t)
        };
        let lo = (m.mu - 40.0 * s).max(0.0);
        let mut v = Quadrature::relative(1e-12).integrate(g, lo, hi).unwrap();
        if lo > 0.0 {
            v += Quadrature::new(1e-14).integrate(g, 0.0, lo).unwrap();
        }
        v
    }

    #[test]
    fn moments_rayleigh_reference() {
        let m = CompositeMoments::new(100, 0.0).unwrap();
        assert!((m.mu - 100.0 * PI / 4.0).abs() < 1e-10);
        assert!((m.sigma2 - 100.0 * (8.0 - PI * PI / 4.0) / 4.0).abs() < 1e-10);
        assert!((m.mu - 78.5398).abs() < 1e-4);
        for kappa in [0.0, 1.0, 1e3] {
            assert!(CompositeMoments::new(1, kappa).unwrap().sigma2 > 0.0);
        }
        assert!(CompositeMoments::new(0, 1.0).is_err());
    }

    #[test]
    fn quantized_moments_reduce_to_continuous() {
        let a = CompositeMoments::new(64, 2.0).unwrap();
        let b = CompositeMoments::quantized(64, 2.0, 40).unwrap();
        assert!((a.mu - b.mu).abs() < 1e-9 && (a.sigma2 - b.sigma2).abs() < 1e-9);
        let q1 = CompositeMoments::quantized(64, 2.0, 1).unwrap();
        assert!(q1.mu < a.mu && q1.sigma2 > a.sigma2);
    }

    #[test]
    fn pdf_normalises() {
        for (l, k) in [(10, 3.0), (100, 3.0), (256, 0.0), (1, 10.0)] {
            let m = moments(l, k);
            let v = pdf_integral(&m, |_| 1.0);
            assert!((v - 1.0).abs() < 1e-8, "L={l}: {v}");
        }
    }

    #[test]
    fn pdf_central_case() {
        let m = CompositeMoments { mu: 0.0, sigma2: 2.5 };
        for x in [0.01, 0.5, 3.0, 20.0] {
            let want = (-x / (2.0 * m.sigma2)).exp() / (2.0 * PI * m.sigma2 * x).sqrt();
            let got = noncentral_chi2_pdf(x, &m).unwrap();
            assert!((got / want - 1.0).abs() < 1e-13);
        }
        assert!(noncentral_chi2_pdf(-1.0, &m).is_err());
    }

    #[test]
    fn pdf_large_mean_stays_finite() {
        let m = moments(256, 3.0);
        let x = m.mu * m.mu;
        let f = noncentral_chi2_pdf(x, &m).unwrap();
        assert!(f.is_finite() && f > 0.0);
    }

    #[test]
    fn cdf_matches_integrated_pdf() {
        let m = moments(10, 3.0);
        for x in [10.0f64, 40.0, 100.0, 400.0] {
            let r = x.sqrt();
            let want = normal_cdf((r - m.mu) / m.sigma()) - normal_cdf((-r - m.mu) / m.sigma());
            assert!((noncentral_chi2_cdf(x, &m).unwrap() - want).abs() < 1e-14);
            let integ = adaptive_quadrature(
                |t| 2.0 * t * noncentral_chi2_pdf(t * t, &m).unwrap_or(0.0),
                1e-300,
                r,
                1e-12,
            )
            .unwrap();
            assert!((integ - want).abs() < 1e-10);
        }
    }

    #[test]
    fn mgf_matches_numerical_transform() {
        let m = moments(10, 3.0);
        for s in [-0.1, -1.0, -10.0] {
            let numeric = pdf_integral(&m, |x| (s * x).exp());
            let closed = mgf(s, &m).unwrap();
            assert!((numeric - closed).abs() <= 1e-8 * closed.max(1e-300) + 1e-300, "s={s}: {numeric} vs {closed}");
        }
        assert!(mgf(1.0, &m).is_err());
    }

    #[test]
    fn exact_matches_two_dimensional_oracle() {
        // E[Q(√(τX))] with Q itself evaluated through the Craig integral.
        let craig = |x: f64| {
            adaptive_quadrature(|t| (-x * x / (2.0 * t.sin().powi(2))).exp(), 0.0, FRAC_PI_2, 1e-13).unwrap() / PI
        };
        for l in [16usize, 64, 256] {
            for rho_db in [-40.0, -35.0, -30.0] {
                let m = moments(l, 3.0);
                let e = snr(rho_db, 0.1, l);
                let exact = upep_intelligent_exact(&e, &m, 1e-12).unwrap().value;
                let oracle = pdf_integral(&m, |x| craig((e.tau * x).sqrt()));
                assert!(
                    (exact - oracle).abs() <= 1e-8 * oracle,
                    "L={l} rho={rho_db}: {exact} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn integrand_matches_unsimplified_form() {
        // Coefficient and exponent as first written, with the error-function
        // bracket 2 - Φ(-x) - Φ(x) left in place.
        let m = moments(64, 3.0);
        let e = snr(-30.0, 0.1, 64);
        let (mu, s2) = (m.mu, m.sigma2);
        let a = e.noise_inflation;
        let rz = e.rho * e.zeta2;
        for theta in [0.1f64, 0.5, 1.0, 1.5] {
            let s = theta.sin().powi(2);
            let arg = mu * mu * a * s2 * s / (2.0 * s2 * s2 * a * s + rz * s2 * s2 * s2);
            let bracket = 2.0 - gauss_error_phi(-arg.sqrt()) - gauss_error_phi(arg.sqrt());
            let pre = 1.0 / (PI * (2.0 * s2).sqrt())
                * (a * s2 * s / (2.0 * a * s + rz * s2)).sqrt()
                * (arg - mu * mu / (2.0 * s2)).exp()
                * bracket;
            let post = (2.0f64).sqrt() / (PI * s2.sqrt())
                * (a * s2 * s / (2.0 * a * s + rz * s2)).sqrt()
                * (arg - mu * mu / (2.0 * s2)).exp();
            let ours = exact_integrand(theta, &e, &m) / PI;
            assert!((pre / post - 1.0).abs() < 1e-14);
            assert!((ours / post - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn pure_noise_limits() {
        let m = moments(64, 3.0);
        let e = snr(-90.0, 0.1, 64);
        assert!((upep_intelligent_exact(&e, &m, 1e-10).unwrap().value - 0.5).abs() < 1e-3);
        let e = EffectiveSnr::from_sigma_e2(1e-12, 0.1, 64).unwrap();
        assert!((upep_intelligent_closed(&e, &m).value - 1.0 / 3.0).abs() < 1e-6);
        assert!((upep_blind_closed(&e).value - 0.5).abs() < 1e-5);
        let zero = EffectiveSnr::from_sigma_e2(0.0, 0.1, 64).unwrap();
        assert!((upep_intelligent_exact(&zero, &m, 1e-10).unwrap().value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gcq_single_node_is_midpoint() {
        let m = moments(64, 3.0);
        let e = snr(-33.0, 0.1, 64);
        let g1 = upep_intelligent_gcq(&e, &m, 1).unwrap().value;
        assert!((g1 - PI / 4.0 * exact_integrand(FRAC_PI_4, &e, &m)).abs() < 1e-16);
        assert!(upep_intelligent_gcq(&e, &m, 0).is_err());
    }

    #[test]
    fn gcq_converges_quadratically_to_exact() {
        // The Chebyshev rule integrates g(θ)·√(1-ϑ²), whose square-root end
        // behaviour limits the error to O(K⁻²).
        for l in [16usize, 64, 256] {
            for rho_db in [-40.0, -35.0, -30.0] {
                let m = moments(l, 3.0);
                let e = snr(rho_db, 0.1, l);
                let exact = upep_intelligent_exact(&e, &m, 1e-13).unwrap().value;
                let err = |k| upep_intelligent_gcq(&e, &m, k).unwrap().value - exact;
                let ratio = err(400) / err(200);
                assert!((ratio - 0.25).abs() < 0.01, "L={l} rho={rho_db}: ratio {ratio}");
                assert!((err(4000) / exact).abs() < 1e-5, "L={l} rho={rho_db}");
            }
        }
    }

    #[test]
    fn gcq_reference_errors() {
        // Frozen from an independent SciPy evaluation (quad, epsrel 1e-13).
        let cases = [
            (16usize, -40.0, 0.464670260207442, [0.015596943048483913, 0.001888571721194332, 0.0002733809694380196]),
            (200, -30.0, 0.00046816881284447547, [3.439553704983863e-05, 4.077810258794475e-06, 1.0185659431864486e-06]),
            (256, -32.0, 0.0003367031967166073, [3.273040951277446e-05, 3.0314376780325616e-06, 7.579641663498882e-07]),
        ];
        for (l, rho_db, exact_ref, errs) in cases {
            let m = moments(l, 3.0);
            let e = snr(rho_db, 0.1, l);
            let exact = upep_intelligent_exact(&e, &m, 1e-13).unwrap().value;
            assert!((exact / exact_ref - 1.0).abs() < 1e-9);
            for (k, want) in [3usize, 10, 20].into_iter().zip(errs) {
                let got = upep_intelligent_gcq(&e, &m, k).unwrap().value - exact_ref;
                assert!((got - want).abs() < 1e-9 * exact_ref, "L={l} K={k}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn closed_form_is_q_approximation_average() {
        let q_approx = |x: f64| (-x * x / 2.0).exp() / 12.0 + (-2.0 * x * x / 3.0).exp() / 4.0;
        for (l, rho_db) in [(64usize, -40.0), (144, -30.0), (256, -34.0)] {
            let m = moments(l, 3.0);
            let e = snr(rho_db, 0.1, l);
            let oracle = pdf_integral(&m, |x| q_approx((e.tau * x).sqrt()));
            let closed = upep_intelligent_closed(&e, &m).value;
            assert!((closed / oracle - 1.0).abs() < 1e-8, "{closed} vs {oracle}");
        }
    }

    #[test]
    fn closed_form_reference_deviation() {
        // Relative deviation from the exact integral, frozen from SciPy.
        for (l, rho_db, want) in [
            (64usize, -50.0, -0.27387238151649085),
            (144, -32.0, 0.2542519547652953),
            (256, -30.0, 0.0793425920709887),
            (64, 10.0, -0.02031891357092508),
        ] {
            let m = moments(l, 3.0);
            let e = snr(rho_db, 0.1, l);
            let exact = upep_intelligent_exact(&e, &m, 1e-13).unwrap().value;
            let dev = upep_intelligent_closed(&e, &m).value / exact - 1.0;
            assert!((dev - want).abs() < 1e-7, "L={l} rho={rho_db}: {dev}");
        }
    }

    #[test]
    fn chernoff_above_exact() {
        for l in [64usize, 256] {
            for i in 0..=60 {
                let m = moments(l, 3.0);
                let e = snr(-50.0 + i as f64, 0.1, l);
                let exact = upep_intelligent_exact(&e, &m, 1e-10).unwrap().value;
                assert!(upep_intelligent_chernoff(&e, &m).value >= exact);
            }
        }
    }

    #[test]
    fn chernoff_fixed_error_floor() {
        for (l, s, k) in [(64usize, 0.1, 3.0), (256, 1.0, 0.0), (144, 3.0, 10.0)] {
            let m = moments(l, k);
            let e = EffectiveSnr::from_sigma_e2(1e9, s, l).unwrap();
            let bound = upep_intelligent_chernoff(&e, &m).value;
            let floor = intelligent_floor_fixed(s, l, db_to_linear(k)).unwrap().value;
            assert!((bound - floor).abs() <= 1e-6 * floor + 1e-300, "{bound} vs {floor}");
        }
    }

    #[test]
    fn chernoff_variable_error_exponent_limit() {
        // σ_e² = 1/(Nρ): the exponential factor tends to the limit
        // expression while the square-root prefactor decays like ρ^{-1/2}.
        let (l, n) = (64usize, 10u32);
        let kappa = db_to_linear(3.0);
        let m = CompositeMoments::new(l, kappa).unwrap();
        let limit = intelligent_limit_variable(l, kappa).unwrap().value;
        let csi = CsiErrorModel::Variable { pilots: n };
        let e = EffectiveSnr::new(1e12, csi, l).unwrap();
        let a = e.noise_inflation;
        let pref = (2.0 * a / (2.0 * a + e.rho * e.zeta2 * m.sigma2)).sqrt();
        let exp_factor = upep_intelligent_chernoff(&e, &m).value / pref;
        assert!((exp_factor / limit - 1.0).abs() < 1e-6);
    }

    #[test]
    fn blind_closed_matches_quadrature() {
        for (rho_db, s, l) in [(0.0, 0.0, 16usize), (10.0, 0.01, 100), (-10.0, 0.1, 144), (20.0, 0.1, 16)] {
            let e = snr(rho_db, s, l);
            let lf = l as f64;
            let scale = e.signal() / (2.0 * e.noise_inflation);
            let f = |x: f64| (-x / (2.0 * lf)).exp() / (2.0 * lf) * q_function((scale * x).sqrt());
            let oracle = Quadrature::relative(1e-13).integrate_to_infinity(f, 0.0).unwrap();
            let closed = upep_blind_closed(&e).value;
            assert!((closed - oracle).abs() < 1e-9, "{closed} vs {oracle}");
        }
    }

    #[test]
    fn blind_perfect_csi_form() {
        let e = snr(5.0, 0.0, 32);
        let x = e.rho * 32.0;
        assert!((upep_blind_closed(&e).value - 0.5 * (1.0 - (x / (x + 2.0)).sqrt())).abs() < 1e-15);
    }

    #[test]
    fn blind_floor() {
        assert_eq!(upep_blind_asymptotic(0.0).unwrap().value, 0.0);
        assert!((upep_blind_asymptotic(0.1).unwrap().value - 5e-3).abs() < 1e-15);
        // The closed form saturates at ½(1 - 1/√(1+2σ_e⁴)); σ_e⁴/2 is its
        // first-order expansion, 1.5% high at σ_e² = 0.1.
        let e = EffectiveSnr::from_sigma_e2(1e9, 0.1, 144).unwrap();
        let limit = 0.5 * (1.0 - 1.0 / (1.0 + 2.0 * 0.01f64).sqrt());
        let v = upep_blind_closed(&e).value;
        assert!((v / limit - 1.0).abs() < 1e-6);
        assert!((v / 5e-3 - 1.0).abs() < 0.02);
    }

    #[test]
    fn effective_snr_tau_limit() {
        let e = EffectiveSnr::from_sigma_e2(1e12, 0.1, 144).unwrap();
        let want = 1.0 / (2.0 * 0.01 * 144.0);
        assert!((e.tau / want - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quantization_factor_values() {
        assert!((quantization_factor(1).unwrap() - 2.0 / PI).abs() < 1e-15);
        assert!((quantization_factor(3).unwrap() - 0.97450).abs() < 5e-6);
        assert!((quantization_factor(30).unwrap() - 1.0).abs() < 1e-12);
        assert!(quantization_factor(0).is_err());
    }

    #[test]
    fn union_bound_cases() {
        let p = 0.0123;
        assert!((abep_uniform(p, 2).unwrap() - p).abs() < 1e-17);
        assert!((abep_uniform(p, 4).unwrap() - 2.0 * p).abs() < 1e-16);
        // Enumerating the twelve ordered pairs of a 4-ary alphabet.
        let d: u32 = (0..4).flat_map(|n| (0..4).filter(move |&m| m != n).map(move |m| label_distance(n, m))).sum();
        assert_eq!(d, 16);
        assert_eq!(abep_union_bound(&vec![vec![0.0; 8]; 8], 8).unwrap(), 0.0);
        assert!(abep_union_bound(&[vec![0.0; 2]], 2).is_err());
        assert!(abep_uniform(p, 3).is_err());
    }
}
