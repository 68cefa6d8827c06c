//! Oracle suite behind the `selfcheck` command.
//!
//! Each check compares a library result with an independent evaluation
//! (direct quadrature, frozen reference values) and records the achieved
//! error, the tolerance and the wall time.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use crate::analysis::{
    mgf, noncentral_chi2_pdf, quantization_factor, upep_blind_closed, upep_intelligent_chernoff,
    upep_intelligent_closed, upep_intelligent_exact, upep_intelligent_gcq, CompositeMoments, EffectiveSnr,
};
use crate::channel::{rician_amplitude_mean, rician_amplitude_variance};
use crate::math::{bessel_i0_scaled, q_function, Quadrature};
use crate::{db_to_linear, Result};

/// Replaceable pieces, so the suite can be shown to catch a broken one.
#[derive(Clone, Copy)]
pub struct SelfcheckHooks {
    pub quantization_factor: fn(u32) -> Result<f64>,
}

impl Default for SelfcheckHooks {
    fn default() -> Self {
        SelfcheckHooks { quantization_factor }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub tolerance: f64,
    pub achieved: f64,
    pub runtime: Duration,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.achieved <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelfcheckReport {
    pub checks: Vec<Check>,
}

impl SelfcheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }
}

impl fmt::Display for SelfcheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<26} {:>10} {:>12} {:>10}  result", "check", "tolerance", "achieved", "time_ms")?;
        for c in &self.checks {
            writeln!(
                f,
                "{:<26} {:>10.1e} {:>12.3e} {:>10.2}  {}",
                c.name,
                c.tolerance,
                c.achieved,
                c.runtime.as_secs_f64() * 1e3,
                if c.passed() { "PASS" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

type Oracle = fn(&SelfcheckHooks) -> Result<f64>;

const CHECKS: [(&str, f64, Oracle); 9] = [
    ("pdf_normalization", 1e-8, pdf_normalization),
    ("mgf_duality", 1e-8, mgf_duality),
    ("gcq_vs_exact", 1e-9, gcq_vs_exact),
    ("closed_vs_q_approximation", 1e-8, closed_vs_q_approximation),
    ("closed_vs_exact_reference", 1e-7, closed_vs_exact_reference),
    ("chernoff_above_exact", 0.0, chernoff_above_exact),
    ("blind_closed_vs_quadrature", 1e-9, blind_closed_vs_quadrature),
    ("amplitude_moments", 1e-9, amplitude_moments),
    ("quantization_factor", 1e-10, quantization_gain),
];

/// Runs every oracle; numerical failures inside an oracle are returned as
/// errors, out-of-tolerance results as failed checks.
pub fn run_selfcheck(hooks: &SelfcheckHooks) -> Result<SelfcheckReport> {
    let mut checks = Vec::with_capacity(CHECKS.len());
    for (name, tolerance, oracle) in CHECKS {
        let start = Instant::now();
        let achieved = oracle(hooks)?;
        checks.push(Check {
            name,
            tolerance,
            achieved: if achieved.is_nan() { f64::INFINITY } else { achieved },
            runtime: start.elapsed(),
        });
    }
    Ok(SelfcheckReport { checks })
}

fn moments(l: usize, kappa_db: f64) -> Result<CompositeMoments> {
    CompositeMoments::new(l, db_to_linear(kappa_db))
}

fn snr(rho_db: f64, sigma_e2: f64, l: usize) -> Result<EffectiveSnr> {
    EffectiveSnr::from_sigma_e2(db_to_linear(rho_db), sigma_e2, l)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// `∫ w(x) f(x) dx` for the non-central χ² density, in `t = √x`.
fn pdf_integral(m: &CompositeMoments, weight: impl Fn(f64) -> f64) -> Result<f64> {
    let s = m.sigma();
    let hi = m.mu + 40.0 * s;
    let lo = (m.mu - 40.0 * s).max(0.0);
    let g = |t: f64| {
        if t == 0.0 {
            let m0 = m.mu / s;
            return 2.0 * (-0.5 * m0 * m0).exp() / (2.0 * PI).sqrt() / s * weight(0.0);
        }
        2.0 * t * noncentral_chi2_pdf(t * t, m).unwrap_or(f64::NAN) * weight(t * t)
    };
    let mut v = Quadrature::relative(1e-12).integrate(g, lo, hi)?;
    if lo > 0.0 {
        v += Quadrature::new(1e-14).integrate(g, 0.0, lo)?;
    }
    Ok(v)
}

fn pdf_normalization(_: &SelfcheckHooks) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (l, k) in [(10, 3.0), (100, 3.0), (256, 0.0)] {
        worst = worst.max((pdf_integral(&moments(l, k)?, |_| 1.0)? - 1.0).abs());
    }
    Ok(worst)
}

fn mgf_duality(_: &SelfcheckHooks) -> Result<f64> {
    let m = moments(10, 3.0)?;
    let mut worst: f64 = 0.0;
    for s in [-0.1, -1.0, -10.0] {
        let numeric = pdf_integral(&m, |x| (s * x).exp())?;
        worst = worst.max(rel(numeric, mgf(s, &m)?));
    }
    Ok(worst)
}

/// GCQ departures from the exact integral, frozen from an independent
/// SciPy evaluation; measured relative to the exact value.
fn gcq_vs_exact(_: &SelfcheckHooks) -> Result<f64> {
    let cases = [
        (16usize, -40.0, 0.464670260207442, [0.015596943048483913, 0.001888571721194332, 0.0002733809694380196]),
        (200, -30.0, 0.00046816881284447547, [3.439553704983863e-05, 4.077810258794475e-06, 1.0185659431864486e-06]),
        (256, -32.0, 0.0003367031967166073, [3.273040951277446e-05, 3.0314376780325616e-06, 7.579641663498882e-07]),
    ];
    let mut worst: f64 = 0.0;
    for (l, rho_db, exact_ref, errs) in cases {
        let m = moments(l, 3.0)?;
        let e = snr(rho_db, 0.1, l)?;
        let exact = upep_intelligent_exact(&e, &m, 1e-13)?.value;
        worst = worst.max(rel(exact, exact_ref));
        for (k, want) in [3usize, 10, 20].into_iter().zip(errs) {
            let got = upep_intelligent_gcq(&e, &m, k)?.value - exact;
            worst = worst.max((got - want).abs() / exact_ref);
        }
    }
    Ok(worst)
}

/// The closed form is the expectation of the two-exponential
/// approximation of `Q`, evaluated here by direct quadrature.
fn closed_vs_q_approximation(_: &SelfcheckHooks) -> Result<f64> {
    let q_approx = |x: f64| (-x * x / 2.0).exp() / 12.0 + (-2.0 * x * x / 3.0).exp() / 4.0;
    let mut worst: f64 = 0.0;
    for (l, rho_db) in [(64usize, -40.0), (144, -30.0), (256, -34.0)] {
        let m = moments(l, 3.0)?;
        let e = snr(rho_db, 0.1, l)?;
        let oracle = pdf_integral(&m, |x| q_approx((e.tau * x).sqrt()))?;
        worst = worst.max(rel(upep_intelligent_closed(&e, &m).value, oracle));
    }
    Ok(worst)
}

/// Relative deviation of the closed form from the exact integral, against
/// SciPy-frozen values.
fn closed_vs_exact_reference(_: &SelfcheckHooks) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (l, rho_db, want) in [
        (64usize, -50.0, -0.27387238151649085),
        (144, -32.0, 0.2542519547652953),
        (256, -30.0, 0.0793425920709887),
        (64, 10.0, -0.02031891357092508),
    ] {
        let m = moments(l, 3.0)?;
        let e = snr(rho_db, 0.1, l)?;
        let exact = upep_intelligent_exact(&e, &m, 1e-13)?.value;
        let dev = upep_intelligent_closed(&e, &m).value / exact - 1.0;
        worst = worst.max((dev - want).abs());
    }
    Ok(worst)
}

/// Largest shortfall of the Chernoff bound below the exact UPEP.
fn chernoff_above_exact(_: &SelfcheckHooks) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for l in [64usize, 256] {
        let m = moments(l, 3.0)?;
        for i in 0..=30 {
            let e = snr(-50.0 + 2.0 * i as f64, 0.1, l)?;
            let exact = upep_intelligent_exact(&e, &m, 1e-10)?.value;
            worst = worst.max(exact - upep_intelligent_chernoff(&e, &m).value);
        }
    }
    Ok(worst)
}

/// Blind closed form against `E[Q(√(cX))]` with `X` exponential of mean 2L.
fn blind_closed_vs_quadrature(_: &SelfcheckHooks) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (rho_db, s, l) in [(0.0, 0.0, 16usize), (10.0, 0.01, 100), (-10.0, 0.1, 144), (20.0, 0.1, 16)] {
        let e = snr(rho_db, s, l)?;
        let lf = l as f64;
        let scale = e.rho * e.zeta2 / (2.0 * e.noise_inflation);
        let f = |x: f64| (-x / (2.0 * lf)).exp() / (2.0 * lf) * q_function((scale * x).sqrt());
        let oracle = Quadrature::relative(1e-13).integrate_to_infinity(f, 0.0)?;
        worst = worst.max((upep_blind_closed(&e).value - oracle).abs());
    }
    Ok(worst)
}

/// Rician amplitude mean and variance against moments of the density
/// `2(1+κ)r e^{-κ-(1+κ)r²} I0(2r√(κ(1+κ)))`.
fn amplitude_moments(_: &SelfcheckHooks) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for kappa in [0.0, 1.0, db_to_linear(3.0), 10.0, 100.0] {
        let c = 2.0 * (kappa * (1.0 + kappa)).sqrt();
        let pdf = |r: f64| {
            let z = c * r;
            // I0(z) e^{-z} keeps the exponent bounded.
            let i0 = bessel_i0_scaled(z).unwrap_or(f64::NAN);
            2.0 * (1.0 + kappa) * r * i0 * (z - kappa - (1.0 + kappa) * r * r).exp()
        };
        let q = Quadrature::relative(1e-13);
        let m1 = q.integrate_to_infinity(|r| r * pdf(r), 0.0)?;
        let m2 = q.integrate_to_infinity(|r| r * r * pdf(r), 0.0)?;
        worst = worst
            .max(rel(rician_amplitude_mean(kappa)?, m1))
            .max((rician_amplitude_variance(kappa)? - (m2 - m1 * m1)).abs());
    }
    Ok(worst)
}

/// `E[cos ε]` for `ε` uniform on `[-π/2^Q, π/2^Q]`.
fn quantization_gain(hooks: &SelfcheckHooks) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for bits in 1..=6u32 {
        let half = PI / 2f64.powi(bits as i32);
        let oracle = Quadrature::new(1e-14).integrate(f64::cos, -half, half)? / (2.0 * half);
        worst = worst.max(((hooks.quantization_factor)(bits)? - oracle).abs());
    }
    Ok(worst)
}
