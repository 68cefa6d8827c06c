//! Sharded, reproducible bit-error-rate simulation.
//!
//! Every SNR point gets its own key, `derive_seed(seed, snr_db bits)`, and
//! trials are cut into fixed shards of [`SHARD_SIZE`]; shard `k` draws from
//! stream `k` of that key. Tallies therefore depend only on
//! `(seed, config, snr)`, never on the worker count or scheduling.
//!
//! Each trial consumes the stream in a fixed order: `G` (column by column),
//! `Ĥ`, `ΔH`, the active antenna, then the noise sample. The order does not
//! depend on the phase policy, so different policies evaluated at the same
//! point see identical channels and noise.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::analysis::{
    abep_uniform, intelligent_floor_fixed, upep_blind_asymptotic, upep_blind_closed,
    upep_intelligent_chernoff, upep_intelligent_closed, upep_intelligent_gcq, AbepMethod,
    CompositeMoments, EffectiveSnr, DEFAULT_GCQ_NODES,
};
use crate::channel::{los_steering, ChannelRealization, CsiErrorModel, RicianParams};
use crate::math::{normal_cdf, EmpiricalDistribution, RngStream};
use crate::system::{
    bits_per_symbol, candidates, detect_ml, label_distance, PhasePolicy, PhaseReference,
    RisConfiguration,
};
use crate::{db_to_linear, Error, Result};

/// Trials per shard.
pub const SHARD_SIZE: u64 = 8192;

/// Smallest trial budget accepted by [`SystemConfig::validate`].
pub const MIN_TRIALS: u64 = 10_000;

/// Transmit power; the noise power is `1/ρ`.
const PS: f64 = 1.0;

/// Budget growth for points with too few errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Escalation {
    pub min_errors: u64,
    pub factor: u64,
    pub max_trials: u64,
}

impl Default for Escalation {
    fn default() -> Self {
        Escalation {
            min_errors: 100,
            factor: 10,
            max_trials: 10_000_000,
        }
    }
}

impl Escalation {
    pub fn disabled() -> Self {
        Escalation {
            min_errors: 0,
            factor: 1,
            max_trials: 0,
        }
    }
}

/// Every knob of one simulated scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub antennas: usize,
    pub rician: RicianParams,
    pub csi: CsiErrorModel,
    pub policy: PhasePolicy,
    #[serde(default)]
    pub reference: PhaseReference,
    pub snr_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub escalation: Escalation,
}

impl SystemConfig {
    pub fn elements(&self) -> usize {
        self.rician.elements()
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas < 2 || !self.antennas.is_power_of_two() {
            return Err(Error::domain(format!(
                "N_t must be a power of two >= 2, got {}",
                self.antennas
            )));
        }
        self.rician.validate()?;
        self.csi.validate()?;
        self.policy.validate()?;
        if self.trials < MIN_TRIALS {
            return Err(Error::domain(format!(
                "trials must be >= {MIN_TRIALS}, got {}",
                self.trials
            )));
        }
        if self.snr_db.is_empty() {
            return Err(Error::domain("SNR grid is empty"));
        }
        if let Some(x) = self.snr_db.iter().find(|x| x.is_nan() || **x == f64::NEG_INFINITY) {
            return Err(Error::domain(format!("invalid SNR value {x}")));
        }
        Ok(())
    }
}

/// Parallelism settings; they never change results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub workers: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl RunOptions {
    pub fn with_workers(workers: usize) -> Self {
        RunOptions {
            workers: workers.max(1),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub trials: u64,
    pub bits: u64,
    pub bit_errors: u64,
    pub symbol_errors: u64,
}

impl Tally {
    fn merge(&mut self, other: &Tally) {
        self.trials += other.trials;
        self.bits += other.bits;
        self.bit_errors += other.bit_errors;
        self.symbol_errors += other.symbol_errors;
    }
}

/// Simulated BER at one SNR.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub ci95: f64,
    pub trials: u64,
    pub symbol_errors: u64,
}

impl BerPoint {
    fn from_tally(snr_db: f64, t: &Tally) -> Self {
        let ber = if t.bits == 0 { 0.0 } else { t.bit_errors as f64 / t.bits as f64 };
        BerPoint {
            snr_db,
            errors: t.bit_errors,
            bits: t.bits,
            ber,
            ci95: ci95_halfwidth(t.bit_errors, t.bits),
            trials: t.trials,
            symbol_errors: t.symbol_errors,
        }
    }

    pub fn symbol_error_rate(&self) -> f64 {
        self.symbol_errors as f64 / self.trials.max(1) as f64
    }
}

/// 95% half-width: normal approximation, Wilson interval below 30 errors.
pub fn ci95_halfwidth(errors: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let p = errors as f64 / n;
    if errors >= 30 {
        z * (p * (1.0 - p) / n).sqrt()
    } else {
        let z2 = z * z;
        z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
    }
}

struct PointContext<'a> {
    cfg: &'a SystemConfig,
    policies: &'a [PhasePolicy],
    los: Vec<Complex64>,
    sigma_e2: f64,
    n0: f64,
    key: u64,
    bits_per_symbol: u64,
}

struct Workspace {
    realization: ChannelRealization,
    config: RisConfiguration,
    candidates: Vec<Complex64>,
}

impl PointContext<'_> {
    fn workspace(&self) -> Workspace {
        let l = self.cfg.elements();
        Workspace {
            realization: ChannelRealization::new(l, self.cfg.antennas),
            config: RisConfiguration::new(l),
            candidates: vec![Complex64::new(0.0, 0.0); self.cfg.antennas],
        }
    }

    fn run_shard(&self, shard: u64, count: u64, ws: &mut Workspace) -> Vec<Tally> {
        let mut rng = RngStream::new(self.key, shard);
        let mut tallies = vec![Tally::default(); self.policies.len()];
        let sqrt_ps = PS.sqrt();
        for _ in 0..count {
            let r = &mut ws.realization;
            r.resample(self.cfg.rician.kappa, &self.los, self.sigma_e2, &mut rng);
            let active = rng.below(self.cfg.antennas);
            let noise = rng.complex_normal(self.n0);
            let reference = match self.cfg.reference {
                PhaseReference::Estimated => &r.h_hat,
                PhaseReference::True => &r.h,
            };
            for (policy, tally) in self.policies.iter().zip(tallies.iter_mut()) {
                ws.config.configure(*policy, r.g.column(active), reference);
                let y = ws.config.cascade(r.g.column(active), &r.h) * sqrt_ps + noise;
                candidates(&r.g, &r.h_hat, &ws.config, r.zeta, PS, &mut ws.candidates);
                let decided = detect_ml(y, &ws.candidates);
                tally.trials += 1;
                tally.bits += self.bits_per_symbol;
                if decided != active {
                    tally.symbol_errors += 1;
                    tally.bit_errors += u64::from(label_distance(decided, active));
                }
            }
        }
        tallies
    }
}

fn shard_len(shard: u64, target: u64) -> u64 {
    (target - shard * SHARD_SIZE).min(SHARD_SIZE)
}

/// Runs `jobs` (shard, trial count) on up to `workers` threads.
fn run_jobs(ctx: &PointContext, jobs: &[(u64, u64)], workers: usize) -> Vec<(u64, Vec<Tally>)> {
    let next = AtomicUsize::new(0);
    let out = Mutex::new(Vec::with_capacity(jobs.len()));
    let workers = workers.clamp(1, jobs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let mut ws = ctx.workspace();
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&(shard, count)) = jobs.get(i) else { break };
                    let t = ctx.run_shard(shard, count, &mut ws);
                    out.lock().expect("tally lock poisoned").push((shard, t));
                }
            });
        }
    });
    let mut v = out.into_inner().expect("tally lock poisoned");
    v.sort_by_key(|(s, _)| *s);
    v
}

/// Simulates several phase policies on shared channel and noise draws.
///
/// Escalation is driven by the policy with the fewest errors, so every
/// policy ends with the same trial count.
pub fn run_point_policies(
    cfg: &SystemConfig,
    policies: &[PhasePolicy],
    snr_db: f64,
    opts: RunOptions,
) -> Result<Vec<BerPoint>> {
    if cfg.trials == 0 {
        return Err(Error::domain("trials must be positive"));
    }
    if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
        return Err(Error::domain(format!("invalid SNR value {snr_db}")));
    }
    if policies.is_empty() {
        return Err(Error::domain("no phase policy to simulate"));
    }
    for p in policies {
        p.validate()?;
    }
    cfg.rician.validate()?;
    let rho = db_to_linear(snr_db);
    let ctx = PointContext {
        cfg,
        policies,
        los: los_steering(&cfg.rician),
        sigma_e2: cfg.csi.sigma_e2(rho)?,
        n0: PS / rho,
        key: RngStream::derive_seed(cfg.seed, snr_db.to_bits()),
        bits_per_symbol: bits_per_symbol(cfg.antennas)? as u64,
    };

    // Per-shard tallies; a partial shard is recomputed in full when the
    // budget grows, so the result equals a fresh run at the final budget.
    let mut shards: Vec<(u64, Vec<Tally>)> = Vec::new();
    let mut target = cfg.trials;
    loop {
        let n_shards = target.div_ceil(SHARD_SIZE);
        let jobs: Vec<(u64, u64)> = (0..n_shards)
            .filter(|&k| shards.get(k as usize).is_none_or(|(_, t)| t[0].trials != shard_len(k, target)))
            .map(|k| (k, shard_len(k, target)))
            .collect();
        for (k, t) in run_jobs(&ctx, &jobs, opts.workers) {
            let k = k as usize;
            if k < shards.len() {
                shards[k] = (k as u64, t);
            } else {
                debug_assert_eq!(k, shards.len());
                shards.push((k as u64, t));
            }
        }
        let totals = merge(&shards, policies.len());
        let fewest = totals.iter().map(|t| t.bit_errors).min().unwrap_or(0);
        let esc = cfg.escalation;
        let grown = target.saturating_mul(esc.factor).min(esc.max_trials);
        if fewest >= esc.min_errors || grown <= target {
            return Ok(totals.iter().map(|t| BerPoint::from_tally(snr_db, t)).collect());
        }
        target = grown;
    }
}

fn merge(shards: &[(u64, Vec<Tally>)], n: usize) -> Vec<Tally> {
    let mut totals = vec![Tally::default(); n];
    for (_, t) in shards {
        for (acc, x) in totals.iter_mut().zip(t) {
            acc.merge(x);
        }
    }
    totals
}

/// Simulated BER of `cfg.policy` at one SNR. `snr_db = +∞` runs noiselessly.
pub fn run_point(cfg: &SystemConfig, snr_db: f64, opts: RunOptions) -> Result<BerPoint> {
    Ok(run_point_policies(cfg, &[cfg.policy], snr_db, opts)?[0])
}

/// One output row: a simulated or analytical ABEP at one SNR.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub snr_db: f64,
    pub method: AbepMethod,
    pub abep: f64,
    pub ci95: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub points: Vec<BerPoint>,
    pub rows: Vec<SweepRow>,
}

/// What a sweep evaluates besides the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    pub simulate: bool,
    pub gcq_nodes: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            simulate: true,
            gcq_nodes: DEFAULT_GCQ_NODES,
        }
    }
}

/// Analytical ABEP rows for `cfg.policy` at one SNR.
pub fn analytic_rows(cfg: &SystemConfig, snr_db: f64, gcq_nodes: usize) -> Result<Vec<SweepRow>> {
    let rho = db_to_linear(snr_db);
    let l = cfg.elements();
    let e = EffectiveSnr::new(rho, cfg.csi, l)?;
    let nt = cfg.antennas;
    let row = |method, upep: f64| -> Result<SweepRow> {
        Ok(SweepRow {
            snr_db,
            method,
            abep: abep_uniform(upep, nt)?,
            ci95: None,
        })
    };
    let fixed_error = match cfg.csi {
        CsiErrorModel::Fixed { sigma_e2 } if sigma_e2 > 0.0 => Some(sigma_e2),
        _ => None,
    };
    let mut rows = Vec::new();
    match cfg.policy {
        PhasePolicy::Blind => {
            rows.push(row(AbepMethod::BlindClosedForm, upep_blind_closed(&e).value)?);
            if let Some(s) = fixed_error {
                rows.push(row(AbepMethod::BlindAsymptotic, upep_blind_asymptotic(s)?.value)?);
            }
        }
        PhasePolicy::Intelligent | PhasePolicy::Quantized { .. } => {
            let m = match cfg.policy {
                PhasePolicy::Quantized { bits } => CompositeMoments::quantized(l, cfg.rician.kappa, bits)?,
                _ => CompositeMoments::new(l, cfg.rician.kappa)?,
            };
            let g = upep_intelligent_gcq(&e, &m, gcq_nodes)?;
            rows.push(row(g.method, g.value)?);
            rows.push(row(AbepMethod::ClosedFormQApprox, upep_intelligent_closed(&e, &m).value)?);
            rows.push(row(AbepMethod::Chernoff, upep_intelligent_chernoff(&e, &m).value)?);
            if let (Some(s), PhasePolicy::Intelligent) = (fixed_error, cfg.policy) {
                rows.push(row(AbepMethod::Asymptotic, intelligent_floor_fixed(s, l, cfg.rician.kappa)?.value)?);
            }
        }
    }
    Ok(rows)
}

/// Simulation (if enabled) plus every applicable analytical curve, in grid
/// order with the simulated row first at each SNR.
pub fn run_sweep(cfg: &SystemConfig, sweep: SweepOptions, opts: RunOptions) -> Result<SweepResult> {
    cfg.validate()?;
    let mut points = Vec::new();
    let mut rows = Vec::new();
    for &snr in &cfg.snr_db {
        if sweep.simulate {
            let p = run_point(cfg, snr, opts)?;
            rows.push(SweepRow {
                snr_db: snr,
                method: AbepMethod::MonteCarlo,
                abep: p.ber,
                ci95: Some(p.ci95),
            });
            points.push(p);
        }
        if snr.is_finite() {
            rows.extend(analytic_rows(cfg, snr, sweep.gcq_nodes)?);
        }
    }
    Ok(SweepResult { points, rows })
}

/// How the complex composite `η - η̂` is mapped to a real variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositeProjection {
    Real,
    /// `Re + Im`: mean `μ`, variance equal to the total complex variance.
    RealPlusImag,
}

/// Samples of `η - η̂ = Σ_l ĥ_l e^{jφ_l}(g_{l,0} - g_{l,1})` with the RIS
/// aligned to antenna 0, i.e. `Σ β̂_l(α_{l,0} - α_{l,1}e^{-jω_l})`.
pub fn sample_composite(rician: &RicianParams, n: usize, seed: u64) -> Result<Vec<Complex64>> {
    rician.validate()?;
    let l = rician.elements();
    let los = los_steering(rician);
    let mut rng = RngStream::new(seed, 0);
    let mut r = ChannelRealization::new(l, 2);
    let mut config = RisConfiguration::new(l);
    Ok((0..n)
        .map(|_| {
            r.resample(rician.kappa, &los, 0.0, &mut rng);
            config.configure(PhasePolicy::Intelligent, r.g.column(0), &r.h_hat);
            config.cascade(r.g.column(0), &r.h_hat) - config.cascade(r.g.column(1), &r.h_hat)
        })
        .collect())
}

/// Empirical distribution of the projected composite and its KS distance
/// to `N(μ, σ²)`.
pub fn fit_composite_distribution(
    cfg: &SystemConfig,
    n_samples: usize,
    projection: CompositeProjection,
) -> Result<(EmpiricalDistribution, f64)> {
    if cfg.policy != PhasePolicy::Intelligent {
        return Err(Error::domain("composite fit needs the intelligent policy"));
    }
    let samples = sample_composite(&cfg.rician, n_samples, cfg.seed)?;
    let projected = samples
        .iter()
        .map(|z| match projection {
            CompositeProjection::Real => z.re,
            CompositeProjection::RealPlusImag => z.re + z.im,
        })
        .collect();
    let emp = EmpiricalDistribution::new(projected, 100)?;
    let m = CompositeMoments::new(cfg.elements(), cfg.rician.kappa)?;
    let s = m.sigma();
    let ks = emp.ks_distance(|x| normal_cdf((x - m.mu) / s))?;
    Ok((emp, ks))
}
