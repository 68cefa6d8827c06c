//! Experiment descriptions, figure presets, CSV output and the self-check.
//!
//! An [`Experiment`] is a fully resolved, serialisable recipe: running it
//! twice with the same seed gives byte-identical CSV, and the JSON sidecar
//! written next to the CSV deserialises back into the same experiment.

pub mod config;
pub mod output;
pub mod presets;
pub mod selfcheck;

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Display;

use crate::analysis::{
    noncentral_chi2_cdf, upep_intelligent_exact, upep_intelligent_gcq, abep_uniform, AbepMethod,
    CompositeMoments, EffectiveSnr, DEFAULT_GCQ_NODES,
};
use crate::channel::RicianParams;
use crate::math::{normal_cdf, EmpiricalDistribution};
use crate::montecarlo::{
    analytic_rows, run_point, run_point_policies, sample_composite, Escalation, RunOptions,
    SweepRow, SystemConfig,
};
use crate::system::PhasePolicy;
use crate::{db_to_linear, Error, Result};

pub use config::{parse_config, square_factors, DEFAULT_SEED};
pub use output::{format_csv, read_sidecar, write_outputs, CsvRow, Sidecar, CSV_HEADER};
pub use presets::{preset, PRESET_NAMES};
pub use selfcheck::{run_selfcheck, Check, SelfcheckHooks, SelfcheckReport};

/// Relative tolerance of the adaptive quadrature behind `exact` rows.
pub const EXACT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub name: String,
    pub description: String,
    pub seed: u64,
    pub gcq_nodes: usize,
    /// Points whose leading analytical ABEP is below this are not simulated.
    pub mc_min_abep: f64,
    pub kind: ExperimentKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentKind {
    /// Independent curves, each a config swept over its SNR grid.
    Sweep { curves: Vec<Curve> },
    /// Several phase policies simulated on shared draws.
    PolicyComparison {
        config: SystemConfig,
        policies: Vec<PhasePolicy>,
    },
    /// GCQ estimates for each node count next to the exact integral.
    GcqConvergence { config: SystemConfig, nodes: Vec<usize> },
    /// The x axis is the Rician factor; one curve per SNR.
    KappaSweep {
        config: SystemConfig,
        kappa_db: Vec<f64>,
    },
    /// Histogram of the composite channel against its Gaussian fit.
    CompositeFit {
        kappa_db: f64,
        elements: Vec<usize>,
        samples: usize,
        bins: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    /// Appended to method labels as `method[tag]`; empty for none.
    pub tag: String,
    pub config: SystemConfig,
    /// Also emit the adaptive-quadrature `exact` rows.
    pub exact: bool,
}

/// Command-line style overrides applied on top of a preset.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub gcq_nodes: Option<usize>,
    pub escalation: Option<Escalation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<CsvRow>,
    /// Scalar summaries recorded in the sidecar (e.g. KS distances).
    pub diagnostics: BTreeMap<String, f64>,
}

impl Experiment {
    /// Wraps a single parsed config; every SNR point is simulated.
    pub fn from_config(name: impl Into<String>, config: SystemConfig) -> Self {
        Experiment {
            name: name.into(),
            description: format!("{} policy, config file", config.policy),
            seed: config.seed,
            gcq_nodes: DEFAULT_GCQ_NODES,
            mc_min_abep: 0.0,
            kind: ExperimentKind::Sweep {
                curves: vec![Curve {
                    tag: String::new(),
                    config,
                    exact: false,
                }],
            },
        }
    }

    fn configs_mut(&mut self) -> Vec<&mut SystemConfig> {
        match &mut self.kind {
            ExperimentKind::Sweep { curves } => curves.iter_mut().map(|c| &mut c.config).collect(),
            ExperimentKind::PolicyComparison { config, .. }
            | ExperimentKind::GcqConvergence { config, .. }
            | ExperimentKind::KappaSweep { config, .. } => vec![config],
            ExperimentKind::CompositeFit { .. } => Vec::new(),
        }
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(k) = o.gcq_nodes {
            if k == 0 {
                return Err(Error::domain("GCQ needs at least one node"));
            }
            self.gcq_nodes = k;
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        let seed = self.seed;
        for cfg in self.configs_mut() {
            cfg.seed = seed;
            if let Some(t) = o.trials {
                cfg.trials = t;
            }
            if let Some(e) = o.escalation {
                cfg.escalation = e;
            }
        }
        if let (Some(t), ExperimentKind::CompositeFit { samples, .. }) = (o.trials, &mut self.kind) {
            *samples = usize::try_from(t).map_err(|_| Error::domain("sample count too large"))?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.gcq_nodes == 0 {
            return Err(Error::domain("GCQ needs at least one node"));
        }
        match &self.kind {
            ExperimentKind::Sweep { curves } => curves.iter().try_for_each(|c| c.config.validate()),
            ExperimentKind::PolicyComparison { config, policies } => {
                policies.iter().try_for_each(|p| p.validate())?;
                config.validate()
            }
            ExperimentKind::GcqConvergence { config, nodes } => {
                if nodes.contains(&0) {
                    return Err(Error::domain("GCQ needs at least one node"));
                }
                config.validate()
            }
            ExperimentKind::KappaSweep { config, .. } => config.validate(),
            ExperimentKind::CompositeFit { elements, samples, bins, .. } => {
                if elements.contains(&0) || *samples == 0 || *bins == 0 {
                    return Err(Error::domain("composite fit needs positive L, samples and bins"));
                }
                Ok(())
            }
        }
    }

    pub fn run(&self, opts: RunOptions) -> Result<ExperimentOutput> {
        self.validate()?;
        let mut out = ExperimentOutput {
            rows: Vec::new(),
            diagnostics: BTreeMap::new(),
        };
        match &self.kind {
            ExperimentKind::Sweep { curves } => {
                for c in curves {
                    self.run_curve(&c.config, &c.tag, c.exact, opts, &mut out.rows)?;
                }
            }
            ExperimentKind::PolicyComparison { config, policies } => {
                self.run_policies(config, policies, opts, &mut out.rows)?;
            }
            ExperimentKind::GcqConvergence { config, nodes } => {
                let l = config.elements();
                let m = CompositeMoments::new(l, config.rician.kappa)?;
                for &snr in &config.snr_db {
                    let e = EffectiveSnr::new(db_to_linear(snr), config.csi, l)?;
                    let exact = upep_intelligent_exact(&e, &m, EXACT_TOLERANCE)?;
                    out.rows.push(analytic(snr, AbepMethod::ExactIntegral, "", abep_uniform(exact.value, config.antennas)?));
                    for &k in nodes {
                        let g = upep_intelligent_gcq(&e, &m, k)?;
                        out.rows.push(analytic(snr, g.method, "", abep_uniform(g.value, config.antennas)?));
                    }
                }
            }
            ExperimentKind::KappaSweep { config, kappa_db } => {
                for &snr in &config.snr_db {
                    for &k in kappa_db {
                        let mut cfg = config.clone();
                        cfg.rician.kappa = db_to_linear(k);
                        cfg.snr_db = vec![snr];
                        self.run_curve(&cfg, &format!("kappa_db={k}"), false, opts, &mut out.rows)?;
                    }
                }
            }
            ExperimentKind::CompositeFit { kappa_db, elements, samples, bins } => {
                for &l in elements {
                    composite_fit(self.seed, *kappa_db, l, *samples, *bins, &mut out)?;
                }
            }
        }
        Ok(out)
    }

    fn simulate_at(&self, leading_abep: Option<f64>) -> bool {
        leading_abep.is_none_or(|v| v >= self.mc_min_abep)
    }

    fn run_curve(
        &self,
        cfg: &SystemConfig,
        tag: &str,
        exact: bool,
        opts: RunOptions,
        rows: &mut Vec<CsvRow>,
    ) -> Result<()> {
        cfg.validate()?;
        for &snr in &cfg.snr_db {
            let mut ana = analytic_rows(cfg, snr, self.gcq_nodes)?;
            if exact && cfg.policy != PhasePolicy::Blind {
                let l = cfg.elements();
                let m = match cfg.policy {
                    PhasePolicy::Quantized { bits } => CompositeMoments::quantized(l, cfg.rician.kappa, bits)?,
                    _ => CompositeMoments::new(l, cfg.rician.kappa)?,
                };
                let e = EffectiveSnr::new(db_to_linear(snr), cfg.csi, l)?;
                let v = upep_intelligent_exact(&e, &m, EXACT_TOLERANCE)?.value;
                ana.insert(
                    0,
                    SweepRow {
                        snr_db: snr,
                        method: AbepMethod::ExactIntegral,
                        abep: abep_uniform(v, cfg.antennas)?,
                        ci95: None,
                    },
                );
            }
            if self.simulate_at(ana.first().map(|r| r.abep)) {
                let p = run_point(cfg, snr, opts)?;
                rows.push(CsvRow {
                    snr_db: snr,
                    method: label(AbepMethod::MonteCarlo, tag),
                    abep: p.ber,
                    ci95: Some(p.ci95),
                });
            }
            rows.extend(ana.iter().map(|r| analytic(snr, r.method, tag, r.abep)));
        }
        Ok(())
    }

    fn run_policies(
        &self,
        cfg: &SystemConfig,
        policies: &[PhasePolicy],
        opts: RunOptions,
        rows: &mut Vec<CsvRow>,
    ) -> Result<()> {
        cfg.validate()?;
        for &snr in &cfg.snr_db {
            let mut ana = Vec::new();
            for &p in policies {
                let c = SystemConfig { policy: p, ..cfg.clone() };
                ana.push(analytic_rows(&c, snr, self.gcq_nodes)?);
            }
            let leading = ana.iter().filter_map(|r| r.first().map(|r| r.abep)).reduce(f64::min);
            if self.simulate_at(leading) {
                let points = run_point_policies(cfg, policies, snr, opts)?;
                for (p, pt) in policies.iter().zip(points) {
                    rows.push(CsvRow {
                        snr_db: snr,
                        method: label(AbepMethod::MonteCarlo, &p.to_string()),
                        abep: pt.ber,
                        ci95: Some(pt.ci95),
                    });
                }
            }
            for (p, r) in policies.iter().zip(&ana) {
                let tag = p.to_string();
                rows.extend(r.iter().map(|r| analytic(snr, r.method, &tag, r.abep)));
            }
        }
        Ok(())
    }
}

/// `method[tag]`, or just `method` for an empty tag.
pub fn label(method: impl Display, tag: &str) -> String {
    if tag.is_empty() {
        method.to_string()
    } else {
        format!("{method}[{tag}]")
    }
}

fn analytic(snr_db: f64, method: impl Display, tag: &str, abep: f64) -> CsvRow {
    CsvRow {
        snr_db,
        method: label(method, tag),
        abep,
        ci95: None,
    }
}

/// Rows for one array size: `hist`/`clt_pdf` densities at bin centres and
/// `ecdf`/`clt_cdf` at bin upper edges, with the x value in the first
/// column. KS distances go to the diagnostics.
fn composite_fit(
    seed: u64,
    kappa_db: f64,
    elements: usize,
    samples: usize,
    bins: usize,
    out: &mut ExperimentOutput,
) -> Result<()> {
    let (lx, ly) = square_factors(elements);
    let kappa = db_to_linear(kappa_db);
    let rician = RicianParams::new(kappa, lx, ly)?;
    let z = sample_composite(&rician, samples, seed)?;
    let m = CompositeMoments::new(elements, kappa)?;
    let s = m.sigma();
    let gauss_cdf = |x: f64| normal_cdf((x - m.mu) / s);
    let tag = format!("L={elements}");

    let real = EmpiricalDistribution::new(z.iter().map(|v| v.re).collect(), bins)?;
    for b in real.histogram() {
        let x = 0.5 * (b.lo + b.hi);
        let pdf = (-0.5 * ((x - m.mu) / s).powi(2)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
        out.rows.push(analytic(x, "hist", &tag, b.mass / (b.hi - b.lo)));
        out.rows.push(analytic(x, "clt_pdf", &tag, pdf));
        out.rows.push(analytic(b.hi, "ecdf", &tag, real.cdf(b.hi)));
        out.rows.push(analytic(b.hi, "clt_cdf", &tag, gauss_cdf(b.hi)));
    }
    let d = &mut out.diagnostics;
    d.insert(label("ks_real", &tag), real.ks_distance(gauss_cdf)?);
    let both = EmpiricalDistribution::new(z.iter().map(|v| v.re + v.im).collect(), bins)?;
    d.insert(label("ks_real_plus_imag", &tag), both.ks_distance(gauss_cdf)?);
    let modulus = EmpiricalDistribution::new(z.iter().map(|v| v.norm_sqr()).collect(), bins)?;
    let chi2 = |x: f64| noncentral_chi2_cdf(x, &m).unwrap_or(f64::NAN);
    d.insert(label("ks_squared_modulus", &tag), modulus.ks_distance(chi2)?);
    Ok(())
}
