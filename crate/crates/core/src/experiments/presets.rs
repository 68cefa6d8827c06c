//! Named figure presets.
//!
//! SNR grids are chosen so that the leading curve runs from its low-SNR
//! plateau into its floor or below `1e-5`. Monte Carlo points are skipped
//! where the leading analytical ABEP is below [`PRESET_MC_FLOOR`], the
//! smallest rate for which the escalation ceiling still collects its error
//! target.

use super::{square_factors, Curve, Experiment, ExperimentKind, DEFAULT_SEED};
use crate::analysis::DEFAULT_GCQ_NODES;
use crate::channel::{CsiErrorModel, RicianParams};
use crate::montecarlo::{Escalation, SystemConfig};
use crate::system::PhasePolicy;
use crate::{db_to_linear, Error, Result};

pub const PRESET_NAMES: [&str; 14] = [
    "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12", "fig13",
    "fig14", "fig15",
];

pub const PRESET_TRIALS: u64 = 1_000_000;

pub const PRESET_MC_FLOOR: f64 = 1e-5;

/// `start, start + step, ..` up to and including `stop`.
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

fn config(elements: usize, kappa: f64, csi: CsiErrorModel, policy: PhasePolicy, snr_db: Vec<f64>) -> SystemConfig {
    let (lx, ly) = square_factors(elements);
    SystemConfig {
        antennas: 2,
        rician: RicianParams::new(kappa, lx, ly).expect("preset geometry"),
        csi,
        policy,
        reference: Default::default(),
        snr_db,
        trials: PRESET_TRIALS,
        seed: DEFAULT_SEED,
        escalation: Escalation::default(),
    }
}

fn fixed(sigma_e2: f64) -> CsiErrorModel {
    CsiErrorModel::Fixed { sigma_e2 }
}

fn pilots(n: u32) -> CsiErrorModel {
    CsiErrorModel::Variable { pilots: n }
}

fn curve(tag: String, config: SystemConfig, exact: bool) -> Curve {
    Curve { tag, config, exact }
}

fn experiment(name: &str, description: &str, kind: ExperimentKind) -> Experiment {
    Experiment {
        name: name.to_string(),
        description: description.to_string(),
        seed: DEFAULT_SEED,
        gcq_nodes: DEFAULT_GCQ_NODES,
        mc_min_abep: PRESET_MC_FLOOR,
        kind,
    }
}

fn sweep(name: &str, description: &str, curves: Vec<Curve>) -> Experiment {
    experiment(name, description, ExperimentKind::Sweep { curves })
}

/// Resolves a preset by name.
pub fn preset(name: &str) -> Result<Experiment> {
    let k3 = db_to_linear(3.0);
    let intelligent = PhasePolicy::Intelligent;
    let blind = PhasePolicy::Blind;
    let exp = match name {
        "fig2" => experiment(
            name,
            "composite channel histogram and CDF against the Gaussian fit, kappa 3 dB",
            ExperimentKind::CompositeFit {
                kappa_db: 3.0,
                elements: vec![10, 100],
                samples: 100_000,
                bins: 60,
            },
        ),
        "fig3" => sweep(
            name,
            "intelligent, Rayleigh RIS-UE link, perfect CSI, L in {16, 64, 256}",
            [16, 64, 256]
                .map(|l| curve(format!("L={l}"), config(l, 0.0, fixed(0.0), intelligent, snr_grid(-40.0, 0.0, 2.0)), false))
                .to_vec(),
        ),
        "fig4" => sweep(
            name,
            "intelligent, closed form and Chernoff bound against exact, kappa 3 dB, sigma_e2 0.1",
            [64, 256]
                .map(|l| curve(format!("L={l}"), config(l, k3, fixed(0.1), intelligent, snr_grid(-40.0, -10.0, 2.0)), true))
                .to_vec(),
        ),
        "fig5" => sweep(
            name,
            "intelligent with the high-SNR error floor, kappa 3 dB, sigma_e2 0.1",
            [64, 256]
                .map(|l| curve(format!("L={l}"), config(l, k3, fixed(0.1), intelligent, snr_grid(-40.0, 20.0, 5.0)), true))
                .to_vec(),
        ),
        "fig6" => experiment(
            name,
            "GCQ estimate against node count K, L 200, kappa 3 dB, sigma_e2 0.1",
            ExperimentKind::GcqConvergence {
                config: config(200, k3, fixed(0.1), intelligent, vec![-32.0, -30.0, -28.0]),
                nodes: (1..=50).collect(),
            },
        ),
        "fig7" => sweep(
            name,
            "GCQ with K = 3 against the exact integral, L 200, kappa 3 dB, sigma_e2 0.1",
            vec![curve(String::new(), config(200, k3, fixed(0.1), intelligent, snr_grid(-40.0, -20.0, 2.0)), true)],
        ),
        "fig8" => sweep(
            name,
            "intelligent, Rician factor impact, L 144, sigma_e2 0.1",
            [0.0, 5.0, 10.0]
                .map(|k| {
                    let c = config(144, db_to_linear(k), fixed(0.1), intelligent, snr_grid(-40.0, -24.0, 2.0));
                    curve(format!("kappa_db={k}"), c, false)
                })
                .to_vec(),
        ),
        "fig9" => sweep(
            name,
            "intelligent, fixed sigma_e2 in {3, 2, 1, 0.1} and perfect CSI, L 256, kappa 3 dB",
            [3.0, 2.0, 1.0, 0.1, 0.0]
                .map(|s| curve(format!("sigma_e2={s}"), config(256, k3, fixed(s), intelligent, snr_grid(-40.0, 20.0, 5.0)), false))
                .to_vec(),
        ),
        "fig10" => {
            let grid = snr_grid(-40.0, 0.0, 5.0);
            let mut curves: Vec<Curve> = [1, 2, 10, 30, 90]
                .map(|n| curve(format!("pilots={n}"), config(256, k3, pilots(n), intelligent, grid.clone()), false))
                .to_vec();
            curves.push(curve("perfect".into(), config(256, k3, fixed(0.0), intelligent, grid), false));
            sweep(name, "intelligent, sigma_e2 = 1/(N rho), L 256, kappa 3 dB", curves)
        }
        "fig11" => {
            let mut curves: Vec<Curve> = [16, 64, 144, 256]
                .map(|l| curve(format!("L={l};pilots=10"), config(l, k3, pilots(10), blind, snr_grid(-10.0, 50.0, 5.0)), false))
                .to_vec();
            curves.extend([0.1, 0.01].map(|s| {
                curve(format!("L=144;sigma_e2={s}"), config(144, k3, fixed(s), blind, snr_grid(-10.0, 60.0, 5.0)), false)
            }));
            sweep(name, "blind, array size with 10 pilots, and the L 144 error floor with its asymptote", curves)
        }
        "fig12" => experiment(
            name,
            "blind, ABEP against kappa at SNR 0, 10, 20 dB, L 100, perfect CSI",
            ExperimentKind::KappaSweep {
                config: config(100, 1.0, fixed(0.0), blind, vec![0.0, 10.0, 20.0]),
                kappa_db: snr_grid(0.0, 20.0, 2.0),
            },
        ),
        "fig13" => {
            let grid = snr_grid(-10.0, 40.0, 5.0);
            let k5 = db_to_linear(5.0);
            let mut curves: Vec<Curve> = [0.0, 0.005, 0.01]
                .map(|s| curve(format!("sigma_e2={s}"), config(100, k5, fixed(s), blind, grid.clone()), false))
                .to_vec();
            curves.extend([1, 3, 10].map(|n| curve(format!("pilots={n}"), config(100, k5, pilots(n), blind, grid.clone()), false)));
            sweep(name, "blind, fixed and pilot-dependent sigma_e2, L 100, kappa 5 dB", curves)
        }
        "fig14" => experiment(
            name,
            "blind, 1/2/3-bit quantised and continuous phases, L 196, kappa 3 dB, sigma_e2 0.1",
            ExperimentKind::PolicyComparison {
                config: config(196, k3, fixed(0.1), intelligent, snr_grid(-40.0, -30.0, 2.5)),
                policies: quantization_ladder(),
            },
        ),
        "fig15" => {
            let mut cfg = config(196, k3, pilots(30), intelligent, snr_grid(-30.0, -17.5, 2.5));
            cfg.trials = 10_000_000;
            experiment(
                name,
                "blind, 1/2/3-bit quantised and continuous phases, L 196, kappa 3 dB, 30 pilots",
                ExperimentKind::PolicyComparison {
                    config: cfg,
                    policies: quantization_ladder(),
                },
            )
        }
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                valid: PRESET_NAMES.iter().map(|s| s.to_string()).collect(),
            })
        }
    };
    Ok(exp)
}

/// Blind, 1, 2 and 3 bits, continuous.
pub fn quantization_ladder() -> Vec<PhasePolicy> {
    let mut v = vec![PhasePolicy::Blind];
    v.extend((1..=3).map(|bits| PhasePolicy::Quantized { bits }));
    v.push(PhasePolicy::Intelligent);
    v
}
