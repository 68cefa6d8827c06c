//! TOML experiment configuration.
//!
//! ```toml
//! N_t = 2
//! L = 16
//! kappa_db = 0
//! snr_db = [0, 5, 10]
//! trials = 10000
//! policy = "blind"          # intelligent | blind | quantized
//! sigma_e2 = 0.0            # or: pilots = 10
//! ```
//!
//! Optional keys: `L_x`, `L_y` (default: the most square factorisation of
//! `L`), `quant_bits` (required for `quantized`), `seed`, `phi_x`, `phi_y`
//! (radians), `alignment` (`estimated` | `true`) and `escalate` (bool).

use serde::Deserialize;

use crate::channel::{CsiErrorModel, RicianParams};
use crate::montecarlo::{Escalation, SystemConfig};
use crate::system::{PhasePolicy, PhaseReference};
use crate::{db_to_linear, Error, Result};

/// Seed used when a config does not set one.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "N_t")]
    antennas: usize,
    #[serde(rename = "L")]
    elements: usize,
    #[serde(rename = "L_x")]
    l_x: Option<usize>,
    #[serde(rename = "L_y")]
    l_y: Option<usize>,
    kappa_db: f64,
    snr_db: Vec<f64>,
    trials: u64,
    policy: PolicyName,
    quant_bits: Option<u32>,
    sigma_e2: Option<f64>,
    pilots: Option<u32>,
    seed: Option<u64>,
    phi_x: Option<f64>,
    phi_y: Option<f64>,
    alignment: Option<PhaseReference>,
    escalate: Option<bool>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PolicyName {
    Intelligent,
    Blind,
    Quantized,
}

/// Parses and validates a TOML experiment config.
pub fn parse_config(text: &str) -> Result<SystemConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of_offset(text, s.start));
        Error::config(line, e.message().trim().to_string())
    })?;
    let at = |key: &str| key_line(text, key);

    if raw.antennas < 2 || !raw.antennas.is_power_of_two() {
        return Err(Error::config(
            at("N_t"),
            format!("N_t must be a power of two >= 2, got {}", raw.antennas),
        ));
    }
    if raw.elements == 0 {
        return Err(Error::config(at("L"), "L must be positive"));
    }
    let (l_x, l_y) = match (raw.l_x, raw.l_y) {
        (None, None) => square_factors(raw.elements),
        (Some(x), None) if x > 0 && raw.elements.is_multiple_of(x) => (x, raw.elements / x),
        (None, Some(y)) if y > 0 && raw.elements.is_multiple_of(y) => (raw.elements / y, y),
        (Some(x), Some(y)) => (x, y),
        (x, _) => {
            let key = if x.is_some() { "L_x" } else { "L_y" };
            return Err(Error::config(at(key), format!("{key} does not divide L = {}", raw.elements)));
        }
    };
    if l_x * l_y != raw.elements {
        return Err(Error::config(
            at("L_x").or(at("L_y")),
            format!("L_x * L_y = {l_x} * {l_y} = {} differs from L = {}", l_x * l_y, raw.elements),
        ));
    }

    let policy = match (raw.policy, raw.quant_bits) {
        (PolicyName::Quantized, Some(bits)) => PhasePolicy::Quantized { bits },
        (PolicyName::Quantized, None) => {
            return Err(Error::config(at("policy"), "policy 'quantized' needs quant_bits"));
        }
        (_, Some(_)) => {
            return Err(Error::config(at("quant_bits"), "quant_bits only applies to policy 'quantized'"));
        }
        (PolicyName::Intelligent, None) => PhasePolicy::Intelligent,
        (PolicyName::Blind, None) => PhasePolicy::Blind,
    };
    policy.validate().map_err(|e| Error::config(at("quant_bits"), e.to_string()))?;

    let csi = match (raw.sigma_e2, raw.pilots) {
        (Some(sigma_e2), None) => CsiErrorModel::Fixed { sigma_e2 },
        (None, Some(pilots)) => CsiErrorModel::Variable { pilots },
        (None, None) => return Err(Error::config(None, "one of sigma_e2 or pilots is required")),
        (Some(_), Some(_)) => {
            return Err(Error::config(at("pilots"), "sigma_e2 and pilots are mutually exclusive"));
        }
    };
    csi.validate()
        .map_err(|e| Error::config(at("sigma_e2").or(at("pilots")), e.to_string()))?;

    if raw.snr_db.is_empty() || raw.snr_db.iter().any(|s| !s.is_finite()) {
        return Err(Error::config(at("snr_db"), "snr_db must be a non-empty list of finite values"));
    }

    let mut rician = RicianParams::new(db_to_linear(raw.kappa_db), l_x, l_y)
        .map_err(|e| Error::config(at("kappa_db"), e.to_string()))?;
    rician = rician
        .with_angles(
            raw.phi_x.unwrap_or(RicianParams::DEFAULT_ANGLE),
            raw.phi_y.unwrap_or(RicianParams::DEFAULT_ANGLE),
        )
        .map_err(|e| Error::config(at("phi_x").or(at("phi_y")), e.to_string()))?;

    let cfg = SystemConfig {
        antennas: raw.antennas,
        rician,
        csi,
        policy,
        reference: raw.alignment.unwrap_or_default(),
        snr_db: raw.snr_db,
        trials: raw.trials,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        escalation: if raw.escalate.unwrap_or(true) {
            Escalation::default()
        } else {
            Escalation::disabled()
        },
    };
    cfg.validate().map_err(|e| Error::config(at("trials"), e.to_string()))?;
    Ok(cfg)
}

/// `(L_x, L_y)` with `L_x <= L_y` as close as possible.
pub fn square_factors(elements: usize) -> (usize, usize) {
    let mut x = (elements as f64).sqrt() as usize;
    while x > 1 && !elements.is_multiple_of(x) {
        x -= 1;
    }
    let x = x.max(1);
    (x, elements / x)
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn key_line(text: &str, key: &str) -> Option<usize> {
    text.lines().position(|l| {
        l.trim_start()
            .strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='))
    })
    .map(|i| i + 1)
}
