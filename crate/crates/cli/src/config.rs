//! JSON run configuration. Every field is optional; command-line flags
//! override whatever the file sets.

use std::path::{Path, PathBuf};

use qds_core::channel_sim::FlipMode;
use qds_core::optimizer::{RateProblem, SearchBounds};
use qds_core::protocol::{ErrorRates, Variant};
use qds_core::sns_model::{ChannelParams, FailureProbs, SnsParams};
use serde::{Deserialize, Deserializer};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub channel: ChannelConfig,
    pub failure: FailureProbs,
    pub target_epsilon: f64,
    /// Message length in bits for the rate and security computations.
    #[serde(deserialize_with = "big_count")]
    pub m: u128,
    /// Parameters used by `security` in pipeline mode.
    pub sns: SnsParams,
    /// Starting point of the rate search; the search picks its own when
    /// absent.
    pub start: Option<SnsParams>,
    pub bounds: SearchBounds,
    pub distances_km: Vec<f64>,
    pub budget: u64,
    pub protocol: ProtocolConfig,
    pub hash: HashConfig,
    pub security: Option<DirectSecurity>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            channel: ChannelConfig::default(),
            failure: FailureProbs::default(),
            target_epsilon: 1e-10,
            m: 100_000_000_000_000_000_000,
            sns: SnsParams::default(),
            start: None,
            bounds: SearchBounds::default(),
            distances_km: (0..9).map(|k| 100.0 + 50.0 * k as f64).collect(),
            budget: 10_000,
            protocol: ProtocolConfig::default(),
            hash: HashConfig::default(),
            security: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Invalid(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Invalid(format!("bad config {}: {e}", path.display())))
    }

    pub fn problem(&self, distance_km: f64) -> RateProblem {
        RateProblem {
            channel: self.channel.at(distance_km),
            failure: self.failure,
            m: self.m,
            target: self.target_epsilon,
            bounds: self.bounds,
        }
    }
}

/// Fiber and detector constants; the distance comes from the command.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelConfig {
    pub alpha: f64,
    pub eta_d: f64,
    pub p_d: f64,
    pub e_d: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        let t = ChannelParams::reference(0.0);
        Self {
            alpha: t.alpha,
            eta_d: t.eta_d,
            p_d: t.p_d,
            e_d: t.e_d,
        }
    }
}

impl ChannelConfig {
    pub fn at(&self, distance_km: f64) -> ChannelParams {
        ChannelParams {
            alpha: self.alpha,
            l: distance_km / 2.0,
            eta_d: self.eta_d,
            p_d: self.p_d,
            e_d: self.e_d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    /// Forward a different message with Alice's signature.
    Tamper,
    /// Forward a random message with a random signature.
    Forge,
    /// Guess Charlie's keys bitwise and sign a fresh message.
    Guess,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    /// Raw-key length `n`.
    pub n: usize,
    pub message_bits: usize,
    /// Message length used for tamper experiments and their bound.
    pub attack_message_bits: usize,
    pub rates: ErrorRates,
    pub variant: Variant,
    pub max_radius: Option<usize>,
    pub flip_mode: FlipMode,
    pub trials: u64,
    pub adversary: Option<AdversaryKind>,
    /// Bob's per-bit guessing error.
    pub p_e: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            n: 16,
            message_bits: 64,
            attack_message_bits: 256,
            rates: ErrorRates {
                e1: 0.0625,
                e2: 0.031_25,
                e3: 0.0625,
                e4: 0.031_25,
            },
            variant: Variant::Original,
            max_radius: Some(4),
            flip_mode: FlipMode::ExactCount,
            trials: 10_000,
            adversary: None,
            p_e: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HashConfig {
    /// Hash width in bits.
    pub width: usize,
    pub message: Option<PathBuf>,
}

impl Default for HashConfig {
    fn default() -> Self {
        Self {
            width: 64,
            message: None,
        }
    }
}

/// Security inputs given directly instead of through the model.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectSecurity {
    pub n: u64,
    pub delta1: f64,
    pub e_ph: f64,
    #[serde(default, deserialize_with = "opt_big_count")]
    pub m: Option<u128>,
    /// Likely-set sizes as decimal integers; strings allow values beyond
    /// 64 bits.
    #[serde(default = "one", deserialize_with = "big_decimal")]
    pub n_x: String,
    #[serde(default = "one", deserialize_with = "big_decimal")]
    pub n_y: String,
}

fn one() -> String {
    "1".into()
}

/// Accepts a JSON integer, an integral float such as `1e20`, or a decimal
/// string.
fn parse_count(v: serde_json::Value) -> Result<u128, String> {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                return Ok(u as u128);
            }
            match n.as_f64() {
                Some(f) if f >= 0.0 && f.fract() == 0.0 && f < 3.4e38 => Ok(f as u128),
                _ => Err(format!("{n} is not a nonnegative integer")),
            }
        }
        serde_json::Value::String(s) => s.trim().parse().map_err(|e| format!("{s:?}: {e}")),
        other => Err(format!("expected an integer, got {other}")),
    }
}

fn big_count<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
    parse_count(serde_json::Value::deserialize(d)?).map_err(serde::de::Error::custom)
}

fn opt_big_count<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u128>, D::Error> {
    big_count(d).map(Some)
}

fn big_decimal<'de, D: Deserializer<'de>>(d: D) -> Result<String, D::Error> {
    match serde_json::Value::deserialize(d)? {
        serde_json::Value::Number(n) if n.as_u64().is_some() => Ok(n.to_string()),
        serde_json::Value::String(s) => Ok(s),
        other => Err(serde::de::Error::custom(format!("expected an integer, got {other}"))),
    }
}
