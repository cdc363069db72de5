//! Model parameters and implementation knobs, validated once at startup and
//! immutable afterwards.
//!
//! Configuration documents are flat TOML key/value tables; any subset of keys
//! may be given and the rest take the defaults below. Every key can also be
//! overridden from the command line via `--set key=value`.

use crate::field::Boundary;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ensemble behavior switch: the full multi-attention model, the
/// single-attention control, or the fixed-center single unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Multi,
    Single,
    Center,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Multi => "multi",
            Variant::Single => "single",
            Variant::Center => "center",
        })
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid value for `{field}`: {reason}")]
    InvalidValue { field: &'static str, reason: String },
    #[error("unknown configuration key: {0}")]
    UnknownKey(String),
    #[error("malformed configuration document: {0}")]
    Parse(String),
    #[error("cannot read configuration: {0}")]
    Io(#[from] std::io::Error),
}

/// All model parameters plus the implementation-decision knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Excitatory surround radius of a lamina cell, pixels.
    pub r_de: usize,
    /// Inhibitory surround radius, pixels; must exceed `r_de`.
    pub r_di: usize,
    /// Medulla normalization pool radius, pixels.
    pub r_dc: usize,
    /// Gaussian widths for the excitatory, inhibitory, and pool kernels.
    pub sigma_e: f64,
    pub sigma_i: f64,
    pub sigma_c: f64,
    /// Contrast-normalization stabilizer.
    pub epsilon: f64,
    /// Number of correlation distances accumulated per directional cell.
    pub n_c: usize,
    /// Lamina-to-medulla delay, ms.
    pub tau_1: f64,
    /// Directional-cell delay range, ms, interpolated across correlation steps.
    pub tau_nc_start: f64,
    pub tau_nc_end: f64,
    /// Null-direction bias of the triple correlator.
    pub beta: f64,
    /// Exponents applied to the ON and OFF directional outputs.
    pub gamma_1: f64,
    pub gamma_2: f64,
    /// Attention-field radius, pixels.
    pub r_af: usize,
    /// Motion-magnitude threshold for creating an attention field.
    pub t_a: f64,
    /// Accumulated-response threshold for keeping an attention field.
    pub t_d: f64,
    /// Length of the response-accumulation window, frames.
    pub d_frames: usize,
    /// Frame interval in milliseconds (1000 / fps).
    pub frame_interval_ms: f64,
    /// Negative slope of the Leaky-ReLU in the directional fusion.
    pub leak_slope: f64,
    /// Values at or below this count as zero in the four-quadrant gate.
    pub gate_epsilon: f64,
    /// Cap on simultaneously live attention fields; absent means unbounded.
    pub max_afs: Option<usize>,
    pub variant: Variant,
    pub boundary: Boundary,
    /// Apply the directional low-pass per correlation distance instead of
    /// once on the accumulated sum.
    pub per_step_delay: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            r_de: 5,
            r_di: 11,
            r_dc: 5,
            sigma_e: 10.0,
            sigma_i: 20.0,
            sigma_c: 20.0,
            epsilon: 0.2,
            n_c: 5,
            tau_1: 80.0,
            tau_nc_start: 80.0,
            tau_nc_end: 40.0,
            beta: 1.5,
            gamma_1: 0.9,
            gamma_2: 0.5,
            r_af: 40,
            t_a: 10.0,
            t_d: 5000.0,
            d_frames: 10,
            frame_interval_ms: 1000.0 / 33.0,
            leak_slope: 0.1,
            gate_epsilon: 1e-9,
            max_afs: None,
            variant: Variant::Multi,
            boundary: Boundary::Replicate,
            per_step_delay: false,
        }
    }
}

/// First-order low-pass coefficient for a delay of `tau_ms` sampled every
/// `frame_interval_ms`.
pub fn alpha_for_delay(tau_ms: f64, frame_interval_ms: f64) -> f64 {
    debug_assert!(tau_ms > 0.0 && frame_interval_ms > 0.0);
    frame_interval_ms / (frame_interval_ms + tau_ms)
}

impl ModelConfig {
    /// Parse a TOML document, fill unset keys with defaults, then validate.
    pub fn from_toml_str(doc: &str) -> Result<Self, ConfigError> {
        let cfg: ModelConfig = toml::from_str(doc).map_err(classify_toml_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Defaults plus an optional document plus `key=value` overrides, applied
    /// in that order; validates the final result.
    pub fn load(doc: Option<&str>, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut table = match doc {
            Some(d) => d.parse::<toml::Table>().map_err(|e| ConfigError::Parse(e.to_string()))?,
            None => toml::Table::new(),
        };
        for (key, value) in overrides {
            if value == "none" {
                table.remove(key);
                continue;
            }
            let parsed: toml::Value = match format!("v = {value}").parse::<toml::Table>() {
                Ok(t) => t["v"].clone(),
                Err(_) => toml::Value::String(value.clone()),
            };
            table.insert(key.clone(), parsed);
        }
        let cfg: ModelConfig = table.try_into().map_err(classify_toml_error)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn bad(field: &'static str, reason: impl Into<String>) -> Result<(), ConfigError> {
            Err(ConfigError::InvalidValue { field, reason: reason.into() })
        }
        if self.r_de < 1 {
            return bad("r_de", "radius must be at least 1");
        }
        if self.r_di < 1 {
            return bad("r_di", "radius must be at least 1");
        }
        if self.r_dc < 1 {
            return bad("r_dc", "radius must be at least 1");
        }
        if self.r_di <= self.r_de {
            return bad("r_di", format!("inhibitory radius {} must exceed excitatory radius {}", self.r_di, self.r_de));
        }
        if !(self.sigma_e > 0.0) {
            return bad("sigma_e", "standard deviation must be positive");
        }
        if !(self.sigma_i > 0.0) {
            return bad("sigma_i", "standard deviation must be positive");
        }
        if !(self.sigma_c > 0.0) {
            return bad("sigma_c", "standard deviation must be positive");
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon", "stabilizer must be positive");
        }
        if self.n_c < 1 {
            return bad("n_c", "at least one correlation distance is required");
        }
        if !(self.tau_1 > 0.0) {
            return bad("tau_1", "delay must be positive");
        }
        if !(self.tau_nc_end > 0.0) {
            return bad("tau_nc_end", "delay must be positive");
        }
        if self.tau_nc_start < self.tau_nc_end {
            return bad("tau_nc_start", "delay range must shrink with correlation distance (start >= end)");
        }
        if self.beta < 0.0 {
            return bad("beta", "bias must be nonnegative");
        }
        if self.r_af < 1 {
            return bad("r_af", "attention radius must be at least 1");
        }
        if !(self.t_a > 0.0) {
            return bad("t_a", "creation threshold must be positive");
        }
        if !(self.t_d > 0.0) {
            return bad("t_d", "retention threshold must be positive");
        }
        if self.d_frames < 1 {
            return bad("d_frames", "accumulation window must span at least one frame");
        }
        if !(self.frame_interval_ms > 0.0) {
            return bad("frame_interval_ms", "frame interval must be positive");
        }
        if !(self.leak_slope >= 0.0) {
            return bad("leak_slope", "slope must be nonnegative");
        }
        if !(self.gate_epsilon >= 0.0) {
            return bad("gate_epsilon", "gate epsilon must be nonnegative");
        }
        if let Some(cap) = self.max_afs {
            if cap < 1 {
                return bad("max_afs", "cap must be at least 1 when set");
            }
        }
        match self.variant {
            Variant::Center | Variant::Single => {
                if let Some(cap) = self.max_afs {
                    if cap != 1 {
                        return bad("max_afs", format!("variant `{}` requires max_afs = 1", self.variant));
                    }
                }
            }
            Variant::Multi => {}
        }
        Ok(())
    }

    /// Effective attention-field cap for the configured variant.
    pub fn af_cap(&self) -> Option<usize> {
        match self.variant {
            Variant::Single | Variant::Center => Some(1),
            Variant::Multi => self.max_afs,
        }
    }

    /// Low-pass coefficient of the lamina-to-medulla delay stage.
    pub fn alpha_1(&self) -> f64 {
        alpha_for_delay(self.tau_1, self.frame_interval_ms)
    }

    /// Delay for correlation step `i` (1-based), linearly interpolated from
    /// `tau_nc_start` to `tau_nc_end`.
    pub fn tau_nc_step(&self, i: usize) -> f64 {
        debug_assert!((1..=self.n_c).contains(&i));
        if self.n_c == 1 {
            return self.tau_nc_start;
        }
        let f = (i - 1) as f64 / (self.n_c - 1) as f64;
        self.tau_nc_start + f * (self.tau_nc_end - self.tau_nc_start)
    }

    /// Low-pass coefficient applied once to the accumulated directional sum,
    /// using the mean of the per-step delays.
    pub fn alpha_2(&self) -> f64 {
        let mean = (1..=self.n_c).map(|i| self.tau_nc_step(i)).sum::<f64>() / self.n_c as f64;
        alpha_for_delay(mean, self.frame_interval_ms)
    }

    /// Low-pass coefficient for one correlation step (per-step delay mode).
    pub fn alpha_2_step(&self, i: usize) -> f64 {
        alpha_for_delay(self.tau_nc_step(i), self.frame_interval_ms)
    }
}

fn classify_toml_error(err: toml::de::Error) -> ConfigError {
    let msg = err.to_string();
    // toml reports unexpected keys as "unknown field `x`, expected one of ..."
    if let Some(at) = msg.find("unknown field `") {
        let rest = &msg[at + "unknown field `".len()..];
        if let Some(end) = rest.find('`') {
            return ConfigError::UnknownKey(rest[..end].to_string());
        }
    }
    ConfigError::Parse(msg)
}
