use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::Strategy;
use crate::error::{invalid, Error, Result};
use crate::metrics::{NoiseModel, OutageThreshold, MIN_MONTE_CARLO_SAMPLES};
use crate::propagation::PropagationParams;
use crate::topology::{TopologyParams, CLUSTER_SIZE};

/// Full experiment configuration. Every field has a default; the physical
/// defaults are the classic macro-cell link budget (7-cell cluster, reuse 3,
/// 1800 MHz, 1.5 kW, 100 m mast, 5 m mobile, 1 km cells, 9 dB threshold).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub cells_per_cluster: u32,
    pub reused_frequencies: u32,
    pub gamma_db: f64,
    pub fc_mhz: f64,
    pub tx_power_w: f64,
    pub bs_height_m: f64,
    pub mobile_height_m: f64,
    pub cell_radius_km: f64,
    pub channel_count_per_band: u16,
    pub inner_fraction: f64,
    pub strategy: Strategy,
    /// Channels requested each time the reference cell saturates.
    pub borrow_request: usize,
    pub monte_carlo_samples: u64,
    pub seed: u64,
    pub noise: NoiseModel,
    pub traffic: TrafficConfig,
    pub sweep: SweepConfig,
    pub probe: ProbeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    pub mean_holding_s: f64,
    /// Offered load at the reference cell, in multiples of its channel count.
    pub reference_load_factor: f64,
    pub other_load_factor: f64,
    pub horizon_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub min_km: f64,
    pub max_km: f64,
    pub step_km: f64,
    /// Path loss is never evaluated closer than this.
    pub min_eval_km: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeChannel {
    /// First channel of the first borrow.
    Borrowed,
    /// Lowest native channel of the reference cell.
    Native,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    /// Degrees counter-clockwise from +x; 30 points at cell 2.
    pub azimuth_deg: f64,
    /// Number of equally spaced azimuths averaged per distance.
    pub azimuth_samples: u32,
    pub channel: ProbeChannel,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            cells_per_cluster: CLUSTER_SIZE as u32,
            reused_frequencies: 3,
            gamma_db: 9.0,
            fc_mhz: 1800.0,
            tx_power_w: 1500.0,
            bs_height_m: 100.0,
            mobile_height_m: 5.0,
            cell_radius_km: 1.0,
            channel_count_per_band: 10,
            inner_fraction: 0.5,
            strategy: Strategy::Auto,
            borrow_request: 4,
            monte_carlo_samples: 100_000,
            seed: 1,
            noise: NoiseModel::default(),
            traffic: TrafficConfig::default(),
            sweep: SweepConfig::default(),
            probe: ProbeConfig::default(),
        }
    }
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            mean_holding_s: 120.0,
            reference_load_factor: 1.5,
            other_load_factor: 0.5,
            horizon_s: 3600.0,
        }
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            min_km: 0.05,
            max_km: 1.0,
            step_km: 0.05,
            min_eval_km: 0.05,
        }
    }
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            azimuth_deg: 30.0,
            azimuth_samples: 1,
            channel: ProbeChannel::Borrowed,
        }
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.cells_per_cluster != CLUSTER_SIZE as u32 {
            return Err(invalid(
                "cells_per_cluster",
                "only 7-cell clusters are supported",
            ));
        }
        if self.reused_frequencies != 3 {
            return Err(invalid(
                "reused_frequencies",
                "only reuse factor 3 is supported",
            ));
        }
        if !self.gamma_db.is_finite() {
            return Err(invalid("gamma_db", "must be finite"));
        }
        positive("fc_mhz", self.fc_mhz)?;
        positive("tx_power_w", self.tx_power_w)?;
        positive("bs_height_m", self.bs_height_m)?;
        if !(self.mobile_height_m >= 0.0 && self.mobile_height_m.is_finite()) {
            return Err(invalid("mobile_height_m", "must be non-negative"));
        }
        positive("cell_radius_km", self.cell_radius_km)?;
        if self.channel_count_per_band == 0 {
            return Err(invalid("channel_count_per_band", "must be at least 1"));
        }
        if !(self.inner_fraction > 0.0 && self.inner_fraction <= 1.0) {
            return Err(invalid("inner_fraction", "must lie in (0, 1]"));
        }
        if self.borrow_request == 0 {
            return Err(invalid("borrow_request", "must be at least 1"));
        }
        if self.monte_carlo_samples < MIN_MONTE_CARLO_SAMPLES {
            return Err(invalid(
                "monte_carlo_samples",
                format!("must be at least {MIN_MONTE_CARLO_SAMPLES}"),
            ));
        }
        self.noise.validate()?;

        let t = &self.traffic;
        positive("traffic.mean_holding_s", t.mean_holding_s)?;
        positive("traffic.horizon_s", t.horizon_s)?;
        if !(t.reference_load_factor >= 0.0 && t.reference_load_factor.is_finite()) {
            return Err(invalid(
                "traffic.reference_load_factor",
                "must be non-negative",
            ));
        }
        if !(t.other_load_factor >= 0.0 && t.other_load_factor.is_finite()) {
            return Err(invalid("traffic.other_load_factor", "must be non-negative"));
        }

        let s = &self.sweep;
        positive("sweep.min_eval_km", s.min_eval_km)?;
        positive("sweep.step_km", s.step_km)?;
        positive("sweep.min_km", s.min_km)?;
        if s.min_km < s.min_eval_km {
            return Err(invalid(
                "sweep.min_km",
                "must not be below sweep.min_eval_km",
            ));
        }
        if !(s.max_km >= s.min_km && s.max_km.is_finite()) {
            return Err(invalid("sweep.max_km", "must not be below sweep.min_km"));
        }

        if !self.probe.azimuth_deg.is_finite() {
            return Err(invalid("probe.azimuth_deg", "must be finite"));
        }
        if self.probe.azimuth_samples == 0 {
            return Err(invalid("probe.azimuth_samples", "must be at least 1"));
        }
        Ok(())
    }

    pub fn topology_params(&self) -> TopologyParams {
        TopologyParams {
            cell_radius_m: self.cell_radius_km * 1000.0,
            channel_count_per_band: self.channel_count_per_band,
            bs_height_m: self.bs_height_m,
            tx_power_w: self.tx_power_w,
        }
    }

    pub fn propagation_params(&self, bs_height_m: f64) -> PropagationParams {
        PropagationParams {
            fc_mhz: self.fc_mhz,
            bs_height_m,
            mobile_height_m: self.mobile_height_m,
        }
    }

    pub fn threshold(&self) -> Result<OutageThreshold> {
        OutageThreshold::from_db(self.gamma_db)
    }

    /// Sweep distances in km, strictly increasing.
    pub fn sweep_distances(&self) -> Vec<f64> {
        let s = &self.sweep;
        let n = ((s.max_km - s.min_km) / s.step_km + 1e-9).floor() as usize + 1;
        (0..n).map(|i| s.min_km + i as f64 * s.step_km).collect()
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// SHA-256 of the canonical TOML rendering, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}

/// Reads, parses and validates a config file. Omitted fields take defaults.
pub fn load_config(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let cfg = ScenarioConfig::from_toml(&text).map_err(|message| Error::ConfigParse {
        path: path.to_path_buf(),
        message,
    })?;
    cfg.validate()?;
    Ok(cfg)
}
