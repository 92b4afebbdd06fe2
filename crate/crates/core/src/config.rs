//! Scenario configuration: defaults, validation and a flat `key=value`
//! text format with dotted section prefixes (`radio.p_bs_mw=1000`).

use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::channel::RadioParams;
use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::geometry::DeploymentMode;
use crate::protocol::{AckSlots, Scheme, SimParams};

/// How the cluster radius is chosen when a fixed total of UAVs is split
/// into `num_clusters` clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadiusRule {
    /// `r(C)` such that `lambda_off * pi * r^2 = total_uavs / C`.
    #[default]
    DensityPreserving,
    /// Always use `radius_r`.
    Fixed,
}

impl RadiusRule {
    pub fn as_str(self) -> &'static str {
        match self {
            RadiusRule::DensityPreserving => "density_preserving",
            RadiusRule::Fixed => "fixed",
        }
    }
}

impl FromStr for RadiusRule {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "density_preserving" => Ok(RadiusRule::DensityPreserving),
            "fixed" => Ok(RadiusRule::Fixed),
            other => Err(format!("expected density_preserving|fixed, got {other:?}")),
        }
    }
}

impl FromStr for DeploymentMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fixed_total" => Ok(DeploymentMode::FixedTotal),
            "density" => Ok(DeploymentMode::Density),
            other => Err(format!("expected fixed_total|density, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub region_radius: f64,
    /// BS distance from the network center.
    pub d0: f64,
    /// BS distance from a single cluster center, for the analytic metrics.
    pub v_norm: f64,
    pub num_clusters: usize,
    pub total_uavs: usize,
    pub lambda: f64,
    pub lambda_off: f64,
    pub radius_r: f64,
    pub radius_rule: RadiusRule,
    pub mode: DeploymentMode,
    pub h1: f64,
    pub h2: f64,
    pub radio: RadioParams,
    pub sim: SimParams,
    pub schemes: Vec<Scheme>,
    pub replications: usize,
    pub base_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            region_radius: 100.0,
            d0: 800.0,
            v_norm: 800.0,
            num_clusters: 5,
            total_uavs: 50,
            lambda: 1e-4,
            lambda_off: 1e-3,
            radius_r: 50.0,
            radius_rule: RadiusRule::default(),
            mode: DeploymentMode::default(),
            h1: 10.0,
            h2: 20.0,
            radio: RadioParams::default(),
            sim: SimParams::default(),
            schemes: Scheme::ALL.to_vec(),
            replications: 1000,
            base_seed: 1,
        }
    }
}

/// Every recognised key, in emission order.
pub const KEYS: &[&str] = &[
    "region_radius",
    "d0",
    "v_norm",
    "num_clusters",
    "total_uavs",
    "lambda",
    "lambda_off",
    "radius_r",
    "radius_rule",
    "mode",
    "h1",
    "h2",
    "packet_len_ms",
    "t_req_ms",
    "t_ack_ms",
    "schemes",
    "replications",
    "base_seed",
    "radio.p_bs_mw",
    "radio.p_uav_mw",
    "radio.bandwidth_hz",
    "radio.noise_density_mw_per_hz",
    "radio.snr_threshold",
    "radio.bs_to_uav.pl0_db",
    "radio.bs_to_uav.dist_coeff_a",
    "radio.bs_to_uav.freq_coeff_b",
    "radio.bs_to_uav.carrier_freq_ghz",
    "radio.uav_to_uav.pl0_db",
    "radio.uav_to_uav.dist_coeff_a",
    "radio.uav_to_uav.freq_coeff_b",
    "radio.uav_to_uav.carrier_freq_ghz",
    "sim.slot_us",
    "sim.cw_min",
    "sim.cw_max",
    "sim.max_time_ms",
    "sim.generation_size",
    "sim.opportunistic_caching",
    "sim.ack_slots",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: Display,
{
    value.trim().parse().map_err(|e| Error::config(key, format!("cannot parse {value:?}: {e}")))
}

fn parse_schemes(key: &str, value: &str) -> Result<Vec<Scheme>> {
    let mut schemes = Vec::new();
    for part in value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let scheme: Scheme = parse_value(key, part)?;
        if !schemes.contains(&scheme) {
            schemes.push(scheme);
        }
    }
    Ok(schemes)
}

impl ScenarioConfig {
    /// Cluster radius used when building topologies.
    pub fn effective_radius(&self) -> Result<f64> {
        match (self.mode, self.radius_rule) {
            (DeploymentMode::FixedTotal, RadiusRule::DensityPreserving) => self.radius_for_clusters(self.num_clusters),
            _ => {
                ensure_positive("radius_r", self.radius_r)?;
                Ok(self.radius_r)
            }
        }
    }

    /// Radius that keeps the offspring density at `lambda_off` when
    /// `total_uavs` are split into `clusters` disks.
    pub fn radius_for_clusters(&self, clusters: usize) -> Result<f64> {
        if clusters == 0 {
            return Err(Error::config("num_clusters", "must be >= 1"));
        }
        ensure_positive("lambda_off", self.lambda_off)?;
        let per_cluster = self.total_uavs as f64 / clusters as f64;
        Ok((per_cluster / (self.lambda_off * std::f64::consts::PI)).sqrt())
    }

    pub fn sim_params(&self) -> SimParams {
        self.sim
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("region_radius", self.region_radius)?;
        ensure_positive("d0", self.d0)?;
        ensure_positive("v_norm", self.v_norm)?;
        ensure_positive("lambda", self.lambda)?;
        ensure_positive("lambda_off", self.lambda_off)?;
        ensure_positive("radius_r", self.radius_r)?;
        ensure_finite("h1", self.h1)?;
        ensure_finite("h2", self.h2)?;
        if self.h1 < 0.0 {
            return Err(Error::config("h1", "height must be >= 0"));
        }
        if self.h2 < 0.0 {
            return Err(Error::config("h2", "height must be >= 0"));
        }
        if self.v_norm <= self.radius_r {
            return Err(Error::config(
                "v_norm",
                format!(
                    "far-deployment constraint violated: v_norm ({}) must exceed radius_r ({})",
                    self.v_norm, self.radius_r
                ),
            ));
        }
        if self.mode == DeploymentMode::FixedTotal {
            if self.num_clusters == 0 {
                return Err(Error::config("num_clusters", "must be >= 1"));
            }
            if self.total_uavs < self.num_clusters {
                return Err(Error::config(
                    "total_uavs",
                    format!("{} UAVs cannot fill {} clusters", self.total_uavs, self.num_clusters),
                ));
            }
        }
        let r = self.effective_radius()?;
        if self.d0 <= self.region_radius + r {
            return Err(Error::config(
                "d0",
                format!(
                    "far-deployment constraint violated: d0 ({}) must exceed region_radius + r ({})",
                    self.d0,
                    self.region_radius + r
                ),
            ));
        }
        if self.replications == 0 {
            return Err(Error::config("replications", "must be >= 1"));
        }
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "at least one scheme is required"));
        }
        self.radio.validate()?;
        self.sim.validate()
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value;
        match key {
            "region_radius" => self.region_radius = parse_value(key, v)?,
            "d0" => self.d0 = parse_value(key, v)?,
            "v_norm" => self.v_norm = parse_value(key, v)?,
            "num_clusters" => self.num_clusters = parse_value(key, v)?,
            "total_uavs" => self.total_uavs = parse_value(key, v)?,
            "lambda" => self.lambda = parse_value(key, v)?,
            "lambda_off" => self.lambda_off = parse_value(key, v)?,
            "radius_r" => self.radius_r = parse_value(key, v)?,
            "radius_rule" => self.radius_rule = parse_value(key, v)?,
            "mode" => self.mode = parse_value(key, v)?,
            "h1" => self.h1 = parse_value(key, v)?,
            "h2" => self.h2 = parse_value(key, v)?,
            "packet_len_ms" => self.sim.packet_len_ms = parse_value(key, v)?,
            "t_req_ms" => self.sim.t_req_ms = parse_value(key, v)?,
            "t_ack_ms" => self.sim.t_ack_ms = parse_value(key, v)?,
            "schemes" => self.schemes = parse_schemes(key, v)?,
            "replications" => self.replications = parse_value(key, v)?,
            "base_seed" => self.base_seed = parse_value(key, v)?,
            "radio.p_bs_mw" => self.radio.p_bs_mw = parse_value(key, v)?,
            "radio.p_uav_mw" => self.radio.p_uav_mw = parse_value(key, v)?,
            "radio.bandwidth_hz" => self.radio.bandwidth_hz = parse_value(key, v)?,
            "radio.noise_density_mw_per_hz" => self.radio.noise_density_mw_per_hz = parse_value(key, v)?,
            "radio.snr_threshold" => self.radio.snr_threshold = parse_value(key, v)?,
            "radio.bs_to_uav.pl0_db" => self.radio.bs_to_uav.pl0_db = parse_value(key, v)?,
            "radio.bs_to_uav.dist_coeff_a" => self.radio.bs_to_uav.dist_coeff_a = parse_value(key, v)?,
            "radio.bs_to_uav.freq_coeff_b" => self.radio.bs_to_uav.freq_coeff_b = parse_value(key, v)?,
            "radio.bs_to_uav.carrier_freq_ghz" => self.radio.bs_to_uav.carrier_freq_ghz = parse_value(key, v)?,
            "radio.uav_to_uav.pl0_db" => self.radio.uav_to_uav.pl0_db = parse_value(key, v)?,
            "radio.uav_to_uav.dist_coeff_a" => self.radio.uav_to_uav.dist_coeff_a = parse_value(key, v)?,
            "radio.uav_to_uav.freq_coeff_b" => self.radio.uav_to_uav.freq_coeff_b = parse_value(key, v)?,
            "radio.uav_to_uav.carrier_freq_ghz" => self.radio.uav_to_uav.carrier_freq_ghz = parse_value(key, v)?,
            "sim.slot_us" => self.sim.slot_us = parse_value(key, v)?,
            "sim.cw_min" => self.sim.cw_min = parse_value(key, v)?,
            "sim.cw_max" => self.sim.cw_max = parse_value(key, v)?,
            "sim.max_time_ms" => self.sim.max_time_ms = parse_value(key, v)?,
            "sim.generation_size" => self.sim.generation_size = parse_value(key, v)?,
            "sim.opportunistic_caching" => self.sim.opportunistic_caching = parse_value(key, v)?,
            "sim.ack_slots" => self.sim.ack_slots = parse_value::<AckSlots>(key, v)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Textual value of one key, in a form [`ScenarioConfig::set`] accepts.
    pub fn get(&self, key: &str) -> Result<String> {
        let s = match key {
            "region_radius" => self.region_radius.to_string(),
            "d0" => self.d0.to_string(),
            "v_norm" => self.v_norm.to_string(),
            "num_clusters" => self.num_clusters.to_string(),
            "total_uavs" => self.total_uavs.to_string(),
            "lambda" => self.lambda.to_string(),
            "lambda_off" => self.lambda_off.to_string(),
            "radius_r" => self.radius_r.to_string(),
            "radius_rule" => self.radius_rule.as_str().to_string(),
            "mode" => self.mode.as_str().to_string(),
            "h1" => self.h1.to_string(),
            "h2" => self.h2.to_string(),
            "packet_len_ms" => self.sim.packet_len_ms.to_string(),
            "t_req_ms" => self.sim.t_req_ms.to_string(),
            "t_ack_ms" => self.sim.t_ack_ms.to_string(),
            "schemes" => self.schemes.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(","),
            "replications" => self.replications.to_string(),
            "base_seed" => self.base_seed.to_string(),
            "radio.p_bs_mw" => self.radio.p_bs_mw.to_string(),
            "radio.p_uav_mw" => self.radio.p_uav_mw.to_string(),
            "radio.bandwidth_hz" => self.radio.bandwidth_hz.to_string(),
            "radio.noise_density_mw_per_hz" => self.radio.noise_density_mw_per_hz.to_string(),
            "radio.snr_threshold" => self.radio.snr_threshold.to_string(),
            "radio.bs_to_uav.pl0_db" => self.radio.bs_to_uav.pl0_db.to_string(),
            "radio.bs_to_uav.dist_coeff_a" => self.radio.bs_to_uav.dist_coeff_a.to_string(),
            "radio.bs_to_uav.freq_coeff_b" => self.radio.bs_to_uav.freq_coeff_b.to_string(),
            "radio.bs_to_uav.carrier_freq_ghz" => self.radio.bs_to_uav.carrier_freq_ghz.to_string(),
            "radio.uav_to_uav.pl0_db" => self.radio.uav_to_uav.pl0_db.to_string(),
            "radio.uav_to_uav.dist_coeff_a" => self.radio.uav_to_uav.dist_coeff_a.to_string(),
            "radio.uav_to_uav.freq_coeff_b" => self.radio.uav_to_uav.freq_coeff_b.to_string(),
            "radio.uav_to_uav.carrier_freq_ghz" => self.radio.uav_to_uav.carrier_freq_ghz.to_string(),
            "sim.slot_us" => self.sim.slot_us.to_string(),
            "sim.cw_min" => self.sim.cw_min.to_string(),
            "sim.cw_max" => self.sim.cw_max.to_string(),
            "sim.max_time_ms" => self.sim.max_time_ms.to_string(),
            "sim.generation_size" => self.sim.generation_size.to_string(),
            "sim.opportunistic_caching" => self.sim.opportunistic_caching.to_string(),
            "sim.ack_slots" => self.sim.ack_slots.as_str().to_string(),
            _ => return Err(Error::config(key, "unknown key")),
        };
        Ok(s)
    }

    /// Applies `key=value` lines on top of `self`. Blank lines and `#`
    /// comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(format!("line {}", lineno + 1), format!("expected key=value, got {line:?}")));
            };
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// Parses a config file over the built-in defaults. Does not validate.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ScenarioConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    /// Full effective configuration, one `key=value` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let value = self.get(key).expect("KEYS only lists known keys");
            out.push_str(key);
            out.push('=');
            out.push_str(&value);
            out.push('\n');
        }
        out
    }
}
