//! Flat run configuration. Every key is optional in the file; missing keys
//! take the full-scale scenario defaults.

use crate::agent::{AgentConfig, SchemeKind};
use crate::channel::ChannelParams;
use crate::env::{EnvConfig, Rect, RewardParams, SnrPenaltyMode, StateScales};
use crate::signal::{db_to_linear, dbm_to_watts, NoisePowers};
use crate::world::{MobilityParams, Pos2};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("serializing config: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, reason: reason.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: SchemeKind,
    pub episodes: usize,
    pub seed: u64,

    /// Antennas at the base station.
    #[serde(rename = "N")]
    pub antennas: usize,
    /// UAVs.
    #[serde(rename = "M")]
    pub uavs: usize,
    /// Slots per episode.
    #[serde(rename = "T")]
    pub horizon: usize,

    pub p_max_dbm: f64,
    pub noise_dbm: f64,
    pub echo_noise_dbm: f64,
    pub l0_db: f64,
    pub d0: f64,
    pub path_loss_exponent: f64,
    pub sensing_path_loss_exponent: f64,
    pub d_over_lambda: f64,
    pub gbs: [f64; 2],

    pub snr_min_db: f64,
    pub snr_penalty: SnrPenaltyMode,
    pub delta1: f64,
    pub delta2: f64,

    pub uav_altitude: f64,
    pub uav_speed: f64,
    pub start_x: [f64; 2],
    pub start_y: [f64; 2],
    pub goal_x: [f64; 2],
    pub goal_y: [f64; 2],
    pub d_min: f64,
    pub arrival_tol: f64,

    pub target_start: [f64; 2],
    pub target_altitude: f64,
    pub target_speed: f64,
    pub target_azimuth_deg: f64,
    pub target_elevation_deg: f64,
    pub mobility_mu: f64,
    pub mobility_mean_deg: f64,
    pub mobility_sigma_deg: f64,
    pub target_min_altitude: f64,

    pub lr_actor: f64,
    pub lr_critic: f64,
    pub chi_a: f64,
    pub chi_c: f64,
    /// Buffer capacity in episodes.
    #[serde(rename = "D")]
    pub buffer: usize,
    /// Episodes per minibatch.
    #[serde(rename = "N_e")]
    pub batch: usize,
    pub zeta: f64,
    pub kappa: f64,
    pub sigma_init: [f64; 3],
    pub gamma: f64,
    pub bootstrap_terminal: bool,
    pub hidden: usize,
    pub fc: usize,
    pub grad_clip: f64,
    pub reward_scale: f64,
    pub ac2_std: f64,

    pub scale_channel: f64,
    pub scale_sensing: f64,
    pub scale_position: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let a = AgentConfig::default();
        Self {
            scheme: SchemeKind::Deeplsc,
            episodes: 5000,
            seed: 0,
            antennas: 6,
            uavs: 4,
            horizon: 40,
            p_max_dbm: 40.0,
            noise_dbm: -80.0,
            echo_noise_dbm: -80.0,
            l0_db: -30.0,
            d0: 1.0,
            path_loss_exponent: 3.2,
            sensing_path_loss_exponent: 3.2,
            d_over_lambda: 0.5,
            gbs: [0.0, 0.0],
            snr_min_db: 1.0,
            snr_penalty: SnrPenaltyMode::Db,
            delta1: 20.0,
            delta2: 10.0,
            uav_altitude: 80.0,
            uav_speed: 10.0,
            start_x: [-150.0, -80.0],
            start_y: [60.0, 150.0],
            goal_x: [90.0, 160.0],
            goal_y: [50.0, 160.0],
            d_min: 20.0,
            arrival_tol: 10.0,
            target_start: [-60.0, 100.0],
            target_altitude: 70.0,
            target_speed: 10.0,
            target_azimuth_deg: 30.0,
            target_elevation_deg: 30.0,
            mobility_mu: 0.9,
            mobility_mean_deg: 10.0,
            mobility_sigma_deg: 10.0,
            target_min_altitude: 1.0,
            lr_actor: a.lr_actor,
            lr_critic: a.lr_critic,
            chi_a: a.chi_a,
            chi_c: a.chi_c,
            buffer: 2000,
            batch: 64,
            zeta: 0.999,
            kappa: a.kappa,
            sigma_init: a.sigma_init,
            gamma: a.gamma,
            bootstrap_terminal: a.bootstrap_terminal,
            hidden: a.hidden,
            fc: a.fc,
            grad_clip: a.grad_clip,
            reward_scale: a.reward_scale,
            ac2_std: a.ac2_std,
            scale_channel: 1e8,
            scale_sensing: 1e16,
            scale_position: 0.01,
        }
    }
}

fn positive(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be non-negative and finite, got {v}")))
    }
}

fn finite(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite, got {v}")))
    }
}

fn unit_open(field: &'static str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must lie in (0, 1), got {v}")))
    }
}

fn range(field: &'static str, r: [f64; 2]) -> Result<(), ConfigError> {
    if r.iter().all(|v| v.is_finite()) && r[0] <= r[1] {
        Ok(())
    } else {
        Err(invalid(field, format!("must be a finite [lo, hi] with lo <= hi, got {r:?}")))
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, v) in [("N", self.antennas), ("M", self.uavs), ("T", self.horizon), ("D", self.buffer), ("N_e", self.batch)] {
            if v == 0 {
                return Err(invalid(field, "must be at least 1"));
            }
        }
        if self.hidden == 0 {
            return Err(invalid("hidden", "must be at least 1"));
        }
        if self.fc == 0 {
            return Err(invalid("fc", "must be at least 1"));
        }
        for (field, v) in [("p_max_dbm", self.p_max_dbm), ("noise_dbm", self.noise_dbm), ("echo_noise_dbm", self.echo_noise_dbm), ("l0_db", self.l0_db), ("snr_min_db", self.snr_min_db)] {
            finite(field, v)?;
        }
        for (field, v) in [
            ("d0", self.d0),
            ("path_loss_exponent", self.path_loss_exponent),
            ("sensing_path_loss_exponent", self.sensing_path_loss_exponent),
            ("d_over_lambda", self.d_over_lambda),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("uav_altitude", self.uav_altitude),
            ("uav_speed", self.uav_speed),
            ("target_speed", self.target_speed),
            ("arrival_tol", self.arrival_tol),
            ("kappa", self.kappa),
            ("reward_scale", self.reward_scale),
            ("ac2_std", self.ac2_std),
            ("scale_channel", self.scale_channel),
            ("scale_sensing", self.scale_sensing),
            ("scale_position", self.scale_position),
        ] {
            positive(field, v)?;
        }
        for (field, v) in [
            ("d_min", self.d_min),
            ("lr_actor", self.lr_actor),
            ("lr_critic", self.lr_critic),
            ("grad_clip", self.grad_clip),
            ("target_altitude", self.target_altitude),
            ("target_min_altitude", self.target_min_altitude),
            ("mobility_sigma_deg", self.mobility_sigma_deg),
        ] {
            non_negative(field, v)?;
        }
        for (field, v) in [("gbs", self.gbs), ("target_start", self.target_start)] {
            finite(field, v[0])?;
            finite(field, v[1])?;
        }
        for (field, v) in [("target_azimuth_deg", self.target_azimuth_deg), ("target_elevation_deg", self.target_elevation_deg), ("mobility_mean_deg", self.mobility_mean_deg)] {
            finite(field, v)?;
        }
        for (field, r) in [("start_x", self.start_x), ("start_y", self.start_y), ("goal_x", self.goal_x), ("goal_y", self.goal_y)] {
            range(field, r)?;
        }
        unit_open("zeta", self.zeta)?;
        if !(0.0..=1.0).contains(&self.mobility_mu) {
            return Err(invalid("mobility_mu", format!("must lie in [0, 1], got {}", self.mobility_mu)));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(invalid("gamma", format!("must lie in [0, 1], got {}", self.gamma)));
        }
        for (field, v) in [("chi_a", self.chi_a), ("chi_c", self.chi_c)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(invalid(field, format!("must lie in [0, 1], got {v}")));
            }
        }
        if self.sigma_init.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(invalid("sigma_init", format!("entries must be non-negative, got {:?}", self.sigma_init)));
        }
        Ok(())
    }

    pub fn env_config(&self) -> EnvConfig {
        let deg = f64::to_radians;
        EnvConfig {
            uavs: self.uavs,
            horizon: self.horizon,
            channel: ChannelParams {
                l0: db_to_linear(self.l0_db),
                d0: self.d0,
                exponent: self.path_loss_exponent,
                sensing_exponent: self.sensing_path_loss_exponent,
                d_over_lambda: self.d_over_lambda,
                antennas: self.antennas,
                gbs: Pos2::new(self.gbs[0], self.gbs[1]),
            },
            noise: NoisePowers { sigma_m2: dbm_to_watts(self.noise_dbm), sigma_b2: dbm_to_watts(self.echo_noise_dbm) },
            p_max: dbm_to_watts(self.p_max_dbm),
            uav_altitude: self.uav_altitude,
            uav_step: self.uav_speed,
            start_area: Rect { x: self.start_x, y: self.start_y },
            goal_area: Rect { x: self.goal_x, y: self.goal_y },
            target_start: Pos2::new(self.target_start[0], self.target_start[1]),
            target_altitude: self.target_altitude,
            target_azimuth: deg(self.target_azimuth_deg),
            target_elevation: deg(self.target_elevation_deg),
            target_step: self.target_speed,
            mobility: MobilityParams {
                mu_a: self.mobility_mu,
                mu_e: self.mobility_mu,
                xi_a: deg(self.mobility_mean_deg),
                xi_e: deg(self.mobility_mean_deg),
                sigma_phi: deg(self.mobility_sigma_deg),
                sigma_vphi: deg(self.mobility_sigma_deg),
                min_altitude: self.target_min_altitude,
            },
            d_min: self.d_min,
            arrival_tol: self.arrival_tol,
            reward: RewardParams { delta1: self.delta1, delta2: self.delta2, snr_min_db: self.snr_min_db, mode: self.snr_penalty },
            scales: StateScales { channel: self.scale_channel, sensing: self.scale_sensing, position: self.scale_position },
        }
    }

    pub fn agent_config(&self) -> AgentConfig {
        AgentConfig {
            hidden: self.hidden,
            fc: self.fc,
            lr_actor: self.lr_actor,
            lr_critic: self.lr_critic,
            chi_a: self.chi_a,
            chi_c: self.chi_c,
            gamma: self.gamma,
            bootstrap_terminal: self.bootstrap_terminal,
            sigma_init: self.sigma_init,
            kappa: self.kappa,
            grad_clip: self.grad_clip,
            reward_scale: self.reward_scale,
            ac2_std: self.ac2_std,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    /// Reduced scenario for quick learning checks: two UAVs, two antennas,
    /// ten slots, endpoints reachable in time, and a milder path-loss law so
    /// that both the rate and the sensing terms respond to the beams.
    pub fn tiny() -> Self {
        Self {
            episodes: 500,
            antennas: 2,
            uavs: 2,
            horizon: 10,
            path_loss_exponent: 1.0,
            sensing_path_loss_exponent: 1.0,
            snr_min_db: -21.0,
            uav_speed: 15.0,
            arrival_tol: 15.0,
            start_x: [-50.0, -20.0],
            start_y: [60.0, 120.0],
            goal_x: [20.0, 50.0],
            goal_y: [60.0, 120.0],
            buffer: 500,
            batch: 32,
            hidden: 16,
            fc: 32,
            lr_actor: 3e-4,
            lr_critic: 3e-2,
            chi_a: 0.01,
            chi_c: 0.01,
            reward_scale: 5e-2,
            grad_clip: 10.0,
            scale_channel: 3e3,
            scale_sensing: 5e6,
            ..Self::default()
        }
    }
}

/// Reads and validates a config file; an empty file gives the defaults.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    RunConfig::from_toml(&text)
}

pub fn save_config(path: &Path, cfg: &RunConfig) -> Result<(), ConfigError> {
    std::fs::write(path, cfg.to_toml()?).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!((c.antennas, c.uavs, c.horizon), (6, 4, 40));
        assert_eq!(c.snr_min_db, 1.0);
        assert_eq!((c.buffer, c.batch), (2000, 64));
    }

    #[test]
    fn defaults_map_to_physical_units() {
        let e = RunConfig::default().env_config();
        assert!((e.p_max - 10.0).abs() < 1e-12);
        assert!((e.noise.sigma_m2 - 1e-11).abs() < 1e-24);
        assert!((e.channel.l0 - 1e-3).abs() < 1e-15);
        assert!((e.mobility.xi_a - 10f64.to_radians()).abs() < 1e-15);
        assert_eq!(e.state_layout().dim(), 128);
    }

    #[test]
    fn zero_antennas_names_the_field() {
        let err = RunConfig::from_toml("N = 0").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { field: "N", .. }), "{err}");
        assert!(err.to_string().contains("`N`"));
    }

    #[test]
    fn bad_values_are_rejected() {
        for (text, field) in [
            ("zeta = 1.0", "zeta"),
            ("start_x = [5.0, -5.0]", "start_x"),
            ("uav_speed = -1.0", "uav_speed"),
            ("mobility_mu = 1.5", "mobility_mu"),
            ("chi_c = 2.0", "chi_c"),
        ] {
            match RunConfig::from_toml(text) {
                Err(ConfigError::Invalid { field: f, .. }) => assert_eq!(f, field),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(matches!(RunConfig::from_toml("antenas = 3"), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn partial_file_overrides_only_given_keys() {
        let c = RunConfig::from_toml("M = 2\nscheme = \"cne\"\nsigma_init = [0.5, 0.4, 0.3]").unwrap();
        assert_eq!(c.uavs, 2);
        assert_eq!(c.scheme, SchemeKind::Cne);
        assert_eq!(c.sigma_init, [0.5, 0.4, 0.3]);
        assert_eq!(c.horizon, 40);
    }

    #[test]
    fn save_load_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        let mut c = RunConfig::tiny();
        c.seed = 1 << 40;
        c.scheme = SchemeKind::Ac2;
        save_config(&p, &c).unwrap();
        assert_eq!(load_config(&p).unwrap(), c);
    }

    #[test]
    fn tiny_config_endpoints_are_reachable() {
        let c = RunConfig::tiny();
        c.validate().unwrap();
        let far = ((c.goal_x[1] - c.start_x[0]).powi(2) + (c.goal_y[1] - c.start_y[0]).powi(2)).sqrt();
        assert!(far / c.uav_speed <= (c.horizon - 1) as f64);
        assert!(c.arrival_tol >= c.uav_speed);
    }
}
