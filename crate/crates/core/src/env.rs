//! The episodic MDP: state assembly, slot stepping, and the end-of-episode
//! reward that folds in the collision and average-SNR penalties.

use crate::channel::{ChannelError, ChannelParams, ChannelSet};
use crate::layout::StateLayout;
use crate::signal::{self, Beamformers, NoisePowers};
use crate::world::{self, Heading, MobilityParams, Pos2, TargetState, UavState};
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("expected {want} slot logs, got {got}")]
    EpisodeLength { got: usize, want: usize },
    #[error("action has {got} headings for {want} UAVs")]
    ActionShape { got: usize, want: usize },
    #[error("episode already finished after {0} slots")]
    Finished(usize),
}

/// Axis-aligned sampling area in the horizontal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

impl Rect {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Pos2 {
        let pick = |rng: &mut R, [lo, hi]: [f64; 2]| if hi > lo { rng.random_range(lo..=hi) } else { lo };
        let x = pick(rng, self.x);
        let y = pick(rng, self.y);
        Pos2::new(x, y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnrPenaltyMode {
    /// Requirement and deficit measured in dB.
    Db,
    /// Requirement and deficit measured as linear power ratios.
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    /// Collision penalty.
    pub delta1: f64,
    /// Weight on the average-SNR deficit.
    pub delta2: f64,
    pub snr_min_db: f64,
    pub mode: SnrPenaltyMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateScales {
    pub channel: f64,
    pub sensing: f64,
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub uavs: usize,
    pub horizon: usize,
    pub channel: ChannelParams,
    pub noise: NoisePowers,
    /// Transmit budget (W).
    pub p_max: f64,
    pub uav_altitude: f64,
    pub uav_step: f64,
    pub start_area: Rect,
    pub goal_area: Rect,
    pub target_start: Pos2,
    pub target_altitude: f64,
    pub target_azimuth: f64,
    pub target_elevation: f64,
    pub target_step: f64,
    pub mobility: MobilityParams,
    pub d_min: f64,
    pub arrival_tol: f64,
    pub reward: RewardParams,
    pub scales: StateScales,
}

impl EnvConfig {
    pub fn antennas(&self) -> usize {
        self.channel.antennas
    }

    pub fn state_layout(&self) -> StateLayout {
        StateLayout::new(self.antennas(), self.uavs)
    }
}

/// Fixed start and goal of every UAV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mission {
    pub starts: Vec<Pos2>,
    pub goals: Vec<Pos2>,
}

impl Mission {
    /// Draws UAV `m`'s start then goal, in UAV order, so the first `k` UAVs
    /// do not depend on how many follow.
    pub fn sample<R: Rng + ?Sized>(cfg: &EnvConfig, rng: &mut R) -> Self {
        let (starts, goals) = (0..cfg.uavs)
            .map(|_| (cfg.start_area.sample(rng), cfg.goal_area.sample(rng)))
            .unzip();
        Self { starts, goals }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub uavs: Vec<UavState>,
    pub target: TargetState,
    /// Channels at the current positions.
    pub channels: ChannelSet,
}

/// Observed state, already normalized for the networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdpState {
    pub features: Vec<f64>,
}

/// The action the environment executes.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAction {
    pub beams: Beamformers,
    pub headings: Vec<Heading>,
    /// Flat actor-space vector recorded for the critic and the replay buffer.
    pub raw: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotLog {
    pub sum_rate: f64,
    pub snr_linear: f64,
    pub collision: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub rewards: Vec<f64>,
    pub sum_rate: f64,
    pub mean_snr_linear: f64,
    pub mean_snr_db: f64,
    pub snr_met: bool,
    pub mission_ok: Vec<bool>,
    /// Slots in which some separation constraint was violated.
    pub collisions: usize,
}

impl EpisodeOutcome {
    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }

    pub fn all_missions_ok(&self) -> bool {
        self.mission_ok.iter().all(|&ok| ok)
    }

    /// Undiscounted reward-to-go from each slot.
    pub fn returns(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rewards.len()];
        let mut acc = 0.0;
        for (t, r) in self.rewards.iter().enumerate().rev() {
            acc += r;
            out[t] = acc;
        }
        out
    }
}

/// Flattens channels and UAV positions into the network input.
pub fn build_state(ch: &ChannelSet, uavs: &[UavState], scales: &StateScales) -> MdpState {
    let n = ch.hc.rows();
    let m = ch.hc.cols();
    let layout = StateLayout::new(n, m);
    let mut f = vec![0.0; layout.dim()];
    for col in 0..m {
        for i in 0..n {
            let z = ch.hc[(i, col)];
            f[layout.hc_re().start + col * n + i] = z.re * scales.channel;
            f[layout.hc_im().start + col * n + i] = z.im * scales.channel;
        }
    }
    for col in 0..n {
        for i in 0..n {
            let z = ch.hs_mat[(i, col)];
            f[layout.hs_re().start + col * n + i] = z.re * scales.sensing;
            f[layout.hs_im().start + col * n + i] = z.im * scales.sensing;
        }
    }
    let p0 = layout.positions().start;
    for (k, u) in uavs.iter().enumerate() {
        f[p0 + 2 * k] = u.pos.x * scales.position;
        f[p0 + 2 * k + 1] = u.pos.y * scales.position;
    }
    MdpState { features: f }
}

/// Applies the four-case reward once all `T` slots are known.
pub fn episode_rewards(logs: &[SlotLog], final_uavs: &[UavState], cfg: &EnvConfig) -> Result<EpisodeOutcome, EnvError> {
    if logs.len() != cfg.horizon {
        return Err(EnvError::EpisodeLength { got: logs.len(), want: cfg.horizon });
    }
    let t = logs.len() as f64;
    let mean_lin = logs.iter().map(|l| l.snr_linear).sum::<f64>() / t;
    let mean_db = signal::snr_db(mean_lin);
    let rp = &cfg.reward;
    let (snr_met, deficit) = match rp.mode {
        SnrPenaltyMode::Db => (mean_db >= rp.snr_min_db, rp.snr_min_db - mean_db),
        SnrPenaltyMode::Linear => {
            let min_lin = signal::db_to_linear(rp.snr_min_db);
            (mean_lin >= min_lin, min_lin - mean_lin)
        }
    };
    let rewards = logs
        .iter()
        .map(|l| slot_reward(l.collision, snr_met, l.sum_rate, deficit, rp))
        .collect();
    Ok(EpisodeOutcome {
        rewards,
        sum_rate: logs.iter().map(|l| l.sum_rate).sum(),
        mean_snr_linear: mean_lin,
        mean_snr_db: mean_db,
        snr_met,
        mission_ok: final_uavs.iter().map(|u| u.within(cfg.arrival_tol)).collect(),
        collisions: logs.iter().filter(|l| l.collision).count(),
    })
}

/// One slot's reward given the episode-level SNR verdict.
pub fn slot_reward(collision: bool, snr_met: bool, sum_rate: f64, deficit: f64, rp: &RewardParams) -> f64 {
    match (collision, snr_met) {
        (true, false) => -rp.delta1 - rp.delta2 * deficit,
        (true, true) => -rp.delta1,
        (false, false) => sum_rate - rp.delta2 * deficit,
        (false, true) => sum_rate,
    }
}

/// One running episode.
#[derive(Debug, Clone)]
pub struct Env {
    cfg: EnvConfig,
    mission: Mission,
    world: WorldState,
    /// Slots already played.
    played: usize,
}

impl Env {
    pub fn new(cfg: EnvConfig, mission: Mission) -> Result<Self, EnvError> {
        let world = initial_world(&cfg, &mission)?;
        Ok(Self { cfg, mission, world, played: 0 })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn mission(&self) -> &Mission {
        &self.mission
    }

    pub fn world(&self) -> &WorldState {
        &self.world
    }

    /// 1-based index of the slot about to be played.
    pub fn slot(&self) -> usize {
        self.played + 1
    }

    pub fn is_done(&self) -> bool {
        self.played >= self.cfg.horizon
    }

    pub fn state(&self) -> MdpState {
        build_state(&self.world.channels, &self.world.uavs, &self.cfg.scales)
    }

    pub fn reset(&mut self) -> Result<MdpState, EnvError> {
        self.world = initial_world(&self.cfg, &self.mission)?;
        self.played = 0;
        Ok(self.state())
    }

    pub fn set_mission(&mut self, mission: Mission) -> Result<MdpState, EnvError> {
        self.mission = mission;
        self.reset()
    }

    /// Scores the action on the current channels, then moves everything.
    pub fn step<R: Rng + ?Sized>(&mut self, action: &JointAction, rng: &mut R) -> Result<(MdpState, SlotLog), EnvError> {
        if self.is_done() {
            return Err(EnvError::Finished(self.played));
        }
        if action.headings.len() != self.cfg.uavs {
            return Err(EnvError::ActionShape { got: action.headings.len(), want: self.cfg.uavs });
        }
        let ch = &self.world.channels;
        let sum_rate = signal::sum_rate(ch, &action.beams, &self.cfg.noise);
        let snr_linear = signal::sensing_snr(ch, &action.beams, &self.cfg.noise);

        let uavs: Vec<UavState> = self
            .world
            .uavs
            .iter()
            .zip(&action.headings)
            .map(|(u, &h)| u.step(h))
            .collect();
        let target = world::gauss_markov_step(&self.world.target, &self.cfg.mobility, rng);
        let collision = world::any_collision(&uavs, &target, self.cfg.d_min);
        let channels = self.cfg.channel.build(&uavs, &target)?;
        self.world = WorldState { uavs, target, channels };
        self.played += 1;
        Ok((self.state(), SlotLog { sum_rate, snr_linear, collision }))
    }

    pub fn outcome(&self, logs: &[SlotLog]) -> Result<EpisodeOutcome, EnvError> {
        episode_rewards(logs, &self.world.uavs, &self.cfg)
    }
}

fn initial_world(cfg: &EnvConfig, mission: &Mission) -> Result<WorldState, EnvError> {
    let uavs: Vec<UavState> = mission
        .starts
        .iter()
        .zip(&mission.goals)
        .map(|(&s, &g)| UavState::new(s, g, cfg.uav_altitude, cfg.uav_step))
        .collect();
    let target = TargetState {
        pos: cfg.target_start,
        altitude: cfg.target_altitude,
        azimuth: cfg.target_azimuth,
        elevation: cfg.target_elevation,
        step_len: cfg.target_step,
    };
    let channels = cfg.channel.build(&uavs, &target)?;
    Ok(WorldState { uavs, target, channels })
}

/// Samples a mission and returns the initial world and observation.
pub fn reset<R: Rng + ?Sized>(cfg: &EnvConfig, rng: &mut R) -> Result<(WorldState, MdpState), EnvError> {
    let mission = Mission::sample(cfg, rng);
    let env = Env::new(cfg.clone(), mission)?;
    let s = env.state();
    Ok((env.world, s))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::cxla::{CMat, C64};
    use crate::layout::Permutation;
    use crate::signal::dbm_to_watts;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn full_env(uavs: usize) -> EnvConfig {
        EnvConfig {
            uavs,
            horizon: 40,
            channel: ChannelParams {
                l0: 1e-3,
                d0: 1.0,
                exponent: 3.2,
                sensing_exponent: 3.2,
                d_over_lambda: 0.5,
                antennas: 6,
                gbs: Pos2::new(0.0, 0.0),
            },
            noise: NoisePowers { sigma_m2: dbm_to_watts(-80.0), sigma_b2: dbm_to_watts(-80.0) },
            p_max: dbm_to_watts(40.0),
            uav_altitude: 80.0,
            uav_step: 10.0,
            start_area: Rect { x: [-150.0, -80.0], y: [60.0, 150.0] },
            goal_area: Rect { x: [90.0, 160.0], y: [50.0, 160.0] },
            target_start: Pos2::new(-60.0, 100.0),
            target_altitude: 70.0,
            target_azimuth: 30f64.to_radians(),
            target_elevation: 30f64.to_radians(),
            target_step: 10.0,
            mobility: MobilityParams {
                mu_a: 0.9,
                mu_e: 0.9,
                xi_a: 10f64.to_radians(),
                xi_e: 10f64.to_radians(),
                sigma_phi: 10f64.to_radians(),
                sigma_vphi: 10f64.to_radians(),
                min_altitude: 1.0,
            },
            d_min: 20.0,
            arrival_tol: 10.0,
            reward: RewardParams { delta1: 20.0, delta2: 10.0, snr_min_db: 1.0, mode: SnrPenaltyMode::Db },
            scales: StateScales { channel: 1e8, sensing: 1e16, position: 0.01 },
        }
    }

    fn logs(n: usize, snr: f64, collide_at: &[usize]) -> Vec<SlotLog> {
        (0..n)
            .map(|t| SlotLog { sum_rate: 1.0 + t as f64, snr_linear: snr, collision: collide_at.contains(&t) })
            .collect()
    }

    fn full_power_action(cfg: &EnvConfig, headings: Vec<Heading>) -> JointAction {
        let n = cfg.antennas();
        let ac = CMat::from_fn(n, cfg.uavs, |i, j| C64::new(1.0 + i as f64, j as f64));
        let as_ = CMat::identity(n);
        JointAction { beams: signal::scale_to_power(&ac, &as_, cfg.p_max).unwrap(), headings, raw: vec![] }
    }

    #[test]
    fn deterministic_reset() {
        let cfg = full_env(4);
        let (w1, s1) = reset(&cfg, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let (w2, s2) = reset(&cfg, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(w1.uavs, w2.uavs);
        assert_eq!(w1.target.pos, Pos2::new(-60.0, 100.0));
        assert_eq!(w1.target.altitude, 70.0);
        assert_eq!(s1.features.len(), 128);
    }

    #[test]
    fn reward_case_one_worked_value() {
        let rp = RewardParams { delta1: 20.0, delta2: 10.0, snr_min_db: 1.0, mode: SnrPenaltyMode::Db };
        assert_eq!(slot_reward(true, false, 3.0, 1.0 - 0.5, &rp), -25.0);
        assert_eq!(slot_reward(true, true, 3.0, -2.0, &rp), -20.0);
        assert_eq!(slot_reward(false, false, 3.0, 0.5, &rp), -2.0);
        assert_eq!(slot_reward(false, true, 3.0, -2.0, &rp), 3.0);
    }

    #[test]
    fn rewards_only_for_full_episodes() {
        let mut cfg = full_env(1);
        cfg.horizon = 5;
        let uavs = [UavState::new(Pos2::new(0.0, 0.0), Pos2::new(0.0, 0.0), 80.0, 10.0)];
        assert!(matches!(
            episode_rewards(&logs(4, 2.0, &[]), &uavs, &cfg),
            Err(EnvError::EpisodeLength { got: 4, want: 5 })
        ));
        let out = episode_rewards(&logs(5, 2.0, &[]), &uavs, &cfg).unwrap();
        assert!(out.snr_met);
        assert_eq!(out.rewards, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(out.returns(), vec![15.0, 14.0, 12.0, 9.0, 5.0]);
        assert!(out.all_missions_ok());
    }

    #[test]
    fn reward_collision_with_snr_met() {
        let mut cfg = full_env(1);
        cfg.horizon = 3;
        let uavs = [UavState::new(Pos2::new(0.0, 0.0), Pos2::new(50.0, 0.0), 80.0, 10.0)];
        let out = episode_rewards(&logs(3, 10.0, &[1]), &uavs, &cfg).unwrap();
        assert_eq!(out.rewards[1], -20.0);
        assert_eq!(out.collisions, 1);
        assert_eq!(out.mission_ok, vec![false]);
    }

    #[test]
    fn linear_penalty_mode() {
        let mut cfg = full_env(1);
        cfg.horizon = 2;
        cfg.reward.mode = SnrPenaltyMode::Linear;
        cfg.reward.snr_min_db = 0.0;
        let uavs = [UavState::new(Pos2::new(0.0, 0.0), Pos2::new(0.0, 0.0), 80.0, 10.0)];
        let out = episode_rewards(&logs(2, 0.5, &[]), &uavs, &cfg).unwrap();
        assert!((out.rewards[0] - (1.0 - 10.0 * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn step_matched_single_uav() {
        let mut cfg = full_env(1);
        cfg.start_area = Rect { x: [-100.0, -100.0], y: [100.0, 100.0] };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut env = Env::new(cfg.clone(), Mission::sample(&cfg, &mut rng)).unwrap();
        let h = env.world().channels.hc.column(0);
        let c = 2.0;
        let wc = CMat::from_columns(&[h.conj().scale(C64::new(c, 0.0))]).unwrap();
        let action = JointAction {
            beams: Beamformers { wc, ws: CMat::zeros(6, 6) },
            headings: vec![Heading::Toward(0.0)],
            raw: vec![],
        };
        let (_, log) = env.step(&action, &mut rng).unwrap();
        let want = signal::rate(h.norm_sqr().powi(2) * c * c / cfg.noise.sigma_m2);
        assert!((log.sum_rate - want).abs() <= 1e-12 * want.max(1e-300));
        assert!(log.sum_rate > 0.0);
    }

    #[test]
    fn step_is_deterministic() {
        let cfg = full_env(4);
        let mission = Mission::sample(&cfg, &mut ChaCha8Rng::seed_from_u64(2));
        let action = full_power_action(&cfg, vec![Heading::Toward(0.3); 4]);
        let run = || {
            let mut env = Env::new(cfg.clone(), mission.clone()).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            (0..5).map(|_| env.step(&action, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn near_miss_sets_collision() {
        let cfg = full_env(2);
        let mission = Mission {
            starts: vec![Pos2::new(-100.0, 100.0), Pos2::new(-100.0, 130.0)],
            goals: vec![Pos2::new(100.0, 100.0), Pos2::new(100.0, 130.0)],
        };
        let mut env = Env::new(cfg.clone(), mission).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let up = std::f64::consts::FRAC_PI_2;
        // 30 m apart, closing 20 m -> 10 m < D_min
        let action = full_power_action(&cfg, vec![Heading::Toward(up), Heading::Toward(-up)]);
        let (_, log) = env.step(&action, &mut rng).unwrap();
        assert!(log.collision);
        let apart = full_power_action(&cfg, vec![Heading::Toward(-up), Heading::Toward(up)]);
        let (_, log) = env.step(&apart, &mut rng).unwrap();
        assert!(!log.collision);
    }

    #[test]
    fn step_after_horizon_errors() {
        let mut cfg = full_env(1);
        cfg.horizon = 1;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut env = Env::new(cfg.clone(), Mission::sample(&cfg, &mut rng)).unwrap();
        let a = full_power_action(&cfg, vec![Heading::Hover]);
        env.step(&a, &mut rng).unwrap();
        assert!(matches!(env.step(&a, &mut rng), Err(EnvError::Finished(1))));
    }

    #[test]
    fn zero_channels_state() {
        let ch = ChannelSet {
            hc: CMat::zeros(2, 2),
            hs: crate::cxla::CVec::zeros(2),
            hs_mat: CMat::zeros(2, 2),
        };
        let uavs = [
            UavState::new(Pos2::new(100.0, -50.0), Pos2::new(0.0, 0.0), 80.0, 10.0),
            UavState::new(Pos2::new(20.0, 30.0), Pos2::new(0.0, 0.0), 80.0, 10.0),
        ];
        let s = build_state(&ch, &uavs, &StateScales { channel: 1e8, sensing: 1e16, position: 0.01 });
        let l = StateLayout::new(2, 2);
        assert!(s.features[..l.positions().start].iter().all(|&v| v == 0.0));
        assert_eq!(&s.features[l.positions()], &[1.0, -0.5, 0.2, 0.3]);
    }

    #[test]
    fn permuting_uavs_permutes_state_blocks() {
        let cfg = full_env(4);
        let mission = Mission::sample(&cfg, &mut ChaCha8Rng::seed_from_u64(6));
        let env = Env::new(cfg.clone(), mission.clone()).unwrap();
        let layout = cfg.state_layout();
        for p in Permutation::all(4) {
            let permuted = Mission { starts: p.apply(&mission.starts), goals: p.apply(&mission.goals) };
            let penv = Env::new(cfg.clone(), permuted).unwrap();
            let want = layout.permute(&env.state().features, &p).unwrap();
            assert_eq!(penv.state().features, want);
        }
    }

    #[test]
    fn features_bounded_over_episode() {
        let cfg = full_env(4);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut env = Env::new(cfg.clone(), Mission::sample(&cfg, &mut rng)).unwrap();
        let mut max = 0.0f64;
        for t in 0..cfg.horizon {
            let heads = env.world().uavs.iter().map(|u| if t % 3 == 0 { Heading::Toward(1.0) } else { u.straight_flight() }).collect();
            let (s, _) = env.step(&full_power_action(&cfg, heads), &mut rng).unwrap();
            max = s.features.iter().fold(max, |a, v| a.max(v.abs()));
        }
        assert!(max <= 10.0, "max feature {max}");
        assert!(max > 0.1);
    }
}
