//! Actor-critic learner for the base station: recurrent DDPG with
//! constrained exploration, plus the ablation and AC2 baselines.

mod ac2;
mod ddpg;

pub use ac2::{ac2_loss_grads, ac2_update};
pub use ddpg::{actor_loss_grad, critic_loss, critic_loss_grad, critic_targets, train_step, ActionValue, Sequence, TrainStats};

use crate::cxla::{CMat, C64};
use crate::env::{EnvConfig, JointAction, MdpState, WorldState};
use crate::layout::{ActionLayout, LayoutError, StateLayout};
use crate::nn::{Activation, Head, Network, NetworkShape, NnError};
use crate::replay::{augmented_minibatch, permute_record, AugmentSchedule, EpisodeBuffer, EpisodeRecord, ReplayError};
use crate::signal;
use crate::world::Heading;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error("beamformer heads are all zero even after resampling the noise")]
    DegenerateBeams,
    #[error("training minibatch is empty")]
    EmptyBatch,
    #[error("unknown scheme `{0}` (expected deeplsc, cne, cer, w or ac2)")]
    UnknownScheme(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    /// Full method.
    Deeplsc,
    /// Plain noise exploration: no deadline guard on headings.
    Cne,
    /// Per-transition replay instead of whole episodes.
    Cer,
    /// No permutation augmentation.
    W,
    /// On-policy advantage actor-critic on the latest episode.
    Ac2,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [SchemeKind::Deeplsc, SchemeKind::Cne, SchemeKind::Cer, SchemeKind::W, SchemeKind::Ac2];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeKind::Deeplsc => "deeplsc",
            SchemeKind::Cne => "cne",
            SchemeKind::Cer => "cer",
            SchemeKind::W => "w",
            SchemeKind::Ac2 => "ac2",
        }
    }

    pub fn guard(self) -> bool {
        self != SchemeKind::Cne
    }

    pub fn augments(self) -> bool {
        matches!(self, SchemeKind::Deeplsc | SchemeKind::Cne | SchemeKind::Cer)
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeKind {
    type Err = AgentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemeKind::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| AgentError::UnknownScheme(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub hidden: usize,
    pub fc: usize,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub chi_a: f64,
    pub chi_c: f64,
    pub gamma: f64,
    /// Bootstrap the last slot from the final state instead of using `z = r`.
    pub bootstrap_terminal: bool,
    /// Initial noise std for the communication, sensing, and movement heads.
    pub sigma_init: [f64; 3],
    pub kappa: f64,
    /// Gradient-norm cap per update, `0` disables.
    pub grad_clip: f64,
    /// Multiplies rewards before they reach the critic.
    pub reward_scale: f64,
    /// Fixed policy std of the AC2 baseline.
    pub ac2_std: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            hidden: 128,
            fc: 128,
            lr_actor: 1e-4,
            lr_critic: 2e-4,
            chi_a: 1e-4,
            chi_c: 1e-4,
            gamma: 1.0,
            bootstrap_terminal: false,
            sigma_init: [0.9, 0.9, 0.9],
            kappa: 0.999,
            grad_clip: 0.0,
            reward_scale: 1.0,
            ac2_std: 0.3,
        }
    }
}

pub fn actor_shape(state_dim: usize, al: &ActionLayout, hidden: usize, fc: usize) -> NetworkShape {
    let n = al.antennas;
    let m = al.uavs;
    NetworkShape {
        input: state_dim,
        hidden,
        fc,
        heads: vec![
            Head::new(2 * n * m, Activation::Tanh, 1.0),
            Head::new(2 * n * n, Activation::Tanh, 1.0),
            Head::new(m, Activation::Tanh, PI),
        ],
    }
}

pub fn critic_shape(input: usize, hidden: usize, fc: usize) -> NetworkShape {
    NetworkShape { input, hidden, fc, heads: vec![Head::new(1, Activation::Linear, 1.0)] }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActorCritic {
    pub eval_actor: Network,
    pub target_actor: Network,
    pub eval_critic: Network,
    pub target_critic: Network,
    pub chi_a: f64,
    pub chi_c: f64,
}

impl ActorCritic {
    /// Targets start as copies of the eval networks.
    pub fn new<R: Rng + ?Sized>(actor: NetworkShape, critic: NetworkShape, chi_a: f64, chi_c: f64, rng: &mut R) -> Self {
        assert!((0.0..=1.0).contains(&chi_a) && (0.0..=1.0).contains(&chi_c), "soft-update factors must lie in [0, 1]");
        let eval_actor = Network::new(actor, rng);
        let eval_critic = Network::new(critic, rng);
        Self {
            target_actor: eval_actor.clone(),
            target_critic: eval_critic.clone(),
            eval_actor,
            eval_critic,
            chi_a,
            chi_c,
        }
    }

    /// `Θ⁻ ← χΘ + (1 − χ)Θ⁻` for both pairs.
    pub fn soft_update(&mut self) {
        self.target_actor
            .soft_update_from(&self.eval_actor, self.chi_a)
            .expect("eval/target actor shapes match");
        self.target_critic
            .soft_update_from(&self.eval_critic, self.chi_c)
            .expect("eval/target critic shapes match");
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplorationState {
    pub sigma_init: [f64; 3],
    pub kappa: f64,
    /// Slots explored so far, across episodes.
    pub global_step: u64,
}

impl ExplorationState {
    pub fn new(sigma_init: [f64; 3], kappa: f64) -> Self {
        Self { sigma_init, kappa, global_step: 0 }
    }

    /// `σ_i² = σ_{i,init}² κ^step` for head `i` (0 comm, 1 sensing, 2 movement).
    pub fn variance(&self, head: usize) -> f64 {
        self.sigma_init[head].powi(2) * self.kappa.powf(self.global_step as f64)
    }
}

/// Actor output for one slot and the next recurrent state.
pub fn act_temporary(ac: &ActorCritic, state: &MdpState, h: &[f64]) -> Result<(Vec<f64>, Vec<f64>), AgentError> {
    Ok(ac.eval_actor.step(&state.features, h)?)
}

fn wrap_moves(v: &mut [f64], al: &ActionLayout) {
    for a in &mut v[al.moves()] {
        *a = a.clamp(-PI, PI);
    }
}

/// Adds per-head Gaussian noise at the current variance, then advances the step counter.
pub fn explore<R: Rng + ?Sized>(raw: &[f64], ex: &mut ExplorationState, al: &ActionLayout, rng: &mut R) -> Vec<f64> {
    let stds = [ex.variance(0).sqrt(), ex.variance(1).sqrt(), ex.variance(2).sqrt()];
    let mut out = raw.to_vec();
    for (head, range) in [al.comm(), al.sensing(), al.moves()].into_iter().enumerate() {
        for v in &mut out[range] {
            let z: f64 = StandardNormal.sample(rng);
            *v += stds[head] * z;
        }
    }
    wrap_moves(&mut out, al);
    ex.global_step += 1;
    out
}

/// Reassembles a column-major `rows × cols` complex block stored as reals then imaginaries.
fn complex_block(v: &[f64], rows: usize, cols: usize) -> CMat {
    let half = rows * cols;
    CMat::from_fn(rows, cols, |i, j| C64::new(v[j * rows + i], v[half + j * rows + i]))
}

/// Maps an explored actor vector to an executable action: beams scaled to the
/// power budget and, when `guard` is set, headings overridden by straight
/// flight once a UAV's deadline binds. `slot` is 1-based.
pub fn constrain(raw: &[f64], world: &WorldState, slot: usize, cfg: &EnvConfig, guard: bool) -> Result<JointAction, AgentError> {
    let n = cfg.antennas();
    let m = cfg.uavs;
    let al = ActionLayout::new(n, m);
    if raw.len() != al.dim() {
        return Err(LayoutError::Length { got: raw.len(), want: al.dim() }.into());
    }
    let ac = complex_block(&raw[al.comm()], n, m);
    let as_ = complex_block(&raw[al.sensing()], n, n);
    let beams = signal::scale_to_power(&ac, &as_, cfg.p_max).map_err(|_| AgentError::DegenerateBeams)?;
    let mut out = raw.to_vec();
    let moves = al.moves().start;
    let remaining = cfg.horizon as i64 - slot as i64 - 1;
    let headings = world
        .uavs
        .iter()
        .enumerate()
        .map(|(k, u)| {
            if guard && u.min_slots_to_goal() as i64 >= remaining {
                let h = u.straight_flight();
                if let Heading::Toward(a) = h {
                    out[moves + k] = a;
                }
                h
            } else {
                Heading::Toward(raw[moves + k])
            }
        })
        .collect();
    Ok(JointAction { beams, headings, raw: out })
}

/// `Q(S, A)` from the eval critic, with its next recurrent state.
pub fn critic_value(ac: &ActorCritic, state: &MdpState, action_raw: &[f64], h: &[f64]) -> Result<(f64, Vec<f64>), AgentError> {
    let x = [&state.features[..], action_raw].concat();
    let (q, h2) = ac.eval_critic.step(&x, h)?;
    Ok((q[0], h2))
}

/// A learner of one scheme together with its running recurrent state.
#[derive(Debug, Clone)]
pub struct Agent {
    pub kind: SchemeKind,
    pub cfg: AgentConfig,
    pub state_layout: StateLayout,
    pub action_layout: ActionLayout,
    pub nets: ActorCritic,
    pub exploration: ExplorationState,
    pub schedule: AugmentSchedule,
    h_actor: Vec<f64>,
    h_critic: Vec<f64>,
}

/// Builds the learner for `kind`. AC2's critic is a state-value network.
pub fn make_baseline<R: Rng + ?Sized>(
    kind: SchemeKind,
    cfg: &AgentConfig,
    env: &EnvConfig,
    zeta: f64,
    rng: &mut R,
) -> Agent {
    let sl = env.state_layout();
    let al = ActionLayout::new(env.antennas(), env.uavs);
    let critic_in = if kind == SchemeKind::Ac2 { sl.dim() } else { sl.dim() + al.dim() };
    let nets = ActorCritic::new(
        actor_shape(sl.dim(), &al, cfg.hidden, cfg.fc),
        critic_shape(critic_in, cfg.hidden, cfg.fc),
        cfg.chi_a,
        cfg.chi_c,
        rng,
    );
    let schedule = if kind.augments() { AugmentSchedule::new(env.uavs, zeta) } else { AugmentSchedule::disabled(env.uavs) };
    Agent {
        kind,
        cfg: cfg.clone(),
        state_layout: sl,
        action_layout: al,
        nets,
        exploration: ExplorationState::new(cfg.sigma_init, cfg.kappa),
        schedule,
        h_actor: vec![0.0; cfg.hidden],
        h_critic: vec![0.0; cfg.hidden],
    }
}

impl Agent {
    /// Zeroes the recurrent states.
    pub fn begin_episode(&mut self) {
        self.h_actor.iter_mut().for_each(|v| *v = 0.0);
        self.h_critic.iter_mut().for_each(|v| *v = 0.0);
    }

    fn perturb<R: Rng + ?Sized>(&mut self, mu: &[f64], rng: &mut R) -> Vec<f64> {
        if self.kind == SchemeKind::Ac2 {
            let mut out: Vec<f64> = mu
                .iter()
                .map(|v| {
                    let z: f64 = StandardNormal.sample(rng);
                    v + self.cfg.ac2_std * z
                })
                .collect();
            wrap_moves(&mut out, &self.action_layout);
            out
        } else {
            explore(mu, &mut self.exploration, &self.action_layout, rng)
        }
    }

    /// Chooses the executed action for `slot` (1-based). Also returns the
    /// recurrent snapshot stored with the transition under per-transition replay.
    pub fn act<R: Rng + ?Sized>(
        &mut self,
        state: &MdpState,
        world: &WorldState,
        slot: usize,
        env: &EnvConfig,
        rng: &mut R,
    ) -> Result<(JointAction, Option<Vec<f64>>), AgentError> {
        let h_in = (self.kind == SchemeKind::Cer).then(|| [&self.h_actor[..], &self.h_critic[..]].concat());
        let (mu, h_next) = act_temporary(&self.nets, state, &self.h_actor)?;
        let guard = self.kind.guard();
        let raw = self.perturb(&mu, rng);
        let action = match constrain(&raw, world, slot, env, guard) {
            Err(AgentError::DegenerateBeams) => {
                let raw = self.perturb(&mu, rng);
                constrain(&raw, world, slot, env, guard)?
            }
            other => other?,
        };
        if self.kind == SchemeKind::Cer {
            self.h_critic = critic_value(&self.nets, state, &action.raw, &self.h_critic)?.1;
        }
        self.h_actor = h_next;
        Ok((action, h_in))
    }

    /// Noise-free action, for evaluation.
    pub fn act_greedy(&mut self, state: &MdpState, world: &WorldState, slot: usize, env: &EnvConfig) -> Result<JointAction, AgentError> {
        let (mu, h_next) = act_temporary(&self.nets, state, &self.h_actor)?;
        self.h_actor = h_next;
        constrain(&mu, world, slot, env, self.kind.guard())
    }

    fn sequences_from_records(&self, recs: &[&EpisodeRecord]) -> Vec<Sequence> {
        recs.iter().map(|r| Sequence::from_record(r, self.cfg.hidden, self.cfg.reward_scale)).collect()
    }

    /// One training invocation after an episode. `latest` is the episode just played.
    pub fn train<R: Rng + ?Sized>(
        &mut self,
        buf: &EpisodeBuffer,
        latest: &EpisodeRecord,
        n_e: usize,
        rng: &mut R,
    ) -> Result<TrainStats, AgentError> {
        let stats = match self.kind {
            SchemeKind::Ac2 => return ac2_update(&mut self.nets, latest, &self.cfg),
            SchemeKind::Cer => {
                let picks = buf.cer_sample(n_e, rng)?;
                let mut seqs: Vec<Sequence> = picks
                    .iter()
                    .map(|e| Sequence::from_transition(e, self.cfg.hidden, self.cfg.reward_scale))
                    .collect();
                let lambda = self.schedule.lambda();
                self.schedule.omega += 1;
                if lambda > 0 {
                    let all = crate::layout::Permutation::all(self.action_layout.uavs);
                    for p in rand::seq::index::sample(rng, all.len() - 1, lambda) {
                        for e in &picks {
                            let rec = EpisodeRecord::new(vec![(*e).clone()]);
                            let q = permute_record(&rec, &all[p + 1], &self.state_layout, &self.action_layout)?;
                            seqs.push(Sequence::from_transition(&q.experiences[0], self.cfg.hidden, self.cfg.reward_scale));
                        }
                    }
                }
                train_step(&mut self.nets, &seqs, &self.cfg)?
            }
            _ => {
                let batch = augmented_minibatch(buf, &mut self.schedule, n_e, &self.state_layout, &self.action_layout, rng)?;
                let refs: Vec<&EpisodeRecord> = batch.iter().map(|c| c.as_ref()).collect();
                let seqs = self.sequences_from_records(&refs);
                train_step(&mut self.nets, &seqs, &self.cfg)?
            }
        };
        self.nets.soft_update();
        Ok(stats)
    }
}
