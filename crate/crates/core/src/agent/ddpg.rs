//! Recurrent DDPG updates. Both networks unroll a whole replayed sequence
//! from its stored initial recurrent state; per-transition replay is the
//! special case of length-one sequences.

use super::{ActorCritic, AgentConfig, AgentError};
use crate::nn::{clip_grad_norm, sgd_step, Network};
use crate::replay::{EpisodeRecord, Experience};
use serde::Serialize;

/// A replayed stretch of one episode, in network space.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    /// `L + 1` states; the last is the final next-state.
    pub states: Vec<Vec<f64>>,
    pub actions: Vec<Vec<f64>>,
    /// Already multiplied by the reward scale.
    pub rewards: Vec<f64>,
    pub terminal: Vec<bool>,
    pub h_actor: Vec<f64>,
    pub h_critic: Vec<f64>,
}

impl Sequence {
    pub fn from_record(rec: &EpisodeRecord, hidden: usize, reward_scale: f64) -> Self {
        Self {
            states: rec.state_sequence(),
            actions: rec.experiences.iter().map(|e| e.a.clone()).collect(),
            rewards: rec.experiences.iter().map(|e| e.r * reward_scale).collect(),
            terminal: rec.experiences.iter().map(|e| e.terminal).collect(),
            h_actor: vec![0.0; hidden],
            h_critic: vec![0.0; hidden],
        }
    }

    /// A single transition starting from its stored `[actor; critic]` recurrent snapshot.
    pub fn from_transition(e: &Experience, hidden: usize, reward_scale: f64) -> Self {
        let (h_actor, h_critic) = match &e.h_in {
            Some(h) if h.len() == 2 * hidden => (h[..hidden].to_vec(), h[hidden..].to_vec()),
            _ => (vec![0.0; hidden], vec![0.0; hidden]),
        };
        Self {
            states: vec![e.s.features.clone(), e.s_next.features.clone()],
            actions: vec![e.a.clone()],
            rewards: vec![e.r * reward_scale],
            terminal: vec![e.terminal],
            h_actor,
            h_critic,
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    fn critic_inputs(&self) -> Vec<Vec<f64>> {
        self.states.iter().zip(&self.actions).map(|(s, a)| [&s[..], &a[..]].concat()).collect()
    }
}

/// `z(t) = r(t) + γ Q⁻(S(t+1), π⁻(S(t+1)))`, with `z = r` on terminal slots
/// unless bootstrapping is switched on.
pub fn critic_targets(ac: &ActorCritic, seq: &Sequence, cfg: &AgentConfig) -> Result<Vec<f64>, AgentError> {
    let needs_bootstrap = |t: usize| !seq.terminal[t] || cfg.bootstrap_terminal;
    if !(0..seq.len()).any(needs_bootstrap) {
        return Ok(seq.rewards.clone());
    }
    let ta = ac.target_actor.forward(&seq.states, &seq.h_actor)?;
    let tc = ac.target_critic.forward(&seq.critic_inputs(), &seq.h_critic)?;
    (0..seq.len())
        .map(|t| {
            if !needs_bootstrap(t) {
                return Ok(seq.rewards[t]);
            }
            let x = [&seq.states[t + 1][..], &ta.steps[t + 1].y[..]].concat();
            let (q, _) = ac.target_critic.step(&x, tc.hidden(t))?;
            Ok(seq.rewards[t] + cfg.gamma * q[0])
        })
        .collect()
}

/// Mean over sequences of `Σ_t (Q(t) − z(t))²`.
pub fn critic_loss(ac: &ActorCritic, seqs: &[Sequence], cfg: &AgentConfig) -> Result<f64, AgentError> {
    Ok(critic_loss_grad_impl(ac, seqs, cfg, false)?.0)
}

/// The critic loss and its gradient with respect to the eval critic.
pub fn critic_loss_grad(ac: &ActorCritic, seqs: &[Sequence], cfg: &AgentConfig) -> Result<(f64, Vec<f64>), AgentError> {
    critic_loss_grad_impl(ac, seqs, cfg, true)
}

fn critic_loss_grad_impl(ac: &ActorCritic, seqs: &[Sequence], cfg: &AgentConfig, grad: bool) -> Result<(f64, Vec<f64>), AgentError> {
    if seqs.is_empty() {
        return Err(AgentError::EmptyBatch);
    }
    let b = seqs.len() as f64;
    let mut loss = 0.0;
    let mut g = vec![0.0; if grad { ac.eval_critic.params().len() } else { 0 }];
    for seq in seqs {
        let z = critic_targets(ac, seq, cfg)?;
        let tr = ac.eval_critic.forward(&seq.critic_inputs(), &seq.h_critic)?;
        let mut dys = Vec::with_capacity(seq.len());
        for (step, z) in tr.steps.iter().zip(&z) {
            let e = step.y[0] - z;
            loss += e * e / b;
            dys.push(vec![2.0 * e / b]);
        }
        if grad {
            let gr = ac.eval_critic.backward(&tr, &dys)?;
            g.iter_mut().zip(&gr.params).for_each(|(a, v)| *a += v);
        }
    }
    Ok((loss, g))
}

/// Something that scores actions and exposes `∂Q/∂A`.
pub trait ActionValue {
    /// `Q(t)` along the sequence and `∂(w·Σ_t Q(t))/∂A(t)`.
    fn q_and_action_grads(
        &self,
        states: &[Vec<f64>],
        actions: &[Vec<f64>],
        h0: &[f64],
        weight: f64,
    ) -> Result<(Vec<f64>, Vec<Vec<f64>>), AgentError>;
}

impl ActionValue for Network {
    fn q_and_action_grads(
        &self,
        states: &[Vec<f64>],
        actions: &[Vec<f64>],
        h0: &[f64],
        weight: f64,
    ) -> Result<(Vec<f64>, Vec<Vec<f64>>), AgentError> {
        let xs: Vec<Vec<f64>> = states.iter().zip(actions).map(|(s, a)| [&s[..], &a[..]].concat()).collect();
        let tr = self.forward(&xs, h0)?;
        let q: Vec<f64> = tr.steps.iter().map(|s| s.y[0]).collect();
        let g = self.backward(&tr, &vec![vec![weight]; xs.len()])?;
        let da = g.inputs.into_iter().zip(states).map(|(dx, s)| dx[s.len()..].to_vec()).collect();
        Ok((q, da))
    }
}

/// `−mean Σ_t Q(S(t), π(S(t)))` and its gradient with respect to the actor.
pub fn actor_loss_grad<Q: ActionValue + ?Sized>(actor: &Network, critic: &Q, seqs: &[Sequence]) -> Result<(f64, Vec<f64>), AgentError> {
    if seqs.is_empty() {
        return Err(AgentError::EmptyBatch);
    }
    let b = seqs.len() as f64;
    let mut loss = 0.0;
    let mut g = vec![0.0; actor.params().len()];
    for seq in seqs {
        let states = &seq.states[..seq.len()];
        let tr = actor.forward(states, &seq.h_actor)?;
        let mus: Vec<Vec<f64>> = tr.steps.iter().map(|s| s.y.clone()).collect();
        let (q, da) = critic.q_and_action_grads(states, &mus, &seq.h_critic, -1.0 / b)?;
        loss -= q.iter().sum::<f64>() / b;
        let gr = actor.backward(&tr, &da)?;
        g.iter_mut().zip(&gr.params).for_each(|(a, v)| *a += v);
    }
    Ok((loss, g))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TrainStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
    pub critic_grad_norm: f64,
    pub actor_grad_norm: f64,
}

/// One critic step followed by one actor step against the updated critic.
/// Target networks are left to the caller's soft update.
pub fn train_step(ac: &mut ActorCritic, seqs: &[Sequence], cfg: &AgentConfig) -> Result<TrainStats, AgentError> {
    let (critic_loss, mut gc) = critic_loss_grad(ac, seqs, cfg)?;
    let critic_grad_norm = clip_grad_norm(&mut gc, cfg.grad_clip);
    sgd_step(ac.eval_critic.params_mut(), &gc, cfg.lr_critic)?;

    let (actor_loss, mut ga) = actor_loss_grad(&ac.eval_actor, &ac.eval_critic, seqs)?;
    let actor_grad_norm = clip_grad_norm(&mut ga, cfg.grad_clip);
    sgd_step(ac.eval_actor.params_mut(), &ga, cfg.lr_actor)?;
    Ok(TrainStats { critic_loss, actor_loss, critic_grad_norm, actor_grad_norm })
}
