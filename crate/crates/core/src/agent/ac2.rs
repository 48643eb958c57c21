//! Advantage actor-critic baseline: Gaussian policy around the actor output
//! with a fixed std, a state-value critic, and one update per episode using
//! only that episode.

use super::{ActorCritic, AgentConfig, AgentError, TrainStats};
use crate::nn::{clip_grad_norm, sgd_step};
use crate::replay::EpisodeRecord;

/// Returns `(critic_loss, critic_grad, actor_loss, actor_grad)`.
///
/// The critic regresses `V(S(t))` on the reward-to-go `G(t)`; the actor
/// minimizes `−(1/T) Σ_t A(t) log π(A(t) | S(t))` with `A(t) = G(t) − V(S(t))`.
pub fn ac2_loss_grads(ac: &ActorCritic, rec: &EpisodeRecord, cfg: &AgentConfig) -> Result<(f64, Vec<f64>, f64, Vec<f64>), AgentError> {
    if rec.is_empty() {
        return Err(AgentError::EmptyBatch);
    }
    let t_len = rec.len() as f64;
    let states: Vec<Vec<f64>> = rec.experiences.iter().map(|e| e.s.features.clone()).collect();
    let mut g_ret = vec![0.0; rec.len()];
    let mut acc = 0.0;
    for (t, e) in rec.experiences.iter().enumerate().rev() {
        acc = e.r * cfg.reward_scale + cfg.gamma * acc;
        g_ret[t] = acc;
    }

    let h0 = vec![0.0; cfg.hidden];
    let vt = ac.eval_critic.forward(&states, &h0)?;
    let mut critic_loss = 0.0;
    let mut adv = Vec::with_capacity(rec.len());
    let mut dv = Vec::with_capacity(rec.len());
    for (s, g) in vt.steps.iter().zip(&g_ret) {
        let e = s.y[0] - g;
        critic_loss += e * e / t_len;
        dv.push(vec![2.0 * e / t_len]);
        adv.push(-e);
    }
    let gc = ac.eval_critic.backward(&vt, &dv)?.params;

    let var = cfg.ac2_std * cfg.ac2_std;
    let at = ac.eval_actor.forward(&states, &h0)?;
    let mut actor_loss = 0.0;
    let mut dmu = Vec::with_capacity(rec.len());
    for ((s, e), a) in at.steps.iter().zip(&rec.experiences).zip(&adv) {
        let mut d = Vec::with_capacity(s.y.len());
        let mut logp = 0.0;
        for (mu, act) in s.y.iter().zip(&e.a) {
            logp -= (act - mu).powi(2) / (2.0 * var);
            d.push(-a * (act - mu) / var / t_len);
        }
        actor_loss -= a * logp / t_len;
        dmu.push(d);
    }
    let ga = ac.eval_actor.backward(&at, &dmu)?.params;
    Ok((critic_loss, gc, actor_loss, ga))
}

pub fn ac2_update(ac: &mut ActorCritic, rec: &EpisodeRecord, cfg: &AgentConfig) -> Result<TrainStats, AgentError> {
    let (critic_loss, mut gc, actor_loss, mut ga) = ac2_loss_grads(ac, rec, cfg)?;
    let critic_grad_norm = clip_grad_norm(&mut gc, cfg.grad_clip);
    let actor_grad_norm = clip_grad_norm(&mut ga, cfg.grad_clip);
    sgd_step(ac.eval_critic.params_mut(), &gc, cfg.lr_critic)?;
    sgd_step(ac.eval_actor.params_mut(), &ga, cfg.lr_actor)?;
    Ok(TrainStats { critic_loss, actor_loss, critic_grad_norm, actor_grad_norm })
}
