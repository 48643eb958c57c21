use super::config::RunConfig;
use super::run::{play_episode, RunError};
use crate::agent::{actor_loss_grad, critic_loss, critic_loss_grad, make_baseline, AgentConfig, Sequence};
use crate::env::{Env, Mission};
use crate::nn::{grad_check, GradCheckReport};
use crate::rng::Streams;
use rand::Rng;

/// Step used by the central differences.
pub const FD_STEP: f64 = 1e-5;
pub const FD_TOL: f64 = 1e-4;

/// Checks the critic loss and the actor objective gradients of a reduced
/// learner (hidden 8, N = 2, M = 2, T = 5) against central differences on
/// every parameter, using replayed episodes from the simulator.
pub fn gradient_suite(seed: u64) -> Result<Vec<(&'static str, GradCheckReport)>, RunError> {
    let cfg = RunConfig { seed, horizon: 5, hidden: 8, fc: 8, reward_scale: 1e-3, gamma: 0.9, ..RunConfig::tiny() };
    let env_cfg = cfg.env_config();
    let mut streams = Streams::new(seed);
    let acfg: AgentConfig = cfg.agent_config();
    let mut agent = make_baseline(cfg.scheme, &acfg, &env_cfg, cfg.zeta, &mut streams.init);
    // targets that differ from the eval nets exercise the bootstrapped terms
    for p in agent.nets.target_critic.params_mut().iter_mut().chain(agent.nets.target_actor.params_mut()) {
        *p += streams.init.random_range(-0.05..0.05);
    }
    let mut env = Env::new(env_cfg.clone(), Mission::sample(&env_cfg, &mut streams.init))?;
    let mut seqs = Vec::new();
    for e in 0..3 {
        let (rec, _) = play_episode(&mut env, &mut agent, &mut streams, e + 1)?;
        seqs.push(Sequence::from_record(&rec, acfg.hidden, acfg.reward_scale));
    }
    let ac = agent.nets;

    let (_, gc) = critic_loss_grad(&ac, &seqs, &acfg)?;
    let all: Vec<usize> = (0..gc.len()).collect();
    let critic = grad_check(
        ac.eval_critic.params(),
        &gc,
        |p| {
            let mut c = ac.clone();
            c.eval_critic.params_mut().copy_from_slice(p);
            critic_loss(&c, &seqs, &acfg).expect("shapes fixed")
        },
        &all,
        FD_STEP,
        FD_TOL,
    );

    let (_, ga) = actor_loss_grad(&ac.eval_actor, &ac.eval_critic, &seqs)?;
    let all: Vec<usize> = (0..ga.len()).collect();
    let actor = grad_check(
        ac.eval_actor.params(),
        &ga,
        |p| {
            let mut a = ac.eval_actor.clone();
            a.params_mut().copy_from_slice(p);
            actor_loss_grad(&a, &ac.eval_critic, &seqs).expect("shapes fixed").0
        },
        &all,
        FD_STEP,
        FD_TOL,
    );
    Ok(vec![("critic_loss", critic), ("actor_objective", actor)])
}
