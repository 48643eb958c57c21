use super::config::{ConfigError, RunConfig};
use super::metrics::{EpisodeRow, RunMetrics};
use crate::agent::{make_baseline, Agent, AgentError, SchemeKind, TrainStats};
use crate::env::{Env, EnvError, Mission};
use crate::nn::{save_checkpoint, CheckpointMeta, NnError};
use crate::replay::{EpisodeBuffer, EpisodeRecord, Experience, ReplayError};
use crate::rng::{repeat_seed, Streams};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Replay(#[from] ReplayError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error("writing {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Stop before the next episode once this much time has passed.
    pub max_wall: Option<Duration>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub metrics: RunMetrics,
    pub agent: Agent,
    pub last_train: Option<TrainStats>,
}

/// Plays one episode with exploration and returns its record and metrics row.
pub fn play_episode(env: &mut Env, agent: &mut Agent, streams: &mut Streams, episode: usize) -> Result<(EpisodeRecord, EpisodeRow), RunError> {
    let cfg = env.config().clone();
    env.set_mission(Mission::sample(&cfg, &mut streams.endpoints))?;
    agent.begin_episode();
    let mut steps = Vec::with_capacity(cfg.horizon);
    let mut logs = Vec::with_capacity(cfg.horizon);
    while !env.is_done() {
        let s = env.state();
        let noise = if agent.kind == SchemeKind::Ac2 { &mut streams.policy } else { &mut streams.exploration };
        let (action, h_in) = agent.act(&s, env.world(), env.slot(), &cfg, noise)?;
        let (s_next, log) = env.step(&action, &mut streams.mobility)?;
        steps.push((s, action.raw, s_next, h_in));
        logs.push(log);
    }
    let outcome = env.outcome(&logs)?;
    let last = steps.len() - 1;
    let experiences = steps
        .into_iter()
        .zip(&outcome.rewards)
        .enumerate()
        .map(|(t, ((s, a, s_next, h_in), &r))| Experience { s, a, r, s_next, terminal: t == last, h_in })
        .collect();
    let row = EpisodeRow {
        episode,
        sum_rate: outcome.sum_rate,
        mean_snr_db: outcome.mean_snr_db,
        mission_ok: outcome.all_missions_ok(),
        collisions: outcome.collisions,
        total_reward: outcome.total_reward(),
    };
    Ok((EpisodeRecord::new(experiences), row))
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    run_with(cfg, RunOptions::default())
}

/// The online training loop: play, store, sample, train, soft-update.
pub fn run_with(cfg: &RunConfig, opts: RunOptions) -> Result<RunOutput, RunError> {
    cfg.validate()?;
    let started = Instant::now();
    let env_cfg = cfg.env_config();
    let mut streams = Streams::new(cfg.seed);
    let mut agent = make_baseline(cfg.scheme, &cfg.agent_config(), &env_cfg, cfg.zeta, &mut streams.init);
    let mut env = Env::new(env_cfg.clone(), Mission::sample(&env_cfg, &mut streams.init))?;
    let mut buf = EpisodeBuffer::new(cfg.buffer, cfg.horizon);
    let mut metrics = RunMetrics::default();
    let mut last_train = None;
    for episode in 1..=cfg.episodes {
        if opts.max_wall.is_some_and(|m| started.elapsed() >= m) {
            metrics.truncated = true;
            break;
        }
        let (rec, row) = play_episode(&mut env, &mut agent, &mut streams, episode)?;
        buf.push(rec)?;
        let latest = buf.get(buf.len() - 1).expect("just pushed");
        last_train = Some(agent.train(&buf, latest, cfg.batch, &mut streams.sampling)?);
        metrics.rows.push(row);
    }
    Ok(RunOutput { metrics, agent, last_train })
}

/// Runs `repeats` independent copies; repeat `k` uses `repeat_seed(cfg.seed, k)`.
pub fn run_repeats(cfg: &RunConfig, repeats: usize, opts: RunOptions) -> Result<Vec<RunOutput>, RunError> {
    (0..repeats as u64)
        .map(|k| {
            let c = RunConfig { seed: repeat_seed(cfg.seed, k), ..cfg.clone() };
            run_with(&c, opts)
        })
        .collect()
}

/// Writes the four eval and target networks as `<prefix>_{actor,critic}[_target].ckpt`.
pub fn save_agent(dir: &Path, prefix: &str, agent: &Agent, seed: u64, step: u64) -> Result<Vec<PathBuf>, RunError> {
    let nets = [
        ("actor", &agent.nets.eval_actor),
        ("actor_target", &agent.nets.target_actor),
        ("critic", &agent.nets.eval_critic),
        ("critic_target", &agent.nets.target_critic),
    ];
    let mut out = Vec::new();
    for (name, net) in nets {
        let label = format!("{}/{name}", agent.kind);
        let path = dir.join(format!("{prefix}_{name}.ckpt"));
        save_checkpoint(&path, net, &CheckpointMeta::new(&label, seed, step))?;
        out.push(path);
    }
    Ok(out)
}
