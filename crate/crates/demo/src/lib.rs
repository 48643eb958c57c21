//! Three interactive views over the simulator, exported to JavaScript as
//! functions that return JSON strings.

use lae_isac::agent::{make_baseline, SchemeKind};
use lae_isac::cxla::CMat;
use lae_isac::env::{Env, Mission};
use lae_isac::experiment::RunConfig;
use lae_isac::signal::{scale_to_power, sensing_snr, snr_db, sum_rate};
use lae_isac::world::{gauss_markov_step, Pos2, TargetState, UavState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct BeamView {
    /// Angles of departure sampled over [0, π], degrees.
    pub angles_deg: Vec<f64>,
    /// Radiated power toward each angle relative to its peak, dB (floored at −40).
    pub pattern_db: Vec<f64>,
    pub target_aod_deg: f64,
    pub uav_aod_deg: f64,
    pub snr_db: f64,
    pub sum_rate: f64,
}

/// Matched-filter beams toward one UAV and the target, with `sensing_share`
/// of the power budget on the radar streams.
pub fn beam_view(antennas: usize, uav: [f64; 3], target: [f64; 3], sensing_share: f64) -> Result<BeamView, String> {
    let base = RunConfig { antennas: antennas.clamp(1, 32), uavs: 1, ..RunConfig::default() };
    let cfg = base.env_config();
    let p = &cfg.channel;
    let u = UavState::new(Pos2::new(uav[0], uav[1]), Pos2::new(uav[0], uav[1]), uav[2].max(1.0), 1.0);
    let t = TargetState { pos: Pos2::new(target[0], target[1]), altitude: target[2].max(1.0), azimuth: 0.0, elevation: 0.0, step_len: 0.0 };
    let ch = p.build(std::slice::from_ref(&u), &t).map_err(|e| e.to_string())?;
    let n = p.antennas;
    let share = sensing_share.clamp(0.0, 1.0);
    // column weights are set before the joint power scaling
    let hc = ch.hc.column(0).conj();
    let hs = ch.hs.conj();
    let (cn, sn) = (hc.norm_sqr().sqrt(), hs.norm_sqr().sqrt());
    let wc = (1.0 - share).sqrt() / cn;
    let ws = (share / n as f64).sqrt() / sn;
    let ac = CMat::from_fn(n, 1, |i, _| hc.as_slice()[i] * wc);
    let as_ = CMat::from_fn(n, n, |i, _| hs.as_slice()[i] * ws);
    let beams = scale_to_power(&ac, &as_, cfg.p_max).map_err(|e| e.to_string())?;
    let w = beams.combined();

    let angles_deg: Vec<f64> = (0..=180).map(f64::from).collect();
    let raw: Vec<f64> = angles_deg
        .iter()
        .map(|a| {
            let c = p.steering_vector(a.to_radians());
            w.columns().map(|col| c.dot_t(col.as_slice()).norm_sqr()).sum::<f64>()
        })
        .collect();
    let peak = raw.iter().copied().fold(f64::MIN_POSITIVE, f64::max);
    let pattern_db = raw.iter().map(|g| (10.0 * (g / peak).log10()).max(-40.0)).collect();
    Ok(BeamView {
        angles_deg,
        pattern_db,
        target_aod_deg: p.aod(t.pos, t.altitude).map_err(|e| e.to_string())?.to_degrees(),
        uav_aod_deg: p.aod(u.pos, u.altitude).map_err(|e| e.to_string())?.to_degrees(),
        snr_db: snr_db(sensing_snr(&ch, &beams, &cfg.noise)),
        sum_rate: sum_rate(&ch, &beams, &cfg.noise),
    })
}

#[derive(Debug, Serialize)]
pub struct Track {
    /// `[x, y, altitude]` per slot, starting position first.
    pub points: Vec<[f64; 3]>,
    pub azimuth_deg: Vec<f64>,
}

/// Target path under the correlated direction process.
pub fn target_track(seed: u64, steps: usize, mu: f64, mean_deg: f64, sigma_deg: f64) -> Track {
    let base = RunConfig {
        mobility_mu: mu.clamp(0.0, 1.0),
        mobility_mean_deg: mean_deg,
        mobility_sigma_deg: sigma_deg.abs(),
        ..RunConfig::default()
    };
    let cfg = base.env_config();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = TargetState {
        pos: cfg.target_start,
        altitude: cfg.target_altitude,
        azimuth: cfg.target_azimuth,
        elevation: cfg.target_elevation,
        step_len: cfg.target_step,
    };
    let mut track = Track { points: Vec::with_capacity(steps + 1), azimuth_deg: Vec::with_capacity(steps + 1) };
    for _ in 0..=steps {
        track.points.push([t.pos.x, t.pos.y, t.altitude]);
        track.azimuth_deg.push(t.azimuth.to_degrees());
        t = gauss_markov_step(&t, &cfg.mobility, &mut rng);
    }
    track
}

#[derive(Debug, Serialize)]
pub struct Flight {
    /// Per UAV, `[x, y]` per slot including the start.
    pub paths: Vec<Vec<[f64; 2]>>,
    pub goals: Vec<[f64; 2]>,
    pub arrival_tol: f64,
    pub mission_ok: Vec<bool>,
    pub target: Vec<[f64; 2]>,
}

/// One episode of an untrained learner at full scale, with or without the
/// straight-flight deadline guard.
pub fn guarded_flight(seed: u64, uavs: usize, guard: bool) -> Result<Flight, String> {
    let kind = if guard { SchemeKind::Deeplsc } else { SchemeKind::Cne };
    let cfg = RunConfig { uavs: uavs.clamp(1, 6), hidden: 16, fc: 16, scheme: kind, seed, ..RunConfig::default() };
    let env_cfg = cfg.env_config();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agent = make_baseline(kind, &cfg.agent_config(), &env_cfg, cfg.zeta, &mut rng);
    let mission = Mission::sample(&env_cfg, &mut rng);
    let goals = mission.goals.iter().map(|g| [g.x, g.y]).collect();
    let mut env = Env::new(env_cfg.clone(), mission).map_err(|e| e.to_string())?;
    let snap = |env: &Env| env.world().uavs.iter().map(|u| [u.pos.x, u.pos.y]).collect::<Vec<_>>();
    let mut paths: Vec<Vec<[f64; 2]>> = snap(&env).into_iter().map(|p| vec![p]).collect();
    let mut target = vec![[env.world().target.pos.x, env.world().target.pos.y]];
    let mut logs = Vec::new();
    agent.begin_episode();
    while !env.is_done() {
        let s = env.state();
        let (a, _) = agent.act(&s, env.world(), env.slot(), &env_cfg, &mut rng).map_err(|e| e.to_string())?;
        logs.push(env.step(&a, &mut rng).map_err(|e| e.to_string())?.1);
        for (path, p) in paths.iter_mut().zip(snap(&env)) {
            path.push(p);
        }
        target.push([env.world().target.pos.x, env.world().target.pos.y]);
    }
    let outcome = env.outcome(&logs).map_err(|e| e.to_string())?;
    Ok(Flight { paths, goals, arrival_tol: env_cfg.arrival_tol, mission_ok: outcome.mission_ok, target })
}

fn json<T: Serialize>(v: Result<T, String>) -> Result<String, JsValue> {
    v.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string())).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = beamView)]
pub fn beam_view_js(antennas: usize, ux: f64, uy: f64, uh: f64, tx: f64, ty: f64, th: f64, sensing_share: f64) -> Result<String, JsValue> {
    json(beam_view(antennas, [ux, uy, uh], [tx, ty, th], sensing_share))
}

#[wasm_bindgen(js_name = targetTrack)]
pub fn target_track_js(seed: u32, steps: usize, mu: f64, mean_deg: f64, sigma_deg: f64) -> Result<String, JsValue> {
    json(Ok(target_track(u64::from(seed), steps.min(10_000), mu, mean_deg, sigma_deg)))
}

#[wasm_bindgen(js_name = guardedFlight)]
pub fn guarded_flight_js(seed: u32, uavs: usize, guard: bool) -> Result<String, JsValue> {
    json(guarded_flight(u64::from(seed), uavs, guard))
}
