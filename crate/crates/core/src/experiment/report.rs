use super::config::RunConfig;
use super::metrics::{convergence_episode, RunMetrics, WINDOW};
use super::run::RunError;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const CSV_HEADER: &str = "episode,sum_rate,mean_snr_db,mission_ok,collisions,ma200_sum_rate,ma200_snr_db";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scheme: String,
    pub seed: u64,
    pub episodes: usize,
    pub truncated: bool,
    /// Episodes in the final window the booleans below are judged on.
    pub window: usize,
    pub final_ma200_sum_rate: Option<f64>,
    pub final_ma200_snr_db: Option<f64>,
    pub mean_snr_db: Option<f64>,
    pub snr_min_db: f64,
    pub snr_constraint_met: bool,
    pub mission_rate: Option<f64>,
    pub mission_constraint_met: bool,
    pub collision_free: bool,
    pub mean_episode_reward: Option<f64>,
    /// First episode whose moving-average sum-rate stays within 5% of its final value.
    pub convergence_episode: Option<usize>,
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> Option<f64> {
    let n = xs.len();
    (n > 0).then(|| xs.sum::<f64>() / n as f64)
}

pub fn summarize(m: &RunMetrics, cfg: &RunConfig) -> Summary {
    let w = m.final_window();
    let mean_snr = mean(w.iter().map(|r| r.mean_snr_db));
    let mission_rate = mean(w.iter().map(|r| if r.mission_ok { 1.0 } else { 0.0 }));
    let ma_rate = m.ma_sum_rate();
    Summary {
        scheme: cfg.scheme.to_string(),
        seed: cfg.seed,
        episodes: m.len(),
        truncated: m.truncated,
        window: w.len(),
        final_ma200_sum_rate: ma_rate.last().copied(),
        final_ma200_snr_db: m.ma_snr_db().last().copied(),
        mean_snr_db: mean_snr,
        snr_min_db: cfg.snr_min_db,
        snr_constraint_met: mean_snr.is_some_and(|s| s >= cfg.snr_min_db),
        mission_rate,
        mission_constraint_met: !w.is_empty() && w.iter().all(|r| r.mission_ok),
        collision_free: w.iter().all(|r| r.collisions == 0),
        mean_episode_reward: mean(w.iter().map(|r| r.total_reward)),
        convergence_episode: convergence_episode(&ma_rate, 0.05),
    }
}

pub fn episodes_csv(m: &RunMetrics) -> String {
    let (ma_r, ma_s) = (m.ma_sum_rate(), m.ma_snr_db());
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for ((r, a), b) in m.rows.iter().zip(&ma_r).zip(&ma_s) {
        let _ = writeln!(s, "{},{},{},{},{},{},{}", r.episode, r.sum_rate, r.mean_snr_db, r.mission_ok, r.collisions, a, b);
    }
    s
}

fn polyline(out: &mut String, ys: &[f64], top: f64, height: f64, width: f64, color: &str, title: &str) {
    let finite: Vec<f64> = ys.iter().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let dx = if ys.len() > 1 { width / (ys.len() - 1) as f64 } else { 0.0 };
    let mut pts = String::new();
    for (i, y) in ys.iter().enumerate() {
        if y.is_finite() {
            let py = top + height * (1.0 - (y - lo) / span);
            let _ = write!(pts, "{:.2},{:.2} ", 50.0 + i as f64 * dx, py);
        }
    }
    let _ = writeln!(out, r#"<text x="50" y="{:.0}" font-size="13">{title}</text>"#, top - 6.0);
    let _ = writeln!(out, r##"<rect x="50" y="{top}" width="{width}" height="{height}" fill="none" stroke="#999"/>"##);
    if !finite.is_empty() {
        let _ = writeln!(out, r#"<text x="46" y="{:.0}" font-size="10" text-anchor="end">{hi:.3}</text>"#, top + 10.0);
        let _ = writeln!(out, r#"<text x="46" y="{:.0}" font-size="10" text-anchor="end">{lo:.3}</text>"#, top + height);
    }
    let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.trim_end());
}

/// Two stacked line charts of the moving averages.
pub fn curves_svg(m: &RunMetrics, scheme: &str) -> String {
    let (w, h) = (640.0, 180.0);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="720" height="460" font-family="sans-serif">"#);
    polyline(&mut s, &m.ma_sum_rate(), 30.0, h, w, "#1f77b4", &format!("{scheme}: sum-rate, {WINDOW}-episode moving average"));
    polyline(&mut s, &m.ma_snr_db(), 260.0, h, w, "#d62728", &format!("{scheme}: sensing SNR (dB), {WINDOW}-episode moving average"));
    s.push_str("</svg>\n");
    s
}

fn write(path: PathBuf, text: &str) -> Result<PathBuf, RunError> {
    std::fs::write(&path, text).map_err(|source| RunError::Io { path: path.display().to_string(), source })?;
    Ok(path)
}

/// Writes `episodes.csv`, `summary.json` and `curves.svg` into `dir`.
pub fn report(m: &RunMetrics, cfg: &RunConfig, dir: &Path) -> Result<Summary, RunError> {
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.display().to_string(), source })?;
    let summary = summarize(m, cfg);
    write(dir.join("episodes.csv"), &episodes_csv(m))?;
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write(dir.join("summary.json"), &json)?;
    write(dir.join("curves.svg"), &curves_svg(m, &summary.scheme))?;
    Ok(summary)
}
