use serde::{Deserialize, Serialize};

/// Moving-average window in episodes.
pub const WINDOW: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    /// 1-based.
    pub episode: usize,
    /// Sum over slots of the per-slot sum-rate.
    pub sum_rate: f64,
    pub mean_snr_db: f64,
    /// Every UAV ended within tolerance of its goal.
    pub mission_ok: bool,
    pub collisions: usize,
    pub total_reward: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub rows: Vec<EpisodeRow>,
    /// Set when the wall-clock budget cut the run short.
    pub truncated: bool,
}

/// Prefix-truncated moving average: entry `e` averages `xs[max(0, e+1−w) ..= e]`.
pub fn moving_average(xs: &[f64], w: usize) -> Vec<f64> {
    assert!(w > 0);
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    for (i, x) in xs.iter().enumerate() {
        acc += x;
        if i >= w {
            acc -= xs[i - w];
        }
        out.push(acc / (i + 1).min(w) as f64);
    }
    out
}

/// First 1-based episode after which the series stays within `rel` of its
/// final value, relative to that value's magnitude.
pub fn convergence_episode(ma: &[f64], rel: f64) -> Option<usize> {
    let last = *ma.last()?;
    let tol = rel * last.abs();
    let mut first = ma.len();
    for (i, v) in ma.iter().enumerate().rev() {
        if (v - last).abs() > tol {
            break;
        }
        first = i;
    }
    Some(first + 1)
}

impl RunMetrics {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, f: impl Fn(&EpisodeRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn ma_sum_rate(&self) -> Vec<f64> {
        moving_average(&self.column(|r| r.sum_rate), WINDOW)
    }

    pub fn ma_snr_db(&self) -> Vec<f64> {
        moving_average(&self.column(|r| r.mean_snr_db), WINDOW)
    }

    pub fn rewards(&self) -> Vec<f64> {
        self.column(|r| r.total_reward)
    }

    /// The last `WINDOW` episodes, or all of them if fewer.
    pub fn final_window(&self) -> &[EpisodeRow] {
        &self.rows[self.rows.len().saturating_sub(WINDOW)..]
    }
}

/// Mean of several repeats, episode by episode, over the common prefix.
pub fn average_runs(runs: &[RunMetrics]) -> RunMetrics {
    let len = runs.iter().map(RunMetrics::len).min().unwrap_or(0);
    let k = runs.len() as f64;
    let rows = (0..len)
        .map(|i| {
            let col = |f: fn(&EpisodeRow) -> f64| runs.iter().map(|r| f(&r.rows[i])).sum::<f64>() / k;
            EpisodeRow {
                episode: i + 1,
                sum_rate: col(|r| r.sum_rate),
                mean_snr_db: col(|r| r.mean_snr_db),
                mission_ok: runs.iter().all(|r| r.rows[i].mission_ok),
                collisions: runs.iter().map(|r| r.rows[i].collisions).sum::<usize>() / runs.len(),
                total_reward: col(|r| r.total_reward),
            }
        })
        .collect();
    RunMetrics { rows, truncated: runs.iter().any(|r| r.truncated) }
}
