//! Experiment orchestration: configuration, the online training loop,
//! per-episode metrics, report files, and parameter sweeps.

mod config;
mod metrics;
mod report;
mod run;
mod sweep;
mod verify;

pub use config::{load_config, save_config, ConfigError, RunConfig};
pub use metrics::{average_runs, convergence_episode, moving_average, EpisodeRow, RunMetrics, WINDOW};
pub use report::{curves_svg, episodes_csv, report, summarize, Summary, CSV_HEADER};
pub use run::{play_episode, run, run_repeats, run_with, save_agent, RunError, RunOptions, RunOutput};
pub use sweep::{inversions, sweep, Axis, SweepCell, SweepTable};
pub use verify::{gradient_suite, FD_STEP, FD_TOL};
