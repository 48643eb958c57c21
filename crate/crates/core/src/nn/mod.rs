//! A small recurrent network engine with hand-written backpropagation.
//!
//! Every network is `input → GRU → dense(relu) → dense(linear) → heads`.
//! Parameters live in one flat `Vec<f64>`; layers are views at fixed
//! offsets, which keeps soft updates, SGD, and checkpoints trivial.

mod checkpoint;
mod dense;
mod gradcheck;
mod gru;
mod network;
mod optim;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CheckpointHeader, CheckpointMeta};
pub use dense::DenseLayer;
pub use gradcheck::{grad_check, GradCheckReport, GradMismatch};
pub use gru::{GruCell, GruStep};
pub use network::{Gradients, Head, Network, NetworkShape, StepCache, Trace};
pub use optim::{clip_grad_norm, sgd_step, SgdOptimizer};

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum NnError {
    #[error("{what}: expected length {want}, got {got}")]
    Dim { what: &'static str, want: usize, got: usize },
    #[error("gradient cache does not match this network ({0})")]
    StaleCache(&'static str),
    #[error("learning rate must be positive, got {0}")]
    LearningRate(f64),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_len(what: &'static str, want: usize, got: usize) -> Result<(), NnError> {
    if want == got {
        Ok(())
    } else {
        Err(NnError::Dim { what, want, got })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Linear,
}

impl Activation {
    pub fn apply(self, a: f64) -> f64 {
        match self {
            Activation::Relu => a.max(0.0),
            Activation::Tanh => a.tanh(),
            Activation::Linear => a,
        }
    }

    /// Derivative expressed through the activation's output `y`.
    pub fn grad_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Linear => 1.0,
        }
    }
}

pub(crate) fn sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// `out += W x` for a row-major `rows × x.len()` block of `w`.
#[inline]
pub(crate) fn matvec_acc(w: &[f64], x: &[f64], out: &mut [f64]) {
    let cols = x.len();
    for (o, row) in out.iter_mut().zip(w.chunks_exact(cols)) {
        *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `out += Wᵀ d` for a row-major `d.len() × out.len()` block.
#[inline]
pub(crate) fn matvec_t_acc(w: &[f64], d: &[f64], out: &mut [f64]) {
    let cols = out.len();
    for (di, row) in d.iter().zip(w.chunks_exact(cols)) {
        if *di == 0.0 {
            continue;
        }
        for (o, a) in out.iter_mut().zip(row) {
            *o += di * a;
        }
    }
}

/// `gw += d xᵀ`.
#[inline]
pub(crate) fn outer_acc(gw: &mut [f64], d: &[f64], x: &[f64]) {
    let cols = x.len();
    for (di, row) in d.iter().zip(gw.chunks_exact_mut(cols)) {
        if *di == 0.0 {
            continue;
        }
        for (g, xv) in row.iter_mut().zip(x) {
            *g += di * xv;
        }
    }
}
