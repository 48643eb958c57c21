use super::{check_len, NnError};

/// `θ ← θ − lr·g`. A zero rate is allowed and leaves `params` untouched.
pub fn sgd_step(params: &mut [f64], grads: &[f64], lr: f64) -> Result<(), NnError> {
    if !(lr >= 0.0 && lr.is_finite()) {
        return Err(NnError::LearningRate(lr));
    }
    check_len("gradient", params.len(), grads.len())?;
    if lr == 0.0 {
        return Ok(());
    }
    for (p, g) in params.iter_mut().zip(grads) {
        *p -= lr * g;
    }
    Ok(())
}

/// Rescales `grads` in place so its L2 norm is at most `max_norm`.
/// Returns the norm before clipping. Non-positive `max_norm` disables clipping.
pub fn clip_grad_norm(grads: &mut [f64], max_norm: f64) -> f64 {
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    if max_norm > 0.0 && norm > max_norm {
        let k = max_norm / norm;
        grads.iter_mut().for_each(|g| *g *= k);
    }
    norm
}

/// Plain SGD with optional gradient clipping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdOptimizer {
    pub lr: f64,
    pub clip: f64,
}

impl SgdOptimizer {
    pub fn new(lr: f64, clip: f64) -> Result<Self, NnError> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(NnError::LearningRate(lr));
        }
        Ok(Self { lr, clip })
    }

    /// Returns the unclipped gradient norm.
    pub fn apply(&self, params: &mut [f64], grads: &mut [f64]) -> Result<f64, NnError> {
        let norm = clip_grad_norm(grads, self.clip);
        sgd_step(params, grads, self.lr)?;
        Ok(norm)
    }
}
