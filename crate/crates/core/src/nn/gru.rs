use super::{matvec_acc, matvec_t_acc, outer_acc, sigmoid, NnError};
use serde::{Deserialize, Serialize};

/// Gated recurrent unit stored at `offset` in a flat parameter vector.
///
/// Layout: `W` (3H × I), `U` (3H × H), `b` (3H), gate rows ordered
/// update, reset, candidate.
///
/// ```text
/// z  = σ(Wz x + Uz h + bz)
/// r  = σ(Wr x + Ur h + br)
/// n  = tanh(Wn x + Un (r ⊙ h) + bn)
/// h' = (1 − z) ⊙ n + z ⊙ h
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GruCell {
    pub input: usize,
    pub hidden: usize,
    pub offset: usize,
}

/// Activations of one step, kept for backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct GruStep {
    pub z: Vec<f64>,
    pub r: Vec<f64>,
    pub n: Vec<f64>,
    pub h: Vec<f64>,
}

impl GruCell {
    pub fn new(input: usize, hidden: usize, offset: usize) -> Self {
        Self { input, hidden, offset }
    }

    pub fn param_count(&self) -> usize {
        3 * self.hidden * (self.input + self.hidden + 1)
    }

    fn w(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + 3 * self.hidden * self.input
    }

    fn u(&self) -> std::ops::Range<usize> {
        let s = self.w().end;
        s..s + 3 * self.hidden * self.hidden
    }

    fn b(&self) -> std::ops::Range<usize> {
        let s = self.u().end;
        s..s + 3 * self.hidden
    }

    /// Uniform(±1/√fan_in) weights, zero biases.
    pub fn init(&self, params: &mut [f64], mut uniform: impl FnMut(f64) -> f64) {
        let bw = 1.0 / (self.input as f64).sqrt();
        let bu = 1.0 / (self.hidden as f64).sqrt();
        params[self.w()].iter_mut().for_each(|p| *p = uniform(bw));
        params[self.u()].iter_mut().for_each(|p| *p = uniform(bu));
        params[self.b()].iter_mut().for_each(|p| *p = 0.0);
    }

    pub fn step(&self, params: &[f64], x: &[f64], h: &[f64]) -> GruStep {
        let hd = self.hidden;
        let w = &params[self.w()];
        let u = &params[self.u()];
        let b = &params[self.b()];
        let ix = self.input;

        let mut a = b.to_vec();
        matvec_acc(w, x, &mut a);
        // recurrent contributions for z and r; the candidate waits for r
        matvec_acc(&u[..2 * hd * hd], h, &mut a[..2 * hd]);
        let z: Vec<f64> = a[..hd].iter().map(|&v| sigmoid(v)).collect();
        let r: Vec<f64> = a[hd..2 * hd].iter().map(|&v| sigmoid(v)).collect();
        let rh: Vec<f64> = r.iter().zip(h).map(|(r, h)| r * h).collect();
        matvec_acc(&u[2 * hd * hd..], &rh, &mut a[2 * hd..]);
        let n: Vec<f64> = a[2 * hd..].iter().map(|v| v.tanh()).collect();
        let h_new = (0..hd).map(|j| (1.0 - z[j]) * n[j] + z[j] * h[j]).collect();
        debug_assert_eq!(w.len(), 3 * hd * ix);
        GruStep { z, r, n, h: h_new }
    }

    /// Backpropagates `dh` (gradient on this step's output) into parameter
    /// and input gradients. Returns the gradient on the previous hidden state.
    pub fn backward_step(
        &self,
        params: &[f64],
        x: &[f64],
        h_prev: &[f64],
        s: &GruStep,
        dh: &[f64],
        grads: &mut [f64],
        dx: &mut [f64],
    ) -> Vec<f64> {
        let hd = self.hidden;
        let w = &params[self.w()];
        let u = &params[self.u()];

        let mut dh_prev: Vec<f64> = dh.iter().zip(&s.z).map(|(d, z)| d * z).collect();
        let mut da = vec![0.0; 3 * hd];
        for j in 0..hd {
            let dn = dh[j] * (1.0 - s.z[j]);
            let dz = dh[j] * (h_prev[j] - s.n[j]);
            da[2 * hd + j] = dn * (1.0 - s.n[j] * s.n[j]);
            da[j] = dz * s.z[j] * (1.0 - s.z[j]);
        }
        let rh: Vec<f64> = s.r.iter().zip(h_prev).map(|(r, h)| r * h).collect();
        let mut drh = vec![0.0; hd];
        matvec_t_acc(&u[2 * hd * hd..], &da[2 * hd..], &mut drh);
        for j in 0..hd {
            dh_prev[j] += drh[j] * s.r[j];
            let dr = drh[j] * h_prev[j];
            da[hd + j] = dr * s.r[j] * (1.0 - s.r[j]);
        }

        let (wr, ur, br) = (self.w(), self.u(), self.b());
        outer_acc(&mut grads[wr], &da, x);
        {
            let gu = &mut grads[ur];
            outer_acc(&mut gu[..2 * hd * hd], &da[..2 * hd], h_prev);
            outer_acc(&mut gu[2 * hd * hd..], &da[2 * hd..], &rh);
        }
        grads[br].iter_mut().zip(&da).for_each(|(g, d)| *g += d);

        matvec_t_acc(w, &da, dx);
        matvec_t_acc(&u[..2 * hd * hd], &da[..2 * hd], &mut dh_prev);
        dh_prev
    }

    /// Runs a whole sequence from `h0`.
    pub fn forward(&self, params: &[f64], xs: &[Vec<f64>], h0: &[f64]) -> Result<Vec<GruStep>, NnError> {
        super::check_len("GRU h0", self.hidden, h0.len())?;
        let mut steps: Vec<GruStep> = Vec::with_capacity(xs.len());
        for x in xs {
            super::check_len("GRU input", self.input, x.len())?;
            let h = steps.last().map_or(h0, |s| &s.h[..]);
            let s = self.step(params, x, h);
            steps.push(s);
        }
        Ok(steps)
    }
}

/// Runs a GRU over a sequence; returns the hidden states and the per-step cache.
#[cfg(test)]
pub fn gru_forward(cell: &GruCell, params: &[f64], xs: &[Vec<f64>], h0: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<GruStep>), NnError> {
    let steps = cell.forward(params, xs, h0)?;
    Ok((steps.iter().map(|s| s.h.clone()).collect(), steps))
}
