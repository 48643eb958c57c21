use super::{matvec_acc, matvec_t_acc, outer_acc, Activation};
use serde::{Deserialize, Serialize};

/// Fully connected layer: `W` (out × in) then `b` (out), at `offset`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub input: usize,
    pub output: usize,
    pub activation: Activation,
    pub offset: usize,
}

impl DenseLayer {
    pub fn new(input: usize, output: usize, activation: Activation, offset: usize) -> Self {
        Self { input, output, activation, offset }
    }

    pub fn param_count(&self) -> usize {
        self.output * (self.input + 1)
    }

    fn w(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.output * self.input
    }

    fn b(&self) -> std::ops::Range<usize> {
        let s = self.w().end;
        s..s + self.output
    }

    pub fn init(&self, params: &mut [f64], mut uniform: impl FnMut(f64) -> f64) {
        let bound = 1.0 / (self.input as f64).sqrt();
        params[self.w()].iter_mut().for_each(|p| *p = uniform(bound));
        params[self.b()].iter_mut().for_each(|p| *p = 0.0);
    }

    pub fn forward(&self, params: &[f64], x: &[f64]) -> Vec<f64> {
        let mut a = params[self.b()].to_vec();
        matvec_acc(&params[self.w()], x, &mut a);
        a.iter_mut().for_each(|v| *v = self.activation.apply(*v));
        a
    }

    /// Accumulates parameter gradients and `dx` from `dy`; `y` is this layer's output.
    pub fn backward(&self, params: &[f64], x: &[f64], y: &[f64], dy: &[f64], grads: &mut [f64], dx: &mut [f64]) {
        let da: Vec<f64> = dy
            .iter()
            .zip(y)
            .map(|(d, &y)| d * self.activation.grad_from_output(y))
            .collect();
        outer_acc(&mut grads[self.w()], &da, x);
        grads[self.b()].iter_mut().zip(&da).for_each(|(g, d)| *g += d);
        matvec_t_acc(&params[self.w()], &da, dx);
    }
}
