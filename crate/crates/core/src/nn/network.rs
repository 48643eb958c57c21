use super::{check_len, Activation, DenseLayer, GruCell, GruStep, NnError};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A slice of the output vector with its own squashing and scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Head {
    pub size: usize,
    pub activation: Activation,
    pub scale: f64,
}

impl Head {
    pub fn new(size: usize, activation: Activation, scale: f64) -> Self {
        Self { size, activation, scale }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkShape {
    pub input: usize,
    pub hidden: usize,
    pub fc: usize,
    pub heads: Vec<Head>,
}

impl NetworkShape {
    pub fn output(&self) -> usize {
        self.heads.iter().map(|h| h.size).sum()
    }

    fn layers(&self) -> (GruCell, DenseLayer, DenseLayer) {
        let gru = GruCell::new(self.input, self.hidden, 0);
        let fc = DenseLayer::new(self.hidden, self.fc, Activation::Relu, gru.param_count());
        let out = DenseLayer::new(self.fc, self.output(), Activation::Linear, fc.offset + fc.param_count());
        (gru, fc, out)
    }

    pub fn param_count(&self) -> usize {
        let (g, f, o) = self.layers();
        g.param_count() + f.param_count() + o.param_count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    shape: NetworkShape,
    gru: GruCell,
    fc: DenseLayer,
    out: DenseLayer,
    params: Vec<f64>,
}

/// Everything the backward pass needs from one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepCache {
    pub x: Vec<f64>,
    pub gru: GruStep,
    pub fc: Vec<f64>,
    /// Head activations before scaling.
    pub squashed: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub h0: Vec<f64>,
    pub steps: Vec<StepCache>,
}

impl Trace {
    pub fn outputs(&self) -> impl Iterator<Item = &[f64]> {
        self.steps.iter().map(|s| &s.y[..])
    }

    pub fn hidden(&self, t: usize) -> &[f64] {
        &self.steps[t].gru.h
    }

    /// Hidden state entering step `t`.
    pub fn hidden_before(&self, t: usize) -> &[f64] {
        if t == 0 {
            &self.h0
        } else {
            &self.steps[t - 1].gru.h
        }
    }

    pub fn last_hidden(&self) -> &[f64] {
        self.steps.last().map_or(&self.h0, |s| &s.gru.h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub params: Vec<f64>,
    pub inputs: Vec<Vec<f64>>,
    pub h0: Vec<f64>,
}

impl Network {
    pub fn new<R: Rng + ?Sized>(shape: NetworkShape, rng: &mut R) -> Self {
        let mut net = Self::zeros(shape);
        let mut uniform = |b: f64| rng.random_range(-b..=b);
        net.gru.init(&mut net.params, &mut uniform);
        net.fc.init(&mut net.params, &mut uniform);
        net.out.init(&mut net.params, &mut uniform);
        net
    }

    pub fn zeros(shape: NetworkShape) -> Self {
        let (gru, fc, out) = shape.layers();
        let params = vec![0.0; shape.param_count()];
        Self { shape, gru, fc, out, params }
    }

    pub fn from_params(shape: NetworkShape, params: Vec<f64>) -> Result<Self, NnError> {
        check_len("parameters", shape.param_count(), params.len())?;
        let mut net = Self::zeros(shape);
        net.params = params;
        Ok(net)
    }

    pub fn shape(&self) -> &NetworkShape {
        &self.shape
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn hidden_size(&self) -> usize {
        self.shape.hidden
    }

    pub fn zero_hidden(&self) -> Vec<f64> {
        vec![0.0; self.shape.hidden]
    }

    fn head_step(&self, x: Vec<f64>, h_prev: &[f64]) -> StepCache {
        let gru = self.gru.step(&self.params, &x, h_prev);
        let fc = self.fc.forward(&self.params, &gru.h);
        let pre = self.out.forward(&self.params, &fc);
        let mut squashed = Vec::with_capacity(pre.len());
        let mut y = Vec::with_capacity(pre.len());
        let mut k = 0;
        for head in &self.shape.heads {
            for &a in &pre[k..k + head.size] {
                let s = head.activation.apply(a);
                squashed.push(s);
                y.push(head.scale * s);
            }
            k += head.size;
        }
        StepCache { x, gru, fc, squashed, y }
    }

    /// One step without a cache; returns `(output, next hidden)`.
    pub fn step(&self, x: &[f64], h: &[f64]) -> Result<(Vec<f64>, Vec<f64>), NnError> {
        check_len("network input", self.shape.input, x.len())?;
        check_len("hidden state", self.shape.hidden, h.len())?;
        let c = self.head_step(x.to_vec(), h);
        Ok((c.y, c.gru.h))
    }

    pub fn forward(&self, xs: &[Vec<f64>], h0: &[f64]) -> Result<Trace, NnError> {
        check_len("hidden state", self.shape.hidden, h0.len())?;
        let mut steps: Vec<StepCache> = Vec::with_capacity(xs.len());
        for x in xs {
            check_len("network input", self.shape.input, x.len())?;
            let h = steps.last().map_or(h0, |s| &s.gru.h[..]);
            let c = self.head_step(x.clone(), h);
            steps.push(c);
        }
        Ok(Trace { h0: h0.to_vec(), steps })
    }

    /// Backpropagation through time. `dys[t]` is dL/dy at step `t`; an empty
    /// vector means no loss at that step.
    pub fn backward(&self, trace: &Trace, dys: &[Vec<f64>]) -> Result<Gradients, NnError> {
        check_len("output gradients", trace.steps.len(), dys.len())?;
        check_len("trace h0", self.shape.hidden, trace.h0.len())?;
        let out_dim = self.shape.output();
        let mut grads = vec![0.0; self.params.len()];
        let mut inputs = vec![Vec::new(); trace.steps.len()];
        let mut carry = vec![0.0; self.shape.hidden];
        for t in (0..trace.steps.len()).rev() {
            let s = &trace.steps[t];
            if s.x.len() != self.shape.input || s.y.len() != out_dim {
                return Err(NnError::StaleCache("step shape"));
            }
            let mut dh = carry;
            if !dys[t].is_empty() {
                check_len("output gradient", out_dim, dys[t].len())?;
                let mut dpre = Vec::with_capacity(out_dim);
                let mut k = 0;
                for head in &self.shape.heads {
                    for i in k..k + head.size {
                        dpre.push(dys[t][i] * head.scale * head.activation.grad_from_output(s.squashed[i]));
                    }
                    k += head.size;
                }
                let mut dfc = vec![0.0; self.shape.fc];
                // output layer is linear, so pass its pre-activation as y
                self.out.backward(&self.params, &s.fc, &s.squashed, &dpre, &mut grads, &mut dfc);
                self.fc.backward(&self.params, &s.gru.h, &s.fc, &dfc, &mut grads, &mut dh);
            }
            let mut dx = vec![0.0; self.shape.input];
            carry = self.gru.backward_step(&self.params, &s.x, trace.hidden_before(t), &s.gru, &dh, &mut grads, &mut dx);
            inputs[t] = dx;
        }
        Ok(Gradients { params: grads, inputs, h0: carry })
    }

    /// `θ ← χ θ_src + (1 − χ) θ`.
    pub fn soft_update_from(&mut self, src: &Network, chi: f64) -> Result<(), NnError> {
        check_len("soft update source", self.params.len(), src.params.len())?;
        for (p, s) in self.params.iter_mut().zip(&src.params) {
            *p = chi * s + (1.0 - chi) * *p;
        }
        Ok(())
    }
}
