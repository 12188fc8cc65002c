//! Stacked LSTM with a shared per-timestep softmax projection, written out by
//! hand with exact backpropagation through time.
//!
//! Parameters live in one flat vector so the optimizer, clipping and checkpoint
//! code can treat them uniformly. Per layer the layout is a `4H x (I + H)` gate
//! matrix (rows ordered input, forget, cell, output; columns input then
//! recurrent) followed by a `4H` bias. The projection is `K x H` plus a `K` bias.

use rand::{Rng, RngCore};

use super::chunk::{OneHotChunk, ALPHABET};
use crate::error::{Error, Result};

/// Architecture of a path model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelShape {
    pub hidden_size: usize,
    pub layers: usize,
}

impl ModelShape {
    pub fn layer_input(&self, layer: usize) -> usize {
        if layer == 0 {
            ALPHABET
        } else {
            self.hidden_size
        }
    }

    /// Name and shape of each parameter tensor in storage order.
    pub fn tensors(&self) -> Vec<(String, [usize; 2])> {
        let h = self.hidden_size;
        let mut out = Vec::new();
        for l in 0..self.layers {
            out.push((format!("layer{l}.weight"), [4 * h, self.layer_input(l) + h]));
            out.push((format!("layer{l}.bias"), [4 * h, 1]));
        }
        out.push(("projection.weight".into(), [ALPHABET, h]));
        out.push(("projection.bias".into(), [ALPHABET, 1]));
        out
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|(_, [r, c])| r * c).sum()
    }

    /// Offsets of (weight, bias) for `layer`.
    fn layer_offsets(&self, layer: usize) -> (usize, usize) {
        let h = self.hidden_size;
        let mut off = 0;
        for l in 0..layer {
            off += 4 * h * (self.layer_input(l) + h) + 4 * h;
        }
        (off, off + 4 * h * (self.layer_input(layer) + h))
    }

    fn projection_offsets(&self) -> (usize, usize) {
        let (w, _) = self.layer_offsets(self.layers);
        (w, w + ALPHABET * self.hidden_size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    shape: ModelShape,
    params: Vec<f64>,
}

/// Activations of one layer over a chunk, stored time-major.
#[derive(Debug, Clone)]
struct LayerCache {
    /// Concatenated `[input; h_prev]` per step.
    xh: Vec<f64>,
    /// Activated gates (i, f, g, o) per step.
    gates: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
    /// Dropout multipliers applied to this layer's output; empty when disabled.
    mask: Vec<f64>,
}

/// Result of a forward pass, including everything backpropagation needs.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    /// Per-timestep softmax rows.
    pub probs: Vec<[f64; ALPHABET]>,
    layers: Vec<LayerCache>,
    /// Dropped-out top-layer outputs fed to the projection.
    top: Vec<f64>,
    steps: usize,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn softmax(logits: &[f64; ALPHABET]) -> [f64; ALPHABET] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; ALPHABET];
    let mut sum = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        sum += *o;
    }
    for o in &mut out {
        *o /= sum;
    }
    out
}

impl LstmModel {
    /// All-zero parameters.
    pub fn zeros(shape: ModelShape) -> Self {
        LstmModel {
            shape,
            params: vec![0.0; shape.param_count()],
        }
    }

    /// Weights uniform in ±1/√H, biases zero except the forget gate at 1.
    pub fn init(shape: ModelShape, rng: &mut impl RngCore) -> Self {
        let mut model = LstmModel::zeros(shape);
        let h = shape.hidden_size;
        let bound = 1.0 / (h as f64).sqrt();
        for l in 0..shape.layers {
            let (w, b) = shape.layer_offsets(l);
            for p in &mut model.params[w..b] {
                *p = rng.random_range(-bound..bound);
            }
            for p in &mut model.params[b + h..b + 2 * h] {
                *p = 1.0;
            }
        }
        let (pw, pb) = shape.projection_offsets();
        for p in &mut model.params[pw..pb] {
            *p = rng.random_range(-bound..bound);
        }
        model
    }

    pub fn from_params(shape: ModelShape, params: Vec<f64>) -> Result<Self> {
        if params.len() != shape.param_count() {
            return Err(Error::Shape(format!(
                "{} parameters for a model needing {}",
                params.len(),
                shape.param_count()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Format("non-finite model parameter".into()));
        }
        Ok(LstmModel { shape, params })
    }

    pub fn shape(&self) -> ModelShape {
        self.shape
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// Set one projection bias; handy for hand-built models.
    pub fn set_output_bias(&mut self, action: usize, value: f64) {
        let (_, pb) = self.shape.projection_offsets();
        self.params[pb + action] = value;
    }

    /// Run the network over a chunk. With `dropout > 0`, inverted dropout
    /// masks are drawn from `rng` for every layer output.
    pub fn forward(
        &self,
        input: &OneHotChunk,
        dropout: f64,
        rng: &mut impl RngCore,
    ) -> Result<ForwardPass> {
        let shape = self.shape;
        let h = shape.hidden_size;
        let steps = input.len();
        let keep = 1.0 - dropout;
        let mut layers = Vec::with_capacity(shape.layers);
        // Inputs to the current layer, time-major.
        let mut below: Vec<f64> = input.matrix().into_iter().flatten().collect();

        for l in 0..shape.layers {
            let in_dim = shape.layer_input(l);
            let cols = in_dim + h;
            let (wo, bo) = shape.layer_offsets(l);
            let w = &self.params[wo..bo];
            let b = &self.params[bo..bo + 4 * h];
            let mut cache = LayerCache {
                xh: vec![0.0; steps * cols],
                gates: vec![0.0; steps * 4 * h],
                c: vec![0.0; steps * h],
                tanh_c: vec![0.0; steps * h],
                mask: Vec::new(),
            };
            let mut out = vec![0.0; steps * h];
            let mut z = vec![0.0; 4 * h];
            for t in 0..steps {
                {
                    let xh = &mut cache.xh[t * cols..(t + 1) * cols];
                    xh[..in_dim].copy_from_slice(&below[t * in_dim..(t + 1) * in_dim]);
                    if t > 0 {
                        xh[in_dim..].copy_from_slice(&out[(t - 1) * h..t * h]);
                    }
                }
                let xh = &cache.xh[t * cols..(t + 1) * cols];
                for (r, zr) in z.iter_mut().enumerate() {
                    let row = &w[r * cols..(r + 1) * cols];
                    *zr = b[r] + row.iter().zip(xh).map(|(a, x)| a * x).sum::<f64>();
                }
                let gates = &mut cache.gates[t * 4 * h..(t + 1) * 4 * h];
                for j in 0..h {
                    let i = sigmoid(z[j]);
                    let f = sigmoid(z[h + j]);
                    let g = z[2 * h + j].tanh();
                    let o = sigmoid(z[3 * h + j]);
                    gates[j] = i;
                    gates[h + j] = f;
                    gates[2 * h + j] = g;
                    gates[3 * h + j] = o;
                    let c_prev = if t > 0 { cache.c[(t - 1) * h + j] } else { 0.0 };
                    let c = f * c_prev + i * g;
                    let tc = c.tanh();
                    cache.c[t * h + j] = c;
                    cache.tanh_c[t * h + j] = tc;
                    out[t * h + j] = o * tc;
                }
            }
            if out.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerics { epoch: 0 });
            }
            below = out.clone();
            if dropout > 0.0 {
                cache.mask = (0..steps * h)
                    .map(|_| {
                        if rng.random::<f64>() < keep {
                            1.0 / keep
                        } else {
                            0.0
                        }
                    })
                    .collect();
                for (v, m) in below.iter_mut().zip(&cache.mask) {
                    *v *= m;
                }
            }
            layers.push(cache);
        }

        let (pw, pb) = shape.projection_offsets();
        let proj = &self.params[pw..pb];
        let bias = &self.params[pb..pb + ALPHABET];
        let mut probs = Vec::with_capacity(steps);
        for t in 0..steps {
            let top = &below[t * h..(t + 1) * h];
            let mut logits = [0.0; ALPHABET];
            for (k, l) in logits.iter_mut().enumerate() {
                let row = &proj[k * h..(k + 1) * h];
                *l = bias[k] + row.iter().zip(top).map(|(a, x)| a * x).sum::<f64>();
            }
            let p = softmax(&logits);
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerics { epoch: 0 });
            }
            probs.push(p);
        }
        Ok(ForwardPass {
            probs,
            layers,
            top: below,
            steps,
        })
    }

    /// Mean cross-entropy over non-padding target rows.
    pub fn loss(pass: &ForwardPass, targets: &OneHotChunk) -> f64 {
        let mut total = 0.0;
        let mut n = 0usize;
        for (t, p) in pass.probs.iter().enumerate() {
            if let Some(k) = targets.hot(t) {
                total -= p[k].ln();
                n += 1;
            }
        }
        if n == 0 {
            0.0
        } else {
            total / n as f64
        }
    }

    /// Backpropagate the mean cross-entropy through time, adding parameter
    /// gradients into `grads`. Returns the loss.
    pub fn backward_into(
        &self,
        pass: &ForwardPass,
        targets: &OneHotChunk,
        grads: &mut [f64],
    ) -> Result<f64> {
        let shape = self.shape;
        let h = shape.hidden_size;
        let steps = pass.steps;
        if targets.len() != steps {
            return Err(Error::Shape(format!(
                "{} targets for {steps} timesteps",
                targets.len()
            )));
        }
        if grads.len() != self.params.len() {
            return Err(Error::Shape("gradient buffer size".into()));
        }
        let n = targets.rows().iter().flatten().count();
        let loss = LstmModel::loss(pass, targets);
        if n == 0 {
            return Ok(0.0);
        }
        let scale = 1.0 / n as f64;

        // Output layer.
        let (pw, pb) = shape.projection_offsets();
        let mut d_above = vec![0.0; steps * h];
        for t in 0..steps {
            let Some(target) = targets.hot(t) else { continue };
            let mut dy = pass.probs[t];
            dy[target] -= 1.0;
            let top = &pass.top[t * h..(t + 1) * h];
            for (k, d) in dy.iter().enumerate() {
                let d = d * scale;
                grads[pb + k] += d;
                let row = &self.params[pw + k * h..pw + (k + 1) * h];
                let grow = &mut grads[pw + k * h..pw + (k + 1) * h];
                for j in 0..h {
                    grow[j] += d * top[j];
                    d_above[t * h + j] += d * row[j];
                }
            }
        }

        for l in (0..shape.layers).rev() {
            let cache = &pass.layers[l];
            if !cache.mask.is_empty() {
                for (d, m) in d_above.iter_mut().zip(&cache.mask) {
                    *d *= m;
                }
            }
            let in_dim = shape.layer_input(l);
            let cols = in_dim + h;
            let (wo, bo) = shape.layer_offsets(l);
            let mut d_input = vec![0.0; steps * in_dim];
            let mut dh_next = vec![0.0; h];
            let mut dc_next = vec![0.0; h];
            let mut dz = vec![0.0; 4 * h];
            for t in (0..steps).rev() {
                let gates = &cache.gates[t * 4 * h..(t + 1) * 4 * h];
                for j in 0..h {
                    let (i, f, g, o) = (gates[j], gates[h + j], gates[2 * h + j], gates[3 * h + j]);
                    let tc = cache.tanh_c[t * h + j];
                    let c_prev = if t > 0 { cache.c[(t - 1) * h + j] } else { 0.0 };
                    let dh = d_above[t * h + j] + dh_next[j];
                    let d_o = dh * tc;
                    let dc = dh * o * (1.0 - tc * tc) + dc_next[j];
                    dc_next[j] = dc * f;
                    dz[j] = dc * g * i * (1.0 - i);
                    dz[h + j] = dc * c_prev * f * (1.0 - f);
                    dz[2 * h + j] = dc * i * (1.0 - g * g);
                    dz[3 * h + j] = d_o * o * (1.0 - o);
                }
                let xh = &cache.xh[t * cols..(t + 1) * cols];
                let mut dxh = vec![0.0; cols];
                for (r, &d) in dz.iter().enumerate() {
                    grads[bo + r] += d;
                    if d == 0.0 {
                        continue;
                    }
                    let row = &self.params[wo + r * cols..wo + (r + 1) * cols];
                    let grow = &mut grads[wo + r * cols..wo + (r + 1) * cols];
                    for c in 0..cols {
                        grow[c] += d * xh[c];
                        dxh[c] += d * row[c];
                    }
                }
                d_input[t * in_dim..(t + 1) * in_dim].copy_from_slice(&dxh[..in_dim]);
                dh_next.copy_from_slice(&dxh[in_dim..]);
            }
            d_above = d_input;
        }
        Ok(loss)
    }

    /// Gradients and loss for one chunk pair.
    pub fn backward(&self, pass: &ForwardPass, targets: &OneHotChunk) -> Result<(Vec<f64>, f64)> {
        let mut grads = vec![0.0; self.params.len()];
        let loss = self.backward_into(pass, targets, &mut grads)?;
        Ok((grads, loss))
    }
}
