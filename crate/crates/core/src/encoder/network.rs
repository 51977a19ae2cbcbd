//! Temporal-collapse encoder with hand-written backpropagation.
//!
//! Layout: `L` stride-2 conv blocks (kernel 3, zero padding 1, ReLU) over the
//! frame axis, mean+std pooling over time, then an affine projection to the
//! embedding. Two affine heads read the embedding: the emotion discriminator
//! (4 logits) and the prosody-statistics decoder (6 outputs).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use alloc::format;

use crate::math;
use crate::rng;

pub(crate) const KERNEL: usize = 3;
pub(crate) const POOL_EPS: f64 = 1e-5;
pub const STAT_DIM: usize = 6;
pub const CLASSES: usize = 4;

/// A named parameter tensor. `shape` is informational; `data` is row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    fn zeros(name: String, shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self { name, shape, data: vec![0.0; n] }
    }

    fn he(name: String, shape: Vec<usize>, fan_in: usize, rng: &mut rng::SeededRng) -> Self {
        let mut t = Self::zeros(name, shape);
        let scale = math::sqrt(2.0 / fan_in as f64);
        t.data.iter_mut().for_each(|v| *v = scale * rng::normal(rng));
        t
    }

    fn xavier(name: String, shape: Vec<usize>, fan_in: usize, fan_out: usize, rng: &mut rng::SeededRng) -> Self {
        let mut t = Self::zeros(name, shape);
        let scale = math::sqrt(2.0 / (fan_in + fan_out) as f64);
        t.data.iter_mut().for_each(|v| *v = scale * rng::normal(rng));
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conv {
    pub in_ch: usize,
    pub out_ch: usize,
    /// `[out_ch][in_ch][KERNEL]`
    pub weight: Tensor,
    pub bias: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Affine {
    pub inputs: usize,
    pub outputs: usize,
    /// `[outputs][inputs]`
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Affine {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for (o, (row, b)) in out.iter_mut().zip(self.weight.data.chunks_exact(self.inputs).zip(&self.bias.data)) {
            *o = b + math::dot(row, x);
        }
    }

    /// Accumulates weight/bias gradients and returns the input gradient.
    fn backward(&self, x: &[f64], dout: &[f64], grad: &mut Affine) -> Vec<f64> {
        let mut dx = vec![0.0; self.inputs];
        for (o, &g) in dout.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grad.bias.data[o] += g;
            let row = &self.weight.data[o * self.inputs..(o + 1) * self.inputs];
            let grow = &mut grad.weight.data[o * self.inputs..(o + 1) * self.inputs];
            for i in 0..self.inputs {
                grow[i] += g * x[i];
                dx[i] += g * row[i];
            }
        }
        dx
    }
}

/// All trainable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub convs: Vec<Conv>,
    pub projection: Affine,
    pub discriminator: Affine,
    pub aux_decoder: Affine,
}

/// Output length of a stride-2, kernel-3, padding-1 convolution.
pub fn conv_out_len(t: usize) -> usize {
    t.div_ceil(2)
}

impl Network {
    pub fn init(in_ch: usize, channels: &[usize], embed_dim: usize, seed: u64) -> Self {
        let mut rng = rng::stream(seed, u64::MAX);
        let mut convs = Vec::with_capacity(channels.len());
        let mut prev = in_ch;
        for (l, &c) in channels.iter().enumerate() {
            convs.push(Conv {
                in_ch: prev,
                out_ch: c,
                weight: Tensor::he(format!("conv{l}.weight"), vec![c, prev, KERNEL], prev * KERNEL, &mut rng),
                bias: Tensor::zeros(format!("conv{l}.bias"), vec![c]),
            });
            prev = c;
        }
        let pooled = 2 * prev;
        let affine = |name: &str, i: usize, o: usize, rng: &mut rng::SeededRng| Affine {
            inputs: i,
            outputs: o,
            weight: Tensor::xavier(format!("{name}.weight"), vec![o, i], i, o, rng),
            bias: Tensor::zeros(format!("{name}.bias"), vec![o]),
        };
        Self {
            convs,
            projection: affine("projection", pooled, embed_dim, &mut rng),
            discriminator: affine("discriminator", embed_dim, CLASSES, &mut rng),
            aux_decoder: affine("aux_decoder", embed_dim, STAT_DIM, &mut rng),
        }
    }

    pub fn embed_dim(&self) -> usize {
        self.projection.outputs
    }

    pub fn in_channels(&self) -> usize {
        self.convs.first().map_or(self.projection.inputs / 2, |c| c.in_ch)
    }

    pub fn zeros_like(&self) -> Self {
        let mut g = self.clone();
        g.tensors_mut().into_iter().for_each(|t| t.data.iter_mut().for_each(|v| *v = 0.0));
        g
    }

    pub fn tensors(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for c in &self.convs {
            out.push(&c.weight);
            out.push(&c.bias);
        }
        for a in [&self.projection, &self.discriminator, &self.aux_decoder] {
            out.push(&a.weight);
            out.push(&a.bias);
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for c in &mut self.convs {
            out.push(&mut c.weight);
            out.push(&mut c.bias);
        }
        for a in [&mut self.projection, &mut self.discriminator, &mut self.aux_decoder] {
            out.push(&mut a.weight);
            out.push(&mut a.bias);
        }
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    /// Embedding for a channel-major `in_ch x frames` input.
    pub fn embed(&self, input: &[f64], frames: usize) -> Vec<f64> {
        self.forward(input, frames).embedding
    }

    pub fn forward(&self, input: &[f64], frames: usize) -> Forward {
        let mut acts = Vec::with_capacity(self.convs.len() + 1);
        let mut lens = Vec::with_capacity(self.convs.len() + 1);
        acts.push(input.to_vec());
        lens.push(frames);
        let mut pre = Vec::with_capacity(self.convs.len());
        for conv in &self.convs {
            let t_in = *lens.last().unwrap();
            let z = conv_forward(conv, acts.last().unwrap(), t_in);
            let h = z.iter().map(|&v| v.max(0.0)).collect();
            pre.push(z);
            acts.push(h);
            lens.push(conv_out_len(t_in));
        }
        let t = *lens.last().unwrap();
        let c = self.projection.inputs / 2;
        let h = acts.last().unwrap();
        let mut pooled = vec![0.0; 2 * c];
        for ch in 0..c {
            let row = &h[ch * t..(ch + 1) * t];
            let mean = math::mean(row);
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / t as f64;
            pooled[ch] = mean;
            pooled[c + ch] = math::sqrt(var + POOL_EPS);
        }
        let mut embedding = vec![0.0; self.projection.outputs];
        self.projection.apply(&pooled, &mut embedding);
        Forward { acts, pre, lens, pooled, embedding }
    }

    pub fn logits(&self, embedding: &[f64]) -> [f64; CLASSES] {
        let mut out = [0.0; CLASSES];
        self.discriminator.apply(embedding, &mut out);
        out
    }

    pub fn aux(&self, embedding: &[f64]) -> [f64; STAT_DIM] {
        let mut out = [0.0; STAT_DIM];
        self.aux_decoder.apply(embedding, &mut out);
        out
    }

    /// Backpropagates head gradients `dlogits` / `daux` through one clip's
    /// forward pass, accumulating into `grad`.
    pub fn backward(&self, fwd: &Forward, dlogits: &[f64; CLASSES], daux: &[f64; STAT_DIM], grad: &mut Network) {
        let u = &fwd.embedding;
        let mut du = self.discriminator.backward(u, dlogits, &mut grad.discriminator);
        let du_aux = self.aux_decoder.backward(u, daux, &mut grad.aux_decoder);
        du.iter_mut().zip(&du_aux).for_each(|(a, b)| *a += b);
        let dpooled = self.projection.backward(&fwd.pooled, &du, &mut grad.projection);

        let l = self.convs.len();
        let t = fwd.lens[l];
        let c = self.projection.inputs / 2;
        let h = &fwd.acts[l];
        let mut dh = vec![0.0; c * t];
        for ch in 0..c {
            let row = &h[ch * t..(ch + 1) * t];
            let mean = fwd.pooled[ch];
            let std = fwd.pooled[c + ch];
            let (gm, gs) = (dpooled[ch], dpooled[c + ch]);
            for (k, &v) in row.iter().enumerate() {
                dh[ch * t + k] = gm / t as f64 + gs * (v - mean) / (t as f64 * std);
            }
        }
        for layer in (0..l).rev() {
            let z = &fwd.pre[layer];
            let mut dz = dh;
            dz.iter_mut().zip(z).for_each(|(g, &zv)| {
                if zv <= 0.0 {
                    *g = 0.0;
                }
            });
            dh = conv_backward(&self.convs[layer], &fwd.acts[layer], fwd.lens[layer], &dz, &mut grad.convs[layer], layer > 0);
        }
    }

    /// `self += scale * other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &Network, scale: f64) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.data.iter_mut().zip(&b.data).for_each(|(x, y)| *x += scale * y);
        }
    }
}

/// Cached activations of one forward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    /// `acts[0]` is the input; `acts[l+1]` the ReLU output of conv `l`.
    acts: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    lens: Vec<usize>,
    pooled: Vec<f64>,
    pub embedding: Vec<f64>,
}

fn conv_forward(conv: &Conv, input: &[f64], t_in: usize) -> Vec<f64> {
    let t_out = conv_out_len(t_in);
    let mut out = vec![0.0; conv.out_ch * t_out];
    for co in 0..conv.out_ch {
        let o = &mut out[co * t_out..(co + 1) * t_out];
        o.iter_mut().for_each(|v| *v = conv.bias.data[co]);
        for ci in 0..conv.in_ch {
            let x = &input[ci * t_in..(ci + 1) * t_in];
            let w = &conv.weight.data[(co * conv.in_ch + ci) * KERNEL..][..KERNEL];
            for (tp, ov) in o.iter_mut().enumerate() {
                // taps at 2t'-1, 2t', 2t'+1
                let centre = 2 * tp;
                let mut acc = w[1] * x[centre];
                if centre >= 1 {
                    acc += w[0] * x[centre - 1];
                }
                if centre + 1 < t_in {
                    acc += w[2] * x[centre + 1];
                }
                *ov += acc;
            }
        }
    }
    out
}

fn conv_backward(conv: &Conv, input: &[f64], t_in: usize, dz: &[f64], grad: &mut Conv, need_input: bool) -> Vec<f64> {
    let t_out = conv_out_len(t_in);
    let mut dx = if need_input { vec![0.0; conv.in_ch * t_in] } else { Vec::new() };
    for co in 0..conv.out_ch {
        let g = &dz[co * t_out..(co + 1) * t_out];
        grad.bias.data[co] += g.iter().sum::<f64>();
        for ci in 0..conv.in_ch {
            let x = &input[ci * t_in..(ci + 1) * t_in];
            let base = (co * conv.in_ch + ci) * KERNEL;
            let w = &conv.weight.data[base..base + KERNEL];
            let mut gw = [0.0; KERNEL];
            for (tp, &gv) in g.iter().enumerate() {
                if gv == 0.0 {
                    continue;
                }
                let centre = 2 * tp;
                gw[1] += gv * x[centre];
                if centre >= 1 {
                    gw[0] += gv * x[centre - 1];
                }
                if centre + 1 < t_in {
                    gw[2] += gv * x[centre + 1];
                }
                if need_input {
                    let row = &mut dx[ci * t_in..(ci + 1) * t_in];
                    row[centre] += gv * w[1];
                    if centre >= 1 {
                        row[centre - 1] += gv * w[0];
                    }
                    if centre + 1 < t_in {
                        row[centre + 1] += gv * w[2];
                    }
                }
            }
            for k in 0..KERNEL {
                grad.weight.data[base + k] += gw[k];
            }
        }
    }
    dx
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64; CLASSES]) -> [f64; CLASSES] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p = [0.0; CLASSES];
    let mut sum = 0.0;
    for (pi, &l) in p.iter_mut().zip(logits) {
        *pi = math::exp(l - max);
        sum += *pi;
    }
    p.iter_mut().for_each(|v| *v /= sum);
    p
}
