//! A small convolutional encoder-decoder mapping an H x W intensity image to
//! an H x W logit grid, with hand-written forward and backward passes.
//!
//! Architecture (channels): 1 -> 8 -> 16/s2 -> 32/s2 -> 16 -> up -> 8 -> up
//! -> 1. Three resolution levels, ~12k parameters. The first three convs are
//! the "encoder" group, the rest the "decoder" group (the two groups get
//! separate learning rates).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::targets::ProbMap;

/// Input dimensions must be divisible by this (two stride-2 stages).
pub const NET_DOWNSAMPLE: usize = 4;

/// C x H x W tensor in row-major channel-last-pixel order.
#[derive(Debug, Clone)]
pub struct Tensor {
    pub c: usize,
    pub h: usize,
    pub w: usize,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn zeros(c: usize, h: usize, w: usize) -> Self {
        Self {
            c,
            h,
            w,
            data: vec![0.0; c * h * w],
        }
    }

    #[inline]
    fn plane(&self, c: usize) -> &[f32] {
        &self.data[c * self.h * self.w..(c + 1) * self.h * self.w]
    }
}

/// 3x3 convolution with padding 1 and stride 1 or 2.
#[derive(Debug, Clone)]
pub struct Conv {
    pub in_c: usize,
    pub out_c: usize,
    pub stride: usize,
    /// `[out_c][in_c][3][3]` flattened.
    pub weight: Vec<f32>,
    pub bias: Vec<f32>,
}

impl Conv {
    /// Builds a layer from deserialized parts (checkpoint loading).
    pub fn from_parts(
        in_c: usize,
        out_c: usize,
        stride: usize,
        weight: Vec<f32>,
        bias: Vec<f32>,
    ) -> Self {
        assert_eq!(weight.len(), out_c * in_c * 9, "conv weight length");
        assert_eq!(bias.len(), out_c, "conv bias length");
        Self {
            in_c,
            out_c,
            stride,
            weight,
            bias,
        }
    }

    fn new(in_c: usize, out_c: usize, stride: usize, rng: &mut impl Rng) -> Self {
        let scale = (2.0 / (in_c * 9) as f64).sqrt();
        let weight = (0..out_c * in_c * 9)
            .map(|_| (gauss(rng) * scale) as f32)
            .collect();
        Self {
            in_c,
            out_c,
            stride,
            weight,
            bias: vec![0.0; out_c],
        }
    }

    fn out_size(&self, n: usize) -> usize {
        (n + 2 - 3) / self.stride + 1
    }

    /// Output-column range `lo..hi` whose input column `ox*stride + kx - 1`
    /// stays inside `0..w`.
    #[inline]
    fn valid_ox(&self, kx: usize, w: usize, ow: usize) -> (usize, usize) {
        let lo = if kx == 0 { 1usize.div_ceil(self.stride) } else { 0 };
        let hi = ((w - kx) / self.stride + 1).min(ow);
        (lo, hi.max(lo))
    }

    fn forward(&self, x: &Tensor) -> Tensor {
        let oh = self.out_size(x.h);
        let ow = self.out_size(x.w);
        let mut out = Tensor::zeros(self.out_c, oh, ow);
        for oc in 0..self.out_c {
            let off = oc * oh * ow;
            out.data[off..off + oh * ow].fill(self.bias[oc]);
            for ic in 0..self.in_c {
                let xin = x.plane(ic);
                for ky in 0..3usize {
                    for kx in 0..3usize {
                        let w = self.weight[((oc * self.in_c + ic) * 3 + ky) * 3 + kx];
                        if w == 0.0 {
                            continue;
                        }
                        let (lo, hi) = self.valid_ox(kx, x.w, ow);
                        for oy in 0..oh {
                            let iy = (oy * self.stride + ky) as i64 - 1;
                            if iy < 0 || iy >= x.h as i64 {
                                continue;
                            }
                            let row_in = &xin[iy as usize * x.w..(iy as usize + 1) * x.w];
                            let row_out =
                                &mut out.data[off + oy * ow..off + (oy + 1) * ow];
                            let ix0 = lo * self.stride + kx - 1;
                            if self.stride == 1 {
                                for (o, &i) in
                                    row_out[lo..hi].iter_mut().zip(&row_in[ix0..ix0 + hi - lo])
                                {
                                    *o += w * i;
                                }
                            } else {
                                for (o, &i) in row_out[lo..hi]
                                    .iter_mut()
                                    .zip(row_in[ix0..].iter().step_by(self.stride))
                                {
                                    *o += w * i;
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Accumulates weight/bias gradients and returns the input gradient.
    fn backward(
        &self,
        x: &Tensor,
        grad_out: &Tensor,
        grad_w: &mut [f32],
        grad_b: &mut [f32],
    ) -> Tensor {
        let oh = grad_out.h;
        let ow = grad_out.w;
        let mut grad_in = Tensor::zeros(x.c, x.h, x.w);
        for oc in 0..self.out_c {
            let gout = grad_out.plane(oc);
            grad_b[oc] += gout.iter().sum::<f32>();
            for ic in 0..self.in_c {
                let xin = x.plane(ic);
                let gin_off = ic * x.h * x.w;
                for ky in 0..3usize {
                    for kx in 0..3usize {
                        let widx = ((oc * self.in_c + ic) * 3 + ky) * 3 + kx;
                        let w = self.weight[widx];
                        let mut gw = 0.0f32;
                        let (lo, hi) = self.valid_ox(kx, x.w, ow);
                        for oy in 0..oh {
                            let iy = (oy * self.stride + ky) as i64 - 1;
                            if iy < 0 || iy >= x.h as i64 {
                                continue;
                            }
                            let row_x = &xin[iy as usize * x.w..(iy as usize + 1) * x.w];
                            let row_g = &gout[oy * ow + lo..oy * ow + hi];
                            let gin_row = gin_off + iy as usize * x.w;
                            let ix0 = lo * self.stride + kx - 1;
                            if self.stride == 1 {
                                let row_gin =
                                    &mut grad_in.data[gin_row + ix0..gin_row + ix0 + hi - lo];
                                for (gi, &g) in row_gin.iter_mut().zip(row_g) {
                                    *gi += w * g;
                                }
                                gw += dot(row_g, &row_x[ix0..ix0 + hi - lo]);
                            } else {
                                let row_gin = &mut grad_in.data[gin_row..gin_row + x.w];
                                for ((&g, &xv), gi) in row_g
                                    .iter()
                                    .zip(row_x[ix0..].iter().step_by(self.stride))
                                    .zip(row_gin[ix0..].iter_mut().step_by(self.stride))
                                {
                                    gw += g * xv;
                                    *gi += w * g;
                                }
                            }
                        }
                        grad_w[widx] += gw;
                    }
                }
            }
        }
        grad_in
    }
}

/// Dot product with independent partial sums so the loop vectorizes.
#[inline]
fn dot(a: &[f32], b: &[f32]) -> f32 {
    let mut acc = [0.0f32; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (xa, xb) in (&mut ca).zip(&mut cb) {
        for i in 0..8 {
            acc[i] += xa[i] * xb[i];
        }
    }
    let mut s: f32 = acc.iter().sum();
    for (xa, xb) in ca.remainder().iter().zip(cb.remainder()) {
        s += xa * xb;
    }
    s
}

fn gauss(rng: &mut impl Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn relu(t: &mut Tensor) {
    for v in &mut t.data {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
}

fn relu_backward(pre: &Tensor, grad: &mut Tensor) {
    for (g, &p) in grad.data.iter_mut().zip(&pre.data) {
        if p <= 0.0 {
            *g = 0.0;
        }
    }
}

fn upsample2(x: &Tensor) -> Tensor {
    let mut out = Tensor::zeros(x.c, x.h * 2, x.w * 2);
    for c in 0..x.c {
        for y in 0..x.h {
            for xx in 0..x.w {
                let v = x.data[(c * x.h + y) * x.w + xx];
                for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    out.data[(c * x.h * 2 + y * 2 + dy) * x.w * 2 + xx * 2 + dx] = v;
                }
            }
        }
    }
    out
}

fn upsample2_backward(grad_out: &Tensor) -> Tensor {
    let h = grad_out.h / 2;
    let w = grad_out.w / 2;
    let mut out = Tensor::zeros(grad_out.c, h, w);
    for c in 0..grad_out.c {
        for y in 0..h {
            for xx in 0..w {
                let mut acc = 0.0;
                for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                    acc += grad_out.data[(c * h * 2 + y * 2 + dy) * w * 2 + xx * 2 + dx];
                }
                out.data[(c * h + y) * w + xx] = acc;
            }
        }
    }
    out
}

/// The keypoint scorer. Layers 0..3 form the encoder parameter group,
/// layers 3..6 the decoder group.
#[derive(Debug, Clone)]
pub struct ScoreNet {
    pub layers: Vec<Conv>,
}

/// Index of the first decoder layer.
pub const ENCODER_LAYERS: usize = 3;

/// Saved activations of one forward pass, needed for backprop.
pub struct ForwardPass {
    inputs: Vec<Tensor>,
    pre_acts: Vec<Tensor>,
    pub logits: Grid<f32>,
}

/// Per-layer parameter gradients, same layout as the layer parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Vec<f32>>,
    pub biases: Vec<Vec<f32>>,
}

impl Gradients {
    pub fn zeros_like(net: &ScoreNet) -> Self {
        Self {
            weights: net.layers.iter().map(|l| vec![0.0; l.weight.len()]).collect(),
            biases: net.layers.iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    pub fn scale(&mut self, s: f32) {
        for w in &mut self.weights {
            for v in w {
                *v *= s;
            }
        }
        for b in &mut self.biases {
            for v in b {
                *v *= s;
            }
        }
    }
}

impl ScoreNet {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xdeed_0001);
        let layers = vec![
            Conv::new(1, 8, 1, &mut rng),
            Conv::new(8, 16, 2, &mut rng),
            Conv::new(16, 32, 2, &mut rng),
            Conv::new(32, 16, 1, &mut rng),
            Conv::new(16, 8, 1, &mut rng),
            Conv::new(8, 1, 1, &mut rng),
        ];
        Self { layers }
    }

    /// Rebuilds a net from deserialized layers (checkpoint loading).
    pub fn from_layers(layers: Vec<Conv>) -> Self {
        Self { layers }
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weight.len() + l.bias.len())
            .sum()
    }

    pub fn param_norm(&self) -> f64 {
        self.layers
            .iter()
            .flat_map(|l| l.weight.iter().chain(l.bias.iter()))
            .map(|&v| (v as f64).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Forward pass keeping activations for [`ScoreNet::backward`].
    pub fn forward_full(&self, image: &Grid<f32>) -> Result<ForwardPass> {
        let (w, h) = (image.width(), image.height());
        if w % NET_DOWNSAMPLE != 0 || h % NET_DOWNSAMPLE != 0 {
            return Err(Error::Contract(format!(
                "input {w}x{h} not divisible by the net downsampling factor {NET_DOWNSAMPLE}"
            )));
        }
        let mut x = Tensor {
            c: 1,
            h,
            w,
            data: image.data().to_vec(),
        };
        let mut inputs = Vec::with_capacity(6);
        let mut pre_acts = Vec::with_capacity(6);
        for (i, layer) in self.layers.iter().enumerate() {
            inputs.push(x.clone());
            let mut out = layer.forward(&x);
            if i + 1 < self.layers.len() {
                pre_acts.push(out.clone());
                relu(&mut out);
                // Upsample after the first two decoder convs.
                if i == 3 || i == 4 {
                    out = upsample2(&out);
                }
            }
            x = out;
        }
        let logits = Grid::from_vec(w, h, x.data);
        Ok(ForwardPass {
            inputs,
            pre_acts,
            logits,
        })
    }

    /// Inference forward: image to logits.
    pub fn forward(&self, image: &Grid<f32>) -> Result<Grid<f32>> {
        Ok(self.forward_full(image)?.logits)
    }

    /// Backprop from a logit gradient; accumulates into `grads`.
    pub fn backward(&self, pass: &ForwardPass, grad_logits: &Grid<f32>, grads: &mut Gradients) {
        let (w, h) = (grad_logits.width(), grad_logits.height());
        let mut grad = Tensor {
            c: 1,
            h,
            w,
            data: grad_logits.data().to_vec(),
        };
        for i in (0..self.layers.len()).rev() {
            if i + 1 < self.layers.len() {
                if i == 3 || i == 4 {
                    grad = upsample2_backward(&grad);
                }
                relu_backward(&pass.pre_acts[i], &mut grad);
            }
            grad = self.layers[i].backward(
                &pass.inputs[i],
                &grad,
                &mut grads.weights[i],
                &mut grads.biases[i],
            );
        }
    }
}

/// Softmax over all pixels; the result is a valid distribution.
pub fn to_prob(logits: &Grid<f32>) -> ProbMap {
    let max = logits
        .data()
        .iter()
        .fold(f32::NEG_INFINITY, |a, &b| a.max(b)) as f64;
    let exps: Vec<f64> = logits.data().iter().map(|&z| (z as f64 - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    ProbMap {
        values: Grid::from_vec(
            logits.width(),
            logits.height(),
            exps.into_iter().map(|e| e / sum).collect(),
        ),
        normalized: true,
    }
}
