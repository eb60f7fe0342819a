//! Two-layer LSTM regressor with exact backpropagation through time.
//!
//! Layer 1 consumes `(lat, lon)` pairs (normalized), layer 2 consumes layer
//! 1's hidden state, and an affine head maps the final hidden state to the
//! predicted pair. Weights are stored per layer as fused gate matrices in the
//! order input, forget, cell, output.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::stream_rng;
use crate::error::{Error, Result};

/// Coordinate pairs in and out.
pub const INPUT_DIM: usize = 2;
pub const OUTPUT_DIM: usize = 2;
/// Stacked LSTM layers.
pub const NUM_LAYERS: usize = 2;

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `y += W x` for a row-major `[rows x cols]` matrix.
fn matvec_acc(w: &[f64], x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(w.len(), x.len() * y.len());
    for (r, yr) in y.iter_mut().enumerate() {
        let row = &w[r * x.len()..(r + 1) * x.len()];
        let mut s = 0.0;
        for (wv, xv) in row.iter().zip(x) {
            s += wv * xv;
        }
        *yr += s;
    }
}

/// `x += W^T dy` for the same layout.
fn matvec_t_acc(w: &[f64], dy: &[f64], x: &mut [f64]) {
    debug_assert_eq!(w.len(), x.len() * dy.len());
    for (r, dyr) in dy.iter().enumerate() {
        let row = &w[r * x.len()..(r + 1) * x.len()];
        for (xv, wv) in x.iter_mut().zip(row) {
            *xv += wv * dyr;
        }
    }
}

/// `W += dy (x)^T` outer-product accumulation.
fn outer_acc(w: &mut [f64], dy: &[f64], x: &[f64]) {
    debug_assert_eq!(w.len(), x.len() * dy.len());
    for (r, dyr) in dy.iter().enumerate() {
        let row = &mut w[r * x.len()..(r + 1) * x.len()];
        for (wv, xv) in row.iter_mut().zip(x) {
            *wv += dyr * xv;
        }
    }
}

/// Fused gate weights of one layer: `w_ih` is `[4H x input_dim]`, `w_hh` is
/// `[4H x H]`, `bias` is `[4H]`, gate order i, f, g, o.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmLayer {
    pub input_dim: usize,
    pub hidden: usize,
    pub w_ih: Vec<f64>,
    pub w_hh: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LstmLayer {
    fn init(input_dim: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        let mut draw = |n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.random_range(-bound..bound)).collect()
        };
        let w_ih = draw(4 * hidden * input_dim);
        let w_hh = draw(4 * hidden * hidden);
        let mut bias = draw(4 * hidden);
        // forget-gate bias offset keeps early memory open
        for b in bias[hidden..2 * hidden].iter_mut() {
            *b += 1.0;
        }
        LstmLayer { input_dim, hidden, w_ih, w_hh, bias }
    }

    fn zeros_like(&self) -> LstmLayer {
        LstmLayer {
            input_dim: self.input_dim,
            hidden: self.hidden,
            w_ih: vec![0.0; self.w_ih.len()],
            w_hh: vec![0.0; self.w_hh.len()],
            bias: vec![0.0; self.bias.len()],
        }
    }
}

/// All weights of the regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    pub hidden: usize,
    pub layers: Vec<LstmLayer>,
    /// Output head `[OUTPUT_DIM x H]`.
    pub w_out: Vec<f64>,
    pub b_out: Vec<f64>,
}

impl LstmParams {
    /// Seeded uniform(-1/sqrt(H), 1/sqrt(H)) initialization with the
    /// forget-gate bias raised by one.
    pub fn init(hidden: usize, seed: u64) -> Self {
        assert!(hidden >= 1);
        let mut rng = stream_rng(seed, &[u64::from_le_bytes(*b"lstminit")]);
        let layers = vec![
            LstmLayer::init(INPUT_DIM, hidden, &mut rng),
            LstmLayer::init(hidden, hidden, &mut rng),
        ];
        let bound = 1.0 / (hidden as f64).sqrt();
        let w_out = (0..OUTPUT_DIM * hidden)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        let b_out = vec![0.0; OUTPUT_DIM];
        LstmParams { hidden, layers, w_out, b_out }
    }

    /// Shape-checked construction (for checkpoint loading).
    pub fn from_parts(hidden: usize, layers: Vec<LstmLayer>, w_out: Vec<f64>, b_out: Vec<f64>) -> Result<Self> {
        if layers.len() != NUM_LAYERS {
            return Err(Error::Predictor(format!("expected {NUM_LAYERS} layers, got {}", layers.len())));
        }
        let expect = [(INPUT_DIM, hidden), (hidden, hidden)];
        for (l, (input_dim, h)) in layers.iter().zip(expect) {
            if l.input_dim != input_dim
                || l.hidden != h
                || l.w_ih.len() != 4 * h * input_dim
                || l.w_hh.len() != 4 * h * h
                || l.bias.len() != 4 * h
            {
                return Err(Error::Predictor("layer shape mismatch".into()));
            }
        }
        if w_out.len() != OUTPUT_DIM * hidden || b_out.len() != OUTPUT_DIM {
            return Err(Error::Predictor("output head shape mismatch".into()));
        }
        let all_finite = layers.iter().all(|l| {
            l.w_ih.iter().chain(&l.w_hh).chain(&l.bias).all(|w| w.is_finite())
        }) && w_out.iter().chain(&b_out).all(|w| w.is_finite());
        if !all_finite {
            return Err(Error::Predictor("non-finite weight".into()));
        }
        Ok(LstmParams { hidden, layers, w_out, b_out })
    }

    /// Named tensor views, gradient-check and optimizer order.
    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut v = Vec::new();
        for (i, l) in self.layers.iter().enumerate() {
            v.push((format!("layer{i}.w_ih"), l.w_ih.as_slice()));
            v.push((format!("layer{i}.w_hh"), l.w_hh.as_slice()));
            v.push((format!("layer{i}.bias"), l.bias.as_slice()));
        }
        v.push(("head.w_out".into(), self.w_out.as_slice()));
        v.push(("head.b_out".into(), self.b_out.as_slice()));
        v
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut v = Vec::new();
        for l in self.layers.iter_mut() {
            v.push(&mut l.w_ih);
            v.push(&mut l.w_hh);
            v.push(&mut l.bias);
        }
        v.push(&mut self.w_out);
        v.push(&mut self.b_out);
        v
    }

    pub fn grads_like(&self) -> LstmGrads {
        LstmGrads {
            layers: self.layers.iter().map(|l| l.zeros_like()).collect(),
            w_out: vec![0.0; self.w_out.len()],
            b_out: vec![0.0; self.b_out.len()],
        }
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }
}

/// Gradients, same shapes as [`LstmParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct LstmGrads {
    pub layers: Vec<LstmLayer>,
    pub w_out: Vec<f64>,
    pub b_out: Vec<f64>,
}

impl LstmGrads {
    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut v = Vec::new();
        for l in self.layers.iter() {
            v.push(l.w_ih.as_slice());
            v.push(l.w_hh.as_slice());
            v.push(l.bias.as_slice());
        }
        v.push(self.w_out.as_slice());
        v.push(self.b_out.as_slice());
        v
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut v = Vec::new();
        for l in self.layers.iter_mut() {
            v.push(&mut l.w_ih);
            v.push(&mut l.w_hh);
            v.push(&mut l.bias);
        }
        v.push(&mut self.w_out);
        v.push(&mut self.b_out);
        v
    }

    /// `self += other`.
    pub fn add_assign(&mut self, other: &LstmGrads) {
        for (mine, theirs) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += b;
            }
        }
    }

    /// `self *= k`.
    pub fn scale(&mut self, k: f64) {
        for t in self.tensors_mut() {
            for v in t.iter_mut() {
                *v *= k;
            }
        }
    }

    pub fn is_all_zero(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|&v| v == 0.0))
    }
}

/// Per-(timestep, layer) activations retained for the backward pass.
#[derive(Debug, Clone)]
struct StepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    i: Vec<f64>,
    f: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    c: Vec<f64>,
    tanh_c: Vec<f64>,
}

/// Forward-pass record consumed by [`lstm_backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    hidden: usize,
    steps: Vec<[StepCache; NUM_LAYERS]>,
    h_last: Vec<f64>,
}

/// Run the window through both layers (states start at zero) and the affine
/// head. Returns the prediction and the activation cache for backprop.
pub fn lstm_forward(params: &LstmParams, window: &[[f64; 2]]) -> Result<([f64; 2], ForwardCache)> {
    if window.is_empty() {
        return Err(Error::Predictor("empty input window".into()));
    }
    let h = params.hidden;
    let mut h_state = [vec![0.0; h], vec![0.0; h]];
    let mut c_state = [vec![0.0; h], vec![0.0; h]];
    let mut steps = Vec::with_capacity(window.len());

    for xin in window {
        let mut per_layer: Vec<StepCache> = Vec::with_capacity(NUM_LAYERS);
        let mut x: Vec<f64> = xin.to_vec();
        for (l, layer) in params.layers.iter().enumerate() {
            let h_prev = h_state[l].clone();
            let c_prev = c_state[l].clone();

            let mut pre = layer.bias.clone();
            matvec_acc(&layer.w_ih, &x, &mut pre);
            matvec_acc(&layer.w_hh, &h_prev, &mut pre);

            let mut cache = StepCache {
                x: x.clone(),
                h_prev,
                c_prev,
                i: vec![0.0; h],
                f: vec![0.0; h],
                g: vec![0.0; h],
                o: vec![0.0; h],
                c: vec![0.0; h],
                tanh_c: vec![0.0; h],
            };
            for k in 0..h {
                cache.i[k] = sigmoid(pre[k]);
                cache.f[k] = sigmoid(pre[h + k]);
                cache.g[k] = pre[2 * h + k].tanh();
                cache.o[k] = sigmoid(pre[3 * h + k]);
                cache.c[k] = cache.f[k] * cache.c_prev[k] + cache.i[k] * cache.g[k];
                cache.tanh_c[k] = cache.c[k].tanh();
            }
            let h_new: Vec<f64> = (0..h).map(|k| cache.o[k] * cache.tanh_c[k]).collect();
            c_state[l] = cache.c.clone();
            h_state[l] = h_new.clone();
            per_layer.push(cache);
            x = h_new;
        }
        let arr: [StepCache; NUM_LAYERS] = per_layer.try_into().expect("two layers");
        steps.push(arr);
    }

    let h_last = h_state[NUM_LAYERS - 1].clone();
    let mut y = [params.b_out[0], params.b_out[1]];
    matvec_acc(&params.w_out, &h_last, &mut y);

    Ok((y, ForwardCache { hidden: h, steps, h_last }))
}

/// Exact gradients of a scalar loss with respect to every parameter, given
/// the loss gradient at the prediction.
pub fn lstm_backward(params: &LstmParams, cache: &ForwardCache, grad_out: [f64; 2]) -> Result<LstmGrads> {
    if cache.hidden != params.hidden {
        return Err(Error::Predictor(format!(
            "cache built for hidden size {}, params have {}",
            cache.hidden, params.hidden
        )));
    }
    let h = params.hidden;
    let t_len = cache.steps.len();
    let mut grads = params.grads_like();

    // head
    outer_acc(&mut grads.w_out, &grad_out, &cache.h_last);
    grads.b_out[0] += grad_out[0];
    grads.b_out[1] += grad_out[1];

    // carried across time, per layer
    let mut dh_time = [vec![0.0; h], vec![0.0; h]];
    let mut dc_time = [vec![0.0; h], vec![0.0; h]];
    // dL/dh_last enters the top layer at the final step
    matvec_t_acc(&params.w_out, &grad_out, &mut dh_time[NUM_LAYERS - 1]);

    for t in (0..t_len).rev() {
        // dh flowing into the lower layer at this same timestep
        let mut dx_lower = vec![0.0; h];
        for l in (0..NUM_LAYERS).rev() {
            let st = &cache.steps[t][l];
            let layer = &params.layers[l];
            let gl = &mut grads.layers[l];

            let mut dh = std::mem::replace(&mut dh_time[l], vec![0.0; h]);
            if l < NUM_LAYERS - 1 {
                // gradient arriving from the layer above at this timestep
                for k in 0..h {
                    dh[k] += dx_lower[k];
                }
            }
            let dc_in = std::mem::replace(&mut dc_time[l], vec![0.0; h]);

            let mut dpre = vec![0.0; 4 * h];
            let mut dc_prev = vec![0.0; h];
            for k in 0..h {
                let do_ = dh[k] * st.tanh_c[k];
                let dc = dc_in[k] + dh[k] * st.o[k] * (1.0 - st.tanh_c[k] * st.tanh_c[k]);
                let di = dc * st.g[k];
                let df = dc * st.c_prev[k];
                let dg = dc * st.i[k];
                dc_prev[k] = dc * st.f[k];

                dpre[k] = di * st.i[k] * (1.0 - st.i[k]);
                dpre[h + k] = df * st.f[k] * (1.0 - st.f[k]);
                dpre[2 * h + k] = dg * (1.0 - st.g[k] * st.g[k]);
                dpre[3 * h + k] = do_ * st.o[k] * (1.0 - st.o[k]);
            }

            outer_acc(&mut gl.w_ih, &dpre, &st.x);
            outer_acc(&mut gl.w_hh, &dpre, &st.h_prev);
            for (b, d) in gl.bias.iter_mut().zip(&dpre) {
                *b += d;
            }

            if l > 0 {
                dx_lower = vec![0.0; h];
                matvec_t_acc(&layer.w_ih, &dpre, &mut dx_lower);
            }
            matvec_t_acc(&layer.w_hh, &dpre, &mut dh_time[l]);
            dc_time[l] = dc_prev;
        }
    }

    Ok(grads)
}

/// Mean squared error over the two coordinates and its gradient at the
/// prediction: `loss = (d0^2 + d1^2) / 2`, `grad = pred - target`.
pub fn mse_loss(pred: [f64; 2], target: [f64; 2]) -> (f64, [f64; 2]) {
    let d = [pred[0] - target[0], pred[1] - target[1]];
    ((d[0] * d[0] + d[1] * d[1]) / 2.0, d)
}
