//! Neural models: the multilayer perceptron and the GRU-SVM hybrid.
//!
//! The GRU cell follows the combined-matrix gate form
//!
//! - `z = sigmoid([h, x] * W_z + b_z)` (update gate)
//! - `r = sigmoid([h, x] * W_r + b_r)` (reset gate)
//! - `h~ = tanh([r * h, x] * W_h + b_h)` (candidate)
//! - `h' = (1 - z) * h + z * h~`
//!
//! with elementwise gate products. Gate biases are not part of the plain
//! gate equations; they are included (initialized to zero) because
//! training stalls without them. A flat feature vector is consumed as a
//! sequence of `seq_len` chunks of `input_size` scalars; the final state
//! passes through dropout (train only) into a linear SVM layer.
//!
//! All backward passes are hand-derived and checked against central
//! finite differences in the test suites.

use crate::error::{Error, Result};
use crate::numerics::{init_weights, InitScheme, Matrix, Rng};
use crate::optim::{HasParams, ModelParams};

/// Whether a forward pass is part of training (dropout active) or
/// evaluation (deterministic).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Train,
    Eval,
}

/// Elementwise `max(0, x)`.
pub fn relu(x: &Matrix) -> Matrix {
    x.map(|v| v.max(0.0))
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

// ---------------------------------------------------------------------------
// Multilayer perceptron
// ---------------------------------------------------------------------------

/// Fully connected network: affine + ReLU hidden layers, affine output.
#[derive(Debug, Clone)]
pub struct MlpParams {
    weights: Vec<Matrix>,
    biases: Vec<Matrix>,
    weight_names: Vec<String>,
    bias_names: Vec<String>,
}

impl MlpParams {
    /// `layer_sizes` runs input -> hidden... -> output, e.g.
    /// `[30, 500, 500, 500, 2]`.
    pub fn new(layer_sizes: &[usize], rng: &mut Rng) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Config(
                "an MLP needs at least an input and an output size".into(),
            ));
        }
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        let mut weight_names = Vec::new();
        let mut bias_names = Vec::new();
        for (i, pair) in layer_sizes.windows(2).enumerate() {
            weights.push(init_weights(
                (pair[0], pair[1]),
                InitScheme::ScaledNormal,
                rng,
            )?);
            biases.push(Matrix::zeros(1, pair[1]));
            weight_names.push(format!("w{}", i + 1));
            bias_names.push(format!("b{}", i + 1));
        }
        Ok(Self {
            weights,
            biases,
            weight_names,
            bias_names,
        })
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn layer(&self, index: usize) -> (&Matrix, &Matrix) {
        (&self.weights[index], &self.biases[index])
    }

    pub fn layer_mut(&mut self, index: usize) -> (&mut Matrix, &mut Matrix) {
        (&mut self.weights[index], &mut self.biases[index])
    }

    pub fn input_size(&self) -> usize {
        self.weights[0].rows()
    }
}

impl HasParams for MlpParams {
    fn param_slots(&mut self) -> Vec<(&str, &mut Matrix)> {
        let mut slots = Vec::with_capacity(self.weights.len() * 2);
        for (((w, b), wn), bn) in self
            .weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .zip(&self.weight_names)
            .zip(&self.bias_names)
        {
            slots.push((wn.as_str(), w));
            slots.push((bn.as_str(), b));
        }
        slots
    }
}

/// Per-layer activations retained for the backward pass; `activations[0]`
/// is the input batch.
#[derive(Debug, Clone)]
pub struct MlpCache {
    activations: Vec<Matrix>,
}

/// Forward pass; returns the output logits and the activation cache.
pub fn mlp_forward(x: &Matrix, params: &MlpParams) -> Result<(Matrix, MlpCache)> {
    if x.cols() != params.input_size() {
        return Err(Error::dim(
            "mlp_forward",
            x.shape(),
            (x.rows(), params.input_size()),
        ));
    }
    let mut activations = vec![x.clone()];
    let last = params.num_layers() - 1;
    let mut a = x.clone();
    for i in 0..params.num_layers() {
        let (w, b) = params.layer(i);
        let z = a.matmul(w)?.add_row_broadcast(b)?;
        a = if i < last { relu(&z) } else { z };
        if i < last {
            activations.push(a.clone());
        }
    }
    Ok((a, MlpCache { activations }))
}

/// Backpropagates a gradient with respect to the logits through every
/// layer, returning named parameter gradients.
pub fn mlp_backward(dlogits: &Matrix, params: &MlpParams, cache: &MlpCache) -> Result<ModelParams> {
    let mut grads = ModelParams::new();
    let mut delta = dlogits.clone();
    for i in (0..params.num_layers()).rev() {
        let (w, _) = params.layer(i);
        let input = &cache.activations[i];
        grads.insert(
            &params.weight_names[i],
            input.matmul_transpose_left(&delta)?,
        );
        grads.insert(&params.bias_names[i], delta.col_sums());
        if i > 0 {
            let upstream = delta.matmul_transpose_right(w)?;
            // ReLU subgradient: 1 where the activation is positive.
            let mask = cache.activations[i].map(|v| if v > 0.0 { 1.0 } else { 0.0 });
            delta = upstream.hadamard(&mask)?;
        }
    }
    Ok(grads)
}

// ---------------------------------------------------------------------------
// GRU-SVM
// ---------------------------------------------------------------------------

/// GRU gate weights plus the linear SVM output layer.
///
/// Gate matrices act on the concatenation `[h, x]`, so each has shape
/// `(cell_size + input_size) x cell_size`.
#[derive(Debug, Clone)]
pub struct GruParams {
    pub w_z: Matrix,
    pub w_r: Matrix,
    pub w_h: Matrix,
    pub b_z: Matrix,
    pub b_r: Matrix,
    pub b_h: Matrix,
    pub svm_w: Matrix,
    pub svm_b: Matrix,
    input_size: usize,
    cell_size: usize,
}

impl GruParams {
    pub fn new(input_size: usize, cell_size: usize, rng: &mut Rng) -> Result<Self> {
        if input_size == 0 || cell_size == 0 {
            return Err(Error::Config(
                "GRU input and cell sizes must be >= 1".into(),
            ));
        }
        let gate = (cell_size + input_size, cell_size);
        Ok(Self {
            w_z: init_weights(gate, InitScheme::ScaledNormal, rng)?,
            w_r: init_weights(gate, InitScheme::ScaledNormal, rng)?,
            w_h: init_weights(gate, InitScheme::ScaledNormal, rng)?,
            b_z: Matrix::zeros(1, cell_size),
            b_r: Matrix::zeros(1, cell_size),
            b_h: Matrix::zeros(1, cell_size),
            svm_w: init_weights((cell_size, 2), InitScheme::ScaledNormal, rng)?,
            svm_b: Matrix::zeros(1, 2),
            input_size,
            cell_size,
        })
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn cell_size(&self) -> usize {
        self.cell_size
    }
}

impl HasParams for GruParams {
    fn param_slots(&mut self) -> Vec<(&str, &mut Matrix)> {
        vec![
            ("w_z", &mut self.w_z),
            ("b_z", &mut self.b_z),
            ("w_r", &mut self.w_r),
            ("b_r", &mut self.b_r),
            ("w_h", &mut self.w_h),
            ("b_h", &mut self.b_h),
            ("svm_w", &mut self.svm_w),
            ("svm_b", &mut self.svm_b),
        ]
    }
}

/// Recurrent cell state, one row per batch sample.
///
/// Starting from zeros, every entry stays in `[-1, 1]`: the candidate is
/// tanh-bounded and the update is a convex combination.
#[derive(Debug, Clone)]
pub struct GruState {
    pub h: Matrix,
}

impl GruState {
    pub fn zeros(batch: usize, cell_size: usize) -> Self {
        Self {
            h: Matrix::zeros(batch, cell_size),
        }
    }
}

/// Intermediate values of one cell step, retained for backpropagation.
#[derive(Debug, Clone)]
pub struct GruStepCache {
    /// `[h_prev, x_t]`
    concat: Matrix,
    /// `[r * h_prev, x_t]`
    concat_candidate: Matrix,
    z: Matrix,
    r: Matrix,
    h_tilde: Matrix,
}

/// One GRU step: gates, candidate, and the blended new state.
pub fn gru_cell_step(
    x_t: &Matrix,
    h_prev: &GruState,
    params: &GruParams,
) -> Result<(GruState, GruStepCache)> {
    if x_t.cols() != params.input_size || h_prev.h.cols() != params.cell_size {
        return Err(Error::dim("gru_cell_step", x_t.shape(), h_prev.h.shape()));
    }
    let concat = h_prev.h.hcat(x_t)?;
    let z = concat
        .matmul(&params.w_z)?
        .add_row_broadcast(&params.b_z)?
        .map(sigmoid);
    let r = concat
        .matmul(&params.w_r)?
        .add_row_broadcast(&params.b_r)?
        .map(sigmoid);
    let reset_h = r.hadamard(&h_prev.h)?;
    let concat_candidate = reset_h.hcat(x_t)?;
    let h_tilde = concat_candidate
        .matmul(&params.w_h)?
        .add_row_broadcast(&params.b_h)?
        .map(f64::tanh);
    let keep = z.map(|v| 1.0 - v);
    let h = keep.hadamard(&h_prev.h)?.add(&z.hadamard(&h_tilde)?)?;
    Ok((
        GruState { h },
        GruStepCache {
            concat,
            concat_candidate,
            z,
            r,
            h_tilde,
        },
    ))
}

/// Everything needed to backpropagate through a full unrolled forward pass.
#[derive(Debug, Clone)]
pub struct GruSvmCache {
    steps: Vec<GruStepCache>,
    /// Final state after dropout, the SVM layer input.
    h_dropped: Matrix,
    /// Scaled dropout mask (entries 0 or `1/keep_prob`); `None` in eval.
    drop_mask: Option<Matrix>,
}

/// Inverted dropout: zeros entries with probability `1 - keep_prob` and
/// scales survivors by `1/keep_prob`, so evaluation needs no rescaling.
pub fn dropout(x: &Matrix, keep_prob: f64, phase: Phase, rng: &mut Rng) -> Result<Matrix> {
    Ok(dropout_masked(x, keep_prob, phase, rng)?.0)
}

fn dropout_masked(
    x: &Matrix,
    keep_prob: f64,
    phase: Phase,
    rng: &mut Rng,
) -> Result<(Matrix, Option<Matrix>)> {
    if keep_prob.is_nan() || keep_prob <= 0.0 || keep_prob > 1.0 {
        return Err(Error::Config(format!(
            "dropout keep probability must be in (0, 1], got {keep_prob}"
        )));
    }
    if phase == Phase::Eval {
        return Ok((x.clone(), None));
    }
    let scale = 1.0 / keep_prob;
    let mask = x.map(|_| if rng.bernoulli(keep_prob) { scale } else { 0.0 });
    Ok((x.hadamard(&mask)?, Some(mask)))
}

/// `[W_z | W_r]` packed side by side so both gate products run as one
/// matrix multiply per time step.
fn fuse_gate_weights(w_z: &Matrix, w_r: &Matrix) -> Matrix {
    w_z.hcat(w_r).expect("gate matrices share a shape")
}

/// Builds `[h, x_t]` for chunk `t` without materializing `x_t`.
fn build_concat(h: &Matrix, x: &Matrix, t: usize, input_size: usize) -> Matrix {
    let width = h.cols() + input_size;
    let mut data = Vec::with_capacity(h.rows() * width);
    for i in 0..h.rows() {
        data.extend_from_slice(h.row(i));
        data.extend_from_slice(&x.row(i)[t * input_size..(t + 1) * input_size]);
    }
    Matrix::from_vec(h.rows(), width, data).expect("shape by construction")
}

/// Unrolls the GRU over the feature sequence and applies the SVM layer.
///
/// The batch's `x` is consumed as `seq_len = x.cols / input_size` chunks
/// of `input_size` columns, in column order, starting from a zero state.
/// Returns one score per class (2 columns). The unroll is a fused
/// equivalent of repeated [`gru_cell_step`] calls.
pub fn gru_svm_forward(
    x: &Matrix,
    params: &GruParams,
    keep_prob: f64,
    phase: Phase,
    rng: &mut Rng,
) -> Result<(Matrix, GruSvmCache)> {
    if !x.cols().is_multiple_of(params.input_size) {
        return Err(Error::Config(format!(
            "{} feature columns cannot be split into chunks of {}",
            x.cols(),
            params.input_size
        )));
    }
    let seq_len = x.cols() / params.input_size;
    let batch = x.rows();
    let cell = params.cell_size;
    let input = params.input_size;
    let fused_zr = fuse_gate_weights(&params.w_z, &params.w_r);

    let mut h = Matrix::zeros(batch, cell);
    let mut steps = Vec::with_capacity(seq_len);
    for t in 0..seq_len {
        let concat = build_concat(&h, x, t, input);
        let a_zr = concat.matmul(&fused_zr)?;

        let mut z = Matrix::zeros(batch, cell);
        let mut r = Matrix::zeros(batch, cell);
        {
            let az = a_zr.data();
            let b_z = params.b_z.data();
            let b_r = params.b_r.data();
            let zd = z.data_mut();
            for i in 0..batch {
                let row = &az[i * 2 * cell..i * 2 * cell + cell];
                for c in 0..cell {
                    zd[i * cell + c] = sigmoid(row[c] + b_z[c]);
                }
            }
            let rd = r.data_mut();
            for i in 0..batch {
                let row = &az[i * 2 * cell + cell..(i + 1) * 2 * cell];
                for c in 0..cell {
                    rd[i * cell + c] = sigmoid(row[c] + b_r[c]);
                }
            }
        }

        // concat_candidate = [r * h, x_t]
        let mut cc = Vec::with_capacity(batch * (cell + input));
        for i in 0..batch {
            let hr = h.row(i);
            let rr = r.row(i);
            for c in 0..cell {
                cc.push(rr[c] * hr[c]);
            }
            cc.extend_from_slice(&x.row(i)[t * input..(t + 1) * input]);
        }
        let concat_candidate = Matrix::from_vec(batch, cell + input, cc)?;

        let a_h = concat_candidate.matmul(&params.w_h)?;
        let mut h_tilde = Matrix::zeros(batch, cell);
        {
            let ah = a_h.data();
            let b_h = params.b_h.data();
            let td = h_tilde.data_mut();
            for i in 0..batch {
                for c in 0..cell {
                    td[i * cell + c] = (ah[i * cell + c] + b_h[c]).tanh();
                }
            }
        }

        let mut h_new = Matrix::zeros(batch, cell);
        {
            let zd = z.data();
            let hd = h.data();
            let td = h_tilde.data();
            let nd = h_new.data_mut();
            for idx in 0..batch * cell {
                nd[idx] = (1.0 - zd[idx]) * hd[idx] + zd[idx] * td[idx];
            }
        }

        steps.push(GruStepCache {
            concat,
            concat_candidate,
            z,
            r,
            h_tilde,
        });
        h = h_new;
    }

    let (h_dropped, drop_mask) = dropout_masked(&h, keep_prob, phase, rng)?;
    let scores = h_dropped
        .matmul(&params.svm_w)?
        .add_row_broadcast(&params.svm_b)?;
    Ok((
        scores,
        GruSvmCache {
            steps,
            h_dropped,
            drop_mask,
        },
    ))
}

/// Backpropagates through the SVM layer, dropout, and the unrolled
/// recurrence, returning named gradients for every parameter.
pub fn gru_svm_backward(
    dscores: &Matrix,
    params: &GruParams,
    cache: &GruSvmCache,
) -> Result<ModelParams> {
    let cell = params.cell_size;
    let input = params.input_size;
    let batch = dscores.rows();
    let fused_zr = fuse_gate_weights(&params.w_z, &params.w_r);

    let mut grads = ModelParams::new();
    grads.insert("w_z", Matrix::zeros(cell + input, cell));
    grads.insert("b_z", Matrix::zeros(1, cell));
    grads.insert("w_r", Matrix::zeros(cell + input, cell));
    grads.insert("b_r", Matrix::zeros(1, cell));
    grads.insert("w_h", Matrix::zeros(cell + input, cell));
    grads.insert("b_h", Matrix::zeros(1, cell));
    grads.insert("svm_w", cache.h_dropped.matmul_transpose_left(dscores)?);
    grads.insert("svm_b", dscores.col_sums());

    let mut dh = dscores.matmul_transpose_right(&params.svm_w)?;
    if let Some(mask) = &cache.drop_mask {
        dh = dh.hadamard(mask)?;
    }

    for step in cache.steps.iter().rev() {
        // Candidate branch: da_h = dh * z * (1 - h~^2)
        let mut da_h = Matrix::zeros(batch, cell);
        {
            let dhd = dh.data();
            let zd = step.z.data();
            let td = step.h_tilde.data();
            let out = da_h.data_mut();
            for idx in 0..batch * cell {
                out[idx] = dhd[idx] * zd[idx] * (1.0 - td[idx] * td[idx]);
            }
        }
        step.concat_candidate
            .matmul_transpose_left_acc(&da_h, grads.get_mut("w_h").unwrap())?;
        grads
            .get_mut("b_h")
            .unwrap()
            .accumulate_from(&da_h.col_sums())?;
        let dcc = da_h.matmul_transpose_right(&params.w_h)?;

        // Gate branches, written into one buffer so both weight gradients
        // come from a single product with the cached concatenation.
        let mut da_zr = Matrix::zeros(batch, 2 * cell);
        {
            let dhd = dh.data();
            let zd = step.z.data();
            let rd = step.r.data();
            let td = step.h_tilde.data();
            let concat = step.concat.data();
            let dccd = dcc.data();
            let out = da_zr.data_mut();
            let cwidth = cell + input;
            let dwidth = dcc.cols();
            for i in 0..batch {
                for c in 0..cell {
                    let idx = i * cell + c;
                    let h_prev = concat[i * cwidth + c];
                    let dz = dhd[idx] * (td[idx] - h_prev);
                    out[i * 2 * cell + c] = dz * zd[idx] * (1.0 - zd[idx]);
                    let dr = dccd[i * dwidth + c] * h_prev;
                    out[i * 2 * cell + cell + c] = dr * rd[idx] * (1.0 - rd[idx]);
                }
            }
        }
        let dw_zr = step.concat.matmul_transpose_left(&da_zr)?;
        {
            let w_z = grads.get_mut("w_z").unwrap();
            for row in 0..cell + input {
                for c in 0..cell {
                    let v = w_z.get(row, c) + dw_zr.get(row, c);
                    w_z.set(row, c, v);
                }
            }
            let w_r = grads.get_mut("w_r").unwrap();
            for row in 0..cell + input {
                for c in 0..cell {
                    let v = w_r.get(row, c) + dw_zr.get(row, cell + c);
                    w_r.set(row, c, v);
                }
            }
        }
        {
            let sums = da_zr.col_sums();
            let b_z = grads.get_mut("b_z").unwrap();
            for c in 0..cell {
                b_z.set(0, c, b_z.get(0, c) + sums.get(0, c));
            }
            let b_r = grads.get_mut("b_r").unwrap();
            for c in 0..cell {
                b_r.set(0, c, b_r.get(0, c) + sums.get(0, cell + c));
            }
        }

        let dconcat = da_zr.matmul_transpose_right(&fused_zr)?;

        // dh_prev = dh*(1-z) + dcc_h*r + dconcat_h
        let mut dh_prev = Matrix::zeros(batch, cell);
        {
            let dhd = dh.data();
            let zd = step.z.data();
            let rd = step.r.data();
            let dccd = dcc.data();
            let dcd = dconcat.data();
            let out = dh_prev.data_mut();
            let dwidth = dcc.cols();
            let cwidth = cell + input;
            for i in 0..batch {
                for c in 0..cell {
                    let idx = i * cell + c;
                    out[idx] = dhd[idx] * (1.0 - zd[idx])
                        + dccd[i * dwidth + c] * rd[idx]
                        + dcd[i * cwidth + c];
                }
            }
        }
        dh = dh_prev;
    }
    Ok(grads)
}
