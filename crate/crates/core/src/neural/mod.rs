//! Tuple composition, the weight-sharing convolutional encoder, cosine
//! scoring, and exact gradients.
//!
//! A mention tuple `<w1, λ, w2>` becomes `tanh([v1; v2] · M_λ)`; a type
//! tuple `<y, r>` becomes `tanh(xᵀ U[k] x)` per component `k` with
//! `x = [vy; vr]`. Filter width and stride are both two columns of the
//! `d × 2h` feature map, so the convolution is one affine map per tuple,
//! `tanh(W·c + b)`, followed by max-pooling over the real tuples.

mod backprop;
mod encoder;
mod gradcheck;
mod params;

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::linalg::{bilinear, concat, tanh_in_place, Matrix, Tensor3};

pub use backprop::{backward, compute_gradients, evaluate_loss};
pub use encoder::{
    argument_score, encode_mention_side, encode_type_side, mention_score, Composer, Encoding,
};
pub use gradcheck::{finite_diff_check, smooth_within, DEFAULT_EPSILON};
pub use params::{Gradients, ModelParams, TUPLE_WIDTH};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NeuralError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dim { expected: usize, got: usize },
    #[error("real tuple count {real} exceeds {len} supplied tuples")]
    RealCount { real: usize, len: usize },
    #[error("filter width {0} unsupported; only 2 (one tuple per window)")]
    UnsupportedWidth(usize),
    #[error("epsilon must be positive, got {0}")]
    Epsilon(f64),
    #[error("invalid model configuration: {0}")]
    Config(&'static str),
}

fn check_len(got: usize, expected: usize) -> Result<(), NeuralError> {
    if got != expected {
        return Err(NeuralError::Dim { expected, got });
    }
    Ok(())
}

/// `tanh([v1; v2] · M)` with `M` of shape `2d × 2d`.
pub fn compose_mention_tuple(v1: &[f64], v2: &[f64], m: &Matrix) -> Result<Vec<f64>, NeuralError> {
    check_len(v2.len(), v1.len())?;
    let n = v1.len() * 2;
    check_len(m.rows(), n)?;
    check_len(m.cols(), n)?;
    let mut out = m.left_mul(&concat(v1, v2));
    tanh_in_place(&mut out);
    Ok(out)
}

/// Component `k` is `tanh(xᵀ U[k] x)` with `x = [vy; vr]`.
pub fn compose_type_tuple(vy: &[f64], vr: &[f64], u: &Tensor3) -> Result<Vec<f64>, NeuralError> {
    check_len(vr.len(), vy.len())?;
    check_len(u.n(), vy.len() * 2)?;
    let x = concat(vy, vr);
    Ok((0..u.n()).map(|k| libm::tanh(bilinear(u.slice(k), &x))).collect())
}

/// Per-tuple convolution `tanh(W·c + b)`.
pub(crate) fn conv_tuple(c: &[f64], params: &ModelParams) -> Vec<f64> {
    let mut h = params.conv_w.mul_vec(c);
    for (x, b) in h.iter_mut().zip(&params.conv_b) {
        *x += b;
    }
    tanh_in_place(&mut h);
    h
}

/// Index of the maximum per filter over `hidden`; first index wins ties.
pub(crate) fn pool_argmax(hidden: &[Vec<f64>], filters: usize) -> (Vec<f64>, Vec<Option<usize>>) {
    let mut pooled = vec![0.0; filters];
    let mut argmax = vec![None; filters];
    for (i, h) in hidden.iter().enumerate() {
        for f in 0..filters {
            if argmax[f].is_none() || h[f] > pooled[f] {
                pooled[f] = h[f];
                argmax[f] = Some(i);
            }
        }
    }
    (pooled, argmax)
}

/// Convolution and masked max-pooling over the first `real_count` tuple
/// vectors; padding never reaches the pool. No real tuples gives zeros.
pub fn cnn_forward(tuple_vectors: &[Vec<f64>], real_count: usize, params: &ModelParams) -> Result<Vec<f64>, NeuralError> {
    if real_count > tuple_vectors.len() {
        return Err(NeuralError::RealCount { real: real_count, len: tuple_vectors.len() });
    }
    let n = params.width * params.d;
    check_len(params.conv_w.cols(), n)?;
    let mut hidden = Vec::with_capacity(real_count);
    for c in &tuple_vectors[..real_count] {
        check_len(c.len(), n)?;
        hidden.push(conv_tuple(c, params));
    }
    Ok(pool_argmax(&hidden, params.filters).0)
}
