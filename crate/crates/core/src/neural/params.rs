use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::NeuralError;
use crate::embedding::stable_hash;
use crate::linalg::{Matrix, Tensor3};

/// Filter width that makes each convolution window exactly one tuple.
pub const TUPLE_WIDTH: usize = 2;

/// Trainable parameters shared by the mention and type encoders.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub d: usize,
    pub filters: usize,
    pub width: usize,
    pub margin: f64,
    /// Seed used to initialize the tensor, the filters, and any relation
    /// matrix created later.
    pub seed: u64,
    /// One `2d × 2d` matrix per AMR relation label.
    pub relations: BTreeMap<String, Matrix>,
    /// `2d` slices of `2d × 2d`.
    pub tensor: Tensor3,
    /// `F × (n·d)`.
    pub conv_w: Matrix,
    pub conv_b: Vec<f64>,
}

fn glorot(fan_in: usize, fan_out: usize) -> f64 {
    libm::sqrt(6.0 / (fan_in + fan_out) as f64)
}

impl ModelParams {
    /// Seeded Glorot-uniform initialization; the bias starts at zero.
    pub fn init(d: usize, filters: usize, width: usize, margin: f64, seed: u64) -> Result<Self, NeuralError> {
        if d == 0 || filters == 0 {
            return Err(NeuralError::Config("d and filters must be positive"));
        }
        if width != TUPLE_WIDTH {
            return Err(NeuralError::UnsupportedWidth(width));
        }
        if !(margin > 0.0) {
            return Err(NeuralError::Config("margin must be positive"));
        }
        let n = 2 * d;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let r = glorot(n, n);
        let tensor = Tensor3::from_vec(n, (0..n * n * n).map(|_| rng.gen_range(-r..r)).collect());
        rng.set_stream(2);
        let r = glorot(width * d, filters);
        let conv_w = Matrix::from_vec(filters, width * d, (0..filters * width * d).map(|_| rng.gen_range(-r..r)).collect());
        Ok(Self {
            d,
            filters,
            width,
            margin,
            seed,
            relations: BTreeMap::new(),
            tensor,
            conv_w,
            conv_b: vec![0.0; filters],
        })
    }

    /// Creates the matrix for `label` if absent: identity plus small noise
    /// seeded by the model seed and the label, so creation order is irrelevant.
    pub fn ensure_relation(&mut self, label: &str) {
        if self.relations.contains_key(label) {
            return;
        }
        let n = 2 * self.d;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ stable_hash(label));
        let r = 0.1 * glorot(n, n);
        let mut m = Matrix::identity(n);
        for x in m.as_mut_slice() {
            *x += rng.gen_range(-r..r);
        }
        self.relations.insert(label.to_string(), m);
    }

    /// Parameter blocks in canonical order: relation matrices by sorted
    /// label, the tensor slice by slice, filters row-major, then the bias.
    pub fn blocks(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self.relations.values().map(Matrix::as_slice).collect();
        out.push(self.tensor.as_slice());
        out.push(self.conv_w.as_slice());
        out.push(&self.conv_b);
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = self.relations.values_mut().map(Matrix::as_mut_slice).collect();
        out.push(self.tensor.as_mut_slice());
        out.push(self.conv_w.as_mut_slice());
        out.push(&mut self.conv_b);
        out
    }

    pub fn num_parameters(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }

    /// Plain SGD step `θ ← θ − lr·g`.
    pub fn sgd_step(&mut self, grads: &Gradients, lr: f64) {
        for (label, g) in &grads.relations {
            if let Some(m) = self.relations.get_mut(label) {
                axpy(m.as_mut_slice(), -lr, g.as_slice());
            }
        }
        axpy(self.tensor.as_mut_slice(), -lr, grads.tensor.as_slice());
        axpy(self.conv_w.as_mut_slice(), -lr, grads.conv_w.as_slice());
        axpy(&mut self.conv_b, -lr, &grads.conv_b);
    }

    pub fn is_finite(&self) -> bool {
        self.blocks().iter().all(|b| b.iter().all(|x| x.is_finite()))
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Gradient buffers mirroring [`ModelParams`]; relation entries exist only
/// for relations a batch touched.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub relations: BTreeMap<String, Matrix>,
    pub tensor: Tensor3,
    pub conv_w: Matrix,
    pub conv_b: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(params: &ModelParams) -> Self {
        Self {
            relations: BTreeMap::new(),
            tensor: Tensor3::zeros(params.tensor.n()),
            conv_w: Matrix::zeros(params.conv_w.rows(), params.conv_w.cols()),
            conv_b: vec![0.0; params.conv_b.len()],
        }
    }

    pub fn relation_mut(&mut self, label: &str, n: usize) -> &mut Matrix {
        self.relations.entry(label.to_string()).or_insert_with(|| Matrix::zeros(n, n))
    }

    /// Flattened in the same block order as [`ModelParams::blocks`];
    /// untouched relations contribute zeros.
    pub fn blocks_for(&self, params: &ModelParams) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = params
            .relations
            .iter()
            .map(|(label, m)| match self.relations.get(label) {
                Some(g) => g.as_slice().to_vec(),
                None => vec![0.0; m.as_slice().len()],
            })
            .collect();
        out.push(self.tensor.as_slice().to_vec());
        out.push(self.conv_w.as_slice().to_vec());
        out.push(self.conv_b.clone());
        out
    }

    pub fn is_finite(&self) -> bool {
        self.relations.values().all(|m| m.as_slice().iter().all(|x| x.is_finite()))
            && self.tensor.as_slice().iter().all(|x| x.is_finite())
            && self.conv_w.as_slice().iter().all(|x| x.is_finite())
            && self.conv_b.iter().all(|x| x.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.relations.values().all(|m| m.as_slice().iter().all(|x| *x == 0.0))
            && self.tensor.as_slice().iter().all(|x| *x == 0.0)
            && self.conv_w.as_slice().iter().all(|x| *x == 0.0)
            && self.conv_b.iter().all(|x| *x == 0.0)
    }
}
