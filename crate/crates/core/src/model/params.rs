use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// One affine layer `x·W + b`, with `W` of shape `in × out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            weight: Array2::zeros((inputs, outputs)),
            bias: Array1::zeros(outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.weight.ncols()
    }
}

/// All trainable tensors: the shared encoder, the mirrored decoder and the
/// skip-gram context matrix (one row per node).
///
/// The same type doubles as a gradient container.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub encoder: Vec<Dense>,
    pub decoder: Vec<Dense>,
    pub context: Array2<f64>,
}

/// Which tensors a parameter group contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TensorGroup {
    Encoder,
    Decoder,
    Context,
}

fn glorot(rng: &mut impl Rng, rows: usize, cols: usize) -> Array2<f64> {
    let s = (6.0 / (rows + cols) as f64).sqrt();
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-s..=s))
}

impl ModelParams {
    /// All-zero parameters for encoder widths `dims = [n, …, d]`.
    pub fn zeros(dims: &[usize]) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::InvalidParameter(format!(
                "layer widths {dims:?} need an input and an output, all positive"
            )));
        }
        let encoder = dims.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect();
        let decoder = dims
            .windows(2)
            .rev()
            .map(|w| Dense::zeros(w[1], w[0]))
            .collect();
        let context = Array2::zeros((dims[0], dims[dims.len() - 1]));
        Ok(ModelParams {
            encoder,
            decoder,
            context,
        })
    }

    /// Uniform Glorot initialization of every weight matrix and of the
    /// context matrix; biases start at zero.
    pub fn init(dims: &[usize], seed: u64) -> Result<Self> {
        let mut p = Self::zeros(dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for layer in p.encoder.iter_mut().chain(p.decoder.iter_mut()) {
            layer.weight = glorot(&mut rng, layer.inputs(), layer.outputs());
        }
        p.context = glorot(&mut rng, p.context.nrows(), p.context.ncols());
        Ok(p)
    }

    pub fn zeros_like(&self) -> Self {
        ModelParams {
            encoder: self
                .encoder
                .iter()
                .map(|l| Dense::zeros(l.inputs(), l.outputs()))
                .collect(),
            decoder: self
                .decoder
                .iter()
                .map(|l| Dense::zeros(l.inputs(), l.outputs()))
                .collect(),
            context: Array2::zeros(self.context.raw_dim()),
        }
    }

    /// Encoder widths `[n, …, d]`.
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.encoder[0].inputs()];
        dims.extend(self.encoder.iter().map(Dense::outputs));
        dims
    }

    pub fn embedding_dim(&self) -> usize {
        self.context.ncols()
    }

    pub fn input_dim(&self) -> usize {
        self.encoder[0].inputs()
    }

    /// Check that layer shapes chain, the decoder mirrors the encoder and
    /// every value is finite.
    pub fn validate(&self) -> Result<()> {
        let dims = self.dims();
        let chained = self
            .encoder
            .windows(2)
            .all(|w| w[0].outputs() == w[1].inputs());
        let mirrored = self.decoder.len() == self.encoder.len()
            && self
                .decoder
                .iter()
                .zip(self.encoder.iter().rev())
                .all(|(d, e)| d.inputs() == e.outputs() && d.outputs() == e.inputs());
        let biases = self
            .encoder
            .iter()
            .chain(&self.decoder)
            .all(|l| l.bias.len() == l.outputs());
        let context = self.context.dim() == (dims[0], dims[dims.len() - 1]);
        if !(chained && mirrored && biases && context) {
            return Err(Error::Dimension("parameter shapes do not chain".into()));
        }
        if self.tensors().iter().any(|(_, _, t)| t.iter().any(|v| !v.is_finite())) {
            return Err(Error::Diverged("non-finite parameter value".into()));
        }
        Ok(())
    }

    /// Every tensor as `(name, group, values)` in a fixed order.
    pub fn tensors(&self) -> Vec<(String, TensorGroup, &[f64])> {
        let mut out = Vec::new();
        for (k, l) in self.encoder.iter().enumerate() {
            out.push((format!("encoder.{k}.weight"), TensorGroup::Encoder, slice(&l.weight)));
            out.push((
                format!("encoder.{k}.bias"),
                TensorGroup::Encoder,
                l.bias.as_slice().expect("contiguous"),
            ));
        }
        for (k, l) in self.decoder.iter().enumerate() {
            out.push((format!("decoder.{k}.weight"), TensorGroup::Decoder, slice(&l.weight)));
            out.push((
                format!("decoder.{k}.bias"),
                TensorGroup::Decoder,
                l.bias.as_slice().expect("contiguous"),
            ));
        }
        out.push(("context".into(), TensorGroup::Context, slice(&self.context)));
        out
    }

    /// Mutable counterpart of [`tensors`](Self::tensors), same order.
    pub fn tensors_mut(&mut self) -> Vec<(TensorGroup, &mut [f64])> {
        let mut out = Vec::new();
        for l in &mut self.encoder {
            out.push((TensorGroup::Encoder, slice_mut(&mut l.weight)));
            out.push((
                TensorGroup::Encoder,
                l.bias.as_slice_mut().expect("contiguous"),
            ));
        }
        for l in &mut self.decoder {
            out.push((TensorGroup::Decoder, slice_mut(&mut l.weight)));
            out.push((
                TensorGroup::Decoder,
                l.bias.as_slice_mut().expect("contiguous"),
            ));
        }
        out.push((TensorGroup::Context, slice_mut(&mut self.context)));
        out
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, _, t)| t.len()).sum()
    }
}

fn slice(a: &Array2<f64>) -> &[f64] {
    a.as_slice().expect("parameters are stored in standard layout")
}

fn slice_mut(a: &mut Array2<f64>) -> &mut [f64] {
    a.as_slice_mut()
        .expect("parameters are stored in standard layout")
}
