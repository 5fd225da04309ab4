//! One-vs-rest logistic regression used to score embeddings.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::sigmoid;

const BATCH: usize = 32;
const LEARNING_RATE: f64 = 0.5;

/// Per-class linear scorers over standardized features.
#[derive(Debug, Clone)]
pub struct LinearClassifier {
    /// `n_classes × d`.
    weights: Array2<f64>,
    bias: Array1<f64>,
    mean: Array1<f64>,
    scale: Array1<f64>,
}

impl LinearClassifier {
    pub fn n_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn scores(&self, x: ArrayView1<'_, f64>) -> Array1<f64> {
        let z = (&x - &self.mean) / &self.scale;
        self.weights.dot(&z) + &self.bias
    }

    /// Highest-scoring class, lowest id on ties.
    pub fn predict_one(&self, x: ArrayView1<'_, f64>) -> usize {
        let s = self.scores(x);
        let mut best = 0;
        for (c, &v) in s.iter().enumerate() {
            if v > s[best] {
                best = c;
            }
        }
        best
    }

    pub fn predict(&self, features: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        if features.ncols() != self.mean.len() {
            return Err(Error::Dimension(format!(
                "classifier expects {} features, got {}",
                self.mean.len(),
                features.ncols()
            )));
        }
        Ok(features.rows().into_iter().map(|r| self.predict_one(r)).collect())
    }
}

/// Fit one L2-regularized logistic scorer per class (class `c` against the
/// rest) with shuffled mini-batch gradient descent. Classes are `0..=max(labels)`.
pub fn train_linear_classifier(
    features: ArrayView2<'_, f64>,
    labels: &[usize],
    l2: f64,
    epochs: usize,
    seed: u64,
) -> Result<LinearClassifier> {
    if features.nrows() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} feature rows for {} labels",
            features.nrows(),
            labels.len()
        )));
    }
    if !(l2 >= 0.0 && l2.is_finite()) {
        return Err(Error::InvalidParameter(format!("l2 must be non-negative, got {l2}")));
    }
    let first = *labels.first().ok_or_else(|| Error::Empty("no training samples".into()))?;
    if labels.iter().all(|&c| c == first) {
        return Err(Error::InvalidParameter("training labels contain a single class".into()));
    }
    let n_classes = labels.iter().max().copied().unwrap_or(0) + 1;
    let d = features.ncols();

    let mean = features.mean_axis(Axis(0)).expect("non-empty");
    let scale = features
        .std_axis(Axis(0), 0.0)
        .mapv(|s| if s > 1e-12 { s } else { 1.0 });
    let x = (&features - &mean) / &scale;

    let mut weights = Array2::<f64>::zeros((n_classes, d));
    let mut bias = Array1::<f64>::zeros(n_classes);
    let mut order: Vec<usize> = (0..labels.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(BATCH) {
            let mut gw = Array2::<f64>::zeros((n_classes, d));
            let mut gb = Array1::<f64>::zeros(n_classes);
            for &i in batch {
                let xi = x.row(i);
                let s = weights.dot(&xi) + &bias;
                for c in 0..n_classes {
                    let target = if labels[i] == c { 1.0 } else { 0.0 };
                    let err = sigmoid(s[c]) - target;
                    gw.row_mut(c).scaled_add(err, &xi);
                    gb[c] += err;
                }
            }
            let step = LEARNING_RATE / batch.len() as f64;
            weights *= 1.0 - LEARNING_RATE * l2;
            weights.scaled_add(-step, &gw);
            bias.scaled_add(-step, &gb);
        }
    }
    Ok(LinearClassifier {
        weights,
        bias,
        mean,
        scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn separable() -> (Array2<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut x = Array2::zeros((20, 2));
        let mut y = Vec::new();
        for i in 0..20 {
            let c = i % 2;
            let shift = if c == 0 { -2.0 } else { 2.0 };
            x[[i, 0]] = shift + rng.random_range(-1.0..1.0);
            x[[i, 1]] = rng.random_range(-3.0..3.0);
            y.push(c);
        }
        (x, y)
    }

    #[test]
    fn separable_toy_fits_exactly() {
        let (x, y) = separable();
        let clf = train_linear_classifier(x.view(), &y, 1e-4, 200, 0).unwrap();
        assert_eq!(clf.predict(x.view()).unwrap(), y);
    }

    #[test]
    fn zero_features_predict_majority() {
        let x = Array2::zeros((4, 3));
        let y = [1, 1, 1, 0];
        let clf = train_linear_classifier(x.view(), &y, 0.0, 50, 0).unwrap();
        assert_eq!(clf.predict(x.view()).unwrap(), vec![1; 4]);
    }

    #[test]
    fn deterministic_under_seed() {
        let (x, y) = separable();
        let a = train_linear_classifier(x.view(), &y, 1e-3, 5, 9).unwrap();
        let b = train_linear_classifier(x.view(), &y, 1e-3, 5, 9).unwrap();
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.bias, b.bias);
    }

    #[test]
    fn single_class_is_rejected() {
        let x = Array2::zeros((3, 2));
        assert!(train_linear_classifier(x.view(), &[2, 2, 2], 0.0, 1, 0).is_err());
    }
}
