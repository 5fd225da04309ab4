mod common;

use common::{check_gradients, gradient_fixture};
use danrl::model::{encode_all, Activation, BatchBundle, LossWeights, Objective, Optimizer, OptimizerKind, TensorGroup};
use danrl::preprocess::reconstructed_adjacency;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn analytic_gradients_match_central_differences() {
    for seed in [1, 2, 3] {
        let check = check_gradients(&gradient_fixture(seed), 1e-5);
        assert!(check.checked > 200);
        assert!(check.max_rel_err < 1e-4, "seed {seed}: {}", check.worst);
    }
}

#[test]
fn decoder_gradient_is_zero_without_reconstruction_terms() {
    let mut f = gradient_fixture(4);
    f.weights = LossWeights { sg: 1.0, ae: 0.0, fop: 0.0, reg: 0.0 };
    let (_, grads) = f.objective().gradients(&f.params, &f.bundle).unwrap();
    for (name, group, g) in grads.tensors() {
        if group == TensorGroup::Decoder {
            assert!(g.iter().all(|&v| v == 0.0), "{name}");
        }
    }
}

#[test]
fn context_gradient_is_zero_for_autoencoder_alone() {
    let mut f = gradient_fixture(5);
    f.weights = LossWeights::only_ae(1.0, 0.0);
    f.bundle.pairs.clear();
    f.bundle.negatives.clear();
    let (_, grads) = f.objective().gradients(&f.params, &f.bundle).unwrap();
    for (name, group, g) in grads.tensors() {
        if group == TensorGroup::Context {
            assert!(g.iter().all(|&v| v == 0.0), "{name}");
        }
    }
}

#[test]
fn first_order_training_ranks_the_edge_above_non_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 4;
    let mut a = Array2::zeros((n, n));
    a[[0, 1]] = 1.0;
    a[[1, 0]] = 1.0;
    let mut s = Array2::from_shape_fn((n, n), |_| rng.random_range(0.0..1.0));
    s = (&s + &s.t()) / 2.0;
    s.diag_mut().fill(0.0);
    let r = reconstructed_adjacency(a.view(), s.view(), 1.0, 0.5).unwrap();
    let mut params = danrl::model::ModelParams::init(&[n, 8, 4], 9).unwrap();
    let obj = Objective {
        r: &r,
        activation: Activation::Tanh,
        chi: 2.0,
        weights: LossWeights::only_fop(1.0),
    };
    let bundle = BatchBundle {
        edges: vec![(0, 1)],
        ..Default::default()
    };
    let mut opt = Optimizer::new(OptimizerKind::Sgd { momentum: 0.0 }, 0.1, &params);
    for _ in 0..200 {
        let (_, g) = obj.gradients(&params, &bundle).unwrap();
        opt.step(&mut params, &g, &[TensorGroup::Encoder]);
    }
    let y = encode_all(&params, Activation::Tanh, r.matrix().view()).unwrap();
    let w = |i: usize, j: usize| 1.0 / (1.0 + (-y.row(i).dot(&y.row(j))).exp());
    let edge = w(0, 1);
    for (u, k) in [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        assert!(edge > w(u, k), "w01 {edge} <= w{u}{k} {}", w(u, k));
    }
}
