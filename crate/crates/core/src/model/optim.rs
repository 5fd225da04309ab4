use super::config::OptimizerKind;
use super::params::{ModelParams, TensorGroup};

/// First-order optimizer state for one set of parameters.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
    steps: i32,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, lr: f64, params: &ModelParams) -> Self {
        let zeros: Vec<Vec<f64>> = params
            .tensors()
            .iter()
            .map(|(_, _, t)| vec![0.0; t.len()])
            .collect();
        let second = match kind {
            OptimizerKind::Adam { .. } => zeros.clone(),
            OptimizerKind::Sgd { .. } => Vec::new(),
        };
        Optimizer {
            kind,
            lr,
            first: zeros,
            second,
            steps: 0,
        }
    }

    /// Apply one descent step to the tensors in `groups`; other tensors and
    /// their state are left untouched.
    pub fn step(&mut self, params: &mut ModelParams, grads: &ModelParams, groups: &[TensorGroup]) {
        self.steps += 1;
        let grads = grads.tensors();
        for (i, (group, values)) in params.tensors_mut().into_iter().enumerate() {
            if !groups.contains(&group) {
                continue;
            }
            let g = grads[i].2;
            match self.kind {
                OptimizerKind::Sgd { momentum } => {
                    let vel = &mut self.first[i];
                    for ((p, &g), v) in values.iter_mut().zip(g).zip(vel.iter_mut()) {
                        *v = momentum * *v + g;
                        *p -= self.lr * *v;
                    }
                }
                OptimizerKind::Adam { beta1, beta2, eps } => {
                    let c1 = 1.0 - beta1.powi(self.steps);
                    let c2 = 1.0 - beta2.powi(self.steps);
                    let (m, v) = (&mut self.first[i], &mut self.second[i]);
                    for (((p, &g), m), v) in values.iter_mut().zip(g).zip(m.iter_mut()).zip(v.iter_mut()) {
                        *m = beta1 * *m + (1.0 - beta1) * g;
                        *v = beta2 * *v + (1.0 - beta2) * g * g;
                        *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                    }
                }
            }
        }
    }
}
