use crate::error::{Error, Result};

/// Hidden-layer non-linearity of the encoder and decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Sigmoid,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative expressed through the activation's output `a`.
    pub fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Sigmoid => a * (1.0 - a),
        }
    }
}

impl std::str::FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(Activation::Tanh),
            "sigmoid" => Ok(Activation::Sigmoid),
            _ => Err(Error::InvalidParameter(format!(
                "unknown activation {s:?} (expected tanh or sigmoid)"
            ))),
        }
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Parameter update rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OptimizerKind {
    /// Plain stochastic gradient descent with optional momentum.
    Sgd { momentum: f64 },
    Adam { beta1: f64, beta2: f64, eps: f64 },
}

impl OptimizerKind {
    pub fn adam() -> Self {
        OptimizerKind::Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// How the three objectives are stepped within one mini-batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateMode {
    /// First-order step, then autoencoder + regularizer step, then
    /// skip-gram step, each with its own optimizer state.
    Alternating,
    /// One step on the full weighted objective.
    Combined,
}

/// Hyperparameters of the model and its training loop.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Encoder hidden widths between the input (`n`) and the embedding.
    pub hidden_dims: Vec<usize>,
    pub embedding_dim: usize,
    pub activation: Activation,
    /// Weight of the autoencoder loss.
    pub alpha: f64,
    /// Weight of the first-order loss.
    pub beta: f64,
    /// Weight of the L2 regularizer.
    pub gamma: f64,
    /// Penalty on reconstruction error of non-zero input entries; must exceed 1.
    pub chi: f64,
    pub eta: f64,
    pub psi: f64,
    /// Keep only this many similarities per node before blending.
    pub similarity_top_k: Option<usize>,
    pub walks_per_node: usize,
    pub walk_length: usize,
    pub window: usize,
    pub negatives: usize,
    /// Also reject the center node when drawing negatives.
    pub exclude_center: bool,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub update_mode: UpdateMode,
    pub batch_size: usize,
    pub epochs: usize,
    /// Stop when the epoch loss changes by less than `1e-4` (relative) over 10 epochs.
    pub early_stop: bool,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden_dims: vec![256],
            embedding_dim: 128,
            activation: Activation::Tanh,
            alpha: 1.0,
            beta: 1.0,
            gamma: 1e-4,
            chi: 5.0,
            eta: 1.0,
            psi: 1.0,
            similarity_top_k: None,
            walks_per_node: 10,
            walk_length: 80,
            window: 10,
            negatives: 10,
            exclude_center: false,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::adam(),
            update_mode: UpdateMode::Alternating,
            batch_size: 64,
            epochs: 200,
            early_stop: true,
            seed: 0,
        }
    }
}

pub(crate) const EARLY_STOP_WINDOW: usize = 10;
pub(crate) const EARLY_STOP_TOLERANCE: f64 = 1e-4;

impl ModelConfig {
    /// Encoder layer widths `[n, hidden…, d]`.
    pub fn layer_dims(&self, n: usize) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 2);
        dims.push(n);
        dims.extend_from_slice(&self.hidden_dims);
        dims.push(self.embedding_dim);
        dims
    }

    /// Set one field from its textual `key=value` form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("{key}: cannot parse {value:?}")))
        }
        let flag = |value: &str| match value {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            _ => Err(Error::InvalidParameter(format!("{key}: expected a boolean, got {value:?}"))),
        };
        match key {
            "hidden_dims" => {
                self.hidden_dims = value
                    .split(',')
                    .map(str::trim)
                    .filter(|v| !v.is_empty() && *v != "none")
                    .map(|v| num(key, v))
                    .collect::<Result<_>>()?
            }
            "embedding_dim" => self.embedding_dim = num(key, value)?,
            "activation" => self.activation = value.parse()?,
            "alpha" => self.alpha = num(key, value)?,
            "beta" => self.beta = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "chi" => self.chi = num(key, value)?,
            "eta" => self.eta = num(key, value)?,
            "psi" => self.psi = num(key, value)?,
            "similarity_top_k" => {
                self.similarity_top_k = match value {
                    "none" | "" => None,
                    v => Some(num(key, v)?),
                }
            }
            "walks_per_node" => self.walks_per_node = num(key, value)?,
            "walk_length" => self.walk_length = num(key, value)?,
            "window" => self.window = num(key, value)?,
            "negatives" => self.negatives = num(key, value)?,
            "exclude_center" => self.exclude_center = flag(value)?,
            "learning_rate" => self.learning_rate = num(key, value)?,
            "optimizer" => {
                self.optimizer = match (value, self.optimizer) {
                    ("adam", OptimizerKind::Adam { .. }) => self.optimizer,
                    ("adam", _) => OptimizerKind::adam(),
                    ("sgd", OptimizerKind::Sgd { .. }) => self.optimizer,
                    ("sgd", _) => OptimizerKind::Sgd { momentum: 0.0 },
                    _ => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown optimizer {value:?} (expected adam or sgd)"
                        )))
                    }
                }
            }
            "momentum" => match &mut self.optimizer {
                OptimizerKind::Sgd { momentum } => *momentum = num(key, value)?,
                OptimizerKind::Adam { .. } => {
                    return Err(Error::InvalidParameter("momentum requires optimizer=sgd".into()))
                }
            },
            "update_mode" => {
                self.update_mode = match value {
                    "alternating" => UpdateMode::Alternating,
                    "combined" => UpdateMode::Combined,
                    _ => {
                        return Err(Error::InvalidParameter(format!(
                            "unknown update mode {value:?} (expected alternating or combined)"
                        )))
                    }
                }
            }
            "batch_size" => self.batch_size = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "early_stop" => self.early_stop = flag(value)?,
            "seed" => self.seed = num(key, value)?,
            _ => return Err(Error::InvalidParameter(format!("unknown model key {key:?}"))),
        }
        Ok(())
    }

    /// Whether `key` names a field accepted by [`ModelConfig::set`].
    pub fn is_key(key: &str) -> bool {
        Self::KEYS.contains(&key) || key == "momentum"
    }

    const KEYS: [&'static str; 22] = [
        "hidden_dims",
        "embedding_dim",
        "activation",
        "alpha",
        "beta",
        "gamma",
        "chi",
        "eta",
        "psi",
        "similarity_top_k",
        "walks_per_node",
        "walk_length",
        "window",
        "negatives",
        "exclude_center",
        "learning_rate",
        "optimizer",
        "update_mode",
        "batch_size",
        "epochs",
        "early_stop",
        "seed",
    ];

    /// Every field as `key=value` text, accepted back by [`ModelConfig::set`].
    pub fn key_values(&self) -> Vec<(String, String)> {
        let dims: Vec<String> = self.hidden_dims.iter().map(|d| d.to_string()).collect();
        let mut out: Vec<(String, String)> = vec![
            ("hidden_dims", dims.join(",")),
            ("embedding_dim", self.embedding_dim.to_string()),
            (
                "activation",
                match self.activation {
                    Activation::Tanh => "tanh".into(),
                    Activation::Sigmoid => "sigmoid".into(),
                },
            ),
            ("alpha", self.alpha.to_string()),
            ("beta", self.beta.to_string()),
            ("gamma", self.gamma.to_string()),
            ("chi", self.chi.to_string()),
            ("eta", self.eta.to_string()),
            ("psi", self.psi.to_string()),
            (
                "similarity_top_k",
                self.similarity_top_k.map_or("none".into(), |k| k.to_string()),
            ),
            ("walks_per_node", self.walks_per_node.to_string()),
            ("walk_length", self.walk_length.to_string()),
            ("window", self.window.to_string()),
            ("negatives", self.negatives.to_string()),
            ("exclude_center", self.exclude_center.to_string()),
            ("learning_rate", self.learning_rate.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        match self.optimizer {
            OptimizerKind::Adam { .. } => out.push(("optimizer".into(), "adam".into())),
            OptimizerKind::Sgd { momentum } => {
                out.push(("optimizer".into(), "sgd".into()));
                out.push(("momentum".into(), momentum.to_string()));
            }
        }
        let mode = match self.update_mode {
            UpdateMode::Alternating => "alternating",
            UpdateMode::Combined => "combined",
        };
        out.push(("update_mode".into(), mode.into()));
        out.push(("batch_size".into(), self.batch_size.to_string()));
        out.push(("epochs".into(), self.epochs.to_string()));
        out.push(("early_stop".into(), self.early_stop.to_string()));
        out.push(("seed".into(), self.seed.to_string()));
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("eta", self.eta),
            ("psi", self.psi),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} = {v} must be finite and non-negative"));
            }
        }
        if self.eta == 0.0 && self.psi == 0.0 {
            return bad("eta and psi cannot both be zero".into());
        }
        if !(self.chi > 1.0 && self.chi.is_finite()) {
            return bad(format!("chi = {} must exceed 1", self.chi));
        }
        if self.embedding_dim == 0 || self.hidden_dims.contains(&0) {
            return bad("layer widths must be positive".into());
        }
        if self.walks_per_node == 0 || self.walk_length == 0 {
            return bad("walks per node and walk length must be positive".into());
        }
        if self.batch_size == 0 {
            return bad("batch size must be positive".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {} must be positive", self.learning_rate));
        }
        if self.similarity_top_k == Some(0) {
            return bad("similarity_top_k must be at least 1".into());
        }
        Ok(())
    }
}
