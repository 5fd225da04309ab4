//! Forward pass, the four loss terms and their exact gradients.
//!
//! The encoder maps a row of `R` to an embedding `y` through affine layers
//! and the configured activation. The decoder mirrors it, with a linear
//! last layer because rows of `R` may exceed the activation's range.
//! Losses:
//!
//! - first-order: mean over edges of `-ln σ(y_i·y_j)`
//! - autoencoder: `Σ_i ‖(R̂_i − R_i) ⊙ b_i‖²`, `b_ij = chi` where `R_ij ≠ 0`, else 1
//! - skip-gram: `−Σ_pairs [ln σ(h_ctx·y_c) + Σ_neg ln σ(−h_neg·y_c)]`
//! - regularizer: `½ Σ_k (‖W_k‖² + ‖Ŵ_k‖²)` over encoder and decoder weights

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};

use super::config::{sigmoid, softplus, Activation, ModelConfig};
use super::params::ModelParams;
use crate::error::{Error, Result};
use crate::par;
use crate::preprocess::ReconstructedAdjacency;

/// The samples one optimization step sees.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchBundle {
    /// Nodes whose rows of `R` are reconstructed.
    pub rows: Vec<usize>,
    /// Existing edges for the first-order term.
    pub edges: Vec<(usize, usize)>,
    /// Skip-gram `(center, context)` pairs.
    pub pairs: Vec<(usize, usize)>,
    /// `neg_per_pair` noise nodes per pair, pair-major.
    pub negatives: Vec<usize>,
    pub neg_per_pair: usize,
}

impl BatchBundle {
    /// Sorted, de-duplicated nodes whose embeddings the bundle needs.
    pub fn forward_nodes(&self) -> Vec<usize> {
        let mut nodes: Vec<usize> = self
            .rows
            .iter()
            .copied()
            .chain(self.edges.iter().flat_map(|&(u, v)| [u, v]))
            .chain(self.pairs.iter().map(|&(c, _)| c))
            .collect();
        nodes.sort_unstable();
        nodes.dedup();
        nodes
    }

    fn check(&self) -> Result<()> {
        if self.negatives.len() != self.pairs.len() * self.neg_per_pair {
            return Err(Error::Dimension(format!(
                "{} negatives for {} pairs at {} per pair",
                self.negatives.len(),
                self.pairs.len(),
                self.neg_per_pair
            )));
        }
        Ok(())
    }
}

/// Coefficients of the four loss terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub sg: f64,
    pub ae: f64,
    pub fop: f64,
    pub reg: f64,
}

impl LossWeights {
    /// `L_sg + alpha·L_ae + beta·L_fop + gamma·L_reg`.
    pub fn from_config(c: &ModelConfig) -> Self {
        LossWeights {
            sg: 1.0,
            ae: c.alpha,
            fop: c.beta,
            reg: c.gamma,
        }
    }

    pub fn only_fop(beta: f64) -> Self {
        LossWeights { sg: 0.0, ae: 0.0, fop: beta, reg: 0.0 }
    }

    pub fn only_ae(alpha: f64, gamma: f64) -> Self {
        LossWeights { sg: 0.0, ae: alpha, fop: 0.0, reg: gamma }
    }

    pub fn only_sg() -> Self {
        LossWeights { sg: 1.0, ae: 0.0, fop: 0.0, reg: 0.0 }
    }
}

/// Unweighted value of each loss term.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossBreakdown {
    pub sg: f64,
    pub ae: f64,
    pub fop: f64,
    pub reg: f64,
}

impl LossBreakdown {
    pub fn weighted_total(&self, w: &LossWeights) -> f64 {
        w.sg * self.sg + w.ae * self.ae + w.fop * self.fop + w.reg * self.reg
    }

    pub fn is_finite(&self) -> bool {
        [self.sg, self.ae, self.fop, self.reg]
            .iter()
            .all(|v| v.is_finite())
    }
}

fn affine(x: ArrayView2<'_, f64>, w: &Array2<f64>, b: &Array1<f64>) -> Array2<f64> {
    let mut z = par::matmul(x, w.view());
    z += b;
    z
}

/// Layer outputs of the encoder for a batch of input rows; the last entry
/// holds the embeddings.
pub fn encoder_forward(
    params: &ModelParams,
    act: Activation,
    x: ArrayView2<'_, f64>,
) -> Vec<Array2<f64>> {
    let mut outs: Vec<Array2<f64>> = Vec::with_capacity(params.encoder.len());
    for layer in &params.encoder {
        let input = outs.last().map_or(x, |a| a.view());
        let mut z = affine(input, &layer.weight, &layer.bias);
        z.mapv_inplace(|v| act.apply(v));
        outs.push(z);
    }
    outs
}

/// Layer outputs of the decoder for a batch of embeddings; the last entry
/// is the reconstruction (linear).
pub fn decoder_forward(
    params: &ModelParams,
    act: Activation,
    y: ArrayView2<'_, f64>,
) -> Vec<Array2<f64>> {
    let k = params.decoder.len();
    let mut outs: Vec<Array2<f64>> = Vec::with_capacity(k);
    for (i, layer) in params.decoder.iter().enumerate() {
        let input = outs.last().map_or(y, |a| a.view());
        let mut z = affine(input, &layer.weight, &layer.bias);
        if i + 1 < k {
            z.mapv_inplace(|v| act.apply(v));
        }
        outs.push(z);
    }
    outs
}

fn check_finite(values: &Array2<f64>, what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Diverged(format!("non-finite {what}")))
    }
}

/// Embed a single row of `R`.
pub fn encode(params: &ModelParams, act: Activation, row: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if row.len() != params.input_dim() {
        return Err(Error::Dimension(format!(
            "input row has {} entries, encoder expects {}",
            row.len(),
            params.input_dim()
        )));
    }
    let x = row.insert_axis(Axis(0));
    let y = encoder_forward(params, act, x).pop().expect("at least one layer");
    check_finite(&y, "embedding")?;
    Ok(y.index_axis_move(Axis(0), 0))
}

/// Embed every row of `r`.
pub fn encode_all(params: &ModelParams, act: Activation, r: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if r.ncols() != params.input_dim() {
        return Err(Error::Dimension(format!(
            "input has {} columns, encoder expects {}",
            r.ncols(),
            params.input_dim()
        )));
    }
    let y = encoder_forward(params, act, r).pop().expect("at least one layer");
    check_finite(&y, "embedding")?;
    Ok(y)
}

/// Reconstruct a row of `R` from an embedding.
pub fn decode(params: &ModelParams, act: Activation, y: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    if y.len() != params.embedding_dim() {
        return Err(Error::Dimension(format!(
            "embedding has {} entries, decoder expects {}",
            y.len(),
            params.embedding_dim()
        )));
    }
    let out = decoder_forward(params, act, y.insert_axis(Axis(0)))
        .pop()
        .expect("at least one layer");
    check_finite(&out, "reconstruction")?;
    Ok(out.index_axis_move(Axis(0), 0))
}

/// Mean of `-ln σ(y_u·y_v)` over `edges`; rows of `y` are indexed by node.
pub fn first_order_loss(y: ArrayView2<'_, f64>, edges: &[(usize, usize)]) -> Result<f64> {
    if edges.is_empty() {
        return Err(Error::Empty("first-order loss needs at least one edge".into()));
    }
    let sum: f64 = edges
        .iter()
        .map(|&(u, v)| softplus(-y.row(u).dot(&y.row(v))))
        .sum();
    Ok(sum / edges.len() as f64)
}

/// `Σ ‖(R̂ − R) ⊙ B‖²` over the rows given.
pub fn reconstruction_loss(
    r_hat: ArrayView2<'_, f64>,
    r: ArrayView2<'_, f64>,
    penalty: ArrayView2<'_, f64>,
) -> Result<f64> {
    if r_hat.dim() != r.dim() || r.dim() != penalty.dim() {
        return Err(Error::Dimension(format!(
            "reconstruction {:?}, target {:?} and penalty {:?} differ",
            r_hat.dim(),
            r.dim(),
            penalty.dim()
        )));
    }
    let mut acc = 0.0;
    Zip::from(&r_hat).and(&r).and(&penalty).for_each(|&a, &b, &p| {
        let e = (a - b) * p;
        acc += e * e;
    });
    Ok(acc)
}

/// Skip-gram negative-sampling loss. Rows of `y` are indexed by center
/// node, rows of `context` by context/noise node.
pub fn skipgram_loss(
    y: ArrayView2<'_, f64>,
    context: ArrayView2<'_, f64>,
    pairs: &[(usize, usize)],
    negatives: &[usize],
    neg_per_pair: usize,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("skip-gram loss needs at least one pair".into()));
    }
    if negatives.len() != pairs.len() * neg_per_pair {
        return Err(Error::Dimension("negatives do not match pairs".into()));
    }
    let mut acc = 0.0;
    for (p, &(c, ctx)) in pairs.iter().enumerate() {
        let yc = y.row(c);
        acc += softplus(-context.row(ctx).dot(&yc));
        for &s in &negatives[p * neg_per_pair..(p + 1) * neg_per_pair] {
            acc += softplus(context.row(s).dot(&yc));
        }
    }
    Ok(acc)
}

/// `½ Σ (‖W_k‖²_F + ‖Ŵ_k‖²_F)`; biases and the context matrix are excluded.
pub fn regularizer(params: &ModelParams) -> f64 {
    0.5 * params
        .encoder
        .iter()
        .chain(&params.decoder)
        .map(|l| l.weight.iter().map(|w| w * w).sum::<f64>())
        .sum::<f64>()
}

/// The joint objective over a fixed reconstructed adjacency.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    pub r: &'a ReconstructedAdjacency,
    pub activation: Activation,
    pub chi: f64,
    pub weights: LossWeights,
}

/// Dense map from node id to its row in a forward batch.
struct LocalIndex {
    nodes: Vec<usize>,
    slot: Vec<usize>,
}

impl LocalIndex {
    fn new(nodes: Vec<usize>, n: usize) -> Result<Self> {
        let mut slot = vec![usize::MAX; n];
        for (i, &v) in nodes.iter().enumerate() {
            if v >= n {
                return Err(Error::NodeOutOfRange { id: v, n });
            }
            slot[v] = i;
        }
        Ok(LocalIndex { nodes, slot })
    }

    fn get(&self, v: usize) -> usize {
        self.slot[v]
    }
}

impl<'a> Objective<'a> {
    pub fn new(r: &'a ReconstructedAdjacency, config: &ModelConfig) -> Self {
        Objective {
            r,
            activation: config.activation,
            chi: config.chi,
            weights: LossWeights::from_config(config),
        }
    }

    fn embed(&self, params: &ModelParams, nodes: &[usize]) -> Result<Vec<Array2<f64>>> {
        if params.input_dim() != self.r.n() {
            return Err(Error::Dimension(format!(
                "encoder input width {} does not match {} nodes",
                params.input_dim(),
                self.r.n()
            )));
        }
        let x = self.r.matrix().select(Axis(0), nodes);
        Ok(encoder_forward(params, self.activation, x.view()))
    }

    fn check_nodes(&self, ids: impl IntoIterator<Item = usize>) -> Result<()> {
        let n = self.r.n();
        match ids.into_iter().find(|&v| v >= n) {
            Some(id) => Err(Error::NodeOutOfRange { id, n }),
            None => Ok(()),
        }
    }

    pub fn loss_fop(&self, params: &ModelParams, edges: &[(usize, usize)]) -> Result<f64> {
        let bundle = BatchBundle {
            edges: edges.to_vec(),
            ..Default::default()
        };
        let idx = LocalIndex::new(bundle.forward_nodes(), self.r.n())?;
        let y = self.embed(params, &idx.nodes)?.pop().unwrap();
        let local: Vec<_> = edges.iter().map(|&(u, v)| (idx.get(u), idx.get(v))).collect();
        first_order_loss(y.view(), &local)
    }

    pub fn loss_ae(&self, params: &ModelParams, rows: &[usize]) -> Result<f64> {
        self.check_nodes(rows.iter().copied())?;
        let y = self.embed(params, rows)?.pop().unwrap();
        let r_hat = decoder_forward(params, self.activation, y.view()).pop().unwrap();
        let (target, penalty) = self.r.penalty_rows(rows, self.chi);
        reconstruction_loss(r_hat.view(), target.view(), penalty.view())
    }

    pub fn loss_sg(
        &self,
        params: &ModelParams,
        pairs: &[(usize, usize)],
        negatives: &[usize],
        neg_per_pair: usize,
    ) -> Result<f64> {
        self.check_nodes(pairs.iter().map(|p| p.1).chain(negatives.iter().copied()))?;
        let bundle = BatchBundle {
            pairs: pairs.to_vec(),
            ..Default::default()
        };
        let idx = LocalIndex::new(bundle.forward_nodes(), self.r.n())?;
        let y = self.embed(params, &idx.nodes)?.pop().unwrap();
        let local: Vec<_> = pairs.iter().map(|&(c, ctx)| (idx.get(c), ctx)).collect();
        skipgram_loss(y.view(), params.context.view(), &local, negatives, neg_per_pair)
    }

    pub fn loss_reg(&self, params: &ModelParams) -> f64 {
        regularizer(params)
    }

    /// Every term that has data, evaluated independently. Terms whose batch
    /// is empty are reported as 0 and are an error only when their weight
    /// is non-zero.
    pub fn losses(&self, params: &ModelParams, bundle: &BatchBundle) -> Result<LossBreakdown> {
        bundle.check()?;
        let w = &self.weights;
        let mut out = LossBreakdown {
            reg: self.loss_reg(params),
            ..Default::default()
        };
        if !bundle.pairs.is_empty() || w.sg != 0.0 {
            out.sg = self.loss_sg(params, &bundle.pairs, &bundle.negatives, bundle.neg_per_pair)?;
        }
        if !bundle.rows.is_empty() || w.ae != 0.0 {
            if bundle.rows.is_empty() {
                return Err(Error::Empty("autoencoder loss needs at least one row".into()));
            }
            out.ae = self.loss_ae(params, &bundle.rows)?;
        }
        if !bundle.edges.is_empty() || w.fop != 0.0 {
            out.fop = self.loss_fop(params, &bundle.edges)?;
        }
        Ok(out)
    }

    /// The weighted objective `Σ weight · term`.
    pub fn total_loss(&self, params: &ModelParams, bundle: &BatchBundle) -> Result<f64> {
        Ok(self.losses(params, bundle)?.weighted_total(&self.weights))
    }

    /// Exact gradient of the weighted objective with respect to every
    /// parameter, plus the unweighted value of each term that has a
    /// non-zero weight (others are reported as 0).
    pub fn gradients(
        &self,
        params: &ModelParams,
        bundle: &BatchBundle,
    ) -> Result<(LossBreakdown, ModelParams)> {
        bundle.check()?;
        let w = self.weights;
        let use_sg = w.sg != 0.0;
        let use_ae = w.ae != 0.0;
        let use_fop = w.fop != 0.0;
        if use_sg && bundle.pairs.is_empty() {
            return Err(Error::Empty("skip-gram step needs at least one pair".into()));
        }
        if use_fop && bundle.edges.is_empty() {
            return Err(Error::Empty("first-order step needs at least one edge".into()));
        }
        if use_ae && bundle.rows.is_empty() {
            return Err(Error::Empty("autoencoder step needs at least one row".into()));
        }
        let n = self.r.n();
        let relevant = BatchBundle {
            rows: if use_ae { bundle.rows.clone() } else { Vec::new() },
            edges: if use_fop { bundle.edges.clone() } else { Vec::new() },
            pairs: if use_sg { bundle.pairs.clone() } else { Vec::new() },
            negatives: Vec::new(),
            neg_per_pair: 0,
        };
        self.check_nodes(
            bundle
                .pairs
                .iter()
                .map(|p| p.1)
                .chain(bundle.negatives.iter().copied()),
        )?;
        let idx = LocalIndex::new(relevant.forward_nodes(), n)?;
        let mut grads = params.zeros_like();
        let mut losses = LossBreakdown::default();

        let acts = if idx.nodes.is_empty() {
            Vec::new()
        } else {
            self.embed(params, &idx.nodes)?
        };
        let d = params.embedding_dim();
        let mut dy = Array2::<f64>::zeros((idx.nodes.len(), d));

        if use_ae {
            let local: Vec<usize> = bundle.rows.iter().map(|&v| idx.get(v)).collect();
            let y_rows = acts.last().unwrap().select(Axis(0), &local);
            let dec = decoder_forward(params, self.activation, y_rows.view());
            let (target, penalty) = self.r.penalty_rows(&bundle.rows, self.chi);
            let r_hat = dec.last().unwrap();
            losses.ae = reconstruction_loss(r_hat.view(), target.view(), penalty.view())?;
            // d/dR̂ of α·Σ((R̂−R)⊙B)² = 2α(R̂−R)⊙B²
            let mut g = r_hat - &target;
            Zip::from(&mut g)
                .and(&penalty)
                .for_each(|e, &p| *e *= 2.0 * w.ae * p * p);
            let k = params.decoder.len();
            for layer in (0..k).rev() {
                if layer + 1 < k {
                    let out = &dec[layer];
                    Zip::from(&mut g)
                        .and(out)
                        .for_each(|e, &a| *e *= self.activation.derivative_from_output(a));
                }
                let input = if layer == 0 { y_rows.view() } else { dec[layer - 1].view() };
                grads.decoder[layer].weight = par::matmul(input.t(), g.view());
                grads.decoder[layer].bias = g.sum_axis(Axis(0));
                g = par::matmul(g.view(), params.decoder[layer].weight.t());
            }
            for (row, &l) in g.outer_iter().zip(&local) {
                let mut target_row = dy.row_mut(l);
                target_row += &row;
            }
        }

        if use_fop {
            let y = acts.last().unwrap();
            let m = bundle.edges.len() as f64;
            let mut sum = 0.0;
            for &(u, v) in &bundle.edges {
                let (lu, lv) = (idx.get(u), idx.get(v));
                let s = y.row(lu).dot(&y.row(lv));
                sum += softplus(-s);
                // d/ds of softplus(−s)/m = −σ(−s)/m
                let coef = -w.fop * sigmoid(-s) / m;
                let (yu, yv) = (y.row(lu).to_owned(), y.row(lv).to_owned());
                dy.row_mut(lu).scaled_add(coef, &yv);
                dy.row_mut(lv).scaled_add(coef, &yu);
            }
            losses.fop = sum / m;
        }

        if use_sg {
            let y = acts.last().unwrap();
            let (loss, dy_sg, dctx) = skipgram_backward(
                y.view(),
                params.context.view(),
                &bundle.pairs,
                &bundle.negatives,
                bundle.neg_per_pair,
                &idx,
                w.sg,
            );
            losses.sg = loss;
            dy += &dy_sg;
            grads.context = dctx;
        }

        if !idx.nodes.is_empty() {
            let x = self.r.matrix().select(Axis(0), &idx.nodes);
            let mut g = dy;
            for layer in (0..params.encoder.len()).rev() {
                Zip::from(&mut g)
                    .and(&acts[layer])
                    .for_each(|e, &a| *e *= self.activation.derivative_from_output(a));
                let input = if layer == 0 { x.view() } else { acts[layer - 1].view() };
                grads.encoder[layer].weight = par::matmul(input.t(), g.view());
                grads.encoder[layer].bias = g.sum_axis(Axis(0));
                if layer > 0 {
                    g = par::matmul(g.view(), params.encoder[layer].weight.t());
                }
            }
        }

        if w.reg != 0.0 {
            losses.reg = regularizer(params);
            for (gl, pl) in grads
                .encoder
                .iter_mut()
                .chain(grads.decoder.iter_mut())
                .zip(params.encoder.iter().chain(&params.decoder))
            {
                gl.weight.scaled_add(w.reg, &pl.weight);
            }
        }

        if !losses.is_finite() {
            return Err(Error::Diverged(format!("non-finite loss {losses:?}")));
        }
        if grads.tensors().iter().any(|(_, _, t)| t.iter().any(|v| !v.is_finite())) {
            return Err(Error::Diverged("non-finite gradient".into()));
        }
        Ok((losses, grads))
    }
}

/// Skip-gram loss and gradients with respect to the batch embeddings and
/// the context matrix.
///
/// Pass one walks pairs grouped by center, so each center's embedding
/// gradient is owned by one task. Pass two groups the per-pair coefficients
/// by target row of the context matrix. Both passes sum in pair order, so
/// the result does not depend on the thread count.
fn skipgram_backward(
    y: ArrayView2<'_, f64>,
    context: ArrayView2<'_, f64>,
    pairs: &[(usize, usize)],
    negatives: &[usize],
    neg: usize,
    idx: &LocalIndex,
    weight: f64,
) -> (f64, Array2<f64>, Array2<f64>) {
    let stride = neg + 1;
    let n_local = idx.nodes.len();
    let d = y.ncols();

    let by_center = group_by(pairs.len(), n_local, |p| idx.get(pairs[p].0));
    let target = |slot: usize| {
        let p = slot / stride;
        match slot % stride {
            0 => pairs[p].1,
            t => negatives[p * neg + t - 1],
        }
    };

    struct CenterOut {
        loss: f64,
        grad: Array1<f64>,
        coefs: Vec<(usize, f64)>,
    }
    let per_center: Vec<CenterOut> = par::map_range(n_local, |c| {
        let yc = y.row(c);
        let mut out = CenterOut {
            loss: 0.0,
            grad: Array1::zeros(d),
            coefs: Vec::new(),
        };
        for &p in &by_center[c] {
            for t in 0..stride {
                let slot = p * stride + t;
                let h = context.row(target(slot));
                let s = h.dot(&yc);
                // positive: softplus(−s), d/ds = −σ(−s); negative: softplus(s), d/ds = σ(s)
                let (loss, coef) = if t == 0 {
                    (softplus(-s), -sigmoid(-s))
                } else {
                    (softplus(s), sigmoid(s))
                };
                out.loss += loss;
                out.grad.scaled_add(weight * coef, &h);
                out.coefs.push((slot, weight * coef));
            }
        }
        out
    });

    let mut loss = 0.0;
    let mut dy = Array2::zeros((n_local, d));
    let mut slot_coef = vec![0.0; pairs.len() * stride];
    for (c, out) in per_center.into_iter().enumerate() {
        loss += out.loss;
        dy.row_mut(c).assign(&out.grad);
        for (slot, coef) in out.coefs {
            slot_coef[slot] = coef;
        }
    }

    let n_ctx = context.nrows();
    let by_target = group_by(slot_coef.len(), n_ctx, target);
    let rows: Vec<Option<Array1<f64>>> = par::map_range(n_ctx, |t| {
        let slots = &by_target[t];
        if slots.is_empty() {
            return None;
        }
        let mut g = Array1::zeros(d);
        for &slot in slots {
            g.scaled_add(slot_coef[slot], &y.row(idx.get(pairs[slot / stride].0)));
        }
        Some(g)
    });
    let mut dctx = Array2::zeros((n_ctx, d));
    for (t, row) in rows.into_iter().enumerate() {
        if let Some(row) = row {
            dctx.row_mut(t).assign(&row);
        }
    }
    (loss, dy, dctx)
}

/// Bucket `0..len` by `key`, keeping index order inside each bucket.
fn group_by(len: usize, buckets: usize, key: impl Fn(usize) -> usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); buckets];
    for i in 0..len {
        out[key(i)].push(i);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::Dense;
    use ndarray::array;

    #[test]
    fn encode_examples() {
        let p = ModelParams::zeros(&[2, 3]).unwrap();
        let y = encode(&p, Activation::Tanh, array![0.4, 0.9].view()).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));

        let mut p = ModelParams::zeros(&[2, 1]).unwrap();
        p.encoder[0] = Dense {
            weight: array![[1.0], [1.0]],
            bias: array![0.0],
        };
        let y = encode(&p, Activation::Tanh, array![0.5, 0.5].view()).unwrap();
        assert_eq!(y[0], 1f64.tanh());
        assert!((y[0] - 0.7616).abs() < 1e-4);

        assert!(matches!(
            encode(&p, Activation::Tanh, array![1.0].view()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn encoder_output_is_bounded() {
        let p = ModelParams::init(&[6, 5, 3], 4).unwrap();
        let big = Array1::from_elem(6, 50.0);
        let y = encode(&p, Activation::Tanh, big.view()).unwrap();
        assert!(y.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn decode_examples() {
        let p = ModelParams::zeros(&[5, 3, 2]).unwrap();
        let out = decode(&p, Activation::Tanh, array![0.3, -0.2].view()).unwrap();
        assert_eq!(out, Array1::<f64>::zeros(5));
        let p = ModelParams::init(&[9, 4, 2], 1).unwrap();
        let out = decode(&p, Activation::Tanh, array![0.3, -0.2].view()).unwrap();
        assert_eq!(out.len(), 9);
        assert!(out.iter().all(|v| v.is_finite()));
        assert!(decode(&p, Activation::Tanh, array![0.3].view()).is_err());
    }

    #[test]
    fn table_architecture_shapes() {
        let p = ModelParams::zeros(&[3312, 1000, 500, 128]).unwrap();
        let out = decode(&p, Activation::Tanh, Array1::zeros(128).view()).unwrap();
        assert_eq!(out.len(), 3312);
    }

    #[test]
    fn first_order_examples() {
        let y = Array2::<f64>::zeros((2, 3));
        let l = first_order_loss(y.view(), &[(0, 1)]).unwrap();
        assert!((l - 2f64.ln()).abs() < 1e-15);
        let l2 = first_order_loss(y.view(), &[(0, 1), (0, 1)]).unwrap();
        assert_eq!(l, l2);
        let big = array![[30.0, 0.0], [30.0, 0.0]];
        assert!(first_order_loss(big.view(), &[(0, 1)]).unwrap() < 1e-300);
        assert!(first_order_loss(y.view(), &[]).is_err());
    }

    #[test]
    fn reconstruction_example() {
        let r = array![[1.0, 0.0]];
        let r_hat = array![[0.5, 0.2]];
        let b = r.mapv(|x| if x != 0.0 { 3.0 } else { 1.0 });
        let l = reconstruction_loss(r_hat.view(), r.view(), b.view()).unwrap();
        assert!((l - 2.29).abs() < 1e-12);
        assert_eq!(reconstruction_loss(r.view(), r.view(), b.view()).unwrap(), 0.0);
        let ones = Array2::ones((1, 2));
        let plain = reconstruction_loss(r_hat.view(), r.view(), ones.view()).unwrap();
        assert!((plain - (0.25 + 0.04)).abs() < 1e-15);
    }

    #[test]
    fn skipgram_examples() {
        let y = Array2::<f64>::zeros((1, 2));
        let h = Array2::<f64>::zeros((3, 2));
        let l = skipgram_loss(y.view(), h.view(), &[(0, 1)], &[2], 1).unwrap();
        assert!((l - 2.0 * 2f64.ln()).abs() < 1e-15);
        let l0 = skipgram_loss(y.view(), h.view(), &[(0, 1)], &[], 0).unwrap();
        assert!((l0 - 2f64.ln()).abs() < 1e-15);
        let y = array![[40.0]];
        let h = array![[0.0], [40.0], [-40.0]];
        assert!(skipgram_loss(y.view(), h.view(), &[(0, 1)], &[2], 1).unwrap() < 1e-300);
        assert!(skipgram_loss(y.view(), h.view(), &[], &[], 1).is_err());
    }

    #[test]
    fn regularizer_examples() {
        let mut p = ModelParams::zeros(&[2, 1]).unwrap();
        assert_eq!(regularizer(&p), 0.0);
        p.encoder[0].weight = array![[1.0], [1.0]];
        p.decoder[0].weight = array![[2.0, 0.0]];
        assert_eq!(regularizer(&p), 3.0);
        p.encoder[0].weight *= 2.0;
        p.decoder[0].weight *= 2.0;
        assert_eq!(regularizer(&p), 12.0);
    }
}
