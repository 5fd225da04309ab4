//! Ranking and classification metrics.

use std::collections::BTreeSet;

use ndarray::ArrayView1;

use crate::error::{Error, Result};

/// Cosine similarity of two embeddings; 0 when either is the zero vector.
pub fn cosine(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    let na = a.dot(&a).sqrt();
    let nb = b.dot(&b).sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        a.dot(&b) / (na * nb)
    }
}

/// Probability that a random positive scores above a random negative,
/// ties counted as one half, from the Mann–Whitney rank sum.
pub fn auc(pos: &[f64], neg: &[f64]) -> Result<f64> {
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::Empty("AUC needs positive and negative scores".into()));
    }
    if pos.iter().chain(neg).any(|s| s.is_nan()) {
        return Err(Error::InvalidParameter("NaN score".into()));
    }
    let mut all: Vec<(f64, bool)> = pos
        .iter()
        .map(|&s| (s, true))
        .chain(neg.iter().map(|&s| (s, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Sum of 1-based ranks of positives, ties sharing their average rank.
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < all.len() {
        let mut j = i;
        while j + 1 < all.len() && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        let n_pos = all[i..=j].iter().filter(|e| e.1).count();
        rank_sum += avg * n_pos as f64;
        i = j + 1;
    }
    let (p, q) = (pos.len() as f64, neg.len() as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * q))
}

fn check_lengths(pred: &[usize], truth: &[usize]) -> Result<()> {
    if pred.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            pred.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Empty("F1 needs at least one label".into()));
    }
    Ok(())
}

/// Micro-averaged F1. With exactly one label per sample this is accuracy.
pub fn micro_f1(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth)?;
    // Every miss is one false positive and one false negative.
    let tp = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    let miss = truth.len() - tp;
    Ok(2.0 * tp as f64 / (2 * tp + 2 * miss) as f64)
}

fn class_f1(pred: &[usize], truth: &[usize], class: usize) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&p, &t) in pred.iter().zip(truth) {
        match (p == class, t == class) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            _ => {}
        }
    }
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

/// Macro-averaged F1 over the classes that occur in `pred` or `truth`.
pub fn macro_f1(pred: &[usize], truth: &[usize]) -> Result<f64> {
    check_lengths(pred, truth)?;
    let classes: BTreeSet<usize> = pred.iter().chain(truth).copied().collect();
    Ok(classes.iter().map(|&c| class_f1(pred, truth, c)).sum::<f64>() / classes.len() as f64)
}

/// Macro-averaged F1 over the label universe `0..n_classes`; classes that
/// never occur contribute 0.
pub fn macro_f1_over(pred: &[usize], truth: &[usize], n_classes: usize) -> Result<f64> {
    check_lengths(pred, truth)?;
    if let Some(&c) = pred.iter().chain(truth).find(|&&c| c >= n_classes) {
        return Err(Error::InvalidParameter(format!(
            "class {c} outside universe of {n_classes}"
        )));
    }
    Ok((0..n_classes).map(|c| class_f1(pred, truth, c)).sum::<f64>() / n_classes as f64)
}
