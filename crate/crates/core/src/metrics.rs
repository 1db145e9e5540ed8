//! Edge-recovery confusion counts and the scores built on them.

use std::collections::BTreeSet;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Undirected edges as zero-based pairs `(i, j)` with `i < j`.
pub type EdgeSet = BTreeSet<(usize, usize)>;

/// Serializes an edge set as one-based `[i, j]` pairs, for use with
/// `#[serde(serialize_with = ...)]`.
pub fn serialize_one_based<S: Serializer>(
    edges: &EdgeSet,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(edges.len()))?;
    for &(i, j) in edges {
        seq.serialize_element(&[i + 1, j + 1])?;
    }
    seq.end()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

fn collect_pairs<'a>(
    edges: impl IntoIterator<Item = &'a (usize, usize)>,
    p: usize,
) -> Result<EdgeSet> {
    edges
        .into_iter()
        .map(|&(i, j)| {
            if i < j && j < p {
                Ok((i, j))
            } else {
                Err(Error::InvalidArgument(format!(
                    "edge ({i}, {j}) is not a pair i < j < {p}"
                )))
            }
        })
        .collect()
}

/// Confusion counts over the `p(p−1)/2` unordered pairs.
pub fn confusion<'a, 'b>(
    estimated: impl IntoIterator<Item = &'a (usize, usize)>,
    truth: impl IntoIterator<Item = &'b (usize, usize)>,
    p: usize,
) -> Result<ConfusionCounts> {
    let est = collect_pairs(estimated, p)?;
    let truth = collect_pairs(truth, p)?;
    let tp = est.intersection(&truth).count() as u64;
    let fp = est.len() as u64 - tp;
    let fn_ = truth.len() as u64 - tp;
    let pairs = (p * p.saturating_sub(1) / 2) as u64;
    Ok(ConfusionCounts {
        tp,
        tn: pairs - tp - fp - fn_,
        fp,
        fn_,
    })
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// `TP / (TP + FN)`, or 0 when there are no true edges.
pub fn sensitivity(c: &ConfusionCounts) -> f64 {
    ratio(c.tp, c.tp + c.fn_)
}

/// `TN / (TN + FP)`, or 0 when there are no true non-edges.
pub fn specificity(c: &ConfusionCounts) -> f64 {
    ratio(c.tn, c.tn + c.fp)
}

/// Matthews correlation coefficient; 0 when any margin is empty.
pub fn mcc(c: &ConfusionCounts) -> f64 {
    let (tp, tn, fp, fn_) = (c.tp as f64, c.tn as f64, c.fp as f64, c.fn_ as f64);
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    if factors.contains(&0.0) {
        return 0.0;
    }
    let den = ((factors[0] * factors[1]) * (factors[2] * factors[3])).sqrt();
    ((tp * tn - fp * fn_) / den).clamp(-1.0, 1.0)
}
