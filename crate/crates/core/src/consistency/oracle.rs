use nalgebra::{DMatrix, DVector};

use super::ConsistentEstimates;
use crate::error::{Error, Result};
use crate::hierarchy::{NodeEstimates, TreeLayout};

/// Largest leaf count the dense solver accepts.
pub const ORACLE_MAX_LEAVES: usize = 4096;

fn check_size(layout: &TreeLayout) -> Result<()> {
    if layout.leaves() > ORACLE_MAX_LEAVES {
        return Err(Error::Capacity(format!(
            "dense least squares limited to {ORACLE_MAX_LEAVES} leaves, tree has {}",
            layout.leaves()
        )));
    }
    Ok(())
}

/// Rows are the observed nodes (the root first when observed, then levels
/// 1..h in order) written as 0/1 leaf indicators.
pub fn encoding_matrix(layout: &TreeLayout, root_observed: bool) -> Result<DMatrix<f64>> {
    check_size(layout)?;
    let first = if root_observed { 0 } else { 1 };
    let rows: usize = (first..=layout.height()).map(|l| layout.level_size(l)).sum();
    let mut h = DMatrix::zeros(rows, layout.leaves());
    let mut row = 0;
    for level in first..=layout.height() {
        for k in 0..layout.level_size(level) {
            let (lo, hi) = layout.node_span(level, k);
            for c in lo..=hi {
                h[(row, c)] = 1.0;
            }
            row += 1;
        }
    }
    Ok(h)
}

/// `HᵀH`, built directly: entry `(i, j)` counts the observed nodes that
/// contain both leaves.
pub fn normal_matrix(layout: &TreeLayout, root_observed: bool) -> Result<DMatrix<f64>> {
    check_size(layout)?;
    let n = layout.leaves();
    let first = if root_observed { 0 } else { 1 };
    Ok(DMatrix::from_fn(n, n, |i, j| {
        (first..=layout.height())
            .filter(|&l| layout.ancestor(i, l) == layout.ancestor(j, l))
            .count() as f64
    }))
}

/// Ordinary least squares `(HᵀH)⁻¹ Hᵀ x` over the leaves, solved densely, with
/// every internal node re-derived as the sum of its leaves.
pub fn least_squares_oracle(est: &NodeEstimates) -> Result<ConsistentEstimates> {
    let layout = *est.layout();
    let root_observed = est.root_observation().is_some();
    let gram = normal_matrix(&layout, root_observed)?;
    let h = layout.height();
    let rhs = DVector::from_fn(layout.leaves(), |i, _| {
        let mut s: f64 = (1..=h).map(|l| est.level(l)[layout.ancestor(i, l)]).sum();
        if let Some(root) = est.root_observation() {
            s += root;
        }
        s
    });
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::DegenerateEstimate("normal matrix is not positive definite".into()))?;
    let leaves = chol.solve(&rhs);
    let levels: Vec<Vec<f64>> = (1..=h)
        .map(|l| {
            (0..layout.level_size(l))
                .map(|k| {
                    let (lo, hi) = layout.node_span(l, k);
                    leaves.rows(lo, hi - lo + 1).sum()
                })
                .collect()
        })
        .collect();
    let root = levels[0].iter().sum();
    let mut out = NodeEstimates::new(layout, levels, est.level_counts().to_vec())?;
    if root_observed {
        out = out.with_root_observation(root);
    }
    Ok(ConsistentEstimates::from_parts(out, root))
}
