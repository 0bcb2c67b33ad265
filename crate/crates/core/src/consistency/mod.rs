//! Constrained inference for hierarchical histograms: the least-squares
//! projection of noisy node estimates onto the space of trees where every
//! parent equals the sum of its children.

mod oracle;

pub use oracle::{encoding_matrix, least_squares_oracle, normal_matrix, ORACLE_MAX_LEAVES};

use crate::error::Result;
use crate::freq_oracle::{variance_formula, Mechanism, PrivacySpec};
use crate::hierarchy::{optimal_branching_shifted, NodeEstimates, TreeLayout};

/// Stage-one output: each node's estimate blended with the sum of its
/// children's blended estimates, bottom-up.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEstimates {
    estimates: NodeEstimates,
    root: f64,
}

impl WeightedEstimates {
    pub fn layout(&self) -> &TreeLayout {
        self.estimates.layout()
    }

    pub fn level(&self, level: usize) -> &[f64] {
        self.estimates.level(level)
    }

    pub fn root(&self) -> f64 {
        self.root
    }
}

/// Sum-consistent node estimates. Wraps a [`NodeEstimates`] so that every
/// range evaluator accepting raw estimates also accepts these.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistentEstimates {
    estimates: NodeEstimates,
    root: f64,
}

impl ConsistentEstimates {
    pub fn layout(&self) -> &TreeLayout {
        self.estimates.layout()
    }

    pub fn level(&self, level: usize) -> &[f64] {
        self.estimates.level(level)
    }

    pub fn leaves(&self) -> &[f64] {
        self.estimates.level(self.layout().height())
    }

    pub fn root(&self) -> f64 {
        self.root
    }

    pub fn node(&self, level: usize, index: usize) -> f64 {
        if level == 0 {
            self.root
        } else {
            self.estimates.level(level)[index]
        }
    }

    pub fn as_node_estimates(&self) -> &NodeEstimates {
        &self.estimates
    }

    /// Largest `|parent - Σ children|` over all internal nodes, root included.
    pub fn max_violation(&self) -> f64 {
        let layout = *self.layout();
        let b = layout.branching();
        let mut worst = (self.root - self.level(1).iter().sum::<f64>()).abs();
        for level in 1..layout.height() {
            let children = self.level(level + 1);
            for (k, &parent) in self.level(level).iter().enumerate() {
                let s: f64 = children[k * b..(k + 1) * b].iter().sum();
                worst = worst.max((parent - s).abs());
            }
        }
        worst
    }

    pub(crate) fn from_parts(estimates: NodeEstimates, root: f64) -> Self {
        Self { estimates, root }
    }
}

fn blend_weights(b: usize, height: usize) -> (f64, f64) {
    let bi = (b as f64).powi(height as i32);
    let bi1 = (b as f64).powi(height as i32 - 1);
    ((bi - bi1) / (bi - 1.0), (bi1 - 1.0) / (bi - 1.0))
}

/// Stage one. Leaves sit at height 1 and keep their values; a node at
/// height `i` becomes `(B^i - B^{i-1})/(B^i - 1) f(v) + (B^{i-1} - 1)/(B^i - 1) Σ f̄(children)`.
///
/// The root takes the same blend when it carries an observation; otherwise it
/// is simply the sum of the level-one values.
pub fn weighted_average(est: &NodeEstimates) -> WeightedEstimates {
    let layout = *est.layout();
    let b = layout.branching();
    let h = layout.height();
    let mut levels: Vec<Vec<f64>> = est.levels().to_vec();
    for level in (1..h).rev() {
        let (w_self, w_children) = blend_weights(b, h - level + 1);
        let (upper, lower) = levels.split_at_mut(level);
        let children = &lower[0];
        for (k, v) in upper[level - 1].iter_mut().enumerate() {
            let s: f64 = children[k * b..(k + 1) * b].iter().sum();
            *v = w_self * *v + w_children * s;
        }
    }
    let top: f64 = levels[0].iter().sum();
    let root = match est.root_observation() {
        Some(obs) => {
            let (w_self, w_children) = blend_weights(b, h + 1);
            w_self * obs + w_children * top
        }
        None => top,
    };
    let estimates = NodeEstimates::new(layout, levels, est.level_counts().to_vec())
        .expect("shape preserved from a valid NodeEstimates");
    WeightedEstimates { estimates, root }
}

/// Stage two, top-down: the root keeps its stage-one value and every other
/// node absorbs an equal `1/B` share of the gap between its parent's final
/// value and the stage-one sum of the parent's children.
pub fn mean_consistency(fbar: &WeightedEstimates) -> ConsistentEstimates {
    let layout = *fbar.layout();
    let b = layout.branching();
    let h = layout.height();
    let mut levels: Vec<Vec<f64>> = fbar.estimates.levels().to_vec();
    let root = fbar.root;
    let share = 1.0 / b as f64;

    let gap = root - levels[0].iter().sum::<f64>();
    for v in levels[0].iter_mut() {
        *v += share * gap;
    }
    for level in 1..h {
        let (upper, lower) = levels.split_at_mut(level);
        let parents = &upper[level - 1];
        let children = &mut lower[0];
        for (k, &parent) in parents.iter().enumerate() {
            let block = &mut children[k * b..(k + 1) * b];
            let gap = parent - block.iter().sum::<f64>();
            for v in block.iter_mut() {
                *v += share * gap;
            }
        }
    }
    let mut estimates = NodeEstimates::new(layout, levels, fbar.estimates.level_counts().to_vec())
        .expect("shape preserved from a valid NodeEstimates");
    if fbar.estimates.root_observation().is_some() {
        estimates = estimates.with_root_observation(root);
    }
    ConsistentEstimates::from_parts(estimates, root)
}

/// Both stages. Linear in the number of nodes.
pub fn enforce(est: &NodeEstimates) -> Result<ConsistentEstimates> {
    let mut fbar = weighted_average(est);
    if est.root_observation().is_some() {
        fbar.estimates = fbar.estimates.with_root_observation(fbar.root);
    }
    Ok(mean_consistency(&fbar))
}

/// `(B + 1) V_F log_B r log_B D / 2`, the leading-order variance of a
/// length-`r` range query after consistency enforcement.
pub fn post_ci_variance_bound(b: usize, r: usize, d: usize, privacy: &PrivacySpec, n: u64) -> Result<f64> {
    if b < 2 {
        return crate::error::domain(format!("branching factor must be at least 2, got {b}"));
    }
    let vf = variance_formula(Mechanism::Oue, privacy, n)?;
    let lb = (b as f64).ln();
    Ok((b + 1) as f64 * vf * (r as f64).ln() / lb * (d as f64).ln() / lb / 2.0)
}

/// Real-valued branching factor minimising the post-enforcement bound,
/// about 9.18.
pub fn optimal_branching_consistent() -> f64 {
    optimal_branching_shifted(1.0)
}
