use rand::Rng;

use super::layout::walk_cover;
use super::TreeLayout;
use crate::error::{domain, Error, Result};
use crate::freq_oracle::{
    hrr_perturb, olh_perturb, oue_estimate_from_counts, oue_perturb, oue_simulate_counts,
    DomainSpec, FrequencyEstimate, HrrAccumulator, HrrReport, Mechanism, OlhAccumulator,
    OlhReport, OueAccumulator, OueReport, PrivacySpec,
};

/// A frequency-oracle report over one tree level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UserReport {
    Oue(OueReport),
    Olh(OlhReport),
    Hrr(HrrReport),
}

impl UserReport {
    pub fn mechanism(&self) -> Mechanism {
        match self {
            UserReport::Oue(_) => Mechanism::Oue,
            UserReport::Olh(_) => Mechanism::Olh,
            UserReport::Hrr(_) => Mechanism::Hrr,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelReport {
    pub level: usize,
    pub inner: UserReport,
}

/// Sample a level uniformly from `1..=h` and report the item's ancestor at
/// that level through `oracle`, over a domain of `B^level` nodes.
pub fn hh_encode_user<R: Rng + ?Sized>(
    item: usize,
    layout: &TreeLayout,
    privacy: &PrivacySpec,
    oracle: Mechanism,
    rng: &mut R,
) -> Result<LevelReport> {
    if item >= layout.domain() {
        return domain(format!("item {item} outside domain [0, {})", layout.domain()));
    }
    let level = rng.random_range(1..=layout.height());
    let node = layout.ancestor(item, level);
    let dom = DomainSpec::new(layout.level_size(level))?;
    let inner = match oracle {
        Mechanism::Oue => UserReport::Oue(oue_perturb(node, dom, privacy, rng)?),
        Mechanism::Olh => UserReport::Olh(olh_perturb(node, dom, privacy, rng)?),
        Mechanism::Hrr => UserReport::Hrr(hrr_perturb(node, dom, privacy, rng)?),
    };
    Ok(LevelReport { level, inner })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum LevelAccumulator {
    Oue(OueAccumulator),
    Olh(OlhAccumulator),
    Hrr(HrrAccumulator),
}

impl LevelAccumulator {
    fn new(oracle: Mechanism, nodes: usize, privacy: &PrivacySpec) -> Self {
        match oracle {
            Mechanism::Oue => LevelAccumulator::Oue(OueAccumulator::new(nodes)),
            Mechanism::Olh => LevelAccumulator::Olh(OlhAccumulator::new(nodes, privacy.olh_range())),
            Mechanism::Hrr => {
                LevelAccumulator::Hrr(HrrAccumulator::new(nodes.next_power_of_two()))
            }
        }
    }

    fn reports(&self) -> u64 {
        match self {
            LevelAccumulator::Oue(a) => a.reports(),
            LevelAccumulator::Olh(a) => a.reports(),
            LevelAccumulator::Hrr(a) => a.reports(),
        }
    }
}

/// Per-level oracle accumulators for the hierarchical histogram. Shards merge
/// exactly, since all state is integer counts.
#[derive(Debug, Clone, PartialEq)]
pub struct HhAccumulator {
    layout: TreeLayout,
    privacy: PrivacySpec,
    oracle: Mechanism,
    levels: Vec<LevelAccumulator>,
}

impl HhAccumulator {
    pub fn new(layout: TreeLayout, privacy: PrivacySpec, oracle: Mechanism) -> Self {
        let levels = (1..=layout.height())
            .map(|l| LevelAccumulator::new(oracle, layout.level_size(l), &privacy))
            .collect();
        Self { layout, privacy, oracle, levels }
    }

    pub fn add(&mut self, report: &LevelReport) -> Result<()> {
        self.layout.check_level(report.level)?;
        match (&mut self.levels[report.level - 1], &report.inner) {
            (LevelAccumulator::Oue(acc), UserReport::Oue(r)) => acc.add(r),
            (LevelAccumulator::Olh(acc), UserReport::Olh(r)) => acc.add(r),
            (LevelAccumulator::Hrr(acc), UserReport::Hrr(r)) => acc.add(r),
            (_, inner) => domain(format!(
                "{} report sent to a {} hierarchy",
                inner.mechanism().name(),
                self.oracle.name()
            )),
        }
    }

    pub fn merge(&mut self, other: &HhAccumulator) -> Result<()> {
        if other.layout != self.layout || other.oracle != self.oracle {
            return domain("cannot merge hierarchies with different layouts or oracles");
        }
        for (mine, theirs) in self.levels.iter_mut().zip(&other.levels) {
            match (mine, theirs) {
                (LevelAccumulator::Oue(a), LevelAccumulator::Oue(b)) => a.merge(b)?,
                (LevelAccumulator::Olh(a), LevelAccumulator::Olh(b)) => a.merge(b)?,
                (LevelAccumulator::Hrr(a), LevelAccumulator::Hrr(b)) => a.merge(b)?,
                _ => unreachable!("oracle equality checked above"),
            }
        }
        Ok(())
    }

    pub fn finalize(&self) -> Result<NodeEstimates> {
        let mut levels = Vec::with_capacity(self.levels.len());
        let mut counts = Vec::with_capacity(self.levels.len());
        for (i, acc) in self.levels.iter().enumerate() {
            let level = i + 1;
            if acc.reports() == 0 {
                return Err(Error::MissingLevel { level });
            }
            let nodes = self.layout.level_size(level);
            let est = match acc {
                LevelAccumulator::Oue(a) => a.finalize(&self.privacy)?,
                LevelAccumulator::Olh(a) => a.finalize(&self.privacy)?,
                LevelAccumulator::Hrr(a) => a.finalize(&self.privacy, DomainSpec::new(nodes)?)?,
            };
            counts.push(est.n_reports);
            levels.push(est.theta_hat);
        }
        NodeEstimates::new(self.layout, levels, counts)
    }
}

/// Aggregate level reports into per-node fraction estimates. The oracle is
/// taken from the first report; all reports must use the same one.
pub fn hh_aggregate(
    reports: &[LevelReport],
    layout: &TreeLayout,
    privacy: &PrivacySpec,
) -> Result<NodeEstimates> {
    let first = reports
        .first()
        .ok_or(Error::EmptyInput("hierarchical aggregation needs at least one report"))?;
    let mut acc = HhAccumulator::new(*layout, *privacy, first.inner.mechanism());
    for r in reports {
        acc.add(r)?;
    }
    acc.finalize()
}

/// Unbiased fraction estimates for every node on levels `1..=h`.
///
/// The root is never sampled; its true value is 1. A root observation can be
/// attached for generic constrained-inference use, see
/// [`NodeEstimates::with_root_observation`].
#[derive(Debug, Clone, PartialEq)]
pub struct NodeEstimates {
    layout: TreeLayout,
    levels: Vec<Vec<f64>>,
    level_counts: Vec<u64>,
    root: Option<f64>,
}

impl NodeEstimates {
    /// `levels[l - 1]` holds the `B^l` estimates of level `l`.
    pub fn new(layout: TreeLayout, levels: Vec<Vec<f64>>, level_counts: Vec<u64>) -> Result<Self> {
        if levels.len() != layout.height() || level_counts.len() != layout.height() {
            return domain(format!(
                "expected {} levels, got {} estimates and {} counts",
                layout.height(),
                levels.len(),
                level_counts.len()
            ));
        }
        for (i, values) in levels.iter().enumerate() {
            if values.len() != layout.level_size(i + 1) {
                return domain(format!(
                    "level {} has {} estimates, expected {}",
                    i + 1,
                    values.len(),
                    layout.level_size(i + 1)
                ));
            }
        }
        Ok(Self { layout, levels, level_counts, root: None })
    }

    /// Treat the root as an additional noisy observation with the same
    /// variance as every other node.
    pub fn with_root_observation(mut self, value: f64) -> Self {
        self.root = Some(value);
        self
    }

    pub fn layout(&self) -> &TreeLayout {
        &self.layout
    }

    pub fn level(&self, level: usize) -> &[f64] {
        &self.levels[level - 1]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn node(&self, level: usize, index: usize) -> f64 {
        if level == 0 {
            self.root_estimate()
        } else {
            self.levels[level - 1][index]
        }
    }

    pub fn root_observation(&self) -> Option<f64> {
        self.root
    }

    /// Observed root value, or the hardwired total of 1.
    pub fn root_estimate(&self) -> f64 {
        self.root.unwrap_or(1.0)
    }

    /// Reports received per level (`N_l`).
    pub fn level_counts(&self) -> &[u64] {
        &self.level_counts
    }

    pub fn total_reports(&self) -> u64 {
        self.level_counts.iter().sum()
    }
}

/// Sum of node estimates over the canonical `B`-adic cover of `[a, b]`.
pub fn hh_answer_range(est: &NodeEstimates, a: usize, b: usize) -> Result<f64> {
    est.layout.check_range(a, b)?;
    let mut total = 0.0;
    walk_cover(a, b, &est.layout, |level, index| total += est.levels[level - 1][index]);
    Ok(total)
}

/// Statistically exact shortcut for an OUE-backed hierarchy: split each
/// item's users across levels multinomially, then draw each level's
/// aggregated OUE counts with [`oue_simulate_counts`].
pub fn simulate_oue_hierarchy<R: Rng + ?Sized>(
    true_counts: &[u64],
    layout: &TreeLayout,
    privacy: &PrivacySpec,
    rng: &mut R,
) -> Result<NodeEstimates> {
    if true_counts.len() != layout.domain() {
        return domain(format!(
            "{} counts supplied for a domain of {}",
            true_counts.len(),
            layout.domain()
        ));
    }
    let h = layout.height();
    let mut node_counts: Vec<Vec<u64>> =
        (1..=h).map(|l| vec![0; layout.level_size(l)]).collect();
    for (item, &count) in true_counts.iter().enumerate() {
        let mut remaining = count;
        for level in 1..=h {
            if remaining == 0 {
                break;
            }
            let share = if level == h {
                remaining
            } else {
                crate::freq_oracle::binomial_draw(remaining, 1.0 / (h - level + 1) as f64, rng)
            };
            node_counts[level - 1][layout.ancestor(item, level)] += share;
            remaining -= share;
        }
    }
    let mut levels = Vec::with_capacity(h);
    let mut counts = Vec::with_capacity(h);
    for (i, truth) in node_counts.iter().enumerate() {
        let n_level: u64 = truth.iter().sum();
        if n_level == 0 {
            return Err(Error::MissingLevel { level: i + 1 });
        }
        let noisy = oue_simulate_counts(truth, privacy, rng);
        let FrequencyEstimate { theta_hat, n_reports } =
            oue_estimate_from_counts(&noisy, n_level, privacy)?;
        levels.push(theta_hat);
        counts.push(n_reports);
    }
    NodeEstimates::new(*layout, levels, counts)
}
