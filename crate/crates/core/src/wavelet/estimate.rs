use rand::Rng;

use super::inverse_haar;
use crate::error::{domain, Error, Result};
use crate::freq_oracle::{
    hrr_perturb_signed, variance_formula, HrrAccumulator, HrrReport, Mechanism, PrivacySpec,
};

/// Binary tree over `leaves = 2^h` slots, of which the first `domain` hold
/// real items.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HaarLayout {
    height: usize,
    leaves: usize,
    domain: usize,
}

impl HaarLayout {
    /// `d` must be a power of two, at least 2.
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 || !d.is_power_of_two() {
            return domain(format!("Haar layout needs a power of two >= 2, got {d}"));
        }
        Ok(Self { height: d.trailing_zeros() as usize, leaves: d, domain: d })
    }

    /// Pads `d` up to the next power of two (and at least 2).
    pub fn covering(d: usize) -> Result<Self> {
        if d == 0 {
            return domain("domain size must be at least 1");
        }
        let leaves = d.max(2).checked_next_power_of_two().ok_or_else(|| {
            Error::Capacity(format!("cannot pad {d} to a power of two"))
        })?;
        Ok(Self { height: leaves.trailing_zeros() as usize, leaves, domain: d })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn leaves(&self) -> usize {
        self.leaves
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    /// Detail coefficients on level `l`: `D / 2^l`.
    pub fn level_size(&self, level: usize) -> usize {
        self.leaves >> level
    }
}

/// Position and sign of the single nonzero level-`level` coefficient of a
/// one-hot input.
#[inline]
pub(crate) fn signed_node(item: usize, level: usize) -> (usize, i8) {
    let sign = if (item >> (level - 1)) & 1 == 0 { 1 } else { -1 };
    (item >> level, sign)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HaarReport {
    pub level: usize,
    pub inner: HrrReport,
}

/// Sample a level uniformly from `1..=h` and release one HRR bit of the
/// item's signed one-hot vector on that level.
pub fn haar_encode_user<R: Rng + ?Sized>(
    item: usize,
    layout: &HaarLayout,
    privacy: &PrivacySpec,
    rng: &mut R,
) -> Result<HaarReport> {
    if item >= layout.domain {
        return domain(format!("item {item} outside domain [0, {})", layout.domain));
    }
    Ok(encode_unchecked(item, layout, privacy.keep_probability(), rng))
}

#[inline]
pub(crate) fn encode_unchecked<R: Rng + ?Sized>(
    item: usize,
    layout: &HaarLayout,
    keep: f64,
    rng: &mut R,
) -> HaarReport {
    let level = rng.random_range(1..=layout.height);
    let (node, sign) = signed_node(item, level);
    let inner = hrr_perturb_signed(node, sign, layout.level_size(level), keep, rng);
    HaarReport { level, inner }
}

/// Mergeable per-level HRR sums.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarAccumulator {
    layout: HaarLayout,
    privacy: PrivacySpec,
    levels: Vec<HrrAccumulator>,
}

impl HaarAccumulator {
    pub fn new(layout: HaarLayout, privacy: PrivacySpec) -> Self {
        let levels = (1..=layout.height).map(|l| HrrAccumulator::new(layout.level_size(l))).collect();
        Self { layout, privacy, levels }
    }

    pub fn add(&mut self, report: &HaarReport) -> Result<()> {
        if !(1..=self.layout.height).contains(&report.level) {
            return domain(format!("level {} outside [1, {}]", report.level, self.layout.height));
        }
        self.levels[report.level - 1].add(&report.inner)
    }

    pub fn merge(&mut self, other: &HaarAccumulator) -> Result<()> {
        if other.layout != self.layout {
            return domain("cannot merge Haar accumulators with different layouts");
        }
        for (a, b) in self.levels.iter_mut().zip(&other.levels) {
            a.merge(b)?;
        }
        Ok(())
    }

    pub fn finalize(&self) -> Result<HaarEstimates> {
        let keep = self.privacy.keep_probability();
        let mut levels = Vec::with_capacity(self.layout.height);
        let mut counts = Vec::with_capacity(self.layout.height);
        for (i, acc) in self.levels.iter().enumerate() {
            let level = i + 1;
            if acc.reports() == 0 {
                return Err(Error::MissingLevel { level });
            }
            let scale = 0.5f64.powf(level as f64 / 2.0);
            let mut u = acc.decode(keep)?;
            u.iter_mut().for_each(|x| *x *= scale);
            levels.push(u);
            counts.push(acc.reports());
        }
        HaarEstimates::new(self.layout, levels, counts)
    }
}

pub fn haar_aggregate(
    reports: &[HaarReport],
    layout: &HaarLayout,
    privacy: &PrivacySpec,
) -> Result<HaarEstimates> {
    if reports.is_empty() {
        return Err(Error::EmptyInput("Haar aggregation needs at least one report"));
    }
    let mut acc = HaarAccumulator::new(*layout, *privacy);
    for r in reports {
        acc.add(r)?;
    }
    acc.finalize()
}

/// Orthonormal Haar coefficient estimates of the fraction histogram. The
/// average coefficient is fixed at `1/√D`.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarEstimates {
    layout: HaarLayout,
    c0: f64,
    levels: Vec<Vec<f64>>,
    level_counts: Vec<u64>,
}

impl HaarEstimates {
    /// `levels[l - 1]` holds the `D / 2^l` detail coefficients of level `l`.
    pub fn new(layout: HaarLayout, levels: Vec<Vec<f64>>, level_counts: Vec<u64>) -> Result<Self> {
        if levels.len() != layout.height || level_counts.len() != layout.height {
            return domain(format!("expected {} detail levels", layout.height));
        }
        for (i, v) in levels.iter().enumerate() {
            if v.len() != layout.level_size(i + 1) {
                return domain(format!(
                    "level {} has {} coefficients, expected {}",
                    i + 1,
                    v.len(),
                    layout.level_size(i + 1)
                ));
            }
        }
        let c0 = 1.0 / (layout.leaves as f64).sqrt();
        Ok(Self { layout, c0, levels, level_counts })
    }

    /// Build from a full coefficient vector in transform order; its first
    /// entry replaces the fixed average coefficient.
    pub fn from_coefficients(layout: HaarLayout, coefficients: &[f64]) -> Result<Self> {
        if coefficients.len() != layout.leaves {
            return domain(format!(
                "{} coefficients for {} leaves",
                coefficients.len(),
                layout.leaves
            ));
        }
        let levels = (1..=layout.height)
            .map(|l| {
                let n = layout.level_size(l);
                coefficients[n..2 * n].to_vec()
            })
            .collect();
        let mut est = Self::new(layout, levels, vec![0; layout.height])?;
        est.c0 = coefficients[0];
        Ok(est)
    }

    pub fn layout(&self) -> &HaarLayout {
        &self.layout
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn level(&self, level: usize) -> &[f64] {
        &self.levels[level - 1]
    }

    pub fn level_counts(&self) -> &[u64] {
        &self.level_counts
    }

    /// All coefficients in [`haar_transform`](super::haar_transform) order.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.layout.leaves];
        out[0] = self.c0;
        for l in 1..=self.layout.height {
            let n = self.layout.level_size(l);
            out[n..2 * n].copy_from_slice(&self.levels[l - 1]);
        }
        out
    }

    /// Estimated fraction histogram over all (padded) leaves.
    pub fn reconstruct(&self) -> Vec<f64> {
        inverse_haar(&self.coefficients()).expect("leaf count is a power of two")
    }
}

/// Contribution weight of one detail coefficient to a range sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeWeight {
    pub level: usize,
    pub index: usize,
    pub weight: f64,
}

/// Detail coefficients cut by `[a, b]` with their weights
/// `(O_left - O_right) / 2^{l/2}`, where `O_*` are the overlaps of the range
/// with the node's halves. Nodes inside or outside the range carry zero
/// weight and are omitted, leaving at most two per level.
pub fn haar_range_weights(layout: &HaarLayout, a: usize, b: usize) -> Result<Vec<RangeWeight>> {
    if a > b {
        return domain(format!("empty range [{a}, {b}]"));
    }
    if b >= layout.domain {
        return domain(format!("range [{a}, {b}] extends past domain size {}", layout.domain));
    }
    let overlap = |lo: usize, hi: usize| -> i64 {
        let (s, e) = (lo.max(a), hi.min(b));
        if s > e { 0 } else { (e - s + 1) as i64 }
    };
    let mut out = Vec::with_capacity(2 * layout.height);
    for level in 1..=layout.height {
        let width = 1usize << level;
        let half = width / 2;
        let scale = 0.5f64.powf(level as f64 / 2.0);
        let (ka, kb) = (a >> level, b >> level);
        for k in if ka == kb { vec![ka] } else { vec![ka, kb] } {
            let start = k * width;
            let diff = overlap(start, start + half - 1) - overlap(start + half, start + width - 1);
            if diff != 0 {
                out.push(RangeWeight { level, index: k, weight: diff as f64 * scale });
            }
        }
    }
    Ok(out)
}

/// Estimated fraction of users in `[a, b]`: `r c0 / √D` plus the weighted cut
/// coefficients.
pub fn haar_answer_range(est: &HaarEstimates, a: usize, b: usize) -> Result<f64> {
    let weights = haar_range_weights(&est.layout, a, b)?;
    let r = (b - a + 1) as f64;
    let mut total = r * est.c0 / (est.layout.leaves as f64).sqrt();
    for w in weights {
        total += w.weight * est.levels[w.level - 1][w.index];
    }
    Ok(total)
}

/// Range-independent variance bound `log₂²(D) V_F / 2`.
pub fn haar_variance_bound(d: usize, privacy: &PrivacySpec, n: u64) -> Result<f64> {
    let h = HaarLayout::covering(d)?.height() as f64;
    Ok(0.5 * h * h * variance_formula(Mechanism::Hrr, privacy, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::wavelet::haar_transform;

    #[test]
    fn layout_sizes() {
        let l = HaarLayout::new(64).unwrap();
        assert_eq!(l.height(), 6);
        assert_eq!((1..=6).map(|k| l.level_size(k)).sum::<usize>() + 1, 64);
        let p = HaarLayout::covering(100).unwrap();
        assert_eq!((p.leaves(), p.domain(), p.height()), (128, 100, 7));
        assert_eq!(HaarLayout::covering(1).unwrap().leaves(), 2);
        assert!(HaarLayout::new(12).is_err());
        assert!(HaarLayout::new(1).is_err());
    }

    #[test]
    fn signed_node_matches_transform() {
        let d = 32;
        for item in 0..d {
            let mut e = vec![0.0; d];
            e[item] = 1.0;
            let c = haar_transform(&e).unwrap();
            for level in 1..=5 {
                let (node, sign) = signed_node(item, level);
                let n = d >> level;
                let want = sign as f64 * 0.5f64.powf(level as f64 / 2.0);
                assert!((c[n + node] - want).abs() < 1e-12);
                let nonzero = c[n..2 * n].iter().filter(|x| x.abs() > 1e-12).count();
                assert_eq!(nonzero, 1);
            }
        }
    }

    #[test]
    fn two_item_domain_is_one_bit_rr() {
        let layout = HaarLayout::new(2).unwrap();
        let p = PrivacySpec::new(1.0).unwrap();
        let mut rng = stream(8);
        for item in 0..2 {
            let r = haar_encode_user(item, &layout, &p, &mut rng).unwrap();
            assert_eq!((r.level, r.inner.index()), (1, 0));
        }
    }

    #[test]
    fn noiseless_point_mass_is_recovered() {
        let layout = HaarLayout::new(64).unwrap();
        let p = PrivacySpec::new(60.0).unwrap();
        let mut rng = stream(9);
        let reports: Vec<_> =
            (0..20_000).map(|_| haar_encode_user(19, &layout, &p, &mut rng).unwrap()).collect();
        let est = haar_aggregate(&reports, &layout, &p).unwrap();
        let x = est.reconstruct();
        for (i, v) in x.iter().enumerate() {
            let want = if i == 19 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-9, "leaf {i}: {v}");
        }
    }

    #[test]
    fn range_weights_agree_with_inverse_transform() {
        let layout = HaarLayout::new(64).unwrap();
        let mut rng = stream(10);
        let coeffs: Vec<f64> = (0..64).map(|_| rand::Rng::random_range(&mut rng, -1.0..1.0)).collect();
        let est = HaarEstimates::from_coefficients(layout, &coeffs).unwrap();
        let x = est.reconstruct();
        for a in 0..64 {
            for b in a..64 {
                let want: f64 = x[a..=b].iter().sum();
                let got = haar_answer_range(&est, a, b).unwrap();
                assert!((got - want).abs() < 1e-9);
                let w = haar_range_weights(&layout, a, b).unwrap();
                assert!(w.len() <= 2 * layout.height());
                if a == 0 {
                    assert!(w.len() <= layout.height());
                }
            }
        }
        assert!(haar_range_weights(&layout, 0, 63).unwrap().is_empty());
    }

    #[test]
    fn padded_queries_are_refused() {
        let layout = HaarLayout::covering(10).unwrap();
        assert!(haar_range_weights(&layout, 0, 9).is_ok());
        assert!(haar_range_weights(&layout, 0, 10).is_err());
        assert!(haar_range_weights(&layout, 5, 4).is_err());
    }

    #[test]
    fn missing_level_error() {
        let layout = HaarLayout::new(8).unwrap();
        let p = PrivacySpec::new(1.0).unwrap();
        let r = HaarReport { level: 1, inner: HrrReport::new(0, 1).unwrap() };
        assert_eq!(haar_aggregate(&[r], &layout, &p), Err(Error::MissingLevel { level: 2 }));
    }

    #[test]
    fn variance_bound_plug_in() {
        let p = PrivacySpec::new(3f64.ln()).unwrap();
        let vf = variance_formula(Mechanism::Hrr, &p, 1 << 26).unwrap();
        assert!((vf - 3.0 / (1u64 << 26) as f64).abs() < 1e-20);
        assert!((haar_variance_bound(256, &p, 1 << 26).unwrap() - 32.0 * vf).abs() < 1e-18);
        assert!((haar_variance_bound(2, &p, 1 << 26).unwrap() - 0.5 * vf).abs() < 1e-20);
    }
}
