use crate::error::{domain, Error, Result};

/// A full `B`-ary tree over `B^h` leaves. Level 0 is the root, level `h` the
/// leaves; level `l` holds `B^l` nodes. `domain` is the number of real items,
/// the remaining leaves are padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TreeLayout {
    branching: usize,
    height: usize,
    leaves: usize,
    domain: usize,
}

impl TreeLayout {
    pub fn new(branching: usize, height: usize) -> Result<Self> {
        if branching < 2 {
            return domain(format!("branching factor must be at least 2, got {branching}"));
        }
        if height == 0 {
            return domain("tree height must be at least 1");
        }
        let leaves = checked_pow(branching, height).ok_or_else(|| {
            Error::Capacity(format!("{branching}^{height} leaves overflow usize"))
        })?;
        Ok(Self { branching, height, leaves, domain: leaves })
    }

    /// Smallest tree (height at least 1) whose leaves cover `d` items.
    pub fn covering(d: usize, branching: usize) -> Result<Self> {
        if d == 0 {
            return domain("domain size must be at least 1");
        }
        if branching < 2 {
            return domain(format!("branching factor must be at least 2, got {branching}"));
        }
        let mut height = 1;
        let mut leaves = branching;
        while leaves < d {
            leaves = leaves
                .checked_mul(branching)
                .ok_or_else(|| Error::Capacity(format!("cannot cover {d} items")))?;
            height += 1;
        }
        Ok(Self { branching, height, leaves, domain: d })
    }

    pub fn branching(&self) -> usize {
        self.branching
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn leaves(&self) -> usize {
        self.leaves
    }

    /// Number of real (unpadded) items.
    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn level_size(&self, level: usize) -> usize {
        self.branching.pow(level as u32)
    }

    /// Leaves under one node at `level`.
    pub fn block_size(&self, level: usize) -> usize {
        self.branching.pow((self.height - level) as u32)
    }

    /// Inclusive leaf interval covered by a node.
    pub fn node_span(&self, level: usize, index: usize) -> (usize, usize) {
        let w = self.block_size(level);
        (index * w, (index + 1) * w - 1)
    }

    /// Index of the level-`level` ancestor of leaf `item`.
    pub fn ancestor(&self, item: usize, level: usize) -> usize {
        item / self.block_size(level)
    }

    pub fn total_nodes(&self) -> usize {
        (0..=self.height).map(|l| self.level_size(l)).sum()
    }

    pub(crate) fn check_level(&self, level: usize) -> Result<()> {
        if (1..=self.height).contains(&level) {
            Ok(())
        } else {
            domain(format!("level {level} outside [1, {}]", self.height))
        }
    }

    pub(crate) fn check_range(&self, a: usize, b: usize) -> Result<()> {
        if a > b {
            return domain(format!("empty range [{a}, {b}]"));
        }
        if b >= self.domain {
            return domain(format!("range [{a}, {b}] extends past domain size {}", self.domain));
        }
        Ok(())
    }
}

fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    (0..exp).try_fold(1usize, |acc, _| acc.checked_mul(base))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CoverNode {
    pub level: usize,
    pub index: usize,
}

/// Disjoint `B`-adic intervals whose union is a query range, in left-to-right
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BAdicCover {
    nodes: Vec<CoverNode>,
}

impl BAdicCover {
    pub fn nodes(&self) -> &[CoverNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn leaf_spans(&self, layout: &TreeLayout) -> Vec<(usize, usize)> {
        self.nodes.iter().map(|n| layout.node_span(n.level, n.index)).collect()
    }
}

/// Greedy canonical cover: from the left end, repeatedly take the largest
/// aligned block that fits. The root is never used, so the whole domain is
/// covered by the `B` level-1 nodes.
///
/// Ranges may extend into the padded leaves here; estimators restrict
/// queries to the real domain themselves.
pub fn b_adic_decompose(a: usize, b: usize, layout: &TreeLayout) -> Result<BAdicCover> {
    if a > b {
        return domain(format!("empty range [{a}, {b}]"));
    }
    if b >= layout.leaves() {
        return domain(format!("range [{a}, {b}] extends past {} leaves", layout.leaves()));
    }
    let mut nodes = Vec::new();
    walk_cover(a, b, layout, |level, index| nodes.push(CoverNode { level, index }));
    Ok(BAdicCover { nodes })
}

/// Visit the canonical cover of a valid `[a, b]` without allocating.
#[inline]
pub(crate) fn walk_cover(a: usize, b: usize, layout: &TreeLayout, mut visit: impl FnMut(usize, usize)) {
    let bf = layout.branching();
    let h = layout.height();
    let mut x = a;
    while x <= b {
        let mut j = 0;
        let mut size = 1;
        while j + 1 < h {
            let next = size * bf;
            if !x.is_multiple_of(next) || x + next - 1 > b {
                break;
            }
            size = next;
            j += 1;
        }
        visit(h - j, x / size);
        x += size;
    }
}
