use crate::error::{domain, Result};
use crate::query::RangeQuery;

/// Largest domain evaluated exhaustively by default.
pub const EXHAUSTIVE_LIMIT: usize = 1 << 16;

/// Range queries `[a, b]` for every start `a ∈ {0, s, 2s, ...}` below `d`
/// and every end `b ∈ [a, d)`. A stride of 1 gives all `d(d+1)/2` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuerySet {
    d: usize,
    stride: usize,
}

impl QuerySet {
    /// Exhaustive up to [`EXHAUSTIVE_LIMIT`] items, otherwise 32 evenly
    /// spaced starts.
    pub fn default_for(d: usize) -> Result<Self> {
        let stride = if d <= EXHAUSTIVE_LIMIT { 1 } else { d.div_ceil(32) };
        build_query_set(d, stride)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn is_exhaustive(&self) -> bool {
        self.stride == 1
    }

    pub fn starts(&self) -> impl Iterator<Item = usize> {
        (0..self.d).step_by(self.stride)
    }

    pub fn len(&self) -> u64 {
        self.starts().map(|a| (self.d - a) as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = RangeQuery> + '_ {
        self.starts().flat_map(move |a| (a..self.d).map(move |b| RangeQuery { a, b }))
    }

    /// Number of queries of each length `r`, indexed by `r`.
    pub fn length_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.d + 1];
        for a in self.starts() {
            for c in counts.iter_mut().take(self.d - a + 1).skip(1) {
                *c += 1;
            }
        }
        counts
    }
}

pub fn build_query_set(d: usize, stride: usize) -> Result<QuerySet> {
    if d == 0 {
        return domain("query set needs a non-empty domain");
    }
    if stride == 0 {
        return domain("query stride must be at least 1");
    }
    Ok(QuerySet { d, stride })
}

/// Squared-error totals per range length.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LengthErrors {
    pub sse: Vec<f64>,
    pub count: Vec<u64>,
}

impl LengthErrors {
    /// Evaluate every query from prefix errors: `prefix_err[k]` is the error
    /// of the estimate of `[0, k)`, so `[a, b]` has error
    /// `prefix_err[b + 1] - prefix_err[a]`.
    pub fn from_prefix_errors(set: &QuerySet, prefix_err: &[f64]) -> Self {
        debug_assert_eq!(prefix_err.len(), set.d + 1);
        let mut sse = vec![0.0; set.d + 1];
        let mut count = vec![0u64; set.d + 1];
        for a in set.starts() {
            let base = prefix_err[a];
            for (r, &e) in prefix_err[a + 1..].iter().enumerate() {
                let err = e - base;
                sse[r + 1] += err * err;
                count[r + 1] += 1;
            }
        }
        Self { sse, count }
    }

    /// Evaluate with an arbitrary per-query error function.
    pub fn from_fn(set: &QuerySet, mut error: impl FnMut(usize, usize) -> f64) -> Self {
        let mut sse = vec![0.0; set.d + 1];
        let mut count = vec![0u64; set.d + 1];
        for q in set.iter() {
            let err = error(q.a, q.b);
            sse[q.len()] += err * err;
            count[q.len()] += 1;
        }
        Self { sse, count }
    }

    pub fn overall(&self) -> f64 {
        self.sse.iter().sum::<f64>() / self.count.iter().sum::<u64>() as f64
    }
}
