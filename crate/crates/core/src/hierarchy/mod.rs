//! `B`-ary hierarchical histograms: tree layout, range decomposition,
//! level-sampled encoding and per-level aggregation.

mod bounds;
mod histogram;
mod layout;

pub use bounds::{ceil_log, hh_avg_error_bound, hh_variance_bound, optimal_branching_raw};
pub(crate) use bounds::optimal_branching_shifted;
pub use histogram::{
    hh_aggregate, hh_answer_range, hh_encode_user, simulate_oue_hierarchy, HhAccumulator,
    LevelReport, NodeEstimates, UserReport,
};
pub use layout::{b_adic_decompose, BAdicCover, CoverNode, TreeLayout};
pub(crate) use layout::walk_cover;
