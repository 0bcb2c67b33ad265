//! Haar-wavelet range estimation: each user releases one HRR bit of one
//! level of their item's Haar coefficients.

mod estimate;
mod transform;

pub use estimate::{
    haar_aggregate, haar_answer_range, haar_encode_user, haar_range_weights, haar_variance_bound,
    HaarAccumulator, HaarEstimates, HaarLayout, HaarReport, RangeWeight,
};
pub(crate) use estimate::{encode_unchecked, signed_node};
pub use transform::{haar_transform, inverse_haar};
