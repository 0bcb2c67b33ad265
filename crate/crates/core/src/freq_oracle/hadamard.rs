use crate::error::{domain, Result};

/// Unnormalized Walsh–Hadamard entry `(-1)^popcount(i & j)`.
#[inline]
pub fn hadamard_entry(i: usize, j: usize) -> i8 {
    if (i & j).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// In-place unnormalized transform. `data.len()` must be a power of two.
pub(crate) fn fwht_in_place(data: &mut [f64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut half = 1;
    while half < n {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
}

/// Multiply by the unnormalized Hadamard matrix in `O(D log D)`.
///
/// The matrix squares to `D·I`, so `inverse` divides the result by `D`.
pub fn fast_walsh_hadamard(vec: &[f64], inverse: bool) -> Result<Vec<f64>> {
    if !vec.len().is_power_of_two() {
        return domain(format!("Hadamard transform length {} is not a power of two", vec.len()));
    }
    let mut out = vec.to_vec();
    fwht_in_place(&mut out);
    if inverse {
        let scale = 1.0 / vec.len() as f64;
        out.iter_mut().for_each(|x| *x *= scale);
    }
    Ok(out)
}
