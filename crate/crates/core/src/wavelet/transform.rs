use crate::error::{domain, Result};

fn check_len(len: usize) -> Result<()> {
    if len == 0 || !len.is_power_of_two() {
        return domain(format!("Haar transform needs a power-of-two length, got {len}"));
    }
    Ok(())
}

/// Orthonormal discrete Haar transform in O(D).
///
/// Output layout: the average coefficient first, then detail levels from the
/// coarsest (`h`, one coefficient) down to the finest (`1`, `D/2`
/// coefficients). Level `l` starts at offset `D / 2^l`, and coefficient `k`
/// of level `l` is `(C_left - C_right) / 2^{l/2}` over the node's halves.
pub fn haar_transform(vec: &[f64]) -> Result<Vec<f64>> {
    check_len(vec.len())?;
    let d = vec.len();
    let mut out = vec![0.0; d];
    let mut avg = vec.to_vec();
    let mut len = d;
    while len > 1 {
        let half = len / 2;
        for k in 0..half {
            let (x, y) = (avg[2 * k], avg[2 * k + 1]);
            out[half + k] = (x - y) * std::f64::consts::FRAC_1_SQRT_2;
            avg[k] = (x + y) * std::f64::consts::FRAC_1_SQRT_2;
        }
        len = half;
    }
    out[0] = avg[0];
    Ok(out)
}

/// Exact inverse of [`haar_transform`].
pub fn inverse_haar(coefficients: &[f64]) -> Result<Vec<f64>> {
    check_len(coefficients.len())?;
    let d = coefficients.len();
    let mut avg = vec![0.0; d];
    avg[0] = coefficients[0];
    let mut scratch = vec![0.0; d];
    let mut len = 1;
    while len < d {
        for k in 0..len {
            let (a, c) = (avg[k], coefficients[len + k]);
            scratch[2 * k] = (a + c) * std::f64::consts::FRAC_1_SQRT_2;
            scratch[2 * k + 1] = (a - c) * std::f64::consts::FRAC_1_SQRT_2;
        }
        len *= 2;
        avg[..len].copy_from_slice(&scratch[..len]);
    }
    Ok(avg)
}
