use super::TreeLayout;
use crate::error::{domain, Result};
use crate::freq_oracle::{variance_formula, Mechanism, PrivacySpec};

/// `⌈log_B r⌉` computed exactly in integers.
pub fn ceil_log(b: usize, r: usize) -> usize {
    let mut k = 0;
    let mut span = 1usize;
    while span < r {
        span = span.saturating_mul(b);
        k += 1;
    }
    k
}

fn check_length(r: usize, d: usize) -> Result<()> {
    if r == 0 || r > d {
        return domain(format!("range length {r} outside [1, {d}]"));
    }
    Ok(())
}

/// Worst-case variance of a length-`r` range query answered from a raw
/// `B`-ary hierarchy with uniform level sampling:
/// `(2B - 1) V_F h (⌈log_B r⌉ + 1)`.
pub fn hh_variance_bound(b: usize, r: usize, d: usize, privacy: &PrivacySpec, n: u64) -> Result<f64> {
    check_length(r, d)?;
    let h = TreeLayout::covering(d, b)?.height();
    let vf = variance_formula(Mechanism::Oue, privacy, n)?;
    Ok((2 * b - 1) as f64 * vf * h as f64 * (ceil_log(b, r) + 1) as f64)
}

/// Worst-case average squared error over all range queries of a raw
/// hierarchy: `2(B - 1) V_F log_B D log_B(3D² / (1 + 2D))`.
pub fn hh_avg_error_bound(b: usize, d: usize, privacy: &PrivacySpec, n: u64) -> Result<f64> {
    if d < 2 {
        return domain("average error bound needs at least two items");
    }
    if b < 2 {
        return domain(format!("branching factor must be at least 2, got {b}"));
    }
    let vf = variance_formula(Mechanism::Oue, privacy, n)?;
    let lb = (b as f64).ln();
    let df = d as f64;
    let log_d = df.ln() / lb;
    let log_r = (3.0 * df * df / (1.0 + 2.0 * df)).ln() / lb;
    Ok(2.0 * (b - 1) as f64 * vf * log_d * log_r)
}

/// Minimise `(B + shift) / ln² B` over `B > 1` by bisection on the
/// stationarity condition `B ln B = 2 (B + shift)`.
pub(crate) fn optimal_branching_shifted(shift: f64) -> f64 {
    let g = |b: f64| b * b.ln() - 2.0 * (b + shift);
    let (mut lo, mut hi) = (1.5f64, 64.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Real-valued branching factor minimising the raw hierarchy's variance
/// bound, about 4.922.
pub fn optimal_branching_raw() -> f64 {
    optimal_branching_shifted(-1.0)
}
