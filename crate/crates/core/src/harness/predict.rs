use crate::consistency::post_ci_variance_bound;
use crate::error::Result;
use crate::freq_oracle::{variance_formula, Mechanism, PrivacySpec};
use crate::hierarchy::{hh_avg_error_bound, hh_variance_bound};
use crate::wavelet::haar_variance_bound;

/// Closed-form variances for one range length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictorRow {
    pub r: usize,
    /// `r V_F`, exact for the flat method.
    pub flat: f64,
    /// Worst case for the raw hierarchy.
    pub hh: f64,
    /// Leading-order value after consistency enforcement.
    pub hh_consistent: f64,
    /// Range-independent worst case for the Haar method.
    pub haar: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredictorTable {
    pub d: usize,
    pub branching: usize,
    pub vf: f64,
    /// `(D + 2) V_F / 3`.
    pub flat_average: f64,
    pub hh_average: f64,
    pub rows: Vec<PredictorRow>,
}

/// Predictors at `r = 1, 2, 4, ...` and `r = d`.
pub fn predictor_table(d: usize, b: usize, privacy: &PrivacySpec, n: u64) -> Result<PredictorTable> {
    let vf = variance_formula(Mechanism::Oue, privacy, n)?;
    let mut lengths: Vec<usize> = std::iter::successors(Some(1usize), |r| r.checked_mul(2))
        .take_while(|&r| r < d)
        .collect();
    lengths.push(d);
    let haar = haar_variance_bound(d, privacy, n)?;
    let rows = lengths
        .into_iter()
        .map(|r| {
            Ok(PredictorRow {
                r,
                flat: r as f64 * vf,
                hh: hh_variance_bound(b, r, d, privacy, n)?,
                hh_consistent: post_ci_variance_bound(b, r, d, privacy, n)?,
                haar,
            })
        })
        .collect::<Result<_>>()?;
    Ok(PredictorTable {
        d,
        branching: b,
        vf,
        flat_average: (d as f64 + 2.0) * vf / 3.0,
        hh_average: if d >= 2 { hh_avg_error_bound(b, d, privacy, n)? } else { vf },
        rows,
    })
}

/// Range length beyond which a `B`-ary hierarchy beats the flat method,
/// `2B log_B² D`.
pub fn flat_hh_crossover(b: usize, d: usize) -> f64 {
    let l = (d as f64).ln() / (b as f64).ln();
    2.0 * b as f64 * l * l
}
