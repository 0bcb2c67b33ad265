use std::f64::consts::PI;

use rand::Rng;

use crate::error::{domain, Result};
use crate::freq_oracle::binomial_draw;

/// A population of `n` users whose items follow a Cauchy distribution
/// centred at `center · d` with scale `height`, truncated to `[0, d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataSpec {
    pub d: usize,
    pub center: f64,
    pub height: f64,
    pub n: u64,
}

impl DataSpec {
    /// Defaults: centre at `0.4 d`, scale `d / 10`.
    pub fn new(d: usize, n: u64) -> Self {
        Self { d, center: 0.4, height: d as f64 / 10.0, n }
    }

    pub fn with_center(mut self, center: f64) -> Self {
        self.center = center;
        self
    }

    pub fn with_height(mut self, height: f64) -> Self {
        self.height = height;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return domain("domain size must be at least 1");
        }
        if self.n == 0 {
            return domain("population must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.center) {
            return domain(format!("centre fraction {} outside [0, 1]", self.center));
        }
        if !(self.height >= 0.0 && self.height.is_finite()) {
            return domain(format!("Cauchy height must be finite and non-negative, got {}", self.height));
        }
        Ok(())
    }

    /// Probability that one accepted draw lands on each item: the Cauchy
    /// mass of `[i - 1/2, i + 1/2)`, renormalised over the domain.
    pub fn item_probabilities(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let loc = self.center * self.d as f64;
        if self.height == 0.0 {
            let mut p = vec![0.0; self.d];
            p[(loc.round() as usize).min(self.d - 1)] = 1.0;
            return Ok(p);
        }
        let cdf = |x: f64| ((x - loc) / self.height).atan() / PI;
        let mut p: Vec<f64> = (0..self.d)
            .map(|i| cdf(i as f64 + 0.5) - cdf(i as f64 - 0.5))
            .collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        Ok(p)
    }
}

/// Item counts for `spec.n` users: each draw is rounded to the nearest
/// integer and redrawn until it falls inside the domain. Sampled directly as
/// a multinomial over the truncated bin probabilities, which has the same
/// distribution.
pub fn sample_cauchy<R: Rng + ?Sized>(spec: &DataSpec, rng: &mut R) -> Result<Vec<u64>> {
    let probs = spec.item_probabilities()?;
    let mut counts = vec![0u64; spec.d];
    let mut remaining = spec.n;
    let mut mass_left = 1.0;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let share = if i + 1 == probs.len() || p >= mass_left {
            remaining
        } else {
            binomial_draw(remaining, (p / mass_left).clamp(0.0, 1.0), rng)
        };
        counts[i] = share;
        remaining -= share;
        mass_left -= p;
    }
    Ok(counts)
}
