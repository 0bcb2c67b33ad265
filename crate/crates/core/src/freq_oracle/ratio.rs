//! Exact verification of the ε-LDP likelihood-ratio bound by enumerating a
//! channel's output space.

use super::{hadamard_entry, olh_hash, DomainSpec, PrivacySpec};
use crate::error::{domain, Error, Result};
use crate::wavelet::{signed_node, HaarLayout};

const MAX_OUE_DOMAIN: usize = 16;
const MAX_ENUM_DOMAIN: usize = 1 << 12;
/// Hash keys enumerated for OLH. The key is drawn independently of the
/// input, so its probability cancels in every ratio.
const OLH_KEYS: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    /// One-bit randomized response on a binary input.
    RandomizedResponse,
    Oue,
    /// The `g`-ary randomized response applied to hashed values.
    Olh,
    Hrr,
    /// Level-sampled HRR on signed Haar coefficients.
    Haar,
}

impl std::str::FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rr" | "rr1" => Ok(Channel::RandomizedResponse),
            "oue" => Ok(Channel::Oue),
            "olh" => Ok(Channel::Olh),
            "hrr" => Ok(Channel::Hrr),
            "haar" => Ok(Channel::Haar),
            other => domain(format!("unknown channel `{other}`")),
        }
    }
}

/// Largest `Pr[F(z) = O] / Pr[F(z') = O]` over all inputs `z, z'` and outputs
/// `O`. The binary randomized-response channel ignores `domain`.
pub fn ldp_ratio_check(channel: Channel, domain: DomainSpec, privacy: &PrivacySpec) -> Result<f64> {
    let log_ratio = match channel {
        Channel::RandomizedResponse => {
            let keep = privacy.keep_probability();
            max_log_spread(2, [0u8, 1].into_iter().map(|out| {
                move |z: usize| if z == out as usize { keep.ln() } else { (1.0 - keep).ln() }
            }))
        }
        Channel::Oue => {
            let d = domain.d();
            if d > MAX_OUE_DOMAIN {
                return Err(Error::Capacity(format!(
                    "OUE enumerates 2^D outputs; D = {d} exceeds {MAX_OUE_DOMAIN}"
                )));
            }
            let q = privacy.oue_flip_probability();
            let (log_half, log_q, log_not_q) = (0.5f64.ln(), q.ln(), (1.0 - q).ln());
            max_log_spread(
                d,
                (0u32..1 << d).map(|out| {
                    move |z: usize| {
                        (0..d)
                            .map(|j| {
                                let bit = out >> j & 1 == 1;
                                match (j == z, bit) {
                                    (true, _) => log_half,
                                    (false, true) => log_q,
                                    (false, false) => log_not_q,
                                }
                            })
                            .sum()
                    }
                }),
            )
        }
        Channel::Hrr => {
            let d = check_enumerable(domain.padded_d())?;
            let keep = privacy.keep_probability();
            let (log_keep, log_flip) = (keep.ln(), (1.0 - keep).ln());
            // Pr[index] = 1/D is common to every input and cancels.
            max_log_spread(
                d,
                (0..d).flat_map(|j| [1i8, -1].map(|b| (j, b))).map(|(j, b)| {
                    move |z: usize| if hadamard_entry(z, j) == b { log_keep } else { log_flip }
                }),
            )
        }
        Channel::Haar => {
            let layout = HaarLayout::covering(check_enumerable(domain.d())?)?;
            let keep = privacy.keep_probability();
            let (log_keep, log_flip) = (keep.ln(), (1.0 - keep).ln());
            // The level and index are drawn independently of the input, so
            // only the released bit's likelihood differs between inputs.
            max_log_spread(
                domain.d(),
                (1..=layout.height())
                    .flat_map(|l| (0..layout.level_size(l)).map(move |j| (l, j)))
                    .flat_map(|(l, j)| [1i8, -1].map(|b| (l, j, b)))
                    .map(|(l, j, b)| {
                        move |z: usize| {
                            let (node, sign) = signed_node(z, l);
                            if sign * hadamard_entry(node, j) == b {
                                log_keep
                            } else {
                                log_flip
                            }
                        }
                    }),
            )
        }
        Channel::Olh => {
            let d = check_enumerable(domain.d())?;
            let g = privacy.olh_range();
            let keep = privacy.olh_keep_probability();
            let (log_keep, log_other) = (keep.ln(), ((1.0 - keep) / (g - 1) as f64).ln());
            max_log_spread(
                d,
                (0..OLH_KEYS).flat_map(|key| (0..g).map(move |v| (key, v))).map(|(key, v)| {
                    move |z: usize| {
                        if olh_hash(key, z as u64, g) == v {
                            log_keep
                        } else {
                            log_other
                        }
                    }
                }),
            )
        }
    };
    Ok(log_ratio.exp())
}

fn check_enumerable(d: usize) -> Result<usize> {
    if d > MAX_ENUM_DOMAIN {
        Err(Error::Capacity(format!(
            "exact channel enumeration supports D <= {MAX_ENUM_DOMAIN}, got {d}"
        )))
    } else {
        Ok(d)
    }
}

/// For each output (given as `z ↦ log Pr[F(z) = O]`), the spread between the
/// most and least likely input; returns the maximum spread.
fn max_log_spread<F, I>(inputs: usize, outputs: I) -> f64
where
    F: Fn(usize) -> f64,
    I: Iterator<Item = F>,
{
    outputs
        .map(|log_prob| {
            let (lo, hi) = (0..inputs).map(&log_prob).fold(
                (f64::INFINITY, f64::NEG_INFINITY),
                |(lo, hi), v| (lo.min(v), hi.max(v)),
            );
            hi - lo
        })
        .fold(0.0, f64::max)
}
