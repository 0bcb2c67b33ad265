use rand::Rng;

use super::{MethodKind, MethodSpec};
use crate::consistency::enforce;
use crate::error::{Error, Result};
use crate::freq_oracle::{
    hrr_perturb, olh_perturb, oue_estimate_from_counts, oue_perturb, oue_simulate_counts,
    DomainSpec, FrequencyEstimate, HrrAccumulator, Mechanism, OlhAccumulator, OueAccumulator,
    PrivacySpec,
};
use crate::hierarchy::{hh_encode_user, simulate_oue_hierarchy, HhAccumulator, NodeEstimates, TreeLayout};
use crate::query::Estimator;
use crate::wavelet::{encode_unchecked, HaarAccumulator, HaarEstimates, HaarLayout};

/// Largest domain an OLH aggregator will decode: each report costs `O(D)`.
pub const OLH_MAX_DOMAIN: usize = 1 << 16;

/// How user reports are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Simulation {
    /// Draw OUE aggregates directly from binomials; other oracles fall back
    /// to per-user simulation.
    #[default]
    Fast,
    /// Perturb every user individually.
    PerUser,
}

fn check_olh(oracle: Mechanism, leaves: usize) -> Result<()> {
    if oracle == Mechanism::Olh && leaves > OLH_MAX_DOMAIN {
        return Err(Error::Capacity(format!(
            "OLH decoding is limited to D <= {OLH_MAX_DOMAIN}, requested {leaves}"
        )));
    }
    Ok(())
}

fn population(counts: &[u64]) -> Result<u64> {
    match counts.iter().sum() {
        0 => Err(Error::EmptyInput("simulation needs at least one user")),
        n => Ok(n),
    }
}

/// Users in item order; the order is irrelevant since users are independent.
fn users(counts: &[u64]) -> impl Iterator<Item = usize> + '_ {
    counts
        .iter()
        .enumerate()
        .flat_map(|(item, &c)| std::iter::repeat_n(item, c as usize))
}

pub fn simulate_flat<R: Rng + ?Sized>(
    counts: &[u64],
    oracle: Mechanism,
    privacy: &PrivacySpec,
    simulation: Simulation,
    rng: &mut R,
) -> Result<FrequencyEstimate> {
    let n = population(counts)?;
    let dom = DomainSpec::new(counts.len())?;
    check_olh(oracle, counts.len())?;
    match (oracle, simulation) {
        (Mechanism::Oue, Simulation::Fast) => {
            let noisy = oue_simulate_counts(counts, privacy, rng);
            oue_estimate_from_counts(&noisy, n, privacy)
        }
        (Mechanism::Oue, Simulation::PerUser) => {
            let mut acc = OueAccumulator::new(dom.d());
            for item in users(counts) {
                acc.add(&oue_perturb(item, dom, privacy, rng)?)?;
            }
            acc.finalize(privacy)
        }
        (Mechanism::Olh, _) => {
            let mut acc = OlhAccumulator::new(dom.d(), privacy.olh_range());
            for item in users(counts) {
                acc.add(&olh_perturb(item, dom, privacy, rng)?)?;
            }
            acc.finalize(privacy)
        }
        (Mechanism::Hrr, _) => {
            let mut acc = HrrAccumulator::new(dom.padded_d());
            for item in users(counts) {
                acc.add(&hrr_perturb(item, dom, privacy, rng)?)?;
            }
            acc.finalize(privacy, dom)
        }
    }
}

pub fn simulate_hierarchy<R: Rng + ?Sized>(
    counts: &[u64],
    layout: &TreeLayout,
    oracle: Mechanism,
    privacy: &PrivacySpec,
    simulation: Simulation,
    rng: &mut R,
) -> Result<NodeEstimates> {
    population(counts)?;
    check_olh(oracle, layout.leaves())?;
    if oracle == Mechanism::Oue && simulation == Simulation::Fast {
        return simulate_oue_hierarchy(counts, layout, privacy, rng);
    }
    let mut acc = HhAccumulator::new(*layout, *privacy, oracle);
    for item in users(counts) {
        acc.add(&hh_encode_user(item, layout, privacy, oracle, rng)?)?;
    }
    acc.finalize()
}

pub fn simulate_haar<R: Rng + ?Sized>(
    counts: &[u64],
    layout: &HaarLayout,
    privacy: &PrivacySpec,
    rng: &mut R,
) -> Result<HaarEstimates> {
    population(counts)?;
    if counts.len() != layout.domain() {
        return crate::error::domain(format!(
            "{} counts supplied for a domain of {}",
            counts.len(),
            layout.domain()
        ));
    }
    let keep = privacy.keep_probability();
    let mut acc = HaarAccumulator::new(*layout, *privacy);
    for item in users(counts) {
        acc.add(&encode_unchecked(item, layout, keep, rng))?;
    }
    acc.finalize()
}

/// Run one method end to end on the true item counts.
pub fn simulate_method<R: Rng + ?Sized>(
    method: &MethodSpec,
    counts: &[u64],
    privacy: &PrivacySpec,
    simulation: Simulation,
    rng: &mut R,
) -> Result<Estimator> {
    let d = counts.len();
    Ok(match method.kind {
        MethodKind::Flat => {
            Estimator::Flat(simulate_flat(counts, method.oracle, privacy, simulation, rng)?)
        }
        MethodKind::Hierarchical { branching } => {
            let layout = TreeLayout::covering(d, branching)?;
            Estimator::Hierarchical(simulate_hierarchy(
                counts, &layout, method.oracle, privacy, simulation, rng,
            )?)
        }
        MethodKind::Consistent { branching } => {
            let layout = TreeLayout::covering(d, branching)?;
            let raw = simulate_hierarchy(counts, &layout, method.oracle, privacy, simulation, rng)?;
            Estimator::Consistent(enforce(&raw)?)
        }
        MethodKind::Haar => {
            Estimator::Haar(simulate_haar(counts, &HaarLayout::covering(d)?, privacy, rng)?)
        }
    })
}
