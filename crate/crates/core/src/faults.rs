//! Seeded fault models: neuron ablation before the run and per-step spike loss.

use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};

/// Trial-local generator. All randomness in a trial flows from one of these.
pub type TrialRng = ChaCha8Rng;

pub fn trial_rng(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FaultKind {
    Ablation,
    Drop,
}

impl FaultKind {
    pub fn name(self) -> &'static str {
        match self {
            FaultKind::Ablation => "ablation",
            FaultKind::Drop => "drop",
        }
    }

    pub fn spec(self, p: f64) -> FaultSpec {
        match self {
            FaultKind::Ablation => FaultSpec { ablation_p: p, drop_p: 0.0 },
            FaultKind::Drop => FaultSpec { ablation_p: 0.0, drop_p: p },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FaultSpec {
    pub ablation_p: f64,
    pub drop_p: f64,
}

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(alloc::format!("{name} must be in [0, 1], got {p}")))
    }
}

impl FaultSpec {
    pub const NONE: FaultSpec = FaultSpec { ablation_p: 0.0, drop_p: 0.0 };

    pub fn validate(&self) -> Result<()> {
        check_probability("ablation_p", self.ablation_p)?;
        check_probability("drop_p", self.drop_p)
    }
}

#[inline]
fn bernoulli<R: RngCore + ?Sized>(rng: &mut R, p: f64) -> bool {
    if p <= 0.0 {
        false
    } else if p >= 1.0 {
        true
    } else {
        rng.random::<f64>() < p
    }
}

/// i.i.d. Bernoulli(p) per neuron; `true` means ablated.
pub fn sample_ablation_mask<R: RngCore + ?Sized>(m_neurons: usize, p: f64, rng: &mut R) -> Result<Vec<bool>> {
    check_probability("ablation probability", p)?;
    Ok((0..m_neurons).map(|_| bernoulli(rng, p)).collect())
}

/// One step's drop decisions for every neuron; `true` means a spike emitted
/// this step would be lost.
pub fn sample_drop_mask<R: RngCore + ?Sized>(m_neurons: usize, p: f64, rng: &mut R) -> Result<Vec<bool>> {
    check_probability("drop probability", p)?;
    Ok((0..m_neurons).map(|_| bernoulli(rng, p)).collect())
}

/// Faults realised for one trial.
///
/// The ablation mask is drawn once at construction. Drop decisions are drawn
/// lazily, one per emitted spike, which is the per-neuron-per-step mask
/// restricted to the neurons that actually spiked.
#[derive(Debug, Clone)]
pub struct FaultRealization {
    pub spec: FaultSpec,
    pub ablation_mask: Vec<bool>,
    rng: TrialRng,
}

impl FaultRealization {
    pub fn new(m_neurons: usize, spec: FaultSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = trial_rng(seed);
        let ablation_mask = sample_ablation_mask(m_neurons, spec.ablation_p, &mut rng)?;
        Ok(Self { spec, ablation_mask, rng })
    }

    /// Replaces the sampled ablation mask.
    pub fn with_ablation_mask(mut self, mask: Vec<bool>) -> Self {
        self.ablation_mask = mask;
        self
    }

    #[inline]
    pub fn is_ablated(&self, k: usize) -> bool {
        self.ablation_mask[k]
    }

    pub fn surviving(&self) -> usize {
        self.ablation_mask.iter().filter(|&&a| !a).count()
    }

    /// Decides the fate of one emitted spike; `true` means dropped.
    #[inline]
    pub fn drop_spike(&mut self) -> bool {
        bernoulli(&mut self.rng, self.spec.drop_p)
    }

    pub fn rng_mut(&mut self) -> &mut TrialRng {
        &mut self.rng
    }
}
