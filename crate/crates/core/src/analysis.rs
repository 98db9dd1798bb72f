//! Size accounting and decoy-colour anonymity estimates.

use rand::distributions::{Distribution as _, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::pedersen::SchnorrProof;
use crate::range_proof::RangeProof;

const POINT: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeReport {
    pub n: usize,
    pub m: usize,
    pub q: usize,
    pub width: u32,
    /// Plain MLSAG over `m` spend keys plus the amount column.
    pub base_mlsag_bytes: usize,
    /// With the `m` extra colour columns.
    pub coloured_mlsag_bytes: usize,
    /// `q (1 + 64·2 + 64) · 32`, the Borromean figure quoted for comparison.
    pub borromean_reference_bytes: usize,
    /// What this crate's range proofs occupy for `q` outputs at `width` bits.
    pub range_proof_bytes: usize,
    pub colour_eq_bytes: usize,
    /// Coloured MLSAG, range proofs and colour-equality proofs. Input
    /// references are excluded.
    pub total_bytes: usize,
}

impl SizeReport {
    pub fn colour_overhead(&self) -> usize {
        self.coloured_mlsag_bytes - self.base_mlsag_bytes
    }
}

/// Byte counts for a transfer with ring size `n`, `m` inputs and `q` outputs.
pub fn signature_sizes(n: usize, m: usize, q: usize, width: u32) -> SizeReport {
    let base = (n * (m + 1) + 1 + m) * POINT;
    let coloured = (n * (2 * m + 1) + 1 + m) * POINT;
    let range = q * RangeProof::body_len(width);
    let colour_eq = q.saturating_sub(1) * SchnorrProof::SIZE;
    SizeReport {
        n,
        m,
        q,
        width,
        base_mlsag_bytes: base,
        coloured_mlsag_bytes: coloured,
        borromean_reference_bytes: q * (1 + 64 * 2 + 64) * POINT,
        range_proof_bytes: range,
        colour_eq_bytes: colour_eq,
        total_bytes: coloured + range + colour_eq,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColourDistribution {
    Uniform,
    /// Colour `k` (1-based) has weight `1/k^s`.
    Zipf { s: f64 },
}

impl ColourDistribution {
    /// Normalised probabilities over `chi` colours.
    pub fn probabilities(&self, chi: usize) -> Vec<f64> {
        let weights = self.weights(chi);
        let total: f64 = weights.iter().sum();
        weights.into_iter().map(|w| w / total).collect()
    }

    fn weights(&self, chi: usize) -> Vec<f64> {
        match *self {
            ColourDistribution::Uniform => vec![1.0; chi],
            ColourDistribution::Zipf { s } => (1..=chi).map(|k| (k as f64).powf(-s)).collect(),
        }
    }
}

/// Which decoy rows count as colour-consistent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColourEvent {
    /// All `m` decoy colours equal the spender's colour, itself drawn from
    /// the same population. Probability `Σ p_k^{m+1}`; `1/χ^m` when uniform.
    MatchesSpender,
    /// All `m` decoy colours equal one another. Probability `Σ p_k^m`.
    AllEqual,
}

impl ColourEvent {
    pub fn describe(&self) -> &'static str {
        match self {
            ColourEvent::MatchesSpender => {
                "every colour in the decoy row equals the colour of the spent inputs"
            }
            ColourEvent::AllEqual => "every colour in the decoy row is the same colour",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnonymityReport {
    pub chi: usize,
    pub m: usize,
    pub distribution: ColourDistribution,
    pub event: ColourEvent,
    pub event_definition: String,
    pub p_same_colour_vector: f64,
    /// Zero for closed-form results.
    pub trials: u64,
    pub hits: u64,
    /// Binomial standard error of the estimate; zero for closed forms.
    pub std_error: f64,
}

/// A population decoys are drawn from: a weight per colour. Ledger colour
/// counts can be used directly.
#[derive(Clone, Debug)]
pub struct ColourPopulation {
    weights: Vec<f64>,
    sampler: WeightedIndex<f64>,
}

impl ColourPopulation {
    /// `None` if there are no colours or no positive weight.
    pub fn from_weights(weights: Vec<f64>) -> Option<Self> {
        let sampler = WeightedIndex::new(&weights).ok()?;
        Some(ColourPopulation { weights, sampler })
    }

    pub fn from_counts(counts: &[u64]) -> Option<Self> {
        Self::from_weights(counts.iter().map(|c| *c as f64).collect())
    }

    pub fn from_distribution(chi: usize, distribution: ColourDistribution) -> Option<Self> {
        Self::from_weights(distribution.weights(chi))
    }

    pub fn colours(&self) -> usize {
        self.weights.len()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sampler.sample(rng)
    }
}

/// Monte-Carlo frequency of `event` over `trials` decoy rows of `m` colours.
pub fn decoy_colour_simulation<R: Rng + ?Sized>(
    population: &ColourPopulation,
    m: usize,
    trials: u64,
    event: ColourEvent,
    distribution: ColourDistribution,
    rng: &mut R,
) -> AnonymityReport {
    let mut hits = 0u64;
    for _ in 0..trials {
        let target = population.sample(rng);
        let hit = match event {
            ColourEvent::MatchesSpender => (0..m).all(|_| population.sample(rng) == target),
            // The first draw already fixed the colour the rest must match.
            ColourEvent::AllEqual => (1..m).all(|_| population.sample(rng) == target),
        };
        hits += hit as u64;
    }
    let p = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
    AnonymityReport {
        chi: population.colours(),
        m,
        distribution,
        event,
        event_definition: event.describe().into(),
        p_same_colour_vector: p,
        trials,
        hits,
        std_error: if trials == 0 { 0.0 } else { (p * (1.0 - p) / trials as f64).sqrt() },
    }
}

/// Exact probability of `event` for colours drawn i.i.d. from `probs`.
pub fn exact_probability(probs: &[f64], m: usize, event: ColourEvent) -> f64 {
    let power = match event {
        ColourEvent::MatchesSpender => m + 1,
        ColourEvent::AllEqual => m,
    };
    probs.iter().map(|p| p.powi(power as i32)).sum()
}

/// Probability that a decoy row of `m` colours is indistinguishable from the
/// spender's. Uniform colours use the closed form `1/χ^m`; other
/// distributions are estimated from `trials` samples of the all-equal event.
pub fn anonymity_probability<R: Rng + ?Sized>(
    chi: usize,
    m: usize,
    distribution: ColourDistribution,
    trials: u64,
    rng: &mut R,
) -> AnonymityReport {
    match distribution {
        ColourDistribution::Uniform => {
            let event = ColourEvent::MatchesSpender;
            AnonymityReport {
                chi,
                m,
                distribution,
                event,
                event_definition: event.describe().into(),
                p_same_colour_vector: (chi as f64).powi(-(m as i32)),
                trials: 0,
                hits: 0,
                std_error: 0.0,
            }
        }
        ColourDistribution::Zipf { .. } => {
            let population = ColourPopulation::from_distribution(chi, distribution)
                .expect("chi >= 1 gives positive weights");
            decoy_colour_simulation(&population, m, trials, ColourEvent::AllEqual, distribution, rng)
        }
    }
}
