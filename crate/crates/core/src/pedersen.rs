//! Pedersen commitments `C(a, x) = xG + aH` and Schnorr proofs that a
//! commitment opens to zero.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::group::{g, h, random_scalar, GroupPoint, Scalar, ScalarHasher};

const SCHNORR_TAG: &[u8] = b"crct/schnorr";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Commitment(pub GroupPoint);

/// Everything needed to open a commitment: the committed value `a` and the
/// blinding factor `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opening {
    pub value: Scalar,
    pub blinding: Scalar,
}

impl Opening {
    pub fn new(value: Scalar, blinding: Scalar) -> Self {
        Opening { value, blinding }
    }

    pub fn commit(&self) -> Commitment {
        commit(self.value, self.blinding)
    }
}

impl Commitment {
    pub fn point(&self) -> GroupPoint {
        self.0
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.to_bytes()
    }
}

impl std::ops::Add for Commitment {
    type Output = Commitment;
    fn add(self, rhs: Commitment) -> Commitment {
        Commitment(self.0 + rhs.0)
    }
}

impl std::ops::Sub for Commitment {
    type Output = Commitment;
    fn sub(self, rhs: Commitment) -> Commitment {
        Commitment(self.0 - rhs.0)
    }
}

pub fn commit(value: Scalar, blinding: Scalar) -> Commitment {
    Commitment(GroupPoint::multiscalar_mul(&[blinding, value], &[g(), h()]))
}

/// `Σ positives − Σ negatives`.
pub fn combine(positives: &[Commitment], negatives: &[Commitment]) -> Commitment {
    let pos = GroupPoint::sum(positives.iter().map(|c| &c.0));
    let neg = GroupPoint::sum(negatives.iter().map(|c| &c.0));
    Commitment(pos - neg)
}

pub fn verify_opening(c: &Commitment, opening: &Opening) -> bool {
    opening.commit() == *c
}

/// Schnorr signature under public key `C`, base `G`.
///
/// Wire format: `challenge ‖ response`, 64 bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchnorrProof {
    pub challenge: Scalar,
    pub response: Scalar,
}

impl SchnorrProof {
    pub const SIZE: usize = 64;

    pub fn to_bytes(&self) -> [u8; 64] {
        let mut out = [0u8; 64];
        out[..32].copy_from_slice(&self.challenge.to_bytes());
        out[32..].copy_from_slice(&self.response.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8; 64]) -> Result<Self, crate::error::DecodeError> {
        Ok(SchnorrProof {
            challenge: Scalar::from_slice(&bytes[..32])?,
            response: Scalar::from_slice(&bytes[32..])?,
        })
    }
}

fn schnorr_challenge(c: &Commitment, nonce_point: &GroupPoint, msg: &[u8]) -> Scalar {
    let mut hasher = ScalarHasher::new();
    hasher
        .update(SCHNORR_TAG)
        .point(&c.0)
        .point(nonce_point)
        .update(msg);
    hasher.finalize()
}

/// Proves knowledge of `x` with `C = xG`, bound to `msg`. If `C` carries a
/// non-zero `H` component the proof will not verify.
pub fn prove_zero<R: RngCore + CryptoRng>(
    c: &Commitment,
    x: &Scalar,
    msg: &[u8],
    rng: &mut R,
) -> SchnorrProof {
    let k = random_scalar(rng);
    let nonce_point = k * g();
    let challenge = schnorr_challenge(c, &nonce_point, msg);
    SchnorrProof {
        challenge,
        response: k - challenge * *x,
    }
}

pub fn verify_zero(c: &Commitment, proof: &SchnorrProof, msg: &[u8]) -> bool {
    let nonce_point = GroupPoint::mul_add_base(&proof.challenge, &c.0, &proof.response);
    schnorr_challenge(c, &nonce_point, msg) == proof.challenge
}
