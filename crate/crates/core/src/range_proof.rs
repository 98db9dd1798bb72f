//! Bit-decomposition range proofs with Borromean ring signatures.
//!
//! The amount commitment `C = bG + aH` is split into `W` bit commitments
//! `B_k = r_k G + a_k H` with `Σ 2^k r_k = b`, so `Σ 2^k B_k = C`. Each bit
//! carries a two-key ring signature over `{B_k, B_k − H}`: knowing the
//! discrete log of one of them base `G` shows `a_k ∈ {0, 1}`. All `W` rings
//! share one starting challenge `e0`.
//!
//! Per bit `k`, ring member 0 is `B_k` and member 1 is `B_k − H`:
//!
//! ```text
//! R_{k,0} = s_{k,0} G + e0 · B_k
//! e_{k,1} = hash_to_scalar(tag ‖ C ‖ R_{k,0} ‖ k)
//! R_{k,1} = s_{k,1} G + e_{k,1} · (B_k − H)
//! e0      = hash_to_scalar(tag ‖ C ‖ R_{0,1} ‖ … ‖ R_{W−1,1})
//! ```
//!
//! Encoded size is `(1 + 3W) · 32` bytes plus the width varint.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::encoding::{Reader, Writer};
use crate::error::{DecodeError, TxError};
use crate::group::{g, h, random_scalar, GroupPoint, Scalar, ScalarHasher};
use crate::pedersen::{commit, Commitment};

const RANGE_TAG: &[u8] = b"crct/range";

pub const MAX_WIDTH: u32 = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeProof {
    pub width: u32,
    pub e0: Scalar,
    pub bit_commitments: Vec<Commitment>,
    /// `(s_{k,0}, s_{k,1})` per bit.
    pub bit_responses: Vec<(Scalar, Scalar)>,
}

fn check_width(width: u32) -> Result<(), TxError> {
    if width == 0 || width > MAX_WIDTH {
        return Err(TxError::InvalidWidth(width));
    }
    Ok(())
}

fn bit_challenge(c: &Commitment, r0: &GroupPoint, k: u32) -> Scalar {
    let mut hasher = ScalarHasher::new();
    hasher
        .update(RANGE_TAG)
        .point(&c.0)
        .point(r0)
        .update(&k.to_le_bytes());
    hasher.finalize()
}

/// Proves `0 ≤ amount < 2^width` for `commit(amount, blinding)`.
pub fn range_prove<R: RngCore + CryptoRng>(
    amount: u64,
    blinding: Scalar,
    width: u32,
    rng: &mut R,
) -> Result<RangeProof, TxError> {
    check_width(width)?;
    if width < 64 && amount >> width != 0 {
        return Err(TxError::AmountOutOfRange { amount, width });
    }
    let c = commit(amount.into(), blinding);
    let w = width as usize;
    let bits: Vec<bool> = (0..width).map(|k| (amount >> k) & 1 == 1).collect();

    // r_0 absorbs the remainder so the weighted sum of bit blindings is b.
    let mut blinds: Vec<Scalar> = (0..w).map(|_| random_scalar(rng)).collect();
    let rest: Scalar = (1..width)
        .map(|k| Scalar::pow2(k) * blinds[k as usize])
        .sum();
    blinds[0] = blinding - rest;

    let bit_commitments: Vec<Commitment> = bits
        .iter()
        .zip(&blinds)
        .map(|(bit, r)| commit(Scalar::from_u64(*bit as u64), *r))
        .collect();

    let alphas: Vec<Scalar> = (0..w).map(|_| random_scalar(rng)).collect();
    let mut s0 = vec![Scalar::ZERO; w];
    let mut s1 = vec![Scalar::ZERO; w];
    let mut last_points = Vec::with_capacity(w);
    for k in 0..w {
        if bits[k] {
            last_points.push(alphas[k] * g());
        } else {
            let r0 = alphas[k] * g();
            let e1 = bit_challenge(&c, &r0, k as u32);
            s1[k] = random_scalar(rng);
            let member1 = bit_commitments[k].0 - h();
            last_points.push(GroupPoint::mul_add_base(&e1, &member1, &s1[k]));
        }
    }
    let e0 = closing_challenge(&c, &last_points);
    for k in 0..w {
        if bits[k] {
            s0[k] = random_scalar(rng);
            let r0 = GroupPoint::mul_add_base(&e0, &bit_commitments[k].0, &s0[k]);
            let e1 = bit_challenge(&c, &r0, k as u32);
            s1[k] = alphas[k] - e1 * blinds[k];
        } else {
            s0[k] = alphas[k] - e0 * blinds[k];
        }
    }
    Ok(RangeProof {
        width,
        e0,
        bit_commitments,
        bit_responses: s0.into_iter().zip(s1).collect(),
    })
}

fn closing_challenge(c: &Commitment, points: &[GroupPoint]) -> Scalar {
    let mut hasher = ScalarHasher::new();
    hasher.update(RANGE_TAG).point(&c.0);
    for p in points {
        hasher.point(p);
    }
    hasher.finalize()
}

/// Accepts iff the bit commitments recompose to `c` and every bit ring closes.
pub fn range_verify(c: &Commitment, proof: &RangeProof) -> bool {
    if check_width(proof.width).is_err() {
        return false;
    }
    let w = proof.width as usize;
    if proof.bit_commitments.len() != w || proof.bit_responses.len() != w {
        return false;
    }
    let weights: Vec<Scalar> = (0..proof.width).map(Scalar::pow2).collect();
    let points: Vec<GroupPoint> = proof.bit_commitments.iter().map(|b| b.0).collect();
    if GroupPoint::multiscalar_mul(&weights, &points) != c.0 {
        return false;
    }
    let last_points: Vec<GroupPoint> = (0..w)
        .map(|k| {
            let (s0, s1) = proof.bit_responses[k];
            let r0 = GroupPoint::mul_add_base(&proof.e0, &points[k], &s0);
            let e1 = bit_challenge(c, &r0, k as u32);
            GroupPoint::mul_add_base(&e1, &(points[k] - h()), &s1)
        })
        .collect();
    closing_challenge(c, &last_points) == proof.e0
}

impl RangeProof {
    /// Size of the proof body excluding the width prefix.
    pub fn body_len(width: u32) -> usize {
        (1 + 3 * width as usize) * 32
    }

    pub fn write(&self, w: &mut Writer) {
        w.varint(self.width as u64);
        w.scalar(&self.e0);
        for (b, (s0, s1)) in self.bit_commitments.iter().zip(&self.bit_responses) {
            w.point(&b.0);
            w.scalar(s0);
            w.scalar(s1);
        }
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        let width = r.varint()?;
        if width == 0 || width > MAX_WIDTH as u64 {
            return Err(DecodeError::Inconsistent("range proof width"));
        }
        let e0 = r.scalar()?;
        let mut bit_commitments = Vec::with_capacity(width as usize);
        let mut bit_responses = Vec::with_capacity(width as usize);
        for _ in 0..width {
            bit_commitments.push(Commitment(r.point()?));
            bit_responses.push((r.scalar()?, r.scalar()?));
        }
        Ok(RangeProof {
            width: width as u32,
            e0,
            bit_commitments,
            bit_responses,
        })
    }
}
