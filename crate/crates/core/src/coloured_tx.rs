//! Coloured ring confidential transactions.
//!
//! Every output is a triple `(P, C, F)`: a one-time spend key, a commitment
//! `C = bG + aH` to the amount and a commitment `F = uG + fH` to the colour
//! scalar `f`. A transfer spends `m` real inputs hidden among `n − 1` decoy
//! rows and proves, with one MLSAG over `2m + 1` columns, that
//!
//! - the signer owns the `m` spend keys of one row,
//! - `Σ_j C_π^j − Σ_k C_k` commits to zero (amounts are conserved), and
//! - every `F_π^j − F_1` commits to zero (each input has the colour of the
//!   first output).
//!
//! Each commitment column is offset by spend keys, so its secret is only
//! known to the owner of the row. `q − 1` Schnorr proofs show every output
//! has the colour of the first one, and a range proof per output rules out
//! overflowing amounts.

use rand::{CryptoRng, Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::encoding::{Reader, Writer, MAX_LEN};
use crate::error::{DecodeError, TxError};
use crate::group::{g, hash_to_scalar_parts, random_scalar, GroupPoint, Scalar, ScalarHasher};
use crate::mlsag::{self, MlsagSignature, Ring};
use crate::pedersen::{commit, prove_zero, verify_opening, verify_zero, Commitment, Opening, SchnorrProof};
use crate::range_proof::{range_prove, range_verify, RangeProof};

const COLOUR_TAG: &[u8] = b"crct/colour";
const TX_MESSAGE_TAG: &[u8] = b"crct/txmsg";

const TAG_TRANSFER: u8 = 0x01;
const TAG_ISSUANCE: u8 = 0x02;

/// Longest accepted colour label, in bytes.
pub const MAX_LABEL_LEN: usize = 256;
pub const NATIVE_COLOUR: &str = "native";
pub const DEFAULT_RANGE_BITS: u32 = 64;

/// An asset type. The id is derived from the label, so labels and ids are
/// interchangeable names for a colour.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Colour {
    pub id: Scalar,
    pub label: String,
}

impl Colour {
    pub fn from_label(label: &str) -> Colour {
        Colour {
            id: colour_id(label),
            label: label.to_owned(),
        }
    }

    pub fn native() -> Colour {
        Colour::from_label(NATIVE_COLOUR)
    }
}

/// `hash_to_scalar("crct/colour" ‖ label)`.
pub fn colour_id(label: &str) -> Scalar {
    hash_to_scalar_parts(&[COLOUR_TAG, label.as_bytes()])
}

/// Position of an output in the ledger.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TxInputRef {
    pub output_id: u64,
}

impl TxInputRef {
    pub fn new(output_id: u64) -> Self {
        TxInputRef { output_id }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxOutput {
    pub one_time_key: GroupPoint,
    pub amount_commitment: Commitment,
    pub colour_commitment: Commitment,
    pub range_proof: RangeProof,
}

/// The public part of an output as it appears in a ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingMember {
    pub spend_key: GroupPoint,
    pub amount_commitment: Commitment,
    pub colour_commitment: Commitment,
}

impl From<&TxOutput> for RingMember {
    fn from(o: &TxOutput) -> Self {
        RingMember {
            spend_key: o.one_time_key,
            amount_commitment: o.amount_commitment,
            colour_commitment: o.colour_commitment,
        }
    }
}

/// What the owner of an output knows about its two commitments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssetOpening {
    pub amount: u64,
    pub blinding: Scalar,
    pub colour: Scalar,
    pub colour_blinding: Scalar,
}

impl AssetOpening {
    pub fn amount_commitment(&self) -> Commitment {
        commit(self.amount.into(), self.blinding)
    }

    pub fn colour_commitment(&self) -> Commitment {
        commit(self.colour, self.colour_blinding)
    }

    pub fn opens(&self, member: &RingMember) -> bool {
        verify_opening(
            &member.amount_commitment,
            &Opening::new(self.amount.into(), self.blinding),
        ) && verify_opening(
            &member.colour_commitment,
            &Opening::new(self.colour, self.colour_blinding),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    /// `n` rows of `m` references; one row holds the real inputs.
    pub ring_refs: Vec<Vec<TxInputRef>>,
    pub outputs: Vec<TxOutput>,
    /// Arbitrary bytes bound into the signed message.
    #[serde(with = "hex_bytes")]
    pub metadata: Vec<u8>,
    /// `n × (2m + 1)` responses, `m` key images.
    pub mlsag: MlsagSignature,
    /// Proofs that `F_1 − F_k` commits to zero, for `k = 2..q`.
    pub colour_eq_proofs: Vec<SchnorrProof>,
}

/// A plain-text amount opening disclosed by an issuance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenAmount {
    pub amount: u64,
    pub blinding: Scalar,
}

/// Input-less transaction creating a new colour. The colour commitment is
/// always opened; the amount optionally.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issuance {
    pub label: String,
    pub colour_opening: Opening,
    pub amount_opening: Option<OpenAmount>,
    pub output: TxOutput,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Transaction {
    Transfer(Transfer),
    Issuance(Issuance),
}

/// Why a transaction fails public verification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[serde(rename_all = "kebab-case")]
pub enum Rejection {
    #[error("ring reference {0} is unknown")]
    UnknownRef(u64),
    #[error("malformed transaction: {0}")]
    Malformed(String),
    #[error("ring signature does not verify")]
    BadSignature,
    #[error("range proof does not verify")]
    BadRange,
    #[error("output colour equality proof does not verify")]
    BadColourEq,
    #[error("issuance openings are inconsistent")]
    BadIssuance,
}

/// Key matrix signed by the transfer MLSAG. Row `i` is
///
/// ```text
/// [P_i^1 … P_i^m,  Σ_j (P_i^j + C_i^j) − Σ_k C_k,  P_i^1 + F_i^1 − F_1 … P_i^m + F_i^m − F_1]
/// ```
pub fn build_key_matrix(
    ring: &[Vec<RingMember>],
    outputs: &[TxOutput],
) -> Result<Vec<Vec<GroupPoint>>, TxError> {
    let first = outputs.first().ok_or(TxError::NoOutputs)?;
    let m = ring.first().map_or(0, Vec::len);
    if m == 0 || ring.iter().any(|row| row.len() != m) {
        return Err(TxError::DimensionMismatch(
            "ring rows must be non-empty and of equal length".into(),
        ));
    }
    let out_sum = GroupPoint::sum(outputs.iter().map(|o| &o.amount_commitment.0));
    let f1 = first.colour_commitment.0;
    Ok(ring
        .iter()
        .map(|row| {
            let mut keys: Vec<GroupPoint> = row.iter().map(|r| r.spend_key).collect();
            let amount_col = row
                .iter()
                .fold(GroupPoint::identity(), |acc, r| acc + r.spend_key + r.amount_commitment.0)
                - out_sum;
            keys.push(amount_col);
            keys.extend(row.iter().map(|r| r.spend_key + r.colour_commitment.0 - f1));
            keys
        })
        .collect())
}

/// The signer-row secrets for [`build_key_matrix`], computed without any
/// check that they actually open the row:
///
/// ```text
/// [x_1 … x_m,  Σ x_j + Σ b_in − Σ b_out,  x_1 + u_1,in − u_1,out … x_m + u_m,in − u_1,out]
/// ```
///
/// They open the row exactly when amounts are conserved and every input has
/// the first output's colour.
pub fn row_secrets(
    spend_keys: &[Scalar],
    inputs: &[AssetOpening],
    outputs: &[AssetOpening],
) -> Result<Vec<Scalar>, TxError> {
    if spend_keys.len() != inputs.len() || spend_keys.is_empty() {
        return Err(TxError::DimensionMismatch(format!(
            "{} spend keys for {} inputs",
            spend_keys.len(),
            inputs.len()
        )));
    }
    let first_out = outputs.first().ok_or(TxError::NoOutputs)?;
    let mut secrets = spend_keys.to_vec();
    let amount_secret = spend_keys.iter().copied().sum::<Scalar>()
        + inputs.iter().map(|o| o.blinding).sum::<Scalar>()
        - outputs.iter().map(|o| o.blinding).sum::<Scalar>();
    secrets.push(amount_secret);
    secrets.extend(
        spend_keys
            .iter()
            .zip(inputs)
            .map(|(x, o)| *x + o.colour_blinding - first_out.colour_blinding),
    );
    Ok(secrets)
}

/// [`row_secrets`] behind a plain-text conservation and colour check.
pub fn derive_row_secrets(
    spend_keys: &[Scalar],
    inputs: &[AssetOpening],
    outputs: &[AssetOpening],
) -> Result<Vec<Scalar>, TxError> {
    check_plaintext_balance(inputs, outputs)?;
    row_secrets(spend_keys, inputs, outputs)
}

fn check_plaintext_balance(inputs: &[AssetOpening], outputs: &[AssetOpening]) -> Result<(), TxError> {
    let total_in: u128 = inputs.iter().map(|o| o.amount as u128).sum();
    let total_out: u128 = outputs.iter().map(|o| o.amount as u128).sum();
    if total_in != total_out {
        return Err(TxError::ConservationViolated {
            inputs: total_in,
            outputs: total_out,
        });
    }
    let colour = outputs.first().ok_or(TxError::NoOutputs)?.colour;
    if inputs.iter().chain(outputs).any(|o| o.colour != colour) {
        return Err(TxError::ColourMismatch);
    }
    Ok(())
}

/// `q − 1` proofs that `F_1 − F_k = (u_1 − u_k)G`. Refuses when the openings
/// disagree on the colour.
pub fn prove_output_colours_equal<R: RngCore + CryptoRng>(
    outputs: &[TxOutput],
    openings: &[AssetOpening],
    msg: &[u8],
    rng: &mut R,
) -> Result<Vec<SchnorrProof>, TxError> {
    let first = openings.first().ok_or(TxError::NoOutputs)?;
    if openings.iter().any(|o| o.colour != first.colour) {
        return Err(TxError::ColourMismatch);
    }
    colour_proofs_unchecked(outputs, openings, msg, rng)
}

fn colour_proofs_unchecked<R: RngCore + CryptoRng>(
    outputs: &[TxOutput],
    openings: &[AssetOpening],
    msg: &[u8],
    rng: &mut R,
) -> Result<Vec<SchnorrProof>, TxError> {
    if outputs.len() != openings.len() || outputs.is_empty() {
        return Err(TxError::DimensionMismatch(
            "one opening per output required".into(),
        ));
    }
    let f1 = outputs[0].colour_commitment;
    let u1 = openings[0].colour_blinding;
    Ok(outputs[1..]
        .iter()
        .zip(&openings[1..])
        .map(|(out, op)| prove_zero(&(f1 - out.colour_commitment), &(u1 - op.colour_blinding), msg, rng))
        .collect())
}

pub fn verify_output_colours(outputs: &[TxOutput], proofs: &[SchnorrProof], msg: &[u8]) -> bool {
    if outputs.is_empty() || proofs.len() != outputs.len() - 1 {
        return false;
    }
    let f1 = outputs[0].colour_commitment;
    outputs[1..]
        .iter()
        .zip(proofs)
        .all(|(out, proof)| verify_zero(&(f1 - out.colour_commitment), proof, msg))
}

/// A fresh output paying `amount` of `colour` to `recipient`.
pub fn make_output<R: RngCore + CryptoRng>(
    recipient: GroupPoint,
    amount: u64,
    colour: Scalar,
    width: u32,
    rng: &mut R,
) -> Result<(TxOutput, AssetOpening), TxError> {
    let opening = AssetOpening {
        amount,
        blinding: random_scalar(rng),
        colour,
        colour_blinding: random_scalar(rng),
    };
    let range_proof = range_prove(amount, opening.blinding, width, rng)?;
    Ok((
        TxOutput {
            one_time_key: recipient,
            amount_commitment: opening.amount_commitment(),
            colour_commitment: opening.colour_commitment(),
            range_proof,
        },
        opening,
    ))
}

/// Everything a sender has assembled before signing a transfer.
#[derive(Clone, Debug)]
pub struct TransferPlan {
    pub ring_refs: Vec<Vec<TxInputRef>>,
    pub ring: Vec<Vec<RingMember>>,
    pub secret_index: usize,
    pub spend_keys: Vec<Scalar>,
    pub inputs: Vec<AssetOpening>,
    pub outputs: Vec<TxOutput>,
    pub output_openings: Vec<AssetOpening>,
    pub metadata: Vec<u8>,
}

impl TransferPlan {
    fn check_shape(&self) -> Result<(usize, usize), TxError> {
        let n = self.ring.len();
        let m = self.spend_keys.len();
        if n < 2 {
            return Err(crate::error::MlsagError::RingTooSmall(n).into());
        }
        if self.secret_index >= n {
            return Err(crate::error::MlsagError::IndexOutOfRange {
                index: self.secret_index,
                rows: n,
            }
            .into());
        }
        let shape_ok = m > 0
            && self.inputs.len() == m
            && self.ring_refs.len() == n
            && self.ring.iter().all(|r| r.len() == m)
            && self.ring_refs.iter().all(|r| r.len() == m)
            && self.outputs.len() == self.output_openings.len();
        if !shape_ok {
            return Err(TxError::DimensionMismatch(
                "ring, references, keys and openings disagree".into(),
            ));
        }
        if self.outputs.is_empty() {
            return Err(TxError::NoOutputs);
        }
        Ok((n, m))
    }

    fn unsigned(&self) -> Transfer {
        Transfer {
            ring_refs: self.ring_refs.clone(),
            outputs: self.outputs.clone(),
            metadata: self.metadata.clone(),
            mlsag: MlsagSignature {
                c1: Scalar::ZERO,
                responses: Vec::new(),
                key_images: Vec::new(),
            },
            colour_eq_proofs: Vec::new(),
        }
    }

    /// Signs after checking ownership of the signer row, plain-text
    /// conservation and colour agreement.
    pub fn sign<R: RngCore + CryptoRng>(&self, rng: &mut R) -> Result<Transfer, TxError> {
        let (_, m) = self.check_shape()?;
        let real = &self.ring[self.secret_index];
        for (j, (member, opening)) in real.iter().zip(&self.inputs).enumerate() {
            if self.spend_keys[j] * g() != member.spend_key || !opening.opens(member) {
                return Err(TxError::OpeningMismatch);
            }
        }
        for (out, op) in self.outputs.iter().zip(&self.output_openings) {
            if !op.opens(&RingMember::from(out)) {
                return Err(TxError::OpeningMismatch);
            }
        }
        let secrets = derive_row_secrets(&self.spend_keys, &self.inputs, &self.output_openings)?;
        let mut tx = self.unsigned();
        let msg = tx.message();
        let matrix = build_key_matrix(&self.ring, &self.outputs)?;
        let ring = Ring::for_signer(matrix, self.secret_index, &secrets, m)?;
        tx.mlsag = mlsag::sign(&msg, &ring, &secrets, rng)?;
        tx.colour_eq_proofs = prove_output_colours_equal(&self.outputs, &self.output_openings, &msg, rng)?;
        Ok(tx)
    }

    /// Runs the signing algorithms on whatever secrets the openings imply,
    /// skipping every sender-side check. Honest plans produce the same result
    /// as [`TransferPlan::sign`]; dishonest ones produce a transaction that
    /// verification rejects. Used to demonstrate attacks.
    pub fn sign_unchecked<R: RngCore + CryptoRng>(&self, rng: &mut R) -> Result<Transfer, TxError> {
        let (_, m) = self.check_shape()?;
        let secrets = row_secrets(&self.spend_keys, &self.inputs, &self.output_openings)?;
        let mut tx = self.unsigned();
        let msg = tx.message();
        let matrix = build_key_matrix(&self.ring, &self.outputs)?;
        let ring = Ring::for_signer(matrix, self.secret_index, &secrets, m)?;
        tx.mlsag = mlsag::sign_unchecked(&msg, &ring, &secrets, rng)?;
        tx.colour_eq_proofs = colour_proofs_unchecked(&self.outputs, &self.output_openings, &msg, rng)?;
        Ok(tx)
    }
}

/// A real input the sender owns.
#[derive(Clone, Debug)]
pub struct OwnedInput {
    pub reference: TxInputRef,
    pub member: RingMember,
    pub spend_key: Scalar,
    pub opening: AssetOpening,
}

/// Result of [`sign_transaction`]: the transaction and the openings of its
/// outputs, which the sender hands to the recipients.
#[derive(Clone, Debug)]
pub struct SignedTransfer {
    pub tx: Transaction,
    pub output_openings: Vec<AssetOpening>,
}

/// Builds and signs a transfer of `inputs` to `payments`, hiding the real
/// row at a uniformly random position among `decoys`. Decoy rows may hold
/// outputs of any colour.
pub fn sign_transaction<R: RngCore + CryptoRng>(
    inputs: &[OwnedInput],
    decoys: &[Vec<(TxInputRef, RingMember)>],
    payments: &[(GroupPoint, u64)],
    width: u32,
    rng: &mut R,
) -> Result<SignedTransfer, TxError> {
    let colour = inputs
        .first()
        .ok_or_else(|| TxError::DimensionMismatch("no inputs".into()))?
        .opening
        .colour;
    let mut outputs = Vec::with_capacity(payments.len());
    let mut output_openings = Vec::with_capacity(payments.len());
    for (recipient, amount) in payments {
        let (out, op) = make_output(*recipient, *amount, colour, width, rng)?;
        outputs.push(out);
        output_openings.push(op);
    }
    let secret_index = rng.gen_range(0..=decoys.len());
    let mut ring_refs: Vec<Vec<TxInputRef>> = decoys
        .iter()
        .map(|row| row.iter().map(|(r, _)| *r).collect())
        .collect();
    let mut ring: Vec<Vec<RingMember>> = decoys
        .iter()
        .map(|row| row.iter().map(|(_, m)| *m).collect())
        .collect();
    ring_refs.insert(secret_index, inputs.iter().map(|i| i.reference).collect());
    ring.insert(secret_index, inputs.iter().map(|i| i.member).collect());
    let plan = TransferPlan {
        ring_refs,
        ring,
        secret_index,
        spend_keys: inputs.iter().map(|i| i.spend_key).collect(),
        inputs: inputs.iter().map(|i| i.opening).collect(),
        outputs,
        output_openings: output_openings.clone(),
        metadata: Vec::new(),
    };
    Ok(SignedTransfer {
        tx: Transaction::Transfer(plan.sign(rng)?),
        output_openings,
    })
}

/// An issuance of `supply` units of a new colour named `label`.
pub fn make_issuance<R: RngCore + CryptoRng>(
    label: &str,
    supply: u64,
    recipient: GroupPoint,
    open_amount: bool,
    width: u32,
    rng: &mut R,
) -> Result<(Transaction, AssetOpening), TxError> {
    let colour = Colour::from_label(label);
    let (output, opening) = make_output(recipient, supply, colour.id, width, rng)?;
    let tx = Transaction::Issuance(Issuance {
        label: label.to_owned(),
        colour_opening: Opening::new(opening.colour, opening.colour_blinding),
        amount_opening: open_amount.then_some(OpenAmount {
            amount: supply,
            blinding: opening.blinding,
        }),
        output,
    });
    Ok((tx, opening))
}

impl Transfer {
    pub fn rows(&self) -> usize {
        self.ring_refs.len()
    }

    pub fn inputs_per_row(&self) -> usize {
        self.ring_refs.first().map_or(0, Vec::len)
    }

    /// Images of the `m` spend keys; the ones that enter double-spend checks.
    pub fn spend_key_images(&self) -> &[GroupPoint] {
        &self.mlsag.key_images
    }

    fn write_body(&self, w: &mut Writer) {
        w.varint(self.rows() as u64);
        w.varint(self.inputs_per_row() as u64);
        for r in self.ring_refs.iter().flatten() {
            w.varint(r.output_id);
        }
        w.varint(self.outputs.len() as u64);
        for out in &self.outputs {
            out.write(w);
        }
        w.len_prefixed(&self.metadata);
    }

    /// The signed message: a digest of references, outputs (keys, both
    /// commitments, range proofs) and metadata.
    pub fn message(&self) -> [u8; 32] {
        let mut w = Writer::new();
        self.write_body(&mut w);
        let mut hasher = ScalarHasher::new();
        hasher.update(TX_MESSAGE_TAG).update(&w.into_bytes());
        hasher.finalize().to_bytes()
    }

    /// Bytes spent on the varint-encoded ring member positions.
    pub fn reference_bytes(&self) -> usize {
        self.ring_refs
            .iter()
            .flatten()
            .map(|r| crate::encoding::varint_len(r.output_id))
            .sum()
    }

    fn check_shape(&self) -> Result<(usize, usize), Rejection> {
        let n = self.rows();
        let m = self.inputs_per_row();
        let q = self.outputs.len();
        let malformed = |s: &str| Err(Rejection::Malformed(s.into()));
        if n < 2 {
            return malformed("ring needs at least two rows");
        }
        if m == 0 || self.ring_refs.iter().any(|r| r.len() != m) {
            return malformed("ring rows must be non-empty and of equal length");
        }
        if q == 0 {
            return malformed("no outputs");
        }
        if self.colour_eq_proofs.len() != q - 1 {
            return malformed("expected one colour proof per output after the first");
        }
        if self.mlsag.rows() != n
            || self.mlsag.responses.iter().any(|r| r.len() != 2 * m + 1)
            || self.mlsag.key_images.len() != m
        {
            return malformed("signature shape does not match the ring");
        }
        Ok((n, m))
    }
}

impl Issuance {
    pub fn colour(&self) -> Colour {
        Colour::from_label(&self.label)
    }

    fn check(&self) -> Result<(), Rejection> {
        if self.label.is_empty() || self.label.len() > MAX_LABEL_LEN {
            return Err(Rejection::Malformed("colour label length".into()));
        }
        if self.colour_opening.value != colour_id(&self.label)
            || !verify_opening(&self.output.colour_commitment, &self.colour_opening)
        {
            return Err(Rejection::BadIssuance);
        }
        if let Some(open) = &self.amount_opening {
            let opening = Opening::new(open.amount.into(), open.blinding);
            if !verify_opening(&self.output.amount_commitment, &opening) {
                return Err(Rejection::BadIssuance);
            }
        }
        if !range_verify(&self.output.amount_commitment, &self.output.range_proof) {
            return Err(Rejection::BadRange);
        }
        Ok(())
    }
}

/// Public verification. `resolve` maps a ring reference to the output it
/// names. Does not look at key-image reuse; that needs the ledger.
pub fn check_transaction<F>(tx: &Transaction, resolve: F) -> Result<(), Rejection>
where
    F: Fn(TxInputRef) -> Option<RingMember>,
{
    match tx {
        Transaction::Issuance(iss) => iss.check(),
        Transaction::Transfer(t) => {
            t.check_shape()?;
            let ring = t
                .ring_refs
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|r| resolve(*r).ok_or(Rejection::UnknownRef(r.output_id)))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            if !t
                .outputs
                .iter()
                .all(|o| range_verify(&o.amount_commitment, &o.range_proof))
            {
                return Err(Rejection::BadRange);
            }
            let msg = t.message();
            if !verify_output_colours(&t.outputs, &t.colour_eq_proofs, &msg) {
                return Err(Rejection::BadColourEq);
            }
            let matrix = build_key_matrix(&ring, &t.outputs)
                .map_err(|e| Rejection::Malformed(e.to_string()))?;
            match mlsag::verify(&msg, &t.mlsag, &matrix) {
                Ok(true) => Ok(()),
                Ok(false) => Err(Rejection::BadSignature),
                Err(e) => Err(Rejection::Malformed(e.to_string())),
            }
        }
    }
}

/// Boolean form of [`check_transaction`]; unresolvable references and
/// malformed shapes are errors rather than `false`.
pub fn verify_transaction<F>(tx: &Transaction, resolve: F) -> Result<bool, TxError>
where
    F: Fn(TxInputRef) -> Option<RingMember>,
{
    match check_transaction(tx, resolve) {
        Ok(()) => Ok(true),
        Err(Rejection::UnknownRef(id)) => Err(TxError::UnknownRef(id)),
        Err(Rejection::Malformed(why)) => Err(TxError::DimensionMismatch(why)),
        Err(_) => Ok(false),
    }
}

impl TxOutput {
    pub fn write(&self, w: &mut Writer) {
        w.point(&self.one_time_key);
        w.point(&self.amount_commitment.0);
        w.point(&self.colour_commitment.0);
        self.range_proof.write(w);
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        Ok(TxOutput {
            one_time_key: r.point()?,
            amount_commitment: Commitment(r.point()?),
            colour_commitment: Commitment(r.point()?),
            range_proof: RangeProof::read(r)?,
        })
    }
}

impl Transaction {
    /// Canonical binary encoding. Layout:
    ///
    /// ```text
    /// transfer: 0x01 ‖ n ‖ m ‖ n·m refs ‖ q ‖ q outputs ‖ metadata
    ///           ‖ c1 ‖ n·(2m+1) responses ‖ m key images ‖ (q−1) × (challenge ‖ response)
    /// issuance: 0x02 ‖ label ‖ f ‖ u ‖ 0x00 | (0x01 ‖ amount ‖ blinding) ‖ output
    /// output:   P ‖ C ‖ F ‖ W ‖ e0 ‖ W × (B_k ‖ s_k0 ‖ s_k1)
    /// ```
    ///
    /// Counts, references, lengths, amounts and `W` are varints; scalars and
    /// points are 32 bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        match self {
            Transaction::Transfer(t) => {
                w.u8(TAG_TRANSFER);
                t.write_body(&mut w);
                t.mlsag.write(&mut w);
                for p in &t.colour_eq_proofs {
                    w.bytes(&p.to_bytes());
                }
            }
            Transaction::Issuance(iss) => {
                w.u8(TAG_ISSUANCE);
                w.len_prefixed(iss.label.as_bytes());
                w.scalar(&iss.colour_opening.value);
                w.scalar(&iss.colour_opening.blinding);
                match &iss.amount_opening {
                    None => w.u8(0),
                    Some(open) => {
                        w.u8(1);
                        w.varint(open.amount);
                        w.scalar(&open.blinding);
                    }
                }
                iss.output.write(&mut w);
            }
        }
        w.into_bytes()
    }

    pub fn read(r: &mut Reader<'_>) -> Result<Self, DecodeError> {
        match r.u8()? {
            TAG_TRANSFER => {
                let n = r.length()?;
                let m = r.length()?;
                if n.checked_mul(m).is_none_or(|nm| nm as u64 > MAX_LEN) {
                    return Err(DecodeError::LengthTooLarge((n as u64).saturating_mul(m as u64)));
                }
                let mut ring_refs = Vec::with_capacity(n);
                for _ in 0..n {
                    ring_refs.push(
                        (0..m)
                            .map(|_| r.varint().map(TxInputRef::new))
                            .collect::<Result<Vec<_>, _>>()?,
                    );
                }
                let q = r.length()?;
                let outputs = (0..q)
                    .map(|_| TxOutput::read(r))
                    .collect::<Result<Vec<_>, _>>()?;
                let metadata = r.len_prefixed()?.to_vec();
                let mlsag = MlsagSignature::read(r, n, 2 * m + 1, m)?;
                let colour_eq_proofs = (0..q.saturating_sub(1))
                    .map(|_| {
                        let bytes: &[u8; 64] = r.take(64)?.try_into().expect("64 bytes");
                        SchnorrProof::from_bytes(bytes)
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Transaction::Transfer(Transfer {
                    ring_refs,
                    outputs,
                    metadata,
                    mlsag,
                    colour_eq_proofs,
                }))
            }
            TAG_ISSUANCE => {
                let label = std::str::from_utf8(r.len_prefixed()?)
                    .map_err(|_| DecodeError::BadUtf8)?
                    .to_owned();
                let colour_opening = Opening::new(r.scalar()?, r.scalar()?);
                let amount_opening = match r.u8()? {
                    0 => None,
                    1 => Some(OpenAmount {
                        amount: r.varint()?,
                        blinding: r.scalar()?,
                    }),
                    other => return Err(DecodeError::UnknownTag(other)),
                };
                Ok(Transaction::Issuance(Issuance {
                    label,
                    colour_opening,
                    amount_opening,
                    output: TxOutput::read(r)?,
                }))
            }
            other => Err(DecodeError::UnknownTag(other)),
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let tx = Self::read(&mut r)?;
        r.finish()?;
        Ok(tx)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transaction serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn outputs(&self) -> &[TxOutput] {
        match self {
            Transaction::Transfer(t) => &t.outputs,
            Transaction::Issuance(i) => std::slice::from_ref(&i.output),
        }
    }

    /// Spend-key images, empty for issuances.
    pub fn spend_key_images(&self) -> &[GroupPoint] {
        match self {
            Transaction::Transfer(t) => t.spend_key_images(),
            Transaction::Issuance(_) => &[],
        }
    }

    /// Identifier: hash of the canonical encoding.
    pub fn id(&self) -> [u8; 32] {
        hash_to_scalar_parts(&[b"crct/txid", &self.to_bytes()]).to_bytes()
    }
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}
