//! Self-contained attack scenarios run against a fresh ledger.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::coloured_tx::{
    colour_id, make_output, sign_transaction, AssetOpening, OwnedInput, RingMember, Transaction,
    TransferPlan, TxInputRef,
};
use crate::error::TxError;
use crate::group::{g, random_scalar, Scalar};
use crate::ledger::{Ledger, RejectReason};
use crate::pedersen::combine;

const WIDTH: u32 = 16;
const DECOYS: usize = 12;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpsilonColourReport {
    pub epsilon: u64,
    pub target_label: String,
    /// The summed input colour commitments minus `m` copies of the output
    /// colour commitment carry no `H` component.
    pub aggregate_colour_balances: bool,
    /// The checked signing path refused the plan.
    pub honest_signer_refused: Option<String>,
    pub rejection: Option<RejectReason>,
    pub transaction: Transaction,
}

impl EpsilonColourReport {
    pub fn accepted(&self) -> bool {
        self.rejection.is_none()
    }
}

/// Two inputs coloured `f − ε` and `f + ε` paying one output coloured `f`.
/// Their colour commitments sum to `2f`, so only a per-input colour check
/// catches the forgery.
pub fn epsilon_colour_attack<R: RngCore + CryptoRng>(
    epsilon: u64,
    rng: &mut R,
) -> Result<EpsilonColourReport, TxError> {
    let label = "gold";
    let f = colour_id(label);
    let e = Scalar::from_u64(epsilon);

    let x_a = random_scalar(rng);
    let x_b = random_scalar(rng);
    let (out_a, open_a) = make_output(x_a * g(), 3, f - e, WIDTH, rng)?;
    let (out_b, open_b) = make_output(x_b * g(), 4, f + e, WIDTH, rng)?;
    let mut ledger = Ledger::with_decoy_genesis(DECOYS, WIDTH, rng);
    let first = ledger.outputs().len() as u64;
    let mut genesis = ledger.outputs().to_vec();
    genesis.extend([out_a.clone(), out_b.clone()]);
    ledger = Ledger::genesis(genesis);
    let refs = [TxInputRef::new(first), TxInputRef::new(first + 1)];
    let members = [RingMember::from(&out_a), RingMember::from(&out_b)];

    let (out, out_open) = make_output(random_scalar(rng) * g(), 7, f, WIDTH, rng)?;
    let decoy_refs = ledger
        .sample_decoys(2, 3, &refs, rng)
        .expect("genesis holds enough decoys");
    let secret_index = 1;
    let mut ring_refs = decoy_refs.clone();
    ring_refs.insert(secret_index, refs.to_vec());
    let ring: Vec<Vec<RingMember>> = ring_refs
        .iter()
        .map(|row| row.iter().map(|r| ledger.ring_member(*r).expect("sampled")).collect())
        .collect();

    let plan = TransferPlan {
        ring_refs,
        ring,
        secret_index,
        spend_keys: vec![x_a, x_b],
        inputs: vec![open_a, open_b],
        outputs: vec![out.clone()],
        output_openings: vec![out_open],
        metadata: format!("epsilon-colour {epsilon}").into_bytes(),
    };

    let aggregate = combine(
        &members.iter().map(|m| m.colour_commitment).collect::<Vec<_>>(),
        &[out.colour_commitment, out.colour_commitment],
    );
    let u = open_a.colour_blinding + open_b.colour_blinding - out_open.colour_blinding * Scalar::from_u64(2);
    let honest_signer_refused = plan.sign(rng).err().map(|e| e.to_string());
    let transaction = Transaction::Transfer(plan.sign_unchecked(rng)?);
    let rejection = ledger.apply(&transaction).err();
    Ok(EpsilonColourReport {
        epsilon,
        target_label: label.into(),
        aggregate_colour_balances: aggregate.0 == u * g(),
        honest_signer_refused,
        rejection,
        transaction,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DoubleSpendReport {
    pub first_accepted: bool,
    pub images_linked: bool,
    pub rejection: Option<RejectReason>,
    pub transaction: Transaction,
}

/// Spends one output twice over different decoy rings.
pub fn double_spend_attack<R: RngCore + CryptoRng>(rng: &mut R) -> Result<DoubleSpendReport, TxError> {
    let colour = colour_id("gold");
    let x = random_scalar(rng);
    let (out, opening) = make_output(x * g(), 10, colour, WIDTH, rng)?;
    let mut genesis = Ledger::with_decoy_genesis(DECOYS, WIDTH, rng).outputs().to_vec();
    let reference = TxInputRef::new(genesis.len() as u64);
    genesis.push(out.clone());
    let mut ledger = Ledger::genesis(genesis);
    let input = |opening: AssetOpening| OwnedInput {
        reference,
        member: RingMember::from(&out),
        spend_key: x,
        opening,
    };
    let spend = |ledger: &Ledger, rng: &mut R| -> Result<Transaction, TxError> {
        let decoys: Vec<Vec<_>> = ledger
            .sample_decoys(1, 3, &[reference], rng)
            .expect("genesis holds enough decoys")
            .into_iter()
            .map(|row| row.into_iter().map(|r| (r, ledger.ring_member(r).expect("sampled"))).collect())
            .collect();
        let recipient = random_scalar(rng) * g();
        Ok(sign_transaction(&[input(opening)], &decoys, &[(recipient, 10)], WIDTH, rng)?.tx)
    };
    let first = spend(&ledger, rng)?;
    let first_accepted = ledger.apply(&first).is_ok();
    let second = spend(&ledger, rng)?;
    Ok(DoubleSpendReport {
        first_accepted,
        images_linked: crate::mlsag::link_images(first.spend_key_images(), second.spend_key_images()),
        rejection: ledger.apply(&second).err(),
        transaction: second,
    })
}
