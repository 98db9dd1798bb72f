//! Append-only, in-memory ledger.
//!
//! Holds every accepted output, the set of spent key images and the colour
//! registry. Applying a transaction is all-or-nothing.
//!
//! Snapshot file layout (all integers varints unless noted):
//!
//! ```text
//! "CRCTLEDG" ‖ version (u16 LE) ‖ height
//! ‖ #outputs ‖ outputs (canonical output encoding)
//! ‖ #spent   ‖ spent key images, 32 bytes each, strictly ascending
//! ‖ #colours ‖ per colour, ascending by label:
//!              label ‖ id (32) ‖ 0x00 | 0x01 ‖ output id ‖ height ‖ 0x00 | 0x01 ‖ supply
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{CryptoRng, Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coloured_tx::{
    check_transaction, colour_id, make_output, Colour, Rejection, RingMember, Transaction,
    TxInputRef, TxOutput, NATIVE_COLOUR,
};
use crate::encoding::{Reader, Writer};
use crate::error::DecodeError;
use crate::group::{g, random_scalar, GroupPoint, Scalar};

const MAGIC: &[u8; 8] = b"CRCTLEDG";
const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum LedgerError {
    #[error("ledger holds {available} eligible outputs, {needed} needed")]
    InsufficientOutputs { needed: usize, available: usize },
    #[error("snapshot I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt snapshot: {0}")]
    Decode(#[from] DecodeError),
}

/// Reasons [`Ledger::apply`] refuses a transaction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    #[error("bad-signature")]
    BadSignature,
    #[error("double-spend")]
    DoubleSpend,
    #[error("bad-range")]
    BadRange,
    #[error("bad-colour-eq")]
    BadColourEq,
    #[error("unknown-ref {0}")]
    UnknownRef(u64),
    #[error("duplicate-colour")]
    DuplicateColour,
    #[error("bad-issuance")]
    BadIssuance,
    #[error("malformed: {0}")]
    Malformed(String),
}

impl From<Rejection> for RejectReason {
    fn from(r: Rejection) -> Self {
        match r {
            Rejection::UnknownRef(id) => RejectReason::UnknownRef(id),
            Rejection::Malformed(why) => RejectReason::Malformed(why),
            Rejection::BadSignature => RejectReason::BadSignature,
            Rejection::BadRange => RejectReason::BadRange,
            Rejection::BadColourEq => RejectReason::BadColourEq,
            Rejection::BadIssuance => RejectReason::BadIssuance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssuanceRecord {
    pub label: String,
    pub colour_id: Scalar,
    /// `None` for the genesis colour.
    pub output_id: Option<u64>,
    pub height: u64,
    /// Disclosed supply, when the issuance opened its amount.
    pub supply: Option<u64>,
}

/// Colours indexed both by label and by scalar id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColourRegistry {
    by_label: BTreeMap<String, IssuanceRecord>,
    by_id: BTreeMap<[u8; 32], String>,
}

impl ColourRegistry {
    pub fn contains_label(&self, label: &str) -> bool {
        self.by_label.contains_key(label)
    }

    pub fn contains_id(&self, id: &Scalar) -> bool {
        self.by_id.contains_key(&id.to_bytes())
    }

    pub fn get(&self, label: &str) -> Option<&IssuanceRecord> {
        self.by_label.get(label)
    }

    pub fn label_for(&self, id: &Scalar) -> Option<&str> {
        self.by_id.get(&id.to_bytes()).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.by_label.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_label.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &IssuanceRecord> {
        self.by_label.values()
    }

    /// Both indices have the same size and point at each other.
    pub fn is_injective(&self) -> bool {
        self.by_label.len() == self.by_id.len()
            && self.by_label.iter().all(|(label, rec)| {
                self.by_id.get(&rec.colour_id.to_bytes()) == Some(label)
            })
    }

    fn insert(&mut self, record: IssuanceRecord) -> Result<(), RejectReason> {
        if self.contains_label(&record.label) || self.contains_id(&record.colour_id) {
            return Err(RejectReason::DuplicateColour);
        }
        self.by_id
            .insert(record.colour_id.to_bytes(), record.label.clone());
        self.by_label.insert(record.label.clone(), record);
        Ok(())
    }
}

/// What an accepted transaction added.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Receipt {
    pub height: u64,
    pub first_output: u64,
    pub output_count: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ledger {
    outputs: Vec<TxOutput>,
    spent_images: BTreeSet<[u8; 32]>,
    colours: ColourRegistry,
    height: u64,
}

impl Ledger {
    /// A ledger whose first outputs are `outputs`, with the native colour
    /// registered.
    pub fn genesis(outputs: Vec<TxOutput>) -> Ledger {
        let mut colours = ColourRegistry::default();
        colours
            .insert(IssuanceRecord {
                label: NATIVE_COLOUR.into(),
                colour_id: colour_id(NATIVE_COLOUR),
                output_id: None,
                height: 0,
                supply: None,
            })
            .expect("empty registry");
        Ledger {
            outputs,
            spent_images: BTreeSet::new(),
            colours,
            height: 0,
        }
    }

    /// Genesis with `count` native-colour outputs under throwaway keys, so
    /// that decoys exist from the start.
    pub fn with_decoy_genesis<R: RngCore + CryptoRng>(count: usize, width: u32, rng: &mut R) -> Ledger {
        let native = Colour::native().id;
        let max_amount = if width >= 64 { u64::MAX } else { (1u64 << width) - 1 };
        let outputs = (0..count)
            .map(|_| {
                let key = random_scalar(rng) * g();
                let amount = rng.gen_range(0..=max_amount.min(1_000_000));
                make_output(key, amount, native, width, rng)
                    .expect("amount within width")
                    .0
            })
            .collect();
        Ledger::genesis(outputs)
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn outputs(&self) -> &[TxOutput] {
        &self.outputs
    }

    pub fn output(&self, r: TxInputRef) -> Option<&TxOutput> {
        usize::try_from(r.output_id)
            .ok()
            .and_then(|i| self.outputs.get(i))
    }

    pub fn ring_member(&self, r: TxInputRef) -> Option<RingMember> {
        self.output(r).map(RingMember::from)
    }

    pub fn colours(&self) -> &ColourRegistry {
        &self.colours
    }

    pub fn spent_count(&self) -> usize {
        self.spent_images.len()
    }

    pub fn is_spent(&self, image: &GroupPoint) -> bool {
        self.spent_images.contains(&image.to_bytes())
    }

    /// Full validity check against the current state, without applying.
    pub fn check(&self, tx: &Transaction) -> Result<(), RejectReason> {
        check_transaction(tx, |r| self.ring_member(r))?;
        let images = tx.spend_key_images();
        let mut seen = BTreeSet::new();
        for image in images {
            let bytes = image.to_bytes();
            if self.spent_images.contains(&bytes) || !seen.insert(bytes) {
                return Err(RejectReason::DoubleSpend);
            }
        }
        if let Transaction::Issuance(iss) = tx {
            if self.colours.contains_label(&iss.label)
                || self.colours.contains_id(&iss.colour_opening.value)
            {
                return Err(RejectReason::DuplicateColour);
            }
        }
        Ok(())
    }

    /// Validates and appends `tx`. On rejection the ledger is untouched.
    pub fn apply(&mut self, tx: &Transaction) -> Result<Receipt, RejectReason> {
        self.check(tx)?;
        let first_output = self.outputs.len() as u64;
        let height = self.height + 1;
        if let Transaction::Issuance(iss) = tx {
            self.colours.insert(IssuanceRecord {
                label: iss.label.clone(),
                colour_id: iss.colour_opening.value,
                output_id: Some(first_output),
                height,
                supply: iss.amount_opening.map(|o| o.amount),
            })?;
        }
        for image in tx.spend_key_images() {
            self.spent_images.insert(image.to_bytes());
        }
        self.outputs.extend(tx.outputs().iter().cloned());
        self.height = height;
        Ok(Receipt {
            height,
            first_output,
            output_count: tx.outputs().len(),
        })
    }

    /// `rows × m` distinct references drawn uniformly from all outputs not in
    /// `exclude`.
    pub fn sample_decoys<R: RngCore>(
        &self,
        m: usize,
        rows: usize,
        exclude: &[TxInputRef],
        rng: &mut R,
    ) -> Result<Vec<Vec<TxInputRef>>, LedgerError> {
        let excluded: BTreeSet<u64> = exclude.iter().map(|r| r.output_id).collect();
        let candidates: Vec<u64> = (0..self.outputs.len() as u64)
            .filter(|id| !excluded.contains(id))
            .collect();
        let needed = m * rows;
        if needed > candidates.len() {
            return Err(LedgerError::InsufficientOutputs {
                needed,
                available: candidates.len(),
            });
        }
        let picks = rand::seq::index::sample(rng, candidates.len(), needed);
        let refs: Vec<TxInputRef> = picks
            .iter()
            .map(|i| TxInputRef::new(candidates[i]))
            .collect();
        Ok(refs.chunks(m.max(1)).map(<[_]>::to_vec).collect())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.bytes(MAGIC);
        w.u16_le(VERSION);
        w.varint(self.height);
        w.varint(self.outputs.len() as u64);
        for out in &self.outputs {
            out.write(&mut w);
        }
        w.varint(self.spent_images.len() as u64);
        for image in &self.spent_images {
            w.bytes(image);
        }
        w.varint(self.colours.len() as u64);
        for rec in self.colours.iter() {
            w.len_prefixed(rec.label.as_bytes());
            w.scalar(&rec.colour_id);
            write_optional(&mut w, rec.output_id);
            w.varint(rec.height);
            write_optional(&mut w, rec.supply);
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Ledger, DecodeError> {
        let mut r = Reader::new(bytes);
        if r.take(MAGIC.len())? != MAGIC {
            return Err(DecodeError::BadMagic);
        }
        let version = r.u16_le()?;
        if version != VERSION {
            return Err(DecodeError::UnsupportedVersion(version));
        }
        let height = r.varint()?;
        let n_outputs = r.length()?;
        let outputs = (0..n_outputs)
            .map(|_| TxOutput::read(&mut r))
            .collect::<Result<Vec<_>, _>>()?;
        let n_spent = r.length()?;
        let mut spent_images = BTreeSet::new();
        let mut previous: Option<[u8; 32]> = None;
        for _ in 0..n_spent {
            let bytes = r.array32()?;
            GroupPoint::from_bytes(&bytes)?;
            if previous.is_some_and(|p| p >= bytes) {
                return Err(DecodeError::Inconsistent("spent images not strictly ascending"));
            }
            previous = Some(bytes);
            spent_images.insert(bytes);
        }
        let n_colours = r.length()?;
        let mut colours = ColourRegistry::default();
        for _ in 0..n_colours {
            let label = std::str::from_utf8(r.len_prefixed()?)
                .map_err(|_| DecodeError::BadUtf8)?
                .to_owned();
            let id = r.scalar()?;
            if id != colour_id(&label) {
                return Err(DecodeError::Inconsistent("colour id does not match label"));
            }
            let output_id = read_optional(&mut r)?;
            let rec_height = r.varint()?;
            let supply = read_optional(&mut r)?;
            colours
                .insert(IssuanceRecord {
                    label,
                    colour_id: id,
                    output_id,
                    height: rec_height,
                    supply,
                })
                .map_err(|_| DecodeError::Inconsistent("duplicate colour"))?;
        }
        r.finish()?;
        Ok(Ledger {
            outputs,
            spent_images,
            colours,
            height,
        })
    }

    /// Writes the snapshot to `path` via a temporary file and rename.
    pub fn save(&self, path: &Path) -> Result<(), LedgerError> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.to_bytes())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Ledger, LedgerError> {
        let bytes = std::fs::read(path)?;
        Ok(Ledger::from_bytes(&bytes)?)
    }
}

fn write_optional(w: &mut Writer, v: Option<u64>) {
    match v {
        None => w.u8(0),
        Some(v) => {
            w.u8(1);
            w.varint(v);
        }
    }
}

fn read_optional(r: &mut Reader<'_>) -> Result<Option<u64>, DecodeError> {
    match r.u8()? {
        0 => Ok(None),
        1 => Ok(Some(r.varint()?)),
        t => Err(DecodeError::UnknownTag(t)),
    }
}
