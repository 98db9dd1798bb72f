//! Wallet file: spend keys plus the openings of outputs paid to them.
//!
//! Ownership is never stored. An output belongs to the wallet when one of
//! its notes opens the output's commitments under a key the wallet holds;
//! it is spent when the ledger has seen that key's image.

use std::path::Path;

use crct::coloured_tx::{AssetOpening, RingMember, TxInputRef};
use crct::group::{g, random_scalar, GroupPoint, Scalar};
use crct::ledger::Ledger;
use crct::mlsag::key_image;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

const VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Note {
    /// Index into `Wallet::keys`.
    pub key: usize,
    pub opening: AssetOpening,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Wallet {
    pub version: u32,
    pub keys: Vec<Scalar>,
    pub notes: Vec<Note>,
}

/// An unspent ledger output the wallet can sign for.
#[derive(Clone, Debug)]
pub struct Holding {
    pub reference: TxInputRef,
    pub member: RingMember,
    pub spend_key: Scalar,
    pub opening: AssetOpening,
}

impl Default for Wallet {
    fn default() -> Self {
        Wallet {
            version: VERSION,
            keys: Vec::new(),
            notes: Vec::new(),
        }
    }
}

impl Wallet {
    pub fn load_or_default(path: &Path) -> std::io::Result<Wallet> {
        match std::fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Wallet::default()),
            Err(e) => Err(e),
        }
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("wallet serializes");
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, text)?;
        std::fs::rename(tmp, path)
    }

    /// Adds a key and returns its index and public key.
    pub fn new_key<R: RngCore + CryptoRng>(&mut self, rng: &mut R) -> (usize, GroupPoint) {
        let x = random_scalar(rng);
        self.keys.push(x);
        (self.keys.len() - 1, x * g())
    }

    pub fn key_for(&self, public: &GroupPoint) -> Option<usize> {
        self.keys.iter().position(|x| *x * g() == *public)
    }

    pub fn remember(&mut self, key: usize, opening: AssetOpening) {
        self.notes.push(Note { key, opening });
    }

    /// Unspent outputs on `ledger` that this wallet can open.
    pub fn holdings(&self, ledger: &Ledger) -> Vec<Holding> {
        let mut found = Vec::new();
        for (id, out) in ledger.outputs().iter().enumerate() {
            let member = RingMember::from(out);
            let Some(note) = self.notes.iter().find(|n| {
                self.keys[n.key] * g() == member.spend_key && n.opening.opens(&member)
            }) else {
                continue;
            };
            let x = self.keys[note.key];
            if ledger.is_spent(&key_image(&x, &member.spend_key)) {
                continue;
            }
            found.push(Holding {
                reference: TxInputRef::new(id as u64),
                member,
                spend_key: x,
                opening: note.opening,
            });
        }
        found
    }
}
