pub mod coloured_tx;
pub mod encoding;
pub mod error;
pub mod group;
pub mod mlsag;
pub mod pedersen;
pub mod range_proof;
pub mod ledger;
pub mod analysis;
pub mod attacks;
