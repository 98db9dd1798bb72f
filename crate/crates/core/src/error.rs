use thiserror::Error;

/// Failures while decoding the canonical binary or hex encodings.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("input ended early")]
    Truncated,
    #[error("scalar encoding is not reduced modulo the group order")]
    NonCanonicalScalar,
    #[error("bytes do not encode a group element")]
    InvalidPoint,
    #[error("malformed hex string")]
    BadHex,
    #[error("{0} trailing bytes after the encoded value")]
    TrailingBytes(usize),
    #[error("varint overflows 64 bits or is not minimally encoded")]
    BadVarint,
    #[error("unknown tag byte {0:#04x}")]
    UnknownTag(u8),
    #[error("length {0} exceeds the allowed bound")]
    LengthTooLarge(u64),
    #[error("string field is not valid UTF-8")]
    BadUtf8,
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("inconsistent structure: {0}")]
    Inconsistent(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MlsagError {
    #[error("a ring needs at least two rows, got {0}")]
    RingTooSmall(usize),
    #[error("key vectors need at least one column")]
    EmptyKeyVector,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("secret index {index} outside ring of {rows} rows")]
    IndexOutOfRange { index: usize, rows: usize },
    #[error("secret key for column {0} does not match the public key at the signer row")]
    SecretMismatch(usize),
    #[error("ring carries no secret index")]
    NoSecretIndex,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TxError {
    #[error(transparent)]
    Mlsag(#[from] MlsagError),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("transaction has no outputs")]
    NoOutputs,
    #[error("inputs sum to {inputs} but outputs sum to {outputs}")]
    ConservationViolated { inputs: u128, outputs: u128 },
    #[error("input and output colours differ")]
    ColourMismatch,
    #[error("amount {amount} does not fit in {width} bits")]
    AmountOutOfRange { amount: u64, width: u32 },
    #[error("range proof width must be in 1..=64, got {0}")]
    InvalidWidth(u32),
    #[error("opening does not match the output commitment")]
    OpeningMismatch,
    #[error("ring reference {0} does not resolve to a ledger output")]
    UnknownRef(u64),
}
