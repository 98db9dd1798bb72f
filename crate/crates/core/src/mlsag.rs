//! Multilayered linkable spontaneous anonymous group signatures.
//!
//! A signature proves knowledge of every secret key in one row of an
//! `n × cols` matrix of public keys without revealing the row. The first
//! `linkable` columns carry key images `I_j = x_j·Hp(P_π^j)`, which make two
//! signatures with a shared secret linkable. Remaining columns are signed
//! without key images: they only contribute `L = s·G + c·P` to the challenge
//! chain. A plain MLSAG has every column linkable.
//!
//! Challenge for row `i + 1` (rows are 0-based and wrap mod `n`):
//!
//! ```text
//! c_{i+1} = hash_to_scalar(msg ‖ L_i^1 ‖ R_i^1 ‖ … ‖ L_i^d ‖ R_i^d ‖ L_i^{d+1} ‖ … ‖ L_i^cols)
//! ```
//!
//! with every point in its 32-byte encoding.
//!
//! Wire format: `c_1 ‖ s (row-major, n·cols scalars) ‖ I_1 … I_d`.

use rand::{CryptoRng, Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::encoding::{Reader, Writer};
use crate::error::{DecodeError, MlsagError};
use crate::group::{g, hash_to_point, random_scalar, GroupPoint, Scalar, ScalarHasher};

/// `m` public keys, optionally with their secrets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyVector {
    pub publics: Vec<GroupPoint>,
    pub secrets: Option<Vec<Scalar>>,
}

impl KeyVector {
    pub fn public_only(&self) -> KeyVector {
        KeyVector {
            publics: self.publics.clone(),
            secrets: None,
        }
    }
}

/// A key matrix with, for the signer, the secret row and the key images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ring {
    pub matrix: Vec<Vec<GroupPoint>>,
    pub secret_index: Option<usize>,
    pub key_images: Vec<GroupPoint>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlsagSignature {
    pub c1: Scalar,
    /// `responses[i][j]` is `s_i^j`.
    pub responses: Vec<Vec<Scalar>>,
    pub key_images: Vec<GroupPoint>,
}

/// The hash-to-point used for key images: `Hp(P) = hash_to_point(encode(P))`.
pub fn key_image_base(p: &GroupPoint) -> GroupPoint {
    hash_to_point(&p.to_bytes())
}

pub fn key_image(secret: &Scalar, public: &GroupPoint) -> GroupPoint {
    *secret * key_image_base(public)
}

pub fn keygen<R: RngCore + CryptoRng>(m: usize, rng: &mut R) -> Result<KeyVector, MlsagError> {
    if m == 0 {
        return Err(MlsagError::EmptyKeyVector);
    }
    let secrets: Vec<Scalar> = (0..m).map(|_| random_scalar(rng)).collect();
    Ok(KeyVector {
        publics: secrets.iter().map(|x| *x * g()).collect(),
        secrets: Some(secrets),
    })
}

/// Hides `own` among `decoys` at a uniformly random row and computes key
/// images for every column.
pub fn keyselect<R: RngCore + CryptoRng>(
    own: &KeyVector,
    decoys: &[Vec<GroupPoint>],
    rng: &mut R,
) -> Result<Ring, MlsagError> {
    let secrets = own.secrets.as_ref().ok_or(MlsagError::NoSecretIndex)?;
    let m = own.publics.len();
    if m == 0 {
        return Err(MlsagError::EmptyKeyVector);
    }
    if decoys.is_empty() {
        return Err(MlsagError::RingTooSmall(1));
    }
    if let Some(bad) = decoys.iter().find(|d| d.len() != m) {
        return Err(MlsagError::DimensionMismatch(format!(
            "decoy vector has {} keys, expected {m}",
            bad.len()
        )));
    }
    let n = decoys.len() + 1;
    let pi = rng.gen_range(0..n);
    let mut matrix = decoys.to_vec();
    matrix.insert(pi, own.publics.clone());
    Ring::for_signer(matrix, pi, secrets, m)
}

impl Ring {
    /// Builds the signer's view of a ring, computing key images for the first
    /// `linkable` columns from `secrets`. Secrets are not checked against the
    /// matrix here; [`sign`] does that.
    pub fn for_signer(
        matrix: Vec<Vec<GroupPoint>>,
        secret_index: usize,
        secrets: &[Scalar],
        linkable: usize,
    ) -> Result<Ring, MlsagError> {
        let cols = check_matrix(&matrix)?;
        if secret_index >= matrix.len() {
            return Err(MlsagError::IndexOutOfRange {
                index: secret_index,
                rows: matrix.len(),
            });
        }
        if secrets.len() != cols || linkable > cols {
            return Err(MlsagError::DimensionMismatch(format!(
                "{} secrets and {linkable} linkable columns for {cols} columns",
                secrets.len()
            )));
        }
        let key_images = (0..linkable)
            .map(|j| key_image(&secrets[j], &matrix[secret_index][j]))
            .collect();
        Ok(Ring {
            matrix,
            secret_index: Some(secret_index),
            key_images,
        })
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn cols(&self) -> usize {
        self.matrix.first().map_or(0, Vec::len)
    }
}

/// Returns the column count of a well-formed matrix.
fn check_matrix(matrix: &[Vec<GroupPoint>]) -> Result<usize, MlsagError> {
    if matrix.len() < 2 {
        return Err(MlsagError::RingTooSmall(matrix.len()));
    }
    let cols = matrix[0].len();
    if cols == 0 {
        return Err(MlsagError::EmptyKeyVector);
    }
    if matrix.iter().any(|row| row.len() != cols) {
        return Err(MlsagError::DimensionMismatch(
            "rows of differing length".into(),
        ));
    }
    Ok(cols)
}

fn key_image_bases(matrix: &[Vec<GroupPoint>], linkable: usize) -> Vec<Vec<GroupPoint>> {
    matrix
        .iter()
        .map(|row| row[..linkable].iter().map(key_image_base).collect())
        .collect()
}

/// Signs `msg`, first checking that `secrets` open the signer's row and match
/// the ring's key images.
pub fn sign<R: RngCore + CryptoRng>(
    msg: &[u8],
    ring: &Ring,
    secrets: &[Scalar],
    rng: &mut R,
) -> Result<MlsagSignature, MlsagError> {
    let pi = ring.secret_index.ok_or(MlsagError::NoSecretIndex)?;
    check_matrix(&ring.matrix)?;
    if secrets.len() != ring.cols() {
        return Err(MlsagError::DimensionMismatch(format!(
            "{} secrets for {} columns",
            secrets.len(),
            ring.cols()
        )));
    }
    for (j, (x, p)) in secrets.iter().zip(&ring.matrix[pi]).enumerate() {
        if *x * g() != *p {
            return Err(MlsagError::SecretMismatch(j));
        }
    }
    for (j, image) in ring.key_images.iter().enumerate() {
        if key_image(&secrets[j], &ring.matrix[pi][j]) != *image {
            return Err(MlsagError::SecretMismatch(j));
        }
    }
    sign_unchecked(msg, ring, secrets, rng)
}

/// Runs the signing algorithm without checking that `secrets` belong to the
/// signer's row. The output verifies only if they do; this exists so that
/// malformed spends can be constructed and shown to be rejected.
pub fn sign_unchecked<R: RngCore + CryptoRng>(
    msg: &[u8],
    ring: &Ring,
    secrets: &[Scalar],
    rng: &mut R,
) -> Result<MlsagSignature, MlsagError> {
    let pi = ring.secret_index.ok_or(MlsagError::NoSecretIndex)?;
    let cols = check_matrix(&ring.matrix)?;
    let n = ring.rows();
    let linkable = ring.key_images.len();
    if secrets.len() != cols || linkable > cols || pi >= n {
        return Err(MlsagError::DimensionMismatch(
            "secrets, key images and matrix disagree".into(),
        ));
    }
    let bases = key_image_bases(&ring.matrix, linkable);

    let alphas: Vec<Scalar> = (0..cols).map(|_| random_scalar(rng)).collect();
    let mut responses: Vec<Vec<Scalar>> = (0..n)
        .map(|i| {
            if i == pi {
                vec![Scalar::ZERO; cols]
            } else {
                (0..cols).map(|_| random_scalar(rng)).collect()
            }
        })
        .collect();
    let mut challenges = vec![Scalar::ZERO; n];

    let mut hasher = ScalarHasher::new();
    hasher.update(msg);
    for (j, alpha) in alphas.iter().enumerate() {
        hasher.point(&(*alpha * g()));
        if j < linkable {
            hasher.point(&(*alpha * bases[pi][j]));
        }
    }
    let mut i = (pi + 1) % n;
    challenges[i] = hasher.finalize();
    while i != pi {
        let next = row_challenge(
            msg,
            &ring.matrix[i],
            &bases[i],
            &responses[i],
            &challenges[i],
            &ring.key_images,
        );
        i = (i + 1) % n;
        challenges[i] = next;
    }
    for j in 0..cols {
        responses[pi][j] = alphas[j] - challenges[pi] * secrets[j];
    }
    Ok(MlsagSignature {
        c1: challenges[0],
        responses,
        key_images: ring.key_images.clone(),
    })
}

fn row_challenge(
    msg: &[u8],
    keys: &[GroupPoint],
    bases: &[GroupPoint],
    responses: &[Scalar],
    challenge: &Scalar,
    key_images: &[GroupPoint],
) -> Scalar {
    let mut hasher = ScalarHasher::new();
    hasher.update(msg);
    for (j, (key, s)) in keys.iter().zip(responses).enumerate() {
        hasher.point(&GroupPoint::mul_add_base(challenge, key, s));
        if j < key_images.len() {
            hasher.point(&GroupPoint::multiscalar_mul(
                &[*s, *challenge],
                &[bases[j], key_images[j]],
            ));
        }
    }
    hasher.finalize()
}

/// Recomputes the challenge chain from `c1` around all `n` rows and accepts
/// iff it closes.
pub fn verify(
    msg: &[u8],
    sig: &MlsagSignature,
    matrix: &[Vec<GroupPoint>],
) -> Result<bool, MlsagError> {
    let cols = check_matrix(matrix)?;
    if sig.responses.len() != matrix.len()
        || sig.responses.iter().any(|r| r.len() != cols)
        || sig.key_images.len() > cols
    {
        return Err(MlsagError::DimensionMismatch(format!(
            "signature shape does not match {}x{cols} matrix",
            matrix.len()
        )));
    }
    let bases = key_image_bases(matrix, sig.key_images.len());
    let mut c = sig.c1;
    for (i, row) in matrix.iter().enumerate() {
        c = row_challenge(msg, row, &bases[i], &sig.responses[i], &c, &sig.key_images);
    }
    Ok(c == sig.c1)
}

/// True iff the two signatures share a key image.
pub fn link(a: &MlsagSignature, b: &MlsagSignature) -> bool {
    link_images(&a.key_images, &b.key_images)
}

pub fn link_images(a: &[GroupPoint], b: &[GroupPoint]) -> bool {
    a.iter().any(|x| b.contains(x))
}

impl MlsagSignature {
    pub fn rows(&self) -> usize {
        self.responses.len()
    }

    pub fn cols(&self) -> usize {
        self.responses.first().map_or(0, Vec::len)
    }

    /// `(n·cols + 1 + d) · 32`.
    pub fn encoded_len(&self) -> usize {
        (self.rows() * self.cols() + 1 + self.key_images.len()) * 32
    }

    pub fn write(&self, w: &mut Writer) {
        w.scalar(&self.c1);
        for s in self.responses.iter().flatten() {
            w.scalar(s);
        }
        for image in &self.key_images {
            w.point(image);
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        self.write(&mut w);
        w.into_bytes()
    }

    pub fn read(
        r: &mut Reader<'_>,
        rows: usize,
        cols: usize,
        linkable: usize,
    ) -> Result<Self, DecodeError> {
        let c1 = r.scalar()?;
        let mut responses = Vec::with_capacity(rows);
        for _ in 0..rows {
            responses.push((0..cols).map(|_| r.scalar()).collect::<Result<Vec<_>, _>>()?);
        }
        let key_images = (0..linkable)
            .map(|_| r.point())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MlsagSignature {
            c1,
            responses,
            key_images,
        })
    }

    pub fn from_bytes(
        bytes: &[u8],
        rows: usize,
        cols: usize,
        linkable: usize,
    ) -> Result<Self, DecodeError> {
        let mut r = Reader::new(bytes);
        let sig = Self::read(&mut r, rows, cols, linkable)?;
        r.finish()?;
        Ok(sig)
    }
}

/// Random decoy key vectors, for tests and demos.
pub fn random_decoys<R: RngCore + CryptoRng>(
    count: usize,
    m: usize,
    rng: &mut R,
) -> Vec<Vec<GroupPoint>> {
    (0..count)
        .map(|_| (0..m).map(|_| random_scalar(rng) * g()).collect())
        .collect()
}
