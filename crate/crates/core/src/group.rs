//! Prime-order group used by every other module.
//!
//! Backed by the Ristretto group over Curve25519, so there is no cofactor to
//! worry about: every decodable point is in the prime-order group.
//!
//! Canonical wire format:
//! - [`Scalar`]: 32 bytes, little-endian, fully reduced mod `l`.
//! - [`GroupPoint`]: 32 bytes, compressed Ristretto encoding.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::LazyLock;

use curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT;
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar as DalekScalar;
use curve25519_dalek::traits::{Identity, VartimeMultiscalarMul};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha512};

use crate::error::DecodeError;

/// Domain tag for [`hash_to_scalar`].
pub const H2S_TAG: &[u8] = b"crct/h2s";
/// Domain tag for [`hash_to_point`].
pub const H2P_TAG: &[u8] = b"crct/h2p";

/// Little-endian `l = 2^252 + 27742317777372353535851937790883648493`.
pub const GROUP_ORDER: [u8; 32] = [
    0xed, 0xd3, 0xf5, 0x5c, 0x1a, 0x63, 0x12, 0x58, 0xd6, 0x9c, 0xf7, 0xa2, 0xde, 0xf9, 0xde, 0x14,
    0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x10,
];

/// An integer modulo the group order `l`, always canonically reduced.
#[derive(Clone, Copy, PartialEq, Eq, Default)]
pub struct Scalar(pub(crate) DalekScalar);

/// An element of the prime-order group.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct GroupPoint(pub(crate) RistrettoPoint);

impl Scalar {
    pub const ZERO: Scalar = Scalar(DalekScalar::ZERO);
    pub const ONE: Scalar = Scalar(DalekScalar::ONE);

    pub fn from_u64(v: u64) -> Self {
        Scalar(DalekScalar::from(v))
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.to_bytes()
    }

    /// Rejects encodings that are not fully reduced.
    pub fn from_bytes(bytes: &[u8; 32]) -> Result<Self, DecodeError> {
        Option::from(DalekScalar::from_canonical_bytes(*bytes))
            .map(Scalar)
            .ok_or(DecodeError::NonCanonicalScalar)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self, DecodeError> {
        let arr: [u8; 32] = bytes.try_into().map_err(|_| DecodeError::Truncated)?;
        Self::from_bytes(&arr)
    }

    pub fn invert(&self) -> Scalar {
        Scalar(self.0.invert())
    }

    pub fn is_zero(&self) -> bool {
        self.0 == DalekScalar::ZERO
    }

    /// `2^k` for `k < 64`.
    pub fn pow2(k: u32) -> Scalar {
        assert!(k < 64, "pow2 exponent out of range");
        Scalar::from_u64(1u64 << k)
    }
}

impl GroupPoint {
    pub fn identity() -> Self {
        GroupPoint(RistrettoPoint::identity())
    }

    pub fn generator() -> Self {
        GroupPoint(RISTRETTO_BASEPOINT_POINT)
    }

    pub fn to_bytes(&self) -> [u8; 32] {
        self.0.compress().to_bytes()
    }

    /// Decodes a compressed point; rejects anything that is not a valid
    /// Ristretto encoding.
    pub fn from_bytes(bytes: &[u8; 32]) -> Result<Self, DecodeError> {
        CompressedRistretto(*bytes)
            .decompress()
            .map(GroupPoint)
            .ok_or(DecodeError::InvalidPoint)
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self, DecodeError> {
        let arr: [u8; 32] = bytes.try_into().map_err(|_| DecodeError::Truncated)?;
        Self::from_bytes(&arr)
    }

    pub fn is_identity(&self) -> bool {
        self.0 == RistrettoPoint::identity()
    }

    /// `a * A + b * G`, variable time.
    pub fn mul_add_base(a: &Scalar, point: &GroupPoint, b: &Scalar) -> GroupPoint {
        GroupPoint(RistrettoPoint::vartime_double_scalar_mul_basepoint(
            &a.0, &point.0, &b.0,
        ))
    }

    /// `Σ scalars[i] * points[i]`, variable time.
    pub fn multiscalar_mul(scalars: &[Scalar], points: &[GroupPoint]) -> GroupPoint {
        assert_eq!(scalars.len(), points.len());
        GroupPoint(RistrettoPoint::vartime_multiscalar_mul(
            scalars.iter().map(|s| s.0),
            points.iter().map(|p| p.0),
        ))
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a GroupPoint>>(points: I) -> GroupPoint {
        points
            .into_iter()
            .fold(GroupPoint::identity(), |acc, p| acc + *p)
    }
}

/// The two public generators and the group order.
#[derive(Clone, Debug)]
pub struct GroupParams {
    pub g: GroupPoint,
    pub h: GroupPoint,
    /// Little-endian encoding of the group order `l`.
    pub order: [u8; 32],
}

static PARAMS: LazyLock<GroupParams> = LazyLock::new(|| {
    let g = GroupPoint::generator();
    GroupParams {
        g,
        h: hash_to_point(&g.to_bytes()),
        order: GROUP_ORDER,
    }
});

pub fn params() -> &'static GroupParams {
    &PARAMS
}

/// Shorthand for the base point `G`.
pub fn g() -> GroupPoint {
    params().g
}

/// Shorthand for the second generator `H = hash_to_point(encode(G))`.
pub fn h() -> GroupPoint {
    params().h
}

pub fn hash_to_scalar(data: &[u8]) -> Scalar {
    hash_to_scalar_parts(&[data])
}

/// Hashes the concatenation of `parts` to a scalar.
pub fn hash_to_scalar_parts(parts: &[&[u8]]) -> Scalar {
    let mut hasher = Sha512::new();
    hasher.update(H2S_TAG);
    for part in parts {
        hasher.update(part);
    }
    Scalar(DalekScalar::from_hash(hasher))
}

/// Incremental form of [`hash_to_scalar`], for long transcripts.
#[derive(Clone)]
pub struct ScalarHasher(Sha512);

impl ScalarHasher {
    pub fn new() -> Self {
        let mut hasher = Sha512::new();
        hasher.update(H2S_TAG);
        ScalarHasher(hasher)
    }

    pub fn update(&mut self, data: &[u8]) -> &mut Self {
        self.0.update(data);
        self
    }

    pub fn point(&mut self, p: &GroupPoint) -> &mut Self {
        self.update(&p.to_bytes())
    }

    pub fn finalize(self) -> Scalar {
        Scalar(DalekScalar::from_hash(self.0))
    }
}

impl Default for ScalarHasher {
    fn default() -> Self {
        Self::new()
    }
}

/// Deterministic map to a point with unknown discrete log relative to `G`
/// (Elligator-based hash-to-group over a 64-byte digest).
pub fn hash_to_point(data: &[u8]) -> GroupPoint {
    let mut hasher = Sha512::new();
    hasher.update(H2P_TAG);
    hasher.update(data);
    GroupPoint(RistrettoPoint::from_hash(hasher))
}

pub fn random_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Scalar {
    Scalar(DalekScalar::random(rng))
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 + rhs.0)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 - rhs.0)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 * rhs.0)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Scalar {
    fn sub_assign(&mut self, rhs: Scalar) {
        self.0 -= rhs.0;
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::ZERO, |a, b| a + b)
    }
}

impl From<u64> for Scalar {
    fn from(v: u64) -> Self {
        Scalar::from_u64(v)
    }
}

impl Add for GroupPoint {
    type Output = GroupPoint;
    fn add(self, rhs: GroupPoint) -> GroupPoint {
        GroupPoint(self.0 + rhs.0)
    }
}

impl Sub for GroupPoint {
    type Output = GroupPoint;
    fn sub(self, rhs: GroupPoint) -> GroupPoint {
        GroupPoint(self.0 - rhs.0)
    }
}

impl Neg for GroupPoint {
    type Output = GroupPoint;
    fn neg(self) -> GroupPoint {
        GroupPoint(-self.0)
    }
}

impl AddAssign for GroupPoint {
    fn add_assign(&mut self, rhs: GroupPoint) {
        self.0 += rhs.0;
    }
}

impl SubAssign for GroupPoint {
    fn sub_assign(&mut self, rhs: GroupPoint) {
        self.0 -= rhs.0;
    }
}

impl Mul<GroupPoint> for Scalar {
    type Output = GroupPoint;
    fn mul(self, rhs: GroupPoint) -> GroupPoint {
        GroupPoint(self.0 * rhs.0)
    }
}

impl Mul<&GroupPoint> for &Scalar {
    type Output = GroupPoint;
    fn mul(self, rhs: &GroupPoint) -> GroupPoint {
        GroupPoint(self.0 * rhs.0)
    }
}

impl std::hash::Hash for GroupPoint {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.to_bytes().hash(state);
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({})", hex::encode(self.to_bytes()))
    }
}

impl fmt::Debug for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupPoint({})", hex::encode(self.to_bytes()))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.to_bytes()))
    }
}

impl fmt::Display for GroupPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.to_bytes()))
    }
}

impl std::str::FromStr for Scalar {
    type Err = DecodeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = hex::decode(s).map_err(|_| DecodeError::BadHex)?;
        Scalar::from_slice(&bytes)
    }
}

impl std::str::FromStr for GroupPoint {
    type Err = DecodeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = hex::decode(s).map_err(|_| DecodeError::BadHex)?;
        GroupPoint::from_slice(&bytes)
    }
}

// JSON carries both types as lowercase hex of their canonical 32-byte form.

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for GroupPoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GroupPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{RngCore, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn rng() -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(7)
    }

    fn arb_scalar() -> impl Strategy<Value = Scalar> {
        any::<[u8; 32]>().prop_map(|b| Scalar(DalekScalar::from_bytes_mod_order(b)))
    }

    #[test]
    fn scalar_identities() {
        let mut rng = rng();
        let x = random_scalar(&mut rng);
        assert_eq!(x + Scalar::ZERO, x);
        assert_eq!(x - x, Scalar::ZERO);
        assert_eq!(x * Scalar::ONE, x);
        assert_eq!(-(-x), x);
        assert_eq!(x + (-x), Scalar::ZERO);
    }

    #[test]
    fn point_mul_basics() {
        let g = g();
        assert_eq!(Scalar::ONE * g, g);
        assert!((Scalar::ZERO * g).is_identity());
        assert_eq!(Scalar::from_u64(2) * g, g + g);
    }

    #[test]
    fn point_add_basics() {
        let mut rng = rng();
        let p = random_scalar(&mut rng) * g();
        assert_eq!(p + GroupPoint::identity(), p);
        assert!((p + (-p)).is_identity());
        let a = random_scalar(&mut rng);
        let b = random_scalar(&mut rng);
        assert_eq!(a * g() + b * g(), (a + b) * g());
    }

    #[test]
    fn h_is_hash_of_g() {
        assert_eq!(params().h, hash_to_point(&params().g.to_bytes()));
        assert_ne!(params().h, params().g);
        let mut l_minus_one = GROUP_ORDER;
        l_minus_one[0] -= 1;
        assert_eq!(Scalar::from_bytes(&l_minus_one).unwrap(), -Scalar::ONE);
    }

    #[test]
    fn hash_to_scalar_determinism_and_sensitivity() {
        assert_eq!(hash_to_scalar(b"abc"), hash_to_scalar(b"abc"));
        assert_ne!(hash_to_scalar(b"abc"), hash_to_scalar(b"abd"));
        let mut rng = rng();
        for _ in 0..64 {
            let mut data = [0u8; 40];
            rng.fill_bytes(&mut data);
            let base = hash_to_scalar(&data);
            let idx = (rng.next_u32() % 40) as usize;
            data[idx] ^= 1 << (rng.next_u32() % 8);
            assert_ne!(base, hash_to_scalar(&data));
        }
    }

    #[test]
    fn hash_to_scalar_parts_matches_concatenation() {
        assert_eq!(
            hash_to_scalar_parts(&[b"ab", b"cd"]),
            hash_to_scalar(b"abcd")
        );
        let mut h = ScalarHasher::new();
        h.update(b"ab").update(b"cd");
        assert_eq!(h.finalize(), hash_to_scalar(b"abcd"));
    }

    #[test]
    fn hash_to_scalar_empty_vector() {
        assert_eq!(
            hash_to_scalar(b"").to_string(),
            "3223dc0340218a000950099d878f55ca602975c4081e4a75e13d57b6d95cde09"
        );
    }

    #[test]
    fn hash_to_point_determinism_and_distinctness() {
        assert_eq!(hash_to_point(b"x"), hash_to_point(b"x"));
        let points: std::collections::HashSet<_> =
            (0u32..200).map(|i| hash_to_point(&i.to_le_bytes())).collect();
        assert_eq!(points.len(), 200);
    }

    #[test]
    fn domain_tags_differ() {
        assert_ne!(H2S_TAG, H2P_TAG);
    }

    #[test]
    fn random_scalar_seeded_sequence() {
        let mut a = ChaCha20Rng::seed_from_u64(42);
        let mut b = ChaCha20Rng::seed_from_u64(42);
        let xs: Vec<_> = (0..3).map(|_| random_scalar(&mut a)).collect();
        let ys: Vec<_> = (0..3).map(|_| random_scalar(&mut b)).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs[0], xs[1]);
        assert_eq!(xs[0].to_string(), "9041756e362ab2a736146e678ba9ce73fa84c61c607dd7743352d5ea40fdb300");
        for x in xs {
            assert_eq!(Scalar::from_bytes(&x.to_bytes()).unwrap(), x);
        }
    }

    #[test]
    fn non_canonical_scalar_rejected() {
        assert_eq!(
            Scalar::from_bytes(&[0xff; 32]),
            Err(DecodeError::NonCanonicalScalar)
        );
        // l itself is not canonical
        assert!(Scalar::from_bytes(&params().order).is_err());
    }

    #[test]
    fn invalid_point_rejected() {
        // Not a valid Ristretto encoding (negative field element).
        let mut bytes = [0u8; 32];
        bytes[0] = 1;
        assert_eq!(GroupPoint::from_bytes(&bytes), Err(DecodeError::InvalidPoint));
    }

    #[test]
    fn json_hex_round_trip() {
        let mut rng = rng();
        let x = random_scalar(&mut rng);
        let p = x * g();
        let s = serde_json::to_string(&(x, p)).unwrap();
        let back: (Scalar, GroupPoint) = serde_json::from_str(&s).unwrap();
        assert_eq!(back, (x, p));
    }

    proptest! {
        #[test]
        fn distributivity(a in arb_scalar(), b in arb_scalar(), k in arb_scalar()) {
            let p = k * g();
            prop_assert_eq!((a + b) * p, a * p + b * p);
            prop_assert_eq!(a * (b * p), (a * b) * p);
        }

        #[test]
        fn encoding_round_trips(x in arb_scalar()) {
            prop_assert_eq!(Scalar::from_bytes(&x.to_bytes()).unwrap(), x);
            let p = x * h();
            prop_assert_eq!(GroupPoint::from_bytes(&p.to_bytes()).unwrap(), p);
        }

        #[test]
        fn mul_add_base_matches_naive(a in arb_scalar(), b in arb_scalar(), k in arb_scalar()) {
            let p = k * h();
            prop_assert_eq!(GroupPoint::mul_add_base(&a, &p, &b), a * p + b * g());
            prop_assert_eq!(
                GroupPoint::multiscalar_mul(&[a, b], &[p, g()]),
                a * p + b * g()
            );
        }
    }
}
