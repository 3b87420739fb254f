//! Modular arithmetic over a Schnorr group: residues mod a prime `p`, exponents
//! mod a prime `q` dividing `p - 1`, and a generator `g` of the order-`q`
//! subgroup.
//!
//! Values are plain newtypes over [`BigUint`]; every operation goes through the
//! owning [`GroupParams`], which is the only place that knows the moduli.

use std::fmt;

use num_bigint::{BigInt, BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{CryptoRng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::encoding::{self, base64_bytes, decimal};
use crate::error::{Error, Result};

pub const PRODUCTION_MIN_P_BITS: u64 = 2048;
pub const PRODUCTION_MIN_Q_BITS: u64 = 256;

/// Minimum-size policy applied by [`GroupParams::validate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Any sizes, down to the 6-bit primes of desk examples.
    Toy,
    /// `|p| >= 2048`, `|q| >= 256`.
    Production,
}

impl std::str::FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "toy" => Ok(Profile::Toy),
            "production" => Ok(Profile::Production),
            other => Err(format!(
                "unknown profile `{other}` (expected toy or production)"
            )),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Toy => "toy",
            Profile::Production => "production",
        })
    }
}

macro_rules! decimal_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(BigUint);

        impl $name {
            pub fn value(&self) -> &BigUint {
                &self.0
            }

            pub fn to_u64(&self) -> Option<u64> {
                self.0.to_u64()
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Display::fmt(&self.0, f)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                decimal::serialize(&self.0, s)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                decimal::deserialize(d).map($name)
            }
        }
    };
}

decimal_newtype!(
    /// An integer in `[0, q)`.
    Scalar
);
decimal_newtype!(
    /// A unit residue in `[1, p)`. Subgroup membership is a separate predicate.
    Element
);
decimal_newtype!(
    /// A masked share `l * y^K mod p`. Lies in `[0, p)`; zero when the share is zero.
    MaskedShare
);

/// Validated public parameters `(p, q, g)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupParams {
    p: BigUint,
    q: BigUint,
    g: Element,
    profile: Profile,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    #[serde(with = "decimal")]
    p: BigUint,
    #[serde(with = "decimal")]
    q: BigUint,
    #[serde(with = "decimal")]
    g: BigUint,
    profile: Profile,
}

impl Serialize for GroupParams {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ParamsRepr {
            p: self.p.clone(),
            q: self.q.clone(),
            g: self.g.0.clone(),
            profile: self.profile,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupParams {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = ParamsRepr::deserialize(d)?;
        GroupParams::validate(repr.p, repr.q, repr.g, repr.profile).map_err(de::Error::custom)
    }
}

impl GroupParams {
    /// Checks primality of `p` and `q`, `q | p - 1`, that `g` has order exactly
    /// `q`, and the profile's size floor.
    pub fn validate(p: BigUint, q: BigUint, g: BigUint, profile: Profile) -> Result<Self> {
        if p < BigUint::from(5u8) || !is_probable_prime(&p) {
            return Err(Error::NotPrime { which: "p" });
        }
        if !is_probable_prime(&q) {
            return Err(Error::NotPrime { which: "q" });
        }
        let p_minus_one = &p - 1u8;
        if q >= p || !(&p_minus_one % &q).is_zero() {
            return Err(Error::OrderMismatch);
        }
        if g < BigUint::from(2u8) || g >= p || !g.modpow(&q, &p).is_one() {
            return Err(Error::BadGenerator);
        }
        if profile == Profile::Production
            && (p.bits() < PRODUCTION_MIN_P_BITS || q.bits() < PRODUCTION_MIN_Q_BITS)
        {
            return Err(Error::ProfileTooSmall {
                min_p: PRODUCTION_MIN_P_BITS,
                min_q: PRODUCTION_MIN_Q_BITS,
            });
        }
        Ok(GroupParams {
            p,
            q,
            g: Element(g),
            profile,
        })
    }

    pub fn validate_u64(p: u64, q: u64, g: u64, profile: Profile) -> Result<Self> {
        Self::validate(p.into(), q.into(), g.into(), profile)
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn generator(&self) -> &Element {
        &self.g
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    // ---- construction and range checks ----

    pub fn scalar(&self, value: BigUint) -> Result<Scalar> {
        if value < self.q {
            Ok(Scalar(value))
        } else {
            Err(Error::OutOfRange {
                what: format!("scalar {value}"),
            })
        }
    }

    pub fn scalar_reduced(&self, value: &BigUint) -> Scalar {
        Scalar(value % &self.q)
    }

    /// Reduces `value` mod q.
    pub fn scalar_u64(&self, value: u64) -> Scalar {
        self.scalar_reduced(&BigUint::from(value))
    }

    pub fn scalar_from_int(&self, value: &BigInt) -> Scalar {
        let q = BigInt::from(self.q.clone());
        Scalar(
            value
                .mod_floor(&q)
                .to_biguint()
                .expect("mod_floor is nonnegative"),
        )
    }

    pub fn zero(&self) -> Scalar {
        Scalar(BigUint::zero())
    }

    pub fn one(&self) -> Scalar {
        Scalar(BigUint::one())
    }

    pub fn identity(&self) -> Element {
        Element(BigUint::one())
    }

    pub fn element(&self, value: BigUint) -> Result<Element> {
        if !value.is_zero() && value < self.p {
            Ok(Element(value))
        } else {
            Err(Error::OutOfRange {
                what: format!("element {value}"),
            })
        }
    }

    pub fn element_u64(&self, value: u64) -> Result<Element> {
        self.element(value.into())
    }

    pub fn masked_share(&self, value: BigUint) -> Result<MaskedShare> {
        if value < self.p {
            Ok(MaskedShare(value))
        } else {
            Err(Error::OutOfRange {
                what: format!("masked share {value}"),
            })
        }
    }

    /// Range check for deserialized scalars; `what` names the offending field.
    pub fn check_scalar(&self, s: &Scalar, what: &str) -> Result<()> {
        if s.0 < self.q {
            Ok(())
        } else {
            Err(Error::Format {
                field: what.into(),
                reason: format!("{} is not below q", s.0),
            })
        }
    }

    pub fn check_element(&self, e: &Element, what: &str) -> Result<()> {
        if !e.0.is_zero() && e.0 < self.p {
            Ok(())
        } else {
            Err(Error::Format {
                field: what.into(),
                reason: format!("{} is not in [1, p)", e.0),
            })
        }
    }

    pub fn check_masked(&self, v: &MaskedShare, what: &str) -> Result<()> {
        if v.0 < self.p {
            Ok(())
        } else {
            Err(Error::Format {
                field: what.into(),
                reason: format!("{} is not below p", v.0),
            })
        }
    }

    // ---- Z_q ----

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 + &b.0) % &self.q)
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 + &self.q - &b.0) % &self.q)
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        Scalar((&a.0 * &b.0) % &self.q)
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        Scalar((&self.q - &a.0) % &self.q)
    }

    /// Inverse mod q via Fermat (q is prime).
    pub fn invert(&self, a: &Scalar) -> Result<Scalar> {
        if a.0.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Scalar(a.0.modpow(&(&self.q - 2u8), &self.q)))
    }

    pub fn sum<'a>(&self, items: impl IntoIterator<Item = &'a Scalar>) -> Scalar {
        items
            .into_iter()
            .fold(self.zero(), |acc, s| self.add(&acc, s))
    }

    // ---- Z_p^* ----

    pub fn mul_elements(&self, a: &Element, b: &Element) -> Element {
        Element((&a.0 * &b.0) % &self.p)
    }

    pub fn product<'a>(&self, items: impl IntoIterator<Item = &'a Element>) -> Element {
        items
            .into_iter()
            .fold(self.identity(), |acc, e| self.mul_elements(&acc, e))
    }

    pub fn invert_element(&self, a: &Element) -> Element {
        Element(a.0.modpow(&(&self.p - 2u8), &self.p))
    }

    pub fn pow(&self, base: &Element, exp: &Scalar) -> Element {
        Element(base.0.modpow(&exp.0, &self.p))
    }

    /// `base^exp mod p`. Negative exponents are first reduced mod q, which is
    /// only meaningful for subgroup members; nonnegative ones are used literally.
    pub fn pow_int(&self, base: &Element, exp: &BigInt) -> Element {
        let e = if exp.is_negative() {
            self.scalar_from_int(exp).0
        } else {
            exp.to_biguint().expect("nonnegative")
        };
        Element(base.0.modpow(&e, &self.p))
    }

    pub fn g_pow(&self, exp: &Scalar) -> Element {
        self.pow(&self.g, exp)
    }

    /// `g^(-exp)`.
    pub fn g_pow_neg(&self, exp: &Scalar) -> Element {
        self.g_pow(&self.neg(exp))
    }

    pub fn is_subgroup_member(&self, e: &Element) -> bool {
        e.0.modpow(&self.q, &self.p).is_one()
    }

    // ---- sampling ----

    pub fn random_scalar<R: RngCore + CryptoRng>(&self, rng: &mut R) -> Scalar {
        Scalar(rng.gen_biguint_below(&self.q))
    }

    pub fn random_nonzero_scalar<R: RngCore + CryptoRng>(&self, rng: &mut R) -> Scalar {
        Scalar(rng.gen_biguint_range(&BigUint::one(), &self.q))
    }
}

/// The hash `h(commitment, message) -> Z_q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum HashOracle {
    /// SHA-256 of [`hash_input`], read big-endian and reduced mod q.
    Real,
    /// Explicit lookup table; unmapped inputs are an error.
    Stub { table: Vec<StubEntry> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StubEntry {
    pub commitment: Element,
    #[serde(with = "base64_bytes")]
    pub message: Vec<u8>,
    pub value: Scalar,
}

impl HashOracle {
    pub fn stub(entries: impl IntoIterator<Item = (Element, Vec<u8>, Scalar)>) -> Self {
        HashOracle::Stub {
            table: entries
                .into_iter()
                .map(|(commitment, message, value)| StubEntry {
                    commitment,
                    message,
                    value,
                })
                .collect(),
        }
    }

    pub fn hash_to_scalar(
        &self,
        params: &GroupParams,
        commitment: &Element,
        message: &[u8],
    ) -> Result<Scalar> {
        match self {
            HashOracle::Real => {
                let digest = Sha256::digest(hash_input(commitment, message));
                Ok(params.scalar_reduced(&BigUint::from_bytes_be(&digest)))
            }
            HashOracle::Stub { table } => table
                .iter()
                .find(|e| &e.commitment == commitment && e.message == message)
                .map(|e| e.value.clone())
                .ok_or(Error::StubMiss),
        }
    }

    pub fn check(&self, params: &GroupParams) -> Result<()> {
        if let HashOracle::Stub { table } = self {
            for entry in table {
                params.check_element(&entry.commitment, "oracle.table.commitment")?;
                params.check_scalar(&entry.value, "oracle.table.value")?;
            }
        }
        Ok(())
    }
}

/// Canonical hash input: 4-byte big-endian length of the commitment's minimal
/// big-endian encoding, the encoding itself, then the raw message.
pub fn hash_input(commitment: &Element, message: &[u8]) -> Vec<u8> {
    let encoded = commitment.0.to_bytes_be();
    let len = u32::try_from(encoded.len()).expect("commitment fits in 2^32 bytes");
    let mut out = Vec::with_capacity(4 + encoded.len() + message.len());
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(&encoded);
    out.extend_from_slice(message);
    out
}

const SMALL_PRIMES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
const MILLER_RABIN_ROUNDS: usize = 64;

/// Miller-Rabin with the first twelve primes as fixed bases (deterministic
/// below 3.1e23) followed by seeded random bases, 64 rounds in total.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u8);
    if n < &two {
        return false;
    }
    for &sp in &SMALL_PRIMES {
        let sp = BigUint::from(sp);
        if n == &sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - 1u8;
    let s = n_minus_one.trailing_zeros().expect("n - 1 > 0");
    let d = &n_minus_one >> s;

    let is_witness = |a: &BigUint| -> bool {
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            return false;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                return false;
            }
        }
        true
    };

    if SMALL_PRIMES.iter().any(|&a| is_witness(&BigUint::from(a))) {
        return false;
    }
    if n.bits() < 78 {
        return true;
    }
    let seed: [u8; 32] = Sha256::digest(n.to_bytes_be()).into();
    let mut rng = ChaCha20Rng::from_seed(seed);
    let upper = n - 2u8;
    (SMALL_PRIMES.len()..MILLER_RABIN_ROUNDS)
        .all(|_| !is_witness(&rng.gen_biguint_range(&two, &upper)))
}

/// Textual form of a message for diagnostics.
pub fn describe_message(message: &[u8]) -> String {
    match std::str::from_utf8(message) {
        Ok(text) if text.chars().all(|c| !c.is_control()) => format!("{text:?}"),
        _ => encoding::encode_base64(message),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn paper() -> GroupParams {
        GroupParams::validate_u64(47, 23, 3, Profile::Toy).unwrap()
    }

    fn ext_gcd_inverse(a: i64, m: i64) -> i64 {
        let (mut r0, mut r1, mut s0, mut s1) = (a, m, 1i64, 0i64);
        while r1 != 0 {
            let qt = r0 / r1;
            (r0, r1) = (r1, r0 - qt * r1);
            (s0, s1) = (s1, s0 - qt * s1);
        }
        assert_eq!(r0, 1);
        s0.rem_euclid(m)
    }

    #[test]
    fn validates_paper_parameters() {
        let params = paper();
        assert_eq!(params.p(), &BigUint::from(47u8));
        assert_eq!(params.generator().to_u64(), Some(3));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(
            GroupParams::validate_u64(47, 23, 1, Profile::Toy),
            Err(Error::BadGenerator)
        );
        // 5^23 mod 47 = 46
        assert_eq!(
            BigUint::from(5u8).modpow(&BigUint::from(23u8), &BigUint::from(47u8)),
            BigUint::from(46u8)
        );
        assert_eq!(
            GroupParams::validate_u64(47, 23, 5, Profile::Toy),
            Err(Error::BadGenerator)
        );
        assert_eq!(
            GroupParams::validate_u64(48, 23, 3, Profile::Toy),
            Err(Error::NotPrime { which: "p" })
        );
        assert_eq!(
            GroupParams::validate_u64(47, 21, 3, Profile::Toy),
            Err(Error::NotPrime { which: "q" })
        );
        assert_eq!(
            GroupParams::validate_u64(47, 13, 3, Profile::Toy),
            Err(Error::OrderMismatch)
        );
        assert_eq!(
            GroupParams::validate_u64(3, 2, 2, Profile::Toy),
            Err(Error::NotPrime { which: "p" })
        );
        assert_eq!(
            GroupParams::validate_u64(47, 23, 47, Profile::Toy),
            Err(Error::BadGenerator)
        );
        assert!(matches!(
            GroupParams::validate_u64(47, 23, 3, Profile::Production),
            Err(Error::ProfileTooSmall { .. })
        ));
    }

    #[test]
    fn primality_matches_trial_division() {
        let naive = |n: u64| {
            n >= 2
                && (2..)
                    .take_while(|d| d * d <= n)
                    .all(|d| !n.is_multiple_of(d))
        };
        for n in 0u64..5000 {
            assert_eq!(is_probable_prime(&BigUint::from(n)), naive(n), "{n}");
        }
        // Carmichael numbers
        for n in [561u64, 1105, 1729, 2465, 2821, 6601, 8911, 3215031751] {
            assert!(!is_probable_prime(&BigUint::from(n)));
        }
        // 2^127 - 1 is prime, 2^128 + 1 is not
        let m127 = (BigUint::one() << 127u32) - 1u8;
        assert!(is_probable_prime(&m127));
        assert!(!is_probable_prime(&((BigUint::one() << 128u32) + 1u8)));
    }

    #[test]
    fn generator_order_is_exactly_q_by_brute_force() {
        for (p, q, g) in [
            (47u64, 23u64, 3u64),
            (59, 29, 3),
            (83, 41, 3),
            (107, 53, 3),
            (167, 83, 2),
        ] {
            let params = GroupParams::validate_u64(p, q, g, Profile::Toy).unwrap();
            let g = params.generator().value();
            let mut acc = g.clone();
            let mut order = 1u64;
            while !acc.is_one() {
                acc = (&acc * g) % params.p();
                order += 1;
            }
            assert_eq!(order, q);
        }
    }

    #[test]
    fn pow_examples() {
        let params = paper();
        let g = params.generator();
        assert_eq!(params.pow(g, &params.scalar_u64(7)).to_u64(), Some(25));
        assert_eq!(params.pow(g, &params.zero()).to_u64(), Some(1));
        assert_eq!(params.pow_int(g, &BigInt::from(-11)).to_u64(), Some(12));
        assert_eq!(params.g_pow_neg(&params.scalar_u64(11)).to_u64(), Some(12));
        // literal exponent on a non-member residue: 5^30 mod 47
        let five = params.element_u64(5).unwrap();
        assert!(!params.is_subgroup_member(&five));
        let expected = BigUint::from(5u8).modpow(&BigUint::from(30u8), &BigUint::from(47u8));
        assert_eq!(params.pow_int(&five, &BigInt::from(30)).value(), &expected);
    }

    #[test]
    fn scalar_arith_examples() {
        let params = paper();
        let s = |v| params.scalar_u64(v);
        assert_eq!(ext_gcd_inverse(4, 23), 6);
        assert_eq!(params.invert(&s(4)).unwrap(), s(6));
        assert_eq!(params.add(&s(15), &s(10)), s(2));
        assert_eq!(params.neg(&s(0)), s(0));
        assert_eq!(params.sub(&s(3), &s(5)), s(21));
        assert_eq!(params.invert(&s(0)), Err(Error::DivisionByZero));
        for a in 1..23 {
            assert_eq!(
                params.invert(&s(a)).unwrap(),
                s(ext_gcd_inverse(a as i64, 23) as u64)
            );
        }
        for a in 1..47u64 {
            let e = params.element_u64(a).unwrap();
            let inv = params.invert_element(&e);
            assert_eq!(inv.to_u64().unwrap(), ext_gcd_inverse(a as i64, 47) as u64);
        }
    }

    #[test]
    fn range_checks() {
        let params = paper();
        assert!(params.scalar(BigUint::from(23u8)).is_err());
        assert!(params.element(BigUint::zero()).is_err());
        assert!(params.element(BigUint::from(47u8)).is_err());
        assert!(params.masked_share(BigUint::zero()).is_ok());
    }

    #[test]
    fn pow_is_additive_over_random_pairs() {
        let params = paper();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let a = params.random_scalar(&mut rng);
            let b = params.random_scalar(&mut rng);
            let lhs = params.g_pow(&params.add(&a, &b));
            let rhs = params.mul_elements(&params.g_pow(&a), &params.g_pow(&b));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn stub_oracle_lookup_and_miss() {
        let params = paper();
        let c = params.element_u64(25).unwrap();
        let oracle = HashOracle::stub([(c.clone(), b"m".to_vec(), params.scalar_u64(7))]);
        assert_eq!(
            oracle.hash_to_scalar(&params, &c, b"m").unwrap(),
            params.scalar_u64(7)
        );
        assert_eq!(
            oracle.hash_to_scalar(&params, &c, b"m2"),
            Err(Error::StubMiss)
        );
        let other = params.element_u64(24).unwrap();
        assert_eq!(
            oracle.hash_to_scalar(&params, &other, b"m"),
            Err(Error::StubMiss)
        );
    }

    #[test]
    fn hash_input_encoding_is_length_prefixed() {
        let params = paper();
        let c = params.element_u64(25).unwrap();
        assert_eq!(hash_input(&c, b"m"), vec![0, 0, 0, 1, 25, b'm']);
        let big = params.element_u64(46).unwrap();
        assert_eq!(hash_input(&big, b""), vec![0, 0, 0, 1, 46]);
    }

    #[test]
    fn real_oracle_is_deterministic_and_collision_free_at_256_bits() {
        let params = crate::presets::modp_2048_256();
        let oracle = HashOracle::Real;
        let c = params.generator().clone();
        let a = oracle.hash_to_scalar(params, &c, b"hello").unwrap();
        let b = oracle.hash_to_scalar(params, &c, b"hello").unwrap();
        assert_eq!(a, b);

        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let mut seen = HashSet::new();
        let mut messages = HashSet::new();
        for _ in 0..20_000 {
            let mut msg = vec![0u8; 16];
            rand::RngCore::fill_bytes(&mut rng, &mut msg);
            if messages.insert(msg.clone()) {
                assert!(seen.insert(oracle.hash_to_scalar(params, &c, &msg).unwrap()));
            }
        }
    }

    #[test]
    fn oracle_serialization_shape() {
        let params = paper();
        let oracle = HashOracle::stub([(
            params.element_u64(25).unwrap(),
            b"m".to_vec(),
            params.scalar_u64(7),
        )]);
        let json = serde_json::to_string(&oracle).unwrap();
        assert_eq!(
            json,
            r#"{"mode":"stub","table":[{"commitment":"25","message":"bQ==","value":"7"}]}"#
        );
        assert_eq!(
            serde_json::to_string(&HashOracle::Real).unwrap(),
            r#"{"mode":"real"}"#
        );
    }

    #[test]
    fn params_deserialization_revalidates() {
        let ok: GroupParams =
            serde_json::from_str(r#"{"p":"47","q":"23","g":"3","profile":"toy"}"#).unwrap();
        assert_eq!(ok, paper());
        assert!(serde_json::from_str::<GroupParams>(
            r#"{"p":"47","q":"23","g":"5","profile":"toy"}"#
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn pow_is_additive_at_production_size(a in any::<[u8; 32]>(), b in any::<[u8; 32]>()) {
            let params = crate::presets::modp_2048_256();
            let a = params.scalar_reduced(&BigUint::from_bytes_be(&a));
            let b = params.scalar_reduced(&BigUint::from_bytes_be(&b));
            let lhs = params.g_pow(&params.add(&a, &b));
            let rhs = params.mul_elements(&params.g_pow(&a), &params.g_pow(&b));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn invert_is_an_involution(a in 1u64..23) {
            let params = paper();
            let a = params.scalar_u64(a);
            let inv = params.invert(&a).unwrap();
            prop_assert_eq!(params.mul(&a, &inv), params.one());
            prop_assert_eq!(params.invert(&inv).unwrap(), a);
        }

        #[test]
        fn hash_output_is_below_q(msg in proptest::collection::vec(any::<u8>(), 0..64), c in 1u64..47) {
            let params = paper();
            let s = HashOracle::Real.hash_to_scalar(&params, &params.element_u64(c).unwrap(), &msg).unwrap();
            prop_assert!(s.value() < params.q());
        }
    }
}
