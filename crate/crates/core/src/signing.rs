//! Signer side of a session: nonce commitments directed at the receiver,
//! session aggregates, share recovery for absent members, modified shadows
//! and partial signatures.

use std::collections::BTreeMap;
use std::fmt;

use rand::{CryptoRng, RngCore};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::encoding::base64_bytes;
use crate::error::{Error, Result};
use crate::group_math::{Element, GroupParams, Scalar};
use crate::keygen::{
    unmask_share, verify_recovered_share, GroupConfig, GroupDirectory, MemberId, MemberKeys,
};
use crate::shamir::lagrange_at_zero;

/// Single-use nonce pair `(K_i1, K_i2)`. Not `Clone`: signing consumes it.
pub struct SignerNonce {
    first: Scalar,
    second: Scalar,
}

impl SignerNonce {
    pub fn random<R: RngCore + CryptoRng>(params: &GroupParams, rng: &mut R) -> Self {
        SignerNonce {
            first: params.random_nonzero_scalar(rng),
            second: params.random_nonzero_scalar(rng),
        }
    }

    pub fn from_parts(first: Scalar, second: Scalar) -> Self {
        SignerNonce { first, second }
    }

    /// `K_i1`, the exponent committed by `v_i`.
    pub fn first(&self) -> &Scalar {
        &self.first
    }

    /// `K_i2`, the exponent blinding `v_i` under the receiver key.
    pub fn second(&self) -> &Scalar {
        &self.second
    }
}

impl fmt::Debug for SignerNonce {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SignerNonce(..)")
    }
}

/// `u_i = g^{-K_i2}`, `v_i = g^{K_i1}`, `w_i = g^{K_i1} y_R^{K_i2}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonceCommitment {
    pub signer: MemberId,
    pub u: Element,
    pub v: Element,
    pub w: Element,
}

pub fn commit(
    params: &GroupParams,
    signer: MemberId,
    nonce: &SignerNonce,
    receiver_key: &Element,
) -> NonceCommitment {
    let v = params.g_pow(&nonce.first);
    NonceCommitment {
        signer,
        u: params.g_pow_neg(&nonce.second),
        w: params.mul_elements(&v, &params.pow(receiver_key, &nonce.second)),
        v,
    }
}

pub fn make_nonce_commitment<R: RngCore + CryptoRng>(
    params: &GroupParams,
    signer: MemberId,
    receiver_key: &Element,
    rng: &mut R,
) -> (SignerNonce, NonceCommitment) {
    let nonce = SignerNonce::random(params, rng);
    let commitment = commit(params, signer, &nonce, receiver_key);
    (nonce, commitment)
}

/// Digest binding a session's signer set, message and aggregates.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct SessionId(pub [u8; 32]);

impl fmt::Debug for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SessionId({})", hex::encode(self.0))
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

impl Serialize for SessionId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(self.0))
    }
}

impl<'de> Deserialize<'de> for SessionId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let mut out = [0u8; 32];
        hex::decode_to_slice(&text, &mut out).map_err(de::Error::custom)?;
        Ok(SessionId(out))
    }
}

impl SessionId {
    pub fn compute(
        signers: &[MemberId],
        message: &[u8],
        u_s: &Element,
        v_s: &Element,
        w_s: &Element,
    ) -> Self {
        let mut sorted = signers.to_vec();
        sorted.sort();
        let mut hasher = Sha256::new();
        hasher.update(b"dirthresh/1 session");
        hasher.update((sorted.len() as u32).to_be_bytes());
        for id in sorted {
            hasher.update(id.0.to_be_bytes());
        }
        hasher.update((message.len() as u64).to_be_bytes());
        hasher.update(message);
        for e in [u_s, v_s, w_s] {
            let bytes = e.value().to_bytes_be();
            hasher.update((bytes.len() as u32).to_be_bytes());
            hasher.update(&bytes);
        }
        SessionId(hasher.finalize().into())
    }
}

/// Aggregates for one signer set and message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigningSession {
    pub id: SessionId,
    pub signers: Vec<MemberId>,
    #[serde(with = "base64_bytes")]
    pub message: Vec<u8>,
    pub u_s: Element,
    pub v_s: Element,
    pub w_s: Element,
    pub r_s: Scalar,
    pub coefficients: BTreeMap<MemberId, Scalar>,
}

impl SigningSession {
    pub fn coefficient(&self, signer: MemberId) -> Result<&Scalar> {
        self.coefficients
            .get(&signer)
            .ok_or(Error::UnknownSigner(signer))
    }

    /// Recomputes every derived field; used after loading a session from disk.
    pub fn check(&self, config: &GroupConfig) -> Result<()> {
        let params = config.params();
        for (field, e) in [("u_s", &self.u_s), ("v_s", &self.v_s), ("w_s", &self.w_s)] {
            params.check_element(e, field)?;
        }
        params.check_scalar(&self.r_s, "r_s")?;
        if self.r_s == params.zero() || self.u_s == params.identity() {
            return Err(Error::DegenerateSession);
        }
        let coefficients = signer_coefficients(config, &self.signers)?;
        if coefficients != self.coefficients {
            return Err(Error::Format {
                field: "coefficients".into(),
                reason: "do not match the signer points".into(),
            });
        }
        if config
            .oracle()
            .hash_to_scalar(params, &self.v_s, &self.message)?
            != self.r_s
        {
            return Err(Error::Format {
                field: "r_s".into(),
                reason: "does not match h(V_S, m)".into(),
            });
        }
        if SessionId::compute(
            &self.signers,
            &self.message,
            &self.u_s,
            &self.v_s,
            &self.w_s,
        ) != self.id
        {
            return Err(Error::Format {
                field: "id".into(),
                reason: "does not match the session contents".into(),
            });
        }
        Ok(())
    }
}

/// Validates a signer set (known, distinct, at least `t`) and returns the
/// Lagrange coefficient of every signer over that set's public points.
pub fn signer_coefficients(
    config: &GroupConfig,
    signers: &[MemberId],
) -> Result<BTreeMap<MemberId, Scalar>> {
    let mut points = Vec::with_capacity(signers.len());
    for (i, id) in signers.iter().enumerate() {
        if signers[..i].contains(id) {
            return Err(Error::DuplicateSigner(*id));
        }
        points.push(config.point(*id)?.clone());
    }
    if signers.len() < config.threshold() {
        return Err(Error::ThresholdNotMet {
            t: config.threshold(),
            got: signers.len(),
        });
    }
    signers
        .iter()
        .zip(&points)
        .map(|(id, x)| Ok((*id, lagrange_at_zero(config.params(), &points, x)?)))
        .collect()
}

/// Multiplies the commitments (mod p), hashes `V_S` with the message, and
/// fixes the Lagrange coefficients of the signer set. `U_S = 1` or `R_S = 0`
/// is a `DegenerateSession`; the signers draw new nonces.
pub fn aggregate_session(
    config: &GroupConfig,
    commitments: &[NonceCommitment],
    message: &[u8],
) -> Result<SigningSession> {
    let params = config.params();
    let mut signers: Vec<MemberId> = commitments.iter().map(|c| c.signer).collect();
    let coefficients = signer_coefficients(config, &signers)?;
    for c in commitments {
        for (field, e) in [("u", &c.u), ("v", &c.v), ("w", &c.w)] {
            params.check_element(e, &format!("commitment {field} of {}", c.signer))?;
            if !params.is_subgroup_member(e) {
                return Err(Error::Format {
                    field: format!("commitment {field} of {}", c.signer),
                    reason: "not in the order-q subgroup".into(),
                });
            }
        }
    }
    signers.sort();
    let u_s = params.product(commitments.iter().map(|c| &c.u));
    let v_s = params.product(commitments.iter().map(|c| &c.v));
    let w_s = params.product(commitments.iter().map(|c| &c.w));
    if u_s == params.identity() {
        return Err(Error::DegenerateSession);
    }
    let r_s = config.oracle().hash_to_scalar(params, &v_s, message)?;
    if r_s == params.zero() {
        return Err(Error::DegenerateSession);
    }
    let id = SessionId::compute(&signers, message, &u_s, &v_s, &w_s);
    Ok(SigningSession {
        id,
        signers,
        message: message.to_vec(),
        u_s,
        v_s,
        w_s,
        r_s,
        coefficients,
    })
}

/// `MS_i = C_i * sum_{j absent} l_ji mod q`.
pub fn compute_modified_shadow(
    params: &GroupParams,
    recovered: &BTreeMap<MemberId, Scalar>,
    absent: &[MemberId],
    coefficient: &Scalar,
) -> Result<Scalar> {
    let mut total = params.zero();
    for j in absent {
        let share = recovered.get(j).ok_or(Error::MissingAbsentShare(*j))?;
        total = params.add(&total, share);
    }
    Ok(params.mul(coefficient, &total))
}

/// `s_i = K_i1 + (f_i(0) + MS_i) * R_S mod q`.
pub fn compute_partial_signature(
    params: &GroupParams,
    nonce_first: &Scalar,
    constant_term: &Scalar,
    modified_shadow: &Scalar,
    r_s: &Scalar,
) -> Scalar {
    params.add(
        nonce_first,
        &params.mul(&params.add(constant_term, modified_shadow), r_s),
    )
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartialSignature {
    pub session: SessionId,
    pub signer: MemberId,
    pub s: Scalar,
    pub v: Element,
    pub c: Scalar,
    pub r_s: Scalar,
}

/// A member acting as signer. Shares recovered from the directory are cached
/// for the lifetime of the value and never written out.
pub struct Signer<'a> {
    directory: &'a GroupDirectory,
    keys: &'a MemberKeys,
    recovered: BTreeMap<MemberId, Scalar>,
}

impl<'a> Signer<'a> {
    pub fn new(directory: &'a GroupDirectory, keys: &'a MemberKeys) -> Result<Self> {
        if directory.public_key(keys.id())? != keys.public_key() {
            return Err(Error::Format {
                field: "secret_key".into(),
                reason: format!("does not match the directory key of {}", keys.id()),
            });
        }
        Ok(Signer {
            directory,
            keys,
            recovered: BTreeMap::new(),
        })
    }

    pub fn id(&self) -> MemberId {
        self.keys.id()
    }

    /// Unmasks `l_ji` from dealer `j` and checks it against `m_ji`.
    pub fn recover_share(&mut self, dealer: MemberId) -> Result<Scalar> {
        if let Some(share) = self.recovered.get(&dealer) {
            return Ok(share.clone());
        }
        let params = self.directory.params();
        let entry = self.directory.entry(dealer, self.keys.id())?;
        let share = unmask_share(
            params,
            &entry.masked_share,
            self.directory.w(),
            self.keys.secret_key(),
        )?;
        if !verify_recovered_share(params, &share, &entry.share_commitment) {
            return Err(Error::CorruptShare { dealer });
        }
        self.recovered.insert(dealer, share.clone());
        Ok(share)
    }

    pub fn sign(
        &mut self,
        nonce: SignerNonce,
        session: &SigningSession,
    ) -> Result<PartialSignature> {
        let params = self.directory.params();
        let me = self.keys.id();
        let c = session.coefficient(me)?.clone();
        let absent = self.directory.absent_members(&session.signers);
        for &j in &absent {
            self.recover_share(j)?;
        }
        let shadow = compute_modified_shadow(params, &self.recovered, &absent, &c)?;
        let constant = self.keys.polynomial().constant_term(params);
        let s = compute_partial_signature(params, &nonce.first, &constant, &shadow, &session.r_s);
        Ok(PartialSignature {
            session: session.id,
            signer: me,
            s,
            v: params.g_pow(&nonce.first),
            c,
            r_s: session.r_s.clone(),
        })
    }
}
