//! Versioned JSON files. Every document is `{version, kind, body}`; integers
//! are decimal strings and messages base64. Decoding reports the JSON path of
//! the first bad field, and the `check_*` functions validate a decoded body
//! against the directory it belongs to.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::combiner::GroupSignature;
use crate::confirmation::ConfirmationTranscript;
use crate::error::{Error, Result};
use crate::group_math::{Element, GroupParams, HashOracle, Scalar};
use crate::keygen::{DealerRecord, GroupConfig, GroupDirectory, MemberId, MemberKeys};
use crate::shamir::Polynomial;
use crate::signing::{NonceCommitment, PartialSignature, SignerNonce, SigningSession};

pub const VERSION: &str = "dirthresh/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocKind {
    Params,
    Directory,
    MemberSecret,
    ReceiverSecret,
    NonceSecret,
    Commitment,
    Session,
    Partial,
    Signature,
    Transcript,
}

impl DocKind {
    /// Files of these kinds must not be world-readable.
    pub fn is_secret(self) -> bool {
        matches!(
            self,
            DocKind::MemberSecret | DocKind::ReceiverSecret | DocKind::NonceSecret
        )
    }
}

pub trait Document: Serialize + DeserializeOwned {
    const KIND: DocKind;
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope<T> {
    version: String,
    kind: DocKind,
    body: T,
}

#[derive(Serialize)]
struct EnvelopeRef<'a, T> {
    version: &'a str,
    kind: DocKind,
    body: &'a T,
}

#[derive(Deserialize)]
struct Header {
    version: String,
    kind: DocKind,
}

fn format_err(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Format {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Pretty JSON with a trailing newline.
pub fn encode<D: Document>(body: &D) -> String {
    let doc = EnvelopeRef {
        version: VERSION,
        kind: D::KIND,
        body,
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("documents serialize");
    text.push('\n');
    text
}

pub fn decode<D: Document>(text: &str) -> Result<D> {
    let header: Header = deserialize_tracked(text)?;
    if header.version != VERSION {
        return Err(format_err(
            "version",
            format!("expected {VERSION:?}, got {:?}", header.version),
        ));
    }
    if header.kind != D::KIND {
        return Err(format_err(
            "kind",
            format!("expected {:?}, got {:?}", D::KIND, header.kind),
        ));
    }
    let doc: Envelope<D> = deserialize_tracked(text)?;
    Ok(doc.body)
}

/// Decodes any document according to its `kind` and encodes it again.
pub fn normalize(text: &str) -> Result<(DocKind, String)> {
    fn again<D: Document>(text: &str) -> Result<String> {
        Ok(encode(&decode::<D>(text)?))
    }
    let header: Header = deserialize_tracked(text)?;
    let out = match header.kind {
        DocKind::Params => again::<GroupParams>(text),
        DocKind::Directory => again::<DirectoryDoc>(text),
        DocKind::MemberSecret => again::<MemberSecretDoc>(text),
        DocKind::ReceiverSecret => again::<ReceiverSecretDoc>(text),
        DocKind::NonceSecret => again::<NonceSecretDoc>(text),
        DocKind::Commitment => again::<NonceCommitment>(text),
        DocKind::Session => again::<SigningSession>(text),
        DocKind::Partial => again::<PartialSignature>(text),
        DocKind::Signature => again::<GroupSignature>(text),
        DocKind::Transcript => again::<ConfirmationTranscript>(text),
    }?;
    Ok((header.kind, out))
}

fn deserialize_tracked<T: DeserializeOwned>(text: &str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." || path == "?" {
            "document".to_string()
        } else {
            path
        };
        format_err(field, e.into_inner().to_string())
    })?;
    de.end()
        .map_err(|e| format_err("document", e.to_string()))?;
    Ok(value)
}

impl Document for GroupParams {
    const KIND: DocKind = DocKind::Params;
}

/// Everything public after setup, with the aggregate keys spelled out.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectoryDoc {
    pub params: GroupParams,
    pub threshold: usize,
    pub points: BTreeMap<MemberId, Scalar>,
    pub oracle: HashOracle,
    pub w: Element,
    pub group_key: Element,
    pub receiver_key: Element,
    pub public_keys: BTreeMap<MemberId, Element>,
    pub records: BTreeMap<MemberId, DealerRecord>,
}

impl Document for DirectoryDoc {
    const KIND: DocKind = DocKind::Directory;
}

impl DirectoryDoc {
    pub fn from_directory(directory: &GroupDirectory) -> Self {
        let config = directory.config();
        DirectoryDoc {
            params: config.params().clone(),
            threshold: config.threshold(),
            points: config.points().clone(),
            oracle: config.oracle().clone(),
            w: directory.w().clone(),
            group_key: directory.group_key().clone(),
            receiver_key: directory.receiver_key().clone(),
            public_keys: directory.public_keys().clone(),
            records: directory.records().clone(),
        }
    }

    pub fn into_directory(self) -> Result<GroupDirectory> {
        let config = GroupConfig::new(self.params, self.threshold, self.points, self.oracle)?;
        let directory = GroupDirectory::assemble(
            config,
            self.w,
            self.public_keys,
            self.records,
            self.receiver_key,
        )?;
        if *directory.group_key() != self.group_key {
            return Err(format_err(
                "group_key",
                "does not match the product of the partial keys",
            ));
        }
        Ok(directory)
    }
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberSecretDoc {
    pub id: MemberId,
    pub secret_key: Scalar,
    pub polynomial: Polynomial,
    pub masks: BTreeMap<MemberId, Scalar>,
}

impl Document for MemberSecretDoc {
    const KIND: DocKind = DocKind::MemberSecret;
}

impl MemberSecretDoc {
    pub fn from_keys(keys: &MemberKeys) -> Self {
        MemberSecretDoc {
            id: keys.id(),
            secret_key: keys.secret_key().clone(),
            polynomial: keys.polynomial().clone(),
            masks: keys.masks().clone(),
        }
    }

    /// Rebuilds the keys and checks the public key against the directory.
    pub fn into_keys(self, directory: &GroupDirectory) -> Result<MemberKeys> {
        let keys = MemberKeys::from_parts(
            directory.config(),
            self.id,
            self.secret_key,
            self.polynomial,
            self.masks,
        )?;
        if directory.public_key(keys.id())? != keys.public_key() {
            return Err(format_err(
                "secret_key",
                format!("does not match the public key of {}", keys.id()),
            ));
        }
        Ok(keys)
    }
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverSecretDoc {
    pub receiver_secret: Scalar,
}

impl Document for ReceiverSecretDoc {
    const KIND: DocKind = DocKind::ReceiverSecret;
}

impl ReceiverSecretDoc {
    /// Only range-checked: a key that does not match the directory is a
    /// wrong receiver, which verification reports as an invalid signature.
    pub fn secret(&self, params: &GroupParams) -> Result<Scalar> {
        params.check_scalar(&self.receiver_secret, "receiver_secret")?;
        Ok(self.receiver_secret.clone())
    }
}

/// Both nonce exponents of one signer, bound to the receiver key they were
/// committed under.
#[derive(Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonceSecretDoc {
    pub signer: MemberId,
    pub receiver_key: Element,
    pub first: Scalar,
    pub second: Scalar,
}

impl Document for NonceSecretDoc {
    const KIND: DocKind = DocKind::NonceSecret;
}

impl NonceSecretDoc {
    pub fn new(signer: MemberId, receiver_key: &Element, nonce: &SignerNonce) -> Self {
        NonceSecretDoc {
            signer,
            receiver_key: receiver_key.clone(),
            first: nonce.first().clone(),
            second: nonce.second().clone(),
        }
    }

    pub fn into_nonce(self, directory: &GroupDirectory) -> Result<(MemberId, SignerNonce)> {
        let params = directory.params();
        params.check_scalar(&self.first, "first")?;
        params.check_scalar(&self.second, "second")?;
        if self.receiver_key != *directory.receiver_key() {
            return Err(format_err(
                "receiver_key",
                "nonce was committed under a different receiver",
            ));
        }
        directory.config().point(self.signer)?;
        Ok((
            self.signer,
            SignerNonce::from_parts(self.first, self.second),
        ))
    }
}

impl Document for NonceCommitment {
    const KIND: DocKind = DocKind::Commitment;
}

impl Document for SigningSession {
    const KIND: DocKind = DocKind::Session;
}

impl Document for PartialSignature {
    const KIND: DocKind = DocKind::Partial;
}

impl Document for GroupSignature {
    const KIND: DocKind = DocKind::Signature;
}

impl Document for ConfirmationTranscript {
    const KIND: DocKind = DocKind::Transcript;
}

pub fn check_commitment(params: &GroupParams, c: &NonceCommitment) -> Result<()> {
    for (field, e) in [("u", &c.u), ("v", &c.v), ("w", &c.w)] {
        params.check_element(e, field)?;
    }
    Ok(())
}

pub fn check_partial(params: &GroupParams, ps: &PartialSignature) -> Result<()> {
    params.check_scalar(&ps.s, "s")?;
    params.check_element(&ps.v, "v")?;
    params.check_scalar(&ps.c, "c")?;
    params.check_scalar(&ps.r_s, "r_s")
}

pub fn check_signature(params: &GroupParams, sig: &GroupSignature) -> Result<()> {
    crate::verification::check_signature_fields(params, sig)
}

pub fn check_transcript(params: &GroupParams, t: &ConfirmationTranscript) -> Result<()> {
    let st = &t.statement;
    for (field, e) in [
        ("statement.r_r", &st.r_r),
        ("statement.e", &st.e),
        ("statement.u_s", &st.u_s),
        ("statement.w_s", &st.w_s),
        ("statement.mu", &st.mu),
        ("w", &t.w),
        ("beta", &t.beta),
        ("gamma", &t.gamma),
    ] {
        params.check_element(e, field)?;
    }
    for (field, s) in [
        ("statement.s_s", &st.s_s),
        ("u", &t.u),
        ("v", &t.v),
        ("alpha", &t.alpha),
    ] {
        params.check_scalar(s, field)?;
    }
    Ok(())
}
