use thiserror::Error;

use crate::keygen::MemberId;

/// Errors produced anywhere in the protocol stack.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{which} is not prime")]
    NotPrime { which: &'static str },
    #[error("q does not divide p - 1")]
    OrderMismatch,
    #[error("g does not generate the order-q subgroup")]
    BadGenerator,
    #[error("parameters too small for the production profile (need |p| >= {min_p} and |q| >= {min_q} bits)")]
    ProfileTooSmall { min_p: u64, min_q: u64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("{what} is out of range")]
    OutOfRange { what: String },
    #[error("hash stub has no entry for this (commitment, message) pair")]
    StubMiss,

    #[error("duplicate interpolation point")]
    DuplicatePoint,
    #[error("interpolation point is zero")]
    ZeroPoint,
    #[error("target point is not in the interpolation set")]
    UnknownPoint,
    #[error("empty interpolation set")]
    EmptyPointSet,

    #[error("threshold {t} is invalid for a group of {n} members")]
    ThresholdOutOfRange { t: usize, n: usize },
    #[error("the common secret must be nonzero")]
    ZeroSecret,
    #[error("no public key registered for recipient {0}")]
    MissingRecipientKey(MemberId),
    #[error("expected {expected} partial group keys, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("unmasked share is not below q (wrong key or corrupted value)")]
    ShareOutOfRange,
    #[error("share from {dealer} does not match its published commitment")]
    CorruptShare { dealer: MemberId },

    #[error("unknown signer {0}")]
    UnknownSigner(MemberId),
    #[error("missing public share from {dealer} to {recipient}")]
    MissingPublicShare {
        dealer: MemberId,
        recipient: MemberId,
    },
    #[error("{got} signers do not meet the threshold {t}")]
    ThresholdNotMet { t: usize, got: usize },
    #[error("signer {0} appears more than once")]
    DuplicateSigner(MemberId),
    #[error("aggregate commitment U_S is the identity; signers must re-draw nonces")]
    DegenerateSession,
    #[error("missing recovered share from absent member {0}")]
    MissingAbsentShare(MemberId),

    #[error("partial signature from {0} failed verification")]
    UnverifiedPartial(MemberId),
    #[error("partial signature from {0} belongs to a different session")]
    SessionMismatch(MemberId),
    #[error("missing partial signatures from {}", id_list(.0))]
    IncompleteSet(Vec<MemberId>),

    #[error("signature does not verify under the receiver key")]
    InvalidSignature,
    #[error("verifier's opening does not reconstruct its commitment")]
    OpeningMismatch,

    #[error("scenario misconfigured: {0}")]
    ScenarioMisconfigured(String),
    #[error("golden replay mismatch: {0}")]
    GoldenMismatch(String),
    #[error("malformed {field}: {reason}")]
    Format { field: String, reason: String },
}

fn id_list(ids: &[MemberId]) -> String {
    ids.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
