//! Designated combiner: checks partial signatures against directory publics
//! and folds them into the group signature. Holds no secrets.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::encoding::base64_bytes;
use crate::error::{Error, Result};
use crate::group_math::{Element, Scalar};
use crate::keygen::{GroupDirectory, MemberId};
use crate::signing::{signer_coefficients, PartialSignature, SigningSession};

/// `{S_S, U_S, W_S, m}` plus the signer set needed to recompute `E`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSignature {
    pub s_s: Scalar,
    pub u_s: Element,
    pub w_s: Element,
    #[serde(with = "base64_bytes")]
    pub message: Vec<u8>,
    pub signers: Vec<MemberId>,
}

/// `g^{s_i} == v_i * (y_i * prod_{j absent} m_ji^{C_i})^{R_S} mod p`. The
/// carried `C_i` is recomputed from the public points and the carried `R_S`
/// must be the session's; a zero challenge binds no key and is refused.
pub fn verify_partial(
    directory: &GroupDirectory,
    session: &SigningSession,
    ps: &PartialSignature,
) -> Result<bool> {
    let params = directory.params();
    let signers = &session.signers;
    if !signers.contains(&ps.signer) {
        return Err(Error::UnknownSigner(ps.signer));
    }
    params.check_scalar(&ps.s, "s")?;
    params.check_element(&ps.v, "v")?;
    let coefficients = signer_coefficients(directory.config(), signers)?;
    if coefficients[&ps.signer] != ps.c || ps.r_s != session.r_s || ps.r_s == params.zero() {
        return Ok(false);
    }
    let mut base = directory.partial_key(ps.signer)?.clone();
    for j in directory.absent_members(signers) {
        let m = &directory.entry(j, ps.signer)?.share_commitment;
        base = params.mul_elements(&base, &params.pow(m, &ps.c));
    }
    let rhs = params.mul_elements(&ps.v, &params.pow(&base, &ps.r_s));
    Ok(params.g_pow(&ps.s) == rhs)
}

/// Collects partials for one session; only verified ones are admitted.
pub struct Combiner<'a> {
    directory: &'a GroupDirectory,
    session: &'a SigningSession,
    accepted: BTreeMap<MemberId, PartialSignature>,
}

impl<'a> Combiner<'a> {
    pub fn new(directory: &'a GroupDirectory, session: &'a SigningSession) -> Self {
        Combiner {
            directory,
            session,
            accepted: BTreeMap::new(),
        }
    }

    pub fn add(&mut self, ps: PartialSignature) -> Result<()> {
        if ps.session != self.session.id {
            return Err(Error::SessionMismatch(ps.signer));
        }
        if self.accepted.contains_key(&ps.signer) {
            return Err(Error::DuplicateSigner(ps.signer));
        }
        if !verify_partial(self.directory, self.session, &ps)? {
            return Err(Error::UnverifiedPartial(ps.signer));
        }
        self.accepted.insert(ps.signer, ps);
        Ok(())
    }

    pub fn missing(&self) -> Vec<MemberId> {
        self.session
            .signers
            .iter()
            .filter(|id| !self.accepted.contains_key(id))
            .copied()
            .collect()
    }

    pub fn finish(self) -> Result<GroupSignature> {
        let missing = self.missing();
        if !missing.is_empty() {
            return Err(Error::IncompleteSet(missing));
        }
        let params = self.directory.params();
        Ok(GroupSignature {
            s_s: params.sum(self.accepted.values().map(|ps| &ps.s)),
            u_s: self.session.u_s.clone(),
            w_s: self.session.w_s.clone(),
            message: self.session.message.clone(),
            signers: self.session.signers.clone(),
        })
    }
}

/// Verifies every partial and sums them: `S_S = sum s_i mod q`.
pub fn combine(
    directory: &GroupDirectory,
    session: &SigningSession,
    partials: Vec<PartialSignature>,
) -> Result<GroupSignature> {
    let mut combiner = Combiner::new(directory, session);
    for ps in partials {
        combiner.add(ps)?;
    }
    combiner.finish()
}
