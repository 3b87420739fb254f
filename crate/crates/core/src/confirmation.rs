//! Interactive confirmation: the receiver convinces a third party that
//! `log_{U_S} mu = log_g y_R` without revealing `x_R`.
//!
//! Moves: C commits to `(u, v)` with `w`; R answers `(beta, gamma)`; C opens
//! `(u, v)`; R checks the opening and only then reveals `alpha`.

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::combiner::GroupSignature;
use crate::encoding::base64_bytes;
use crate::error::{Error, Result};
use crate::group_math::{Element, GroupParams, Scalar};
use crate::keygen::{GroupDirectory, MemberId};
use crate::signing::signer_coefficients;
use crate::verification::{
    challenge_for, compute_e, recover_commitment, signature_congruence, verify_group_signature,
};

/// What R sends to C before the proof starts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfirmationStatement {
    pub r_r: Element,
    pub e: Element,
    pub s_s: Scalar,
    pub u_s: Element,
    pub w_s: Element,
    #[serde(with = "base64_bytes")]
    pub message: Vec<u8>,
    pub mu: Element,
    pub signers: Vec<MemberId>,
}

/// The full record of one run, enough to re-check offline.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfirmationTranscript {
    pub statement: ConfirmationStatement,
    pub w: Element,
    pub beta: Element,
    pub gamma: Element,
    pub u: Scalar,
    pub v: Scalar,
    pub alpha: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commitment {
    pub w: Element,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Response {
    pub beta: Element,
    pub gamma: Element,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Opening {
    pub u: Scalar,
    pub v: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reveal {
    pub alpha: Scalar,
}

/// `(mu, R_R) = (U_S^{x_R}, mu * W_S)`.
pub fn statement_values(
    params: &GroupParams,
    u_s: &Element,
    w_s: &Element,
    x_r: &Scalar,
) -> (Element, Element) {
    let mu = params.pow(u_s, x_r);
    let r_r = params.mul_elements(&mu, w_s);
    (mu, r_r)
}

/// Refuses to build a statement for a signature that does not verify.
pub fn prover_prepare(
    directory: &GroupDirectory,
    sig: &GroupSignature,
    x_r: &Scalar,
) -> Result<ConfirmationStatement> {
    if !verify_group_signature(directory, sig, x_r)? {
        return Err(Error::InvalidSignature);
    }
    let params = directory.params();
    let coefficients = signer_coefficients(directory.config(), &sig.signers)?;
    let (mu, r_r) = statement_values(params, &sig.u_s, &sig.w_s, x_r);
    debug_assert_eq!(r_r, recover_commitment(params, &sig.w_s, &sig.u_s, x_r));
    Ok(ConfirmationStatement {
        r_r,
        e: compute_e(directory, &sig.signers, &coefficients)?,
        s_s: sig.s_s.clone(),
        u_s: sig.u_s.clone(),
        w_s: sig.w_s.clone(),
        message: sig.message.clone(),
        mu,
        signers: sig.signers.clone(),
    })
}

/// C's check before the proof: `R_R = mu * W_S`, `E` recomputed from the
/// directory, then the signature congruence under `R_S = h(R_R, m)`.
pub fn verifier_check_statement(
    directory: &GroupDirectory,
    st: &ConfirmationStatement,
) -> Result<bool> {
    let params = directory.params();
    for (field, value) in [
        ("r_r", &st.r_r),
        ("e", &st.e),
        ("u_s", &st.u_s),
        ("w_s", &st.w_s),
        ("mu", &st.mu),
    ] {
        params.check_element(value, field)?;
    }
    params.check_scalar(&st.s_s, "s_s")?;
    let coefficients = signer_coefficients(directory.config(), &st.signers)?;
    if st.u_s == params.identity() || params.mul_elements(&st.mu, &st.w_s) != st.r_r {
        return Ok(false);
    }
    let e = compute_e(directory, &st.signers, &coefficients)?;
    if e != st.e {
        return Ok(false);
    }
    let Some(r_s) = challenge_for(directory, &st.r_r, &st.message)? else {
        return Ok(false);
    };
    if r_s == params.zero() {
        return Ok(false);
    }
    Ok(signature_congruence(
        params,
        &st.s_s,
        &st.r_r,
        &e,
        directory.group_key(),
        &r_s,
    ))
}

/// `w = U_S^u * g^v mod p`.
pub fn verifier_commit_with(
    params: &GroupParams,
    u_s: &Element,
    u: &Scalar,
    v: &Scalar,
) -> Element {
    params.mul_elements(&params.pow(u_s, u), &params.g_pow(v))
}

/// Draws `u` from `[1, q)` and `v` from `[0, q)`.
pub fn verifier_commit<R: RngCore + CryptoRng>(
    params: &GroupParams,
    u_s: &Element,
    rng: &mut R,
) -> (Opening, Element) {
    let u = params.random_nonzero_scalar(rng);
    let v = params.random_scalar(rng);
    let w = verifier_commit_with(params, u_s, &u, &v);
    (Opening { u, v }, w)
}

/// `beta = w * g^alpha`, `gamma = beta^{x_R}`.
pub fn prover_respond_with(
    params: &GroupParams,
    w: &Element,
    alpha: &Scalar,
    x_r: &Scalar,
) -> Response {
    let beta = params.mul_elements(w, &params.g_pow(alpha));
    let gamma = params.pow(&beta, x_r);
    Response { beta, gamma }
}

pub fn prover_respond<R: RngCore + CryptoRng>(
    params: &GroupParams,
    w: &Element,
    x_r: &Scalar,
    rng: &mut R,
) -> (Scalar, Response) {
    let alpha = params.random_scalar(rng);
    let response = prover_respond_with(params, w, &alpha, x_r);
    (alpha, response)
}

pub fn prover_check_opening(
    params: &GroupParams,
    w: &Element,
    opening: &Opening,
    u_s: &Element,
) -> bool {
    verifier_commit_with(params, u_s, &opening.u, &opening.v) == *w
}

/// `beta == U_S^u g^{v+alpha}` and `gamma == mu^u y_R^{v+alpha}`.
#[allow(clippy::too_many_arguments)]
pub fn verifier_final_check(
    params: &GroupParams,
    response: &Response,
    opening: &Opening,
    alpha: &Scalar,
    mu: &Element,
    receiver_key: &Element,
    u_s: &Element,
) -> bool {
    let exponent = params.add(&opening.v, alpha);
    let beta = params.mul_elements(&params.pow(u_s, &opening.u), &params.g_pow(&exponent));
    let gamma = params.mul_elements(
        &params.pow(mu, &opening.u),
        &params.pow(receiver_key, &exponent),
    );
    response.beta == beta && response.gamma == gamma
}

/// Re-runs every check of a recorded transcript.
pub fn check_transcript(directory: &GroupDirectory, t: &ConfirmationTranscript) -> Result<bool> {
    let params = directory.params();
    let opening = Opening {
        u: t.u.clone(),
        v: t.v.clone(),
    };
    let response = Response {
        beta: t.beta.clone(),
        gamma: t.gamma.clone(),
    };
    Ok(verifier_check_statement(directory, &t.statement)?
        && prover_check_opening(params, &t.w, &opening, &t.statement.u_s)
        && verifier_final_check(
            params,
            &response,
            &opening,
            &t.alpha,
            &t.statement.mu,
            directory.receiver_key(),
            &t.statement.u_s,
        ))
}

/// R before C has committed.
pub struct ProverStart<'a> {
    params: &'a GroupParams,
    statement: ConfirmationStatement,
    x_r: Scalar,
}

/// R after answering; holds `alpha` until the opening is checked.
pub struct ProverAwaitingOpening<'a> {
    params: &'a GroupParams,
    statement: ConfirmationStatement,
    w: Element,
    alpha: Scalar,
}

impl<'a> ProverStart<'a> {
    pub fn new(directory: &'a GroupDirectory, sig: &GroupSignature, x_r: Scalar) -> Result<Self> {
        let statement = prover_prepare(directory, sig, &x_r)?;
        Ok(ProverStart {
            params: directory.params(),
            statement,
            x_r,
        })
    }

    pub fn statement(&self) -> &ConfirmationStatement {
        &self.statement
    }

    pub fn respond_with(
        self,
        commitment: &Commitment,
        alpha: Scalar,
    ) -> Result<(ProverAwaitingOpening<'a>, Response)> {
        self.params.check_element(&commitment.w, "w")?;
        let response = prover_respond_with(self.params, &commitment.w, &alpha, &self.x_r);
        let next = ProverAwaitingOpening {
            params: self.params,
            statement: self.statement,
            w: commitment.w.clone(),
            alpha,
        };
        Ok((next, response))
    }

    pub fn respond<R: RngCore + CryptoRng>(
        self,
        commitment: &Commitment,
        rng: &mut R,
    ) -> Result<(ProverAwaitingOpening<'a>, Response)> {
        let alpha = self.params.random_scalar(rng);
        self.respond_with(commitment, alpha)
    }
}

impl ProverAwaitingOpening<'_> {
    /// Reveals `alpha` only if `(u, v)` reopens `w`. On failure the state,
    /// and `alpha` with it, is dropped.
    pub fn open(self, opening: &Opening) -> Result<Reveal> {
        if !prover_check_opening(self.params, &self.w, opening, &self.statement.u_s) {
            return Err(Error::OpeningMismatch);
        }
        Ok(Reveal { alpha: self.alpha })
    }
}

/// C after accepting the statement and committing.
pub struct VerifierAwaitingResponse<'a> {
    directory: &'a GroupDirectory,
    statement: ConfirmationStatement,
    opening: Opening,
    w: Element,
}

/// C after opening; waits for `alpha`.
pub struct VerifierAwaitingReveal<'a> {
    directory: &'a GroupDirectory,
    statement: ConfirmationStatement,
    opening: Opening,
    w: Element,
    response: Response,
}

impl<'a> VerifierAwaitingResponse<'a> {
    /// Checks the statement and commits to `(u, v)`.
    pub fn start_with(
        directory: &'a GroupDirectory,
        statement: ConfirmationStatement,
        opening: Opening,
    ) -> Result<(Self, Commitment)> {
        if !verifier_check_statement(directory, &statement)? {
            return Err(Error::InvalidSignature);
        }
        let w = verifier_commit_with(directory.params(), &statement.u_s, &opening.u, &opening.v);
        let commitment = Commitment { w: w.clone() };
        Ok((
            VerifierAwaitingResponse {
                directory,
                statement,
                opening,
                w,
            },
            commitment,
        ))
    }

    pub fn start<R: RngCore + CryptoRng>(
        directory: &'a GroupDirectory,
        statement: ConfirmationStatement,
        rng: &mut R,
    ) -> Result<(Self, Commitment)> {
        let params = directory.params();
        let opening = Opening {
            u: params.random_nonzero_scalar(rng),
            v: params.random_scalar(rng),
        };
        Self::start_with(directory, statement, opening)
    }

    pub fn receive(self, response: Response) -> Result<(VerifierAwaitingReveal<'a>, Opening)> {
        let params = self.directory.params();
        params.check_element(&response.beta, "beta")?;
        params.check_element(&response.gamma, "gamma")?;
        let opening = self.opening.clone();
        let next = VerifierAwaitingReveal {
            directory: self.directory,
            statement: self.statement,
            opening: self.opening,
            w: self.w,
            response,
        };
        Ok((next, opening))
    }
}

impl VerifierAwaitingReveal<'_> {
    pub fn finish(self, reveal: Reveal) -> Result<(bool, ConfirmationTranscript)> {
        let params = self.directory.params();
        params.check_scalar(&reveal.alpha, "alpha")?;
        let accepted = verifier_final_check(
            params,
            &self.response,
            &self.opening,
            &reveal.alpha,
            &self.statement.mu,
            self.directory.receiver_key(),
            &self.statement.u_s,
        );
        let transcript = ConfirmationTranscript {
            statement: self.statement,
            w: self.w,
            beta: self.response.beta,
            gamma: self.response.gamma,
            u: self.opening.u,
            v: self.opening.v,
            alpha: reveal.alpha,
        };
        Ok((accepted, transcript))
    }
}

/// Drives both sides with their own randomness.
pub fn run_confirmation<R1, R2>(
    directory: &GroupDirectory,
    sig: &GroupSignature,
    x_r: &Scalar,
    verifier_rng: &mut R1,
    prover_rng: &mut R2,
) -> Result<(bool, ConfirmationTranscript)>
where
    R1: RngCore + CryptoRng,
    R2: RngCore + CryptoRng,
{
    let prover = ProverStart::new(directory, sig, x_r.clone())?;
    let (verifier, commitment) =
        VerifierAwaitingResponse::start(directory, prover.statement().clone(), verifier_rng)?;
    let (prover, response) = prover.respond(&commitment, prover_rng)?;
    let (verifier, opening) = verifier.receive(response)?;
    let reveal = prover.open(&opening)?;
    verifier.finish(reveal)
}
