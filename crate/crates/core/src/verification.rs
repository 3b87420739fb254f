//! Receiver-side verification. Only the holder of `x_R` can turn `(W_S, U_S)`
//! back into the session commitment.

use std::collections::BTreeMap;

use crate::combiner::GroupSignature;
use crate::error::{Error, Result};
use crate::group_math::{Element, GroupParams, Scalar};
use crate::keygen::{GroupDirectory, MemberId};
use crate::signing::signer_coefficients;

/// `E = prod_{i in H} (prod_{j absent} n_ji)^{C_i} mod p`.
pub fn compute_e(
    directory: &GroupDirectory,
    signers: &[MemberId],
    coefficients: &BTreeMap<MemberId, Scalar>,
) -> Result<Element> {
    let params = directory.params();
    let absent = directory.absent_members(signers);
    let mut e = params.identity();
    for &i in signers {
        let c = coefficients.get(&i).ok_or(Error::UnknownSigner(i))?;
        let mut inner = params.identity();
        for &j in &absent {
            inner = params.mul_elements(&inner, &directory.entry(j, i)?.mask_commitment);
        }
        e = params.mul_elements(&e, &params.pow(&inner, c));
    }
    Ok(e)
}

/// `R_R = W_S * U_S^{x_R} mod p`.
pub fn recover_commitment(
    params: &GroupParams,
    w_s: &Element,
    u_s: &Element,
    x_r: &Scalar,
) -> Element {
    params.mul_elements(w_s, &params.pow(u_s, x_r))
}

/// `g^{S_S} == R_R * (E * y_S)^{R_S} mod p`.
pub fn signature_congruence(
    params: &GroupParams,
    s_s: &Scalar,
    r_r: &Element,
    e: &Element,
    group_key: &Element,
    r_s: &Scalar,
) -> bool {
    let rhs = params.mul_elements(r_r, &params.pow(&params.mul_elements(e, group_key), r_s));
    params.g_pow(s_s) == rhs
}

/// Hashes a recovered commitment. A stub table that has no entry for it
/// cannot vouch for the signature, so that case is `None` rather than an error.
pub(crate) fn challenge_for(
    directory: &GroupDirectory,
    r_r: &Element,
    message: &[u8],
) -> Result<Option<Scalar>> {
    match directory
        .config()
        .oracle()
        .hash_to_scalar(directory.params(), r_r, message)
    {
        Ok(r_s) => Ok(Some(r_s)),
        Err(Error::StubMiss) => Ok(None),
        Err(other) => Err(other),
    }
}

pub(crate) fn check_signature_fields(params: &GroupParams, sig: &GroupSignature) -> Result<()> {
    params.check_scalar(&sig.s_s, "s_s")?;
    params.check_element(&sig.u_s, "u_s")?;
    params.check_element(&sig.w_s, "w_s")
}

/// Recomputes `C_i`, `E`, `R_R` and `R_S = h(R_R, m)` and checks the congruence.
/// A signature with `U_S = 1` hides nothing from other receivers and one
/// whose challenge is zero binds no key; both are rejected.
pub fn verify_group_signature(
    directory: &GroupDirectory,
    sig: &GroupSignature,
    x_r: &Scalar,
) -> Result<bool> {
    let params = directory.params();
    check_signature_fields(params, sig)?;
    let coefficients = signer_coefficients(directory.config(), &sig.signers)?;
    if sig.u_s == params.identity() {
        return Ok(false);
    }
    let e = compute_e(directory, &sig.signers, &coefficients)?;
    let r_r = recover_commitment(params, &sig.w_s, &sig.u_s, x_r);
    let Some(r_s) = challenge_for(directory, &r_r, &sig.message)? else {
        return Ok(false);
    };
    if r_s == params.zero() {
        return Ok(false);
    }
    Ok(signature_congruence(
        params,
        &sig.s_s,
        &r_r,
        &e,
        directory.group_key(),
        &r_s,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combiner::combine;
    use crate::combiner::tests::honest_run;
    use crate::group_math::HashOracle;
    use crate::presets::paper_group;
    use crate::sim::paper::run_paper_protocol;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn s(v: u64) -> Scalar {
        paper_group().scalar_u64(v)
    }

    fn e(v: u64) -> Element {
        paper_group().element_u64(v).unwrap()
    }

    #[test]
    fn e_examples() {
        let run = run_paper_protocol().unwrap();
        let signers = &run.session.signers;
        assert_eq!(
            compute_e(&run.directory, signers, &run.session.coefficients).unwrap(),
            e(12)
        );
        let mut altered = run.session.coefficients.clone();
        altered.insert(MemberId(2), s(2));
        assert_ne!(compute_e(&run.directory, signers, &altered).unwrap(), e(12));
        let everyone: Vec<MemberId> = run.directory.config().member_ids().collect();
        let all = signer_coefficients(run.directory.config(), &everyone).unwrap();
        assert_eq!(compute_e(&run.directory, &everyone, &all).unwrap(), e(1));
    }

    #[test]
    fn recover_examples() {
        let params = paper_group();
        assert_eq!(recover_commitment(params, &e(14), &e(16), &s(7)), e(25));
        assert_eq!(recover_commitment(params, &e(14), &e(16), &s(5)), e(37));
        assert_eq!(recover_commitment(params, &e(30), &e(1), &s(19)), e(30));
    }

    #[test]
    fn paper_signature_verifies_only_for_r() {
        let run = run_paper_protocol().unwrap();
        assert!(verify_group_signature(&run.directory, &run.signature, &s(7)).unwrap());
        assert!(!verify_group_signature(&run.directory, &run.signature, &s(5)).unwrap());
        // 3^2 = 9 and 25 * (12 * 25)^7 = 9
        let params = paper_group();
        assert_eq!(params.g_pow(&s(2)), e(9));
        assert!(signature_congruence(
            params,
            &s(2),
            &e(25),
            &e(12),
            &e(25),
            &s(7)
        ));
    }

    #[test]
    fn other_message_fails_under_real_oracle() {
        let run = run_paper_protocol().unwrap();
        let config = run
            .directory
            .config()
            .clone()
            .with_oracle(HashOracle::Real)
            .unwrap();
        let directory = crate::keygen::GroupDirectory::assemble(
            config,
            run.directory.w().clone(),
            run.directory.public_keys().clone(),
            run.directory.records().clone(),
            run.directory.receiver_key().clone(),
        )
        .unwrap();
        let mut sig = run.signature.clone();
        sig.message = b"m'".to_vec();
        assert!(!verify_group_signature(&directory, &sig, &s(7)).unwrap());
    }

    #[test]
    fn tampering_the_signature_is_rejected() {
        let run = run_paper_protocol().unwrap();
        let params = paper_group();
        let x_r = s(7);
        let bump = |v: &Element| params.element_u64(v.to_u64().unwrap() % 46 + 1).unwrap();
        let check = |sig: &GroupSignature| verify_group_signature(&run.directory, sig, &x_r);

        let mut t = run.signature.clone();
        t.s_s = params.add(&t.s_s, &params.one());
        assert!(!check(&t).unwrap());
        let mut t = run.signature.clone();
        t.u_s = bump(&t.u_s);
        assert!(!check(&t).unwrap());
        let mut t = run.signature.clone();
        t.w_s = bump(&t.w_s);
        assert!(!check(&t).unwrap());
        let mut t = run.signature.clone();
        t.message = b"n".to_vec();
        assert!(!check(&t).unwrap());
        let mut t = run.signature.clone();
        t.signers.push(MemberId(1));
        assert!(!check(&t).unwrap());
        let mut t = run.signature.clone();
        t.signers.pop();
        assert_eq!(check(&t), Err(Error::ThresholdNotMet { t: 4, got: 3 }));
        let mut t = run.signature.clone();
        t.signers[0] = MemberId(3);
        assert!(!check(&t).unwrap());
        let mut t = run.signature.clone();
        t.signers[0] = MemberId(8);
        assert_eq!(check(&t), Err(Error::UnknownSigner(MemberId(8))));
    }

    /// The signer set enters only through `E`. In the example two sets share
    /// `E = 12`, so the signature cannot tell them apart.
    #[test]
    fn signer_set_is_bound_only_through_e() {
        let run = run_paper_protocol().unwrap();
        let other = [2, 4, 5, 6].map(MemberId).to_vec();
        let c = signer_coefficients(run.directory.config(), &other).unwrap();
        assert_eq!(compute_e(&run.directory, &other, &c).unwrap(), e(12));
        let relabelled = GroupSignature {
            signers: other,
            ..run.signature.clone()
        };
        assert!(verify_group_signature(&run.directory, &relabelled, &s(7)).unwrap());
    }

    #[test]
    fn honest_runs_verify_and_recover_v_s() {
        for seed in 0..100u64 {
            let preset = ["paper-47", "toy-59", "toy-107", "toy-64bit"][seed as usize % 4];
            let n = 1 + seed as usize % 7;
            let t = 1 + (seed as usize / 7) % n;
            let run = honest_run(preset, n, t, n - (seed as usize % (n - t + 1)), seed);
            let params = run.directory.params();
            assert_eq!(
                recover_commitment(
                    params,
                    &run.session.w_s,
                    &run.session.u_s,
                    &run.receiver_secret
                ),
                run.session.v_s
            );
            let sig = combine(&run.directory, &run.session, run.partials).unwrap();
            assert!(
                verify_group_signature(&run.directory, &sig, &run.receiver_secret).unwrap(),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn random_wrong_receiver_rarely_verifies() {
        let mut accepted = 0;
        let mut rng = ChaCha20Rng::seed_from_u64(77);
        for seed in 0..200u64 {
            let run = honest_run("paper-47", 5, 3, 3, 1000 + seed);
            let params = run.directory.params();
            let sig = combine(&run.directory, &run.session, run.partials).unwrap();
            let wrong = loop {
                let x = params.random_nonzero_scalar(&mut rng);
                if x != run.receiver_secret {
                    break x;
                }
            };
            if verify_group_signature(&run.directory, &sig, &wrong).unwrap() {
                accepted += 1;
            }
        }
        // A wrong key passes by chance with probability about 1/q, so ~9 of 200 at q = 23.
        assert!(accepted <= 20, "{accepted} of 200");
    }
}
