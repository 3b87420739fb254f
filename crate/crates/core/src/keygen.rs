//! Dealerless setup. Every member deals its own polynomial: for each other
//! member it publishes commitments to a blinded share and the share itself
//! masked under the recipient's long-term key.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group_math::{Element, GroupParams, HashOracle, MaskedShare, Scalar};
use crate::shamir::Polynomial;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MemberId(pub u32);

impl fmt::Display for MemberId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "S{}", self.0)
    }
}

/// Static group setup shared by every party.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupConfig {
    params: GroupParams,
    threshold: usize,
    points: BTreeMap<MemberId, Scalar>,
    oracle: HashOracle,
}

impl GroupConfig {
    pub fn new(
        params: GroupParams,
        threshold: usize,
        points: BTreeMap<MemberId, Scalar>,
        oracle: HashOracle,
    ) -> Result<Self> {
        let n = points.len();
        if n == 0 || threshold == 0 || threshold > n {
            return Err(Error::ThresholdOutOfRange { t: threshold, n });
        }
        let mut seen = Vec::with_capacity(n);
        for (id, x) in &points {
            params.check_scalar(x, &format!("point of {id}"))?;
            if x.value().is_zero() {
                return Err(Error::ZeroPoint);
            }
            if seen.contains(&x) {
                return Err(Error::DuplicatePoint);
            }
            seen.push(x);
        }
        oracle.check(&params)?;
        Ok(GroupConfig {
            params,
            threshold,
            points,
            oracle,
        })
    }

    /// Members `1..=n` with distinct random nonzero points.
    pub fn random_points<R: RngCore + CryptoRng>(
        params: &GroupParams,
        n: usize,
        rng: &mut R,
    ) -> Result<BTreeMap<MemberId, Scalar>> {
        if num_bigint::BigUint::from(n) >= *params.q() {
            return Err(Error::ThresholdOutOfRange { t: 0, n });
        }
        let mut points = BTreeMap::new();
        let mut used = Vec::new();
        let mut next = 1u32;
        while points.len() < n {
            let x = params.random_nonzero_scalar(rng);
            if !used.contains(&x) {
                used.push(x.clone());
                points.insert(MemberId(next), x);
                next += 1;
            }
        }
        Ok(points)
    }

    pub fn params(&self) -> &GroupParams {
        &self.params
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn oracle(&self) -> &HashOracle {
        &self.oracle
    }

    pub fn points(&self) -> &BTreeMap<MemberId, Scalar> {
        &self.points
    }

    pub fn member_ids(&self) -> impl Iterator<Item = MemberId> + '_ {
        self.points.keys().copied()
    }

    pub fn point(&self, id: MemberId) -> Result<&Scalar> {
        self.points.get(&id).ok_or(Error::UnknownSigner(id))
    }

    pub fn with_oracle(mut self, oracle: HashOracle) -> Result<Self> {
        oracle.check(&self.params)?;
        self.oracle = oracle;
        Ok(self)
    }
}

/// One member's long-term and dealing secrets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemberKeys {
    id: MemberId,
    secret_key: Scalar,
    public_key: Element,
    polynomial: Polynomial,
    masks: BTreeMap<MemberId, Scalar>,
}

impl MemberKeys {
    pub fn generate<R: RngCore + CryptoRng>(
        config: &GroupConfig,
        id: MemberId,
        rng: &mut R,
    ) -> Result<Self> {
        let params = config.params();
        config.point(id)?;
        let secret_key = params.random_nonzero_scalar(rng);
        let polynomial = Polynomial::random(params, config.threshold(), rng);
        let masks = config
            .member_ids()
            .filter(|&j| j != id)
            .map(|j| (j, params.random_scalar(rng)))
            .collect();
        Self::from_parts(config, id, secret_key, polynomial, masks)
    }

    pub fn from_parts(
        config: &GroupConfig,
        id: MemberId,
        secret_key: Scalar,
        polynomial: Polynomial,
        masks: BTreeMap<MemberId, Scalar>,
    ) -> Result<Self> {
        let params = config.params();
        config.point(id)?;
        params.check_scalar(&secret_key, "secret_key")?;
        if polynomial.len() != config.threshold() {
            return Err(Error::Format {
                field: "polynomial".into(),
                reason: format!(
                    "expected {} coefficients, got {}",
                    config.threshold(),
                    polynomial.len()
                ),
            });
        }
        for c in polynomial.coefficients() {
            params.check_scalar(c, "polynomial")?;
        }
        for j in config.member_ids().filter(|&j| j != id) {
            let h = masks.get(&j).ok_or_else(|| Error::Format {
                field: "masks".into(),
                reason: format!("no mask for recipient {j}"),
            })?;
            params.check_scalar(h, "masks")?;
        }
        if masks.contains_key(&id) || masks.keys().any(|j| config.point(*j).is_err()) {
            return Err(Error::Format {
                field: "masks".into(),
                reason: "mask for a non-recipient".into(),
            });
        }
        let public_key = params.g_pow(&secret_key);
        Ok(MemberKeys {
            id,
            secret_key,
            public_key,
            polynomial,
            masks,
        })
    }

    pub fn id(&self) -> MemberId {
        self.id
    }

    pub fn secret_key(&self) -> &Scalar {
        &self.secret_key
    }

    pub fn public_key(&self) -> &Element {
        &self.public_key
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.polynomial
    }

    pub fn masks(&self) -> &BTreeMap<MemberId, Scalar> {
        &self.masks
    }
}

/// Published values from one dealer to one recipient.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DealerEntry {
    /// `m_ij = g^{l_ij}`
    pub share_commitment: Element,
    /// `n_ij = g^{h_ij}`
    pub mask_commitment: Element,
    /// `v_ij = l_ij * y_{S_j}^K mod p`
    pub masked_share: MaskedShare,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DealerRecord {
    pub dealer: MemberId,
    /// `y_i = g^{f_i(0)}`
    pub partial_key: Element,
    pub entries: BTreeMap<MemberId, DealerEntry>,
}

/// A dealer's public record plus the plaintext shares it dealt. The shares
/// never leave the dealer except masked; the harness keeps them for checks.
#[derive(Clone, Debug)]
pub struct DealerOutput {
    pub record: DealerRecord,
    pub shares: BTreeMap<MemberId, Scalar>,
}

/// `W = g^{-K}`.
pub fn setup_common(params: &GroupParams, common_secret: &Scalar) -> Result<Element> {
    if common_secret.value().is_zero() {
        return Err(Error::ZeroSecret);
    }
    params.check_scalar(common_secret, "K")?;
    Ok(params.g_pow_neg(common_secret))
}

/// `l * y^K mod p`, with `l` read as an integer below q.
pub fn mask_share(
    params: &GroupParams,
    share: &Scalar,
    recipient_key: &Element,
    common_secret: &Scalar,
) -> MaskedShare {
    let mask = params.pow(recipient_key, common_secret);
    params
        .masked_share((share.value() * mask.value()) % params.p())
        .expect("reduced mod p")
}

/// Runs one member's dealing: `l_ij = h_ij + f_i(u_j)` for every other member
/// `j`, evaluated at the recipient's point.
pub fn dealer_round(
    config: &GroupConfig,
    member: &MemberKeys,
    recipient_keys: &BTreeMap<MemberId, Element>,
    common_secret: &Scalar,
) -> Result<DealerOutput> {
    let params = config.params();
    let mut entries = BTreeMap::new();
    let mut shares = BTreeMap::new();
    for recipient in config.member_ids().filter(|&j| j != member.id) {
        let key = recipient_keys
            .get(&recipient)
            .ok_or(Error::MissingRecipientKey(recipient))?;
        let mask = member
            .masks
            .get(&recipient)
            .ok_or(Error::MissingRecipientKey(recipient))?;
        let evaluation = member.polynomial.evaluate(params, config.point(recipient)?);
        let share = params.add(mask, &evaluation);
        entries.insert(
            recipient,
            DealerEntry {
                share_commitment: params.g_pow(&share),
                mask_commitment: params.g_pow(mask),
                masked_share: mask_share(params, &share, key, common_secret),
            },
        );
        shares.insert(recipient, share);
    }
    let partial_key = params.g_pow(&member.polynomial.constant_term(params));
    Ok(DealerOutput {
        record: DealerRecord {
            dealer: member.id,
            partial_key,
            entries,
        },
        shares,
    })
}

/// `y_S = prod y_i mod p`, requiring exactly one partial key per member.
pub fn aggregate_group_key(
    params: &GroupParams,
    partial_keys: &[Element],
    members: usize,
) -> Result<Element> {
    if partial_keys.len() != members {
        return Err(Error::CountMismatch {
            expected: members,
            got: partial_keys.len(),
        });
    }
    Ok(params.product(partial_keys))
}

/// `l = v * W^x mod p`. The result must be a valid share below q; anything
/// else means the wrong key or a corrupted `v`.
pub fn unmask_share(
    params: &GroupParams,
    masked: &MaskedShare,
    w: &Element,
    secret_key: &Scalar,
) -> Result<Scalar> {
    let unmask = params.pow(w, secret_key);
    let value = (masked.value() * unmask.value()) % params.p();
    params.scalar(value).map_err(|_| Error::ShareOutOfRange)
}

pub fn verify_recovered_share(params: &GroupParams, share: &Scalar, commitment: &Element) -> bool {
    &params.g_pow(share) == commitment
}

/// Everything public after setup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupDirectory {
    config: GroupConfig,
    w: Element,
    group_key: Element,
    receiver_key: Element,
    public_keys: BTreeMap<MemberId, Element>,
    records: BTreeMap<MemberId, DealerRecord>,
}

impl GroupDirectory {
    /// Checks completeness of the records and aggregates the group key.
    pub fn assemble(
        config: GroupConfig,
        w: Element,
        public_keys: BTreeMap<MemberId, Element>,
        records: BTreeMap<MemberId, DealerRecord>,
        receiver_key: Element,
    ) -> Result<Self> {
        let params = config.params();
        params.check_element(&w, "w")?;
        params.check_element(&receiver_key, "receiver_key")?;
        for id in config.member_ids() {
            let key = public_keys.get(&id).ok_or(Error::MissingRecipientKey(id))?;
            params.check_element(key, &format!("public key of {id}"))?;
            let record = records.get(&id).ok_or(Error::CountMismatch {
                expected: config.size(),
                got: records.len(),
            })?;
            if record.dealer != id {
                return Err(Error::Format {
                    field: "dealers".into(),
                    reason: format!("record for {id} names {}", record.dealer),
                });
            }
            params.check_element(&record.partial_key, &format!("partial key of {id}"))?;
            for j in config.member_ids().filter(|&j| j != id) {
                let entry = record.entries.get(&j).ok_or(Error::MissingPublicShare {
                    dealer: id,
                    recipient: j,
                })?;
                params.check_element(&entry.share_commitment, &format!("m[{id}][{j}]"))?;
                params.check_element(&entry.mask_commitment, &format!("n[{id}][{j}]"))?;
                params.check_masked(&entry.masked_share, &format!("v[{id}][{j}]"))?;
            }
            if record.entries.len() != config.size() - 1 {
                return Err(Error::Format {
                    field: format!("entries of {id}"),
                    reason: "unexpected recipient".into(),
                });
            }
        }
        if public_keys.len() != config.size() || records.len() != config.size() {
            return Err(Error::CountMismatch {
                expected: config.size(),
                got: records.len().max(public_keys.len()),
            });
        }
        let partial_keys: Vec<Element> = records.values().map(|r| r.partial_key.clone()).collect();
        let group_key = aggregate_group_key(params, &partial_keys, config.size())?;
        Ok(GroupDirectory {
            config,
            w,
            group_key,
            receiver_key,
            public_keys,
            records,
        })
    }

    pub fn config(&self) -> &GroupConfig {
        &self.config
    }

    pub fn params(&self) -> &GroupParams {
        self.config.params()
    }

    pub fn w(&self) -> &Element {
        &self.w
    }

    pub fn group_key(&self) -> &Element {
        &self.group_key
    }

    pub fn receiver_key(&self) -> &Element {
        &self.receiver_key
    }

    pub fn public_keys(&self) -> &BTreeMap<MemberId, Element> {
        &self.public_keys
    }

    pub fn records(&self) -> &BTreeMap<MemberId, DealerRecord> {
        &self.records
    }

    pub fn public_key(&self, id: MemberId) -> Result<&Element> {
        self.public_keys.get(&id).ok_or(Error::UnknownSigner(id))
    }

    pub fn partial_key(&self, id: MemberId) -> Result<&Element> {
        self.records
            .get(&id)
            .map(|r| &r.partial_key)
            .ok_or(Error::UnknownSigner(id))
    }

    pub fn entry(&self, dealer: MemberId, recipient: MemberId) -> Result<&DealerEntry> {
        self.records
            .get(&dealer)
            .and_then(|r| r.entries.get(&recipient))
            .ok_or(Error::MissingPublicShare { dealer, recipient })
    }

    /// Members of the group that are not in `signers`.
    pub fn absent_members(&self, signers: &[MemberId]) -> Vec<MemberId> {
        self.config
            .member_ids()
            .filter(|id| !signers.contains(id))
            .collect()
    }
}

/// Output of a full in-process setup run.
#[derive(Clone, Debug)]
pub struct SetupOutput {
    pub directory: GroupDirectory,
    /// Plaintext shares keyed by `(dealer, recipient)`.
    pub shares: BTreeMap<(MemberId, MemberId), Scalar>,
}

/// Runs every dealer round and assembles the directory.
pub fn run_setup(
    config: &GroupConfig,
    members: &[MemberKeys],
    common_secret: &Scalar,
    receiver_key: &Element,
) -> Result<SetupOutput> {
    let params = config.params();
    let w = setup_common(params, common_secret)?;
    let public_keys: BTreeMap<MemberId, Element> = members
        .iter()
        .map(|m| (m.id, m.public_key.clone()))
        .collect();
    let mut records = BTreeMap::new();
    let mut shares = BTreeMap::new();
    for member in members {
        let out = dealer_round(config, member, &public_keys, common_secret)?;
        for (recipient, share) in out.shares {
            shares.insert((member.id, recipient), share);
        }
        records.insert(member.id, out.record);
    }
    let directory = GroupDirectory::assemble(
        config.clone(),
        w,
        public_keys,
        records,
        receiver_key.clone(),
    )?;
    Ok(SetupOutput { directory, shares })
}
