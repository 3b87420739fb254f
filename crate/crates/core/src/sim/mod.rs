//! Seeded multi-party runs: n members, a combiner, a receiver and a third
//! party exchanging messages over [`bus::Bus`]. One ChaCha20 stream drives
//! every random choice in a fixed order, so a seed fixes the transcript.

pub mod bus;
pub mod paper;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::combiner::{Combiner, GroupSignature};
use crate::confirmation::{ProverStart, VerifierAwaitingResponse};
use crate::error::{Error, Result};
use crate::group_math::{GroupParams, HashOracle, Scalar};
use crate::keygen::{run_setup, GroupConfig, GroupDirectory, MemberId, MemberKeys};
use crate::presets;
use crate::signing::{
    aggregate_session, make_nonce_commitment, PartialSignature, Signer, SignerNonce, SigningSession,
};
use crate::verification::verify_group_signature;
use bus::{Bus, BusRecord, MessageKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Honest,
    Impersonation,
    ForgedSignature,
    WrongReceiver,
    TamperedPartial,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Honest,
        Scenario::Impersonation,
        Scenario::ForgedSignature,
        Scenario::WrongReceiver,
        Scenario::TamperedPartial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Honest => "honest",
            Scenario::Impersonation => "impersonation",
            Scenario::ForgedSignature => "forged_signature",
            Scenario::WrongReceiver => "wrong_receiver",
            Scenario::TamperedPartial => "tampered_partial",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::ScenarioMisconfigured(format!("unknown scenario `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignerSelection {
    Explicit(Vec<MemberId>),
    /// A random subset; `None` draws the size from `t..=n` as well.
    Random(Option<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub preset: String,
    pub n: usize,
    pub t: usize,
    pub signers: SignerSelection,
    #[serde(with = "crate::encoding::base64_bytes")]
    pub message: Vec<u8>,
    pub seed: u64,
    pub scenario: Scenario,
}

impl SimConfig {
    pub fn new(preset: &str, n: usize, t: usize, seed: u64, scenario: Scenario) -> Self {
        SimConfig {
            preset: preset.into(),
            n,
            t,
            signers: SignerSelection::Random(None),
            message: b"simulated message".to_vec(),
            seed,
            scenario,
        }
    }

    fn validate(&self) -> Result<GroupParams> {
        let bad = |m: String| Err(Error::ScenarioMisconfigured(m));
        let params = presets::by_name(&self.preset).ok_or_else(|| {
            Error::ScenarioMisconfigured(format!("unknown preset `{}`", self.preset))
        })?;
        if self.n == 0 || self.t == 0 || self.t > self.n {
            return bad(format!(
                "need 1 <= t <= n, got t = {}, n = {}",
                self.t, self.n
            ));
        }
        match &self.signers {
            SignerSelection::Explicit(ids) => {
                if ids.len() < self.t {
                    return bad(format!("{} signers for threshold {}", ids.len(), self.t));
                }
                if ids.iter().any(|id| id.0 == 0 || id.0 as usize > self.n) {
                    return bad("signer id outside 1..=n".into());
                }
            }
            SignerSelection::Random(Some(k)) if *k < self.t || *k > self.n => {
                return bad(format!("signer count {k} outside {}..={}", self.t, self.n));
            }
            SignerSelection::Random(_) => {}
        }
        Ok(params)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub partials_accepted: Option<bool>,
    pub signature_verified: Option<bool>,
    pub confirmation_accepted: Option<bool>,
    /// The sum-of-partials identity, checked with every secret in view.
    pub algebra_identity: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub scenario: Scenario,
    pub verdicts: Verdicts,
    pub transcript: Vec<BusRecord>,
    pub notes: Vec<String>,
}

impl SimOutcome {
    pub fn transcript_jsonl(&self) -> String {
        bus::to_jsonl(&self.transcript)
    }

    /// Honest runs must pass every check; attacks must fail the targeted one.
    pub fn as_expected(&self) -> bool {
        let v = &self.verdicts;
        match self.scenario {
            Scenario::Honest => [
                v.partials_accepted,
                v.signature_verified,
                v.confirmation_accepted,
                v.algebra_identity,
            ]
            .iter()
            .all(|x| *x == Some(true)),
            Scenario::Impersonation | Scenario::TamperedPartial => {
                v.partials_accepted == Some(false)
            }
            Scenario::ForgedSignature | Scenario::WrongReceiver => {
                v.signature_verified == Some(false)
            }
        }
    }
}

pub fn run(cfg: &SimConfig) -> Result<SimOutcome> {
    match cfg.scenario {
        Scenario::Honest => run_honest_session(cfg),
        _ => run_attack(cfg),
    }
}

struct World {
    params: GroupParams,
    config: GroupConfig,
    members: Vec<MemberKeys>,
    directory: GroupDirectory,
    receiver_secret: Scalar,
    rng: ChaCha20Rng,
    bus: Bus,
}

fn member_name(id: MemberId) -> String {
    id.to_string()
}

fn build_world(cfg: &SimConfig, params: GroupParams) -> Result<World> {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut bus = Bus::new();
    let points = GroupConfig::random_points(&params, cfg.n, &mut rng)?;
    let config = GroupConfig::new(params.clone(), cfg.t, points, HashOracle::Real)?;
    let members: Vec<MemberKeys> = config
        .member_ids()
        .map(|id| MemberKeys::generate(&config, id, &mut rng))
        .collect::<Result<_>>()?;
    let receiver_secret = params.random_nonzero_scalar(&mut rng);
    let common_secret = params.random_nonzero_scalar(&mut rng);
    for m in &members {
        bus.send(
            &member_name(m.id()),
            "ALL",
            MessageKind::PublicKey,
            &json!({"member": m.id(), "public_key": m.public_key()}),
        )?;
    }
    let directory = run_setup(
        &config,
        &members,
        &common_secret,
        &params.g_pow(&receiver_secret),
    )?
    .directory;
    for record in directory.records().values() {
        bus.send(
            &member_name(record.dealer),
            "ALL",
            MessageKind::DealerRecord,
            record,
        )?;
    }
    Ok(World {
        params,
        config,
        members,
        directory,
        receiver_secret,
        rng,
        bus,
    })
}

fn choose_signers(cfg: &SimConfig, rng: &mut ChaCha20Rng) -> Vec<MemberId> {
    let mut ids = match &cfg.signers {
        SignerSelection::Explicit(ids) => ids.clone(),
        SignerSelection::Random(size) => {
            let k = size.unwrap_or_else(|| rng.gen_range(cfg.t..=cfg.n));
            let all: Vec<MemberId> = (1..=cfg.n as u32).map(MemberId).collect();
            all.choose_multiple(rng, k).copied().collect()
        }
    };
    ids.sort();
    ids
}

/// Nonce round. Signers re-draw while the aggregate `U_S` is the identity.
fn open_session(
    world: &mut World,
    signers: &[MemberId],
    message: &[u8],
) -> Result<(Vec<SignerNonce>, SigningSession)> {
    loop {
        let mut nonces = Vec::new();
        let mut commitments = Vec::new();
        for &id in signers {
            let (nonce, c) = make_nonce_commitment(
                &world.params,
                id,
                world.directory.receiver_key(),
                &mut world.rng,
            );
            world
                .bus
                .send(&member_name(id), "H_S", MessageKind::NonceCommitment, &c)?;
            nonces.push(nonce);
            commitments.push(c);
        }
        match aggregate_session(&world.config, &commitments, message) {
            Ok(session) => return Ok((nonces, session)),
            Err(Error::DegenerateSession) => {
                world.bus.send(
                    "H_S",
                    "H_S",
                    MessageKind::SessionAbort,
                    &json!({"reason": "U_S is the identity"}),
                )?;
            }
            Err(other) => return Err(other),
        }
    }
}

fn sign_all(
    world: &World,
    nonces: Vec<SignerNonce>,
    session: &SigningSession,
) -> Result<Vec<PartialSignature>> {
    session
        .signers
        .iter()
        .zip(nonces)
        .map(|(id, nonce)| {
            let keys = world
                .members
                .iter()
                .find(|m| m.id() == *id)
                .ok_or(Error::UnknownSigner(*id))?;
            Signer::new(&world.directory, keys)?.sign(nonce, session)
        })
        .collect()
}

/// `sum s_i = sum K_i1 + R_S (sum_all f_i(0) + sum_{j absent, i in H} C_i h_ji)`.
fn algebra_identity(
    world: &World,
    session: &SigningSession,
    nonce_sum: &Scalar,
    partials: &[PartialSignature],
) -> bool {
    let p = &world.params;
    let sum_s = p.sum(partials.iter().map(|ps| &ps.s));
    let sum_f0 = world.members.iter().fold(p.zero(), |acc, m| {
        p.add(&acc, &m.polynomial().constant_term(p))
    });
    let mut masks = p.zero();
    for j in world.directory.absent_members(&session.signers) {
        let dealer = &world.members[j.0 as usize - 1];
        for i in &session.signers {
            if let (Some(c), Some(h)) = (session.coefficients.get(i), dealer.masks().get(i)) {
                masks = p.add(&masks, &p.mul(c, h));
            }
        }
    }
    sum_s == p.add(nonce_sum, &p.mul(&session.r_s, &p.add(&sum_f0, &masks)))
}

/// Combiner side: checks every partial, reports each verdict on the bus.
fn deliver_partials(
    world: &mut World,
    session: &SigningSession,
    partials: Vec<PartialSignature>,
) -> Result<(bool, Vec<MemberId>, Option<GroupSignature>)> {
    let mut combiner = Combiner::new(&world.directory, session);
    let mut rejected = Vec::new();
    for ps in partials {
        world.bus.send(
            &member_name(ps.signer),
            "DC",
            MessageKind::PartialSignature,
            &ps,
        )?;
        let signer = ps.signer;
        let accepted = match combiner.add(ps) {
            Ok(()) => true,
            Err(Error::UnverifiedPartial(_)) => false,
            Err(other) => return Err(other),
        };
        if !accepted {
            rejected.push(signer);
        }
        world.bus.send(
            "DC",
            &member_name(signer),
            MessageKind::PartialVerdict,
            &json!({"signer": signer, "accepted": accepted}),
        )?;
    }
    if !rejected.is_empty() {
        return Ok((false, rejected, None));
    }
    Ok((true, rejected, Some(combiner.finish()?)))
}

fn receive_signature(world: &mut World, sig: &GroupSignature, x_r: &Scalar) -> Result<bool> {
    world
        .bus
        .send("DC", "R", MessageKind::GroupSignature, sig)?;
    let ok = verify_group_signature(&world.directory, sig, x_r)?;
    world.bus.send(
        "R",
        "R",
        MessageKind::SignatureVerdict,
        &json!({"accepted": ok}),
    )?;
    Ok(ok)
}

fn confirm(world: &mut World, sig: &GroupSignature) -> Result<bool> {
    let directory = &world.directory;
    let prover = ProverStart::new(directory, sig, world.receiver_secret.clone())?;
    world.bus.send(
        "R",
        "C",
        MessageKind::ConfirmationStatement,
        prover.statement(),
    )?;
    let (verifier, commitment) =
        VerifierAwaitingResponse::start(directory, prover.statement().clone(), &mut world.rng)?;
    world
        .bus
        .send("C", "R", MessageKind::ConfirmationCommitment, &commitment)?;
    let (prover, response) = prover.respond(&commitment, &mut world.rng)?;
    world
        .bus
        .send("R", "C", MessageKind::ConfirmationResponse, &response)?;
    let (verifier, opening) = verifier.receive(response)?;
    world
        .bus
        .send("C", "R", MessageKind::ConfirmationOpening, &opening)?;
    let reveal = prover.open(&opening)?;
    world
        .bus
        .send("R", "C", MessageKind::ConfirmationReveal, &reveal)?;
    let (accepted, _) = verifier.finish(reveal)?;
    world.bus.send(
        "C",
        "C",
        MessageKind::ConfirmationVerdict,
        &json!({"accepted": accepted}),
    )?;
    Ok(accepted)
}

/// Setup, signing, combination, verification and confirmation, in order.
pub fn run_honest_session(cfg: &SimConfig) -> Result<SimOutcome> {
    if cfg.scenario != Scenario::Honest {
        return Err(Error::ScenarioMisconfigured(format!(
            "{} is not the honest scenario",
            cfg.scenario
        )));
    }
    let params = cfg.validate()?;
    let mut world = build_world(cfg, params)?;
    let signers = choose_signers(cfg, &mut world.rng);
    let (nonces, session) = open_session(&mut world, &signers, &cfg.message)?;
    let nonce_sum = world.params.sum(nonces.iter().map(|n| n.first()));
    let partials = sign_all(&world, nonces, &session)?;
    let identity = algebra_identity(&world, &session, &nonce_sum, &partials);
    let (accepted, _, sig) = deliver_partials(&mut world, &session, partials)?;
    let mut verdicts = Verdicts {
        partials_accepted: Some(accepted),
        algebra_identity: Some(identity),
        ..Verdicts::default()
    };
    if let Some(sig) = sig {
        let x_r = world.receiver_secret.clone();
        let ok = receive_signature(&mut world, &sig, &x_r)?;
        verdicts.signature_verified = Some(ok);
        if ok {
            verdicts.confirmation_accepted = Some(confirm(&mut world, &sig)?);
        }
    }
    let notes = vec![format!(
        "signers {:?}",
        session.signers.iter().map(|id| id.0).collect::<Vec<_>>()
    )];
    Ok(SimOutcome {
        scenario: cfg.scenario,
        verdicts,
        transcript: world.bus.into_records(),
        notes,
    })
}

/// Runs one of the adversarial scenarios against an otherwise honest group.
pub fn run_attack(cfg: &SimConfig) -> Result<SimOutcome> {
    if cfg.scenario == Scenario::Honest {
        return Err(Error::ScenarioMisconfigured(
            "honest is not an attack scenario".into(),
        ));
    }
    let params = cfg.validate()?;
    let mut world = build_world(cfg, params)?;
    let signers = choose_signers(cfg, &mut world.rng);
    let mut verdicts = Verdicts::default();
    let mut notes = Vec::new();
    match cfg.scenario {
        Scenario::Impersonation => {
            // the victim's slot is filled by someone without its key or shares
            let victim = signers[world.rng.gen_range(0..signers.len())];
            let (nonces, session) = open_session(&mut world, &signers, &cfg.message)?;
            let mut partials = Vec::new();
            for (&id, nonce) in session.signers.iter().zip(nonces) {
                if id != victim {
                    let keys = world
                        .members
                        .iter()
                        .find(|m| m.id() == id)
                        .ok_or(Error::UnknownSigner(id))?;
                    partials.push(Signer::new(&world.directory, keys)?.sign(nonce, &session)?);
                    continue;
                }
                let p = &world.params;
                let guess = p.random_scalar(&mut world.rng);
                partials.push(PartialSignature {
                    session: session.id,
                    signer: id,
                    s: p.add(nonce.first(), &p.mul(&guess, &session.r_s)),
                    v: p.g_pow(nonce.first()),
                    c: session.coefficient(id)?.clone(),
                    r_s: session.r_s.clone(),
                });
            }
            let (accepted, rejected, _) = deliver_partials(&mut world, &session, partials)?;
            verdicts.partials_accepted = Some(accepted);
            notes.push(format!("impersonated {victim}; rejected {rejected:?}"));
        }
        Scenario::TamperedPartial => {
            let (nonces, session) = open_session(&mut world, &signers, &cfg.message)?;
            let mut partials = sign_all(&world, nonces, &session)?;
            let target = world.rng.gen_range(0..partials.len());
            partials[target].s = world.params.add(&partials[target].s, &world.params.one());
            let victim = partials[target].signer;
            let (accepted, rejected, _) = deliver_partials(&mut world, &session, partials)?;
            verdicts.partials_accepted = Some(accepted);
            if rejected != vec![victim] {
                notes.push(format!("expected only {victim} rejected, got {rejected:?}"));
                verdicts.partials_accepted = Some(true);
            } else {
                notes.push(format!("tampered {victim}; rejected exactly {victim}"));
            }
        }
        Scenario::WrongReceiver => {
            let (nonces, session) = open_session(&mut world, &signers, &cfg.message)?;
            let partials = sign_all(&world, nonces, &session)?;
            let (_, _, sig) = deliver_partials(&mut world, &session, partials)?;
            let sig =
                sig.ok_or_else(|| Error::ScenarioMisconfigured("honest partials rejected".into()))?;
            let wrong = loop {
                let x = world.params.random_nonzero_scalar(&mut world.rng);
                if x != world.receiver_secret {
                    break x;
                }
            };
            verdicts.signature_verified = Some(receive_signature(&mut world, &sig, &wrong)?);
        }
        Scenario::ForgedSignature => {
            // pick R_R = g^r and deliver it to R through U_S = g^a, W_S = R_R y_R^{-a};
            // S_S would need log_g(E y_S), so it is a guess
            let p = world.params.clone();
            let a = p.random_nonzero_scalar(&mut world.rng);
            let r = p.random_scalar(&mut world.rng);
            let r_r = p.g_pow(&r);
            let u_s = p.g_pow(&a);
            let w_s = p.mul_elements(
                &r_r,
                &p.invert_element(&p.pow(world.directory.receiver_key(), &a)),
            );
            let sig = GroupSignature {
                s_s: p.random_scalar(&mut world.rng),
                u_s,
                w_s,
                message: cfg.message.clone(),
                signers: signers.clone(),
            };
            let x_r = world.receiver_secret.clone();
            verdicts.signature_verified = Some(receive_signature(&mut world, &sig, &x_r)?);
        }
        Scenario::Honest => unreachable!(),
    }
    Ok(SimOutcome {
        scenario: cfg.scenario,
        verdicts,
        transcript: world.bus.into_records(),
        notes,
    })
}
