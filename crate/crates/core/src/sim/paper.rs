//! The seven-member worked example: every printed number, a run of the real
//! protocol from its secrets, and a cell-by-cell comparison against the print.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::combiner::{combine, verify_partial, GroupSignature};
use crate::confirmation::{
    ConfirmationStatement, ConfirmationTranscript, Opening, ProverStart, VerifierAwaitingResponse,
};
use crate::error::{Error, Result};
use crate::group_math::{Element, GroupParams, HashOracle, Profile, Scalar};
use crate::keygen::{run_setup, GroupConfig, GroupDirectory, MemberId, MemberKeys};
use crate::shamir::Polynomial;
use crate::signing::{
    aggregate_session, commit, compute_modified_shadow, NonceCommitment, PartialSignature, Signer,
    SignerNonce, SigningSession,
};
use crate::verification::{
    compute_e, recover_commitment, signature_congruence, verify_group_signature,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrintedMember {
    pub id: u32,
    /// `f(x) = c0 + c3 x^3`.
    pub c0: u64,
    pub c3: u64,
    pub f0: u64,
    pub point: u64,
    pub partial_key: u64,
    pub secret_key: u64,
    pub public_key: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrintedCell {
    pub dealer: u32,
    pub recipient: u32,
    pub h: u64,
    pub l: u64,
    pub m: u64,
    pub n: u64,
    pub v: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrintedNonce {
    pub signer: u32,
    pub k1: u64,
    pub k2: u64,
    pub u: u64,
    pub v: u64,
    pub w: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrintedSignerRow {
    pub signer: u32,
    /// `(dealer, l_ji)` for every absent dealer.
    pub shares: Vec<(u32, u64)>,
    pub c: u64,
    pub ms: u64,
    pub s: u64,
}

/// The combiner check displayed for one signer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrintedDcCheck {
    pub signer: u32,
    pub s: u64,
    pub v: u64,
    pub m: Vec<(u32, u64)>,
    pub partial_key: u64,
    pub r_s: u64,
    pub c: u64,
    pub exponent: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaperFixture {
    pub p: u64,
    pub q: u64,
    pub g: u64,
    pub threshold: usize,
    pub common_secret: u64,
    pub w: u64,
    pub members: Vec<PrintedMember>,
    pub group_key: u64,
    pub cells: Vec<PrintedCell>,
    pub receiver_secret: u64,
    pub receiver_key: u64,
    pub message: Vec<u8>,
    pub nonces: Vec<PrintedNonce>,
    pub u_s: u64,
    pub v_s: u64,
    pub w_s: u64,
    /// `(commitment, value)` of the single stipulated hash value, if present.
    pub stub: Option<(u64, u64)>,
    pub r_s: u64,
    pub rows: Vec<PrintedSignerRow>,
    pub dc_check: PrintedDcCheck,
    pub s_s: u64,
    pub e: u64,
    pub r_r: u64,
    pub verify_r_s: u64,
    /// The displayed verification congruence `g^a = b`.
    pub display: (u64, u64),
    pub mu: u64,
    /// `{R_R, E, S_S, U_S, mu}` as sent to the third party.
    pub statement: [u64; 5],
    pub conf_u: u64,
    pub conf_v: u64,
    pub conf_w: u64,
    pub alpha: u64,
    pub beta: u64,
    pub gamma: u64,
}

/// `(id, f_i coefficient 0, coefficient 3, f_i(0), u_i, y_i, x_i, y_Si)`.
type MemberRow = (u32, u64, u64, u64, u64, u64, u64, u64);

const MEMBERS: [MemberRow; 7] = [
    (1, 7, 12, 7, 9, 25, 9, 37),
    (2, 9, 11, 9, 13, 37, 11, 4),
    (3, 14, 8, 14, 15, 14, 13, 36),
    (4, 17, 3, 17, 11, 2, 19, 18),
    (5, 13, 7, 13, 18, 36, 5, 8),
    (6, 18, 15, 18, 19, 6, 10, 17),
    (7, 21, 15, 21, 21, 21, 14, 14),
];

// dealer, recipient, h, l, m, n, v
const CELLS: [(u32, u32, u64, u64, u64, u64, u64); 42] = [
    (1, 2, 14, 4, 34, 14, 2),
    (1, 3, 9, 13, 36, 37, 10),
    (1, 4, 11, 5, 8, 4, 45),
    (1, 5, 15, 17, 2, 42, 18),
    (1, 6, 17, 15, 42, 2, 43),
    (1, 7, 13, 16, 32, 36, 42),
    (2, 1, 13, 14, 14, 36, 21),
    (2, 3, 14, 3, 27, 14, 24),
    (2, 4, 9, 8, 28, 17, 25),
    (2, 5, 7, 21, 21, 25, 25),
    (2, 6, 16, 11, 4, 8, 19),
    (2, 7, 3, 16, 32, 27, 42),
    (3, 1, 7, 11, 4, 25, 40),
    (3, 2, 10, 5, 8, 17, 26),
    (3, 4, 11, 1, 3, 4, 9),
    (3, 5, 13, 16, 32, 36, 28),
    (3, 6, 19, 4, 34, 18, 24),
    (3, 7, 21, 17, 2, 21, 27),
    (4, 1, 19, 15, 14, 18, 46),
    (4, 2, 13, 20, 7, 36, 10),
    (4, 3, 11, 10, 17, 4, 33),
    (4, 5, 6, 16, 32, 24, 28),
    (4, 6, 8, 17, 2, 28, 8),
    (4, 7, 18, 11, 4, 6, 23),
    (5, 1, 6, 16, 32, 24, 24),
    (5, 2, 17, 22, 16, 2, 11),
    (5, 3, 18, 15, 42, 6, 26),
    (5, 4, 13, 5, 8, 36, 45),
    (5, 6, 19, 21, 21, 18, 32),
    (5, 7, 8, 11, 4, 28, 23),
    (6, 1, 2, 7, 25, 9, 34),
    (6, 2, 5, 19, 18, 8, 33),
    (6, 3, 7, 4, 34, 25, 32),
    (6, 4, 11, 7, 25, 4, 16),
    (6, 5, 13, 19, 18, 36, 45),
    (6, 7, 12, 2, 9, 12, 17),
    (7, 1, 11, 19, 18, 4, 5),
    (7, 2, 13, 7, 25, 36, 27),
    (7, 3, 15, 15, 42, 42, 26),
    (7, 4, 17, 16, 32, 2, 3),
    (7, 5, 14, 8, 28, 16, 14),
    (7, 6, 12, 16, 32, 12, 2),
];

impl PaperFixture {
    /// Every value exactly as printed, typos included.
    pub fn printed() -> Self {
        let members = MEMBERS
            .iter()
            .map(
                |&(id, c0, c3, f0, point, partial_key, secret_key, public_key)| PrintedMember {
                    id,
                    c0,
                    c3,
                    f0,
                    point,
                    partial_key,
                    secret_key,
                    public_key,
                },
            )
            .collect();
        let cells = CELLS
            .iter()
            .map(|&(dealer, recipient, h, l, m, n, v)| PrintedCell {
                dealer,
                recipient,
                h,
                l,
                m,
                n,
                v,
            })
            .collect();
        let nonce = |signer, k1, k2, u, v, w| PrintedNonce {
            signer,
            k1,
            k2,
            u,
            v,
            w,
        };
        let row = |signer, shares: [(u32, u64); 3], c, ms, s| PrintedSignerRow {
            signer,
            shares: shares.to_vec(),
            c,
            ms,
            s,
        };
        PaperFixture {
            p: 47,
            q: 23,
            g: 3,
            threshold: 4,
            common_secret: 11,
            w: 12,
            members,
            group_key: 25,
            cells,
            receiver_secret: 7,
            receiver_key: 25,
            message: b"m".to_vec(),
            nonces: vec![
                nonce(2, 11, 13, 1, 4, 17),
                nonce(4, 10, 12, 4, 17, 9),
                nonce(6, 14, 17, 24, 14, 6),
                nonce(7, 18, 5, 6, 6, 25),
            ],
            u_s: 16,
            v_s: 25,
            w_s: 14,
            stub: Some((25, 7)),
            r_s: 7,
            rows: vec![
                row(2, [(1, 4), (3, 5), (5, 22)], 1, 8, 15),
                row(4, [(1, 5), (3, 1), (5, 5)], 11, 6, 10),
                row(6, [(1, 15), (3, 4), (5, 21)], 9, 15, 15),
                row(7, [(1, 16), (3, 17), (5, 11)], 3, 17, 8),
            ],
            dc_check: PrintedDcCheck {
                signer: 2,
                s: 15,
                v: 4,
                m: vec![(1, 34), (3, 8), (5, 16)],
                partial_key: 37,
                r_s: 7,
                c: 12,
                exponent: 16,
            },
            s_s: 2,
            e: 12,
            r_r: 25,
            verify_r_s: 7,
            display: (2, 25),
            mu: 32,
            statement: [25, 12, 2, 16, 32],
            conf_u: 13,
            conf_v: 15,
            conf_w: 9,
            alpha: 11,
            beta: 36,
            gamma: 16,
        }
    }

    pub fn cell_mut(&mut self, dealer: u32, recipient: u32) -> Option<&mut PrintedCell> {
        self.cells
            .iter_mut()
            .find(|c| c.dealer == dealer && c.recipient == recipient)
    }
}

/// Everything produced by running the protocol from the example's secrets.
pub struct PaperRun {
    pub params: GroupParams,
    pub config: GroupConfig,
    pub members: Vec<MemberKeys>,
    pub directory: GroupDirectory,
    pub shares: BTreeMap<(MemberId, MemberId), Scalar>,
    pub receiver_secret: Scalar,
    pub commitments: Vec<NonceCommitment>,
    pub session: SigningSession,
    /// Per signer: recovered `l_ji` by dealer, and the modified shadow.
    pub recovered: BTreeMap<MemberId, (BTreeMap<MemberId, Scalar>, Scalar)>,
    pub partials: Vec<PartialSignature>,
    pub signature: GroupSignature,
    pub statement: ConfirmationStatement,
    pub transcript: ConfirmationTranscript,
    pub confirmed: bool,
}

fn params_of(fx: &PaperFixture) -> Result<GroupParams> {
    GroupParams::validate_u64(fx.p, fx.q, fx.g, Profile::Toy)
}

/// Runs setup, signing, combination, verification and confirmation on the
/// printed secrets. Printed outputs are not consulted.
pub fn run_fixture(fx: &PaperFixture) -> Result<PaperRun> {
    let params = params_of(fx)?;
    let sc = |v: u64| params.scalar_u64(v);
    let id = MemberId;
    let oracle = match fx.stub {
        Some((commitment, value)) => HashOracle::stub([(
            params.element_u64(commitment)?,
            fx.message.clone(),
            sc(value),
        )]),
        None => HashOracle::stub([]),
    };
    let points = fx.members.iter().map(|m| (id(m.id), sc(m.point))).collect();
    let config = GroupConfig::new(params.clone(), fx.threshold, points, oracle)?;
    let mut members = Vec::new();
    for m in &fx.members {
        let mut coefficients = vec![params.zero(); fx.threshold];
        coefficients[0] = sc(m.c0);
        coefficients[3] = sc(m.c3);
        let masks = fx
            .cells
            .iter()
            .filter(|c| c.dealer == m.id)
            .map(|c| (id(c.recipient), sc(c.h)))
            .collect();
        members.push(MemberKeys::from_parts(
            &config,
            id(m.id),
            sc(m.secret_key),
            Polynomial::new(coefficients),
            masks,
        )?);
    }
    let receiver_secret = sc(fx.receiver_secret);
    let setup = run_setup(
        &config,
        &members,
        &sc(fx.common_secret),
        &params.g_pow(&receiver_secret),
    )?;
    let directory = setup.directory;

    let mut nonces = Vec::new();
    let mut commitments = Vec::new();
    for n in &fx.nonces {
        let nonce = SignerNonce::from_parts(sc(n.k1), sc(n.k2));
        commitments.push(commit(
            &params,
            id(n.signer),
            &nonce,
            directory.receiver_key(),
        ));
        nonces.push(nonce);
    }
    let session = aggregate_session(&config, &commitments, &fx.message)?;

    let absent = directory.absent_members(&session.signers);
    let mut recovered = BTreeMap::new();
    let mut partials = Vec::new();
    for (n, nonce) in fx.nonces.iter().zip(nonces) {
        let keys = members
            .iter()
            .find(|m| m.id() == id(n.signer))
            .ok_or(Error::UnknownSigner(id(n.signer)))?;
        let mut signer = Signer::new(&directory, keys)?;
        let mut shares = BTreeMap::new();
        for &j in &absent {
            shares.insert(j, signer.recover_share(j)?);
        }
        let shadow =
            compute_modified_shadow(&params, &shares, &absent, session.coefficient(keys.id())?)?;
        recovered.insert(keys.id(), (shares, shadow));
        partials.push(signer.sign(nonce, &session)?);
    }
    let signature = combine(&directory, &session, partials.clone())?;

    let prover = ProverStart::new(&directory, &signature, receiver_secret.clone())?;
    let statement = prover.statement().clone();
    let opening = Opening {
        u: sc(fx.conf_u),
        v: sc(fx.conf_v),
    };
    let (verifier, commitment) =
        VerifierAwaitingResponse::start_with(&directory, statement.clone(), opening)?;
    let (prover, response) = prover.respond_with(&commitment, sc(fx.alpha))?;
    let (verifier, opening) = verifier.receive(response)?;
    let reveal = prover.open(&opening)?;
    let (confirmed, transcript) = verifier.finish(reveal)?;

    Ok(PaperRun {
        params,
        config,
        members,
        directory,
        shares: setup.shares,
        receiver_secret,
        commitments,
        session,
        recovered,
        partials,
        signature,
        statement,
        transcript,
        confirmed,
    })
}

/// The example run with its printed secrets.
pub fn run_paper_protocol() -> Result<PaperRun> {
    run_fixture(&PaperFixture::printed())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErratumKind {
    /// A formula or displayed value in the text that the example's own numbers contradict.
    Listed,
    /// A single table cell that disagrees with the rest of its row.
    TableCell,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Erratum {
    pub id: String,
    pub kind: ErratumKind,
    pub location: String,
    pub paper_value: String,
    pub recomputed_value: String,
}

/// One comparison between a printed and a recomputed value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckLine {
    pub id: String,
    pub location: String,
    pub paper_value: String,
    pub recomputed_value: String,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReplayVerdicts {
    pub partials_accepted: bool,
    pub signature_verified: bool,
    pub confirmation_accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ReplayReport {
    pub checks: Vec<CheckLine>,
    pub errata: Vec<Erratum>,
    pub verdicts: ReplayVerdicts,
}

impl ReplayReport {
    pub fn matched(&self) -> usize {
        self.checks.iter().filter(|c| c.matches).count()
    }
}

fn listed(id: &str, location: &str, paper: &str, recomputed: &str) -> Erratum {
    Erratum {
        id: id.into(),
        kind: ErratumKind::Listed,
        location: location.into(),
        paper_value: paper.into(),
        recomputed_value: recomputed.into(),
    }
}

fn cell(dealer: u32, recipient: u32, column: &str, paper: u64, recomputed: u64) -> Erratum {
    Erratum {
        id: format!("{column}_{dealer}{recipient}"),
        kind: ErratumKind::TableCell,
        location: cell_location(dealer, recipient, column),
        paper_value: paper.to_string(),
        recomputed_value: recomputed.to_string(),
    }
}

fn cell_location(dealer: u32, recipient: u32, column: &str) -> String {
    format!("dealer S{dealer} table, row S{recipient}, column {column}")
}

/// Known disagreements between the print and a faithful recomputation.
pub fn documented_errata() -> Vec<Erratum> {
    vec![
        listed(
            "u_2",
            "signer S2 nonce commitment u_2 = g^(-K_22)",
            "1",
            "17",
        ),
        listed(
            "share_formula_argument",
            "setup: l_ij = h_ij + f_i(u) evaluated at the dealer's point u_i",
            "dealer point u_i: 0 of 42 printed l_ij reproduced",
            "recipient point u_j: 40 of 42 printed l_ij reproduced",
        ),
        listed(
            "products_mod_q",
            "session products U_S, V_S, W_S taken mod q",
            "16, 25, 14",
            "mod q: 17, 8, 19; mod p: 16, 25, 14",
        ),
        listed(
            "dc_check_display",
            "combiner check shown for S2",
            "3^16 = 32, rhs 42, C_2 = 12",
            "3^15 = 42, rhs 42, C_2 = 1",
        ),
        listed(
            "verify_display",
            "verification congruence display g^(S_S) = 25",
            "3^2 = 25",
            "3^2 = 9 = 25 * (12 * 25)^7",
        ),
        cell(2, 4, "n", 17, 37),
        cell(2, 6, "n", 8, 32),
        cell(4, 1, "m", 14, 42),
        cell(5, 3, "l", 15, 12),
        cell(5, 3, "m", 42, 12),
        cell(5, 3, "v", 26, 2),
        cell(7, 5, "l", 8, 0),
        cell(7, 5, "m", 28, 1),
        cell(7, 5, "n", 16, 14),
        cell(7, 5, "v", 14, 0),
    ]
}

struct Recorder {
    checks: Vec<CheckLine>,
}

impl Recorder {
    fn value(
        &mut self,
        id: impl Into<String>,
        location: impl Into<String>,
        paper: u64,
        recomputed: Option<u64>,
    ) {
        let recomputed = recomputed
            .map(|v| v.to_string())
            .unwrap_or_else(|| "out of range".into());
        self.raw(id, location, paper.to_string(), recomputed);
    }

    fn elem(
        &mut self,
        id: impl Into<String>,
        location: impl Into<String>,
        paper: u64,
        recomputed: &Element,
    ) {
        self.value(id, location, paper, recomputed.to_u64());
    }

    fn scalar(
        &mut self,
        id: impl Into<String>,
        location: impl Into<String>,
        paper: u64,
        recomputed: &Scalar,
    ) {
        self.value(id, location, paper, recomputed.to_u64());
    }

    fn flag(&mut self, id: &str, location: &str, recomputed: bool) {
        self.raw(
            id,
            location,
            "holds".into(),
            if recomputed { "holds" } else { "fails" }.into(),
        );
    }

    fn raw(
        &mut self,
        id: impl Into<String>,
        location: impl Into<String>,
        paper: String,
        recomputed: String,
    ) {
        let matches = paper == recomputed;
        self.checks.push(CheckLine {
            id: id.into(),
            location: location.into(),
            paper_value: paper,
            recomputed_value: recomputed,
            matches,
        });
    }
}

/// Recomputes every printed quantity and compares. Any mismatch that is not
/// a documented erratum, or a documented erratum that does not show up,
/// is a `GoldenMismatch`.
pub fn replay(fx: &PaperFixture) -> Result<ReplayReport> {
    let run = run_fixture(fx)?;
    let params = &run.params;
    let sc = |v: u64| params.scalar_u64(v);
    let mut rec = Recorder { checks: Vec::new() };

    let w = crate::keygen::setup_common(params, &sc(fx.common_secret))?;
    rec.elem("W", "setup W = g^(-K)", fx.w, &w);
    rec.elem("W_directory", "directory W", fx.w, run.directory.w());
    for m in &fx.members {
        let id = MemberId(m.id);
        let keys = &run.members[m.id as usize - 1];
        rec.scalar(
            format!("f0_{}", m.id),
            format!("member S{} f_i(0)", m.id),
            m.f0,
            &keys.polynomial().constant_term(params),
        );
        rec.elem(
            format!("y_{}", m.id),
            format!("member S{} y_i = g^(f_i(0))", m.id),
            m.partial_key,
            run.directory.partial_key(id)?,
        );
        rec.elem(
            format!("yS_{}", m.id),
            format!("member S{} public key", m.id),
            m.public_key,
            run.directory.public_key(id)?,
        );
    }
    rec.elem(
        "y_S",
        "group public key y_S",
        fx.group_key,
        run.directory.group_key(),
    );

    let point = |id: u32| -> Result<Scalar> { run.config.point(MemberId(id)).cloned() };
    let poly = |id: u32| run.members[id as usize - 1].polynomial();
    let (mut dealer_reading, mut recipient_reading) = (0, 0);
    for c in &fx.cells {
        let (i, j) = (MemberId(c.dealer), MemberId(c.recipient));
        let entry = run.directory.entry(i, j)?;
        let share = run.shares.get(&(i, j)).ok_or(Error::MissingPublicShare {
            dealer: i,
            recipient: j,
        })?;
        rec.scalar(
            format!("l_{}{}", c.dealer, c.recipient),
            cell_location(c.dealer, c.recipient, "l"),
            c.l,
            share,
        );
        rec.elem(
            format!("m_{}{}", c.dealer, c.recipient),
            cell_location(c.dealer, c.recipient, "m"),
            c.m,
            &entry.share_commitment,
        );
        rec.elem(
            format!("n_{}{}", c.dealer, c.recipient),
            cell_location(c.dealer, c.recipient, "n"),
            c.n,
            &entry.mask_commitment,
        );
        rec.value(
            format!("v_{}{}", c.dealer, c.recipient),
            cell_location(c.dealer, c.recipient, "v"),
            c.v,
            entry.masked_share.to_u64(),
        );
        let at = |x: &Scalar| params.add(&sc(c.h), &poly(c.dealer).evaluate(params, x));
        dealer_reading += usize::from(at(&point(c.dealer)?) == sc(c.l));
        recipient_reading += usize::from(at(&point(c.recipient)?) == sc(c.l));
    }
    let total = fx.cells.len();
    let paper = format!("dealer point u_i: {dealer_reading} of {total} printed l_ij reproduced");
    let recomputed = if dealer_reading == total {
        paper.clone()
    } else {
        format!("recipient point u_j: {recipient_reading} of {total} printed l_ij reproduced")
    };
    rec.raw(
        "share_formula_argument",
        "setup: l_ij = h_ij + f_i(u) evaluated at the dealer's point u_i",
        paper,
        recomputed,
    );

    rec.elem(
        "y_R",
        "receiver public key y_R",
        fx.receiver_key,
        run.directory.receiver_key(),
    );
    for (n, c) in fx.nonces.iter().zip(&run.commitments) {
        rec.elem(
            format!("u_{}", n.signer),
            format!(
                "signer S{} nonce commitment u_{} = g^(-K_{}2)",
                n.signer, n.signer, n.signer
            ),
            n.u,
            &c.u,
        );
        rec.elem(
            format!("v_{}", n.signer),
            format!("signer S{} nonce commitment v_{}", n.signer, n.signer),
            n.v,
            &c.v,
        );
        rec.elem(
            format!("w_{}", n.signer),
            format!("signer S{} nonce commitment w_{}", n.signer, n.signer),
            n.w,
            &c.w,
        );
    }
    let s = &run.session;
    rec.elem("U_S", "session U_S", fx.u_s, &s.u_s);
    rec.elem("V_S", "session V_S", fx.v_s, &s.v_s);
    rec.elem("W_S", "session W_S", fx.w_s, &s.w_s);
    let q = params.q();
    let mod_q = |items: Vec<&Element>| -> u64 {
        let product = items
            .iter()
            .fold(num_bigint::BigUint::from(1u8), |acc, e| acc * e.value())
            % q;
        product.try_into().unwrap_or(u64::MAX)
    };
    let qs = [
        mod_q(run.commitments.iter().map(|c| &c.u).collect()),
        mod_q(run.commitments.iter().map(|c| &c.v).collect()),
        mod_q(run.commitments.iter().map(|c| &c.w).collect()),
    ];
    let printed = format!("{}, {}, {}", fx.u_s, fx.v_s, fx.w_s);
    let mod_p = format!("{}, {}, {}", s.u_s, s.v_s, s.w_s);
    let mod_q_text = format!("{}, {}, {}", qs[0], qs[1], qs[2]);
    rec.raw(
        "products_mod_q",
        "session products U_S, V_S, W_S taken mod q",
        printed.clone(),
        if mod_q_text == printed {
            printed.clone()
        } else {
            format!("mod q: {mod_q_text}; mod p: {mod_p}")
        },
    );
    rec.scalar("R_S", "session R_S = h(V_S, m)", fx.r_s, &s.r_s);

    for row in &fx.rows {
        let id = MemberId(row.signer);
        let (shares, shadow) = run.recovered.get(&id).ok_or(Error::UnknownSigner(id))?;
        for &(dealer, l) in &row.shares {
            let got = shares
                .get(&MemberId(dealer))
                .ok_or(Error::MissingAbsentShare(MemberId(dealer)))?;
            rec.scalar(
                format!("recovered_l_{dealer}{}", row.signer),
                format!("signer S{} recovered l_{dealer}{}", row.signer, row.signer),
                l,
                got,
            );
        }
        rec.scalar(
            format!("C_{}", row.signer),
            format!("signer S{} Lagrange coefficient", row.signer),
            row.c,
            s.coefficient(id)?,
        );
        rec.scalar(
            format!("MS_{}", row.signer),
            format!("signer S{} modified shadow", row.signer),
            row.ms,
            shadow,
        );
        let ps = run
            .partials
            .iter()
            .find(|p| p.signer == id)
            .ok_or(Error::UnknownSigner(id))?;
        rec.scalar(
            format!("s_{}", row.signer),
            format!("signer S{} partial signature", row.signer),
            row.s,
            &ps.s,
        );
    }

    let mut partials_accepted = true;
    for ps in &run.partials {
        partials_accepted &= verify_partial(&run.directory, s, ps)?;
    }
    rec.flag(
        "dc_checks",
        "combiner accepts every partial",
        partials_accepted,
    );
    let dc = &fx.dc_check;
    let dc_id = MemberId(dc.signer);
    let dc_partial = run
        .partials
        .iter()
        .find(|p| p.signer == dc_id)
        .ok_or(Error::UnknownSigner(dc_id))?;
    rec.scalar(
        "dc_s",
        format!("combiner check of S{}: s", dc.signer),
        dc.s,
        &dc_partial.s,
    );
    rec.elem(
        "dc_v",
        format!("combiner check of S{}: v", dc.signer),
        dc.v,
        &dc_partial.v,
    );
    for &(dealer, m) in &dc.m {
        let entry = run.directory.entry(MemberId(dealer), dc_id)?;
        rec.elem(
            format!("dc_m_{dealer}{}", dc.signer),
            format!("combiner check of S{}: m_{dealer}{}", dc.signer, dc.signer),
            m,
            &entry.share_commitment,
        );
    }
    rec.elem(
        "dc_y",
        format!("combiner check of S{}: y_{}", dc.signer, dc.signer),
        dc.partial_key,
        run.directory.partial_key(dc_id)?,
    );
    rec.scalar(
        "dc_r_s",
        format!("combiner check of S{}: R_S", dc.signer),
        dc.r_s,
        &dc_partial.r_s,
    );
    {
        // the display multiplies the m's without the C_i exponent
        let mut shown_base = run.directory.partial_key(dc_id)?.clone();
        let mut true_base = shown_base.clone();
        for &(dealer, _) in &dc.m {
            let m = &run
                .directory
                .entry(MemberId(dealer), dc_id)?
                .share_commitment;
            shown_base = params.mul_elements(&shown_base, m);
            true_base = params.mul_elements(&true_base, &params.pow(m, &dc_partial.c));
        }
        let shown_rhs =
            params.mul_elements(&dc_partial.v, &params.pow(&shown_base, &dc_partial.r_s));
        let true_rhs = params.mul_elements(&dc_partial.v, &params.pow(&true_base, &dc_partial.r_s));
        let paper = format!(
            "{}^{} = {}, rhs {}, C_{} = {}",
            fx.g,
            dc.exponent,
            params.g_pow(&sc(dc.exponent)),
            shown_rhs,
            dc.signer,
            dc.c
        );
        let recomputed = format!(
            "{}^{} = {}, rhs {}, C_{} = {}",
            fx.g,
            dc_partial.s,
            params.g_pow(&dc_partial.s),
            true_rhs,
            dc.signer,
            dc_partial.c
        );
        rec.raw(
            "dc_check_display",
            "combiner check shown for S2",
            paper,
            recomputed,
        );
    }

    rec.scalar("S_S", "group signature S_S", fx.s_s, &run.signature.s_s);
    rec.elem("sig_U_S", "group signature U_S", fx.u_s, &run.signature.u_s);
    rec.elem("sig_W_S", "group signature W_S", fx.w_s, &run.signature.w_s);

    let e = compute_e(&run.directory, &s.signers, &s.coefficients)?;
    rec.elem("E", "verification value E", fx.e, &e);
    let r_r = recover_commitment(
        params,
        &run.signature.w_s,
        &run.signature.u_s,
        &run.receiver_secret,
    );
    rec.elem("R_R", "receiver recovers R_R", fx.r_r, &r_r);
    let r_s = run
        .config
        .oracle()
        .hash_to_scalar(params, &r_r, &run.signature.message)?;
    rec.scalar(
        "verify_R_S",
        "receiver recovers R_S = h(R_R, m)",
        fx.verify_r_s,
        &r_s,
    );
    let signature_verified =
        verify_group_signature(&run.directory, &run.signature, &run.receiver_secret)?;
    rec.flag(
        "verify",
        "receiver accepts the group signature",
        signature_verified,
    );
    let holds = signature_congruence(
        params,
        &run.signature.s_s,
        &r_r,
        &e,
        run.directory.group_key(),
        &r_s,
    );
    let lhs = params.g_pow(&sc(fx.display.0));
    let paper = format!("{}^{} = {}", fx.g, fx.display.0, fx.display.1);
    let recomputed = if lhs.to_u64() == Some(fx.display.1) {
        paper.clone()
    } else {
        format!(
            "{}^{} = {} = {} * ({} * {})^{}",
            fx.g,
            fx.display.0,
            lhs,
            r_r,
            e,
            run.directory.group_key(),
            r_s
        )
    };
    rec.raw(
        "verify_display",
        "verification congruence display g^(S_S) = 25",
        paper,
        if holds { recomputed } else { "fails".into() },
    );

    let st = &run.statement;
    rec.elem("mu", "prover mu = U_S^(x_R)", fx.mu, &st.mu);
    let names = ["R_R", "E", "S_S", "U_S", "mu"];
    let values = [
        st.r_r.to_u64(),
        st.e.to_u64(),
        st.s_s.to_u64(),
        st.u_s.to_u64(),
        st.mu.to_u64(),
    ];
    for ((name, printed), got) in names.iter().zip(fx.statement).zip(values) {
        rec.value(
            format!("statement_{name}"),
            format!("statement sent to C: {name}"),
            printed,
            got,
        );
    }
    rec.elem(
        "conf_w",
        "confirmation w = U_S^u g^v",
        fx.conf_w,
        &run.transcript.w,
    );
    rec.elem(
        "conf_beta",
        "confirmation beta = w g^alpha",
        fx.beta,
        &run.transcript.beta,
    );
    rec.elem(
        "conf_gamma",
        "confirmation gamma = beta^(x_R)",
        fx.gamma,
        &run.transcript.gamma,
    );
    rec.flag(
        "confirm",
        "third party accepts the confirmation",
        run.confirmed,
    );

    let errata = reconcile(&rec.checks)?;
    Ok(ReplayReport {
        checks: rec.checks,
        errata,
        verdicts: ReplayVerdicts {
            partials_accepted,
            signature_verified,
            confirmation_accepted: run.confirmed,
        },
    })
}

fn reconcile(checks: &[CheckLine]) -> Result<Vec<Erratum>> {
    let documented = documented_errata();
    let mut observed = Vec::new();
    for c in checks.iter().filter(|c| !c.matches) {
        let known = documented.iter().find(|d| {
            d.id == c.id
                && d.location == c.location
                && d.paper_value == c.paper_value
                && d.recomputed_value == c.recomputed_value
        });
        match known {
            Some(d) => observed.push(d.clone()),
            None => {
                return Err(Error::GoldenMismatch(format!(
                    "{} ({}): printed {}, recomputed {}",
                    c.id, c.location, c.paper_value, c.recomputed_value
                )))
            }
        }
    }
    if let Some(missing) = documented.iter().find(|d| !observed.contains(d)) {
        return Err(Error::GoldenMismatch(format!(
            "documented erratum {} not observed",
            missing.id
        )));
    }
    Ok(documented
        .into_iter()
        .filter(|d| observed.contains(d))
        .collect())
}

pub fn replay_paper_example() -> Result<ReplayReport> {
    replay(&PaperFixture::printed())
}


#[cfg(test)]
mod scenario_tests {
    use super::*;
    use crate::combiner::Combiner;

    #[test]
    fn tampered_paper_partial_is_the_only_one_rejected() {
        let run = run_paper_protocol().unwrap();
        for target in 0..run.partials.len() {
            let mut partials = run.partials.clone();
            partials[target].s = run.params.add(&partials[target].s, &run.params.one());
            let mut combiner = Combiner::new(&run.directory, &run.session);
            let rejected: Vec<MemberId> = partials
                .into_iter()
                .filter_map(|ps| combiner.add(ps.clone()).err().map(|_| ps.signer))
                .collect();
            assert_eq!(rejected, vec![run.partials[target].signer]);
        }
    }

    #[test]
    fn paper_signature_under_x5() {
        let run = run_paper_protocol().unwrap();
        let x5 = run.params.scalar_u64(5);
        assert_eq!(
            recover_commitment(&run.params, &run.signature.w_s, &run.signature.u_s, &x5).to_u64(),
            Some(37)
        );
        assert!(!verify_group_signature(&run.directory, &run.signature, &x5).unwrap());
    }
}
