use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use dirthresh_core::combiner::{combine, GroupSignature};
use dirthresh_core::confirmation::{check_transcript, run_confirmation, ConfirmationTranscript};
use dirthresh_core::encoding::parse_decimal;
use dirthresh_core::group_math::{GroupParams, HashOracle, Profile, Scalar};
use dirthresh_core::keygen::{run_setup, GroupConfig, MemberId, MemberKeys};
use dirthresh_core::presets;
use dirthresh_core::signing::{
    aggregate_session, commit, NonceCommitment, PartialSignature, Signer, SignerNonce,
    SigningSession,
};
use dirthresh_core::sim::paper::{replay_paper_example, run_paper_protocol};
use dirthresh_core::sim::{self, Scenario, SignerSelection, SimConfig};
use dirthresh_core::verification::verify_group_signature;
use dirthresh_core::wire::{
    self, DirectoryDoc, Document, MemberSecretDoc, NonceSecretDoc, ReceiverSecretDoc,
};
use dirthresh_core::Error;
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[derive(Parser)]
#[command(
    name = "dirthresh",
    version,
    about = "Directed threshold signatures without a trusted dealer"
)]
struct Cli {
    /// Parameter profile; re-validates every group under it.
    #[arg(long, global = true, env = "DIRTHRESH_PROFILE")]
    profile: Option<Profile>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    #[command(subcommand)]
    Params(ParamsCommand),
    /// Run setup in one process and write the directory and every secret file.
    Keygen(KeygenArgs),
    #[command(subcommand)]
    Sign(SignCommand),
    /// Verify partial signatures and combine them into a group signature.
    Combine(CombineArgs),
    /// Check a group signature with the receiver's secret key.
    Verify(VerifyArgs),
    #[command(subcommand)]
    Confirm(ConfirmCommand),
    /// Run one seeded simulation and print its transcript log.
    Simulate(SimulateArgs),
    /// Re-run the worked example and compare against the printed values.
    ReplayPaper(ReplayArgs),
    /// Read any dirthresh file and write it back in canonical form.
    Reformat {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum ParamsCommand {
    /// Check p, q and g.
    Validate {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a built-in group as a params file.
    Show {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct KeygenArgs {
    #[arg(long, conflicts_with_all = ["params", "paper"])]
    preset: Option<String>,
    #[arg(long, conflicts_with = "paper")]
    params: Option<PathBuf>,
    /// Use the worked example's secrets (7 members, threshold 4).
    #[arg(long)]
    paper: bool,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    t: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum SignCommand {
    /// Draw a nonce pair and publish its commitment.
    Commit {
        #[arg(long)]
        directory: PathBuf,
        #[arg(long)]
        signer: u32,
        /// Explicit nonces instead of drawing them.
        #[arg(long, requires = "k2")]
        k1: Option<String>,
        #[arg(long, requires = "k1")]
        k2: Option<String>,
        #[arg(long, conflicts_with = "k1")]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        nonce_out: PathBuf,
    },
    /// Fold the commitments of a signer set into a session.
    Aggregate {
        #[arg(long)]
        directory: PathBuf,
        #[command(flatten)]
        message: MessageArg,
        #[arg(long = "commitment", required = true)]
        commitments: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Produce a partial signature. The nonce file is deleted afterwards.
    Partial {
        #[arg(long)]
        directory: PathBuf,
        #[arg(long)]
        member: PathBuf,
        #[arg(long)]
        nonce: PathBuf,
        #[arg(long)]
        session: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MessageArg {
    #[arg(long)]
    message: Option<String>,
    #[arg(long)]
    message_file: Option<PathBuf>,
}

#[derive(Args)]
struct CombineArgs {
    #[arg(long)]
    directory: PathBuf,
    #[arg(long)]
    session: PathBuf,
    #[arg(long = "partial", required = true)]
    partials: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReceiverArgs {
    #[arg(long)]
    directory: PathBuf,
    #[arg(long)]
    signature: PathBuf,
    /// A decimal secret or the path of a receiver secret file.
    #[arg(long)]
    receiver_key: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    receiver: ReceiverArgs,
}

#[derive(Subcommand)]
enum ConfirmCommand {
    /// Prove the signature to a third party and record the transcript.
    Run {
        #[command(flatten)]
        receiver: ReceiverArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-check a recorded transcript offline.
    Check {
        #[arg(long)]
        directory: PathBuf,
        #[arg(long)]
        transcript: PathBuf,
    },
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = "paper-47")]
    preset: String,
    #[arg(long, default_value_t = 5)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    t: usize,
    /// Comma-separated signer ids; random when absent.
    #[arg(long, value_delimiter = ',')]
    signers: Vec<u32>,
    #[arg(long, default_value = "simulated message")]
    message: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "honest")]
    scenario: Scenario,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    json: bool,
    /// Treat documented errata as failures.
    #[arg(long)]
    strict: bool,
}

enum Verdict {
    Valid,
    Invalid,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Valid
        } else {
            Verdict::Invalid
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Verdict::Valid) => ExitCode::SUCCESS,
        Ok(Verdict::Invalid) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 2 for anything unreadable or structurally incomplete, 1 for a failed check.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Format { .. } | Error::OutOfRange { .. } | Error::IncompleteSet(_) => 2,
                _ => 1,
            };
        }
        if cause.is::<std::io::Error>() {
            return 2;
        }
    }
    1
}

fn run(cli: Cli) -> Result<Verdict> {
    let profile = cli.profile;
    match cli.command {
        Command::Params(cmd) => cmd_params(cmd, profile),
        Command::Keygen(args) => cmd_keygen(args, profile),
        Command::Sign(cmd) => cmd_sign(cmd, profile),
        Command::Combine(args) => cmd_combine(args, profile),
        Command::Verify(args) => cmd_verify(args, profile),
        Command::Confirm(cmd) => cmd_confirm(cmd, profile),
        Command::Simulate(args) => cmd_simulate(args),
        Command::ReplayPaper(args) => cmd_replay(args),
        Command::Reformat { input, out } => cmd_reformat(&input, &out),
    }
}

fn decimal(field: &str, text: &str) -> Result<BigUint> {
    parse_decimal(text).map_err(|reason| {
        Error::Format {
            field: field.into(),
            reason,
        }
        .into()
    })
}

fn rng_for(seed: Option<u64>) -> ChaCha20Rng {
    match seed {
        Some(seed) => ChaCha20Rng::seed_from_u64(seed),
        None => ChaCha20Rng::from_entropy(),
    }
}

fn with_profile(params: GroupParams, profile: Option<Profile>) -> Result<GroupParams> {
    match profile {
        Some(profile) if profile != params.profile() => Ok(GroupParams::validate(
            params.p().clone(),
            params.q().clone(),
            params.generator().value().clone(),
            profile,
        )?),
        _ => Ok(params),
    }
}

fn read_doc<D: Document>(path: &Path) -> Result<D> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    wire::decode(&text).with_context(|| format!("in {}", path.display()))
}

fn write_public<D: Document>(path: &Path, doc: &D) -> Result<()> {
    fs::write(path, wire::encode(doc)).with_context(|| format!("writing {}", path.display()))
}

fn write_secret<D: Document>(path: &Path, doc: &D) -> Result<()> {
    write_secret_text(path, &wire::encode(doc))
}

fn write_secret_text(path: &Path, text: &str) -> Result<()> {
    let mut options = fs::OpenOptions::new();
    options.write(true).create(true).truncate(true);
    #[cfg(unix)]
    {
        use std::os::unix::fs::{OpenOptionsExt, PermissionsExt};
        options.mode(0o600);
        if path.exists() {
            fs::set_permissions(path, fs::Permissions::from_mode(0o600))?;
        }
    }
    let mut file = options
        .open(path)
        .with_context(|| format!("writing {}", path.display()))?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

fn load_directory(
    path: &Path,
    profile: Option<Profile>,
) -> Result<dirthresh_core::keygen::GroupDirectory> {
    let doc: DirectoryDoc = read_doc(path)?;
    let doc = DirectoryDoc {
        params: with_profile(doc.params, profile)?,
        ..doc
    };
    doc.into_directory()
        .with_context(|| format!("in {}", path.display()))
}

fn receiver_secret(arg: &str, params: &GroupParams) -> Result<Scalar> {
    if !arg.is_empty() && arg.bytes().all(|b| b.is_ascii_digit()) {
        let value = params.scalar(decimal("receiver-key", arg)?)?;
        return Ok(value);
    }
    let doc: ReceiverSecretDoc = read_doc(Path::new(arg))?;
    Ok(doc.secret(params)?)
}

fn cmd_params(cmd: ParamsCommand, profile: Option<Profile>) -> Result<Verdict> {
    match cmd {
        ParamsCommand::Validate { p, q, g, out } => {
            let (p, q, g) = (decimal("p", &p)?, decimal("q", &q)?, decimal("g", &g)?);
            match GroupParams::validate(p, q, g, profile.unwrap_or(Profile::Toy)) {
                Ok(params) => {
                    println!("valid ({} profile)", params.profile());
                    if let Some(out) = out {
                        write_public(&out, &params)?;
                    }
                    Ok(Verdict::Valid)
                }
                Err(err) => {
                    println!("invalid: {err}");
                    Ok(Verdict::Invalid)
                }
            }
        }
        ParamsCommand::Show { preset, out } => {
            let params =
                presets::by_name(&preset).ok_or_else(|| anyhow!("unknown preset `{preset}`"))?;
            let params = with_profile(params, profile)?;
            match out {
                Some(out) => write_public(&out, &params)?,
                None => print!("{}", wire::encode(&params)),
            }
            Ok(Verdict::Valid)
        }
    }
}

fn cmd_keygen(args: KeygenArgs, profile: Option<Profile>) -> Result<Verdict> {
    fs::create_dir_all(&args.out_dir)?;
    let (directory, members, receiver) = if args.paper {
        let run = run_paper_protocol()?;
        with_profile(run.params.clone(), profile)?;
        (run.directory, run.members, run.receiver_secret)
    } else {
        let params = match (&args.preset, &args.params) {
            (Some(name), None) => {
                presets::by_name(name).ok_or_else(|| anyhow!("unknown preset `{name}`"))?
            }
            (None, Some(path)) => read_doc(path)?,
            _ => bail!("pass one of --preset, --params or --paper"),
        };
        let params = with_profile(params, profile)?;
        let mut rng = rng_for(args.seed);
        let points = GroupConfig::random_points(&params, args.n, &mut rng)?;
        let config = GroupConfig::new(params.clone(), args.t, points, HashOracle::Real)?;
        let members = config
            .member_ids()
            .map(|id| MemberKeys::generate(&config, id, &mut rng))
            .collect::<Result<Vec<_>, _>>()?;
        let receiver = params.random_nonzero_scalar(&mut rng);
        let common = params.random_nonzero_scalar(&mut rng);
        let setup = run_setup(&config, &members, &common, &params.g_pow(&receiver))?;
        (setup.directory, members, receiver)
    };
    let out = &args.out_dir;
    write_public(
        &out.join("directory.json"),
        &DirectoryDoc::from_directory(&directory),
    )?;
    for keys in &members {
        write_secret(
            &out.join(format!("member-{}.secret.json", keys.id().0)),
            &MemberSecretDoc::from_keys(keys),
        )?;
    }
    write_secret(
        &out.join("receiver.secret.json"),
        &ReceiverSecretDoc {
            receiver_secret: receiver,
        },
    )?;
    let config = directory.config();
    println!(
        "{} members, threshold {}, group key {}, receiver key {}",
        config.size(),
        config.threshold(),
        directory.group_key(),
        directory.receiver_key()
    );
    Ok(Verdict::Valid)
}

fn cmd_sign(cmd: SignCommand, profile: Option<Profile>) -> Result<Verdict> {
    match cmd {
        SignCommand::Commit {
            directory,
            signer,
            k1,
            k2,
            seed,
            out,
            nonce_out,
        } => {
            let directory = load_directory(&directory, profile)?;
            let params = directory.params();
            let id = MemberId(signer);
            directory.config().point(id)?;
            let nonce = match (k1, k2) {
                (Some(k1), Some(k2)) => SignerNonce::from_parts(
                    params.scalar(decimal("k1", &k1)?)?,
                    params.scalar(decimal("k2", &k2)?)?,
                ),
                _ => {
                    let mut rng = rng_for(seed);
                    // One seed can drive every signer without sharing nonces.
                    rng.set_stream(u64::from(signer));
                    SignerNonce::random(params, &mut rng)
                }
            };
            let commitment = commit(params, id, &nonce, directory.receiver_key());
            write_secret(
                &nonce_out,
                &NonceSecretDoc::new(id, directory.receiver_key(), &nonce),
            )?;
            write_public(&out, &commitment)?;
            println!(
                "{id}: u = {}, v = {}, w = {}",
                commitment.u, commitment.v, commitment.w
            );
            Ok(Verdict::Valid)
        }
        SignCommand::Aggregate {
            directory,
            message,
            commitments,
            out,
        } => {
            let directory = load_directory(&directory, profile)?;
            let message = match (message.message, message.message_file) {
                (Some(text), _) => text.into_bytes(),
                (None, Some(path)) => {
                    fs::read(&path).with_context(|| format!("reading {}", path.display()))?
                }
                (None, None) => unreachable!("clap requires one message source"),
            };
            let mut list = Vec::new();
            for path in &commitments {
                let c: NonceCommitment = read_doc(path)?;
                wire::check_commitment(directory.params(), &c)
                    .with_context(|| format!("in {}", path.display()))?;
                list.push(c);
            }
            let session = aggregate_session(directory.config(), &list, &message)?;
            write_public(&out, &session)?;
            println!(
                "session {}: U_S = {}, V_S = {}, W_S = {}, R_S = {}",
                session.id, session.u_s, session.v_s, session.w_s, session.r_s
            );
            Ok(Verdict::Valid)
        }
        SignCommand::Partial {
            directory,
            member,
            nonce,
            session,
            out,
        } => {
            let directory = load_directory(&directory, profile)?;
            let keys = read_doc::<MemberSecretDoc>(&member)?.into_keys(&directory)?;
            let (nonce_id, signer_nonce) =
                read_doc::<NonceSecretDoc>(&nonce)?.into_nonce(&directory)?;
            if nonce_id != keys.id() {
                return Err(Error::Format {
                    field: "signer".into(),
                    reason: format!("nonce belongs to {nonce_id}"),
                }
                .into());
            }
            let session_doc: SigningSession = read_doc(&session)?;
            session_doc
                .check(directory.config())
                .with_context(|| format!("in {}", session.display()))?;
            let partial = Signer::new(&directory, &keys)?.sign(signer_nonce, &session_doc)?;
            write_public(&out, &partial)?;
            fs::remove_file(&nonce)
                .with_context(|| format!("removing used nonce {}", nonce.display()))?;
            println!("{}: s = {}, C = {}", partial.signer, partial.s, partial.c);
            Ok(Verdict::Valid)
        }
    }
}

fn cmd_combine(args: CombineArgs, profile: Option<Profile>) -> Result<Verdict> {
    let directory = load_directory(&args.directory, profile)?;
    let session: SigningSession = read_doc(&args.session)?;
    session
        .check(directory.config())
        .with_context(|| format!("in {}", args.session.display()))?;
    let mut partials = Vec::new();
    for path in &args.partials {
        let ps: PartialSignature = read_doc(path)?;
        wire::check_partial(directory.params(), &ps)
            .with_context(|| format!("in {}", path.display()))?;
        partials.push(ps);
    }
    let signature = combine(&directory, &session, partials)?;
    write_public(&args.out, &signature)?;
    println!(
        "S_S = {}, U_S = {}, W_S = {}",
        signature.s_s, signature.u_s, signature.w_s
    );
    Ok(Verdict::Valid)
}

fn load_signature(
    r: &ReceiverArgs,
    profile: Option<Profile>,
) -> Result<(
    dirthresh_core::keygen::GroupDirectory,
    GroupSignature,
    Scalar,
)> {
    let directory = load_directory(&r.directory, profile)?;
    let signature: GroupSignature = read_doc(&r.signature)?;
    wire::check_signature(directory.params(), &signature)
        .with_context(|| format!("in {}", r.signature.display()))?;
    let x_r = receiver_secret(&r.receiver_key, directory.params())?;
    Ok((directory, signature, x_r))
}

fn cmd_verify(args: VerifyArgs, profile: Option<Profile>) -> Result<Verdict> {
    let (directory, signature, x_r) = load_signature(&args.receiver, profile)?;
    let ok = verify_group_signature(&directory, &signature, &x_r)?;
    println!("{}", if ok { "valid" } else { "invalid" });
    Ok(Verdict::from_bool(ok))
}

fn cmd_confirm(cmd: ConfirmCommand, profile: Option<Profile>) -> Result<Verdict> {
    match cmd {
        ConfirmCommand::Run {
            receiver,
            seed,
            out,
        } => {
            let (directory, signature, x_r) = load_signature(&receiver, profile)?;
            let mut verifier_rng = rng_for(seed);
            let mut prover_rng = rng_for(seed.map(|s| s ^ 0x5eed));
            let (accepted, transcript) = run_confirmation(
                &directory,
                &signature,
                &x_r,
                &mut verifier_rng,
                &mut prover_rng,
            )?;
            write_public(&out, &transcript)?;
            println!(
                "mu = {}, w = {}, beta = {}, gamma = {}: {}",
                transcript.statement.mu,
                transcript.w,
                transcript.beta,
                transcript.gamma,
                if accepted { "accepted" } else { "rejected" }
            );
            Ok(Verdict::from_bool(accepted))
        }
        ConfirmCommand::Check {
            directory,
            transcript,
        } => {
            let directory = load_directory(&directory, profile)?;
            let t: ConfirmationTranscript = read_doc(&transcript)?;
            wire::check_transcript(directory.params(), &t)
                .with_context(|| format!("in {}", transcript.display()))?;
            let ok = check_transcript(&directory, &t)?;
            println!("{}", if ok { "accepted" } else { "rejected" });
            Ok(Verdict::from_bool(ok))
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<Verdict> {
    let mut cfg = SimConfig::new(&args.preset, args.n, args.t, args.seed, args.scenario);
    cfg.message = args.message.into_bytes();
    if !args.signers.is_empty() {
        cfg.signers = SignerSelection::Explicit(args.signers.into_iter().map(MemberId).collect());
    }
    let outcome = sim::run(&cfg)?;
    let log = outcome.transcript_jsonl();
    match &args.out {
        Some(path) => {
            fs::write(path, &log).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{log}"),
    }
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    let verdicts = serde_json::to_string(&outcome.verdicts)?;
    eprintln!("{}: {verdicts}", outcome.scenario);
    Ok(Verdict::from_bool(outcome.as_expected()))
}

fn cmd_replay(args: ReplayArgs) -> Result<Verdict> {
    let report = match replay_paper_example() {
        Ok(report) => report,
        Err(err @ Error::GoldenMismatch(_)) => {
            eprintln!("FAIL: {err}");
            return Ok(Verdict::Invalid);
        }
        Err(err) => return Err(err.into()),
    };
    let v = &report.verdicts;
    let pass = v.partials_accepted && v.signature_verified && v.confirmation_accepted;
    let mut out = String::new();
    if args.json {
        out = serde_json::to_string_pretty(&report)?;
        out.push('\n');
    } else {
        let _ = writeln!(
            out,
            "{:<28} {:<28} {:>12} {:>12}",
            "check", "location", "printed", "recomputed"
        );
        for c in &report.checks {
            let mark = if c.matches { "" } else { "  *" };
            let _ = writeln!(
                out,
                "{:<28} {:<28} {:>12} {:>12}{mark}",
                c.id, c.location, c.paper_value, c.recomputed_value
            );
        }
        let _ = writeln!(
            out,
            "\n{} of {} printed values reproduced",
            report.matched(),
            report.checks.len()
        );
        let counts = report.errata.iter().fold(BTreeMap::new(), |mut m, e| {
            *m.entry(format!("{:?}", e.kind)).or_insert(0) += 1;
            m
        });
        let _ = writeln!(out, "errata: {} ({counts:?})", report.errata.len());
        for e in &report.errata {
            let _ = writeln!(
                out,
                "  {} at {}: printed {:?}, recomputed {:?}",
                e.id, e.location, e.paper_value, e.recomputed_value
            );
        }
        let _ = writeln!(
            out,
            "partials accepted: {}, signature verified: {}, confirmation accepted: {}",
            v.partials_accepted, v.signature_verified, v.confirmation_accepted
        );
        let _ = writeln!(out, "{}", if pass { "PASS" } else { "FAIL" });
    }
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = std::io::stdout().write_all(out.as_bytes());
    if args.strict && !report.errata.is_empty() {
        eprintln!("strict: {} errata count as failures", report.errata.len());
        return Ok(Verdict::Invalid);
    }
    Ok(Verdict::from_bool(pass))
}

fn cmd_reformat(input: &Path, out: &Path) -> Result<Verdict> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let (kind, canonical) =
        wire::normalize(&text).with_context(|| format!("in {}", input.display()))?;
    if kind.is_secret() {
        write_secret_text(out, &canonical)?;
    } else {
        fs::write(out, &canonical).with_context(|| format!("writing {}", out.display()))?;
    }
    Ok(Verdict::Valid)
}
