//! One line per acceptance criterion; exits non-zero if any fails.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use dirthresh_core::combiner::{verify_partial, GroupSignature};
use dirthresh_core::group_math::{GroupParams, HashOracle};
use dirthresh_core::keygen::{
    mask_share, run_setup, setup_common, unmask_share, GroupConfig, MemberId, MemberKeys,
};
use dirthresh_core::presets::by_name;
use dirthresh_core::shamir::{
    eval_poly, interpolate_constant, lagrange_coefficients, EvaluationPoint, Polynomial,
};
use dirthresh_core::signing::PartialSignature;
use dirthresh_core::sim::paper::{
    documented_errata, replay_paper_example, run_paper_protocol, ErratumKind,
};
use dirthresh_core::sim::{self, Scenario, SignerSelection, SimConfig};
use dirthresh_core::verification::verify_group_signature;
use dirthresh_core::wire::{self, DirectoryDoc};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn golden_replay() -> Outcome {
    let start = Instant::now();
    let report = match replay_paper_example() {
        Ok(report) => report,
        Err(err) => return outcome(false, err.to_string()),
    };
    let elapsed = start.elapsed();
    let expected: &[(&str, &str)] = &[
        ("W", "12"),
        ("y_S", "25"),
        ("C_2", "1"),
        ("C_4", "11"),
        ("C_6", "9"),
        ("C_7", "3"),
        ("MS_2", "8"),
        ("MS_4", "6"),
        ("MS_6", "15"),
        ("MS_7", "17"),
        ("s_2", "15"),
        ("s_4", "10"),
        ("s_6", "15"),
        ("s_7", "8"),
        ("S_S", "2"),
        ("U_S", "16"),
        ("V_S", "25"),
        ("W_S", "14"),
        ("E", "12"),
        ("R_R", "25"),
        ("mu", "32"),
        ("conf_w", "9"),
        ("conf_beta", "36"),
        ("conf_gamma", "16"),
    ];
    let mut wrong = Vec::new();
    for (id, value) in expected {
        match report.checks.iter().find(|c| c.id == *id) {
            Some(c) if c.matches && c.recomputed_value == *value => {}
            _ => wrong.push(*id),
        }
    }
    let is_cell = |id: &str| {
        let b = id.as_bytes();
        b.len() == 4
            && b"lmnv".contains(&b[0])
            && b[1] == b'_'
            && b[2..].iter().all(u8::is_ascii_digit)
    };
    let cells = report.checks.iter().filter(|c| is_cell(&c.id)).count();
    let listed: Vec<&str> = report
        .errata
        .iter()
        .filter(|e| e.kind == ErratumKind::Listed)
        .map(|e| e.id.as_str())
        .collect();
    let v = &report.verdicts;
    let pass = wrong.is_empty()
        && cells == 42 * 4
        && report.errata == documented_errata()
        && listed
            == [
                "u_2",
                "share_formula_argument",
                "products_mod_q",
                "dc_check_display",
                "verify_display",
            ]
        && v.partials_accepted
        && v.signature_verified
        && v.confirmation_accepted
        && elapsed < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "{} of {} printed values reproduced, {} table cells, {} documented errata ({} listed), mismatched {:?}, {:.0?}",
            report.matched(),
            report.checks.len(),
            cells,
            report.errata.len(),
            listed.len(),
            wrong,
            elapsed
        ),
    )
}

fn end_to_end() -> Outcome {
    let start = Instant::now();
    let presets = ["paper-47", "toy-59", "toy-83", "toy-107"];
    let mut ok = 0;
    let mut sizes = BTreeSet::new();
    let mut failures = Vec::new();
    for seed in 0..100u64 {
        let s = seed as usize;
        let n = 1 + s % 7;
        let t = 1 + (s / 7) % n;
        let k = t + (s / 3) % (n - t + 1);
        let mut cfg = SimConfig::new(presets[s % 4], n, t, seed, Scenario::Honest);
        cfg.signers = SignerSelection::Random(Some(k));
        sizes.insert((n, t, k));
        match sim::run(&cfg) {
            Ok(out)
                if out.verdicts.signature_verified == Some(true)
                    && out.verdicts.confirmation_accepted == Some(true) =>
            {
                ok += 1
            }
            _ => failures.push(seed),
        }
    }
    let elapsed = start.elapsed();
    let full = sizes.iter().filter(|(n, _, k)| k == n).count();
    let minimal = sizes.iter().filter(|(_, t, k)| k == t).count();
    outcome(
        ok == 100 && elapsed < Duration::from_secs(10),
        format!(
            "{ok}/100 signatures verified and confirmed over {presets:?}, {} (n, t, |H_S|) shapes ({minimal} with |H_S| = t, {full} with |H_S| = n), failures {failures:?}, {elapsed:.2?}",
            sizes.len()
        ),
    )
}

fn interpolation() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let presets = ["paper-47", "toy-59", "toy-83", "toy-167", "toy-64bit"];
    let mut ok = 0;
    for i in 0..200 {
        let params = by_name(presets[i % presets.len()]).unwrap();
        let t = rng.gen_range(1..=7);
        let k = t + rng.gen_range(0..=2);
        let f = Polynomial::random(&params, t, &mut rng);
        let mut xs = Vec::new();
        while xs.len() < k {
            let x = params.random_nonzero_scalar(&mut rng);
            if !xs.contains(&x) {
                xs.push(x);
            }
        }
        let c = lagrange_coefficients(&params, &xs).unwrap();
        let ys: Vec<_> = xs.iter().map(|x| eval_poly(&params, &f, x)).collect();
        let weighted = params.sum(
            c.iter()
                .zip(&ys)
                .map(|(c, y)| params.mul(c, y))
                .collect::<Vec<_>>()
                .iter(),
        );
        let points: Vec<EvaluationPoint> = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| EvaluationPoint {
                x: x.clone(),
                y: y.clone(),
            })
            .collect();
        let newton = interpolate_constant(&params, &points).unwrap();
        let f0 = &f.coefficients()[0];
        if weighted == *f0 && newton == *f0 {
            ok += 1;
        }
    }
    outcome(
        ok == 200,
        format!("{ok}/200 instances: sum C_i f(u_i) = f(0) and divided differences agree"),
    )
}

fn mask_roundtrip() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let groups: Vec<GroupParams> = ["paper-47", "toy-167", "toy-64bit"]
        .iter()
        .map(|n| by_name(n).unwrap())
        .collect();
    let mut ok = 0;
    for i in 0..1000 {
        let params = &groups[i % groups.len()];
        let l = params.random_scalar(&mut rng);
        let x = params.random_nonzero_scalar(&mut rng);
        let k = params.random_nonzero_scalar(&mut rng);
        let masked = mask_share(params, &l, &params.g_pow(&x), &k);
        let w = setup_common(params, &k).unwrap();
        if unmask_share(params, &masked, &w, &x).as_ref() == Ok(&l) {
            ok += 1;
        }
    }
    outcome(
        ok == 1000,
        format!("{ok}/1000 (l, x, K) triples unmasked exactly"),
    )
}

fn ids(list: &[MemberId]) -> String {
    list.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn tamper_suite() -> Outcome {
    let run = run_paper_protocol().unwrap();
    let params = &run.params;
    let directory = &run.directory;
    let x_r = params.scalar_u64(7);
    let q = params.q().try_into().unwrap_or(0u64);
    let p = params.p().try_into().unwrap_or(0u64);
    let mut tried = 0;
    let mut accepted_labels: Vec<String> = Vec::new();
    let mut tally = |accepted: bool, label: &dyn Fn() -> String| {
        tried += 1;
        if accepted {
            accepted_labels.push(label());
        }
    };
    let partial_ok =
        |ps: &PartialSignature| verify_partial(directory, &run.session, ps).unwrap_or(false);
    for ps in &run.partials {
        for value in 0..q {
            let s = params.scalar_u64(value);
            if s != ps.s {
                tally(
                    partial_ok(&PartialSignature {
                        s: s.clone(),
                        ..ps.clone()
                    }),
                    &|| format!("{} s = {value}", ps.signer),
                );
            }
            if s != ps.c {
                tally(
                    partial_ok(&PartialSignature {
                        c: s.clone(),
                        ..ps.clone()
                    }),
                    &|| format!("{} C = {value}", ps.signer),
                );
            }
            if s != ps.r_s {
                tally(
                    partial_ok(&PartialSignature {
                        r_s: s.clone(),
                        ..ps.clone()
                    }),
                    &|| format!("{} R_S = {value}", ps.signer),
                );
            }
        }
        for value in 1..p {
            let v = params.element_u64(value).unwrap();
            if v != ps.v {
                tally(
                    partial_ok(&PartialSignature {
                        v: v.clone(),
                        ..ps.clone()
                    }),
                    &|| format!("{} v = {value}", ps.signer),
                );
            }
        }
    }
    let sig_ok =
        |sig: &GroupSignature| verify_group_signature(directory, sig, &x_r).unwrap_or(false);
    let sig = &run.signature;
    for value in 0..q {
        let s_s = params.scalar_u64(value);
        if s_s != sig.s_s {
            tally(
                sig_ok(&GroupSignature {
                    s_s: s_s.clone(),
                    ..sig.clone()
                }),
                &|| format!("S_S = {value}"),
            );
        }
    }
    for value in 1..p {
        let e = params.element_u64(value).unwrap();
        if e != sig.u_s {
            tally(
                sig_ok(&GroupSignature {
                    u_s: e.clone(),
                    ..sig.clone()
                }),
                &|| format!("U_S = {value}"),
            );
        }
        if e != sig.w_s {
            tally(
                sig_ok(&GroupSignature {
                    w_s: e.clone(),
                    ..sig.clone()
                }),
                &|| format!("W_S = {value}"),
            );
        }
    }
    for message in [&b""[..], b"n", b"M", b"m ", b"mm"] {
        tally(
            sig_ok(&GroupSignature {
                message: message.to_vec(),
                ..sig.clone()
            }),
            &|| format!("message = {message:?}"),
        );
    }
    let absent = directory.absent_members(&sig.signers);
    for i in 0..sig.signers.len() {
        let mut fewer = sig.signers.clone();
        fewer.remove(i);
        tally(
            sig_ok(&GroupSignature {
                signers: fewer.clone(),
                ..sig.clone()
            }),
            &|| format!("signers = {}", ids(fewer.as_slice())),
        );
        for &j in &absent {
            let mut swapped = sig.signers.clone();
            swapped[i] = j;
            tally(
                sig_ok(&GroupSignature {
                    signers: swapped.clone(),
                    ..sig.clone()
                }),
                &|| format!("signers = {}", ids(swapped.as_slice())),
            );
        }
    }
    for &j in &absent {
        let mut more = sig.signers.clone();
        more.push(j);
        tally(
            sig_ok(&GroupSignature {
                signers: more.clone(),
                ..sig.clone()
            }),
            &|| format!("signers = {}", ids(more.as_slice())),
        );
    }
    let mut duplicated = sig.signers.clone();
    duplicated[0] = duplicated[1];
    tally(
        sig_ok(&GroupSignature {
            signers: duplicated.clone(),
            ..sig.clone()
        }),
        &|| format!("signers = {}", ids(duplicated.as_slice())),
    );
    let untouched = run.partials.iter().all(partial_ok) && sig_ok(sig);
    let rejected = tried - accepted_labels.len();
    outcome(
        untouched && accepted_labels.is_empty(),
        format!(
            "{rejected}/{tried} one-field perturbations rejected (exhaustive over s_i, C_i, R_S, v_i, S_S, U_S, W_S; message and signer-set variants); golden values accepted: {untouched}; accepted perturbations: {accepted_labels:?}"
        ),
    )
}

fn adversarial() -> Outcome {
    let count = |preset: &str, scenario: Scenario| {
        (0..200u64)
            .filter(|&seed| {
                let out = sim::run(&SimConfig::new(preset, 5, 3, seed, scenario)).unwrap();
                out.as_expected()
            })
            .count()
    };
    let impersonation = count("paper-47", Scenario::Impersonation);
    let forged = count("paper-47", Scenario::ForgedSignature);
    let tampered = count("paper-47", Scenario::TamperedPartial);
    let wrong_receiver = count("toy-64bit", Scenario::WrongReceiver);
    let wrong_receiver_small = count("paper-47", Scenario::WrongReceiver);
    outcome(
        impersonation >= 190 && forged >= 190 && tampered == 200 && wrong_receiver == 200,
        format!(
            "rejected at q = 23: impersonation {impersonation}/200, forged signature {forged}/200, tampered partial {tampered}/200; wrong receiver {wrong_receiver}/200 at toy-64bit ({wrong_receiver_small}/200 at q = 23, not part of the check)"
        ),
    )
}

fn seeded_setup_files(seed: u64) -> Vec<String> {
    let params = by_name("toy-107").unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let points = GroupConfig::random_points(&params, 6, &mut rng).unwrap();
    let config = GroupConfig::new(params.clone(), 4, points, HashOracle::Real).unwrap();
    let members: Vec<MemberKeys> = config
        .member_ids()
        .map(|id| MemberKeys::generate(&config, id, &mut rng).unwrap())
        .collect();
    let x_r = params.random_nonzero_scalar(&mut rng);
    let k = params.random_nonzero_scalar(&mut rng);
    let directory = run_setup(&config, &members, &k, &params.g_pow(&x_r))
        .unwrap()
        .directory;
    let mut files = vec![wire::encode(&DirectoryDoc::from_directory(&directory))];
    files.extend(
        members
            .iter()
            .map(|m| wire::encode(&wire::MemberSecretDoc::from_keys(m))),
    );
    files
}

fn determinism() -> Outcome {
    let mut compared = 0;
    let mut identical = 0;
    let mut same = |a: String, b: String| {
        compared += 1;
        if a == b {
            identical += 1;
        }
    };
    for scenario in Scenario::ALL {
        for seed in 0..10u64 {
            let mut cfg = SimConfig::new(
                ["paper-47", "toy-83"][seed as usize % 2],
                6,
                3,
                seed,
                scenario,
            );
            if seed % 3 == 0 {
                let mut ids: Vec<MemberId> = (1..=6).map(MemberId).collect();
                ids.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
                ids.truncate(4);
                cfg.signers = SignerSelection::Explicit(ids);
            }
            let a = sim::run(&cfg).unwrap();
            let b = sim::run(&cfg).unwrap();
            same(a.transcript_jsonl(), b.transcript_jsonl());
            same(
                serde_json::to_string(&a).unwrap(),
                serde_json::to_string(&b).unwrap(),
            );
        }
    }
    for seed in 0..5 {
        for (a, b) in seeded_setup_files(seed)
            .into_iter()
            .zip(seeded_setup_files(seed))
        {
            same(a, b);
        }
    }
    let (r1, r2) = (run_paper_protocol().unwrap(), run_paper_protocol().unwrap());
    same(wire::encode(&r1.signature), wire::encode(&r2.signature));
    same(wire::encode(&r1.transcript), wire::encode(&r2.transcript));
    outcome(identical == compared, format!("{identical}/{compared} transcript logs and output files byte-identical across two runs"))
}

type Criterion = fn() -> Outcome;

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 7] = [
        ("golden replay", golden_replay),
        ("end-to-end completeness", end_to_end),
        ("interpolation oracle equivalence", interpolation),
        ("mask roundtrip", mask_roundtrip),
        ("tamper suite", tamper_suite),
        ("adversarial scenarios", adversarial),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let out = check();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{verdict}] {name}: {}", i + 1, out.detail);
        if !out.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
