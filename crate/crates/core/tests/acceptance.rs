// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! of them fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use graftfuzz_core::constraints::{check_generic_constraints, ViolationKind};
use graftfuzz_core::coverage::{control_pairs, data_pairs, DialectPair};
use graftfuzz_core::driver::{load_corpus, Budget, Category, FuzzConfig, Fuzzer};
use graftfuzz_core::matching::{check_site, locate, Direction, MatchConfig, Mismatch, MutationSite};
use graftfuzz_core::mutate::{mutate_once, MutateOptions};
use graftfuzz_core::synth::{bisect, parameterize, Side};
use graftfuzz_core::syntax::{parse, print, NodeId, NodeKind, Rule, SyntaxTree, TokenKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const NAIVE_GRAFT: &str = include_str!("fixtures/naive_graft.mlir");
const ADD_DONOR: &str = include_str!("fixtures/add_donor.mlir");
const NESTED_DIALECTS: &str = include_str!("fixtures/nested_dialects.mlir");
const SUB_RECIPIENT: &str = include_str!("fixtures/sub_recipient.mlir");
const ADD_GRAFTED: &str = include_str!("fixtures/add_grafted.mlir");
const REDEFINITION: &str = include_str!("fixtures/redefinition.mlir");

/// Seed under which the worked example picks the replacement site.
const WORKED_EXAMPLE_SEED: u64 = 18;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn op_named(t: &SyntaxTree, name: &str) -> NodeId {
    t.operations().find(|&op| t.op_name(op) == Some(name)).expect("operation present")
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get()).min(8)
}

fn worked_example() -> Outcome {
    let start = Instant::now();
    let donor = parse(ADD_DONOR).map_err(|e| e.to_string())?;
    let recipient = parse(SUB_RECIPIENT).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(WORKED_EXAMPLE_SEED);
    let m = mutate_once(&donor, &recipient, &MutateOptions::default(), &mut rng).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let want = print(&parse(ADD_GRAFTED).map_err(|e| e.to_string())?);
    ensure!(m.site == MutationSite::Replace(op_named(&recipient, "comb.sub")), "site {} is not location A", m.site);
    ensure!(print(&m.tree) == want, "mutant differs:\n{}", print(&m.tree));
    let binding: Vec<String> = m.binding.iter().map(|(p, v)| format!("{p}={}", v.lexeme)).collect();
    ensure!(binding == ["A=%arg0", "B=%0", "C=i4", "D=%1"], "binding {binding:?}");
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!("{} in {elapsed:?}", binding.join(" ")))
}

fn four_parameters() -> Outcome {
    let donor = parse(ADD_DONOR).map_err(|e| e.to_string())?;
    let pm = parameterize(bisect(&donor, op_named(&donor, "comb.add")));
    let got: Vec<(String, TokenKind, &str)> =
        pm.params().iter().map(|p| (p.id.to_string(), p.kind, p.donor_value.as_str())).collect();
    let want = [
        ("A".to_string(), TokenKind::ValueId, "%arg0"),
        ("B".to_string(), TokenKind::ValueId, "%c1"),
        ("C".to_string(), TokenKind::TypeToken, "i2"),
        ("D".to_string(), TokenKind::ValueId, "%o1"),
    ];
    ensure!(got == want, "parameters {got:?}");
    for p in pm.params() {
        let in_donor = donor.ids().filter(|&i| donor.is_terminal(i) && donor.text(i) == p.donor_value).count();
        ensure!(p.occurrences.len() == in_donor, "{} covers {} of {in_donor} occurrences", p.id, p.occurrences.len());
        ensure!(
            p.occurrences.iter().any(|o| o.side == Side::Context) && p.occurrences.iter().any(|o| o.side == Side::Mutation),
            "{} is not shared",
            p.id
        );
    }
    Ok("A=%arg0 B=%c1 C=i2 D=%o1, every occurrence covered".into())
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut nonempty = 0;
    for case in 0..500 {
        let pm = common::random_mutation(&mut rng, 50);
        let recipient = common::random_tree(&mut rng, 50);
        let cfg = MatchConfig { k: rng.random_range(0..=4), l: rng.random_range(0..=4), r: rng.random_range(0..=4) };
        let found: BTreeSet<MutationSite> = locate(&pm, &recipient, cfg).collect();
        let expected = common::brute_force_sites(&pm, &recipient, cfg);
        ensure!(found == expected, "case {case} ({cfg:?}): locate {found:?} vs exhaustive {expected:?}");
        nonempty += usize::from(!found.is_empty());
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!("500/500 agree ({nonempty} with sites) in {elapsed:?}"))
}

fn site_discrimination() -> Outcome {
    let donor = parse(ADD_DONOR).map_err(|e| e.to_string())?;
    let pm = parameterize(bisect(&donor, op_named(&donor, "comb.add")));
    let t = parse(SUB_RECIPIENT).map_err(|e| e.to_string())?;
    let block = t.ids().find(|&i| t.kind(i) == NodeKind::Rule(Rule::Block)).expect("block");
    let a = MutationSite::Replace(op_named(&t, "comb.sub"));
    let b = MutationSite::Insert { parent: block, index: t.children(block).len() };
    let c = MutationSite::Insert { parent: t.root(), index: t.children(t.root()).len() };
    let cfg = MatchConfig { k: 2, l: 1, r: 1 };
    let (ra, rb, rc) = (check_site(&pm, &t, a, cfg), check_site(&pm, &t, b, cfg), check_site(&pm, &t, c, cfg));
    ensure!(ra == Ok(()), "A: {ra:?}");
    ensure!(rb == Err(Mismatch { direction: Direction::Right, step: 1 }), "B: {rb:?}");
    ensure!(rc == Err(Mismatch { direction: Direction::Ancestor, step: 1 }), "C: {rc:?}");
    Ok("A accepted, B missing right sibling, C ancestor mismatch".into())
}

fn monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d6f);
    let mut checks = 0;
    for case in 0..200 {
        let pm = common::random_mutation(&mut rng, 50);
        let recipient = common::random_tree(&mut rng, 50);
        let base = MatchConfig { k: rng.random_range(0..4), l: rng.random_range(0..4), r: rng.random_range(0..4) };
        let loose: BTreeSet<MutationSite> = locate(&pm, &recipient, base).collect();
        for wider in [
            MatchConfig { k: base.k + 1, ..base },
            MatchConfig { l: base.l + 1, ..base },
            MatchConfig { r: base.r + 1, ..base },
        ] {
            let strict: BTreeSet<MutationSite> = locate(&pm, &recipient, wider).collect();
            ensure!(strict.is_subset(&loose), "case {case}: {wider:?} finds sites {base:?} does not");
            checks += 1;
        }
    }
    Ok(format!("{checks} increments, zero counterexamples"))
}

fn def_use_checker() -> Outcome {
    let parsed = |s: &str| parse(s).map_err(|e| e.to_string());
    let v4 = check_generic_constraints(&parsed(NAIVE_GRAFT)?);
    let v4: Vec<_> = v4.iter().map(|v| (v.kind, v.value_name.as_str())).collect();
    ensure!(v4 == [(ViolationKind::UseBeforeDef, "%c1")], "naive graft: {v4:?}");
    let v8 = check_generic_constraints(&parsed(ADD_GRAFTED)?);
    ensure!(v8.is_empty(), "grafted example: {v8:?}");
    let vr = check_generic_constraints(&parsed(REDEFINITION)?);
    let vr: Vec<_> = vr.iter().map(|v| (v.kind, v.value_name.as_str())).collect();
    ensure!(vr == [(ViolationKind::Redefinition, "%0")], "redefinition fixture: {vr:?}");
    let corpus = load_corpus(&corpus_dir()).map_err(|e| e.to_string())?;
    for seed in &corpus.seeds {
        let v = check_generic_constraints(&seed.tree);
        ensure!(v.is_empty(), "{}: {v:?}", seed.name);
    }
    Ok(format!("fixtures exact, {} corpus seeds clean", corpus.len()))
}

fn dialect_pairs() -> Outcome {
    let t = parse(NESTED_DIALECTS).map_err(|e| e.to_string())?;
    let pair = |a, b| DialectPair::new(a, b).expect("distinct dialects");
    let control = control_pairs(&t);
    let data = data_pairs(&t);
    ensure!(control == BTreeSet::from([pair("comb", "sv"), pair("hw", "sv")]), "control {control:?}");
    ensure!(data == BTreeSet::from([pair("comb", "hw")]), "data {data:?}");
    Ok("control {(comb,sv),(hw,sv)}, data {(comb,hw)}".into())
}

fn ablation() -> Outcome {
    let start = Instant::now();
    let run = |parameterization| {
        let config = FuzzConfig {
            seed_dir: corpus_dir(),
            budget: Budget::Iterations(10_000),
            rng_seed: 1,
            parameterization,
            workers: workers(),
            report_every: 0,
            ..FuzzConfig::default()
        };
        Fuzzer::from_config(config).and_then(|f| f.run()).map_err(|e| e.to_string())
    };
    let on = run(true)?;
    let off = run(false)?;
    let elapsed = start.elapsed();
    ensure!(on.corpus.seeds >= 30, "only {} seeds", on.corpus.seeds);
    ensure!(on.mutants() > 0 && off.mutants() > 0, "no mutants produced");
    let (f_on, f_off) = (on.general_mlir_fraction, off.general_mlir_fraction);
    let summary = format!("on {f_on:.4}, off {f_off:.4}, ratio {:.2} in {elapsed:?}", f_off / f_on.max(f64::MIN_POSITIVE));
    ensure!(f_off >= 1.3 * f_on, "{summary}");
    ensure!(elapsed < Duration::from_secs(300), "{summary}");
    Ok(summary)
}

/// File name to contents for every file under `dir`.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    walk(dir).into_iter().map(|p| (p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap())).collect()
}

fn walk(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    if let Ok(entries) = std::fs::read_dir(dir) {
        for e in entries.flatten() {
            let p = e.path();
            if p.is_dir() {
                out.extend(walk(&p));
            } else {
                out.push(p);
            }
        }
    }
    out
}

fn reproducibility() -> Outcome {
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    for (i, d) in dirs.iter().enumerate() {
        let config = FuzzConfig {
            seed_dir: corpus_dir(),
            budget: Budget::Iterations(2_000),
            rng_seed: 7,
            out_dir: Some(d.path().to_path_buf()),
            // Different worker counts must not matter either.
            workers: if i == 0 { 1 } else { workers() },
            report_every: 0,
            ..FuzzConfig::default()
        };
        Fuzzer::from_config(config).and_then(|f| f.run()).map_err(|e| e.to_string())?;
    }
    let (a, b) = (snapshot(dirs[0].path()), snapshot(dirs[1].path()));
    let json = PathBuf::from("report.json");
    ensure!(a.contains_key(&json) && a.get(&json) == b.get(&json), "report.json differs");
    ensure!(a == b, "saved files differ");
    let valid = a.keys().filter(|p| p.starts_with("valid")).count();
    Ok(format!("report.json identical, {valid} saved test cases identical"))
}

fn round_trip() -> Outcome {
    let roundtrips = |t: &SyntaxTree| parse(&print(t)).is_ok_and(|u| u.structurally_eq(t));
    let mut files = 0;
    for path in walk(&corpus_dir()) {
        let text = std::fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let t = parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        ensure!(roundtrips(&t), "{} does not round-trip", path.display());
        files += 1;
    }
    let corpus = load_corpus(&corpus_dir()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x7274);
    let mut mutants = 0;
    let mut attempts = 0;
    while mutants < 1000 {
        attempts += 1;
        ensure!(attempts < 100_000, "only {mutants} mutants after {attempts} attempts");
        let donor = &corpus.seeds[rng.random_range(0..corpus.len())].tree;
        let recipient = &corpus.seeds[rng.random_range(0..corpus.len())].tree;
        let opts = MutateOptions { parameterization: rng.random_bool(0.5), ..MutateOptions::default() };
        if let Ok(m) = mutate_once(donor, recipient, &opts, &mut rng) {
            ensure!(roundtrips(&m.tree), "mutant does not round-trip:\n{}", print(&m.tree));
            mutants += 1;
        }
    }
    Ok(format!("{files} corpus files and {mutants} mutants"))
}

#[cfg(unix)]
fn crash_handling() -> Outcome {
    use std::os::unix::fs::PermissionsExt;
    use std::os::unix::process::ExitStatusExt;

    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let stub = work.path().join("stub-opt");
    let script = "#!/bin/sh\nfor f; do :; done\nif grep -q comb.parity \"$f\"; then kill -ABRT $$; fi\ncat \"$f\"\n";
    std::fs::write(&stub, script).map_err(|e| e.to_string())?;
    std::fs::set_permissions(&stub, std::fs::Permissions::from_mode(0o755)).map_err(|e| e.to_string())?;
    let out = work.path().join("out");
    let budget = 300;
    let config = FuzzConfig {
        seed_dir: corpus_dir(),
        target: stub.display().to_string(),
        budget: Budget::Iterations(budget),
        rng_seed: 3,
        out_dir: Some(out.clone()),
        workers: workers(),
        report_every: 0,
        ..FuzzConfig::default()
    };
    let report = Fuzzer::from_config(config).and_then(|f| f.run()).map_err(|e| e.to_string())?;
    ensure!(report.iterations == budget, "stopped after {} iterations", report.iterations);
    ensure!(report.outcomes.get(Category::Crash) > 0, "no crash recorded");
    let first = report.crashes.first().ok_or("no reproducer listed")?;
    let case = out.join(first);
    let text = std::fs::read_to_string(&case).map_err(|e| format!("{}: {e}", case.display()))?;
    ensure!(text.contains("comb.parity"), "reproducer lacks the trigger");
    let flags = std::fs::read_to_string(case.with_extension("pipeline")).map_err(|e| e.to_string())?;
    let status = std::process::Command::new(&stub)
        .args(flags.lines().filter(|l| !l.is_empty()))
        .arg(&case)
        .output()
        .map_err(|e| e.to_string())?
        .status;
    ensure!(status.signal() == Some(6), "replay ended with {status:?}");
    Ok(format!("{} crashes over {budget} iterations, replay aborts", report.outcomes.get(Category::Crash)))
}

#[cfg(not(unix))]
fn crash_handling() -> Outcome {
    Err("needs a POSIX shell".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("worked example end to end", worked_example),
        ("four parameters from the comb.add donor", four_parameters),
        ("locate matches exhaustive search", oracle_equivalence),
        ("site discrimination at (2,1,1)", site_discrimination),
        ("more context never adds sites", monotonicity),
        ("def-use checker", def_use_checker),
        ("dialect pair coverage", dialect_pairs),
        ("parameterization lowers generic violations", ablation),
        ("identical runs give identical artifacts", reproducibility),
        ("parse, print, parse round trip", round_trip),
        ("crashing target", crash_handling),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
