//! End-to-end acceptance run: one line per criterion, non-zero exit on any failure.

use definetti_cli::{execute, Record, Report};
use serde_json::Value;
use std::process::Command;

fn run(args: &[&str]) -> Report {
    let argv = std::iter::once("definetti").chain(args.iter().copied());
    let out = execute(argv);
    match out.report {
        Some(r) => r,
        None => panic!("{args:?} produced no report (exit {}): {}", out.code, out.stderr),
    }
}

fn anchored<'a>(r: &'a Report, anchor: &'a str) -> impl Iterator<Item = &'a Record> + 'a {
    r.records.iter().filter(move |x| x.anchor == anchor)
}

fn param_f64(rec: &Record, key: &str) -> f64 {
    rec.params.get(key).and_then(Value::as_f64).unwrap_or(f64::NAN)
}

fn binomial(n: u64, k: u64) -> u64 {
    (1..=k).fold(1, |acc, i| acc * (n - k + i) / i)
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn summarize(reports: &[Report]) -> (bool, usize, usize) {
    let total: usize = reports.iter().map(|r| r.records.len()).sum();
    let passed: usize = reports.iter().map(|r| r.records.iter().filter(|x| x.pass).count()).sum();
    (reports.iter().all(|r| r.pass) && total > 0, passed, total)
}

fn c1() -> Verdict {
    let r = run(&["--seed", "1", "verify-pinching", "--instances", "100", "--d-max", "4", "--r-max", "4"]);
    let worst = r.records.iter().filter_map(|x| x.gap).fold(f64::INFINITY, f64::min);
    let failures = r.records.iter().filter(|x| !x.pass).count();
    verdict(r.pass && r.records.len() == 100 && failures == 0, format!("100 instances, min gap {worst:.3e}"))
}

fn c2() -> Verdict {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (n, d) in [(2u64, 2u64), (3, 2), (2, 3), (4, 2)] {
        let (ns, ds) = (n.to_string(), d.to_string());
        let r = run(&["verify-definetti", "--kind", "projector", "--n", &ns, "--d", &ds]);
        let rec = &r.records[0];
        let expected = binomial(n + d - 1, n).to_string();
        let dim_ok = rec.params.get("dimension").and_then(Value::as_str) == Some(expected.as_str())
            && rec.params.get("basis_size").and_then(Value::as_str) == Some(expected.as_str());
        let diff = rec.value.unwrap_or(f64::INFINITY);
        worst = worst.max(diff);
        ok &= r.pass && dim_ok && diff <= 1e-10 && param_f64(rec, "trace_gap") <= 1e-10;
    }
    verdict(ok, format!("4 configurations, max Frobenius difference {worst:.3e}"))
}

fn c3() -> Verdict {
    let mut reports = Vec::new();
    for (n, d) in [("2", "2"), ("3", "2"), ("2", "3")] {
        reports.push(run(&["--seed", "100", "verify-definetti", "--kind", "pure", "--n", n, "--d", d, "--seeds", "50"]));
    }
    let mc = run(&[
        "--seed", "100", "verify-definetti", "--kind", "pure", "--n", "2", "--d", "2", "--seeds", "1", "--mc-samples",
        "100000", "--sigmas", "5",
    ]);
    let mc_rec = anchored(&mc, "moment-monte-carlo").next();
    let mc_ok = mc_rec.is_some_and(|x| x.pass && x.value.is_some_and(|z| z <= 5.0));
    let counts_ok = reports.iter().all(|r| anchored(r, "pure-constrained-reduction").count() == 50);
    let (ok, passed, total) = summarize(&reports);
    let z = mc_rec.and_then(|x| x.value).unwrap_or(f64::NAN);
    verdict(ok && counts_ok && mc_ok, format!("{passed}/{total} reductions, Monte Carlo max z {z:.2}"))
}

fn c4() -> Verdict {
    let r = run(&["--seed", "200", "verify-definetti", "--kind", "mixed", "--n", "2", "--d", "2", "--seeds", "25", "--samples", "100"]);
    let red = anchored(&r, "mixed-constrained-reduction").count();
    let dom: Vec<_> = anchored(&r, "fidelity-domination").collect();
    let samples_ok = dom.iter().all(|x| x.params.get("samples").and_then(Value::as_u64) == Some(100));
    let worst = r.records.iter().filter_map(|x| x.gap).fold(f64::INFINITY, f64::min);
    verdict(r.pass && red == 25 && dom.len() == 25 && samples_ok, format!("25 seeds, min gap {worst:.3e}"))
}

fn c5() -> Verdict {
    let r = run(&["verify-classical", "--n", "3", "--d", "2"]);
    let strings_ok = r.records.iter().all(|x| x.params.get("strings").and_then(Value::as_u64) == Some(8));
    verdict(r.pass && r.records.len() == 3 && strings_ok, format!("3 distributions over all 8 strings, {} records", r.records.len()))
}

fn c6() -> Verdict {
    let mut reports = Vec::new();
    for n in ["1", "2"] {
        reports.push(run(&["--seed", "300", "verify-truncated", "--n", n, "--k", "1", "--d", "2", "--big-d", "3", "--seeds", "5"]));
    }
    for (n, d, big) in [("2", "2", "3"), ("3", "2", "3"), ("2", "3", "4")] {
        reports.push(run(&["--seed", "100", "verify-truncated", "--n", n, "--k", "0", "--d", d, "--big-d", big, "--seeds", "10"]));
    }
    let (ok, passed, total) = summarize(&reports);
    verdict(ok, format!("{passed}/{total} records (k=1 reductions and k=0 consistency)"))
}

fn c7() -> Verdict {
    let h = run(&["--seed", "7", "hsep", "--builtin", "singlet", "--restarts", "32", "--grid-deg", "1"]);
    let seesaw = anchored(&h, "hsep-seesaw").next().and_then(|x| x.value).unwrap_or(f64::NAN);
    let grid = anchored(&h, "product-grid").next().and_then(|x| x.value).unwrap_or(f64::NAN);
    let q = run(&["--seed", "7", "qext", "--builtin", "singlet", "--q", "1,2,3"]);
    let values: Vec<f64> = anchored(&q, "qext").filter_map(|x| x.value).collect();
    let strict = values.len() == 3 && values.windows(2).all(|w| w[0] > w[1]);
    let first = values.first().copied().unwrap_or(f64::NAN);
    let random = run(&["--seed", "7", "qext", "--builtin", "random", "--instances", "20", "--q", "1,2,3"]);
    let dominated = anchored(&random, "qext-dominates-seesaw").filter(|x| x.pass).count();
    let ok = (seesaw - 0.5).abs() <= 1e-6
        && (grid - 0.5).abs() <= 1e-6
        && strict
        && (first - 1.0).abs() <= 1e-9
        && q.pass
        && dominated == 60;
    verdict(
        ok,
        format!("seesaw {seesaw:.12}, grid {grid:.12}, qext {values:.6?}, {dominated}/60 random dominance checks"),
    )
}

fn c8() -> Verdict {
    let s = run(&["--seed", "8", "hsep", "--builtin", "singlet", "--copies", "2"]);
    let r = run(&["--seed", "8", "hsep", "--builtin", "random", "--instances", "10", "--copies", "2"]);
    let chain = |rep: &Report| {
        anchored(rep, "multiplicativity-lower").filter(|x| x.pass).count()
            + anchored(rep, "multiplicativity-upper").filter(|x| x.pass).count()
    };
    let links = chain(&s) + chain(&r);
    verdict(s.pass && r.pass && links == 22, format!("{links}/22 chain links"))
}

fn c9() -> Verdict {
    let s = run(&["--seed", "9", "repetition-bounds", "--mode", "experiment", "--builtin", "singlet", "--n-max", "3", "--q", "4", "--threshold", "3"]);
    let r = run(&[
        "--seed", "9", "repetition-bounds", "--mode", "experiment", "--builtin", "random-gapped", "--instances", "5",
        "--min-delta", "0.2", "--delta-q", "4", "--n-max", "3", "--q", "4", "--threshold", "3",
    ]);
    let power = anchored(&s, "hsep-power-vs-bound").count() + anchored(&r, "hsep-power-vs-bound").count();
    let threshold = anchored(&s, "threshold-vs-bound").count() + anchored(&r, "threshold-vs-bound").count();
    let gaps_ok = anchored(&r, "certified-gap").all(|x| param_f64(x, "delta") >= 0.2);
    let (ok, passed, total) = summarize(&[s, r]);
    verdict(
        ok && power == 12 && threshold == 6 && gaps_ok,
        format!("{passed}/{total} records, {power} power and {threshold} threshold comparisons"),
    )
}

fn c10() -> Verdict {
    let r = run(&["--seed", "10", "conditioning-demo", "--mode", "post-measurement", "--instances", "100"]);
    let worst = r.records.iter().filter_map(|x| x.gap).fold(f64::INFINITY, f64::min);
    verdict(r.pass && r.records.len() == 100, format!("100 instances, min slack {worst:.3e}"))
}

fn c11() -> Verdict {
    let mut reports = Vec::new();
    for (n, k) in [("2", "1"), ("3", "1"), ("3", "2")] {
        reports.push(run(&["--seed", "11", "conditioning-demo", "--mode", "cmi-chain", "--n", n, "--k", k, "--instances", "20"]));
    }
    let (ok, passed, total) = summarize(&reports);
    verdict(ok && reports.iter().all(|r| r.records.len() >= 20), format!("{passed}/{total} records"))
}

fn c12() -> Verdict {
    let r = run(&["--seed", "12", "repetition-bounds", "--mode", "recursion", "--sequences", "1000"]);
    let seqs = anchored(&r, "scalar-recursion").count();
    let sat = anchored(&r, "saturating-sequence").count();
    verdict(r.pass && seqs == 1000 && sat >= 1, format!("{seqs} sequences, {sat} saturating"))
}

fn c13() -> Verdict {
    let mut reports = Vec::new();
    for n in ["2", "3"] {
        reports.push(run(&["--seed", "13", "conditioning-demo", "--n", n, "--q", "2,3", "--instances", "50"]));
    }
    let finals: usize = reports.iter().map(|r| anchored(r, "conditioning-final").count()).sum();
    let (ok, passed, total) = summarize(&reports);
    verdict(ok && finals > 0, format!("{passed}/{total} records, {finals} final-probability checks"))
}

fn c14() -> Verdict {
    let d = run(&["framework", "--mode", "decay", "--delta", "0.5", "--r", "1"]);
    let root = anchored(&d, "decay-root-g").next().and_then(|x| x.value).unwrap_or(f64::NAN);
    let closed = 2.0 * (1.5f64.sqrt() - 1.0);
    let t = run(&["--seed", "14", "framework", "--mode", "threshold-tail", "--n-max", "10"]);
    let tails = run(&["framework", "--mode", "tails", "--n-max", "12"]);
    let exhaustive = anchored(&t, "threshold-binomial-tail").count();
    let ok = d.pass && (root - closed).abs() <= 1e-10 && t.pass && exhaustive > 0 && tails.pass;
    verdict(
        ok,
        format!("root error {:.3e}, {exhaustive} binomial-tail checks, {} tail rows", (root - closed).abs(), tails.records.len()),
    )
}

const DETERMINISM_RUNS: &[&[&str]] = &[
    &["--seed", "15", "verify-pinching", "--instances", "10"],
    &["--seed", "15", "verify-definetti", "--kind", "projector", "--n", "3", "--d", "2"],
    &["--seed", "15", "verify-definetti", "--kind", "pure", "--seeds", "3", "--mc-samples", "2000"],
    &["--seed", "15", "verify-definetti", "--kind", "mixed", "--seeds", "2", "--samples", "10"],
    &["--seed", "15", "verify-classical"],
    &["--seed", "15", "verify-truncated", "--n", "1", "--k", "1"],
    &["--seed", "15", "hsep", "--builtin", "random", "--instances", "2", "--copies", "2"],
    &["--seed", "15", "qext", "--builtin", "random", "--instances", "2"],
    &["--seed", "15", "repetition-bounds", "--mode", "printed", "--d", "2", "--alpha", "0.3"],
    &["--seed", "15", "repetition-bounds", "--mode", "experiment", "--builtin", "random-gapped", "--instances", "2", "--threshold", "3"],
    &["--seed", "15", "repetition-bounds", "--mode", "recursion", "--sequences", "50"],
    &["--seed", "15", "conditioning-demo", "--instances", "3", "--format", "csv"],
    &["--seed", "15", "conditioning-demo", "--mode", "post-measurement", "--instances", "5"],
    &["--seed", "15", "conditioning-demo", "--mode", "cmi-chain", "--instances", "3"],
    &["--seed", "15", "framework", "--mode", "decay"],
    &["--seed", "15", "framework", "--mode", "fidelity"],
    &["--seed", "15", "framework", "--mode", "threshold-tail", "--n-max", "6"],
    &["--seed", "15", "framework", "--mode", "tails"],
];

fn c15() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_definetti");
    let mut mismatched = Vec::new();
    for args in DETERMINISM_RUNS {
        let in_process = execute(std::iter::once("definetti").chain(args.iter().copied())).stdout;
        let mut outputs = vec![in_process.clone(), execute(std::iter::once("definetti").chain(args.iter().copied())).stdout];
        for jobs in ["1", "3"] {
            let out = Command::new(bin)
                .args(*args)
                .args(["--jobs", jobs])
                .env_remove("DEFINETTI_SEED")
                .output()
                .expect("spawn binary");
            outputs.push(String::from_utf8_lossy(&out.stdout).into_owned());
        }
        if in_process.is_empty() || outputs.iter().any(|o| *o != in_process) {
            mismatched.push(args[2]);
        }
    }
    verdict(mismatched.is_empty(), format!("{} suite runs, mismatches {mismatched:?}", DETERMINISM_RUNS.len()))
}

fn main() {
    let criteria: [fn() -> Verdict; 15] = [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13, c14, c15];
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let v = c();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2}: {tag} {} ({:.1}s)", i + 1, v.detail, start.elapsed().as_secs_f64());
        if !v.pass {
            failed += 1;
        }
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
