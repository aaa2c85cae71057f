//! Parallel-repetition suites: printed bounds, bound-versus-seesaw
//! experiments, scalar recursion, measurement conditioning and the
//! convex-constraint framework.

use super::separability::LabeledOp;
use super::{flatten, par_map, Context};
use crate::report::{exact_decimal, Record, Report};
use definetti_core::operator::random::{haar_pure, induced_mixed, random_contraction};
use definetti_core::repetition::{
    binomial_tail, bound_hsep_power, bound_sep_dim, bound_threshold, bound_threshold_dim,
    cmi_chain_check, framework_decay_from_fidelity, framework_fidelity_from_decay, hoeffding_tail,
    post_measurement_update, rational_to_f64, recursive_conditioning_demo, sample_admissible_sequence,
    saturating_sequence, scalar_recursion_bound, scalar_recursion_corollary, threshold_operator, ConstraintFamily,
    DecayProfile, Selection, ThresholdVariant, Verdict, ROOT_TOL,
};
use definetti_core::rng::stream;
use definetti_core::separability::{hqext, hsep_seesaw, BipartiteCut, SeesawOptions};
use definetti_core::{DensityMatrix, Dims, Error, HermitianOperator, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use std::fmt::Write as _;

/// Slack allowed between seesaw values and printed bounds.
const BOUND_SLACK: f64 = 1e-6;
const FINAL_TOL: f64 = 1e-8;
const ENTROPY_TOL: f64 = 1e-9;
const RATIO_TOL: f64 = 1e-10;
const CLOSED_FORM_TOL: f64 = 1e-10;
const TAIL_TOL: f64 = 1e-12;
const MATRIX_TAIL_TOL: f64 = 1e-10;
const SATURATION_TOL: f64 = 1e-12;

/// A bound parameter given as text, kept exact when it is a decimal literal.
#[derive(Clone, Debug)]
pub struct ExactParam {
    pub value: f64,
    pub exact: BigRational,
}

/// `(1 − δ²/(5r²))^n` in exact arithmetic.
pub fn exact_hsep_power(delta: &BigRational, r: &BigRational, n: usize) -> BigRational {
    let five = BigRational::from_integer(BigInt::from(5));
    let base = BigRational::one() - delta * delta / (five * r * r);
    (0..n).fold(BigRational::one(), |acc, _| acc * &base)
}

pub struct PrintedBounds<'a> {
    pub delta: &'a ExactParam,
    pub r: &'a ExactParam,
    pub n: usize,
    pub alpha: Option<&'a ExactParam>,
    pub d: Option<usize>,
}

pub fn printed_bounds(ctx: &Context, b: &PrintedBounds) -> Result<Report> {
    let (delta, r, n) = (b.delta.value, b.r.value, b.n);
    let rec = |anchor: &str| {
        Record::new("repetition-bounds", anchor, ctx.seed).param("delta", delta).param("r", r).param("n", n)
    };
    let mut records = vec![rec("bound-hsep-power")
        .value(bound_hsep_power(delta, r, n)?)
        .exact(exact_decimal(&exact_hsep_power(&b.delta.exact, &b.r.exact, n)))];
    let mut csv = String::from("n,bound_name,value,experiment_value\n");
    for k in 1..=n {
        let _ = writeln!(csv, "{k},hsep_power,{},", bound_hsep_power(delta, r, k)?);
    }
    if let Some(alpha) = b.alpha {
        records.push(rec("bound-threshold").param("alpha", alpha.value).value(bound_threshold(alpha.value, r, n)?));
        for k in 1..=n {
            let _ = writeln!(csv, "{k},threshold,{},", bound_threshold(alpha.value, r, k)?);
        }
    }
    if let Some(d) = b.d {
        records.push(rec("bound-sep-dim").param("d", d).value(bound_sep_dim(delta, d, n)?));
        for k in 1..=n {
            let _ = writeln!(csv, "{k},sep_dim,{},", bound_sep_dim(delta, d, k)?);
        }
        if let Some(alpha) = b.alpha {
            let v = bound_threshold_dim(alpha.value, delta, d, n)?;
            records.push(rec("bound-threshold-dim").param("d", d).param("alpha", alpha.value).value(v));
            for k in 1..=n {
                let _ = writeln!(csv, "{k},threshold_dim,{},", bound_threshold_dim(alpha.value, delta, d, k)?);
            }
        }
    }
    Ok(Report::new("repetition-bounds", ctx.seed, records).with_csv(csv))
}

#[derive(Clone, Debug)]
pub struct ExperimentOptions {
    pub n_max: usize,
    /// Extension order certifying `δ = 1 − h_{q-ext}(M)`.
    pub q: usize,
    /// Threshold at `n_max` copies; defaults to all of them.
    pub threshold: Option<usize>,
    pub restarts: usize,
}

/// Seesaw values of `h_sep(M^{⊗n})` and of the exact threshold operator
/// against the printed bounds with certified `δ` and `r = ‖M‖₂`.
pub fn bound_experiment(ctx: &Context, ops: &[LabeledOp], o: &ExperimentOptions) -> Result<Report> {
    let tol = ctx.tol(BOUND_SLACK);
    let opts = SeesawOptions { restarts: o.restarts, seed: ctx.seed, ..SeesawOptions::default() };
    let groups = par_map(ops.len(), |i| {
        let LabeledOp { label, op } = &ops[i];
        let delta = 1.0 - hqext(op, &BipartiteCut::two_party(), o.q, ctx.cap)?.value;
        let r = op.frobenius();
        let rec = |anchor: &str| {
            Record::new("repetition-bounds", anchor, ctx.seed)
                .param("operator", label.as_str())
                .param("delta", delta)
                .param("r", r)
                .param("q", o.q)
        };
        if !(delta > 0.0 && delta < 1.0) {
            return Ok(vec![rec("certified-gap").value(delta).pass(false).param("reason", "no certified gap")]);
        }
        let mut out = vec![rec("certified-gap").value(delta).bound(0.0).tolerance(0.0)];
        let mut rows = Vec::new();
        for n in 2..=o.n_max {
            let v = hsep_seesaw(&op.tensor_power(n), &BipartiteCut::interleaved(n), &opts)?.value;
            let bound = bound_hsep_power(delta, r, n)?;
            rows.push((n, "hsep_power", bound, v));
            out.push(rec("hsep-power-vs-bound").param("copies", n).value(v).bound(bound).at_least(bound - v, tol));
        }
        let n = o.n_max;
        let t = o.threshold.unwrap_or(n);
        let alpha = t as f64 / n as f64 - (1.0 - delta);
        if n >= 1 && alpha > 0.0 && alpha < 1.0 {
            let th = threshold_operator(op, n, t, ThresholdVariant::ExactPovm, ctx.cap)?;
            let v = hsep_seesaw(&th.op, &BipartiteCut::interleaved(n), &opts)?.value;
            let bound = bound_threshold(alpha, r, n)?;
            rows.push((n, "threshold", bound, v));
            out.push(
                rec("threshold-vs-bound")
                    .param("copies", n)
                    .param("t", t)
                    .param("alpha", alpha)
                    .value(v)
                    .bound(bound)
                    .at_least(bound - v, tol),
            );
        }
        for (n, name, bound, v) in rows {
            out.push(rec("experiment-row").param("copies", n).param("bound_name", name).value(v).bound(bound));
        }
        Ok(out)
    })?;
    let report = flatten("repetition-bounds", ctx.seed, groups);
    let mut csv = String::from("n,bound_name,value,experiment_value\n");
    for r in report.anchored("experiment-row") {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            r.param_u64("copies").unwrap_or(0),
            r.param_str("bound_name").unwrap_or(""),
            r.bound.unwrap_or(f64::NAN),
            r.value.unwrap_or(f64::NAN)
        );
    }
    Ok(report.with_csv(csv))
}

#[derive(Clone, Debug)]
pub struct RecursionOptions {
    pub sequences: usize,
    pub c_range: (f64, f64),
    pub max_n: usize,
    pub nu: f64,
    pub gamma: f64,
    pub saturating_n: usize,
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Fail { .. } => "fail",
        Verdict::NotApplicable { .. } => "not_applicable",
    }
}

pub fn recursion(ctx: &Context, o: &RecursionOptions) -> Result<Report> {
    let mut records = par_map(o.sequences, |i| {
        let s = sample_admissible_sequence(&mut stream(ctx.seed, "recursion", i as u64), o.c_range, o.max_n)?;
        let lemma = scalar_recursion_bound(&s.p, s.nu, s.c, s.gamma);
        let cor = scalar_recursion_corollary(&s.p, s.nu, s.c);
        Ok(Record::new("repetition-bounds", "scalar-recursion", ctx.seed)
            .param("sequence", i)
            .param("n", s.p.len())
            .param("nu", s.nu)
            .param("c", s.c)
            .param("gamma", s.gamma)
            .param("lemma", verdict_name(&lemma.verdict))
            .param("corollary", verdict_name(&cor.verdict))
            .param("corollary_max_ratio", cor.max_ratio)
            .value(lemma.max_ratio)
            .bound(1.0)
            .tolerance(definetti_core::repetition::BOUND_TOL)
            .pass(lemma.pass() && cor.pass()))
    })?;
    let (p, c) = saturating_sequence(o.nu, o.gamma, o.saturating_n)?;
    let lemma = scalar_recursion_bound(&p, o.nu, c, o.gamma);
    let attained = lemma.bounds.iter().zip(&p).enumerate().filter(|(k, _)| (*k + 1) as f64 <= lemma.k0);
    let equality_steps = attained.clone().count();
    let dev = attained.map(|(_, (b, v))| (b - v).abs()).fold(0.0, f64::max);
    records.push(
        Record::new("repetition-bounds", "saturating-sequence", ctx.seed)
            .param("nu", o.nu)
            .param("gamma", o.gamma)
            .param("n", o.saturating_n)
            .param("c", c)
            .param("k0", lemma.k0)
            .param("equality_steps", equality_steps)
            .param("lemma", verdict_name(&lemma.verdict))
            .value(dev)
            .bound(SATURATION_TOL)
            .tolerance(SATURATION_TOL)
            .pass(lemma.pass() && equality_steps >= 1 && dev <= SATURATION_TOL),
    );
    Ok(Report::new("repetition-bounds", ctx.seed, records))
}

/// Random two-qubit test with mixed product inputs `α ⊗ β` on `n` copies.
pub fn random_test_instance(seed: u64, index: usize, n: usize) -> Result<(HermitianOperator, DensityMatrix, DensityMatrix)> {
    let mut rng = stream(seed, "test-instance", index as u64);
    let m = random_contraction(Dims::uniform(2, 2), &mut rng)?;
    let alpha = induced_mixed(Dims::uniform(2, n), &mut rng);
    let beta = induced_mixed(Dims::uniform(2, n), &mut rng);
    Ok((m, alpha, beta))
}

pub fn selection_name(s: Selection) -> &'static str {
    match s {
        Selection::GreedyMinMi => "greedy",
        Selection::UniformRandom => "random",
    }
}

pub fn trajectories(ctx: &Context, n: usize, qs: &[usize], selections: &[Selection], instances: usize) -> Result<Report> {
    let groups = par_map(instances, |i| {
        let (m, alpha, beta) = random_test_instance(ctx.seed, i, n)?;
        let mut out = Vec::new();
        let mut rows = String::new();
        for &q in qs {
            for &sel in selections {
                let t = recursive_conditioning_demo(&m, &alpha, &beta, q, sel, ctx.seed + i as u64, ctx.cap)?;
                let rec = |anchor: &str| {
                    Record::new("conditioning-demo", anchor, ctx.seed)
                        .param("instance", i)
                        .param("n", n)
                        .param("q", q)
                        .param("selection", selection_name(sel))
                };
                let excess = t.steps.iter().map(|s| s.surrogate - s.averaged_bound).fold(f64::NEG_INFINITY, f64::max);
                out.push(
                    rec("conditioning-surrogate")
                        .value(excess)
                        .bound(0.0)
                        .tolerance(0.0)
                        .pass(t.steps.iter().all(|s| s.surrogate_ok)),
                );
                out.push(
                    rec("conditioning-final")
                        .param("truncated", t.truncated)
                        .param("qext", t.qext_value)
                        .value(t.final_p)
                        .bound(t.final_bound)
                        .at_least(t.final_bound - t.final_p, FINAL_TOL),
                );
                out.push(rec("conditioning-ratio").value(t.ratio_defect).bound(RATIO_TOL).tolerance(RATIO_TOL).pass(t.ratio_defect <= RATIO_TOL));
                for s in &t.steps {
                    let _ = writeln!(
                        rows,
                        "{i},{q},{},{},{},{},{},{},{}",
                        selection_name(sel),
                        s.k,
                        s.index,
                        s.p,
                        s.surrogate,
                        s.cmi_chain,
                        s.bound
                    );
                }
            }
        }
        Ok((out, rows))
    })?;
    let mut csv = String::from("instance,q,selection,k,i_k,p_k,surrogate,cmi_chain,bound_k\n");
    let mut records = Vec::new();
    for (recs, rows) in groups {
        records.extend(recs);
        csv.push_str(&rows);
    }
    Ok(Report::new("conditioning-demo", ctx.seed, records).with_csv(csv))
}

pub fn post_measurement(ctx: &Context, instances: usize) -> Result<Report> {
    let tol = ctx.tol(ENTROPY_TOL);
    let records = par_map(instances, |i| {
        let mut rng = stream(ctx.seed, "post-measurement", i as u64);
        let du = rng.random_range(2..=3);
        let dv = rng.random_range(2..=3);
        let rho = induced_mixed(Dims::new(vec![du, dv])?, &mut rng);
        let t = random_contraction(Dims::single(du), &mut rng)?;
        let post = post_measurement_update(&rho, &t)?;
        let rec = Record::new("conditioning-demo", "post-measurement-entropy", ctx.seed)
            .param("instance", i)
            .param("du", du)
            .param("dv", dv)
            .param("p", post.p)
            .param("form_defect", post.form_defect)
            .value(post.relative_entropy)
            .bound(post.bound)
            .at_least(post.bound - post.relative_entropy, tol);
        let pass = rec.pass && post.pass;
        Ok(rec.pass(pass))
    })?;
    Ok(Report::new("conditioning-demo", ctx.seed, records))
}

pub fn cmi_chain(ctx: &Context, n: usize, k: usize, instances: usize) -> Result<Report> {
    let records = par_map(instances, |i| {
        let (m, alpha, beta) = random_test_instance(ctx.seed, i, n)?;
        let r = cmi_chain_check(&m, &alpha, &beta, k, ctx.cap)?;
        Ok(Record::new("conditioning-demo", "cmi-chain", ctx.seed)
            .param("instance", i)
            .param("n", n)
            .param("k", k)
            .param("p_k", r.p_k)
            .param("mutual_information", r.mutual_information)
            .param("relative_entropy", r.relative_entropy)
            .param("log_inverse_p", r.log_inverse_p)
            .param("links", r.links.iter().map(|&b| serde_json::Value::Bool(b)).collect::<Vec<_>>())
            .value(r.cmi_sum)
            .bound(r.log_inverse_p)
            .tolerance(definetti_core::repetition::CHAIN_TOL)
            .pass(r.pass))
    })?;
    Ok(Report::new("conditioning-demo", ctx.seed, records))
}

/// Closed-form roots for `f(ε) = ε²/4`: `f(ε) = δ − rε` and `f(ε) = 2(α − rε)²`.
pub fn quarter_square_roots(delta: f64, r: f64, alpha: f64) -> (f64, f64) {
    let g = 2.0 * ((r * r + delta).sqrt() - r);
    let g_prime = 2.0 * std::f64::consts::SQRT_2 * alpha / (1.0 + 2.0 * std::f64::consts::SQRT_2 * r);
    (g, g_prime)
}

pub fn decay(ctx: &Context, profile: &DecayProfile, delta: f64, r: f64, alpha: f64, n: usize) -> Result<Report> {
    let tol = ctx.tol(CLOSED_FORM_TOL);
    let rep = framework_decay_from_fidelity(profile, r, delta, alpha, n)?;
    let closed = matches!(profile, DecayProfile::Power { coef, exponent } if *coef == 0.25 && *exponent == 2.0)
        .then(|| quarter_square_roots(delta, r, alpha));
    let rec = |anchor: &str| {
        Record::new("framework", anchor, ctx.seed)
            .param("delta", delta)
            .param("r", r)
            .param("alpha", alpha)
            .param("n", n)
    };
    let mut records = Vec::new();
    for (anchor, root, oracle) in [("decay-root-g", &rep.g, closed.map(|c| c.0)), ("decay-root-g-prime", &rep.g_prime, closed.map(|c| c.1))] {
        let Some(root) = root else {
            records.push(rec(anchor).param("verdict", "vacuous-bound"));
            continue;
        };
        let mut x = rec(anchor)
            .param("residual", root.residual)
            .param("rate", root.value)
            .param("iterations", root.iterations)
            .value(root.eps)
            .tolerance(tol)
            .pass(root.residual <= ROOT_TOL);
        if let Some(c) = oracle {
            let gap = (root.eps - c).abs();
            x = x.bound(c).gap(gap);
            x.pass = x.pass && gap <= tol;
        }
        records.push(x);
    }
    let mut bounds = rec("decay-bounds").param("verdict", if rep.vacuous { "vacuous-bound" } else { "decaying" });
    if let Some(v) = rep.power_bound {
        bounds = bounds.value(v);
    }
    if let Some(v) = rep.threshold_bound {
        bounds = bounds.bound(v);
    }
    records.push(bounds);
    Ok(Report::new("framework", ctx.seed, records))
}

fn qubit_basis(i: usize) -> Result<DensityMatrix> {
    DensityMatrix::basis_state(i, Dims::single(2))
}

fn qubit_pure(seed: u64, name: &str, index: usize) -> Result<DensityMatrix> {
    DensityMatrix::pure(&haar_pure(2, &mut stream(seed, name, index as u64)), Dims::single(2))
}

fn plus_state() -> Result<DensityMatrix> {
    let v = definetti_core::CVector::from_element(2, num_complex::Complex64::new(0.5f64.sqrt(), 0.0));
    DensityMatrix::pure(&v, Dims::single(2))
}

/// Named finite-atom instances followed by `random` random ones.
fn fidelity_instances(seed: u64, random: usize) -> Result<Vec<(String, Vec<DensityMatrix>, DensityMatrix)>> {
    let mut out = vec![
        ("orthogonal".to_string(), vec![qubit_basis(0)?], qubit_basis(1)?),
        ("diagonal-plus".to_string(), vec![qubit_basis(0)?, qubit_basis(1)?], plus_state()?),
    ];
    for i in 0..random {
        let atoms = vec![qubit_pure(seed, "framework-atom", 2 * i)?, qubit_pure(seed, "framework-atom", 2 * i + 1)?];
        out.push((format!("random-{i}"), atoms, qubit_pure(seed, "framework-state", i)?));
    }
    Ok(out)
}

pub fn fidelity_decay(ctx: &Context, n: usize, random: usize) -> Result<Report> {
    let instances = fidelity_instances(ctx.seed, random)?;
    let records = par_map(instances.len(), |i| {
        let (name, atoms, rho) = &instances[i];
        let family = ConstraintFamily::projective_power(atoms.clone())?;
        let r = framework_fidelity_from_decay(&family, rho, n, ctx.cap)?;
        Ok(Record::new("framework", "fidelity-decay", ctx.seed)
            .param("instance", name.as_str())
            .param("n", n)
            .param("eps", r.eps)
            .param("eta", r.eta)
            .param("alpha", r.alpha)
            .param("threshold", r.threshold)
            .param("trace_distance", r.trace_distance)
            .param("exact_bound", r.exact_bound)
            .value(r.fidelity)
            .bound(r.printed_bound)
            .gap(r.printed_bound - r.fidelity)
            .tolerance(1e-9)
            .pass(r.pass))
    })?;
    Ok(Report::new("framework", ctx.seed, records))
}

/// Support of the threshold operators over the projective power of a
/// two-atom family, by enumeration and from the exact binomial tail.
pub fn threshold_tail(ctx: &Context, instances: usize, n_max: usize, matrix_n_max: usize) -> Result<Report> {
    let groups = par_map(instances, |i| {
        let atoms = if i == 0 {
            vec![qubit_basis(0)?, plus_state()?]
        } else {
            vec![qubit_pure(ctx.seed, "tail-atom", 2 * i)?, qubit_pure(ctx.seed, "tail-atom", 2 * i + 1)?]
        };
        let family = ConstraintFamily::projective_power(atoms)?;
        let m = random_contraction(Dims::single(2), &mut stream(ctx.seed, "tail-test", i as u64))?;
        let h = family.support(&m, ctx.seed)?;
        let mut out = Vec::new();
        for n in 1..=n_max {
            let mut dev: f64 = 0.0;
            let mut dev_matrix: f64 = 0.0;
            for t in 0..=n {
                let tail = definetti_core::repetition::binomial_tail_f64(n, h, t)?;
                dev = dev.max((family.threshold_support_enumerated(&m, n, t)? - tail).abs());
                if n <= matrix_n_max {
                    dev_matrix = dev_matrix.max((family.threshold_support_matrix(&m, n, t, ctx.cap)? - tail).abs());
                }
            }
            let rec = |anchor: &str| {
                Record::new("framework", anchor, ctx.seed).param("instance", i).param("n", n).param("h", h)
            };
            out.push(rec("threshold-binomial-tail").value(dev).bound(TAIL_TOL).tolerance(TAIL_TOL).pass(dev <= TAIL_TOL));
            if n <= matrix_n_max {
                out.push(
                    rec("threshold-support-matrix")
                        .value(dev_matrix)
                        .bound(MATRIX_TAIL_TOL)
                        .tolerance(MATRIX_TAIL_TOL)
                        .pass(dev_matrix <= MATRIX_TAIL_TOL),
                );
            }
        }
        Ok(out)
    })?;
    Ok(flatten("framework", ctx.seed, groups))
}

/// Exact binomial tails against the Hoeffding bound for `t > np`,
/// `p ∈ {0.1, …, 0.9}`, `n ≤ n_max`.
pub fn tails(ctx: &Context, n_max: usize) -> Result<Report> {
    let records = par_map(n_max, |idx| {
        let n = idx + 1;
        let mut worst = f64::NEG_INFINITY;
        let mut cases = 0usize;
        for tenth in 1..=9u32 {
            let p = BigRational::new(BigInt::from(tenth), BigInt::from(10));
            for t in 0..=n {
                if 10 * t as u64 <= tenth as u64 * n as u64 {
                    continue;
                }
                cases += 1;
                let exact = rational_to_f64(&binomial_tail(n, &p, t));
                worst = worst.max(exact - hoeffding_tail(n, tenth as f64 / 10.0, t));
            }
        }
        if cases == 0 {
            return Err(Error::InvalidParameter(format!("no t > np cases at n = {n}")));
        }
        Ok(Record::new("framework", "binomial-vs-hoeffding", ctx.seed)
            .param("n", n)
            .param("cases", cases)
            .value(worst)
            .bound(0.0)
            .at_least(-worst, 0.0))
    })?;
    Ok(Report::new("framework", ctx.seed, records))
}
