//! Operator-inequality suites: pinching, symmetric projector, pure, mixed,
//! classical and truncated-ambient reductions.

use super::{flatten, par_map, Context};
use crate::report::{Record, Report};
use definetti_core::info::ClassicalDistribution;
use definetti_core::operator::linalg::{digits, from_digits};
use definetti_core::operator::random::{ginibre, induced_mixed, symmetric_pure};
use definetti_core::operator::{occupation_basis, sym_dimension, sym_projector_by_average, sym_projector_by_occupation};
use definetti_core::reduction::{
    check_classical_reduction, check_mixed_reduction, check_pinching, check_pure_reduction,
    check_truncated_ambient_for, check_truncated_ambient_reduction, embed_in_ambient, monte_carlo_moment_check,
    DEFAULT_GAP_TOL,
};
use definetti_core::rng::stream;
use definetti_core::{CVector, Dims, Result};
use rand::Rng;

const PROJECTOR_TOL: f64 = 1e-10;
/// Agreement required between the `k = 0` truncated check and the pure one.
const CONSISTENCY_TOL: f64 = 1e-12;

/// Symmetric `θ` drawn for `seed`; shared by the pure and truncated suites.
pub fn pure_theta(seed: u64, n: usize, d: usize) -> Result<CVector> {
    symmetric_pure(n, d, &mut stream(seed, "pure-reduction", 0))
}

pub fn pinching(ctx: &Context, instances: usize, d_max: usize, r_max: usize) -> Result<Report> {
    let tol = ctx.tol(DEFAULT_GAP_TOL);
    let records = par_map(instances, |i| {
        let mut rng = stream(ctx.seed, "pinching", i as u64);
        let d = rng.random_range(2..=d_max.max(2));
        let r = rng.random_range(1..=r_max.max(1));
        let ops: Vec<_> = (0..r).map(|_| ginibre(d, d, &mut rng)).collect();
        let rho = induced_mixed(Dims::single(d), &mut rng);
        let c = check_pinching(&ops, &rho, tol)?;
        Ok(Record::new("verify-pinching", "pinching-inequality", ctx.seed)
            .param("instance", i)
            .param("d", d)
            .param("r", r)
            .at_least(c.gap_min_eig, tol))
    })?;
    Ok(Report::new("verify-pinching", ctx.seed, records))
}

/// Compares the permutation-average and occupation-basis projectors.
pub fn projector(ctx: &Context, n: usize, d: usize) -> Result<Report> {
    let tol = ctx.tol(PROJECTOR_TOL);
    let occ = sym_projector_by_occupation(n, d, ctx.cap)?;
    let avg = sym_projector_by_average(n, d, ctx.cap)?;
    let diff = occ.sub(&avg)?.frobenius();
    let expected = sym_dimension(n, d);
    let basis = occupation_basis(n, d).len() as u128;
    let traces = [occ.trace(), avg.trace()];
    let trace_gap = traces.iter().map(|t| (t - expected as f64).abs()).fold(0.0, f64::max);
    let rec = Record::new("verify-definetti", "symmetric-projector", ctx.seed)
        .param("n", n)
        .param("d", d)
        .param("dimension", expected.to_string())
        .param("basis_size", basis.to_string())
        .param("trace_gap", trace_gap)
        .value(diff)
        .bound(tol)
        .tolerance(tol)
        .pass(diff <= tol && basis == expected && trace_gap <= tol);
    Ok(Report::new("verify-definetti", ctx.seed, vec![rec]))
}

pub fn pure(ctx: &Context, n: usize, d: usize, seeds: usize, mc_samples: usize, sigmas: f64) -> Result<Report> {
    let tol = ctx.tol(DEFAULT_GAP_TOL);
    let mut records = par_map(seeds, |i| {
        let seed = ctx.seed + i as u64;
        let c = check_pure_reduction(&pure_theta(seed, n, d)?, n, d, ctx.cap, tol)?;
        Ok(Record::new("verify-definetti", "pure-constrained-reduction", seed)
            .param("n", n)
            .param("d", d)
            .param("prefactor", c.prefactor.to_string())
            .at_least(c.gap_min_eig, tol))
    })?;
    if mc_samples > 0 {
        let mc = monte_carlo_moment_check(&pure_theta(ctx.seed, n, d)?, n, d, mc_samples, sigmas, ctx.seed, ctx.cap)?;
        records.push(
            Record::new("verify-definetti", "moment-monte-carlo", ctx.seed)
                .param("n", n)
                .param("d", d)
                .param("samples", mc.samples)
                .param("max_abs_deviation_flat", mc.max_abs_deviation_flat)
                .value(mc.max_z)
                .bound(mc.sigmas)
                .tolerance(0.0)
                .pass(mc.pass),
        );
    }
    Ok(Report::new("verify-definetti", ctx.seed, records))
}

pub fn mixed(ctx: &Context, n: usize, d: usize, seeds: usize, samples: usize) -> Result<Report> {
    let tol = ctx.tol(DEFAULT_GAP_TOL);
    let groups = par_map(seeds, |i| {
        let seed = ctx.seed + i as u64;
        let r = check_mixed_reduction(n, d, seed, samples, ctx.cap, tol)?;
        Ok(vec![
            Record::new("verify-definetti", "mixed-constrained-reduction", seed)
                .param("n", n)
                .param("d", d)
                .param("prefactor", r.check.prefactor.to_string())
                .param("twirl_defect", r.twirl_defect)
                .at_least(r.check.gap_min_eig, tol),
            Record::new("verify-definetti", "fidelity-domination", seed)
                .param("n", n)
                .param("d", d)
                .param("samples", r.domination_samples)
                .at_least(r.domination_min_margin, tol),
        ])
    })?;
    Ok(flatten("verify-definetti", ctx.seed, groups))
}

/// Uniform, point-mass and symmetrized single-excitation distributions.
pub fn classical_distributions(n: usize, d: usize) -> Result<Vec<(&'static str, ClassicalDistribution)>> {
    let total = d.pow(n as u32);
    let mut point = vec![0.0; total];
    point[0] = 1.0;
    let local = vec![d; n];
    let excited: Vec<f64> = (0..total)
        .map(|x| {
            let ds = digits(x, &local);
            let ones = ds.iter().filter(|&&v| v == 1).count();
            let zeros = ds.iter().filter(|&&v| v == 0).count();
            if ones == 1 && zeros == n - 1 {
                1.0 / n as f64
            } else {
                0.0
            }
        })
        .collect();
    Ok(vec![
        ("uniform", ClassicalDistribution::uniform(total)),
        ("point-mass", ClassicalDistribution::new(point)?),
        ("symmetrized-string", ClassicalDistribution::new(excited)?),
    ])
}

pub fn classical(ctx: &Context, n: usize, d: usize) -> Result<Report> {
    let tol = ctx.tol(DEFAULT_GAP_TOL);
    let mut records = Vec::new();
    for (name, p) in classical_distributions(n, d)? {
        let r = check_classical_reduction(&p, n, d, ctx.cap, tol)?;
        records.push(
            Record::new("verify-classical", "classical-reduction", ctx.seed)
                .param("distribution", name)
                .param("n", n)
                .param("d", d)
                .param("strings", r.points.len())
                .param("prefactor", r.prefactor.clone())
                .at_least(r.min_slack, tol),
        );
    }
    Ok(Report::new("verify-classical", ctx.seed, records))
}

/// For `k > 0` runs the truncated-ambient check; for `k = 0` embeds the pure
/// suite's `θ` and compares both checks entry by entry.
pub fn truncated(ctx: &Context, n: usize, k: usize, d: usize, big_d: usize, seeds: usize) -> Result<Report> {
    let tol = ctx.tol(DEFAULT_GAP_TOL);
    let records = par_map(seeds, |i| {
        let seed = ctx.seed + i as u64;
        let base = Record::new("verify-truncated", "truncated-ambient-reduction", seed)
            .param("n", n)
            .param("k", k)
            .param("d", d)
            .param("big_d", big_d);
        if k > 0 {
            let c = check_truncated_ambient_reduction(n, k, d, big_d, seed, ctx.cap, tol)?;
            return Ok(base.param("prefactor", c.prefactor.to_string()).at_least(c.gap_min_eig, tol));
        }
        let theta = pure_theta(seed, n, d)?;
        let pure = check_pure_reduction(&theta, n, d, ctx.cap, tol)?;
        let big = embed_in_ambient(&theta, n, d, big_d);
        let trunc = check_truncated_ambient_for(&big, n, 0, d, big_d, ctx.cap, tol)?;
        let small = vec![d; n];
        let large = vec![big_d; n];
        let side = d.pow(n as u32);
        let mut dev: f64 = 0.0;
        for a in 0..side {
            for b in 0..side {
                let (fa, fb) = (from_digits(&digits(a, &small), &large), from_digits(&digits(b, &small), &large));
                dev = dev.max((trunc.rhs.matrix()[(fa, fb)] - pure.rhs.matrix()[(a, b)]).norm());
            }
        }
        dev = dev.max((trunc.rhs.trace() - pure.rhs.trace()).abs());
        let gap_dev = (trunc.gap_min_eig - pure.gap_min_eig.min(0.0)).abs();
        let same_prefactor = trunc.prefactor == pure.prefactor;
        let mut rec = Record::new("verify-truncated", "truncated-k0-consistency", seed)
            .param("n", n)
            .param("d", d)
            .param("big_d", big_d)
            .param("pure_gap", pure.gap_min_eig)
            .param("truncated_gap", trunc.gap_min_eig)
            .param("gap_deviation", gap_dev)
            .param("same_prefactor", same_prefactor)
            .value(dev)
            .bound(CONSISTENCY_TOL)
            .tolerance(CONSISTENCY_TOL);
        rec.pass = dev <= CONSISTENCY_TOL && gap_dev <= CONSISTENCY_TOL && same_prefactor && pure.pass && trunc.pass;
        Ok(rec)
    })?;
    Ok(Report::new("verify-truncated", ctx.seed, records))
}
