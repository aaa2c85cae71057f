//! Separability support-function suites: seesaw values, product-state grid,
//! extendibility upper bounds, multiplicativity and certificates.

use super::{flatten, par_map, Context};
use crate::report::{Record, Report};
use definetti_core::operator::random::random_contraction;
use definetti_core::rng::stream;
use definetti_core::separability::{
    hqext, hsep_certified_interval, hsep_seesaw, max_fidelity_to_sep, recheck, BipartiteCut, Certificate,
    FwOptions, SeesawOptions,
};
use definetti_core::{CVector, DensityMatrix, Dims, Error, HermitianOperator, Result};
use num_complex::Complex64;
use rand::Rng;
use std::path::{Path, PathBuf};

/// Slack for comparing a lower and an upper bound on the same optimum.
const ORDER_TOL: f64 = 1e-9;
const CHAIN_TOL: f64 = 1e-8;
const MAX_GAPPED_DRAWS: usize = 10_000;

/// A test operator and the name it is reported under.
#[derive(Clone, Debug)]
pub struct LabeledOp {
    pub label: String,
    pub op: HermitianOperator,
}

/// Projector onto `(|01> − |10>)/√2`.
pub fn singlet() -> HermitianOperator {
    let mut v = CVector::zeros(4);
    v[1] = Complex64::new(0.5f64.sqrt(), 0.0);
    v[2] = Complex64::new(-(0.5f64.sqrt()), 0.0);
    HermitianOperator::projector(&v, Dims::uniform(2, 2)).expect("unit vector")
}

/// Random two-qubit contractions with top eigenvalue one.
pub fn random_ops(seed: u64, count: usize) -> Result<Vec<LabeledOp>> {
    (0..count)
        .map(|i| {
            let op = random_contraction(Dims::uniform(2, 2), &mut stream(seed, "random-op", i as u64))?;
            Ok(LabeledOp { label: format!("random-{i}"), op })
        })
        .collect()
}

/// Scaled random contractions kept only when `1 − h_{q-ext}(M) ≥ min_delta`.
pub fn random_gapped_ops(ctx: &Context, count: usize, min_delta: f64, q: usize) -> Result<Vec<LabeledOp>> {
    let mut out = Vec::with_capacity(count);
    for draw in 0..MAX_GAPPED_DRAWS {
        if out.len() == count {
            return Ok(out);
        }
        let mut rng = stream(ctx.seed, "random-gapped-op", draw as u64);
        let scale: f64 = rng.random_range(0.3..0.9);
        let op = random_contraction(Dims::uniform(2, 2), &mut rng)?.scale(scale);
        let delta = 1.0 - hqext(&op, &BipartiteCut::two_party(), q, ctx.cap)?.value;
        if delta >= min_delta {
            out.push(LabeledOp { label: format!("random-gapped-{draw}"), op });
        }
    }
    Err(Error::NotConverged(MAX_GAPPED_DRAWS))
}

/// `max_a max_b <a⊗b|M|a⊗b>` with `a` on a Bloch-sphere grid of the given
/// angular step and `b` optimized in closed form. Qubit pairs only.
pub fn product_grid_value(m: &HermitianOperator, step_deg: f64) -> Option<f64> {
    if m.dims().factors() != [2, 2] || step_deg <= 0.0 {
        return None;
    }
    let mat = m.matrix();
    let polar = (180.0 / step_deg).round() as usize;
    let azimuth = (360.0 / step_deg).round() as usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=polar {
        let theta = (i as f64 * step_deg).to_radians();
        for j in 0..azimuth.max(1) {
            let phi = (j as f64 * step_deg).to_radians();
            let a = [Complex64::new((theta / 2.0).cos(), 0.0), Complex64::from_polar((theta / 2.0).sin(), phi)];
            let mut b = [[Complex64::new(0.0, 0.0); 2]; 2];
            for (k, row) in b.iter_mut().enumerate() {
                for (l, entry) in row.iter_mut().enumerate() {
                    for (x, ax) in a.iter().enumerate() {
                        for (y, ay) in a.iter().enumerate() {
                            *entry += ax.conj() * ay * mat[(2 * x + k, 2 * y + l)];
                        }
                    }
                }
            }
            let mean = (b[0][0].re + b[1][1].re) / 2.0;
            let half = (b[0][0].re - b[1][1].re) / 2.0;
            best = best.max(mean + (half * half + b[0][1].norm_sqr()).sqrt());
        }
    }
    Some(best)
}

#[derive(Clone, Debug)]
pub struct HsepOptions {
    pub restarts: usize,
    pub q_max: usize,
    /// Also examine `M^{⊗copies}` across the regrouped cut when above one.
    pub copies: usize,
    /// Angular step of the product grid in degrees; zero disables it.
    pub grid_deg: f64,
    pub cert_out: Option<PathBuf>,
    pub fw_cert_out: Option<PathBuf>,
}

fn indexed_path(path: &Path, index: usize, total: usize) -> PathBuf {
    if total == 1 {
        return path.to_path_buf();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}.{index}{ext}"))
}

fn write_certificate(cert: &Certificate, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(cert)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn hsep(ctx: &Context, ops: &[LabeledOp], o: &HsepOptions) -> Result<Report> {
    let tol = ctx.tol(ORDER_TOL);
    let cut = BipartiteCut::two_party();
    let opts = SeesawOptions { restarts: o.restarts, seed: ctx.seed, ..SeesawOptions::default() };
    let groups = par_map(ops.len(), |i| {
        let LabeledOp { label, op } = &ops[i];
        let rec = |anchor: &str| Record::new("hsep", anchor, ctx.seed).param("operator", label.as_str());
        let single = hsep_seesaw(op, &cut, &opts)?;
        let mut out = vec![rec("hsep-seesaw")
            .param("restarts", o.restarts)
            .param("converged", single.converged)
            .value(single.value)
            .tolerance(tol)];
        let iv = hsep_certified_interval(op, &cut, o.q_max, &opts, ctx.cap)?;
        out.push(
            rec("hsep-certified-interval")
                .param("q_used", iv.q_used)
                .param("q_max", iv.q_max)
                .value(iv.lower)
                .bound(iv.upper)
                .at_least(iv.upper - iv.lower, tol),
        );
        if let Some(grid) = product_grid_value(op, o.grid_deg) {
            out.push(
                rec("product-grid")
                    .param("step_deg", o.grid_deg)
                    .param("seesaw", single.value)
                    .value(grid)
                    .bound(single.value)
                    .at_least(single.value - grid, tol),
            );
        }
        if o.copies > 1 {
            let k = o.copies;
            let power = op.tensor_power(k);
            let multi = hsep_seesaw(&power, &BipartiteCut::interleaved(k), &opts)?;
            let lower = single.value.powi(k as i32);
            out.push(
                rec("multiplicativity-lower")
                    .param("copies", k)
                    .value(multi.value)
                    .bound(lower)
                    .at_least(multi.value - lower, CHAIN_TOL),
            );
            out.push(
                rec("multiplicativity-upper")
                    .param("copies", k)
                    .param("q_used", iv.q_used)
                    .value(multi.value)
                    .bound(iv.upper)
                    .at_least(iv.upper - multi.value, CHAIN_TOL),
            );
        }
        if let Some(path) = &o.cert_out {
            write_certificate(&Certificate::from_seesaw(op, &cut, &single), &indexed_path(path, i, ops.len()))?;
        }
        if let Some(path) = &o.fw_cert_out {
            let rho = DensityMatrix::normalize(op.clone())?;
            let mix = max_fidelity_to_sep(&rho, &cut, &FwOptions { seed: ctx.seed, ..FwOptions::default() })?;
            out.push(
                rec("fw-fidelity")
                    .param("atoms", mix.atoms.len())
                    .param("converged", mix.converged)
                    .param("duality_gap", mix.gap)
                    .value(mix.value)
                    .tolerance(tol),
            );
            write_certificate(&Certificate::from_fidelity(&rho, &cut, &mix), &indexed_path(path, i, ops.len()))?;
        }
        Ok(out)
    })?;
    Ok(flatten("hsep", ctx.seed, groups))
}

pub fn qext(ctx: &Context, ops: &[LabeledOp], qs: &[usize], restarts: usize) -> Result<Report> {
    let tol = ctx.tol(ORDER_TOL);
    let cut = BipartiteCut::two_party();
    let opts = SeesawOptions { restarts, seed: ctx.seed, ..SeesawOptions::default() };
    let groups = par_map(ops.len(), |i| {
        let LabeledOp { label, op } = &ops[i];
        let rec = |anchor: &str| Record::new("qext", anchor, ctx.seed).param("operator", label.as_str());
        let lower = hsep_seesaw(op, &cut, &opts)?.value;
        let mut values = Vec::with_capacity(qs.len());
        let mut out = Vec::new();
        for &q in qs {
            let v = hqext(op, &cut, q, ctx.cap)?.value;
            values.push(v);
            out.push(rec("qext").param("q", q).value(v).tolerance(tol));
            out.push(rec("qext-dominates-seesaw").param("q", q).value(v).bound(lower).at_least(v - lower, tol));
        }
        let steps: Vec<f64> = values.windows(2).map(|w| w[0] - w[1]).collect();
        let min_step = steps.iter().copied().fold(f64::INFINITY, f64::min);
        out.push(
            rec("qext-nonincreasing")
                .param("strict", steps.iter().all(|&s| s > tol))
                .value(if steps.is_empty() { 0.0 } else { min_step })
                .at_least(if steps.is_empty() { 0.0 } else { min_step }, tol),
        );
        Ok(out)
    })?;
    Ok(flatten("qext", ctx.seed, groups))
}

pub fn recheck_certificate(ctx: &Context, cert: &Certificate, source: &str) -> Result<Report> {
    let kind = match cert {
        Certificate::ProductValue { .. } => "product_value",
        Certificate::FidelityMixture { .. } => "fidelity_mixture",
        Certificate::DistanceMixture { .. } => "distance_mixture",
    };
    let c = recheck(cert)?;
    let mut rec = Record::new("recheck-certificate", "certificate-recheck", ctx.seed)
        .param("source", source)
        .param("kind", kind)
        .param("weight_sum", c.weight_sum)
        .param("min_weight", c.min_weight)
        .value(c.recomputed)
        .bound(c.claimed)
        .gap((c.recomputed - c.claimed).abs())
        .tolerance(definetti_core::separability::RECHECK_TOL)
        .pass(c.pass);
    if let Some(reason) = c.reason {
        rec = rec.param("reason", reason);
    }
    Ok(Report::new("recheck-certificate", ctx.seed, vec![rec]))
}
