use num::complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{build_sphere_rule, sphere_sample, FunctionSampler, Side};
use crate::zspace::geometry::{norm, sample_centres};
use crate::zspace::report::PairRecord;

pub const FLAG_DECAY_VIOLATED: &str = "decay hypothesis violated";
pub const FLAG_DECAY_MISSING: &str = "decay metadata missing";
pub const FLAG_NO_SUPPORT: &str = "no support detected <= r_max";

#[derive(Clone, Debug, PartialEq)]
pub struct SupportJob {
    pub r_max: f64,
    pub step: f64,
    pub centre_count: usize,
    pub centre_max: f64,
    /// `s = r + |z| + offset`.
    pub offsets: Vec<f64>,
    pub tol: f64,
    pub order: usize,
    pub seed: u64,
    pub lambda: f64,
    /// Width of the shell beyond `r̂` where `f` is probed.
    pub probe_width: f64,
}

impl Default for SupportJob {
    fn default() -> Self {
        Self {
            r_max: 3.0,
            step: 0.05,
            centre_count: 6,
            centre_max: 1.0,
            offsets: vec![0.02, 0.1, 0.3, 0.7],
            tol: 1e-8,
            order: 24,
            seed: 0,
            lambda: 1.0,
            probe_width: 1.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusRow {
    pub r: f64,
    pub max_abs_mean: f64,
    pub scale: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupportReport {
    pub kind: &'static str,
    pub n: usize,
    pub lambda: f64,
    pub step: f64,
    pub r_max: f64,
    /// `None` when no grid radius passes.
    pub r_hat: Option<f64>,
    pub rows: Vec<RadiusRow>,
    /// Pairs whose mean exceeded the tolerance at radii below `r̂`.
    pub violating_pairs: Vec<PairRecord>,
    /// Largest `|f|` found beyond `r̂ + step`.
    pub beyond_sup: f64,
    pub flags: Vec<String>,
}

impl SupportReport {
    pub fn has_flag(&self, prefix: &str) -> bool {
        self.flags.iter().any(|f| f.starts_with(prefix))
    }

    /// 0 support found and clean, 2 no support, 3 a decay flag was raised.
    pub fn exit_code(&self) -> i32 {
        if self.r_hat.is_none() {
            2
        } else if self.has_flag(FLAG_DECAY_VIOLATED) || self.has_flag(FLAG_DECAY_MISSING) {
            3
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Weight {
    /// `|z|^k e^{|z|²/4} |f(z)| <= C_k`
    Gaussian,
    /// `|x|^k |g(x)| <= C_k`
    Polynomial,
}

/// Smallest grid radius `r` with vanishing twisted means on every sampled
/// sphere `S_s(z)`, `s > r + |z|`, for this and all larger grid radii.
pub fn support_radius(f: &(impl FunctionSampler + ?Sized), job: &SupportJob) -> Result<SupportReport> {
    run(f, job, Side::Right, Weight::Gaussian)
}

/// Euclidean analogue with plain sphere means and polynomial decay.
pub fn helgason_support_check(g: &(impl FunctionSampler + ?Sized), job: &SupportJob) -> Result<SupportReport> {
    run(g, job, Side::Euclidean, Weight::Polynomial)
}

fn run(f: &(impl FunctionSampler + ?Sized), job: &SupportJob, side: Side, weight: Weight) -> Result<SupportReport> {
    if !(job.step > 0.0) || !(job.r_max >= 0.0) || job.offsets.is_empty() || job.offsets.iter().any(|o| !(*o > 0.0)) {
        return Err(Error::Contract("support job needs step > 0, r_max >= 0 and positive offsets".into()));
    }
    let n = f.n();
    let rule = build_sphere_rule(n, 1.0, job.order)?;
    let steps = (job.r_max / job.step).round() as usize;
    let radii: Vec<f64> = (0..=steps).map(|k| (k as f64 * job.step * 1e9).round() / 1e9).collect();
    let centres = sample_centres(n, job.centre_count, job.centre_max, job.seed);
    let mut jobs = Vec::new();
    for (ri, r) in radii.iter().enumerate() {
        for z in &centres {
            for off in &job.offsets {
                jobs.push((ri, z.clone(), r + norm(z) + off));
            }
        }
    }
    let lambda = if side == Side::Euclidean { 0.0 } else { job.lambda };
    let records: Vec<Result<(usize, PairRecord)>> = jobs
        .par_iter()
        .map(|(ri, z, s)| {
            let sample = sphere_sample(f, z, lambda, &rule.scaled(*s), side)?;
            Ok((*ri, PairRecord::new(z, *s, side, sample.value, sample.sup_abs)))
        })
        .collect();
    let mut per_radius: Vec<Vec<PairRecord>> = vec![Vec::new(); radii.len()];
    for rec in records {
        let (ri, pr) = rec?;
        per_radius[ri].push(pr);
    }
    let rows: Vec<RadiusRow> = radii
        .iter()
        .zip(&per_radius)
        .map(|(&r, recs)| {
            let max_abs_mean = recs.iter().map(PairRecord::abs_mean).fold(0.0, f64::max);
            let scale = recs.iter().map(|p| p.sphere_sup).fold(0.0, f64::max);
            RadiusRow { r, max_abs_mean, scale, pass: max_abs_mean <= job.tol * scale }
        })
        .collect();
    let mut first_pass = None;
    for (i, row) in rows.iter().enumerate().rev() {
        if !row.pass {
            break;
        }
        first_pass = Some(i);
    }
    let r_hat = first_pass.map(|i| radii[i]);
    let mut flags = Vec::new();
    let mut violating_pairs = Vec::new();
    let mut beyond_sup = 0.0;
    match first_pass {
        None => flags.push(format!("{FLAG_NO_SUPPORT} = {}", job.r_max)),
        Some(i) => {
            for (row, recs) in rows[..i].iter().zip(&per_radius[..i]) {
                violating_pairs.extend(recs.iter().filter(|p| p.abs_mean() > job.tol * row.scale).cloned());
            }
            let global = rows.iter().map(|r| r.scale).fold(0.0, f64::max);
            let probe = probe_beyond(f, radii[i] + job.step, job.probe_width)?;
            beyond_sup = probe.iter().map(|(_, v)| *v).fold(0.0, f64::max);
            if beyond_sup > job.tol * global {
                flags.push(format!(
                    "{FLAG_DECAY_VIOLATED}: sphere means vanish beyond r = {} but |f| reaches {beyond_sup:e} outside that radius",
                    radii[i]
                ));
            }
            match f.decay() {
                None => flags.push(FLAG_DECAY_MISSING.to_string()),
                Some(bounds) => {
                    for &(k, c) in &bounds.constants {
                        let worst = probe
                            .iter()
                            .map(|(rho, v)| {
                                let w = match weight {
                                    Weight::Gaussian => (rho * rho / 4.0).exp(),
                                    Weight::Polynomial => 1.0,
                                };
                                rho.powi(k as i32) * w * v
                            })
                            .fold(0.0, f64::max);
                        if worst > c * (1.0 + 1e-9) {
                            flags.push(format!("{FLAG_DECAY_VIOLATED}: bound C_{k} = {c:e} exceeded ({worst:e})"));
                        }
                    }
                }
            }
        }
    }
    Ok(SupportReport {
        kind: if side == Side::Euclidean { "euclidean support" } else { "support" },
        n,
        lambda,
        step: job.step,
        r_max: job.r_max,
        r_hat,
        rows,
        violating_pairs,
        beyond_sup,
        flags,
    })
}

/// `(|z|, |f(z)|)` on a shell of radii in `[from, from + width]`.
fn probe_beyond(f: &(impl FunctionSampler + ?Sized), from: f64, width: f64) -> Result<Vec<(f64, f64)>> {
    let rule = build_sphere_rule(f.n(), 1.0, 6)?;
    let mut out = Vec::new();
    for k in 0..8 {
        let rho = from + width * (k as f64 + 0.5) / 8.0;
        for i in 0..rule.len() {
            let x: Vec<Complex64> = rule.node(i).iter().map(|c| c * rho).collect();
            let v = f.eval(&x).map_err(|message| Error::Sampler { point: x, message })?;
            out.push((rho, v.norm()));
        }
    }
    Ok(out)
}
