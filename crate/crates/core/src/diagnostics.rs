//! Indicators of basis failure for the located eigenpairs.
//!
//! For each index `n` with two simple eigenvalues, the normalized
//! eigenfunctions are compared with each other (pair overlap), with the
//! leading harmonic (sup-norm residual), and expanded against the
//! unperturbed biorthogonal pair (`u`, `v` and the normalization identity).
//! The "basis failure evidence" flag is a fitted diagnosis, not a proof.

use crate::asymptotics::leading_estimate;
use crate::boundary::{unperturbed_system, Family, OperatorSpec};
use crate::error::{Error, Result};
use crate::exact::ExpPoly;
use crate::potential::{trapezoid_inner, TrigPotential};
use crate::solver::{eigenfunction, solve_disk, Branch, DiskSolution, EigenRecord, SolverOptions};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

type C = Complex64;

/// Grid with at least 64 points per period of the highest harmonic involved.
pub fn default_grid(spec: &OperatorSpec, q: &TrigPotential, n: u32) -> usize {
    let periods = (spec.harmonic(n) as usize).div_ceil(2) + q.degree();
    (64 * periods).max(1024)
}

fn sample(p: &ExpPoly, grid: usize) -> Vec<C> {
    let h = 1.0 / grid as f64;
    (0..=grid).map(|i| p.eval(i as f64 * h)).collect()
}

/// `u = (Ψ, E*_n)`, `v = (Ψ, Φ*_n)`.
pub fn uv_coefficients(spec: &OperatorSpec, eigfn: &[C], n: u32) -> Result<(C, C)> {
    let sys = unperturbed_system(spec, n)?;
    let grid = eigfn.len() - 1;
    let u = trapezoid_inner(eigfn, &sample(&sys.e_adj, grid))?;
    let v = trapezoid_inner(eigfn, &sample(&sys.phi_adj, grid))?;
    Ok((u, v))
}

/// Weight `a` of `|u|²` in the normalization identity `a|u|² + ½|v|² ≈ 1`:
/// the closed form `(8/3)(|β|² − Re β + 1)/|β − 1|²` for T1, `‖Φ_n‖²` otherwise.
pub fn norm_weight(spec: &OperatorSpec, n: u32) -> Result<f64> {
    if spec.family() == Family::T1 {
        return Ok(crate::boundary::t1_norm_constant(spec.parameter()));
    }
    let sys = unperturbed_system(spec, n)?;
    Ok(sys.phi.inner(&sys.phi).re)
}

pub fn norm_identity(spec: &OperatorSpec, n: u32, u: C, v: C) -> Result<f64> {
    Ok(norm_weight(spec, n)? * u.norm_sqr() + 0.5 * v.norm_sqr())
}

/// `(ψ₁, ψ₂)` on a shared grid.
pub fn pair_overlap(psi1: &[C], psi2: &[C]) -> Result<C> {
    trapezoid_inner(psi1, psi2)
}

/// `(‖Ψ − √2·harmonic‖∞, n^{1/2}·‖Ψ − √2·harmonic‖∞)`.
pub fn eigenfunction_residual(spec: &OperatorSpec, eigfn: &[C], n: u32) -> (f64, f64) {
    let lead = sample(&spec.leading_harmonic(n), eigfn.len() - 1);
    let sup = eigfn.iter().zip(&lead).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    (sup, sup * (n as f64).sqrt())
}

/// Per-branch diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchReport {
    pub record: EigenRecord,
    pub u: C,
    pub v: C,
    pub norm_identity: f64,
    pub eigfn_residual: f64,
    pub residual_scaled: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisPairReport {
    pub n: u32,
    /// Argument-principle count in the disk.
    pub count: usize,
    /// Two simple branches, or a single merged record.
    pub branches: Vec<BranchReport>,
    /// `(Ψ_{n,1}, Ψ_{n,2})`; absent when the eigenvalue is double.
    pub overlap: Option<C>,
    pub merged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evidence {
    Set,
    NotSet,
    Inconclusive,
}

/// Log-log fit of `1 − |overlap|` against `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapFit {
    /// Least-squares `C` in `1 − |overlap| ≈ C n^{−1/2}`.
    pub c_half: f64,
    /// Free slope of `log(1 − |overlap|)` against `log n`.
    pub slope: f64,
    pub r_squared: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszProfile {
    pub spec: String,
    pub reports: Vec<BasisPairReport>,
    /// Indices whose disk could not be solved, with the error.
    pub failures: Vec<(u32, String)>,
    pub fit: Option<OverlapFit>,
    pub evidence: Evidence,
    pub n_effective: Option<u32>,
}

/// Least squares `y = a + b x`; returns `(a, b, R²)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let r2 = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    (a, b, r2)
}

/// Relabels simple records by matching them to the leading-order predictions;
/// keeps the solver's ordering when the matching is ambiguous.
fn label_branches(spec: &OperatorSpec, q: &TrigPotential, sol: &DiskSolution) -> Vec<EigenRecord> {
    let recs = &sol.records;
    if recs.len() != 2 || recs.iter().any(|r| r.multiplicity != 1) {
        return recs.clone();
    }
    let est = match (leading_estimate(spec, q, sol.n, 1), leading_estimate(spec, q, sol.n, 2)) {
        (Ok(a), Ok(b)) => [a.lambda_leading, b.lambda_leading],
        _ => return recs.clone(),
    };
    match crate::asymptotics::assign_branches(recs, &est, 1e-12) {
        crate::asymptotics::BranchAssignment::Assigned { records, .. } => records,
        _ => recs.clone(),
    }
}

/// Builds the report for one solved disk.
pub fn pair_report(spec: &OperatorSpec, q: &TrigPotential, sol: &DiskSolution, grid: usize) -> Result<BasisPairReport> {
    let n = sol.n;
    let records = label_branches(spec, q, sol);
    let mut branches = Vec::new();
    let mut psis = Vec::new();
    for r in &records {
        let psi = eigenfunction(spec, q, r.lambda, n, grid)?;
        let (u, v) = uv_coefficients(spec, &psi, n)?;
        let (res, scaled) = eigenfunction_residual(spec, &psi, n);
        branches.push(BranchReport {
            record: *r,
            u,
            v,
            norm_identity: norm_identity(spec, n, u, v)?,
            eigfn_residual: res,
            residual_scaled: scaled,
        });
        psis.push(psi);
    }
    let merged = records.iter().any(|r| r.branch == Branch::Merged);
    let overlap = if psis.len() == 2 && !merged {
        Some(pair_overlap(&psis[0], &psis[1])?)
    } else {
        None
    };
    Ok(BasisPairReport {
        n,
        count: sol.count,
        branches,
        overlap,
        merged,
    })
}

/// Evidence flag and fit over a list of reports.
pub fn assess(reports: &[BasisPairReport], n_effective: Option<u32>) -> (Option<OverlapFit>, Evidence) {
    let simple: Vec<(f64, f64)> = reports
        .iter()
        .filter_map(|r| r.overlap.map(|o| (r.n as f64, 1.0 - o.norm())))
        .collect();
    if !reports.is_empty() && reports.iter().all(|r| r.merged) {
        return (None, Evidence::NotSet);
    }
    let lowest = reports.iter().map(|r| r.n).min();
    let below = match (n_effective, lowest) {
        (Some(ne), Some(lo)) => lo < ne && reports.iter().all(|r| r.n < ne),
        (None, _) => true,
        _ => false,
    };
    if below || simple.len() < 3 || simple.iter().any(|p| p.1 <= 0.0) {
        return (None, Evidence::Inconclusive);
    }
    let x: Vec<f64> = simple.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = simple.iter().map(|p| p.1.ln()).collect();
    let (_, slope, r2) = linear_fit(&x, &y);
    let c_half = (y.iter().zip(&x).map(|(yi, xi)| yi + 0.5 * xi).sum::<f64>() / x.len() as f64).exp();
    let fit = OverlapFit {
        c_half,
        slope,
        r_squared: r2,
    };
    let upper = &simple[simple.len() / 2..];
    let rising = upper.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + 1e-9));
    let evidence = if rising && slope < 0.0 && r2 >= 0.5 && c_half > 0.0 {
        Evidence::Set
    } else {
        Evidence::NotSet
    };
    (Some(fit), evidence)
}

/// Full report over `n_range`; failed disks are recorded, not fatal.
pub fn riesz_failure_profile(
    spec: &OperatorSpec,
    q: &TrigPotential,
    n_range: std::ops::RangeInclusive<u32>,
    tol: f64,
) -> Result<RieszProfile> {
    let opts = SolverOptions {
        tol,
        ..Default::default()
    };
    let ns: Vec<u32> = n_range.collect();
    let results: Vec<(u32, Result<(DiskSolution, BasisPairReport)>)> = ns
        .par_iter()
        .map(|&n| {
            let r = solve_disk(spec, q, n, &opts)
                .and_then(|sol| pair_report(spec, q, &sol, default_grid(spec, q, n)).map(|rep| (sol, rep)));
            (n, r)
        })
        .collect();
    let mut reports = Vec::new();
    let mut sols = Vec::new();
    let mut failures = Vec::new();
    for (n, r) in results {
        match r {
            Ok((sol, rep)) => {
                sols.push(sol);
                reports.push(rep);
            }
            Err(e) => failures.push((n, e.to_string())),
        }
    }
    if reports.is_empty() {
        return Err(failures
            .into_iter()
            .next()
            .map(|(_, e)| Error::NotApplicable(e))
            .unwrap_or_else(|| Error::NotApplicable("empty range".into())));
    }
    let n_effective = crate::solver::n_effective(&sols);
    let (fit, evidence) = assess(&reports, n_effective);
    Ok(RieszProfile {
        spec: spec.to_string(),
        reports,
        failures,
        fit,
        evidence,
        n_effective,
    })
}
