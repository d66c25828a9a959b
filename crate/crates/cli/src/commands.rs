use crate::table::{fmt_f64, fmt_opt, Table};
use crate::{complex_pair, CliError, Format, Report, RunConfig};
use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::Serialize;
use sl_spectra::asymptotics::{
    assign_branches, default_cutoff, leading_estimate, refine_with, AsymptoticEstimate, BranchAssignment, SeriesContext,
};
use sl_spectra::diagnostics::{linear_fit, riesz_failure_profile, Evidence};
use sl_spectra::solver::{hausdorff, solve_range, Branch, DiskSolution, EigenRecord, SolverOptions};

fn solver_options(cfg: &RunConfig) -> SolverOptions {
    SolverOptions {
        tol: cfg.tol,
        ..Default::default()
    }
}

/// Keeps successful disks; failures abort unless `--partial`.
fn collect_disks(
    results: Vec<(u32, sl_spectra::Result<DiskSolution>)>,
    cfg: &RunConfig,
    label: &str,
    messages: &mut Vec<String>,
) -> Result<Vec<DiskSolution>, CliError> {
    let mut out = Vec::new();
    for (n, r) in results {
        match r {
            Ok(s) => out.push(s),
            Err(e) if cfg.partial => messages.push(format!("warning: skipped {label} disk n = {n}: {e}")),
            Err(e) => return Err(CliError::Numeric(format!("{label} disk n = {n}: {e}"))),
        }
    }
    Ok(out)
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct SpectrumRow {
    n: u32,
    j: Branch,
    lambda: [f64; 2],
    multiplicity: u32,
    residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_deviation: Option<f64>,
}

/// Eigenvalues per disk, optionally against the periodic or antiperiodic
/// spectrum of the same potential.
pub fn spectrum(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut messages = Vec::new();
    let opts = solver_options(cfg);
    let range = cfg.n_min..=cfg.n_max;
    let disks = collect_disks(
        solve_range(&cfg.spec, &cfg.potential, range.clone(), &opts),
        cfg,
        &cfg.spec.to_string(),
        &mut messages,
    )?;
    let reference = match cfg.compare {
        Some(r) => {
            let spec = r.spec();
            let sols = collect_disks(
                solve_range(&spec, &cfg.potential, range, &opts),
                cfg,
                &spec.to_string(),
                &mut messages,
            )?;
            Some(sols)
        }
        None => None,
    };

    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for d in &disks {
        let deviation = reference.as_ref().and_then(|refs| {
            refs.iter().find(|r| r.n == d.n).map(|r| {
                let a: Vec<C> = d.records.iter().map(|x| x.lambda).collect();
                let b: Vec<C> = r.records.iter().map(|x| x.lambda).collect();
                hausdorff(&a, &b)
            })
        });
        if let Some(v) = deviation {
            worst = worst.max(v);
        }
        for r in &d.records {
            rows.push(SpectrumRow {
                n: d.n,
                j: r.branch,
                lambda: complex_pair(r.lambda),
                multiplicity: r.multiplicity,
                residual: r.residual,
                max_deviation: deviation,
            });
        }
        if d.count != d.expected {
            messages.push(format!(
                "note: disk n = {} holds {} zeros (expected {})",
                d.n, d.count, d.expected
            ));
        }
    }
    if let Some(r) = cfg.compare {
        messages.push(format!("max per-disk deviation from {}: {worst:.3e}", r.spec()));
    }

    let body = match cfg.format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut header = vec!["n", "j", "re_lambda", "im_lambda", "multiplicity", "residual"];
            if cfg.compare.is_some() {
                header.push("max_deviation");
            }
            let mut t = Table::new(header);
            for r in &rows {
                let mut row = vec![
                    r.n.to_string(),
                    r.j.to_string(),
                    fmt_f64(r.lambda[0]),
                    fmt_f64(r.lambda[1]),
                    r.multiplicity.to_string(),
                    fmt_f64(r.residual),
                ];
                if cfg.compare.is_some() {
                    row.push(fmt_opt(r.max_deviation));
                }
                t.push(row);
            }
            t.to_csv_string()
        }
    };
    Ok(Report { body, messages })
}

#[derive(Serialize)]
struct RefinedColumn {
    order: usize,
    lambda: Option<[f64; 2]>,
    gap: Option<f64>,
}

#[derive(Serialize)]
struct CompareRow {
    n: u32,
    j: u8,
    lambda: Option<[f64; 2]>,
    merged: bool,
    leading: [f64; 2],
    gap_leading: Option<f64>,
    /// `|λ − base| / |leading offset|`; 1 when the leading formula is exact.
    relative_gap: Option<f64>,
    refined: Vec<RefinedColumn>,
    applicable: bool,
    reason: Option<String>,
}

/// Solver eigenvalue matched to branch `j`.
fn matched_records(records: &[EigenRecord], leading: [C; 2]) -> ([Option<C>; 2], bool) {
    match records {
        [r] if r.multiplicity == 2 => ([Some(r.lambda); 2], true),
        [a, b] => match assign_branches(records, &leading, 0.0) {
            BranchAssignment::Assigned { records, .. } => ([Some(records[0].lambda), Some(records[1].lambda)], false),
            _ => ([Some(a.lambda), Some(b.lambda)], false),
        },
        _ => {
            // Unexpected count: nearest record per branch.
            let near = |t: C| {
                records
                    .iter()
                    .min_by(|x, y| (x.lambda - t).norm().total_cmp(&(y.lambda - t).norm()))
                    .map(|r| r.lambda)
            };
            ([near(leading[0]), near(leading[1])], false)
        }
    }
}

fn compare_disk(
    cfg: &RunConfig,
    ctx: &SeriesContext,
    disk: &DiskSolution,
    messages: &mut Vec<String>,
) -> Result<Vec<CompareRow>, CliError> {
    let (spec, q, n) = (&cfg.spec, &cfg.potential, disk.n);
    let lead = |j| leading_estimate(spec, q, n, j).map_err(|e| CliError::Config(e.to_string()));
    let est: [AsymptoticEstimate; 2] = [lead(1)?, lead(2)?];
    let (lambdas, merged) = matched_records(&disk.records, [est[0].lambda_leading, est[1].lambda_leading]);
    let base = C::new(spec.base_eigenvalue(n), 0.0);
    let cutoff = cfg.cutoff.unwrap_or_else(|| default_cutoff(q, n));
    let mut rows = Vec::new();
    for (idx, e) in est.iter().enumerate() {
        let j = idx as u8 + 1;
        let lambda = lambdas[idx];
        let offset = (e.lambda_leading - base).norm();
        let mut refined = Vec::new();
        for order in 1..=cfg.order {
            let r = refine_with(ctx, q, n, j, order, cutoff, cfg.fp_tol, 200);
            let value = match r {
                Ok(est) => est.lambda_refined,
                Err(err) => {
                    messages.push(format!("warning: n = {n}, j = {j}, order {order}: {err}"));
                    None
                }
            };
            refined.push(RefinedColumn {
                order,
                lambda: value.map(complex_pair),
                gap: value.zip(lambda).map(|(v, l)| (v - l).norm()),
            });
        }
        rows.push(CompareRow {
            n,
            j,
            lambda: lambda.map(complex_pair),
            merged,
            leading: complex_pair(e.lambda_leading),
            gap_leading: lambda.map(|l| (l - e.lambda_leading).norm()),
            relative_gap: lambda.filter(|_| offset > 0.0).map(|l| (l - base).norm() / offset),
            refined,
            applicable: e.applicable,
            reason: e.reason.clone(),
        });
    }
    Ok(rows)
}

/// `(slope, R²)` of `log gap` against `log n` over positive gaps.
fn gap_rate(points: &[(u32, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, g)| *n > 0 && *g > 0.0 && g.is_finite())
        .map(|(n, g)| ((*n as f64).ln(), g.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (_, slope, r2) = linear_fit(&x, &y);
    Some((slope, r2))
}

/// Solver eigenvalues against the leading and refined asymptotic estimates.
pub fn compare(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut messages = Vec::new();
    let (spec, q) = (&cfg.spec, &cfg.potential);
    let k_max = cfg.cutoff.unwrap_or_else(|| default_cutoff(q, cfg.n_max));
    let ctx = SeriesContext::new(spec, q, k_max).map_err(|e| CliError::Config(e.to_string()))?;
    let disks = collect_disks(
        solve_range(spec, q, cfg.n_min..=cfg.n_max, &solver_options(cfg)),
        cfg,
        &spec.to_string(),
        &mut messages,
    )?;
    type DiskRows = (Vec<String>, Result<Vec<CompareRow>, CliError>);
    let per_disk: Vec<DiskRows> = disks
        .par_iter()
        .map(|d| {
            let mut msgs = Vec::new();
            let rows = compare_disk(cfg, &ctx, d, &mut msgs);
            (msgs, rows)
        })
        .collect();
    let mut rows = Vec::new();
    for (msgs, r) in per_disk {
        messages.extend(msgs);
        rows.extend(r?);
    }

    let lead_pts: Vec<(u32, f64)> = rows.iter().filter_map(|r| r.gap_leading.map(|g| (r.n, g))).collect();
    let mut summary = match gap_rate(&lead_pts) {
        Some((s, r2)) => format!("summary: |λ − leading| ~ n^{s:.3} (R² = {r2:.3})"),
        None => "summary: too few rows to fit the leading gap".to_string(),
    };
    for order in 1..=cfg.order {
        let pts: Vec<(u32, f64)> = rows
            .iter()
            .filter_map(|r| r.refined[order - 1].gap.map(|g| (r.n, g)))
            .collect();
        if let Some((s, r2)) = gap_rate(&pts) {
            summary.push_str(&format!("; order {order}: ~ n^{s:.3} (R² = {r2:.3})"));
        }
    }
    let inapplicable = rows.iter().filter(|r| !r.applicable).count();
    summary.push_str(&format!("; {inapplicable}/{} rows flagged inapplicable", rows.len()));
    messages.push(summary);

    let body = match cfg.format {
        Format::Json => json(&rows),
        Format::Csv => {
            let mut header: Vec<String> = [
                "n",
                "j",
                "re_lambda",
                "im_lambda",
                "merged",
                "re_leading",
                "im_leading",
                "gap_leading",
                "relative_gap",
            ]
            .map(String::from)
            .to_vec();
            for o in 1..=cfg.order {
                header.extend([
                    format!("re_refined_{o}"),
                    format!("im_refined_{o}"),
                    format!("gap_refined_{o}"),
                ]);
            }
            header.extend(["applicable".to_string(), "reason".to_string()]);
            let mut t = Table::new(header);
            for r in &rows {
                let mut row = vec![
                    r.n.to_string(),
                    r.j.to_string(),
                    fmt_opt(r.lambda.map(|l| l[0])),
                    fmt_opt(r.lambda.map(|l| l[1])),
                    r.merged.to_string(),
                    fmt_f64(r.leading[0]),
                    fmt_f64(r.leading[1]),
                    fmt_opt(r.gap_leading),
                    fmt_opt(r.relative_gap),
                ];
                for c in &r.refined {
                    row.extend([
                        fmt_opt(c.lambda.map(|l| l[0])),
                        fmt_opt(c.lambda.map(|l| l[1])),
                        fmt_opt(c.gap),
                    ]);
                }
                row.extend([r.applicable.to_string(), r.reason.clone().unwrap_or_default()]);
                t.push(row);
            }
            t.to_csv_string()
        }
    };
    Ok(Report { body, messages })
}

/// Pair overlaps, normalization identity and eigenfunction residuals.
pub fn basis_check(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut messages = Vec::new();
    let profile = riesz_failure_profile(&cfg.spec, &cfg.potential, cfg.n_min..=cfg.n_max, cfg.tol)
        .map_err(|e| CliError::Numeric(e.to_string()))?;
    for (n, e) in &profile.failures {
        if !cfg.partial {
            return Err(CliError::Numeric(format!("disk n = {n}: {e}")));
        }
        messages.push(format!("warning: skipped disk n = {n}: {e}"));
    }
    let flag = match profile.evidence {
        Evidence::Set => "set",
        Evidence::NotSet => "not set",
        Evidence::Inconclusive => "inconclusive",
    };
    messages.push(format!("basis-failure evidence: {flag}"));
    match profile.n_effective {
        Some(n) => messages.push(format!("N_effective = {n}")),
        None => messages.push("N_effective: not reached in the tested range".to_string()),
    }
    if let Some(f) = profile.fit {
        messages.push(format!(
            "fit: 1 − |overlap| ≈ {:.3e}·n^(−1/2); free slope {:.3} (R² = {:.3})",
            f.c_half, f.slope, f.r_squared
        ));
    }
    for r in profile.reports.iter().filter(|r| r.merged) {
        messages.push(format!("note: n = {} is a double eigenvalue (merged)", r.n));
    }

    let body = match cfg.format {
        Format::Json => json(&profile.reports),
        Format::Csv => {
            let mut t = Table::new([
                "n",
                "j",
                "re_lambda",
                "im_lambda",
                "abs_overlap",
                "norm_identity",
                "residual_scaled",
            ]);
            for r in &profile.reports {
                for b in &r.branches {
                    t.push(vec![
                        r.n.to_string(),
                        b.record.branch.to_string(),
                        fmt_f64(b.record.lambda.re),
                        fmt_f64(b.record.lambda.im),
                        fmt_opt(r.overlap.map(|o| o.norm())),
                        fmt_f64(b.norm_identity),
                        fmt_f64(b.residual_scaled),
                    ]);
                }
            }
            t.to_csv_string()
        }
    };
    Ok(Report { body, messages })
}
