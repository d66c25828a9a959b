//! Asymptotic eigenvalue formulas and the iteration series behind them.
//!
//! For an eigenfunction `Ψ` with eigenvalue `λ` near the base eigenvalue of
//! index `n`, the pair `u = (Ψ, E*_n)`, `v = (Ψ, Φ*_n)` solves
//!
//! ```text
//! (t − Q − A) u = (P + B) v
//! (t − P* − A') v = (γn' + Q* + B') u,        t = λ − base_n
//! ```
//!
//! where `P, Q, P*, Q*` are couplings of `q` to the unperturbed root functions
//! and `A, B, A', B'` collect all paths through the other indices. The series
//! is truncated at order `k ≤ 3` and evaluated as a product of transfer
//! matrices, so the nested sums over `n_1, …, n_k` cost `O(k·K_max²)`.

use crate::boundary::{gamma, unperturbed_system, Family, OperatorSpec};
use crate::error::{Error, Result};
use crate::potential::{weighted_fourier, TrigKind, TrigPotential};
use crate::solver::{char_det, EigenRecord};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

type C = Complex64;
const ZERO: C = C { re: 0.0, im: 0.0 };

/// Largest supported series order.
pub const MAX_ORDER: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaperQuantities {
    pub n: u32,
    pub gamma: C,
    pub base: f64,
    /// `(q Φ_n, E*_n)`
    pub q_n: C,
    /// `(q E_n, E*_n)`
    pub p_n: C,
    /// `(q E_n, Φ*_n)`
    pub p_star: C,
    /// `(q Φ_n, Φ*_n)`
    pub q_star: C,
}

/// The four couplings from their defining inner products.
pub fn paper_quantities_direct(spec: &OperatorSpec, q: &TrigPotential, n: u32) -> Result<PaperQuantities> {
    let sys = unperturbed_system(spec, n)?;
    let w = q.to_exp_poly();
    Ok(PaperQuantities {
        n,
        gamma: gamma(spec)?,
        base: sys.base_eigenvalue,
        q_n: sys.phi.weighted_inner(&w, &sys.e_adj),
        p_n: sys.e.weighted_inner(&w, &sys.e_adj),
        p_star: sys.e.weighted_inner(&w, &sys.phi_adj),
        q_star: sys.phi.weighted_inner(&w, &sys.phi_adj),
    })
}

/// T1 couplings from the Fourier functionals `c_{2n}, c_{2n,1}, s_{2n},
/// s_{2n,1}, s_{2n,2}` and the first moment `∫ x q`.
pub fn t1_closed_forms(beta: C, q: &TrigPotential, n: u32) -> (C, C, C, C) {
    let m = 2 * n;
    let moment = weighted_fourier(q, 1, TrigKind::Cos, 0);
    let c0 = weighted_fourier(q, 0, TrigKind::Cos, m);
    let c1 = weighted_fourier(q, 1, TrigKind::Cos, m);
    let s0 = weighted_fourier(q, 0, TrigKind::Sin, m);
    let s1 = weighted_fourier(q, 1, TrigKind::Sin, m);
    let s2 = weighted_fourier(q, 2, TrigKind::Sin, m);
    let r = (beta + 1.0) / (beta - 1.0);
    let q_n = -2.0 * r * moment + 2.0 * r * c1 - 2.0 * beta / (beta - 1.0) * c0;
    let p_star = 2.0 * r * moment + 2.0 * r * c1 - 2.0 / (beta - 1.0) * c0;
    let p_n = s0 / 2.0;
    let q_star = -8.0 * r * r * s2 + 8.0 * r * r * s1 - 8.0 * beta / ((beta - 1.0) * (beta - 1.0)) * s0;
    (q_n, p_n, p_star, q_star)
}

/// Couplings at index `n ≥ 1`: closed Fourier forms for T1, definitions otherwise.
pub fn paper_quantities(spec: &OperatorSpec, q: &TrigPotential, n: u32) -> Result<PaperQuantities> {
    if spec.family() != Family::T1 || n == 0 {
        return paper_quantities_direct(spec, q, n);
    }
    let (q_n, p_n, p_star, q_star) = t1_closed_forms(spec.parameter(), q, n);
    Ok(PaperQuantities {
        n,
        gamma: gamma(spec)?,
        base: spec.base_eigenvalue(n),
        q_n,
        p_n,
        p_star,
        q_star,
    })
}

/// `n + K + 8`.
pub fn default_cutoff(q: &TrigPotential, n: u32) -> usize {
    n as usize + q.degree() + 8
}

/// Couplings between all indices `0..=k_max`, reusable across `n` and `λ`.
pub struct SeriesContext {
    spec: OperatorSpec,
    gamma: C,
    dim: usize,
    base: Vec<f64>,
    n_prime: Vec<f64>,
    /// `[m * dim + m2]` = `(q Φ_{m2}, E*_m)`
    phi_e: Vec<C>,
    /// `(q E_{m2}, E*_m)`
    e_e: Vec<C>,
    /// `(q Φ_{m2}, Φ*_m)`
    phi_p: Vec<C>,
    /// `(q E_{m2}, Φ*_m)`
    e_p: Vec<C>,
    zero_potential: bool,
}

/// Per-order contributions `α_i, β_i, α'_i, β'_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub alpha: C,
    pub beta: C,
    pub alpha_prime: C,
    pub beta_prime: C,
}

impl SeriesTerm {
    pub fn magnitude(&self) -> f64 {
        self.alpha
            .norm()
            .max(self.beta.norm())
            .max(self.alpha_prime.norm())
            .max(self.beta_prime.norm())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesState {
    pub order: usize,
    pub cutoff: usize,
    pub a: C,
    pub b: C,
    pub a_prime: C,
    pub b_prime: C,
    pub terms: Vec<SeriesTerm>,
    /// Term magnitudes decrease with the order.
    pub monotone: bool,
}

impl SeriesContext {
    pub fn new(spec: &OperatorSpec, q: &TrigPotential, k_max: usize) -> Result<Self> {
        let gamma = gamma(spec)?;
        let dim = k_max + 1;
        let systems = (0..dim as u32)
            .map(|m| unperturbed_system(spec, m))
            .collect::<Result<Vec<_>>>()?;
        let w = q.to_exp_poly();
        let qe: Vec<_> = systems.iter().map(|s| &w * &s.e).collect();
        let qphi: Vec<_> = systems.iter().map(|s| &w * &s.phi).collect();
        let rows: Vec<[Vec<C>; 4]> = (0..dim)
            .into_par_iter()
            .map(|m| {
                let (ea, pa) = (&systems[m].e_adj, &systems[m].phi_adj);
                let mut r = [vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim], vec![ZERO; dim]];
                for m2 in 0..dim {
                    r[0][m2] = qphi[m2].inner(ea);
                    r[1][m2] = qe[m2].inner(ea);
                    r[2][m2] = qphi[m2].inner(pa);
                    r[3][m2] = qe[m2].inner(pa);
                }
                r
            })
            .collect();
        let mut tables = [vec![], vec![], vec![], vec![]];
        for r in rows {
            for (t, row) in tables.iter_mut().zip(r) {
                t.extend(row);
            }
        }
        let [phi_e, e_e, phi_p, e_p] = tables;
        Ok(Self {
            spec: *spec,
            gamma,
            dim,
            base: (0..dim as u32).map(|m| spec.base_eigenvalue(m)).collect(),
            n_prime: (0..dim as u32).map(|m| spec.n_prime(m) as f64).collect(),
            phi_e,
            e_e,
            phi_p,
            e_p,
            zero_potential: q.is_zero(),
        })
    }

    pub fn spec(&self) -> &OperatorSpec {
        &self.spec
    }

    pub fn k_max(&self) -> usize {
        self.dim - 1
    }

    fn at(&self, t: &[C], target: usize, source: usize) -> C {
        t[target * self.dim + source]
    }

    /// Series at order `k`, summing over indices `0..=cutoff` except `n`.
    pub fn series(&self, n: u32, lambda: C, k: usize, cutoff: usize) -> Result<SeriesState> {
        if k > MAX_ORDER {
            return Err(Error::SeriesOrder(k));
        }
        let n = n as usize;
        let dim = (cutoff + 1).min(self.dim);
        assert!(n < dim, "cutoff must exceed n");
        let idx: Vec<usize> = (0..dim).filter(|&m| m != n).collect();
        let d: Vec<C> = idx.iter().map(|&m| lambda - self.base[m]).collect();
        let g: Vec<C> = idx.iter().map(|&m| self.gamma * self.n_prime[m]).collect();

        // transfer from "target" m to "source" m2: coefficients multiplying
        // (qΨ, E*_{m2}) and (qΨ, Φ*_{m2}) in the expansion of (qΨ, X*_m)
        let transfer = |target: usize, col: usize| -> [C; 4] {
            let m2 = idx[col];
            let (dd, gg) = (d[col], g[col]);
            let a = self.at(&self.phi_e, target, m2) / dd + gg * self.at(&self.e_e, target, m2) / (dd * dd);
            let b = self.at(&self.e_e, target, m2) / dd;
            let aa = self.at(&self.phi_p, target, m2) / dd + gg * self.at(&self.e_p, target, m2) / (dd * dd);
            let bb = self.at(&self.e_p, target, m2) / dd;
            [a, b, aa, bb]
        };

        let mut terms = Vec::with_capacity(k);
        if k > 0 && !self.zero_potential {
            // C, M: chain started from E*_n; Ct, Mt: from Φ*_n
            let mut c = vec![ZERO; idx.len()];
            let mut m = vec![ZERO; idx.len()];
            let mut ct = vec![ZERO; idx.len()];
            let mut mt = vec![ZERO; idx.len()];
            for col in 0..idx.len() {
                let [a, b, _, _] = transfer(n, col);
                c[col] = a;
                m[col] = b;
            }
            // Φ*_n as target: same formulas with Φ*_n in place of E*_n
            for col in 0..idx.len() {
                let [_, _, aa, bb] = transfer(n, col);
                ct[col] = aa;
                mt[col] = bb;
            }
            for order in 1..=k {
                let mut term = SeriesTerm {
                    alpha: ZERO,
                    beta: ZERO,
                    alpha_prime: ZERO,
                    beta_prime: ZERO,
                };
                for (col, &mi) in idx.iter().enumerate() {
                    let phi_e = self.at(&self.phi_e, mi, n);
                    let phi_p = self.at(&self.phi_p, mi, n);
                    let e_e = self.at(&self.e_e, mi, n);
                    let e_p = self.at(&self.e_p, mi, n);
                    term.alpha += c[col] * phi_e + m[col] * phi_p;
                    term.beta += c[col] * e_e + m[col] * e_p;
                    term.alpha_prime += ct[col] * e_e + mt[col] * e_p;
                    term.beta_prime += ct[col] * phi_e + mt[col] * phi_p;
                }
                terms.push(term);
                if order == k {
                    break;
                }
                let mut nc = vec![ZERO; idx.len()];
                let mut nm = vec![ZERO; idx.len()];
                let mut nct = vec![ZERO; idx.len()];
                let mut nmt = vec![ZERO; idx.len()];
                for (row, &mi) in idx.iter().enumerate() {
                    for col in 0..idx.len() {
                        let [a, b, aa, bb] = transfer(mi, col);
                        nc[col] += c[row] * a + m[row] * aa;
                        nm[col] += c[row] * b + m[row] * bb;
                        nct[col] += ct[row] * a + mt[row] * aa;
                        nmt[col] += ct[row] * b + mt[row] * bb;
                    }
                }
                c = nc;
                m = nm;
                ct = nct;
                mt = nmt;
            }
        } else {
            terms.resize(
                k,
                SeriesTerm {
                    alpha: ZERO,
                    beta: ZERO,
                    alpha_prime: ZERO,
                    beta_prime: ZERO,
                },
            );
        }
        let sum = |f: fn(&SeriesTerm) -> C| terms.iter().map(f).sum::<C>();
        let monotone = terms.windows(2).all(|w| w[1].magnitude() <= w[0].magnitude());
        Ok(SeriesState {
            order: k,
            cutoff: dim - 1,
            a: sum(|t| t.alpha),
            b: sum(|t| t.beta),
            a_prime: sum(|t| t.alpha_prime),
            b_prime: sum(|t| t.beta_prime),
            terms,
            monotone,
        })
    }
}

pub fn series(
    spec: &OperatorSpec,
    q: &TrigPotential,
    n: u32,
    lambda: C,
    k: usize,
    k_max: usize,
) -> Result<SeriesState> {
    if k > MAX_ORDER {
        return Err(Error::SeriesOrder(k));
    }
    SeriesContext::new(spec, q, k_max)?.series(n, lambda, k, k_max)
}

/// `(Q − P* + A − A')² + 4(P + B)(γn' + Q* + B')`.
pub fn discriminant_from(pq: &PaperQuantities, n_prime: f64, s: &SeriesState) -> C {
    let x = pq.q_n - pq.p_star + s.a - s.a_prime;
    x * x + 4.0 * (pq.p_n + s.b) * (pq.gamma * n_prime + pq.q_star + s.b_prime)
}

pub fn discriminant(spec: &OperatorSpec, q: &TrigPotential, n: u32, lambda: C, k: usize, k_max: usize) -> Result<C> {
    let pq = paper_quantities(spec, q, n)?;
    let s = series(spec, q, n, lambda, k, k_max)?;
    Ok(discriminant_from(&pq, spec.n_prime(n) as f64, &s))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticEstimate {
    pub n: u32,
    pub j: u8,
    pub lambda_leading: C,
    pub lambda_refined: Option<C>,
    pub order: usize,
    pub applicable: bool,
    pub reason: Option<String>,
    /// `|λ_{m+1} − λ_m|` per fixed-point step.
    pub iterations: Vec<f64>,
}

/// `s_{2n}` (integer families) or `s_{2n+1}` (odd-harmonic families).
pub fn resonant_sine(spec: &OperatorSpec, q: &TrigPotential, n: u32) -> C {
    let m = if spec.family().is_odd_harmonic() {
        2 * n + 1
    } else {
        2 * n
    };
    weighted_fourier(q, 0, TrigKind::Sin, m)
}

/// `√(2γ)·√(n' s)`, principal roots: the leading-order eigenvalue gap.
pub fn leading_split(spec: &OperatorSpec, q: &TrigPotential, n: u32) -> Result<C> {
    let g = gamma(spec)?;
    let np = spec.n_prime(n) as f64;
    Ok((2.0 * g).sqrt() * (resonant_sine(spec, q, n) * np).sqrt())
}

/// `base + (−1)^j (√(2γ)/2)·√(n' s)`.
pub fn leading_estimate(spec: &OperatorSpec, q: &TrigPotential, n: u32, j: u8) -> Result<AsymptoticEstimate> {
    assert!(j == 1 || j == 2, "branch index is 1 or 2");
    let split = leading_split(spec, q, n)?;
    let sign = if j == 1 { -1.0 } else { 1.0 };
    let np = spec.n_prime(n) as f64;
    let ns = (resonant_sine(spec, q, n) * np).norm();
    let threshold = 4.0 * (np + 1.0).ln();
    let (applicable, reason) = if n == 0 {
        (false, Some("index 0 has no eigenvalue pair".to_string()))
    } else if ns <= threshold {
        (
            false,
            Some(format!(
                "s below threshold: |n's| = {ns:.3e} <= 4 ln(n'+1) = {threshold:.3e}"
            )),
        )
    } else {
        (true, None)
    };
    Ok(AsymptoticEstimate {
        n,
        j,
        lambda_leading: spec.base_eigenvalue(n) + sign * split / 2.0,
        lambda_refined: None,
        order: 0,
        applicable,
        reason,
        iterations: Vec::new(),
    })
}

fn closest_root(z: C, target: C) -> C {
    let r = z.sqrt();
    if (r - target).norm() <= (-r - target).norm() {
        r
    } else {
        -r
    }
}

/// One branch of the fixed-point iteration on a prepared context.
#[allow(clippy::too_many_arguments)]
pub fn refine_with(
    ctx: &SeriesContext,
    q: &TrigPotential,
    n: u32,
    j: u8,
    k: usize,
    cutoff: usize,
    tol: f64,
    max_iter: usize,
) -> Result<AsymptoticEstimate> {
    let spec = *ctx.spec();
    let mut est = leading_estimate(&spec, q, n, j)?;
    est.order = k;
    if q.is_zero() {
        est.lambda_refined = Some(est.lambda_leading);
        return Ok(est);
    }
    let pq = paper_quantities(&spec, q, n)?;
    let np = spec.n_prime(n) as f64;
    let sign = if j == 1 { -1.0 } else { 1.0 };
    let mut root = leading_split(&spec, q, n)?;
    let mut lambda = est.lambda_leading;
    for _ in 0..max_iter {
        let s = ctx.series(n, lambda, k, cutoff)?;
        let disc = discriminant_from(&pq, np, &s);
        root = closest_root(disc, root);
        let next = pq.base + 0.5 * (pq.q_n + pq.p_star + s.a + s.a_prime + sign * root);
        let step = (next - lambda).norm();
        est.iterations.push(step);
        lambda = next;
        if step < tol {
            est.lambda_refined = Some(lambda);
            return Ok(est);
        }
    }
    Err(Error::FixedPointDiverged { trace: est.iterations })
}

/// Fixed-point refinement of branch `j`; fails with [`Error::MergedRoots`]
/// when both branches reach the same limit.
#[allow(clippy::too_many_arguments)]
pub fn fixed_point_refine(
    spec: &OperatorSpec,
    q: &TrigPotential,
    n: u32,
    j: u8,
    k: usize,
    k_max: usize,
    tol: f64,
    max_iter: usize,
) -> Result<AsymptoticEstimate> {
    if k > MAX_ORDER {
        return Err(Error::SeriesOrder(k));
    }
    let ctx = SeriesContext::new(spec, q, k_max)?;
    let [e1, e2] = refine_pair(&ctx, q, n, k, k_max, tol, max_iter)?;
    Ok(if j == 1 { e1 } else { e2 })
}

/// Both branches; merged limits are an error unless `q = 0`.
pub fn refine_pair(
    ctx: &SeriesContext,
    q: &TrigPotential,
    n: u32,
    k: usize,
    cutoff: usize,
    tol: f64,
    max_iter: usize,
) -> Result<[AsymptoticEstimate; 2]> {
    let e1 = refine_with(ctx, q, n, 1, k, cutoff, tol, max_iter)?;
    let e2 = refine_with(ctx, q, n, 2, k, cutoff, tol, max_iter)?;
    if !q.is_zero() {
        let (l1, l2) = (e1.lambda_refined.unwrap(), e2.lambda_refined.unwrap());
        if (l1 - l2).norm() < 10.0 * tol {
            return Err(Error::MergedRoots((l1 + l2) / 2.0));
        }
    }
    Ok([e1, e2])
}

/// Outcome of matching solver records to branch predictions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum BranchAssignment {
    /// Records relabeled `j = 1, 2`; `margin` is the cost gap to the other matching.
    Assigned { records: Vec<EigenRecord>, margin: f64 },
    /// A double eigenvalue: no labeling.
    Merged,
    /// Both matchings cost the same within `tol`.
    Tie,
}

/// Bijection between two simple records and the `j = 1, 2` predictions
/// minimizing the total distance.
pub fn assign_branches(records: &[EigenRecord], estimates: &[C; 2], tol: f64) -> BranchAssignment {
    use crate::solver::Branch;
    if records.len() != 2 || records.iter().any(|r| r.multiplicity != 1) {
        return BranchAssignment::Merged;
    }
    let straight = (records[0].lambda - estimates[0]).norm() + (records[1].lambda - estimates[1]).norm();
    let crossed = (records[0].lambda - estimates[1]).norm() + (records[1].lambda - estimates[0]).norm();
    let margin = (straight - crossed).abs();
    if margin <= tol {
        return BranchAssignment::Tie;
    }
    let mut out = records.to_vec();
    let (first, second) = if straight < crossed { (0, 1) } else { (1, 0) };
    out[first].branch = Branch::Index(1);
    out[second].branch = Branch::Index(2);
    out.sort_by_key(|r| r.branch);
    BranchAssignment::Assigned { records: out, margin }
}

/// `(∫₀¹ x q dx, ½ s_{2n} + B(base))` with `B` at order `k`.
pub fn remark1_indicator(spec: &OperatorSpec, q: &TrigPotential, n: u32, k: usize, k_max: usize) -> Result<(C, C)> {
    if spec.family() != Family::T1 {
        return Err(Error::NotApplicable(format!("{} is not T1", spec.family())));
    }
    let moment = weighted_fourier(q, 1, TrigKind::Cos, 0);
    let s = series(spec, q, n, C::new(spec.base_eigenvalue(n), 0.0), k, k_max)?;
    Ok((moment, weighted_fourier(q, 0, TrigKind::Sin, 2 * n) / 2.0 + s.b))
}

/// `|D(λ)|` at the leading and refined estimates.
pub fn residual_improvement(spec: &OperatorSpec, q: &TrigPotential, est: &AsymptoticEstimate) -> Result<(f64, f64)> {
    let lead = char_det(spec, q, est.lambda_leading)?.norm();
    let refined = match est.lambda_refined {
        Some(l) => char_det(spec, q, l)?.norm(),
        None => lead,
    };
    Ok((lead, refined))
}
