//! Ground-truth eigenvalues from the characteristic determinant.
//!
//! Zeros of `D(λ)` inside a disk are counted by the argument principle on
//! equispaced circle samples. The same samples give the power sums
//! `Σ (λ_i − c)^p` of the enclosed zeros, from which the zeros themselves
//! follow by Newton's identities. Well separated zeros are then polished by
//! Newton's method on `D`; a cluster whose derivative is negligible on the
//! disk scale is reported as one record of multiplicity 2 at the cluster mean,
//! which the power sums determine far more accurately than either zero.

use crate::boundary::{bc_functionals, OperatorSpec};
use crate::error::{Error, Result};
use crate::ode::{integrate_fundamental, sample_fundamental, FundamentalData};
use crate::potential::{trapezoid_inner, TrigPotential};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;

type C = Complex64;
const ZERO: C = C { re: 0.0, im: 0.0 };

/// Default integrator tolerance for determinant evaluations.
pub const DEFAULT_ODE_TOL: f64 = 1e-13;

/// Branch label of a located eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Index(u8),
    Merged,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Branch::Index(j) => write!(f, "{j}"),
            Branch::Merged => f.write_str("merged"),
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "merged" {
            return Ok(Branch::Merged);
        }
        s.parse::<u8>()
            .map(Branch::Index)
            .map_err(|_| Error::ParseSpec(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub disk_index: u32,
    pub branch: Branch,
    pub lambda: C,
    pub multiplicity: u32,
    /// `|D(λ)|` at the returned value.
    pub residual: f64,
}

/// Everything found for one index `n`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiskSolution {
    pub n: u32,
    pub center: C,
    pub radius: f64,
    /// Argument-principle count (with multiplicity).
    pub count: usize,
    /// Expected count for large `n` (2, or 1 for a simple ground state).
    pub expected: usize,
    /// `max |D|` on the contour.
    pub boundary_scale: f64,
    /// True when the rectangle sweep replaced the disk.
    pub fallback: bool,
    pub records: Vec<EigenRecord>,
}

impl DiskSolution {
    pub fn count_matches(&self) -> bool {
        self.count == self.expected
    }
}

/// Solver controls.
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Newton stopping tolerance on `|Δλ|`.
    pub tol: f64,
    /// Integrator tolerance.
    pub ode_tol: f64,
    /// Below this index, a count mismatch in `U(n)` triggers the rectangle sweep.
    pub fallback_below: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            ode_tol: DEFAULT_ODE_TOL,
            fallback_below: 3,
        }
    }
}

/// Fundamental data at `x = 1` (see [`crate::ode`]).
pub fn fundamental(q: &TrigPotential, lambda: C, tol: f64) -> Result<FundamentalData> {
    integrate_fundamental(q, lambda, tol)
}

/// The 2×2 matrix `[U_i(y_j)]`.
pub fn boundary_matrix(spec: &OperatorSpec, data: &FundamentalData) -> [[C; 2]; 2] {
    let bc = bc_functionals(spec);
    let [v1, v2] = data.boundary_vectors();
    [[bc.apply(0, v1), bc.apply(0, v2)], [bc.apply(1, v1), bc.apply(1, v2)]]
}

/// `D(λ) = det [U_i(y_j)]`.
pub fn char_det(spec: &OperatorSpec, q: &TrigPotential, lambda: C) -> Result<C> {
    char_det_tol(spec, q, lambda, DEFAULT_ODE_TOL)
}

pub fn char_det_tol(spec: &OperatorSpec, q: &TrigPotential, lambda: C, tol: f64) -> Result<C> {
    let m = boundary_matrix(spec, &integrate_fundamental(q, lambda, tol)?);
    Ok(m[0][0] * m[1][1] - m[0][1] * m[1][0])
}

/// Finite-difference derivative with step `max(1e-6, 1e-8|λ|)`.
pub fn char_det_derivative(spec: &OperatorSpec, q: &TrigPotential, lambda: C, tol: f64) -> Result<C> {
    let h = (1e-8 * lambda.norm()).max(1e-6);
    let dp = char_det_tol(spec, q, lambda + h, tol)?;
    let dm = char_det_tol(spec, q, lambda - h, tol)?;
    Ok((dp - dm) / (2.0 * h))
}

// ---------------------------------------------------------------------------
// Contour sampling

/// Equispaced samples of `D` on a circle with their unwrapped logarithm.
struct CircleSamples {
    center: C,
    radius: f64,
    /// `w_j / r = e^{iθ_j}`.
    points: Vec<C>,
    /// Unwrapped `log D(λ_j)`.
    log: Vec<C>,
    winding: i64,
    scale: f64,
}

fn wrap(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a < -PI {
        a += 2.0 * PI;
    }
    a
}

const MAX_CIRCLE_POINTS: usize = 1 << 13;

fn sample_circle(f: &(impl Fn(C) -> Result<C> + Sync), center: C, radius: f64) -> Result<Option<CircleSamples>> {
    let mut n = 128;
    loop {
        let points: Vec<C> = (0..n)
            .map(|j| C::from_polar(1.0, 2.0 * PI * j as f64 / n as f64))
            .collect();
        let values = points
            .par_iter()
            .map(|w| f(center + w * radius))
            .collect::<Result<Vec<_>>>()?;
        let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let min = values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if !(scale.is_finite()) || min <= 1e-10 * scale {
            return Ok(None);
        }
        let mut max_step: f64 = 0.0;
        let mut log = Vec::with_capacity(n);
        let mut arg = values[0].arg();
        log.push(C::new(values[0].norm().ln(), arg));
        for j in 1..=n {
            let v = values[j % n];
            let d = wrap(v.arg() - values[j - 1].arg());
            max_step = max_step.max(d.abs());
            arg += d;
            if j < n {
                log.push(C::new(v.norm().ln(), arg));
            }
        }
        let total = arg - values[0].arg();
        let turns = total / (2.0 * PI);
        let winding = turns.round();
        if max_step <= PI / 4.0 && (turns - winding).abs() < 0.01 {
            return Ok(Some(CircleSamples {
                center,
                radius,
                points,
                log,
                winding: winding as i64,
                scale,
            }));
        }
        if n >= MAX_CIRCLE_POINTS {
            return Ok(None);
        }
        n *= 2;
    }
}

/// Samples the circle, perturbing the radius by ±1% up to five times when `D`
/// comes too close to zero on it.
fn sample_circle_retry(f: &(impl Fn(C) -> Result<C> + Sync), center: C, radius: f64) -> Result<CircleSamples> {
    let factors = [1.0, 1.01, 0.99, 1.02, 0.98, 1.03];
    for fac in factors {
        if let Some(s) = sample_circle(f, center, radius * fac)? {
            return Ok(s);
        }
    }
    Err(Error::ContourThroughZero { center, radius })
}

impl CircleSamples {
    /// Power sums `Σ ((λ_i − c)/r)^p`, `p = 1..=m`, of the enclosed zeros.
    fn power_sums(&self, m: usize) -> Vec<C> {
        let n = self.points.len() as f64;
        let m_wind = self.winding as f64;
        (1..=m)
            .map(|p| {
                let mut acc = ZERO;
                for (j, (w, g)) in self.points.iter().zip(&self.log).enumerate() {
                    let theta = 2.0 * PI * j as f64 / n;
                    let periodic = g - C::new(0.0, m_wind * theta);
                    acc += periodic * w.powu(p as u32);
                }
                -acc * (p as f64 / n)
            })
            .collect()
    }

    /// Zeros inside the circle, from the power sums.
    fn moment_roots(&self) -> Vec<C> {
        let m = self.winding.max(0) as usize;
        if m == 0 {
            return Vec::new();
        }
        let s = self.power_sums(m);
        // Newton's identities: k e_k = Σ_{i=1}^{k} (−1)^{i−1} e_{k−i} s_i
        let mut e = vec![C::new(1.0, 0.0)];
        for k in 1..=m {
            let mut acc = ZERO;
            for i in 1..=k {
                let sign = if (i - 1) % 2 == 0 { 1.0 } else { -1.0 };
                acc += e[k - i] * s[i - 1] * sign;
            }
            e.push(acc / k as f64);
        }
        // monic polynomial z^m − e1 z^{m−1} + e2 z^{m−2} − …
        let coeffs: Vec<C> = (0..=m).map(|k| if k % 2 == 0 { e[k] } else { -e[k] }).collect();
        poly_roots(&coeffs)
            .into_iter()
            .map(|z| self.center + z * self.radius)
            .collect()
    }
}

/// Roots of the monic polynomial `Σ coeffs[k] z^{m−k}` (Durand–Kerner).
fn poly_roots(coeffs: &[C]) -> Vec<C> {
    let m = coeffs.len() - 1;
    match m {
        0 => return Vec::new(),
        1 => return vec![-coeffs[1]],
        2 => {
            let (b, c) = (coeffs[1], coeffs[2]);
            let d = (b * b - 4.0 * c).sqrt();
            // stable quadratic formula
            let r1 = if (-b + d).norm() >= (-b - d).norm() {
                (-b + d) / 2.0
            } else {
                (-b - d) / 2.0
            };
            let r2 = if r1.norm() > 0.0 { c / r1 } else { ZERO };
            return vec![r1, r2];
        }
        _ => {}
    }
    let eval = |z: C| coeffs.iter().fold(ZERO, |acc, c| acc * z + c);
    let seed = C::new(0.4, 0.9);
    let mut z: Vec<C> = (0..m).map(|k| seed.powu(k as u32) * 0.8).collect();
    for _ in 0..500 {
        let mut delta: f64 = 0.0;
        for i in 0..m {
            let mut den = C::new(1.0, 0.0);
            for j in 0..m {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    z
}

/// Winding number of `D` around the circle `|λ − center| = radius`.
pub fn count_zeros(spec: &OperatorSpec, q: &TrigPotential, center: C, radius: f64) -> Result<usize> {
    let f = |l: C| char_det(spec, q, l);
    let s = sample_circle_retry(&f, center, radius)?;
    Ok(s.winding.max(0) as usize)
}

// ---------------------------------------------------------------------------
// Newton polishing

/// Newton with central-difference derivative. Once the steps are small but
/// `|f|` has stopped decreasing for a few iterations, rounding noise dominates
/// and the best iterate so far is returned.
fn newton(f: &impl Fn(C) -> Result<C>, start: C, tol: f64, deflate: &[C]) -> Result<Option<C>> {
    let g = |l: C| -> Result<C> {
        let mut v = f(l)?;
        for r in deflate {
            v /= l - r;
        }
        Ok(v)
    };
    let mut l = start;
    let mut best = (f64::INFINITY, start);
    let mut stalled = 0;
    for _ in 0..50 {
        let h = (1e-8 * l.norm()).max(1e-6);
        let d = (g(l + h)? - g(l - h)?) / (2.0 * h);
        let v = g(l)?;
        if v == ZERO {
            return Ok(Some(l));
        }
        if d == ZERO || !d.re.is_finite() {
            return Ok(None);
        }
        if v.norm() < best.0 {
            best = (v.norm(), l);
            stalled = 0;
        } else {
            stalled += 1;
        }
        let step = v / d;
        if stalled >= 4 && step.norm() < 1e-6 * l.norm().max(1.0) {
            return Ok(Some(best.1));
        }
        l -= step;
        if step.norm() < tol.max(64.0 * f64::EPSILON * l.norm()) {
            return Ok(Some(l));
        }
    }
    Ok(None)
}

/// Zeros of `D` inside a sampled circle, with multiplicities.
fn roots_in_circle(
    f: &impl Fn(C) -> Result<C>,
    samples: &CircleSamples,
    tol: f64,
    ring_starts: bool,
) -> Result<Vec<(C, u32)>> {
    let approx = samples.moment_roots();
    if approx.is_empty() {
        return Ok(Vec::new());
    }
    let scale = samples.scale;
    let fd = |l: C| -> Result<C> {
        let h = (1e-8 * l.norm()).max(1e-6);
        Ok((f(l + h)? - f(l - h)?) / (2.0 * h))
    };
    let derivative_negligible = |l: C| -> Result<bool> { Ok(fd(l)?.norm() < 1e-6 * scale) };

    // Pair up clusters whose derivative vanishes on the disk scale.
    let mut groups: Vec<(C, u32)> = Vec::new();
    let mut used = vec![false; approx.len()];
    for i in 0..approx.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let partner = (i + 1..approx.len()).filter(|&j| !used[j]).min_by(|&a, &b| {
            (approx[a] - approx[i])
                .norm()
                .total_cmp(&(approx[b] - approx[i]).norm())
        });
        if let Some(j) = partner {
            let mean = (approx[i] + approx[j]) / 2.0;
            let close = (approx[i] - approx[j]).norm() < 10.0 * tol;
            if close || (derivative_negligible(approx[i])? && derivative_negligible(approx[j])?) {
                used[j] = true;
                groups.push((mean, 2));
                continue;
            }
        }
        groups.push((approx[i], 1));
    }

    let mut found: Vec<(C, u32)> = Vec::new();
    for (guess, mult) in groups {
        if mult == 2 {
            found.push((guess, 2));
            continue;
        }
        let others: Vec<C> = found.iter().filter(|r| r.1 == 1).map(|r| r.0).collect();
        // Deflation leaves a spurious zero next to an inexact root; anything
        // this close to a found root is that artifact.
        let near = 1e-6 * samples.radius;
        let mut root = newton(f, guess, tol, &[])?;
        // Converging onto an already-found zero, or into the basin of a
        // different estimate: deflate and retry.
        if let Some(r) = root {
            let wrong_basin = approx.iter().any(|a| (a - r).norm() < (guess - r).norm());
            if wrong_basin || others.iter().any(|o| (o - r).norm() < 10.0 * tol) {
                root = newton(f, guess, tol, &others)?.filter(|r| others.iter().all(|o| (o - r).norm() >= near));
            }
        }
        if root.is_none() && ring_starts {
            for k in 0..8 {
                let start = samples.center + C::from_polar(samples.radius / 2.0, 2.0 * PI * k as f64 / 8.0);
                if let Some(r) = newton(f, start, tol, &others)? {
                    let inside = (r - samples.center).norm() <= samples.radius * 1.0001;
                    if inside && others.iter().all(|o| (o - r).norm() >= near) {
                        root = Some(r);
                        break;
                    }
                }
            }
        }
        match root {
            Some(r) if (r - samples.center).norm() <= samples.radius * 1.0001 => {
                if let Some(prev) = found.iter_mut().find(|p| p.1 == 1 && (p.0 - r).norm() < 10.0 * tol) {
                    prev.0 = (prev.0 + r) / 2.0;
                    prev.1 = 2;
                } else {
                    found.push((r, 1));
                }
            }
            _ => return Err(Error::NewtonNonConvergence { n: 0 }),
        }
    }
    Ok(found)
}

fn records_from_roots(f: &impl Fn(C) -> Result<C>, n: u32, mut roots: Vec<(C, u32)>) -> Result<Vec<EigenRecord>> {
    roots.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    let simple_count = roots.iter().filter(|r| r.1 == 1).count();
    let mut next = 1u8;
    roots
        .into_iter()
        .map(|(l, m)| {
            let branch = if m == 2 && simple_count == 0 {
                Branch::Merged
            } else {
                let b = Branch::Index(next);
                next += 1;
                b
            };
            Ok(EigenRecord {
                disk_index: n,
                branch,
                lambda: l,
                multiplicity: m,
                residual: f(l)?.norm(),
            })
        })
        .collect()
}

/// Locates the zeros in the disk `U(n) = {|λ − base_n| ≤ n}`, or in the
/// rectangle sweep for small `n`.
pub fn solve_disk(spec: &OperatorSpec, q: &TrigPotential, n: u32, opts: &SolverOptions) -> Result<DiskSolution> {
    let f = |l: C| char_det_tol(spec, q, l, opts.ode_tol);
    let expected = spec.cluster_size(n);
    let center = C::new(spec.base_eigenvalue(n), 0.0);
    if n == 0 {
        return solve_by_rectangle(spec, q, n, opts);
    }
    let radius = n as f64;
    let samples = sample_circle_retry(&f, center, radius)?;
    let count = samples.winding.max(0) as usize;
    if count != expected && n < opts.fallback_below {
        return solve_by_rectangle(spec, q, n, opts);
    }
    let roots = roots_in_circle(&f, &samples, opts.tol, true).map_err(|e| match e {
        Error::NewtonNonConvergence { .. } => Error::NewtonNonConvergence { n },
        e => e,
    })?;
    Ok(DiskSolution {
        n,
        center,
        radius: samples.radius,
        count,
        expected,
        boundary_scale: samples.scale,
        fallback: false,
        records: records_from_roots(&f, n, roots)?,
    })
}

/// Eigenvalues attached to index `n` with multiplicities.
pub fn locate_eigenpair(spec: &OperatorSpec, q: &TrigPotential, n: u32, tol: f64) -> Result<Vec<EigenRecord>> {
    let opts = SolverOptions {
        tol,
        ..Default::default()
    };
    Ok(solve_disk(spec, q, n, &opts)?.records)
}

/// Solves every disk in `n_range` (in parallel); results in ascending `n`.
pub fn solve_range(
    spec: &OperatorSpec,
    q: &TrigPotential,
    n_range: std::ops::RangeInclusive<u32>,
    opts: &SolverOptions,
) -> Vec<(u32, Result<DiskSolution>)> {
    let ns: Vec<u32> = n_range.collect();
    ns.par_iter().map(|&n| (n, solve_disk(spec, q, n, opts))).collect()
}

/// Smallest `n` in the tested list from which every disk count equals 2.
pub fn n_effective(solutions: &[DiskSolution]) -> Option<u32> {
    let mut sorted: Vec<&DiskSolution> = solutions.iter().collect();
    sorted.sort_by_key(|s| s.n);
    let mut candidate = None;
    for s in sorted.iter().rev() {
        if s.count == 2 && !s.fallback {
            candidate = Some(s.n);
        } else {
            break;
        }
    }
    candidate
}

// ---------------------------------------------------------------------------
// Rectangle sweep for small n

#[derive(Clone, Copy, Debug)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Rect {
    fn corners(&self) -> [C; 4] {
        [
            C::new(self.x0, self.y0),
            C::new(self.x1, self.y0),
            C::new(self.x1, self.y1),
            C::new(self.x0, self.y1),
        ]
    }
}

/// Argument increment of `f` along a segment, refined where it turns fast.
fn segment_increment(f: &impl Fn(C) -> Result<C>, a: C, b: C, scale_hint: f64) -> Result<Option<f64>> {
    fn rec(f: &impl Fn(C) -> Result<C>, a: C, fa: C, b: C, fb: C, depth: u32, floor: f64) -> Result<Option<f64>> {
        let d = wrap(fb.arg() - fa.arg());
        if d.abs() <= PI / 6.0 && depth >= 2 {
            return Ok(Some(d));
        }
        if depth > 24 {
            return Ok(None);
        }
        let m = (a + b) / 2.0;
        let fm = f(m)?;
        if fm.norm() <= floor {
            return Ok(None);
        }
        let left = rec(f, a, fa, m, fm, depth + 1, floor)?;
        let right = rec(f, m, fm, b, fb, depth + 1, floor)?;
        Ok(match (left, right) {
            (Some(l), Some(r)) => Some(l + r),
            _ => None,
        })
    }
    let (fa, fb) = (f(a)?, f(b)?);
    let floor = 1e-12 * scale_hint.max(fa.norm()).max(fb.norm());
    if fa.norm() <= floor || fb.norm() <= floor {
        return Ok(None);
    }
    rec(f, a, fa, b, fb, 0, floor)
}

fn rect_count(f: &impl Fn(C) -> Result<C>, r: &Rect) -> Result<Option<usize>> {
    let c = r.corners();
    let mut total = 0.0;
    for i in 0..4 {
        match segment_increment(f, c[i], c[(i + 1) % 4], 1.0)? {
            Some(d) => total += d,
            None => return Ok(None),
        }
    }
    let turns = total / (2.0 * PI);
    if (turns - turns.round()).abs() > 0.01 {
        return Ok(None);
    }
    Ok(Some(turns.round().max(0.0) as usize))
}

fn rect_roots(
    f: &(impl Fn(C) -> Result<C> + Sync),
    r: Rect,
    count: usize,
    tol: f64,
    depth: u32,
) -> Result<Vec<(C, u32)>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let center = C::new((r.x0 + r.x1) / 2.0, (r.y0 + r.y1) / 2.0);
    let half_diag = 0.5 * ((r.x1 - r.x0).hypot(r.y1 - r.y0));
    if count <= 2 {
        if let Ok(s) = sample_circle_retry(f, center, half_diag * 1.05) {
            if s.winding as usize == count {
                if let Ok(roots) = roots_in_circle(f, &s, tol, false) {
                    if roots.iter().map(|r| r.1 as usize).sum::<usize>() == count {
                        return Ok(roots);
                    }
                }
            }
        }
    }
    if depth > 40 {
        return Err(Error::ContourThroughZero {
            center,
            radius: half_diag,
        });
    }
    let wide = r.x1 - r.x0 >= r.y1 - r.y0;
    for shift in [0.5, 0.513, 0.471, 0.537, 0.449] {
        let (a, b) = if wide {
            let xm = r.x0 + shift * (r.x1 - r.x0);
            (Rect { x1: xm, ..r }, Rect { x0: xm, ..r })
        } else {
            let ym = r.y0 + shift * (r.y1 - r.y0);
            (Rect { y1: ym, ..r }, Rect { y0: ym, ..r })
        };
        let (Some(ca), Some(cb)) = (rect_count(f, &a)?, rect_count(f, &b)?) else {
            continue;
        };
        if ca + cb != count {
            continue;
        }
        let mut out = rect_roots(f, a, ca, tol, depth + 1)?;
        out.extend(rect_roots(f, b, cb, tol, depth + 1)?);
        return Ok(out);
    }
    Err(Error::ContourThroughZero {
        center,
        radius: half_diag,
    })
}

/// Sweep of `[−20, base(2)+20] × [−20, 20]`; zeros are attributed to the
/// nearest unperturbed eigenvalue.
fn solve_by_rectangle(spec: &OperatorSpec, q: &TrigPotential, n: u32, opts: &SolverOptions) -> Result<DiskSolution> {
    let f = |l: C| char_det_tol(spec, q, l, opts.ode_tol);
    let mut rect = Rect {
        x0: -20.0,
        x1: spec.base_eigenvalue(2) + 20.0,
        y0: -20.0,
        y1: 20.0,
    };
    let mut total = None;
    for k in 0..5 {
        let d = 0.37 * k as f64;
        let r = Rect {
            x0: rect.x0 - d,
            x1: rect.x1 + d,
            y0: rect.y0 - d,
            y1: rect.y1 + d,
        };
        if let Some(c) = rect_count(&f, &r)? {
            rect = r;
            total = Some(c);
            break;
        }
    }
    let total = total.ok_or(Error::ContourThroughZero {
        center: C::new((rect.x0 + rect.x1) / 2.0, 0.0),
        radius: rect.x1 - rect.x0,
    })?;
    let roots = rect_roots(&f, rect, total, opts.tol, 0)?;
    let nearest = |l: C| {
        (0..=2u32)
            .min_by(|&a, &b| {
                (l - spec.base_eigenvalue(a))
                    .norm()
                    .total_cmp(&(l - spec.base_eigenvalue(b)).norm())
            })
            .unwrap()
    };
    let mine: Vec<(C, u32)> = roots.into_iter().filter(|r| nearest(r.0) == n).collect();
    let count = mine.iter().map(|r| r.1 as usize).sum();
    let scale = rect
        .corners()
        .iter()
        .map(|&c| f(c).map(|v| v.norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(DiskSolution {
        n,
        center: C::new(spec.base_eigenvalue(n), 0.0),
        radius: n as f64,
        count,
        expected: spec.cluster_size(n),
        boundary_scale: scale,
        fallback: true,
        records: records_from_roots(&f, n, mine)?,
    })
}

// ---------------------------------------------------------------------------
// Eigenfunctions

/// Null direction of a 2×2 matrix: eigenvector of `MᴴM` for its smaller
/// eigenvalue. Returns the vector and `σ_min / σ_max`.
fn null_vector(m: [[C; 2]; 2]) -> ([C; 2], f64) {
    let a = m[0][0].norm_sqr() + m[1][0].norm_sqr();
    let d = m[0][1].norm_sqr() + m[1][1].norm_sqr();
    let b = m[0][0].conj() * m[0][1] + m[1][0].conj() * m[1][1];
    let tr = a + d;
    let disc = ((a - d) * (a - d) / 4.0 + b.norm_sqr()).sqrt();
    let lmax = tr / 2.0 + disc;
    let lmin = (tr / 2.0 - disc).max(0.0);
    if lmax == 0.0 {
        return ([C::new(1.0, 0.0), ZERO], 0.0);
    }
    // (H − lmin) v = 0 with H = [[a, b], [b̄, d]]
    let v1 = [b, C::new(lmin - a, 0.0)];
    let v2 = [C::new(lmin - d, 0.0), b.conj()];
    let n1 = v1[0].norm() + v1[1].norm();
    let n2 = v2[0].norm() + v2[1].norm();
    let v = if n1 >= n2 && n1 > 0.0 {
        v1
    } else if n2 > 0.0 {
        v2
    } else if a <= d {
        [C::new(1.0, 0.0), ZERO]
    } else {
        [ZERO, C::new(1.0, 0.0)]
    };
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    ([v[0] / norm, v[1] / norm], (lmin / lmax).sqrt())
}

/// Rescales `psi` so that `(ψ, leading harmonic)` is real and nonnegative.
pub fn fix_phase(spec: &OperatorSpec, n: u32, psi: &mut [C]) {
    let lead = spec.leading_harmonic(n);
    let h = 1.0 / (psi.len() - 1) as f64;
    let g: Vec<C> = (0..psi.len()).map(|i| lead.eval(i as f64 * h)).collect();
    let p = trapezoid_inner(psi, &g).expect("same grid");
    let size = trapezoid_inner(psi, psi).expect("same grid").re.sqrt();
    // No leading-harmonic component: the phase is undefined, leave it.
    if p.norm() > 1e-10 * size {
        let rot = p.conj() / p.norm();
        psi.iter_mut().for_each(|v| *v *= rot);
    }
}

/// Normalized eigenfunction at `λ` on `grid + 1` points, phase fixed against
/// the leading harmonic of index `n`.
pub fn eigenfunction(spec: &OperatorSpec, q: &TrigPotential, lambda: C, n: u32, grid: usize) -> Result<Vec<C>> {
    let data = integrate_fundamental(q, lambda, DEFAULT_ODE_TOL)?;
    let m = boundary_matrix(spec, &data);
    let (c, ratio) = null_vector(m);
    if ratio > 1e-6 {
        return Err(Error::NotAnEigenvalue { lambda });
    }
    let samples = sample_fundamental(q, lambda, DEFAULT_ODE_TOL, grid)?;
    let mut psi: Vec<C> = samples.iter().map(|s| c[0] * s.y1 + c[1] * s.y2).collect();
    let norm = trapezoid_inner(&psi, &psi)?.re.sqrt();
    psi.iter_mut().for_each(|v| *v /= norm);
    fix_phase(spec, n, &mut psi);
    Ok(psi)
}

/// Hausdorff distance between two finite point sets (`∞` if exactly one is empty).
pub fn hausdorff(a: &[C], b: &[C]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let dir = |x: &[C], y: &[C]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    dir(a, b).max(dir(b, a))
}
