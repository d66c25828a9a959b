//! Fundamental system of `−y'' + q y = λ y` on `[0, 1]`.
//!
//! Two integrators are provided:
//!
//! * [`integrate_fundamental`]: order-adaptive Taylor series. The step is tied
//!   to the local oscillation scale, `h·max(|√λ|, 2πK) ≤ 3/2`, so the cost and the
//!   relative accuracy do not degrade as `|λ|` grows. Taylor coefficients of the
//!   trigonometric potential are exact, and the series is summed until the
//!   tail falls below `tol`.
//! * [`integrate_fundamental_rk`]: Dormand–Prince 5(4) with step control. For
//!   `|λ| > 100` it integrates the slowly varying envelope
//!   `y = a cos kx + b sin kx`, `y' = k(−a sin kx + b cos kx)`, `k = √λ`.
//!   Much slower at large `|λ|`; kept as an independent check.

use crate::error::{Error, Result};
use crate::potential::TrigPotential;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

type C = Complex64;
const ZERO: C = C { re: 0.0, im: 0.0 };
const ONE: C = C { re: 1.0, im: 0.0 };

/// Endpoint data of `y1` (`y1(0)=1, y1'(0)=0`) and `y2` (`y2(0)=0, y2'(0)=1`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FundamentalData {
    pub y1: C,
    pub y1p: C,
    pub y2: C,
    pub y2p: C,
}

impl FundamentalData {
    /// `y1 y2' − y1' y2`; identically 1 by Abel's identity.
    pub fn wronskian(&self) -> C {
        self.y1 * self.y2p - self.y1p * self.y2
    }

    /// Boundary vectors `(y(0), y'(0), y(1), y'(1))` of `y1` and `y2`.
    pub fn boundary_vectors(&self) -> [[C; 4]; 2] {
        [[ONE, ZERO, self.y1, self.y1p], [ZERO, ONE, self.y2, self.y2p]]
    }
}

/// Values `(y1, y1', y2, y2')` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalSample {
    pub y1: C,
    pub y1p: C,
    pub y2: C,
    pub y2p: C,
}

const MAX_ORDER: usize = 80;

/// Per-step Taylor data of the potential: `(ω_k, a_k, b_k)` for nonzero harmonics.
struct Harmonics {
    terms: Vec<(f64, C, C)>,
    max_freq: f64,
}

impl Harmonics {
    fn new(q: &TrigPotential) -> Self {
        let terms: Vec<_> = q
            .cos_coeffs()
            .iter()
            .zip(q.sin_coeffs())
            .enumerate()
            .filter(|(_, (a, b))| **a != ZERO || **b != ZERO)
            .map(|(i, (a, b))| (2.0 * PI * (i + 1) as f64, *a, *b))
            .collect();
        let max_freq = terms.iter().map(|t| t.0).fold(0.0, f64::max);
        Self { terms, max_freq }
    }

    /// Scaled Taylor coefficients `Q_i h^i` of `q(x0 + t)`, `i < order`.
    fn scaled_coeffs(&self, x0: f64, h: f64, out: &mut Vec<C>) {
        out.clear();
        out.resize(MAX_ORDER, ZERO);
        for &(w, a, b) in &self.terms {
            let (s, c) = (w * x0).sin_cos();
            let ca = a * c + b * s;
            let cb = b * c - a * s;
            let r = w * h;
            let mut pow = 1.0;
            for (i, slot) in out.iter_mut().enumerate() {
                if i > 0 {
                    pow *= r / i as f64;
                }
                if pow < 1e-40 {
                    break;
                }
                *slot += match i % 4 {
                    0 => ca,
                    1 => cb,
                    2 => -ca,
                    _ => -cb,
                } * pow;
            }
        }
    }
}

/// Step length for the Taylor integrator at spectral parameter `lambda`.
fn taylor_step(lambda: C, harmonics: &Harmonics) -> f64 {
    let scale = lambda.sqrt().norm().max(harmonics.max_freq).max(1.0);
    (1.5 / scale).min(0.25)
}

/// Advances `states` (pairs `(y, y')`) from `x0` by `h`.
fn taylor_advance(states: &mut [(C, C)], lambda: C, qs: &[C], h: f64, tol: f64, x0: f64, z: &mut Vec<C>) -> Result<()> {
    let lh2 = lambda * h * h;
    let h2 = h * h;
    for st in states.iter_mut() {
        z.clear();
        z.push(st.0);
        z.push(st.1 * h);
        let scale = st.0.norm() + z[1].norm();
        let mut y = z[0] + z[1];
        let mut yp = z[1];
        let mut converged = false;
        for j in 0..MAX_ORDER - 2 {
            let mut conv = ZERO;
            for i in 0..=j {
                conv += qs[i] * z[j - i];
            }
            let next = (conv * h2 - lh2 * z[j]) / (((j + 1) * (j + 2)) as f64);
            z.push(next);
            y += next;
            yp += next * (j + 2) as f64;
            if !next.re.is_finite() || !next.im.is_finite() {
                return Err(Error::IntegrationFailure { x: x0 });
            }
            let tail = next.norm() + z[j + 1].norm();
            if j >= 4 && tail * (j + 2) as f64 <= tol * 1e-3 * scale.max(1e-300) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::IntegrationFailure { x: x0 });
        }
        *st = (y, yp / h);
    }
    Ok(())
}

fn closed_form_zero_potential(lambda: C, x: f64) -> FundamentalSample {
    let k = lambda.sqrt();
    if k.norm() < 1e-8 {
        return FundamentalSample {
            y1: ONE - lambda * x * x / 2.0,
            y1p: -lambda * x,
            y2: C::new(x, 0.0) - lambda * x * x * x / 6.0,
            y2p: ONE - lambda * x * x / 2.0,
        };
    }
    let (c, s) = ((k * x).cos(), (k * x).sin());
    FundamentalSample {
        y1: c,
        y1p: -k * s,
        y2: s / k,
        y2p: c,
    }
}

/// Endpoint fundamental data at `x = 1`.
pub fn integrate_fundamental(q: &TrigPotential, lambda: C, tol: f64) -> Result<FundamentalData> {
    let samples = sample_fundamental(q, lambda, tol, 1)?;
    let s = samples[1];
    Ok(FundamentalData {
        y1: s.y1,
        y1p: s.y1p,
        y2: s.y2,
        y2p: s.y2p,
    })
}

/// Fundamental system sampled at `x_i = i/grid`, `i = 0..=grid`.
pub fn sample_fundamental(q: &TrigPotential, lambda: C, tol: f64, grid: usize) -> Result<Vec<FundamentalSample>> {
    assert!(tol > 0.0 && grid >= 1);
    let dx = 1.0 / grid as f64;
    if q.is_zero() {
        return Ok((0..=grid)
            .map(|i| closed_form_zero_potential(lambda, i as f64 * dx))
            .collect());
    }
    let harmonics = Harmonics::new(q);
    let h_max = taylor_step(lambda, &harmonics);
    let substeps = (dx / h_max).ceil().max(1.0) as usize;
    let h = dx / substeps as f64;
    let mut states = [(ONE, ZERO), (ZERO, ONE)];
    let mut out = Vec::with_capacity(grid + 1);
    let push = |out: &mut Vec<FundamentalSample>, st: &[(C, C); 2]| {
        out.push(FundamentalSample {
            y1: st[0].0,
            y1p: st[0].1,
            y2: st[1].0,
            y2p: st[1].1,
        })
    };
    push(&mut out, &states);
    let mut qs = Vec::with_capacity(MAX_ORDER);
    let mut z = Vec::with_capacity(MAX_ORDER);
    for i in 0..grid {
        for s in 0..substeps {
            let x0 = i as f64 * dx + s as f64 * h;
            harmonics.scaled_coeffs(x0, h, &mut qs);
            taylor_advance(&mut states, lambda, &qs, h, tol, x0, &mut z)?;
        }
        push(&mut out, &states);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Dormand–Prince 5(4)

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

fn axpy<const N: usize>(y: &[C; N], terms: &[(f64, &[C; N])], h: f64) -> [C; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += k[i] * (c * h);
        }
    }
    out
}

/// Adaptive Dormand–Prince 5(4) from `x0` to `x1` with mixed tolerance `tol`.
pub fn dopri5<const N: usize>(
    f: impl Fn(f64, &[C; N]) -> [C; N],
    x0: f64,
    x1: f64,
    y0: [C; N],
    tol: f64,
) -> Result<[C; N]> {
    let mut x = x0;
    let mut y = y0;
    let mut h = (x1 - x0) / 100.0;
    let h_min = 1e-14 * (x1 - x0).abs().max(1.0);
    let mut k1 = f(x, &y);
    while x < x1 {
        if x + h > x1 {
            h = x1 - x;
        }
        let k2 = f(x + C2 * h, &axpy(&y, &[(A21, &k1)], h));
        let k3 = f(x + C3 * h, &axpy(&y, &[(A31, &k1), (A32, &k2)], h));
        let k4 = f(x + C4 * h, &axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], h));
        let k5 = f(
            x + C5 * h,
            &axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], h),
        );
        let k6 = f(
            x + h,
            &axpy(&y, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)], h),
        );
        let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], h);
        let k7 = f(x + h, &y_new);
        let mut err: f64 = 0.0;
        for i in 0..N {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = tol + tol * y[i].norm().max(y_new[i].norm());
            err = err.max(e.norm() / sc);
        }
        if err <= 1.0 {
            x += h;
            y = y_new;
            k1 = k7;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h.abs() < h_min && x < x1 {
            return Err(Error::IntegrationFailure { x });
        }
    }
    Ok(y)
}

/// Fundamental data by Dormand–Prince; envelope formulation for `|λ| > 100`.
pub fn integrate_fundamental_rk(q: &TrigPotential, lambda: C, tol: f64) -> Result<FundamentalData> {
    if lambda.norm() <= 100.0 {
        let rhs = |x: f64, s: &[C; 4]| {
            let v = q.eval(x) - lambda;
            [s[1], v * s[0], s[3], v * s[2]]
        };
        let s = dopri5(rhs, 0.0, 1.0, [ONE, ZERO, ZERO, ONE], tol)?;
        return Ok(FundamentalData {
            y1: s[0],
            y1p: s[1],
            y2: s[2],
            y2p: s[3],
        });
    }
    let k = lambda.sqrt();
    // y = a cos kx + b sin kx; a' = −q y sin(kx)/k, b' = q y cos(kx)/k
    let rhs = |x: f64, s: &[C; 4]| {
        let (c, sn) = ((k * x).cos(), (k * x).sin());
        let qv = q.eval(x) / k;
        let y1 = s[0] * c + s[1] * sn;
        let y2 = s[2] * c + s[3] * sn;
        [-qv * y1 * sn, qv * y1 * c, -qv * y2 * sn, qv * y2 * c]
    };
    let s = dopri5(rhs, 0.0, 1.0, [ONE, ZERO, ZERO, ONE / k], tol)?;
    let (c, sn) = (k.cos(), k.sin());
    Ok(FundamentalData {
        y1: s[0] * c + s[1] * sn,
        y1p: k * (-s[0] * sn + s[1] * c),
        y2: s[2] * c + s[3] * sn,
        y2p: k * (-s[2] * sn + s[3] * c),
    })
}
