//! Boundary-condition families and the unperturbed (`q = 0`) root systems.
//!
//! | family | conditions |
//! |---|---|
//! | T1 | `y'(0) + β y'(1) = 0`, `y(0) − y(1) = 0` |
//! | T2 | `y'(0) + β y'(1) = 0`, `y(0) + y(1) = 0` |
//! | T3 | `y'(0) − y'(1) = 0`, `y(0) + α y(1) = 0` |
//! | T4 | `y'(0) + y'(1) = 0`, `y(0) + α y(1) = 0` |
//! | periodic | `y(0) − y(1) = 0`, `y'(0) − y'(1) = 0` |
//! | antiperiodic | `y(0) + y(1) = 0`, `y'(0) + y'(1) = 0` |
//! | T1 adjoint | `y(1) + conj(β) y(0) = 0`, `y'(1) − y'(0) = 0` |
//!
//! For T1–T4 with `q = 0` every eigenvalue of index `n ≥ 1` (T1, T3) or `n ≥ 0`
//! (T2, T4) is double with a one-dimensional eigenspace. The operator and its
//! adjoint then carry a biorthogonal root system made of four closed-form
//! functions per index: the eigenfunction `E_n`, the scaled associated function
//! `Φ_n`, and their adjoint counterparts `E*_n`, `Φ*_n`, with
//! `(E*_n, Φ_m) = (Φ*_n, E_m) = δ_{nm}` and `(E*_n, E_m) = (Φ*_n, Φ_m) = 0`.

use crate::error::{Error, Result};
use crate::exact::ExpPoly;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    T1,
    T2,
    T3,
    T4,
    Periodic,
    Antiperiodic,
    /// The adjoint of T1: `y(1) + conj(β) y(0) = 0`, `y'(1) − y'(0) = 0`.
    T1Adjoint,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::T1 => "T1",
            Family::T2 => "T2",
            Family::T3 => "T3",
            Family::T4 => "T4",
            Family::Periodic => "periodic",
            Family::Antiperiodic => "antiperiodic",
            Family::T1Adjoint => "T1-adjoint",
        }
    }

    fn parameter_name(self) -> Option<&'static str> {
        match self {
            Family::T1 | Family::T2 | Family::T1Adjoint => Some("beta"),
            Family::T3 | Family::T4 => Some("alpha"),
            Family::Periodic | Family::Antiperiodic => None,
        }
    }

    /// Unperturbed eigenvalues are `(2πn)²` (integer family) or `((2n+1)π)²`.
    pub fn is_odd_harmonic(self) -> bool {
        matches!(self, Family::T2 | Family::T4 | Family::Antiperiodic)
    }

    /// Leading eigenfunction is a sine (T3, T4, and the T1 adjoint).
    pub fn sine_leading(self) -> bool {
        matches!(self, Family::T3 | Family::T4 | Family::T1Adjoint)
    }

    /// T1 and T3 have a simple eigenvalue 0 at `q = 0`; so does the periodic problem.
    pub fn has_simple_ground_state(self) -> bool {
        matches!(self, Family::T1 | Family::T3 | Family::Periodic | Family::T1Adjoint)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A boundary-condition family together with its parameter (`β` for T1/T2 and
/// the T1 adjoint, `α` for T3/T4, ignored otherwise).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    family: Family,
    parameter: Complex64,
}

impl OperatorSpec {
    pub fn new(family: Family, parameter: Complex64) -> Result<Self> {
        if let Some(name) = family.parameter_name() {
            if parameter == ONE || parameter == -ONE {
                return Err(Error::InadmissibleParameter {
                    family: family.name(),
                    name,
                    value: parameter,
                });
            }
            if !parameter.re.is_finite() || !parameter.im.is_finite() {
                return Err(Error::ParseSpec(format!("{name} = {parameter}")));
            }
        }
        let parameter = if family.parameter_name().is_some() {
            parameter
        } else {
            ZERO
        };
        Ok(Self { family, parameter })
    }

    pub fn t1(beta: Complex64) -> Result<Self> {
        Self::new(Family::T1, beta)
    }
    pub fn t2(beta: Complex64) -> Result<Self> {
        Self::new(Family::T2, beta)
    }
    pub fn t3(alpha: Complex64) -> Result<Self> {
        Self::new(Family::T3, alpha)
    }
    pub fn t4(alpha: Complex64) -> Result<Self> {
        Self::new(Family::T4, alpha)
    }
    pub fn periodic() -> Self {
        Self {
            family: Family::Periodic,
            parameter: ZERO,
        }
    }
    pub fn antiperiodic() -> Self {
        Self {
            family: Family::Antiperiodic,
            parameter: ZERO,
        }
    }

    /// The adjoint of a T1 operator (same `β`; the conditions use `conj(β)`).
    pub fn t1_adjoint(beta: Complex64) -> Result<Self> {
        Self::new(Family::T1Adjoint, beta)
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn parameter(&self) -> Complex64 {
        self.parameter
    }

    /// Distance of the parameter from the excluded values `±1`, if the family has one.
    pub fn degeneracy_distance(&self) -> Option<f64> {
        self.family
            .parameter_name()
            .map(|_| (self.parameter - ONE).norm().min((self.parameter + ONE).norm()))
    }

    /// `n` for integer families, `2n + 1` for odd-harmonic ones.
    pub fn n_prime(&self, n: u32) -> u32 {
        if self.family.is_odd_harmonic() {
            2 * n + 1
        } else {
            n
        }
    }

    /// `(2πn)²` or `((2n+1)π)²`.
    pub fn base_eigenvalue(&self, n: u32) -> f64 {
        let w = PI * self.harmonic(n) as f64;
        w * w
    }

    /// Frequency of the leading harmonic in units of `π`.
    pub fn harmonic(&self, n: u32) -> i64 {
        if self.family.is_odd_harmonic() {
            2 * n as i64 + 1
        } else {
            2 * n as i64
        }
    }

    /// `√2 cos` or `√2 sin` of the family's leading harmonic; the asymptotic
    /// form of the normalized eigenfunctions.
    pub fn leading_harmonic(&self, n: u32) -> ExpPoly {
        let m = self.harmonic(n);
        let trig = if self.family.sine_leading() {
            ExpPoly::sin_pi(m)
        } else {
            ExpPoly::cos_pi(m)
        };
        trig.scale(Complex64::new(std::f64::consts::SQRT_2, 0.0))
    }

    /// Number of eigenvalues (with multiplicity) attached to index `n`.
    pub fn cluster_size(&self, n: u32) -> usize {
        if n == 0 && self.family.has_simple_ground_state() {
            1
        } else {
            2
        }
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family.parameter_name() {
            Some(name) => {
                let tag = if self.family == Family::T1Adjoint {
                    "T1adj"
                } else {
                    self.family.name()
                };
                write!(f, "{tag}:{name}={}", format_complex(self.parameter))
            }
            None => f.write_str(self.family.name()),
        }
    }
}

fn format_complex(z: Complex64) -> String {
    if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// Parses `"3"`, `"0.5"`, `"2i"`, `"-i"`, `"3+0i"`, `"2+i"`, `"1e-3-2.5i"`.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s.parse::<f64>().ok().map(|re| Complex64::new(re, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |t: &str| -> Option<f64> {
        match t {
            "" | "+" => Some(1.0),
            "-" => Some(-1.0),
            _ => t.parse().ok(),
        }
    };
    match split {
        Some(i) => Some(Complex64::new(body[..i].parse().ok()?, imag(&body[i..])?)),
        None => Some(Complex64::new(0.0, imag(body)?)),
    }
}

impl FromStr for OperatorSpec {
    type Err = Error;

    /// `"T1:beta=3+0i"`, `"T3:alpha=0.5"`, `"periodic"`, `"antiperiodic"`,
    /// `"T1adj:beta=2+i"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::ParseSpec(s.to_string());
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h.trim(), Some(r.trim())),
            None => (s.trim(), None),
        };
        let family = match head.to_ascii_lowercase().as_str() {
            "t1" => Family::T1,
            "t2" => Family::T2,
            "t3" => Family::T3,
            "t4" => Family::T4,
            "t1adj" | "t1*" | "t1-adjoint" => Family::T1Adjoint,
            "periodic" => Family::Periodic,
            "antiperiodic" => Family::Antiperiodic,
            _ => return Err(bad()),
        };
        match (family.parameter_name(), rest) {
            (None, None) => Self::new(family, ZERO),
            (None, Some(_)) | (Some(_), None) => Err(bad()),
            (Some(name), Some(rest)) => {
                let value = match rest.split_once('=') {
                    Some((key, value)) if key.trim().eq_ignore_ascii_case(name) => value,
                    Some(_) => return Err(bad()),
                    None => rest,
                };
                let parameter = parse_complex(value).ok_or_else(bad)?;
                Self::new(family, parameter)
            }
        }
    }
}

/// Two boundary functionals as rows of coefficients against
/// `(y(0), y'(0), y(1), y'(1))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BcFunctionals {
    pub rows: [[Complex64; 4]; 2],
}

impl BcFunctionals {
    /// Applies row `i` to the boundary data `(y(0), y'(0), y(1), y'(1))`.
    pub fn apply(&self, i: usize, data: [Complex64; 4]) -> Complex64 {
        self.rows[i].iter().zip(data).map(|(a, b)| a * b).sum()
    }

    /// Rank of the 2×4 coefficient matrix (numerical, relative 1e-12).
    pub fn rank(&self) -> usize {
        let [r1, r2] = self.rows;
        let scale = r1.iter().chain(&r2).map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0;
        }
        let max_minor = (0..4)
            .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
            .map(|(i, j)| (r1[i] * r2[j] - r1[j] * r2[i]).norm())
            .fold(0.0, f64::max);
        if max_minor > 1e-12 * scale * scale {
            2
        } else {
            1
        }
    }
}

pub fn bc_functionals(spec: &OperatorSpec) -> BcFunctionals {
    let p = spec.parameter;
    let c = |re: f64| Complex64::new(re, 0.0);
    let rows = match spec.family {
        Family::T1 => [[ZERO, ONE, ZERO, p], [ONE, ZERO, -ONE, ZERO]],
        Family::T2 => [[ZERO, ONE, ZERO, p], [ONE, ZERO, ONE, ZERO]],
        Family::T3 => [[ZERO, ONE, ZERO, -ONE], [ONE, ZERO, p, ZERO]],
        Family::T4 => [[ZERO, ONE, ZERO, ONE], [ONE, ZERO, p, ZERO]],
        Family::Periodic => [[ONE, ZERO, -ONE, ZERO], [ZERO, ONE, ZERO, c(-1.0)]],
        Family::Antiperiodic => [[ONE, ZERO, ONE, ZERO], [ZERO, ONE, ZERO, ONE]],
        Family::T1Adjoint => [[p.conj(), ZERO, ONE, ZERO], [ZERO, -ONE, ZERO, ONE]],
    };
    BcFunctionals { rows }
}

/// The family's `γ` constant: the coefficient coupling the adjoint
/// associated function to the adjoint eigenfunction, `−Φ*'' − λ_n Φ* = conj(γ) n' E*`.
pub fn gamma(spec: &OperatorSpec) -> Result<Complex64> {
    let p = spec.parameter;
    match spec.family {
        Family::T1 => Ok(16.0 * PI * (p + 1.0) / (p - 1.0)),
        Family::T2 => Ok(8.0 * PI * (p - 1.0) / (p + 1.0)),
        Family::T3 => Ok(16.0 * PI * (1.0 + p) / (1.0 - p)),
        Family::T4 => Ok(8.0 * PI * (1.0 - p) / (1.0 + p)),
        f => Err(Error::NotRegularFamily(f.name())),
    }
}

/// `a = (8/3)(|β|² − Re β + 1)/|β − 1|²`: the asymptotic value of `‖Φ_n‖²` for T1.
pub fn t1_norm_constant(beta: Complex64) -> f64 {
    8.0 / 3.0 * (beta.norm_sqr() - beta.re + 1.0) / (beta - 1.0).norm_sqr()
}

/// Root functions of the unperturbed operator and its adjoint at index `n`.
///
/// `eigenfunction`, `associated`, `adjoint_eigenfunction` and
/// `adjoint_associated` are the textbook objects (associated functions fixed
/// with no eigenfunction admixture). The biorthogonal quadruple
/// `(e, phi, e_adj, phi_adj)` is what the expansions use: `phi = γ n' φ_n`,
/// `phi_adj = conj(γ) n' φ*_n`, and at a simple eigenvalue 0 the surviving
/// member is the (normalized) eigenfunction itself.
#[derive(Clone, Debug)]
pub struct UnperturbedSystem {
    pub spec: OperatorSpec,
    pub n: u32,
    pub base_eigenvalue: f64,
    /// Whether `base_eigenvalue` is simple (T1/T3 at `n = 0`).
    pub simple: bool,
    pub eigenfunction: ExpPoly,
    pub associated: ExpPoly,
    pub adjoint_eigenfunction: ExpPoly,
    pub adjoint_associated: ExpPoly,
    /// `E_n`: partner of `phi_adj`.
    pub e: ExpPoly,
    /// `Φ_n`: partner of `e_adj`.
    pub phi: ExpPoly,
    /// `E*_n`.
    pub e_adj: ExpPoly,
    /// `Φ*_n`.
    pub phi_adj: ExpPoly,
}

pub fn unperturbed_system(spec: &OperatorSpec, n: u32) -> Result<UnperturbedSystem> {
    let p = spec.parameter;
    let pc = p.conj();
    let c = |re: f64| Complex64::new(re, 0.0);
    let m = spec.harmonic(n);
    let w = PI * m as f64;
    let lin = |c0: Complex64, c1: f64| ExpPoly::linear(c0, c(c1));
    let cos = ExpPoly::cos_pi(m);
    let sin = ExpPoly::sin_pi(m);
    let zero = ExpPoly::zero();

    let sys = match spec.family {
        Family::T1 => {
            // φ_n = (β/(1+β) − x) sin(2πnx)/(4πn); φ*_n = (x − 1/(1+β̄)) cos(2πnx)/(4πn)
            let poly = lin(p / (1.0 + p), -1.0);
            let poly_adj = lin(-1.0 / (1.0 + pc), 1.0);
            if n == 0 {
                // f_0 = 2(β̄+1)/(β̄−1)(x − 1/(1+β̄)), normalized so (f_0, 1) = 1
                let f0 = poly_adj.scale(2.0 * (pc + 1.0) / (pc - 1.0));
                UnperturbedSystem {
                    spec: *spec,
                    n,
                    base_eigenvalue: 0.0,
                    simple: true,
                    eigenfunction: ExpPoly::constant(c(1.0)),
                    associated: zero.clone(),
                    adjoint_eigenfunction: poly_adj,
                    adjoint_associated: zero.clone(),
                    e: ExpPoly::constant(c(1.0)),
                    phi: zero.clone(),
                    e_adj: zero,
                    phi_adj: f0,
                }
            } else {
                let assoc = (&poly * &sin).scale(c(1.0 / (2.0 * w)));
                let assoc_adj = (&poly_adj * &cos).scale(c(1.0 / (2.0 * w)));
                UnperturbedSystem {
                    spec: *spec,
                    n,
                    base_eigenvalue: w * w,
                    simple: false,
                    phi: (&poly * &sin).scale(4.0 * (p + 1.0) / (p - 1.0)),
                    phi_adj: (&poly_adj * &cos).scale(4.0 * (pc + 1.0) / (pc - 1.0)),
                    eigenfunction: cos.clone(),
                    associated: assoc,
                    adjoint_eigenfunction: sin.clone(),
                    adjoint_associated: assoc_adj,
                    e: cos,
                    e_adj: sin,
                }
            }
        }
        Family::T3 => {
            // y_0 = x − α/(1+α); φ_n = (x − α/(1+α)) cos(2πnx)/(4πn)
            let poly = lin(-p / (1.0 + p), 1.0);
            let poly_adj = lin(1.0 / (1.0 + pc), -1.0);
            if n == 0 {
                let y0 = poly.scale(2.0 * (1.0 + p) / (1.0 - p));
                UnperturbedSystem {
                    spec: *spec,
                    n,
                    base_eigenvalue: 0.0,
                    simple: true,
                    eigenfunction: poly,
                    associated: zero.clone(),
                    adjoint_eigenfunction: ExpPoly::constant(c(1.0)),
                    adjoint_associated: zero.clone(),
                    e: zero.clone(),
                    phi: y0,
                    e_adj: ExpPoly::constant(c(1.0)),
                    phi_adj: zero,
                }
            } else {
                UnperturbedSystem {
                    spec: *spec,
                    n,
                    base_eigenvalue: w * w,
                    simple: false,
                    associated: (&poly * &cos).scale(c(1.0 / (2.0 * w))),
                    adjoint_associated: (&poly_adj * &sin).scale(c(1.0 / (2.0 * w))),
                    phi: (&poly * &cos).scale(4.0 * (1.0 + p) / (1.0 - p)),
                    phi_adj: (&poly_adj * &sin).scale(4.0 * (1.0 + pc) / (1.0 - pc)),
                    eigenfunction: sin.clone(),
                    adjoint_eigenfunction: cos.clone(),
                    e: sin,
                    e_adj: cos,
                }
            }
        }
        Family::T2 => {
            // φ_n = (β/(β−1) − x) sin((2n+1)πx)/(2(2n+1)π)
            let poly = lin(p / (p - 1.0), -1.0);
            let poly_adj = lin(1.0 / (pc - 1.0), 1.0);
            UnperturbedSystem {
                spec: *spec,
                n,
                base_eigenvalue: w * w,
                simple: false,
                associated: (&poly * &sin).scale(c(1.0 / (2.0 * w))),
                adjoint_associated: (&poly_adj * &cos).scale(c(1.0 / (2.0 * w))),
                phi: (&poly * &sin).scale(4.0 * (p - 1.0) / (p + 1.0)),
                phi_adj: (&poly_adj * &cos).scale(4.0 * (pc - 1.0) / (pc + 1.0)),
                eigenfunction: cos.clone(),
                adjoint_eigenfunction: sin.clone(),
                e: cos,
                e_adj: sin,
            }
        }
        Family::T4 => {
            // φ_n = (α/(1−α) + x) cos((2n+1)πx)/(2(2n+1)π)
            let poly = lin(p / (1.0 - p), 1.0);
            let poly_adj = lin(1.0 / (1.0 - pc), -1.0);
            UnperturbedSystem {
                spec: *spec,
                n,
                base_eigenvalue: w * w,
                simple: false,
                associated: (&poly * &cos).scale(c(1.0 / (2.0 * w))),
                adjoint_associated: (&poly_adj * &sin).scale(c(1.0 / (2.0 * w))),
                phi: (&poly * &cos).scale(4.0 * (1.0 - p) / (1.0 + p)),
                phi_adj: (&poly_adj * &sin).scale(4.0 * (1.0 - pc) / (1.0 + pc)),
                eigenfunction: sin.clone(),
                adjoint_eigenfunction: cos.clone(),
                e: sin,
                e_adj: cos,
            }
        }
        f => return Err(Error::NotRegularFamily(f.name())),
    };
    Ok(sys)
}

/// Which member of an index's biorthogonal pair a row or column refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    /// `f = E*_n`, `g = Φ_n` (T1: `f_{−n}`, `g_{−n}`).
    Eigen,
    /// `f = Φ*_n`, `g = E_n` (T1: `f_n`, `g_n`).
    Associated,
}

#[derive(Clone, Debug)]
pub struct BiorthogonalityMatrix {
    /// `(n, channel)` labels shared by rows (`f`) and columns (`g`).
    pub labels: Vec<(u32, Channel)>,
    /// `entries[i][j] = (f_i, g_j)`.
    pub entries: Vec<Vec<Complex64>>,
}

impl BiorthogonalityMatrix {
    /// `max |(f_i, g_j) − δ_ij|`.
    pub fn max_deviation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let target = if i == j { ONE } else { ZERO };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }

    /// Signed index in the T1 convention: `−n` for [`Channel::Eigen`], `n` otherwise.
    pub fn signed_label(&self, i: usize) -> i64 {
        match self.labels[i] {
            (n, Channel::Eigen) => -(n as i64),
            (n, Channel::Associated) => n as i64,
        }
    }
}

/// `[(f_i, g_j)]` over all nonzero pairs with index `≤ n_max`, by exact integration.
pub fn biorthogonality_matrix(spec: &OperatorSpec, n_max: u32) -> Result<BiorthogonalityMatrix> {
    let mut labels = Vec::new();
    let mut fs = Vec::new();
    let mut gs = Vec::new();
    for n in 0..=n_max {
        let sys = unperturbed_system(spec, n)?;
        if !sys.e_adj.is_zero() {
            labels.push((n, Channel::Eigen));
            fs.push(sys.e_adj.clone());
            gs.push(sys.phi.clone());
        }
        if !sys.phi_adj.is_zero() {
            labels.push((n, Channel::Associated));
            fs.push(sys.phi_adj.clone());
            gs.push(sys.e.clone());
        }
    }
    let entries = fs.iter().map(|f| gs.iter().map(|g| f.inner(g)).collect()).collect();
    Ok(BiorthogonalityMatrix { labels, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn boundary_data(f: &ExpPoly) -> [Complex64; 4] {
        let d = f.derivative();
        [f.eval(0.0), d.eval(0.0), f.eval(1.0), d.eval(1.0)]
    }

    #[test]
    fn bc_rows_examples() {
        let t1 = bc_functionals(&OperatorSpec::t1(c(3.0, 0.0)).unwrap());
        assert_eq!(t1.rows[0], [ZERO, ONE, ZERO, c(3.0, 0.0)]);
        assert_eq!(t1.rows[1], [ONE, ZERO, -ONE, ZERO]);
        let t3 = bc_functionals(&OperatorSpec::t3(c(0.0, 2.0)).unwrap());
        assert_eq!(t3.rows[0], [ZERO, ONE, ZERO, -ONE]);
        assert_eq!(t3.rows[1], [ONE, ZERO, c(0.0, 2.0), ZERO]);
        for spec in [
            OperatorSpec::t1(c(3.0, 0.0)).unwrap(),
            OperatorSpec::t4(c(0.0, 2.0)).unwrap(),
            OperatorSpec::periodic(),
            OperatorSpec::antiperiodic(),
            OperatorSpec::t1_adjoint(c(2.0, 1.0)).unwrap(),
        ] {
            assert_eq!(bc_functionals(&spec).rank(), 2);
        }
    }

    #[test]
    fn excluded_parameters_rejected() {
        assert!(matches!(
            OperatorSpec::t1(c(-1.0, 0.0)),
            Err(Error::InadmissibleParameter { family: "T1", .. })
        ));
        assert!(OperatorSpec::t1(c(1.0, 0.0)).is_err());
        assert!(OperatorSpec::t2(c(1.0, 0.0)).is_err());
        assert!(OperatorSpec::t3(c(-1.0, 0.0)).is_err());
        assert!(OperatorSpec::t4(c(1.0, 0.0)).is_err());
        assert!(OperatorSpec::t1(c(1.0, 1e-9)).is_ok());
    }

    #[test]
    fn gamma_examples() {
        let g = gamma(&OperatorSpec::t1(c(3.0, 0.0)).unwrap()).unwrap();
        assert!((g - 32.0 * PI).norm() < 1e-12);
        let g = gamma(&OperatorSpec::t3(c(0.0, 0.0)).unwrap()).unwrap();
        assert!((g - 16.0 * PI).norm() < 1e-12);
        let g = gamma(&OperatorSpec::t2(c(0.0, 0.0)).unwrap()).unwrap();
        assert!((g + 8.0 * PI).norm() < 1e-12);
        assert!(gamma(&OperatorSpec::periodic()).is_err());
    }

    #[test]
    fn parse_specs() {
        let s: OperatorSpec = "T1:beta=3+0i".parse().unwrap();
        assert_eq!(s, OperatorSpec::t1(c(3.0, 0.0)).unwrap());
        let s: OperatorSpec = "T3:alpha=0.5".parse().unwrap();
        assert_eq!(s, OperatorSpec::t3(c(0.5, 0.0)).unwrap());
        let s: OperatorSpec = "T4:alpha=2i".parse().unwrap();
        assert_eq!(s.parameter(), c(0.0, 2.0));
        let s: OperatorSpec = "T1:beta=2+i".parse().unwrap();
        assert_eq!(s.parameter(), c(2.0, 1.0));
        let s: OperatorSpec = "t2:beta = 1e-3-2.5i".parse().unwrap();
        assert_eq!(s.parameter(), c(1e-3, -2.5));
        assert_eq!("periodic".parse::<OperatorSpec>().unwrap(), OperatorSpec::periodic());
        assert!(matches!(
            "T1:beta=1".parse::<OperatorSpec>(),
            Err(Error::InadmissibleParameter { .. })
        ));
        assert!("T1:alpha=3".parse::<OperatorSpec>().is_err());
        assert!("T5:beta=3".parse::<OperatorSpec>().is_err());
        assert!("T1".parse::<OperatorSpec>().is_err());
        assert!("periodic:beta=2".parse::<OperatorSpec>().is_err());
        let s = OperatorSpec::t1(c(2.0, -1.5)).unwrap();
        assert_eq!(s.to_string().parse::<OperatorSpec>().unwrap(), s);
    }

    #[test]
    fn unperturbed_examples() {
        let spec = OperatorSpec::t1(c(3.0, 0.0)).unwrap();
        let sys = unperturbed_system(&spec, 2).unwrap();
        for &x in &[0.1, 0.45, 0.9] {
            assert!((sys.eigenfunction.eval(x).re - (4.0 * PI * x).cos()).abs() < 1e-14);
            let phi = (0.75 - x) * (4.0 * PI * x).sin() / (8.0 * PI);
            assert!((sys.associated.eval(x) - phi).norm() < 1e-14);
        }
        let sys0 = unperturbed_system(&spec, 0).unwrap();
        assert!(sys0.simple);
        assert_eq!(sys0.base_eigenvalue, 0.0);
        assert!((sys0.eigenfunction.eval(0.3) - 1.0).norm() < 1e-15);
        assert!((sys0.adjoint_eigenfunction.eval(0.3) - (0.3 - 0.25)).norm() < 1e-15);

        let t4 = OperatorSpec::t4(c(2.0, 0.0)).unwrap();
        let sys = unperturbed_system(&t4, 0).unwrap();
        for &x in &[0.2, 0.7] {
            assert!((sys.eigenfunction.eval(x).re - (PI * x).sin()).abs() < 1e-14);
            let phi = (-2.0 + x) * (PI * x).cos() / (2.0 * PI);
            assert!((sys.associated.eval(x) - phi).norm() < 1e-14);
        }
    }

    /// `(l − λ_n) φ_n = y_n` and `y_n`, `φ_n` satisfy the family's conditions;
    /// the adjoint objects satisfy the same relations for the adjoint problem,
    /// and `−Φ*'' − λ_n Φ* = conj(γ) n' E*`.
    #[test]
    fn root_function_relations() {
        let specs = [
            OperatorSpec::t1(c(3.0, 0.5)).unwrap(),
            OperatorSpec::t2(c(-2.0, 1.0)).unwrap(),
            OperatorSpec::t3(c(0.5, 0.0)).unwrap(),
            OperatorSpec::t4(c(0.0, 2.0)).unwrap(),
        ];
        for spec in specs {
            let bc = bc_functionals(&spec);
            let g = gamma(&spec).unwrap();
            for n in 1..5 {
                let sys = unperturbed_system(&spec, n).unwrap();
                let lam = sys.base_eigenvalue;
                for f in [&sys.eigenfunction, &sys.associated, &sys.e, &sys.phi] {
                    for i in 0..2 {
                        assert!(bc.apply(i, boundary_data(f)).norm() < 1e-12, "{spec} n={n}");
                    }
                }
                let residual = |f: &ExpPoly, rhs: &ExpPoly| {
                    let lhs = &f.derivative().derivative().scale(c(-1.0, 0.0)) - &f.scale(c(lam, 0.0));
                    let d = &lhs - rhs;
                    [0.0, 0.13, 0.5, 0.77, 1.0]
                        .iter()
                        .map(|&x| d.eval(x).norm())
                        .fold(0.0, f64::max)
                };
                assert!(residual(&sys.associated, &sys.eigenfunction) < 1e-9);
                assert!(residual(&sys.adjoint_associated, &sys.adjoint_eigenfunction) < 1e-9);
                let np = spec.n_prime(n) as f64;
                assert!(residual(&sys.phi_adj, &sys.e_adj.scale(g.conj() * np)) < 1e-8);
                assert!(residual(&sys.phi, &sys.e.scale(g * np)) < 1e-8);
            }
        }
    }

    #[test]
    fn biorthogonality_examples() {
        let m = biorthogonality_matrix(&OperatorSpec::t1(c(2.0, 1.0)).unwrap(), 8).unwrap();
        assert_eq!(m.entries.len(), 17);
        assert!(m.max_deviation() < 1e-10);
        assert_eq!(m.signed_label(0), 0);
        assert_eq!(m.signed_label(1), -1);
        let m = biorthogonality_matrix(&OperatorSpec::t3(c(3.0, 0.0)).unwrap(), 8).unwrap();
        assert!(m.max_deviation() < 1e-10);
        for i in 0..m.entries.len() {
            assert!((m.entries[i][i] - 1.0).norm() < 1e-13);
        }
    }

    #[test]
    fn norm_constant_matches_exact_norm_asymptotically() {
        let beta = c(2.0, 1.0);
        let spec = OperatorSpec::t1(beta).unwrap();
        let a = t1_norm_constant(beta);
        let sys = unperturbed_system(&spec, 40).unwrap();
        let exact = sys.phi.inner(&sys.phi).re;
        assert!((exact - a).abs() < 1e-2 * a);
    }
}
