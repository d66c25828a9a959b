//! Exact integration of quasi-polynomials `Σ c · x^p · e^{iπmx}` over `[0, 1]`.
//!
//! Every function this crate integrates in closed form (trigonometric
//! potentials, the unperturbed eigenfunctions and their polynomially weighted
//! associated functions) is a finite sum of such terms, so products stay in the
//! class and inner products reduce to the moments
//! `I(p, m) = ∫₀¹ x^p e^{iπmx} dx`.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// One term `coeff · x^degree · e^{iπ·freq·x}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub degree: u32,
    pub freq: i64,
    pub coeff: Complex64,
}

/// Finite sum of [`Term`]s.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExpPoly {
    terms: Vec<Term>,
}

/// `∫₀¹ x^p e^{iπmx} dx`, by the integration-by-parts recursion
/// `I_p = (e^{iπm} − p·I_{p−1}) / (iπm)`.
pub fn moment(p: u32, m: i64) -> Complex64 {
    if m == 0 {
        return Complex64::new(1.0 / (p as f64 + 1.0), 0.0);
    }
    let theta = I * (PI * m as f64);
    let endpoint = if m % 2 == 0 { 1.0 } else { -1.0 };
    let mut acc = (endpoint - 1.0) / theta;
    for k in 1..=p {
        acc = (endpoint - k as f64 * acc) / theta;
    }
    acc
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::term(0, 0, c)
    }

    pub fn term(degree: u32, freq: i64, coeff: Complex64) -> Self {
        let mut p = Self::zero();
        p.push(Term { degree, freq, coeff });
        p
    }

    /// `c0 + c1·x`.
    pub fn linear(c0: Complex64, c1: Complex64) -> Self {
        let mut p = Self::zero();
        p.push(Term {
            degree: 0,
            freq: 0,
            coeff: c0,
        });
        p.push(Term {
            degree: 1,
            freq: 0,
            coeff: c1,
        });
        p
    }

    /// `cos(πmx)`.
    pub fn cos_pi(m: i64) -> Self {
        if m == 0 {
            return Self::constant(Complex64::new(1.0, 0.0));
        }
        let half = Complex64::new(0.5, 0.0);
        let mut p = Self::zero();
        p.push(Term {
            degree: 0,
            freq: m,
            coeff: half,
        });
        p.push(Term {
            degree: 0,
            freq: -m,
            coeff: half,
        });
        p
    }

    /// `sin(πmx)`.
    pub fn sin_pi(m: i64) -> Self {
        if m == 0 {
            return Self::zero();
        }
        let c = Complex64::new(0.0, -0.5);
        let mut p = Self::zero();
        p.push(Term {
            degree: 0,
            freq: m,
            coeff: c,
        });
        p.push(Term {
            degree: 0,
            freq: -m,
            coeff: -c,
        });
        p
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == Complex64::new(0.0, 0.0))
    }

    fn push(&mut self, t: Term) {
        if t.coeff.re == 0.0 && t.coeff.im == 0.0 {
            return;
        }
        if let Some(existing) = self.terms.iter_mut().find(|e| e.degree == t.degree && e.freq == t.freq) {
            existing.coeff += t.coeff;
        } else {
            self.terms.push(t);
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * c,
                    ..*t
                })
                .collect(),
        }
    }

    /// Pointwise complex conjugate on the real line.
    pub fn conj(&self) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    degree: t.degree,
                    freq: -t.freq,
                    coeff: t.coeff.conj(),
                })
                .collect(),
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|t| t.coeff * x.powi(t.degree as i32) * (I * (PI * t.freq as f64 * x)).exp())
            .sum()
    }

    pub fn derivative(&self) -> Self {
        let mut out = Self::zero();
        for t in &self.terms {
            if t.degree > 0 {
                out.push(Term {
                    degree: t.degree - 1,
                    freq: t.freq,
                    coeff: t.coeff * t.degree as f64,
                });
            }
            if t.freq != 0 {
                out.push(Term {
                    degree: t.degree,
                    freq: t.freq,
                    coeff: t.coeff * I * (PI * t.freq as f64),
                });
            }
        }
        out
    }

    /// `∫₀¹ self(x) dx`.
    pub fn integrate(&self) -> Complex64 {
        self.terms.iter().map(|t| t.coeff * moment(t.degree, t.freq)).sum()
    }

    /// `(self, other) = ∫₀¹ self · conj(other) dx`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &other.terms {
                acc += a.coeff * b.coeff.conj() * moment(a.degree + b.degree, a.freq - b.freq);
            }
        }
        acc
    }

    /// `(w · self, other)` without materializing the triple product.
    pub fn weighted_inner(&self, weight: &Self, other: &Self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &other.terms {
                let ab = a.coeff * b.coeff.conj();
                let deg = a.degree + b.degree;
                let freq = a.freq - b.freq;
                for w in &weight.terms {
                    acc += w.coeff * ab * moment(deg + w.degree, freq + w.freq);
                }
            }
        }
        acc
    }
}

impl Add for &ExpPoly {
    type Output = ExpPoly;
    fn add(self, rhs: &ExpPoly) -> ExpPoly {
        let mut out = self.clone();
        for t in &rhs.terms {
            out.push(*t);
        }
        out
    }
}

impl Sub for &ExpPoly {
    type Output = ExpPoly;
    fn sub(self, rhs: &ExpPoly) -> ExpPoly {
        self + &(-rhs)
    }
}

impl Neg for &ExpPoly {
    type Output = ExpPoly;
    fn neg(self) -> ExpPoly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &ExpPoly {
    type Output = ExpPoly;
    fn mul(self, rhs: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for a in &self.terms {
            for b in &rhs.terms {
                out.push(Term {
                    degree: a.degree + b.degree,
                    freq: a.freq + b.freq,
                    coeff: a.coeff * b.coeff,
                });
            }
        }
        out
    }
}
