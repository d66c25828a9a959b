//! Zero-mean trigonometric potentials and their Fourier functionals.
//!
//! A potential is `q(x) = Σ_{k=1..K} (a_k cos 2πkx + b_k sin 2πkx)` with complex
//! coefficients. There is no constant term, so `∫₀¹ q dx = 0` holds by
//! construction. All Fourier functionals are evaluated by exact term-wise
//! integration (see [`crate::exact`]), never by sampling.

use crate::error::{Error, Result};
use crate::exact::ExpPoly;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::Add;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct TrigPotential {
    /// `cos[k-1]` multiplies `cos 2πkx`.
    cos: Vec<Complex64>,
    /// `sin[k-1]` multiplies `sin 2πkx`.
    sin: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigKind {
    Cos,
    Sin,
}

/// The six functionals `c_n, s_n, c_{n,1}, s_{n,1}, c_{n,2}, s_{n,2}`, i.e.
/// `(x^p q, cos 2πnx)` and `(x^p q, sin 2πnx)` for `p = 0, 1, 2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourierFunctionals {
    pub n: u32,
    pub c: Complex64,
    pub s: Complex64,
    pub c1: Complex64,
    pub s1: Complex64,
    pub c2: Complex64,
    pub s2: Complex64,
}

impl TrigPotential {
    /// Builds a potential from cosine and sine coefficient lists (index 0 is
    /// harmonic 1). The shorter list is zero-padded; the degree is at least 1.
    pub fn new(cos: Vec<Complex64>, sin: Vec<Complex64>) -> Result<Self> {
        if cos
            .iter()
            .chain(sin.iter())
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidPotential("non-finite coefficient".into()));
        }
        let k = cos.len().max(sin.len()).max(1);
        let mut cos = cos;
        let mut sin = sin;
        cos.resize(k, ZERO);
        sin.resize(k, ZERO);
        Ok(Self { cos, sin })
    }

    pub fn zero() -> Self {
        Self {
            cos: vec![ZERO],
            sin: vec![ZERO],
        }
    }

    /// `c · cos 2πkx`.
    pub fn cos_term(k: usize, c: Complex64) -> Self {
        assert!(k >= 1, "harmonic index starts at 1");
        let mut cos = vec![ZERO; k];
        cos[k - 1] = c;
        Self::new(cos, Vec::new()).expect("finite coefficient")
    }

    /// `c · sin 2πkx`.
    pub fn sin_term(k: usize, c: Complex64) -> Self {
        assert!(k >= 1, "harmonic index starts at 1");
        let mut sin = vec![ZERO; k];
        sin[k - 1] = c;
        Self::new(Vec::new(), sin).expect("finite coefficient")
    }

    /// Truncation degree `K`.
    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    /// Highest harmonic with a nonzero coefficient (0 for the zero potential).
    pub fn effective_degree(&self) -> usize {
        (1..=self.degree())
            .rev()
            .find(|&k| self.cos[k - 1] != ZERO || self.sin[k - 1] != ZERO)
            .unwrap_or(0)
    }

    pub fn cos_coeffs(&self) -> &[Complex64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[Complex64] {
        &self.sin
    }

    pub fn is_zero(&self) -> bool {
        self.effective_degree() == 0
    }

    /// `conj(q)`.
    pub fn conj(&self) -> Self {
        Self {
            cos: self.cos.iter().map(|c| c.conj()).collect(),
            sin: self.sin.iter().map(|c| c.conj()).collect(),
        }
    }

    /// `x ↦ q(1 − x)`: cosine terms are invariant, sine terms flip sign.
    pub fn reflect(&self) -> Self {
        Self {
            cos: self.cos.clone(),
            sin: self.sin.iter().map(|c| -c).collect(),
        }
    }

    /// `q(x) = q(1 − x)` for all `x`, i.e. no sine content.
    pub fn is_symmetric(&self) -> bool {
        self.sin.iter().all(|c| *c == ZERO)
    }

    /// Evaluates `q(x)` using the Chebyshev recurrence for the harmonics.
    pub fn eval(&self, x: f64) -> Complex64 {
        let (s1, c1) = (2.0 * PI * x).sin_cos();
        let two_c1 = 2.0 * c1;
        let (mut c_prev, mut s_prev) = (1.0, 0.0);
        let (mut c_k, mut s_k) = (c1, s1);
        let mut acc = ZERO;
        for (a, b) in self.cos.iter().zip(&self.sin) {
            acc += a * c_k + b * s_k;
            let c_next = two_c1 * c_k - c_prev;
            let s_next = two_c1 * s_k - s_prev;
            c_prev = c_k;
            s_prev = s_k;
            c_k = c_next;
            s_k = s_next;
        }
        acc
    }

    /// `q` as an exact quasi-polynomial.
    pub fn to_exp_poly(&self) -> ExpPoly {
        let mut p = ExpPoly::zero();
        for (i, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let m = 2 * (i as i64 + 1);
            if *a != ZERO {
                p = &p + &ExpPoly::cos_pi(m).scale(*a);
            }
            if *b != ZERO {
                p = &p + &ExpPoly::sin_pi(m).scale(*b);
            }
        }
        p
    }

    pub fn functionals(&self, n: u32) -> FourierFunctionals {
        FourierFunctionals {
            n,
            c: weighted_fourier(self, 0, TrigKind::Cos, n),
            s: weighted_fourier(self, 0, TrigKind::Sin, n),
            c1: weighted_fourier(self, 1, TrigKind::Cos, n),
            s1: weighted_fourier(self, 1, TrigKind::Sin, n),
            c2: weighted_fourier(self, 2, TrigKind::Cos, n),
            s2: weighted_fourier(self, 2, TrigKind::Sin, n),
        }
    }

    /// `Σ_k (|a_k|² + |b_k|²) / 2`, which equals `‖q‖²`.
    pub fn parseval_norm_sq(&self) -> f64 {
        self.cos.iter().chain(&self.sin).map(|c| c.norm_sqr()).sum::<f64>() / 2.0
    }

    /// Parses the potential file format
    /// `{"cos": {"1": [re, im], ...}, "sin": {...}}`; absent keys mean zero.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: PotentialFile = serde_json::from_str(s).map_err(|e| Error::InvalidPotential(e.to_string()))?;
        file.try_into()
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&PotentialFile::from(self)).expect("potential serializes")
    }
}

impl Add for &TrigPotential {
    type Output = TrigPotential;
    fn add(self, rhs: &TrigPotential) -> TrigPotential {
        let k = self.degree().max(rhs.degree());
        let get = |v: &[Complex64], i: usize| v.get(i).copied().unwrap_or(ZERO);
        TrigPotential {
            cos: (0..k).map(|i| get(&self.cos, i) + get(&rhs.cos, i)).collect(),
            sin: (0..k).map(|i| get(&self.sin, i) + get(&rhs.sin, i)).collect(),
        }
    }
}

/// `∫₀¹ x^p q(x) trig(2πnx) dx` for `p ∈ {0, 1, 2}`, exact.
pub fn weighted_fourier(q: &TrigPotential, weight_power: u32, kind: TrigKind, n: u32) -> Complex64 {
    assert!(weight_power <= 2, "weight power must be 0, 1 or 2");
    let m = 2 * n as i64;
    let trig = match kind {
        TrigKind::Cos => ExpPoly::cos_pi(m),
        TrigKind::Sin => ExpPoly::sin_pi(m),
    };
    let weight = ExpPoly::term(weight_power, 0, Complex64::new(1.0, 0.0));
    // trig and the monomial are real, so conjugating them is harmless.
    q.to_exp_poly().weighted_inner(&weight, &trig)
}

/// A function on `[0, 1]`, either sampled on the uniform grid `x_i = i/N`,
/// `i = 0..=N`, or in closed form.
#[derive(Clone, Debug)]
pub enum Function {
    Sampled(Vec<Complex64>),
    Closed(ExpPoly),
}

impl Function {
    pub fn sample(&self, points: usize) -> Vec<Complex64> {
        match self {
            Function::Sampled(v) => v.clone(),
            Function::Closed(p) => sample_uniform(points, |x| p.eval(x)),
        }
    }
}

/// Samples `f` at `x_i = i/(points-1)`.
pub fn sample_uniform(points: usize, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
    assert!(points >= 2);
    let h = 1.0 / (points - 1) as f64;
    (0..points).map(|i| f(i as f64 * h)).collect()
}

/// Trapezoid rule for `∫₀¹ f·conj(g)` on a shared uniform grid.
pub fn trapezoid_inner(f: &[Complex64], g: &[Complex64]) -> Result<Complex64> {
    if f.len() != g.len() {
        return Err(Error::GridMismatch(f.len(), g.len()));
    }
    if f.len() < 2 {
        return Err(Error::GridMismatch(f.len(), 2));
    }
    let h = 1.0 / (f.len() - 1) as f64;
    let last = f.len() - 1;
    let mut acc = (f[0] * g[0].conj() + f[last] * g[last].conj()) * 0.5;
    for i in 1..last {
        acc += f[i] * g[i].conj();
    }
    Ok(acc * h)
}

/// `(f, g) = ∫₀¹ f(x) conj(g(x)) dx`. Exact when both are closed-form;
/// otherwise the closed-form side is sampled on the other's grid.
pub fn inner_product(f: &Function, g: &Function) -> Result<Complex64> {
    match (f, g) {
        (Function::Closed(a), Function::Closed(b)) => Ok(a.inner(b)),
        (Function::Sampled(a), Function::Sampled(b)) => trapezoid_inner(a, b),
        (Function::Sampled(a), closed) => trapezoid_inner(a, &closed.sample(a.len())),
        (closed, Function::Sampled(b)) => trapezoid_inner(&closed.sample(b.len()), b),
    }
}

#[derive(Serialize, Deserialize, Default)]
struct PotentialFile {
    #[serde(default)]
    cos: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    sin: BTreeMap<String, [f64; 2]>,
}

impl TryFrom<PotentialFile> for TrigPotential {
    type Error = Error;
    fn try_from(file: PotentialFile) -> Result<Self> {
        let collect = |map: &BTreeMap<String, [f64; 2]>| -> Result<Vec<Complex64>> {
            let mut out = Vec::new();
            for (key, [re, im]) in map {
                let k: usize = key
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidPotential(format!("bad harmonic index {key:?}")))?;
                if k == 0 {
                    return Err(Error::InvalidPotential(
                        "harmonic 0 (constant term) is not representable; potentials have zero mean".into(),
                    ));
                }
                if out.len() < k {
                    out.resize(k, ZERO);
                }
                out[k - 1] = Complex64::new(*re, *im);
            }
            Ok(out)
        };
        TrigPotential::new(collect(&file.cos)?, collect(&file.sin)?)
    }
}

impl From<&TrigPotential> for PotentialFile {
    fn from(q: &TrigPotential) -> Self {
        let collect = |v: &[Complex64]| {
            v.iter()
                .enumerate()
                .filter(|(_, c)| **c != ZERO)
                .map(|(i, c)| ((i + 1).to_string(), [c.re, c.im]))
                .collect()
        };
        PotentialFile {
            cos: collect(&q.cos),
            sin: collect(&q.sin),
        }
    }
}

/// `Σ_{k=1..16} k^{-3/4} sin 4πkx`: even sine harmonics with slowly decaying
/// coefficients, so `s_{2n} = n^{-3/4}/2` for `n ≤ 16`.
pub fn standard_even_potential() -> TrigPotential {
    let mut sin = vec![ZERO; 32];
    for k in 1..=16usize {
        sin[2 * k - 1] = Complex64::new((k as f64).powf(-0.75), 0.0);
    }
    TrigPotential::new(Vec::new(), sin).expect("finite")
}

/// `Σ_{k=1..16} k^{-3/4} sin 2π(2k+1)x`: odd sine harmonics, so
/// `s_{2n+1} = n^{-3/4}/2` for `1 ≤ n ≤ 16`.
pub fn standard_odd_potential() -> TrigPotential {
    let mut sin = vec![ZERO; 33];
    for k in 1..=16usize {
        sin[2 * k] = Complex64::new((k as f64).powf(-0.75), 0.0);
    }
    TrigPotential::new(Vec::new(), sin).expect("finite")
}
