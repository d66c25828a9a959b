//! Spectra of non-self-adjoint Sturm–Liouville operators `−y'' + q y` on
//! `[0, 1]` under regular but not strongly regular boundary conditions.
//!
//! * [`potential`]: zero-mean trigonometric potentials and exact Fourier functionals.
//! * [`boundary`]: the boundary-condition families and their unperturbed root systems.
//! * [`solver`]: characteristic determinant, contour counting and eigenvalue location.
//! * [`asymptotics`]: the perturbation series, discriminant and asymptotic eigenvalue formulas.
//! * [`diagnostics`]: expansion coefficients, eigenfunction overlaps and basis-failure evidence.

pub mod asymptotics;
pub mod boundary;
pub mod diagnostics;
pub mod error;
pub mod exact;
pub mod ode;
pub mod potential;
pub mod solver;

pub use error::{Error, Result};
