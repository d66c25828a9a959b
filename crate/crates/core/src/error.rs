use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error(
        "{family} is degenerate at {name} = {value}: every complex number is an eigenvalue of infinite multiplicity"
    )]
    InadmissibleParameter {
        family: &'static str,
        name: &'static str,
        value: Complex64,
    },

    #[error("cannot parse operator spec {0:?}")]
    ParseSpec(String),

    #[error("{0} is not one of the families T1-T4")]
    NotRegularFamily(&'static str),

    #[error("integration failed: step size underflow at x = {x}")]
    IntegrationFailure { x: f64 },

    #[error("characteristic determinant vanishes on the contour |λ − {center}| = {radius} after retries")]
    ContourThroughZero { center: Complex64, radius: f64 },

    #[error("Newton iteration did not converge in disk {n}")]
    NewtonNonConvergence { n: u32 },

    #[error("series order {0} exceeds the supported maximum of 3")]
    SeriesOrder(usize),

    #[error("fixed-point iteration did not converge after {} iterations", trace.len())]
    FixedPointDiverged { trace: Vec<f64> },

    #[error("both branches converged to the same root {0}; eigenvalue is (near) double")]
    MergedRoots(Complex64),

    #[error("asymptotic formula not applicable: {0}")]
    NotApplicable(String),

    #[error("λ = {lambda} is not an eigenvalue: boundary matrix has full numerical rank")]
    NotAnEigenvalue { lambda: Complex64 },

    #[error("grid mismatch: {0} vs {1} samples")]
    GridMismatch(usize, usize),
}
