use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain an operation is defined on.
    #[error("domain error: {0}")]
    Domain(&'static str),

    /// A quadrature grid is too coarse for the oscillations of its integrand.
    #[error("grid under-resolves the integrand: {coordinate} needs at least {required} panels, got {actual}")]
    Resolution {
        coordinate: &'static str,
        required: usize,
        actual: usize,
    },

    /// An iterative method ran out of iterations before meeting its tolerance.
    #[error("no convergence after {iterations} iterations (estimated error {estimate:e})")]
    Convergence { iterations: usize, estimate: f64 },

    /// A quantity that must be real came out with a non-negligible imaginary part.
    #[error("imaginary residual {0:e} exceeds tolerance")]
    NotReal(f64),
}

pub type Result<T> = core::result::Result<T, Error>;
