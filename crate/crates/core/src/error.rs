use thiserror::Error;

/// Errors raised by the inference routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model or experiment parameter is outside its admissible range.
    #[error("invalid configuration: {0}")]
    Config(&'static str),

    /// Inputs are inconsistent with each other (lengths, orderings, counts).
    #[error("invalid input: {0}")]
    Input(&'static str),

    /// Quadrature did not reach the requested relative tolerance.
    #[error("quadrature did not converge at x = {at}: estimated relative error {estimate:e}")]
    Quadrature { at: f64, estimate: f64 },

    /// A root bracket could not be established or a root solve stalled.
    #[error("root finding failed: {0}")]
    Root(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
