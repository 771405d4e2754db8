use alloc::string::String;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// The operation was evaluated exactly at a singular point.
    #[error("singular point: {0}")]
    Singular(&'static str),

    /// Structurally invalid input (shapes, normalisation, grammar).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A numerical estimate did not reach the requested accuracy.
    #[error("accuracy not reached: achieved {achieved:e}, requested {target:e}")]
    Accuracy { achieved: f64, target: f64 },

    /// The requested system exceeds what dense methods can hold.
    #[error("system too large: {sites} sites exceeds the limit of {max}")]
    TooLarge { sites: usize, max: usize },

    /// The dense eigensolver did not converge.
    #[error("eigendecomposition did not converge")]
    Eigensolver,

    /// A root-finding problem has no solution for the given data.
    #[error("no solution: {0}")]
    NoSolution(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain<T>(what: &'static str, value: f64, domain: &'static str) -> Result<T> {
    Err(Error::Domain {
        what,
        value,
        domain,
    })
}
