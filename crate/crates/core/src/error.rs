use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("`{operation}` is not defined for {representation} densities")]
    Unsupported {
        operation: &'static str,
        representation: &'static str,
    },

    #[error("radial grid does not cover the support: escaping mass fraction {fraction:.3e}")]
    GridCoverage { fraction: f64 },

    #[error("`{quantity}` diverges under refinement")]
    Divergent { quantity: String },

    #[error("quadrature for `{quantity}` did not converge (error estimate {error:.3e})")]
    Quadrature { quantity: String, error: f64 },

    #[error("potential is positive at r = {radius:e}")]
    PositivePotential { radius: f64 },

    #[error("momentum support is unbounded")]
    UnboundedMomentum,

    #[error("force is singular at the origin (enclosed mass not O(r^3))")]
    SingularOrigin,

    #[error("no descent direction: potential energy {potential:e} is not negative")]
    NoDescent { potential: f64 },

    #[error("bootstrap inequality needs alpha > 3, got {alpha}")]
    BootstrapExponent { alpha: f64 },

    #[error("shooting failed: {0}")]
    Shooting(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
