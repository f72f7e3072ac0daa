use std::path::PathBuf;

use thiserror::Error;

/// Which density-matrix invariant was violated, and by how much.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityViolation {
    /// Largest `|m_ij - conj(m_ji)|`, when above tolerance.
    pub hermiticity: Option<f64>,
    /// `|Tr m - 1|`, when above tolerance.
    pub trace: Option<f64>,
    /// Most negative eigenvalue, when below `-tolerance`.
    pub min_eigenvalue: Option<f64>,
}

impl std::fmt::Display for DensityViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if let Some(h) = self.hermiticity {
            parts.push(format!("hermiticity deviation {h:.3e}"));
        }
        if let Some(t) = self.trace {
            parts.push(format!("trace deviation {t:.3e}"));
        }
        if let Some(e) = self.min_eigenvalue {
            parts.push(format!("negative eigenvalue {e:.3e}"));
        }
        write!(f, "{}", parts.join(", "))
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid density matrix: {0}")]
    InvalidDensity(DensityViolation),

    #[error("observable is not Hermitian (deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("expectation value has imaginary residue {0:.3e}")]
    ImaginaryResidue(f64),

    #[error("parameter `{name}` = {value} outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("Kraus operators are not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("fidelity {0} too close to 1/4: deconvolution is singular")]
    SingularFidelity(f64),

    #[error("no counts for input {input} on axis {axis}: column denominator is {denominator:.3e}")]
    ZeroColumn {
        axis: crate::qubit::Axis,
        input: usize,
        denominator: f64,
    },

    #[error("error pair ({e0}, {e1}) violates the labeling convention")]
    Convention { e0: f64, e1: f64 },

    #[error("mixture weights/axes mismatch: {0}")]
    Mixture(String),

    #[error("{excluded} of {trials} Monte Carlo trials failed (limit 1%): {first}")]
    TooManyExclusions {
        excluded: usize,
        trials: usize,
        first: String,
    },

    #[error("at least {min} Monte Carlo trials required, got {got}")]
    TooFewTrials { min: usize, got: usize },

    #[error("optimization check failed: {0}")]
    Optimization(String),

    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 1 for usage/config, 2 for data, 3 for numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Schema { .. } | Error::Io { .. } | Error::Csv(_) | Error::Json(_) | Error::Mixture(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
