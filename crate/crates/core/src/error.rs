use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("cumulative quadrature needs at least 2 samples, got {0}")]
    TooFewSamples(usize),

    #[error("integration produced a non-finite state at t = {t}")]
    NonFinite { t: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "commutator drift {drift:.3e} at t = {t} exceeds {limit:.0e}; integration is unusable"
    )]
    CommutatorDrift { t: f64, drift: f64, limit: f64 },

    #[error(
        "propagator condition number {cond:.3e} at t = {t} exceeds {limit:.0e}; use the moment-equation propagation instead"
    )]
    IllConditioned { t: f64, cond: f64, limit: f64 },

    #[error("pulse is off the optimal manifold: chi0 = {chi0}, sqrt(alpha^2+beta^2)/2 = {optimal}")]
    OffManifold { chi0: f64, optimal: f64 },

    #[error("objective is not finite at beta = {beta}")]
    NonFiniteObjective { beta: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("malformed sweep file: {0}")]
    SweepFormat(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for rejected input: configuration, parameters or grids.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::InvalidGrid(_) | Error::InvalidParameter(_) | Error::OffManifold { .. }
        )
    }

    /// True for failures of the numerical integration itself (invariant breach
    /// or blow-up), as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::CommutatorDrift { .. }
                | Error::IllConditioned { .. }
                | Error::NonFiniteObjective { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
