use thiserror::Error;

use crate::lattice::Site;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A law that is not a probability distribution.
    #[error("malformed law: {0}")]
    MalformedLaw(String),

    /// An argument outside its domain (rho, dimension, box sizes, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The polymer needs positive means everywhere it looks.
    #[error("offspring mean is zero at time {t}, site {site:?}")]
    ZeroMean { t: u32, site: Site },

    /// The assumption on positive means fails for the law.
    #[error("environment law violates the positive-mean assumption: {0}")]
    Hyp1(String),

    #[error("brute-force enumeration of {paths} paths exceeds the limit of {limit}")]
    TooLarge { paths: u128, limit: u128 },

    /// Functional not in the monotone catalog.
    #[error("unknown functional `{0}`: only catalog functionals are accepted")]
    UnknownFunctional(String),

    /// Coupled processes stopped being ordered.
    #[error("coupling violated at time {t}: {detail}")]
    CouplingViolation { t: u32, detail: String },
}
