//! Error type shared by all samplers and estimators.

use alloc::string::String;
use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An estimator was asked for a value it cannot define (e.g. a mean of
    /// zero samples).
    UndefinedEstimate(&'static str),
    /// A numeric parameter fell outside its domain. Carries the parameter
    /// name and the offending value.
    Domain { parameter: &'static str, value: f64 },
    /// A pool was constructed with zero points.
    EmptyPool,
    /// Two strata of one scheme claim the same covariate region.
    OverlappingStrata { a: usize, b: usize },
    /// Stratum weights do not sum to one.
    BadWeightSum { sum: f64 },
    /// A scheme ended up with no strata.
    EmptyScheme,
    /// A pool point is not covered by any stratum of the scheme.
    UncoveredPoint { x: f64 },
    /// A stratum received no samples, so the aggregated estimate would be
    /// biased.
    IncompleteCoverage { stratum: usize },
    /// The oracle's label budget is spent.
    BudgetExhausted,
    /// Every point of the stratum has already been revealed.
    StratumExhausted { stratum: usize },
    /// Every stratum of the scheme is exhausted.
    AllStrataExhausted,
    /// The label budget cannot give every stratum at least one sample.
    InfeasibleCoverage { budget: usize, groups: usize },
    /// The pool has fewer points than the requested sample size.
    PoolTooSmall { pool: usize, budget: usize },
    /// No stage-1 subroutine is registered under this name.
    UnknownSubroutine { name: String },
    /// The named component is a declared extension point without an
    /// implementation.
    NotImplemented { name: &'static str },
    /// The algorithm requires binary labels and the pool's alphabet is not
    /// {0, 1}.
    NonBinaryLabels,
    /// A label value is not a member of the pool's declared alphabet.
    LabelOutsideAlphabet { value: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::UndefinedEstimate(what) => write!(f, "undefined estimate: {what}"),
            Error::Domain { parameter, value } => {
                write!(f, "parameter `{parameter}` outside its domain (got {value})")
            }
            Error::EmptyPool => write!(f, "pool must contain at least one point"),
            Error::OverlappingStrata { a, b } => {
                write!(f, "strata {a} and {b} overlap; memberships must be disjoint")
            }
            Error::BadWeightSum { sum } => {
                write!(f, "stratum weights must sum to 1 (got {sum})")
            }
            Error::EmptyScheme => write!(f, "stratification scheme has no strata"),
            Error::UncoveredPoint { x } => {
                write!(f, "pool point x = {x} is not covered by any stratum")
            }
            Error::IncompleteCoverage { stratum } => {
                write!(f, "stratum {stratum} received no samples; aggregate would be biased")
            }
            Error::BudgetExhausted => write!(f, "label budget exhausted"),
            Error::StratumExhausted { stratum } => {
                write!(f, "all points of stratum {stratum} are already revealed")
            }
            Error::AllStrataExhausted => write!(f, "every stratum is exhausted"),
            Error::InfeasibleCoverage { budget, groups } => write!(
                f,
                "budget {budget} cannot cover {groups} strata with one sample each"
            ),
            Error::PoolTooSmall { pool, budget } => {
                write!(f, "pool of {pool} points cannot supply {budget} labels")
            }
            Error::UnknownSubroutine { name } => write!(
                f,
                "unknown stage-1 subroutine `{name}`; available: {}",
                crate::stage1::SUBROUTINE_NAMES.join(", ")
            ),
            Error::NotImplemented { name } => {
                write!(f, "`{name}` is a declared extension point and is not implemented")
            }
            Error::NonBinaryLabels => {
                write!(f, "algorithm supports binary labels only (alphabet {{0, 1}})")
            }
            Error::LabelOutsideAlphabet { value } => {
                write!(f, "label {value} is not in the pool's declared alphabet")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
