use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("series is not a unit (order {order:?})")]
    NotAUnit { order: Option<usize> },

    #[error("constant coefficient must be 1, found {found}")]
    BadConstantTerm { found: String },

    #[error("inner series of a substitution must have positive order")]
    OrderZeroInner,

    #[error("generator {index} has order 0; not a curve singularity")]
    NotACurve { index: usize },

    #[error("generator {index} is redundant: embedding dimension is smaller than the generator count")]
    RedundantGenerator { index: usize },

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("series is not a member of the ring (residue of order {order})")]
    NotAMember { order: usize },

    #[error("no witness without constant or linear part exists")]
    ConstraintInfeasible,

    #[error("Jacobian rank is {found}, expected {expected}")]
    RankDeficient { found: usize, expected: usize },

    #[error("torsion length did not stabilize: {history:?}")]
    Unstable { history: Vec<(usize, usize)> },

    #[error("conductor is not contained in the square of the maximal ideal")]
    ConductorNotInMSquared,

    #[error("witness for {what} has valuation {valuation} below the conductor {conductor}")]
    WitnessNotInConductor {
        what: String,
        valuation: usize,
        conductor: usize,
    },

    #[error("generator {index} is not a pure monomial")]
    NotMonomial { index: usize },

    #[error("a torsion pair needs two distinct generators")]
    SameIndex,

    #[error("coefficient of dT{row} is a unit")]
    UnitTRow { row: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
