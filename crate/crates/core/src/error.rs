use alloc::string::String;

pub type Result<T> = core::result::Result<T, LabError>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LabError {
    #[error("invalid radius {0}: must be positive")]
    InvalidRadius(f64),
    #[error("unknown generator symbol {symbol}: system has {p} generators")]
    UnknownGenerator { symbol: usize, p: usize },
    #[error("derivative of {map} vanishes at {x}")]
    SingularDerivative { map: &'static str, x: f64 },
    #[error("word contains a rotation: no isolated periodic points")]
    NoFiniteFix,
    #[error("{operation} does not support generator `{generator}`")]
    UnsupportedGenerator {
        operation: &'static str,
        generator: String,
    },
    #[error("invalid probability vector: {0}")]
    InvalidWalk(String),
    #[error("invalid generator `{0}`: expected linear:k, logistic or rotation:num/den")]
    ParseGenerator(String),
    #[error("invalid symbol sequence `{0}`")]
    ParseSymbols(String),
    #[error("estimate undefined: all {0} samples were censored")]
    EstimateUndefined(u64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
}
