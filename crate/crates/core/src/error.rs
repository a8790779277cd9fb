use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("copula {0} is not stochastically increasing")]
    NotStochasticallyIncreasing(String),
    #[error("default probabilities differ: {0} vs {1}")]
    PdMismatch(f64, f64),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("{profiles} profiles supplied for {borrowers} borrowers")]
    ProfileCount { profiles: usize, borrowers: usize },
    #[error("exact loss distribution supports at most {max} borrowers, got {got}")]
    TooManyBorrowers { got: usize, max: usize },
    #[error("exact loss distribution requires deterministic LGD (borrower {0})")]
    StochasticLgd(String),
    #[error("infeasible beta moments: mean {mean}, vol {vol}")]
    InfeasibleBeta { mean: f64, vol: f64 },
    #[error("{path}: row {row}, column `{column}`: {message}")]
    Parse {
        path: String,
        row: usize,
        column: String,
        message: String,
    },
    #[error("invalid scenario: field `{field}`: {message}")]
    Scenario { field: String, message: String },
    #[error("root finder did not converge for {0}")]
    NoConvergence(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit(what: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::Domain {
            what,
            value,
            range: "[0, 1]",
        })
    }
}

pub(crate) fn check_open_unit(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(Error::Domain {
            what,
            value,
            range: "(0, 1)",
        })
    }
}
