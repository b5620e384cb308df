use chrono::NaiveDate;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("sentiment out of range [-1, 1]: {0}")]
    SentimentOutOfRange(f64),
    #[error("sentiment must be finite, got {0}")]
    NonFiniteSentiment(f64),
    #[error("weight must be positive, got {0}")]
    NonPositiveWeight(f64),
    #[error("{0} must not be empty")]
    EmptyField(&'static str),
    #[error("periods must be strictly increasing: {next} follows {previous}")]
    UnorderedPeriods { previous: NaiveDate, next: NaiveDate },
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read input: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid native range [{lo}, {hi}]: lo must be below hi and both finite")]
    InvalidNativeRange { lo: f64, hi: f64 },
    #[error("value {x} outside native range [{lo}, {hi}]")]
    OutsideNativeRange { x: f64, lo: f64, hi: f64 },
    #[error("bad header: expected `date,entity,score` (optionally `,count`), got `{0}`")]
    BadHeader(String),
    #[error("line {line}: {reason}")]
    BadRow { line: u64, reason: String },
    #[error("line {line}: duplicate row for ({date}, {entity})")]
    DuplicateRow {
        line: u64,
        date: NaiveDate,
        entity: String,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndexError {
    #[error("cannot aggregate an empty collection of opinions")]
    EmptyPeriod,
    #[error("opinions span more than one target: {0} and {1}")]
    MixedTargets(String, String),
    #[error("opinions span more than one period: {0} and {1}")]
    MixedPeriods(NaiveDate, NaiveDate),
    #[error("cannot average an empty set of series")]
    NoSeries,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Which of the two count ratios had a zero denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ratio {
    Alpha,
    Beta,
}

impl std::fmt::Display for Ratio {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Ratio::Alpha => "alpha (no scores in the upper half-band)",
            Ratio::Beta => "beta (no positive scores)",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BiasError {
    #[error("need at least {needed} scores, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("scores have zero variance")]
    ZeroVariance,
    #[error("scores have zero range")]
    ZeroRange,
    #[error("undefined ratio: {0}")]
    UndefinedRatio(Ratio),
    #[error("beta must be positive, got {0}")]
    NonPositiveBeta(f64),
    #[error("alpha is undefined for every band semi-width in the sweep")]
    AllAlphaUndefined,
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("inflation percentage must be non-negative, got {0}")]
    NegativeInflation(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid synth spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Bias(#[from] BiasError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
