use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the model is defined.
    #[error("{quantity} = {value} is outside its domain: {constraint}")]
    Domain {
        quantity: &'static str,
        value: f64,
        constraint: &'static str,
    },

    /// Lookup or interpolation requested outside the tabulated range.
    #[error("{quantity} = {value} is outside the tabulated range [{min}, {max}]")]
    OutOfRange {
        quantity: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("invalid configuration `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("invalid state transition: {0}")]
    State(&'static str),

    #[error("conversion {v_in} V -> {v_out} V needs duty {duty}, outside (0, 1)")]
    UnreachableConversion { v_in: f64, v_out: f64, duty: f64 },

    #[error("requested {requested_w} W exceeds available {available_w} W")]
    InsufficientPower { requested_w: f64, available_w: f64 },

    #[error("required supply {required_w} W exceeds the {limit_w} W supply limit")]
    SupplyLimit { required_w: f64, limit_w: f64 },

    #[error("power chain mismatch: delivered {delivered_w} W, requested {requested_w} W")]
    ChainMismatch { delivered_w: f64, requested_w: f64 },

    #[error("cannot compare sessions: {0}")]
    Comparison(String),

    #[error("tick {tick}: {source}")]
    Tick {
        tick: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(quantity: &'static str, value: f64, constraint: &'static str) -> Self {
        Error::Domain {
            quantity,
            value,
            constraint,
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn at_tick(self, tick: usize) -> Self {
        Error::Tick {
            tick,
            source: Box::new(self),
        }
    }
}
