use thiserror::Error;

/// Errors raised by bound evaluations and their inputs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid probability table: {0}")]
    InvalidTable(String),

    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("axis groups overlap on axis {0}")]
    OverlappingAxes(usize),

    #[error("axis {axis} is out of range for a table of rank {rank}")]
    AxisOutOfRange { axis: usize, rank: usize },

    #[error("invalid abscissae: {0}")]
    InvalidAbscissae(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("search failed: {0}")]
    Search(String),

    #[error("evaluation budget exceeded: {needed} evaluations requested, cap is {cap}")]
    Budget { needed: u128, cap: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_domain(
    name: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    domain: &'static str,
) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            domain,
        })
    }
}
