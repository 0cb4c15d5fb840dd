use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name} = {value}: expected {range}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("state is not pure (|r| = {radius}); fidelity needs a pure reference state")]
    NotPure { radius: f64 },

    #[error("infeasible cheat parameters, violated: {}", violated.join("; "))]
    Infeasible { violated: Vec<String> },

    #[error("oracle found no feasible grid point (f = {f}, theta = {theta})")]
    OracleInfeasible { f: f64, theta: f64 },

    #[error("insufficient tomography data: no rounds with declared bit {bit} measured along {axis}")]
    InsufficientData { bit: u8, axis: char },

    #[error("every transcript aborted; bias is undefined")]
    AllAborted,

    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    range: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, range })
    }
}

/// Angles a hair above pi/2 (a rounded decimal literal) are accepted and clamped.
pub(crate) fn check_theta(theta: f64) -> Result<f64> {
    use std::f64::consts::FRAC_PI_2;
    check_range(
        "theta",
        theta,
        theta > 0.0 && theta <= FRAC_PI_2 + 1e-9,
        "(0, pi/2]",
    )?;
    Ok(theta.min(FRAC_PI_2))
}

pub(crate) fn check_f(f: f64) -> Result<()> {
    check_range("f", f, (0.0..=1.0).contains(&f), "[0, 1]")
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    check_range("gamma", gamma, (0.0..=1.0).contains(&gamma), "[0, 1]")
}
