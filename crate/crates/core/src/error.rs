use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("eigensolver did not converge after {iterations} iterations (best residual {best_residual:.3e})")]
    NonConvergence { iterations: usize, best_residual: f64 },

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("no interior minimum in the scanned range: {0}")]
    Bracket(String),

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("not a bound state: value {value} is not below the threshold {threshold}")]
    NotBoundState { value: f64, threshold: f64 },

    #[error("radius ladder did not stall: values {values:?}")]
    NotConverged { radii: Vec<f64>, values: Vec<f64> },

    #[error("quadrature error: {0}")]
    Quadrature(String),

    #[error("linear solver did not converge: {0}")]
    Solver(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("minimizer did not converge after {iterations} iterations (last residual {residual:.3e})")]
    MinimizerNonConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid input: {0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
