use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("fractional order {0} outside (0, 1]")]
    InvalidOrder(f64),

    #[error("invalid length {name} = {value}")]
    InvalidLength { name: &'static str, value: f64 },

    #[error("kernel evaluated at its singular point x = s = {0}")]
    SingularPoint(f64),

    #[error("point s = {s} is not on the {side} horizon of x = {x}")]
    OutsideHorizon { x: f64, s: f64, side: &'static str },

    #[error("horizon is degenerate on both sides")]
    DegenerateHorizon,

    #[error("gauss rule order {0} outside [2, 16]")]
    GaussOrder(usize),

    #[error("coordinate {x} outside [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    #[error("mesh needs at least 2 elements, got {0}")]
    TooFewElements(usize),

    #[error("system with {dofs} dofs exceeds the dense storage cap of {cap}")]
    TooManyDofs { dofs: usize, cap: usize },

    #[error("constraints leave {0} rigid-body mode(s) free: system is singular")]
    Unconstrained(usize),

    #[error("constraint on dof {dof} outside system of size {size}")]
    BadConstraint { dof: usize, size: usize },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("{0}")]
    Unsupported(String),
}
