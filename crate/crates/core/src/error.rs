use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({re}, {im}) is not inside the open unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("kernel parameter constraint violated: {0}")]
    Constraint(String),

    #[error("quadrature did not reach tolerance: estimate {estimate}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("measure has infinite total variation (truncated mass verdict {verdict})")]
    InfiniteMass { verdict: String },

    #[error("point at |z| = {modulus} is beyond the lattice truncation radius {rho_max}")]
    OutsideLattice { modulus: f64, rho_max: f64 },

    #[error("lattice cell {index} violates containment: {reason}")]
    LatticeContainment { index: usize, reason: String },

    #[error("point {index} has no cell in the lattice")]
    Uncovered { index: usize },

    #[error("lattice center {0} is the origin")]
    ZeroCenter(usize),

    #[error("{0} coefficients supplied for a lattice with {1} centers")]
    CoefficientCount(usize, usize),

    #[error("moment arguments too large: k + N = {0}")]
    MomentOverflow(u64),

    #[error("plane truncation R = {radius} leaves tail estimate {tail:e} above tolerance")]
    Truncation { radius: f64, tail: f64 },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("derivative evaluation failed at ({re}, {im})")]
    Derivative { re: f64, im: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn require(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
