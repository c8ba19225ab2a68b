use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Pfaffian needs an even order, got {order}")]
    OddOrder { order: usize },

    #[error("matrix is not antisymmetric: max |A + A^T| = {max_deviation:e} exceeds {tolerance:e}")]
    NotAntisymmetric { max_deviation: f64, tolerance: f64 },

    #[error("order {order} exceeds the combinatorial oracle limit of {max}")]
    OrderTooLarge { order: usize, max: usize },

    #[error("entry degree {found} exceeds the declared bound {bound}")]
    DegreeBound { found: usize, bound: usize },

    #[error("interpolation residual {residual:e} above tolerance {tolerance:e}")]
    InterpolationResidual { residual: f64, tolerance: f64 },

    #[error("interpolated polynomial has degree above {expected} (leading term {excess:e})")]
    DegreeOverflow { expected: usize, excess: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("quadrature grid of {nodes} nodes is below the required {required}")]
    GridTooCoarse { nodes: usize, required: usize },

    #[error("result should be real but has imaginary part {imag:e} (real part {real:e})")]
    ImaginaryResidual { real: f64, imag: f64 },

    #[error("coincident test points within species {species}")]
    CoincidentPoints { species: &'static str },

    #[error("oracle integration dimension too large: {0}")]
    DimensionTooLarge(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
