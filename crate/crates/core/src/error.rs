use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid masses: {0}")]
    InvalidMasses(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("collision between bodies {i} and {j}: distance {distance:e} below tolerance {tolerance:e}")]
    Collision {
        i: usize,
        j: usize,
        distance: f64,
        tolerance: f64,
    },

    #[error("unknown seed shape `{0}`")]
    UnknownSeed(String),

    #[error("axis is not vertical: component {component:e} inside the configuration span")]
    AxisNotVertical { component: f64 },

    #[error("vector is not in the Hessian kernel: relative residual {residual:e}")]
    NotInKernel { residual: f64 },

    #[error("shifted Wintner-Conley matrix has rank {rank}, expected rank one")]
    RankFailure { rank: usize },

    #[error("rank-one factor of the shifted matrix is negative (eigenvalue {eigenvalue:e})")]
    NegativeFactor { eigenvalue: f64 },

    #[error("barycentric coordinate of body {body} does not vanish: {value:e}")]
    DeltaNotVanishing { body: usize, value: f64 },

    #[error("bodies are not cocircular: radial deviation {deviation:e}")]
    NotCocircular { deviation: f64 },

    #[error("no admissible apex height: {0}")]
    InfeasibleHeight(String),

    #[error("barycentric plane has dimension {0}, expected 2")]
    DegeneratePlane(usize),

    #[error("barycentric coordinate of body {0} vanishes identically (four collinear bodies)")]
    VanishingLine(usize),

    #[error("three zero lines coincide (bodies {0:?}), which signals a collision")]
    TripleCoincidence(Vec<usize>),

    #[error("bodies {0}, {1}, {2} are collinear")]
    CollinearTriple(usize, usize, usize),

    #[error("invalid Dziobek sample: {0}")]
    InvalidSample(String),

    #[error("inequality violated: {0}")]
    InequalityViolation(String),

    #[error("configuration is not central: relative residual {residual:e}")]
    NotCentral { residual: f64 },

    #[error("unknown oracle `{0}`")]
    UnknownOracle(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
