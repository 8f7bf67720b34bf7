use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown surface `{0}`")]
    UnknownSurface(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("expression error at byte {pos}: {msg}")]
    Expression { pos: usize, msg: String },

    #[error("immersion degenerates at (u, v) = ({u}, {v}): Gram determinant below threshold")]
    Degenerate { u: f64, v: f64 },

    #[error("parameter point (u, v) = ({u}, {v}) lies outside the domain")]
    OutsideDomain { u: f64, v: f64 },

    #[error("base point coincides with the surface at (u, v) = ({u}, {v})")]
    BasePointOnSurface { u: f64, v: f64 },

    #[error(
        "truncation guard: artificial boundary reaches r = {boundary_r}, \
         but t = {t} needs at least {required}; enlarge the domain"
    )]
    TruncationGuard { boundary_r: f64, t: f64, required: f64 },

    #[error("level t = {t} is not regular (min |∇r| = {min_grad_r})")]
    NonRegular { t: f64, min_grad_r: f64 },

    #[error("level t = {t} lies outside the range of r on the grid [{r_min}, {r_max}]")]
    LevelOutOfRange { t: f64, r_min: f64, r_max: f64 },

    #[error("geodesic step left the parameter domain")]
    GeodesicLeftDomain,

    #[error("finite-difference stencil around (u, v) = ({u}, {v}) leaves the domain")]
    InsufficientNeighbors { u: f64, v: f64 },

    #[error("level chain too coarse: {points} points")]
    ChainTooCoarse { points: usize },

    #[error("grid too coarse: {0}")]
    ResolutionTooCoarse(String),

    #[error("no regular level among the requested samples")]
    NoRegularLevels,

    #[error("hypothesis not satisfied: {0}")]
    HypothesisViolated(String),

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
