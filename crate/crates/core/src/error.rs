use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which end of a line profile an error or measurement refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Left,
    Right,
}

impl std::fmt::Display for End {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            End::Left => f.write_str("left"),
            End::Right => f.write_str("right"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no sign change for {what} on [{lo}, {hi}]")]
    BracketFailure { what: &'static str, lo: f64, hi: f64 },

    #[error("ODE integration failed at x = {at}: {reason}")]
    NonconvergedOde { at: f64, reason: String },

    #[error("cell problem failed at p = {p}: {source}")]
    CellSolve {
        p: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("exponential weights overflow the floating range (|B| spread = {spread})")]
    QuadratureUnderflow { spread: f64 },

    #[error("trajectory left the invariant band at x = {x} by {excess:e}")]
    BandEscape { x: f64, excess: f64 },

    #[error("asymptotic state unresolved at the {end} end (best residual {residual:e})")]
    AsymptoteUnresolved { end: End, residual: f64 },

    #[error("decay rate unresolved at the {end} end: only {periods} periods above the floor (rate >= {lower_bound})")]
    RateUnresolved {
        end: End,
        periods: usize,
        lower_bound: f64,
    },

    #[error("tail unresolved at the {end} end")]
    TailUnresolved { end: End },

    #[error("time step {dt:e} exceeds the CFL bound {bound:e}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("linear solve failed: {0}")]
    SolverFailure(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("evolution failed at t = {t}: {source}")]
    EvolveFailure {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("insufficient room on the truncated grid: excess {excess:e} > room {room:e}")]
    InsufficientRoom { excess: f64, room: f64 },

    #[error("not enough data: {0}")]
    InsufficientData(String),

    #[error("i/o: {0}")]
    Io(String),
}
