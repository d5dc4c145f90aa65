use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong across the crate, from bad parameters to
/// mid-run numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown preset `{0}` (available: rb87, li7)")]
    UnknownPreset(String),

    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("no lasing state: epsilon = {epsilon:.6e} <= 0")]
    NoLasingState { epsilon: f64 },

    #[error("Benjamin-Feir margin does not cross zero: margin(Omega = 0) = {margin0:.6e}")]
    NoCrossing { margin0: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("time-step guard violated: {0}")]
    GuardViolation(String),

    #[error("field blow-up at t = {time:.6e}: max density {max_density:.6e}")]
    BlowUp { time: f64, max_density: f64 },

    #[error("wavenumber {q:.6e} outside the grid lattice (largest representable {max:.6e})")]
    OutsideLattice { q: f64, max: f64 },

    #[error("mode q = {0:.6e} was not probed in these records")]
    UnknownMode(f64),

    #[error("fit window [{lo:.6e}, {hi:.6e}] outside the recorded time range")]
    WindowOutOfRange { lo: f64, hi: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(&'static str),

    #[error("invalid sweep range: {0}")]
    RangeSpec(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
