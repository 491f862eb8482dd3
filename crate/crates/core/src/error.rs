use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the domain an operation supports.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or iteration hit its cap before its stopping rule fired.
    #[error("series did not converge after {terms} terms")]
    SeriesConvergence { terms: usize },

    /// Right-hand side name not present in the registry.
    #[error("unknown right-hand side `{name}` (known: {known})")]
    UnknownRhs { name: String, known: String },

    /// A quantity that must be finite was NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// Interval with a >= T or similar degenerate geometry.
    #[error("degenerate interval [{lo}, {hi}]")]
    DegenerateInterval { lo: f64, hi: f64 },

    /// Trajectory asked for a value outside its node range.
    #[error("t = {t} outside trajectory range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    /// Trajectory does not span the interval an operation needs.
    #[error("trajectory over [{have_lo}, {have_hi}] does not cover [{need_lo}, {need_hi}]")]
    Coverage {
        need_lo: f64,
        need_hi: f64,
        have_lo: f64,
        have_hi: f64,
    },

    /// Invalid problem or configuration value.
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// Solution magnitude exceeded the blow-up guard.
    #[error("solution blew up at node {node} (t = {t}, |y| = {value:e})")]
    BlowUp { node: usize, t: f64, value: f64 },

    /// Implicit corrector or Picard iteration failed to settle.
    #[error("no convergence after {iterations} iterations (last contraction ratio {ratio})")]
    NonConvergence { iterations: usize, ratio: f64 },

    /// Shooting could not find a sign change.
    #[error("no sign change of the shooting residual on [{lo}, {hi}]")]
    Bracketing { lo: f64, hi: f64 },

    /// Kernel evaluated on one of its singular lines.
    #[error("kernel is singular at s = {s} (t = {t}, T = {terminal})")]
    Singular { t: f64, s: f64, terminal: f64 },

    /// Regression input that admits no fit.
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// Configuration document failed validation; every violation is listed.
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Schema(Vec<String>),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Solver-side failures, as opposed to bad input.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::BlowUp { .. }
                | Error::NonConvergence { .. }
                | Error::Bracketing { .. }
                | Error::SeriesConvergence { .. }
                | Error::NonFinite(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
