use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DspecError {
    #[error("tail not free: r_max = {r_max} but matching needs r >= {needed}")]
    TailNotFree { r_max: f64, needed: f64 },
    #[error("resolution: h*kappa = {value:.4} exceeds 0.15")]
    Resolution { value: f64 },
    #[error("matching residual {residual:.3e} exceeds 1e-6 (ell = {ell}, kappa = {kappa})")]
    MatchingResidual { ell: usize, kappa: f64, residual: f64 },
    #[error("series not converged: trailing terms {estimate:.3e} at kappa = {kappa}, r = {r}")]
    SeriesNotConverged { estimate: f64, kappa: f64, r: f64 },
    #[error("quadrature stalled: step-halving disagreement {disagreement:.3e}")]
    QuadratureStalled { disagreement: f64 },
    #[error("out of range: {0}")]
    OutOfRange(String),
    #[error("under-resolved: {0}")]
    UnderResolved(String),
    #[error("annulus under-resolved: step {step:.3e} exceeds 2^-j/8 = {limit:.3e}")]
    AnnulusUnderResolved { step: f64, limit: f64 },
    #[error("window too short: {got} times, need at least {need}")]
    WindowTooShort { got: usize, need: usize },
    #[error("fit unstable: Richardson sequence varies by {spread:.3}")]
    FitUnstable { spread: f64 },
    #[error("degenerate direction: |l| = 0")]
    DegenerateDirection,
    #[error("bound states present (counts {counts:?}, slope {slope:.3e})")]
    BoundStatesPresent { counts: Vec<usize>, slope: f64 },
    #[error("blowup guard: |f| = {norm:.3e} exceeds 10 x initial {initial:.3e}")]
    BlowupGuard { norm: f64, initial: f64 },
    #[error("nonlinear substep pole: |1 + i dt u / 2| = {value:.3e}")]
    NonlinearPole { value: f64 },
    #[error("config: {0}")]
    Config(String),
    #[error("cache: {0}")]
    Cache(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for DspecError {
    fn from(e: std::io::Error) -> Self {
        DspecError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for DspecError {
    fn from(e: serde_json::Error) -> Self {
        DspecError::Config(e.to_string())
    }
}

impl DspecError {
    /// Short machine-readable tag used in error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            DspecError::TailNotFree { .. } => "tail_not_free",
            DspecError::Resolution { .. } => "resolution",
            DspecError::MatchingResidual { .. } => "matching_residual",
            DspecError::SeriesNotConverged { .. } => "series_not_converged",
            DspecError::QuadratureStalled { .. } => "quadrature_stalled",
            DspecError::OutOfRange(_) => "out_of_range",
            DspecError::UnderResolved(_) => "under_resolved",
            DspecError::AnnulusUnderResolved { .. } => "annulus_under_resolved",
            DspecError::WindowTooShort { .. } => "window_too_short",
            DspecError::FitUnstable { .. } => "fit_unstable",
            DspecError::DegenerateDirection => "degenerate_direction",
            DspecError::BoundStatesPresent { .. } => "bound_states_present",
            DspecError::BlowupGuard { .. } => "blowup_guard",
            DspecError::NonlinearPole { .. } => "nonlinear_pole",
            DspecError::Config(_) => "config",
            DspecError::Cache(_) => "cache",
            DspecError::Io(_) => "io",
        }
    }

    /// Guard and configuration failures map to exit code 2.
    pub fn is_guard(&self) -> bool {
        matches!(
            self,
            DspecError::TailNotFree { .. }
                | DspecError::Resolution { .. }
                | DspecError::Config(_)
                | DspecError::Cache(_)
                | DspecError::Io(_)
                | DspecError::AnnulusUnderResolved { .. }
                | DspecError::WindowTooShort { .. }
                | DspecError::OutOfRange(_)
                | DspecError::BoundStatesPresent { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, DspecError>;
