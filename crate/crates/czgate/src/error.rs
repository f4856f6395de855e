use thiserror::Error;

pub type Result<T> = std::result::Result<T, CzError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CzError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("truncation too small: {levels} levels (minimum 5)")]
    Truncation { levels: usize },
    #[error("product dimension {dim} exceeds the limit of 10000")]
    DimensionOverflow { dim: usize },
    #[error("operator basis mismatch: {0}")]
    BasisMismatch(String),
    #[error("ambiguous state labeling at T_c = {t_c}: label {label:?} has overlap {overlap:.3}")]
    Labeling { t_c: f64, label: (usize, usize), overlap: f64 },
    #[error("missing state label {0:?}")]
    MissingLabel((usize, usize)),
    #[error("singular internal scattering loop (|det| = {det:.3e})")]
    Composition { det: f64 },
    #[error("Andreev radicand {radicand:.3e} is negative; scattering matrix is not unitary")]
    Consistency { radicand: f64 },
    #[error("Josephson expansion fit residual {residual:.3e} exceeds 1e-8")]
    FitResidual { residual: f64 },
    #[error("beam-splitter calibration failed: {0}")]
    Calibration(String),
    #[error("propagation did not converge after {halvings} step halvings (change {change:.3e})")]
    Integration { halvings: usize, change: f64 },
    #[error("excessive leakage: |<m|U|m>| = {magnitude:.3} for state {label:?}")]
    Leakage { label: (usize, usize), magnitude: f64 },
    #[error("no coupling: |Delta_CZ| = {delta_cz:.3e} GHz is below 1e-6 GHz")]
    NoCoupling { delta_cz: f64 },
    #[error("time grid too coarse: spacing {spacing:.3e} ns exceeds tau_s/50 = {limit:.3e} ns")]
    Resolution { spacing: f64, limit: f64 },
    #[error("root search failed: {0}")]
    RootSearch(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CzError {
    /// Stable machine-readable identifier used in CLI error records.
    pub fn code(&self) -> &'static str {
        match self {
            CzError::Parameter(_) => "parameter",
            CzError::Truncation { .. } => "truncation",
            CzError::DimensionOverflow { .. } => "dimension_overflow",
            CzError::BasisMismatch(_) => "basis_mismatch",
            CzError::Labeling { .. } => "labeling",
            CzError::MissingLabel(_) => "missing_label",
            CzError::Composition { .. } => "composition",
            CzError::Consistency { .. } => "numerical_consistency",
            CzError::FitResidual { .. } => "fit_residual",
            CzError::Calibration(_) => "calibration",
            CzError::Integration { .. } => "integration",
            CzError::Leakage { .. } => "excessive_leakage",
            CzError::NoCoupling { .. } => "no_coupling",
            CzError::Resolution { .. } => "resolution",
            CzError::RootSearch(_) => "root_search",
            CzError::Config(_) => "config",
            CzError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for CzError {
    fn from(e: std::io::Error) -> Self {
        CzError::Io(e.to_string())
    }
}
