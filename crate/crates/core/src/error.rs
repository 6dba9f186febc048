use thiserror::Error;

/// Errors produced by the numerical kernels, estimators and data handling.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of a mathematical function.
    #[error("domain error in {function}: {detail}")]
    Domain { function: &'static str, detail: String },

    /// A parameter vector violates the invariants of its family.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A caller-side precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// An iterative solver did not converge or could not bracket a root.
    #[error("convergence failure in {context}: {detail}")]
    Convergence {
        context: &'static str,
        detail: String,
        /// Best point found before giving up, when the solver has one.
        best: Option<Vec<f64>>,
    },

    /// Estimating equations have no admissible solution for this data.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The sample is empty (possibly after cleaning).
    #[error("empty sample: {0}")]
    EmptySample(String),

    /// Every split point left all weight on one side.
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),

    /// A design matrix lost column rank.
    #[error("singular design: {0}")]
    SingularDesign(String),

    /// A parameter series cannot be normalized.
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    /// The Gini formula was evaluated at its pole.
    #[error("singularity at alpha = {alpha}")]
    Singularity { alpha: f64 },

    /// All candidate shift values (or all replicates) failed.
    #[error("fit failed: {0}")]
    Fit(String),

    /// Input data could not be read or parsed.
    #[error("input error: {0}")]
    Input(String),
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain { function, detail: detail.into() }
    }

    pub(crate) fn convergence(context: &'static str, detail: impl Into<String>) -> Self {
        Error::Convergence { context, detail: detail.into(), best: None }
    }

    /// Short machine-readable tag, used in CLI error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Parameter(_) => "parameter",
            Error::Precondition(_) => "precondition",
            Error::Convergence { .. } => "convergence",
            Error::Infeasible(_) => "infeasible",
            Error::EmptySample(_) => "empty_sample",
            Error::DegenerateSplit(_) => "degenerate_split",
            Error::SingularDesign(_) => "singular_design",
            Error::DegenerateSeries(_) => "degenerate_series",
            Error::Singularity { .. } => "singularity",
            Error::Fit(_) => "fit",
            Error::Input(_) => "input",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
