use rupture_analysis::AnalysisError;
use rupture_core::ModelError;
use rupture_pde::PdeError;
use rupture_similarity::SimilarityError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config syntax: {0}")]
    Syntax(String),
    #[error("config: {0}")]
    Schema(String),
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: String, reason: String },
    #[error("override: {0}")]
    Override(String),
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<ModelError> for ConfigError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidParameter { name, reason } => ConfigError::invalid(field_path(name), reason),
            ModelError::NonPositiveFilm { .. } => ConfigError::invalid("ic.delta", e.to_string()),
        }
    }
}

fn field_path(name: &str) -> String {
    match name {
        "B" | "m" | "n" | "L" => format!("model.{name}"),
        other => format!("numerics.{other}"),
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("solver failure: {0}")]
    Solver(String),
    #[error("analysis failure: {0}")]
    Analysis(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Analysis(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

impl From<PdeError> for CliError {
    fn from(e: PdeError) -> Self {
        CliError::Solver(e.to_string())
    }
}

impl From<SimilarityError> for CliError {
    fn from(e: SimilarityError) -> Self {
        CliError::Analysis(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Analysis(e.to_string())
    }
}
