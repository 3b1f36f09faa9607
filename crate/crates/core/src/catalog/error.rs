use crate::algebra::VarError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("line {line}: unbound name `{name}`")]
    UnboundName { name: String, line: usize },
    #[error("line {line}: duplicate definition of `{name}`")]
    DuplicateGenerator { name: String, line: usize },
    #[error("system defines no Hamiltonian `H`")]
    MissingHamiltonian,
    #[error("unknown built-in system `{0}`")]
    UnknownSystem(String),
    #[error("no variant labelled \"{0}\"")]
    UnknownVariant(String),
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error(transparent)]
    Vars(#[from] VarError),
}

impl CatalogError {
    pub fn syntax(line: usize, col: usize, message: impl Into<String>) -> Self {
        CatalogError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    pub fn invalid(line: usize, message: impl Into<String>) -> Self {
        CatalogError::Invalid {
            line,
            message: message.into(),
        }
    }
}
