use serde::Serialize;

use dicke_cavity::Error;

/// Why a command failed; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or invalid configuration or input files (exit 2).
    Config { field: Option<String>, message: String },
    /// A library error during the computation (exit 1).
    Numerical(Error),
    /// A verification suite ran but a check exceeded its tolerance (exit 1).
    Check(String),
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: &'a str,
    kind: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
    message: String,
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config { .. } => 2,
            Failure::Numerical(_) | Failure::Check(_) => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let body = match self {
            Failure::Config { field, message } => ErrorJson {
                error: "config",
                kind: "ConfigError",
                field: field.as_deref(),
                message: message.clone(),
            },
            Failure::Numerical(e) => ErrorJson {
                error: "numerical",
                kind: e.kind(),
                field: None,
                message: e.to_string(),
            },
            Failure::Check(message) => ErrorJson {
                error: "numerical",
                kind: "VerificationFailed",
                field: None,
                message: message.clone(),
            },
        };
        serde_json::to_string(&body).expect("error body serializes")
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Failure::Config {
            field: Some(field.into()),
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput { field, reason } => Failure::Config {
                field: Some(field),
                message: reason,
            },
            other => Failure::Numerical(other),
        }
    }
}
