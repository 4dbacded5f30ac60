use std::error::Error;
use std::fmt;

use maskprompt::compose::ComposeError;
use maskprompt::eval::EvalError;
use maskprompt::mask::MaskError;
use maskprompt::pipeline::{ConfigError, SegmenterError};
use maskprompt::storage::StorageError;
use maskprompt::PipelineError;

/// A failure sorted by exit code.
#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Io(String),
    Contract(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Io(_) => 2,
            Failure::Contract(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(m) | Failure::Io(m) | Failure::Contract(m) => f.write_str(m),
        }
    }
}

fn chain(e: &dyn Error) -> String {
    let mut msg = e.to_string();
    let mut cur = e.source();
    while let Some(s) = cur {
        let next = s.to_string();
        if !msg.contains(&next) {
            msg.push_str(": ");
            msg.push_str(&next);
        }
        cur = s.source();
    }
    msg
}

impl From<StorageError> for Failure {
    fn from(e: StorageError) -> Self {
        if e.is_io() {
            Failure::Io(chain(&e))
        } else {
            Failure::Validation(chain(&e))
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Storage(s) => s.into(),
            PipelineError::ContractViolation { .. } => Failure::Contract(chain(&e)),
            PipelineError::Segmenter {
                source: SegmenterError::MissingPredictions { .. } | SegmenterError::Failed(_),
                ..
            } => Failure::Io(chain(&e)),
            other => Failure::Validation(chain(&other)),
        }
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Failure {
            fn from(e: $t) -> Self {
                Failure::Validation(chain(&e))
            }
        }
    )*};
}

validation_from!(ConfigError, MaskError, ComposeError, EvalError);

pub fn io(path: &std::path::Path, e: std::io::Error) -> Failure {
    Failure::Io(format!("{}: {e}", path.display()))
}
