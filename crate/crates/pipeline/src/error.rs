use std::fmt;
use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Workflow stage an error surfaced in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Partitioning the variables (and loading the inputs they come from).
    S1,
    /// Coding and ordination.
    S2,
    /// Stopping rule and distances.
    S3,
    /// Alignment, ranking and joint density.
    S4,
    /// Detection.
    S5,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Stage::S1 => "S1 partition",
            Stage::S2 => "S2 transform",
            Stage::S3 => "S3 distance",
            Stage::S4 => "S4 joint distance",
            Stage::S5 => "S5 detect",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{}: format error{}: {message}", path.display(), at_line(*line))]
    Format {
        path: PathBuf,
        line: Option<u64>,
        message: String,
    },

    #[error("{}: parse error at line {line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{}: invalid value at line {line}: {message}", path.display())]
    Value {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{stage}: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: rankjoint_core::Error,
    },
}

fn at_line(line: Option<u64>) -> String {
    line.map(|l| format!(" at line {l}")).unwrap_or_default()
}

impl PipelineError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        PipelineError::Io {
            path: path.into(),
            source,
        }
    }

    /// The stage a failure is attributed to, if any.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            PipelineError::Stage { stage, .. } => Some(*stage),
            _ => None,
        }
    }

    /// Process exit code: 2 config, 3 data or format, 4 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Stage {
                source: rankjoint_core::Error::NumericalFailure { .. },
                ..
            } => 4,
            _ => 3,
        }
    }
}

pub type Result<T, E = PipelineError> = std::result::Result<T, E>;

/// Tags core errors with the stage they came from.
pub(crate) trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T>;
}

impl<T> AtStage<T> for rankjoint_core::Result<T> {
    fn at(self, stage: Stage) -> Result<T> {
        self.map_err(|source| PipelineError::Stage { stage, source })
    }
}
