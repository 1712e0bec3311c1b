use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SurveyError {
    #[error("schema error: expected column `{expected}` at position {position}, found `{found}`")]
    Schema {
        expected: &'static str,
        position: usize,
        found: String,
    },

    #[error("line {line}: cannot parse `{value}` in column `{column}` as a number")]
    Parse {
        line: u64,
        column: String,
        value: String,
    },

    #[error("line {line}: negative value {value} in column `{column}`")]
    Negative { line: u64, column: String, value: f64 },

    #[error("field `{0}` has a single respondent; the leave-one-out average is undefined")]
    SingletonField(String),

    #[error("record `{0}` reports zero fundraising time")]
    ZeroFundraising(String),

    #[error("no records to summarize")]
    Empty,

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("log transform of nonpositive value {value} in `{variable}`")]
    NonPositiveLog { variable: String, value: f64 },

    #[error("outcome `{variable}` has negative value {value}")]
    NegativeOutcome { variable: String, value: f64 },

    #[error("design matrix is rank deficient: column `{column}` is collinear with {with:?}")]
    RankDeficient { column: String, with: Vec<String> },

    #[error("spline knots are not distinct for `{0}`")]
    DegenerateKnots(String),

    #[error("Poisson fit did not converge after {iterations} iterations (max score {score:e})")]
    NonConvergence { iterations: usize, score: f64 },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl SurveyError {
    pub fn is_numerical(&self) -> bool {
        matches!(self, SurveyError::NonConvergence { .. })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Model(#[from] contest_core::Error),

    #[error(transparent)]
    Survey(#[from] SurveyError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),
}

impl AppError {
    /// Process exit code: 1 for numerical failures, 2 for everything the
    /// caller can fix.
    pub fn exit_code(&self) -> i32 {
        let numerical = match self {
            AppError::Model(e) => e.is_numerical(),
            AppError::Survey(e) => e.is_numerical(),
            _ => false,
        };
        if numerical {
            1
        } else {
            2
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }
}
