use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Everything that can go wrong inside the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A schema, config or argument violates its documented invariant.
    InvalidConfig(String),
    /// Input data violates an invariant; `row`/`column` locate the cell when known.
    InvalidData {
        message: String,
        row: Option<usize>,
        column: Option<String>,
    },
    /// Two inputs that must agree in length or width do not.
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    /// The series is not long enough for the requested windowing.
    SeriesTooShort { timesteps: usize, required: usize },
    /// The operation needs discrete features but the schema declares none.
    NoDiscreteFeatures,
    /// A non-finite value appeared while differentiating the named tensor.
    NumericalBlowup { tensor: &'static str },
    /// Training loss became non-finite.
    Diverged { iteration: usize },
    /// A fitting procedure could not produce a valid model.
    FitFailed(String),
    /// A metric is undefined for the given labels.
    Undefined(&'static str),
}

impl Error {
    pub(crate) fn data(message: impl Into<String>) -> Self {
        Error::InvalidData {
            message: message.into(),
            row: None,
            column: None,
        }
    }

    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::InvalidConfig(message.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NumericalBlowup { .. } | Error::Diverged { .. } | Error::FitFailed(_)
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::InvalidData {
                message,
                row,
                column,
            } => {
                write!(f, "{message}")?;
                if let Some(row) = row {
                    write!(f, " at row {row}")?;
                }
                if let Some(column) = column {
                    write!(f, ", column {column:?}")?;
                }
                Ok(())
            }
            Error::ShapeMismatch {
                what,
                expected,
                actual,
            } => write!(f, "{what}: expected {expected}, got {actual}"),
            Error::SeriesTooShort {
                timesteps,
                required,
            } => write!(
                f,
                "series too short: {timesteps} timesteps, need more than {required}"
            ),
            Error::NoDiscreteFeatures => write!(f, "no discrete features"),
            Error::NumericalBlowup { tensor } => {
                write!(f, "numerical blowup in gradient of {tensor}")
            }
            Error::Diverged { iteration } => {
                write!(f, "training diverged at iteration {iteration}")
            }
            Error::FitFailed(msg) => write!(f, "fit failed: {msg}"),
            Error::Undefined(msg) => write!(f, "undefined metric: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
