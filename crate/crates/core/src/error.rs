use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error in {context}: expected {expected}, got {actual}")]
    Shape {
        context: String,
        expected: String,
        actual: String,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("non-finite gradient in parameter `{name}` at element {element}")]
    NonFiniteGradient { name: String, element: usize },

    #[error(
        "pressure solve did not converge: residual {residual:.3e} after {iterations} iterations \
         (tolerance {tolerance:.1e})"
    )]
    PressureNoConvergence {
        residual: f64,
        iterations: usize,
        tolerance: f64,
    },

    #[error("simulation diverged: {0}")]
    SimulationDiverged(String),

    #[error("rollout diverged at step {step}: {detail}")]
    RolloutDiverged { step: usize, detail: String },

    #[error("unsatisfiable scene spec: {0}")]
    UnsatisfiableSpec(String),

    #[error("non-finite loss at training step {step} on sample {sample}")]
    NonFiniteLoss { step: u64, sample: String },

    #[error("checkpoint incompatible: {0}")]
    CheckpointMismatch(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn shape(context: impl Into<String>, expected: impl ToString, actual: impl ToString) -> Self {
        Error::Shape {
            context: context.into(),
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }
}
