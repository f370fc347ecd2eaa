use thiserror::Error;

/// Errors raised by the mining engine.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("machine has no states")]
    NoStates,
    #[error("machine has an empty {0} alphabet")]
    EmptyAlphabet(&'static str),
    #[error("duplicate {kind} `{name}`")]
    Duplicate { kind: &'static str, name: String },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("unknown input symbol `{0}`")]
    UnknownInput(String),
    #[error("unknown output symbol `{0}`")]
    UnknownOutput(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error("transitions `{0}` and `{1}` have the same source, input, output and target")]
    DuplicateTransition(String, String),
    #[error("machine is not complete: state `{state}` has no transition on input `{input}`")]
    Incomplete { state: String, input: String },
    #[error("machine is not initially connected: state `{0}` is unreachable")]
    Disconnected(String),
    #[error("machine is not deterministic: {0}")]
    Nondeterministic(String),
    #[error("transition sequence is not a path from the initial state at position {0}")]
    BrokenPath(usize),
    #[error("execution uses two transitions from state `{state}` on input `{input}`")]
    NondeterministicExecution { state: String, input: String },
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("input/output alphabets of the two machines differ")]
    AlphabetMismatch,
    #[error("more than {0} deterministic executions; raise the execution cap")]
    ExecutionCapExceeded(usize),
    #[error("response `{0}` is not plausible for the test")]
    ResponseNotOffered(String),
    #[error("formula is unsatisfiable")]
    Unsatisfiable,
    #[error("pair search inconclusive after examining {0} candidates")]
    Inconclusive(usize),
    #[error("uncertainty degree {degree} is not available: {reason}")]
    InvalidDegree { degree: usize, reason: String },
    #[error("mined machine is not equivalent to the plant (seed {0})")]
    Soundness(u64),
    #[error("time budget exceeded")]
    BudgetExceeded,
    #[error("session protocol violation: {0}")]
    Protocol(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("transcript: {0}")]
    Transcript(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
