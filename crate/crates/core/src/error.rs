use alloc::string::String;

/// Errors raised by ansatz construction, simulation and optimization.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("expected {expected} parameters, got {got}")]
    ParamCount { expected: usize, got: usize },
    #[error("block signature has no wires")]
    EmptyBlock,
    #[error("wire signature is not square: {inputs} inputs vs {outputs} outputs")]
    NonSquareSignature { inputs: usize, outputs: usize },
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("site ({0}, {1}) is outside the lattice")]
    SiteOutOfBounds(usize, usize),
    #[error("frontier of {wires} wires exceeds the budget of {budget}")]
    MemoryBudget { wires: usize, budget: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite gradient entry at index {0}")]
    NonFiniteGradient(usize),
    #[error("eigensolver did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("no hardware-efficient depth within 10% of {target} gates")]
    NoMatchingDepth { target: usize },
    #[error("target energy {target} not reached within {steps} steps (best {best})")]
    TargetUnreached { target: f64, steps: usize, best: f64 },
    #[error("shot count must be at least 1")]
    InvalidShots,
    #[error("invalid term: {0}")]
    InvalidTerm(String),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = core::result::Result<T, Error>;
