use thiserror::Error;

/// Errors produced by circuit construction, simulation, cutting and recombination.
#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit index {qubit} out of range for register of {num_qubits} qubits")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("gate {kind} expects {expected} qubit(s), got {got}")]
    BadGateArity {
        kind: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("gate acts twice on qubit {0}")]
    DuplicateQubit(usize),

    #[error("gate duration must be non-negative, got {0}")]
    NegativeDuration(f64),

    #[error("measurement on qubit {0} is not terminal on its wire")]
    MeasureNotTerminal(usize),

    #[error("preparation on qubit {0} must be the first operation on its wire")]
    PrepNotInitial(usize),

    #[error("GHZ circuit requires an even qubit count of at least 2, got {0}")]
    BadGhzSize(usize),

    #[error("operator is not Hermitian (max deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("Kraus set is not trace preserving (max deviation {0:.3e})")]
    KrausIncomplete(f64),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),

    #[error("unphysical coherence times: t2 = {t2} exceeds 2*t1 = {}", 2.0 * t1)]
    UnphysicalT2 { t1: f64, t2: f64 },

    #[error("time parameter must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("simulation of {requested} qubits exceeds the dense cap of {cap}")]
    TooManyQubits { requested: usize, cap: usize },

    #[error("shot count must be positive")]
    ZeroShots,

    #[error("cut specification does not reference a valid wire edge: {0}")]
    BadCutEdge(String),

    #[error("cut specification leaves the circuit in {0} component(s); at least 2 required")]
    CutDoesNotDisconnect(usize),

    #[error("fragment count {k} outside [2, {max}]")]
    BadFragmentCount { k: usize, max: usize },

    #[error("variant set is inconsistent with the fragment: {0}")]
    InconsistentVariants(String),

    #[error("bitstring length {got} does not match {expected} output bits")]
    BadBitstringLength { got: usize, expected: usize },

    #[error("circuit with {circuit} qubits does not fit coupling graph with {graph} vertices")]
    CircuitTooLarge { circuit: usize, graph: usize },

    #[error("coupling graph is invalid: {0}")]
    BadCouplingGraph(String),

    #[error("recombination network is inconsistent: {0}")]
    BadNetwork(String),

    #[error("contraction requires a path-shaped network")]
    NotAChain,

    #[error("network is disconnected")]
    DisconnectedNetwork,

    #[error("invalid experiment configuration: {0}")]
    BadConfig(String),

    #[error("scenario grids do not match: {0}")]
    GridMismatch(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
