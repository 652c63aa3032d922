//! Gate-level circuit representation and its wire DAG view.
//!
//! Circuits are ordered gate lists over a qubit register. Qubit 0 is the
//! leftmost bit of every bitstring, and distributions index outcomes by the
//! big-endian integer of that bitstring. The DAG view adds per-wire INIT and
//! TERMINAL pseudo-vertices so that wire segments become first-class edges,
//! which is what the cutter removes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::PauliAxis;

/// Default duration of one-qubit gates in nanoseconds.
pub const ONE_QUBIT_GATE_NS: f64 = 50.0;
/// Default duration of two-qubit gates in nanoseconds.
pub const TWO_QUBIT_GATE_NS: f64 = 300.0;
/// Default duration of a SWAP, costed as three two-qubit gates.
pub const SWAP_GATE_NS: f64 = 900.0;

/// Gate vocabulary. `Prep` and `Measure` are pseudo-gates lowered to concrete
/// rotations before simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    X,
    SDag,
    Cnot,
    Swap,
    PrepPauliEigenstate(PauliAxis, u8),
    Measure(PauliAxis),
}

/// Duration/noise class of a gate kind, used as a key in duration tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateClass {
    H,
    X,
    SDag,
    Cnot,
    Swap,
    Prep,
    Measure,
}

impl GateKind {
    pub fn class(&self) -> GateClass {
        match self {
            GateKind::H => GateClass::H,
            GateKind::X => GateClass::X,
            GateKind::SDag => GateClass::SDag,
            GateKind::Cnot => GateClass::Cnot,
            GateKind::Swap => GateClass::Swap,
            GateKind::PrepPauliEigenstate(..) => GateClass::Prep,
            GateKind::Measure(_) => GateClass::Measure,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Swap => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::SDag => "sdg",
            GateKind::Cnot => "cnot",
            GateKind::Swap => "swap",
            GateKind::PrepPauliEigenstate(..) => "prep",
            GateKind::Measure(_) => "measure",
        }
    }

    fn default_duration(&self) -> f64 {
        match self {
            GateKind::Cnot => TWO_QUBIT_GATE_NS,
            GateKind::Swap => SWAP_GATE_NS,
            GateKind::PrepPauliEigenstate(..) | GateKind::Measure(_) => 0.0,
            _ => ONE_QUBIT_GATE_NS,
        }
    }
}

/// A gate applied to an ordered list of qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub duration_ns: f64,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Self {
        let duration_ns = kind.default_duration();
        Gate {
            kind,
            qubits,
            duration_ns,
        }
    }

    pub fn h(q: usize) -> Self {
        Gate::new(GateKind::H, vec![q])
    }

    pub fn x(q: usize) -> Self {
        Gate::new(GateKind::X, vec![q])
    }

    pub fn s_dag(q: usize) -> Self {
        Gate::new(GateKind::SDag, vec![q])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cnot, vec![control, target])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate::new(GateKind::Swap, vec![a, b])
    }

    pub fn prep(axis: PauliAxis, eigenindex: u8, q: usize) -> Self {
        Gate::new(GateKind::PrepPauliEigenstate(axis, eigenindex), vec![q])
    }

    pub fn measure(axis: PauliAxis, q: usize) -> Self {
        Gate::new(GateKind::Measure(axis), vec![q])
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let expected = self.kind.arity();
        if self.qubits.len() != expected {
            return Err(Error::BadGateArity {
                kind: self.kind.name(),
                expected,
                got: self.qubits.len(),
            });
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    num_qubits,
                });
            }
            if self.qubits[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        if self.duration_ns < 0.0 {
            return Err(Error::NegativeDuration(self.duration_ns));
        }
        if let GateKind::PrepPauliEigenstate(_, b) = self.kind {
            if b > 1 {
                return Err(Error::BadProbability(f64::from(b)));
            }
        }
        Ok(())
    }
}

/// An ordered gate list over a fixed-size register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
    pub label: String,
}

impl Circuit {
    pub fn new(num_qubits: usize, label: impl Into<String>) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::new(),
            label: label.into(),
        }
    }

    /// Append a gate, enforcing arity/range invariants and keeping
    /// measurements terminal on their wires.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        for &q in &gate.qubits {
            if self.wire_is_measured(q) {
                return Err(Error::MeasureNotTerminal(q));
            }
        }
        // preparations assume a fresh |0> wire
        if matches!(gate.kind, GateKind::PrepPauliEigenstate(..))
            && self.gates.iter().any(|g| g.qubits.contains(&gate.qubits[0]))
        {
            return Err(Error::PrepNotInitial(gate.qubits[0]));
        }
        self.gates.push(gate);
        Ok(())
    }

    fn wire_is_measured(&self, qubit: usize) -> bool {
        self.gates.iter().any(|g| {
            matches!(g.kind, GateKind::Measure(_)) && g.qubits.contains(&qubit)
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 {
            return Err(Error::BadConfig("circuit needs at least one qubit".into()));
        }
        let mut measured = vec![false; self.num_qubits];
        let mut touched = vec![false; self.num_qubits];
        for gate in &self.gates {
            gate.validate(self.num_qubits)?;
            for &q in &gate.qubits {
                if measured[q] {
                    return Err(Error::MeasureNotTerminal(q));
                }
            }
            if let GateKind::PrepPauliEigenstate(..) = gate.kind {
                if touched[gate.qubits[0]] {
                    return Err(Error::PrepNotInitial(gate.qubits[0]));
                }
            }
            if let GateKind::Measure(_) = gate.kind {
                measured[gate.qubits[0]] = true;
            }
            for &q in &gate.qubits {
                touched[q] = true;
            }
        }
        Ok(())
    }

    /// Indices of gates acting on the given wire, in circuit order.
    pub fn gates_on_wire(&self, qubit: usize) -> Vec<usize> {
        self.gates
            .iter()
            .enumerate()
            .filter(|(_, g)| g.qubits.contains(&qubit))
            .map(|(i, _)| i)
            .collect()
    }
}

/// GHZ-type benchmark ladder: H on qubit 0, a CNOT chain down the register,
/// then X on the second half. The noiseless output is an equal superposition
/// of 0^{m/2} 1^{m/2} and 1^{m/2} 0^{m/2}, and every ladder wire admits a
/// single-wire cut between its two CNOTs.
pub fn build_ghz_circuit(m: usize) -> Result<Circuit> {
    if m < 2 || !m.is_multiple_of(2) {
        return Err(Error::BadGhzSize(m));
    }
    let mut circuit = Circuit::new(m, format!("ghz-{m}"));
    circuit.push(Gate::h(0))?;
    for i in 0..m - 1 {
        circuit.push(Gate::cnot(i, i + 1))?;
    }
    for q in m / 2..m {
        circuit.push(Gate::x(q))?;
    }
    Ok(circuit)
}

/// Vertex of the circuit DAG.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DagVertex {
    /// Start-of-wire pseudo-vertex.
    Init { qubit: usize },
    /// End-of-wire pseudo-vertex.
    Terminal { qubit: usize },
    /// Gate vertex, indexing into the source circuit's gate list.
    Gate { index: usize },
}

/// Directed wire segment between two vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DagEdge {
    pub source: usize,
    pub target: usize,
    pub qubit: usize,
}

/// Wire DAG of a circuit: one INIT and one TERMINAL per wire, one vertex per
/// gate, and one edge per wire segment. Carries the gate list so the circuit
/// is fully recoverable from the DAG.
#[derive(Debug, Clone)]
pub struct CircuitDag {
    pub num_qubits: usize,
    pub label: String,
    pub vertices: Vec<DagVertex>,
    pub edges: Vec<DagEdge>,
    pub gates: Vec<Gate>,
}

impl CircuitDag {
    pub fn init_vertex(&self, qubit: usize) -> usize {
        qubit
    }

    pub fn terminal_vertex(&self, qubit: usize) -> usize {
        self.num_qubits + qubit
    }

    pub fn gate_vertex(&self, gate_index: usize) -> usize {
        2 * self.num_qubits + gate_index
    }

    /// Gate indices along the given wire, recovered from the edge structure.
    pub fn gate_sequence_on_wire(&self, qubit: usize) -> Vec<usize> {
        let mut sequence = Vec::new();
        let mut cursor = self.init_vertex(qubit);
        let terminal = self.terminal_vertex(qubit);
        while cursor != terminal {
            let edge = self
                .edges
                .iter()
                .find(|e| e.qubit == qubit && e.source == cursor)
                .expect("wire forms a path from INIT to TERMINAL");
            cursor = edge.target;
            if let DagVertex::Gate { index } = self.vertices[cursor] {
                sequence.push(index);
            }
        }
        sequence
    }
}

/// Build the wire DAG of a circuit.
pub fn to_dag(circuit: &Circuit) -> Result<CircuitDag> {
    circuit.validate()?;
    let m = circuit.num_qubits;
    let mut vertices = Vec::with_capacity(2 * m + circuit.gates.len());
    for qubit in 0..m {
        vertices.push(DagVertex::Init { qubit });
    }
    for qubit in 0..m {
        vertices.push(DagVertex::Terminal { qubit });
    }
    for index in 0..circuit.gates.len() {
        vertices.push(DagVertex::Gate { index });
    }
    let mut last_on_wire: Vec<usize> = (0..m).collect();
    let mut edges = Vec::new();
    for (index, gate) in circuit.gates.iter().enumerate() {
        let vertex = 2 * m + index;
        for &qubit in &gate.qubits {
            edges.push(DagEdge {
                source: last_on_wire[qubit],
                target: vertex,
                qubit,
            });
            last_on_wire[qubit] = vertex;
        }
    }
    for (qubit, &last) in last_on_wire.iter().enumerate() {
        edges.push(DagEdge {
            source: last,
            target: m + qubit,
            qubit,
        });
    }
    Ok(CircuitDag {
        num_qubits: m,
        label: circuit.label.clone(),
        vertices,
        edges,
        gates: circuit.gates.clone(),
    })
}

#[derive(Serialize, Deserialize)]
struct GateParamsDto {
    #[serde(skip_serializing_if = "Option::is_none")]
    axis: Option<PauliAxis>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenindex: Option<u8>,
}

#[derive(Serialize, Deserialize)]
struct GateDto {
    kind: String,
    qubits: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    params: Option<GateParamsDto>,
}

#[derive(Serialize, Deserialize)]
struct CircuitDto {
    num_qubits: usize,
    #[serde(default)]
    label: String,
    gates: Vec<GateDto>,
}

impl Circuit {
    fn to_dto(&self) -> CircuitDto {
        CircuitDto {
            num_qubits: self.num_qubits,
            label: self.label.clone(),
            gates: self
                .gates
                .iter()
                .map(|g| GateDto {
                    kind: g.kind.name().to_string(),
                    qubits: g.qubits.clone(),
                    params: match g.kind {
                        GateKind::PrepPauliEigenstate(axis, b) => Some(GateParamsDto {
                            axis: Some(axis),
                            eigenindex: Some(b),
                        }),
                        GateKind::Measure(axis) => Some(GateParamsDto {
                            axis: Some(axis),
                            eigenindex: None,
                        }),
                        _ => None,
                    },
                })
                .collect(),
        }
    }

    fn from_dto(dto: CircuitDto) -> Result<Circuit> {
        let mut circuit = Circuit::new(dto.num_qubits, dto.label);
        for gate in dto.gates {
            let axis = gate.params.as_ref().and_then(|p| p.axis);
            let eigenindex = gate.params.as_ref().and_then(|p| p.eigenindex);
            let kind = match gate.kind.as_str() {
                "h" => GateKind::H,
                "x" => GateKind::X,
                "sdg" => GateKind::SDag,
                "cnot" => GateKind::Cnot,
                "swap" => GateKind::Swap,
                "prep" => GateKind::PrepPauliEigenstate(
                    axis.ok_or_else(|| Error::BadConfig("prep gate needs an axis".into()))?,
                    eigenindex
                        .ok_or_else(|| Error::BadConfig("prep gate needs an eigenindex".into()))?,
                ),
                "measure" => GateKind::Measure(
                    axis.ok_or_else(|| Error::BadConfig("measure gate needs an axis".into()))?,
                ),
                other => {
                    return Err(Error::BadConfig(format!("unknown gate kind '{other}'")));
                }
            };
            circuit.push(Gate::new(kind, gate.qubits))?;
        }
        Ok(circuit)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_dto()).expect("circuit serialization")
    }

    pub fn from_json(text: &str) -> Result<Circuit> {
        let dto: CircuitDto = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "parsing circuit".into(),
            source,
        })?;
        Circuit::from_dto(dto)
    }
}

impl Serialize for Circuit {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_dto().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let dto = CircuitDto::deserialize(deserializer)?;
        Circuit::from_dto(dto).map_err(serde::de::Error::custom)
    }
}
