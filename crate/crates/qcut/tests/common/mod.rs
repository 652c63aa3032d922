//! Test-side oracles, independent of the library's simulation path.
//!
//! The statevector engine here reimplements gate semantics from scratch so
//! the density-matrix simulator can be checked against it, and the random
//! helpers give seeded Gaussian matrices and Haar states for calibration
//! checks.
#![allow(dead_code)]

use ndarray::Array2;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use qcut::circuit::{Circuit, CircuitDag, Gate, GateKind};
use qcut::pauli::PauliAxis;
use qcut::route::ConnectivityGraph;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pure-state simulator over 2^n amplitudes; qubit 0 is the most significant
/// bit of the basis index, matching the library's bitstring convention.
pub struct StateVector {
    pub num_qubits: usize,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    pub fn ground(num_qubits: usize) -> Self {
        let mut amps = vec![c(0., 0.); 1 << num_qubits];
        amps[0] = c(1., 0.);
        StateVector { num_qubits, amps }
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn apply_1q(&mut self, u: [[Complex64; 2]; 2], qubit: usize) {
        let bit = self.bit(qubit);
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amps[i | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    pub fn apply_gate(&mut self, gate: &Gate) {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match gate.kind {
            GateKind::H => self.apply_1q(
                [[c(s, 0.), c(s, 0.)], [c(s, 0.), c(-s, 0.)]],
                gate.qubits[0],
            ),
            GateKind::X => self.apply_1q(
                [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
                gate.qubits[0],
            ),
            GateKind::SDag => self.apply_1q(
                [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(0., -1.)]],
                gate.qubits[0],
            ),
            GateKind::Cnot => {
                let (cb, tb) = (self.bit(gate.qubits[0]), self.bit(gate.qubits[1]));
                for i in 0..self.amps.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amps.swap(i, i | tb);
                    }
                }
            }
            GateKind::Swap => {
                let (ab, bb) = (self.bit(gate.qubits[0]), self.bit(gate.qubits[1]));
                for i in 0..self.amps.len() {
                    if i & ab != 0 && i & bb == 0 {
                        self.amps.swap(i, (i & !ab) | bb);
                    }
                }
            }
            GateKind::PrepPauliEigenstate(axis, b) => {
                // own lowering table, kept separate from the library's
                let q = gate.qubits[0];
                let gates: Vec<Gate> = match (axis, b) {
                    (PauliAxis::Z, 0) => vec![],
                    (PauliAxis::Z, 1) => vec![Gate::x(q)],
                    (PauliAxis::X, 0) => vec![Gate::h(q)],
                    (PauliAxis::X, 1) => vec![Gate::x(q), Gate::h(q)],
                    (PauliAxis::Y, 0) => vec![Gate::x(q), Gate::h(q), Gate::s_dag(q)],
                    (PauliAxis::Y, 1) => vec![Gate::h(q), Gate::s_dag(q)],
                    _ => unreachable!(),
                };
                for g in gates {
                    self.apply_gate(&g);
                }
            }
            GateKind::Measure(axis) => {
                let q = gate.qubits[0];
                match axis {
                    PauliAxis::Z => {}
                    PauliAxis::X => self.apply_gate(&Gate::h(q)),
                    PauliAxis::Y => {
                        self.apply_gate(&Gate::s_dag(q));
                        self.apply_gate(&Gate::h(q));
                    }
                }
            }
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Noiseless output probabilities of a circuit via the statevector oracle.
pub fn statevector_probabilities(circuit: &Circuit) -> Vec<f64> {
    let mut state = StateVector::ground(circuit.num_qubits);
    for gate in &circuit.gates {
        state.apply_gate(gate);
    }
    state.probabilities()
}

/// Standard-normal sampler (Box-Muller).
pub fn normal(rng: &mut StdRng) -> f64 {
    let u1: f64 = rng.random::<f64>().max(1e-18);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Random Hermitian matrix with O(1) Gaussian entries.
pub fn random_hermitian(dim: usize, rng: &mut StdRng) -> Array2<Complex64> {
    let mut g = Array2::from_elem((dim, dim), c(0., 0.));
    for i in 0..dim {
        for j in 0..dim {
            g[[i, j]] = c(normal(rng), normal(rng));
        }
    }
    let gdag = g.t().mapv(|v| v.conj());
    (g + gdag).mapv(|v| v * 0.5)
}

/// Haar-random pure state of the given dimension.
pub fn haar_state(dim: usize, rng: &mut StdRng) -> Vec<Complex64> {
    let mut amps: Vec<Complex64> = (0..dim).map(|_| c(normal(rng), normal(rng))).collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in amps.iter_mut() {
        *a /= norm;
    }
    amps
}

/// Random circuit over the library's gate vocabulary (no pseudo-gates).
pub fn random_circuit(num_qubits: usize, num_gates: usize, rng: &mut StdRng) -> Circuit {
    let mut circuit = Circuit::new(num_qubits, "random");
    for _ in 0..num_gates {
        let gate = match rng.random_range(0..5) {
            0 => Gate::h(rng.random_range(0..num_qubits)),
            1 => Gate::x(rng.random_range(0..num_qubits)),
            2 => Gate::s_dag(rng.random_range(0..num_qubits)),
            kind => {
                if num_qubits < 2 {
                    Gate::h(rng.random_range(0..num_qubits))
                } else {
                    let a = rng.random_range(0..num_qubits);
                    let mut b = rng.random_range(0..num_qubits - 1);
                    if b >= a {
                        b += 1;
                    }
                    if kind == 3 {
                        Gate::cnot(a, b)
                    } else {
                        Gate::swap(a, b)
                    }
                }
            }
        };
        circuit.push(gate).expect("random gate is valid");
    }
    circuit
}

/// Kahn's algorithm: true when the DAG has no directed cycle.
pub fn is_acyclic(dag: &CircuitDag) -> bool {
    let n = dag.vertices.len();
    let mut indegree = vec![0usize; n];
    for edge in &dag.edges {
        indegree[edge.target] += 1;
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut seen = 0usize;
    while let Some(v) = queue.pop() {
        seen += 1;
        for edge in dag.edges.iter().filter(|e| e.source == v) {
            indegree[edge.target] -= 1;
            if indegree[edge.target] == 0 {
                queue.push(edge.target);
            }
        }
    }
    seen == n
}

/// Each wire of the DAG is a simple INIT-to-TERMINAL path: every vertex is
/// visited at most once while walking the wire's edges.
pub fn wires_are_simple_paths(dag: &CircuitDag) -> bool {
    for qubit in 0..dag.num_qubits {
        let mut cursor = qubit; // init vertex id
        let terminal = dag.num_qubits + qubit;
        let mut visited = vec![false; dag.vertices.len()];
        loop {
            if visited[cursor] {
                return false;
            }
            visited[cursor] = true;
            if cursor == terminal {
                break;
            }
            let next = dag
                .edges
                .iter()
                .filter(|e| e.qubit == qubit && e.source == cursor)
                .map(|e| e.target)
                .collect::<Vec<_>>();
            if next.len() != 1 {
                return false;
            }
            cursor = next[0];
        }
    }
    true
}

/// Weakly-connected component count after removing the given edge ids.
pub fn component_count(dag: &CircuitDag, removed: &[(usize, usize, usize)]) -> usize {
    let n = dag.vertices.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, v: usize) -> usize {
        if parent[v] != v {
            let root = find(parent, parent[v]);
            parent[v] = root;
        }
        parent[v]
    }
    for edge in &dag.edges {
        let key = (edge.source, edge.target, edge.qubit);
        if removed.contains(&key) {
            continue;
        }
        let (ra, rb) = (find(&mut parent, edge.source), find(&mut parent, edge.target));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    let mut roots: Vec<usize> = (0..n).map(|v| find(&mut parent, v)).collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}

/// Exhaustive search for a simple path visiting `length` vertices.
pub fn simple_path_exists(graph: &ConnectivityGraph, length: usize) -> bool {
    fn dfs(graph: &ConnectivityGraph, visited: &mut [bool], v: usize, left: usize) -> bool {
        if left == 1 {
            return true;
        }
        visited[v] = true;
        for nb in graph.neighbors(v) {
            if !visited[nb] && dfs(graph, visited, nb, left - 1) {
                visited[v] = false;
                return true;
            }
        }
        visited[v] = false;
        false
    }
    if length == 0 || length > graph.num_physical_qubits {
        return false;
    }
    let mut visited = vec![false; graph.num_physical_qubits];
    (0..graph.num_physical_qubits).any(|start| dfs(graph, &mut visited, start, length))
}

/// Longest simple path (in vertices) found by exhaustive search; only for
/// small graphs.
pub fn longest_simple_path(graph: &ConnectivityGraph) -> usize {
    (1..=graph.num_physical_qubits)
        .rev()
        .find(|&len| simple_path_exists(graph, len))
        .unwrap_or(0)
}

/// Seeded RNG for reproducible test data.
pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
