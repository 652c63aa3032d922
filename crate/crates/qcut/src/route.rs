//! Compilation onto a restricted coupling graph.
//!
//! Routing keeps a live logical-to-physical mapping and walks the gate list
//! in order. A two-qubit gate spanning graph distance d gets d-1 SWAPs along
//! a shortest path, ties broken by lowest physical index. Ladder-shaped
//! circuits are first placed onto a simple path of the coupling graph when
//! one exists, which is what keeps small fragments SWAP-free.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};

/// Undirected coupling graph of a device.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityGraph {
    pub num_physical_qubits: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphDto {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl ConnectivityGraph {
    pub fn new(num_physical_qubits: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let graph = ConnectivityGraph {
            num_physical_qubits,
            edges,
        };
        graph.validate()?;
        Ok(graph)
    }

    /// All-to-all graph on n qubits.
    pub fn complete(n: usize) -> Self {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        ConnectivityGraph {
            num_physical_qubits: n,
            edges,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for &(a, b) in &self.edges {
            if a == b {
                return Err(Error::BadCouplingGraph(format!("self-loop on {a}")));
            }
            if a >= self.num_physical_qubits || b >= self.num_physical_qubits {
                return Err(Error::BadCouplingGraph(format!(
                    "edge ({a}, {b}) out of range"
                )));
            }
        }
        if self.num_physical_qubits > 0 {
            let mut seen = vec![false; self.num_physical_qubits];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(v) = stack.pop() {
                for n in self.neighbors(v) {
                    if !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
            if seen.iter().any(|&s| !s) {
                return Err(Error::BadCouplingGraph("graph is disconnected".into()));
            }
        }
        Ok(())
    }

    /// Neighbors in ascending order.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges
            .iter()
            .any(|&(x, y)| (x, y) == (a, b) || (y, x) == (a, b))
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }

    /// All-pairs shortest-path distances by BFS.
    pub fn distances(&self) -> Vec<Vec<usize>> {
        let n = self.num_physical_qubits;
        let mut dist = vec![vec![usize::MAX; n]; n];
        for (start, row) in dist.iter_mut().enumerate() {
            row[start] = 0;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for nb in self.neighbors(v) {
                    if row[nb] == usize::MAX {
                        row[nb] = row[v] + 1;
                        queue.push_back(nb);
                    }
                }
            }
        }
        dist
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GraphDto {
            n: self.num_physical_qubits,
            edges: self.edges.clone(),
        })
        .expect("graph serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: GraphDto = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "parsing coupling graph".into(),
            source,
        })?;
        ConnectivityGraph::new(dto.n, dto.edges)
    }
}

/// Coupling map of the 20-qubit reference device, shipped as a data file.
pub fn johannesburg_graph() -> ConnectivityGraph {
    ConnectivityGraph::from_json(include_str!("../data/johannesburg.json"))
        .expect("shipped coupling map is valid")
}

/// A circuit compiled onto physical qubits.
#[derive(Debug, Clone)]
pub struct RoutedCircuit {
    /// Gates over physical qubit indices (register size = graph size).
    pub circuit: Circuit,
    pub initial_mapping: Vec<usize>,
    pub final_mapping: Vec<usize>,
    pub swap_count: usize,
}

impl RoutedCircuit {
    /// Drop unused physical wires. Returns the compacted circuit together
    /// with each logical qubit's readout position in the compact register.
    pub fn compact(&self) -> (Circuit, Vec<usize>) {
        let mut used: Vec<usize> = self
            .circuit
            .gates
            .iter()
            .flat_map(|g| g.qubits.iter().copied())
            .chain(self.initial_mapping.iter().copied())
            .chain(self.final_mapping.iter().copied())
            .collect();
        used.sort_unstable();
        used.dedup();
        let rank = |phys: usize| used.binary_search(&phys).expect("used physical qubit");
        let mut circuit = Circuit::new(used.len(), self.circuit.label.clone());
        for gate in &self.circuit.gates {
            let mut mapped = gate.clone();
            mapped.qubits = gate.qubits.iter().map(|&q| rank(q)).collect();
            circuit.push(mapped).expect("compacted gate stays valid");
        }
        let read_order = self.final_mapping.iter().map(|&p| rank(p)).collect();
        (circuit, read_order)
    }
}

/// Interaction chain of a circuit: logical qubits ordered so that every
/// two-qubit gate joins chain neighbors, when the interaction graph is a
/// disjoint union of simple paths. Isolated qubits are appended at the end.
fn interaction_chain(circuit: &Circuit) -> Option<Vec<usize>> {
    let n = circuit.num_qubits;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for gate in &circuit.gates {
        if gate.qubits.len() == 2 {
            let (a, b) = (gate.qubits[0], gate.qubits[1]);
            if !adj[a].contains(&b) {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
    }
    if adj.iter().any(|nb| nb.len() > 2) {
        return None;
    }
    let mut visited = vec![false; n];
    let mut chain = Vec::with_capacity(n);
    let mut isolated = Vec::new();
    for start in 0..n {
        if visited[start] || adj[start].len() != 1 {
            if !visited[start] && adj[start].is_empty() {
                visited[start] = true;
                isolated.push(start);
            }
            continue;
        }
        // walk the path from this endpoint
        visited[start] = true;
        chain.push(start);
        let mut prev = start;
        let mut cursor = adj[start][0];
        loop {
            visited[cursor] = true;
            chain.push(cursor);
            match adj[cursor].iter().copied().find(|&v| v != prev) {
                Some(v) if !visited[v] => {
                    prev = cursor;
                    cursor = v;
                }
                _ => break,
            }
        }
    }
    if visited.iter().any(|&v| !v) {
        // leftover vertices sit on cycles
        return None;
    }
    chain.extend(isolated);
    Some(chain)
}

/// Depth-first search for a simple path with `length` vertices; start vertex
/// and neighbor order are ascending, so the result is deterministic.
fn find_simple_path(graph: &ConnectivityGraph, length: usize) -> Option<Vec<usize>> {
    if length == 0 || length > graph.num_physical_qubits {
        return None;
    }
    fn dfs(
        graph: &ConnectivityGraph,
        visited: &mut [bool],
        path: &mut Vec<usize>,
        v: usize,
        length: usize,
    ) -> bool {
        visited[v] = true;
        path.push(v);
        if path.len() == length {
            return true;
        }
        for nb in graph.neighbors(v) {
            if !visited[nb] && dfs(graph, visited, path, nb, length) {
                return true;
            }
        }
        visited[v] = false;
        path.pop();
        false
    }
    let mut visited = vec![false; graph.num_physical_qubits];
    let mut path = Vec::with_capacity(length);
    for start in 0..graph.num_physical_qubits {
        if dfs(graph, &mut visited, &mut path, start, length) {
            return Some(path);
        }
    }
    None
}

/// Place a ladder-shaped circuit onto a simple path of the coupling graph.
/// Falls back to the identity mapping when the circuit's interaction graph is
/// not a union of paths or no long-enough graph path exists.
pub fn line_subgraph_placement(circuit: &Circuit, graph: &ConnectivityGraph) -> Vec<usize> {
    let identity: Vec<usize> = (0..circuit.num_qubits).collect();
    let Some(chain) = interaction_chain(circuit) else {
        return identity;
    };
    let Some(path) = find_simple_path(graph, circuit.num_qubits) else {
        return identity;
    };
    let mut mapping = vec![0usize; circuit.num_qubits];
    for (slot, &logical) in chain.iter().enumerate() {
        mapping[logical] = path[slot];
    }
    mapping
}

/// Compile a circuit onto the coupling graph. Semantics are preserved up to
/// the final mapping; `swap_count` reports the inserted SWAPs. The greedy
/// walk is deterministic; the seed parameter is accepted for interface
/// stability and does not influence the result.
pub fn route(circuit: &Circuit, graph: &ConnectivityGraph, _seed: u64) -> Result<RoutedCircuit> {
    circuit.validate()?;
    graph.validate()?;
    if circuit.num_qubits > graph.num_physical_qubits {
        return Err(Error::CircuitTooLarge {
            circuit: circuit.num_qubits,
            graph: graph.num_physical_qubits,
        });
    }
    let dist = graph.distances();
    let initial_mapping = line_subgraph_placement(circuit, graph);
    let mut mapping = initial_mapping.clone();

    let mut routed = Circuit::new(graph.num_physical_qubits, circuit.label.clone());
    let mut measures: Vec<(usize, Gate)> = Vec::new();
    let mut swap_count = 0usize;
    for gate in &circuit.gates {
        if let GateKind::Measure(_) = gate.kind {
            measures.push((gate.qubits[0], gate.clone()));
            continue;
        }
        if gate.qubits.len() == 2 {
            let mover = gate.qubits[0];
            let target_phys = mapping[gate.qubits[1]];
            while dist[mapping[mover]][target_phys] > 1 {
                let here = mapping[mover];
                let step = graph
                    .neighbors(here)
                    .into_iter()
                    .filter(|&nb| dist[nb][target_phys] == dist[here][target_phys] - 1)
                    .min()
                    .expect("connected graph has a closer neighbor");
                routed.push(Gate::swap(here, step))?;
                swap_count += 1;
                // whoever sits at `step` moves back to `here`
                for slot in mapping.iter_mut() {
                    if *slot == step {
                        *slot = here;
                    }
                }
                mapping[mover] = step;
            }
        }
        let mut mapped = gate.clone();
        mapped.qubits = gate.qubits.iter().map(|&q| mapping[q]).collect();
        routed.push(mapped)?;
    }
    for (logical, gate) in measures {
        let mut mapped = gate;
        mapped.qubits = vec![mapping[logical]];
        routed.push(mapped)?;
    }
    Ok(RoutedCircuit {
        circuit: routed,
        initial_mapping,
        final_mapping: mapping,
        swap_count,
    })
}
