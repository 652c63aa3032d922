//! Wire cutting: split a circuit DAG into fragments and enumerate the
//! variant circuits whose output distributions feed recombination.
//!
//! Removing M wire edges splits the DAG into K weakly-connected components.
//! Each component becomes a fragment whose wire segments are relabeled to
//! local qubits. A segment that starts at a removed edge is an incoming leg,
//! a segment that ends at one is an outgoing leg, and segments reaching their
//! TERMINAL are ordinary final qubits. Outgoing legs are terminated by an
//! axis measurement; incoming legs are fed by half of an ancilla Bell pair
//! whose other half is measured along an axis (the gadget backend), or by an
//! explicit Pauli eigenstate preparation (the eigenstate backend).

use std::collections::HashMap;

use ndarray::{ArrayD, IxDyn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, CircuitDag, DagVertex, Gate};
use crate::error::{Error, Result};
use crate::pauli::PauliAxis;
use crate::sim::OutputDistribution;

/// How incoming legs are driven and which connecting tensor applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutBackend {
    /// Ancilla Bell pair per incoming leg, ancilla measured along an axis.
    BellGadget,
    /// Explicit eigenstate preparation per incoming leg.
    EigenstatePrep,
}

/// A wire edge of the DAG, identified by its endpoint gate indices. `None`
/// stands for the wire's INIT (as source) or TERMINAL (as target).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutEdge {
    pub source_gate_index: Option<usize>,
    pub target_gate_index: Option<usize>,
    pub qubit: usize,
}

/// The set of wire edges to remove.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutSpec {
    pub edges: Vec<CutEdge>,
}

impl CutSpec {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.edges).expect("cut spec serialization")
    }

    pub fn from_json(text: &str) -> Result<CutSpec> {
        let edges: Vec<CutEdge> = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "parsing cut spec".into(),
            source,
        })?;
        Ok(CutSpec { edges })
    }
}

/// A fragment leg: the local qubit it sits on and the cut it belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegRef {
    pub local_qubit: usize,
    pub cut_index: usize,
}

/// An ordinary output wire of a fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalQubit {
    pub local_qubit: usize,
    /// Qubit index in the original circuit.
    pub origin: usize,
}

/// A connected sub-circuit produced by cutting, with typed dangling legs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fragment {
    pub index: usize,
    pub circuit: Circuit,
    /// Incoming legs in local-qubit order.
    pub incoming: Vec<LegRef>,
    /// Outgoing legs in local-qubit order.
    pub outgoing: Vec<LegRef>,
    /// Final qubits in local-qubit order.
    pub final_qubits: Vec<FinalQubit>,
    /// Indices of the original gates this fragment owns.
    pub original_gate_indices: Vec<usize>,
}

impl Fragment {
    pub fn num_incoming(&self) -> usize {
        self.incoming.len()
    }

    pub fn num_outgoing(&self) -> usize {
        self.outgoing.len()
    }

    pub fn num_final(&self) -> usize {
        self.final_qubits.len()
    }

    /// Variant circuits required by the gadget backend.
    pub fn variant_count(&self) -> usize {
        3usize.pow((self.num_incoming() + self.num_outgoing()) as u32)
    }

    /// Treat a whole circuit as the single fragment of a degenerate cut.
    pub fn whole(circuit: &Circuit) -> Fragment {
        Fragment {
            index: 0,
            circuit: circuit.clone(),
            incoming: Vec::new(),
            outgoing: Vec::new(),
            final_qubits: (0..circuit.num_qubits)
                .map(|q| FinalQubit {
                    local_qubit: q,
                    origin: q,
                })
                .collect(),
            original_gate_indices: (0..circuit.gates.len()).collect(),
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, v: usize) -> usize {
        let mut root = v;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cursor = v;
        while self.parent[cursor] != root {
            let next = self.parent[cursor];
            self.parent[cursor] = root;
            cursor = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

struct Segment {
    wire: usize,
    position: usize,
    start_cut: Option<usize>,
    end_cut: Option<usize>,
    component: usize,
}

/// Split the DAG at the given wire edges into K >= 2 fragments with leg
/// bookkeeping, local qubit relabeling, and a deterministic fragment order
/// (smallest original qubit first, earliest segment breaking ties).
pub fn cut(dag: &CircuitDag, spec: &CutSpec) -> Result<Vec<Fragment>> {
    // resolve the cut edges against the DAG
    let mut cut_edge_ids: Vec<usize> = Vec::with_capacity(spec.edges.len());
    for ce in &spec.edges {
        if ce.qubit >= dag.num_qubits {
            return Err(Error::BadCutEdge(format!("qubit {} out of range", ce.qubit)));
        }
        let gate_vertex = |g: usize| -> Result<usize> {
            if g >= dag.gates.len() {
                return Err(Error::BadCutEdge(format!("gate index {g} out of range")));
            }
            Ok(dag.gate_vertex(g))
        };
        let source = match ce.source_gate_index {
            None => dag.init_vertex(ce.qubit),
            Some(g) => gate_vertex(g)?,
        };
        let target = match ce.target_gate_index {
            None => dag.terminal_vertex(ce.qubit),
            Some(g) => gate_vertex(g)?,
        };
        let id = dag
            .edges
            .iter()
            .position(|e| e.source == source && e.target == target && e.qubit == ce.qubit)
            .ok_or_else(|| Error::BadCutEdge(format!("{ce:?} is not a wire edge")))?;
        if cut_edge_ids.contains(&id) {
            return Err(Error::BadCutEdge(format!("{ce:?} listed twice")));
        }
        cut_edge_ids.push(id);
    }

    // weakly-connected components of the remaining graph
    let mut uf = UnionFind::new(dag.vertices.len());
    for (id, edge) in dag.edges.iter().enumerate() {
        if !cut_edge_ids.contains(&id) {
            uf.union(edge.source, edge.target);
        }
    }

    // walk every wire, splitting it into segments at the cut edges
    let mut segments: Vec<Segment> = Vec::new();
    let mut gate_wire_segment: HashMap<(usize, usize), usize> = HashMap::new();
    let mut pending: Vec<(usize, usize)> = Vec::new();
    for wire in 0..dag.num_qubits {
        let mut cursor = dag.init_vertex(wire);
        let terminal = dag.terminal_vertex(wire);
        let mut position = 0usize;
        let mut start_cut = None;
        let mut first_vertex = cursor;
        pending.clear();
        loop {
            let (edge_id, edge) = dag
                .edges
                .iter()
                .enumerate()
                .find(|(_, e)| e.qubit == wire && e.source == cursor)
                .expect("wire path is complete");
            if let Some(cut_index) = cut_edge_ids.iter().position(|&c| c == edge_id) {
                let seg_id = segments.len();
                for &(gate, w) in &pending {
                    gate_wire_segment.insert((gate, w), seg_id);
                }
                pending.clear();
                segments.push(Segment {
                    wire,
                    position,
                    start_cut,
                    end_cut: Some(cut_index),
                    component: uf.find(first_vertex),
                });
                position += 1;
                start_cut = Some(cut_index);
                first_vertex = edge.target;
            }
            cursor = edge.target;
            if let DagVertex::Gate { index } = dag.vertices[cursor] {
                pending.push((index, wire));
            }
            if cursor == terminal {
                let seg_id = segments.len();
                for &(gate, w) in &pending {
                    gate_wire_segment.insert((gate, w), seg_id);
                }
                segments.push(Segment {
                    wire,
                    position,
                    start_cut,
                    end_cut: None,
                    component: uf.find(first_vertex),
                });
                break;
            }
        }
    }

    // fragments = components, ordered by their earliest segment
    let mut roots: Vec<usize> = segments.iter().map(|s| s.component).collect();
    roots.sort_unstable();
    roots.dedup();
    if roots.len() < 2 {
        return Err(Error::CutDoesNotDisconnect(roots.len()));
    }
    let mut fragment_order: Vec<(usize, usize, usize)> = roots
        .iter()
        .map(|&root| {
            let (wire, position) = segments
                .iter()
                .filter(|s| s.component == root)
                .map(|s| (s.wire, s.position))
                .min()
                .expect("component has a segment");
            (wire, position, root)
        })
        .collect();
    fragment_order.sort_unstable();

    let mut fragments = Vec::with_capacity(fragment_order.len());
    for (fragment_index, &(_, _, root)) in fragment_order.iter().enumerate() {
        let mut local_segments: Vec<usize> = (0..segments.len())
            .filter(|&s| segments[s].component == root)
            .collect();
        local_segments.sort_by_key(|&s| (segments[s].wire, segments[s].position));

        let label = if dag.label.is_empty() {
            format!("fragment-{fragment_index}")
        } else {
            format!("{}-fragment-{fragment_index}", dag.label)
        };
        let mut circuit = Circuit::new(local_segments.len(), label);
        let mut original_gate_indices = Vec::new();
        for (gate_index, gate) in dag.gates.iter().enumerate() {
            if uf.find(dag.gate_vertex(gate_index)) != root {
                continue;
            }
            original_gate_indices.push(gate_index);
            let local_qubits: Vec<usize> = gate
                .qubits
                .iter()
                .map(|&w| {
                    let seg = gate_wire_segment[&(gate_index, w)];
                    local_segments
                        .iter()
                        .position(|&s| s == seg)
                        .expect("gate segment belongs to its component")
                })
                .collect();
            let mut local_gate = gate.clone();
            local_gate.qubits = local_qubits;
            circuit.push(local_gate)?;
        }

        let mut incoming = Vec::new();
        let mut outgoing = Vec::new();
        let mut final_qubits = Vec::new();
        for (local_qubit, &seg) in local_segments.iter().enumerate() {
            if let Some(cut_index) = segments[seg].start_cut {
                incoming.push(LegRef {
                    local_qubit,
                    cut_index,
                });
            }
            match segments[seg].end_cut {
                Some(cut_index) => outgoing.push(LegRef {
                    local_qubit,
                    cut_index,
                }),
                None => final_qubits.push(FinalQubit {
                    local_qubit,
                    origin: segments[seg].wire,
                }),
            }
        }

        fragments.push(Fragment {
            index: fragment_index,
            circuit,
            incoming,
            outgoing,
            final_qubits,
            original_gate_indices,
        });
    }
    Ok(fragments)
}

/// Per-fragment sizes of a balanced split of m qubits into k groups; earlier
/// groups take the extra qubits.
pub fn balanced_sizes(m: usize, k: usize) -> Vec<usize> {
    let base = m / k;
    let extras = m % k;
    (0..k)
        .map(|i| if i < extras { base + 1 } else { base })
        .collect()
}

/// Cut positions splitting the GHZ ladder of `build_ghz_circuit` into k
/// fragments whose qubit-group sizes differ by at most one. Each cut removes
/// the wire segment of qubit B-1 between the two gates that touch it, where B
/// is a group boundary.
pub fn balanced_ghz_cutspec(m: usize, k: usize) -> Result<CutSpec> {
    if k < 2 || k > m {
        return Err(Error::BadFragmentCount { k, max: m });
    }
    let sizes = balanced_sizes(m, k);
    let mut edges = Vec::with_capacity(k - 1);
    let mut boundary = 0usize;
    for size in &sizes[..k - 1] {
        boundary += size;
        // gate 0 is the Hadamard; ladder CNOT (j, j+1) is gate j+1, so the
        // upstream gate on wire B-1 is gate B-1 and the downstream is gate B
        edges.push(CutEdge {
            source_gate_index: Some(boundary - 1),
            target_gate_index: Some(boundary),
            qubit: boundary - 1,
        });
    }
    Ok(CutSpec { edges })
}

/// One terminated fragment circuit: an axis assignment for every leg, plus
/// the eigenindex assignment when preparations replace Bell gadgets.
#[derive(Debug, Clone)]
pub struct FragmentVariant {
    pub fragment_index: usize,
    pub axes_in: Vec<PauliAxis>,
    pub axes_out: Vec<PauliAxis>,
    /// Eigenstate backend only: prepared eigenindex per incoming leg.
    pub prep_eigens: Option<Vec<u8>>,
    pub circuit: Circuit,
}

fn axis_assignments(count: usize) -> Vec<Vec<PauliAxis>> {
    let total = 3usize.pow(count as u32);
    (0..total)
        .map(|mut code| {
            let mut axes = vec![PauliAxis::X; count];
            for slot in (0..count).rev() {
                axes[slot] = PauliAxis::ALL[code % 3];
                code /= 3;
            }
            axes
        })
        .collect()
}

fn bit_assignments(count: usize) -> Vec<Vec<u8>> {
    (0..1usize << count)
        .map(|code| {
            (0..count)
                .map(|slot| ((code >> (count - 1 - slot)) & 1) as u8)
                .collect()
        })
        .collect()
}

fn terminated_circuit(
    fragment: &Fragment,
    axes_in: &[PauliAxis],
    axes_out: &[PauliAxis],
    prep_eigens: Option<&[u8]>,
) -> Result<Circuit> {
    let num_logical = fragment.circuit.num_qubits;
    let ancillas = match prep_eigens {
        Some(_) => 0,
        None => fragment.num_incoming(),
    };
    let mut circuit = Circuit::new(num_logical + ancillas, fragment.circuit.label.clone());
    match prep_eigens {
        None => {
            // Bell gadget per incoming leg: ancilla appended after the
            // logical qubits, prepared with H + CNOT into the leg wire
            for (slot, leg) in fragment.incoming.iter().enumerate() {
                let ancilla = num_logical + slot;
                circuit.push(Gate::h(ancilla))?;
                circuit.push(Gate::cnot(ancilla, leg.local_qubit))?;
            }
        }
        Some(eigens) => {
            for (slot, leg) in fragment.incoming.iter().enumerate() {
                circuit.push(Gate::prep(axes_in[slot], eigens[slot], leg.local_qubit))?;
            }
        }
    }
    for gate in &fragment.circuit.gates {
        circuit.push(gate.clone())?;
    }
    for (slot, leg) in fragment.outgoing.iter().enumerate() {
        circuit.push(Gate::measure(axes_out[slot], leg.local_qubit))?;
    }
    for final_qubit in &fragment.final_qubits {
        circuit.push(Gate::measure(PauliAxis::Z, final_qubit.local_qubit))?;
    }
    if prep_eigens.is_none() {
        for (slot, leg) in fragment.incoming.iter().enumerate() {
            let _ = leg;
            circuit.push(Gate::measure(axes_in[slot], num_logical + slot))?;
        }
    }
    Ok(circuit)
}

/// All 3^(n_in + n_out) Bell-gadget variants of a fragment, enumerated in
/// row-major axis order (incoming legs first, last leg fastest).
pub fn generate_variants(fragment: &Fragment) -> Result<Vec<FragmentVariant>> {
    let mut variants = Vec::with_capacity(fragment.variant_count());
    for axes_in in axis_assignments(fragment.num_incoming()) {
        for axes_out in axis_assignments(fragment.num_outgoing()) {
            let circuit = terminated_circuit(fragment, &axes_in, &axes_out, None)?;
            variants.push(FragmentVariant {
                fragment_index: fragment.index,
                axes_in: axes_in.clone(),
                axes_out: axes_out.clone(),
                prep_eigens: None,
                circuit,
            });
        }
    }
    Ok(variants)
}

/// All 3^(n_in + n_out) * 2^(n_in) eigenstate-preparation variants, in the
/// same axis order with the eigenindex block nested innermost.
pub fn generate_eigenstate_variants(fragment: &Fragment) -> Result<Vec<FragmentVariant>> {
    let mut variants = Vec::new();
    for axes_in in axis_assignments(fragment.num_incoming()) {
        for axes_out in axis_assignments(fragment.num_outgoing()) {
            for eigens in bit_assignments(fragment.num_incoming()) {
                let circuit = terminated_circuit(fragment, &axes_in, &axes_out, Some(&eigens))?;
                variants.push(FragmentVariant {
                    fragment_index: fragment.index,
                    axes_in: axes_in.clone(),
                    axes_out: axes_out.clone(),
                    prep_eigens: Some(eigens),
                    circuit,
                });
            }
        }
    }
    Ok(variants)
}

/// Probability tensor of one fragment over all its variants.
///
/// Index layout: incoming-leg axes, outgoing-leg axes (size 3 each), then
/// incoming bits b, final bits s, outgoing bits b' (size 2 each). For the
/// eigenstate backend the b indices are the prepared eigenindices.
#[derive(Debug, Clone)]
pub struct FragmentDistribution {
    pub fragment_index: usize,
    pub backend: CutBackend,
    /// Cut id per incoming leg, in leg order.
    pub incoming_cuts: Vec<usize>,
    /// Cut id per outgoing leg, in leg order.
    pub outgoing_cuts: Vec<usize>,
    /// Original qubit per final bit, in local order.
    pub final_origins: Vec<usize>,
    pub tensor: ArrayD<f64>,
}

impl FragmentDistribution {
    pub fn num_incoming(&self) -> usize {
        self.incoming_cuts.len()
    }

    pub fn num_outgoing(&self) -> usize {
        self.outgoing_cuts.len()
    }

    pub fn num_final(&self) -> usize {
        self.final_origins.len()
    }

    pub fn shape(n_in: usize, n_out: usize, n_final: usize) -> Vec<usize> {
        let mut shape = Vec::new();
        shape.extend(std::iter::repeat_n(3, n_in));
        shape.extend(std::iter::repeat_n(3, n_out));
        shape.extend(std::iter::repeat_n(2, n_in));
        shape.extend(std::iter::repeat_n(2, n_final));
        shape.extend(std::iter::repeat_n(2, n_out));
        shape
    }
}

/// Simulate every variant with the provided runner and assemble the fragment
/// tensor. Variants are independent and run in parallel; assembly is a
/// deterministic reduction.
pub fn collect_distributions<F>(
    fragment: &Fragment,
    variants: &[FragmentVariant],
    run: F,
) -> Result<FragmentDistribution>
where
    F: Fn(&Circuit) -> Result<OutputDistribution> + Sync,
{
    let n_in = fragment.num_incoming();
    let n_out = fragment.num_outgoing();
    let n_final = fragment.num_final();
    let backend = match variants.first() {
        Some(v) if v.prep_eigens.is_some() => CutBackend::EigenstatePrep,
        Some(_) => CutBackend::BellGadget,
        None => {
            return Err(Error::InconsistentVariants("empty variant list".into()));
        }
    };
    let expected = match backend {
        CutBackend::BellGadget => fragment.variant_count(),
        CutBackend::EigenstatePrep => fragment.variant_count() << n_in,
    };
    if variants.len() != expected {
        return Err(Error::InconsistentVariants(format!(
            "expected {expected} variants, got {}",
            variants.len()
        )));
    }
    if variants.iter().any(|v| v.fragment_index != fragment.index) {
        return Err(Error::InconsistentVariants(
            "variant from a different fragment".into(),
        ));
    }

    let results: Vec<(usize, OutputDistribution)> = variants
        .par_iter()
        .enumerate()
        .map(|(index, variant)| run(&variant.circuit).map(|dist| (index, dist)))
        .collect::<Result<_>>()?;

    let shape = FragmentDistribution::shape(n_in, n_out, n_final);
    let mut tensor = ArrayD::<f64>::zeros(IxDyn(&shape));
    for (index, dist) in results {
        let variant = &variants[index];
        let num_bits = fragment.circuit.num_qubits
            + match backend {
                CutBackend::BellGadget => n_in,
                CutBackend::EigenstatePrep => 0,
            };
        if dist.num_bits != num_bits {
            return Err(Error::InconsistentVariants(format!(
                "variant produced {} bits, circuit has {num_bits} qubits",
                dist.num_bits
            )));
        }
        let mut idx = vec![0usize; shape.len()];
        for (slot, axis) in variant.axes_in.iter().enumerate() {
            idx[slot] = axis.axis_index();
        }
        for (slot, axis) in variant.axes_out.iter().enumerate() {
            idx[n_in + slot] = axis.axis_index();
        }
        for (outcome, &p) in dist.probs.iter().enumerate() {
            let bit = |q: usize| (outcome >> (num_bits - 1 - q)) & 1;
            match backend {
                CutBackend::BellGadget => {
                    for slot in 0..n_in {
                        idx[n_in + n_out + slot] = bit(fragment.circuit.num_qubits + slot);
                    }
                }
                CutBackend::EigenstatePrep => {
                    let eigens = variant.prep_eigens.as_ref().expect("eigenstate backend");
                    for slot in 0..n_in {
                        idx[n_in + n_out + slot] = eigens[slot] as usize;
                    }
                }
            }
            for (slot, final_qubit) in fragment.final_qubits.iter().enumerate() {
                idx[2 * n_in + n_out + slot] = bit(final_qubit.local_qubit);
            }
            for (slot, leg) in fragment.outgoing.iter().enumerate() {
                idx[2 * n_in + n_out + n_final + slot] = bit(leg.local_qubit);
            }
            tensor[IxDyn(&idx)] += p;
        }
    }

    Ok(FragmentDistribution {
        fragment_index: fragment.index,
        backend,
        incoming_cuts: fragment.incoming.iter().map(|l| l.cut_index).collect(),
        outgoing_cuts: fragment.outgoing.iter().map(|l| l.cut_index).collect(),
        final_origins: fragment.final_qubits.iter().map(|f| f.origin).collect(),
        tensor,
    })
}

#[derive(Serialize, Deserialize)]
struct FragmentDistributionDto {
    fragment_index: usize,
    backend: CutBackend,
    incoming_cuts: Vec<usize>,
    outgoing_cuts: Vec<usize>,
    final_origins: Vec<usize>,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl FragmentDistribution {
    fn to_dto(&self) -> FragmentDistributionDto {
        FragmentDistributionDto {
            fragment_index: self.fragment_index,
            backend: self.backend,
            incoming_cuts: self.incoming_cuts.clone(),
            outgoing_cuts: self.outgoing_cuts.clone(),
            final_origins: self.final_origins.clone(),
            shape: self.tensor.shape().to_vec(),
            values: self.tensor.iter().copied().collect(),
        }
    }

    fn from_dto(dto: FragmentDistributionDto) -> Result<FragmentDistribution> {
        let tensor = ArrayD::from_shape_vec(IxDyn(&dto.shape), dto.values)
            .map_err(|e| Error::BadConfig(format!("bad tensor shape: {e}")))?;
        Ok(FragmentDistribution {
            fragment_index: dto.fragment_index,
            backend: dto.backend,
            incoming_cuts: dto.incoming_cuts,
            outgoing_cuts: dto.outgoing_cuts,
            final_origins: dto.final_origins,
            tensor,
        })
    }
}

/// Serialize fragment distributions with explicit index metadata.
pub fn distributions_to_json(dists: &[FragmentDistribution]) -> String {
    let dtos: Vec<FragmentDistributionDto> = dists.iter().map(|d| d.to_dto()).collect();
    serde_json::to_string_pretty(&dtos).expect("distribution serialization")
}

pub fn distributions_from_json(text: &str) -> Result<Vec<FragmentDistribution>> {
    let dtos: Vec<FragmentDistributionDto> =
        serde_json::from_str(text).map_err(|source| Error::Json {
            context: "parsing fragment distributions".into(),
            source,
        })?;
    dtos.into_iter().map(FragmentDistribution::from_dto).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_ghz_circuit, to_dag};
    use crate::sim::{measure_distribution, simulate};

    fn noiseless_run(circuit: &Circuit) -> Result<OutputDistribution> {
        Ok(measure_distribution(&simulate(circuit, None)?, None))
    }

    #[test]
    fn ghz_four_single_cut_fragments() {
        let circuit = build_ghz_circuit(4).unwrap();
        let dag = to_dag(&circuit).unwrap();
        let spec = balanced_ghz_cutspec(4, 2).unwrap();
        assert_eq!(
            spec.edges,
            vec![CutEdge {
                source_gate_index: Some(1),
                target_gate_index: Some(2),
                qubit: 1,
            }]
        );
        let fragments = cut(&dag, &spec).unwrap();
        assert_eq!(fragments.len(), 2);
        let a = &fragments[0];
        let b = &fragments[1];
        assert_eq!(a.circuit.num_qubits, 2);
        assert_eq!(a.num_outgoing(), 1);
        assert_eq!(a.num_incoming(), 0);
        assert_eq!(a.num_final(), 1);
        assert_eq!(a.original_gate_indices, vec![0, 1]);
        assert_eq!(b.circuit.num_qubits, 3);
        assert_eq!(b.num_incoming(), 1);
        assert_eq!(b.num_outgoing(), 0);
        assert_eq!(b.num_final(), 3);
        assert_eq!(b.original_gate_indices, vec![2, 3, 4, 5]);
        // fragment B's incoming leg is the second segment of wire 1
        assert_eq!(b.incoming[0].local_qubit, 0);
        assert_eq!(
            b.final_qubits.iter().map(|f| f.origin).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
    }

    #[test]
    fn empty_cutspec_rejected() {
        let circuit = build_ghz_circuit(4).unwrap();
        let dag = to_dag(&circuit).unwrap();
        let err = cut(&dag, &CutSpec { edges: Vec::new() });
        assert!(matches!(err, Err(Error::CutDoesNotDisconnect(1))));
    }

    #[test]
    fn bogus_cut_edge_rejected() {
        let circuit = build_ghz_circuit(4).unwrap();
        let dag = to_dag(&circuit).unwrap();
        // gates 1 and 3 are not adjacent on wire 1
        let spec = CutSpec {
            edges: vec![CutEdge {
                source_gate_index: Some(1),
                target_gate_index: Some(3),
                qubit: 1,
            }],
        };
        assert!(matches!(cut(&dag, &spec), Err(Error::BadCutEdge(_))));
    }

    #[test]
    fn ghz_six_two_cuts_form_chain() {
        let circuit = build_ghz_circuit(6).unwrap();
        let dag = to_dag(&circuit).unwrap();
        let spec = balanced_ghz_cutspec(6, 3).unwrap();
        let fragments = cut(&dag, &spec).unwrap();
        assert_eq!(fragments.len(), 3);
        let total_in: usize = fragments.iter().map(Fragment::num_incoming).sum();
        let total_out: usize = fragments.iter().map(Fragment::num_outgoing).sum();
        assert_eq!(total_in, 2);
        assert_eq!(total_out, 2);
        // chain: ends have one leg, middle has two
        assert_eq!(fragments[0].num_incoming() + fragments[0].num_outgoing(), 1);
        assert_eq!(fragments[1].num_incoming() + fragments[1].num_outgoing(), 2);
        assert_eq!(fragments[2].num_incoming() + fragments[2].num_outgoing(), 1);
        // every original gate lands in exactly one fragment
        let mut owned: Vec<usize> = fragments
            .iter()
            .flat_map(|f| f.original_gate_indices.iter().copied())
            .collect();
        owned.sort_unstable();
        assert_eq!(owned, (0..circuit.gates.len()).collect::<Vec<_>>());
        // sum of final qubits covers the register
        let mut origins: Vec<usize> = fragments
            .iter()
            .flat_map(|f| f.final_qubits.iter().map(|q| q.origin))
            .collect();
        origins.sort_unstable();
        assert_eq!(origins, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn balanced_sizes_and_tie_break() {
        assert_eq!(balanced_sizes(4, 2), vec![2, 2]);
        assert_eq!(balanced_sizes(6, 3), vec![2, 2, 2]);
        assert_eq!(balanced_sizes(5, 2), vec![3, 2]);
        let spec = balanced_ghz_cutspec(5, 2).unwrap();
        assert_eq!(spec.edges[0].qubit, 2);
        assert_eq!(spec.edges[0].source_gate_index, Some(2));
        assert_eq!(spec.edges[0].target_gate_index, Some(3));
        assert!(balanced_ghz_cutspec(4, 1).is_err());
        assert!(balanced_ghz_cutspec(4, 5).is_err());
    }

    #[test]
    fn variant_counts() {
        let circuit = build_ghz_circuit(6).unwrap();
        let dag = to_dag(&circuit).unwrap();
        let fragments = cut(&dag, &balanced_ghz_cutspec(6, 3).unwrap()).unwrap();
        let counts: Vec<usize> = fragments
            .iter()
            .map(|f| generate_variants(f).unwrap().len())
            .collect();
        assert_eq!(counts, vec![3, 9, 3]);
        // ends have no ancilla or one ancilla
        let first = generate_variants(&fragments[0]).unwrap();
        assert!(first
            .iter()
            .all(|v| v.circuit.num_qubits == fragments[0].circuit.num_qubits));
        let second = generate_variants(&fragments[1]).unwrap();
        assert!(second
            .iter()
            .all(|v| v.circuit.num_qubits == fragments[1].circuit.num_qubits + 1));
    }

    #[test]
    fn eigenstate_variant_counts() {
        let circuit = build_ghz_circuit(4).unwrap();
        let dag = to_dag(&circuit).unwrap();
        let fragments = cut(&dag, &balanced_ghz_cutspec(4, 2).unwrap()).unwrap();
        assert_eq!(generate_eigenstate_variants(&fragments[0]).unwrap().len(), 3);
        assert_eq!(generate_eigenstate_variants(&fragments[1]).unwrap().len(), 6);
    }

    #[test]
    fn bell_gadget_z_bits_are_correlated() {
        // cutting right before the terminal leaves a bare incoming leg that
        // reads back the Bell half: outcomes must correlate perfectly on Z
        let mut circuit = Circuit::new(1, "wire");
        circuit.push(Gate::h(0)).unwrap();
        let dag = to_dag(&circuit).unwrap();
        let spec = CutSpec {
            edges: vec![CutEdge {
                source_gate_index: Some(0),
                target_gate_index: None,
                qubit: 0,
            }],
        };
        let fragments = cut(&dag, &spec).unwrap();
        assert_eq!(fragments.len(), 2);
        let sink = &fragments[1];
        assert_eq!(sink.num_incoming(), 1);
        assert_eq!(sink.num_final(), 1);
        let variants = generate_variants(sink).unwrap();
        let dist = collect_distributions(sink, &variants, noiseless_run).unwrap();
        // axes layout: [axis_in, b, s]; Z slice index 2
        let z = dist.tensor.index_axis(ndarray::Axis(0), 2);
        assert!((z[[0, 0]] - 0.5).abs() < 1e-12);
        assert!((z[[1, 1]] - 0.5).abs() < 1e-12);
        assert!(z[[0, 1]].abs() < 1e-12);
        assert!(z[[1, 0]].abs() < 1e-12);
    }

    #[test]
    fn axis_slices_are_normalized() {
        let circuit = build_ghz_circuit(4).unwrap();
        let dag = to_dag(&circuit).unwrap();
        let fragments = cut(&dag, &balanced_ghz_cutspec(4, 2).unwrap()).unwrap();
        for fragment in &fragments {
            let variants = generate_variants(fragment).unwrap();
            let dist = collect_distributions(fragment, &variants, noiseless_run).unwrap();
            let axes = fragment.num_incoming() + fragment.num_outgoing();
            for assignment in 0..3usize.pow(axes as u32) {
                let mut digits = vec![0usize; axes];
                let mut code = assignment;
                for slot in (0..axes).rev() {
                    digits[slot] = code % 3;
                    code /= 3;
                }
                let mut view = dist.tensor.view();
                for &digit in &digits {
                    view.index_axis_inplace(ndarray::Axis(0), digit);
                }
                let sum: f64 = view.iter().sum();
                assert!((sum - 1.0).abs() < 1e-9, "slice sums to {sum}");
            }
        }
    }

    #[test]
    fn distribution_json_round_trip() {
        let circuit = build_ghz_circuit(4).unwrap();
        let dag = to_dag(&circuit).unwrap();
        let fragments = cut(&dag, &balanced_ghz_cutspec(4, 2).unwrap()).unwrap();
        let dists: Vec<FragmentDistribution> = fragments
            .iter()
            .map(|f| {
                let variants = generate_variants(f).unwrap();
                collect_distributions(f, &variants, noiseless_run).unwrap()
            })
            .collect();
        let text = distributions_to_json(&dists);
        let back = distributions_from_json(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].tensor, dists[0].tensor);
        assert_eq!(back[1].incoming_cuts, dists[1].incoming_cuts);
    }

    #[test]
    fn cutspec_json_round_trip() {
        let spec = balanced_ghz_cutspec(6, 3).unwrap();
        let back = CutSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec, back);
    }
}
