//! Recombination: contract fragment distributions with connecting tensors to
//! reconstruct the uncut circuit's output distribution.
//!
//! The network has one node per fragment tensor and one 3x2x2 connecting
//! node per cut. A cut's axis index is shared by the upstream fragment, the
//! downstream fragment and the connector; its b' index pairs with the
//! upstream measurement outcome and its b index with the downstream ancilla
//! outcome (or prepared eigenindex). Contraction cost counts scalar
//! multiplications: merging two nodes costs the product of the sizes of all
//! indices involved, which makes a chain of K fragments cost 48K - 78 when
//! contracted end to end with the external bits fixed.

use ndarray::{ArrayD, IxDyn};
use serde::Serialize;

use crate::cut::{CutBackend, FragmentDistribution};
use crate::error::{Error, Result};
use crate::pauli::GammaTensor;
use crate::sim::OutputDistribution;

type IndexId = usize;

#[derive(Debug, Clone)]
struct NetTensor {
    name: String,
    indices: Vec<IndexId>,
    data: ArrayD<f64>,
}

/// Tensor network of K fragment nodes and M connecting nodes.
#[derive(Debug, Clone)]
pub struct RecombinationNetwork {
    pub backend: CutBackend,
    pub num_fragments: usize,
    pub num_cuts: usize,
    /// Total number of external (final) bits; equals the uncut register size.
    pub num_final_bits: usize,
    index_sizes: Vec<usize>,
    index_external: Vec<bool>,
    /// external index id of each original qubit, in qubit order
    external_of_qubit: Vec<IndexId>,
    nodes: Vec<NetTensor>,
}

impl RecombinationNetwork {
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Connections between fragment legs and connector sides; 2M in total.
    pub fn num_edges(&self) -> usize {
        2 * self.num_cuts
    }

    /// True when the fragment interconnection graph is a simple path.
    pub fn is_chain(&self) -> bool {
        self.chain_order().is_some()
    }

    /// Fragment node slots in path order, when the network is a chain.
    fn chain_order(&self) -> Option<Vec<usize>> {
        if self.num_fragments < 2 || self.num_cuts != self.num_fragments - 1 {
            return None;
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.num_fragments];
        for cut in 0..self.num_cuts {
            let alpha = self.cut_alpha_index(cut);
            let touching: Vec<usize> = (0..self.num_fragments)
                .filter(|&slot| self.nodes[slot].indices.contains(&alpha))
                .collect();
            if touching.len() != 2 {
                return None;
            }
            adj[touching[0]].push(touching[1]);
            adj[touching[1]].push(touching[0]);
        }
        if adj.iter().filter(|n| n.len() == 1).count() != 2
            || adj.iter().any(|n| n.is_empty() || n.len() > 2)
        {
            return None;
        }
        let start = (0..self.num_fragments).find(|&slot| adj[slot].len() == 1)?;
        let mut order = vec![start];
        let mut prev = usize::MAX;
        let mut cursor = start;
        while order.len() < self.num_fragments {
            let next = adj[cursor].iter().copied().find(|&n| n != prev)?;
            order.push(next);
            prev = cursor;
            cursor = next;
        }
        Some(order)
    }

    fn cut_alpha_index(&self, cut: usize) -> IndexId {
        3 * cut
    }
}

/// Assemble the recombination network from fragment distributions. Every cut
/// id must appear exactly once as an outgoing leg and once as an incoming
/// leg, and the fragments' final bits must cover the original register.
pub fn build_network(
    dists: &[FragmentDistribution],
    backend: CutBackend,
) -> Result<RecombinationNetwork> {
    if dists.is_empty() {
        return Err(Error::BadNetwork("no fragment distributions".into()));
    }
    if dists.iter().any(|d| d.backend != backend) {
        return Err(Error::BadNetwork(
            "fragment distributions use a different backend".into(),
        ));
    }
    let mut sorted: Vec<&FragmentDistribution> = dists.iter().collect();
    sorted.sort_by_key(|d| d.fragment_index);
    for (slot, dist) in sorted.iter().enumerate() {
        if dist.fragment_index != slot {
            return Err(Error::BadNetwork(format!(
                "fragment indices must be dense, missing {slot}"
            )));
        }
    }

    let num_cuts = sorted
        .iter()
        .flat_map(|d| d.incoming_cuts.iter().chain(&d.outgoing_cuts))
        .map(|&c| c + 1)
        .max()
        .unwrap_or(0);
    let mut out_seen = vec![0usize; num_cuts];
    let mut in_seen = vec![0usize; num_cuts];
    for dist in &sorted {
        for &c in &dist.outgoing_cuts {
            out_seen[c] += 1;
        }
        for &c in &dist.incoming_cuts {
            in_seen[c] += 1;
        }
    }
    for cut in 0..num_cuts {
        if out_seen[cut] != 1 || in_seen[cut] != 1 {
            return Err(Error::BadNetwork(format!(
                "cut {cut} has {} producer(s) and {} consumer(s)",
                out_seen[cut], in_seen[cut]
            )));
        }
    }

    // index ids: per cut (alpha, b, b'), then one id per external bit
    let mut index_sizes = Vec::new();
    let mut index_external = Vec::new();
    for _ in 0..num_cuts {
        index_sizes.extend([3, 2, 2]);
        index_external.extend([false, false, false]);
    }
    let mut origins: Vec<usize> = sorted
        .iter()
        .flat_map(|d| d.final_origins.iter().copied())
        .collect();
    origins.sort_unstable();
    let num_final_bits = origins.len();
    if origins != (0..num_final_bits).collect::<Vec<_>>() {
        return Err(Error::BadNetwork(
            "final bits do not cover the register exactly once".into(),
        ));
    }
    let mut external_of_qubit = vec![usize::MAX; num_final_bits];
    let mut nodes = Vec::with_capacity(sorted.len() + num_cuts);
    for dist in &sorted {
        let mut indices = Vec::with_capacity(dist.tensor.ndim());
        for &cut in &dist.incoming_cuts {
            indices.push(3 * cut);
        }
        for &cut in &dist.outgoing_cuts {
            indices.push(3 * cut);
        }
        for &cut in &dist.incoming_cuts {
            indices.push(3 * cut + 1);
        }
        for &origin in &dist.final_origins {
            let id = index_sizes.len();
            index_sizes.push(2);
            index_external.push(true);
            external_of_qubit[origin] = id;
            indices.push(id);
        }
        for &cut in &dist.outgoing_cuts {
            indices.push(3 * cut + 2);
        }
        if indices.len() != dist.tensor.ndim() {
            return Err(Error::BadNetwork(format!(
                "fragment {} tensor rank {} does not match its legs",
                dist.fragment_index,
                dist.tensor.ndim()
            )));
        }
        nodes.push(NetTensor {
            name: format!("fragment-{}", dist.fragment_index),
            indices,
            data: dist.tensor.clone(),
        });
    }

    let (gamma, scale) = match backend {
        CutBackend::BellGadget => (GammaTensor::bell(), 1.0),
        CutBackend::EigenstatePrep => (GammaTensor::tilde(), 0.5),
    };
    for cut in 0..num_cuts {
        let mut data = ArrayD::<f64>::zeros(IxDyn(&[3, 2, 2]));
        for (axis_slot, axis) in crate::pauli::PauliAxis::ALL.iter().enumerate() {
            for b in 0..2 {
                for bp in 0..2 {
                    data[IxDyn(&[axis_slot, b, bp])] = scale * gamma.get(*axis, b, bp);
                }
            }
        }
        nodes.push(NetTensor {
            name: format!("cut-{cut}"),
            indices: vec![3 * cut, 3 * cut + 1, 3 * cut + 2],
            data,
        });
    }

    Ok(RecombinationNetwork {
        backend,
        num_fragments: sorted.len(),
        num_cuts,
        num_final_bits,
        index_sizes,
        index_external,
        external_of_qubit,
        nodes,
    })
}

/// One pairwise contraction in a plan.
#[derive(Debug, Clone, Serialize)]
pub struct ContractionStep {
    pub left: String,
    pub right: String,
    pub result: String,
    /// Scalar multiplications performed by this step.
    pub cost: u64,
}

/// Ordered pairwise-contraction plan with its cost ledger. Costs are stated
/// for single-bitstring reconstruction (external legs fixed).
#[derive(Debug, Clone, Serialize)]
pub struct ContractionPlan {
    pub steps: Vec<ContractionStep>,
    pub total_cost: u64,
    /// Cost of summing all internal cut indices simultaneously: 12^M terms.
    pub naive_cost: u64,
}

impl ContractionPlan {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serialization")
    }
}

fn row_major_strides(shape: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * shape[i + 1];
    }
    strides
}

/// Contract two tensors, keeping `kept` indices and summing `summed`.
/// Returns the result and the number of scalar multiplications performed.
fn merge_tensors(
    a: &NetTensor,
    b: &NetTensor,
    kept: &[IndexId],
    summed: &[IndexId],
    sizes: &[usize],
    name: String,
) -> (NetTensor, u64) {
    let union: Vec<IndexId> = kept.iter().chain(summed).copied().collect();
    let dims: Vec<usize> = union.iter().map(|&id| sizes[id]).collect();
    let out_shape: Vec<usize> = kept.iter().map(|&id| sizes[id]).collect();

    let tensor_strides = |t: &NetTensor| -> Vec<usize> {
        let shape: Vec<usize> = t.indices.iter().map(|&id| sizes[id]).collect();
        let strides = row_major_strides(&shape);
        union
            .iter()
            .map(|id| {
                t.indices
                    .iter()
                    .position(|i| i == id)
                    .map(|ax| strides[ax])
                    .unwrap_or(0)
            })
            .collect()
    };
    let a_strides = tensor_strides(a);
    let b_strides = tensor_strides(b);
    let out_strides_full = {
        let strides = row_major_strides(&out_shape);
        let mut full = vec![0usize; union.len()];
        full[..kept.len()].copy_from_slice(&strides);
        full
    };

    let a_std = a.data.as_standard_layout();
    let b_std = b.data.as_standard_layout();
    let a_flat = a_std.as_slice().expect("standard layout");
    let b_flat = b_std.as_slice().expect("standard layout");
    let out_len = out_shape.iter().product::<usize>().max(1);
    let mut out = vec![0.0f64; out_len];

    let total: u64 = dims.iter().map(|&d| d as u64).product::<u64>().max(1);
    let mut counters = vec![0usize; union.len()];
    let (mut a_off, mut b_off, mut o_off) = (0usize, 0usize, 0usize);
    let mut remaining = total;
    loop {
        out[o_off] += a_flat[a_off] * b_flat[b_off];
        remaining -= 1;
        if remaining == 0 {
            break;
        }
        let mut slot = union.len();
        loop {
            slot -= 1;
            counters[slot] += 1;
            a_off += a_strides[slot];
            b_off += b_strides[slot];
            o_off += out_strides_full[slot];
            if counters[slot] < dims[slot] {
                break;
            }
            counters[slot] = 0;
            a_off -= a_strides[slot] * dims[slot];
            b_off -= b_strides[slot] * dims[slot];
            o_off -= out_strides_full[slot] * dims[slot];
        }
    }

    let data = ArrayD::from_shape_vec(IxDyn(&out_shape), out).expect("result shape");
    (
        NetTensor {
            name,
            indices: kept.to_vec(),
            data,
        },
        total,
    )
}

/// Split a merge's union into kept and summed indices, given how many live
/// tensors reference each index.
fn split_union(
    a: &NetTensor,
    b: &NetTensor,
    occurrence: &[usize],
    external: &[bool],
) -> (Vec<IndexId>, Vec<IndexId>) {
    let mut union: Vec<IndexId> = a.indices.clone();
    for &id in &b.indices {
        if !union.contains(&id) {
            union.push(id);
        }
    }
    let mut kept = Vec::new();
    let mut summed = Vec::new();
    for id in union {
        let uses_here =
            usize::from(a.indices.contains(&id)) + usize::from(b.indices.contains(&id));
        let remaining = occurrence[id] - uses_here;
        if external[id] || remaining > 0 {
            kept.push(id);
        } else {
            summed.push(id);
        }
    }
    (kept, summed)
}

struct Contractor {
    live: Vec<Option<NetTensor>>,
    occurrence: Vec<usize>,
    external: Vec<bool>,
    sizes: Vec<usize>,
    step_counter: usize,
}

impl Contractor {
    fn new(nodes: Vec<NetTensor>, sizes: Vec<usize>, external: Vec<bool>) -> Self {
        let mut occurrence = vec![0usize; sizes.len()];
        for node in &nodes {
            for &id in &node.indices {
                occurrence[id] += 1;
            }
        }
        Contractor {
            live: nodes.into_iter().map(Some).collect(),
            occurrence,
            external,
            sizes,
            step_counter: 0,
        }
    }

    /// Multiplication cost and result size of merging a live pair, when the
    /// two tensors share an index.
    fn pair_key(&self, i: usize, j: usize) -> Option<(u64, u64)> {
        let a = self.live[i].as_ref()?;
        let b = self.live[j].as_ref()?;
        if !a.indices.iter().any(|id| b.indices.contains(id)) {
            return None;
        }
        let (kept, summed) = split_union(a, b, &self.occurrence, &self.external);
        let cost = kept
            .iter()
            .chain(&summed)
            .map(|&id| self.sizes[id] as u64)
            .product::<u64>()
            .max(1);
        let result_size = kept
            .iter()
            .map(|&id| self.sizes[id] as u64)
            .product::<u64>()
            .max(1);
        Some((cost, result_size))
    }

    fn merge(&mut self, i: usize, j: usize) -> ContractionStep {
        let a = self.live[i].take().expect("live node");
        let b = self.live[j].take().expect("live node");
        let (kept, summed) = split_union(&a, &b, &self.occurrence, &self.external);
        for &id in a.indices.iter().chain(&b.indices) {
            self.occurrence[id] -= 1;
        }
        let name = format!("step-{}", self.step_counter);
        self.step_counter += 1;
        let (result, cost) = merge_tensors(&a, &b, &kept, &summed, &self.sizes, name.clone());
        for &id in &result.indices {
            self.occurrence[id] += 1;
        }
        let step = ContractionStep {
            left: a.name,
            right: b.name,
            result: name,
            cost,
        };
        self.live.push(Some(result));
        step
    }

    fn remaining(&self) -> Vec<usize> {
        (0..self.live.len())
            .filter(|&i| self.live[i].is_some())
            .collect()
    }

    fn into_result(mut self) -> NetTensor {
        let alive = self.remaining();
        assert_eq!(alive.len(), 1, "contraction must end with one node");
        self.live[alive[0]].take().expect("final node")
    }
}

/// Live tensors for reconstruction: external bits fixed (per-bitstring mode)
/// or kept open (full mode).
fn instantiate(network: &RecombinationNetwork, bits: Option<&[u8]>) -> Result<Vec<NetTensor>> {
    if let Some(bits) = bits {
        if bits.len() != network.num_final_bits {
            return Err(Error::BadBitstringLength {
                got: bits.len(),
                expected: network.num_final_bits,
            });
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::BadConfig("bits must be 0 or 1".into()));
        }
    }
    let mut nodes = Vec::with_capacity(network.nodes.len());
    for node in &network.nodes {
        match bits {
            None => nodes.push(node.clone()),
            Some(bits) => {
                let mut data = node.data.view();
                let mut indices = Vec::with_capacity(node.indices.len());
                let mut axis = 0;
                for &id in &node.indices {
                    if network.index_external[id] {
                        let qubit = network
                            .external_of_qubit
                            .iter()
                            .position(|&e| e == id)
                            .expect("external index maps to a qubit");
                        data.index_axis_inplace(ndarray::Axis(axis), bits[qubit] as usize);
                    } else {
                        indices.push(id);
                        axis += 1;
                    }
                }
                nodes.push(NetTensor {
                    name: node.name.clone(),
                    indices,
                    data: data.to_owned(),
                });
            }
        }
    }
    Ok(nodes)
}

fn greedy_merge_order(contractor: &mut Contractor) -> Result<Vec<ContractionStep>> {
    let mut steps = Vec::new();
    loop {
        let alive = contractor.remaining();
        if alive.len() <= 1 {
            break;
        }
        // cheapest merge first; prefer the smaller result on ties, then the
        // earliest pair, which keeps chains contracting from their ends
        let mut best: Option<(u64, u64, usize, usize)> = None;
        for (pos, &i) in alive.iter().enumerate() {
            for &j in &alive[pos + 1..] {
                if let Some((cost, size)) = contractor.pair_key(i, j) {
                    if best.map(|(c, s, _, _)| (cost, size) < (c, s)).unwrap_or(true) {
                        best = Some((cost, size, i, j));
                    }
                }
            }
        }
        let Some((_, _, i, j)) = best else {
            return Err(Error::DisconnectedNetwork);
        };
        steps.push(contractor.merge(i, j));
    }
    Ok(steps)
}

/// Walk a chain from its lowest-index end: fragment, its connector, the next
/// fragment, and so on.
fn chain_merge(
    contractor: &mut Contractor,
    network: &RecombinationNetwork,
    order: &[usize],
) -> Result<Vec<ContractionStep>> {
    let connector_slot = |cut: usize| network.num_fragments + cut;
    let mut steps = Vec::new();
    let mut current = order[0];
    for &next in &order[1..] {
        let next_indices: Vec<IndexId> = contractor.live[next]
            .as_ref()
            .expect("fragment still live")
            .indices
            .clone();
        let cut = (0..network.num_cuts)
            .find(|&cut| {
                let alpha = network.cut_alpha_index(cut);
                contractor.live[connector_slot(cut)].is_some()
                    && contractor.live[current]
                        .as_ref()
                        .map(|t| t.indices.contains(&alpha))
                        .unwrap_or(false)
                    && next_indices.contains(&alpha)
            })
            .ok_or(Error::NotAChain)?;
        steps.push(contractor.merge(current, connector_slot(cut)));
        current = contractor.live.len() - 1;
        steps.push(contractor.merge(current, next));
        current = contractor.live.len() - 1;
    }
    Ok(steps)
}

/// Probability of a single output bitstring: fix the external legs, then
/// contract all internal indices (chains contract end to end, anything else
/// greedily).
pub fn reconstruct_bitstring(network: &RecombinationNetwork, bits: &[u8]) -> Result<f64> {
    let (value, _) = reconstruct_bitstring_counted(network, bits)?;
    Ok(value)
}

/// Same as `reconstruct_bitstring`, also reporting the executed per-step
/// multiplication counts.
pub fn reconstruct_bitstring_counted(
    network: &RecombinationNetwork,
    bits: &[u8],
) -> Result<(f64, Vec<u64>)> {
    let nodes = instantiate(network, Some(bits))?;
    let mut contractor = Contractor::new(
        nodes,
        network.index_sizes.clone(),
        network.index_external.clone(),
    );
    let steps = match network.chain_order() {
        Some(order) => chain_merge(&mut contractor, network, &order)?,
        None => greedy_merge_order(&mut contractor)?,
    };
    let costs = steps.iter().map(|s| s.cost).collect();
    let result = contractor.into_result();
    debug_assert!(result.indices.is_empty());
    let value = *result.data.iter().next().expect("scalar result");
    Ok((value, costs))
}

fn finish_distribution(
    network: &RecombinationNetwork,
    result: NetTensor,
) -> Result<OutputDistribution> {
    let m = network.num_final_bits;
    let mut perm = Vec::with_capacity(m);
    for qubit in 0..m {
        let id = network.external_of_qubit[qubit];
        let axis = result
            .indices
            .iter()
            .position(|&i| i == id)
            .ok_or_else(|| Error::BadNetwork("external leg lost in contraction".into()))?;
        perm.push(axis);
    }
    let ordered = result.data.permuted_axes(IxDyn(&perm));
    let probs: Vec<f64> = ordered.as_standard_layout().iter().copied().collect();
    Ok(OutputDistribution { num_bits: m, probs })
}

/// Reconstruct the full distribution in one contraction with the external
/// legs kept open. Entries may be slightly negative for noisy or sampled
/// inputs; they are reported raw.
pub fn reconstruct_full(network: &RecombinationNetwork) -> Result<OutputDistribution> {
    let nodes = instantiate(network, None)?;
    let mut contractor = Contractor::new(
        nodes,
        network.index_sizes.clone(),
        network.index_external.clone(),
    );
    greedy_merge_order(&mut contractor)?;
    finish_distribution(network, contractor.into_result())
}

/// `reconstruct_full`, then clip negative entries to zero and renormalize.
pub fn reconstruct_full_clipped(network: &RecombinationNetwork) -> Result<OutputDistribution> {
    let mut dist = reconstruct_full(network)?;
    for p in dist.probs.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let total: f64 = dist.probs.iter().sum();
    if total > 0.0 {
        for p in dist.probs.iter_mut() {
            *p /= total;
        }
    }
    Ok(dist)
}

fn plan_from_steps(steps: Vec<ContractionStep>, num_cuts: usize) -> ContractionPlan {
    let total_cost = steps.iter().map(|s| s.cost).sum();
    ContractionPlan {
        steps,
        total_cost,
        naive_cost: 12u64.pow(num_cuts as u32),
    }
}

/// End-to-end plan for a path-shaped network in per-bitstring mode. The step
/// sequence for a chain of K fragments is {12, 36, 12, 36, ..., 12, 6},
/// totalling 48K - 78.
pub fn sequential_chain_plan(network: &RecombinationNetwork) -> Result<ContractionPlan> {
    let order = network.chain_order().ok_or(Error::NotAChain)?;
    let zeros = vec![0u8; network.num_final_bits];
    let nodes = instantiate(network, Some(&zeros))?;
    let mut contractor = Contractor::new(
        nodes,
        network.index_sizes.clone(),
        network.index_external.clone(),
    );
    let steps = chain_merge(&mut contractor, network, &order)?;
    Ok(plan_from_steps(steps, network.num_cuts))
}

/// Greedy pairwise plan for any connected network in per-bitstring mode:
/// repeatedly contract the adjacent pair with the cheapest merge.
pub fn general_contraction_plan(network: &RecombinationNetwork) -> Result<ContractionPlan> {
    let zeros = vec![0u8; network.num_final_bits];
    let nodes = instantiate(network, Some(&zeros))?;
    let mut contractor = Contractor::new(
        nodes,
        network.index_sizes.clone(),
        network.index_external.clone(),
    );
    let steps = greedy_merge_order(&mut contractor)?;
    Ok(plan_from_steps(steps, network.num_cuts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_ghz_circuit, to_dag, Circuit, Gate};
    use crate::cut::{
        balanced_ghz_cutspec, collect_distributions, cut, generate_variants, CutEdge, CutSpec,
        Fragment,
    };
    use crate::sim::{measure_distribution, simulate};

    fn noiseless_run(circuit: &Circuit) -> Result<OutputDistribution> {
        Ok(measure_distribution(&simulate(circuit, None)?, None))
    }

    fn ghz_network(m: usize, k: usize) -> RecombinationNetwork {
        let circuit = build_ghz_circuit(m).unwrap();
        let dag = to_dag(&circuit).unwrap();
        let fragments = cut(&dag, &balanced_ghz_cutspec(m, k).unwrap()).unwrap();
        let dists: Vec<_> = fragments
            .iter()
            .map(|f| {
                let variants = generate_variants(f).unwrap();
                collect_distributions(f, &variants, noiseless_run).unwrap()
            })
            .collect();
        build_network(&dists, CutBackend::BellGadget).unwrap()
    }

    #[test]
    fn two_fragment_network_shape() {
        let network = ghz_network(4, 2);
        assert_eq!(network.num_nodes(), 3);
        assert_eq!(network.num_edges(), 2);
        assert!(network.is_chain());
    }

    #[test]
    fn ghz_chains_are_paths() {
        for k in [2usize, 3, 4] {
            let network = ghz_network(8, k);
            assert_eq!(network.num_nodes(), 2 * k - 1);
            assert!(network.is_chain(), "{k}-fragment network is a chain");
        }
    }

    #[test]
    fn two_qubit_single_cut_reconstruction() {
        let network = ghz_network(2, 2);
        assert!((reconstruct_bitstring(&network, &[0, 1]).unwrap() - 0.5).abs() < 1e-10);
        assert!((reconstruct_bitstring(&network, &[1, 0]).unwrap() - 0.5).abs() < 1e-10);
        assert!(reconstruct_bitstring(&network, &[0, 0]).unwrap().abs() < 1e-10);
        assert!(reconstruct_bitstring(&network, &[1, 1]).unwrap().abs() < 1e-10);
    }

    #[test]
    fn six_qubit_two_cut_reconstruction_matches_direct() {
        let circuit = build_ghz_circuit(6).unwrap();
        let reference = noiseless_run(&circuit).unwrap();
        let network = ghz_network(6, 3);
        let reconstructed = reconstruct_full(&network).unwrap();
        for (a, b) in reference.probs.iter().zip(&reconstructed.probs) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn full_reconstruction_matches_bitstring_mode() {
        let network = ghz_network(4, 2);
        let full = reconstruct_full(&network).unwrap();
        for index in 0..16 {
            let bits = crate::sim::bits_of_index(index, 4);
            let single = reconstruct_bitstring(&network, &bits).unwrap();
            assert!((full.probs[index] - single).abs() < 1e-12);
        }
    }

    #[test]
    fn bad_bitstring_length_rejected() {
        let network = ghz_network(4, 2);
        assert!(matches!(
            reconstruct_bitstring(&network, &[0, 1]),
            Err(Error::BadBitstringLength { .. })
        ));
    }

    #[test]
    fn sequential_chain_costs() {
        for k in [2usize, 3, 4] {
            let network = ghz_network(8, k);
            let plan = sequential_chain_plan(&network).unwrap();
            let expected: Vec<u64> = match k {
                2 => vec![12, 6],
                3 => vec![12, 36, 12, 6],
                _ => vec![12, 36, 12, 36, 12, 6],
            };
            let costs: Vec<u64> = plan.steps.iter().map(|s| s.cost).collect();
            assert_eq!(costs, expected, "chain of {k}");
            assert_eq!(plan.total_cost, 48 * k as u64 - 78);
        }
    }

    #[test]
    fn executed_costs_match_plan() {
        let network = ghz_network(6, 3);
        let plan = sequential_chain_plan(&network).unwrap();
        let (_, executed) = reconstruct_bitstring_counted(&network, &[0, 0, 0, 1, 1, 1]).unwrap();
        let planned: Vec<u64> = plan.steps.iter().map(|s| s.cost).collect();
        assert_eq!(executed, planned);
    }

    #[test]
    fn greedy_equals_sequential_on_chains() {
        for k in [2usize, 3, 4] {
            let network = ghz_network(8, k);
            let sequential = sequential_chain_plan(&network).unwrap();
            let greedy = general_contraction_plan(&network).unwrap();
            assert_eq!(greedy.total_cost, sequential.total_cost, "chain of {k}");
        }
    }

    /// Three fragments joined by three cuts in a cycle.
    fn triangle_network() -> (RecombinationNetwork, OutputDistribution) {
        let mut circuit = Circuit::new(3, "triangle");
        circuit.push(Gate::h(0)).unwrap();
        circuit.push(Gate::h(1)).unwrap();
        circuit.push(Gate::cnot(0, 1)).unwrap();
        circuit.push(Gate::cnot(1, 2)).unwrap();
        circuit.push(Gate::cnot(0, 2)).unwrap();
        let reference = noiseless_run(&circuit).unwrap();
        let dag = to_dag(&circuit).unwrap();
        let spec = CutSpec {
            edges: vec![
                CutEdge {
                    source_gate_index: Some(2),
                    target_gate_index: Some(4),
                    qubit: 0,
                },
                CutEdge {
                    source_gate_index: Some(2),
                    target_gate_index: Some(3),
                    qubit: 1,
                },
                CutEdge {
                    source_gate_index: Some(3),
                    target_gate_index: Some(4),
                    qubit: 2,
                },
            ],
        };
        let fragments = cut(&dag, &spec).unwrap();
        assert_eq!(fragments.len(), 3);
        let dists: Vec<_> = fragments
            .iter()
            .map(|f| {
                let variants = generate_variants(f).unwrap();
                collect_distributions(f, &variants, noiseless_run).unwrap()
            })
            .collect();
        (
            build_network(&dists, CutBackend::BellGadget).unwrap(),
            reference,
        )
    }

    #[test]
    fn non_chain_rejected_by_sequential_plan() {
        let (network, _) = triangle_network();
        assert!(matches!(
            sequential_chain_plan(&network),
            Err(Error::NotAChain)
        ));
    }

    #[test]
    fn triangle_topology_network_plan_and_reconstruction() {
        let (network, reference) = triangle_network();
        assert_eq!(network.num_nodes(), 6);
        assert_eq!(network.num_edges(), 6);
        assert!(!network.is_chain());
        let plan = general_contraction_plan(&network).unwrap();
        assert_eq!(plan.naive_cost, 12u64.pow(3));
        assert!(
            plan.total_cost < plan.naive_cost,
            "got {} vs naive {}",
            plan.total_cost,
            plan.naive_cost
        );
        let reconstructed = reconstruct_full(&network).unwrap();
        for (a, b) in reference.probs.iter().zip(&reconstructed.probs) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn single_fragment_passthrough() {
        let circuit = build_ghz_circuit(4).unwrap();
        let fragment = Fragment::whole(&circuit);
        let variants = generate_variants(&fragment).unwrap();
        assert_eq!(variants.len(), 1);
        let dist = collect_distributions(&fragment, &variants, noiseless_run).unwrap();
        let network = build_network(&[dist], CutBackend::BellGadget).unwrap();
        assert_eq!(network.num_nodes(), 1);
        let reconstructed = reconstruct_full(&network).unwrap();
        let reference = noiseless_run(&circuit).unwrap();
        for (a, b) in reference.probs.iter().zip(&reconstructed.probs) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn clipping_renormalizes() {
        let network = ghz_network(4, 2);
        let clipped = reconstruct_full_clipped(&network).unwrap();
        let sum: f64 = clipped.probs.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(clipped.probs.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn dangling_leg_rejected() {
        let circuit = build_ghz_circuit(4).unwrap();
        let dag = to_dag(&circuit).unwrap();
        let fragments = cut(&dag, &balanced_ghz_cutspec(4, 2).unwrap()).unwrap();
        let dists: Vec<_> = fragments
            .iter()
            .map(|f| {
                let variants = generate_variants(f).unwrap();
                collect_distributions(f, &variants, noiseless_run).unwrap()
            })
            .collect();
        // drop the downstream fragment: cut 0 loses its consumer
        assert!(matches!(
            build_network(&dists[..1], CutBackend::BellGadget),
            Err(Error::BadNetwork(_))
        ));
    }
}
