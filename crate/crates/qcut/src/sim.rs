//! Dense density-matrix simulation.
//!
//! A register of n qubits evolves as a 2^n x 2^n complex matrix through gate
//! unitaries and Kraus channels. Gates are packed into ASAP moments; within a
//! moment the order is gate unitary, then gate depolarizing noise on the acted
//! qubits, then idle relaxation and dephasing on every untouched qubit for the
//! moment's duration. Measurements are deferred: readout is a per-qubit POVM
//! applied to the final diagonal.

use ndarray::Array2;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, GateClass, GateKind};
use crate::error::{Error, Result};
use crate::noise::{
    amplitude_damping_channel, dephasing_channel, depolarizing_channel, NoiseModel, ReadoutPovm,
};
use crate::pauli::PauliAxis;

/// Dense simulation cap; 2^12 x 2^12 complex doubles is 256 MiB.
pub const MAX_DENSE_QUBITS: usize = 12;

const TRACE_TOL: f64 = 1e-10;
const HERMITICITY_TOL: f64 = 1e-10;
/// Allowed slack on the minimum eigenvalue before PSD is considered violated.
pub const PSD_SLACK: f64 = 1e-9;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Density matrix of an n-qubit register. Qubit 0 is the most significant bit
/// of the basis index.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub num_qubits: usize,
    pub data: Array2<Complex64>,
}

impl DensityMatrix {
    pub fn ground_state(num_qubits: usize) -> Result<Self> {
        if num_qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooManyQubits {
                requested: num_qubits,
                cap: MAX_DENSE_QUBITS,
            });
        }
        let dim = 1usize << num_qubits;
        let mut data = Array2::from_elem((dim, dim), c(0., 0.));
        data[[0, 0]] = c(1., 0.);
        Ok(DensityMatrix { num_qubits, data })
    }

    pub fn trace(&self) -> Complex64 {
        self.data.diag().sum()
    }

    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.data.nrows() {
            for j in 0..self.data.ncols() {
                acc += (self.data[[i, j]] * self.data[[j, i]]).re;
            }
        }
        acc
    }

    /// Diagonal in the computational basis.
    pub fn diagonal(&self) -> Vec<f64> {
        self.data.diag().iter().map(|v| v.re).collect()
    }

    fn bit_positions(&self, qubits: &[usize]) -> Vec<usize> {
        qubits.iter().map(|&q| self.num_qubits - 1 - q).collect()
    }

    fn sub_indices(&self, positions: &[usize]) -> (usize, Vec<usize>) {
        let k = positions.len();
        let mask: usize = positions.iter().map(|&p| 1usize << p).sum();
        let offsets = (0..1usize << k)
            .map(|s| {
                let mut offset = 0usize;
                for (j, &p) in positions.iter().enumerate() {
                    if (s >> (k - 1 - j)) & 1 == 1 {
                        offset |= 1 << p;
                    }
                }
                offset
            })
            .collect();
        (mask, offsets)
    }

    fn apply_op_rows(&mut self, op: &Array2<Complex64>, positions: &[usize]) {
        let dim = self.data.nrows();
        let (mask, offsets) = self.sub_indices(positions);
        let sub = offsets.len();
        let mut gathered = vec![c(0., 0.); sub];
        for base in 0..dim {
            if base & mask != 0 {
                continue;
            }
            for col in 0..dim {
                for (si, &off) in offsets.iter().enumerate() {
                    gathered[si] = self.data[[base | off, col]];
                }
                for (si, &off) in offsets.iter().enumerate() {
                    let mut acc = c(0., 0.);
                    for (sj, &g) in gathered.iter().enumerate() {
                        acc += op[[si, sj]] * g;
                    }
                    self.data[[base | off, col]] = acc;
                }
            }
        }
    }

    fn apply_op_cols_dagger(&mut self, op: &Array2<Complex64>, positions: &[usize]) {
        let dim = self.data.nrows();
        let (mask, offsets) = self.sub_indices(positions);
        let sub = offsets.len();
        let mut gathered = vec![c(0., 0.); sub];
        for row in 0..dim {
            for base in 0..dim {
                if base & mask != 0 {
                    continue;
                }
                for (sj, &off) in offsets.iter().enumerate() {
                    gathered[sj] = self.data[[row, base | off]];
                }
                for (si, &off) in offsets.iter().enumerate() {
                    let mut acc = c(0., 0.);
                    for (sj, &g) in gathered.iter().enumerate() {
                        acc += g * op[[si, sj]].conj();
                    }
                    self.data[[row, base | off]] = acc;
                }
            }
        }
    }

    /// rho <- U rho U^dagger on the listed qubits (first qubit = high bit
    /// of the operator's index).
    pub fn apply_unitary(&mut self, u: &Array2<Complex64>, qubits: &[usize]) {
        let positions = self.bit_positions(qubits);
        self.apply_op_rows(u, &positions);
        self.apply_op_cols_dagger(u, &positions);
    }

    /// rho <- sum_i K_i rho K_i^dagger on the listed qubits.
    pub fn apply_kraus(&mut self, ops: &[Array2<Complex64>], qubits: &[usize]) {
        let positions = self.bit_positions(qubits);
        if ops.len() == 1 {
            self.apply_op_rows(&ops[0], &positions);
            self.apply_op_cols_dagger(&ops[0], &positions);
            return;
        }
        let original = self.data.clone();
        let mut acc = Array2::from_elem(original.raw_dim(), c(0., 0.));
        for k in ops {
            self.data.assign(&original);
            self.apply_op_rows(k, &positions);
            self.apply_op_cols_dagger(k, &positions);
            acc += &self.data;
        }
        self.data = acc;
    }

    /// Positive semidefiniteness within the given eigenvalue slack, checked
    /// by attempting a Cholesky factorization of data + slack * I.
    pub fn is_psd(&self, slack: f64) -> bool {
        let dim = self.data.nrows();
        let mut l = vec![c(0., 0.); dim * dim];
        for j in 0..dim {
            let mut d = self.data[[j, j]].re + slack;
            for k in 0..j {
                d -= l[j * dim + k].norm_sqr();
            }
            if d < 0.0 {
                return false;
            }
            let diag = d.sqrt();
            l[j * dim + j] = c(diag, 0.);
            if diag == 0.0 {
                continue;
            }
            for i in j + 1..dim {
                let mut acc = self.data[[i, j]];
                for k in 0..j {
                    acc -= l[i * dim + k] * l[j * dim + k].conj();
                }
                l[i * dim + j] = acc / diag;
            }
        }
        true
    }

    pub fn validate(&self) -> Result<()> {
        let trace = self.trace();
        if (trace - c(1., 0.)).norm() > TRACE_TOL {
            return Err(Error::BadConfig(format!(
                "density matrix trace {} deviates from 1",
                trace.re
            )));
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.data.nrows() {
            for j in 0..self.data.ncols() {
                dev = dev.max((self.data[[i, j]] - self.data[[j, i]].conj()).norm());
            }
        }
        if dev > HERMITICITY_TOL {
            return Err(Error::NonHermitian(dev));
        }
        if !self.is_psd(PSD_SLACK) {
            return Err(Error::BadConfig(
                "density matrix is not positive semidefinite".into(),
            ));
        }
        Ok(())
    }
}

/// Probabilities over the 2^n bitstrings of an n-bit readout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDistribution {
    pub num_bits: usize,
    pub probs: Vec<f64>,
}

impl OutputDistribution {
    pub fn validate(&self) -> Result<()> {
        if self.probs.len() != 1 << self.num_bits {
            return Err(Error::DimensionMismatch {
                left: self.probs.len(),
                right: 1 << self.num_bits,
            });
        }
        if self.probs.iter().any(|&p| p < -1e-9) {
            return Err(Error::BadProbability(
                self.probs.iter().cloned().fold(f64::INFINITY, f64::min),
            ));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::BadConfig(format!(
                "distribution sums to {sum}, expected 1"
            )));
        }
        Ok(())
    }

    /// Probability of the given bitstring (qubit 0 leftmost).
    pub fn prob_of_bits(&self, bits: &[u8]) -> Result<f64> {
        if bits.len() != self.num_bits {
            return Err(Error::BadBitstringLength {
                got: bits.len(),
                expected: self.num_bits,
            });
        }
        Ok(self.probs[index_of_bits(bits)])
    }

    /// Serialize as a JSON object keyed by bitstring.
    pub fn to_json(&self) -> String {
        let mut entries = Vec::with_capacity(self.probs.len());
        for (i, &p) in self.probs.iter().enumerate() {
            entries.push(format!(
                "  \"{}\": {}",
                bitstring_of_index(i, self.num_bits),
                serde_json::to_string(&p).expect("finite probability"),
            ));
        }
        format!(
            "{{\n\"num_bits\": {},\n\"probs\": {{\n{}\n}}\n}}",
            self.num_bits,
            entries.join(",\n")
        )
    }

    pub fn from_json(text: &str) -> Result<OutputDistribution> {
        #[derive(Deserialize)]
        struct Dto {
            num_bits: usize,
            probs: std::collections::BTreeMap<String, f64>,
        }
        let dto: Dto = serde_json::from_str(text).map_err(|source| Error::Json {
            context: "parsing distribution".into(),
            source,
        })?;
        let mut probs = vec![0.0; 1 << dto.num_bits];
        for (key, p) in dto.probs {
            let bits: Vec<u8> = key
                .chars()
                .map(|ch| match ch {
                    '0' => Ok(0u8),
                    '1' => Ok(1u8),
                    other => Err(Error::BadConfig(format!("bad bitstring char '{other}'"))),
                })
                .collect::<Result<_>>()?;
            if bits.len() != dto.num_bits {
                return Err(Error::BadBitstringLength {
                    got: bits.len(),
                    expected: dto.num_bits,
                });
            }
            probs[index_of_bits(&bits)] = p;
        }
        Ok(OutputDistribution {
            num_bits: dto.num_bits,
            probs,
        })
    }
}

/// Big-endian index of a bitstring (qubit 0 is the leftmost bit).
pub fn index_of_bits(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize)
}

/// Inverse of `index_of_bits`.
pub fn bits_of_index(index: usize, num_bits: usize) -> Vec<u8> {
    (0..num_bits)
        .map(|k| ((index >> (num_bits - 1 - k)) & 1) as u8)
        .collect()
}

fn bitstring_of_index(index: usize, num_bits: usize) -> String {
    bits_of_index(index, num_bits)
        .iter()
        .map(|b| char::from(b'0' + b))
        .collect()
}

/// Shot histogram over the 2^n outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub num_bits: usize,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Empirical distribution of the histogram.
    pub fn to_distribution(&self) -> OutputDistribution {
        let total = self.shots() as f64;
        OutputDistribution {
            num_bits: self.num_bits,
            probs: self.counts.iter().map(|&n| n as f64 / total).collect(),
        }
    }
}

/// Multinomial sampling with an explicit seed; identical seeds give identical
/// histograms.
pub fn sample_counts(dist: &OutputDistribution, shots: u64, seed: u64) -> Result<Histogram> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let mut cdf = Vec::with_capacity(dist.probs.len());
    let mut acc = 0.0;
    for &p in &dist.probs {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let total = acc;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut counts = vec![0u64; dist.probs.len()];
    let last = counts.len() - 1;
    for _ in 0..shots {
        let draw: f64 = rng.random::<f64>() * total;
        let idx = cdf.partition_point(|&edge| edge < draw);
        counts[idx.min(last)] += 1;
    }
    Ok(Histogram {
        num_bits: dist.num_bits,
        counts,
    })
}

/// Rewrite X/Y measurements into pre-measurement rotations followed by a Z
/// measurement: X becomes H, Y becomes S-dagger then H. Inserted rotations
/// are ordinary gates and incur gate noise.
pub fn measure_with_axis(circuit: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::new(circuit.num_qubits, circuit.label.clone());
    for gate in &circuit.gates {
        match gate.kind {
            GateKind::Measure(PauliAxis::X) => {
                let q = gate.qubits[0];
                out.push(Gate::h(q))?;
                out.push(Gate::measure(PauliAxis::Z, q))?;
            }
            GateKind::Measure(PauliAxis::Y) => {
                let q = gate.qubits[0];
                out.push(Gate::s_dag(q))?;
                out.push(Gate::h(q))?;
                out.push(Gate::measure(PauliAxis::Z, q))?;
            }
            _ => out.push(gate.clone())?,
        }
    }
    Ok(out)
}

/// Expand eigenstate preparations into concrete gates from the ground state.
pub fn lower_preparations(circuit: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::new(circuit.num_qubits, circuit.label.clone());
    for gate in &circuit.gates {
        match gate.kind {
            GateKind::PrepPauliEigenstate(axis, b) => {
                let q = gate.qubits[0];
                for g in prep_gates(axis, b, q) {
                    out.push(g)?;
                }
            }
            _ => out.push(gate.clone())?,
        }
    }
    Ok(out)
}

/// Gate sequence preparing the (axis, eigenindex) eigenstate from |0>.
pub fn prep_gates(axis: PauliAxis, eigenindex: u8, qubit: usize) -> Vec<Gate> {
    match (axis, eigenindex) {
        (PauliAxis::Z, 0) => vec![],
        (PauliAxis::Z, 1) => vec![Gate::x(qubit)],
        (PauliAxis::X, 0) => vec![Gate::h(qubit)],
        (PauliAxis::X, 1) => vec![Gate::x(qubit), Gate::h(qubit)],
        // H then S-dagger lands on the -1 eigenstate; X then maps it to +1
        // up to a global phase.
        (PauliAxis::Y, 0) => vec![Gate::h(qubit), Gate::s_dag(qubit), Gate::x(qubit)],
        (PauliAxis::Y, 1) => vec![Gate::h(qubit), Gate::s_dag(qubit)],
        _ => panic!("eigenindex must be 0 or 1"),
    }
}

fn gate_unitary(kind: GateKind) -> Array2<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match kind {
        GateKind::H => Array2::from_shape_vec(
            (2, 2),
            vec![c(s, 0.), c(s, 0.), c(s, 0.), c(-s, 0.)],
        )
        .unwrap(),
        GateKind::X => crate::pauli::pauli_matrix(1),
        GateKind::SDag => {
            Array2::from_shape_vec((2, 2), vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., -1.)])
                .unwrap()
        }
        GateKind::Cnot => {
            let mut m = Array2::from_elem((4, 4), c(0., 0.));
            m[[0, 0]] = c(1., 0.);
            m[[1, 1]] = c(1., 0.);
            m[[2, 3]] = c(1., 0.);
            m[[3, 2]] = c(1., 0.);
            m
        }
        GateKind::Swap => {
            let mut m = Array2::from_elem((4, 4), c(0., 0.));
            m[[0, 0]] = c(1., 0.);
            m[[1, 2]] = c(1., 0.);
            m[[2, 1]] = c(1., 0.);
            m[[3, 3]] = c(1., 0.);
            m
        }
        GateKind::PrepPauliEigenstate(..) | GateKind::Measure(_) => {
            panic!("pseudo-gate must be lowered before simulation")
        }
    }
}

/// ASAP schedule of the non-measurement gates: each gate lands in the first
/// moment after all gates that precede it on its wires. A moment's duration
/// is the longest gate it contains.
#[derive(Debug, Clone)]
pub struct Moment {
    pub gate_indices: Vec<usize>,
    pub duration_ns: f64,
}

pub fn schedule_moments(circuit: &Circuit, noise: &NoiseModel) -> Vec<Moment> {
    let mut moments: Vec<Moment> = Vec::new();
    let mut next_free = vec![0usize; circuit.num_qubits];
    for (index, gate) in circuit.gates.iter().enumerate() {
        if matches!(gate.kind, GateKind::Measure(_)) {
            continue;
        }
        let slot = gate.qubits.iter().map(|&q| next_free[q]).max().unwrap_or(0);
        while moments.len() <= slot {
            moments.push(Moment {
                gate_indices: Vec::new(),
                duration_ns: 0.0,
            });
        }
        moments[slot].gate_indices.push(index);
        let duration = noise.duration_ns(gate.kind.class());
        if duration > moments[slot].duration_ns {
            moments[slot].duration_ns = duration;
        }
        for &q in &gate.qubits {
            next_free[q] = slot + 1;
        }
    }
    moments
}

fn apply_gate_noise(rho: &mut DensityMatrix, gate: &Gate, noise: &NoiseModel) -> Result<()> {
    match gate.kind.class() {
        GateClass::Cnot => {
            let channel = depolarizing_channel(noise.depol_2q, 2)?;
            rho.apply_kraus(&channel.ops, &gate.qubits);
        }
        GateClass::Swap => {
            // costed as a three-CNOT implementation
            let channel = depolarizing_channel(noise.depol_2q, 2)?;
            for _ in 0..3 {
                rho.apply_kraus(&channel.ops, &gate.qubits);
            }
        }
        GateClass::Measure | GateClass::Prep => {}
        _ => {
            let channel = depolarizing_channel(noise.depol_1q, 1)?;
            rho.apply_kraus(&channel.ops, &gate.qubits);
        }
    }
    Ok(())
}

/// Evolve |0...0> through the circuit, with optional noise. Preparation and
/// axis-measurement pseudo-gates are lowered first; Z-measure markers carry
/// no evolution (readout is applied separately).
pub fn simulate(circuit: &Circuit, noise: Option<&NoiseModel>) -> Result<DensityMatrix> {
    let lowered = measure_with_axis(&lower_preparations(circuit)?)?;
    let mut rho = DensityMatrix::ground_state(lowered.num_qubits)?;
    match noise {
        None => {
            for gate in &lowered.gates {
                if matches!(gate.kind, GateKind::Measure(_)) {
                    continue;
                }
                rho.apply_unitary(&gate_unitary(gate.kind), &gate.qubits);
            }
        }
        Some(model) => {
            model.validate()?;
            let moments = schedule_moments(&lowered, model);
            for moment in &moments {
                let mut touched = vec![false; lowered.num_qubits];
                for &index in &moment.gate_indices {
                    let gate = &lowered.gates[index];
                    rho.apply_unitary(&gate_unitary(gate.kind), &gate.qubits);
                    if model.enabled.gate {
                        apply_gate_noise(&mut rho, gate, model)?;
                    }
                    for &q in &gate.qubits {
                        touched[q] = true;
                    }
                }
                if model.enabled.idle && moment.duration_ns > 0.0 {
                    let damping = amplitude_damping_channel(moment.duration_ns, model.t1_us)?;
                    let dephasing =
                        dephasing_channel(moment.duration_ns, model.t1_us, model.t2_us)?;
                    for (q, &was_touched) in touched.iter().enumerate() {
                        if !was_touched {
                            rho.apply_kraus(&damping.ops, &[q]);
                            rho.apply_kraus(&dephasing.ops, &[q]);
                        }
                    }
                }
            }
        }
    }
    Ok(rho)
}

/// Readout distribution over all qubits in register order.
pub fn measure_distribution(
    rho: &DensityMatrix,
    readout: Option<&ReadoutPovm>,
) -> OutputDistribution {
    let read_order: Vec<usize> = (0..rho.num_qubits).collect();
    readout_marginal(rho, &read_order, readout)
}

/// Readout distribution over a subset of qubits in the given output order,
/// marginalizing the rest. The POVM factorizes per qubit, so the confusion is
/// applied axis by axis after marginalization.
pub fn readout_marginal(
    rho: &DensityMatrix,
    read_qubits: &[usize],
    readout: Option<&ReadoutPovm>,
) -> OutputDistribution {
    let n = rho.num_qubits;
    let r = read_qubits.len();
    let diag = rho.diagonal();
    let mut probs = vec![0.0; 1 << r];
    for (index, &p) in diag.iter().enumerate() {
        let mut out = 0usize;
        for &q in read_qubits {
            out = (out << 1) | ((index >> (n - 1 - q)) & 1);
        }
        probs[out] += p;
    }
    if let Some(povm) = readout {
        for k in 0..r {
            let bit = 1usize << (r - 1 - k);
            for idx in 0..probs.len() {
                if idx & bit != 0 {
                    let p1 = probs[idx];
                    probs[idx] = povm.confusion(1, 1) * p1;
                    probs[idx & !bit] += povm.confusion(0, 1) * p1;
                }
            }
        }
    }
    OutputDistribution {
        num_bits: r,
        probs,
    }
}
