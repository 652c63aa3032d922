//! Pauli-basis linear algebra.
//!
//! Hermitian operators on n qubits are expanded in the generalized Pauli basis,
//! quantum channels become real 4^n x 4^n transfer matrices, and the 3x2x2
//! connecting tensors used to stitch cut circuits back together live here
//! alongside the single-qubit Pauli eigenstates they contract against.

use ndarray::linalg::kron;
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for Hermiticity and Kraus-completeness checks.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Tolerance for exact algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-12;

/// Measurement / preparation axis on the Bloch sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const ALL: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    /// Position of this axis in the (I, X, Y, Z) basis ordering.
    pub fn basis_index(self) -> usize {
        match self {
            PauliAxis::X => 1,
            PauliAxis::Y => 2,
            PauliAxis::Z => 3,
        }
    }

    /// Index into `PauliAxis::ALL`.
    pub fn axis_index(self) -> usize {
        self.basis_index() - 1
    }
}

impl std::fmt::Display for PauliAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PauliAxis::X => write!(f, "X"),
            PauliAxis::Y => write!(f, "Y"),
            PauliAxis::Z => write!(f, "Z"),
        }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// The single-qubit Pauli matrix with basis index 0..=3 (I, X, Y, Z).
pub fn pauli_matrix(index: usize) -> Array2<Complex64> {
    match index {
        0 => Array2::from_shape_vec((2, 2), vec![c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]),
        1 => Array2::from_shape_vec((2, 2), vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        2 => Array2::from_shape_vec((2, 2), vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        3 => Array2::from_shape_vec((2, 2), vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
        _ => panic!("pauli index {index} out of range"),
    }
    .expect("2x2 shape")
}

/// Generalized Pauli string P_alpha on `num_qubits` qubits.
///
/// `alpha` is a base-4 integer; the digit for qubit 0 is the most significant,
/// matching the bitstring convention used throughout the crate.
pub fn pauli_string_matrix(num_qubits: usize, alpha: usize) -> Array2<Complex64> {
    assert!(alpha < 4usize.pow(num_qubits as u32));
    let mut out = Array2::from_shape_vec((1, 1), vec![c(1., 0.)]).unwrap();
    for k in 0..num_qubits {
        let digit = (alpha >> (2 * (num_qubits - 1 - k))) & 0b11;
        out = kron(&out, &pauli_matrix(digit));
    }
    out
}

fn trace(m: &Array2<Complex64>) -> Complex64 {
    m.diag().sum()
}

fn hermiticity_deviation(op: &Array2<Complex64>) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..op.nrows() {
        for j in 0..op.ncols() {
            dev = dev.max((op[[i, j]] - op[[j, i]].conj()).norm());
        }
    }
    dev
}

fn qubits_of_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: dim.next_power_of_two(),
        });
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Real coordinates of a Hermitian operator in the generalized Pauli basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliCoords {
    pub num_qubits: usize,
    pub coords: Vec<f64>,
}

impl PauliCoords {
    /// Rebuild the operator matrix as sum_alpha coords[alpha] * P_alpha.
    pub fn to_matrix(&self) -> Array2<Complex64> {
        let dim = 1usize << self.num_qubits;
        let mut out = Array2::from_elem((dim, dim), c(0., 0.));
        for (alpha, &w) in self.coords.iter().enumerate() {
            if w != 0.0 {
                out = out + pauli_string_matrix(self.num_qubits, alpha).mapv(|v| v * w);
            }
        }
        out
    }
}

/// Decompose a Hermitian operator: coords[alpha] = Tr[P_alpha op] / 2^n.
pub fn pauli_decompose(op: &Array2<Complex64>) -> Result<PauliCoords> {
    let dim = op.nrows();
    if dim != op.ncols() {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: op.ncols(),
        });
    }
    let num_qubits = qubits_of_dim(dim)?;
    let dev = hermiticity_deviation(op);
    if dev > HERMITICITY_TOL {
        return Err(Error::NonHermitian(dev));
    }
    let d = dim as f64;
    let coords = (0..4usize.pow(num_qubits as u32))
        .map(|alpha| {
            let p = pauli_string_matrix(num_qubits, alpha);
            (trace(&p.dot(op)) / d).re
        })
        .collect();
    Ok(PauliCoords { num_qubits, coords })
}

/// Pauli transfer matrix of a quantum channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Ptm {
    pub num_qubits: usize,
    pub matrix: Array2<f64>,
}

impl Ptm {
    /// Apply the channel in the Pauli picture: coords' = R * coords.
    pub fn apply(&self, input: &PauliCoords) -> Result<PauliCoords> {
        if input.num_qubits != self.num_qubits {
            return Err(Error::DimensionMismatch {
                left: input.num_qubits,
                right: self.num_qubits,
            });
        }
        let n = self.matrix.nrows();
        let mut coords = vec![0.0; n];
        for (row, out) in coords.iter_mut().enumerate() {
            let mut acc = 0.0;
            for col in 0..n {
                acc += self.matrix[[row, col]] * input.coords[col];
            }
            *out = acc;
        }
        Ok(PauliCoords {
            num_qubits: self.num_qubits,
            coords,
        })
    }
}

/// Maximum deviation of sum K_i^dagger K_i from the identity.
pub fn kraus_completeness_deviation(kraus: &[Array2<Complex64>]) -> f64 {
    let dim = kraus[0].nrows();
    let mut acc = Array2::from_elem((dim, dim), c(0., 0.));
    for k in kraus {
        let kdag = k.t().mapv(|v| v.conj());
        acc = acc + kdag.dot(k);
    }
    let mut dev: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let expect = if i == j { c(1., 0.) } else { c(0., 0.) };
            dev = dev.max((acc[[i, j]] - expect).norm());
        }
    }
    dev
}

/// Apply a channel given by Kraus operators to a density matrix.
pub fn apply_kraus_dense(kraus: &[Array2<Complex64>], rho: &Array2<Complex64>) -> Array2<Complex64> {
    let dim = rho.nrows();
    let mut out = Array2::from_elem((dim, dim), c(0., 0.));
    for k in kraus {
        let kdag = k.t().mapv(|v| v.conj());
        out = out + k.dot(rho).dot(&kdag);
    }
    out
}

/// PTM of the channel with the given Kraus operators:
/// R[alpha, beta] = Tr[P_alpha * O(P_beta)] / 2^n.
pub fn ptm_of_channel(kraus: &[Array2<Complex64>]) -> Result<Ptm> {
    if kraus.is_empty() {
        return Err(Error::KrausIncomplete(1.0));
    }
    let dim = kraus[0].nrows();
    let num_qubits = qubits_of_dim(dim)?;
    let dev = kraus_completeness_deviation(kraus);
    if dev > HERMITICITY_TOL {
        return Err(Error::KrausIncomplete(dev));
    }
    let size = 4usize.pow(num_qubits as u32);
    let d = dim as f64;
    let mut matrix = Array2::zeros((size, size));
    for beta in 0..size {
        let image = apply_kraus_dense(kraus, &pauli_string_matrix(num_qubits, beta));
        for alpha in 0..size {
            let p = pauli_string_matrix(num_qubits, alpha);
            matrix[[alpha, beta]] = (trace(&p.dot(&image)) / d).re;
        }
    }
    Ok(Ptm { num_qubits, matrix })
}

/// Pauli-picture scalar product <<A|B>> = sum_alpha A_alpha B_alpha.
///
/// Satisfies Tr[A^dagger B] = 2^n <<A|B>> for Hermitian A and B.
pub fn scalar_product(a: &PauliCoords, b: &PauliCoords) -> Result<f64> {
    if a.num_qubits != b.num_qubits {
        return Err(Error::DimensionMismatch {
            left: a.num_qubits,
            right: b.num_qubits,
        });
    }
    Ok(a.coords.iter().zip(&b.coords).map(|(x, y)| x * y).sum())
}

/// Which connecting-tensor convention a recombination uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GammaVariant {
    /// Eigenstate-preparation convention (written gamma-tilde).
    Tilde,
    /// Bell-gadget convention.
    Bell,
}

/// 3x2x2 connecting tensor joining two fragment legs at a cut.
///
/// Indexed as `values[axis][b][b_prime]`; entries are in {-1, 0, 1, 2}.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTensor {
    pub variant: GammaVariant,
    pub values: [[[f64; 2]; 2]; 3],
}

impl GammaTensor {
    /// Eigenstate convention: X and Y entries 2d(b,b')-1, Z entries 2d(b,b').
    #[allow(clippy::needless_range_loop)]
    pub fn tilde() -> Self {
        let mut values = [[[0.0; 2]; 2]; 3];
        for b in 0..2 {
            for bp in 0..2 {
                let delta = if b == bp { 1.0 } else { 0.0 };
                values[0][b][bp] = 2.0 * delta - 1.0;
                values[1][b][bp] = 2.0 * delta - 1.0;
                values[2][b][bp] = 2.0 * delta;
            }
        }
        GammaTensor {
            variant: GammaVariant::Tilde,
            values,
        }
    }

    /// Bell-gadget convention: the Y block changes sign relative to `tilde`.
    pub fn bell() -> Self {
        let mut tensor = GammaTensor::tilde();
        tensor.variant = GammaVariant::Bell;
        for b in 0..2 {
            for bp in 0..2 {
                tensor.values[1][b][bp] = -tensor.values[1][b][bp];
            }
        }
        tensor
    }

    pub fn get(&self, axis: PauliAxis, b: usize, b_prime: usize) -> f64 {
        self.values[axis.axis_index()][b][b_prime]
    }
}

/// A single-qubit Pauli eigenstate; eigenindex 0 is the +1 eigenvector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliEigenstate {
    pub axis: PauliAxis,
    pub eigenindex: u8,
}

impl PauliEigenstate {
    pub fn new(axis: PauliAxis, eigenindex: u8) -> Self {
        assert!(eigenindex < 2);
        PauliEigenstate { axis, eigenindex }
    }

    /// State vector of the eigenstate.
    pub fn ket(&self) -> [Complex64; 2] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match (self.axis, self.eigenindex) {
            (PauliAxis::X, 0) => [c(s, 0.), c(s, 0.)],
            (PauliAxis::X, 1) => [c(s, 0.), c(-s, 0.)],
            (PauliAxis::Y, 0) => [c(s, 0.), c(0., s)],
            (PauliAxis::Y, 1) => [c(s, 0.), c(0., -s)],
            (PauliAxis::Z, 0) => [c(1., 0.), c(0., 0.)],
            (PauliAxis::Z, 1) => [c(0., 0.), c(1., 0.)],
            _ => unreachable!(),
        }
    }

    /// Density matrix |psi><psi| = (I + (1-2b) sigma_axis) / 2.
    pub fn density_matrix(&self) -> Array2<Complex64> {
        let ket = self.ket();
        let mut rho = Array2::from_elem((2, 2), c(0., 0.));
        for i in 0..2 {
            for j in 0..2 {
                rho[[i, j]] = ket[i] * ket[j].conj();
            }
        }
        rho
    }

    /// Pauli coordinates of the eigenstate density matrix.
    pub fn pauli_coords(&self) -> PauliCoords {
        let mut coords = vec![0.0; 4];
        coords[0] = 0.5;
        coords[self.axis.basis_index()] = 0.5 * (1.0 - 2.0 * f64::from(self.eigenindex));
        PauliCoords {
            num_qubits: 1,
            coords,
        }
    }
}

/// Entrywise residual of rebuilding the one-qubit identity transfer matrix
/// from eigenstate projectors weighted by the given connecting tensor.
pub fn identity_decomposition_residual(gamma: &GammaTensor) -> f64 {
    let mut sum = Array2::<f64>::zeros((4, 4));
    for axis in PauliAxis::ALL {
        for b in 0..2 {
            let left = PauliEigenstate::new(axis, b as u8).pauli_coords();
            for bp in 0..2 {
                let right = PauliEigenstate::new(axis, bp as u8).pauli_coords();
                let w = gamma.get(axis, b, bp);
                for i in 0..4 {
                    for j in 0..4 {
                        sum[[i, j]] += w * left.coords[i] * right.coords[j];
                    }
                }
            }
        }
    }
    let mut dev: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let expect = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((sum[[i, j]] - expect).abs());
        }
    }
    dev
}

/// Check the eigenstate decomposition of the one-qubit identity superoperator.
pub fn identity_decomposition_check() -> bool {
    identity_decomposition_residual(&GammaTensor::tilde()) < IDENTITY_TOL
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_decomposes_to_unit_vector() {
        let id = pauli_matrix(0);
        let coords = pauli_decompose(&id).unwrap();
        assert_eq!(coords.coords, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn ground_state_projector_coords() {
        let mut op = Array2::from_elem((2, 2), c(0., 0.));
        op[[0, 0]] = c(1., 0.);
        let coords = pauli_decompose(&op).unwrap();
        assert_eq!(coords.coords, vec![0.5, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut op = Array2::from_elem((2, 2), c(0., 0.));
        op[[0, 1]] = c(1., 0.);
        assert!(matches!(pauli_decompose(&op), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn identity_channel_ptm_is_identity() {
        let ptm = ptm_of_channel(&[pauli_matrix(0)]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((ptm.matrix[[i, j]] - expect).abs() < IDENTITY_TOL);
            }
        }
    }

    #[test]
    fn incomplete_kraus_rejected() {
        let half = pauli_matrix(0).mapv(|v| v * 0.5);
        assert!(matches!(
            ptm_of_channel(&[half]),
            Err(Error::KrausIncomplete(_))
        ));
    }

    #[test]
    fn full_amplitude_damping_ptm_maps_onto_ground_state() {
        // p = 1 relaxation: K0 = |0><0|, K1 = |0><1|.
        let mut k0 = Array2::from_elem((2, 2), c(0., 0.));
        k0[[0, 0]] = c(1., 0.);
        let mut k1 = Array2::from_elem((2, 2), c(0., 0.));
        k1[[0, 1]] = c(1., 0.);
        let ptm = ptm_of_channel(&[k0, k1]).unwrap();
        for state in [
            PauliEigenstate::new(PauliAxis::Z, 0),
            PauliEigenstate::new(PauliAxis::Z, 1),
            PauliEigenstate::new(PauliAxis::X, 0),
            PauliEigenstate::new(PauliAxis::Y, 1),
        ] {
            let image = ptm.apply(&state.pauli_coords()).unwrap();
            let ground = PauliEigenstate::new(PauliAxis::Z, 0).pauli_coords();
            for (got, want) in image.coords.iter().zip(&ground.coords) {
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scalar_product_of_pure_state_is_half() {
        let rho = PauliEigenstate::new(PauliAxis::Z, 0).pauli_coords();
        assert!((scalar_product(&rho, &rho).unwrap() - 0.5).abs() < IDENTITY_TOL);
    }

    #[test]
    fn orthogonal_paulis_have_zero_product() {
        let x = pauli_decompose(&pauli_matrix(1)).unwrap();
        let z = pauli_decompose(&pauli_matrix(3)).unwrap();
        assert_eq!(scalar_product(&x, &z).unwrap(), 0.0);
    }

    #[test]
    fn scalar_product_dimension_mismatch() {
        let a = pauli_decompose(&pauli_matrix(0)).unwrap();
        let b = pauli_decompose(&pauli_string_matrix(2, 0)).unwrap();
        assert!(scalar_product(&a, &b).is_err());
    }

    #[test]
    fn identity_decomposition_holds() {
        assert!(identity_decomposition_check());
        assert!(identity_decomposition_residual(&GammaTensor::tilde()) < IDENTITY_TOL);
    }

    #[test]
    fn perturbed_gamma_breaks_identity() {
        let mut gamma = GammaTensor::tilde();
        gamma.values[PauliAxis::Z.axis_index()][0][0] += 0.1;
        assert!(identity_decomposition_residual(&gamma) > IDENTITY_TOL);
    }

    #[test]
    fn bell_variant_breaks_identity() {
        assert!(identity_decomposition_residual(&GammaTensor::bell()) > IDENTITY_TOL);
    }

    #[test]
    fn bell_is_tilde_with_y_relabeled() {
        let bell = GammaTensor::bell();
        let tilde = GammaTensor::tilde();
        for b in 0..2 {
            for bp in 0..2 {
                assert_eq!(
                    bell.get(PauliAxis::Y, b, bp),
                    tilde.get(PauliAxis::Y, b, 1 - bp)
                );
                assert_eq!(bell.get(PauliAxis::X, b, bp), tilde.get(PauliAxis::X, b, bp));
                assert_eq!(bell.get(PauliAxis::Z, b, bp), tilde.get(PauliAxis::Z, b, bp));
            }
        }
    }

    #[test]
    fn gamma_entries_are_small_integers() {
        for gamma in [GammaTensor::tilde(), GammaTensor::bell()] {
            for axis in PauliAxis::ALL {
                for b in 0..2 {
                    for bp in 0..2 {
                        let v = gamma.get(axis, b, bp);
                        assert!([-1.0, 0.0, 1.0, 2.0].contains(&v), "unexpected entry {v}");
                    }
                }
            }
        }
    }

    #[test]
    fn eigenstates_are_pure_and_satisfy_eigen_relation() {
        for axis in PauliAxis::ALL {
            for b in 0..2u8 {
                let state = PauliEigenstate::new(axis, b);
                let rho = state.density_matrix();
                let purity = trace(&rho.dot(&rho)).re;
                assert!((purity - 1.0).abs() < IDENTITY_TOL);
                // sigma |psi> = (1 - 2b) |psi>
                let sigma = pauli_matrix(axis.basis_index());
                let ket = state.ket();
                let eig = 1.0 - 2.0 * f64::from(b);
                for i in 0..2 {
                    let got = sigma[[i, 0]] * ket[0] + sigma[[i, 1]] * ket[1];
                    assert!((got - ket[i] * eig).norm() < IDENTITY_TOL);
                }
            }
        }
    }
}
