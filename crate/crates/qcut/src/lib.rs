//! Quantum circuit cutting with noisy density-matrix simulation.
//!
//! `qcut` cuts a circuit's wire DAG into fragments, simulates every fragment
//! variant on a dense density-matrix engine under a configurable hardware
//! noise model, and contracts the fragment output distributions with 3x2x2
//! connecting tensors to reconstruct the full circuit's output distribution.
//! A router compiles circuits onto restricted coupling graphs, and the
//! experiment module sweeps GHZ-ladder benchmarks over qubit counts, fragment
//! counts and noise-improvement scenarios.
//!
//! The pipeline in one breath:
//!
//! ```
//! use qcut::circuit::{build_ghz_circuit, to_dag};
//! use qcut::cut::{balanced_ghz_cutspec, cut, generate_variants, collect_distributions, CutBackend};
//! use qcut::recombine::{build_network, reconstruct_full};
//! use qcut::sim::{simulate, measure_distribution};
//!
//! let circuit = build_ghz_circuit(4).unwrap();
//! let dag = to_dag(&circuit).unwrap();
//! let spec = balanced_ghz_cutspec(4, 2).unwrap();
//! let fragments = cut(&dag, &spec).unwrap();
//! let dists: Vec<_> = fragments
//!     .iter()
//!     .map(|f| {
//!         let variants = generate_variants(f).unwrap();
//!         collect_distributions(f, &variants, |c| {
//!             Ok(measure_distribution(&simulate(c, None)?, None))
//!         })
//!         .unwrap()
//!     })
//!     .collect();
//! let network = build_network(&dists, CutBackend::BellGadget).unwrap();
//! let reconstructed = reconstruct_full(&network).unwrap();
//! assert!((reconstructed.prob_of_bits(&[0, 0, 1, 1]).unwrap() - 0.5).abs() < 1e-10);
//! ```

pub mod circuit;
pub mod cut;
pub mod error;
pub mod experiment;
pub mod noise;
pub mod pauli;
pub mod recombine;
pub mod route;
pub mod sim;

pub use error::{Error, Result};
