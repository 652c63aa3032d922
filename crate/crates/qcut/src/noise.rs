//! Hardware noise description: readout POVM, depolarizing gate noise, and
//! amplitude-damping / pure-dephasing idle channels, plus the improvement
//! scenarios used by the experiment sweeps.
//!
//! Times follow the device datasheet conventions: coherence times and readout
//! duration in microseconds, gate durations in nanoseconds.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::{GateClass, ONE_QUBIT_GATE_NS, SWAP_GATE_NS, TWO_QUBIT_GATE_NS};
use crate::error::{Error, Result};
use crate::pauli::{kraus_completeness_deviation, pauli_matrix};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Per-category switches, mostly useful for ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseFlags {
    pub readout: bool,
    pub gate: bool,
    pub idle: bool,
}

impl Default for NoiseFlags {
    fn default() -> Self {
        NoiseFlags {
            readout: true,
            gate: true,
            idle: true,
        }
    }
}

/// Noise-parameter improvement scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Baseline,
    FasterReadout,
    BetterGates,
    BetterCoherence,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::Baseline,
        Scenario::FasterReadout,
        Scenario::BetterGates,
        Scenario::BetterCoherence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Baseline => "baseline",
            Scenario::FasterReadout => "faster-readout",
            Scenario::BetterGates => "better-gates",
            Scenario::BetterCoherence => "better-coherence",
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Scenario::Baseline),
            "faster-readout" => Ok(Scenario::FasterReadout),
            "better-gates" => Ok(Scenario::BetterGates),
            "better-coherence" => Ok(Scenario::BetterCoherence),
            other => Err(Error::BadConfig(format!("unknown scenario '{other}'"))),
        }
    }
}

/// Device noise parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Readout duration in microseconds.
    pub readout_tau_us: f64,
    /// Calibrated readout error rate (probability of reading 1 as 0).
    pub readout_gamma: f64,
    /// Relaxation time in microseconds.
    pub t1_us: f64,
    /// Dephasing time in microseconds.
    pub t2_us: f64,
    /// Depolarizing probability attached to one-qubit gates.
    pub depol_1q: f64,
    /// Per-qubit depolarizing probability attached to two-qubit gates.
    pub depol_2q: f64,
    /// Gate durations in nanoseconds, keyed by gate class.
    pub gate_durations_ns: BTreeMap<GateClass, f64>,
    #[serde(default)]
    pub enabled: NoiseFlags,
}

/// Default duration table for the supported gate classes.
pub fn default_gate_durations() -> BTreeMap<GateClass, f64> {
    let mut map = BTreeMap::new();
    map.insert(GateClass::H, ONE_QUBIT_GATE_NS);
    map.insert(GateClass::X, ONE_QUBIT_GATE_NS);
    map.insert(GateClass::SDag, ONE_QUBIT_GATE_NS);
    map.insert(GateClass::Cnot, TWO_QUBIT_GATE_NS);
    map.insert(GateClass::Swap, SWAP_GATE_NS);
    map.insert(GateClass::Prep, 0.0);
    map.insert(GateClass::Measure, 0.0);
    map
}

/// One-qubit gate error rate reported for the reference device.
pub const REFERENCE_AVG_ERROR_1Q: f64 = 0.00041;
/// Two-qubit gate error rate reported for the reference device.
pub const REFERENCE_AVG_ERROR_2Q: f64 = 0.00202;
/// Readout error rate reported for the reference device.
pub const REFERENCE_READOUT_GAMMA: f64 = 0.041;
/// Relaxation time reported for the reference device, microseconds.
pub const REFERENCE_T1_US: f64 = 65.0;
/// Dephasing time reported for the reference device, microseconds.
pub const REFERENCE_T2_US: f64 = 70.0;

/// Depolarizing parameter reproducing a given average error rate.
pub fn depol_param_from_avg_error(avg_error: f64, arity: usize) -> f64 {
    match arity {
        1 => 2.0 * avg_error,
        2 => 4.0 / 3.0 * (1.0 - (4.0 - 5.0 * avg_error).sqrt() / 2.0),
        _ => panic!("unsupported arity {arity}"),
    }
}

/// Average error rate produced by a given depolarizing parameter.
pub fn avg_error_from_depol_param(q: f64, arity: usize) -> f64 {
    match arity {
        1 => q / 2.0,
        2 => {
            let fid_e = (1.0 - 0.75 * q) * (1.0 - 0.75 * q);
            1.0 - (4.0 * fid_e + 1.0) / 5.0
        }
        _ => panic!("unsupported arity {arity}"),
    }
}

impl NoiseModel {
    /// Noise model of the 20-qubit reference device: the readout duration is
    /// solved from gamma = 1 - exp(-tau/T1) and the depolarizing parameters
    /// are calibrated against the reported average gate error rates.
    pub fn johannesburg_default() -> NoiseModel {
        let gamma = REFERENCE_READOUT_GAMMA;
        let t1 = REFERENCE_T1_US;
        NoiseModel {
            readout_tau_us: -t1 * (1.0 - gamma).ln(),
            readout_gamma: gamma,
            t1_us: t1,
            t2_us: REFERENCE_T2_US,
            depol_1q: depol_param_from_avg_error(REFERENCE_AVG_ERROR_1Q, 1),
            depol_2q: depol_param_from_avg_error(REFERENCE_AVG_ERROR_2Q, 2),
            gate_durations_ns: default_gate_durations(),
            enabled: NoiseFlags::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t1_us <= 0.0 {
            return Err(Error::NonPositiveTime(self.t1_us));
        }
        if self.t2_us <= 0.0 {
            return Err(Error::NonPositiveTime(self.t2_us));
        }
        if self.readout_tau_us < 0.0 {
            return Err(Error::NonPositiveTime(self.readout_tau_us));
        }
        if self.t2_us > 2.0 * self.t1_us + 1e-12 {
            return Err(Error::UnphysicalT2 {
                t1: self.t1_us,
                t2: self.t2_us,
            });
        }
        for p in [self.readout_gamma, self.depol_1q, self.depol_2q] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::BadProbability(p));
            }
        }
        Ok(())
    }

    /// Pure-dephasing time from 1/T_phi = 1/T2 - 1/(2 T1).
    pub fn t_phi_us(&self) -> f64 {
        1.0 / (1.0 / self.t2_us - 1.0 / (2.0 * self.t1_us))
    }

    /// Readout POVM, when readout noise is enabled.
    pub fn readout_povm(&self) -> Option<ReadoutPovm> {
        self.enabled.readout.then_some(ReadoutPovm {
            gamma: self.readout_gamma,
        })
    }

    /// Duration of a gate class under this model.
    pub fn duration_ns(&self, class: GateClass) -> f64 {
        self.gate_durations_ns.get(&class).copied().unwrap_or(0.0)
    }
}

/// Scenario transforms over a noise model.
///
/// Faster readout divides the readout duration by 5 and re-derives the error
/// rate through gamma = 1 - exp(-tau/T1). Better gates divides both
/// depolarizing parameters by 5. Better coherence multiplies T1 and T2 by 5,
/// which weakens the idle channels; the readout calibration is a measured
/// device property and stays fixed.
pub fn apply_scenario(model: &NoiseModel, scenario: Scenario) -> NoiseModel {
    let mut out = model.clone();
    match scenario {
        Scenario::Baseline => {}
        Scenario::FasterReadout => {
            out.readout_tau_us = model.readout_tau_us / 5.0;
            out.readout_gamma = 1.0 - (-out.readout_tau_us / out.t1_us).exp();
        }
        Scenario::BetterGates => {
            out.depol_1q = model.depol_1q / 5.0;
            out.depol_2q = model.depol_2q / 5.0;
        }
        Scenario::BetterCoherence => {
            out.t1_us = model.t1_us * 5.0;
            out.t2_us = model.t2_us * 5.0;
        }
    }
    out
}

/// A completely positive trace-preserving map given by Kraus operators.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    pub ops: Vec<Array2<Complex64>>,
    pub arity: usize,
}

impl KrausChannel {
    pub fn validate(&self) -> Result<()> {
        let dev = kraus_completeness_deviation(&self.ops);
        if dev > crate::pauli::HERMITICITY_TOL {
            return Err(Error::KrausIncomplete(dev));
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.ops.len() == 1 && {
            let k = &self.ops[0];
            let dim = k.nrows();
            (0..dim).all(|i| {
                (0..dim).all(|j| {
                    let expect = if i == j { c(1., 0.) } else { c(0., 0.) };
                    (k[[i, j]] - expect).norm() < 1e-15
                })
            })
        }
    }
}

/// Depolarizing channel: K0 = sqrt(1 - 3p/4) I, K_i = sqrt(p/4) sigma_i,
/// with the two-qubit case formed as a tensor product of one-qubit sets.
pub fn depolarizing_channel(p: f64, arity: usize) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::BadProbability(p));
    }
    let single = single_qubit_depolarizing_ops(p);
    let ops = match arity {
        1 => single,
        2 => {
            let mut ops = Vec::with_capacity(single.len() * single.len());
            for a in &single {
                for b in &single {
                    ops.push(ndarray::linalg::kron(a, b));
                }
            }
            ops
        }
        _ => {
            return Err(Error::BadConfig(format!(
                "depolarizing channel supports arity 1 or 2, got {arity}"
            )))
        }
    };
    Ok(KrausChannel { ops, arity })
}

fn single_qubit_depolarizing_ops(p: f64) -> Vec<Array2<Complex64>> {
    if p == 0.0 {
        return vec![pauli_matrix(0)];
    }
    let mut ops = vec![pauli_matrix(0).mapv(|v| v * (1.0 - 0.75 * p).sqrt())];
    for i in 1..4 {
        ops.push(pauli_matrix(i).mapv(|v| v * (0.25 * p).sqrt()));
    }
    ops
}

/// Amplitude-damping channel for an idle window: p = 1 - exp(-t_idle / T1).
pub fn amplitude_damping_channel(idle_ns: f64, t1_us: f64) -> Result<KrausChannel> {
    if idle_ns < 0.0 {
        return Err(Error::NonPositiveTime(idle_ns));
    }
    if t1_us <= 0.0 {
        return Err(Error::NonPositiveTime(t1_us));
    }
    let p = 1.0 - (-idle_ns / (t1_us * 1000.0)).exp();
    Ok(amplitude_damping_from_probability(p))
}

/// Amplitude damping with an explicit decay probability.
pub fn amplitude_damping_from_probability(p: f64) -> KrausChannel {
    if p == 0.0 {
        return KrausChannel {
            ops: vec![pauli_matrix(0)],
            arity: 1,
        };
    }
    let mut k0 = Array2::from_elem((2, 2), c(0., 0.));
    k0[[0, 0]] = c(1., 0.);
    k0[[1, 1]] = c((1.0 - p).sqrt(), 0.);
    let mut k1 = Array2::from_elem((2, 2), c(0., 0.));
    k1[[0, 1]] = c(p.sqrt(), 0.);
    KrausChannel {
        ops: vec![k0, k1],
        arity: 1,
    }
}

/// Pure-dephasing channel for an idle window: p = 1 - exp(-2 t_idle / T_phi)
/// with 1/T_phi = 1/T2 - 1/(2 T1). Populations are untouched; the coherence
/// shrinks by sqrt(1 - p).
pub fn dephasing_channel(idle_ns: f64, t1_us: f64, t2_us: f64) -> Result<KrausChannel> {
    if idle_ns < 0.0 {
        return Err(Error::NonPositiveTime(idle_ns));
    }
    if t2_us > 2.0 * t1_us + 1e-12 {
        return Err(Error::UnphysicalT2 {
            t1: t1_us,
            t2: t2_us,
        });
    }
    let t_phi_us = 1.0 / (1.0 / t2_us - 1.0 / (2.0 * t1_us));
    let p = 1.0 - (-2.0 * idle_ns / (t_phi_us * 1000.0)).exp();
    if p == 0.0 {
        return Ok(KrausChannel {
            ops: vec![pauli_matrix(0)],
            arity: 1,
        });
    }
    let mut k0 = Array2::from_elem((2, 2), c(0., 0.));
    k0[[0, 0]] = c(1., 0.);
    k0[[1, 1]] = c((1.0 - p).sqrt(), 0.);
    let mut k1 = Array2::from_elem((2, 2), c(0., 0.));
    k1[[1, 1]] = c(p.sqrt(), 0.);
    Ok(KrausChannel {
        ops: vec![k0, k1],
        arity: 1,
    })
}

/// Two-outcome readout POVM {I - E, E} with E = diag(0, 1 - gamma):
/// amplitude damping of the readout duration followed by a perfect Z
/// measurement. Reading a 1 misreports 0 with probability gamma; a 0 is
/// never misreported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutPovm {
    pub gamma: f64,
}

impl ReadoutPovm {
    pub fn effect_one(&self) -> Array2<Complex64> {
        let mut e = Array2::from_elem((2, 2), c(0., 0.));
        e[[1, 1]] = c(1.0 - self.gamma, 0.);
        e
    }

    pub fn effect_zero(&self) -> Array2<Complex64> {
        let mut e = Array2::from_elem((2, 2), c(0., 0.));
        e[[0, 0]] = c(1., 0.);
        e[[1, 1]] = c(self.gamma, 0.);
        e
    }

    /// Probability of reporting `read` given the wire is in basis state `state`.
    pub fn confusion(&self, read: usize, state: usize) -> f64 {
        match (read, state) {
            (0, 0) => 1.0,
            (1, 0) => 0.0,
            (0, 1) => self.gamma,
            (1, 1) => 1.0 - self.gamma,
            _ => panic!("bits must be 0 or 1"),
        }
    }
}

/// On-disk noise configuration; omitted fields fall back to the reference
/// device values. An optional scenario is applied on load.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub readout_tau_us: Option<f64>,
    pub readout_gamma: Option<f64>,
    pub t1_us: Option<f64>,
    pub t2_us: Option<f64>,
    pub depol_1q: Option<f64>,
    pub depol_2q: Option<f64>,
    pub gate_durations_ns: Option<BTreeMap<GateClass, f64>>,
    pub scenario: Option<Scenario>,
    pub enabled: Option<NoiseFlags>,
}

impl NoiseConfig {
    pub fn into_model(self) -> Result<NoiseModel> {
        let mut model = NoiseModel::johannesburg_default();
        if let Some(t1) = self.t1_us {
            model.t1_us = t1;
        }
        if let Some(t2) = self.t2_us {
            model.t2_us = t2;
        }
        match (self.readout_tau_us, self.readout_gamma) {
            (Some(tau), Some(gamma)) => {
                model.readout_tau_us = tau;
                model.readout_gamma = gamma;
            }
            (Some(tau), None) => {
                model.readout_tau_us = tau;
                model.readout_gamma = 1.0 - (-tau / model.t1_us).exp();
            }
            (None, Some(gamma)) => {
                model.readout_gamma = gamma;
                model.readout_tau_us = -model.t1_us * (1.0 - gamma).ln();
            }
            (None, None) => {}
        }
        if let Some(q) = self.depol_1q {
            model.depol_1q = q;
        }
        if let Some(q) = self.depol_2q {
            model.depol_2q = q;
        }
        if let Some(durations) = self.gate_durations_ns {
            for (class, ns) in durations {
                model.gate_durations_ns.insert(class, ns);
            }
        }
        if let Some(flags) = self.enabled {
            model.enabled = flags;
        }
        let model = match self.scenario {
            Some(s) => apply_scenario(&model, s),
            None => model,
        };
        model.validate()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn johannesburg_values() {
        let model = NoiseModel::johannesburg_default();
        model.validate().unwrap();
        assert_eq!(model.readout_gamma, 0.041);
        assert_eq!(model.t1_us, 65.0);
        assert_eq!(model.t2_us, 70.0);
        // tau solves gamma = 1 - exp(-tau/T1)
        let gamma = 1.0 - (-model.readout_tau_us / model.t1_us).exp();
        assert!((gamma - 0.041).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_identity_at_zero() {
        let channel = depolarizing_channel(0.0, 1).unwrap();
        assert!(channel.is_identity());
        let channel2 = depolarizing_channel(0.0, 2).unwrap();
        assert_eq!(channel2.ops.len(), 1);
    }

    #[test]
    fn depolarizing_completeness() {
        for p in [0.001, 0.1, 0.5, 1.0] {
            depolarizing_channel(p, 1).unwrap().validate().unwrap();
            depolarizing_channel(p, 2).unwrap().validate().unwrap();
        }
        assert!(depolarizing_channel(1.5, 1).is_err());
    }

    #[test]
    fn depolarizing_two_qubit_has_sixteen_ops() {
        let channel = depolarizing_channel(0.01, 2).unwrap();
        assert_eq!(channel.ops.len(), 16);
        assert_eq!(channel.ops[0].nrows(), 4);
    }

    #[test]
    fn calibration_round_trips() {
        for (eps, arity) in [(REFERENCE_AVG_ERROR_1Q, 1), (REFERENCE_AVG_ERROR_2Q, 2)] {
            let q = depol_param_from_avg_error(eps, arity);
            assert!((avg_error_from_depol_param(q, arity) - eps).abs() < 1e-12);
        }
    }

    #[test]
    fn amplitude_damping_matches_formula() {
        let channel = amplitude_damping_channel(0.0, 65.0).unwrap();
        assert!(channel.is_identity());
        // idle = T1 gives p = 1 - 1/e
        let channel = amplitude_damping_channel(65_000.0, 65.0).unwrap();
        let p = 1.0 - channel.ops[0][[1, 1]].re * channel.ops[0][[1, 1]].re;
        assert!((p - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn dephasing_uses_t_phi() {
        let model = NoiseModel::johannesburg_default();
        let expected_inv = 1.0 / 70.0 - 1.0 / 130.0;
        assert!((1.0 / model.t_phi_us() - expected_inv).abs() < 1e-15);
        assert!(dephasing_channel(100.0, 65.0, 70.0).is_ok());
        assert!(matches!(
            dephasing_channel(100.0, 30.0, 70.0),
            Err(Error::UnphysicalT2 { .. })
        ));
    }

    #[test]
    fn dephasing_preserves_populations() {
        let channel = dephasing_channel(500.0, 65.0, 70.0).unwrap();
        let mut rho = Array2::from_elem((2, 2), c(0.5, 0.));
        rho[[0, 1]] = c(0.5, 0.);
        rho[[1, 0]] = c(0.5, 0.);
        let out = crate::pauli::apply_kraus_dense(&channel.ops, &rho);
        assert!((out[[0, 0]].re - 0.5).abs() < 1e-12);
        assert!((out[[1, 1]].re - 0.5).abs() < 1e-12);
        let t_phi: f64 = 1.0 / (1.0 / 70.0 - 1.0 / 130.0);
        let p: f64 = 1.0 - (-2.0 * 500.0 / (t_phi * 1000.0)).exp();
        assert!((out[[0, 1]].re - 0.5 * (1.0 - p).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn scenario_baseline_is_identity() {
        let model = NoiseModel::johannesburg_default();
        assert_eq!(apply_scenario(&model, Scenario::Baseline), model);
    }

    #[test]
    fn scenario_faster_readout_rederives_gamma() {
        let model = NoiseModel::johannesburg_default();
        let faster = apply_scenario(&model, Scenario::FasterReadout);
        assert!((faster.readout_tau_us - model.readout_tau_us / 5.0).abs() < 1e-12);
        let expected = 1.0 - (-(model.readout_tau_us / 5.0) / 65.0).exp();
        assert!((faster.readout_gamma - expected).abs() < 1e-15);
        // Scaling tau back by 5 recovers the baseline exactly.
        let mut recovered = faster.clone();
        recovered.readout_tau_us *= 5.0;
        recovered.readout_gamma = 1.0 - (-recovered.readout_tau_us / recovered.t1_us).exp();
        assert!((recovered.readout_gamma - model.readout_gamma).abs() < 1e-12);
    }

    #[test]
    fn scenario_better_gates_divides_depol() {
        let model = NoiseModel::johannesburg_default();
        let better = apply_scenario(&model, Scenario::BetterGates);
        assert!((better.depol_1q - model.depol_1q / 5.0).abs() < 1e-18);
        assert!((better.depol_2q - model.depol_2q / 5.0).abs() < 1e-18);
        assert_eq!(better.readout_gamma, model.readout_gamma);
    }

    #[test]
    fn scenario_better_coherence_scales_times() {
        let model = NoiseModel::johannesburg_default();
        let better = apply_scenario(&model, Scenario::BetterCoherence);
        assert_eq!(better.t1_us, 325.0);
        assert_eq!(better.t2_us, 350.0);
        assert_eq!(better.readout_tau_us, model.readout_tau_us);
        assert_eq!(better.readout_gamma, model.readout_gamma);
    }

    #[test]
    fn povm_effects_sum_to_identity_and_are_psd() {
        for gamma in [0.0, 0.041, 0.3, 0.9] {
            let povm = ReadoutPovm { gamma };
            let sum = povm.effect_zero() + povm.effect_one();
            assert!((sum[[0, 0]].re - 1.0).abs() < 1e-15);
            assert!((sum[[1, 1]].re - 1.0).abs() < 1e-15);
            assert!(povm.effect_zero()[[1, 1]].re >= 0.0);
            assert!(povm.effect_one()[[1, 1]].re >= 0.0);
        }
    }

    #[test]
    fn config_defaults_and_scenario() {
        let config: NoiseConfig = serde_json::from_str(r#"{"scenario": "better-gates"}"#).unwrap();
        let model = config.into_model().unwrap();
        let expected = apply_scenario(&NoiseModel::johannesburg_default(), Scenario::BetterGates);
        assert_eq!(model, expected);
    }
}
