//! GHZ benchmark sweeps: build, cut, route, simulate, recombine, and score.
//!
//! A sweep point is one (qubit count, fragment count) pair under a noise
//! scenario. The fragment path reconstructs the output distribution through
//! the cutter and recombiner; the degenerate single-fragment point runs the
//! same machinery with zero cuts and must match direct simulation. Success
//! probability is the summed weight of the two GHZ target bitstrings.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{build_ghz_circuit, to_dag, Circuit};
use crate::cut::{
    balanced_ghz_cutspec, collect_distributions, cut, generate_eigenstate_variants,
    generate_variants, CutBackend, Fragment, FragmentDistribution, FragmentVariant,
};
use crate::error::{Error, Result};
use crate::noise::{apply_scenario, NoiseModel, Scenario};
use crate::recombine::{build_network, reconstruct_full};
use crate::route::{route, ConnectivityGraph};
use crate::sim::{
    lower_preparations, measure_with_axis, readout_marginal, sample_counts, simulate,
    OutputDistribution,
};

/// Exact analytic distributions or finite-shot sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShotMode {
    Exact,
    Sampled(u64),
}

impl Serialize for ShotMode {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ShotMode::Exact => serializer.serialize_str("exact"),
            ShotMode::Sampled(n) => serializer.serialize_u64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for ShotMode {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let value = serde_json::Value::deserialize(deserializer)?;
        match &value {
            serde_json::Value::String(s) if s == "exact" => Ok(ShotMode::Exact),
            serde_json::Value::Number(n) => n
                .as_u64()
                .filter(|&n| n > 0)
                .map(ShotMode::Sampled)
                .ok_or_else(|| serde::de::Error::custom("shots must be a positive integer")),
            _ => Err(serde::de::Error::custom(
                "shots must be \"exact\" or a count",
            )),
        }
    }
}

impl std::str::FromStr for ShotMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "exact" {
            return Ok(ShotMode::Exact);
        }
        let n: u64 = s.parse().map_err(|_| {
            Error::BadConfig(format!("shots must be 'exact' or a count, got '{s}'"))
        })?;
        if n == 0 {
            return Err(Error::ZeroShots);
        }
        Ok(ShotMode::Sampled(n))
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Everything needed to run one circuit end to end.
#[derive(Clone, Copy)]
pub struct ExecutionEnv<'a> {
    pub noise: Option<&'a NoiseModel>,
    pub routing: Option<&'a ConnectivityGraph>,
    pub shots: ShotMode,
    pub seed: u64,
}

impl ExecutionEnv<'_> {
    /// Lower pseudo-gates, route if configured, simulate, and read out the
    /// logical qubits in order. Returns the distribution and SWAP count.
    pub fn run(&self, circuit: &Circuit) -> Result<(OutputDistribution, usize)> {
        let lowered = measure_with_axis(&lower_preparations(circuit)?)?;
        let (sim_circuit, read_order, swaps) = match self.routing {
            None => (
                lowered.clone(),
                (0..lowered.num_qubits).collect::<Vec<_>>(),
                0,
            ),
            Some(graph) => {
                let routed = route(&lowered, graph, self.seed)?;
                let (compacted, read_order) = routed.compact();
                (compacted, read_order, routed.swap_count)
            }
        };
        let rho = simulate(&sim_circuit, self.noise)?;
        let povm = self.noise.and_then(|n| n.readout_povm());
        let mut dist = readout_marginal(&rho, &read_order, povm.as_ref());
        if let ShotMode::Sampled(shots) = self.shots {
            let seed = self.seed ^ fnv1a(circuit.to_json().as_bytes());
            dist = sample_counts(&dist, shots, seed)?.to_distribution();
        }
        Ok((dist, swaps))
    }

    /// Collect a fragment's distribution tensor, accumulating SWAP counts
    /// over all variant circuits.
    pub fn collect_fragment_distribution(
        &self,
        fragment: &Fragment,
        variants: &[FragmentVariant],
    ) -> Result<(FragmentDistribution, usize)> {
        let swap_total = AtomicUsize::new(0);
        let dist = collect_distributions(fragment, variants, |circuit| {
            let (dist, swaps) = self.run(circuit)?;
            swap_total.fetch_add(swaps, Ordering::Relaxed);
            Ok(dist)
        })?;
        Ok((dist, swap_total.into_inner()))
    }
}

/// Which coupling constraint the sweep compiles against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoutingChoice {
    None,
    Johannesburg,
    Custom(ConnectivityGraph),
}

impl RoutingChoice {
    fn graph(&self) -> Option<ConnectivityGraph> {
        match self {
            RoutingChoice::None => None,
            RoutingChoice::Johannesburg => Some(crate::route::johannesburg_graph()),
            RoutingChoice::Custom(graph) => Some(graph.clone()),
        }
    }
}

/// Sweep configuration over qubit counts and fragment counts.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub qubit_counts: Vec<usize>,
    pub fragment_counts: Vec<usize>,
    pub scenario: Scenario,
    pub shots: ShotMode,
    pub routing: RoutingChoice,
    /// Base noise model; `None` runs noiselessly (the scenario is ignored).
    pub base_noise: Option<NoiseModel>,
    pub backend: CutBackend,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            qubit_counts: vec![4, 6, 8, 10],
            fragment_counts: vec![1, 2, 3, 4],
            scenario: Scenario::Baseline,
            shots: ShotMode::Exact,
            routing: RoutingChoice::Johannesburg,
            base_noise: Some(NoiseModel::johannesburg_default()),
            backend: CutBackend::EigenstatePrep,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.qubit_counts.is_empty() || self.fragment_counts.is_empty() {
            return Err(Error::BadConfig("empty sweep grid".into()));
        }
        for &m in &self.qubit_counts {
            if m < 2 || m % 2 != 0 {
                return Err(Error::BadConfig(format!(
                    "qubit counts must be even and at least 2, got {m}"
                )));
            }
        }
        let min_m = *self.qubit_counts.iter().min().expect("non-empty");
        for &k in &self.fragment_counts {
            if k == 0 || k > min_m {
                return Err(Error::BadConfig(format!(
                    "fragment count {k} exceeds the smallest qubit count {min_m}"
                )));
            }
        }
        if let Some(noise) = &self.base_noise {
            noise.validate()?;
        }
        Ok(())
    }

    fn scenario_noise(&self) -> Option<NoiseModel> {
        self.base_noise
            .as_ref()
            .map(|base| apply_scenario(base, self.scenario))
    }
}

/// One sweep point's results.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub n_fragments: usize,
    pub scenario: Scenario,
    pub p_success: f64,
    pub swap_count: usize,
    pub n_variant_circuits: usize,
    pub seed: u64,
    /// Sum of the raw reconstructed distribution; 1 up to numerical error
    /// for exact-mode fragment distributions.
    #[serde(skip)]
    pub distribution_sum: f64,
    #[serde(skip)]
    pub wall_time_ms: f64,
}

/// Rows of a sweep, sorted by (m, n_fragments).
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn row(&self, m: usize, n_fragments: usize) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.m == m && r.n_fragments == n_fragments)
    }
}

/// Summed probability of the two GHZ targets 0^{m/2} 1^{m/2} and
/// 1^{m/2} 0^{m/2}; unity for the noiseless circuit.
pub fn success_probability(dist: &OutputDistribution, m: usize) -> Result<f64> {
    if !m.is_multiple_of(2) {
        return Err(Error::BadGhzSize(m));
    }
    if dist.num_bits != m {
        return Err(Error::BadBitstringLength {
            got: dist.num_bits,
            expected: m,
        });
    }
    let half = m / 2;
    let low_ones = (1usize << half) - 1;
    let high_ones = low_ones << half;
    Ok(dist.probs[low_ones] + dist.probs[high_ones])
}

/// Run one sweep point: build the ladder, cut it into `n_fragments`, execute
/// every variant, recombine, and score.
pub fn run_point(config: &ExperimentConfig, m: usize, n_fragments: usize) -> Result<SweepRow> {
    let start = std::time::Instant::now();
    let circuit = build_ghz_circuit(m)?;
    let graph = config.routing.graph();
    let noise = config.scenario_noise();
    let env = ExecutionEnv {
        noise: noise.as_ref(),
        routing: graph.as_ref(),
        shots: config.shots,
        seed: config.seed,
    };

    let fragments = if n_fragments == 1 {
        vec![Fragment::whole(&circuit)]
    } else {
        let dag = to_dag(&circuit)?;
        let spec = balanced_ghz_cutspec(m, n_fragments)?;
        cut(&dag, &spec)?
    };

    let mut dists = Vec::with_capacity(fragments.len());
    let mut swap_count = 0usize;
    let mut n_variant_circuits = 0usize;
    for fragment in &fragments {
        let variants = match config.backend {
            CutBackend::BellGadget => generate_variants(fragment)?,
            CutBackend::EigenstatePrep => generate_eigenstate_variants(fragment)?,
        };
        n_variant_circuits += variants.len();
        let (dist, swaps) = env.collect_fragment_distribution(fragment, &variants)?;
        swap_count += swaps;
        dists.push(dist);
    }
    let network = build_network(&dists, config.backend)?;
    let reconstructed = reconstruct_full(&network)?;
    let p_success = success_probability(&reconstructed, m)?;

    Ok(SweepRow {
        m,
        n_fragments,
        scenario: config.scenario,
        p_success,
        swap_count,
        n_variant_circuits,
        seed: config.seed,
        distribution_sum: reconstructed.probs.iter().sum(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Run the full grid as independent parallel jobs; rows come out sorted by
/// (m, n_fragments) and the result is deterministic for a fixed seed.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let points: Vec<(usize, usize)> = config
        .qubit_counts
        .iter()
        .flat_map(|&m| config.fragment_counts.iter().map(move |&n| (m, n)))
        .collect();
    let mut rows: Vec<SweepRow> = points
        .par_iter()
        .map(|&(m, n_fragments)| run_point(config, m, n_fragments))
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| (r.m, r.n_fragments));
    Ok(SweepResult { rows })
}

/// Mean success-probability gain of a scenario over baseline at a fragment
/// count, averaged across qubit counts.
pub fn delta_p(scenario: &SweepResult, baseline: &SweepResult, n_fragments: usize) -> Result<f64> {
    let s_rows: Vec<&SweepRow> = scenario
        .rows
        .iter()
        .filter(|r| r.n_fragments == n_fragments)
        .collect();
    let b_rows: Vec<&SweepRow> = baseline
        .rows
        .iter()
        .filter(|r| r.n_fragments == n_fragments)
        .collect();
    if s_rows.is_empty() || s_rows.len() != b_rows.len() {
        return Err(Error::GridMismatch(format!(
            "{} scenario rows vs {} baseline rows at n_fragments = {n_fragments}",
            s_rows.len(),
            b_rows.len()
        )));
    }
    let mut acc = 0.0;
    for (s, b) in s_rows.iter().zip(&b_rows) {
        if s.m != b.m {
            return Err(Error::GridMismatch(format!(
                "qubit grids differ: {} vs {}",
                s.m, b.m
            )));
        }
        acc += s.p_success - b.p_success;
    }
    Ok(acc / s_rows.len() as f64)
}

/// Output format for sweep files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

impl std::str::FromStr for EmitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(EmitFormat::Csv),
            "json" => Ok(EmitFormat::Json),
            other => Err(Error::BadConfig(format!("unknown format '{other}'"))),
        }
    }
}

/// Render sweep rows as CSV; identical inputs yield identical bytes.
pub fn to_csv(result: &SweepResult) -> String {
    let mut out =
        String::from("m,n_fragments,scenario,p_success,swap_count,n_variant_circuits,seed\n");
    for row in &result.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.m,
            row.n_fragments,
            row.scenario.name(),
            row.p_success,
            row.swap_count,
            row.n_variant_circuits,
            row.seed
        ));
    }
    out
}

/// Render sweep rows as JSON; identical inputs yield identical bytes.
pub fn to_json(result: &SweepResult) -> String {
    serde_json::to_string_pretty(&result.rows).expect("sweep serialization")
}

/// Write the sweep to a file in the chosen format.
pub fn emit(result: &SweepResult, format: EmitFormat, path: &Path) -> Result<()> {
    let body = match format {
        EmitFormat::Csv => to_csv(result),
        EmitFormat::Json => to_json(result),
    };
    std::fs::write(path, body).map_err(|source| Error::Io {
        context: format!("writing sweep to {}", path.display()),
        source,
    })
}
