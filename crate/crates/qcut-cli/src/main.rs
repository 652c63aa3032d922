//! Command-line driver: GHZ sweeps, cutting, fragment simulation,
//! recombination and contraction-plan inspection over JSON files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use qcut::circuit::{build_ghz_circuit, to_dag, Circuit};
use qcut::cut::{
    balanced_ghz_cutspec, cut, distributions_from_json, distributions_to_json,
    generate_eigenstate_variants, generate_variants, CutBackend, CutSpec, Fragment,
    FragmentDistribution, FragmentVariant,
};
use qcut::experiment::{
    emit, run_sweep, to_csv, to_json, EmitFormat, ExecutionEnv, ExperimentConfig, RoutingChoice,
    ShotMode,
};
use qcut::noise::{apply_scenario, NoiseConfig, NoiseModel, Scenario};
use qcut::recombine::{
    build_network, general_contraction_plan, reconstruct_full, reconstruct_full_clipped,
    sequential_chain_plan,
};
use qcut::route::{johannesburg_graph, ConnectivityGraph};

#[derive(Parser)]
#[command(
    name = "qcut",
    version,
    about = "Cut quantum circuits into fragments, simulate them under hardware noise, \
             and recombine the pieces into the full output distribution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep GHZ ladders over qubit and fragment counts under a noise scenario.
    GhzSweep(GhzSweepArgs),
    /// Cut a circuit into fragments.
    Cut(CutArgs),
    /// Simulate a circuit, or every variant of a fragments file.
    Simulate(SimulateArgs),
    /// Recombine fragment distributions into the full distribution.
    Recombine(RecombineArgs),
    /// Show the contraction plan and cost ledger of a recombination.
    ExplainContraction(ExplainArgs),
}

#[derive(Args)]
struct GhzSweepArgs {
    /// Comma-separated even qubit counts.
    #[arg(long, value_delimiter = ',', default_value = "4,6,8,10")]
    qubits: Vec<usize>,
    /// Comma-separated fragment counts.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    fragments: Vec<usize>,
    /// baseline | faster-readout | better-gates | better-coherence
    #[arg(long, default_value = "baseline")]
    scenario: String,
    /// "exact" or a shot count.
    #[arg(long, default_value = "exact")]
    shots: String,
    /// johannesburg | none | coupling-map file
    #[arg(long, default_value = "johannesburg")]
    routing: String,
    /// johannesburg | none | noise-config file
    #[arg(long, default_value = "johannesburg")]
    noise: String,
    /// eigenstate | gadget
    #[arg(long, default_value = "eigenstate")]
    backend: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv | json
    #[arg(long, default_value = "csv")]
    format: String,
    /// JSON config file; its fields override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// On-disk sweep configuration; any present field overrides the flags.
#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SweepFileConfig {
    qubit_counts: Option<Vec<usize>>,
    fragment_counts: Option<Vec<usize>>,
    scenario: Option<Scenario>,
    shots: Option<ShotMode>,
    routing: Option<String>,
    noise: Option<String>,
    backend: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<String>,
}

#[derive(Args)]
struct CutArgs {
    /// Circuit JSON file.
    #[arg(long)]
    circuit: PathBuf,
    /// Cut-spec JSON file (list of wire edges).
    #[arg(long, conflicts_with = "fragments")]
    cuts: Option<PathBuf>,
    /// Number of balanced fragments for a GHZ-type ladder.
    #[arg(long)]
    fragments: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Circuit JSON file.
    #[arg(long, conflicts_with = "fragments")]
    circuit: Option<PathBuf>,
    /// Fragments JSON file (from `qcut cut`): simulates every variant.
    #[arg(long)]
    fragments: Option<PathBuf>,
    /// johannesburg | none | noise-config file
    #[arg(long, default_value = "johannesburg")]
    noise: String,
    /// baseline | faster-readout | better-gates | better-coherence
    #[arg(long, default_value = "baseline")]
    scenario: String,
    /// johannesburg | none | coupling-map file
    #[arg(long, default_value = "none")]
    routing: String,
    /// "exact" or a shot count.
    #[arg(long, default_value = "exact")]
    shots: String,
    /// eigenstate | gadget (fragment mode only)
    #[arg(long, default_value = "eigenstate")]
    backend: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RecombineArgs {
    /// Fragment distributions JSON file (from `qcut simulate --fragments`).
    #[arg(long)]
    distributions: PathBuf,
    /// Clip negative entries and renormalize.
    #[arg(long)]
    clip: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExplainArgs {
    /// Fragment distributions JSON file.
    #[arg(long, conflicts_with = "chain")]
    distributions: Option<PathBuf>,
    /// Plan a noiseless GHZ chain with this many fragments instead.
    #[arg(long)]
    chain: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    if let Err(error) = run() {
        eprintln!("error: {error:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::GhzSweep(args) => ghz_sweep(args),
        Command::Cut(args) => cut_command(args),
        Command::Simulate(args) => simulate_command(args),
        Command::Recombine(args) => recombine_command(args),
        Command::ExplainContraction(args) => explain_command(args),
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_output(out: Option<&PathBuf>, body: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{body}"),
    }
    Ok(())
}

fn parse_backend(name: &str) -> Result<CutBackend> {
    match name {
        "eigenstate" | "eigenstate-prep" => Ok(CutBackend::EigenstatePrep),
        "gadget" | "bell-gadget" => Ok(CutBackend::BellGadget),
        other => bail!("unknown backend '{other}' (use eigenstate or gadget)"),
    }
}

fn parse_routing(name: &str) -> Result<RoutingChoice> {
    match name {
        "johannesburg" => Ok(RoutingChoice::Johannesburg),
        "none" => Ok(RoutingChoice::None),
        path => {
            let graph = ConnectivityGraph::from_json(&read_file(Path::new(path))?)
                .with_context(|| format!("parsing coupling map {path}"))?;
            Ok(RoutingChoice::Custom(graph))
        }
    }
}

fn parse_noise(name: &str) -> Result<Option<NoiseModel>> {
    match name {
        "johannesburg" => Ok(Some(NoiseModel::johannesburg_default())),
        "none" => Ok(None),
        path => {
            let config: NoiseConfig = serde_json::from_str(&read_file(Path::new(path))?)
                .with_context(|| format!("parsing noise config {path}"))?;
            Ok(Some(config.into_model()?))
        }
    }
}

fn ghz_sweep(args: GhzSweepArgs) -> Result<()> {
    let mut qubits = args.qubits;
    let mut fragments = args.fragments;
    let mut scenario: Scenario = args.scenario.parse()?;
    let mut shots: ShotMode = args.shots.parse()?;
    let mut routing_name = args.routing;
    let mut noise_name = args.noise;
    let mut backend_name = args.backend;
    let mut seed = args.seed;
    let mut out = args.out;
    let mut format_name = args.format;

    if let Some(path) = &args.config {
        let config: SweepFileConfig = serde_json::from_str(&read_file(path)?)
            .with_context(|| format!("parsing sweep config {}", path.display()))?;
        if let Some(v) = config.qubit_counts {
            qubits = v;
        }
        if let Some(v) = config.fragment_counts {
            fragments = v;
        }
        if let Some(v) = config.scenario {
            scenario = v;
        }
        if let Some(v) = config.shots {
            shots = v;
        }
        if let Some(v) = config.routing {
            routing_name = v;
        }
        if let Some(v) = config.noise {
            noise_name = v;
        }
        if let Some(v) = config.backend {
            backend_name = v;
        }
        if let Some(v) = config.seed {
            seed = v;
        }
        if let Some(v) = config.out {
            out = Some(v);
        }
        if let Some(v) = config.format {
            format_name = v;
        }
    }

    let config = ExperimentConfig {
        qubit_counts: qubits,
        fragment_counts: fragments,
        scenario,
        shots,
        routing: parse_routing(&routing_name)?,
        base_noise: parse_noise(&noise_name)?,
        backend: parse_backend(&backend_name)?,
        seed,
    };
    let result = run_sweep(&config)?;
    let format: EmitFormat = format_name.parse()?;
    match &out {
        Some(path) => emit(&result, format, path)?,
        None => {
            let body = match format {
                EmitFormat::Csv => to_csv(&result),
                EmitFormat::Json => to_json(&result),
            };
            print!("{body}");
        }
    }
    Ok(())
}

fn cut_command(args: CutArgs) -> Result<()> {
    let circuit = Circuit::from_json(&read_file(&args.circuit)?)?;
    let spec = match (&args.cuts, args.fragments) {
        (Some(path), None) => CutSpec::from_json(&read_file(path)?)?,
        (None, Some(k)) => balanced_ghz_cutspec(circuit.num_qubits, k)
            .context("balanced cuts expect a GHZ-type ladder")?,
        (None, None) => bail!("provide --cuts FILE or --fragments K"),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    let dag = to_dag(&circuit)?;
    let fragments = cut(&dag, &spec)?;
    let body = serde_json::to_string_pretty(&fragments).expect("fragment serialization");
    write_output(args.out.as_ref(), &format!("{body}\n"))
}

fn simulate_command(args: SimulateArgs) -> Result<()> {
    let noise = parse_noise(&args.noise)?;
    let scenario: Scenario = args.scenario.parse()?;
    let noise = noise.map(|base| apply_scenario(&base, scenario));
    let routing = parse_routing(&args.routing)?;
    let graph = match &routing {
        RoutingChoice::None => None,
        RoutingChoice::Johannesburg => Some(johannesburg_graph()),
        RoutingChoice::Custom(graph) => Some(graph.clone()),
    };
    let env = ExecutionEnv {
        noise: noise.as_ref(),
        routing: graph.as_ref(),
        shots: args.shots.parse()?,
        seed: args.seed,
    };
    match (&args.circuit, &args.fragments) {
        (Some(path), None) => {
            let circuit = Circuit::from_json(&read_file(path)?)?;
            let (dist, _) = env.run(&circuit)?;
            write_output(args.out.as_ref(), &format!("{}\n", dist.to_json()))
        }
        (None, Some(path)) => {
            let fragments: Vec<Fragment> = serde_json::from_str(&read_file(path)?)
                .with_context(|| format!("parsing fragments {}", path.display()))?;
            let backend = parse_backend(&args.backend)?;
            let mut dists: Vec<FragmentDistribution> = Vec::with_capacity(fragments.len());
            for fragment in &fragments {
                let variants: Vec<FragmentVariant> = match backend {
                    CutBackend::BellGadget => generate_variants(fragment)?,
                    CutBackend::EigenstatePrep => generate_eigenstate_variants(fragment)?,
                };
                let (dist, _) = env.collect_fragment_distribution(fragment, &variants)?;
                dists.push(dist);
            }
            write_output(
                args.out.as_ref(),
                &format!("{}\n", distributions_to_json(&dists)),
            )
        }
        _ => bail!("provide exactly one of --circuit FILE or --fragments FILE"),
    }
}

fn recombine_command(args: RecombineArgs) -> Result<()> {
    let dists = distributions_from_json(&read_file(&args.distributions)?)?;
    let backend = dists
        .first()
        .map(|d| d.backend)
        .context("distributions file is empty")?;
    let network = build_network(&dists, backend)?;
    let dist = if args.clip {
        reconstruct_full_clipped(&network)?
    } else {
        reconstruct_full(&network)?
    };
    write_output(args.out.as_ref(), &format!("{}\n", dist.to_json()))
}

fn explain_command(args: ExplainArgs) -> Result<()> {
    let network = match (&args.distributions, args.chain) {
        (Some(path), None) => {
            let dists = distributions_from_json(&read_file(path)?)?;
            let backend = dists
                .first()
                .map(|d| d.backend)
                .context("distributions file is empty")?;
            build_network(&dists, backend)?
        }
        (None, Some(k)) => {
            if k < 2 {
                bail!("--chain needs at least 2 fragments");
            }
            let m = 2 * k;
            let circuit = build_ghz_circuit(m)?;
            let dag = to_dag(&circuit)?;
            let fragments = cut(&dag, &balanced_ghz_cutspec(m, k)?)?;
            let dists: Vec<FragmentDistribution> = fragments
                .iter()
                .map(|f| {
                    let variants = generate_variants(f)?;
                    qcut::cut::collect_distributions(f, &variants, |c| {
                        Ok(qcut::sim::measure_distribution(
                            &qcut::sim::simulate(c, None)?,
                            None,
                        ))
                    })
                })
                .collect::<qcut::Result<_>>()?;
            build_network(&dists, CutBackend::BellGadget)?
        }
        _ => bail!("provide exactly one of --distributions FILE or --chain K"),
    };
    let plan = if network.is_chain() {
        sequential_chain_plan(&network)?
    } else {
        general_contraction_plan(&network)?
    };
    write_output(args.out.as_ref(), &format!("{}\n", plan.to_json()))
}
