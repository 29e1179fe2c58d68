use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use warpclust::indices::{silhouette, dunn, Inter, Intra};
use warpclust::pipeline::{align_pair, prepare, run_prepared, RunConfig};
use warpclust::simulation::{generate, Scenario, ScenarioKind};
use warpclust::{adjusted_rand, io, ClusterIndex, CurveSet, Error, Partition, Result};

#[derive(Parser)]
#[command(name = "warpclust", version, about = "Clustering of misaligned curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster the curves of a CSV file.
    Cluster(ClusterArgs),
    /// Generate a simulated scenario.
    Simulate(SimulateArgs),
    /// Adjusted Rand index of a predicted partition against true labels.
    Evaluate(EvaluateArgs),
    /// Similarity and aligning warp of one pair of curves.
    Align(AlignArgs),
    /// Silhouette and all Dunn variants of a given partition.
    Indexes(IndexesArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum IndexKind {
    Silhouette,
    Dunn,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    lambda0: f64,
    /// Size of the working grid on [0, 1].
    #[arg(long, default_value_t = 500)]
    grid: usize,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            lambda0: self.lambda0,
            grid_size: self.grid,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "silhouette")]
    index: IndexKind,
    #[arg(long, default_value = "I1", value_parser = parse_from_str::<Inter>)]
    dunn_inter: Inter,
    #[arg(long, default_value = "J1", value_parser = parse_from_str::<Intra>)]
    dunn_intra: Intra,
    #[arg(long, default_value_t = 0.25)]
    quantile_a: f64,
    #[arg(long, default_value_t = 10)]
    max_iter: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Leave per-curve warps out of the result.
    #[arg(long)]
    no_warps: bool,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_parser = parse_from_str::<ScenarioKind>)]
    scenario: ScenarioKind,
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Power-warp exponents, cycled over each group.
    #[arg(long, value_delimiter = ',')]
    alphas: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    /// Treat these labels as one group, e.g. `G1,G3`.
    #[arg(long, value_delimiter = ',')]
    merge: Vec<String>,
}

#[derive(Args)]
struct AlignArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pair: Vec<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IndexesArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    partition: PathBuf,
}

fn parse_from_str<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e: T::Err| e.to_string())
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            writeln!(w, "{text}")?;
            w.flush()?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn cluster(a: &ClusterArgs) -> Result<()> {
    let set = io::read_curves(&a.common.input)?;
    let config = RunConfig {
        quantile_a: a.quantile_a,
        index: match a.index {
            IndexKind::Silhouette => ClusterIndex::Silhouette,
            IndexKind::Dunn => ClusterIndex::Dunn {
                inter: a.dunn_inter,
                intra: a.dunn_intra,
            },
        },
        max_iterations: a.max_iter,
        seed: a.seed,
        report_warps: !a.no_warps,
        ..a.common.config()
    };
    let prep = prepare(&set, &config)?;
    let result = run_prepared(&prep, &config)?;
    write_json(Some(&a.output), &result)
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let mut sc = Scenario::new(a.scenario);
    if let Some(s) = &a.sizes {
        sc.sizes = s.clone();
    }
    if let Some(s) = a.sigma {
        sc.sigma = s;
    }
    if let Some(al) = &a.alphas {
        sc.alphas = al.clone();
    }
    sc.n_points = a.points;
    sc.seed = a.seed;
    let sim = generate(&sc)?;
    io::write_curves(&a.out, &CurveSet::new(sim.grid, sim.curves)?)?;
    if let Some(l) = &a.labels {
        io::write_labels(l, &sim.labels)?;
    }
    Ok(())
}

fn evaluate(a: &EvaluateArgs) -> Result<()> {
    let pred = io::read_partition(&a.pred)?;
    let merged = a.merge.first().cloned();
    let labels = io::read_labels(&a.truth)?.into_iter().map(|(id, l)| match &merged {
        Some(m) if a.merge.contains(&l) => (id, m.clone()),
        _ => (id, l),
    });
    let truth = Partition::from_labels(labels)?;
    println!("{:.6}", adjusted_rand(&pred, &truth)?);
    Ok(())
}

fn align(a: &AlignArgs) -> Result<()> {
    let [id1, id2] = a.pair[..] else {
        return Err(Error::Input("--pair needs exactly two ids".into()));
    };
    let set = io::read_curves(&a.common.input)?;
    let out = align_pair(&set, id1, id2, &a.common.config())?;
    write_json(a.out.as_deref(), &out)
}

fn indexes(a: &IndexesArgs) -> Result<()> {
    let set = io::read_curves(&a.common.input)?;
    let partition = io::read_partition(&a.partition)?;
    if partition.ids().into_iter().collect::<Vec<_>>() != {
        let mut ids = set.ids();
        ids.sort_unstable();
        ids
    } {
        return Err(Error::Input("partition ids do not match the curve ids".into()));
    }
    let prep = prepare(&set, &a.common.config())?;
    let groups = partition.groups();
    let dist = &prep.distances;
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    out.insert("silhouette".into(), silhouette(groups, dist)?);
    for inter in [Inter::I1, Inter::I2, Inter::I3] {
        for intra in [Intra::J1, Intra::J2] {
            let name = ClusterIndex::Dunn { inter, intra }.name();
            out.insert(name, dunn(groups, dist, inter, intra)?);
        }
    }
    // JSON has no infinity; report it as null
    let json: BTreeMap<String, Option<f64>> = out.into_iter().map(|(k, v)| (k, v.is_finite().then_some(v))).collect();
    write_json(None, &json)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Cluster(a) => cluster(a),
        Command::Simulate(a) => simulate(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Align(a) => align(a),
        Command::Indexes(a) => indexes(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
