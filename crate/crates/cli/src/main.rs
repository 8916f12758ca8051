use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cellgraph::engine::DEFAULT_CHUNK_WIDTH;
use cellgraph::pairsearch::DEFAULT_ANCHORS;
use cellgraph::trie::DEFAULT_RADIX_BITS;
use cellgraph::{AlgorithmParams, ParallelConfig, SampleMode};
use cellgraph_cli::bench::{
    format_records, format_table, run_bench, BenchConfig, BenchMode, InputKind,
};
use cellgraph_cli::commands::{
    cmd_build_bytes, cmd_generate, cmd_verify, BuildOptions, VectorSource,
};
use cellgraph_cli::formats::{parse_scene, write_vectors_binary, write_vectors_text};
use cellgraph_cli::{CliError, Result};

#[derive(Parser, Debug)]
#[command(
    name = "cellgraph",
    version,
    about = "Build cell graphs over binary signature vectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a vectors file sampled from a scene or drawn at random.
    Generate(GenerateArgs),
    /// Build the edges file of a vectors file.
    Build(BuildArgs),
    /// Check an edges file against an exhaustive pairwise comparison.
    Verify(VerifyArgs),
    /// Time algorithms over a grid of input sizes.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Algo {
    Naive,
    Heuristic,
    Tree,
}

impl Algo {
    fn name(self) -> &'static str {
        match self {
            Algo::Naive => "naive",
            Algo::Heuristic => "heuristic",
            Algo::Tree => "tree",
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Box,
    Quaternion,
}

#[derive(Args, Debug)]
struct ParallelArgs {
    /// Concurrent workers (defaults to the number of cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Segments per pairwise distance computation.
    #[arg(long, default_value_t = DEFAULT_CHUNK_WIDTH)]
    chunk_width: usize,
    /// Launch geometry label recorded in reports, as BLOCKS,THREADS.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(u32, u32)>,
}

impl ParallelArgs {
    fn config(&self) -> Result<ParallelConfig> {
        let workers = self
            .workers
            .unwrap_or_else(|| ParallelConfig::default().workers());
        let cfg = ParallelConfig::new(workers, self.chunk_width)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(match self.grid {
            Some((b, t)) => cfg.with_grid_hint(b, t),
            None => cfg,
        })
    }
}

fn parse_grid(s: &str) -> std::result::Result<(u32, u32), String> {
    let (b, t) = s.split_once(',').ok_or("expected BLOCKS,THREADS")?;
    Ok((
        b.trim()
            .parse()
            .map_err(|_| format!("bad block count {b:?}"))?,
        t.trim()
            .parse()
            .map_err(|_| format!("bad thread count {t:?}"))?,
    ))
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Scene file to sample; without it, vectors are random.
    #[arg(long, conflicts_with_all = ["ell", "dup_frac", "centers"])]
    scene: Option<PathBuf>,
    /// Point distribution for scene sampling.
    #[arg(long, value_enum, default_value_t = Mode::Box)]
    mode: Mode,
    /// Number of vectors.
    #[arg(long)]
    n: usize,
    /// Vector length for random vectors.
    #[arg(long, default_value_t = 256)]
    ell: usize,
    /// Fraction of random vectors that repeat an earlier one.
    #[arg(long, default_value_t = 0.0)]
    dup_frac: f64,
    /// Draw random vectors around this many centers instead.
    #[arg(long)]
    centers: Option<usize>,
    /// Largest number of bit flips away from a center.
    #[arg(long, default_value_t = 4)]
    max_flips: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the packed binary layout instead of text.
    #[arg(long)]
    binary: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BuildArgs {
    /// Vectors file.
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::Tree)]
    algo: Algo,
    /// Anchor count for the heuristic.
    #[arg(long = "h", default_value_t = DEFAULT_ANCHORS)]
    anchors: usize,
    /// Radix width for the tree.
    #[arg(long = "r", default_value_t = DEFAULT_RADIX_BITS)]
    radix_bits: u32,
    #[command(flatten)]
    parallel: ParallelArgs,
    /// Append the sorted vertex list to the edges file.
    #[arg(long)]
    with_vertices: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stage statistics destination (default: stderr).
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    vectors: PathBuf,
    edges: PathBuf,
    /// Allow quadratic verification above the default size limit.
    #[arg(long)]
    force_quadratic: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Sweep {
    Compare,
    #[value(name = "h-sweep")]
    Anchors,
    #[value(name = "r-sweep")]
    Radix,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated input sizes.
    #[arg(long, value_delimiter = ',', default_value = "4096,8192,16384")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 256)]
    ell: usize,
    /// Comma-separated algorithms for compare mode.
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "naive,heuristic,tree"
    )]
    algos: Vec<Algo>,
    #[arg(long, value_enum, default_value_t = Sweep::Compare)]
    mode: Sweep,
    #[arg(long = "h", default_value_t = DEFAULT_ANCHORS)]
    anchors: usize,
    #[arg(long = "r", default_value_t = DEFAULT_RADIX_BITS)]
    radix_bits: u32,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    dup_frac: f64,
    /// Draw inputs around this many centers instead of uniformly.
    #[arg(long)]
    centers: Option<usize>,
    #[arg(long, default_value_t = 4)]
    max_flips: usize,
    #[command(flatten)]
    parallel: ParallelArgs,
    /// Machine-readable records destination.
    #[arg(long)]
    records: Option<PathBuf>,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn generate(a: GenerateArgs) -> Result<()> {
    let source = match (&a.scene, a.centers) {
        (Some(path), _) => {
            let text = String::from_utf8(read(path)?)
                .map_err(|_| CliError::parse(&path.display().to_string(), 1, "not utf-8"))?;
            let scene = parse_scene(&path.display().to_string(), &text)?;
            let mode = match a.mode {
                Mode::Box => SampleMode::BoxUniform,
                Mode::Quaternion => SampleMode::QuaternionUniform,
            };
            VectorSource::Scene { scene, mode }
        }
        (None, Some(centers)) => VectorSource::Clustered {
            ell: a.ell,
            centers,
            max_flips: a.max_flips,
        },
        (None, None) => VectorSource::Random {
            ell: a.ell,
            duplicate_fraction: a.dup_frac,
        },
    };
    let set = cmd_generate(&source, a.n, a.seed).map_err(|e| match e {
        CliError::Core(c) => CliError::Usage(c.to_string()),
        other => other,
    })?;
    let mut buf = Vec::new();
    if a.binary {
        write_vectors_binary(&set, &mut buf)?;
    } else {
        write_vectors_text(&set, &mut buf)?;
    }
    emit(a.out.as_deref(), &buf)
}

fn build(a: BuildArgs) -> Result<()> {
    let bytes = read(&a.input)?;
    let opts = BuildOptions {
        algo: a.algo.name().into(),
        params: AlgorithmParams {
            anchors: a.anchors,
            radix_bits: a.radix_bits,
        },
        parallel: a.parallel.config()?,
        with_vertices: a.with_vertices,
    };
    let out = cmd_build_bytes(&a.input.display().to_string(), &bytes, &opts)?;
    emit(a.out.as_deref(), out.edges.to_text().as_bytes())?;
    let stats = out.stats_records();
    match a.stats {
        Some(p) => fs::write(p, stats)?,
        None => eprint!("{stats}"),
    }
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<()> {
    let vectors = read(&a.vectors)?;
    let edges = String::from_utf8(read(&a.edges)?)
        .map_err(|_| CliError::parse(&a.edges.display().to_string(), 1, "not utf-8"))?;
    let report = cmd_verify(
        &a.vectors.display().to_string(),
        &vectors,
        &a.edges.display().to_string(),
        &edges,
        a.force_quadratic,
    )?;
    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Mismatch(Box::new(report)))
    }
}

fn bench(a: BenchArgs) -> Result<()> {
    let cfg = BenchConfig {
        sizes: a.sizes,
        ell: a.ell,
        algos: a.algos.iter().map(|x| x.name().to_string()).collect(),
        params: AlgorithmParams {
            anchors: a.anchors,
            radix_bits: a.radix_bits,
        },
        reps: a.reps,
        seed: a.seed,
        mode: match a.mode {
            Sweep::Compare => BenchMode::Compare,
            Sweep::Anchors => BenchMode::AnchorSweep,
            Sweep::Radix => BenchMode::RadixSweep,
        },
        input: match a.centers {
            Some(centers) => InputKind::Clustered {
                centers,
                max_flips: a.max_flips,
            },
            None => InputKind::Random {
                duplicate_fraction: a.dup_frac,
            },
        },
        parallel: a.parallel.config()?,
    };
    let rows = run_bench(&cfg)?;
    print!("{}", format_table(&rows));
    let records = format_records(&rows);
    match a.records {
        Some(p) => fs::write(p, records)?,
        None => print!("{records}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Build(a) => build(a),
        Command::Verify(a) => verify(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Mismatch(_)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
