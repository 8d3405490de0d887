//! Command-line front end. Every subcommand's arguments double as its
//! serializable run configuration, which is echoed into the output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::cayley::{self, Budget, GraphKind, Limit, TruncatedGraph};
use crate::error::{Error, Result};
use crate::extrapolate;
use crate::flatperm::{self, FlatPermConfig, FlatPermRun};
use crate::groups::GroupId;
use crate::series;
use crate::spectral::{self, PowerOptions};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_NON_CONVERGENCE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "cogrowth", version, about = "Cogrowth bounds, cogrowth series and geodesic statistics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: RunConfig,
}

/// A parsed invocation. Serializes to canonical JSON tagged by subcommand.
#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "lowercase", deny_unknown_fields)]
pub enum RunConfig {
    /// Exact returns and cogrowth series.
    Series(SeriesArgs),
    /// Certified eigenvalue ladder of a truncated Cayley or reduced-path graph.
    Bound(BoundArgs),
    /// Fit a ladder or mean-length CSV.
    Extrapolate(ExtrapolateArgs),
    /// Flat-histogram estimate of word counts by geodesic length.
    Flatperm(FlatpermArgs),
    /// Mean geodesic length of random words and its linear-growth fits.
    Escape(EscapeArgs),
    /// Return growth bound implied by a cogrowth bound.
    Transfer(TransferArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesArgs {
    #[serde(with = "group_text")]
    pub group: GroupId,
    #[arg(long, default_value_t = 16)]
    pub max_len: usize,
    /// Cap on distinct elements per layer.
    #[arg(long, default_value_t = series::DEFAULT_LAYER_BUDGET, value_parser = parse_count::<usize>)]
    pub layer_budget: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum KindArg {
    G,
    H,
}

impl From<KindArg> for GraphKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::G => GraphKind::G,
            KindArg::H => GraphKind::H,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundArgs {
    #[serde(with = "group_text")]
    pub group: GroupId,
    /// Vertices to keep (states for kind H).
    #[arg(long, default_value_t = 1_000_000, value_parser = parse_count::<usize>)]
    pub vertices: usize,
    /// Build kind H over the first this-many group elements instead.
    #[arg(long, value_parser = parse_count::<usize>, conflicts_with = "depth")]
    pub elements: Option<usize>,
    /// Keep the whole ball of this radius instead.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, value_enum, ignore_case = true, default_value_t = KindArg::H)]
    pub kind: KindArg,
    /// Ladder checkpoints per factor of ten.
    #[arg(long, default_value_t = 10)]
    pub per_decade: usize,
    /// Smallest ladder checkpoint.
    #[arg(long, default_value_t = 100, value_parser = parse_count::<usize>)]
    pub min_n: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 100_000, value_parser = parse_count::<usize>)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = cayley::DEFAULT_VERTEX_BUDGET, value_parser = parse_count::<usize>)]
    pub budget_vertices: usize,
    #[arg(long, default_value_t = cayley::DEFAULT_KEY_BYTES_BUDGET, value_parser = parse_count::<usize>)]
    pub budget_key_bytes: usize,
    /// Write the built graph here.
    #[arg(long)]
    pub save_graph: Option<PathBuf>,
    /// Read the graph from a file written by --save-graph instead of building it.
    #[arg(long)]
    pub load_graph: Option<PathBuf>,
    /// Write the JSON summary here (default: standard error).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormArg {
    /// `α_N = α_∞ + λ/(log N)^δ` with a δ scan.
    Ladder,
    /// `⟨ℓ⟩_n = A n + b n^δ` at each δ.
    Escape,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtrapolateArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormArg::Ladder)]
    pub form: FormArg,
    /// Value column (default: the `*_certified` column, else the second).
    #[arg(long)]
    pub column: Option<String>,
    /// Comma-separated δ values (default: 0.05 steps over (0.1, 12] for
    /// ladders, 0,¼,⅓,½,⅔,¾ for escape fits).
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    #[arg(long, default_value_t = extrapolate::DEFAULT_BAND_FRACTION)]
    pub band: f64,
    /// Points with a smaller first column are ignored.
    #[arg(long, default_value_t = 0.0)]
    pub min_x: f64,
    /// Write the per-δ table as CSV here.
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatpermArgs {
    #[serde(with = "group_text")]
    pub group: GroupId,
    #[arg(long, default_value_t = 64)]
    pub max_len: usize,
    #[arg(long, default_value_t = 100_000, value_parser = parse_count::<u64>)]
    pub tours: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, default_value_t = 0.5)]
    pub prune: f64,
    #[arg(long, default_value_t = 2.0)]
    pub enrich: f64,
    #[arg(long, default_value_t = 2)]
    pub copies: usize,
    #[arg(long, default_value_t = 1_000_000, value_parser = parse_count::<u64>)]
    pub max_tour_samples: u64,
    /// Continue the run saved in this resume file.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Save a resume file here every --checkpoint-every tours and at the end.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000, value_parser = parse_count::<u64>)]
    pub checkpoint_every: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EscapeArgs {
    #[serde(with = "group_text")]
    pub group: GroupId,
    #[arg(long, default_value_t = 1024, value_parser = parse_count::<usize>)]
    pub words: usize,
    #[arg(long = "len", default_value_t = 16384, value_parser = parse_count::<usize>)]
    pub max_len: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    /// Fit only lengths at least this large.
    #[arg(long, default_value_t = 16)]
    pub fit_from: usize,
    /// Write the per-length means as CSV here.
    #[arg(long)]
    pub points_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferArgs {
    pub alpha: f64,
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
}

mod group_text {
    use crate::groups::GroupId;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(g: &GroupId, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(g)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<GroupId, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

/// Parses a count written as an integer or in float notation (`1e6`).
pub fn parse_count<T: TryFrom<u64>>(s: &str) -> std::result::Result<T, String> {
    let v: u64 = match s.parse::<u64>() {
        Ok(v) => v,
        Err(_) => {
            let f: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
            if !(f >= 0.0 && f.fract() == 0.0 && f < 1.8e19) {
                return Err(format!("`{s}` is not a whole number"));
            }
            f as u64
        }
    };
    T::try_from(v).map_err(|_| format!("`{s}` is out of range"))
}

impl RunConfig {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("configs serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("run config: {e}")))
    }

    fn seed(&self) -> Option<u64> {
        match self {
            RunConfig::Flatperm(a) => Some(a.seed),
            RunConfig::Escape(a) => Some(a.seed),
            _ => None,
        }
    }

    /// `#`-prefixed lines naming the program version, config and seed.
    pub fn provenance_header(&self) -> String {
        let mut out = format!("# cogrowth {}\n# config: {}\n", env!("CARGO_PKG_VERSION"), self.to_json());
        if let Some(seed) = self.seed() {
            writeln!(out, "# seed: {seed}").unwrap();
        }
        out
    }

    fn provenance_json(&self) -> serde_json::Value {
        json!({
            "program": "cogrowth",
            "version": env!("CARGO_PKG_VERSION"),
            "config": self,
            "seed": self.seed(),
        })
    }
}

/// What a subcommand produced: the main text and whether every eigenvalue
/// iteration converged.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    /// Extra files as (path, contents).
    pub files: Vec<(PathBuf, Vec<u8>)>,
    /// Printed on standard error when not written to a file.
    pub note: Option<String>,
    pub converged: bool,
}

impl Output {
    fn text(text: String) -> Self {
        Output {
            text,
            files: Vec::new(),
            note: None,
            converged: true,
        }
    }
}

pub fn cmd_series(config: &RunConfig, args: &SeriesArgs) -> Result<String> {
    let returns = series::count_returns_with_budget(args.group, args.max_len, args.layer_budget)?;
    let cogrowth = series::count_cogrowth_with_budget(args.group, args.max_len, args.layer_budget)?;
    let mut out = config.provenance_header();
    out.push_str("n,returns,cogrowth\n");
    for n in 0..=args.max_len {
        writeln!(out, "{n},{},{}", returns.coefficients[n], cogrowth.coefficients[n]).unwrap();
    }
    Ok(out)
}

pub fn cmd_bound(config: &RunConfig, args: &BoundArgs) -> Result<Output> {
    let budget = Budget {
        max_vertices: args.budget_vertices,
        max_key_bytes: args.budget_key_bytes,
    };
    let kind = GraphKind::from(args.kind);
    let graph = match &args.load_graph {
        Some(path) => {
            let g = TruncatedGraph::from_bytes(&std::fs::read(path)?)?;
            if g.group != args.group || g.kind != kind {
                return Err(Error::InvalidArgument(format!(
                    "{} holds a kind-{} graph of {}, not kind {} of {}",
                    path.display(),
                    g.kind.as_str(),
                    g.group,
                    kind.as_str(),
                    args.group
                )));
            }
            g
        }
        None => match (kind, args.elements, args.depth) {
            (_, _, Some(d)) => cayley::build(args.group, kind, Limit::depth(d), budget)?,
            (GraphKind::H, Some(m), None) => {
                let g = cayley::build(args.group, GraphKind::G, Limit::vertices(m), budget)?;
                cayley::reduced_path_graph(&g)?
            }
            (GraphKind::G, Some(_), None) => {
                return Err(Error::InvalidArgument("--elements applies to kind H only".into()))
            }
            (_, None, None) => cayley::build(args.group, kind, Limit::vertices(args.vertices), budget)?,
        },
    };
    let n = graph.vertices();
    let checkpoints: Vec<usize> = cayley::geometric_checkpoints(n, args.per_decade.max(1))
        .into_iter()
        .filter(|&c| c >= args.min_n.min(n))
        .collect();
    let opts = PowerOptions {
        tol: args.tolerance,
        max_iterations: args.max_iterations,
    };
    let period = args.group.classify_period();
    let ladder = spectral::eigen_ladder(&graph.adjacency, &checkpoints, period, opts)?;
    let name = spectral::value_name(kind);
    let mut text = config.provenance_header();
    text.push_str(&ladder.to_csv(name));

    let last = ladder.points.last().expect("at least one checkpoint");
    let transfer = match kind {
        GraphKind::H => Some(series::transfer_rho_k(last.certified, args.group.rank()).unwrap_or(0.0)),
        GraphKind::G => None,
    };
    let summary = json!({
        "provenance": config.provenance_json(),
        "group": args.group.to_string(),
        "kind": kind.as_str(),
        "vertices": n,
        "edges": graph.edges(),
        "covered_radius": graph.covered_radius(),
        "period": period,
        "certified": last.certified,
        "rayleigh": last.rayleigh,
        "residual": last.residual,
        "converged": ladder.all_converged(),
        "transfer_rho": transfer,
    });
    let summary = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    let mut out = Output::text(text);
    out.converged = ladder.all_converged();
    match &args.summary {
        Some(path) => out.files.push((path.clone(), summary.into_bytes())),
        None => out.note = Some(summary),
    }
    if let Some(path) = &args.save_graph {
        out.files.push((path.clone(), graph.to_bytes()));
    }
    Ok(out)
}

const ESCAPE_DELTAS: [f64; 6] = [0.0, 0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.75];

pub fn cmd_extrapolate(config: &RunConfig, args: &ExtrapolateArgs) -> Result<Output> {
    let text = std::fs::read_to_string(&args.input)?;
    let points: Vec<(f64, f64)> = extrapolate::parse_points_csv(&text, args.column.as_deref())?
        .into_iter()
        .filter(|p| p.0 >= args.min_x)
        .collect();
    let (result, grid) = match args.form {
        FormArg::Ladder => {
            let grid = args.deltas.clone().unwrap_or_else(extrapolate::default_delta_grid);
            let scan = extrapolate::scan_delta(&points, &grid, args.band)?;
            (serde_json::to_value(&scan.result).expect("fit serializes"), scan.grid_csv())
        }
        FormArg::Escape => {
            let deltas = args.deltas.clone().unwrap_or_else(|| ESCAPE_DELTAS.to_vec());
            let fits = deltas
                .iter()
                .map(|&d| extrapolate::fit_escape(&points, d))
                .collect::<Result<Vec<_>>>()?;
            let value = json!({
                "fits": fits,
                "points_used": points.len(),
                "input_digest": extrapolate::input_digest(&points),
            });
            (value, extrapolate::escape_table_csv(&points, &deltas)?)
        }
    };
    let doc = json!({ "provenance": config.provenance_json(), "result": result });
    let mut out = Output::text(serde_json::to_string_pretty(&doc).expect("fit serializes") + "\n");
    if let Some(path) = &args.grid_out {
        out.files.push((path.clone(), (config.provenance_header() + &grid).into_bytes()));
    }
    Ok(out)
}

pub fn cmd_flatperm(config: &RunConfig, args: &FlatpermArgs) -> Result<Output> {
    let fp = FlatPermConfig {
        max_len: args.max_len,
        tours: args.tours,
        seed: args.seed,
        workers: args.workers,
        prune_below: args.prune,
        enrich_above: args.enrich,
        copies: args.copies,
        max_tour_samples: args.max_tour_samples,
    };
    let mut run = match &args.resume {
        Some(path) => {
            let run = FlatPermRun::from_json(&std::fs::read_to_string(path)?)?;
            let mut expected = fp;
            expected.tours = run.config.tours;
            if run.group != args.group || run.config != expected {
                return Err(Error::InvalidArgument(format!(
                    "{} was written by a run with a different group or parameters",
                    path.display()
                )));
            }
            let mut run = run;
            run.config.tours = run.config.tours.max(args.tours);
            run
        }
        None => FlatPermRun::new(args.group, fp)?,
    };
    let step = args.checkpoint_every.max(1);
    while run.tours_done() < run.config.tours {
        let next = (run.tours_done() / step + 1) * step;
        run.run_until(next)?;
        if let Some(path) = &args.checkpoint {
            write_atomically(path, run.to_json().as_bytes())?;
        }
    }
    if let Some(path) = &args.checkpoint {
        write_atomically(path, run.to_json().as_bytes())?;
    }
    Ok(Output::text(config.provenance_header() + &run.merged().to_csv()))
}

pub fn cmd_escape(config: &RunConfig, args: &EscapeArgs) -> Result<Output> {
    let lengths = flatperm::sample_lengths(args.max_len);
    let points = flatperm::run_simple_sampling_at(args.group, args.words, &lengths, args.seed, args.workers)?;
    let pairs: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.n >= args.fit_from)
        .map(|p| (p.n as f64, p.mean))
        .collect();
    let deltas = args.deltas.clone().unwrap_or_else(|| ESCAPE_DELTAS.to_vec());
    let table = extrapolate::escape_table_csv(&pairs, &deltas)?;
    let mut out = Output::text(config.provenance_header() + &table);
    let top = points.last().expect("at least one length");
    out.note = Some(format!(
        "<l>/n at n = {}: {:.5} ± {:.5}\n",
        top.n,
        top.mean / top.n as f64,
        top.std_error / top.n as f64
    ));
    if let Some(path) = &args.points_out {
        out.files
            .push((path.clone(), (config.provenance_header() + &flatperm::escape_csv(&points)).into_bytes()));
    }
    Ok(out)
}

pub fn cmd_transfer(args: &TransferArgs) -> Result<String> {
    Ok(format!("{:.6}\n", series::transfer_rho_k(args.alpha, args.rank)?))
}

/// Runs one parsed invocation.
pub fn execute(config: &RunConfig) -> Result<Output> {
    match config {
        RunConfig::Series(a) => cmd_series(config, a).map(Output::text),
        RunConfig::Bound(a) => cmd_bound(config, a),
        RunConfig::Extrapolate(a) => cmd_extrapolate(config, a),
        RunConfig::Flatperm(a) => cmd_flatperm(config, a),
        RunConfig::Escape(a) => cmd_escape(config, a),
        RunConfig::Transfer(a) => cmd_transfer(a).map(Output::text),
    }
}

fn out_path(config: &RunConfig) -> Option<&Path> {
    match config {
        RunConfig::Series(a) => a.out.as_deref(),
        RunConfig::Bound(a) => a.out.as_deref(),
        RunConfig::Extrapolate(a) => a.out.as_deref(),
        RunConfig::Flatperm(a) => a.out.as_deref(),
        RunConfig::Escape(a) => a.out.as_deref(),
        RunConfig::Transfer(_) => None,
    }
}

fn write_atomically(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded(_) => EXIT_BUDGET,
        Error::NonConvergence { .. } => EXIT_NON_CONVERGENCE,
        Error::Io(_) | Error::NonIntegral(_) => 1,
        _ => EXIT_CONFIG,
    }
}

/// Parses arguments, runs, writes outputs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    let config = cli.command;
    let result = execute(&config).and_then(|out| {
        for (path, bytes) in &out.files {
            std::fs::write(path, bytes)?;
        }
        match out_path(&config) {
            Some(path) => std::fs::write(path, &out.text)?,
            None => print!("{}", out.text),
        }
        if let Some(note) = &out.note {
            eprint!("{note}");
        }
        Ok(out.converged)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("warning: power iteration did not converge at every checkpoint");
            EXIT_NON_CONVERGENCE
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
