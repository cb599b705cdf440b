//! Command-line front end: reduce, simulate, reconstruct, check and generate.
//!
//! Every command prints a [`RunReport`] as JSON on stdout, diagnostics go to
//! stderr, and the process exits with 0 (ok), 1 (parse error), 2 (usage or
//! internal error) or 3 (equivalence check or oracle failure).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use crnlump::ctmc::{
    build_generator, check_ordinary_lumpability, enumerate_population_box, ssa_simulate, write_jump_path_csv, Scaling,
};
use crnlump::generators::{gen_multisite_capped, gen_sir_network, gen_sir_star, SirParams};
use crnlump::lumping::{
    check_equivalence_with_tolerance, coarsest_equivalence_with, quotient_with_tolerance, LumpError,
};
use crnlump::model::{Ccrn, Extremal, Partition, RateInterval};
use crnlump::ode::{block_sum_state, simulate, ControlSchedule};
use crnlump::parser::{
    parse_edge_list, parse_model, parse_partition, parse_schedule_csv, serialize_model, write_residual_csv,
    write_schedule_csv, write_trajectory_csv, ModelDocument,
};
use crnlump::reconstruct::{reconstruct_trajectory, ReconstructOptions};

pub mod report;

pub use report::RunReport;
use report::Sizes;

pub const THREADS_ENV: &str = "CRNLUMP_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Internal(String),
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Usage(_) | CliError::Internal(_) => 2,
            CliError::CheckFailed(_) => 3,
        }
    }
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "crnlump", version, about = "Exact lumping of reaction networks with interval rates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Coarsest equivalence refining an initial partition, and the quotient network.
    Reduce(ReduceArgs),
    /// Integrates the mass-action ODE, or samples a stochastic path with --ssa.
    Simulate(SimulateArgs),
    /// Recovers original controls from a lumped run.
    Reconstruct(ReconstructArgs),
    /// Checks that a partition is an equivalence, optionally on the explicit state space.
    Check(CheckArgs),
    /// Writes a case-study model.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["input", "batch"]))]
pub struct ReduceArgs {
    #[arg(short, long)]
    pub input: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Block map as JSON.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Also write the run report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Rate comparison tolerance; 0 compares exactly.
    #[arg(long, default_value_t = 0.0)]
    pub tolerance: f64,
    #[arg(long, conflicts_with = "finest")]
    pub partition_file: Option<PathBuf>,
    /// Start from singleton blocks.
    #[arg(long)]
    pub finest: bool,
    /// Reduce every `.crn` file of a directory.
    #[arg(long, requires = "out_dir", conflicts_with_all = ["input", "output", "map"])]
    pub batch: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RatePick {
    Lower,
    Upper,
    Mid,
}

impl RatePick {
    fn values(self, ccrn: &Ccrn<f64>) -> Vec<f64> {
        ccrn.reactions()
            .iter()
            .map(|r| match self {
                RatePick::Lower => r.rate.lo(),
                RatePick::Upper => r.rate.hi(),
                RatePick::Mid => r.rate.midpoint(),
            })
            .collect()
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    pub model: PathBuf,
    /// Piecewise-constant control as CSV; defaults to constant rates from --rates.
    #[arg(long, conflicts_with = "ssa")]
    pub schedule: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = RatePick::Mid)]
    pub rates: RatePick,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Gillespie simulation from the integer initial state.
    #[arg(long)]
    pub ssa: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Population scale N of the scaled chain; the initial state is multiplied by N.
    #[arg(long, requires = "ssa")]
    pub scale: Option<u32>,
    #[arg(long, requires = "scale")]
    pub cutoff: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    /// Original model; its initial state is the start of the reconstruction.
    pub model: PathBuf,
    /// Equivalence to lump by; defaults to the coarsest one below the model's partition.
    #[arg(long)]
    pub partition_file: Option<PathBuf>,
    /// Control of the lumped network as CSV; defaults to interval midpoints.
    #[arg(long)]
    pub lumped_schedule: Option<PathBuf>,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// Reconstructed trajectory CSV.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Realised original control CSV.
    #[arg(long)]
    pub control_out: Option<PathBuf>,
    /// Per-step residual CSV.
    #[arg(long)]
    pub residuals: Option<PathBuf>,
    /// Lumped trajectory CSV.
    #[arg(long)]
    pub lumped_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-8)]
    pub residual_threshold: f64,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    pub model: PathBuf,
    /// Partition to check; defaults to the model's own partition.
    #[arg(long)]
    pub partition_file: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub tolerance: f64,
    /// Also check ordinary lumpability of both extremal CTMCs.
    #[arg(long)]
    pub oracle: bool,
    /// Largest population enumerated by the oracle.
    #[arg(long, default_value_t = 3)]
    pub pop_bound: u64,
    /// Write the oracle counterexample as JSON.
    #[arg(long)]
    pub counterexample: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[command(subcommand)]
    pub kind: GenerateKind,
}

#[derive(Args, Debug)]
pub struct SirArgs {
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub eta: f64,
    #[arg(long, default_value_t = 0.0)]
    pub vac_lo: f64,
    #[arg(long, default_value_t = 1.0)]
    pub vac_hi: f64,
}

impl SirArgs {
    fn params(&self) -> Result<SirParams<f64>, CliError> {
        let vac = RateInterval::new(self.vac_lo, self.vac_hi).map_err(|e| CliError::Usage(e.to_string()))?;
        SirParams::new(self.beta, self.gamma, self.eta, vac).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Subcommand, Debug)]
pub enum GenerateKind {
    /// SIR with vaccination on a star with n locations.
    SirStar {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        sir: SirArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// SIR with vaccination on a weighted graph given as `src dst weight` lines.
    SirNet {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        undirected: bool,
        /// Infection intervals of this halfwidth around each weight.
        #[arg(long)]
        halfwidth: Option<f64>,
        #[command(flatten)]
        sir: SirArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Substrate with n binding sites.
    Multisite {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 9.95)]
        assoc_lo: f64,
        #[arg(long, default_value_t = 10.05)]
        assoc_hi: f64,
        #[arg(long, default_value_t = 0.05)]
        dissoc_lo: f64,
        #[arg(long, default_value_t = 0.15)]
        dissoc_hi: f64,
        #[arg(long, default_value_t = crnlump::generators::DEFAULT_MAX_SITES)]
        max_sites: u32,
        #[arg(short, long)]
        output: PathBuf,
    },
}

/// Runs a parsed command line, prints its report and returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let (mut report, result) = match cli.command {
        Command::Reduce(a) => with_report("reduce", |r| cmd_reduce(&a, r)),
        Command::Simulate(a) => with_report("simulate", |r| cmd_simulate(&a, r)),
        Command::Reconstruct(a) => with_report("reconstruct", |r| cmd_reconstruct(&a, r)),
        Command::Check(a) => with_report("check", |r| cmd_check(&a, r)),
        Command::Generate(a) => with_report("generate", |r| cmd_generate(&a, r)),
    };
    let code = match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            report.detail("error", e.to_string());
            e.exit_code()
        }
    };
    report.detail("exit_code", code);
    println!("{}", report.to_json());
    code
}

fn with_report(
    command: &str,
    f: impl FnOnce(&mut RunReport) -> Result<(), CliError>,
) -> (RunReport, Result<(), CliError>) {
    let mut report = RunReport::new(command);
    let result = f(&mut report);
    (report, result)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<fs::File, CliError> {
    fs::File::create(path).map_err(|e| CliError::Internal(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path, report: &mut RunReport) -> Result<ModelDocument<f64>, CliError> {
    let text = read(path)?;
    let mut doc = report
        .time("parse", || parse_model::<f64>(&text))
        .map_err(|e| CliError::Parse(format!("{}:{e}", path.display())))?;
    doc.source = Some(path.to_path_buf());
    report.input = Some(sizes(&doc.ccrn));
    Ok(doc)
}

fn load_partition(path: &Path, ccrn: &Ccrn<f64>) -> Result<Partition, CliError> {
    parse_partition(&read(path)?, ccrn).map_err(|e| CliError::Parse(format!("{}:{e}", path.display())))
}

fn sizes(ccrn: &Ccrn<f64>) -> Sizes {
    Sizes { species: ccrn.num_species(), reactions: ccrn.num_reactions() }
}

fn initial_state(ccrn: &Ccrn<f64>) -> Vec<f64> {
    ccrn.initial().map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; ccrn.num_species()])
}

fn lump_error(e: LumpError) -> CliError {
    match e {
        LumpError::NotAnEquivalence => CliError::CheckFailed(e.to_string()),
        other => internal(other),
    }
}

pub fn cmd_reduce(args: &ReduceArgs, report: &mut RunReport) -> Result<(), CliError> {
    if let Some(dir) = &args.batch {
        return reduce_batch(args, dir, args.out_dir.as_deref().expect("clap requires out_dir"), report);
    }
    let input = args.input.as_deref().expect("clap requires input or batch");
    reduce_file(args, input, args.output.as_deref(), args.map.as_deref(), report)?;
    if let Some(path) = &args.report {
        write(path, report.to_json().as_bytes())?;
    }
    Ok(())
}

fn reduce_file(
    args: &ReduceArgs,
    input: &Path,
    output: Option<&Path>,
    map_out: Option<&Path>,
    report: &mut RunReport,
) -> Result<(), CliError> {
    if !(args.tolerance >= 0.0 && args.tolerance.is_finite()) {
        return Err(CliError::Usage(format!("tolerance must be nonnegative, got {}", args.tolerance)));
    }
    let doc = load_model(input, report)?;
    let ccrn = &doc.ccrn;
    let start = match (&args.partition_file, args.finest) {
        (Some(p), _) => load_partition(p, ccrn)?,
        (None, true) => Partition::discrete(ccrn.num_species()),
        (None, false) => doc.initial_partition_or_trivial(),
    };
    let refinement =
        report.time("reduce", || coarsest_equivalence_with(ccrn, &start, args.tolerance)).map_err(internal)?;
    let part = refinement.partition;
    let (lumped, map) =
        report.time("quotient", || quotient_with_tolerance(ccrn, &part, args.tolerance)).map_err(lump_error)?;
    // blocks of the reduced model inherit the initial partition, so reducing it again is a fixpoint
    let image: Vec<usize> = map.representative.iter().map(|&s| start.block_of(s)).collect();
    let out_doc = ModelDocument::new(lumped, Some(Partition::from_labels(&image)));
    report.output = Some(sizes(&out_doc.ccrn));
    report.rounds = Some(refinement.rounds);
    report.flags.tolerance_used = args.tolerance > 0.0;
    report.detail("blocks", part.num_blocks());
    report.detail("initial_blocks", start.num_blocks());
    if let Some(path) = output {
        let text = report.time("write", || serialize_model(&out_doc));
        write(path, text.as_bytes())?;
    }
    if let Some(path) = map_out {
        let json = serde_json::to_string_pretty(&map.to_json(ccrn)).map_err(internal)?;
        write(path, json.as_bytes())?;
    }
    Ok(())
}

fn reduce_batch(args: &ReduceArgs, dir: &Path, out_dir: &Path, report: &mut RunReport) -> Result<(), CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Internal(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "crn"))
        .collect();
    files.sort();
    fs::create_dir_all(out_dir).map_err(|e| CliError::Internal(format!("{}: {e}", out_dir.display())))?;
    let results: Vec<(PathBuf, RunReport, Result<(), CliError>)> = report.time("batch", || {
        files
            .par_iter()
            .map(|f| {
                let stem = f.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                let out = out_dir.join(format!("{stem}.red.crn"));
                let map = out_dir.join(format!("{stem}.map.json"));
                let mut r = RunReport::new("reduce");
                let res = reduce_file(args, f, Some(&out), Some(&map), &mut r);
                (f.clone(), r, res)
            })
            .collect()
    });
    let mut worst: Option<CliError> = None;
    let mut entries = Vec::new();
    for (file, mut r, res) in results {
        if let Err(e) = res {
            eprintln!("{}: {e}", file.display());
            r.detail("error", e.to_string());
            if worst.as_ref().is_none_or(|w| e.exit_code() > w.exit_code()) {
                worst = Some(e);
            }
        }
        entries.push(serde_json::json!({ "file": file.display().to_string(), "report": r }));
    }
    report.detail("files", entries);
    if let Some(path) = &args.report {
        write(path, report.to_json().as_bytes())?;
    }
    worst.map_or(Ok(()), Err)
}

pub fn cmd_simulate(args: &SimulateArgs, report: &mut RunReport) -> Result<(), CliError> {
    let doc = load_model(&args.model, report)?;
    let ccrn = &doc.ccrn;
    if args.ssa {
        let mut init =
            ccrn.initial_multiset().ok_or_else(|| CliError::Usage("--ssa needs an integer initial state".into()))?;
        let scaling = args.scale.map(|n| Scaling { n, cutoff: args.cutoff.unwrap_or(f64::INFINITY) });
        if let Some(s) = scaling {
            init = crnlump::model::Multiset::from_counts(init.iter().map(|(sp, c)| (sp, c * s.n)));
        }
        let alpha = args.rates.values(ccrn);
        let path = report
            .time("ssa", || ssa_simulate(ccrn, &init, &alpha, args.t_end, args.seed, scaling))
            .map_err(internal)?;
        report.detail("jumps", path.num_jumps());
        if let Some(out) = &args.output {
            write_jump_path_csv(&path, ccrn.species(), create(out)?).map_err(internal)?;
        }
        return Ok(());
    }
    let sched = match &args.schedule {
        Some(p) => parse_schedule_csv(read(p)?.as_bytes(), ccrn)
            .map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?,
        None => ControlSchedule::constant(ccrn, args.rates.values(ccrn)).map_err(internal)?,
    };
    let v0 = initial_state(ccrn);
    let traj = report.time("integrate", || simulate(ccrn, &v0, &sched, args.t_end, args.step)).map_err(internal)?;
    report.detail("rows", traj.len());
    report.detail("final_state", traj.final_state());
    if let Some(out) = &args.output {
        let names: Vec<String> = ccrn.species().iter().map(|s| s.name.clone()).collect();
        report.time("write", || write_trajectory_csv(&traj, &names, create(out)?).map_err(internal))?;
    }
    Ok(())
}

pub fn cmd_reconstruct(args: &ReconstructArgs, report: &mut RunReport) -> Result<(), CliError> {
    let doc = load_model(&args.model, report)?;
    let ccrn = &doc.ccrn;
    let part = match &args.partition_file {
        Some(p) => load_partition(p, ccrn)?,
        None => {
            report
                .time("reduce", || coarsest_equivalence_with(ccrn, &doc.initial_partition_or_trivial(), 0.0))
                .map_err(internal)?
                .partition
        }
    };
    let (lumped, _) = quotient_with_tolerance(ccrn, &part, 0.0).map_err(lump_error)?;
    report.output = Some(sizes(&lumped));
    let sched = match &args.lumped_schedule {
        Some(p) => parse_schedule_csv(read(p)?.as_bytes(), &lumped)
            .map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?,
        None => ControlSchedule::midpoint(&lumped),
    };
    let v0 = initial_state(ccrn);
    let lumped_traj = report
        .time("lumped", || simulate(&lumped, &block_sum_state(&v0, &part), &sched, args.t_end, args.step))
        .map_err(internal)?;
    let opts = ReconstructOptions { residual_threshold: args.residual_threshold, ..ReconstructOptions::default() };
    let rec = report
        .time("reconstruct", || reconstruct_trajectory(ccrn, &part, &lumped, &lumped_traj, &sched, &v0, &opts))
        .map_err(internal)?;
    report.detail("max_residual", rec.max_residual);
    report.detail("max_tracking_error", rec.max_tracking_error);
    report.detail("steps", rec.schedule.num_segments());
    let names = |c: &Ccrn<f64>| -> Vec<String> { c.species().iter().map(|s| s.name.clone()).collect() };
    if let Some(out) = &args.output {
        write_trajectory_csv(&rec.trajectory, &names(ccrn), create(out)?).map_err(internal)?;
    }
    if let Some(out) = &args.control_out {
        write_schedule_csv(&rec.schedule, ccrn, create(out)?).map_err(internal)?;
    }
    if let Some(out) = &args.residuals {
        write_residual_csv(&rec.residuals, create(out)?).map_err(internal)?;
    }
    if let Some(out) = &args.lumped_out {
        write_trajectory_csv(&lumped_traj, &names(&lumped), create(out)?).map_err(internal)?;
    }
    Ok(())
}

pub fn cmd_check(args: &CheckArgs, report: &mut RunReport) -> Result<(), CliError> {
    let doc = load_model(&args.model, report)?;
    let ccrn = &doc.ccrn;
    let part = match (&args.partition_file, &doc.initial_partition) {
        (Some(p), _) => load_partition(p, ccrn)?,
        (None, Some(p)) => p.clone(),
        (None, None) => {
            return Err(CliError::Usage("no partition: pass --partition-file or declare one in the model".into()))
        }
    };
    report.flags.tolerance_used = args.tolerance > 0.0;
    let equivalence =
        report.time("check", || check_equivalence_with_tolerance(ccrn, &part, args.tolerance)).map_err(internal)?;
    report.detail("blocks", part.num_blocks());
    report.detail("equivalence", equivalence);
    let mut failure = (!equivalence).then(|| "partition is not a species equivalence".to_string());
    if args.oracle {
        let space = report.time("enumerate", || enumerate_population_box(ccrn, args.pop_bound)).map_err(internal)?;
        report.flags.truncated = space.truncated;
        report.detail("states", space.len());
        let mut lumpable = true;
        for ext in Extremal::BOTH {
            let gen = build_generator(&space, ccrn, ext);
            let cex = report
                .time(&format!("oracle_{ext:?}").to_lowercase(), || check_ordinary_lumpability(&gen, &space, &part))
                .map_err(internal)?;
            if let Some(cex) = cex {
                let json = cex.to_json(ccrn.species(), part.num_blocks());
                eprintln!("counterexample ({ext:?}): {}", serde_json::to_string(&json).map_err(internal)?);
                if let Some(path) = &args.counterexample {
                    write(path, serde_json::to_string_pretty(&json).map_err(internal)?.as_bytes())?;
                }
                report.detail("counterexample", &json);
                lumpable = false;
                break;
            }
        }
        report.detail("oracle_lumpable", lumpable);
        report.detail("agree", lumpable == equivalence);
        if !lumpable {
            failure = Some("lifted partition is not ordinarily lumpable".into());
        } else if failure.is_some() {
            failure = Some("oracle lumpable but network check failed".into());
        }
    }
    failure.map_or(Ok(()), |m| Err(CliError::CheckFailed(m)))
}

pub fn cmd_generate(args: &GenerateArgs, report: &mut RunReport) -> Result<(), CliError> {
    let usage = |e: crnlump::generators::GenError| CliError::Usage(e.to_string());
    let (doc, output) = match &args.kind {
        GenerateKind::SirStar { n, sir, output } => {
            let p = sir.params()?;
            (report.time("generate", || gen_sir_star(*n, &p)).map_err(usage)?, output)
        }
        GenerateKind::SirNet { edges, undirected, halfwidth, sir, output } => {
            let p = sir.params()?;
            let graph = parse_edge_list::<f64>(&read(edges)?, *undirected)
                .map_err(|e| CliError::Parse(format!("{}:{e}", edges.display())))?;
            (report.time("generate", || gen_sir_network(&graph, &p, *halfwidth)).map_err(usage)?, output)
        }
        GenerateKind::Multisite { n, assoc_lo, assoc_hi, dissoc_lo, dissoc_hi, max_sites, output } => {
            let interval = |lo, hi| RateInterval::new(lo, hi).map_err(|e| CliError::Usage(e.to_string()));
            let (a, d) = (interval(*assoc_lo, *assoc_hi)?, interval(*dissoc_lo, *dissoc_hi)?);
            (report.time("generate", || gen_multisite_capped(*n, a, d, *max_sites)).map_err(usage)?, output)
        }
    };
    report.output = Some(sizes(&doc.ccrn));
    let text = report.time("write", || serialize_model(&doc));
    write(output, text.as_bytes())
}

/// Sizes the global thread pool from `CRNLUMP_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize =
            v.parse().map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(internal)?;
    }
    Ok(())
}
