//! `tvs`: batch TV-Stokes / ROF denoising of raw volumes.
//!
//! Exit codes: 0 success, 2 usage or parameter error, 3 IO or format error,
//! 4 numerical divergence.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use tvs_core::calculus::{grad, max_abs};
use tvs_core::io::{self, DType, Volume, VolumeHeader};
use tvs_core::metrics::{psnr, staircase_metric};
use tvs_core::noise::add_gaussian_noise;
use tvs_core::phantom::ramp_with_ball;
use tvs_core::pipeline::{run_denoise, DenoiseConfig};
use tvs_core::report::Model;
use tvs_core::slice::export_slice;
use tvs_core::spectral::PoissonPlan;
use tvs_core::{ChannelField, Error, Shape};

#[derive(Parser, Debug)]
#[command(
    name = "tvs",
    version,
    about = "Multidimensional TV-Stokes denoising of raw volumes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Denoise a volume with TV-Stokes or the ROF baseline
    Denoise(DenoiseArgs),
    /// Add seeded Gaussian noise to a volume
    AddNoise(AddNoiseArgs),
    /// Print PSNR against a reference and the staircase measure as JSON
    Metrics(MetricsArgs),
    /// Project the gradient of a volume onto gradient fields; one file per channel
    Project(ProjectArgs),
    /// Export one orthogonal slice as an 8-bit PGM
    Slice(SliceArgs),
    /// Write the synthetic ramp-and-ball test volume
    Phantom(PhantomArgs),
    /// Stack equally shaped frames along a new last (time) axis
    Stack(StackArgs),
}

#[derive(Args, Debug)]
struct Input {
    /// Raw payload
    #[arg(long)]
    input: PathBuf,
    /// Header JSON; defaults to the payload path with a .json extension
    #[arg(long)]
    meta: Option<PathBuf>,
}

impl Input {
    fn load(&self) -> Result<Volume, Error> {
        load(&self.input, self.meta.as_deref())
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModelArg {
    Tvstokes,
    Rof,
}

#[derive(Args, Debug)]
struct DenoiseArgs {
    #[arg(long, value_enum, default_value = "tvstokes")]
    model: ModelArg,
    #[command(flatten)]
    input: Input,
    /// Step-1 (gradient smoothing) weight, normalised units
    #[arg(long, default_value_t = 0.1)]
    lambda1: f64,
    /// Step-2 (reconstruction) weight, normalised units
    #[arg(long, default_value_t = 0.1)]
    lambda2: f64,
    /// ROF weight, normalised units
    #[arg(long, default_value_t = 0.1)]
    lambda: f64,
    /// Dual step size, or `auto` for 1/(2d)
    #[arg(long, default_value = "auto")]
    tau: String,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    #[arg(long)]
    output: PathBuf,
    /// Report JSON path; printed to stdout when omitted
    #[arg(long)]
    report: Option<PathBuf>,
    /// Clean volume to score the output against
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    peak: f64,
}

#[derive(Args, Debug)]
struct AddNoiseArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    sigma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    peak: f64,
}

#[derive(Args, Debug)]
struct ProjectArgs {
    #[command(flatten)]
    input: Input,
    /// Channel `l` is written to `<stem>_g<l>.raw` next to this path
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct SliceArgs {
    #[command(flatten)]
    input: Input,
    /// Zero-based axis to cut across
    #[arg(long)]
    axis: usize,
    #[arg(long)]
    index: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum DTypeArg {
    F32,
    F64,
}

#[derive(Args, Debug)]
struct PhantomArgs {
    /// Grid extents, e.g. 32,32,32
    #[arg(long, value_delimiter = ',', default_values_t = [32, 32, 32])]
    dims: Vec<usize>,
    #[arg(long, value_enum, default_value = "f64")]
    dtype: DTypeArg,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct StackArgs {
    /// Frame payloads in temporal order; headers are found by extension
    #[arg(long, num_args = 2.., required = true)]
    frames: Vec<PathBuf>,
    #[arg(long)]
    output: PathBuf,
}

fn load(data: &Path, meta: Option<&Path>) -> Result<Volume, Error> {
    let header = meta.map_or_else(|| io::header_path_for(data), Path::to_path_buf);
    io::load_volume(data, &header)
}

fn save(field: &tvs_core::ScalarField, template: &VolumeHeader, data: &Path) -> Result<(), Error> {
    io::save_volume(field, template, data, &io::header_path_for(data))
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn parse_tau(s: &str) -> Result<Option<f64>, Error> {
    if s == "auto" {
        return Ok(None);
    }
    s.parse::<f64>()
        .map(Some)
        .map_err(|_| Error::Parameter(format!("--tau expects a number or `auto`, got {s:?}")))
}

fn denoise(args: &DenoiseArgs) -> Result<(), Error> {
    let cfg = DenoiseConfig {
        model: match args.model {
            ModelArg::Tvstokes => Model::TvStokes,
            ModelArg::Rof => Model::Rof,
        },
        lambda1: args.lambda1,
        lambda2: args.lambda2,
        lambda: args.lambda,
        tau: parse_tau(&args.tau)?,
        max_iters: args.max_iters,
        tol: args.tol,
        eps: args.eps,
    };
    let volume = args.input.load()?;
    let reference = match &args.reference {
        Some(path) => Some(load(path, None)?.field),
        None => None,
    };
    let (out, mut report) = run_denoise(&volume, &cfg, reference.as_ref(), args.peak)?;
    report.input = Some(args.input.input.display().to_string());
    save(&out, &volume.header, &args.output)?;
    let text = report.to_json() + "\n";
    match &args.report {
        Some(path) => write_text(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn add_noise(args: &AddNoiseArgs) -> Result<(), Error> {
    let volume = args.input.load()?;
    let noisy = add_gaussian_noise(&volume.field, args.sigma, args.seed)?;
    save(&noisy, &volume.header, &args.output)
}

fn metrics(args: &MetricsArgs) -> Result<(), Error> {
    let reference = load(&args.reference, None)?.field;
    let test = load(&args.test, None)?.field;
    let p = psnr(&reference, &test, args.peak)?;
    let out = json!({
        "psnr_db": p.is_finite().then_some(p),
        "staircase": staircase_metric(&test).ok(),
    });
    println!("{out}");
    Ok(())
}

fn project(args: &ProjectArgs) -> Result<(), Error> {
    let volume = args.input.load()?;
    let g = grad(&volume.field);
    let plan = PoissonPlan::new(volume.field.shape())?;
    let pg = plan.project(&g)?;
    let stem = args
        .output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "projected".into());
    let header = VolumeHeader {
        value_range: None,
        ..volume.header.clone()
    };
    let mut paths = Vec::new();
    for l in 0..pg.channel_count() {
        let path = args.output.with_file_name(format!("{stem}_g{l}.raw"));
        save(&pg.channel_field(l), &header, &path)?;
        paths.push(path.display().to_string());
    }
    let out = json!({
        "channels": paths,
        "max_defect": max_abs(&pg.minus(&g)),
    });
    println!("{out}");
    Ok(())
}

fn slice(args: &SliceArgs) -> Result<(), Error> {
    let volume = args.input.load()?;
    export_slice(
        &volume.field,
        args.axis,
        args.index,
        volume.header.value_range,
        &args.out,
    )?;
    Ok(())
}

fn phantom(args: &PhantomArgs) -> Result<(), Error> {
    let shape = Shape::new(args.dims.clone())?;
    let field = ramp_with_ball(&shape)?;
    let dtype = match args.dtype {
        DTypeArg::F32 => DType::F32,
        DTypeArg::F64 => DType::F64,
    };
    save(
        &field,
        &VolumeHeader::new(args.dims.clone(), dtype),
        &args.output,
    )
}

fn stack(args: &StackArgs) -> Result<(), Error> {
    let volumes = args
        .frames
        .iter()
        .map(|p| load(p, None))
        .collect::<Result<Vec<_>, _>>()?;
    let frames: Vec<_> = volumes.iter().map(|v| v.field.clone()).collect();
    let stacked = io::stack_frames(&frames)?;
    save(&stacked, &volumes[0].header, &args.output)
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Dimension(_) | Error::Parameter(_) => 2,
        Error::Format(_) | Error::Io { .. } => 3,
        Error::Divergence { .. } => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match &cli.command {
        Command::Denoise(a) => denoise(a),
        Command::AddNoise(a) => add_noise(a),
        Command::Metrics(a) => metrics(a),
        Command::Project(a) => project(a),
        Command::Slice(a) => slice(a),
        Command::Phantom(a) => phantom(a),
        Command::Stack(a) => stack(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tvs: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
