//! Command-line front end: `denoise`, `sweep`, `fit` and `demo`.
//!
//! Exit codes: 0 on success, 1 for usage errors and unreadable input, 2 for
//! runtime failures (solver, degenerate histogram, failed demo verdict).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::demos::{self, DEMO_NAMES};
use crate::error::Error;
use crate::image::{add_gaussian_noise, Image};
use crate::metrics::MetricPair;
use crate::multiscale::MollifierFamily;
use crate::pgm::{read_pgm, write_atomic, write_pgm};
use crate::solver::{denoise, sweep_csv, sweep_m, Cutoff, SolverConfig};
use crate::stats::{fit_linearized, fit_power, gradient_histogram, split_edges};

#[derive(Debug, Parser)]
#[command(
    name = "tvphi",
    version,
    about = "Nonconvex TV denoising, gradient statistics and limit demos"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Denoise a PGM image.
    Denoise(DenoiseArgs),
    /// Denoise once per cut-off M with α^∞ fixed and tabulate PSNR/SSIM.
    Sweep(SweepArgs),
    /// Fit gradient-magnitude statistics of a PGM image.
    Fit(FitArgs),
    /// Run numerical limit demos.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Exponent q of t^q, in (0, 2).
    #[arg(long, default_value_t = 0.5)]
    pub q: f64,
    /// Cut-off M in gray levels per pixel; `0` is plain TV, `inf` the pure power.
    #[arg(long = "M", default_value = "10", value_parser = parse_cutoff)]
    pub m: Cutoff,
    /// Asymptotic edge weight α^∞ = α φ^∞ (per unit noise variance).
    #[arg(long, default_value_t = 0.0253)]
    pub alpha_inf: f64,
    /// Weight η_0 of the multiscale term (per unit noise variance).
    #[arg(long, default_value_t = 0.0)]
    pub eta0: f64,
    /// Largest mollifier scale ε_1 in pixels; level ℓ uses ε_1 2^(1-ℓ).
    #[arg(long, default_value_t = 2.0)]
    pub eps1: f64,
    /// Number of η levels K (0 disables η).
    #[arg(long, default_value_t = 0)]
    pub levels: usize,
    /// Add Gaussian noise of this standard deviation (gray levels) before solving.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Seed for the added noise.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Noise standard deviation σ (gray levels) dividing the fidelity as 1/σ²; defaults to --sigma, else 1.
    #[arg(long)]
    pub noise_level: Option<f64>,
    /// Maximum number of outer iterations.
    #[arg(long, default_value_t = 60)]
    pub max_outer: usize,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig, Error> {
        let mut cfg = SolverConfig::new(self.q, self.m, self.alpha_inf);
        let sigma = self.noise_level.or(self.sigma).unwrap_or(1.0);
        cfg.noise_variance = sigma * sigma;
        let levels = self.levels.max(1);
        cfg.family = MollifierFamily::dyadic(self.eps1, levels, self.eta0)?;
        cfg.levels = self.levels;
        cfg.max_outer = self.max_outer;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    /// Input PGM (P2 or P5).
    #[arg(long)]
    pub input: PathBuf,
    /// Output PGM (P5).
    #[arg(long)]
    pub output: PathBuf,
    /// Clean reference PGM; prints PSNR and SSIM of the result.
    #[arg(long = "ref")]
    pub reference: Option<PathBuf>,
    /// Solver report CSV [default: <output stem>.report.csv].
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Noisy image written when --sigma is given [default: <output stem>.noisy.pgm].
    #[arg(long)]
    pub noisy_output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Input PGM (noisy, or clean together with --sigma).
    #[arg(long)]
    pub input: PathBuf,
    /// Clean reference PGM used for PSNR and SSIM.
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Comma-separated cut-offs; `inf` for the pure power.
    #[arg(long = "Ms", default_value = "0,10,20,40,inf", value_delimiter = ',', value_parser = parse_cutoff)]
    pub ms: Vec<Cutoff>,
    /// Output CSV `M,PSNR,SSIM,objective,iters`.
    #[arg(long, default_value = "sweep.csv")]
    pub output: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FitMode {
    Full,
    Edge,
    Smooth,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FitModel {
    Power,
    Linearized,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FitCutoff {
    Free,
    Fixed(Cutoff),
}

fn parse_fit_cutoff(s: &str) -> Result<FitCutoff, String> {
    if s.eq_ignore_ascii_case("free") {
        Ok(FitCutoff::Free)
    } else {
        parse_cutoff(s).map(FitCutoff::Fixed)
    }
}

fn parse_cutoff(s: &str) -> Result<Cutoff, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input PGM (P2 or P5).
    #[arg(long)]
    pub input: PathBuf,
    /// Number of histogram bins (at least 8).
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    /// Gradient magnitude (gray levels per pixel) separating edge from smooth pixels.
    #[arg(long, default_value_t = 30.0)]
    pub edge_threshold: f64,
    /// Pixels included in the histogram.
    #[arg(long, value_enum, default_value_t = FitMode::Full)]
    pub mode: FitMode,
    /// Density model fitted to the log-histogram.
    #[arg(long, value_enum, default_value_t = FitModel::Power)]
    pub model: FitModel,
    /// Cut-off for the linearized model: `free`, a value in gray levels per pixel, or `inf`.
    #[arg(long = "M", default_value = "free", value_parser = parse_fit_cutoff)]
    pub m: FitCutoff,
    /// Directory for histogram.csv and fit.csv.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    Ramp,
    Step,
    Linlimit,
    Annihilation,
    Compact,
    All,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    /// Demo to run.
    #[arg(long, value_enum, default_value_t = DemoName::All)]
    pub name: DemoName,
    /// Directory for the <name>.csv traces.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Self::Usage(_) => 1,
            Self::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Runtime(m) => m,
        }
    }
}

fn runtime(e: Error) -> Failure {
    Failure::Runtime(e.to_string())
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn read_input(path: &Path) -> Result<Image, Failure> {
    read_pgm(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn noisy_input(input: &Path, solver: &SolverArgs) -> Result<(Image, Option<Image>), Failure> {
    let clean = read_input(input)?;
    match solver.sigma {
        Some(sigma) => {
            let noisy = add_gaussian_noise(&clean, sigma, solver.seed).map_err(usage)?;
            Ok((noisy.clone(), Some(noisy)))
        }
        None => Ok((clean, None)),
    }
}

fn cmd_denoise(args: &DenoiseArgs) -> Result<(), Failure> {
    let cfg = args.solver.config().map_err(usage)?;
    let (z, noisy) = noisy_input(&args.input, &args.solver)?;
    let reference = args.reference.as_deref().map(read_input).transpose()?;
    if let Some(noisy) = &noisy {
        let path = args
            .noisy_output
            .clone()
            .unwrap_or_else(|| sibling(&args.output, ".noisy.pgm"));
        write_pgm(&path, noisy).map_err(runtime)?;
    }
    let (u, report) = denoise(&z, &cfg).map_err(runtime)?;
    write_pgm(&args.output, &u).map_err(runtime)?;
    let report_path = args
        .report
        .clone()
        .unwrap_or_else(|| sibling(&args.output, ".report.csv"));
    write_atomic(&report_path, report.to_csv().as_bytes()).map_err(runtime)?;
    if let Some(reference) = reference {
        let m = MetricPair::compute(&u, &reference).map_err(runtime)?;
        println!("PSNR={:.4} SSIM={:.4}", m.psnr, m.ssim);
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let cfg = args.solver.config().map_err(usage)?;
    let (z, _) = noisy_input(&args.input, &args.solver)?;
    let reference = read_input(&args.reference)?;
    let rows = sweep_m(&z, &reference, &cfg, &args.ms).map_err(runtime)?;
    let csv = sweep_csv(&rows);
    write_atomic(&args.output, csv.as_bytes()).map_err(runtime)?;
    print!("{csv}");
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> Result<(), Failure> {
    let u = read_input(&args.input)?;
    let mask = match args.mode {
        FitMode::Full => None,
        FitMode::Edge | FitMode::Smooth => {
            let (edge, smooth) = split_edges(&u, args.edge_threshold).map_err(usage)?;
            Some(if args.mode == FitMode::Edge { edge } else { smooth })
        }
    };
    let hist = gradient_histogram(&u, args.bins, mask.as_deref()).map_err(|e| match e {
        Error::Config(_) => usage(e),
        other => runtime(other),
    })?;
    let fit = match (args.model, args.m) {
        (FitModel::Power, _) | (FitModel::Linearized, FitCutoff::Fixed(Cutoff::Infinite)) => fit_power(&hist),
        (FitModel::Linearized, FitCutoff::Free) => fit_linearized(&hist, None),
        (FitModel::Linearized, FitCutoff::Fixed(Cutoff::Finite(m))) => fit_linearized(&hist, Some(m)),
    }
    .map_err(runtime)?;
    write_atomic(args.out_dir.join("histogram.csv"), hist.to_csv().as_bytes()).map_err(runtime)?;
    write_atomic(args.out_dir.join("fit.csv"), fit.to_csv().as_bytes()).map_err(runtime)?;
    let m = if fit.cutoff.is_finite() {
        format!("{:.6}", fit.cutoff)
    } else {
        "inf".into()
    };
    println!(
        "q={:.6} alpha={:.6e} M={m} alpha_infty={:.6e} C={:.6e} residual={:.6e}",
        fit.q, fit.alpha, fit.alpha_infty, fit.c, fit.residual
    );
    Ok(())
}

fn cmd_demo(args: &DemoArgs) -> Result<(), Failure> {
    let names: Vec<&str> = match args.name {
        DemoName::All => DEMO_NAMES.to_vec(),
        one => vec![DEMO_NAMES[one as usize]],
    };
    let mut failed = Vec::new();
    for name in names {
        let trace = demos::run_default(name).map_err(runtime)?;
        write_atomic(args.out_dir.join(format!("{name}.csv")), trace.to_csv().as_bytes()).map_err(runtime)?;
        println!("{name}: {} ({})", trace.verdict(), trace.summary);
        if !trace.passed {
            failed.push(name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("failed demos: {}", failed.join(", "))))
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Denoise(a) => cmd_denoise(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Demo(a) => cmd_demo(a),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn demo_names_line_up() {
        for (i, name) in DEMO_NAMES.iter().enumerate() {
            let parsed = DemoName::from_str(name, false).unwrap();
            assert_eq!(parsed as usize, i);
        }
    }

    #[test]
    fn cutoff_flags() {
        let cli = Cli::try_parse_from(["tvphi", "sweep", "--input", "a", "--ref", "b", "--Ms", "0,10,inf"]).unwrap();
        match cli.command {
            Command::Sweep(a) => assert_eq!(a.ms, vec![Cutoff::Finite(0.0), Cutoff::Finite(10.0), Cutoff::Infinite]),
            _ => unreachable!(),
        }
        assert!(Cli::try_parse_from(["tvphi", "fit", "--input", "a", "--M", "oops"]).is_err());
        assert!(Cli::try_parse_from(["tvphi", "demo", "--bogus"]).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(["tvphi", "demo", "--name", "nope"]), 1);
        assert_eq!(run(["tvphi", "--help"]), 0);
        assert_eq!(
            run([
                "tvphi",
                "denoise",
                "--input",
                "/nonexistent.pgm",
                "--output",
                "/tmp/x.pgm"
            ]),
            1
        );
    }
}
