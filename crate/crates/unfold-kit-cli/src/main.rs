//! `unfold-kit`: synthesize, fold, recover and benchmark bandlimited signals.
//!
//! Exit codes: 0 success, 1 domain or numerical error, 2 sweep finished with
//! failed trials, 64 usage error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use unfold_kit::bench::{
    bounded_sigma_for_snr, draw_noise, run_experiment_detailed, sweep_to_string, MseReport, NoiseKind, NoiseModel,
};
use unfold_kit::config::{parse_runs, RunConfig};
use unfold_kit::io::{read_signal, recovery_to_csv_string, write_signal};
use unfold_kit::ops::apply_operator;
use unfold_kit::recovery::auto_order;
use unfold_kit::signal::{
    check_edge_decay, compute_support_bound, normalize_peak, synthesize_sum_of_sincs, synthesize_terms, Kernel,
    SamplingGrid, SincTerm, SynthesisConfig,
};
use unfold_kit::{
    b2r2_recover, hod_recover, vandermonde_recover, AnchorPolicy, HodConfig, OperatorKind, OperatorSpec, PgdConfig,
};

const EXIT_DOMAIN: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_USAGE: u8 = 64;

const PRESETS: [(u8, &str); 10] = [
    (3, include_str!("../../../presets/fig3.toml")),
    (4, include_str!("../../../presets/fig4.toml")),
    (5, include_str!("../../../presets/fig5.toml")),
    (6, include_str!("../../../presets/fig6.toml")),
    (7, include_str!("../../../presets/fig7.toml")),
    (8, include_str!("../../../presets/fig8.toml")),
    (9, include_str!("../../../presets/fig9.toml")),
    (10, include_str!("../../../presets/fig10.toml")),
    (11, include_str!("../../../presets/fig11.toml")),
    (12, include_str!("../../../presets/fig12.toml")),
];

/// Literature-quoted comparison values; never computed here.
const LITERATURE: &str = include_str!("../../../presets/cpf_literature.csv");

#[derive(Parser)]
#[command(name = "unfold-kit", version, about = "Recovery of bandlimited samples from folded measurements")]
#[command(after_help = "Seeds fall back to the UNFOLD_KIT_SEED environment variable, then to 0.\n\
List flags take comma-separated values, e.g. --of 4,6,8.\n\
Exit codes: 0 ok, 1 domain error, 2 sweep with failed trials, 64 usage error.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a peak-normalized bandlimited test signal.
    Synth(SynthArgs),
    /// Pass a signal through an operator, optionally adding noise.
    Fold(FoldArgs),
    /// Recover true samples from a folded signal and write a recovery CSV.
    Recover(RecoverArgs),
    /// Run a Monte-Carlo experiment built from flags (and optionally a config).
    Bench(ExperimentArgs),
    /// Run a sweep from a config file; flags override file values.
    Sweep(ExperimentArgs),
    /// Regenerate the data behind one of the shipped figure presets.
    FigureData(FigureArgs),
}

#[derive(Args)]
struct OutArgs {
    /// Output path.
    #[arg(long)]
    out: PathBuf,
    /// Overwrite an existing output file.
    #[arg(long)]
    force: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Periodic,
    Sinc,
}

#[derive(Args)]
struct SynthArgs {
    /// Oversampling factor.
    #[arg(long, default_value_t = 4.0)]
    of: f64,
    #[arg(long, default_value_t = 1024)]
    length: usize,
    /// Number of sinc terms; ignored with --single-sinc.
    #[arg(long, default_value_t = 12)]
    num_sincs: usize,
    /// One unit sinc centered at index 0.
    #[arg(long)]
    single_sinc: bool,
    #[arg(long, value_enum, default_value = "periodic")]
    kernel: KernelArg,
    /// Reject signals that do not decay below lambda/2 near the window edges.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, env = "UNFOLD_KIT_SEED")]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum NoiseArg {
    None,
    Bounded,
    Gaussian,
}

#[derive(Args)]
struct OperatorArgs {
    /// clip, modulo or mulaw_modulo.
    #[arg(long, default_value = "modulo")]
    operator: String,
    /// ADC threshold.
    #[arg(long)]
    lambda: f64,
    /// Companding strength for mulaw_modulo.
    #[arg(long, default_value_t = 255.0)]
    mu: f64,
}

impl OperatorArgs {
    fn spec(&self) -> anyhow::Result<OperatorSpec> {
        let kind: OperatorKind = self.operator.parse().map_err(usage)?;
        OperatorSpec::from_kind(kind, self.lambda, self.mu).map_err(usage)
    }
}

#[derive(Args)]
struct FoldArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    op: OperatorArgs,
    /// Noise model; --snr alone implies bounded.
    #[arg(long, value_enum)]
    noise: Option<NoiseArg>,
    /// Target SNR in dB relative to the folded samples.
    #[arg(long)]
    snr: Option<f64>,
    #[arg(long, env = "UNFOLD_KIT_SEED")]
    seed: Option<u64>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    B2r2,
    Vand,
    Hod,
}

#[derive(Args)]
struct RecoverArgs {
    /// Folded signal file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "b2r2")]
    algo: AlgoArg,
    #[command(flatten)]
    op: OperatorArgs,
    /// Residual support half-width.
    #[arg(long, conflicts_with = "truth")]
    n_lambda: Option<usize>,
    /// True signal; sets the support half-width and fills the `true` column.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Difference order for hod; derived from OF and lambda when omitted.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML run file or [[run]] preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    of: Option<Vec<f64>>,
    /// Noise levels (SNR in dB, or lambda/sigma for bounded_ratio).
    #[arg(long, value_delimiter = ',')]
    snr: Option<Vec<f64>>,
    /// none, bounded_snr, bounded_ratio or gaussian_snr; --snr alone implies bounded_snr.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    operator: Option<String>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    algo: Option<Vec<String>>,
    #[arg(long, env = "UNFOLD_KIT_SEED")]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output CSV; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct FigureArgs {
    /// Figure number.
    #[arg(long, value_parser = clap::value_parser!(u8).range(3..=12))]
    fig: u8,
    /// Override the preset trial count.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, env = "UNFOLD_KIT_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    jobs: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

/// Marks an error as a usage error (exit 64).
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl std::fmt::Display) -> anyhow::Error {
    anyhow!(Usage(e.to_string()))
}

/// Sweep finished but some trials errored.
#[derive(Debug)]
struct Partial(usize);

impl std::fmt::Display for Partial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} trial(s) failed", self.0)
    }
}

impl std::error::Error for Partial {}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Fold(a) => fold(a),
        Command::Recover(a) => recover(a),
        Command::Bench(a) => experiment(a, false),
        Command::Sweep(a) => experiment(a, true),
        Command::FigureData(a) => figure_data(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Partial>().is_some() {
                ExitCode::from(EXIT_PARTIAL)
            } else if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_DOMAIN)
            }
        }
    }
}

fn check_target(path: &Path, force: bool) -> anyhow::Result<()> {
    if path.exists() && !force {
        return Err(usage(format!("{} exists; pass --force to overwrite", path.display())));
    }
    Ok(())
}

fn write_text(path: &Path, text: &str, force: bool) -> anyhow::Result<()> {
    check_target(path, force)?;
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn synth(a: SynthArgs) -> anyhow::Result<()> {
    check_target(&a.out.out, a.out.force)?;
    let grid = SamplingGrid::from_oversampling(a.of, a.length).map_err(usage)?;
    let kernel = match a.kernel {
        KernelArg::Periodic => Kernel::Periodic,
        KernelArg::Sinc => Kernel::Sinc,
    };
    let signal = if a.single_sinc {
        let term = SincTerm {
            coefficient: 1.0,
            center: 0.0,
        };
        normalize_peak(&synthesize_terms(&grid, &[term], kernel)?)?
    } else {
        let mut cfg = SynthesisConfig::new(grid, a.num_sincs, a.seed.unwrap_or(0));
        cfg.kernel = kernel;
        cfg.validate().map_err(usage)?;
        synthesize_sum_of_sincs(&cfg)?
    };
    if let Some(lambda) = a.lambda {
        check_edge_decay(&signal, lambda)?;
    }
    write_signal(&signal, &a.out.out)?;
    Ok(())
}

fn fold(a: FoldArgs) -> anyhow::Result<()> {
    check_target(&a.out.out, a.out.force)?;
    let op = a.op.spec()?;
    let signal = read_signal(&a.input)?;
    let folded = apply_operator(&signal, &op);
    let noise = match (a.noise, a.snr) {
        (None | Some(NoiseArg::None), None) => None,
        (Some(NoiseArg::None), Some(_)) => return Err(usage("--snr needs a noise model other than none")),
        (Some(_), None) => return Err(usage("--noise needs --snr")),
        (None | Some(NoiseArg::Bounded), Some(snr)) => Some(NoiseKind::BoundedUniform {
            sigma: bounded_sigma_for_snr(&folded, snr),
        }),
        (Some(NoiseArg::Gaussian), Some(snr)) => Some(NoiseKind::GaussianSnr { snr_db: snr }),
    };
    let out = match noise {
        None => folded,
        Some(kind) => {
            let model = NoiseModel {
                kind,
                seed: a.seed.unwrap_or(0),
            };
            let v = draw_noise(&folded, &model)?;
            folded.with_values(folded.values.iter().zip(&v).map(|(y, e)| y + e).collect())
        }
    };
    write_signal(&out, &a.out.out)?;
    Ok(())
}

fn recover(a: RecoverArgs) -> anyhow::Result<()> {
    check_target(&a.out.out, a.out.force)?;
    let op = a.op.spec()?;
    let folded = read_signal(&a.input)?;
    let truth = a.truth.as_deref().map(read_signal).transpose()?;
    let n_lambda = match (a.n_lambda, &truth) {
        (Some(n), _) => n,
        (None, Some(t)) => compute_support_bound(t, op.lambda),
        (None, None) => return Err(usage("recover needs --n-lambda or --truth")),
    };
    let recovery = match a.algo {
        AlgoArg::B2r2 => {
            let mut cfg = PgdConfig::default();
            if let Some(m) = a.max_iters {
                cfg.max_iters = m;
            }
            let r = b2r2_recover(&folded, &op, n_lambda, &cfg)?;
            if r.warnings > 0 {
                eprintln!("warning: {} pass(es) hit the iteration budget", r.warnings);
            }
            r
        }
        AlgoArg::Vand => vandermonde_recover(&folded, &op, n_lambda)?,
        AlgoArg::Hod => {
            if op.kind() != Some(OperatorKind::Modulo) {
                bail!(usage("hod supports --operator modulo only"));
            }
            let peak = truth.as_ref().map_or(1.0, |t| t.peak());
            let order = a
                .order
                .unwrap_or_else(|| auto_order(&folded.grid, op.lambda, peak));
            let cfg = HodConfig {
                order,
                anchor: AnchorPolicy::Tail { n_lambda },
            };
            hod_recover(&folded, op.lambda, &cfg)?
        }
    };
    let text = recovery_to_csv_string(truth.as_ref(), &folded, &recovery.signal)?;
    write_text(&a.out.out, &text, a.out.force)
}

fn apply_overrides(run: &mut RunConfig, a: &ExperimentArgs) {
    if let Some(v) = &a.lambda {
        run.operator.lambdas = v.clone();
    }
    if let Some(v) = &a.of {
        run.sweep.ofs = v.clone();
    }
    if let Some(v) = &a.snr {
        run.noise.levels = v.clone();
        if a.noise.is_none() && run.noise.kind == "none" {
            run.noise.kind = "bounded_snr".into();
        }
    }
    if let Some(v) = &a.noise {
        run.noise.kind = v.clone();
    }
    if let Some(v) = &a.operator {
        run.operator.kind = v.clone();
    }
    if let Some(v) = a.mu {
        run.operator.mu = v;
    }
    if let Some(v) = a.trials {
        run.sweep.trials = v;
    }
    if let Some(v) = &a.algo {
        run.sweep.algorithms = v.clone();
    }
    if let Some(v) = a.seed {
        run.sweep.seed = v;
    }
    if let Some(v) = a.jobs {
        run.sweep.jobs = v;
    }
}

/// Runs every config and concatenates the reports.
fn run_all(runs: &[RunConfig]) -> anyhow::Result<(MseReport, usize)> {
    let mut report = MseReport::default();
    let mut failed = 0;
    for run in runs {
        let cfg = run.to_experiment().map_err(usage)?;
        let (r, failures) = run_experiment_detailed(&cfg)?;
        for f in failures.iter().take(5) {
            eprintln!(
                "trial failed: {} lambda={} of={} trial={}: {}",
                f.algorithm, f.lambda, f.of, f.trial, f.message
            );
        }
        failed += failures.len();
        report.rows.extend(r.rows);
    }
    Ok((report, failed))
}

fn experiment(a: ExperimentArgs, need_config: bool) -> anyhow::Result<()> {
    if let Some(out) = &a.out {
        check_target(out, a.force)?;
    }
    let mut runs = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_runs(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?
        }
        None if need_config => return Err(usage("sweep needs --config")),
        None => vec![RunConfig::default()],
    };
    for run in &mut runs {
        apply_overrides(run, &a);
    }
    let (report, failed) = run_all(&runs)?;
    let text = sweep_to_string(&report)?;
    match &a.out {
        Some(out) => write_text(out, &text, a.force)?,
        None => print!("{text}"),
    }
    if failed > 0 {
        bail!(Partial(failed));
    }
    Ok(())
}

fn figure_data(a: FigureArgs) -> anyhow::Result<()> {
    check_target(&a.out.out, a.out.force)?;
    let text = PRESETS
        .iter()
        .find(|(n, _)| *n == a.fig)
        .map(|(_, t)| *t)
        .ok_or_else(|| usage(format!("no preset for figure {}", a.fig)))?;
    let mut runs = parse_runs(text)?;
    for run in &mut runs {
        if let Some(t) = a.trials {
            run.sweep.trials = t;
        }
        if let Some(s) = a.seed {
            run.sweep.seed = s;
        }
        if let Some(j) = a.jobs {
            run.sweep.jobs = j;
        }
    }
    let (report, failed) = run_all(&runs)?;
    write_text(&a.out.out, &sweep_to_string(&report)?, a.out.force)?;
    let figure = format!("fig{}", a.fig);
    let quoted: Vec<&str> = LITERATURE
        .lines()
        .skip(1)
        .filter(|l| l.split(',').next() == Some(figure.as_str()))
        .collect();
    if !quoted.is_empty() {
        let path = a.out.out.with_extension("literature.csv");
        let header = LITERATURE.lines().next().unwrap_or_default();
        write_text(&path, &format!("{header}\n{}\n", quoted.join("\n")), a.out.force)?;
    }
    if failed > 0 {
        bail!(Partial(failed));
    }
    Ok(())
}
