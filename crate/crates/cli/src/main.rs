use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use singularity_core::asymptotic::PeelOptions;
use singularity_core::boundary::{fourier_coefficients, hilbert_complete, BoundarySamples};
use singularity_core::complement::complement_from_model;
use singularity_core::series::{synthesize_series, CoefficientSeries};
use singularity_cli::analyze::{analyze, is_real, render_text, AnalyzeOptions, InputDigest};
use singularity_cli::io::{self, Input};
use singularity_cli::plot::{render_svg, stage_plots, HEADER};
use singularity_cli::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "singularity", version, about = "Locate and classify the singularities of a function from its Taylor coefficients")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(clap::Args)]
struct SourceArgs {
    /// Coefficient CSV (n,re,im), boundary samples (theta,re,im) or imaginary part (theta,v).
    input: PathBuf,
    /// Highest coefficient index to use.
    #[arg(long)]
    n_max: Option<usize>,
    /// Mean of Re f for imaginary-part input.
    #[arg(long, default_value_t = 0.0)]
    a0: f64,
}

#[derive(clap::Args)]
struct FitArgs {
    #[arg(long, default_value_t = 0.05)]
    snap_tol: f64,
    /// Largest accepted resynthesis residual, relative to max|c_n|.
    #[arg(long, default_value_t = 1e-6)]
    residual_tol: f64,
    /// First ratio index of the Domb–Sykes window (chosen automatically otherwise).
    #[arg(long)]
    window: Option<usize>,
    /// Maximum number of peeling stages.
    #[arg(long, default_value_t = 8)]
    stages: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Write the Taylor coefficients (and optionally boundary samples) of a model.
    Synth {
        /// Model JSON.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n_max: usize,
        /// Coefficient CSV to write.
        #[arg(long, short)]
        out: PathBuf,
        /// Number of boundary samples to write alongside.
        #[arg(long, requires = "samples_out")]
        samples: Option<usize>,
        #[arg(long)]
        samples_out: Option<PathBuf>,
    },
    /// Recover a singularity model from coefficients or boundary values.
    Analyze {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Also write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Emit Domb–Sykes plot data, one CSV per peeling stage.
    PlotData {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        fit: FitArgs,
        #[arg(long)]
        out_dir: PathBuf,
        /// Render an SVG next to each CSV.
        #[arg(long)]
        svg: bool,
    },
    /// Boundary values of f from samples of Im f.
    HilbertComplete {
        /// Samples with header theta,v.
        input: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        a0: f64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Complement model of an algebraic model.
    Complement {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

/// Sample files carry 12 digits, so coefficients far below the largest one
/// are mostly rounding noise; without `--n-max` the series stops there.
const SAMPLE_DYNAMIC_RANGE: f64 = 1e-4;
const MIN_SAMPLE_COEFFICIENTS: usize = 8;

fn significant_len(series: &CoefficientSeries) -> usize {
    let c = series.as_slice();
    let floor = SAMPLE_DYNAMIC_RANGE * c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let len = c.iter().position(|v| v.norm() < floor).unwrap_or(c.len());
    len.max(MIN_SAMPLE_COEFFICIENTS).min(c.len())
}

fn load(source: &SourceArgs) -> CliResult<(CoefficientSeries, InputDigest)> {
    let from_samples = |s: &BoundarySamples| -> CliResult<CoefficientSeries> {
        let err = |e: singularity_core::Error| CliError::Input(format!("{}: {e}", source.input.display()));
        let all = fourier_coefficients(s, s.len() / 2 - 1).map_err(err)?;
        Ok(match source.n_max {
            Some(n) => all.truncated((n + 1).min(all.len())),
            None => all.truncated(significant_len(&all)),
        })
    };
    let (series, format) = match io::read_input(&source.input)? {
        Input::Coefficients(c) => {
            let len = source.n_max.map_or(c.len(), |n| (n + 1).min(c.len()));
            (c.truncated(len), "coefficients")
        }
        Input::Samples(s) => (from_samples(&s)?, "samples"),
        Input::Imaginary(v) => {
            let f = hilbert_complete(&v, source.a0).map_err(|e| CliError::Input(format!("{}: {e}", source.input.display())))?;
            (from_samples(&f)?, "imaginary-part")
        }
    };
    let digest = InputDigest {
        source: source.input.display().to_string(),
        format,
        coefficient_count: series.len(),
        real: is_real(&series),
    };
    Ok((series, digest))
}

fn peel_options(fit: &FitArgs) -> PeelOptions {
    PeelOptions { residual_tol: fit.residual_tol, stage_cap: fit.stages, window: fit.window, snap_tol: fit.snap_tol }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Synth { model, n_max, out, samples, samples_out } => {
            let model = io::read_model(&model)?;
            let bad_model = |e: singularity_core::Error| CliError::Input(format!("invalid model: {e}"));
            let series = synthesize_series(&model, n_max).map_err(bad_model)?;
            io::write_coefficients(&out, &series)?;
            if let (Some(m), Some(path)) = (samples, samples_out) {
                let trace = BoundarySamples::trace_model(&model, m).map_err(bad_model)?;
                io::write_samples(&path, &trace)?;
            }
            Ok(())
        }
        Command::Analyze { source, fit, format, report } => {
            let (series, digest) = load(&source)?;
            let opts = AnalyzeOptions {
                snap_tol: fit.snap_tol,
                residual_tol: fit.residual_tol,
                window: fit.window,
                stages: fit.stages,
            };
            let result = analyze(&series, digest, opts);
            let json = io::to_json(&result)?;
            if let Some(path) = report {
                io::emit(Some(&path), &json)?;
            }
            match format {
                Format::Json => io::emit(None, &json)?,
                Format::Text => io::emit(None, &render_text(&result))?,
            }
            if result.model.is_none() {
                return Err(CliError::NoModel);
            }
            Ok(())
        }
        Command::PlotData { source, fit, out_dir, svg } => {
            let (series, _) = load(&source)?;
            if !is_real(&series) {
                return Err(CliError::Input("plot data needs real coefficients".into()));
            }
            let (plots, _) = stage_plots(&series, peel_options(&fit))?;
            fs::create_dir_all(&out_dir).map_err(|e| CliError::Input(format!("{}: {e}", out_dir.display())))?;
            let stem = source.input.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
            for plot in &plots {
                let base = out_dir.join(format!("{stem}_stage{}", plot.stage));
                io::write_annotated(&base.with_extension("csv"), &plot.metadata, &HEADER, &plot.rows)?;
                if svg {
                    io::emit(Some(&base.with_extension("svg")), &render_svg(plot))?;
                }
            }
            Ok(())
        }
        Command::HilbertComplete { input, a0, out } => {
            let Input::Imaginary(v) = io::read_input(&input)? else {
                return Err(CliError::Input(format!("{}: expected header theta,v", input.display())));
            };
            let f = hilbert_complete(&v, a0).map_err(|e| CliError::Input(format!("{}: {e}", input.display())))?;
            io::write_samples(&out, &f)
        }
        Command::Complement { model, out } => {
            let model = io::read_model(&model)?;
            let complement = complement_from_model(&model).map_err(|e| CliError::Input(format!("invalid model: {e}")))?;
            io::emit(out.as_deref().map(Path::new), &io::to_json(&complement)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !matches!(e, CliError::NoModel) {
                eprintln!("singularity: {e}");
            }
            ExitCode::from(e.exit_code())
        }
    }
}
