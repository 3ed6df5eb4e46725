use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

use nv_cavity::config::{ExperimentConfig, BUILTIN_NAME};
use nv_cavity::pipeline::{
    cmd_cavity_scan, cmd_fixtures, cmd_lockin_sim, cmd_odmr, cmd_psd, cmd_saturation, cmd_sensitivity,
    CavityScanOptions, Format, LockinSimOptions, OdmrOptions, Output, PsdOptions, SaturationOptions, Trace,
};
use nv_cavity::spectral::Window;
use nv_cavity::{Error, Result};

#[derive(Parser)]
#[command(name = "nvcav", version, about = "Cavity-enhanced NV magnetometer simulations")]
struct Cli {
    /// Config file, a name inside $NVCAV_CONFIG_DIR, or `paper-defaults`.
    #[arg(long, global = true, default_value = BUILTIN_NAME)]
    config: String,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Format of data tables; reports are always JSON.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Also write SVG plots of CSV tables.
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceArg {
    Empty,
    Diamond,
    Birefringent,
}

#[derive(Clone, Copy, ValueEnum)]
enum WindowArg {
    Hann,
    Rect,
}

#[derive(Subcommand)]
enum Command {
    /// Cavity transmission versus laser frequency.
    CavityScan {
        #[arg(long, value_enum, default_value_t = TraceArg::Diamond)]
        trace: TraceArg,
        /// Scan start, offset from the resonance nearest c/lambda.
        #[arg(long, default_value_t = -0.5e9, allow_negative_numbers = true)]
        start_hz: f64,
        #[arg(long, default_value_t = 3.5e9, allow_negative_numbers = true)]
        stop_hz: f64,
        #[arg(long, default_value_t = 8001)]
        points: usize,
    },
    /// Forward saturation curve, or a fit with --input.
    Saturation {
        /// CSV with pump_power_W and normalized_transmission columns.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Comma-separated pump powers in W for the forward curve.
        #[arg(long, value_delimiter = ',')]
        powers: Option<Vec<f64>>,
    },
    /// Transmission versus microwave frequency.
    Odmr {
        #[arg(long)]
        field_t: Option<f64>,
        #[arg(long, default_value_t = 2.77e9)]
        start_hz: f64,
        #[arg(long, default_value_t = 2.97e9)]
        stop_hz: f64,
        #[arg(long, default_value_t = 2001)]
        points: usize,
    },
    /// Synthesize, demodulate and reconstruct an injected field.
    LockinSim(LockinArgs),
    /// Welch spectrum and noise floor of a time-series CSV.
    Psd {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        segment_length: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        overlap: f64,
        #[arg(long, value_enum, default_value_t = WindowArg::Hann)]
        window: WindowArg,
        #[arg(long, default_value_t = 10.0)]
        band_lo_hz: f64,
        #[arg(long, default_value_t = 500.0)]
        band_hi_hz: f64,
    },
    /// Shot-noise and projection-noise limits, temperature cross-talk.
    Sensitivity,
    /// Write the bundled synthetic fixtures into --out.
    Fixtures,
    /// Print the resolved config as JSON.
    ShowConfig,
}

#[derive(Args)]
struct LockinArgs {
    #[arg(long, allow_negative_numbers = true)]
    amplitude_t: Option<f64>,
    #[arg(long)]
    frequency_hz: Option<f64>,
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long)]
    noise_sigma: Option<f64>,
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    let out = Output {
        dir: cli.out.clone(),
        format: match cli.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        },
        plot: cli.plot,
    };
    let written = match cli.command {
        Command::CavityScan {
            trace,
            start_hz,
            stop_hz,
            points,
        } => {
            let trace = match trace {
                TraceArg::Empty => Trace::Empty,
                TraceArg::Diamond => Trace::Diamond,
                TraceArg::Birefringent => Trace::Birefringent,
            };
            let opts = CavityScanOptions {
                trace,
                start_Hz: start_hz,
                stop_Hz: stop_hz,
                points,
            };
            cmd_cavity_scan(&cfg, &opts, &out)?
        }
        Command::Saturation { input, powers } => cmd_saturation(&cfg, &SaturationOptions { input, powers }, &out)?,
        Command::Odmr {
            field_t,
            start_hz,
            stop_hz,
            points,
        } => {
            let opts = OdmrOptions {
                field_T: field_t,
                start_Hz: start_hz,
                stop_Hz: stop_hz,
                points,
            };
            cmd_odmr(&cfg, &opts, &out)?
        }
        Command::LockinSim(a) => {
            let opts = LockinSimOptions {
                amplitude_T: a.amplitude_t,
                frequency_Hz: a.frequency_hz,
                duration_s: a.duration_s,
                noise_sigma: a.noise_sigma,
            };
            cmd_lockin_sim(&cfg, &opts, &out)?
        }
        Command::Psd {
            input,
            segment_length,
            overlap,
            window,
            band_lo_hz,
            band_hi_hz,
        } => {
            let opts = PsdOptions {
                segment_length,
                overlap,
                window: match window {
                    WindowArg::Hann => Window::Hann,
                    WindowArg::Rect => Window::Rect,
                },
                band_lo_Hz: band_lo_hz,
                band_hi_Hz: band_hi_hz,
                ..PsdOptions::new(input)
            };
            cmd_psd(&opts, &out)?
        }
        Command::Sensitivity => cmd_sensitivity(&cfg, &out)?,
        Command::Fixtures => cmd_fixtures(&cfg, &out.dir)?,
        Command::ShowConfig => {
            println!("{}", cfg.to_json()?);
            Vec::new()
        }
    };
    for path in written {
        log::info!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for bad input (config, schema, files), 3 for numerical failures.
fn exit_code(e: &Error) -> u8 {
    if e.is_input_error() {
        2
    } else {
        3
    }
}
