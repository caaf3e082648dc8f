use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use filterbench::memristor::MemristorParams;
use filterbench_cli::{
    cmd_ac, cmd_check, cmd_fit, cmd_hysteresis, cmd_sallen_key, cmd_tf, cmd_tran, AcInput,
    CliError, HysteresisArgs, SallenKeyArgs, SweepOverrides, TfInput,
};

/// Analog filter workbench: netlist simulation, memristor experiments,
/// transfer-function characterization, and response fitting.
#[derive(Parser)]
#[command(name = "filterbench", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a netlist; silent when clean.
    Check { netlist: PathBuf },
    /// AC sweep of a netlist (or the built-in ladder) to CSV.
    Ac {
        /// Netlist path; omit when using --builtin.
        netlist: Option<PathBuf>,
        /// Use a built-in circuit instead of a netlist file.
        #[arg(long, value_enum)]
        builtin: Option<BuiltinCircuit>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        sweep: SweepFlags,
    },
    /// Transient simulation of a netlist (.tran directive) to CSV.
    Tran {
        netlist: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Use backward Euler instead of trapezoidal integration.
        #[arg(long)]
        backward_euler: bool,
    },
    /// Sine-driven memristor i-v trajectories and loop areas.
    Hysteresis {
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        /// One or more drive frequencies in Hz, comma-separated.
        #[arg(long, value_delimiter = ',', default_value = "1")]
        freq: Vec<f64>,
        #[arg(long, default_value_t = 6)]
        cycles: usize,
        #[arg(long, default_value_t = 2000)]
        steps_per_cycle: usize,
        #[command(flatten)]
        device: DeviceFlags,
        #[arg(long, default_value_t = 0.5)]
        w0: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep a rational transfer function and report its characteristics.
    Tf {
        /// Numerator coefficients, ascending powers of s, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        num: Option<Vec<f64>>,
        /// Denominator coefficients, ascending powers of s, comma-separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        den: Option<Vec<f64>>,
        /// Use a built-in transfer function.
        #[arg(long, value_enum)]
        builtin: Option<BuiltinTf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        sweep: SweepFlags,
    },
    /// Build a Sallen-Key cascade from a pole table and sweep it.
    SallenKey {
        /// Pole table: one "omega0 q" pair per line, # comments.
        #[arg(long)]
        poles: PathBuf,
        /// Stage C2 value in farads.
        #[arg(long, default_value_t = 100e-9)]
        c2: f64,
        /// Replace every resistor with an equivalent memristor.
        #[arg(long)]
        memristor: bool,
        #[command(flatten)]
        device: DeviceFlags,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        sweep: SweepFlags,
    },
    /// Log-linear magnitude fit of the embedded dataset or a CSV.
    Fit {
        /// CSV with a freq_khz,mag_db header; embedded dataset when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the embedded dataset to this CSV path.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BuiltinCircuit {
    Ladder,
}

#[derive(Clone, Copy, ValueEnum)]
enum BuiltinTf {
    /// 4th-order rational approximation of the Gaussian low-pass.
    Gaussian4,
}

#[derive(Args)]
struct SweepFlags {
    #[arg(long)]
    fstart: Option<f64>,
    #[arg(long)]
    fstop: Option<f64>,
    /// Points per decade of the log-spaced sweep.
    #[arg(long)]
    ppd: Option<usize>,
}

impl SweepFlags {
    fn overrides(&self) -> SweepOverrides {
        SweepOverrides {
            f_start: self.fstart,
            f_stop: self.fstop,
            points_per_decade: self.ppd,
        }
    }
}

#[derive(Args)]
struct DeviceFlags {
    #[arg(long, default_value_t = 100.0)]
    ron: f64,
    #[arg(long, default_value_t = 16e3)]
    roff: f64,
    #[arg(long, default_value_t = 10e-9)]
    d: f64,
    #[arg(long, default_value_t = 1e-14)]
    mu: f64,
    #[arg(long, default_value_t = 1)]
    p: u32,
}

impl DeviceFlags {
    fn params(&self) -> Result<MemristorParams, CliError> {
        MemristorParams::new(self.ron, self.roff, self.d, self.mu, self.p)
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut report = stdout.lock();

    match cli.command {
        Command::Check { netlist } => cmd_check(&netlist, &mut report),
        Command::Ac {
            netlist,
            builtin,
            out,
            sweep,
        } => {
            let input = match (&netlist, builtin) {
                (Some(path), None) => AcInput::File(path),
                (None, Some(BuiltinCircuit::Ladder)) => AcInput::BuiltinLadder,
                _ => {
                    return Err(CliError::Usage(
                        "provide exactly one of <NETLIST> or --builtin".into(),
                    ))
                }
            };
            cmd_ac(input, &out, &sweep.overrides(), &mut report)
        }
        Command::Tran {
            netlist,
            out,
            backward_euler,
        } => {
            let integrator = if backward_euler {
                filterbench::mna::Integrator::BackwardEuler
            } else {
                filterbench::mna::Integrator::Trapezoidal
            };
            cmd_tran(&netlist, &out, integrator, &mut report)
        }
        Command::Hysteresis {
            amplitude,
            freq,
            cycles,
            steps_per_cycle,
            device,
            w0,
            out,
        } => {
            let args = HysteresisArgs {
                amplitude,
                freqs: freq,
                cycles,
                steps_per_cycle,
                params: device.params()?,
                w0_frac: w0,
            };
            cmd_hysteresis(&args, &out, &mut report)
        }
        Command::Tf {
            num,
            den,
            builtin,
            out,
            sweep,
        } => {
            let input = match (num, den, builtin) {
                (Some(num), Some(den), None) => TfInput::Coeffs { num, den },
                (None, None, Some(BuiltinTf::Gaussian4)) => TfInput::BuiltinGaussian4,
                _ => {
                    return Err(CliError::Usage(
                        "provide either --num and --den, or --builtin".into(),
                    ))
                }
            };
            cmd_tf(&input, &out, &sweep.overrides(), &mut report)
        }
        Command::SallenKey {
            poles,
            c2,
            memristor,
            device,
            out,
            sweep,
        } => {
            let table = std::fs::read_to_string(&poles)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", poles.display())))?;
            let args = SallenKeyArgs {
                pole_table: table,
                pole_table_label: poles.display().to_string(),
                c2,
                memristor: if memristor {
                    Some(device.params()?)
                } else {
                    None
                },
            };
            cmd_sallen_key(&args, &out, &sweep.overrides(), &mut report)
        }
        Command::Fit { csv, export } => cmd_fit(csv.as_deref(), export.as_deref(), &mut report),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut stderr = std::io::stderr().lock();
            let _ = writeln!(stderr, "error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
