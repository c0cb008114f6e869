//! `fmosim` command-line tool.
//!
//! Exit codes: 0 on success, 2 for usage, input or configuration errors,
//! 3 when a schedule fails verification.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fmosim::channels::{
    channel_circuit, dephasing_kraus_corrected, dephasing_kraus_paper, dissipation_kraus, ChannelReport,
};
use fmosim::circuit::export_text;
use fmosim::config::{EvolutionMethod, RunConfig};
use fmosim::dynamics::{
    evolve_trotter_open, excitation_loss, initial_state, integrate_exact_every, site_populations, Trajectory,
};
use fmosim::hamiltonians::NmrParameters;
use fmosim::nmr::{compile, verify_against_target, Lowering, PulseSchedule, SignSource, TargetKind};
use fmosim::qcore::trace_distance;
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Verification(_) => 3,
        }
    }
}

impl From<fmosim::Error> for CliError {
    fn from(e: fmosim::Error) -> Self {
        match e {
            fmosim::Error::Verification(_) => CliError::Verification(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

#[derive(Parser)]
#[command(
    name = "fmosim",
    version,
    about = "Digital simulation of FMO exciton transfer on an NMR register"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Compact,
    Hadamard,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Trotter,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelKind {
    Dissipation,
    DephasingPaper,
    DephasingCorrected,
}

#[derive(Subcommand)]
enum Command {
    /// Compile `z:l`, `zz:l,l+1` or `xy:l,l+1` into a pulse schedule and a
    /// gate-level circuit.
    Compile {
        target: String,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        tau: f64,
        /// Run configuration supplying the register parameters. Without it a
        /// 7-qubit register with `ω_l = 1`, `J_l = 1` is used.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Source::Compact)]
        sign_source: Source,
        #[arg(long, default_value = "schedule.json")]
        schedule_out: PathBuf,
        #[arg(long, default_value = "circuit.txt")]
        circuit_out: PathBuf,
    },
    /// Check a schedule file against its target descriptor.
    Verify {
        schedule: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Integrate the open-system dynamics described by a run configuration.
    Evolve {
        config: PathBuf,
        /// Overrides `evolution.method` in the configuration.
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        /// CSV destination; defaults to `output.trajectory_csv`, then stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Report the Kraus operators, CPTP audit and ancilla circuit of a
    /// single-qubit noise channel.
    Channel {
        #[arg(value_enum)]
        kind: ChannelKind,
        #[arg(long, allow_negative_numbers = true)]
        rate: f64,
        #[arg(long, allow_negative_numbers = true)]
        time: f64,
    },
}

fn default_register() -> NmrParameters {
    NmrParameters::new(vec![1.0; 7], vec![1.0; 6]).expect("valid default register")
}

fn register(config: Option<&Path>) -> Result<NmrParameters, CliError> {
    match config {
        Some(path) => Ok(RunConfig::load(path)?.nmr_parameters()),
        None => Ok(default_register()),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn cmd_compile(
    target: &str,
    tau: f64,
    config: Option<&Path>,
    source: Source,
    schedule_out: &Path,
    circuit_out: &Path,
) -> Result<(), CliError> {
    let kind: TargetKind = target.parse()?;
    let params = register(config)?;
    let source = match source {
        Source::Compact => SignSource::Compact,
        Source::Hadamard => SignSource::Hadamard,
    };
    let schedule = compile(kind, tau, &params, source)?;
    let report = verify_against_target(&schedule, &params)?;
    if !report.pass {
        return Err(CliError::Verification(format!(
            "operator-norm error {:e}",
            report.norm_error
        )));
    }
    write_file(schedule_out, &schedule.to_json()?)?;
    write_file(
        circuit_out,
        &export_text(&schedule.to_program(&params, Lowering::Gates)?),
    )?;
    println!(
        "{}: {} intervals, {} pulses, norm_error {:e}",
        schedule.target.expect("compiled schedules carry a target"),
        schedule.intervals,
        schedule.pulse_count(),
        report.norm_error
    );
    Ok(())
}

fn cmd_verify(schedule: &Path, config: Option<&Path>) -> Result<(), CliError> {
    let text = fs::read_to_string(schedule).map_err(|e| io_error(schedule, e))?;
    let s = PulseSchedule::from_json(&text).map_err(|e| io_error(schedule, e))?;
    let params = register(config)?;
    let report = verify_against_target(&s, &params)?;
    println!("norm_error: {:e}", report.norm_error);
    println!("fidelity: {:.15}", report.fidelity);
    println!("pass: {}", report.pass);
    if let Some(m) = &report.target_mismatch {
        println!("target_mismatch: {m}");
    }
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Verification("schedule does not reproduce its target".into()))
    }
}

#[derive(Serialize)]
struct StateDump {
    t: f64,
    dim: usize,
    /// Row-major `[re, im]` pairs.
    entries: Vec<[f64; 2]>,
}

fn dump_states(traj: &Trajectory) -> Vec<StateDump> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(t, s)| {
            let m = s.matrix();
            let dim = s.dim();
            let entries = (0..dim)
                .flat_map(|i| (0..dim).map(move |j| [m[(i, j)].re, m[(i, j)].im]))
                .collect();
            StateDump { t: *t, dim, entries }
        })
        .collect()
}

fn cmd_evolve(config: &Path, method: Option<MethodArg>, output: Option<&Path>) -> Result<(), CliError> {
    let cfg = RunConfig::load(config)?;
    let method = match method {
        Some(MethodArg::Exact) => EvolutionMethod::Exact,
        Some(MethodArg::Trotter) => EvolutionMethod::Trotter,
        Some(MethodArg::Both) => EvolutionMethod::Both,
        None => cfg.evolution.method,
    };
    let ev = &cfg.evolution;
    let n = cfg.fmo.n_sites();
    let rho0 = initial_state(&ev.initial_state, n)?;
    let exact = || -> Result<Trajectory, CliError> {
        let (h, per) = cfg.exact_step();
        Ok(integrate_exact_every(&rho0, &cfg.fmo, &cfg.noise, ev.t_max, h, per)?)
    };
    let trotter = || -> Result<Trajectory, CliError> {
        Ok(evolve_trotter_open(
            &rho0,
            &cfg.fmo,
            &cfg.noise,
            ev.t_max,
            ev.dt,
            ev.lowering.into(),
        )?)
    };
    let (main, reference) = match method {
        EvolutionMethod::Exact => (exact()?, None),
        EvolutionMethod::Trotter => (trotter()?, None),
        EvolutionMethod::Both => {
            let (t, e) = (trotter()?, exact()?);
            if t.times.len() != e.times.len() {
                return Err(CliError::Usage("exact and Trotter sample grids differ".into()));
            }
            (t, Some(e))
        }
    };

    let sink: Box<dyn Write> = match output.map(Path::to_path_buf).or_else(|| ev_output(&cfg)) {
        Some(path) => Box::new(fs::File::create(&path).map_err(|e| io_error(&path, e))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((1..=n).map(|j| format!("p{j}")));
    header.extend(["loss", "trace", "purity"].map(String::from));
    if reference.is_some() {
        header.push("trace_distance".into());
    }
    let csv_err = |e: csv::Error| CliError::Usage(format!("writing CSV: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for (k, (t, s)) in main.times.iter().zip(&main.states).enumerate() {
        let pops = site_populations(s);
        let mut row: Vec<String> = vec![format!("{t:?}")];
        row.extend(pops.iter().map(|p| format!("{p:?}")));
        row.push(format!("{:?}", excitation_loss(&pops)));
        row.push(format!("{:?}", s.trace()));
        row.push(format!("{:?}", s.purity()));
        if let Some(r) = &reference {
            row.push(format!("{:?}", trace_distance(s, &r.states[k])?));
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| CliError::Usage(format!("writing CSV: {e}")))?;

    if let Some(path) = &cfg.output.states_json {
        let json = serde_json::to_string(&dump_states(&main)).map_err(|e| CliError::Usage(e.to_string()))?;
        write_file(Path::new(path), &json)?;
    }
    Ok(())
}

fn ev_output(cfg: &RunConfig) -> Option<PathBuf> {
    cfg.output.trajectory_csv.as_ref().map(PathBuf::from)
}

fn cmd_channel(kind: ChannelKind, rate: f64, time: f64) -> Result<(), CliError> {
    let ch = match kind {
        ChannelKind::Dissipation => dissipation_kraus(rate, time)?,
        ChannelKind::DephasingPaper => dephasing_kraus_paper(rate, time)?,
        ChannelKind::DephasingCorrected => dephasing_kraus_corrected(rate, time)?,
    };
    let mut value = serde_json::to_value(ChannelReport::new(&ch)).map_err(|e| CliError::Usage(e.to_string()))?;
    // The printed dephasing pair is not a channel, so it has no circuit.
    let circuit = channel_circuit(&ch).ok().map(|p| export_text(&p));
    value["circuit"] = serde_json::json!(circuit);
    println!(
        "{}",
        serde_json::to_string_pretty(&value).map_err(|e| CliError::Usage(e.to_string()))?
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Compile {
            target,
            tau,
            config,
            sign_source,
            schedule_out,
            circuit_out,
        } => cmd_compile(
            &target,
            tau,
            config.as_deref(),
            sign_source,
            &schedule_out,
            &circuit_out,
        ),
        Command::Verify { schedule, config } => cmd_verify(&schedule, config.as_deref()),
        Command::Evolve { config, method, output } => cmd_evolve(&config, method, output.as_deref()),
        Command::Channel { kind, rate, time } => cmd_channel(kind, rate, time),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fmosim: {e}");
            ExitCode::from(e.code())
        }
    }
}
