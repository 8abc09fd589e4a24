use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use swdecay_cli::commands;
use swdecay_cli::{Artifact, CliError, ScenarioConfig, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "swdecay", version, about = "Radiative decay of atoms in a resonant standing wave")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quasienergy zone table over one period.
    Zones(Flags),
    /// Exact and Gaussian probability densities at one time.
    Density(Flags),
    /// Total populations over time by one or more methods.
    Totals(Flags),
    /// Per-order diffraction probabilities, Fourier and closed form.
    Diffraction(Flags),
    /// Direct integration of the order equations with recoil and detuning.
    Ladder(Flags),
    /// Power-law tail fits and oscillation suppression report.
    Fit(Flags),
}

/// Every flag is also accepted as a key in the config file.
#[derive(Args)]
struct Flags {
    /// key = value file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// fig2a, fig2b, fig3, fig4, fig5 or tail.
    #[arg(long)]
    preset: Option<String>,
    /// |Ω| in units of Γ.
    #[arg(long)]
    rabi: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    /// Recoil frequency ω_r.
    #[arg(long)]
    recoil: Option<String>,
    /// Detuning δ of the ladder.
    #[arg(long)]
    detuning: Option<String>,
    /// Phase of Ω in radians.
    #[arg(long)]
    phase: Option<String>,
    /// Snapshot time Γt for the density command.
    #[arg(long)]
    time: Option<String>,
    #[arg(long)]
    tmin: Option<String>,
    #[arg(long)]
    tmax: Option<String>,
    /// Number of time samples.
    #[arg(long)]
    nt: Option<String>,
    /// Number of spatial samples over [0, π].
    #[arg(long)]
    nx: Option<String>,
    /// Highest diffraction order reported.
    #[arg(long)]
    orders: Option<String>,
    /// Numerical tolerance (quadrature, tail sum, ODE rtol).
    #[arg(long)]
    tol: Option<String>,
    /// Comma-separated: quadrature, mode_sum, ladder, asymptotic, gaussian, two_level.
    #[arg(long)]
    methods: Option<String>,
    /// Fit window as start:end.
    #[arg(long)]
    window: Option<String>,
    /// Suppression windows, e.g. 1:3,3:5,5:7.
    #[arg(long)]
    windows: Option<String>,
    /// Add full-vs-adiabatic deviation columns to the ladder output.
    #[arg(long)]
    probe: bool,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<String>,
    /// Ladder amplitude trajectory file.
    #[arg(long)]
    trajectory: Option<String>,
    /// Population series CSV to fit instead of computing one.
    #[arg(long)]
    input: Option<String>,
}

impl Flags {
    fn entries(&self) -> Vec<(String, String)> {
        let pairs = [
            ("preset", &self.preset),
            ("rabi", &self.rabi),
            ("gamma", &self.gamma),
            ("recoil", &self.recoil),
            ("detuning", &self.detuning),
            ("phase", &self.phase),
            ("time", &self.time),
            ("tmin", &self.tmin),
            ("tmax", &self.tmax),
            ("nt", &self.nt),
            ("nx", &self.nx),
            ("orders", &self.orders),
            ("tol", &self.tol),
            ("methods", &self.methods),
            ("window", &self.window),
            ("windows", &self.windows),
            ("format", &self.format),
            ("out", &self.out),
            ("trajectory", &self.trajectory),
            ("input", &self.input),
        ];
        let mut out: Vec<(String, String)> = pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        if self.probe {
            out.push(("probe".into(), "true".into()));
        }
        out
    }

    fn resolve(&self) -> Result<ScenarioConfig, CliError> {
        let text = match &self.config {
            Some(path) => Some(read(path)?),
            None => None,
        };
        ScenarioConfig::resolve(text.as_deref(), &self.entries())
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(artifact: &Artifact) -> Result<(), CliError> {
    match &artifact.path {
        Some(path) => std::fs::write(path, &artifact.content).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(artifact.content.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn run(command: Command) -> Result<(), CliError> {
    let artifacts = match command {
        Command::Zones(f) => commands::cmd_zones(&f.resolve()?)?,
        Command::Density(f) => commands::cmd_density(&f.resolve()?)?,
        Command::Totals(f) => commands::cmd_totals(&f.resolve()?)?,
        Command::Diffraction(f) => commands::cmd_diffraction(&f.resolve()?)?,
        Command::Ladder(f) => commands::cmd_ladder(&f.resolve()?)?,
        Command::Fit(f) => {
            let config = f.resolve()?;
            let input = match &config.input {
                Some(path) => Some(read(path)?),
                None => None,
            };
            commands::cmd_fit(&config, input.as_deref())?
        }
    };
    artifacts.iter().try_for_each(write)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        // A closed downstream pipe (e.g. `| head`) is not an error.
        Err(CliError::Io { source, .. }) if source.kind() == std::io::ErrorKind::BrokenPipe => {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("swdecay: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
