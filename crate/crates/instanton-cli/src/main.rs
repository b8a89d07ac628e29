//! `instanton` command-line tool.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{FileConfig, Format};
use report::CliError;

#[derive(Parser, Debug)]
#[command(name = "instanton", version, about = "Semiclassical tunneling calculator for Josephson-junction qubit potentials")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Quartic double-well splitting (or bounce decay with --g) against WKB and a grid oracle.
    DoubleWell(Flags),
    /// Phase-qubit escape rate from the tilted washboard.
    Washboard(Flags),
    /// Charge-qubit Bloch band against the Mathieu oracle.
    Charge(Flags),
    /// Flux-qubit ground doublet.
    Flux(Flags),
    /// Ginzburg-Landau current-phase relation of an SNS junction.
    GlCpr(Flags),
    /// WKB doublets of a symmetric double well.
    Wkb(Flags),
    /// Grid eigenstates and driven population dynamics.
    Oracle(Flags),
    /// Parameter sweep over another subcommand.
    Sweep(Flags),
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Flat JSON config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<String>>,
    #[arg(long)]
    hbar: Option<f64>,
    #[arg(long)]
    ej: Option<f64>,
    #[arg(long)]
    ec: Option<f64>,
    #[arg(long)]
    el: Option<f64>,
    #[arg(long)]
    ie: Option<f64>,
    #[arg(long)]
    ic: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    phi_e: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<f64>,
    #[arg(long = "bigN")]
    big_n: Option<f64>,
    #[arg(long)]
    l_over_zeta: Option<f64>,
    #[arg(long)]
    temp_k: Option<f64>,
    #[arg(long)]
    with_gl_correction: bool,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    n_max: Option<f64>,
    #[arg(long)]
    points: Option<f64>,
    #[arg(long)]
    levels: Option<f64>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    theta_points: Option<f64>,
    #[arg(long)]
    delta_points: Option<f64>,
    #[arg(long)]
    homotopy_steps: Option<f64>,
    #[arg(long)]
    points_per_zeta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    drive: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    samples: Option<f64>,
    /// Subcommand evaluated at each sweep point.
    #[arg(long)]
    sweep_command: Option<String>,
    #[arg(long)]
    sweep_param: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    sweep_from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sweep_to: Option<f64>,
    #[arg(long)]
    sweep_steps: Option<f64>,
}

impl Flags {
    fn overrides(self, command: &str) -> Result<FileConfig, CliError> {
        let format = match self.format {
            None => None,
            Some(list) => Some(
                list.iter()
                    .map(|s| match s.trim() {
                        "json" => Ok(Format::Json),
                        "csv" => Ok(Format::Csv),
                        other => Err(CliError::validation(format!("unknown format '{other}'"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?,
            ),
        };
        Ok(FileConfig {
            command: Some(command.to_string()),
            out: self.out,
            format,
            hbar: self.hbar,
            ej: self.ej,
            ec: self.ec,
            el: self.el,
            ie: self.ie,
            ic: self.ic,
            phi_e: self.phi_e,
            g: self.g,
            big_n: self.big_n,
            l_over_zeta: self.l_over_zeta,
            temp_k: self.temp_k,
            with_gl_correction: self.with_gl_correction.then_some(true),
            omega: self.omega,
            a: self.a,
            n_max: self.n_max,
            points: self.points,
            levels: self.levels,
            cutoff: self.cutoff,
            theta_points: self.theta_points,
            delta_points: self.delta_points,
            homotopy_steps: self.homotopy_steps,
            points_per_zeta: self.points_per_zeta,
            drive: self.drive,
            duration: self.duration,
            samples: self.samples,
            sweep_command: self.sweep_command,
            sweep_param: self.sweep_param,
            sweep_from: self.sweep_from,
            sweep_to: self.sweep_to,
            sweep_steps: self.sweep_steps,
        })
    }
}

fn execute(cli: Cli) -> Result<Vec<String>, CliError> {
    let (name, mut flags) = match cli.command {
        Cmd::DoubleWell(f) => ("double-well", f),
        Cmd::Washboard(f) => ("washboard", f),
        Cmd::Charge(f) => ("charge", f),
        Cmd::Flux(f) => ("flux", f),
        Cmd::GlCpr(f) => ("gl-cpr", f),
        Cmd::Wkb(f) => ("wkb", f),
        Cmd::Oracle(f) => ("oracle", f),
        Cmd::Sweep(f) => ("sweep", f),
    };
    let file = match flags.config.take() {
        Some(p) => FileConfig::load(&p)?,
        None => FileConfig::default(),
    };
    if let Some(c) = &file.command {
        if c != name {
            return Err(CliError::validation(format!("config file is for '{c}', not '{name}'")));
        }
    }
    let cfg = config::resolve(file.merge(flags.overrides(name)?))?;
    let outcome = commands::run(&cfg)?;
    let files = report::render(&cfg, &outcome)?;
    report::write(&cfg.out, &files)?;
    Ok(files.into_iter().map(|(n, _)| cfg.out.join(n).display().to_string()).collect())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(files) => {
            for f in files {
                println!("{f}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", serde_json::to_string_pretty(&e.report()).expect("report serializes"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
