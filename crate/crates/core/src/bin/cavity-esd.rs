use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cavity_esd::sweep::esd::{detect_esd_intervals, finite_intervals};
use cavity_esd::sweep::io::{write_grid, write_sweep_csv};
use cavity_esd::sweep::settings::{parse_grid, parse_list, Settings};
use cavity_esd::sweep::{run_sweep, RateUnit};
use cavity_esd::states::StateFamily;

/// A whole comma-separated list in one argument (an alias keeps clap from
/// treating it as a repeated flag).
type Values = Vec<f64>;

/// Concurrence of two qubits in a leaky cavity, swept over spontaneous-emission
/// rate and initial-state weight. Writes CSV rows to --out (or stdout) and a
/// dark-period summary to stderr.
#[derive(Parser, Debug)]
#[command(name = "cavity-esd", version)]
struct Cli {
    /// key = value settings file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_family)]
    state: Option<StateFamily>,
    /// α² values, comma separated
    #[arg(long, value_parser = |v: &str| parse_list("alpha2", v).map_err(|e| e.to_string()))]
    alpha2: Option<Values>,
    /// α² linspace as lo:hi:n
    #[arg(long, value_parser = |v: &str| parse_grid("alpha2-grid", v).map_err(|e| e.to_string()))]
    alpha2_grid: Option<(f64, f64, usize)>,
    #[arg(long)]
    theta: Option<f64>,
    /// Werner pure-state weight
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    gamma_cavity: Option<f64>,
    #[arg(long)]
    gamma0: Option<f64>,
    /// Spontaneous-emission rates, comma separated, in --rate-unit
    #[arg(long, value_parser = |v: &str| parse_list("gamma-s", v).map_err(|e| e.to_string()))]
    gamma_s: Option<Values>,
    /// Unit of --gamma-s: gamma0 or omega (required here or in --config)
    #[arg(long, value_parser = parse_unit)]
    rate_unit: Option<RateUnit>,
    /// Final scaled time t·γ₀ [default: 200]
    #[arg(long)]
    t_max: Option<f64>,
    /// Output intervals; the grid has steps + 1 times [default: 2000]
    #[arg(long)]
    steps: Option<usize>,
    /// Photon-number cutoff of the cavity mode [default: 3]
    #[arg(long)]
    fock_cutoff: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a dense (t, α²) concurrence grid
    #[arg(long)]
    emit_grid: Option<PathBuf>,
    /// Concurrence floor counted as dead [default: 1e-6]
    #[arg(long)]
    esd_threshold: Option<f64>,
    /// Fixed RK4 step [default: 1e-3]
    #[arg(long)]
    dt: Option<f64>,
    /// Use adaptive Dormand–Prince with this absolute tolerance
    #[arg(long)]
    adaptive_atol: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Raw density-matrix file replacing --state / --alpha2
    #[arg(long)]
    initial_state: Option<PathBuf>,
}

fn parse_family(v: &str) -> Result<StateFamily, String> {
    v.parse().map_err(|e: cavity_esd::Error| e.to_string())
}

fn parse_unit(v: &str) -> Result<RateUnit, String> {
    v.parse().map_err(|e: cavity_esd::Error| e.to_string())
}

impl Cli {
    fn into_settings(self) -> cavity_esd::Result<Settings> {
        let file = match &self.config {
            Some(p) => Settings::load(p)?,
            None => Settings::default(),
        };
        let flags = Settings {
            state: self.state,
            alpha2: self.alpha2,
            alpha2_grid: self.alpha2_grid,
            theta: self.theta,
            r: self.r,
            omega: self.omega,
            gamma_cavity: self.gamma_cavity,
            gamma0: self.gamma0,
            gamma_s: self.gamma_s,
            rate_unit: self.rate_unit,
            t_max: self.t_max,
            steps: self.steps,
            fock_cutoff: self.fock_cutoff,
            out: self.out,
            emit_grid: self.emit_grid,
            esd_threshold: self.esd_threshold,
            dt: self.dt,
            adaptive_atol: self.adaptive_atol,
            workers: self.workers,
            initial_state: self.initial_state,
        };
        Ok(file.overlay(flags))
    }
}

fn run(cli: Cli) -> cavity_esd::Result<()> {
    let plan = cli.into_settings()?.into_plan()?;
    let result = run_sweep(&plan.sweep)?;

    match &plan.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_sweep_csv(&result, &mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(std::io::stdout().lock());
            write_sweep_csv(&result, &mut w)?;
            w.flush()?;
        }
    }
    if let Some(path) = &plan.emit_grid {
        let mut w = BufWriter::new(File::create(path)?);
        write_grid(&result, &mut w)?;
        w.flush()?;
    }

    let mut err = std::io::stderr().lock();
    writeln!(err, "# gamma_s alpha2 dark_intervals finite open first_death max_trace_err min_eig")?;
    for cell in &result.cells {
        let iv = detect_esd_intervals(&result.times(cell), &result.concurrence(cell), plan.esd_threshold);
        let open = iv.iter().filter(|i| i.is_open()).count();
        let first = iv.first().map_or("-".to_string(), |i| format!("{:.4}", i.death));
        writeln!(
            err,
            "{:.6e} {:.6} {} {} {} {} {:.2e} {:.2e}",
            cell.gamma_s,
            cell.alpha2,
            iv.len(),
            finite_intervals(&iv).count(),
            open,
            first,
            cell.diagnostics.max_trace_error,
            cell.diagnostics.min_eigenvalue
        )?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cavity-esd: {e}");
            ExitCode::FAILURE
        }
    }
}
