//! `chiralcav` — command-line front end for the chiral-cavity simulator.
//!
//! Four subcommands: `spectrum` (closed-form levels next to numeric sector
//! eigenvalues), `evolve` (mean photon numbers along a time grid, closed
//! and numeric routes side by side), `asymmetry` (directional exchange
//! contrast over one period), and `verify` (the full self-check suite,
//! optionally with a deliberately injected fault).
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad usage or config.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use chiralcav_core::analysis::{self, AsymmetryReport, Fault, VerificationReport};
use chiralcav_core::dynamics;
use chiralcav_core::propagator;
use chiralcav_core::{FockBasis, FockState, ModelParams};

#[derive(Parser)]
#[command(
    name = "chiralcav",
    version,
    about = "Two resonant cavities coupled through a non-reciprocal mirror",
    long_about = "Spectra, photon dynamics, directional exchange asymmetry, and \
                  self-verification for a pair of resonant cavities coupled through \
                  a non-reciprocal (one-way-biased) mirror. All commands operate in \
                  the exchange regime omega_ab * omega_ba > 0, where the closed-form \
                  solution exists and is cross-checked against numeric propagation."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normal-mode spectrum next to numerically computed sector eigenvalues
    Spectrum(CommonArgs),
    /// Evolve mean photon numbers from a Fock state; closed and numeric routes
    Evolve(CommonArgs),
    /// Directional exchange asymmetry sampled over one period
    Asymmetry(CommonArgs),
    /// Run the verification suite and report every check
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON config file; built-in defaults apply when omitted
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Write output here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Override the basis truncation (total photon number) from the config
    #[arg(long, value_name = "N")]
    n_max: Option<u32>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Deliberately mis-build an operator to demonstrate the checks bite
    #[arg(long, value_enum, value_name = "FAULT")]
    inject_fault: Option<FaultArg>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, ValueEnum)]
enum FaultArg {
    /// Mismatched b^dag coefficient in the alpha-raising operator
    AlphaPlusMiscoupling,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Fault {
        match f {
            FaultArg::AlphaPlusMiscoupling => Fault::AlphaPlusMiscoupling,
        }
    }
}

/// Run parameters, read from a flat JSON object. Every field has a default,
/// so `{}` (or no config at all) runs the reference setup: omega0 = 1,
/// couplings 0.09 / 0.04, truncation at 6 total photons, one photon
/// starting in cavity A.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunConfig {
    omega0: f64,
    omega_ab: f64,
    omega_ba: f64,
    n_total_max: u32,
    initial_n_a: u32,
    initial_n_b: u32,
    t_start: f64,
    /// End of the evolve grid; one full exchange period when omitted.
    t_end: Option<f64>,
    t_samples: usize,
    /// Sample count for the asymmetry / verification grid (midpoints of one
    /// period, chosen to avoid the exchange nodes).
    grid_samples: usize,
    /// Time for the headline asymmetry report; the middle grid point when
    /// omitted.
    reference_time: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            omega0: 1.0,
            omega_ab: 0.09,
            omega_ba: 0.04,
            n_total_max: 6,
            initial_n_a: 1,
            initial_n_b: 0,
            t_start: 0.0,
            t_end: None,
            t_samples: 129,
            grid_samples: 33,
            reference_time: None,
        }
    }
}

impl RunConfig {
    /// Load the config (defaults when no file is given), fold in the --n-max
    /// override, and validate the combined result so the flag is held to the
    /// same limits as the file value.
    fn load(path: Option<&PathBuf>, n_max_override: Option<u32>) -> anyhow::Result<RunConfig> {
        let mut config = match path {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("io: reading {}", path.display()))?;
                serde_json::from_str::<RunConfig>(&text)
                    .map_err(|e| anyhow!("config: {e}"))?
            }
            None => RunConfig::default(),
        };
        if let Some(n_max) = n_max_override {
            config.n_total_max = n_max;
        }
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.n_total_max == 0 || self.n_total_max > 40 {
            return Err(anyhow!("config: n_total_max must be in 1..=40"));
        }
        if self.t_samples < 2 {
            return Err(anyhow!("config: t_samples must be at least 2"));
        }
        if self.grid_samples == 0 || self.grid_samples > 10_000 {
            return Err(anyhow!("config: grid_samples must be in 1..=10000"));
        }
        if !self.t_start.is_finite() {
            return Err(anyhow!("config: t_start must be finite"));
        }
        if let Some(t_end) = self.t_end {
            if !t_end.is_finite() || t_end <= self.t_start {
                return Err(anyhow!("config: t_end must be finite and after t_start"));
            }
        }
        if self.initial_n_a + self.initial_n_b > self.n_total_max {
            return Err(anyhow!(
                "config: initial state ({}, {}) exceeds the truncation {}",
                self.initial_n_a,
                self.initial_n_b,
                self.n_total_max
            ));
        }
        Ok(())
    }

    fn params(&self) -> anyhow::Result<ModelParams> {
        ModelParams::new(self.omega0, self.omega_ab, self.omega_ba).map_err(core_err)
    }

    fn sampling_grid(&self, g_eff: f64) -> Vec<f64> {
        analysis::asymmetry_sampling_grid(g_eff, self.grid_samples)
    }
}

fn core_err(e: chiralcav_core::Error) -> anyhow::Error {
    anyhow!("{}: {e}", e.category())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Spectrum(args) => run_spectrum(&args),
        Command::Evolve(args) => run_evolve(&args),
        Command::Asymmetry(args) => run_asymmetry(&args),
        Command::Verify(args) => run_verify(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn emit(args: &CommonArgs, content: &str) -> anyhow::Result<()> {
    match &args.out {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("io: writing {}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Full-precision float for CSV cells; round-trips exactly.
fn cell(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(cell).unwrap_or_default()
}

fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(value).context("io: encoding json")?;
    text.push('\n');
    Ok(text)
}

// --- spectrum ---------------------------------------------------------------

#[derive(Serialize)]
struct SpectrumRow {
    n_alpha: u32,
    n_beta: u32,
    energy_closed: f64,
    energy_numeric: f64,
    abs_residual: f64,
    negative_energy: bool,
}

#[derive(Serialize)]
struct SpectrumOutput {
    omega0: f64,
    omega_ab: f64,
    omega_ba: f64,
    n_total_max: u32,
    levels: Vec<SpectrumRow>,
}

fn run_spectrum(args: &CommonArgs) -> anyhow::Result<ExitCode> {
    let config = RunConfig::load(args.config.as_ref(), args.n_max)?;
    let n_max = config.n_total_max;
    let params = config.params()?;
    let entries = dynamics::spectrum(&params, n_max).map_err(core_err)?;

    // pair each closed level with its numeric eigenvalue sector by sector;
    // within a sector both lists are matched in ascending energy order
    let mut rows: Vec<SpectrumRow> = entries
        .iter()
        .map(|e| SpectrumRow {
            n_alpha: e.n_alpha,
            n_beta: e.n_beta,
            energy_closed: e.energy,
            energy_numeric: f64::NAN,
            abs_residual: f64::NAN,
            negative_energy: e.negative_energy,
        })
        .collect();
    for n in 0..=n_max {
        let numeric = propagator::numeric_sector_eigenvalues(&params, n).map_err(core_err)?;
        let mut sector: Vec<usize> = (0..rows.len())
            .filter(|&i| rows[i].n_alpha + rows[i].n_beta == n)
            .collect();
        sector.sort_by(|&i, &j| {
            rows[i]
                .energy_closed
                .partial_cmp(&rows[j].energy_closed)
                .expect("finite energies")
        });
        for (&i, ev) in sector.iter().zip(&numeric) {
            rows[i].energy_numeric = ev.re;
            rows[i].abs_residual = (ev.re - rows[i].energy_closed).abs();
        }
    }

    let content = match args.format {
        Format::Csv => {
            let mut out =
                String::from("n_alpha,n_beta,energy_closed,energy_numeric,abs_residual,negative_energy\n");
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.n_alpha,
                    r.n_beta,
                    cell(r.energy_closed),
                    cell(r.energy_numeric),
                    cell(r.abs_residual),
                    r.negative_energy
                )
                .unwrap();
            }
            out
        }
        Format::Json => to_json(&SpectrumOutput {
            omega0: params.omega0(),
            omega_ab: params.omega_ab(),
            omega_ba: params.omega_ba(),
            n_total_max: n_max,
            levels: rows,
        })?,
    };
    emit(args, &content)?;
    Ok(ExitCode::SUCCESS)
}

// --- evolve -----------------------------------------------------------------

#[derive(Serialize)]
struct EvolveRow {
    t: f64,
    mean_n_a_closed: f64,
    mean_n_b_closed: f64,
    mean_n_a_numeric: f64,
    mean_n_b_numeric: f64,
    conservation_residual: f64,
    schrodinger_norm: f64,
}

#[derive(Serialize)]
struct EvolveOutput {
    omega0: f64,
    omega_ab: f64,
    omega_ba: f64,
    n_total_max: u32,
    initial_n_a: u32,
    initial_n_b: u32,
    rows: Vec<EvolveRow>,
}

fn run_evolve(args: &CommonArgs) -> anyhow::Result<ExitCode> {
    let config = RunConfig::load(args.config.as_ref(), args.n_max)?;
    let n_max = config.n_total_max;
    let params = config.params()?;
    let g_eff = params.g_eff().map_err(core_err)?;
    let initial = FockState::new(config.initial_n_a, config.initial_n_b);
    let t_end = config
        .t_end
        .unwrap_or(config.t_start + 2.0 * std::f64::consts::PI / g_eff);
    let times = propagator::linspace(config.t_start, t_end, config.t_samples);

    let basis = FockBasis::new(n_max);
    let series = propagator::evolve_observables(&params, initial, &times, &basis).map_err(core_err)?;
    let mut rows = Vec::with_capacity(times.len());
    for (&t, rec) in series.times.iter().zip(&series.values) {
        let (mean_a, mean_b) = dynamics::expected_photons(&params, initial, t).map_err(core_err)?;
        rows.push(EvolveRow {
            t,
            mean_n_a_closed: mean_a,
            mean_n_b_closed: mean_b,
            mean_n_a_numeric: rec.mean_n_a,
            mean_n_b_numeric: rec.mean_n_b,
            conservation_residual: rec.conservation_residual,
            schrodinger_norm: rec.schrodinger_norm,
        });
    }

    let content = match args.format {
        Format::Csv => {
            let mut out = String::from(
                "t,mean_n_a_closed,mean_n_b_closed,mean_n_a_numeric,mean_n_b_numeric,conservation_residual,schrodinger_norm\n",
            );
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    cell(r.t),
                    cell(r.mean_n_a_closed),
                    cell(r.mean_n_b_closed),
                    cell(r.mean_n_a_numeric),
                    cell(r.mean_n_b_numeric),
                    cell(r.conservation_residual),
                    cell(r.schrodinger_norm)
                )
                .unwrap();
            }
            out
        }
        Format::Json => to_json(&EvolveOutput {
            omega0: params.omega0(),
            omega_ab: params.omega_ab(),
            omega_ba: params.omega_ba(),
            n_total_max: n_max,
            initial_n_a: initial.n_a,
            initial_n_b: initial.n_b,
            rows,
        })?,
    };
    emit(args, &content)?;
    Ok(ExitCode::SUCCESS)
}

// --- asymmetry ----------------------------------------------------------------

#[derive(Serialize)]
struct AsymmetryOutput {
    omega0: f64,
    omega_ab: f64,
    omega_ba: f64,
    from_n_a: u32,
    from_n_b: u32,
    reference_time: f64,
    reference_report: AsymmetryReport,
    samples: Vec<AsymmetryReport>,
}

fn run_asymmetry(args: &CommonArgs) -> anyhow::Result<ExitCode> {
    let config = RunConfig::load(args.config.as_ref(), args.n_max)?;
    let params = config.params()?;
    let g_eff = params.g_eff().map_err(core_err)?;
    let from = FockState::new(config.initial_n_a, config.initial_n_b);
    let grid = config.sampling_grid(g_eff);
    let reference_time = config.reference_time.unwrap_or(grid[grid.len() / 2]);

    let reference_report =
        analysis::exchange_asymmetry(&params, from, reference_time).map_err(core_err)?;
    let samples = grid
        .iter()
        .map(|&t| analysis::exchange_asymmetry(&params, from, t).map_err(core_err))
        .collect::<anyhow::Result<Vec<_>>>()?;

    let content = match args.format {
        Format::Csv => {
            let mut out =
                String::from("t,prob_forward,prob_backward,probability_ratio,db_asymmetry\n");
            for (t, rep) in grid.iter().zip(&samples) {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    cell(*t),
                    cell(rep.prob_forward),
                    cell(rep.prob_backward),
                    opt_cell(rep.probability_ratio),
                    opt_cell(rep.db_asymmetry)
                )
                .unwrap();
            }
            out
        }
        Format::Json => to_json(&AsymmetryOutput {
            omega0: params.omega0(),
            omega_ab: params.omega_ab(),
            omega_ba: params.omega_ba(),
            from_n_a: from.n_a,
            from_n_b: from.n_b,
            reference_time,
            reference_report,
            samples,
        })?,
    };
    emit(args, &content)?;
    Ok(ExitCode::SUCCESS)
}

// --- verify -------------------------------------------------------------------

fn verify_csv(report: &VerificationReport) -> String {
    let mut out = String::from("name,residual,tolerance,passed\n");
    for c in &report.checks {
        writeln!(out, "{},{},{},{}", c.name, cell(c.residual), cell(c.tolerance), c.passed)
            .unwrap();
    }
    out
}

fn run_verify(args: &VerifyArgs) -> anyhow::Result<ExitCode> {
    let config = RunConfig::load(args.common.config.as_ref(), args.common.n_max)?;
    let n_max = config.n_total_max;
    let params = config.params()?;
    let g_eff = params.g_eff().map_err(core_err)?;
    let grid = config.sampling_grid(g_eff);
    let fault = args.inject_fault.map(Fault::from);

    let report =
        analysis::run_verification_with(&params, n_max, &grid, fault).map_err(core_err)?;

    let content = match args.common.format {
        Format::Csv => verify_csv(&report),
        Format::Json => to_json(&report)?,
    };
    emit(&args.common, &content)?;

    if report.all_passed {
        Ok(ExitCode::SUCCESS)
    } else {
        let names: Vec<_> = report.failed().map(|c| c.name).collect();
        eprintln!(
            "error: verification: {} check(s) failed: {}",
            names.len(),
            names.join(", ")
        );
        Ok(ExitCode::FAILURE)
    }
}
