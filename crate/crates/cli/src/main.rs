use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use gemcsm_core::csm::StateClass;
use gemcsm_core::scan::{
    emit_plot_data, emit_spectrum_plot, emit_tilde_view, read_csv, read_spectrum_dump, run_scan, BetaGrid, PlotKind,
    PotentialSpec, PreparedScan, RunConfig, ScanMode, ScanOptions, ScanOutcome,
};
use gemcsm_core::twobody::{default_two_body_basis, solve_two_body, tune_depth, GaussPotential, LevelLabel, Sector, TuneRequest};
use gemcsm_core::{extract_resonance, Dimension, ScalingKind};

#[derive(Parser)]
#[command(name = "gemcsm", version, about = "Three-body resonances of B + B + X with Gaussian BX interactions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Two-body levels and depth tuning.
    Twobody {
        #[command(subcommand)]
        command: TwoBodyCommand,
    },
    /// Classified complex-scaled spectrum at one mass ratio.
    Spectrum(SpectrumArgs),
    /// Width and lifetime scan over the mass ratio at fixed depth.
    Scan(ScanArgs),
    /// Scan with the depth retuned per mass ratio so the tilde-scaled level is -0.1.
    TildeScan(ScanArgs),
    /// Plot-ready text from scan output or spectrum dumps.
    Plotdata(PlotArgs),
    /// Print the default configuration for a dimension as TOML.
    Config {
        #[arg(long, default_value = "3d")]
        dim: Dimension,
    },
}

#[derive(Subcommand)]
enum TwoBodyCommand {
    /// Bound levels of the two-body problem.
    Solve {
        #[arg(long)]
        dim: Dimension,
        #[arg(long, allow_hyphen_values = true)]
        v0: f64,
        #[arg(long, value_enum, default_value = "both")]
        sector: SectorArg,
        #[arg(long)]
        json: bool,
    },
    /// Find the depth placing a level at a target energy.
    Tune {
        #[arg(long)]
        dim: Dimension,
        /// Level label such as 2s or 1p.
        #[arg(long)]
        level: LevelLabel,
        #[arg(long, allow_hyphen_values = true)]
        target: f64,
        #[arg(long, allow_hyphen_values = true)]
        guess: Option<f64>,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SectorArg {
    Even,
    Odd,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalingArg {
    Prime,
    Tilde,
}

/// Configuration file plus per-parameter overrides.
#[derive(Args, Clone)]
struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dimension when no configuration file is given.
    #[arg(long)]
    dim: Option<Dimension>,
    /// Scaling angles in degrees (repeatable).
    #[arg(long = "theta")]
    thetas: Vec<f64>,
    /// Fixed interaction depth v0'.
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<f64>,
    /// Tune the depth so this level (e.g. 2s) sits at --tune-energy.
    #[arg(long, requires = "tune_energy")]
    tune_level: Option<LevelLabel>,
    #[arg(long, allow_hyphen_values = true)]
    tune_energy: Option<f64>,
    #[arg(long)]
    pair_n: Option<usize>,
    #[arg(long)]
    pair_nu_first: Option<f64>,
    #[arg(long)]
    pair_nu_last: Option<f64>,
    #[arg(long)]
    third_n: Option<usize>,
    #[arg(long)]
    third_nu_first: Option<f64>,
    #[arg(long)]
    third_nu_last: Option<f64>,
    /// Oscillation parameter of complex-ranged functions (0 disables them).
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long, env = "GEMCSM_WORKERS")]
    workers: Option<usize>,
}

impl ConfigArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut c = match (&self.config, self.dim) {
            (Some(p), _) => RunConfig::from_path(p).with_context(|| format!("reading {}", p.display()))?,
            (None, Some(d)) => RunConfig::production(d),
            (None, None) => bail!("either --config or --dim is required"),
        };
        if let (Some(_), Some(d)) = (&self.config, self.dim) {
            if d != c.dimension {
                bail!("--dim {d} contradicts the configuration file ({})", c.dimension);
            }
        }
        if !self.thetas.is_empty() {
            c.thetas_deg = self.thetas.clone();
        }
        if let Some(v) = self.v0 {
            c.potential = PotentialSpec::Fixed { v0_prime: v };
        }
        if let (Some(level), Some(energy)) = (self.tune_level, self.tune_energy) {
            c.potential = PotentialSpec::Tune { level, energy };
        }
        let b = &mut c.basis;
        if let Some(n) = self.pair_n {
            b.pair.n_max = n;
        }
        if let Some(v) = self.pair_nu_first {
            b.pair.nu_first = v;
        }
        if let Some(v) = self.pair_nu_last {
            b.pair.nu_last = v;
        }
        if let Some(n) = self.third_n {
            b.third.n_max = n;
        }
        if let Some(v) = self.third_nu_first {
            b.third.nu_first = v;
        }
        if let Some(v) = self.third_nu_last {
            b.third.nu_last = v;
        }
        if let Some(w) = self.omega {
            let w = (w > 0.0).then_some(w);
            b.pair.complex_omega = w;
            b.third.complex_omega = w;
        }
        if self.cache_dir.is_some() {
            c.cache_dir = self.cache_dir.clone();
        }
        if self.workers.is_some() {
            c.workers = self.workers;
        }
        Ok(c)
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    beta: f64,
    /// Write the classified spectrum as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write fig2-style plot data.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Also list continuum eigenvalues.
    #[arg(long)]
    all: bool,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Output directory for CSV/JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Only compute mass ratios missing from an existing output.
    #[arg(long)]
    resume: bool,
    /// Explicit mass ratios (repeatable); overrides the grid.
    #[arg(long = "beta")]
    betas: Vec<f64>,
    #[arg(long)]
    beta_min: Option<f64>,
    #[arg(long)]
    beta_max: Option<f64>,
    #[arg(long)]
    beta_count: Option<usize>,
    #[arg(long)]
    refine_levels: Option<usize>,
    #[arg(long, value_enum)]
    scaling: Option<ScalingArg>,
    /// Families to track, e.g. "(1D,1p)" (repeatable).
    #[arg(long = "family")]
    families: Vec<String>,
    #[arg(long)]
    dump_spectra: bool,
}

impl ScanArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut c = self.config.load()?;
        if !self.betas.is_empty() {
            c.beta_grid = BetaGrid::List { values: self.betas.clone() };
        } else if self.beta_min.is_some() || self.beta_max.is_some() || self.beta_count.is_some() {
            let (min, max, count) = match c.beta_grid {
                BetaGrid::Log { min, max, count } => (min, max, count),
                BetaGrid::List { .. } => (0.05, 20.0, 80),
            };
            c.beta_grid = BetaGrid::Log {
                min: self.beta_min.unwrap_or(min),
                max: self.beta_max.unwrap_or(max),
                count: self.beta_count.unwrap_or(count),
            };
        }
        if let Some(r) = self.refine_levels {
            c.refine_levels = r;
        }
        match self.scaling {
            Some(ScalingArg::Prime) => c.scaling = ScalingKind::Prime,
            Some(ScalingArg::Tilde) => c.scaling = ScalingKind::Tilde,
            None => {}
        }
        if !self.families.is_empty() {
            c.families = self.families.iter().map(|f| f.parse()).collect::<Result<_, _>>()?;
        }
        if self.out.is_some() {
            c.output_dir = self.out.clone();
        }
        if self.dump_spectra {
            c.dump_spectra = true;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    kind: PlotKind,
    /// Scan CSV (fig3, fig4) or spectrum JSON dumps (fig2, repeatable).
    #[arg(long = "input", required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Twobody { command } => twobody(command),
        Command::Spectrum(a) => spectrum(a),
        Command::Scan(a) => {
            let c = a.load()?;
            report(run_scan(&c, &ScanOptions { resume: a.resume })?)
        }
        Command::TildeScan(a) => {
            let c = a.load()?;
            report(emit_tilde_view(&c, &ScanOptions { resume: a.resume })?)
        }
        Command::Plotdata(a) => plotdata(a),
        Command::Config { dim } => {
            print!("{}", RunConfig::production(dim).to_toml_string()?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn twobody(cmd: TwoBodyCommand) -> Result<ExitCode> {
    match cmd {
        TwoBodyCommand::Solve { dim, v0, sector, json } => {
            let sectors = match sector {
                SectorArg::Even => vec![Sector::Even],
                SectorArg::Odd => vec![Sector::Odd],
                SectorArg::Both => vec![Sector::Even, Sector::Odd],
            };
            let pot = GaussPotential::new(v0);
            let spectra = sectors
                .into_iter()
                .map(|s| solve_two_body(&pot, dim, s, &default_two_body_basis()))
                .collect::<Result<Vec<_>, _>>()?;
            if json {
                println!("{}", serde_json::to_string_pretty(&spectra)?);
            } else {
                for s in &spectra {
                    for (label, e) in s.labelled() {
                        println!("{label} {e:.10}");
                    }
                }
            }
        }
        TwoBodyCommand::Tune { dim, level, target, guess, tolerance } => {
            let mut req = TuneRequest::new(dim, level.sector, level.n as usize, target);
            req.initial_guess = guess;
            req.tolerance = tolerance;
            let pot = tune_depth(&req, &default_two_body_basis())?;
            println!("{}", pot.v0_prime);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn spectrum(a: SpectrumArgs) -> Result<ExitCode> {
    let c = a.config.load()?;
    let prepared = PreparedScan::new(c.clone(), ScanMode::Prime)?;
    let dump = prepared.spectrum(a.beta)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "beta {}  v0' {}  dimension {}", a.beta, dump.v0_prime, dump.dimension)?;
    for (label, e) in &dump.thresholds.levels {
        writeln!(out, "threshold {label} {e:.8}")?;
    }
    for s in &dump.spectrum.states {
        let class = match s.class {
            StateClass::Bound => "bound",
            _ => "resonance",
        };
        writeln!(out, "{class:9} E' = {:.8}  Gamma' = {:.4e}  spread = {:.2e}", s.energy.e_r, s.energy.gamma, s.dispersion)?;
    }
    if a.all {
        for p in &dump.spectrum.points {
            writeln!(out, "theta {:.3} {:.8} {:.8} {:?}", p.theta.to_degrees(), p.energy.e_r, -0.5 * p.energy.gamma, p.class)?;
        }
    }
    for f in &c.families {
        match extract_resonance(*f, &dump.spectrum, &dump.thresholds, None) {
            Ok(r) => writeln!(out, "family {f}: E_r' = {:.8}  Gamma' = {:.6e}  accuracy = {:.1e}", r.e_r, r.gamma, r.accuracy)?,
            Err(e) => writeln!(out, "family {f}: {e}")?,
        }
    }
    if let Some(p) = &a.json {
        std::fs::write(p, serde_json::to_vec_pretty(&dump)?)?;
    }
    if let Some(p) = &a.plot {
        let mut f = std::fs::File::create(p)?;
        emit_spectrum_plot(std::slice::from_ref(&dump), &mut f)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn report(outcome: ScanOutcome) -> Result<ExitCode> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", gemcsm_core::scan::CSV_HEADER)?;
    for r in &outcome.records {
        writeln!(out, "{}", gemcsm_core::scan::csv_line(r))?;
    }
    if outcome.all_ok() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{} mass ratio(s) failed", outcome.failed_betas.len());
        Ok(ExitCode::from(2))
    }
}

fn plotdata(a: PlotArgs) -> Result<ExitCode> {
    let mut sink: Box<dyn Write> = match &a.output {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    match a.kind {
        PlotKind::Fig2 => {
            let dumps = a.inputs.iter().map(|p| read_spectrum_dump(p)).collect::<Result<Vec<_>, _>>()?;
            emit_spectrum_plot(&dumps, &mut sink)?;
        }
        kind => {
            let mut records = Vec::new();
            for p in &a.inputs {
                records.extend(read_csv(p).with_context(|| format!("reading {}", p.display()))?);
            }
            emit_plot_data(&records, kind, &mut sink)?;
        }
    }
    sink.flush()?;
    Ok(ExitCode::SUCCESS)
}
