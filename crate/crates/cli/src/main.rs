//! `rdctl`: run scenarios, reproduce the mode-count table, compare runs.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rdctl::backstepping::{select_n_and_r, DesignParams};
use rdctl::output::{write_event_log, write_plot_data, write_profiles_csv, write_report, write_trajectory_csv, PLOT_SCRIPT};
use rdctl::passive::compare_runs;
use rdctl::scenario::Scenario;
use rdctl::supervisor::RunOutput;
use rdctl::{Error, SpatialGrid};

/// Thetas of the reference mode-count table.
const TABLE_THETAS: [f64; 11] = [0.1, 3.0, 5.0, 6.0, 7.0, 8.0, 9.0, std::f64::consts::PI * std::f64::consts::PI, 10.0, 11.0, 12.0];

#[derive(Parser)]
#[command(name = "rdctl", version, about = "Regulation-triggered adaptive boundary control of a reaction-diffusion PDE")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its artifacts.
    Simulate {
        /// Scenario file (TOML); the built-in default when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Mode count N(θ) for the table thetas plus any extra values.
    Table1 {
        /// Scenario file supplying `p` and the design parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Extra theta values.
        #[arg(long = "theta", allow_negative_numbers = true)]
        thetas: Vec<f64>,
        /// Directory for table1.csv; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run two scenarios from the same plant and initial state and compare them.
    Compare {
        /// Scenario file; give exactly two.
        #[arg(long, required = true)]
        config: Vec<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Print the default scenario, or write both canonical scenarios to --out.
    DumpDefaults {
        /// Print the passive-identifier baseline instead.
        #[arg(long)]
        passive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Record every K-th solver step.
    #[arg(long)]
    stride: Option<usize>,
    /// Number of grid points.
    #[arg(long)]
    grid: Option<usize>,
    /// Time step.
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
}

impl Common {
    fn apply(&self, s: &mut Scenario) -> Result<(), Failure> {
        if let Some(k) = self.stride {
            s.output.stride = k;
        }
        if let Some(n) = self.grid {
            s.solver.grid = SpatialGrid::new(n).map_err(|e| Failure::new(3, e.to_string()))?;
        }
        if let Some(dt) = self.dt {
            s.solver.dt = dt;
        }
        Ok(())
    }
}

/// Failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::new(1, format!("i/o error: {e}"))
    }
}

fn code_for(e: &Error) -> u8 {
    match e {
        Error::BlowUp { .. } => 4,
        _ => 3,
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::new(2, format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::new(2, format!("cannot parse {}: {e}", path.display())))
}

fn load_or_default(path: Option<&Path>) -> Result<Scenario, Failure> {
    path.map_or_else(|| Ok(Scenario::default()), load)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_plot_bundle(dir: &Path, runs: &[(&str, &RunOutput)]) -> Result<(), Failure> {
    let mut w = create(dir, "plot_data.csv")?;
    write_plot_data(&mut w, runs)?;
    w.flush()?;
    fs::write(dir.join("plot.py"), PLOT_SCRIPT)?;
    Ok(())
}

fn write_run(dir: &Path, prefix: &str, scenario: &Scenario, run: &RunOutput) -> Result<(), Failure> {
    let mut w = create(dir, &format!("{prefix}trajectory.csv"))?;
    write_trajectory_csv(&mut w, &run.trajectory)?;
    w.flush()?;
    if scenario.mode.is_adaptive() {
        let mut w = create(dir, &format!("{prefix}events.log"))?;
        write_event_log(&mut w, &run.events)?;
        w.flush()?;
    }
    if scenario.output.profiles {
        let mut w = create(dir, &format!("{prefix}profiles.csv"))?;
        write_profiles_csv(&mut w, &run.trajectory, &run.grid)?;
        w.flush()?;
    }
    Ok(())
}

fn blow_up_check(run: &RunOutput) -> Result<(), Failure> {
    match &run.failure {
        Some(e) => Err(Failure::new(code_for(e), format!("run stopped: {e} (partial artifacts written)"))),
        None => Ok(()),
    }
}

fn prepare(path: Option<&Path>, common: &Common) -> Result<Scenario, Failure> {
    let mut s = load_or_default(path)?;
    common.apply(&mut s)?;
    s.validate().map_err(|e| Failure::new(3, format!("invalid scenario: {e}")))?;
    Ok(s)
}

fn simulate(config: Option<&Path>, common: &Common) -> Result<(), Failure> {
    let scenario = prepare(config, common)?;
    let run = scenario.run().map_err(|e| Failure::new(code_for(&e), e.to_string()))?;
    fs::create_dir_all(&common.out)?;
    write_run(&common.out, "", &scenario, &run)?;
    write_plot_bundle(&common.out, &[("run", &run)])?;
    blow_up_check(&run)
}

fn table1(config: Option<&Path>, extra: &[f64], out: Option<&Path>) -> Result<(), Failure> {
    let scenario = load_or_default(config)?;
    let design = match scenario.design {
        rdctl::DesignBackend::Backstepping(d) => d,
        rdctl::DesignBackend::ReducedModel(_) => DesignParams::default(),
    };
    let p = scenario.plant.p;
    design.validate(p).map_err(|e| Failure::new(3, e.to_string()))?;
    let mut text = String::from("theta,N\n");
    for &theta in TABLE_THETAS.iter().chain(extra) {
        let s = select_n_and_r(theta, &design, p).map_err(|e| Failure::new(3, e.to_string()))?;
        text.push_str(&format!("{theta:e},{}\n", s.n_modes()));
    }
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("table1.csv"), text)?;
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn compare(paths: &[PathBuf], common: &Common) -> Result<(), Failure> {
    if paths.len() != 2 {
        return Err(Failure::new(2, format!("compare needs exactly two --config files, got {}", paths.len())));
    }
    let a = prepare(Some(&paths[0]), common)?;
    let b = prepare(Some(&paths[1]), common)?;
    if a.plant != b.plant || a.initial != b.initial || a.solver.grid != b.solver.grid {
        return Err(Failure::new(3, "scenarios differ in plant, initial condition or grid"));
    }
    let ra = a.run().map_err(|e| Failure::new(code_for(&e), e.to_string()))?;
    let rb = b.run().map_err(|e| Failure::new(code_for(&e), e.to_string()))?;
    fs::create_dir_all(&common.out)?;
    write_run(&common.out, "a_", &a, &ra)?;
    write_run(&common.out, "b_", &b, &rb)?;
    write_plot_bundle(&common.out, &[("a", &ra), ("b", &rb)])?;
    let report = compare_runs(&ra, &rb).map_err(|e| Failure::new(3, e.to_string()))?;
    let mut w = create(&common.out, "report.txt")?;
    write_report(&mut w, &report)?;
    w.flush()?;
    blow_up_check(&ra)?;
    blow_up_check(&rb)
}

fn to_toml(s: &Scenario) -> Result<String, Failure> {
    toml::to_string(s).map_err(|e| Failure::new(1, format!("cannot serialise scenario: {e}")))
}

fn dump_defaults(passive: bool, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join("headline.toml"), to_toml(&Scenario::default())?)?;
            fs::write(dir.join("passive.toml"), to_toml(&Scenario::passive_baseline())?)?;
        }
        None => {
            let s = if passive { Scenario::passive_baseline() } else { Scenario::default() };
            io::stdout().write_all(to_toml(&s)?.as_bytes())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Simulate { config, common } => simulate(config.as_deref(), common),
        Command::Table1 { config, thetas, out } => table1(config.as_deref(), thetas, out.as_deref()),
        Command::Compare { config, common } => compare(config, common),
        Command::DumpDefaults { passive, out } => dump_defaults(*passive, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("rdctl: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
