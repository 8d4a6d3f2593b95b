//! Command-line front end: named scenario runs, config-described experiments
//! and one subcommand per core operation.

pub mod config;
pub mod parse;
pub mod pipeline;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use negligible_core::connection::{parallel_transport, ConnectionForm, SampledSection};
use negligible_core::counterexamples::{scenario, ExpectedEvidence, REGISTRY};
use negligible_core::extension::{detect_jump, extend_slab, maximal_extension_scan};
use negligible_core::numfmt::num;
use negligible_core::sets::{complement_components, dyadic_decompose, fat_cantor_build, Grid, ObstacleSet, OpenBox};
use num_traits::ToPrimitive;

use config::{Format, RunConfig, Target};
use pipeline::run_scenario;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "NEGLIGIBLE_OUT";
pub const DEFAULT_OUT: &str = "negligible-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] negligible_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Parser, Debug)]
#[command(name = "negligible", version, about = "Parallel transport and extension of parallel sections across thin sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a named scenario or a config file and compare with the expected verdict.
    Run(RunArgs),
    /// Parallel transport of a vector along a path.
    Transport(TransportArgs),
    /// Half-slab extension of a scenario's section.
    Extend(ExtendArgs),
    /// Maximal-extension scan of a scenario's section.
    Scan(ScanArgs),
    /// One-sided limits of a scenario's section across a hyperplane.
    Jump(JumpArgs),
    /// Fat Cantor set with measure above a target.
    Fatcantor(FatCantorArgs),
    /// Dyadic cube decomposition of a box.
    Decompose(DecomposeArgs),
    /// Connected components of a grid complement.
    Components(ComponentsArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Cells per axis.
    #[arg(long)]
    pub res: Option<usize>,
    /// Integrator step.
    #[arg(long)]
    pub step: Option<f64>,
    /// Output directory; defaults to $NEGLIGIBLE_OUT or ./negligible-out.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    /// Registry scenario name.
    #[arg(required_unless_present = "config")]
    pub scenario: Option<String>,
    /// Config file (key = value with [section] headers).
    #[arg(long, conflicts_with = "scenario")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Assert covariant residuals on every axis.
    #[arg(long, conflicts_with = "assert_c0_only")]
    pub assert_c1: bool,
    /// Run the C1 variant of cantor-c0 under the default residual policy.
    #[arg(long)]
    pub assert_c0_only: bool,
    /// Scan window in nodes.
    #[arg(long)]
    pub window: Option<usize>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug)]
pub struct TransportArgs {
    /// standard[:rank], constant:<entries>;..., or scenario:<name>.
    #[arg(long, default_value = "standard", allow_hyphen_values = true)]
    pub connection: String,
    /// Box `lo,hi;lo,hi`; defaults to the scenario box or (-1000, 1000)^n.
    #[arg(long = "box", allow_hyphen_values = true)]
    pub bounds: Option<String>,
    /// segment:(a)->(b) or polyline:(p0)->(p1)->...
    #[arg(long, allow_hyphen_values = true)]
    pub path: String,
    /// Initial vector, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    pub v0: String,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
}

#[derive(Args, Debug)]
pub struct ExtendArgs {
    #[arg(long)]
    pub scenario: String,
    #[arg(long)]
    pub dim: Option<usize>,
    /// Base coordinate on the slab axis.
    #[arg(long, allow_hyphen_values = true)]
    pub a1: Option<f64>,
    /// auto, all or skip-thin.
    #[arg(long, default_value = "auto")]
    pub policy: String,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long)]
    pub scenario: String,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = 8)]
    pub window: usize,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Args, Debug)]
pub struct JumpArgs {
    #[arg(long)]
    pub scenario: String,
    #[arg(long)]
    pub dim: Option<usize>,
    /// 1-based axis; defaults to the scenario's.
    #[arg(long)]
    pub axis: Option<usize>,
    /// Base point, comma-separated; defaults to the scenario's.
    #[arg(long, allow_hyphen_values = true)]
    pub base: Option<String>,
    /// Decreasing offsets, comma-separated.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
}

#[derive(Args, Debug)]
pub struct FatCantorArgs {
    /// `lo,hi`
    #[arg(long, allow_hyphen_values = true)]
    pub ambient: String,
    #[arg(long)]
    pub target: f64,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    /// `lo,hi;lo,hi;...`
    #[arg(long = "box", allow_hyphen_values = true)]
    pub bounds: String,
    #[arg(long, default_value_t = 3)]
    pub level: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ComponentsArgs {
    #[arg(long)]
    pub obstacle: String,
    /// Defaults to the unit cube of the obstacle's dimension (at least 2).
    #[arg(long = "box", allow_hyphen_values = true)]
    pub bounds: Option<String>,
    #[arg(long, default_value_t = 64)]
    pub res: usize,
    #[arg(long, default_value_t = 40)]
    pub depth: u32,
}

/// Output directory from the flag, the environment, or the default.
pub fn out_dir(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    let p = dir.join(name);
    fs::write(&p, contents)?;
    Ok(p)
}

/// Result of one invocation: text for stdout and the exit code.
#[derive(Debug)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, code: EXIT_OK }
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn run_cli<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return Outcome {
                stdout: e.render().to_string(),
                code,
            };
        }
    };
    match execute(cli.command) {
        Ok(o) => o,
        Err(e) => Outcome {
            stdout: format!("error: {e}\n"),
            code: EXIT_USAGE,
        },
    }
}

pub fn execute(cmd: Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Run(a) => run(a),
        Command::Transport(a) => transport(a),
        Command::Extend(a) => extend(a),
        Command::Scan(a) => scan(a),
        Command::Jump(a) => jump(a),
        Command::Fatcantor(a) => fatcantor(a),
        Command::Decompose(a) => decompose(a),
        Command::Components(a) => components(a),
    }
}

fn unknown_scenario(name: &str) -> CliError {
    CliError::Usage(format!(
        "unknown scenario {name:?}; available: {}",
        REGISTRY.join(", ")
    ))
}

fn check_name(name: &str) -> Result<(), CliError> {
    if REGISTRY.contains(&name) {
        Ok(())
    } else {
        Err(unknown_scenario(name))
    }
}

fn run(a: RunArgs) -> Result<Outcome, CliError> {
    let mut cfg = match (&a.config, &a.scenario) {
        (Some(path), _) => RunConfig::parse(&fs::read_to_string(path)?)?,
        (None, Some(name)) => {
            check_name(name)?;
            RunConfig::for_scenario(name)
        }
        (None, None) => return Err(CliError::Usage("give a scenario name or --config".into())),
    };
    if let Target::Scenario { name, dim, c1_variant } = &mut cfg.target {
        check_name(name)?;
        if a.dim.is_some() {
            *dim = a.dim;
        }
        if a.assert_c0_only {
            *c1_variant = true;
        }
    } else if a.dim.is_some() || a.assert_c0_only {
        return Err(CliError::Usage("--dim and --assert-c0-only apply to named scenarios".into()));
    }
    if a.assert_c1 {
        cfg.policy = negligible_core::extension::ResidualPolicy::AssertAll;
    }
    if let Some(r) = a.grid.res {
        cfg.res = r;
    }
    if let Some(s) = a.grid.step {
        cfg.step = Some(s);
    }
    if let Some(w) = a.window {
        cfg.window = w;
    }
    if a.grid.out.is_some() {
        cfg.out_dir = a.grid.out.clone();
    }
    cfg.validate()?;
    let sc = cfg.scenario()?;
    let outcome = run_scenario(&sc, &cfg.options(&sc))?;
    let dir = out_dir(cfg.out_dir.as_deref()).join(&sc.name);
    let mut stdout = outcome.report.clone();
    if cfg.formats.contains(&Format::Report) {
        let p = write_file(&dir, "report.txt", &outcome.report)?;
        let _ = writeln!(stdout, "wrote {}", p.display());
    }
    if cfg.formats.contains(&Format::Csv) {
        let p = write_file(&dir, "section.csv", &outcome.section.to_csv())?;
        let _ = writeln!(stdout, "wrote {}", p.display());
    }
    let code = if outcome.matches() { EXIT_OK } else { EXIT_MISMATCH };
    Ok(Outcome { stdout, code })
}

fn transport(a: TransportArgs) -> Result<Outcome, CliError> {
    let path = parse::path(&a.path)?;
    let v0 = parse::reals(&a.v0, ',')?;
    let n = path.dim();
    let bounds = match &a.bounds {
        Some(b) => parse::open_box(b)?,
        None => match a.connection.split_once(':') {
            Some(("scenario", name)) => scenario(name, Some(n))?.connection.domain().clone(),
            _ => OpenBox::cube(n, -1e3, 1e3)?,
        },
    };
    let conn: ConnectionForm = parse::connection(&a.connection, bounds)?;
    if v0.len() != conn.rank() {
        return Err(CliError::Usage(format!("v0 has {} entries for rank {}", v0.len(), conn.rank())));
    }
    if a.step <= 0.0 {
        return Err(CliError::Usage("step must be positive".into()));
    }
    let v = parallel_transport(&conn, &path, &v0, a.step)?;
    let parts: Vec<String> = v.iter().map(|x| num(*x)).collect();
    Ok(Outcome::ok(format!("{}\n", parts.join(" "))))
}

fn named(name: &str, dim: Option<usize>) -> Result<negligible_core::counterexamples::NamedScenario, CliError> {
    check_name(name)?;
    Ok(scenario(name, dim)?)
}

fn sampled(
    sc: &negligible_core::counterexamples::NamedScenario,
    g: &GridArgs,
) -> Result<(SampledSection, negligible_core::extension::Tolerances, usize), CliError> {
    let res = g.res.unwrap_or(128);
    if res < 8 {
        return Err(CliError::Usage("grid resolution must be at least 8 per axis".into()));
    }
    let mut tol = sc.tolerances.clone();
    if let Some(s) = g.step {
        if s <= 0.0 {
            return Err(CliError::Usage("step must be positive".into()));
        }
        tol.step = s;
    }
    let grid = sc.grid(res)?;
    Ok((sc.sample(&grid)?, tol, res))
}

fn extend(a: ExtendArgs) -> Result<Outcome, CliError> {
    let sc = named(&a.scenario, a.dim)?;
    let slab = match &sc.obstacle {
        ObstacleSet::HalfSlab(s) => s.clone(),
        _ => return Err(CliError::Usage(format!("scenario {} has no half-slab obstacle", sc.name))),
    };
    let policy = config::policy(&a.policy)?;
    let (s, tol, _) = sampled(&sc, &a.grid)?;
    let r = extend_slab(&sc.connection, &s, &slab, a.a1, &tol, policy)?;
    let dir = out_dir(a.grid.out.as_deref()).join(&sc.name);
    let mut stdout = r.render();
    let p = write_file(&dir, "extended.csv", &r.extended.to_csv())?;
    let _ = writeln!(stdout, "wrote {}", p.display());
    Ok(Outcome::ok(stdout))
}

fn scan(a: ScanArgs) -> Result<Outcome, CliError> {
    let sc = named(&a.scenario, a.dim)?;
    let (s, tol, _) = sampled(&sc, &a.grid)?;
    let m = maximal_extension_scan(&sc.connection, &s, &sc.obstacle, a.window, &tol)?;
    let mut stdout = String::new();
    let _ = writeln!(stdout, "obstacle nodes: {}", m.obstacle_nodes);
    let _ = writeln!(stdout, "unreached: {}", m.unreached());
    let _ = writeln!(stdout, "frontier: {}", m.frontier.len());
    let _ = writeln!(stdout, "sweeps: {}", m.iterations);
    let _ = writeln!(stdout, "complete: {}", m.is_complete());
    let dir = out_dir(a.grid.out.as_deref()).join(&sc.name);
    let p = write_file(&dir, "scan.csv", &m.section.to_csv())?;
    let _ = writeln!(stdout, "wrote {}", p.display());
    Ok(Outcome::ok(stdout))
}

fn jump(a: JumpArgs) -> Result<Outcome, CliError> {
    let sc = named(&a.scenario, a.dim)?;
    let (default_axis, default_base) = match &sc.evidence {
        ExpectedEvidence::Jump { axis, base, .. } => (Some(*axis), Some(base.clone())),
        _ => (None, None),
    };
    let axis = match a.axis {
        Some(x) => parse::axis(&x.to_string())?,
        None => default_axis.ok_or_else(|| CliError::Usage("scenario has no jump axis; pass --axis".into()))?,
    };
    let base = match &a.base {
        Some(b) => parse::reals(b, ',')?,
        None => default_base.ok_or_else(|| CliError::Usage("scenario has no jump base; pass --base".into()))?,
    };
    let eps = match &a.eps {
        Some(e) => parse::reals(e, ',')?,
        None => pipeline::JUMP_EPS.to_vec(),
    };
    let f = &sc.section;
    let j = detect_jump(&sc.connection, &|x: &[f64]| f(x), axis, &base, &eps, a.step)?;
    let mut stdout = String::new();
    for (e, below, above) in &j.samples {
        let b: Vec<String> = below.iter().map(|v| num(*v)).collect();
        let u: Vec<String> = above.iter().map(|v| num(*v)).collect();
        let _ = writeln!(stdout, "eps {}: below {} above {}", num(*e), b.join(" "), u.join(" "));
    }
    let _ = writeln!(stdout, "jump: {}", num(j.jump));
    Ok(Outcome::ok(stdout))
}

fn fatcantor(a: FatCantorArgs) -> Result<Outcome, CliError> {
    let v = parse::reals(&a.ambient, ',')?;
    let [lo, hi] = v[..] else {
        return Err(CliError::Usage("--ambient takes lo,hi".into()));
    };
    let c = fat_cantor_build((lo, hi), a.target)?;
    let m = c.measure();
    let mut stdout = String::new();
    let _ = writeln!(stdout, "ambient: ({}, {})", num(lo), num(hi));
    let _ = writeln!(stdout, "target: {}", num(a.target));
    if let negligible_core::sets::CantorVariant::Fat(s) = c.variant() {
        let _ = writeln!(stdout, "scale: {}", s.scale());
    }
    let _ = writeln!(stdout, "measure: {m}");
    let _ = writeln!(stdout, "decimal: {}", num(m.to_f64().unwrap_or(f64::NAN)));
    Ok(Outcome::ok(stdout))
}

fn decompose(a: DecomposeArgs) -> Result<Outcome, CliError> {
    let bounds = parse::open_box(&a.bounds)?;
    let d = dyadic_decompose(&bounds, a.level);
    let m = d.measure();
    let mut stdout = String::new();
    let _ = writeln!(stdout, "cubes: {}", d.len());
    let _ = writeln!(stdout, "measure: {m}");
    let _ = writeln!(stdout, "decimal: {}", num(m.to_f64().unwrap_or(f64::NAN)));
    let _ = writeln!(stdout, "disjoint: {}", d.interiors_disjoint());
    let p = write_file(&out_dir(a.out.as_deref()), "cubes.csv", &d.to_csv())?;
    let _ = writeln!(stdout, "wrote {}", p.display());
    Ok(Outcome::ok(stdout))
}

fn components(a: ComponentsArgs) -> Result<Outcome, CliError> {
    let obstacle = parse::obstacle(&a.obstacle)?;
    let bounds = match &a.bounds {
        Some(b) => parse::open_box(b)?,
        None => OpenBox::unit(obstacle.max_axis().map_or(2, |m| (m + 1).max(2))),
    };
    if a.res < 8 {
        return Err(CliError::Usage("grid resolution must be at least 8 per axis".into()));
    }
    let grid = Grid::uniform(bounds, a.res)?;
    let c = complement_components(&grid, &obstacle, a.depth);
    Ok(Outcome::ok(format!("{}\n", c.count)))
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let o = run_cli(args);
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(o.stdout.as_bytes());
    o.code
}
