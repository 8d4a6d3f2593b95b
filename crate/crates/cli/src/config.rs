//! Flat `key = value` run configs with `[section]` headers.
//!
//! ```text
//! scenario = noextension
//! dim = 2
//! [grid]
//! res = 128
//! [integrator]
//! step = 1e-3
//! [tolerances]
//! residual = 0.05
//! [output]
//! dir = out
//! formats = report, csv
//! ```
//!
//! An `[experiment]` section with `box`, `connection`, `obstacle`, `section`
//! and `expected` replaces `scenario`.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use negligible_core::connection::{parallel_transport, ConnectionForm, PiecewisePath};
use negligible_core::counterexamples::{cantor_c1_scenario, scenario, ExpectedEvidence, NamedScenario, SectionFn};
use negligible_core::extension::{ResidualPolicy, Tolerances, Verdict};
use negligible_core::sets::OpenBox;

use crate::parse;
use crate::pipeline::RunOptions;
use crate::CliError;

const KEYS: &[&str] = &[
    "scenario",
    "dim",
    "variant",
    "grid.res",
    "grid.window",
    "integrator.step",
    "tolerances.agreement",
    "tolerances.residual",
    "tolerances.input",
    "tolerances.depth",
    "extension.policy",
    "output.dir",
    "output.formats",
    "experiment.box",
    "experiment.connection",
    "experiment.obstacle",
    "experiment.section",
    "experiment.expected",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Report,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub bounds: String,
    pub connection: String,
    pub obstacle: String,
    pub section: String,
    pub expected: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Scenario { name: String, dim: Option<usize>, c1_variant: bool },
    Experiment(Experiment),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub target: Target,
    pub res: usize,
    pub step: Option<f64>,
    pub window: usize,
    pub policy: ResidualPolicy,
    /// Individual overrides of the scenario's calibrated tolerances.
    pub agreement: Option<f64>,
    pub residual: Option<f64>,
    pub input: Option<f64>,
    pub depth: Option<u32>,
    pub out_dir: Option<PathBuf>,
    pub formats: Vec<Format>,
}

impl RunConfig {
    pub fn for_scenario(name: &str) -> Self {
        let d = RunOptions::default();
        Self {
            target: Target::Scenario {
                name: name.into(),
                dim: None,
                c1_variant: false,
            },
            res: d.res,
            step: None,
            window: d.window,
            policy: d.policy,
            agreement: None,
            residual: None,
            input: None,
            depth: None,
            out_dir: None,
            formats: vec![Format::Report, Format::Csv],
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", lineno + 1)))?;
            let key = if section.is_empty() {
                k.trim().to_string()
            } else {
                format!("{section}.{}", k.trim())
            };
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key {key}", lineno + 1)));
            }
            map.insert(key, v.trim().to_string());
        }
        Self::from_map(&map)
    }

    fn from_map(map: &BTreeMap<String, String>) -> Result<Self, CliError> {
        let get = |k: &str| map.get(k).map(String::as_str);
        let uint = |k: &str| -> Result<Option<usize>, CliError> {
            get(k)
                .map(|v| v.parse::<usize>().map_err(|_| CliError::Usage(format!("{k} must be a non-negative integer"))))
                .transpose()
        };
        let real = |k: &str| get(k).map(parse::real).transpose();

        let target = if map.keys().any(|k| k.starts_with("experiment.")) {
            if get("scenario").is_some() {
                return Err(CliError::Usage("give either scenario or [experiment], not both".into()));
            }
            let need = |k: &str| {
                get(k)
                    .map(str::to_string)
                    .ok_or_else(|| CliError::Usage(format!("experiment needs {k}")))
            };
            Target::Experiment(Experiment {
                bounds: need("experiment.box")?,
                connection: need("experiment.connection")?,
                obstacle: need("experiment.obstacle")?,
                section: need("experiment.section")?,
                expected: verdict(&need("experiment.expected")?)?,
            })
        } else {
            let name = get("scenario").ok_or_else(|| CliError::Usage("config names no scenario".into()))?;
            Target::Scenario {
                name: name.to_string(),
                dim: uint("dim")?,
                c1_variant: match get("variant") {
                    None | Some("c0") => false,
                    Some("c1") => true,
                    Some(v) => return Err(CliError::Usage(format!("unknown variant {v}"))),
                },
            }
        };
        let mut cfg = Self::for_scenario("");
        cfg.target = target;
        if let Some(r) = uint("grid.res")? {
            cfg.res = r;
        }
        if let Some(w) = uint("grid.window")? {
            cfg.window = w;
        }
        cfg.step = real("integrator.step")?;
        cfg.agreement = real("tolerances.agreement")?;
        cfg.residual = real("tolerances.residual")?;
        cfg.input = real("tolerances.input")?;
        cfg.depth = uint("tolerances.depth")?.map(|d| d as u32);
        if let Some(p) = get("extension.policy") {
            cfg.policy = policy(p)?;
        }
        cfg.out_dir = get("output.dir").map(PathBuf::from);
        if let Some(f) = get("output.formats") {
            cfg.formats = f
                .split(',')
                .map(|x| match x.trim() {
                    "report" => Ok(Format::Report),
                    "csv" => Ok(Format::Csv),
                    other => Err(CliError::Usage(format!("unknown output format {other}"))),
                })
                .collect::<Result<_, _>>()?;
            cfg.formats.sort();
            cfg.formats.dedup();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.res < 8 {
            return Err(CliError::Usage("grid resolution must be at least 8 per axis".into()));
        }
        if self.window < 3 {
            return Err(CliError::Usage("scan window must be at least 3".into()));
        }
        let positive = [self.step, self.agreement, self.residual, self.input];
        if positive.iter().flatten().any(|v| *v <= 0.0) {
            return Err(CliError::Usage("step and tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn scenario(&self) -> Result<NamedScenario, CliError> {
        match &self.target {
            Target::Scenario { name, dim, c1_variant } => {
                if *c1_variant {
                    if name != "cantor-c0" {
                        return Err(CliError::Usage("the C1 variant exists only for cantor-c0".into()));
                    }
                    return Ok(cantor_c1_scenario(dim.unwrap_or(2))?);
                }
                Ok(scenario(name, *dim)?)
            }
            Target::Experiment(e) => experiment(e),
        }
    }

    pub fn options(&self, sc: &NamedScenario) -> RunOptions {
        let base = sc.tolerances.clone();
        let tolerances = Tolerances {
            agreement: self.agreement.unwrap_or(base.agreement),
            residual: self.residual.unwrap_or(base.residual),
            input: self.input.unwrap_or(base.input),
            step: self.step.unwrap_or(base.step),
            depth: self.depth.unwrap_or(base.depth),
        };
        RunOptions {
            res: self.res,
            step: self.step,
            policy: self.policy,
            window: self.window,
            tolerances: Some(tolerances),
        }
    }
}

pub fn verdict(text: &str) -> Result<Verdict, CliError> {
    match text.trim() {
        "extended" => Ok(Verdict::Extended),
        "obstructed" => Ok(Verdict::Obstructed),
        other => Err(CliError::Usage(format!("unknown verdict {other}"))),
    }
}

pub fn policy(text: &str) -> Result<ResidualPolicy, CliError> {
    match text.trim() {
        "auto" => Ok(ResidualPolicy::Auto),
        "all" => Ok(ResidualPolicy::AssertAll),
        "skip-thin" => Ok(ResidualPolicy::SkipThin),
        other => Err(CliError::Usage(format!("unknown residual policy {other} (auto, all, skip-thin)"))),
    }
}

/// Section obtained by transporting `v0` from the box centre along the
/// axis-parallel polyline that fixes coordinates in axis order.
fn transported_section(conn: ConnectionForm, v0: Vec<f64>, step: f64) -> SectionFn {
    Arc::new(move |x: &[f64]| {
        let mut points = vec![conn.domain().center()];
        for a in 0..x.len() {
            let mut p = points.last().expect("nonempty").clone();
            if p[a] != x[a] {
                p[a] = x[a];
                points.push(p);
            }
        }
        if points.len() == 1 {
            return Some(v0.clone());
        }
        let path = PiecewisePath::polyline(&points).ok()?;
        parallel_transport(&conn, &path, &v0, step).ok().map(|v| v.as_slice().to_vec())
    })
}

fn experiment(e: &Experiment) -> Result<NamedScenario, CliError> {
    let bounds: OpenBox = parse::open_box(&e.bounds)?;
    let connection = parse::connection(&e.connection, bounds.clone())?;
    let obstacle = parse::obstacle(&e.obstacle)?;
    let v0 = match e.section.split_once(':') {
        Some(("transport", v)) => parse::reals(v, ',')?,
        _ => return Err(CliError::Usage(format!("unknown section {:?} (transport:v0)", e.section))),
    };
    if v0.len() != connection.rank() {
        return Err(CliError::Usage("section value length differs from the connection rank".into()));
    }
    if obstacle.max_axis().is_some_and(|a| a >= bounds.dim()) {
        return Err(CliError::Usage("obstacle refers to an axis outside the box".into()));
    }
    let tolerances = Tolerances::default();
    Ok(NamedScenario {
        name: "experiment".into(),
        dim: bounds.dim(),
        section: transported_section(connection.clone(), v0, tolerances.step),
        connection,
        obstacle,
        expected: e.expected,
        evidence: ExpectedEvidence::None,
        tolerances,
        obstacle_measure: None,
    })
}
