//! Scenario runs: sample, verify, extend or scan, detect, report.

use std::fmt::Write as _;

use negligible_core::connection::SampledSection;
use negligible_core::counterexamples::{ExpectedEvidence, NamedScenario};
use negligible_core::extension::{
    detect_jump, detect_nondifferentiability, extend_bidirectional, extend_slab, maximal_extension_scan, Evidence,
    QuotientTrend, ResidualPolicy, Tolerances, Verdict,
};
use negligible_core::numfmt::num;
use negligible_core::sets::ObstacleSet;
use negligible_core::Result;

/// Steps of the one-sided limits taken by the jump detector.
pub const JUMP_EPS: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];

/// Ternary steps `3^-4 ... 3^-10` of the difference-quotient detector.
pub fn ternary_steps() -> Vec<f64> {
    (4..=10).map(|k| 3f64.powi(-k)).collect()
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Cells per axis.
    pub res: usize,
    pub step: Option<f64>,
    pub policy: ResidualPolicy,
    /// Scan window in nodes.
    pub window: usize,
    /// Replaces the scenario's calibrated tolerances.
    pub tolerances: Option<Tolerances>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            res: 128,
            step: None,
            policy: ResidualPolicy::Auto,
            window: 8,
            tolerances: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub scenario: String,
    pub verdict: Verdict,
    pub expected: Verdict,
    pub evidence: Vec<Evidence>,
    pub section: SampledSection,
    /// Scan frontier nodes, when a scan ran.
    pub frontier: Vec<usize>,
    pub report: String,
}

impl RunOutcome {
    pub fn matches(&self) -> bool {
        self.verdict == self.expected
    }
}

fn obstacle_kind(o: &ObstacleSet) -> &'static str {
    match o {
        ObstacleSet::HalfSlab(_) => "half-slab",
        ObstacleSet::BiSlab(..) => "product",
        ObstacleSet::HyperplanePatch { constraints, .. } if constraints.is_empty() => "hyperplane",
        ObstacleSet::HyperplanePatch { .. } => "hyperplane patch",
        ObstacleSet::GridMask { .. } => "grid mask",
        ObstacleSet::ClosedBox(_) => "closed box",
        ObstacleSet::Union(_) => "union",
    }
}

fn point(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| num(*v)).collect();
    format!("({})", parts.join(", "))
}

/// Runs the scenario's pipeline on a `res`-per-axis grid.
pub fn run_scenario(sc: &NamedScenario, opts: &RunOptions) -> Result<RunOutcome> {
    let mut tol = opts.tolerances.clone().unwrap_or_else(|| sc.tolerances.clone());
    if let Some(step) = opts.step {
        tol.step = step;
    }
    let grid = sc.grid(opts.res)?;
    let s = sc.sample(&grid)?;
    let conn = &sc.connection;

    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", sc.name);
    let _ = writeln!(out, "dimension: {}", sc.dim);
    let _ = writeln!(out, "rank: {}", sc.rank());
    let _ = writeln!(out, "smoothness: {}", conn.smoothness());
    let iv: Vec<String> = sc.bounds().intervals().iter().map(|(a, b)| format!("({}, {})", num(*a), num(*b))).collect();
    let _ = writeln!(out, "box: {}", iv.join(" x "));
    let _ = writeln!(out, "obstacle: {}", obstacle_kind(&sc.obstacle));
    if let Some(m) = &sc.obstacle_measure {
        let _ = writeln!(out, "obstacle measure: {m}");
    }
    let _ = writeln!(out, "grid: {} per axis, {} nodes, {} defined", opts.res, grid.len(), s.defined_count());

    let mut evidence = Vec::new();
    let mut frontier = Vec::new();
    let (mut verdict, section) = match &sc.obstacle {
        ObstacleSet::HalfSlab(slab) => {
            let r = extend_slab(conn, &s, slab, None, &tol, opts.policy)?;
            out.push_str("[extension]\n");
            out.push_str(&r.render());
            evidence.extend(r.evidence.iter().cloned());
            (r.verdict, r.extended)
        }
        ObstacleSet::BiSlab(a, b) => {
            let r = extend_bidirectional(conn, &s, a, b, None, None, &tol)?;
            out.push_str("[extension]\n");
            out.push_str(&r.render());
            evidence.extend(r.evidence.iter().cloned());
            (r.verdict, r.extended)
        }
        obstacle => {
            let m = maximal_extension_scan(conn, &s, obstacle, opts.window, &tol)?;
            out.push_str("[scan]\n");
            let _ = writeln!(out, "window: {}", opts.window);
            let _ = writeln!(out, "obstacle nodes: {}", m.obstacle_nodes);
            let _ = writeln!(out, "unreached: {}", m.unreached());
            let _ = writeln!(out, "frontier: {}", m.frontier.len());
            let _ = writeln!(out, "sweeps: {}", m.iterations);
            frontier = m.frontier.clone();
            let verdict = if m.is_complete() {
                Verdict::Extended
            } else {
                let sample = frontier.first().map(|&n| grid.point(n)).unwrap_or_default();
                let e = Evidence::Frontier {
                    nodes: frontier.len(),
                    sample,
                };
                let _ = writeln!(out, "evidence: {e}");
                evidence.push(e);
                Verdict::Obstructed
            };
            (verdict, m.section)
        }
    };

    match &sc.evidence {
        ExpectedEvidence::Jump { axis, base, .. } => {
            out.push_str("[jump]\n");
            let f = &sc.section;
            let j = detect_jump(conn, &|x: &[f64]| f(x), *axis, base, &JUMP_EPS, tol.step)?;
            for (e, below, above) in &j.samples {
                let _ = writeln!(out, "eps {}: below {} above {}", num(*e), num(below[0]), num(above[0]));
            }
            let _ = writeln!(out, "jump: {}", num(j.jump));
            if j.jump > tol.agreement {
                verdict = Verdict::Obstructed;
                let e = Evidence::Jump {
                    location: base.clone(),
                    axis: *axis,
                    below: j.below[0],
                    above: j.above[0],
                };
                let _ = writeln!(out, "evidence: {e}");
                evidence.push(e);
            }
        }
        ExpectedEvidence::Divergent { axis, points, probes } => {
            out.push_str("[quotients]\n");
            let f = &sc.section;
            let hs = ternary_steps();
            for v in detect_nondifferentiability(&|x: &[f64]| f(x), *axis, points, &hs)? {
                let _ = writeln!(out, "point {}: {}", point(&v.point), trend(&v.trend));
                if v.trend == QuotientTrend::Divergent {
                    verdict = Verdict::Obstructed;
                    let e = Evidence::Divergent {
                        location: v.point.clone(),
                        axis: *axis,
                        quotients: v.quotients.clone(),
                    };
                    let _ = writeln!(out, "evidence: {e}");
                    evidence.push(e);
                }
            }
            for v in detect_nondifferentiability(&|x: &[f64]| f(x), *axis, probes, &hs)? {
                let _ = writeln!(out, "probe {}: {}", point(&v.point), trend(&v.trend));
            }
        }
        ExpectedEvidence::None | ExpectedEvidence::Frontier => {}
    }

    out.push_str("[result]\n");
    let _ = writeln!(out, "verdict: {verdict}");
    let _ = writeln!(out, "expected: {}", sc.expected);
    Ok(RunOutcome {
        scenario: sc.name.clone(),
        verdict,
        expected: sc.expected,
        evidence,
        section,
        frontier,
        report: out,
    })
}

fn trend(t: &QuotientTrend) -> String {
    match t {
        QuotientTrend::Divergent => "divergent".into(),
        QuotientTrend::Convergent(q) => format!("convergent {}", num(*q)),
        QuotientTrend::Inconclusive => "inconclusive".into(),
    }
}
