//! Acceptance checks. Prints one PASS/FAIL line per criterion with its pinned
//! tolerance and runtime limit; exits nonzero if any fails.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use negligible_cli::pipeline::{run_scenario, ternary_steps, RunOptions, JUMP_EPS};
use negligible_cli::run_cli;
use negligible_core::connection::{parallel_transport, pullback, Diffeo, PiecewisePath};
use negligible_core::counterexamples::{
    cantor_c0_scenario, hyperplane_patch_suite, noextension_scenario, scenario, ExpectedEvidence,
};
use negligible_core::extension::{
    detect_jump, detect_nondifferentiability, extend_bidirectional, extend_slab, QuotientTrend, ResidualPolicy,
    Verdict,
};
use negligible_core::fundamental::{fundamental_matrix, liouville_defect, ParamGrid};
use negligible_core::sets::{complement_components, exact, fat_cantor_build, Grid, ObstacleSet, OpenBox};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn jump_magnitudes() -> Check {
    let mut worst: f64 = 0.0;
    for n in [2usize, 3] {
        let sc = noextension_scenario(n).map_err(e)?;
        let ExpectedEvidence::Jump { axis, base, .. } = &sc.evidence else {
            return Err("no jump evidence".into());
        };
        let f = &sc.section;
        let j = detect_jump(&sc.connection, &|x: &[f64]| f(x), *axis, base, &JUMP_EPS, 1e-3).map_err(e)?;
        let err = (j.jump - (-((n - 1) as f64)).exp()).abs();
        worst = worst.max(err);
        ensure(err <= 1e-6, format!("n = {n}: jump {} off by {err:e}", j.jump))?;
    }
    Ok(format!("max error {worst:.1e}"))
}

fn noextension_obstructed() -> Check {
    let sc = noextension_scenario(2).map_err(e)?;
    let opts = RunOptions {
        res: 128,
        step: Some(1e-3),
        ..RunOptions::default()
    };
    let out = run_scenario(&sc, &opts).map_err(e)?;
    ensure(out.verdict == Verdict::Obstructed, "verdict is not obstructed")?;
    ensure(!out.frontier.is_empty(), "empty frontier")?;
    let grid = out.section.grid();
    let outside = out
        .frontier
        .iter()
        .filter(|&&n| {
            let (lo, hi) = grid.cell(n);
            !sc.obstacle.meets_cell(&lo, &hi, sc.tolerances.depth)
        })
        .count();
    ensure(outside == 0, format!("{outside} frontier nodes outside Q"))?;
    Ok(format!("frontier {} nodes, all meeting Q", out.frontier.len()))
}

fn constant_form_slab() -> Check {
    let sc = scenario("constant-form", None).map_err(e)?;
    let ObstacleSet::HalfSlab(slab) = &sc.obstacle else {
        return Err("constant-form obstacle is not a half-slab".into());
    };
    let grid = sc.grid(256).map_err(e)?;
    let s = sc.sample(&grid).map_err(e)?;
    let r = extend_slab(&sc.connection, &s, slab, None, &sc.tolerances, ResidualPolicy::Auto).map_err(e)?;
    let mut err: f64 = 0.0;
    for n in 0..grid.len() {
        let x = grid.point(n);
        let v = r.extended.get(n).ok_or("extension left a node undefined")?[0];
        err = err.max((v - (-0.3 * x[0] + 0.7 * x[1]).exp()).abs());
    }
    let res = r.max_residual();
    ensure(err <= 1e-6, format!("max error {err:e}"))?;
    ensure(res <= 1e-5, format!("residual {res:e}"))?;
    ensure(r.verdict == Verdict::Extended, "verdict is not extended")?;
    Ok(format!("max error {err:.1e}, residual {res:.1e}"))
}

fn fat_product_bidirectional() -> Check {
    let sc = scenario("fat-cantor-box", None).map_err(e)?;
    let ObstacleSet::BiSlab(a, b) = &sc.obstacle else {
        return Err("fat-cantor-box obstacle is not a product".into());
    };
    let grid = sc.grid(128).map_err(e)?;
    let s = sc.sample(&grid).map_err(e)?;
    let tol = &sc.tolerances;
    let r = extend_bidirectional(&sc.connection, &s, a, b, None, None, tol).map_err(e)?;
    let r1 = extend_slab(&sc.connection, &s, a, None, tol, ResidualPolicy::SkipThin).map_err(e)?;
    let r2 = extend_slab(&sc.connection, &s, b, None, tol, ResidualPolicy::SkipThin).map_err(e)?;
    let (gap, _) = r1.extended.max_difference(&r2.extended);
    ensure(gap <= 1e-6, format!("runs differ by {gap:e}"))?;
    ensure(r.agreement <= 1e-6, format!("agreement {:e}", r.agreement))?;
    ensure(r.verdict == Verdict::Extended, "verdict is not extended")?;
    Ok(format!("runs differ by {gap:.1e}, agreement {:.1e}", r.agreement))
}

fn cantor_divergence() -> Check {
    let sc = cantor_c0_scenario(2).map_err(e)?;
    let ExpectedEvidence::Divergent { axis, points, probes } = &sc.evidence else {
        return Err("no divergence evidence".into());
    };
    let f = &sc.section;
    let hs = ternary_steps();
    let v = detect_nondifferentiability(&|x: &[f64]| f(x), *axis, points, &hs).map_err(e)?;
    let mut divergent = 0;
    for q in &v {
        let ratios_ok = q.quotients.windows(2).all(|w| w[1].1 >= 1.5 * (1.0 - 1e-6) * w[0].1);
        if ratios_ok && q.trend == QuotientTrend::Divergent {
            divergent += 1;
        }
    }
    ensure(divergent >= 5, format!("{divergent} divergent points"))?;
    let p = detect_nondifferentiability(&|x: &[f64]| f(x), *axis, probes, &hs).map_err(e)?;
    for q in &p {
        let n = q.quotients.len();
        let (a, b) = (q.quotients[n - 2].1, q.quotients[n - 1].1);
        ensure((a - b).abs() <= 0.01 * a.abs().max(b.abs()).max(1e-12), format!("probe {:?} unstable", q.point))?;
    }
    Ok(format!("{divergent} divergent points, {} stable probes", p.len()))
}

fn fundamental_solutions() -> Check {
    let a = |_: f64, _: &[f64]| Ok(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
    let fs = fundamental_matrix(a, 0.0, &linspace(-2.0, 2.0, 9), ParamGrid::none(), 2, 1e-3).map_err(e)?;
    let mut err: f64 = 0.0;
    for (ti, &t) in fs.times().iter().enumerate() {
        err = err.max((fs.at(ti, 0) - DMatrix::from_row_slice(2, 2, &[1.0, t, 0.0, 1.0])).amax());
    }
    ensure(err <= 1e-8, format!("nilpotent error {err:e}"))?;
    let seed = [0.9, -0.4, 0.7, 0.5, -0.8, 0.3, 0.2, 0.6, -0.5];
    let b = |t: f64, _: &[f64]| {
        Ok(DMatrix::from_fn(3, 3, |i, j| {
            let s = seed[i * 3 + j];
            s * (t * (1.0 + i as f64)).sin() + 0.3 * s * s
        }))
    };
    let times = linspace(0.0, 4.0, 5);
    let mut defects = Vec::new();
    for h in [1e-2, 5e-3, 2.5e-3] {
        let fs = fundamental_matrix(b, 0.0, &times, ParamGrid::none(), 3, h).map_err(e)?;
        defects.push(liouville_defect(&fs, b).map_err(e)?);
    }
    let order = defects.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min);
    ensure(order >= 3.5, format!("Liouville order {order:.2}"))?;
    Ok(format!("nilpotent error {err:.1e}, Liouville order {order:.2}"))
}

fn fat_cantor_measures() -> Check {
    for target in [0.3, 0.5, 0.9] {
        let c = fat_cantor_build((0.0, 1.0), target).map_err(e)?;
        let m = c.measure();
        ensure(m > exact(target), format!("measure below {target}"))?;
        let mf = m.to_f64().ok_or("measure not finite")?;
        ensure((mf - (1.0 + target) / 2.0).abs() < 1e-15, format!("target {target}: measure {mf}"))?;
    }
    let c = fat_cantor_build((0.0, 1.0), 0.5).map_err(e)?;
    let s9 = c.stage_intervals(9);
    for (a, b) in c.stage_intervals(8) {
        let kids: Vec<_> = s9.iter().filter(|&&(x, y)| a <= x && y <= b).collect();
        ensure(kids.len() == 2 && kids[0].1 < kids[1].0, format!("no gap in ({a}, {b})"))?;
    }
    Ok("measures (1 + t)/2, 256 stage-8 gaps".into())
}

fn big_measure() -> Check {
    let sc = scenario("big-measure", None).map_err(e)?;
    let m = sc.obstacle_measure.clone().ok_or("no measure")?;
    ensure(m > exact(1.2), "measure not above 1.2")?;
    let grid = Grid::uniform(sc.bounds().clone(), 128).map_err(e)?;
    let comps = complement_components(&grid, &sc.obstacle, sc.tolerances.depth).count;
    ensure(comps == 1, format!("{comps} complement components"))?;
    let out = run_scenario(&sc, &RunOptions::default()).map_err(e)?;
    ensure(out.verdict == Verdict::Extended, "scan did not extend")?;
    Ok(format!("measure {:.4}, 1 component, extended", m.to_f64().unwrap_or(f64::NAN)))
}

fn full_hyperplane() -> Check {
    let sc = scenario("full-hyperplane", None).map_err(e)?;
    let out = run_scenario(&sc, &RunOptions::default()).map_err(e)?;
    let grid = out.section.grid();
    let fmask = sc.obstacle.mask(grid, sc.tolerances.depth);
    let frontier: HashSet<usize> = out.frontier.iter().copied().collect();
    let fnodes: Vec<usize> = (0..grid.len()).filter(|&n| fmask[n]).collect();
    let missing = fnodes.iter().filter(|n| !frontier.contains(n)).count();
    ensure(!fnodes.is_empty() && missing == 0, format!("{missing} of {} F-nodes off the frontier", fnodes.len()))?;
    let dir = tempfile::tempdir().map_err(e)?;
    let dir_arg = dir.path().to_string_lossy().into_owned();
    let cli = run_cli(["negligible", "run", "full-hyperplane", "--out", dir_arg.as_str()]);
    ensure(cli.code == 0, format!("exit code {}", cli.code))?;
    Ok(format!("frontier covers {} F-nodes, exit 0", fnodes.len()))
}

fn pullback_invariance() -> Check {
    let conn = noextension_scenario(2).map_err(e)?.connection;
    let diffeos = [
        Diffeo::translation(OpenBox::cube(2, -2.0, 2.0).map_err(e)?, vec![0.5, -0.3]).map_err(e)?,
        Diffeo::rotation(
            OpenBox::cube(2, -2.0, 2.0).map_err(e)?,
            OpenBox::cube(2, -3.0, 3.0).map_err(e)?,
            0,
            1,
            PI / 6.0,
            &[0.0, 0.0],
        )
        .map_err(e)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for phi in &diffeos {
        let pulled = pullback(&conn, phi).map_err(e)?;
        for _ in 0..10 {
            let pts: Vec<Vec<f64>> = (0..4).map(|_| (0..2).map(|_| rng.gen_range(-1.9..1.9)).collect()).collect();
            let path = PiecewisePath::polyline(&pts).map_err(e)?;
            let a = parallel_transport(&pulled, &path, &[1.0], 1e-3).map_err(e)?;
            let b = parallel_transport(&conn, &path.mapped(phi), &[1.0], 1e-3).map_err(e)?;
            worst = worst.max((a[0] - b[0]).abs());
        }
    }
    ensure(worst <= 2e-6, format!("difference {worst:e}"))?;
    Ok(format!("max difference {worst:.1e}"))
}

fn patch_suite() -> Check {
    let suite = hyperplane_patch_suite().map_err(e)?;
    for sc in &suite {
        let out = run_scenario(sc, &RunOptions::default()).map_err(e)?;
        ensure(out.verdict == Verdict::Extended, format!("{} obstructed", sc.name))?;
        let grid = out.section.grid();
        ensure(
            out.section.defined_count() == grid.len(),
            format!("{}: {} of {} nodes", sc.name, out.section.defined_count(), grid.len()),
        )?;
    }
    Ok(format!("{} scenarios extended on 128^2", suite.len()))
}

fn main() {
    let criteria: [(&str, &str, u64, fn() -> Check); 11] = [
        ("jump magnitude n = 2, 3", "1e-6", 5, jump_magnitudes),
        ("noextension obstructed at 128^2", "step 1e-3", 60, noextension_obstructed),
        ("constant-form slab extension on 256^2", "1e-6 / 1e-5", 120, constant_form_slab),
        ("fat product bidirectional agreement", "1e-6", 120, fat_product_bidirectional),
        ("cantor-c0 divergent quotients", "factor 1.5 (rel 1e-6), 1%", 30, cantor_divergence),
        ("fundamental solutions", "1e-8, order 3.5", 10, fundamental_solutions),
        ("fat Cantor measures and gaps", "exact", 5, fat_cantor_measures),
        ("big-measure obstacle", "> 1.2", 120, big_measure),
        ("full hyperplane frontier", "all F-nodes", 30, full_hyperplane),
        ("pullback invariance", "2e-6", 10, pullback_invariance),
        ("hyperplane patch suite", "full grid", 120, patch_suite),
    ];
    let mut failed = 0;
    for (i, (name, tol, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let result = match result {
            Ok(m) if took > Duration::from_secs(*limit) => Err(format!("{m}; over time limit")),
            r => r,
        };
        let (status, detail) = match &result {
            Ok(m) => ("PASS", m.clone()),
            Err(m) => {
                failed += 1;
                ("FAIL", m.clone())
            }
        };
        println!(
            "{status} {:>2} {name} [tol {tol}, limit {limit}s, {:.2}s]: {detail}",
            i + 1,
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
