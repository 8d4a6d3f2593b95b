use negligible_core::connection::covariant_residual;
use negligible_core::counterexamples::{
    big_measure_obstacle, bump, cantor_c0_scenario, noextension_scenario, scenario, smooth_step, step_g, step_h,
    ExpectedEvidence, NamedScenario, REGISTRY,
};
use negligible_core::extension::detect_jump;
use negligible_core::sets::{complement_components, exact, Grid, ObstacleSet, OpenBox};
use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

/// Independent Cantor function: ternary digits of `x` until the first 1.
fn cantor_oracle(x: f64) -> f64 {
    let (mut t, mut acc, mut w) = (x, 0.0, 0.5);
    for _ in 0..50 {
        t *= 3.0;
        let d = t.floor();
        t -= d;
        match d as i32 {
            0 => {}
            1 => return acc + w,
            _ => acc += w,
        }
        w *= 0.5;
    }
    acc
}

fn omega(sc: &NamedScenario, axis: usize, x: &[f64]) -> f64 {
    sc.connection.component(axis, x)[(0, 0)]
}

/// Points with max-norm 1.25: the boundary of the cube `[-1.25, 1.25]^n`.
fn shell(n: usize, per_edge: usize) -> Vec<Vec<f64>> {
    let ticks: Vec<f64> = (0..=per_edge).map(|k| -1.25 + 2.5 * k as f64 / per_edge as f64).collect();
    let mut pts = vec![vec![]];
    for _ in 0..n {
        pts = pts
            .into_iter()
            .flat_map(|p| ticks.iter().map(move |&t| [p.clone(), vec![t]].concat()))
            .collect();
    }
    pts.into_iter()
        .filter(|p| p.iter().any(|v| (v.abs() - 1.25).abs() < 1e-12))
        .collect()
}

/// Worst residual over defined nodes where `keep` holds.
fn residual_where(sc: &NamedScenario, res: usize, axis: usize, keep: impl Fn(&[f64]) -> bool) -> f64 {
    let grid = sc.grid(res).unwrap();
    let s = sc.sample(&grid).unwrap();
    let r = covariant_residual(&sc.connection, &s, axis, 1);
    r.values
        .iter()
        .enumerate()
        .filter(|(n, _)| keep(&grid.point(*n)))
        .filter_map(|(_, v)| *v)
        .fold(0.0, f64::max)
}

#[test]
fn bump_and_step_examples() {
    assert_eq!(bump(0.0), (-1.0f64).exp());
    assert_eq!((bump(1.0), bump(-1.0)), (0.0, 0.0));
    assert!((bump(0.5) - 0.263597138115727).abs() < 1e-12);
    assert_eq!(smooth_step(-2.0, 64), 0.0);
    assert_eq!(smooth_step(1.0, 64), 1.0);
    assert!((smooth_step(-0.5, 4096) - 0.5).abs() < 1e-12);
    let v = smooth_step(-0.25, 4096);
    assert!(v > 0.5 && v < 1.0);
    assert!((v - (1.0 - smooth_step(-0.75, 4096))).abs() < 1e-10);
}

#[test]
fn noextension_examples() {
    let sc = noextension_scenario(2).unwrap();
    assert_eq!(omega(&sc, 0, &[2.0, 2.0]), 0.0);
    assert_eq!(omega(&sc, 1, &[2.0, 2.0]), 0.0);
    assert_eq!(sc.eval(&[0.0, -1.5]), Some(vec![1.0]));
    assert_eq!(sc.eval(&[0.0, -0.5]), None);
    // Support of omega_2 inside [-1, 1] x [0, 1].
    for k in 0..=60 {
        for l in 0..=60 {
            let x = [-3.0 + 0.1 * k as f64, -3.0 + 0.1 * l as f64];
            if x[0].abs() >= 1.0 || !(0.0..=1.0).contains(&x[1]) {
                assert_eq!(omega(&sc, 1, &x), 0.0, "omega_2 at {x:?}");
            }
        }
    }
    assert!(matches!(noextension_scenario(1), Err(negligible_core::Error::Precondition(_))));
}

#[test]
fn noextension_forms_vanish_on_the_shell() {
    for n in [2, 3] {
        let sc = noextension_scenario(n).unwrap();
        for x in shell(n, 10) {
            for a in 0..n {
                assert_eq!(omega(&sc, a, &x), 0.0, "n = {n}, axis {a}, x = {x:?}");
            }
        }
    }
}

#[test]
fn noextension_section_residuals_are_second_order() {
    let sc = noextension_scenario(2).unwrap();
    // Stay off the layers x_2 = 0 and x_2 = 1 and away from the bump edges,
    // where the steep derivatives of b keep coarse grids pre-asymptotic.
    let smooth = |x: &[f64]| x[0].abs() < 0.5 && x[1].abs() > 0.2 && (x[1] - 1.0).abs() > 0.2;
    for axis in 0..2 {
        let coarse = residual_where(&sc, 64, axis, smooth);
        let fine = residual_where(&sc, 128, axis, smooth);
        assert!(coarse / fine > 3.4, "axis {axis}: {coarse} -> {fine}");
    }
}

#[test]
fn noextension_jump_matches_b0_power() {
    for n in [2usize, 3] {
        let sc = noextension_scenario(n).unwrap();
        let ExpectedEvidence::Jump { axis, base, magnitude } = sc.evidence.clone() else {
            panic!("jump evidence expected");
        };
        let f = &sc.section;
        let j = detect_jump(&sc.connection, &|x: &[f64]| f(x), axis, &base, &[1e-2, 1e-3, 1e-4], 1e-3).unwrap();
        let expected = (-((n - 1) as f64)).exp();
        assert!((magnitude - expected).abs() < 1e-15);
        assert!((j.jump - expected).abs() < 1e-6, "n = {n}: {}", j.jump);
    }
}

#[test]
fn cantor_c0_examples() {
    let sc = cantor_c0_scenario(2).unwrap();
    for y in [-0.5, 0.2, 0.5, 1.7] {
        assert_eq!(omega(&sc, 0, &[-1.0, y]), 0.0);
    }
    let s = sc.eval(&[1.0, 0.5]).unwrap()[0];
    assert_eq!(s, 1.0 + 1.0 * cantor_oracle(0.5));
    assert_eq!(s, 1.5);
    for y in [0.1, 0.3, 0.8, 0.95] {
        let v = sc.eval(&[0.7, y]).unwrap()[0];
        assert!((v - (1.0 + 0.49 * cantor_oracle(y))).abs() < 1e-9);
    }
    // Away from the kink at x_1 = 0 the residual along x_1 is second order.
    let away = |x: &[f64]| x[0].abs() > 0.2;
    let coarse = residual_where(&sc, 64, 0, away);
    let fine = residual_where(&sc, 128, 0, away);
    assert!(fine < 1e-12 || coarse / fine > 3.0, "{coarse} -> {fine}");
    assert!(cantor_c0_scenario(1).is_err());
}

#[test]
fn big_measure_examples() {
    let b = big_measure_obstacle(&OpenBox::unit(2), 0.5, 3).unwrap();
    assert!(b.measure > exact(0.5));
    let bounds = OpenBox::new(vec![(0.0, 2.0), (0.0, 1.0)]).unwrap();
    let b = big_measure_obstacle(&bounds, 1.2, 3).unwrap();
    assert!(b.pieces.len() >= 2);
    let mut sum = BigRational::zero();
    for (cube, sets) in &b.pieces {
        let (lo, hi) = (cube.lo(), cube.hi());
        for (i, c) in sets.iter().enumerate() {
            let (a, z) = c.ambient();
            assert!(lo[i] < a && z < hi[i]);
        }
        sum += sets[0].measure() * sets[1].measure();
    }
    assert_eq!(sum, b.measure);
    assert!(sum > exact(1.2));
    let grid = Grid::uniform(bounds.clone(), 128).unwrap();
    assert_eq!(complement_components(&grid, &b.obstacle, 40).count, 1);
    assert!(big_measure_obstacle(&bounds, 2.0, 3).is_err());
    assert!(big_measure_obstacle(&bounds, -0.1, 3).unwrap().obstacle.is_empty_descriptor());
}

fn inside(o: &ObstacleSet, b: &OpenBox) -> bool {
    match o {
        ObstacleSet::ClosedBox(iv) => iv.iter().enumerate().all(|(a, &(lo, hi))| b.lo(a) < lo && hi < b.hi(a)),
        ObstacleSet::HalfSlab(s) => {
            let (lo, hi) = s.set.ambient();
            b.lo(s.thin_axis) <= lo && hi <= b.hi(s.thin_axis) && b.lo(s.slab_axis) < s.threshold && s.threshold < b.hi(s.slab_axis)
        }
        ObstacleSet::BiSlab(x, y) => inside(&ObstacleSet::HalfSlab(x.clone()), b) && inside(&ObstacleSet::HalfSlab(y.clone()), b),
        ObstacleSet::HyperplanePatch { axis, level, .. } => b.lo(*axis) < *level && *level < b.hi(*axis),
        ObstacleSet::Union(parts) => parts.iter().all(|p| inside(p, b)),
        ObstacleSet::GridMask { grid, .. } => grid.bounds() == b,
    }
}

#[test]
fn registry_entries_are_consistent() {
    for name in REGISTRY {
        let sc = scenario(name, None).unwrap();
        assert_eq!(sc.connection.dim(), sc.dim, "{name}");
        assert_eq!(sc.eval(&sc.bounds().center()).map_or(1, |v| v.len()), sc.rank(), "{name}");
        assert!(inside(&sc.obstacle, sc.bounds()), "{name}");
    }
    assert!(scenario("fat-cantor-box", Some(3)).is_err());
    assert!(scenario("nope", None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bump_is_even_and_bounded(x in -2.0f64..2.0) {
        prop_assert_eq!(bump(x), bump(-x));
        prop_assert!((0.0..=(-1.0f64).exp()).contains(&bump(x)));
    }

    #[test]
    fn smooth_step_symmetry(x in -1.5f64..0.5) {
        prop_assert!((smooth_step(x, 4096) + smooth_step(-x - 1.0, 4096) - 1.0).abs() < 1e-12);
        prop_assert!((step_g(x) + step_g(-x - 1.0) - 1.0).abs() < 1e-10);
        prop_assert_eq!(step_h(x), step_g(-x));
    }

    #[test]
    fn smooth_step_is_monotone(mut xs in prop::collection::vec(-1.2f64..0.2, 2..20)) {
        xs.sort_by(f64::total_cmp);
        let v: Vec<f64> = xs.iter().map(|&x| step_g(x)).collect();
        prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
    }
}
