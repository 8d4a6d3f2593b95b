use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use negligible_core::connection::{parallel_transport, propagate, pullback, ConnectionForm, Diffeo, PiecewisePath};
use negligible_core::counterexamples::noextension_scenario;
use negligible_core::OpenBox;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-3;

fn point2(lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, 2)
}

fn matrices(rank: usize) -> impl Strategy<Value = Vec<DMatrix<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, rank * rank), 2)
        .prop_map(move |m| m.into_iter().map(|e| DMatrix::from_row_slice(rank, rank, &e)).collect())
}

fn polyline(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> PiecewisePath {
    let pts: Vec<Vec<f64>> = (0..n).map(|_| (0..2).map(|_| rng.gen_range(lo..hi)).collect()).collect();
    PiecewisePath::polyline(&pts).unwrap()
}

#[test]
fn standard_transport_is_trivial() {
    let conn = ConnectionForm::standard(OpenBox::cube(2, -1e3, 1e3).unwrap(), 2).unwrap();
    let p = PiecewisePath::segment(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
    let v = parallel_transport(&conn, &p, &[1.0, -2.0], STEP).unwrap();
    assert_eq!(v.as_slice(), &[1.0, -2.0]);
}

#[test]
fn noextension_section_is_reproduced_by_transport_around_q() {
    // Uniqueness of parallel sections: the closed form off Q must equal the
    // transport of its value at one point, along a path avoiding Q.
    let sc = noextension_scenario(2).unwrap();
    let start = [-2.0, -2.0];
    let v0 = sc.eval(&start).unwrap();
    for end in [[0.3, 0.5], [-0.5, 1.5], [1.5, -0.5], [0.0, 2.5]] {
        let mut pts = vec![start.to_vec(), vec![-2.0, 0.5], vec![end[0], 0.5], end.to_vec()];
        pts.dedup();
        let path = PiecewisePath::polyline(&pts).unwrap();
        let v = parallel_transport(&sc.connection, &path, &v0, STEP).unwrap();
        let exact = sc.eval(&end).unwrap()[0];
        assert!((v[0] - exact).abs() < 1e-9, "end {end:?}: {} vs {exact}", v[0]);
    }
}

#[test]
fn pullback_identity_on_the_noextension_connection() {
    let conn = noextension_scenario(2).unwrap().connection;
    let diffeos = [
        Diffeo::translation(OpenBox::cube(2, -2.0, 2.0).unwrap(), vec![0.5, -0.3]).unwrap(),
        Diffeo::axis_swap(OpenBox::cube(2, -2.5, 2.5).unwrap(), 0, 1).unwrap(),
        Diffeo::rotation(
            OpenBox::cube(2, -2.0, 2.0).unwrap(),
            OpenBox::cube(2, -3.0, 3.0).unwrap(),
            0,
            1,
            PI / 6.0,
            &[0.0, 0.0],
        )
        .unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for phi in &diffeos {
        let pulled = pullback(&conn, phi).unwrap();
        for _ in 0..10 {
            let path = polyline(&mut rng, 4, -1.9, 1.9);
            let a = parallel_transport(&pulled, &path, &[1.0], STEP).unwrap();
            let b = parallel_transport(&conn, &path.mapped(phi), &[1.0], STEP).unwrap();
            assert!((a[0] - b[0]).abs() <= 2e-6, "{} vs {}", a[0], b[0]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn constant_rank_one_transport_matches_closed_form(c in matrices(1), p in point2(-1.0, 1.0), q in point2(-1.0, 1.0)) {
        let conn = ConnectionForm::constant(OpenBox::cube(2, -2.0, 2.0).unwrap(), c.clone()).unwrap();
        let path = PiecewisePath::polyline(&[p.clone(), vec![p[0], q[1]], q.clone()]).unwrap();
        let v = parallel_transport(&conn, &path, &[1.5], STEP).unwrap();
        let exact = 1.5 * (-(c[0][(0, 0)] * (q[0] - p[0]) + c[1][(0, 0)] * (q[1] - p[1]))).exp();
        prop_assert!((v[0] - exact).abs() < 1e-10 * exact.abs().max(1.0));
    }

    #[test]
    fn transport_is_linear(c in matrices(2), p in point2(-1.0, 1.0), q in point2(-1.0, 1.0), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let conn = ConnectionForm::constant(OpenBox::cube(2, -2.0, 2.0).unwrap(), c).unwrap();
        let path = PiecewisePath::segment(&p, &q).unwrap();
        let (v, w) = ([1.0, 0.5], [-0.3, 2.0]);
        let combo: Vec<f64> = v.iter().zip(&w).map(|(x, y)| a * x + b * y).collect();
        let tv = parallel_transport(&conn, &path, &v, STEP).unwrap();
        let tw = parallel_transport(&conn, &path, &w, STEP).unwrap();
        let tc = parallel_transport(&conn, &path, &combo, STEP).unwrap();
        prop_assert!((tc - (tv * a + tw * b)).amax() < 1e-10);
    }

    #[test]
    fn reversed_path_returns_the_start_value(c in matrices(3), seed in 0u64..1000) {
        let conn = ConnectionForm::constant(OpenBox::cube(2, -2.0, 2.0).unwrap(), c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let path = polyline(&mut rng, 3, -1.0, 1.0);
        let v0 = [0.2, -1.0, 0.7];
        let there = parallel_transport(&conn, &path, &v0, STEP).unwrap();
        let back = parallel_transport(&conn, &path.reversed(), there.as_slice(), STEP).unwrap();
        prop_assert!((back - DVector::from_column_slice(&v0)).amax() < 1e-9);
    }

    #[test]
    fn concatenation_composes_propagators(seed in 0u64..1000) {
        let conn = noextension_scenario(2).unwrap().connection;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let first = polyline(&mut rng, 3, -1.5, 1.5);
        let mut pts = vec![first.end()];
        pts.extend((0..2).map(|_| (0..2).map(|_| rng.gen_range(-1.5..1.5)).collect::<Vec<f64>>()));
        let second = PiecewisePath::polyline(&pts).unwrap();
        let whole = first.then(&second).unwrap();
        let id = DMatrix::identity(1, 1);
        let x1 = propagate(&conn, &first, id.clone(), STEP).unwrap();
        let x2 = propagate(&conn, &second, id.clone(), STEP).unwrap();
        let x = propagate(&conn, &whole, id, STEP).unwrap();
        prop_assert!((x - x2 * x1).amax() < 1e-10);
    }

    #[test]
    fn pullback_by_translation_shifts_transport(p in point2(-1.5, 1.5), q in point2(-1.5, 1.5), dx in -0.9f64..0.9, dy in -0.9f64..0.9) {
        let conn = noextension_scenario(2).unwrap().connection;
        let phi = Diffeo::translation(OpenBox::cube(2, -2.0, 2.0).unwrap(), vec![dx, dy]).unwrap();
        let pulled = pullback(&conn, &phi).unwrap();
        let path = PiecewisePath::segment(&p, &q).unwrap();
        let a = parallel_transport(&pulled, &path, &[1.0], STEP).unwrap();
        let shifted = PiecewisePath::segment(&[p[0] + dx, p[1] + dy], &[q[0] + dx, q[1] + dy]).unwrap();
        let b = parallel_transport(&conn, &shifted, &[1.0], STEP).unwrap();
        prop_assert!((a[0] - b[0]).abs() < 1e-9);
    }
}
