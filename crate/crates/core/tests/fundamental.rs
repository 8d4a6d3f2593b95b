use nalgebra::DMatrix;
use negligible_core::fundamental::{fundamental_matrix, liouville_defect, parameter_continuity_modulus, ParamGrid};
use negligible_core::Result;
use proptest::prelude::*;

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Time- and parameter-dependent coefficient with entries built from `seed`.
fn coefficient(rank: usize, seed: &[f64]) -> impl Fn(f64, &[f64]) -> Result<DMatrix<f64>> + Sync + '_ {
    move |t, y| {
        let p = y.first().copied().unwrap_or(0.0);
        Ok(DMatrix::from_fn(rank, rank, |i, j| {
            let s = seed[i * rank + j];
            s * (t * (1.0 + i as f64) + p * (1.0 + j as f64)).sin() + 0.3 * s * s
        }))
    }
}

#[test]
fn nilpotent_constant_coefficient() {
    let a = |_: f64, _: &[f64]| Ok(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
    let t0 = 0.25;
    let fs = fundamental_matrix(a, t0, &linspace(-2.0, 3.0, 21), ParamGrid::none(), 2, 1e-3).unwrap();
    for (ti, &t) in fs.times().iter().enumerate() {
        let exact = DMatrix::from_row_slice(2, 2, &[1.0, t - t0, 0.0, 1.0]);
        assert!((fs.at(ti, 0) - exact).amax() <= 1e-8, "t = {t}");
    }
}

#[test]
fn scalar_case_matches_the_exponential() {
    // X' = cos(t) y X, X(0) = 1  =>  X = exp(y sin t).
    let a = |t: f64, y: &[f64]| Ok(DMatrix::from_element(1, 1, y[0] * t.cos()));
    let params = ParamGrid::new(vec![linspace(-1.0, 1.0, 5)]).unwrap();
    let fs = fundamental_matrix(a, 0.0, &linspace(-3.0, 3.0, 13), params, 1, 1e-3).unwrap();
    for pk in 0..fs.params().len() {
        let y = fs.params().point(pk)[0];
        for (ti, &t) in fs.times().iter().enumerate() {
            assert!((fs.at(ti, pk)[(0, 0)] - (y * t.sin()).exp()).abs() < 1e-10);
        }
    }
    // Oracle: |d/dy exp(y sin t)| <= e on this grid, so difference quotients stay below it.
    assert!(parameter_continuity_modulus(&fs) <= std::f64::consts::E);
}

#[test]
fn liouville_defect_converges_at_fourth_order() {
    let seed = [0.9, -0.4, 0.7, 0.5, -0.8, 0.3, 0.2, 0.6, -0.5];
    let a = coefficient(3, &seed);
    let times = linspace(0.0, 4.0, 5);
    let defects: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&h| {
            let fs = fundamental_matrix(&a, 0.0, &times, ParamGrid::none(), 3, h).unwrap();
            liouville_defect(&fs, &a).unwrap()
        })
        .collect();
    let orders: Vec<f64> = defects.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    assert!(orders.iter().all(|&p| p >= 3.5), "defects {defects:?}, orders {orders:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cocycle_identity(rank in 1usize..=3, seed in prop::collection::vec(-1.0f64..1.0, 9), t1 in -1.5f64..1.5, y in -1.0f64..1.0) {
        // X(t; t0) = X(t; t1) X(t1; t0).
        let a = coefficient(rank, &seed);
        let grid = linspace(-2.0, 2.0, 9);
        let params = ParamGrid::new(vec![vec![y]]).unwrap();
        let from0 = fundamental_matrix(&a, 0.0, &[grid.clone(), vec![t1]].concat(), params.clone(), rank, 1e-3).unwrap();
        let from1 = fundamental_matrix(&a, t1, &grid, params, rank, 1e-3).unwrap();
        let x10 = from0.at(from0.time_index(t1).unwrap(), 0);
        for &t in &grid {
            let lhs = from0.at(from0.time_index(t).unwrap(), 0);
            let rhs = from1.at(from1.time_index(t).unwrap(), 0) * x10;
            prop_assert!((lhs - rhs).amax() < 1e-8 * lhs.amax().max(1.0));
        }
    }

    #[test]
    fn backward_run_inverts_forward_run(rank in 1usize..=3, seed in prop::collection::vec(-1.0f64..1.0, 9), t1 in 0.2f64..2.0) {
        let a = coefficient(rank, &seed);
        let fwd = fundamental_matrix(&a, 0.0, &[t1], ParamGrid::none(), rank, 1e-3).unwrap();
        let back = fundamental_matrix(&a, t1, &[0.0], ParamGrid::none(), rank, 1e-3).unwrap();
        let x = fwd.at(fwd.time_index(t1).unwrap(), 0);
        let y = back.at(back.time_index(0.0).unwrap(), 0);
        prop_assert!((y * x - DMatrix::identity(rank, rank)).amax() < 1e-9);
    }
}
