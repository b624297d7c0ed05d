use std::sync::Arc;

use kg_core::diagnostics::error_vs_exact;
use kg_core::field::integrate;
use kg_core::{
    drift_series, energy, run, FftPlan, Grid, InitialCondition, Profile, RealField, SchemeOptions, SolverState, Velocity,
};
use num_complex::Complex64;
use proptest::prelude::*;

fn solve(n: usize, workers: usize, ic: &InitialCondition, dt: f64, steps: u64) -> (SolverState, FftPlan) {
    let mut plan = FftPlan::new(Arc::new(Grid::cube(n).unwrap()), workers).unwrap();
    let mut state = SolverState::initialize(ic, dt, &mut plan, SchemeOptions::default()).unwrap();
    run(&mut state, steps, &mut plan, 0).unwrap();
    (state, plan)
}

#[test]
fn worker_count_does_not_change_solution() {
    let ic = InitialCondition::gaussian(0.5, 1.0);
    let (reference, _) = solve(16, 1, &ic, 0.01, 30);
    for workers in [2, 4] {
        let (s, _) = solve(16, workers, &ic, 0.01, 30);
        let diff = s.u_now().max_abs_diff(reference.u_now());
        assert!(diff <= 1e-11, "p = {workers}: {diff:e}");
    }
}

#[test]
fn energy_is_identical_across_worker_counts() {
    let ic = InitialCondition::gaussian(0.5, 1.0);
    let totals: Vec<f64> = [1, 2, 3]
        .iter()
        .map(|&p| {
            let (s, mut plan) = solve(12, p, &ic, 0.01, 5);
            energy(s.uhat_prev(), s.uhat_now(), s.dt(), &mut plan).unwrap().total
        })
        .collect();
    assert!(totals.windows(2).all(|w| w[0] == w[1]), "{totals:?}");
}

#[test]
fn real_data_stays_real() {
    let (s, _) = solve(32, 2, &InitialCondition::gaussian(0.5, 1.0), 0.01, 100);
    let imag = s.u_now().data().iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    assert!(imag <= 1e-10, "{imag:e}");
}

#[test]
fn plane_wave_converges_at_second_order() {
    // A single mode stays a single mode, so a coarse grid resolves it exactly.
    let ic = InitialCondition::plane_wave(Complex64::new(0.1, 0.0), [1, 0, 0]);
    let exact = ic.exact_solution().unwrap();
    let errors: Vec<f64> = [(0.02, 15), (0.01, 30), (0.005, 60)]
        .iter()
        .map(|&(dt, steps)| {
            let (s, _) = solve(8, 2, &ic, dt, steps);
            error_vs_exact(&s, &exact).unwrap().linf
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 2.0).abs() < 0.05, "{errors:?}");
    }
}

#[test]
fn linear_regime_conserves_energy_to_rounding() {
    let mut plan = FftPlan::new(Arc::new(Grid::cube(16).unwrap()), 2).unwrap();
    // Band-limited data with no Nyquist content, where the discrete energy is
    // exactly the invariant of the linear scheme.
    let ic = InitialCondition {
        displacement: Profile::Custom(Arc::new(|x| Complex64::new(1e-6 * (x[0].sin() + (2.0 * x[1]).cos() * x[2].sin()), 0.0))),
        velocity: Velocity::Profile(Profile::Custom(Arc::new(|x| Complex64::new(1e-6 * (3.0 * x[2]).cos(), 0.0)))),
    };
    let mut s = SolverState::initialize(&ic, 0.05, &mut plan, SchemeOptions::default()).unwrap();
    let series = run(&mut s, 60, &mut plan, 10).unwrap();
    assert_eq!(series.len(), 7);
    assert_eq!(series.last().unwrap().step_index, 60);
    let d = drift_series(&series).unwrap();
    assert!(d < 1e-11, "{d:e}");
}

#[test]
fn dealiasing_changes_only_nonlinear_runs() {
    let run_with = |amplitude: f64, dealias: bool| {
        let mut plan = FftPlan::new(Arc::new(Grid::cube(16).unwrap()), 1).unwrap();
        let options = SchemeOptions { dealias, ..Default::default() };
        let mut s = SolverState::initialize(&InitialCondition::gaussian(amplitude, 0.5), 0.01, &mut plan, options).unwrap();
        run(&mut s, 10, &mut plan, 0).unwrap();
        s.u_now().clone()
    };
    assert!(run_with(0.0, true).max_abs() == 0.0);
    assert!(run_with(1.0, true).max_abs_diff(&run_with(1.0, false)) > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn integration_is_linear(a in -5.0f64..5.0, b in -5.0f64..5.0, k in 0usize..4) {
        let grid = Arc::new(Grid::cube(8).unwrap());
        let f = RealField::from_fn(grid.clone(), |x| Complex64::new((k as f64 * x[0]).cos() + 1.0, x[1].sin()));
        let g = RealField::from_fn(grid.clone(), |x| Complex64::new(x[2].cos().powi(2), 0.5));
        let lhs = integrate(&f.axpby(a.into(), &g, b.into()).unwrap());
        let rhs = a * integrate(&f) + b * integrate(&g);
        prop_assert!((lhs - rhs).norm() <= 1e-11 * (1.0 + rhs.norm()));
    }
}
