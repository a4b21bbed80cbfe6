use stable_extrap::experiments::{
    decay_slope, run_alpha_profile, run_extrapolation_decay, run_noise_plateau, run_singular_bounds_sweep,
    TestFunction,
};
use stable_extrap::Execution;

fn plateau(n_list: &[usize], s: f64, seed: u64) -> Vec<f64> {
    run_noise_plateau(100, n_list, s, TestFunction::Runge, seed, Execution::default())
        .unwrap()
        .column("plateau")
        .unwrap()
}

#[test]
fn plateau_times_sqrt_n_is_roughly_constant() {
    let ns = [40_000usize, 400_000, 4_000_000];
    let t = run_noise_plateau(100, &ns, 1e-3, TestFunction::Runge, 11, Execution::default()).unwrap();
    let scaled = t.column("plateau_times_sqrt_N").unwrap();
    let lo = scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = scaled.iter().cloned().fold(0.0, f64::max);
    assert!(hi / lo <= 2.0, "{scaled:?}");
}

#[test]
fn plateau_is_linear_in_noise_level() {
    let a = plateau(&[40_000], 1e-3, 4)[0];
    let b = plateau(&[40_000], 2e-3, 4)[0];
    assert!((b / a - 2.0).abs() <= 0.6, "{}", b / a);
}

#[test]
fn noiseless_plateau_does_not_move() {
    let p = plateau(&[40_000, 400_000], 0.0, 0);
    assert!((p[0] / p[1] - 1.0).abs() < 0.05, "{p:?}");
}

#[test]
fn identical_seeds_give_identical_tables() {
    let a = run_noise_plateau(20, &[1600], 1e-3, TestFunction::Runge, 9, Execution::Sequential).unwrap();
    let b = run_noise_plateau(20, &[1600], 1e-3, TestFunction::Runge, 9, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn decay_interval_edges() {
    let f = run_extrapolation_decay(TestFunction::InvSquare, &[1.0, 1.4, 1.5], 25, Execution::default()).unwrap();
    assert!(decay_slope(&f, 1.0, 5, 25).unwrap() < 0.0);
    assert!(decay_slope(&f, 1.4, 5, 25).unwrap() < 0.0);
    assert!(decay_slope(&f, 1.5, 5, 25).unwrap() >= 0.0);

    let g = run_extrapolation_decay(TestFunction::InvTwoSquare, &[1.1, 1.3], 25, Execution::default()).unwrap();
    assert!(decay_slope(&g, 1.1, 5, 25).unwrap() < 0.0);
    assert!(decay_slope(&g, 1.3, 5, 25).unwrap() >= 0.0);
}

#[test]
fn singular_values_sit_between_their_bounds() {
    let t = run_singular_bounds_sweep(&[16, 64, 100, 256]).unwrap();
    for row in &t.rows {
        assert!(row[2] <= row[3] && row[4] >= row[5]);
        assert!(row[6] <= row[7] && row[8] >= row[9]);
    }
    // The lower bound jumps where M = floor(sqrt(N)/2) increments.
    let lower = t.column("legendre_lower_bound").unwrap();
    assert!(lower[2] < lower[1] * 100.0 / 64.0);
}

#[test]
fn alpha_profile_for_double_precision() {
    let t = run_alpha_profile(1.0 + 2f64.sqrt(), 2.2e-16, 1.0, 200).unwrap();
    let factor = t.column("factor").unwrap();
    assert!(factor.windows(2).all(|w| w[1] >= w[0]));
}
