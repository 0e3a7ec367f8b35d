use colpitts_sync::*;

const P: OscillatorParams = OscillatorParams::TYPICAL;

fn objective_cfg() -> SimConfig {
    SimConfig { dt: 5e-3, t_activate: 0.0, ..SimConfig::default() }
}

#[test]
fn tss_does_not_depend_on_record_stride() {
    let g = Gains::new(0.1, 2.0, &P).unwrap();
    let a = simulate_pair(&P, &g, &SimConfig { record_stride: 1, ..SimConfig::default() }).unwrap();
    let b = simulate_pair(&P, &g, &SimConfig { record_stride: 37, ..SimConfig::default() }).unwrap();
    assert_eq!(a.tss.to_bits(), b.tss.to_bits());
    assert!(b.len() < a.len());
}

#[test]
fn tss_is_additive_over_adjacent_windows() {
    let g = Gains::new(0.0, 2.4982, &P).unwrap();
    let traj = simulate_pair(&P, &g, &SimConfig { record_stride: 1, ..SimConfig::default() }).unwrap();
    let full = Trajectory::from_error_samples(traj.times.clone(), traj.errors.clone()).tss;
    let mid = traj.len() / 3;
    let left = Trajectory::from_error_samples(traj.times[..=mid].to_vec(), traj.errors[..=mid].to_vec()).tss;
    let right = Trajectory::from_error_samples(traj.times[mid..].to_vec(), traj.errors[mid..].to_vec()).tss;
    assert!(((left + right) - full).abs() <= 1e-9 * full);
    assert!((full - traj.tss).abs() <= 1e-9 * full);
}

#[test]
fn cost_is_flat_in_k3_near_the_optimum() {
    let cfg = objective_cfg();
    let costs: Vec<f64> = [2.0, 2.25, 2.5, 2.75, 3.0]
        .iter()
        .map(|k3| evaluate_gains(0.0, *k3, &P, &cfg))
        .collect();
    let lo = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = costs.iter().copied().fold(0.0, f64::max);
    assert!((hi - lo) / lo < 5e-3, "{costs:?}");
}

#[test]
fn cost_grows_with_k1_at_fixed_k3() {
    let cfg = objective_cfg();
    let base = evaluate_gains(0.0, 2.5, &P, &cfg);
    let shifted = evaluate_gains(0.3, 2.5, &P, &cfg);
    assert!(shifted > base);
}

#[test]
fn repeated_runs_are_bit_identical() {
    let g = Gains::new(0.2, 1.5, &P).unwrap();
    let cfg = SimConfig { t_final: 30.0, t_activate: 5.0, ..SimConfig::default() };
    let a = simulate_pair(&P, &g, &cfg).unwrap();
    let b = simulate_pair(&P, &g, &cfg).unwrap();
    assert_eq!(a.tss.to_bits(), b.tss.to_bits());
    assert_eq!(a.errors, b.errors);
}

#[test]
fn objective_rejects_gains_outside_the_stable_region() {
    let cfg = objective_cfg();
    assert_eq!(evaluate_gains(P.b, 2.0, &P, &cfg), DIVERGED_COST);
    assert_eq!(evaluate_gains(0.0, -1.0, &P, &cfg), DIVERGED_COST);
}
