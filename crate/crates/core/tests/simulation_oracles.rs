//! Closed forms checked against the coupled-walk simulators through the
//! public API only.

use cwf_core::analytic::{AwgnScenario, QueueScenario};
use cwf_core::montecarlo::{
    simulate_awgn_multiuser, simulate_awgn_multiuser_with, simulate_block_fading,
    simulate_block_fading_random, simulate_queue, Cancellation,
};
use cwf_core::{
    message_threshold, rayleigh_order_means, thm1_lengths, thm2_lengths, thm3_coeffs, GainVector,
    PowerLevel, TrialPlan,
};

fn pw(p: f64) -> PowerLevel<f64> {
    PowerLevel::new(p).unwrap()
}

#[test]
fn three_user_lengths_follow_the_phase_sum() {
    let sc = AwgnScenario::new(vec![200, 500, 900], pw(2.0), 0.0).unwrap();
    let out = simulate_awgn_multiuser(&sc, &TrialPlan::new(400, 11).unwrap()).unwrap();
    let l = thm1_lengths(&sc).unwrap();
    for s in 0..3 {
        let rel = (out.mean[s] - l[s]).abs() / l[s];
        assert!(rel < 0.05, "user {}: sim {} vs {}", s + 1, out.mean[s], l[s]);
    }
    assert_eq!(out.cap_hits, 0);
}

#[test]
fn every_phase_runs_at_its_capacity() {
    let sc = AwgnScenario::new(vec![200, 500, 900], pw(1.0), 0.0).unwrap();
    let out = simulate_awgn_multiuser(&sc, &TrialPlan::new(300, 2).unwrap()).unwrap();
    let caps = sc.capacities();
    for ph in &out.phase_rates {
        let z = (ph.rate.mean - caps[ph.active - 1]) / ph.rate.std_err;
        assert!(z.abs() < 4.0, "user {} with {} active: z = {z}", ph.user, ph.active);
    }
}

#[test]
fn control_run_without_cancellation_is_slower_for_everyone_but_the_first() {
    let sc = AwgnScenario::new(vec![200, 900], pw(1.0), 0.0).unwrap();
    let plan = TrialPlan::new(300, 4).unwrap();
    let on = simulate_awgn_multiuser_with(&sc, &plan, Cancellation::Enabled).unwrap();
    let off = simulate_awgn_multiuser_with(&sc, &plan, Cancellation::Disabled).unwrap();
    assert_eq!(on.mean[0], off.mean[0]);
    assert!(off.mean[1] > on.mean[1] * 1.1);
}

#[test]
fn outcomes_do_not_depend_on_thread_count() {
    let plan = TrialPlan::new(50, 99).unwrap();
    let run = || simulate_block_fading_random(3, 120, pw(1.0), &plan).unwrap();
    let many = run();
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(run);
    assert_eq!(many, one);
}

#[test]
fn fixed_fading_gains_follow_the_coefficients() {
    let g = GainVector::new(vec![2.0, 1.0, 0.4]).unwrap();
    let a = thm3_coeffs(&g, pw(1.0)).unwrap();
    let gamma: f64 = message_threshold(400).unwrap();
    let out = simulate_block_fading(&g, 400, pw(1.0), &TrialPlan::new(300, 5).unwrap()).unwrap();
    for (j, l) in a.lengths(gamma, 0.0).iter().enumerate() {
        assert!((out.mean[j] - l).abs() / l < 0.05, "user {}: {} vs {l}", j + 1, out.mean[j]);
    }
}

#[test]
fn random_gains_sit_near_the_typical_gain_prediction() {
    // the closed form at mean order statistics is only a first-order guide
    let g = GainVector::new(rayleigh_order_means(2)).unwrap();
    let a = thm3_coeffs(&g, pw(1.0)).unwrap();
    let gamma: f64 = message_threshold(300).unwrap();
    let out =
        simulate_block_fading_random(2, 300, pw(1.0), &TrialPlan::new(2000, 8).unwrap()).unwrap();
    assert!(out.mean[0] < out.mean[1]);
    let typical = a.lengths(gamma, 0.0);
    assert!(out.mean[0] > 0.5 * typical[0] && out.mean[0] < 3.0 * typical[0]);
}

#[test]
fn queue_reduces_to_single_shot_for_long_intervals() {
    let sc = AwgnScenario::new(vec![300, 1000], pw(1.0), 0.0).unwrap();
    let q = QueueScenario::new(sc.clone(), 5000.0).unwrap();
    let b = thm2_lengths(&q).unwrap();
    assert_eq!(b.lengths(), thm1_lengths(&sc).unwrap());
    let out = simulate_queue(&q, &TrialPlan::new(300, 6).unwrap()).unwrap();
    assert!(!out.diverging);
}

#[test]
fn single_precision_path_agrees_with_double() {
    let sc32 = AwgnScenario::<f32>::new(vec![300, 1000], PowerLevel::new(1.0f32).unwrap(), 0.0)
        .unwrap();
    let sc64 = AwgnScenario::new(vec![300, 1000], pw(1.0), 0.0).unwrap();
    let l32 = thm1_lengths(&sc32).unwrap();
    let l64 = thm1_lengths(&sc64).unwrap();
    for (a, b) in l32.iter().zip(&l64) {
        assert!((*a as f64 - b).abs() / b < 1e-5);
    }
}
