mod support;

use mbandit_core::confidence::{
    counterexample_values, optimistic_row, reward_radius, transition_radius, RadiusParams, StateStats,
    COUNTEREXAMPLE_EVI_TOLERANCE, COUNTEREXAMPLE_RADIUS,
};
use mbandit_core::learners::Learner;
use mbandit_core::model::GlobalMdp;
use mbandit_core::*;
use proptest::prelude::*;
use rand::Rng;
use support::*;

fn params(states: usize, arms: usize, episodes: usize, time: u64) -> RadiusParams {
    RadiusParams { states, arms, episodes, time }
}

#[test]
fn radius_formulas() {
    let p = params(4, 3, 3000, 1);
    let br = (72000f64.ln() / 2.0).sqrt();
    assert!((reward_radius(&p, 0) - br).abs() < 1e-12);
    assert!((reward_radius(&p, 0) - 2.3648).abs() < 1e-4);
    assert!((reward_radius(&p, 4 * 7) * 2.0 - reward_radius(&p, 7)).abs() < 1e-12);
    let bq = (2.0 * (2.0 * 4.0f64).ln()).sqrt();
    assert!((transition_radius(&params(2, 1, 1, 1), 1) - bq).abs() < 1e-12);
}

#[test]
fn radii_shrink_with_visits() {
    let p = params(5, 4, 100, 1234);
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for n in 0..500 {
        let cur = (reward_radius(&p, n), transition_radius(&p, n));
        assert!(cur.0 <= prev.0 && cur.1 <= prev.1);
        prev = cur;
    }
}

#[test]
fn ucbvi_bonus_is_scaled_reward_radius() {
    let stats = SufficientStats::new(&[4, 4, 4]);
    let p = params(4, 3, 3000, 1);
    let b = ucbvi_bonus(&stats, 0.5, &p).unwrap();
    assert!((b[1][2] - 2.0 * reward_radius(&p, 0)).abs() < 1e-12);
}

#[test]
fn inner_max_worked_example() {
    let row = optimistic_row(&[0.5, 0.5], 0.4, &[1.0, 0.0]);
    assert!((row[0] - 0.7).abs() < 1e-12 && (row[1] - 0.3).abs() < 1e-12);
    let brute = l1_ball_max(&[0.5, 0.5], 0.4, &[1.0, 0.0], 1e-4);
    assert!((brute - 0.7).abs() < 1e-9);
}

#[test]
fn zero_radii_reduce_to_planning_on_the_estimate() {
    let mut rng = stream(31, &["zero"]);
    let inst = random_instance(&[3, 2, 3], 0.9, &mut rng);
    let set = ConfidenceSet::new(&inst, ConfidenceRadii::zeros(&[3, 2, 3]));
    let sol = evi_optimistic_plan(&set, 0.9, EviOptions { tolerance: 1e-8, ..Default::default() }).unwrap();
    let mdp = GlobalMdp::assemble(&inst, DEFAULT_STATE_CAP).unwrap();
    let (opt, _) = optimal_value(&mdp, 0.9, 1e-8).unwrap();
    for (a, b) in sol.value.iter().zip(&opt) {
        assert!((a - b).abs() < 1e-7);
    }
}

#[test]
fn evi_refuses_large_state_spaces() {
    let stats = SufficientStats::new(&[11; 9]);
    let set = ConfidenceSet::from_stats(&stats, ConfidenceRadii::zeros(&[11; 9]));
    let err = evi_optimistic_plan(&set, 0.99, EviOptions::default()).unwrap_err();
    assert!(matches!(err, Error::ExponentialBarrier { .. }));
}

#[test]
fn counterexample_reproduces_published_values() {
    let v = verify_counterexample().unwrap();
    for (got, want) in v.as_array().iter().zip([6.42, 6.47, 5.96, 6.00]) {
        assert!((got - want).abs() <= 0.02, "{v:?}");
    }
    assert!(v.v1 < v.v2 && v.v3 < v.v4);
}

#[test]
fn counterexample_structure() {
    let ce = build_counterexample(COUNTEREXAMPLE_RADIUS, 0.0);
    assert!(ce.set.contains(&ce.m1));
    assert!(ce.set.contains(&ce.m2));
    assert!(!build_counterexample(0.1, 0.0).set.contains(&ce.m2));
    assert_eq!(gittins_indices(&ce.arm_b, 0.5).unwrap().values[1], 0.0);
    for pi in [&ce.pi1, &ce.pi2] {
        let a2 = pi.index(0, 1);
        assert!((0..3).all(|x| x == 1 || pi.index(0, x) < a2));
        assert!((0..3).all(|x| pi.index(1, x) < a2));
    }
    assert!(ce.pi1.index(0, 0) > ce.pi1.index(1, 0));
    assert!(ce.pi2.index(0, 0) < ce.pi2.index(1, 0));
}

#[test]
fn degenerate_set_gives_plain_evaluation() {
    let ce = build_counterexample(COUNTEREXAMPLE_RADIUS, 0.0);
    let set = ConfidenceSet::new(&ce.m1, ConfidenceRadii::zeros(&[3, 3]));
    let pi2: Policy = ce.pi2.clone().into();
    let v = evi_policy_value(&set, &pi2, 0.5, COUNTEREXAMPLE_EVI_TOLERANCE, DEFAULT_STATE_CAP).unwrap();
    let oracle = vi_policy(&ce.m1, |x| pi2.act(&GlobalState(x.to_vec())));
    for (a, b) in v.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-5);
    }
    let values = counterexample_values(&ce).unwrap();
    assert!((values.v2 - vi_optimal(&ce.m1)[encode(&[3, 3], &[0, 2])]).abs() < 1e-5);
}

#[test]
fn ucbvi_with_saturated_counts_plays_true_gittins() {
    let inst = scenario1_instance();
    let mut learner = Learner::new(&inst, &LearnerConfig::new(Algorithm::MbUcbvi, 10, 0)).unwrap();
    let n = 1u64 << 50;
    for (a, arm) in inst.arms.iter().enumerate() {
        for x in 0..4 {
            let next_counts = arm.transition[x].iter().map(|q| (q * n as f64).round() as u64).collect();
            learner.stats_mut().set(a, x, StateStats { count: n, mean_reward: arm.reward_mean[x], next_counts });
        }
    }
    let policy = learner.compute_policy(1, &mut stream(0, &["x"])).unwrap();
    let space = StateSpace::new(vec![4, 4, 4], DEFAULT_STATE_CAP).unwrap();
    let truth: Policy = gittins_policy(&inst).unwrap().into();
    assert_eq!(policy.tabulate(&space).actions, truth.tabulate(&space).actions);
}

#[test]
fn ucrl2_plans_over_every_random_walk_state() {
    let inst = scenario1_instance();
    let mut learner = Learner::new(&inst, &LearnerConfig::new(Algorithm::MbUcrl2, 10, 0)).unwrap();
    let policy = learner.compute_policy(1, &mut stream(0, &["x"])).unwrap();
    match policy {
        Policy::Tabular(t) => {
            assert_eq!(t.actions.len(), 64);
            assert!(t.actions.iter().all(|&a| a < 3));
        }
        Policy::Index(_) => panic!("MB-UCRL2 must return a tabular policy"),
    }
}

fn random_set<R: Rng>(sizes: &[usize], rng: &mut R) -> ConfidenceSet {
    let center = random_instance(sizes, 0.9, rng);
    let radii = ConfidenceRadii {
        reward: sizes.iter().map(|&s| (0..s).map(|_| rng.random::<f64>() * 0.3).collect()).collect(),
        transition: sizes.iter().map(|&s| (0..s).map(|_| rng.random::<f64>() * 0.6).collect()).collect(),
    };
    ConfidenceSet::new(&center, radii)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn inner_max_matches_ball_search(seed in any::<u64>(), s in 2usize..=3, radius in 0.0f64..2.0) {
        let mut rng = stream(seed, &["ball"]);
        let center = random_stochastic(s, &mut rng).remove(0);
        let values: Vec<f64> = (0..s).map(|_| rng.random::<f64>() * 10.0).collect();
        let row = optimistic_row(&center, radius, &values);
        let dist: f64 = row.iter().zip(&center).map(|(a, b)| (a - b).abs()).sum();
        prop_assert!(dist <= radius + 1e-12);
        prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12 && row.iter().all(|&p| p >= 0.0));
        let got: f64 = row.iter().zip(&values).map(|(a, b)| a * b).sum();
        let h = 2e-3;
        let brute = l1_ball_max(&center, radius, &values, h);
        // the grid misses the optimum by at most a few grid steps
        prop_assert!(got >= brute - 1e-9, "{got} < {brute}");
        prop_assert!(got <= brute + 4.0 * h * 10.0, "{got} >> {brute}");
    }

    #[test]
    fn enlarging_radii_never_lowers_evi_value(seed in any::<u64>(), grow in 0.0f64..0.5) {
        let mut rng = stream(seed, &["mono"]);
        let small = random_set(&[3, 2], &mut rng);
        let mut big = small.clone();
        let (a, x) = (rng.random_range(0..2), rng.random_range(0..2));
        big.radii.transition[a][x] += grow;
        big.radii.reward[1 - a][x] += grow / 2.0;
        let opts = || EviOptions { tolerance: 1e-9, ..Default::default() };
        let v = evi_optimistic_plan(&small, 0.9, opts()).unwrap().value;
        let w = evi_optimistic_plan(&big, 0.9, opts()).unwrap().value;
        for (p, q) in v.iter().zip(&w) {
            prop_assert!(q + 1e-8 >= *p);
        }
    }

    #[test]
    fn evi_sweeps_contract(seed in any::<u64>(), beta in 0.5f64..0.98) {
        let set = random_set(&[3, 3], &mut stream(seed, &["contract"]));
        let sol = evi_optimistic_plan(&set, beta, EviOptions { tolerance: 1e-9, ..Default::default() }).unwrap();
        for w in sol.updates.windows(2) {
            prop_assert!(w[1] <= beta * w[0] + 1e-12, "{} > {} * {}", w[1], beta, w[0]);
        }
    }

    #[test]
    fn evi_value_dominates_members(seed in any::<u64>()) {
        let mut rng = stream(seed, &["members"]);
        let set = random_set(&[2, 3], &mut rng);
        let sol = evi_optimistic_plan(&set, 0.9, EviOptions { tolerance: 1e-9, ..Default::default() }).unwrap();
        // a member: shift each row toward a random point of its ball
        let mut member = random_instance(&[2, 3], 0.9, &mut rng);
        for (a, arm) in member.arms.iter_mut().enumerate() {
            for x in 0..arm.state_count() {
                let t: f64 = rng.random::<f64>();
                let c = &set.transition_center[a][x];
                let d = &arm.transition[x];
                let dist: f64 = c.iter().zip(d).map(|(p, q)| (p - q).abs()).sum();
                let lambda = if dist > 0.0 { (t * set.radii.transition[a][x] / dist).min(1.0) } else { 0.0 };
                arm.transition[x] = c.iter().zip(d).map(|(p, q)| p + lambda * (q - p)).collect();
                arm.reward_mean[x] = set.reward_center[a][x] + (2.0 * t - 1.0) * set.radii.reward[a][x];
            }
        }
        prop_assert!(set.contains(&member));
        let v = vi_optimal(&member);
        for (p, q) in sol.value.iter().zip(&v) {
            prop_assert!(p + 1e-7 >= *q);
        }
    }

    #[test]
    fn ucbvi_inflated_value_is_optimistic(seed in any::<u64>(), count in 1u64..400) {
        let mut rng = stream(seed, &["ucbvi-opt"]);
        let truth = random_instance(&[3, 3], 0.9, &mut rng);
        let p = params(3, 2, 50, 1 + count * 3);
        let b = ucbvi_bonus(&SufficientStats::new(&[3, 3]), 0.9, &p).unwrap();
        let br = reward_radius(&p, 0);
        // empirical rewards anywhere in [r - b_r, r + b_r], exact transitions
        let mut inflated = truth.clone();
        for (a, arm) in inflated.arms.iter_mut().enumerate() {
            for x in 0..3 {
                let r_hat = arm.reward_mean[x] + (2.0 * rng.random::<f64>() - 1.0) * br;
                arm.reward_mean[x] = r_hat + b[a][x];
            }
        }
        let mdp = GlobalMdp::assemble(&inflated, DEFAULT_STATE_CAP).unwrap();
        let v = policy_value_exact(&mdp, &gittins_policy(&inflated).unwrap().into(), 0.9).unwrap();
        let v_star = vi_optimal(&truth);
        for (p, q) in v.iter().zip(&v_star) {
            prop_assert!(p + 1e-9 >= *q);
        }
    }
}
