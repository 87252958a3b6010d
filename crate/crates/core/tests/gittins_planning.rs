mod support;

use mbandit_core::environments::SCENARIO1_CHAINS;
use mbandit_core::evaluation::ExactRegret;
use mbandit_core::model::GlobalMdp;
use mbandit_core::planning::policy_value_tabular;
use mbandit_core::*;
use proptest::prelude::*;
use support::*;

const PUBLISHED_INDICES: [[f64; 4]; 3] = [
    [0.276, 0.2894, 0.392, 1.0],
    [0.35, 0.256, 0.2892, 0.7],
    [0.4, 0.250, 0.286, 0.65],
];

#[test]
fn random_walk_indices_match_published_table() {
    for (chain, expected) in SCENARIO1_CHAINS.iter().zip(PUBLISHED_INDICES) {
        let table = gittins_indices(&chain.arm(), 0.99).unwrap();
        for (got, want) in table.values.iter().zip(expected) {
            assert!((got - want).abs() <= 1e-3, "{got} vs {want}");
        }
    }
}

#[test]
fn indices_match_stopping_set_oracle() {
    let mut rng = stream(11, &["gittins-oracle"]);
    for i in 0..60 {
        let s = 1 + i % 7;
        let arm = random_arm(s, &mut rng);
        for beta in [0.5, 0.9, 0.99] {
            let got = gittins_indices(&arm, beta).unwrap().values;
            let want = gittins_brute(&arm.transition, &arm.reward_mean, beta);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() <= 1e-8, "S={s} beta={beta}: {got:?} vs {want:?}");
            }
        }
    }
}

#[test]
fn index_lies_between_reward_and_max_reward() {
    let mut rng = stream(12, &["bounds"]);
    for _ in 0..50 {
        let arm = random_arm(5, &mut rng);
        let idx = gittins_indices(&arm, 0.95).unwrap().values;
        let max_r = arm.reward_mean.iter().cloned().fold(f64::MIN, f64::max);
        for (i, r) in idx.iter().zip(&arm.reward_mean) {
            assert!(*i >= r - 1e-12 && *i <= max_r + 1e-12);
        }
    }
}

#[test]
fn random_walk_policy_starts_on_third_chain() {
    let policy = gittins_policy(&scenario1_instance()).unwrap();
    assert_eq!(policy.act(&[0, 0, 0]), 2);
}

#[test]
fn gittins_value_matches_value_iteration_on_random_walks() {
    let inst = scenario1_instance();
    let mdp = GlobalMdp::assemble(&inst, DEFAULT_STATE_CAP).unwrap();
    let policy: Policy = gittins_policy(&inst).unwrap().into();
    let exact = policy_value_exact(&mdp, &policy, inst.discount).unwrap();
    let oracle = vi_policy(&inst, |x| policy.act(&GlobalState(x.to_vec())));
    let start = mdp.space().encode(&[0, 0, 0]);
    assert!((exact[start] - oracle[start]).abs() < 1e-6);
    let (opt, _) = optimal_value(&mdp, inst.discount, 1e-8).unwrap();
    assert!((opt[start] - exact[start]).abs() < 1e-6);
    let vi = vi_optimal(&inst);
    assert!((vi[start] - exact[start]).abs() < 1e-6);
}

#[test]
fn worst_fixed_policy_has_positive_regret() {
    let inst = scenario1_instance();
    let tables = gittins_policy(&inst).unwrap().tables;
    let worst = (0..3)
        .min_by(|&a, &b| tables[a][0].total_cmp(&tables[b][0]))
        .unwrap();
    let tab = Policy::Tabular(TabularPolicy::new(
        mbandit_core::StateSpace::new(vec![4, 4, 4], DEFAULT_STATE_CAP).unwrap(),
        vec![worst; 64],
    ));
    let mut exact = ExactRegret::new(&inst, DEFAULT_STATE_CAP).unwrap();
    let delta = exact.delta(&tab, &GlobalState(vec![0, 0, 0])).unwrap();
    let v_star = vi_optimal(&inst)[0];
    let v_worst = vi_policy(&inst, |_| worst)[0];
    assert!(delta > 0.0);
    assert!((delta - (v_star - v_worst)).abs() < 1e-6, "{delta} vs {}", v_star - v_worst);
}

#[test]
fn gittins_dominates_every_tabular_policy_on_tiny_instances() {
    let mut rng = stream(13, &["enumeration"]);
    for _ in 0..20 {
        let inst = random_instance(&[2, 2], 0.9, &mut rng);
        let mdp = GlobalMdp::assemble(&inst, DEFAULT_STATE_CAP).unwrap();
        let g = policy_value_exact(&mdp, &gittins_policy(&inst).unwrap().into(), 0.9).unwrap();
        for actions in all_policies(4, 2) {
            let v = solve_policy(&inst, &actions);
            for (a, b) in g.iter().zip(&v) {
                assert!(a + 1e-8 >= *b);
            }
        }
    }
}

#[test]
fn global_rows_are_sparse_and_marginalize_to_arm_rows() {
    let inst = scenario1_instance();
    let mdp = GlobalMdp::assemble(&inst, DEFAULT_STATE_CAP).unwrap();
    assert_eq!(mdp.state_count(), 64);
    assert_eq!(mdp.action_count(), 3);
    for s in 0..64 {
        let x = mdp.space().decode(s);
        for a in 0..3 {
            let row = mdp.transition(s, a);
            assert!(row.len() <= 4);
            let mut marginal = [0.0; 4];
            for &(t, p) in row {
                let y = mdp.space().decode(t);
                for b in (0..3).filter(|&b| b != a) {
                    assert_eq!(x.0[b], y.0[b]);
                }
                marginal[y.0[a]] += p;
            }
            for (m, q) in marginal.iter().zip(&inst.arms[a].transition[x.0[a]]) {
                assert_eq!(m, q);
            }
            assert_eq!(mdp.reward(s, a), inst.arms[a].reward_mean[x.0[a]]);
        }
    }
}

#[test]
fn exact_values_satisfy_bellman_residual() {
    let mut rng = stream(14, &["residual"]);
    let inst = random_instance(&[3, 3, 2], 0.99, &mut rng);
    let mdp = GlobalMdp::assemble(&inst, DEFAULT_STATE_CAP).unwrap();
    let pol: Policy = gittins_policy(&inst).unwrap().into();
    let tab = pol.tabulate(mdp.space());
    let v = policy_value_tabular(&mdp, &tab, 0.99).unwrap();
    for s in 0..mdp.state_count() {
        let a = tab.act_id(s);
        let next: f64 = mdp.transition(s, a).iter().map(|&(t, p)| p * v[t]).sum();
        assert!((v[s] - mdp.reward(s, a) - 0.99 * next).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gittins_policy_is_optimal(seed in any::<u64>(), n in 1usize..=3, s in 1usize..=4, beta in 0.3f64..0.97) {
        let sizes: Vec<usize> = (0..n).map(|a| if a == 0 { s } else { 1 + (s + a) % 4 }).collect();
        let inst = random_instance(&sizes, beta, &mut stream(seed, &["opt"]));
        prop_assume!(inst.global_state_count() <= 256);
        let mdp = GlobalMdp::assemble(&inst, DEFAULT_STATE_CAP).unwrap();
        let (opt, _) = optimal_value(&mdp, beta, 1e-9).unwrap();
        let g = policy_value_exact(&mdp, &gittins_policy(&inst).unwrap().into(), beta).unwrap();
        for (a, b) in opt.iter().zip(&g) {
            prop_assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn index_is_monotone_in_reward(seed in any::<u64>(), s in 1usize..=6, x in 0usize..6, delta in 1e-3f64..0.5) {
        let x = x % s;
        let arm = random_arm(s, &mut stream(seed, &["mono"]));
        let before = gittins_indices(&arm, 0.9).unwrap().values;
        let mut raised = arm.clone();
        raised.reward_mean[x] += delta;
        let after = gittins_indices(&raised, 0.9).unwrap().values;
        prop_assert!(after[x] >= before[x] - 1e-12);
    }

    #[test]
    fn indices_scale_with_rewards(seed in any::<u64>(), c in 0.05f64..1.0) {
        let inst = random_instance(&[3, 4, 2], 0.95, &mut stream(seed, &["scale"]));
        let mut scaled = inst.clone();
        for arm in &mut scaled.arms {
            arm.reward_mean.iter_mut().for_each(|r| *r *= c);
        }
        let p = gittins_policy(&inst).unwrap();
        let q = gittins_policy(&scaled).unwrap();
        for a in 0..3 {
            for (u, v) in p.tables[a].iter().zip(&q.tables[a]) {
                prop_assert!((u * c - v).abs() <= 1e-10);
            }
        }
        for x in support::global_states(&[3, 4, 2]) {
            let (i, j) = (p.act(&x), q.act(&x));
            // equal actions unless the scaled indices tie within rounding
            prop_assert!(i == j || (q.tables[i][x[i]] - q.tables[j][x[j]]).abs() < 1e-10);
        }
    }

    #[test]
    fn argmax_ignores_common_shift(seed in any::<u64>(), shift in -5.0f64..5.0) {
        let inst = random_instance(&[3, 3, 3], 0.9, &mut stream(seed, &["shift"]));
        let p = gittins_policy(&inst).unwrap();
        let shifted = IndexPolicy::new(
            p.tables.iter().map(|t| t.iter().map(|v| v + shift).collect()).collect(),
        );
        for x in support::global_states(&[3, 3, 3]) {
            let (i, j) = (p.act(&x), shifted.act(&x));
            prop_assert!(i == j || (p.tables[i][x[i]] - p.tables[j][x[j]]).abs() < 1e-12);
        }
    }
}
