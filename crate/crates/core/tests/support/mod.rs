//! Independent reference implementations used as test oracles. Nothing here
//! calls into the planning code under test.

#![allow(dead_code)]

use mbandit_core::{ArmModel, BanditInstance};
use rand::Rng;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Gittins index by exhaustive search over continuation sets `C` containing
/// `x`: the largest ratio of expected discounted reward to expected
/// discounted time accumulated before first leaving `C`.
pub fn gittins_brute(q: &[Vec<f64>], r: &[f64], beta: f64) -> Vec<f64> {
    let s = r.len();
    (0..s)
        .map(|x| {
            let others: Vec<usize> = (0..s).filter(|&y| y != x).collect();
            let mut best = f64::NEG_INFINITY;
            for mask in 0u32..(1 << others.len()) {
                let mut set = vec![x];
                set.extend(
                    others
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| mask >> i & 1 == 1)
                        .map(|(_, &y)| y),
                );
                let m = set.len();
                let a: Vec<Vec<f64>> = (0..m)
                    .map(|i| {
                        (0..m)
                            .map(|j| (i == j) as u8 as f64 - beta * q[set[i]][set[j]])
                            .collect()
                    })
                    .collect();
                let num = solve(a.clone(), set.iter().map(|&y| r[y]).collect())[0];
                let den = solve(a, vec![1.0; m])[0];
                best = best.max(num / den);
            }
            best
        })
        .collect()
}

/// All global states in mixed radix, arm 0 least significant.
pub fn global_states(sizes: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = sizes.iter().product();
    (0..total)
        .map(|mut id| {
            sizes
                .iter()
                .map(|&s| {
                    let d = id % s;
                    id /= s;
                    d
                })
                .collect()
        })
        .collect()
}

pub fn encode(sizes: &[usize], x: &[usize]) -> usize {
    let mut id = 0;
    for a in (0..sizes.len()).rev() {
        id = id * sizes[a] + x[a];
    }
    id
}

/// Expected next value when arm `a` is activated in global state `x`.
fn expected_next(inst: &BanditInstance, sizes: &[usize], v: &[f64], x: &[usize], a: usize) -> f64 {
    let mut y = x.to_vec();
    inst.arms[a].transition[x[a]]
        .iter()
        .enumerate()
        .map(|(z, p)| {
            y[a] = z;
            p * v[encode(sizes, &y)]
        })
        .sum()
}

/// Optimal values by value iteration run until updates fall below 1e-13.
pub fn vi_optimal(inst: &BanditInstance) -> Vec<f64> {
    let sizes = inst.state_counts();
    let states = global_states(&sizes);
    let beta = inst.discount;
    let mut v = vec![0.0; states.len()];
    loop {
        let next: Vec<f64> = states
            .iter()
            .map(|x| {
                (0..sizes.len())
                    .map(|a| inst.arms[a].reward_mean[x[a]] + beta * expected_next(inst, &sizes, &v, x, a))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        let diff = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if diff < 1e-13 {
            return v;
        }
    }
}

/// Values of a fixed policy by iterating its Bellman operator to 1e-13.
pub fn vi_policy(inst: &BanditInstance, act: impl Fn(&[usize]) -> usize) -> Vec<f64> {
    let sizes = inst.state_counts();
    let states = global_states(&sizes);
    let beta = inst.discount;
    let actions: Vec<usize> = states.iter().map(|x| act(x)).collect();
    let mut v = vec![0.0; states.len()];
    loop {
        let next: Vec<f64> = states
            .iter()
            .zip(&actions)
            .map(|(x, &a)| inst.arms[a].reward_mean[x[a]] + beta * expected_next(inst, &sizes, &v, x, a))
            .collect();
        let diff = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if diff < 1e-13 {
            return v;
        }
    }
}

/// Values of a fixed policy by one dense linear solve.
pub fn solve_policy(inst: &BanditInstance, actions: &[usize]) -> Vec<f64> {
    let sizes = inst.state_counts();
    let states = global_states(&sizes);
    let n = states.len();
    let mut a = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for (i, x) in states.iter().enumerate() {
        let act = actions[i];
        a[i][i] += 1.0;
        b[i] = inst.arms[act].reward_mean[x[act]];
        let mut y = x.clone();
        for (z, p) in inst.arms[act].transition[x[act]].iter().enumerate() {
            y[act] = z;
            a[i][encode(&sizes, &y)] -= inst.discount * p;
        }
    }
    solve(a, b)
}

/// Every deterministic tabular policy over `states` global states with
/// `arms` actions, as action vectors.
pub fn all_policies(states: usize, arms: usize) -> Vec<Vec<usize>> {
    let total = arms.pow(states as u32);
    (0..total)
        .map(|mut code| {
            (0..states)
                .map(|_| {
                    let a = code % arms;
                    code /= arms;
                    a
                })
                .collect()
        })
        .collect()
}

/// Maximum of `q . values` over a grid of step `h` on the simplex,
/// restricted to the L1 ball of `radius` around `center`. Supports 2 or 3
/// states.
pub fn l1_ball_max(center: &[f64], radius: f64, values: &[f64], h: f64) -> f64 {
    let steps = (1.0 / h).round() as usize;
    let mut best = f64::NEG_INFINITY;
    let mut consider = |q: &[f64]| {
        let dist: f64 = q.iter().zip(center).map(|(a, b)| (a - b).abs()).sum();
        if dist <= radius + 1e-12 {
            best = best.max(q.iter().zip(values).map(|(a, b)| a * b).sum());
        }
    };
    match center.len() {
        2 => {
            for i in 0..=steps {
                let p = i as f64 * h;
                consider(&[p, 1.0 - p]);
            }
        }
        3 => {
            for i in 0..=steps {
                for j in 0..=steps - i {
                    let (p, q) = (i as f64 * h, j as f64 * h);
                    consider(&[p, q, (1.0 - p - q).max(0.0)]);
                }
            }
        }
        n => panic!("l1_ball_max supports 2 or 3 states, got {n}"),
    }
    best
}

/// Random row-stochastic matrix, with some exact zeros.
pub fn random_stochastic<R: Rng>(s: usize, rng: &mut R) -> Vec<Vec<f64>> {
    (0..s)
        .map(|_| {
            let raw: Vec<f64> = (0..s)
                .map(|_| if rng.random::<f64>() < 0.25 { 0.0 } else { rng.random::<f64>() })
                .collect();
            let total: f64 = raw.iter().sum();
            if total == 0.0 {
                let mut row = vec![0.0; s];
                row[rng.random_range(0..s)] = 1.0;
                row
            } else {
                raw.iter().map(|x| x / total).collect()
            }
        })
        .collect()
}

pub fn random_arm<R: Rng>(s: usize, rng: &mut R) -> ArmModel {
    let r = (0..s).map(|_| rng.random::<f64>()).collect();
    ArmModel::bernoulli(r, random_stochastic(s, rng))
}

pub fn random_instance<R: Rng>(sizes: &[usize], beta: f64, rng: &mut R) -> BanditInstance {
    let arms = sizes.iter().map(|&s| random_arm(s, rng)).collect();
    BanditInstance::starting_at_zero(arms, beta)
}

/// Two-sided Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value `sqrt(-ln(alpha/2)/2) / sqrt(n)`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Pearson chi-square statistic of `counts` against equal expected counts.
pub fn chi_square_uniform(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

/// Upper `alpha` quantile of chi-square with `dof` degrees of freedom via the
/// Wilson-Hilferty approximation; `z` is the matching standard normal quantile.
pub fn chi_square_critical(dof: usize, z: f64) -> f64 {
    let k = dof as f64;
    let t = 1.0 - 2.0 / (9.0 * k) + z * (2.0 / (9.0 * k)).sqrt();
    k * t.powi(3)
}
