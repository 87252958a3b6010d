//! Exact policy evaluation and value iteration on the explicit global MDP.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{check_discount, Error, Result};
use crate::model::{GlobalMdp, Policy, TabularPolicy};

/// Largest accepted `||(I - b P) V - r||_inf` after the direct solve.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Default accuracy of [`optimal_value`].
pub const DEFAULT_VI_TOLERANCE: f64 = 1e-8;

/// Sup-norm update below which value iteration is `epsilon`-accurate.
pub fn vi_stop_threshold(epsilon: f64, discount: f64) -> f64 {
    epsilon * (1.0 - discount) / (2.0 * discount)
}

/// Value of `policy` at every global state, from a dense LU solve of
/// `(I - b P^pi) V = r^pi`.
pub fn policy_value_exact(mdp: &GlobalMdp, policy: &Policy, discount: f64) -> Result<Vec<f64>> {
    let tab = policy.tabulate(mdp.space());
    policy_value_tabular(mdp, &tab, discount)
}

pub fn policy_value_tabular(
    mdp: &GlobalMdp,
    policy: &TabularPolicy,
    discount: f64,
) -> Result<Vec<f64>> {
    check_discount(discount)?;
    let n = mdp.state_count();
    let mut system = DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for x in 0..n {
        let a = policy.act_id(x);
        rhs[x] = mdp.reward(x, a);
        for &(y, p) in mdp.transition(x, a) {
            system[(x, y)] -= discount * p;
        }
    }
    let solution = system
        .clone()
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem { residual: f64::INFINITY })?;
    let residual = (&system * &solution - &rhs).amax();
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::SingularSystem { residual });
    }
    Ok(solution.iter().copied().collect())
}

/// One Bellman backup of `value` at state `x` under action `a`.
#[inline]
pub(crate) fn backup(mdp: &GlobalMdp, value: &[f64], x: usize, a: usize, discount: f64) -> f64 {
    let future: f64 = mdp.transition(x, a).iter().map(|&(y, p)| p * value[y]).sum();
    mdp.reward(x, a) + discount * future
}

/// Greedy action at each state; ties go to the lowest arm.
pub fn greedy_policy(mdp: &GlobalMdp, value: &[f64], discount: f64) -> TabularPolicy {
    let actions = (0..mdp.state_count())
        .map(|x| {
            let mut best = 0;
            let mut best_q = f64::NEG_INFINITY;
            for a in 0..mdp.action_count() {
                let q = backup(mdp, value, x, a, discount);
                if q > best_q {
                    best = a;
                    best_q = q;
                }
            }
            best
        })
        .collect();
    TabularPolicy::new(mdp.space().clone(), actions)
}

/// Optimal value within `epsilon` (sup norm) and its greedy policy.
///
/// Jacobi sweeps from `V = 0`, stopping once the sup-norm update is at most
/// `epsilon (1 - b) / (2 b)`.
pub fn optimal_value(mdp: &GlobalMdp, discount: f64, epsilon: f64) -> Result<(Vec<f64>, TabularPolicy)> {
    check_discount(discount)?;
    let n = mdp.state_count();
    let threshold = vi_stop_threshold(epsilon, discount);
    let mut value = vec![0.0; n];
    let mut next = vec![0.0; n];
    loop {
        let mut delta: f64 = 0.0;
        for (x, slot) in next.iter_mut().enumerate() {
            let v = (0..mdp.action_count())
                .map(|a| backup(mdp, &value, x, a, discount))
                .fold(f64::NEG_INFINITY, f64::max);
            delta = delta.max((v - value[x]).abs());
            *slot = v;
        }
        core::mem::swap(&mut value, &mut next);
        if delta <= threshold {
            break;
        }
    }
    let policy = greedy_policy(mdp, &value, discount);
    Ok((value, policy))
}
