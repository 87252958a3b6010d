//! Gittins indices by largest-remaining-index state elimination.
//!
//! States are ranked one at a time, from the highest index down. After a state
//! is ranked it joins the continuation set and is folded out of the chain: each
//! remaining state's reward, discounted time and transition row are rewritten
//! so that passing through a ranked state is accounted for in expectation. The
//! ratio `reward / time` of the best remaining state is then its index. Each
//! fold costs `O(S^2)`, so the whole table costs `O(S^3)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_discount, Result};
use crate::model::{ArmModel, BanditInstance, IndexPolicy};

/// Gittins indices of one arm.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexTable {
    pub values: Vec<f64>,
    pub discount: f64,
}

pub fn gittins_indices(arm: &ArmModel, discount: f64) -> Result<IndexTable> {
    check_discount(discount)?;
    let s = arm.state_count();
    // Discounted transitions among unranked states.
    let mut flow: Vec<Vec<f64>> = arm
        .transition
        .iter()
        .map(|row| row.iter().map(|p| discount * p).collect())
        .collect();
    // Expected discounted reward and discounted time accumulated from a state
    // until the chain first reaches an unranked state again.
    let mut reward = arm.reward_mean.clone();
    let mut time = vec![1.0; s];
    let mut unranked = vec![true; s];
    let mut values = vec![0.0; s];

    for _ in 0..s {
        let mut best = usize::MAX;
        let mut best_ratio = f64::NEG_INFINITY;
        for x in (0..s).filter(|&x| unranked[x]) {
            let ratio = reward[x] / time[x];
            if best == usize::MAX || ratio > best_ratio {
                best = x;
                best_ratio = ratio;
            }
        }
        let z = best;
        values[z] = best_ratio;
        unranked[z] = false;

        // Returns to z before leaving it sum to 1 / (1 - flow[z][z]).
        let escape = 1.0 - flow[z][z];
        let z_row = core::mem::take(&mut flow[z]);
        for x in 0..s {
            if !unranked[x] {
                continue;
            }
            let via = flow[x][z] / escape;
            if via == 0.0 {
                continue;
            }
            reward[x] += via * reward[z];
            time[x] += via * time[z];
            for y in (0..s).filter(|&y| unranked[y]) {
                flow[x][y] += via * z_row[y];
            }
            flow[x][z] = 0.0;
        }
        flow[z] = z_row;
    }

    Ok(IndexTable { values, discount })
}

/// Index policy playing the arm with the largest Gittins index.
pub fn gittins_policy(instance: &BanditInstance) -> Result<IndexPolicy> {
    let tables = instance
        .arms
        .iter()
        .map(|arm| gittins_indices(arm, instance.discount).map(|t| t.values))
        .collect::<Result<Vec<_>>>()?;
    Ok(IndexPolicy::new(tables))
}
