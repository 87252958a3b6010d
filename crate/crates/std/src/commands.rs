//! Subcommands other than `run`, written against `io::Write` so they can be
//! tested without a process.

use std::io::Write;
use std::path::Path;

use mbandit_core::confidence::{build_counterexample, counterexample_values, COUNTEREXAMPLE_RADIUS};
use mbandit_core::{check_lemma5, gittins_indices, BanditInstance, ScenarioName};

use crate::error::{CliError, Result};
use crate::instance_file::InstanceFile;

fn io_err(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

/// Writes `arm,state,index` rows for every arm of `instance`.
pub fn write_gittins_table(instance: &BanditInstance, out: &mut impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["arm", "state", "index"])?;
    for (a, arm) in instance.arms.iter().enumerate() {
        let table = gittins_indices(arm, instance.discount)?;
        for (x, v) in table.values.iter().enumerate() {
            w.write_record([a.to_string(), x.to_string(), v.to_string()])?;
        }
    }
    w.flush().map_err(io_err)
}

pub fn write_scenario_list(out: &mut impl Write) -> Result<()> {
    for name in ScenarioName::ALL {
        writeln!(out, "{:<30} {}", name.name(), name.describe()).map_err(io_err)?;
    }
    Ok(())
}

pub fn dump_instance(instance: &BanditInstance, path: Option<&Path>, out: &mut impl Write) -> Result<()> {
    let text = InstanceFile::from_instance(instance, None).to_toml();
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => out.write_all(text.as_bytes()).map_err(io_err),
    }
}

/// Prints the four values and one summary line; returns whether both
/// strict inequalities hold.
pub fn counterexample_report(radius: Option<f64>, out: &mut impl Write) -> Result<bool> {
    let radius = radius.unwrap_or(COUNTEREXAMPLE_RADIUS);
    let v = counterexample_values(&build_counterexample(radius, 0.0))?;
    let first = v.v1 < v.v2;
    let second = v.v3 < v.v4;
    let verdict = |ok: bool| if ok { "PASS" } else { "FAIL" };
    writeln!(out, "v1 = {:.4}  (optimistic value of pi2 at (A1, B3))", v.v1).map_err(io_err)?;
    writeln!(out, "v2 = {:.4}  (optimal value of M1 at (A1, B3))", v.v2).map_err(io_err)?;
    writeln!(out, "v3 = {:.4}  (optimistic value of pi1 at (A1, B1))", v.v3).map_err(io_err)?;
    writeln!(out, "v4 = {:.4}  (optimal value of M2 at (A1, B1))", v.v4).map_err(io_err)?;
    writeln!(out, "v1 < v2: {}", verdict(first)).map_err(io_err)?;
    writeln!(out, "v3 < v4: {}", verdict(second)).map_err(io_err)?;
    writeln!(
        out,
        "counterexample radius={radius} v1={:.4} v2={:.4} v3={:.4} v4={:.4} {}",
        v.v1,
        v.v2,
        v.v3,
        v.v4,
        verdict(first && second)
    )
    .map_err(io_err)?;
    Ok(first && second)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma5Args {
    pub states: usize,
    pub arms: usize,
    pub episodes: usize,
    pub discount: f64,
    pub replicas: usize,
    pub seed: u64,
}

impl Default for Lemma5Args {
    fn default() -> Self {
        Self {
            states: 2,
            arms: 2,
            episodes: 1000,
            discount: 0.9,
            replicas: 10_000,
            seed: 5,
        }
    }
}

pub fn lemma5_report(args: Lemma5Args, out: &mut impl Write) -> Result<bool> {
    if args.replicas == 0 {
        return Err(CliError::Usage("--replicas must be >= 1".into()));
    }
    if args.episodes == 0 || args.states == 0 || args.arms == 0 {
        return Err(CliError::Usage("--states, --arms and --episodes must be >= 1".into()));
    }
    let r = check_lemma5(args.states, args.arms, args.episodes, args.discount, args.replicas, args.seed)?;
    writeln!(
        out,
        "lemma5 S={} n={} K={} beta={} replicas={} expected_mean={:.3} mean={:.3} se={:.3} \
         p_half={:.5} bound={:.5} {}",
        r.states,
        args.arms,
        r.episodes,
        r.discount,
        r.replicas,
        r.expected_mean,
        r.mean,
        r.std_error,
        r.prob_half,
        r.bound,
        if r.passed() { "PASS" } else { "FAIL" }
    )
    .map_err(io_err)?;
    Ok(r.passed())
}
