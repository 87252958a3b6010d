use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mbandit_core::{ScenarioName, ScenarioSpec};
use mbandit_std::commands::{self, Lemma5Args};
use mbandit_std::config::{ConfigFile, RegretMode};
use mbandit_std::{load_instance, run_experiment, CliError, Result};

#[derive(Parser)]
#[command(name = "mbandit", version, about = "Learning in discounted Markovian bandits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run learners over seeds and write regret trace CSVs.
    Run(RunArgs),
    /// Print the Gittins index table of an instance as CSV.
    Gittins(EnvArgs),
    /// List the built-in scenarios or dump one as an instance file.
    Env {
        #[command(subcommand)]
        action: EnvCommand,
    },
    /// Check that local optimism fails on the counterexample.
    Counterexample {
        /// L1 radius of the transition confidence balls.
        #[arg(long)]
        radius: Option<f64>,
    },
    /// Occupancy statistics of the lower-bound environment.
    Lemma5 {
        #[arg(long, default_value_t = Lemma5Args::default().states)]
        states: usize,
        #[arg(long, default_value_t = Lemma5Args::default().arms)]
        arms: usize,
        #[arg(long, default_value_t = Lemma5Args::default().episodes)]
        episodes: usize,
        #[arg(long, default_value_t = Lemma5Args::default().discount)]
        beta: f64,
        #[arg(long, default_value_t = Lemma5Args::default().replicas)]
        replicas: usize,
        #[arg(long, default_value_t = Lemma5Args::default().seed)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum EnvCommand {
    List,
    Dump {
        #[command(flatten)]
        env: EnvArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct EnvArgs {
    #[arg(long, conflicts_with = "scenario")]
    instance: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<ScenarioName>,
    #[arg(long)]
    beta: Option<f64>,
    /// Seed of randomly drawn scenarios.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, conflicts_with = "scenario")]
    instance: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<String>,
    /// Comma-separated, e.g. mb_psrl,mb_ucbvi.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<String>>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    seeds: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long, value_parser = ["exact", "mc"])]
    regret: Option<String>,
    /// Monte-Carlo rollouts per episode.
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    /// K=3000 episodes and 80 seeds.
    #[arg(long)]
    paper_scale: bool,
}

impl RunArgs {
    fn layer(self) -> ConfigFile {
        ConfigFile {
            scenario: self.scenario,
            instance: self.instance,
            algorithms: self.algorithms,
            episodes: self.episodes,
            seeds: self.seeds,
            seed: self.seed,
            beta: self.beta,
            regret: self.regret,
            replicas: self.replicas,
            out: self.out,
            jobs: self.jobs,
            paper_scale: self.paper_scale.then_some(true),
            ..ConfigFile::default()
        }
    }
}

impl EnvArgs {
    fn instance(&self) -> Result<mbandit_core::BanditInstance> {
        match (&self.instance, self.scenario) {
            (Some(path), _) => {
                let (mut inst, _, warnings) = load_instance(path)?;
                for w in warnings {
                    eprintln!("{w}");
                }
                if let Some(b) = self.beta {
                    inst.discount = b;
                    inst = inst.validated()?;
                }
                Ok(inst)
            }
            (None, Some(name)) => Ok(ScenarioSpec {
                discount: self.beta,
                seed: self.seed,
                ..ScenarioSpec::new(name)
            }
            .build()?),
            (None, None) => Err(CliError::Usage("give --instance or --scenario".into())),
        }
    }
}

fn run(args: RunArgs) -> Result<bool> {
    let file = match &args.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let cfg = file.overridden_by(args.layer()).resolve()?;
    if cfg.episodes >= mbandit_std::config::PAPER_EPISODES && cfg.seeds.len() >= mbandit_std::config::PAPER_SEEDS {
        eprintln!(
            "warning: paper-scale run ({} episodes x {} seeds). Reference single-core timings are \
             roughly 40-50 minutes per algorithm for MB-PSRL and MB-UCBVI and about 3 days for \
             MB-UCRL2 on the random-walk scenario.",
            cfg.episodes,
            cfg.seeds.len()
        );
    }
    let report = run_experiment(&cfg)?;
    for w in &report.warnings {
        eprintln!("{w}");
    }
    let method = match report.regret {
        RegretMode::Exact => "exact",
        RegretMode::MonteCarlo => "mc",
    };
    let mut out = io::stdout().lock();
    for row in &report.summary {
        writeln!(
            out,
            "{} {} seeds={} K={} regret={} final_regret={:.3}±{:.3} policy_ms={:.3}",
            report.label,
            row.algorithm,
            row.seeds,
            row.episodes,
            method,
            row.final_regret_mean,
            row.final_regret_std,
            row.policy_ms_mean
        )
        .map_err(|e| CliError::io("<stdout>", e))?;
    }
    writeln!(
        out,
        "wrote {} trace file(s) and {}",
        report.trace_files.len(),
        report.summary_file.display()
    )
    .map_err(|e| CliError::io("<stdout>", e))?;
    Ok(true)
}

fn dispatch(cli: Cli) -> Result<bool> {
    let mut stdout = io::stdout().lock();
    match cli.command {
        Command::Run(args) => {
            drop(stdout);
            run(args)
        }
        Command::Gittins(env) => {
            commands::write_gittins_table(&env.instance()?, &mut stdout)?;
            Ok(true)
        }
        Command::Env { action: EnvCommand::List } => {
            commands::write_scenario_list(&mut stdout)?;
            Ok(true)
        }
        Command::Env {
            action: EnvCommand::Dump { env, out },
        } => {
            commands::dump_instance(&env.instance()?, out.as_deref(), &mut stdout)?;
            Ok(true)
        }
        Command::Counterexample { radius } => commands::counterexample_report(radius, &mut stdout),
        Command::Lemma5 {
            states,
            arms,
            episodes,
            beta,
            replicas,
            seed,
        } => commands::lemma5_report(
            Lemma5Args {
                states,
                arms,
                episodes,
                discount: beta,
                replicas,
                seed,
            },
            &mut stdout,
        ),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
