//! `feasim` — feasibility-weighted imitation from state-only demonstrations.
//!
//! Subcommands mirror the pipeline stages: generate demonstration corpora,
//! score them against an imitator, fit an imitation policy from weighted
//! transitions, evaluate policies, run budgeted acquisition, or run the whole
//! pipeline from a config file.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use feasim::envs::{generate_demos, make_env, scripted_expert, DynamicsParams, FamilyId};
use feasim::feasibility::{
    demonstrator_distribution, feasibility, transition_sampling_distribution, FeasibilityRecord,
    RawScore, ScoreConfig, WeightedTransitionSet,
};
use feasim::harness::{
    emit_budget_csv, emit_csv, run_budget_experiment, run_experiment, ExperimentConfig,
    ImitationMethod, ScoreCache, SolverKind,
};
use feasim::imitate::{fit_weighted_bc, id_feas_raw_scores, uniform_weights, ImitatorPolicy};
use feasim::mdp::{expected_return, load_demos_jsonl, save_demos_jsonl, Metric, Trajectory};
use feasim::solver::TabularPolicy;

#[derive(Parser)]
#[command(
    name = "feasim",
    version,
    about = "feasibility-weighted imitation learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct EnvArgs {
    /// Environment family: grid | pointmass | chain.
    #[arg(long)]
    family: String,
    /// Dynamics knobs, e.g. `moveset=D8` or `fly=1,max_step=2`.
    #[arg(long, default_value = "")]
    params: String,
}

impl EnvArgs {
    fn build(&self) -> Result<feasim::envs::EnvKind> {
        let family = FamilyId::parse(&self.family)?;
        let params = DynamicsParams::parse(&self.params)?;
        Ok(make_env(family, &params)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate expert demonstrations into a JSONL corpus.
    GenDemos {
        #[command(flatten)]
        env: EnvArgs,
        /// Number of demonstrations.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Demonstrator id stamped on every trajectory.
        #[arg(long, default_value_t = 0)]
        demonstrator_id: u64,
        /// Sample uniformly among optimal actions instead of the canonical
        /// lowest-index path.
        #[arg(long)]
        randomized: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a demonstration corpus against an imitator environment.
    Score {
        /// Imitator environment (demos may come from other dynamics).
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long)]
        demos: PathBuf,
        /// Scoring method: ours (solved tracking MDP) or idfeas (greedy
        /// inverse chaining).
        #[arg(long, default_value = "ours")]
        method: String,
        #[arg(long, default_value = "l2")]
        metric: String,
        #[arg(long, default_value_t = 0.9)]
        gamma_f: f64,
        /// Weight scale; omit for the auto rule.
        #[arg(long)]
        sigma: Option<f64>,
        /// Shift constant; omit for max-over-demos.
        #[arg(long)]
        c: Option<f64>,
        /// Solver: auto | vi | q.
        #[arg(long, default_value = "auto")]
        solver: String,
        #[arg(long)]
        out: PathBuf,
        /// Optional demonstrator profile CSV.
        #[arg(long)]
        profiles_out: Option<PathBuf>,
    },
    /// Fit an imitation policy from a corpus and a score table.
    Imitate {
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long)]
        demos: PathBuf,
        /// Score CSV from `score`; required for ours/idfeas, ignored for
        /// uniform.
        #[arg(long)]
        scores: Option<PathBuf>,
        /// ours | idfeas | uniform.
        #[arg(long, default_value = "ours")]
        method: String,
        #[arg(long, default_value = "l2")]
        metric: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 256)]
        batch: usize,
        #[arg(long, default_value_t = 40)]
        iters: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a saved policy.
    Eval {
        #[command(flatten)]
        env: EnvArgs,
        #[arg(long)]
        policy: PathBuf,
        #[arg(long, default_value = "l2")]
        metric: String,
        #[arg(long, default_value_t = 100)]
        rollouts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Budgeted demonstration acquisition with a uniform ablation.
    Budget {
        /// Experiment config TOML; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        initial: usize,
        /// Comma-separated per-round budgets, e.g. `5,5,5`.
        #[arg(long, default_value = "")]
        steps: String,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Full pipeline: corpus, scores, weights, imitation, evaluation, CSVs.
    Run {
        /// Experiment config TOML; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the config's method.
        #[arg(long)]
        method: Option<String>,
        /// Override the config's seeds (comma-separated).
        #[arg(long)]
        seeds: Option<String>,
        /// Override the config's corpus seed.
        #[arg(long)]
        corpus_seed: Option<u64>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::GenDemos {
            env,
            n,
            seed,
            demonstrator_id,
            randomized,
            out,
        } => {
            let environment = env.build()?;
            let mut expert = scripted_expert(&environment)?;
            if randomized {
                expert = expert.randomized();
            }
            let mut demos = generate_demos(&environment, &expert, n, seed)?;
            for demo in &mut demos {
                demo.demonstrator_id = demonstrator_id;
            }
            save_demos_jsonl(&out, &demos)?;
            println!(
                "wrote {} demonstrations from {} to {}",
                demos.len(),
                environment.label(),
                out.display()
            );
        }
        Command::Score {
            env,
            demos,
            method,
            metric,
            gamma_f,
            sigma,
            c,
            solver,
            out,
            profiles_out,
        } => {
            let imitator = env.build()?;
            let metric = Metric::parse(&metric)?;
            let corpus = load_demos_jsonl(&demos)?;
            let score = ScoreConfig {
                gamma_f,
                sigma,
                c,
                ..ScoreConfig::default()
            };
            let solver_kind = parse_solver(&solver)?;
            let config = ExperimentConfig {
                metric,
                score: score.clone(),
                solver_kind,
                ..ExperimentConfig::default()
            };
            let raws: Vec<RawScore> = match method.as_str() {
                "ours" => feasim::harness::score_corpus(
                    &imitator,
                    &corpus,
                    &config,
                    &mut ScoreCache::new(),
                )?,
                "idfeas" => id_feas_raw_scores(&corpus, &imitator, metric, gamma_f)?,
                other => bail!("unknown scoring method `{other}` (ours | idfeas)"),
            };
            let records = feasibility(&raws, &score)?;
            let weighted = transition_sampling_distribution(&corpus, &records)?;
            feasim::feasibility::write_scores_csv(&out, &records, &weighted)?;
            println!("wrote {} scores to {}", records.len(), out.display());
            if let Some(path) = profiles_out {
                let profiles = demonstrator_distribution(&records)?;
                feasim::feasibility::write_profiles_csv(&path, &profiles)?;
                println!("wrote {} profiles to {}", profiles.len(), path.display());
            }
        }
        Command::Imitate {
            env,
            demos,
            scores,
            method,
            metric,
            seed,
            batch,
            iters,
            out,
        } => {
            let imitator = env.build()?;
            let metric = Metric::parse(&metric)?;
            let corpus = load_demos_jsonl(&demos)?;
            let method = ImitationMethod::parse(&method)?;
            let weighted: WeightedTransitionSet = match method {
                ImitationMethod::Uniform => uniform_weights(&corpus)?,
                _ => {
                    let path =
                        scores.context("`--scores` is required for methods ours and idfeas")?;
                    let records = read_scores_csv(&path, &corpus)?;
                    transition_sampling_distribution(&corpus, &records)?
                }
            };
            let policy = fit_weighted_bc(&weighted, &imitator, metric, batch, iters, seed)?;
            policy.save(&out)?;
            println!(
                "fit policy over {} states from {} transitions, saved to {}",
                policy.len(),
                weighted.len(),
                out.display()
            );
        }
        Command::Eval {
            env,
            policy,
            metric,
            rollouts,
            seed,
        } => {
            let environment = env.build()?;
            let metric = Metric::parse(&metric)?;
            let table = TabularPolicy::load(&policy)?;
            let total = ImitatorPolicy::from_tabular(&table, metric);
            let (mean, std) = expected_return(&environment, &total, rollouts, seed)?;
            println!("env={}", environment.label());
            println!("rollouts={rollouts} seed={seed}");
            println!("mean_return={mean}");
            println!("std_return={std}");
        }
        Command::Budget {
            config,
            initial,
            steps,
            out_dir,
        } => {
            let config = load_config(config)?;
            let steps = parse_numbers(&steps)?;
            let report = run_budget_experiment(&config, initial, &steps)?;
            emit_budget_csv(&report, &out_dir)?;
            for (name, rounds) in [
                ("feasibility", &report.feasibility_guided),
                ("uniform", &report.uniform_acquisition),
            ] {
                for round in rounds {
                    println!(
                        "{name} round={} mean_return={} corpus={:?}",
                        round.round, round.mean_return, round.corpus_sizes
                    );
                }
            }
            println!("wrote {}", out_dir.join("budget.csv").display());
        }
        Command::Run {
            config,
            method,
            seeds,
            corpus_seed,
            out_dir,
        } => {
            let mut config = load_config(config)?;
            if let Some(method) = method {
                config.method = ImitationMethod::parse(&method)?;
            }
            if let Some(seeds) = seeds {
                config.seeds = parse_numbers(&seeds)?
                    .into_iter()
                    .map(|s| s as u64)
                    .collect();
            }
            if let Some(corpus_seed) = corpus_seed {
                config.corpus_seed = corpus_seed;
            }
            let report = run_experiment(&config)?;
            emit_csv(&report, &out_dir)?;
            std::fs::write(out_dir.join("config.toml"), config.to_toml()?)?;
            println!(
                "method={} env={} mean_return={} std_return={}",
                report.method, report.env_label, report.mean_return, report.std_return
            );
            for o in &report.per_seed {
                println!("seed={} mean_return={}", o.seed, o.mean_return);
            }
            println!(
                "wrote runs.csv, scores.csv, profiles.csv, config.toml to {}",
                out_dir.display()
            );
        }
    }
    Ok(())
}

fn load_config(path: Option<PathBuf>) -> Result<ExperimentConfig> {
    Ok(match path {
        Some(path) => ExperimentConfig::load(&path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => ExperimentConfig::default(),
    })
}

fn parse_solver(s: &str) -> Result<SolverKind> {
    Ok(match s {
        "auto" => SolverKind::Auto,
        "vi" => SolverKind::Vi,
        "q" => SolverKind::Q,
        other => bail!("unknown solver `{other}` (auto | vi | q)"),
    })
}

fn parse_numbers(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            p.parse::<usize>()
                .map_err(|e| anyhow::anyhow!("bad number `{p}`: {e}"))
        })
        .collect()
}

/// Reads a score CSV (as written by `score`) back into feasibility records,
/// keyed to the corpus by trajectory id.
fn read_scores_csv(path: &PathBuf, corpus: &[Trajectory]) -> Result<Vec<FeasibilityRecord>> {
    let text = std::fs::read_to_string(path)?;
    let mut by_id = std::collections::BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 4 {
            bail!(
                "score CSV line {} has {} fields, expected 5",
                i + 1,
                fields.len()
            );
        }
        let trajectory_id: u64 = fields[0].parse()?;
        let demonstrator_id: u64 = fields[1].parse()?;
        let raw_reward: f64 = fields[2].parse()?;
        let weight: f64 = fields[3].parse()?;
        by_id.insert(
            trajectory_id,
            FeasibilityRecord {
                demonstrator_id,
                trajectory_id,
                raw_reward,
                shifted_reward: weight.ln(),
                weight,
            },
        );
    }
    corpus
        .iter()
        .map(|demo| {
            by_id
                .get(&demo.trajectory_id)
                .cloned()
                .with_context(|| format!("no score for trajectory {}", demo.trajectory_id))
        })
        .collect()
}
