use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::feasibility::DemonstratorProfile;
use crate::harness::budget::BudgetReport;
use crate::harness::config::ImitationMethod;

/// Evaluation outcome of one training seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutcome {
    pub seed: u64,
    /// Mean discounted return over the evaluation rollouts.
    pub mean_return: f64,
    /// Population standard deviation over the evaluation rollouts.
    pub std_return: f64,
}

/// One row of the per-trajectory score table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRow {
    pub trajectory_id: u64,
    pub demonstrator_id: u64,
    pub raw_reward: f64,
    pub weight: f64,
    pub p_w: f64,
}

/// Everything one experiment run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub method: ImitationMethod,
    pub env_label: String,
    pub per_seed: Vec<SeedOutcome>,
    /// Mean of the per-seed mean returns.
    pub mean_return: f64,
    /// Population standard deviation of the per-seed mean returns.
    pub std_return: f64,
    pub profiles: Vec<DemonstratorProfile>,
    pub scores: Vec<ScoreRow>,
}

impl RunReport {
    pub(crate) fn assemble(
        method: ImitationMethod,
        env_label: String,
        per_seed: Vec<SeedOutcome>,
        profiles: Vec<DemonstratorProfile>,
        mut scores: Vec<ScoreRow>,
    ) -> Self {
        scores.sort_by_key(|r| r.trajectory_id);
        let n = per_seed.len().max(1) as f64;
        let mean = per_seed.iter().map(|o| o.mean_return).sum::<f64>() / n;
        let var = per_seed
            .iter()
            .map(|o| (o.mean_return - mean) * (o.mean_return - mean))
            .sum::<f64>()
            / n;
        RunReport {
            method,
            env_label,
            per_seed,
            mean_return: mean,
            std_return: var.sqrt(),
            profiles,
            scores,
        }
    }
}

/// Writes `runs.csv`, `scores.csv`, and `profiles.csv` under `dir`.
///
/// Rows are sorted (runs by seed, scores by trajectory id, profiles by
/// demonstrator id), so identical reports serialize byte-identically.
pub fn emit_csv(report: &RunReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;

    let mut runs = std::io::BufWriter::new(std::fs::File::create(dir.join("runs.csv"))?);
    writeln!(runs, "seed,method,env,mean_return,std_return")?;
    let mut per_seed = report.per_seed.clone();
    per_seed.sort_by_key(|o| o.seed);
    for o in &per_seed {
        writeln!(
            runs,
            "{},{},{},{},{}",
            o.seed, report.method, report.env_label, o.mean_return, o.std_return
        )?;
    }
    runs.flush()?;

    let mut scores = std::io::BufWriter::new(std::fs::File::create(dir.join("scores.csv"))?);
    writeln!(scores, "trajectory_id,demonstrator_id,raw_reward,w,p_w")?;
    for r in &report.scores {
        writeln!(
            scores,
            "{},{},{},{},{}",
            r.trajectory_id, r.demonstrator_id, r.raw_reward, r.weight, r.p_w
        )?;
    }
    scores.flush()?;

    let mut profiles = std::io::BufWriter::new(std::fs::File::create(dir.join("profiles.csv"))?);
    writeln!(profiles, "demonstrator_id,mean_feasibility,p_j")?;
    for p in &report.profiles {
        writeln!(
            profiles,
            "{},{},{}",
            p.demonstrator_id, p.mean_feasibility, p.p_j
        )?;
    }
    profiles.flush()?;
    Ok(())
}

/// Writes a budget-acquisition report as `budget.csv` under `dir`.
pub fn emit_budget_csv(report: &BudgetReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut out = std::io::BufWriter::new(std::fs::File::create(dir.join("budget.csv"))?);
    writeln!(
        out,
        "strategy,round,demonstrator_id,acquired,corpus_size,mean_return,std_return"
    )?;
    for (strategy, rounds) in [
        ("feasibility", &report.feasibility_guided),
        ("uniform", &report.uniform_acquisition),
    ] {
        for round in rounds {
            for ((id, acquired), (_, size)) in round.acquired.iter().zip(round.corpus_sizes.iter())
            {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    strategy, round.round, id, acquired, size, round.mean_return, round.std_return
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}
