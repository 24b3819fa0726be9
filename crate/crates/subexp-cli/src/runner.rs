//! Subcommand orchestration. Each task builds its artifacts fully in
//! memory; a single writer then puts the report, the table, and the run
//! manifest on disk, so a failed run never leaves a half-written mix.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use subexp::capacity::{check_capacity_subadditivity, CapacityKind, CapacityPair, PairWitness};
use subexp::expectation::check_axioms;
use subexp::inequalities::{fuzz_all, rosenthal_exhaustive_sweep, RosenthalSweepConfig};
use subexp::series::three_series_check;
use subexp::slln::{
    marcinkiewicz_check, tail_expectation, MarcinkiewiczConfig, SelectionStrategy, TailPoint,
};
use subexp::SubexpError;

use crate::reports::{
    AxiomsReport, ChoquetReport, ChoquetRow, ConditionSummary, InequalitiesReport, RosenthalReport,
    RunMeta, SllnReportDoc, ThreeSeriesReport,
};
use crate::scenario::{Scenario, ScenarioError};

/// Salt folded into the scenario seed for the i.i.d.-random selection
/// strategy, so strategy randomness and sampling randomness differ even
/// though both derive from the one seed recorded in the manifest.
const IID_STRATEGY_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// Plot tables keep at most this many rows per trace; longer traces are
/// strided, with the final row always emitted.
const MAX_TABLE_ROWS: usize = 5000;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Library(#[from] SubexpError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Axioms,
    Choquet,
    Inequalities,
    Rosenthal,
    ThreeSeries,
    Slln,
}

impl Task {
    pub const ALL: [Task; 6] = [
        Task::Axioms,
        Task::Choquet,
        Task::Inequalities,
        Task::Rosenthal,
        Task::ThreeSeries,
        Task::Slln,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Task::Axioms => "axioms",
            Task::Choquet => "choquet",
            Task::Inequalities => "inequalities",
            Task::Rosenthal => "rosenthal",
            Task::ThreeSeries => "three-series",
            Task::Slln => "slln",
        }
    }

    fn stem(self) -> &'static str {
        match self {
            Task::ThreeSeries => "three_series",
            other => other.label(),
        }
    }
}

/// Everything a run writes: seed, resolved parameters, tool version. The
/// embedded `[scenario]` table is itself a valid `--scenario` input, so any
/// run can be reproduced from its manifest alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub scenario: Scenario,
}

pub struct RunRequest {
    pub tasks: Vec<Task>,
    /// What the user asked for: a task label, or "all".
    pub subcommand: String,
    pub scenario: Scenario,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
}

struct Artifact {
    report_name: String,
    report: String,
    table_name: String,
    table: String,
    clean: bool,
}

/// Runs every requested task, then writes all artifacts and the manifest.
/// Returns whether the run was free of assertion violations.
pub fn execute(request: &RunRequest) -> Result<bool, CliError> {
    let mut artifacts = Vec::with_capacity(request.tasks.len());
    for &task in &request.tasks {
        artifacts.push(build(task, &request.scenario)?);
    }

    let manifest = Manifest {
        tool: crate::TOOL_NAME.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        subcommand: request.subcommand.clone(),
        threads: request.threads,
        scenario: request.scenario.clone(),
    };
    let manifest_text =
        toml::to_string_pretty(&manifest).expect("manifest serialization is infallible");

    std::fs::create_dir_all(&request.out_dir).map_err(|source| CliError::Write {
        path: request.out_dir.display().to_string(),
        source,
    })?;
    for artifact in &artifacts {
        write_text(&request.out_dir.join(&artifact.report_name), &artifact.report)?;
        write_text(&request.out_dir.join(&artifact.table_name), &artifact.table)?;
    }
    write_text(&request.out_dir.join("manifest.toml"), &manifest_text)?;

    Ok(artifacts.iter().all(|a| a.clean))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn build(task: Task, scenario: &Scenario) -> Result<Artifact, CliError> {
    let (report, table, clean) = match task {
        Task::Axioms => build_axioms(scenario)?,
        Task::Choquet => build_choquet(scenario)?,
        Task::Inequalities => build_inequalities(scenario)?,
        Task::Rosenthal => build_rosenthal(scenario)?,
        Task::ThreeSeries => build_three_series(scenario)?,
        Task::Slln => build_slln(scenario)?,
    };
    Ok(Artifact {
        report_name: format!("{}_report.json", task.stem()),
        report,
        table_name: format!("{}_table.csv", task.stem()),
        table,
        clean,
    })
}

/// 17 significant digits: round-trips f64 exactly, so diffs are exact.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize infallibly");
    text.push('\n');
    text
}

fn witness_defect(witness: &Option<PairWitness>) -> f64 {
    witness.as_ref().map(|w| w.lhs - w.rhs).unwrap_or(0.0)
}

fn build_axioms(scenario: &Scenario) -> Result<(String, String, bool), CliError> {
    let family = scenario.family()?;
    let axioms = check_axioms(
        &family,
        scenario.parameters.axiom_trials,
        scenario.seed,
    )?;
    let pair = CapacityPair::new(&family);
    let subadditivity = check_capacity_subadditivity(
        &pair,
        scenario.parameters.subadditivity_samples,
        scenario.seed,
    )?;
    let clean = axioms.is_clean() && subadditivity.is_clean();

    let mut table = String::from("item,cases,violations,max_discrepancy\n");
    for check in &axioms.checks {
        let _ = writeln!(
            table,
            "{},{},{},{}",
            check.axiom,
            check.cases,
            check.violations,
            fmt_float(check.max_discrepancy)
        );
    }
    let _ = writeln!(
        table,
        "capacity-subadditivity-upper,{},{},{}",
        subadditivity.pairs_checked,
        subadditivity.upper_violations,
        fmt_float(witness_defect(&subadditivity.worst_upper))
    );
    let _ = writeln!(
        table,
        "capacity-subadditivity-mixed,{},{},{}",
        subadditivity.pairs_checked,
        subadditivity.mixed_violations,
        fmt_float(witness_defect(&subadditivity.worst_mixed))
    );

    let report = AxiomsReport {
        meta: RunMeta::new(Task::Axioms.label(), scenario),
        axioms,
        subadditivity,
        clean,
    };
    Ok((to_json(&report), table, clean))
}

fn build_choquet(scenario: &Scenario) -> Result<(String, String, bool), CliError> {
    let family = scenario.family()?;
    let variable = scenario.variable()?;
    let pair = CapacityPair::new(&family);

    let mut rows = Vec::with_capacity(scenario.parameters.choquet_exponents.len());
    for &p in &scenario.parameters.choquet_exponents {
        let powered = variable.abs_pow(p);
        let choquet_upper = pair.choquet_integral(&powered, CapacityKind::Upper)?.value;
        let choquet_lower = pair.choquet_integral(&powered, CapacityKind::Lower)?.value;
        let upper_moment = family.upper_expectation(&powered)?;
        let lower_moment = family.lower_expectation(&powered)?;
        let slack = 1e-10 * (1.0 + choquet_upper.abs());
        let sandwich_ok = choquet_upper + slack >= upper_moment
            && upper_moment + slack >= lower_moment
            && lower_moment + slack >= choquet_lower;
        rows.push(ChoquetRow {
            p,
            choquet_upper,
            choquet_lower,
            upper_moment,
            lower_moment,
            sandwich_ok,
        });
    }

    let mut tail_profile = Vec::with_capacity(scenario.parameters.tail_grid.len());
    for &level in &scenario.parameters.tail_grid {
        tail_profile.push(TailPoint {
            level,
            value: tail_expectation(&family, &variable, level)?,
        });
    }
    let tail_nonincreasing = tail_profile
        .windows(2)
        .filter(|w| w[0].level <= w[1].level)
        .all(|w| w[1].value <= w[0].value + 1e-12);

    let clean = rows.iter().all(|r| r.sandwich_ok) && tail_nonincreasing;

    let mut table = String::from("p,choquet_upper,choquet_lower,upper_moment,lower_moment\n");
    for row in &rows {
        let _ = writeln!(
            table,
            "{},{},{},{},{}",
            fmt_float(row.p),
            fmt_float(row.choquet_upper),
            fmt_float(row.choquet_lower),
            fmt_float(row.upper_moment),
            fmt_float(row.lower_moment)
        );
    }

    let report = ChoquetReport {
        meta: RunMeta::new(Task::Choquet.label(), scenario),
        rows,
        tail_profile,
        tail_nonincreasing,
        clean,
    };
    Ok((to_json(&report), table, clean))
}

fn build_inequalities(scenario: &Scenario) -> Result<(String, String, bool), CliError> {
    let outcomes = fuzz_all(scenario.parameters.fuzz_instances, scenario.seed);
    let clean = outcomes.iter().all(|o| o.clean());

    let mut table = String::from("check,instances,violations,worst_defect\n");
    for outcome in &outcomes {
        let _ = writeln!(
            table,
            "{},{},{},{}",
            outcome.check,
            outcome.instances,
            outcome.violations,
            fmt_float(outcome.worst_defect)
        );
    }

    let report = InequalitiesReport {
        meta: RunMeta::new(Task::Inequalities.label(), scenario),
        outcomes,
        clean,
    };
    Ok((to_json(&report), table, clean))
}

fn build_rosenthal(scenario: &Scenario) -> Result<(String, String, bool), CliError> {
    let sweep = rosenthal_exhaustive_sweep(&RosenthalSweepConfig::default())?;
    let clean = sweep.clean();

    let mut table = String::from("n,p,lhs,rhs,ratio\n");
    for probe in &sweep.widened {
        let _ = writeln!(
            table,
            "{},{},{},{},{}",
            probe.n,
            fmt_float(probe.p),
            fmt_float(probe.lhs),
            fmt_float(probe.rhs),
            fmt_float(probe.ratio)
        );
    }

    let report = RosenthalReport {
        meta: RunMeta::new(Task::Rosenthal.label(), scenario),
        sweep,
        clean,
    };
    Ok((to_json(&report), table, clean))
}

fn build_three_series(scenario: &Scenario) -> Result<(String, String, bool), CliError> {
    let spec = scenario.sequence_spec()?;
    let params = &scenario.parameters;
    let horizon = scenario.sequence.horizon;
    let diagnostics =
        three_series_check(&spec, params.c, params.q, horizon, params.epsilon, params.window)?;

    let mut table = String::from("n");
    for condition in &diagnostics.conditions {
        table.push(',');
        table.push_str(&condition.name);
    }
    table.push('\n');
    let stride = horizon.div_ceil(MAX_TABLE_ROWS).max(1);
    let mut emit = |n: usize| {
        let mut line = n.to_string();
        for condition in &diagnostics.conditions {
            line.push(',');
            line.push_str(&fmt_float(condition.partial_sums[n - 1]));
        }
        line.push('\n');
        table.push_str(&line);
    };
    let mut last = 0;
    for n in (stride..=horizon).step_by(stride) {
        emit(n);
        last = n;
    }
    if last != horizon {
        emit(horizon);
    }

    let conditions = diagnostics
        .conditions
        .iter()
        .map(|c| ConditionSummary {
            name: c.name.clone(),
            verdict: c.verdict,
            final_value: c.final_value,
        })
        .collect();

    // Verdicts are diagnostics; only sufficiency is claimed, so a
    // not-satisfied criterion is not an assertion violation.
    let clean = true;
    let report = ThreeSeriesReport {
        meta: RunMeta::new(Task::ThreeSeries.label(), scenario),
        horizon,
        epsilon: params.epsilon,
        window: params.window,
        c: params.c,
        q: params.q,
        conditions,
        criterion_satisfied: diagnostics.criterion_satisfied,
        clean,
    };
    Ok((to_json(&report), table, clean))
}

fn strategy_label(strategy: &SelectionStrategy) -> String {
    match strategy {
        SelectionStrategy::FixedIndex { index } => format!("fixed-{index}"),
        SelectionStrategy::IidRandom { .. } => "iid-random".to_string(),
        SelectionStrategy::GreedyAdversarial => "greedy-adversarial".to_string(),
    }
}

fn build_slln(scenario: &Scenario) -> Result<(String, String, bool), CliError> {
    let spec = scenario.sequence_spec()?;
    let params = &scenario.parameters;
    let config = MarcinkiewiczConfig {
        strategies: vec![
            SelectionStrategy::FixedIndex { index: 0 },
            SelectionStrategy::IidRandom {
                seed: scenario.seed ^ IID_STRATEGY_SALT,
            },
            SelectionStrategy::GreedyAdversarial,
        ],
        replicates: params.replicates,
        horizon: scenario.sequence.horizon,
        seed: scenario.seed,
        final_statistic_threshold: params.final_statistic_threshold,
        decay_ratio_bound: params.decay_ratio_bound,
        tail_grid: params.tail_grid.clone(),
    };
    let marcinkiewicz = marcinkiewicz_check(&spec, params.p, params.mu, &config)?;
    let clean = marcinkiewicz.consistent;

    let mut table = String::from("strategy,replicate,n,statistic\n");
    for trajectories in &marcinkiewicz.slln.strategies {
        let label = strategy_label(&trajectories.strategy);
        for (replicate, row) in trajectories.statistics.iter().enumerate() {
            for (checkpoint, statistic) in marcinkiewicz.slln.checkpoints.iter().zip(row) {
                let _ = writeln!(
                    table,
                    "{},{},{},{}",
                    label,
                    replicate,
                    checkpoint,
                    fmt_float(*statistic)
                );
            }
        }
    }

    let report = SllnReportDoc {
        meta: RunMeta::new(Task::Slln.label(), scenario),
        marcinkiewicz,
        clean,
    };
    Ok((to_json(&report), table, clean))
}
