//! Solve output as JSON, campaign summaries in the Completion / Sum CPU /
//! Average NV layout, and cumulative-completion curve points.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use tcsp_core::{Csp, SolveResult};

use crate::bench::{ResultsTable, RowStatus};

#[derive(Serialize)]
struct WipeoutsJson {
    gac: u64,
    poac: u64,
    rnic: u64,
}

#[derive(Serialize)]
struct WeightsJson {
    constraints: BTreeMap<String, u64>,
    variables: BTreeMap<String, u64>,
}

#[derive(Serialize)]
struct SolveJson {
    status: String,
    solution: Option<BTreeMap<String, i64>>,
    nodes: u64,
    cpu_ms: u64,
    wipeouts: WipeoutsJson,
    weights: WeightsJson,
}

/// The pinned JSON shape for `solve --json`: keys status, solution, nodes,
/// cpu_ms, wipeouts, weights.
pub fn solve_result_json(csp: &Csp, result: &SolveResult) -> String {
    let solution = result.solution.as_ref().map(|a| {
        a.iter()
            .map(|(v, val)| (csp.variable(v).name.clone(), val))
            .collect::<BTreeMap<String, i64>>()
    });
    let payload = SolveJson {
        status: result.status.to_string(),
        solution,
        nodes: result.nodes,
        cpu_ms: result.cpu_ms,
        wipeouts: WipeoutsJson {
            gac: result.wipeouts.gac,
            poac: result.wipeouts.poac,
            rnic: result.wipeouts.rnic,
        },
        weights: WeightsJson {
            constraints: csp
                .con_ids()
                .map(|c| (csp.constraint(c).name.clone(), result.weights.constraint_weight(c)))
                .collect(),
            variables: csp
                .var_ids()
                .map(|v| (csp.variable(v).name.clone(), result.weights.variable_weight(v)))
                .collect(),
        },
    };
    serde_json::to_string_pretty(&payload).expect("serializable payload")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigSummary {
    pub config: String,
    pub completions: usize,
    /// Sum over instances where at least one config completed; timeouts
    /// contribute the full limit and set the lower-bound flag.
    pub sum_cpu_ms: u64,
    pub sum_is_lower_bound: bool,
    /// Mean node visits over instances all configs completed.
    pub avg_nodes: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub total_instances: usize,
    pub any_completed_instances: usize,
    pub all_completed_instances: usize,
    pub per_config: Vec<ConfigSummary>,
}

/// Summarizes original (non-doubled) rows. Instances with error rows are
/// excluded throughout.
pub fn summarize(table: &ResultsTable) -> Summary {
    let configs = table.config_ids();
    let instances: Vec<String> = table
        .instance_ids()
        .into_iter()
        .filter(|i| {
            table
                .rows
                .iter()
                .any(|r| !r.doubled && &r.instance == i && r.status != RowStatus::Error)
        })
        .collect();

    let row = |instance: &str, config: &str| table.original(instance, config);

    let any_completed: Vec<&String> = instances
        .iter()
        .filter(|i| configs.iter().any(|c| row(i, c).map(|r| r.status.completed()).unwrap_or(false)))
        .collect();
    let all_completed: Vec<&String> = instances
        .iter()
        .filter(|i| configs.iter().all(|c| row(i, c).map(|r| r.status.completed()).unwrap_or(false)))
        .collect();

    let per_config = configs
        .iter()
        .map(|config| {
            let completions = instances
                .iter()
                .filter(|i| row(i, config).map(|r| r.status.completed()).unwrap_or(false))
                .count();
            let mut sum_cpu_ms = 0u64;
            let mut censored = false;
            for i in &any_completed {
                if let Some(r) = row(i, config) {
                    if r.status.completed() {
                        sum_cpu_ms += r.cpu_ms;
                    } else {
                        sum_cpu_ms += r.limit_ms;
                        censored = true;
                    }
                }
            }
            let avg_nodes = if all_completed.is_empty() {
                None
            } else {
                let total: u64 = all_completed
                    .iter()
                    .filter_map(|i| row(i, config))
                    .map(|r| r.nodes)
                    .sum();
                Some(total as f64 / all_completed.len() as f64)
            };
            ConfigSummary {
                config: config.clone(),
                completions,
                sum_cpu_ms,
                sum_is_lower_bound: censored,
                avg_nodes,
            }
        })
        .collect();

    Summary {
        total_instances: instances.len(),
        any_completed_instances: any_completed.len(),
        all_completed_instances: all_completed.len(),
        per_config,
    }
}

/// Renders the summary with configurations as columns and the Completion /
/// Sum CPU / Average NV rows; censored CPU sums carry a `>` marker.
pub fn render_summary(summary: &Summary) -> String {
    let mut label_width = "Sum CPU sec.".len() + 8;
    label_width = label_width.max(
        format!("Completion ({})", summary.total_instances).len() + 1,
    );
    let col_width = summary
        .per_config
        .iter()
        .map(|c| c.config.len())
        .max()
        .unwrap_or(8)
        .max(10)
        + 2;

    let mut out = String::new();
    let _ = write!(out, "{:label_width$}", "");
    for c in &summary.per_config {
        let _ = write!(out, "{:>col_width$}", c.config);
    }
    let _ = writeln!(out);

    let _ = write!(out, "{:label_width$}", format!("Completion ({})", summary.total_instances));
    for c in &summary.per_config {
        let _ = write!(out, "{:>col_width$}", c.completions);
    }
    let _ = writeln!(out);

    let _ = write!(
        out,
        "{:label_width$}",
        format!("Sum CPU sec. ({})", summary.any_completed_instances)
    );
    for c in &summary.per_config {
        let secs = c.sum_cpu_ms as f64 / 1000.0;
        let cell = if c.sum_is_lower_bound {
            format!(">{secs:.1}")
        } else {
            format!("{secs:.1}")
        };
        let _ = write!(out, "{cell:>col_width$}");
    }
    let _ = writeln!(out);

    let _ = write!(
        out,
        "{:label_width$}",
        format!("Average NV ({})", summary.all_completed_instances)
    );
    for c in &summary.per_config {
        let cell = match c.avg_nodes {
            Some(avg) => format!("{avg:.1}"),
            None => "-".to_string(),
        };
        let _ = write!(out, "{cell:>col_width$}");
    }
    let _ = writeln!(out);
    out
}

/// Cumulative (cpu_ms, solved-count) steps per config, CSV-formatted with
/// columns config,cpu_ms,solved.
pub fn curve_points_csv(table: &ResultsTable) -> String {
    let mut out = String::from("config,cpu_ms,solved\n");
    for config in table.config_ids() {
        let mut cpus: Vec<u64> = table
            .rows
            .iter()
            .filter(|r| !r.doubled && r.config == config && r.status.completed())
            .map(|r| r.cpu_ms)
            .collect();
        cpus.sort_unstable();
        for (i, cpu) in cpus.iter().enumerate() {
            let _ = writeln!(out, "{config},{cpu},{}", i + 1);
        }
    }
    out
}
