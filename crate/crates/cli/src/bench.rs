//! Benchmark campaigns: run instance directories against configurations,
//! persist results as CSV, and re-run censored entries at a doubled limit.
//!
//! CSV columns, in order: instance,config,status,cpu_ms,nodes,limit_ms,doubled

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use tcsp_core::{
    parse_instance, solve, Consistency, Csp, SolveConfig, SolveStatus, Strategy,
};

use crate::clock::ThreadCpuClock;
use crate::config::id_of;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Sat,
    Unsat,
    Timeout,
    /// The instance could not be parsed; recorded, not crashed on.
    Error,
}

impl RowStatus {
    pub fn completed(self) -> bool {
        matches!(self, RowStatus::Sat | RowStatus::Unsat)
    }

    pub fn parse(s: &str) -> Option<RowStatus> {
        match s {
            "sat" => Some(RowStatus::Sat),
            "unsat" => Some(RowStatus::Unsat),
            "timeout" => Some(RowStatus::Timeout),
            "error" => Some(RowStatus::Error),
            _ => None,
        }
    }
}

impl fmt::Display for RowStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowStatus::Sat => "sat",
            RowStatus::Unsat => "unsat",
            RowStatus::Timeout => "timeout",
            RowStatus::Error => "error",
        })
    }
}

impl From<SolveStatus> for RowStatus {
    fn from(s: SolveStatus) -> RowStatus {
        match s {
            SolveStatus::Sat => RowStatus::Sat,
            SolveStatus::Unsat => RowStatus::Unsat,
            SolveStatus::Timeout => RowStatus::Timeout,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultRow {
    pub instance: String,
    pub config: String,
    pub status: RowStatus,
    pub cpu_ms: u64,
    pub nodes: u64,
    pub limit_ms: u64,
    pub doubled: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
}

impl ResultsTable {
    pub fn config_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.rows.iter().map(|r| r.config.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn instance_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.rows.iter().map(|r| r.instance.clone()).collect();
        ids.sort();
        ids.dedup();
        ids
    }

    pub fn original(&self, instance: &str, config: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| !r.doubled && r.instance == instance && r.config == config)
    }

    pub fn doubled(&self, instance: &str, config: &str) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.doubled && r.instance == instance && r.config == config)
    }

    fn sort(&mut self) {
        self.rows
            .sort_by(|a, b| (&a.instance, &a.config, a.doubled).cmp(&(&b.instance, &b.config, b.doubled)));
    }
}

pub fn write_csv(table: &ResultsTable, path: &Path) -> Result<()> {
    let mut out = String::from("instance,config,status,cpu_ms,nodes,limit_ms,doubled\n");
    for r in &table.rows {
        if r.instance.contains(',') || r.config.contains(',') {
            bail!("instance or config id contains a comma: `{}` / `{}`", r.instance, r.config);
        }
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.instance, r.config, r.status, r.cpu_ms, r.nodes, r.limit_ms, r.doubled
        ));
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

pub fn read_csv(path: &Path) -> Result<ResultsTable> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != "instance,config,status,cpu_ms,nodes,limit_ms,doubled" {
                bail!("{}: unexpected header `{line}`", path.display());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 7 {
            bail!("{}:{}: expected 7 columns, found {}", path.display(), i + 1, parts.len());
        }
        rows.push(ResultRow {
            instance: parts[0].to_string(),
            config: parts[1].to_string(),
            status: RowStatus::parse(parts[2])
                .with_context(|| format!("{}:{}: bad status `{}`", path.display(), i + 1, parts[2]))?,
            cpu_ms: parts[3].parse().with_context(|| format!("{}:{}: bad cpu_ms", path.display(), i + 1))?,
            nodes: parts[4].parse().with_context(|| format!("{}:{}: bad nodes", path.display(), i + 1))?,
            limit_ms: parts[5].parse().with_context(|| format!("{}:{}: bad limit_ms", path.display(), i + 1))?,
            doubled: match parts[6] {
                "true" => true,
                "false" => false,
                other => bail!("{}:{}: bad doubled flag `{other}`", path.display(), i + 1),
            },
        });
    }
    Ok(ResultsTable { rows })
}

/// Runs one solve under a fresh thread-CPU clock. Timeout rows record the
/// limit itself as the CPU time.
fn run_one(csp: &Csp, consistency: Consistency, strategy: Strategy, limit_ms: u64) -> (RowStatus, u64, u64) {
    let config = SolveConfig::new(consistency, strategy).with_time_limit_ms(limit_ms);
    let mut clock = ThreadCpuClock::start();
    let result = solve(csp, &config, &mut clock).expect("configurations validated upstream");
    let status = RowStatus::from(result.status);
    let cpu_ms = if status == RowStatus::Timeout { limit_ms } else { result.cpu_ms };
    (status, cpu_ms, result.nodes)
}

/// One row per (instance, config). Instances are the directory's files in
/// sorted order; unparseable files yield `error` rows for every config.
pub fn run_bench(
    dir: &Path,
    configs: &[(Consistency, Strategy)],
    limit_ms: u64,
    workers: usize,
) -> Result<ResultsTable> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("reading directory {}", dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no instance files in {}", dir.display());
    }

    // Parse once per instance, outside the timed region.
    let mut parsed: Vec<(String, Option<Csp>)> = Vec::with_capacity(paths.len());
    for path in &paths {
        let id = path.to_string_lossy().to_string();
        match fs::read_to_string(path) {
            Ok(text) => match parse_instance(&text) {
                Ok(csp) => parsed.push((id, Some(csp))),
                Err(_) => parsed.push((id, None)),
            },
            Err(_) => parsed.push((id, None)),
        }
    }

    let mut jobs: Vec<(usize, Consistency, Strategy)> = Vec::new();
    for i in 0..parsed.len() {
        for &(c, s) in configs {
            jobs.push((i, c, s));
        }
    }

    let next = Mutex::new(0usize);
    let rows = Mutex::new(Vec::<ResultRow>::with_capacity(jobs.len()));
    let workers = workers.max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let job = {
                    let mut guard = next.lock().unwrap();
                    if *guard >= jobs.len() {
                        return;
                    }
                    let j = jobs[*guard];
                    *guard += 1;
                    j
                };
                let (idx, consistency, strategy) = job;
                let (instance, csp) = &parsed[idx];
                let row = match csp {
                    Some(csp) => {
                        let (status, cpu_ms, nodes) = run_one(csp, consistency, strategy, limit_ms);
                        ResultRow {
                            instance: instance.clone(),
                            config: id_of(consistency, strategy),
                            status,
                            cpu_ms,
                            nodes,
                            limit_ms,
                            doubled: false,
                        }
                    }
                    None => ResultRow {
                        instance: instance.clone(),
                        config: id_of(consistency, strategy),
                        status: RowStatus::Error,
                        cpu_ms: 0,
                        nodes: 0,
                        limit_ms,
                        doubled: false,
                    },
                };
                rows.lock().unwrap().push(row);
            });
        }
    });

    let mut table = ResultsTable { rows: rows.into_inner().unwrap() };
    table.sort();
    Ok(table)
}

/// A censored entry needs a doubled-limit run when its config timed out on an
/// instance that some other config completed within the original limit.
pub fn censored_entries(table: &ResultsTable) -> Vec<(String, String, u64)> {
    let mut out = Vec::new();
    for r in &table.rows {
        if r.doubled || r.status != RowStatus::Timeout {
            continue;
        }
        let someone_completed = table.rows.iter().any(|o| {
            !o.doubled && o.instance == r.instance && o.config != r.config && o.status.completed()
        });
        if someone_completed && table.doubled(&r.instance, &r.config).is_none() {
            out.push((r.instance.clone(), r.config.clone(), r.limit_ms));
        }
    }
    out
}

/// Executes every censored entry at twice its original limit and appends the
/// doubled rows. A run still timing out records the doubled limit as its
/// completion time.
pub fn rerun_doubled(table: &mut ResultsTable) -> Result<usize> {
    let entries = censored_entries(table);
    let mut parsed: BTreeMap<String, Csp> = BTreeMap::new();
    for (instance, _, _) in &entries {
        if !parsed.contains_key(instance) {
            let text = fs::read_to_string(Path::new(instance))
                .with_context(|| format!("re-reading instance `{instance}` for the doubled run"))?;
            let csp = parse_instance(&text)
                .map_err(|e| anyhow::anyhow!("re-parsing `{instance}`: {e}"))?;
            parsed.insert(instance.clone(), csp);
        }
    }
    let count = entries.len();
    for (instance, config, limit_ms) in entries {
        let (consistency, strategy) = crate::config::parse_config_id(&config)?;
        let doubled_limit = limit_ms * 2;
        let csp = &parsed[&instance];
        let (status, cpu_ms, nodes) = run_one(csp, consistency, strategy, doubled_limit);
        table.rows.push(ResultRow {
            instance,
            config,
            status,
            cpu_ms,
            nodes,
            limit_ms: doubled_limit,
            doubled: true,
        });
    }
    table.sort();
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_table() -> ResultsTable {
        ResultsTable {
            rows: vec![
                ResultRow {
                    instance: "a.csp".into(),
                    config: "poac/alls".into(),
                    status: RowStatus::Sat,
                    cpu_ms: 120,
                    nodes: 42,
                    limit_ms: 1000,
                    doubled: false,
                },
                ResultRow {
                    instance: "a.csp".into(),
                    config: "poac/old".into(),
                    status: RowStatus::Timeout,
                    cpu_ms: 1000,
                    nodes: 99,
                    limit_ms: 1000,
                    doubled: false,
                },
            ],
        }
    }

    #[test]
    fn csv_round_trip() {
        let table = sample_table();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("results.csv");
        write_csv(&table, &path).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(table, back);
    }

    #[test]
    fn censored_detection() {
        let table = sample_table();
        let entries = censored_entries(&table);
        assert_eq!(entries, vec![("a.csp".to_string(), "poac/old".to_string(), 1000)]);
    }

    #[test]
    fn both_timeout_needs_no_rerun() {
        let mut table = sample_table();
        table.rows[0].status = RowStatus::Timeout;
        assert!(censored_entries(&table).is_empty());
    }
}
