//! Censored Wilcoxon signed-rank analysis over paired CPU times, and the
//! pairwise ranking chain built from it.
//!
//! Pairs where both runs timed out are discarded (zero difference). Pairs
//! where exactly one run timed out must carry doubled-limit rerun data; the
//! rerun's time (or the doubled limit itself) stands in for the censored
//! side. Differences under the clock floor are discarded. Remaining absolute
//! differences are ranked with average ranks on ties; the one-tailed p comes
//! from exact tail counting for n <= 25 and from a tie-corrected normal
//! approximation with continuity correction beyond.

use std::fmt;

use anyhow::{bail, Result};

use crate::bench::{ResultsTable, RowStatus};

pub const DEFAULT_ALPHA: f64 = 0.05;
/// Sub-second CPU differences are clock noise.
pub const DEFAULT_CLOCK_FLOOR_MS: u64 = 1000;
const EXACT_LIMIT: usize = 25;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairObs {
    pub instance: String,
    pub a_status: RowStatus,
    pub a_cpu_ms: u64,
    pub b_status: RowStatus,
    pub b_cpu_ms: u64,
    /// Doubled-limit rerun times, when present.
    pub a_doubled_cpu_ms: Option<u64>,
    pub b_doubled_cpu_ms: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// First configuration significantly faster.
    FirstBetter,
    /// Second configuration significantly faster.
    SecondBetter,
    Equivalent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WilcoxonReport {
    pub n_used: usize,
    pub discarded_zero: usize,
    pub discarded_sub_clock: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    pub p: f64,
    pub verdict: Verdict,
    /// Set when the verdict is `Equivalent` for lack of usable pairs rather
    /// than by the test.
    pub no_evidence: bool,
    /// Instances whose censored side lacks a doubled-limit rerun row. When
    /// non-empty the test is aborted and the other fields are meaningless.
    pub needs_rerun: Vec<String>,
}

impl fmt::Display for WilcoxonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.needs_rerun.is_empty() {
            writeln!(f, "aborted: {} instance(s) need a doubled-limit rerun:", self.needs_rerun.len())?;
            for i in &self.needs_rerun {
                writeln!(f, "  {i}")?;
            }
            return Ok(());
        }
        writeln!(
            f,
            "n={} (discarded: {} zero/both-timeout, {} sub-clock)",
            self.n_used, self.discarded_zero, self.discarded_sub_clock
        )?;
        writeln!(f, "W+={} W-={} one-tailed p={:.6}", self.w_plus, self.w_minus, self.p)?;
        match self.verdict {
            Verdict::FirstBetter => writeln!(f, "verdict: first > second"),
            Verdict::SecondBetter => writeln!(f, "verdict: second > first"),
            Verdict::Equivalent if self.no_evidence => writeln!(f, "verdict: equivalent (no evidence)"),
            Verdict::Equivalent => writeln!(f, "verdict: equivalent"),
        }
    }
}

/// Average ranks of `values` (ascending), with ties sharing their mean rank.
/// Returned in the input's order.
fn average_ranks(values: &[u64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by_key(|&i| values[i]);
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let mean = (i + 1 + j + 1) as f64 / 2.0;
        for &k in &order[i..=j] {
            ranks[k] = mean;
        }
        i = j + 1;
    }
    ranks
}

/// Exact one-tailed P(W >= w) where W sums each rank with probability 1/2.
/// Average ranks are half-integers, so doubling them makes the tail count an
/// integer dynamic program.
pub fn exact_one_tailed_p(ranks: &[f64], w: f64) -> f64 {
    let scaled: Vec<usize> = ranks.iter().map(|&r| (r * 2.0).round() as usize).collect();
    let target = (w * 2.0).round() as usize;
    let total: usize = scaled.iter().sum();
    let mut dp = vec![0u64; total + 1];
    dp[0] = 1;
    for &r in &scaled {
        for s in (r..=total).rev() {
            dp[s] += dp[s - r];
        }
    }
    let tail: u64 = if target > total { 0 } else { dp[target..].iter().sum() };
    tail as f64 / 2f64.powi(ranks.len() as i32)
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + libm::erf(x / core::f64::consts::SQRT_2))
}

/// Normal approximation of P(W >= w) with tie-corrected variance and
/// continuity correction.
pub fn approx_one_tailed_p(ranks: &[f64], abs_diffs: &[u64], w: f64) -> f64 {
    let n = ranks.len() as f64;
    let mean = n * (n + 1.0) / 4.0;
    let mut variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    // Tie correction: subtract sum(t^3 - t)/48 over tie groups.
    let mut sorted = abs_diffs.to_vec();
    sorted.sort_unstable();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j + 1 < sorted.len() && sorted[j + 1] == sorted[i] {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        variance -= (t * t * t - t) / 48.0;
        i = j + 1;
    }
    if variance <= 0.0 {
        // All diffs tied into one group; no spread to test against.
        return 0.5;
    }
    let z = (w - mean - 0.5) / variance.sqrt();
    1.0 - normal_cdf(z)
}

pub fn wilcoxon_censored(pairs: &[PairObs], alpha: f64, clock_floor_ms: u64) -> WilcoxonReport {
    let mut needs_rerun = Vec::new();
    let mut diffs_ms: Vec<i64> = Vec::new();
    let mut discarded_zero = 0usize;
    let mut discarded_sub_clock = 0usize;

    for p in pairs {
        if p.a_status == RowStatus::Error || p.b_status == RowStatus::Error {
            continue;
        }
        let a_timeout = p.a_status == RowStatus::Timeout;
        let b_timeout = p.b_status == RowStatus::Timeout;
        let (a_cpu, b_cpu) = match (a_timeout, b_timeout) {
            (true, true) => {
                discarded_zero += 1;
                continue;
            }
            (false, false) => (p.a_cpu_ms, p.b_cpu_ms),
            (true, false) => match p.a_doubled_cpu_ms {
                Some(a) => (a, p.b_cpu_ms),
                None => {
                    needs_rerun.push(p.instance.clone());
                    continue;
                }
            },
            (false, true) => match p.b_doubled_cpu_ms {
                Some(b) => (p.a_cpu_ms, b),
                None => {
                    needs_rerun.push(p.instance.clone());
                    continue;
                }
            },
        };
        let diff = a_cpu as i64 - b_cpu as i64;
        if diff == 0 {
            discarded_zero += 1;
        } else if diff.unsigned_abs() < clock_floor_ms {
            discarded_sub_clock += 1;
        } else {
            diffs_ms.push(diff);
        }
    }

    if !needs_rerun.is_empty() {
        return WilcoxonReport {
            n_used: 0,
            discarded_zero,
            discarded_sub_clock,
            w_plus: 0.0,
            w_minus: 0.0,
            p: 1.0,
            verdict: Verdict::Equivalent,
            no_evidence: true,
            needs_rerun,
        };
    }

    let n = diffs_ms.len();
    if n == 0 {
        return WilcoxonReport {
            n_used: 0,
            discarded_zero,
            discarded_sub_clock,
            w_plus: 0.0,
            w_minus: 0.0,
            p: 1.0,
            verdict: Verdict::Equivalent,
            no_evidence: true,
            needs_rerun: Vec::new(),
        };
    }

    let abs: Vec<u64> = diffs_ms.iter().map(|d| d.unsigned_abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = ranks
        .iter()
        .zip(&diffs_ms)
        .filter(|(_, &d)| d > 0)
        .map(|(r, _)| r)
        .sum();
    let w_minus: f64 = n as f64 * (n as f64 + 1.0) / 2.0 - w_plus;

    // Positive differences mean the first configuration was slower; test the
    // direction the data favors.
    let (w_dir, candidate) = if w_plus >= w_minus {
        (w_plus, Verdict::SecondBetter)
    } else {
        (w_minus, Verdict::FirstBetter)
    };
    let p = if n <= EXACT_LIMIT {
        exact_one_tailed_p(&ranks, w_dir)
    } else {
        approx_one_tailed_p(&ranks, &abs, w_dir)
    };
    let verdict = if p < alpha { candidate } else { Verdict::Equivalent };

    WilcoxonReport {
        n_used: n,
        discarded_zero,
        discarded_sub_clock,
        w_plus,
        w_minus,
        p,
        verdict,
        no_evidence: false,
        needs_rerun: Vec::new(),
    }
}

/// Collects the per-instance pairs for two configurations out of a results
/// table (original rows, with doubled rows attached when present).
pub fn build_pairs(table: &ResultsTable, a: &str, b: &str) -> Vec<PairObs> {
    let mut pairs = Vec::new();
    for instance in table.instance_ids() {
        let (Some(ra), Some(rb)) = (table.original(&instance, a), table.original(&instance, b))
        else {
            continue;
        };
        pairs.push(PairObs {
            instance: instance.clone(),
            a_status: ra.status,
            a_cpu_ms: ra.cpu_ms,
            b_status: rb.status,
            b_cpu_ms: rb.cpu_ms,
            a_doubled_cpu_ms: table.doubled(&instance, a).map(|r| r.cpu_ms),
            b_doubled_cpu_ms: table.doubled(&instance, b).map(|r| r.cpu_ms),
        });
    }
    pairs
}

#[derive(Debug, Clone, PartialEq)]
pub enum RankOutcome {
    Chain(String),
    /// Pairwise significance was intransitive; cells\[i\]\[j\] holds '>' when
    /// row i significantly beats column j, '<' for the reverse, '=' neither.
    Matrix { configs: Vec<String>, cells: Vec<Vec<char>> },
}

impl fmt::Display for RankOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankOutcome::Chain(s) => writeln!(f, "{s}"),
            RankOutcome::Matrix { configs, cells } => {
                writeln!(f, "warning: pairwise significance is intransitive; full matrix:")?;
                let width = configs.iter().map(|c| c.len()).max().unwrap_or(4) + 2;
                write!(f, "{:width$}", "")?;
                for c in configs {
                    write!(f, "{c:>width$}")?;
                }
                writeln!(f)?;
                for (i, c) in configs.iter().enumerate() {
                    write!(f, "{c:width$}")?;
                    for (j, &cell) in cells[i].iter().enumerate() {
                        let ch = if i == j { '.' } else { cell };
                        write!(f, "{ch:>width$}")?;
                    }
                    writeln!(f)?;
                }
                Ok(())
            }
        }
    }
}

/// Ranks configurations by pairwise censored Wilcoxon tests, emitting a chain
/// of `>` (significant) and `≡` (not significant) when the pairwise pattern
/// is transitive, and the full matrix otherwise.
pub fn pairwise_ranking(
    table: &ResultsTable,
    configs: &[String],
    alpha: f64,
    clock_floor_ms: u64,
) -> Result<RankOutcome> {
    let mut configs: Vec<String> = configs.to_vec();
    configs.sort();
    configs.dedup();
    if configs.len() < 2 {
        bail!("ranking needs at least two configurations");
    }

    let k = configs.len();
    // beats[i][j]: i significantly faster than j.
    let mut beats = vec![vec![false; k]; k];
    let mut missing: Vec<String> = Vec::new();
    for i in 0..k {
        for j in (i + 1)..k {
            let pairs = build_pairs(table, &configs[i], &configs[j]);
            let report = wilcoxon_censored(&pairs, alpha, clock_floor_ms);
            if !report.needs_rerun.is_empty() {
                missing.extend(report.needs_rerun);
                continue;
            }
            match report.verdict {
                Verdict::FirstBetter => beats[i][j] = true,
                Verdict::SecondBetter => beats[j][i] = true,
                Verdict::Equivalent => {}
            }
        }
    }
    if !missing.is_empty() {
        missing.sort();
        missing.dedup();
        bail!(
            "{} instance(s) need doubled-limit reruns before ranking (run `rerun --double`):\n  {}",
            missing.len(),
            missing.join("\n  ")
        );
    }

    // Order by wins, then completions, then total CPU, then name; the inputs'
    // listing order never matters.
    let wins: Vec<usize> = (0..k).map(|i| beats[i].iter().filter(|&&b| b).count()).collect();
    let completions: Vec<usize> = configs
        .iter()
        .map(|c| {
            table
                .rows
                .iter()
                .filter(|r| !r.doubled && &r.config == c && r.status.completed())
                .count()
        })
        .collect();
    let total_cpu: Vec<u64> = configs
        .iter()
        .map(|c| {
            table
                .rows
                .iter()
                .filter(|r| !r.doubled && &r.config == c)
                .map(|r| r.cpu_ms)
                .sum()
        })
        .collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| {
        wins[y]
            .cmp(&wins[x])
            .then(completions[y].cmp(&completions[x]))
            .then(total_cpu[x].cmp(&total_cpu[y]))
            .then(configs[x].cmp(&configs[y]))
    });

    // Group consecutive equivalents, then check the chain against every pair.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for &ix in &order {
        match groups.last_mut() {
            Some(group) if !beats[group[group.len() - 1]][ix] && !beats[ix][group[group.len() - 1]] => {
                group.push(ix)
            }
            _ => groups.push(vec![ix]),
        }
    }
    let group_of = |ix: usize| groups.iter().position(|g| g.contains(&ix)).unwrap();
    let mut transitive = true;
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let (gi, gj) = (group_of(order[i]), group_of(order[j]));
            let expected = gi < gj;
            if beats[order[i]][order[j]] != expected {
                transitive = false;
            }
        }
    }

    if !transitive {
        let cells: Vec<Vec<char>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| {
                        if beats[i][j] {
                            '>'
                        } else if beats[j][i] {
                            '<'
                        } else {
                            '='
                        }
                    })
                    .collect()
            })
            .collect();
        return Ok(RankOutcome::Matrix { configs, cells });
    }

    let chain = groups
        .iter()
        .map(|g| {
            g.iter()
                .map(|&ix| configs[ix].clone())
                .collect::<Vec<_>>()
                .join(" ≡ ")
        })
        .collect::<Vec<_>>()
        .join(" > ");
    Ok(RankOutcome::Chain(chain))
}
