//! Backtrack search with d-way branching, dom/wdeg variable ordering,
//! lexicographic (declared-order) values, and per-assignment lookahead.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::events::{EventSink, PropagationEvent};
use crate::gac::{enforce_gac, GacOutcome};
use crate::model::{Assignment, ConId, Csp};
use crate::poac::{enforce_poac, PoacOutcome};
use crate::rnic::{enforce_rnic, RnicOutcome};
use crate::state::SearchState;
use crate::weighting::{apply_event, select_variable, Consistency, Strategy, WeightStore};

/// Source of elapsed time for cooperative limit checks. The std companion
/// supplies CPU-clock implementations; tests use manual clocks.
pub trait TimeSource {
    fn elapsed_ms(&mut self) -> u64;
}

/// A clock that never advances (no time limit ever fires).
pub struct FrozenClock;

impl TimeSource for FrozenClock {
    fn elapsed_ms(&mut self) -> u64 {
        0
    }
}

/// A scripted clock advancing a fixed step per query.
pub struct SteppingClock {
    now: u64,
    step: u64,
}

impl SteppingClock {
    pub fn new(step: u64) -> SteppingClock {
        SteppingClock { now: 0, step }
    }
}

impl TimeSource for SteppingClock {
    fn elapsed_ms(&mut self) -> u64 {
        self.now += self.step;
        self.now
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveConfig {
    pub consistency: Consistency,
    pub strategy: Strategy,
    /// Cooperative limit, checked at every node visit and at lookahead pass
    /// boundaries. `None` disables it.
    pub time_limit_ms: Option<u64>,
    /// Optional cap on node visits; exhausting it reports a timeout.
    pub node_limit: Option<u64>,
}

impl SolveConfig {
    pub fn new(consistency: Consistency, strategy: Strategy) -> SolveConfig {
        SolveConfig { consistency, strategy, time_limit_ms: None, node_limit: None }
    }

    pub fn with_time_limit_ms(mut self, ms: u64) -> SolveConfig {
        self.time_limit_ms = Some(ms);
        self
    }

    pub fn with_node_limit(mut self, nodes: u64) -> SolveConfig {
        self.node_limit = Some(nodes);
        self
    }
}

/// An illegal strategy/consistency pairing, rejected at solve setup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub consistency: Consistency,
    pub strategy: Strategy,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "strategy `{}` cannot be paired with consistency `{}`",
            self.strategy, self.consistency
        )
    }
}

impl core::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Sat,
    Unsat,
    Timeout,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Sat => "sat",
            SolveStatus::Unsat => "unsat",
            SolveStatus::Timeout => "timeout",
        })
    }
}

impl SolveStatus {
    pub fn parse(s: &str) -> Option<SolveStatus> {
        match s {
            "sat" => Some(SolveStatus::Sat),
            "unsat" => Some(SolveStatus::Unsat),
            "timeout" => Some(SolveStatus::Timeout),
            _ => None,
        }
    }
}

/// Failed-lookahead counts by mechanism, root preprocessing included.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WipeoutCounts {
    pub gac: u64,
    pub poac: u64,
    pub rnic: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub solution: Option<Assignment>,
    /// Variable-value assignment attempts (counted before their lookahead).
    pub nodes: u64,
    pub cpu_ms: u64,
    pub wipeouts: WipeoutCounts,
    pub weights: WeightStore,
    /// Event log, captured when [`solve_recording`] is used.
    pub events: Option<Vec<PropagationEvent>>,
}

/// Renders a configuration as its canonical id, e.g. `poac/alls`.
pub fn config_id(consistency: Consistency, strategy: Strategy) -> String {
    alloc::format!("{consistency}/{strategy}")
}

struct ApplyingSink<'x> {
    store: &'x mut WeightStore,
    strategy: Strategy,
    log: Option<&'x mut Vec<PropagationEvent>>,
}

impl EventSink for ApplyingSink<'_> {
    fn emit(&mut self, event: PropagationEvent) {
        apply_event(self.store, self.strategy, &event);
        if let Some(log) = &mut self.log {
            log.push(event);
        }
    }
}

struct Searcher<'a, 'c> {
    state: SearchState<'a>,
    store: WeightStore,
    strategy: Strategy,
    consistency: Consistency,
    clock: &'c mut dyn TimeSource,
    deadline_ms: Option<u64>,
    node_limit: Option<u64>,
    nodes: u64,
    wipeouts: WipeoutCounts,
    log: Option<Vec<PropagationEvent>>,
}

enum Walk {
    Solution(Assignment),
    Exhausted,
    OutOfBudget,
}

impl Searcher<'_, '_> {
    fn out_of_budget(&mut self) -> bool {
        if let Some(limit) = self.node_limit {
            if self.nodes >= limit {
                return true;
            }
        }
        match self.deadline_ms {
            Some(deadline) => self.clock.elapsed_ms() >= deadline,
            None => false,
        }
    }

    fn emit(&mut self, event: PropagationEvent) {
        apply_event(&mut self.store, self.strategy, &event);
        if let Some(log) = &mut self.log {
            log.push(event);
        }
    }

    /// Lookahead after an assignment (or at the root, seeded with every
    /// constraint). True means the subtree survives.
    fn lookahead(&mut self, seeds: Vec<ConId>) -> bool {
        match enforce_gac(&mut self.state, seeds) {
            GacOutcome::Wipeout { constraint, .. } => {
                self.emit(PropagationEvent::GacWipeout { constraint });
                self.wipeouts.gac += 1;
                return false;
            }
            GacOutcome::Fixpoint { .. } => {}
        }
        match self.consistency {
            Consistency::Gac => true,
            Consistency::Poac => {
                let outcome = {
                    let Searcher { state, store, strategy, clock, deadline_ms, log, .. } =
                        &mut *self;
                    let deadline = *deadline_ms;
                    let mut sink = ApplyingSink { store, strategy: *strategy, log: log.as_mut() };
                    let mut stop = || match deadline {
                        Some(d) => clock.elapsed_ms() >= d,
                        None => false,
                    };
                    enforce_poac(state, &mut sink, &mut stop)
                };
                match outcome {
                    PoacOutcome::Fixpoint => true,
                    PoacOutcome::Wipeout { .. } => {
                        self.wipeouts.poac += 1;
                        false
                    }
                    PoacOutcome::Interrupted => false,
                }
            }
            Consistency::Rnic => {
                let outcome = {
                    let Searcher { state, store, strategy, clock, deadline_ms, log, .. } =
                        &mut *self;
                    let deadline = *deadline_ms;
                    let mut sink = ApplyingSink { store, strategy: *strategy, log: log.as_mut() };
                    let mut stop = || match deadline {
                        Some(d) => clock.elapsed_ms() >= d,
                        None => false,
                    };
                    enforce_rnic(state, &mut sink, &mut stop)
                };
                match outcome {
                    RnicOutcome::Fixpoint => true,
                    RnicOutcome::Wipeout { .. } => {
                        self.wipeouts.rnic += 1;
                        false
                    }
                    RnicOutcome::Interrupted => false,
                }
            }
        }
    }

    fn walk(&mut self) -> Walk {
        if self.state.assigned_count() as usize == self.state.csp().var_count() {
            let solution: Assignment = self
                .state
                .csp()
                .var_ids()
                .map(|v| (v, self.state.singleton_value(v).expect("assigned variable")))
                .collect();
            return Walk::Solution(solution);
        }
        let x = select_variable(&self.state, &self.store, self.strategy)
            .expect("an unassigned variable exists");
        for value in self.state.live_values(x) {
            self.nodes += 1;
            if self.out_of_budget() {
                return Walk::OutOfBudget;
            }
            let marker = self.state.save();
            self.state.assign(x, value);
            let seeds: Vec<ConId> = self.state.csp().constraints_on(x).to_vec();
            if self.lookahead(seeds) {
                match self.walk() {
                    Walk::Exhausted => {}
                    done => return done,
                }
            } else if self.out_of_budget() {
                // An interrupted lookahead reads as failure; a spent budget
                // here must surface as a timeout, not as pruning.
                self.state.restore_to(marker);
                return Walk::OutOfBudget;
            }
            self.state.restore_to(marker);
        }
        Walk::Exhausted
    }
}

pub fn solve(
    csp: &Csp,
    config: &SolveConfig,
    clock: &mut dyn TimeSource,
) -> Result<SolveResult, ConfigError> {
    solve_inner(csp, config, clock, false)
}

/// Like [`solve`] but captures the full propagation-event log in the result.
pub fn solve_recording(
    csp: &Csp,
    config: &SolveConfig,
    clock: &mut dyn TimeSource,
) -> Result<SolveResult, ConfigError> {
    solve_inner(csp, config, clock, true)
}

fn solve_inner(
    csp: &Csp,
    config: &SolveConfig,
    clock: &mut dyn TimeSource,
    record: bool,
) -> Result<SolveResult, ConfigError> {
    if !config.strategy.legal_with(config.consistency) {
        return Err(ConfigError { consistency: config.consistency, strategy: config.strategy });
    }

    let start_ms = clock.elapsed_ms();
    let deadline_ms = config.time_limit_ms.map(|limit| start_ms.saturating_add(limit));

    let mut searcher = Searcher {
        state: SearchState::new(csp),
        store: WeightStore::new(csp),
        strategy: config.strategy,
        consistency: config.consistency,
        clock,
        deadline_ms,
        node_limit: config.node_limit,
        nodes: 0,
        wipeouts: WipeoutCounts::default(),
        log: record.then(Vec::new),
    };

    // Root preprocessing: full lookahead before the first selection. Events
    // fire here exactly as at any node.
    let root_seeds: Vec<ConId> = csp.con_ids().collect();
    let (status, solution) = if !searcher.lookahead(root_seeds) {
        if searcher.out_of_budget() {
            (SolveStatus::Timeout, None)
        } else {
            (SolveStatus::Unsat, None)
        }
    } else {
        match searcher.walk() {
            Walk::Solution(a) => (SolveStatus::Sat, Some(a)),
            Walk::Exhausted => (SolveStatus::Unsat, None),
            Walk::OutOfBudget => (SolveStatus::Timeout, None),
        }
    };

    let cpu_ms = searcher.clock.elapsed_ms().saturating_sub(start_ms);
    Ok(SolveResult {
        status,
        solution,
        nodes: searcher.nodes,
        cpu_ms,
        wipeouts: searcher.wipeouts,
        weights: searcher.store,
        events: searcher.log,
    })
}
