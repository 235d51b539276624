//! Partition-one arc consistency via singleton tests with per-value
//! counters.
//!
//! Each future variable is processed in turn: every live value gets a
//! singleton test (assign, run GAC, restore). Values whose test fails are
//! removed; values elsewhere that were pruned by *every* surviving test are
//! removed too. Any removal triggers a re-propagation of the whole state,
//! and passes repeat until one removes nothing.

use alloc::vec::Vec;

use crate::events::{EventSink, PropagationEvent};
use crate::gac::{enforce_gac, GacOutcome};
use crate::model::{ConId, Value, VarId};
use crate::state::SearchState;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SingletonOutcome {
    /// The test's GAC reached a fixpoint; carries the values it removed from
    /// *other* variables (all restored before returning).
    Consistent { pruned_elsewhere: Vec<(VarId, Value)> },
    /// The test's GAC wiped out; `culprit` is that run's blamed constraint.
    Failed { culprit: ConId },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PoacOutcome {
    Fixpoint,
    Wipeout { variable: VarId },
    Interrupted,
}

/// Counts, per (variable, value), how many singleton tests of the variable
/// currently under test removed it.
pub struct PoacCounters {
    counts: Vec<Vec<u32>>,
}

impl PoacCounters {
    pub fn new(state: &SearchState<'_>) -> PoacCounters {
        PoacCounters {
            counts: state
                .csp()
                .variables()
                .iter()
                .map(|v| alloc::vec![0; v.domain.len()])
                .collect(),
        }
    }

    pub fn reset(&mut self) {
        for row in &mut self.counts {
            row.fill(0);
        }
    }

    pub fn record(&mut self, state: &SearchState<'_>, var: VarId, value: Value) {
        let pos = state
            .csp()
            .variable(var)
            .domain
            .iter()
            .position(|&v| v == value)
            .expect("recorded value must be declared");
        self.counts[var.idx()][pos] += 1;
    }

    pub fn count(&self, state: &SearchState<'_>, var: VarId, value: Value) -> u32 {
        let pos = state
            .csp()
            .variable(var)
            .domain
            .iter()
            .position(|&v| v == value)
            .expect("queried value must be declared");
        self.counts[var.idx()][pos]
    }
}

/// Probes `x <- v`: reduces the domain, runs GAC seeded by `x`'s constraints,
/// and restores the state exactly. On failure, emits one SingletonWipeout.
pub fn singleton_test(
    state: &mut SearchState<'_>,
    x: VarId,
    v: Value,
    sink: &mut dyn EventSink,
) -> SingletonOutcome {
    assert!(state.is_live(x, v), "singleton test on a dead value");
    let marker = state.save();
    state.reduce_to_singleton(x, v);
    let seeds: Vec<ConId> = state.csp().constraints_on(x).to_vec();
    let outcome = enforce_gac(state, seeds);
    state.restore_to(marker);
    match outcome {
        GacOutcome::Fixpoint { removals } => SingletonOutcome::Consistent {
            pruned_elsewhere: removals.into_iter().filter(|&(var, _)| var != x).collect(),
        },
        GacOutcome::Wipeout { constraint, .. } => {
            sink.emit(PropagationEvent::SingletonWipeout {
                constraint,
                variable: x,
                value: v,
            });
            SingletonOutcome::Failed { culprit: constraint }
        }
    }
}

/// Enforces POAC on a state that is already GAC. Interleaved re-propagation
/// runs emit no events; only singleton tests (and the all-tests-failed case)
/// do. `stop` is polled at pass boundaries.
pub fn enforce_poac(
    state: &mut SearchState<'_>,
    sink: &mut dyn EventSink,
    stop: &mut dyn FnMut() -> bool,
) -> PoacOutcome {
    let csp = state.csp();
    let mut counters = PoacCounters::new(state);
    loop {
        if stop() {
            return PoacOutcome::Interrupted;
        }
        let mut pass_changed = false;
        for x in csp.var_ids() {
            if state.is_assigned(x) {
                continue;
            }
            let values = state.live_values(x);
            let mut survivors: Vec<Value> = Vec::with_capacity(values.len());
            let mut failed: Vec<Value> = Vec::new();
            let mut last_culprit: Option<ConId> = None;
            counters.reset();

            for &v in &values {
                match singleton_test(state, x, v, sink) {
                    SingletonOutcome::Consistent { pruned_elsewhere } => {
                        for (y, w) in pruned_elsewhere {
                            counters.record(state, y, w);
                        }
                        survivors.push(v);
                    }
                    SingletonOutcome::Failed { culprit } => {
                        failed.push(v);
                        last_culprit = Some(culprit);
                    }
                }
            }

            if survivors.is_empty() {
                // Every live value failed within this pass.
                sink.emit(PropagationEvent::VariableAllTestsFailed {
                    variable: x,
                    last_culprit: last_culprit.expect("at least one test failed"),
                });
                for v in failed {
                    state.remove_value(x, v);
                }
                return PoacOutcome::Wipeout { variable: x };
            }

            let mut removed_any = !failed.is_empty();
            for v in failed {
                state.remove_value(x, v);
            }

            // Values pruned by every surviving test are not POAC.
            let threshold = survivors.len() as u32;
            for y in csp.var_ids() {
                if y == x {
                    continue;
                }
                for w in state.live_values(y) {
                    if counters.count(state, y, w) == threshold {
                        state.remove_value(y, w);
                        removed_any = true;
                    }
                }
            }

            if removed_any {
                pass_changed = true;
                let all: Vec<ConId> = csp.con_ids().collect();
                if let GacOutcome::Wipeout { variable, .. } = enforce_gac(state, all) {
                    return PoacOutcome::Wipeout { variable };
                }
            }
        }
        if !pass_changed {
            return PoacOutcome::Fixpoint;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_instance;
    use crate::model::Csp;
    use alloc::vec;

    fn never() -> impl FnMut() -> bool {
        || false
    }

    fn gac_root(state: &mut SearchState<'_>) {
        let ids: Vec<ConId> = state.csp().con_ids().collect();
        assert!(!enforce_gac(state, ids).is_wipeout());
    }

    fn parse(text: &str) -> Csp {
        parse_instance(text).unwrap()
    }

    #[test]
    fn consistent_test_reports_pruned_elsewhere() {
        let csp = parse("csp t\nvar x : 0 1\nvar y : 0 1\ncon c1 : x y : (0 0) (1 1)");
        let mut st = SearchState::new(&csp);
        let mut events = Vec::new();
        match singleton_test(&mut st, VarId(0), 0, &mut events) {
            SingletonOutcome::Consistent { pruned_elsewhere } => {
                assert_eq!(pruned_elsewhere, vec![(VarId(1), 1)]);
            }
            other => panic!("expected consistent, got {other:?}"),
        }
        assert!(events.is_empty());
    }

    #[test]
    fn failed_test_emits_one_event() {
        let csp = parse("csp t\nvar x : 0 1\nvar y : 0 1\ncon c1 : x y : (0 0)");
        let mut st = SearchState::new(&csp);
        let mut events = Vec::new();
        match singleton_test(&mut st, VarId(0), 1, &mut events) {
            SingletonOutcome::Failed { culprit } => assert_eq!(culprit, ConId(0)),
            other => panic!("expected failure, got {other:?}"),
        }
        assert_eq!(
            events,
            vec![PropagationEvent::SingletonWipeout {
                constraint: ConId(0),
                variable: VarId(0),
                value: 1,
            }]
        );
    }

    #[test]
    fn state_restored_exactly_after_any_test() {
        let csp = parse(
            "csp t\nvar x : 0 1 2\nvar y : 0 1\nvar z : 0 1\n\
             con c0 : x y : (0 0) (1 1) (2 0)\ncon c1 : y z : (0 1) (1 0)",
        );
        let mut st = SearchState::new(&csp);
        gac_root(&mut st);
        let before = st.snapshot();
        let mut sink = crate::events::NullSink;
        for v in st.live_values(VarId(0)) {
            singleton_test(&mut st, VarId(0), v, &mut sink);
            assert_eq!(st.snapshot(), before);
        }
    }

    #[test]
    fn forced_instance_reaches_singleton_domains() {
        let csp = parse("csp t\nvar x : 0 1\nvar y : 0 1\ncon c1 : x y : (0 0)");
        let mut st = SearchState::new(&csp);
        gac_root(&mut st);
        let mut events = Vec::new();
        let out = enforce_poac(&mut st, &mut events, &mut never());
        assert_eq!(out, PoacOutcome::Fixpoint);
        assert_eq!(st.live_values(VarId(0)), vec![0]);
        assert_eq!(st.live_values(VarId(1)), vec![0]);
    }

    #[test]
    fn idempotent_with_no_events_when_already_poac() {
        let csp = parse("csp t\nvar x : 0 1\nvar y : 0 1\ncon c1 : x y : (0 0) (1 1)");
        let mut st = SearchState::new(&csp);
        gac_root(&mut st);
        let mut events = Vec::new();
        assert_eq!(enforce_poac(&mut st, &mut events, &mut never()), PoacOutcome::Fixpoint);
        let after_first = st.snapshot();
        assert_eq!(enforce_poac(&mut st, &mut events, &mut never()), PoacOutcome::Fixpoint);
        assert_eq!(st.snapshot(), after_first);
        assert!(events.is_empty());
    }

    #[test]
    fn all_tests_failed_emits_variable_event() {
        // x=0 and x=1 both wipe out y through incompatible constraints.
        let csp = parse(
            "csp t\nvar x : 0 1\nvar y : 0 1\nvar z : 0 1\n\
             con c0 : x y : (0 0) (1 1)\ncon c1 : x y : (0 1) (1 0)\ncon c2 : y z : (0 0) (1 1)",
        );
        let mut st = SearchState::new(&csp);
        gac_root(&mut st);
        let mut events = Vec::new();
        let out = enforce_poac(&mut st, &mut events, &mut never());
        assert!(matches!(out, PoacOutcome::Wipeout { .. }));
        let all_failed: Vec<_> = events
            .iter()
            .filter(|e| matches!(e, PropagationEvent::VariableAllTestsFailed { .. }))
            .collect();
        assert_eq!(all_failed.len(), 1);
        let singleton_failures = events
            .iter()
            .filter(|e| matches!(e, PropagationEvent::SingletonWipeout { .. }))
            .count();
        assert_eq!(singleton_failures, 2);
    }

    #[test]
    fn interrupt_stops_enforcement() {
        let csp = parse("csp t\nvar x : 0 1\nvar y : 0 1\ncon c1 : x y : (0 0) (1 1)");
        let mut st = SearchState::new(&csp);
        gac_root(&mut st);
        let mut sink = crate::events::NullSink;
        let mut always = || true;
        assert_eq!(enforce_poac(&mut st, &mut sink, &mut always), PoacOutcome::Interrupted);
    }
}
