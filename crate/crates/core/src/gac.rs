//! Generalized arc consistency by simple tabular reduction: dead tuples are
//! dropped from each live table, then unsupported values from each scope
//! domain, to a fixpoint over a FIFO constraint queue.

use alloc::vec::Vec;

use crate::model::{ConId, Csp, Value, VarId};
use crate::state::SearchState;

/// Result of revising one constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviseResult {
    /// Values removed, grouped as (variable, value) in removal order.
    pub removals: Vec<(VarId, Value)>,
    /// Variable whose domain emptied, if the revision wiped out.
    pub wipeout: Option<VarId>,
    pub table_changed: bool,
}

/// Outcome of a propagation run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GacOutcome {
    Fixpoint { removals: Vec<(VarId, Value)> },
    /// `constraint` is the one whose revision emptied `variable`'s domain.
    /// The state is left as-is; the caller restores via the trail.
    Wipeout { constraint: ConId, variable: VarId },
}

impl GacOutcome {
    pub fn is_wipeout(&self) -> bool {
        matches!(self, GacOutcome::Wipeout { .. })
    }
}

/// One STR pass over `con`: the live table keeps exactly the previously-live
/// tuples whose components are all live, then each scope domain keeps exactly
/// the values appearing in some remaining tuple. An emptied table wipes out
/// on the first scope variable.
pub fn revise_str(state: &mut SearchState<'_>, con: ConId) -> ReviseResult {
    let csp: &Csp = state.csp();
    let scope = csp.constraint(con).scope.clone();
    let tuples = &csp.constraint(con).tuples;

    let mut table_changed = false;
    for row in state.live_rows(con) {
        let tuple = &tuples[row as usize];
        let dead = scope.iter().zip(tuple).any(|(&v, &val)| !state.is_live(v, val));
        if dead {
            state.remove_tuple(con, row);
            table_changed = true;
        }
    }

    if state.table_size(con) == 0 {
        return ReviseResult { removals: Vec::new(), wipeout: Some(scope[0]), table_changed };
    }

    let live_rows = state.live_rows(con);
    let mut removals = Vec::new();
    for (slot, &var) in scope.iter().enumerate() {
        for value in state.live_values(var) {
            let supported = live_rows
                .iter()
                .any(|&row| tuples[row as usize][slot] == value);
            if !supported {
                let left = state.remove_value(var, value);
                removals.push((var, value));
                if left == 0 {
                    // Unreachable while tables stay component-clean: a
                    // non-empty filtered table supports every scope variable.
                    return ReviseResult { removals, wipeout: Some(var), table_changed };
                }
            }
        }
    }
    ReviseResult { removals, wipeout: None, table_changed }
}

/// Runs revisions from `seeds` to a fixpoint. FIFO queue without duplicates;
/// when a variable loses values, all its constraints except the one just
/// revised are enqueued. Stops at the first wipeout, leaving the state for
/// the caller to restore.
pub fn enforce_gac(
    state: &mut SearchState<'_>,
    seeds: impl IntoIterator<Item = ConId>,
) -> GacOutcome {
    let csp = state.csp();
    let mut queued = alloc::vec![false; csp.con_count()];
    let mut queue: Vec<ConId> = Vec::new();
    let mut head = 0usize;
    for c in seeds {
        if !queued[c.idx()] {
            queued[c.idx()] = true;
            queue.push(c);
        }
    }

    let mut all_removals: Vec<(VarId, Value)> = Vec::new();
    while head < queue.len() {
        let con = queue[head];
        head += 1;
        queued[con.idx()] = false;

        let result = revise_str(state, con);
        if let Some(variable) = result.wipeout {
            return GacOutcome::Wipeout { constraint: con, variable };
        }
        for &(var, value) in &result.removals {
            for &other in csp.constraints_on(var) {
                if other != con && !queued[other.idx()] {
                    queued[other.idx()] = true;
                    queue.push(other);
                }
            }
            all_removals.push((var, value));
        }
    }
    GacOutcome::Fixpoint { removals: all_removals }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_instance;
    use crate::model::Csp;
    use alloc::vec;

    fn gac_all(state: &mut SearchState<'_>) -> GacOutcome {
        let ids: Vec<ConId> = state.csp().con_ids().collect();
        enforce_gac(state, ids)
    }

    fn parse(text: &str) -> Csp {
        parse_instance(text).unwrap()
    }

    #[test]
    fn revise_single_support() {
        let csp = parse("csp t\nvar x : 0 1\nvar y : 0 1\ncon c0 : x y : (0 0)");
        let mut st = SearchState::new(&csp);
        let r = revise_str(&mut st, ConId(0));
        assert!(r.wipeout.is_none());
        assert_eq!(r.removals, vec![(VarId(0), 1), (VarId(1), 1)]);
        assert_eq!(st.live_values(VarId(0)), vec![0]);
        assert_eq!(st.live_values(VarId(1)), vec![0]);
    }

    #[test]
    fn revise_empty_table_wipes_first_scope_variable() {
        let csp = parse("csp t\nvar x : 0 1\nvar y : 0 1\ncon c0 : x y :");
        let mut st = SearchState::new(&csp);
        let r = revise_str(&mut st, ConId(0));
        assert_eq!(r.wipeout, Some(VarId(0)));
    }

    #[test]
    fn revise_drops_dead_tuples() {
        let csp = parse("csp t\nvar x : 0 1\nvar y : 0 1\ncon c0 : x y : (0 0) (1 1)");
        let mut st = SearchState::new(&csp);
        st.remove_value(VarId(1), 0);
        let r = revise_str(&mut st, ConId(0));
        assert!(r.table_changed);
        assert_eq!(st.live_rows(ConId(0)), vec![1]);
        assert_eq!(st.live_values(VarId(0)), vec![1]);
    }

    #[test]
    fn propagation_chain_blames_second_constraint() {
        let csp = parse(
            "csp t\nvar x : 0 1\nvar y : 0 1\nvar z : 0 1\ncon c1 : x y : (0 0)\ncon c2 : y z : (1 1)",
        );
        let mut st = SearchState::new(&csp);
        match gac_all(&mut st) {
            GacOutcome::Wipeout { constraint, variable } => {
                assert_eq!(constraint, ConId(1));
                assert!(csp.constraint(ConId(1)).scope.contains(&variable));
            }
            other => panic!("expected wipeout, got {other:?}"),
        }
    }

    #[test]
    fn idempotent_at_fixpoint() {
        let csp = parse(
            "csp t\nvar x : 0 1 2\nvar y : 0 1\ncon c0 : x y : (0 0) (1 1) (2 0)",
        );
        let mut st = SearchState::new(&csp);
        let first = gac_all(&mut st);
        assert!(!first.is_wipeout());
        match gac_all(&mut st) {
            GacOutcome::Fixpoint { removals } => assert!(removals.is_empty()),
            other => panic!("expected fixpoint, got {other:?}"),
        }
    }

    #[test]
    fn already_consistent_reports_no_removals() {
        let csp = parse("csp t\nvar x : 0 1\nvar y : 0 1\ncon c0 : x y : (0 0) (1 1)");
        let mut st = SearchState::new(&csp);
        match gac_all(&mut st) {
            GacOutcome::Fixpoint { removals } => assert!(removals.is_empty()),
            other => panic!("expected fixpoint, got {other:?}"),
        }
    }
}
