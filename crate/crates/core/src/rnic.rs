//! Relational neighborhood inverse consistency on the dual graph: a tuple
//! survives only if one live tuple can be picked from every neighboring
//! relation such that all selections agree pairwise on shared variables.
//! Deleted tuples are resynchronized into the domains by plain revise
//! passes, which emit no weight events.

use alloc::vec::Vec;

use crate::events::{EventSink, PropagationEvent};
use crate::gac::revise_str;
use crate::model::{ConId, Csp, Value};
use crate::state::SearchState;

/// Constraints as vertices, edges between constraints whose declared scopes
/// share at least one variable. Static for the lifetime of the instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualGraph {
    adjacency: Vec<Vec<ConId>>,
}

impl DualGraph {
    pub fn neighbors(&self, c: ConId) -> &[ConId] {
        &self.adjacency[c.idx()]
    }
}

pub fn build_dual_graph(csp: &Csp) -> DualGraph {
    let n = csp.con_count();
    let mut adjacency = alloc::vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let a = csp.constraint(ConId(i as u32));
            let b = csp.constraint(ConId(j as u32));
            if a.scope.iter().any(|v| b.scope.contains(v)) {
                adjacency[i].push(ConId(j as u32));
                adjacency[j].push(ConId(i as u32));
            }
        }
    }
    DualGraph { adjacency }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RnicOutcome {
    Fixpoint,
    /// `constraint`'s live table emptied; state left for the caller to
    /// restore.
    Wipeout { constraint: ConId },
    Interrupted,
}

/// Live-table neighbors of `head` in declaration order.
fn live_neighborhood(state: &SearchState<'_>, graph: &DualGraph, head: ConId) -> Vec<ConId> {
    graph
        .neighbors(head)
        .iter()
        .copied()
        .filter(|&n| state.table_size(n) > 0)
        .collect()
}

/// True iff one live tuple per neighborhood constraint can be chosen so that
/// `tau` and all chosen tuples agree on every shared variable, including
/// between neighbors. Depth-first with forward checking on the partial
/// variable binding.
pub fn tuple_has_support(
    state: &SearchState<'_>,
    head: ConId,
    row: u32,
    neighborhood: &[ConId],
) -> bool {
    debug_assert!(state.is_tuple_live(head, row as usize));
    let csp = state.csp();
    let mut binding: Vec<Option<Value>> = alloc::vec![None; csp.var_count()];
    let head_con = csp.constraint(head);
    let tau = &head_con.tuples[row as usize];
    for (slot, &var) in head_con.scope.iter().enumerate() {
        binding[var.idx()] = Some(tau[slot]);
    }
    extend(state, neighborhood, 0, &mut binding)
}

fn extend(
    state: &SearchState<'_>,
    neighborhood: &[ConId],
    depth: usize,
    binding: &mut Vec<Option<Value>>,
) -> bool {
    if depth == neighborhood.len() {
        return true;
    }
    let con = neighborhood[depth];
    let decl = state.csp().constraint(con);
    for row in state.live_rows(con) {
        let tuple = &decl.tuples[row as usize];
        let compatible = decl
            .scope
            .iter()
            .zip(tuple)
            .all(|(&var, &val)| binding[var.idx()].is_none_or(|b| b == val));
        if !compatible {
            continue;
        }
        let mut newly_bound: Vec<usize> = Vec::new();
        for (&var, &val) in decl.scope.iter().zip(tuple) {
            if binding[var.idx()].is_none() {
                binding[var.idx()] = Some(val);
                newly_bound.push(var.idx());
            }
        }
        if extend(state, neighborhood, depth + 1, binding) {
            return true;
        }
        for ix in newly_bound {
            binding[ix] = None;
        }
    }
    false
}

/// Enforces RNIC on a state that is already GAC. The queue starts with every
/// constraint having at least two future variables; when a table changes its
/// neighbors are re-examined. The first emptied relation emits one
/// RelationWipeout and stops enforcement. `stop` is polled per queue pop.
pub fn enforce_rnic(
    state: &mut SearchState<'_>,
    sink: &mut dyn EventSink,
    stop: &mut dyn FnMut() -> bool,
) -> RnicOutcome {
    let csp = state.csp();
    let graph = build_dual_graph(csp);

    let mut queued = alloc::vec![false; csp.con_count()];
    let mut queue: Vec<ConId> = Vec::new();
    let mut head_ix = 0usize;
    for c in csp.con_ids() {
        if state.future_vars(c) >= 2 {
            queued[c.idx()] = true;
            queue.push(c);
        }
    }

    while head_ix < queue.len() {
        if stop() {
            return RnicOutcome::Interrupted;
        }
        let head = queue[head_ix];
        head_ix += 1;
        queued[head.idx()] = false;

        let neighborhood = live_neighborhood(state, &graph, head);
        let mut removed_any = false;
        for row in state.live_rows(head) {
            if !tuple_has_support(state, head, row, &neighborhood) {
                state.remove_tuple(head, row);
                removed_any = true;
            }
        }
        if !removed_any {
            continue;
        }
        if state.table_size(head) == 0 {
            sink.emit(PropagationEvent::RelationWipeout { head, neighborhood });
            return RnicOutcome::Wipeout { constraint: head };
        }

        // Resynchronize domains with the shrunk tables, tracking which other
        // tables change along the way.
        let mut tables_changed = alloc::vec![false; csp.con_count()];
        tables_changed[head.idx()] = true;
        if let Some(emptied) = resync_domains(state, head, &mut tables_changed) {
            let nbhd = live_neighborhood(state, &graph, emptied);
            sink.emit(PropagationEvent::RelationWipeout { head: emptied, neighborhood: nbhd });
            return RnicOutcome::Wipeout { constraint: emptied };
        }

        for (ci, &changed) in tables_changed.iter().enumerate() {
            if !changed {
                continue;
            }
            for &n in graph.neighbors(ConId(ci as u32)) {
                if state.future_vars(n) >= 2 && !queued[n.idx()] {
                    queued[n.idx()] = true;
                    queue.push(n);
                }
            }
        }
    }
    RnicOutcome::Fixpoint
}

/// Revise-to-fixpoint starting from `origin`'s scope variables. Returns the
/// first constraint whose table empties, if any.
fn resync_domains(
    state: &mut SearchState<'_>,
    origin: ConId,
    tables_changed: &mut [bool],
) -> Option<ConId> {
    let csp = state.csp();
    let mut queued = alloc::vec![false; csp.con_count()];
    let mut queue: Vec<ConId> = Vec::new();
    let mut head = 0usize;
    queued[origin.idx()] = true;
    queue.push(origin);

    while head < queue.len() {
        let con = queue[head];
        head += 1;
        queued[con.idx()] = false;

        let result = revise_str(state, con);
        if result.table_changed {
            tables_changed[con.idx()] = true;
        }
        if result.wipeout.is_some() {
            debug_assert_eq!(state.table_size(con), 0, "resync wipeout must empty the table");
            return Some(con);
        }
        for &(var, _) in &result.removals {
            for &other in csp.constraints_on(var) {
                if other != con && !queued[other.idx()] {
                    queued[other.idx()] = true;
                    queue.push(other);
                }
            }
        }
    }
    None
}
