//! Mutable search state over an immutable [`Csp`]: live domains, live tables,
//! the assigned set, and an undo trail with depth markers.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::model::{ConId, Csp, Value, VarId};

#[derive(Debug, Clone, Copy)]
enum TrailOp {
    DomainRemoval { var: u32, pos: u32 },
    TupleRemoval { con: u32, row: u32 },
    Assigned { var: u32 },
}

/// Trail position captured by [`SearchState::save`]; restoring to it
/// reproduces the exact domains, tables, and assigned set present when the
/// marker was placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Marker(usize);

/// Comparable snapshot of the dynamic parts of a state (used to check exact
/// restoration).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSnapshot {
    pub domains: Vec<Vec<Value>>,
    pub tables: Vec<Vec<u32>>,
    pub assigned: Vec<bool>,
}

#[derive(Debug)]
pub struct SearchState<'a> {
    csp: &'a Csp,
    /// live[var][pos] for the var's declared domain position.
    dom_live: Vec<Vec<bool>>,
    dom_count: Vec<u32>,
    /// live[con][row] for the constraint's declared tuple row.
    tab_live: Vec<Vec<bool>>,
    tab_count: Vec<u32>,
    assigned: Vec<bool>,
    assigned_count: u32,
    value_pos: Vec<BTreeMap<Value, u32>>,
    trail: Vec<TrailOp>,
}

impl<'a> SearchState<'a> {
    pub fn new(csp: &'a Csp) -> SearchState<'a> {
        let dom_live: Vec<Vec<bool>> = csp
            .variables()
            .iter()
            .map(|v| alloc::vec![true; v.domain.len()])
            .collect();
        let dom_count = csp.variables().iter().map(|v| v.domain.len() as u32).collect();
        let tab_live: Vec<Vec<bool>> = csp
            .constraints()
            .iter()
            .map(|c| alloc::vec![true; c.tuples.len()])
            .collect();
        let tab_count = csp.constraints().iter().map(|c| c.tuples.len() as u32).collect();
        let value_pos = csp
            .variables()
            .iter()
            .map(|v| {
                v.domain
                    .iter()
                    .enumerate()
                    .map(|(i, &val)| (val, i as u32))
                    .collect()
            })
            .collect();
        SearchState {
            csp,
            dom_live,
            dom_count,
            tab_live,
            tab_count,
            assigned: alloc::vec![false; csp.var_count()],
            assigned_count: 0,
            value_pos,
            trail: Vec::new(),
        }
    }

    #[inline]
    pub fn csp(&self) -> &'a Csp {
        self.csp
    }

    #[inline]
    pub fn domain_size(&self, var: VarId) -> u32 {
        self.dom_count[var.idx()]
    }

    #[inline]
    pub fn table_size(&self, con: ConId) -> u32 {
        self.tab_count[con.idx()]
    }

    #[inline]
    pub fn is_live(&self, var: VarId, value: Value) -> bool {
        match self.value_pos[var.idx()].get(&value) {
            Some(&pos) => self.dom_live[var.idx()][pos as usize],
            None => false,
        }
    }

    #[inline]
    pub fn is_tuple_live(&self, con: ConId, row: usize) -> bool {
        self.tab_live[con.idx()][row]
    }

    #[inline]
    pub fn is_assigned(&self, var: VarId) -> bool {
        self.assigned[var.idx()]
    }

    #[inline]
    pub fn assigned_count(&self) -> u32 {
        self.assigned_count
    }

    /// Live values of `var` in declared-domain order.
    pub fn live_values(&self, var: VarId) -> Vec<Value> {
        self.csp.variable(var)
            .domain
            .iter()
            .enumerate()
            .filter(|&(pos, _)| self.dom_live[var.idx()][pos])
            .map(|(_, &v)| v)
            .collect()
    }

    /// Rows of `con`'s live tuples in declared (lexicographic) order.
    pub fn live_rows(&self, con: ConId) -> Vec<u32> {
        self.tab_live[con.idx()]
            .iter()
            .enumerate()
            .filter(|&(_, &live)| live)
            .map(|(row, _)| row as u32)
            .collect()
    }

    /// The single live value of an assigned (or otherwise singleton) domain.
    pub fn singleton_value(&self, var: VarId) -> Option<Value> {
        if self.dom_count[var.idx()] != 1 {
            return None;
        }
        self.live_values(var).pop()
    }

    /// Number of unassigned variables in `con`'s scope.
    pub fn future_vars(&self, con: ConId) -> u32 {
        self.csp.constraint(con)
            .scope
            .iter()
            .filter(|v| !self.assigned[v.idx()])
            .count() as u32
    }

    pub fn save(&self) -> Marker {
        Marker(self.trail.len())
    }

    pub fn restore_to(&mut self, marker: Marker) {
        while self.trail.len() > marker.0 {
            match self.trail.pop().unwrap() {
                TrailOp::DomainRemoval { var, pos } => {
                    self.dom_live[var as usize][pos as usize] = true;
                    self.dom_count[var as usize] += 1;
                }
                TrailOp::TupleRemoval { con, row } => {
                    self.tab_live[con as usize][row as usize] = true;
                    self.tab_count[con as usize] += 1;
                }
                TrailOp::Assigned { var } => {
                    self.assigned[var as usize] = false;
                    self.assigned_count -= 1;
                }
            }
        }
    }

    /// Removes a live value. Returns the new domain size.
    pub fn remove_value(&mut self, var: VarId, value: Value) -> u32 {
        let pos = *self.value_pos[var.idx()]
            .get(&value)
            .expect("value not in declared domain");
        debug_assert!(self.dom_live[var.idx()][pos as usize], "value already removed");
        self.dom_live[var.idx()][pos as usize] = false;
        self.dom_count[var.idx()] -= 1;
        self.trail.push(TrailOp::DomainRemoval { var: var.0, pos });
        self.dom_count[var.idx()]
    }

    /// Removes a live tuple row. Returns the new table size.
    pub fn remove_tuple(&mut self, con: ConId, row: u32) -> u32 {
        debug_assert!(self.tab_live[con.idx()][row as usize], "tuple already removed");
        self.tab_live[con.idx()][row as usize] = false;
        self.tab_count[con.idx()] -= 1;
        self.trail.push(TrailOp::TupleRemoval { con: con.0, row });
        self.tab_count[con.idx()]
    }

    /// Reduces `var`'s domain to `{value}` without marking it assigned.
    /// Used by singleton tests.
    pub fn reduce_to_singleton(&mut self, var: VarId, value: Value) {
        debug_assert!(self.is_live(var, value));
        let other: Vec<Value> = self
            .live_values(var)
            .into_iter()
            .filter(|&v| v != value)
            .collect();
        for v in other {
            self.remove_value(var, v);
        }
    }

    /// Assigns `var <- value`: domain reduced to the singleton and the
    /// variable marked assigned. Undone by trail restoration.
    pub fn assign(&mut self, var: VarId, value: Value) {
        debug_assert!(!self.assigned[var.idx()]);
        self.reduce_to_singleton(var, value);
        self.assigned[var.idx()] = true;
        self.assigned_count += 1;
        self.trail.push(TrailOp::Assigned { var: var.0 });
    }

    pub fn snapshot(&self) -> StateSnapshot {
        StateSnapshot {
            domains: self.csp.var_ids().map(|v| self.live_values(v)).collect(),
            tables: self.csp.con_ids().map(|c| self.live_rows(c)).collect(),
            assigned: self.assigned.clone(),
        }
    }
}
