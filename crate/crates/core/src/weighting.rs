//! Constraint and variable weights for the conflict-directed dom/wdeg
//! heuristic, the per-strategy event handling, and variable selection.
//!
//! Constraint weights start at one and only ever grow; variable weights
//! (used by the `Var` strategy) start at zero. A variable's score sums the
//! weights of its constraints that still have at least two future variables,
//! and selection minimizes |dom| / score with exact integer comparison.

use alloc::vec::Vec;
use core::fmt;

use crate::events::PropagationEvent;
use crate::model::{ConId, Csp, VarId};
use crate::state::SearchState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Consistency {
    Gac,
    Poac,
    Rnic,
}

impl fmt::Display for Consistency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Consistency::Gac => "gac",
            Consistency::Poac => "poac",
            Consistency::Rnic => "rnic",
        })
    }
}

/// Weight-update strategy. `Old` pairs with any consistency; the singleton
/// strategies pair only with POAC and the relational ones only with RNIC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Strategy {
    Old,
    AllS,
    LastS,
    Var,
    AllC,
    Head,
}

impl Strategy {
    pub fn legal_with(self, consistency: Consistency) -> bool {
        match self {
            Strategy::Old => true,
            Strategy::AllS | Strategy::LastS | Strategy::Var => consistency == Consistency::Poac,
            Strategy::AllC | Strategy::Head => consistency == Consistency::Rnic,
        }
    }

    pub const ALL: [Strategy; 6] = [
        Strategy::Old,
        Strategy::AllS,
        Strategy::LastS,
        Strategy::Var,
        Strategy::AllC,
        Strategy::Head,
    ];
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Old => "old",
            Strategy::AllS => "alls",
            Strategy::LastS => "lasts",
            Strategy::Var => "var",
            Strategy::AllC => "allc",
            Strategy::Head => "head",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WeightKey {
    Constraint(ConId),
    Variable(VarId),
}

/// Per-constraint weights (init 1) and per-variable weights (init 0),
/// non-decreasing over the lifetime of a solve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightStore {
    constraint: Vec<u64>,
    variable: Vec<u64>,
}

impl WeightStore {
    pub fn new(csp: &Csp) -> WeightStore {
        WeightStore {
            constraint: alloc::vec![1; csp.con_count()],
            variable: alloc::vec![0; csp.var_count()],
        }
    }

    #[inline]
    pub fn constraint_weight(&self, c: ConId) -> u64 {
        self.constraint[c.idx()]
    }

    #[inline]
    pub fn variable_weight(&self, v: VarId) -> u64 {
        self.variable[v.idx()]
    }

    pub fn constraint_weights(&self) -> &[u64] {
        &self.constraint
    }

    pub fn variable_weights(&self) -> &[u64] {
        &self.variable
    }

    fn bump_constraint(&mut self, c: ConId, deltas: &mut Vec<(WeightKey, u64)>) {
        self.constraint[c.idx()] += 1;
        deltas.push((WeightKey::Constraint(c), self.constraint[c.idx()]));
    }

    fn bump_variable(&mut self, v: VarId, deltas: &mut Vec<(WeightKey, u64)>) {
        self.variable[v.idx()] += 1;
        deltas.push((WeightKey::Variable(v), self.variable[v.idx()]));
    }
}

/// Applies one event under `strategy`, returning the (key, new value) pairs
/// that changed. Every strategy increments the culprit of a lookahead GAC
/// wipeout; the remaining event kinds are strategy-specific no-ops or bumps.
pub fn apply_event(
    store: &mut WeightStore,
    strategy: Strategy,
    event: &PropagationEvent,
) -> Vec<(WeightKey, u64)> {
    let mut deltas = Vec::new();
    match event {
        PropagationEvent::GacWipeout { constraint } => {
            store.bump_constraint(*constraint, &mut deltas);
        }
        PropagationEvent::SingletonWipeout { constraint, .. } => {
            if strategy == Strategy::AllS {
                store.bump_constraint(*constraint, &mut deltas);
            }
        }
        PropagationEvent::VariableAllTestsFailed { variable, last_culprit } => match strategy {
            Strategy::LastS => store.bump_constraint(*last_culprit, &mut deltas),
            Strategy::Var => store.bump_variable(*variable, &mut deltas),
            _ => {}
        },
        PropagationEvent::RelationWipeout { head, neighborhood } => match strategy {
            Strategy::AllC => {
                store.bump_constraint(*head, &mut deltas);
                for &n in neighborhood {
                    store.bump_constraint(n, &mut deltas);
                }
            }
            Strategy::Head => store.bump_constraint(*head, &mut deltas),
            _ => {}
        },
    }
    deltas
}

/// Sum of the weights of `x`'s constraints having at least two future
/// variables.
pub fn alpha_wdeg(state: &SearchState<'_>, store: &WeightStore, x: VarId) -> u64 {
    state
        .csp()
        .constraints_on(x)
        .iter()
        .filter(|&&c| state.future_vars(c) >= 2)
        .map(|&c| store.constraint_weight(c))
        .sum()
}

/// `alpha_wdeg` plus the variable's own weight.
pub fn alpha_wdeg_var(state: &SearchState<'_>, store: &WeightStore, x: VarId) -> u64 {
    store.variable_weight(x) + alpha_wdeg(state, store, x)
}

/// Picks the unassigned variable minimizing |dom(x)| / alpha(x), comparing
/// ratios by cross-multiplication. A zero score sorts after every positive
/// one; if every candidate scores zero the fallback is smallest domain. Ties
/// break by declaration order.
pub fn select_variable(
    state: &SearchState<'_>,
    store: &WeightStore,
    strategy: Strategy,
) -> Option<VarId> {
    let mut best: Option<(VarId, u64, u64)> = None; // (var, dom, alpha)
    for x in state.csp().var_ids() {
        if state.is_assigned(x) {
            continue;
        }
        let dom = state.domain_size(x) as u64;
        let alpha = if strategy == Strategy::Var {
            alpha_wdeg_var(state, store, x)
        } else {
            alpha_wdeg(state, store, x)
        };
        best = match best {
            None => Some((x, dom, alpha)),
            Some((bx, bdom, balpha)) => {
                let better = match (alpha > 0, balpha > 0) {
                    (true, false) => true,
                    (false, true) => false,
                    (true, true) => (dom as u128) * (balpha as u128) < (bdom as u128) * (alpha as u128),
                    (false, false) => dom < bdom,
                };
                if better {
                    Some((x, dom, alpha))
                } else {
                    Some((bx, bdom, balpha))
                }
            }
        };
    }
    best.map(|(x, _, _)| x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_instance;
    use alloc::vec;
    use proptest::{prop_assert_eq, proptest};

    fn three_con_csp() -> crate::model::Csp {
        parse_instance(
            "csp t\nvar x : 0 1\nvar y : 0 1 2\nvar z : 0 1\n\
             con c0 : x y : (0 0) (1 1)\ncon c1 : x z : (0 0) (1 1)\ncon c2 : y z : (0 0) (1 1)",
        )
        .unwrap()
    }

    #[test]
    fn alls_bumps_on_singleton_wipeout() {
        let csp = three_con_csp();
        let mut store = WeightStore::new(&csp);
        let e = PropagationEvent::SingletonWipeout {
            constraint: ConId(2),
            variable: VarId(0),
            value: 1,
        };
        let d = apply_event(&mut store, Strategy::AllS, &e);
        assert_eq!(d, vec![(WeightKey::Constraint(ConId(2)), 2)]);
        assert_eq!(store.constraint_weight(ConId(2)), 2);
    }

    #[test]
    fn old_ignores_singleton_wipeout() {
        let csp = three_con_csp();
        let mut store = WeightStore::new(&csp);
        let e = PropagationEvent::SingletonWipeout {
            constraint: ConId(2),
            variable: VarId(0),
            value: 1,
        };
        assert!(apply_event(&mut store, Strategy::Old, &e).is_empty());
        assert_eq!(store.constraint_weight(ConId(2)), 1);
    }

    #[test]
    fn allc_bumps_head_and_neighborhood() {
        let csp = three_con_csp();
        let mut store = WeightStore::new(&csp);
        let e = PropagationEvent::RelationWipeout {
            head: ConId(0),
            neighborhood: vec![ConId(1), ConId(2)],
        };
        let d = apply_event(&mut store, Strategy::AllC, &e);
        assert_eq!(d.len(), 3);
        assert_eq!(store.constraint_weight(ConId(0)), 2);
        assert_eq!(store.constraint_weight(ConId(1)), 2);
        assert_eq!(store.constraint_weight(ConId(2)), 2);
    }

    #[test]
    fn var_bumps_variable_weight_only() {
        let csp = three_con_csp();
        let mut store = WeightStore::new(&csp);
        let e = PropagationEvent::VariableAllTestsFailed {
            variable: VarId(0),
            last_culprit: ConId(1),
        };
        let d = apply_event(&mut store, Strategy::Var, &e);
        assert_eq!(d, vec![(WeightKey::Variable(VarId(0)), 1)]);
        assert_eq!(store.constraint_weights(), &[1, 1, 1]);
    }

    #[test]
    fn gac_wipeout_bumps_under_every_strategy() {
        let csp = three_con_csp();
        for s in Strategy::ALL {
            let mut store = WeightStore::new(&csp);
            let e = PropagationEvent::GacWipeout { constraint: ConId(1) };
            let d = apply_event(&mut store, s, &e);
            assert_eq!(d, vec![(WeightKey::Constraint(ConId(1)), 2)], "{s}");
        }
    }

    #[test]
    fn alpha_counts_only_future_heavy_constraints() {
        let csp = three_con_csp();
        let mut st = SearchState::new(&csp);
        let store = WeightStore::new(&csp);
        // All three constraints have 2 future variables; x is in c0 and c1.
        assert_eq!(alpha_wdeg(&st, &store, VarId(0)), 2);
        // Assigning z leaves c1 and c2 with a single future variable, so
        // only c0 still counts for x and for y.
        st.assign(VarId(2), 0);
        assert_eq!(alpha_wdeg(&st, &store, VarId(0)), 1);
        assert_eq!(alpha_wdeg(&st, &store, VarId(1)), 1);
    }

    #[test]
    fn alpha_var_adds_variable_weight() {
        let csp = three_con_csp();
        let st = SearchState::new(&csp);
        let mut store = WeightStore::new(&csp);
        let base = alpha_wdeg(&st, &store, VarId(0));
        assert_eq!(alpha_wdeg_var(&st, &store, VarId(0)), base);
        apply_event(
            &mut store,
            Strategy::Var,
            &PropagationEvent::VariableAllTestsFailed {
                variable: VarId(0),
                last_culprit: ConId(0),
            },
        );
        assert_eq!(alpha_wdeg_var(&st, &store, VarId(0)), base + 1);
    }

    #[test]
    fn select_prefers_smaller_ratio_then_declaration_order() {
        let csp = three_con_csp();
        let st = SearchState::new(&csp);
        let store = WeightStore::new(&csp);
        // x: |dom|=2, alpha=2 (ratio 1); y: |dom|=3, alpha=2; z: |dom|=2, alpha=2.
        // x ties z and wins by declaration order.
        assert_eq!(select_variable(&st, &store, Strategy::Old), Some(VarId(0)));
    }

    #[test]
    fn legality_pairs() {
        use Consistency::*;
        assert!(Strategy::Old.legal_with(Gac));
        assert!(Strategy::Old.legal_with(Poac));
        assert!(Strategy::Old.legal_with(Rnic));
        assert!(Strategy::AllS.legal_with(Poac) && !Strategy::AllS.legal_with(Gac));
        assert!(Strategy::LastS.legal_with(Poac) && !Strategy::LastS.legal_with(Rnic));
        assert!(Strategy::Var.legal_with(Poac) && !Strategy::Var.legal_with(Gac));
        assert!(Strategy::AllC.legal_with(Rnic) && !Strategy::AllC.legal_with(Poac));
        assert!(Strategy::Head.legal_with(Rnic) && !Strategy::Head.legal_with(Gac));
    }

    // Scaling every weight by a constant must not change the argmin.
    proptest! {
        #[test]
        fn selection_invariant_under_weight_scaling(
            weights in proptest::collection::vec(1u64..50, 3),
            doms in proptest::collection::vec(1u32..4, 3),
            scale in 1u64..9,
        ) {
            let csp = three_con_csp();
            let mut st = SearchState::new(&csp);
            for (i, &target) in doms.iter().enumerate() {
                let var = VarId(i as u32);
                let vals = st.live_values(var);
                for &v in vals.iter().skip(target as usize) {
                    st.remove_value(var, v);
                }
            }
            let mut base = WeightStore::new(&csp);
            let mut scaled = WeightStore::new(&csp);
            for (i, &w) in weights.iter().enumerate() {
                base.constraint[i] = w;
                scaled.constraint[i] = w * scale;
            }
            let a = select_variable(&st, &base, Strategy::Old);
            let b = select_variable(&st, &scaled, Strategy::Old);
            prop_assert_eq!(a, b);
        }
    }
}
