//! Typed wipeout records produced by the propagation engines and consumed by
//! the weighting strategies.

use alloc::vec::Vec;

use crate::model::{ConId, Value, VarId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PropagationEvent {
    /// The lookahead GAC call wiped out a domain; `constraint` is the one
    /// whose revision emptied it.
    GacWipeout { constraint: ConId },
    /// A singleton test `variable <- value` failed; `constraint` is the
    /// culprit of the test's inner GAC run. Emitted at most once per test.
    SingletonWipeout { constraint: ConId, variable: VarId, value: Value },
    /// Every live value of `variable` failed its singleton test in one pass;
    /// `last_culprit` blames the final failing test.
    VariableAllTestsFailed { variable: VarId, last_culprit: ConId },
    /// A relation's live table emptied during RNIC; `neighborhood` is the
    /// head's dual-graph adjacency in the induced subproblem.
    RelationWipeout { head: ConId, neighborhood: Vec<ConId> },
}

pub trait EventSink {
    fn emit(&mut self, event: PropagationEvent);
}

/// Discards every event.
pub struct NullSink;

impl EventSink for NullSink {
    fn emit(&mut self, _event: PropagationEvent) {}
}

impl EventSink for Vec<PropagationEvent> {
    fn emit(&mut self, event: PropagationEvent) {
        self.push(event);
    }
}
