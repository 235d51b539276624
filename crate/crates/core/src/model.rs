//! Problem representation: variables with finite integer domains and positive
//! table constraints, plus total assignments and the satisfaction check.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// A domain value. Values are arbitrary integers, not necessarily 0-based or
/// contiguous; engines index them through per-variable position maps.
pub type Value = i64;

/// Index of a variable in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

/// Index of a constraint in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConId(pub u32);

impl VarId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl ConId {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for ConId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

/// A declared variable: name plus its domain in declaration order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    /// Distinct values, in the order they were declared. Value ordering
    /// conventions (branching, singleton tests) follow this order.
    pub domain: Vec<Value>,
}

/// A declared table constraint: scope over declared variables and the set of
/// allowed tuples, stored sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub name: String,
    pub scope: Vec<VarId>,
    pub tuples: Vec<Vec<Value>>,
}

impl Constraint {
    #[inline]
    pub fn arity(&self) -> usize {
        self.scope.len()
    }
}

/// Input form of a variable declaration, before name resolution.
#[derive(Debug, Clone)]
pub struct VariableSpec {
    pub name: String,
    pub domain: Vec<Value>,
}

/// Input form of a constraint declaration: scope given by variable names.
#[derive(Debug, Clone)]
pub struct ConstraintSpec {
    pub name: String,
    pub scope: Vec<String>,
    pub tuples: Vec<Vec<Value>>,
}

/// An immutable problem instance. Construction validates every structural
/// invariant; afterwards the instance is safe to share across solver runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csp {
    name: String,
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    /// Constraints on each variable, in declaration order.
    occurrences: Vec<Vec<ConId>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelError {
    BadIdentifier(String),
    DuplicateVariable(String),
    DuplicateConstraint(String),
    EmptyDomain(String),
    DuplicateDomainValue { variable: String, value: Value },
    UnknownVariable { constraint: String, variable: String },
    DuplicateScopeVariable { constraint: String, variable: String },
    ArityMismatch { constraint: String, expected: usize, got: usize },
    ValueNotInDomain { constraint: String, variable: String, value: Value },
    DuplicateTuple { constraint: String },
    PartialAssignment { variable: String },
    AssignedOutsideDomain { variable: String, value: Value },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::BadIdentifier(s) => write!(f, "invalid identifier `{s}`"),
            ModelError::DuplicateVariable(s) => write!(f, "duplicate variable `{s}`"),
            ModelError::DuplicateConstraint(s) => write!(f, "duplicate constraint `{s}`"),
            ModelError::EmptyDomain(s) => write!(f, "variable `{s}` declared with empty domain"),
            ModelError::DuplicateDomainValue { variable, value } => {
                write!(f, "duplicate value {value} in domain of `{variable}`")
            }
            ModelError::UnknownVariable { constraint, variable } => {
                write!(f, "unknown variable `{variable}` in scope of `{constraint}`")
            }
            ModelError::DuplicateScopeVariable { constraint, variable } => {
                write!(f, "variable `{variable}` repeated in scope of `{constraint}`")
            }
            ModelError::ArityMismatch { constraint, expected, got } => write!(
                f,
                "tuple of length {got} in `{constraint}` (scope has length {expected})"
            ),
            ModelError::ValueNotInDomain { constraint, variable, value } => write!(
                f,
                "tuple value {value} in `{constraint}` is outside the domain of `{variable}`"
            ),
            ModelError::DuplicateTuple { constraint } => {
                write!(f, "duplicate tuple in `{constraint}`")
            }
            ModelError::PartialAssignment { variable } => {
                write!(f, "assignment leaves `{variable}` unassigned")
            }
            ModelError::AssignedOutsideDomain { variable, value } => {
                write!(f, "assigned value {value} is outside the domain of `{variable}`")
            }
        }
    }
}

impl core::error::Error for ModelError {}

fn valid_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl Csp {
    pub fn new(
        name: impl Into<String>,
        variables: Vec<VariableSpec>,
        constraints: Vec<ConstraintSpec>,
    ) -> Result<Csp, ModelError> {
        let name = name.into();
        if !valid_ident(&name) {
            return Err(ModelError::BadIdentifier(name));
        }

        let mut vars = Vec::with_capacity(variables.len());
        let mut var_ids: BTreeMap<String, VarId> = BTreeMap::new();
        for spec in variables {
            if !valid_ident(&spec.name) {
                return Err(ModelError::BadIdentifier(spec.name));
            }
            if var_ids.contains_key(&spec.name) {
                return Err(ModelError::DuplicateVariable(spec.name));
            }
            if spec.domain.is_empty() {
                return Err(ModelError::EmptyDomain(spec.name));
            }
            let mut seen: BTreeMap<Value, ()> = BTreeMap::new();
            for &v in &spec.domain {
                if seen.insert(v, ()).is_some() {
                    return Err(ModelError::DuplicateDomainValue {
                        variable: spec.name,
                        value: v,
                    });
                }
            }
            var_ids.insert(spec.name.clone(), VarId(vars.len() as u32));
            vars.push(Variable { name: spec.name, domain: spec.domain });
        }

        let mut cons = Vec::with_capacity(constraints.len());
        let mut con_names: BTreeMap<String, ()> = BTreeMap::new();
        for spec in constraints {
            if !valid_ident(&spec.name) {
                return Err(ModelError::BadIdentifier(spec.name));
            }
            if con_names.insert(spec.name.clone(), ()).is_some() {
                return Err(ModelError::DuplicateConstraint(spec.name));
            }
            let mut scope = Vec::with_capacity(spec.scope.len());
            for vname in &spec.scope {
                let id = *var_ids.get(vname).ok_or_else(|| ModelError::UnknownVariable {
                    constraint: spec.name.clone(),
                    variable: vname.clone(),
                })?;
                if scope.contains(&id) {
                    return Err(ModelError::DuplicateScopeVariable {
                        constraint: spec.name.clone(),
                        variable: vname.clone(),
                    });
                }
                scope.push(id);
            }
            let mut tuples = spec.tuples;
            for tuple in &tuples {
                if tuple.len() != scope.len() {
                    return Err(ModelError::ArityMismatch {
                        constraint: spec.name.clone(),
                        expected: scope.len(),
                        got: tuple.len(),
                    });
                }
                for (k, &v) in tuple.iter().enumerate() {
                    let var = &vars[scope[k].idx()];
                    if !var.domain.contains(&v) {
                        return Err(ModelError::ValueNotInDomain {
                            constraint: spec.name.clone(),
                            variable: var.name.clone(),
                            value: v,
                        });
                    }
                }
            }
            tuples.sort();
            if tuples.windows(2).any(|w| w[0] == w[1]) {
                return Err(ModelError::DuplicateTuple { constraint: spec.name });
            }
            cons.push(Constraint { name: spec.name, scope, tuples });
        }

        let mut occurrences = alloc::vec![Vec::new(); vars.len()];
        for (ci, c) in cons.iter().enumerate() {
            for &v in &c.scope {
                occurrences[v.idx()].push(ConId(ci as u32));
            }
        }

        Ok(Csp { name, variables: vars, constraints: cons, occurrences })
    }

    #[inline]
    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    #[inline]
    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    #[inline]
    pub fn var_count(&self) -> usize {
        self.variables.len()
    }

    #[inline]
    pub fn con_count(&self) -> usize {
        self.constraints.len()
    }

    #[inline]
    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.idx()]
    }

    #[inline]
    pub fn constraint(&self, id: ConId) -> &Constraint {
        &self.constraints[id.idx()]
    }

    /// Constraints whose scope contains `v`, in declaration order.
    #[inline]
    pub fn constraints_on(&self, v: VarId) -> &[ConId] {
        &self.occurrences[v.idx()]
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .map(|i| VarId(i as u32))
    }

    pub fn con_id(&self, name: &str) -> Option<ConId> {
        self.constraints
            .iter()
            .position(|c| c.name == name)
            .map(|i| ConId(i as u32))
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.variables.len() as u32).map(VarId)
    }

    pub fn con_ids(&self) -> impl Iterator<Item = ConId> {
        (0..self.constraints.len() as u32).map(ConId)
    }
}

/// A total or partial mapping from variables to values.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    values: BTreeMap<VarId, Value>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn set(&mut self, var: VarId, value: Value) {
        self.values.insert(var, value);
    }

    pub fn get(&self, var: VarId) -> Option<Value> {
        self.values.get(&var).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, Value)> + '_ {
        self.values.iter().map(|(&k, &v)| (k, v))
    }
}

impl FromIterator<(VarId, Value)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (VarId, Value)>>(iter: T) -> Assignment {
        Assignment { values: iter.into_iter().collect() }
    }
}

/// True iff `a` is total over the variables of `csp` and the projection of
/// `a` onto every constraint's scope belongs to its relation.
pub fn is_solution(csp: &Csp, a: &Assignment) -> Result<bool, ModelError> {
    for (i, var) in csp.variables().iter().enumerate() {
        match a.get(VarId(i as u32)) {
            None => return Err(ModelError::PartialAssignment { variable: var.name.clone() }),
            Some(v) if !var.domain.contains(&v) => {
                return Err(ModelError::AssignedOutsideDomain {
                    variable: var.name.clone(),
                    value: v,
                })
            }
            Some(_) => {}
        }
    }
    for c in csp.constraints() {
        let projected: Vec<Value> = c.scope.iter().map(|&v| a.get(v).unwrap()).collect();
        if !c.tuples.contains(&projected) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn pair_csp() -> Csp {
        Csp::new(
            "t",
            vec![
                VariableSpec { name: "x".to_string(), domain: vec![0, 1] },
                VariableSpec { name: "y".to_string(), domain: vec![0, 1] },
            ],
            vec![ConstraintSpec {
                name: "c0".to_string(),
                scope: vec!["x".to_string(), "y".to_string()],
                tuples: vec![vec![0, 0]],
            }],
        )
        .unwrap()
    }

    #[test]
    fn solution_check() {
        let csp = pair_csp();
        let sat: Assignment = [(VarId(0), 0), (VarId(1), 0)].into_iter().collect();
        let unsat: Assignment = [(VarId(0), 1), (VarId(1), 0)].into_iter().collect();
        assert!(is_solution(&csp, &sat).unwrap());
        assert!(!is_solution(&csp, &unsat).unwrap());
    }

    #[test]
    fn empty_conjunction_is_sat() {
        let csp = Csp::new(
            "t",
            vec![VariableSpec { name: "x".to_string(), domain: vec![3, 5] }],
            vec![],
        )
        .unwrap();
        let a: Assignment = [(VarId(0), 5)].into_iter().collect();
        assert!(is_solution(&csp, &a).unwrap());
    }

    #[test]
    fn partial_assignment_is_contract_violation() {
        let csp = pair_csp();
        let a: Assignment = [(VarId(0), 0)].into_iter().collect();
        assert!(matches!(
            is_solution(&csp, &a),
            Err(ModelError::PartialAssignment { .. })
        ));
    }

    #[test]
    fn rejects_unknown_scope_variable() {
        let err = Csp::new(
            "t",
            vec![],
            vec![ConstraintSpec {
                name: "c0".to_string(),
                scope: vec!["x".to_string()],
                tuples: vec![],
            }],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::UnknownVariable { .. }));
    }

    #[test]
    fn rejects_arity_mismatch() {
        let err = Csp::new(
            "t",
            vec![VariableSpec { name: "x".to_string(), domain: vec![0, 1] }],
            vec![ConstraintSpec {
                name: "c0".to_string(),
                scope: vec!["x".to_string()],
                tuples: vec![vec![0, 1]],
            }],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::ArityMismatch { expected: 1, got: 2, .. }));
    }

    #[test]
    fn tuples_are_canonically_sorted() {
        let csp = Csp::new(
            "t",
            vec![
                VariableSpec { name: "x".to_string(), domain: vec![0, 1] },
                VariableSpec { name: "y".to_string(), domain: vec![0, 1] },
            ],
            vec![ConstraintSpec {
                name: "c0".to_string(),
                scope: vec!["x".to_string(), "y".to_string()],
                tuples: vec![vec![1, 1], vec![0, 0], vec![0, 1]],
            }],
        )
        .unwrap();
        assert_eq!(csp.constraint(ConId(0)).tuples, vec![vec![0, 0], vec![0, 1], vec![1, 1]]);
    }

    #[test]
    fn empty_relation_is_allowed() {
        let csp = Csp::new(
            "t",
            vec![VariableSpec { name: "x".to_string(), domain: vec![0] }],
            vec![ConstraintSpec {
                name: "c0".to_string(),
                scope: vec!["x".to_string()],
                tuples: vec![],
            }],
        )
        .unwrap();
        assert!(csp.constraint(ConId(0)).tuples.is_empty());
    }
}
