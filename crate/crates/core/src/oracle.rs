//! Independent brute-force references for validating the engines. These
//! implementations work directly from the consistency definitions, share no
//! traversal logic with the engines, and are deliberately naive: deletion
//! rules are re-checked from scratch every round until nothing changes.

use alloc::vec::Vec;

use crate::generate::SplitMix64;
use crate::model::{Assignment, ConId, Csp, Value, VarId};

const DOMAIN_PRODUCT_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    CapExceeded { product: u128, cap: u128 },
}

impl core::fmt::Display for OracleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            OracleError::CapExceeded { product, cap } => {
                write!(f, "instance too large for the oracle: {product} candidate assignments (cap {cap})")
            }
        }
    }
}

impl core::error::Error for OracleError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleProperty {
    Gac,
    Sac,
    Poac,
    Rnic,
}

impl OracleProperty {
    pub fn parse(s: &str) -> Option<OracleProperty> {
        match s {
            "gac" => Some(OracleProperty::Gac),
            "sac" => Some(OracleProperty::Sac),
            "poac" => Some(OracleProperty::Poac),
            "rnic" => Some(OracleProperty::Rnic),
            _ => None,
        }
    }
}

/// Fixpoint of a property's deletion rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleClosure {
    /// Live values per variable, declared order.
    pub domains: Vec<Vec<Value>>,
    /// Live tuples per constraint, lexicographic order. Present for `Rnic`.
    pub tables: Option<Vec<Vec<Vec<Value>>>>,
}

impl OracleClosure {
    pub fn any_empty_domain(&self) -> bool {
        self.domains.iter().any(|d| d.is_empty())
    }

    pub fn any_empty_table(&self) -> bool {
        self.tables
            .as_ref()
            .map(|ts| ts.iter().any(|t| t.is_empty()))
            .unwrap_or(false)
    }

    pub fn consistent(&self) -> bool {
        !self.any_empty_domain() && !self.any_empty_table()
    }
}

fn domain_product(csp: &Csp) -> u128 {
    csp.variables()
        .iter()
        .map(|v| v.domain.len() as u128)
        .fold(1u128, |acc, d| acc.saturating_mul(d))
}

fn check_cap(csp: &Csp) -> Result<(), OracleError> {
    let product = domain_product(csp);
    if product > DOMAIN_PRODUCT_CAP {
        return Err(OracleError::CapExceeded { product, cap: DOMAIN_PRODUCT_CAP });
    }
    Ok(())
}

/// Exhaustive enumeration in lexicographic variable/value order (declaration
/// order); returns the first satisfying assignment. Constraints are checked
/// as soon as their whole scope is assigned.
pub fn brute_force_solve(csp: &Csp) -> Result<Option<Assignment>, OracleError> {
    check_cap(csp)?;
    let n = csp.var_count();

    // check_at[depth] = constraints whose deepest scope variable is `depth`.
    let mut check_at: Vec<Vec<ConId>> = alloc::vec![Vec::new(); n.max(1)];
    for c in csp.con_ids() {
        if let Some(deepest) = csp.constraint(c).scope.iter().map(|v| v.idx()).max() {
            check_at[deepest].push(c);
        } else {
            return Ok(None); // empty scope cannot happen for valid instances
        }
    }
    // Zero-arity guard aside, a constraint with an empty relation fails as
    // soon as its scope completes, so nothing special is needed here.

    let mut chosen: Vec<Value> = alloc::vec![0; n];
    if descend(csp, &check_at, 0, &mut chosen) {
        let assignment = csp
            .var_ids()
            .map(|v| (v, chosen[v.idx()]))
            .collect();
        return Ok(Some(assignment));
    }
    Ok(None)
}

fn descend(csp: &Csp, check_at: &[Vec<ConId>], depth: usize, chosen: &mut Vec<Value>) -> bool {
    if depth == csp.var_count() {
        return true;
    }
    let domain = csp.variable(VarId(depth as u32)).domain.clone();
    'values: for value in domain {
        chosen[depth] = value;
        for &c in &check_at[depth] {
            let decl = csp.constraint(c);
            let allowed = decl.tuples.iter().any(|t| {
                decl.scope.iter().zip(t).all(|(&var, &tv)| chosen[var.idx()] == tv)
            });
            if !allowed {
                continue 'values;
            }
        }
        if descend(csp, check_at, depth + 1, chosen) {
            return true;
        }
    }
    false
}

// Masks over declared domains / declared tuple lists.
type DomMask = Vec<Vec<bool>>;
type TabMask = Vec<Vec<bool>>;

fn full_dom_mask(csp: &Csp) -> DomMask {
    csp.variables().iter().map(|v| alloc::vec![true; v.domain.len()]).collect()
}

fn full_tab_mask(csp: &Csp) -> TabMask {
    csp.constraints().iter().map(|c| alloc::vec![true; c.tuples.len()]).collect()
}

fn value_pos(csp: &Csp, var: VarId, value: Value) -> usize {
    csp.variable(var)
        .domain
        .iter()
        .position(|&v| v == value)
        .expect("value must be declared")
}

fn live(dom: &DomMask, csp: &Csp, var: VarId, value: Value) -> bool {
    dom[var.idx()][value_pos(csp, var, value)]
}

/// Plain GAC deletion rule iterated to a fixpoint on `dom`: a live value must
/// appear in a tuple whose components are all live, in every constraint on
/// its variable.
fn gac_fix(csp: &Csp, dom: &mut DomMask) {
    loop {
        let mut changed = false;
        for c in csp.con_ids() {
            let decl = csp.constraint(c);
            for (slot, &var) in decl.scope.iter().enumerate() {
                for pos in 0..csp.variable(var).domain.len() {
                    if !dom[var.idx()][pos] {
                        continue;
                    }
                    let value = csp.variable(var).domain[pos];
                    let supported = decl.tuples.iter().any(|t| {
                        t[slot] == value
                            && decl.scope.iter().zip(t).all(|(&v2, &tv)| live(dom, csp, v2, tv))
                    });
                    if !supported {
                        dom[var.idx()][pos] = false;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return;
        }
    }
}

fn any_empty(dom: &DomMask) -> bool {
    dom.iter().any(|row| row.iter().all(|&b| !b))
}

/// Does (x, v) survive GAC after restricting x_j to v_j?
fn survives_under(csp: &Csp, dom: &DomMask, x: VarId, vpos: usize, xj: VarId, vjpos: usize) -> bool {
    let mut probe = dom.clone();
    for pos in 0..probe[xj.idx()].len() {
        probe[xj.idx()][pos] = pos == vjpos && dom[xj.idx()][pos];
    }
    gac_fix(csp, &mut probe);
    probe[x.idx()][vpos]
}

fn shuffle<T>(items: &mut [T], rng: &mut SplitMix64) {
    for i in (1..items.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

fn scan_pairs(csp: &Csp, rng: &mut Option<SplitMix64>) -> Vec<(VarId, usize)> {
    let mut pairs: Vec<(VarId, usize)> = csp
        .var_ids()
        .flat_map(|v| (0..csp.variable(v).domain.len()).map(move |p| (v, p)))
        .collect();
    if let Some(r) = rng {
        shuffle(&mut pairs, r);
    }
    pairs
}

fn gac_closure(csp: &Csp, rng: &mut Option<SplitMix64>) -> DomMask {
    let mut dom = full_dom_mask(csp);
    loop {
        let mut changed = false;
        for (var, pos) in scan_pairs(csp, rng) {
            if !dom[var.idx()][pos] {
                continue;
            }
            let value = csp.variable(var).domain[pos];
            let unsupported = csp.constraints_on(var).iter().any(|&c| {
                let decl = csp.constraint(c);
                let slot = decl.scope.iter().position(|&v| v == var).unwrap();
                !decl.tuples.iter().any(|t| {
                    t[slot] == value
                        && decl.scope.iter().zip(t).all(|(&v2, &tv)| live(&dom, csp, v2, tv))
                })
            });
            if unsupported {
                dom[var.idx()][pos] = false;
                changed = true;
            }
        }
        if !changed {
            return dom;
        }
    }
}

fn sac_closure(csp: &Csp, rng: &mut Option<SplitMix64>) -> DomMask {
    let mut dom = full_dom_mask(csp);
    loop {
        let mut changed = false;
        for (var, pos) in scan_pairs(csp, rng) {
            if !dom[var.idx()][pos] {
                continue;
            }
            let mut probe = dom.clone();
            for p in 0..probe[var.idx()].len() {
                probe[var.idx()][p] = p == pos;
            }
            gac_fix(csp, &mut probe);
            if any_empty(&probe) {
                dom[var.idx()][pos] = false;
                changed = true;
            }
        }
        if !changed {
            return dom;
        }
    }
}

fn poac_closure(csp: &Csp, rng: &mut Option<SplitMix64>) -> DomMask {
    let mut dom = full_dom_mask(csp);
    loop {
        let mut changed = false;
        for (x, vpos) in scan_pairs(csp, rng) {
            if !dom[x.idx()][vpos] {
                continue;
            }
            // Delete (x, v) when some variable admits no value whose
            // singleton GAC keeps (x, v). The x_j = x case is the SAC test.
            let doomed = csp.var_ids().any(|xj| {
                (0..csp.variable(xj).domain.len())
                    .filter(|&p| dom[xj.idx()][p])
                    .all(|vjpos| !survives_under(csp, &dom, x, vpos, xj, vjpos))
            });
            if doomed {
                dom[x.idx()][vpos] = false;
                changed = true;
            }
        }
        if !changed {
            return dom;
        }
    }
}

/// One consistent selection of live tuples over `head`'s overlap neighbors,
/// found by plain product enumeration with a full pairwise agreement check.
fn rnic_supported(csp: &Csp, tab: &TabMask, head: ConId, row: usize) -> bool {
    let neighbors: Vec<ConId> = csp
        .con_ids()
        .filter(|&other| {
            other != head
                && csp
                    .constraint(other)
                    .scope
                    .iter()
                    .any(|v| csp.constraint(head).scope.contains(v))
        })
        .collect();
    if neighbors.is_empty() {
        return true;
    }
    let choices: Vec<Vec<usize>> = neighbors
        .iter()
        .map(|&n| {
            (0..csp.constraint(n).tuples.len())
                .filter(|&r| tab[n.idx()][r])
                .collect()
        })
        .collect();
    if choices.iter().any(|c| c.is_empty()) {
        return false;
    }

    let mut odometer = alloc::vec![0usize; neighbors.len()];
    loop {
        let mut binding: Vec<Option<Value>> = alloc::vec![None; csp.var_count()];
        let mut ok = bind(csp, head, row, &mut binding);
        if ok {
            for (k, &n) in neighbors.iter().enumerate() {
                if !bind(csp, n, choices[k][odometer[k]], &mut binding) {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return true;
        }
        // Advance the odometer.
        let mut k = 0;
        loop {
            if k == neighbors.len() {
                return false;
            }
            odometer[k] += 1;
            if odometer[k] < choices[k].len() {
                break;
            }
            odometer[k] = 0;
            k += 1;
        }
    }
}

/// Merges a tuple into the binding; false on any disagreement.
fn bind(csp: &Csp, con: ConId, row: usize, binding: &mut [Option<Value>]) -> bool {
    let decl = csp.constraint(con);
    for (slot, &var) in decl.scope.iter().enumerate() {
        let val = decl.tuples[row][slot];
        match binding[var.idx()] {
            None => binding[var.idx()] = Some(val),
            Some(b) if b == val => {}
            Some(_) => return false,
        }
    }
    true
}

fn rnic_closure(csp: &Csp, rng: &mut Option<SplitMix64>) -> (DomMask, TabMask) {
    let mut dom = full_dom_mask(csp);
    let mut tab = full_tab_mask(csp);
    loop {
        let mut changed = false;

        // Component liveness and value support, per the GAC definitions.
        let mut rows: Vec<(ConId, usize)> = csp
            .con_ids()
            .flat_map(|c| (0..csp.constraint(c).tuples.len()).map(move |r| (c, r)))
            .collect();
        if let Some(r) = rng {
            shuffle(&mut rows, r);
        }
        for &(c, row) in &rows {
            if !tab[c.idx()][row] {
                continue;
            }
            let decl = csp.constraint(c);
            let dead = decl
                .scope
                .iter()
                .zip(&decl.tuples[row])
                .any(|(&v, &tv)| !live(&dom, csp, v, tv));
            if dead {
                tab[c.idx()][row] = false;
                changed = true;
            }
        }
        for (var, pos) in scan_pairs(csp, rng) {
            if !dom[var.idx()][pos] {
                continue;
            }
            let value = csp.variable(var).domain[pos];
            let unsupported = csp.constraints_on(var).iter().any(|&c| {
                let decl = csp.constraint(c);
                let slot = decl.scope.iter().position(|&v| v == var).unwrap();
                !(0..decl.tuples.len())
                    .any(|r| tab[c.idx()][r] && decl.tuples[r][slot] == value)
            });
            if unsupported {
                dom[var.idx()][pos] = false;
                changed = true;
            }
        }

        // The relational rule itself.
        for &(c, row) in &rows {
            if !tab[c.idx()][row] {
                continue;
            }
            if !rnic_supported(csp, &tab, c, row) {
                tab[c.idx()][row] = false;
                changed = true;
            }
        }

        if !changed {
            return (dom, tab);
        }
    }
}

fn materialize(csp: &Csp, dom: DomMask, tab: Option<TabMask>) -> OracleClosure {
    let domains = csp
        .var_ids()
        .map(|v| {
            csp.variable(v)
                .domain
                .iter()
                .enumerate()
                .filter(|&(p, _)| dom[v.idx()][p])
                .map(|(_, &val)| val)
                .collect()
        })
        .collect();
    let tables = tab.map(|tab| {
        csp.con_ids()
            .map(|c| {
                csp.constraint(c)
                    .tuples
                    .iter()
                    .enumerate()
                    .filter(|&(r, _)| tab[c.idx()][r])
                    .map(|(_, t)| t.clone())
                    .collect()
            })
            .collect()
    });
    OracleClosure { domains, tables }
}

pub fn closure_oracle(csp: &Csp, property: OracleProperty) -> Result<OracleClosure, OracleError> {
    closure_impl(csp, property, &mut None)
}

/// Same fixpoint computed with per-round shuffled deletion scan order; used
/// to check that the closures are order-independent.
pub fn closure_oracle_shuffled(
    csp: &Csp,
    property: OracleProperty,
    seed: u64,
) -> Result<OracleClosure, OracleError> {
    closure_impl(csp, property, &mut Some(SplitMix64::new(seed)))
}

fn closure_impl(
    csp: &Csp,
    property: OracleProperty,
    rng: &mut Option<SplitMix64>,
) -> Result<OracleClosure, OracleError> {
    check_cap(csp)?;
    Ok(match property {
        OracleProperty::Gac => materialize(csp, gac_closure(csp, rng), None),
        OracleProperty::Sac => materialize(csp, sac_closure(csp, rng), None),
        OracleProperty::Poac => materialize(csp, poac_closure(csp, rng), None),
        OracleProperty::Rnic => {
            let (dom, tab) = rnic_closure(csp, rng);
            materialize(csp, dom, Some(tab))
        }
    })
}
