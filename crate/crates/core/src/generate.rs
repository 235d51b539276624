//! Reproducible random instance generation.
//!
//! Instances are a pure function of the parameters: `n` variables with
//! domains `{0..d-1}`, `m` constraints over `k` distinct variables with
//! pairwise-distinct scopes, each relation keeping exactly
//! `round((1-t) * d^k)` tuples sampled without replacement.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{ConstraintSpec, Csp, Value, VariableSpec};

/// SplitMix64 (Steele, Lea & Flood). Fixed here so that a seed always
/// regenerates the same instance; seeds are not expected to transfer to
/// other generators.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from `0..bound` by rejection, avoiding modulo bias.
    pub fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenError {
    BadParameters(String),
    /// More constraints requested than distinct scopes exist.
    ScopesExhausted { requested: u64, available: u64 },
    RelationTooLarge { tuples: u128 },
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::BadParameters(msg) => write!(f, "invalid parameters: {msg}"),
            GenError::ScopesExhausted { requested, available } => write!(
                f,
                "{requested} constraints requested but only {available} distinct scopes exist"
            ),
            GenError::RelationTooLarge { tuples } => {
                write!(f, "relation of {tuples} candidate tuples exceeds the generator limit")
            }
        }
    }
}

impl core::error::Error for GenError {}

/// Number of tuples kept for tightness `t` over `total` candidates,
/// rounding half up.
fn kept_tuples(total: u64, t: f64) -> u64 {
    let exact = (1.0 - t) * total as f64;
    let rounded = (exact + 0.5) as u64;
    rounded.min(total)
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

// Candidate-tuple cap; callers at desk scale stay far below it.
const MAX_RELATION_CANDIDATES: u64 = 1 << 22;

pub fn generate_random(
    n: u32,
    d: u32,
    k: u32,
    m: u32,
    t: f64,
    seed: u64,
) -> Result<Csp, GenError> {
    if k == 0 || n < k {
        return Err(GenError::BadParameters(format!("need n >= k >= 1, got n={n}, k={k}")));
    }
    if d == 0 {
        return Err(GenError::BadParameters(format!("need d >= 1, got d={d}")));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(GenError::BadParameters(format!("tightness must be in [0,1], got {t}")));
    }

    let scope_pool = binomial(n as u64, k as u64);
    if (m as u128) > scope_pool {
        return Err(GenError::ScopesExhausted {
            requested: m as u64,
            available: scope_pool.min(u64::MAX as u128) as u64,
        });
    }

    let mut total: u64 = 1;
    for _ in 0..k {
        total = total
            .checked_mul(d as u64)
            .filter(|&x| x <= MAX_RELATION_CANDIDATES)
            .ok_or(GenError::RelationTooLarge { tuples: (d as u128).pow(k) })?;
    }
    let keep = kept_tuples(total, t);

    let mut rng = SplitMix64::new(seed);

    let variables: Vec<VariableSpec> = (0..n)
        .map(|i| VariableSpec {
            name: format!("x{i}"),
            domain: (0..d as Value).collect(),
        })
        .collect();

    // Distinct sorted k-subsets of variables, sampled by rejection.
    let mut scopes: Vec<Vec<u32>> = Vec::with_capacity(m as usize);
    while scopes.len() < m as usize {
        let mut picked: Vec<u32> = Vec::with_capacity(k as usize);
        while picked.len() < k as usize {
            let v = rng.below(n as u64) as u32;
            if !picked.contains(&v) {
                picked.push(v);
            }
        }
        picked.sort_unstable();
        if !scopes.contains(&picked) {
            scopes.push(picked);
        }
    }

    let mut constraints = Vec::with_capacity(m as usize);
    for (ci, scope) in scopes.iter().enumerate() {
        // Partial Fisher-Yates over tuple indices selects `keep` of them
        // without replacement.
        let mut indices: Vec<u64> = (0..total).collect();
        for i in 0..keep {
            let j = i + rng.below(total - i);
            indices.swap(i as usize, j as usize);
        }
        let mut tuples: Vec<Vec<Value>> = indices[..keep as usize]
            .iter()
            .map(|&ix| decode_tuple(ix, d as u64, k as usize))
            .collect();
        tuples.sort();

        constraints.push(ConstraintSpec {
            name: format!("c{ci}"),
            scope: scope.iter().map(|&v| format!("x{v}")).collect(),
            tuples,
        });
    }

    let name = format!("rand-n{n}-d{d}-k{k}-m{m}-t{}-s{seed}", format_tightness(t));
    Ok(Csp::new(name, variables, constraints).expect("generated instance is structurally valid"))
}

/// Mixed-radix decode, leftmost scope position most significant.
fn decode_tuple(mut ix: u64, d: u64, k: usize) -> Vec<Value> {
    let mut tuple = alloc::vec![0 as Value; k];
    for slot in (0..k).rev() {
        tuple[slot] = (ix % d) as Value;
        ix /= d;
    }
    tuple
}

fn format_tightness(t: f64) -> String {
    // Three decimals, dot replaced so the name stays a single identifier-ish
    // token ("0.40" -> "0_400").
    let milli = (t * 1000.0 + 0.5) as u32;
    format!("{}_{:03}", milli / 1000, milli % 1000)
}
