//! Configuration ids of the form `consistency/strategy`, e.g. `poac/alls`.

use anyhow::{bail, Result};
use tcsp_core::{config_id, Consistency, Strategy};

pub fn parse_consistency(s: &str) -> Result<Consistency> {
    Ok(match s {
        "gac" => Consistency::Gac,
        "poac" => Consistency::Poac,
        "rnic" => Consistency::Rnic,
        other => bail!("unknown consistency `{other}` (expected gac, poac, or rnic)"),
    })
}

pub fn parse_strategy(s: &str) -> Result<Strategy> {
    Ok(match s {
        "old" => Strategy::Old,
        "alls" => Strategy::AllS,
        "lasts" => Strategy::LastS,
        "var" => Strategy::Var,
        "allc" => Strategy::AllC,
        "head" => Strategy::Head,
        other => bail!("unknown strategy `{other}` (expected old, alls, lasts, var, allc, or head)"),
    })
}

/// Parses `poac/alls` into a validated pairing.
pub fn parse_config_id(s: &str) -> Result<(Consistency, Strategy)> {
    let Some((c, st)) = s.split_once('/') else {
        bail!("configuration `{s}` must look like `consistency/strategy`, e.g. poac/alls");
    };
    let consistency = parse_consistency(c)?;
    let strategy = parse_strategy(st)?;
    if !strategy.legal_with(consistency) {
        bail!("strategy `{st}` cannot be paired with consistency `{c}`");
    }
    Ok((consistency, strategy))
}

/// The seven strategy configurations studied for the high-level lookaheads.
pub fn seven_strategy_configs() -> Vec<(Consistency, Strategy)> {
    vec![
        (Consistency::Poac, Strategy::Old),
        (Consistency::Poac, Strategy::AllS),
        (Consistency::Poac, Strategy::LastS),
        (Consistency::Poac, Strategy::Var),
        (Consistency::Rnic, Strategy::Old),
        (Consistency::Rnic, Strategy::AllC),
        (Consistency::Rnic, Strategy::Head),
    ]
}

pub fn id_of(c: Consistency, s: Strategy) -> String {
    config_id(c, s)
}
