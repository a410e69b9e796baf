//! Exhaustive MDL/NFA decision comparison over configured part families.

use std::sync::Arc;

use mdlac::equivalence::{
    check_equivalence, Alphabet, CountOf, EquivalenceReport, LongestRun, OrderingFunction,
    PartSpec, RandomTable, WeightedSum,
};

use crate::config::{EquivConfig, FamilyConfig, XiKind};
use crate::error::CliError;

fn ordering(
    kind: XiKind,
    alphabet: Alphabet,
    length: usize,
    levels: u32,
    seed: u64,
) -> Result<Arc<dyn OrderingFunction>, CliError> {
    Ok(match kind {
        XiKind::CountOnes => Arc::new(CountOf(1)),
        XiKind::LongestRun => Arc::new(LongestRun(0)),
        XiKind::WeightedSum => Arc::new(WeightedSum(
            (1..=length).map(|i| (i as f64).sqrt()).collect(),
        )),
        XiKind::Random => Arc::new(
            RandomTable::new(alphabet, length, levels, seed)
                .map_err(|e| CliError::Config(e.to_string()))?,
        ),
    })
}

pub fn family_parts(
    family: &FamilyConfig,
    seed: u64,
) -> Result<(Alphabet, Vec<PartSpec>), CliError> {
    let alphabet = Alphabet::new(family.alphabet).map_err(|e| CliError::Config(e.to_string()))?;
    let uniform = family.parts.len() as f64;
    let parts = family
        .parts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let xi = ordering(
                p.xi,
                alphabet,
                p.length,
                p.levels,
                seed.wrapping_add(i as u64),
            )?;
            PartSpec::new(p.length, p.eta.unwrap_or(uniform), xi)
                .map_err(|e| CliError::Config(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((alphabet, parts))
}

/// One report per family. Kraft or size violations are configuration errors.
pub fn run_equivalence(cfg: &EquivConfig, seed: u64) -> Result<Vec<EquivalenceReport>, CliError> {
    if cfg.families.is_empty() {
        return Err(CliError::Config("equiv.families is empty".into()));
    }
    cfg.families
        .iter()
        .map(|f| {
            let (alphabet, parts) = family_parts(f, seed)?;
            check_equivalence(alphabet, &parts).map_err(|e| CliError::Config(e.to_string()))
        })
        .collect()
}

pub fn total_mismatches(reports: &[EquivalenceReport]) -> usize {
    reports.iter().map(|r| r.mismatch_count()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PartConfig;

    #[test]
    fn kraft_violation_is_a_config_error() {
        let cfg = EquivConfig {
            families: vec![FamilyConfig {
                alphabet: 2,
                parts: vec![PartConfig {
                    length: 4,
                    xi: XiKind::CountOnes,
                    eta: Some(0.5),
                    levels: 4,
                }],
            }],
        };
        assert_eq!(run_equivalence(&cfg, 0).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn small_family_agrees() {
        let cfg = EquivConfig {
            families: vec![FamilyConfig {
                alphabet: 3,
                parts: vec![
                    PartConfig {
                        length: 4,
                        xi: XiKind::Random,
                        eta: None,
                        levels: 5,
                    },
                    PartConfig {
                        length: 3,
                        xi: XiKind::WeightedSum,
                        eta: None,
                        levels: 5,
                    },
                ],
            }],
        };
        let r = run_equivalence(&cfg, 9).unwrap();
        assert_eq!(total_mismatches(&r), 0);
        assert_eq!(r[0].total_configurations(), 81 + 27);
    }
}
