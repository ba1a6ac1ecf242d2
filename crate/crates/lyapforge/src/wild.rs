//! Dropping random systems that are locally exponentially unstable.

use std::path::Path;

use lyapforge_core::stability::{spectral_abscissa, WILD_TOLERANCE};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::record::{read_records, write_records, DatasetRecord};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WildReport {
    pub input: usize,
    pub kept: usize,
    pub unstable: usize,
    /// Jacobian undefined or non-finite at the origin.
    pub domain_errors: usize,
    pub retention: f64,
}

/// Keeps systems whose Jacobian at 0 has spectral abscissa at most `WILD_TOLERANCE`.
pub fn filter_wild_records(recs: Vec<DatasetRecord>) -> (Vec<DatasetRecord>, WildReport) {
    let mut rep = WildReport {
        input: recs.len(),
        ..WildReport::default()
    };
    let kept: Vec<DatasetRecord> = recs
        .into_iter()
        .filter(|r| {
            let Ok(sys) = r.decode_system() else {
                rep.domain_errors += 1;
                return false;
            };
            match spectral_abscissa(&sys) {
                Ok(a) if a <= WILD_TOLERANCE => true,
                Ok(_) => {
                    rep.unstable += 1;
                    false
                }
                Err(_) => {
                    rep.domain_errors += 1;
                    false
                }
            }
        })
        .collect();
    rep.kept = kept.len();
    rep.retention = if rep.input == 0 { 0.0 } else { rep.kept as f64 / rep.input as f64 };
    (kept, rep)
}

pub fn filter_wild(input: &Path, out: &Path) -> Result<WildReport> {
    let (kept, rep) = filter_wild_records(read_records(input)?);
    write_records(out, &kept)?;
    log::info!(
        "kept {} of {} systems ({:.1}%), {} unstable, {} domain errors",
        rep.kept,
        rep.input,
        100.0 * rep.retention,
        rep.unstable,
        rep.domain_errors
    );
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::GenKind;
    use lyapforge_core::parse::parse_expr_dim;
    use lyapforge_core::System;

    fn rec(eqs: &[&str]) -> DatasetRecord {
        let sys = System::new(eqs.iter().map(|s| parse_expr_dim(s, eqs.len()).unwrap()).collect());
        DatasetRecord::new(eqs.join(";"), GenKind::Wild, &sys, None, 0, 0).unwrap()
    }

    #[test]
    fn drops_unstable_and_singular() {
        let recs = vec![
            rec(&["x0"]),
            rec(&["-7*x0^5 - 4*x0^3*x1^2 - 5*x0^3", "7*x0^4 - 3*x1 - 2*x2", "-8*x0^2 - 9*x2"]),
            rec(&["-x0 + x0*x1", "-x1"]),
            rec(&["sqrt(x0^2)"]),
            rec(&["-x1", "x0"]),
        ];
        let (kept, rep) = filter_wild_records(recs);
        assert_eq!(kept.len(), 3);
        assert_eq!((rep.unstable, rep.domain_errors), (1, 1));
        let (again, rep2) = filter_wild_records(kept.clone());
        assert_eq!(again, kept);
        assert_eq!(rep2.retention, 1.0);
    }
}
