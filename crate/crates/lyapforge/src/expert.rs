//! Fine-tuning files for expert iteration: the base training set followed by
//! verified model solutions and, for some strategies, fresh generated data.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use lyapforge_core::rng::stream;

use crate::error::{PipelineError, Result};
use crate::mix::select_distinct;
use crate::record::{DatasetRecord, GenKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    /// Certified model predictions on random systems.
    Wild,
    BPoly,
    FLyap,
    FBarr,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Wild => "wild",
            Source::BPoly => "bpoly",
            Source::FLyap => "flyap",
            Source::FBarr => "fbarr",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    N1,
    N2,
    N3,
    N4,
    N5,
    N6,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [Strategy::N1, Strategy::N2, Strategy::N3, Strategy::N4, Strategy::N5, Strategy::N6];

    /// Records appended to the base set, in output order.
    pub fn plan(self) -> &'static [(Source, usize)] {
        match self {
            Strategy::N1 => &[(Source::BPoly, 20_000), (Source::FBarr, 50), (Source::FLyap, 50), (Source::Wild, 500)],
            Strategy::N2 => &[(Source::FLyap, 1_000), (Source::Wild, 1_000)],
            Strategy::N3 => &[(Source::Wild, 50)],
            Strategy::N4 => &[(Source::Wild, 1_000)],
            Strategy::N5 => &[(Source::Wild, 2_000)],
            Strategy::N6 => &[(Source::Wild, 5_000)],
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = Strategy::ALL.iter().position(|s| s == self).expect("listed") + 1;
        write!(f, "n{k}")
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Strategy::ALL
            .into_iter()
            .find(|x| x.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown strategy {s:?}; expected n1..n6"))
    }
}

#[derive(Clone, Debug, Default)]
pub struct Sources {
    pub wild: Vec<DatasetRecord>,
    pub bpoly: Vec<DatasetRecord>,
    pub flyap: Vec<DatasetRecord>,
    pub fbarr: Vec<DatasetRecord>,
}

impl Sources {
    fn get(&self, s: Source) -> &[DatasetRecord] {
        match s {
            Source::Wild => &self.wild,
            Source::BPoly => &self.bpoly,
            Source::FLyap => &self.flyap,
            Source::FBarr => &self.fbarr,
        }
    }
}

/// `base` unchanged, then the records the strategy asks for, none repeating a base system.
pub fn expert_iteration_prepare(
    base: Vec<DatasetRecord>,
    sources: &Sources,
    strategy: Strategy,
    seed: u64,
) -> Result<Vec<DatasetRecord>> {
    if let Some(r) = sources.wild.iter().find(|r| r.gen_mode != GenKind::ModelVerified || r.lyapunov.is_none()) {
        return Err(PipelineError::Config(format!(
            "wild source record {} is not a verified model prediction",
            r.id
        )));
    }
    let mut seen: HashSet<String> = base.iter().map(|r| r.key().to_owned()).collect();
    let mut out = base;
    for (j, &(src, count)) in strategy.plan().iter().enumerate() {
        let mut rng = stream(seed, j as u64);
        out.extend(select_distinct(src.name(), sources.get(src), count, &mut seen, &mut rng)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lyapforge_core::parse::parse_expr;
    use lyapforge_core::System;

    fn recs(kind: GenKind, tag: &str, lo: i64, hi: i64) -> Vec<DatasetRecord> {
        let v = parse_expr("x0^2").unwrap();
        (lo..hi)
            .map(|k| {
                let sys = System::new(vec![parse_expr(&format!("-{k}*x0")).unwrap()]);
                let mut r = DatasetRecord::new(format!("{tag}{k}"), kind, &sys, Some(&v), 0, 0).unwrap();
                r.tag = Some(tag.into());
                r
            })
            .collect()
    }

    #[test]
    fn counts_per_strategy() {
        let sources = Sources {
            wild: recs(GenKind::ModelVerified, "poly3", 1, 6001),
            bpoly: recs(GenKind::Backward, "bpoly", 10_001, 30_101),
            flyap: recs(GenKind::Forward, "flyap", 40_001, 41_101),
            fbarr: recs(GenKind::Forward, "fbarr", 50_001, 50_101),
        };
        let base = recs(GenKind::Backward, "base", 100_001, 100_101);
        for (s, want_wild, total) in [
            (Strategy::N1, 500, 20_600),
            (Strategy::N2, 1000, 2000),
            (Strategy::N3, 50, 50),
            (Strategy::N4, 1000, 1000),
            (Strategy::N5, 2000, 2000),
            (Strategy::N6, 5000, 5000),
        ] {
            let out = expert_iteration_prepare(base.clone(), &sources, s, 1).unwrap();
            assert_eq!(out.len(), 100 + total, "{s}");
            assert_eq!(&out[..100], &base[..]);
            let wild = out.iter().filter(|r| r.gen_mode == GenKind::ModelVerified).count();
            assert_eq!(wild, want_wild, "{s}");
            assert!(out[100..].iter().all(|r| r.tag.is_some()));
        }
    }

    #[test]
    fn shortages_are_reported() {
        let base = recs(GenKind::Backward, "base", 1, 5);
        let err = expert_iteration_prepare(base.clone(), &Sources::default(), Strategy::N3, 0).unwrap_err();
        assert!(matches!(err, PipelineError::InsufficientRecords { requested: 50, available: 0, .. }));
        let sources = Sources {
            wild: recs(GenKind::Backward, "x", 1, 100),
            ..Sources::default()
        };
        assert!(matches!(
            expert_iteration_prepare(base, &sources, Strategy::N3, 0),
            Err(PipelineError::Config(_))
        ));
        assert_eq!("N4".parse::<Strategy>().unwrap(), Strategy::N4);
        assert!("n7".parse::<Strategy>().is_err());
    }
}
