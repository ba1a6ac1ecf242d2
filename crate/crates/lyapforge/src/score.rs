//! Scoring model predictions.
//!
//! A prediction line names a system (by dataset id, or inline tokens) and lists
//! candidate Lyapunov functions as token strings. A system is solved when any
//! candidate is certified; timeouts, unknowns and undecodable output count as wrong.

use std::collections::HashMap;
use std::path::Path;

use lyapforge_core::score::{classify, CandidateOutcome, ScoreReport, SystemOutcome};
use lyapforge_core::tokenizer::{decode_expr, decode_system, from_text};
use lyapforge_core::{Expr, System};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::check::{check_candidate, VerifySettings};
use crate::error::{PipelineError, Result};
use crate::record::{read_jsonl, read_records, write_json, write_jsonl, DatasetRecord, GenKind};

/// One line of a predictions file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub id: String,
    /// System tokens; when absent, `id` is looked up in the dataset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    pub candidates: Vec<String>,
    /// Model scores, higher first. When present, ranks follow scores rather than list order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemScore {
    pub id: String,
    pub outcome: String,
    /// Rank of the first certified candidate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    /// Status of each candidate checked, in rank order; checking stops at the first certified one.
    pub checked: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreOutput {
    pub report: ScoreReport,
    pub systems: Vec<SystemScore>,
    /// Certified (system, candidate) pairs as model-verified records.
    #[serde(skip)]
    pub verified: Vec<DatasetRecord>,
}

fn outcome_name(o: SystemOutcome) -> &'static str {
    match o {
        SystemOutcome::Correct => "correct",
        SystemOutcome::Timeout => "timeout",
        SystemOutcome::Unknown => "unknown",
        SystemOutcome::DecodeError => "decode-error",
        SystemOutcome::Incorrect => "incorrect",
    }
}

/// Candidate indices in rank order.
fn ranked(p: &Prediction) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..p.candidates.len()).collect();
    if let Some(s) = p.scores.as_ref().filter(|s| s.len() == p.candidates.len()) {
        idx.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then_with(|| p.candidates[a].cmp(&p.candidates[b])));
    }
    idx
}

fn decode_candidate(text: &str, n: usize) -> Option<Expr> {
    let e = decode_expr(&from_text(text).ok()?).ok()?;
    (e.dimension() <= n).then_some(e)
}

struct Resolved<'a> {
    pred: &'a Prediction,
    system: System,
    source: Option<&'a DatasetRecord>,
}

fn resolve<'a>(
    preds: &'a [Prediction],
    dataset: &HashMap<&str, &'a DatasetRecord>,
) -> std::result::Result<Vec<Resolved<'a>>, (usize, String)> {
    preds
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let source = dataset.get(p.id.as_str()).copied();
            let system = match (&p.system, source) {
                (Some(t), _) => {
                    let toks = from_text(t).map_err(|e| (i, format!("system tokens: {e}")))?;
                    decode_system(&toks).map_err(|e| (i, format!("system tokens: {e}")))?
                }
                (None, Some(r)) => r.decode_system().map_err(|e| (i, e))?,
                (None, None) => return Err((i, format!("id {:?} is not in the dataset and no system is given", p.id))),
            };
            Ok(Resolved { pred: p, system, source })
        })
        .collect()
}

fn score_one(r: &Resolved, s: &VerifySettings) -> (Vec<CandidateOutcome>, Option<(usize, Expr)>) {
    let n = r.system.dim();
    let mut outcomes = Vec::new();
    for k in ranked(r.pred) {
        match decode_candidate(&r.pred.candidates[k], n) {
            None => outcomes.push(CandidateOutcome::DecodeError),
            Some(v) => {
                let c = check_candidate(&r.system, &v, s);
                let done = c.verdict.is_certified();
                outcomes.push(CandidateOutcome::Checked(c.verdict));
                if done {
                    return (outcomes, Some((k, v)));
                }
            }
        }
    }
    (outcomes, None)
}

/// Scores `preds`; systems are resolved through `dataset` by id unless given inline.
pub fn eval_predictions(preds: &[Prediction], dataset: &[DatasetRecord], s: &VerifySettings) -> Result<ScoreOutput> {
    let by_id: HashMap<&str, &DatasetRecord> = dataset.iter().map(|r| (r.id.as_str(), r)).collect();
    let resolved = resolve(preds, &by_id).map_err(|(i, message)| PipelineError::Record {
        path: "<predictions>".into(),
        line: i + 1,
        message,
    })?;
    let scored: Vec<_> = resolved.par_iter().map(|r| score_one(r, s)).collect();
    let report = ScoreReport::from_systems(scored.iter().map(|(o, _)| o.as_slice()));
    let mut systems = Vec::with_capacity(scored.len());
    let mut verified = Vec::new();
    for (r, (outcomes, hit)) in resolved.iter().zip(&scored) {
        let outcome = classify(outcomes);
        systems.push(SystemScore {
            id: r.pred.id.clone(),
            outcome: outcome_name(outcome).into(),
            rank: hit.as_ref().map(|_| outcomes.len() - 1),
            checked: outcomes
                .iter()
                .map(|o| match o {
                    CandidateOutcome::DecodeError => "decode-error".into(),
                    CandidateOutcome::Checked(v) => v.status().into(),
                })
                .collect(),
        });
        if let Some((_, v)) = hit {
            let (group, seed) = r.source.map_or((0, 0), |x| (x.group_id, x.seed));
            if let Ok(mut rec) = DatasetRecord::new(r.pred.id.clone(), GenKind::ModelVerified, &r.system, Some(v), group, seed) {
                rec.tag = Some(r.source.and_then(|x| x.tag.clone()).unwrap_or_else(|| "wild".into()));
                verified.push(rec);
            }
        }
    }
    Ok(ScoreOutput {
        report,
        systems,
        verified,
    })
}

/// Reads predictions (and optionally the dataset they refer to), writes the report
/// as JSON and, when asked, the certified pairs as model-verified records.
pub fn score_files(
    predictions: &Path,
    dataset: Option<&Path>,
    s: &VerifySettings,
    report_out: Option<&Path>,
    verified_out: Option<&Path>,
) -> Result<ScoreOutput> {
    let preds: Vec<Prediction> = read_jsonl(predictions)?;
    let data = dataset.map(read_records).transpose()?.unwrap_or_default();
    let out = eval_predictions(&preds, &data, s).map_err(|e| match e {
        PipelineError::Record { line, message, .. } => PipelineError::Record {
            path: predictions.into(),
            line,
            message,
        },
        e => e,
    })?;
    if let Some(p) = report_out {
        write_json(p, &out)?;
    }
    if let Some(p) = verified_out {
        write_jsonl(p, &out.verified)?;
    }
    Ok(out)
}
