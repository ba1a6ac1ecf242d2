use lyapforge::check::{Method, VerifySettings};
use lyapforge::expert::{self, expert_iteration_prepare, Sources};
use lyapforge::record::{DatasetRecord, GenKind};
use lyapforge::score::{eval_predictions, score_files, Prediction};
use lyapforge_core::parse::parse_expr_dim;
use lyapforge_core::tokenizer::{encode_expr, encode_system, to_text};
use lyapforge_core::System;
use proptest::prelude::*;
use proptest::sample::subsequence;

fn sys(eqs: &[&str]) -> System {
    System::new(eqs.iter().map(|s| parse_expr_dim(s, eqs.len()).unwrap()).collect())
}

fn toks(s: &str, n: usize) -> String {
    to_text(&encode_expr(&parse_expr_dim(s, n).unwrap()).unwrap())
}

fn sos() -> VerifySettings {
    VerifySettings {
        method: Method::Sos,
        ..VerifySettings::default()
    }
}

// Candidates for the system {-x0, -x1 + x0^2}: certified, rejected, undecodable.
const POOL: [&str; 6] = ["x0^2 + x1^2", "x0^2", "x1^2", "x0^4 + 2*x1^2", "x0 + x1", "2*x0^2 + x1^2"];

fn prediction(cands: &[usize], scores: &[f64]) -> Prediction {
    let mut c: Vec<String> = cands.iter().map(|&i| toks(POOL[i], 2)).collect();
    c.push("mul x0".into());
    Prediction {
        id: "p".into(),
        system: Some(to_text(&encode_system(&sys(&["-x0", "-x1 + x0^2"])).unwrap())),
        candidates: c,
        scores: Some(scores.to_vec()),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scored_candidates_rank_independently_of_list_order(
        cands in subsequence((0..POOL.len()).collect::<Vec<_>>(), 1..=POOL.len()),
        raw in proptest::collection::vec(-5i32..5, POOL.len() + 1),
        rot in 0usize..8,
    ) {
        let scores: Vec<f64> = raw[..=cands.len()].iter().map(|&s| s as f64).collect();
        let a = prediction(&cands, &scores);
        let mut b = a.clone();
        let k = rot % b.candidates.len();
        b.candidates.rotate_left(k);
        b.scores.as_mut().unwrap().rotate_left(k);
        let ra = eval_predictions(&[a], &[], &sos()).unwrap();
        let rb = eval_predictions(&[b], &[], &sos()).unwrap();
        prop_assert_eq!(ra.report, rb.report);
        prop_assert_eq!(&ra.systems[0].checked, &rb.systems[0].checked);
    }

    #[test]
    fn batch_order_does_not_change_counts(perm in Just((0..4).collect::<Vec<usize>>()).prop_shuffle()) {
        let batch: Vec<Prediction> = [
            (vec!["-x0", "-x1"], vec!["x0^2 + x1^2"]),
            (vec!["x0", "-x1"], vec!["x0^2 + x1^2"]),
            (vec!["-x0^3"], vec!["x0^2", "x0^4"]),
            (vec!["-x0"], vec![]),
        ]
        .iter()
        .enumerate()
        .map(|(i, (eqs, cands))| Prediction {
            id: format!("s{i}"),
            system: Some(to_text(&encode_system(&sys(eqs)).unwrap())),
            candidates: cands.iter().map(|c| toks(c, eqs.len())).collect(),
            scores: None,
        })
        .collect();
        let shuffled: Vec<Prediction> = perm.iter().map(|&i| batch[i].clone()).collect();
        let a = eval_predictions(&batch, &[], &sos()).unwrap();
        let b = eval_predictions(&shuffled, &[], &sos()).unwrap();
        prop_assert_eq!(&a.report.counts, &b.report.counts);
        prop_assert_eq!(a.report.accuracy, b.report.accuracy);
        prop_assert_eq!(a.report.first_correct_rank, vec![2]);
    }
}

#[test]
fn verified_predictions_feed_expert_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let data: Vec<DatasetRecord> = (1..=6)
        .map(|k| {
            let s = sys(&[&format!("-{k}*x0"), "-x1"]);
            DatasetRecord::new(format!("w{k}"), GenKind::Wild, &s, None, k, 0).unwrap()
        })
        .collect();
    let preds: Vec<Prediction> = data
        .iter()
        .map(|r| Prediction {
            id: r.id.clone(),
            system: None,
            candidates: vec![toks(if r.group_id % 2 == 0 { "x0^2 + x1^2" } else { "x0 + x1^2" }, 2)],
            scores: None,
        })
        .collect();
    let pred_path = dir.path().join("pred.jsonl");
    let data_path = dir.path().join("data.jsonl");
    let verified_path = dir.path().join("verified.jsonl");
    let report_path = dir.path().join("report.json");
    lyapforge::record::write_jsonl(&pred_path, &preds).unwrap();
    lyapforge::record::write_records(&data_path, &data).unwrap();
    let out = score_files(&pred_path, Some(&data_path), &sos(), Some(&report_path), Some(&verified_path)).unwrap();
    assert_eq!(out.report.counts.certified, 3);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(&report_path).unwrap()).unwrap();
    assert_eq!(report["report"]["counts"]["total"], 6);

    let wild = lyapforge::record::read_records(&verified_path).unwrap();
    assert!(wild.iter().all(|r| r.gen_mode == GenKind::ModelVerified && r.lyapunov.is_some()));
    let sources = Sources {
        wild,
        ..Sources::default()
    };
    let base = data[..1].to_vec();
    let err = expert_iteration_prepare(base.clone(), &sources, expert::Strategy::N3, 0).unwrap_err();
    assert!(err.to_string().contains("50"), "{err}");

    // Unverified records are refused as the wild source.
    let bad = Sources {
        wild: data.clone(),
        ..Sources::default()
    };
    assert!(expert_iteration_prepare(base, &bad, expert::Strategy::N3, 0).is_err());
}
