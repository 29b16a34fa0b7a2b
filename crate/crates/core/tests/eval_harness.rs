use sur_core::eval::{evaluate_order, kfold_split, run_full_evaluation, Corpus, EvalConfig, PredictorChoice, Setting};
use sur_core::stats::Resolution;
use sur_core::synth::{synth_corpus, SynthConfig};
use sur_core::Error;

fn corpus(clips: usize, seed: u64) -> Corpus {
    synth_corpus(&SynthConfig {
        clips,
        seed,
        resolutions: vec![Resolution::R360p],
        ..SynthConfig::default()
    })
    .unwrap()
}

#[test]
fn oracle_predictor_has_zero_error() {
    let c = corpus(30, 4);
    let cfg = EvalConfig {
        predictor_choice: PredictorChoice::Oracle,
        ..EvalConfig::default()
    };
    let r = run_full_evaluation(&c, &cfg).unwrap();
    assert_eq!(r.summaries.len(), 7);
    for rec in &r.records {
        assert_eq!(rec.delta_sur, 0.0);
        assert_eq!(rec.delta_qp, 0.0);
    }
}

#[test]
fn empty_settings_give_order_one_only() {
    let c = corpus(30, 4);
    let cfg = EvalConfig {
        settings: vec![],
        ..EvalConfig::default()
    };
    let r = run_full_evaluation(&c, &cfg).unwrap();
    assert_eq!(r.summaries.len(), 1);
    assert_eq!(r.summaries[0].jnd_order, 1);
    assert_eq!(r.summaries[0].setting, None);
    assert_eq!(r.records.len(), 30);
}

#[test]
fn summaries_recompute_from_records() {
    let c = corpus(30, 5);
    let r = run_full_evaluation(&c, &EvalConfig::default()).unwrap();
    for s in &r.summaries {
        let recs: Vec<_> = r
            .records
            .iter()
            .filter(|x| x.resolution == s.resolution && x.jnd_order == s.jnd_order && x.setting == s.setting)
            .collect();
        assert_eq!(recs.len(), s.clips);
        let n = recs.len() as f64;
        assert_eq!(recs.iter().map(|x| x.delta_sur).sum::<f64>() / n, s.mean_delta_sur);
        assert_eq!(recs.iter().map(|x| x.delta_qp).sum::<f64>() / n, s.mean_delta_qp);
    }
}

#[test]
fn ground_truth_anchor_is_previous_measured_jnd() {
    let c = corpus(30, 6);
    let r = run_full_evaluation(&c, &EvalConfig::default()).unwrap();
    for rec in r.records.iter().filter(|x| x.setting == Some(Setting::GroundTruthRef)) {
        let clip = c.clips.iter().find(|k| k.clip_id == rec.clip_id).unwrap();
        let prev = clip.truth(rec.jnd_order - 1).unwrap();
        let expect = sur_core::stats::jnd_point(&prev, 0.75).unwrap().qp_int;
        assert_eq!(rec.anchor_qp, expect);
    }
    for rec in r.records.iter().filter(|x| x.setting == Some(Setting::SameRef)) {
        assert_eq!(rec.anchor_qp, 0);
    }
}

#[test]
fn predicted_ref_without_previous_order_is_a_pipeline_error() {
    let c = corpus(20, 7);
    let clips: Vec<_> = c.clips.iter().collect();
    let ids: Vec<String> = clips.iter().map(|x| x.clip_id.clone()).collect();
    let folds = kfold_split(&ids, 2, 1).unwrap();
    let err = evaluate_order(&clips, &folds, 2, Some(Setting::PredictedRef), None, &EvalConfig::default()).unwrap_err();
    match err {
        Error::Pipeline(m) => assert!(m.contains("order-1"), "{m}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn test_clip_targets_never_reach_training() {
    let c = corpus(30, 8);
    let clips: Vec<_> = c.clips.iter().collect();
    let ids: Vec<String> = clips.iter().map(|x| x.clip_id.clone()).collect();
    let folds = kfold_split(&ids, 5, 3).unwrap();
    let cfg = EvalConfig {
        search: Some(Default::default()),
        ..EvalConfig::default()
    };
    let base = evaluate_order(&clips, &folds, 1, None, None, &cfg).unwrap();

    // replace the samples of one test clip of fold 0; every other fold-0
    // test prediction must be unchanged
    let victim = folds.test_indices(0)[0];
    let mut altered = c.clone();
    let set = &altered.clips[victim].jnd_sets[&1];
    let shifted: Vec<f64> = set.samples().iter().map(|y| (y + 7.0).min(51.0)).collect();
    let new_set = sur_core::stats::JndSampleSet::new(set.clip_id.clone(), set.resolution, 1, 0, shifted).unwrap();
    altered.clips[victim].jnd_sets.insert(1, new_set);
    let clips2: Vec<_> = altered.clips.iter().collect();
    let again = evaluate_order(&clips2, &folds, 1, None, None, &cfg).unwrap();
    for i in folds.test_indices(0) {
        if i != victim {
            assert_eq!(base.records[i].pred_mu, again.records[i].pred_mu);
            assert_eq!(base.records[i].pred_sigma, again.records[i].pred_sigma);
        }
    }
    assert_eq!(base.fold_predictions[0], again.fold_predictions[0]);
}

#[test]
fn rerun_is_identical() {
    let c = corpus(25, 9);
    let a = run_full_evaluation(&c, &EvalConfig::default()).unwrap();
    let b = run_full_evaluation(&c, &EvalConfig::default()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn partial_corpus_skips_missing_orders() {
    let mut c = corpus(25, 10);
    for clip in &mut c.clips {
        clip.jnd_sets.remove(&3);
    }
    let r = run_full_evaluation(&c, &EvalConfig::default()).unwrap();
    assert_eq!(r.summaries.len(), 4);
    assert_eq!(r.skipped.len(), 3);
    assert!(r.skipped.iter().all(|m| m.contains("order 3")));
}

#[test]
fn too_few_clips_is_reported_not_fatal() {
    let c = corpus(8, 11);
    let r = run_full_evaluation(&c, &EvalConfig::default()).unwrap();
    assert!(r.summaries.is_empty());
    assert_eq!(r.skipped.len(), 1);
}

#[test]
fn order_two_fixture() {
    let c = corpus(40, 2018);
    let r = run_full_evaluation(&c, &EvalConfig::default()).unwrap();
    let dqp: Vec<f64> = Setting::ALL
        .iter()
        .map(|&s| r.summary(Resolution::R360p, 2, Some(s)).unwrap().mean_delta_qp)
        .collect();
    assert_eq!(dqp, FROZEN_ORDER_TWO);
}

// ground-truth, predicted, same reference
const FROZEN_ORDER_TWO: [f64; 3] = [0.575, 0.925, 1.1];
