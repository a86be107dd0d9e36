mod common;

use leafsynth::dataset::write_label_map;
use leafsynth::eval::{best_dice, diff_in_count, evaluate_directory, symmetric_best_dice, EvalError, Pairing};
use leafsynth::LabelMap;
use proptest::prelude::*;

fn label_map(max_side: u32, max_id: u16) -> impl Strategy<Value = (LabelMap, LabelMap)> {
    (1..=max_side, 1..=max_side).prop_flat_map(move |(w, h)| {
        let n = (w * h) as usize;
        (
            proptest::collection::vec(0..=max_id, n),
            proptest::collection::vec(0..=max_id, n),
        )
            .prop_map(move |(a, b)| (LabelMap::from_vec(w, h, a), LabelMap::from_vec(w, h, b)))
    })
}

proptest! {
    #[test]
    fn agrees_with_pairwise_oracle((a, b) in label_map(5, 3)) {
        prop_assert!((best_dice(&a, &b).unwrap() - common::brute_best_dice(&a, &b)).abs() <= 1e-12);
        prop_assert!((symmetric_best_dice(&a, &b).unwrap() - common::brute_sbd(&a, &b)).abs() <= 1e-12);
    }

    #[test]
    fn scores_are_bounded_and_symmetric((a, b) in label_map(12, 6)) {
        let s = symmetric_best_dice(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert!((0.0..=1.0).contains(&best_dice(&a, &b).unwrap()));
        prop_assert_eq!(s, symmetric_best_dice(&b, &a).unwrap());
        prop_assert_eq!(symmetric_best_dice(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn relabeling_keeps_the_score((a, b) in label_map(10, 5), shift in 1u16..500) {
        let pa = a.relabel(|id| id * 3 + shift);
        prop_assert_eq!(symmetric_best_dice(&pa, &b).unwrap(), symmetric_best_dice(&a, &b).unwrap());
        prop_assert_eq!(diff_in_count(&pa, &b), diff_in_count(&a, &b));
    }
}

#[test]
fn two_vs_three_instances_on_4x4() {
    let a = LabelMap::from_rows(&[&[1, 1, 0, 0], &[1, 1, 0, 0], &[0, 2, 2, 2], &[0, 2, 2, 2]]);
    let b = LabelMap::from_rows(&[&[3, 3, 3, 0], &[1, 1, 0, 0], &[0, 0, 2, 2], &[5, 5, 2, 2]]);
    assert_eq!(best_dice(&a, &b).unwrap(), common::brute_best_dice(&a, &b));
    assert_eq!(best_dice(&b, &a).unwrap(), common::brute_best_dice(&b, &a));
}

fn write_pair_dirs(gt: &[LabelMap], pred: &[LabelMap]) -> (tempfile::TempDir, tempfile::TempDir) {
    let (g, p) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for (i, m) in gt.iter().enumerate() {
        write_label_map(&g.path().join(format!("plant{i:03}_label.png")), m).unwrap();
    }
    for (i, m) in pred.iter().enumerate() {
        write_label_map(&p.path().join(format!("plant{i:03}_label.png")), m).unwrap();
    }
    (g, p)
}

#[test]
fn directory_self_evaluation_is_perfect() {
    let maps = vec![
        LabelMap::from_rows(&[&[0, 1, 1], &[2, 2, 0]]),
        LabelMap::from_rows(&[&[3, 3, 0], &[0, 0, 0]]),
    ];
    let (g, _) = write_pair_dirs(&maps, &[]);
    let report = evaluate_directory(g.path(), g.path(), Pairing::ExactName).unwrap();
    let m = report.mean();
    assert_eq!(m.sbd, 1.0);
    assert_eq!(m.abs_dic, 0.0);
}

#[test]
fn toy_directory_mean_matches_oracle() {
    let gt = vec![
        LabelMap::from_rows(&[&[1, 1, 0, 2], &[1, 1, 0, 2], &[0, 0, 0, 2]]),
        LabelMap::from_rows(&[&[4, 4, 4, 4], &[0, 0, 0, 0], &[7, 7, 0, 0]]),
    ];
    let pred = vec![
        LabelMap::from_rows(&[&[1, 1, 1, 1], &[1, 1, 0, 2], &[0, 0, 3, 3]]),
        LabelMap::from_rows(&[&[9, 9, 4, 4], &[0, 0, 0, 0], &[0, 0, 0, 0]]),
    ];
    let (g, p) = write_pair_dirs(&gt, &pred);
    let report = evaluate_directory(g.path(), p.path(), Pairing::ExactName).unwrap();
    let expected: Vec<f64> = gt.iter().zip(&pred).map(|(a, b)| common::brute_sbd(a, b)).collect();
    for (r, e) in report.images.iter().zip(&expected) {
        assert!((r.score.sbd - e).abs() < 1e-12);
    }
    assert!((report.mean().sbd - (expected[0] + expected[1]) / 2.0).abs() < 1e-12);
    assert_eq!(report.images[0].score.dic, 1);
    assert_eq!(report.images[1].score.dic, 0);

    let mut csv = Vec::new();
    report.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "image,bd_gp,bd_pg,sbd,dic,abs_dic");
    assert!(lines[1].starts_with("plant000_label.png,"));
    assert!(lines[3].starts_with("mean,"));
}

#[test]
fn missing_prediction_is_named() {
    let m = LabelMap::from_rows(&[&[1, 0]]);
    let (g, p) = write_pair_dirs(&[m.clone(), m.clone()], &[m]);
    match evaluate_directory(g.path(), p.path(), Pairing::ExactName) {
        Err(EvalError::Unmatched { missing_pred, missing_gt }) => {
            assert_eq!(missing_pred, vec!["plant001_label.png".to_string()]);
            assert!(missing_gt.is_empty());
        }
        other => panic!("expected unmatched error, got {other:?}"),
    }
}

#[test]
fn plant_key_pairs_differently_suffixed_files() {
    let m = LabelMap::from_rows(&[&[1, 2]]);
    let (g, p) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_label_map(&g.path().join("plant004_label.png"), &m).unwrap();
    write_label_map(&p.path().join("plant004_pred.png"), &m).unwrap();
    assert!(evaluate_directory(g.path(), p.path(), Pairing::ExactName).is_err());
    let r = evaluate_directory(g.path(), p.path(), Pairing::PlantKey).unwrap();
    assert_eq!(r.mean().sbd, 1.0);
}

#[test]
fn dimension_mismatch_names_the_image() {
    let (g, p) = write_pair_dirs(&[LabelMap::new(3, 2)], &[LabelMap::new(2, 3)]);
    let err = evaluate_directory(g.path(), p.path(), Pairing::ExactName).unwrap_err();
    assert!(err.to_string().contains("plant000_label.png"), "{err}");
}
