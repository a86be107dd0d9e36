mod common;

use std::collections::BTreeSet;

use leafsynth::dataset::{export_annotations, read_label_map, AnnotationStyle, DatasetManifest};
use leafsynth::pipeline::{generate_dataset, generate_labels, generate_sample, GenerationContext};
use leafsynth::stats::compute_stats;
use leafsynth::{GenerationConfig, TextureMode};

fn small(seed: u64) -> GenerationConfig {
    GenerationConfig { global_seed: seed, image_width: 160, image_height: 128, ..Default::default() }
}

#[test]
fn worker_count_does_not_change_output() {
    let ctx = GenerationContext::new(small(21)).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    generate_dataset(&ctx, &a, 0, 6, 1, &|_| {}).unwrap();
    generate_dataset(&ctx, &b, 0, 6, 3, &|_| {}).unwrap();
    for f in ["manifest.csv", "dataset.toml", "rgb/plant00005_rgb.png", "label/plant00002_label.png"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn manifest_indices_follow_the_requested_range() {
    let ctx = GenerationContext::new(small(2)).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let m = generate_dataset(&ctx, tmp.path(), 10, 4, 2, &|_| {}).unwrap();
    assert_eq!(m.records.iter().map(|r| r.index).collect::<Vec<_>>(), vec![10, 11, 12, 13]);
    let back = DatasetManifest::read(&tmp.path().join("manifest.csv")).unwrap();
    assert_eq!(back.records, m.records);
    assert_eq!(back.config.as_ref(), Some(&ctx.config));
}

#[test]
fn plant_mode_uses_one_texture_everywhere() {
    let cfg = GenerationConfig { texture_mode: TextureMode::PlantUniform, ..small(3) };
    let ctx = GenerationContext::new(cfg).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let m = generate_dataset(&ctx, tmp.path(), 0, 5, 1, &|_| {}).unwrap();
    let ids: BTreeSet<&str> = m.records.iter().flat_map(|r| r.leaves.iter().map(|l| l.texture_id.as_str())).collect();
    assert_eq!(ids.len(), 1);

    let per_leaf = GenerationContext::new(small(3)).unwrap();
    let (plant, _) = per_leaf.plant(0).unwrap();
    let distinct: BTreeSet<&str> = plant.leaves.iter().map(|l| l.texture_ref.as_str()).collect();
    assert!(distinct.len() > 1, "per-leaf mode should mix textures");
}

#[test]
fn written_labels_match_manifest_metadata() {
    let ctx = GenerationContext::new(small(4)).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let m = generate_dataset(&ctx, tmp.path(), 0, 4, 1, &|_| {}).unwrap();
    for rec in &m.records {
        let labels = read_label_map(&m.resolve(&rec.label_path)).unwrap();
        let stats = labels.instance_stats();
        assert_eq!(rec.leaf_count as usize, rec.leaves.len());
        for leaf in &rec.leaves {
            match stats.iter().find(|s| s.id == leaf.instance_id) {
                Some(s) => {
                    assert_eq!(s.area, leaf.pixel_area);
                    assert_eq!(s.centroid, [leaf.centroid_x, leaf.centroid_y]);
                }
                None => assert_eq!(leaf.pixel_area, 0),
            }
        }
        // labels equal the label-only render path
        assert_eq!(generate_labels(&ctx, rec.index).unwrap().0, labels);
    }
    let ann = export_annotations(&m, AnnotationStyle::PerInstanceMasks, false).unwrap();
    let visible: usize = m.records.iter().map(|r| r.visible_leaves().count()).sum();
    assert_eq!(ann.annotations.len(), visible);
    for a in &ann.annotations {
        let rle = a.rle.as_ref().unwrap();
        let on: u64 = rle.counts.iter().skip(1).step_by(2).sum();
        assert_eq!(on, a.area);
    }
}

#[test]
fn hidden_leaves_can_be_dropped_and_renumbered() {
    let base = GenerationConfig { leaf_count_mean: 20.0, leaf_count_min: 18, ..small(5) };
    let keep = GenerationContext::new(base.clone()).unwrap();
    let drop = GenerationContext::new(GenerationConfig { drop_zero_area: true, ..base }).unwrap();
    let mut saw_hidden = false;
    for i in 0..8 {
        let a = generate_sample(&keep, i).unwrap();
        let b = generate_sample(&drop, i).unwrap();
        let visible = a.leaves.iter().filter(|l| l.pixel_area > 0).count();
        saw_hidden |= visible < a.leaves.len();
        assert_eq!(b.leaves.len(), visible);
        assert_eq!(b.labels.instance_ids(), (1..=visible as u16).collect::<Vec<_>>());
        assert_eq!(a.rgb, b.rgb);
        // same partition of the pixels
        let pa: BTreeSet<(u16, u16)> = a.labels.labels.iter().zip(&b.labels.labels).map(|(&x, &y)| (x, y)).collect();
        assert_eq!(pa.len(), visible + 1);
    }
    assert!(saw_hidden, "crowded plants should hide some leaves");
}

#[test]
fn forced_leaf_count_gives_single_bin() {
    let cfg = GenerationConfig { leaf_count_min: 9, leaf_count_max: 9, ..small(6) };
    let ctx = GenerationContext::new(cfg).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let m = generate_dataset(&ctx, tmp.path(), 0, 5, 1, &|_| {}).unwrap();
    assert!(m.records.iter().all(|r| r.leaf_count == 9));
    let manifest_path = tmp.path().join("manifest.csv");
    let stats = compute_stats(&manifest_path, 16).unwrap();
    let visible: Vec<u32> = m.records.iter().map(|r| r.visible_leaves().count() as u32).collect();
    assert_eq!(stats.histogram.images(), 5);
    assert_eq!(stats.heatmap.total, visible.iter().map(|&v| v as u64).sum::<u64>());
    assert_eq!(stats.heatmap.counts.iter().sum::<u64>(), stats.heatmap.total);
    if visible.iter().all(|&v| v == 9) {
        assert_eq!(stats.histogram.bins.len(), 1);
        assert_eq!(stats.histogram.variance(), 0.0);
    }
    // a label directory gives the same answer as the manifest
    let from_dir = compute_stats(&tmp.path().join("label"), 16).unwrap();
    assert_eq!(from_dir, stats);
}

#[test]
fn leaf_count_mean_matches_truncated_normal_oracle() {
    use leafsynth::plant::sample_leaf_count;
    use leafsynth::{Purpose, RandomSource};
    for (mean, sd, lo, hi) in [(9.0, 2.5, 1u32, 25u32), (3.0, 4.0, 1, 25), (20.0, 6.0, 2, 22)] {
        let cfg = GenerationConfig {
            leaf_count_mean: mean,
            leaf_count_stddev: sd,
            leaf_count_min: lo,
            leaf_count_max: hi,
            ..Default::default()
        };
        let n = 20_000;
        let total: u64 =
            (0..n).map(|i| sample_leaf_count(&mut RandomSource::new(12, i, Purpose::LeafCount), &cfg) as u64).sum();
        let sample = total as f64 / n as f64;
        let oracle = common::rounded_truncated_normal_mean(mean, sd, lo as f64, hi as f64);
        let by_cdf = common::rounded_truncated_normal_mean_cdf(mean, sd, lo as f64, hi as f64);
        assert!((oracle - by_cdf).abs() < 1e-6, "quadrature {oracle} vs cdf {by_cdf}");
        assert!((sample - oracle).abs() < 0.1, "{mean} {sd}: {sample} vs {oracle}");
    }
}

#[test]
fn anchors_sit_on_the_sphere_within_the_polar_band() {
    let cfg = small(7);
    let ctx = GenerationContext::new(cfg.clone()).unwrap();
    for i in 0..50 {
        let (plant, _) = ctx.plant(i).unwrap();
        for leaf in &plant.leaves {
            let a = leaf.params.anchor;
            let r = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
            assert!((r - plant.sphere_radius).abs() < 1e-6);
            let offset = (a[2] / r).asin().abs();
            assert!(offset <= cfg.polar_clamp + 1e-12);
        }
    }
}

#[test]
fn custom_banks_are_used_and_errors_carry_the_index() {
    let tmp = tempfile::tempdir().unwrap();
    let bank = tmp.path().join("bank");
    std::fs::create_dir_all(&bank).unwrap();
    image::RgbImage::from_pixel(16, 16, image::Rgb([20, 200, 40])).save(bank.join("only.png")).unwrap();
    let cfg = GenerationConfig { texture_bank_path: Some(bank.clone()), ..small(8) };
    let ctx = GenerationContext::new(cfg).unwrap();
    let s = generate_sample(&ctx, 0).unwrap();
    assert!(s.leaves.iter().all(|l| l.texture_id == "only"));

    let missing = GenerationConfig { background_bank_path: Some(tmp.path().join("nope")), ..small(8) };
    let err = GenerationContext::new(missing).err().expect("missing bank must fail");
    assert_eq!(err.exit_kind(), leafsynth::error::ExitKind::Io);
}
