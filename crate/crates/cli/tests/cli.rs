use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

fn leafsynth(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_leafsynth")).args(args).output().expect("binary runs")
}

fn small_config(dir: &Path) -> String {
    let p = dir.join("small.toml");
    std::fs::write(&p, "image_width = 128\nimage_height = 96\n").unwrap();
    p.to_string_lossy().into_owned()
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_owned()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_twice_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let o = leafsynth(&["generate", "--config", &cfg, "--count", "3", "--seed", "7", "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ta, tb) = (tree(&a), tree(&b));
    assert!(ta.contains_key("annotations.json") && ta.contains_key("label/plant00002_label.png"));
    assert_eq!(ta, tb);
}

#[test]
fn self_evaluation_stats_and_mix() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let data = tmp.path().join("data");
    let o = leafsynth(&["generate", "--config", &cfg, "--count", "4", "--texture-mode", "plant", "--out", s(&data)]);
    assert!(o.status.success());

    let labels = data.join("label");
    let report = tmp.path().join("report.csv");
    let o = leafsynth(&["evaluate", "--gt", s(&labels), "--pred", s(&labels), "--report", s(&report)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.lines().last().unwrap().starts_with("mean,1,1,1,0,0"), "{text}");

    let (heat, hist) = (tmp.path().join("heat.csv"), tmp.path().join("hist.csv"));
    let args = ["stats", "--source", s(&data), "--heatmap", s(&heat), "--hist", s(&hist), "--grid", "8"];
    let first = leafsynth(&args);
    assert!(first.status.success());
    let (h1, g1) = (std::fs::read(&heat).unwrap(), std::fs::read(&hist).unwrap());
    assert!(tmp.path().join("heat.png").exists());
    let again = leafsynth(&args);
    assert_eq!(first.stdout, again.stdout);
    assert_eq!((h1, g1), (std::fs::read(&heat).unwrap(), std::fs::read(&hist).unwrap()));
    let hist_text = std::fs::read_to_string(&hist).unwrap();
    let images: u64 = hist_text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(images, 4);

    let real = tmp.path().join("real.csv");
    std::fs::write(&real, "index,rgb_path,label_path\n0,r0.png,l0.png\n1,r1.png,l1.png\n").unwrap();
    let plan = tmp.path().join("plan.csv");
    let o = leafsynth(&[
        "mix", "--real", s(&real), "--synthetic", s(&data.join("manifest.csv")), "--batch", "2", "--out", s(&plan),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: Vec<String> = std::fs::read_to_string(&plan).unwrap().lines().skip(1).map(String::from).collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(rows.iter().filter(|r| r.contains(",real,")).count(), 4);
}

#[test]
fn mismatched_directories_fail_with_list() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let data = tmp.path().join("data");
    assert!(leafsynth(&["generate", "--config", &cfg, "--count", "2", "--out", s(&data)]).status.success());
    let pred = tmp.path().join("pred");
    std::fs::create_dir_all(&pred).unwrap();
    std::fs::copy(data.join("label/plant00000_label.png"), pred.join("plant00000_label.png")).unwrap();
    let o = leafsynth(&["evaluate", "--gt", s(&data.join("label")), "--pred", s(&pred), "--report", "/dev/null"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("plant00001_label.png"));
}

#[test]
fn dump_scene_lists_leaves() {
    let o = leafsynth(&["dump-scene", "--seed", "3", "--index", "5"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let leaves = text.lines().filter(|l| l.starts_with("# leaf ")).count();
    assert!(leaves >= 1);
    assert_eq!(text.lines().filter(|l| l.starts_with("o leaf_")).count(), leaves);
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(leafsynth(&["--help"]).status.code(), Some(0));
    assert_eq!(leafsynth(&["generate", "--bogus"]).status.code(), Some(1));

    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "leaf_count_stddev = -1.0\n").unwrap();
    let o = leafsynth(&["generate", "--config", s(&bad), "--out", s(&tmp.path().join("x"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("leaf_count_stddev"));
    assert!(!tmp.path().join("x").exists(), "nothing is written for an invalid config");

    let o = leafsynth(&["generate", "--config", s(&tmp.path().join("missing.toml")), "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(2));
}
