use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use texcollect_core::table::{write_csv_file, FeatureTable};
use texcollect_core::{FeatureVector, GrayImage, FEATURE_DIM};

fn texcollect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_texcollect"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn noise(w: usize, h: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(w, h, 256, |_, _| rng.random_range(0..256)).unwrap()
}

fn write_table(path: &Path, rows: &[[f64; FEATURE_DIM]], labels: Option<&[&str]>) {
    let vectors = rows
        .iter()
        .enumerate()
        .map(|(i, v)| FeatureVector::new(format!("r{i}"), *v))
        .collect();
    let table = FeatureTable {
        vectors,
        labels: labels.map(|l| l.iter().map(|s| s.to_string()).collect()),
    };
    write_csv_file(path, &table).unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn crop_one_512_image_into_49_windows() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    let out = dir.path().join("out");
    std::fs::create_dir(&input).unwrap();
    noise(512, 512, 1)
        .write_pgm(input.join("bark.pgm"))
        .unwrap();

    let o = texcollect(&["crop", s(&input), "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let pgms = std::fs::read_dir(&out)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .path()
                .extension()
                .is_some_and(|x| x == "pgm")
        })
        .count();
    assert_eq!(pgms, 49);
    assert!(out.join("bark_r6_c6.pgm").exists());

    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["sources"][0]["source"], "bark.pgm");
    assert_eq!(m["sources"][0]["windows"].as_array().unwrap().len(), 49);
}

#[test]
fn crop_empty_directory_warns_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    let out = dir.path().join("out");
    std::fs::create_dir(&input).unwrap();
    let o = texcollect(&["crop", s(&input), "--out", s(&out)]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let m = read_json(&out.join("manifest.json"));
    assert!(m["sources"].as_array().unwrap().is_empty());
}

#[test]
fn crop_corrupt_file_fails_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    std::fs::create_dir(&input).unwrap();
    noise(256, 256, 2)
        .write_pgm(input.join("good.pgm"))
        .unwrap();
    std::fs::write(input.join("broken.pgm"), b"P5\n12 12\n255\nshort").unwrap();
    let o = texcollect(&["crop", s(&input), "--out", s(&dir.path().join("out"))]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("broken.pgm"));
    assert!(dir.path().join("out/good_r2_c2.pgm").exists());
}

#[test]
fn extract_three_images_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    std::fs::create_dir(&input).unwrap();
    for i in 0..3 {
        noise(40, 32, i)
            .write_pgm(input.join(format!("t{i}.pgm")))
            .unwrap();
    }
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(texcollect(&["extract", s(&input), "--out", s(&a)])
        .status
        .success());
    assert!(texcollect(&["extract", s(&input), "--out", s(&b)])
        .status
        .success());

    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let m = read_json(&dir.path().join("a.json"));
    assert_eq!(m["rows"], 3);
    assert_eq!(m["config"]["gtdm_levels"], 32);
}

#[test]
fn extract_reports_undersized_image_and_keeps_going() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    std::fs::create_dir(&input).unwrap();
    noise(20, 20, 1).write_pgm(input.join("a.pgm")).unwrap();
    noise(2, 2, 2).write_pgm(input.join("tiny.pgm")).unwrap();
    noise(20, 20, 3).write_pgm(input.join("z.pgm")).unwrap();
    let csv = dir.path().join("f.csv");
    let o = texcollect(&["extract", s(&input), "--out", s(&csv)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("tiny.pgm"));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3);
}

fn two_group_rows() -> Vec<[f64; FEATURE_DIM]> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    (0..12)
        .map(|i| {
            let base = if i % 2 == 0 { 0.1 } else { 0.9 };
            std::array::from_fn(|_| base + rng.random_range(-0.01..0.01))
        })
        .collect()
}

#[test]
fn curate_selects_everything_when_n_equals_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    let out = dir.path().join("c.json");
    write_table(&csv, &two_group_rows(), None);
    let o = texcollect(&["curate", s(&csv), "--n", "12", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut ids: Vec<String> = read_json(&out)["selected"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    ids.sort();
    let mut expected: Vec<String> = (0..12).map(|i| format!("r{i}")).collect();
    expected.sort();
    assert_eq!(ids, expected);
}

#[test]
fn curate_two_groups_is_stable_and_picks_one_per_group() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    write_table(&csv, &two_group_rows(), None);
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for out in [&a, &b] {
        let o = texcollect(&[
            "curate",
            s(&csv),
            "--n",
            "2",
            "--seed",
            "9",
            "--out",
            s(out),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let r = read_json(&a);
    assert_eq!(r["seed"], 9);
    let groups: Vec<usize> = r["selected_indices"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap() as usize % 2)
        .collect();
    assert_ne!(groups[0], groups[1]);
}

#[test]
fn curate_rejects_n_above_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    write_table(&csv, &two_group_rows(), None);
    assert!(!texcollect(&["curate", s(&csv), "--n", "13"])
        .status
        .success());
}

fn fisher_stdout(rows: &[[f64; FEATURE_DIM]]) -> String {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    write_table(&csv, rows, None);
    let o = texcollect(&["fisher", s(&csv)]);
    assert!(o.status.success());
    String::from_utf8(o.stdout).unwrap().trim().to_string()
}

#[test]
fn fisher_reports() {
    let mut a = [0.0; FEATURE_DIM];
    a[0] = 5.0;
    let mut b = [0.0; FEATURE_DIM];
    b[0] = 3.0;
    assert_eq!(fisher_stdout(&[a]), "0.000000");
    assert_eq!(fisher_stdout(&[a, a, a]), "0.000000");
    // soergel(a, b) = 2 / 5
    assert_eq!(fisher_stdout(&[a, b]), "0.200000");
}

#[test]
fn fisher_rejects_malformed_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    std::fs::write(&csv, "id,x\na,1\n").unwrap();
    assert!(!texcollect(&["fisher", s(&csv)]).status.success());
}

fn classify(rows: &[[f64; FEATURE_DIM]], labels: &[&str], extra: &[&str]) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    let out = dir.path().join("r.json");
    write_table(&csv, rows, Some(labels));
    let mut args = vec!["classify", s(&csv), "--out", s(&out)];
    args.extend_from_slice(extra);
    let o = texcollect(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("NN  "));
    read_json(&out)
}

#[test]
fn classify_separable_set_is_perfect_for_every_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, name) in ["a", "b", "c"].iter().enumerate() {
        for _ in 0..10 {
            rows.push(std::array::from_fn(|d| {
                (if d % 3 == c { 1.0 } else { 0.0 }) + rng.random_range(0.0..0.05)
            }));
            labels.push(*name);
        }
    }
    for metric in ["euclidean", "soergel"] {
        let reports = classify(&rows, &labels, &["--metric", metric]);
        let reports = reports.as_array().unwrap();
        assert_eq!(reports.len(), 3);
        for r in reports {
            assert_eq!(r["mean"], 1.0);
            assert_eq!(r["metric"], metric);
        }
    }
}

#[test]
fn classify_single_class_and_trial_count() {
    let rows: Vec<[f64; FEATURE_DIM]> = (0..6).map(|i| [i as f64; FEATURE_DIM]).collect();
    let labels = ["only"; 6];
    let reports = classify(&rows, &labels, &["--k", "1", "--trials", "10"]);
    let r = &reports[0];
    assert_eq!(r["k"], 1);
    assert_eq!(r["accuracies"].as_array().unwrap().len(), 10);
    assert_eq!(r["mean"], 1.0);
}

#[test]
fn classify_needs_label_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    write_table(&csv, &two_group_rows(), None);
    let o = texcollect(&["classify", s(&csv)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("label"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    std::fs::create_dir(&input).unwrap();
    noise(100, 100, 4).write_pgm(input.join("x.pgm")).unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"window": 50, "stride": 50}"#).unwrap();
    let out = dir.path().join("out");
    let o = texcollect(&[
        "crop",
        s(&input),
        "--config",
        s(&cfg),
        "--stride",
        "25",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["window"], 50);
    assert_eq!(m["sources"][0]["windows"].as_array().unwrap().len(), 9);
}
