//! Subcommand implementations. Each returns an [`Outcome`] listing per-item
//! failures; the binary exits non-zero iff that list is non-empty.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use texcollect_core::classify::render_table;
use texcollect_core::image::crop_grid;
use texcollect_core::table::{self, FeatureManifest, FeatureTable};
use texcollect_core::{
    curate, evaluate, extract_features, fisher, fit_bounds, load_gray, normalize_all,
    AccuracyReport, CurationResult, FeatureVector, LabeledVector,
};
use walkdir::WalkDir;

use crate::config::RunConfig;

#[derive(Debug, Default, Clone, PartialEq)]
pub struct Outcome {
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn success(&self) -> bool {
        self.failures.is_empty()
    }
}

const IMAGE_EXTENSIONS: [&str; 2] = ["png", "pgm"];

/// Image files under `root`, as paths relative to it, in lexicographic order.
pub fn list_images(root: &Path) -> Result<Vec<PathBuf>> {
    if !root.is_dir() {
        bail!("{}: not a readable directory", root.display());
    }
    let mut out = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.with_context(|| format!("walking {}", root.display()))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let is_image = entry
            .path()
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if is_image {
            out.push(entry.path().strip_prefix(root)?.to_path_buf());
        }
    }
    out.sort();
    Ok(out)
}

/// Relative path with `/` separators, used as a row id.
fn id_of(rel: &Path) -> String {
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

#[derive(Debug, Serialize)]
pub struct CropManifest {
    pub window: usize,
    pub stride: usize,
    pub sources: Vec<CroppedSource>,
}

#[derive(Debug, Serialize)]
pub struct CroppedSource {
    pub source: String,
    pub width: usize,
    pub height: usize,
    pub windows: Vec<String>,
}

/// Crops every image under `input` into overlapping windows written as PGM
/// files `<stem>_r<row>_c<col>.pgm`, mirroring the input directory layout.
pub fn cmd_crop(input: &Path, output: &Path, cfg: &RunConfig) -> Result<Outcome> {
    let spec = cfg.crop()?;
    let images = list_images(input)?;
    let mut outcome = Outcome::default();
    if images.is_empty() {
        outcome
            .warnings
            .push(format!("{}: no PNG or PGM images found", input.display()));
    }
    std::fs::create_dir_all(output).with_context(|| format!("creating {}", output.display()))?;

    let results: Vec<Result<CroppedSource>> = images
        .par_iter()
        .map(|rel| -> Result<CroppedSource> {
            let img = load_gray(input.join(rel), cfg.levels)?;
            let grid =
                crop_grid(&img, spec).with_context(|| format!("{}", input.join(rel).display()))?;
            let parent = rel.parent().unwrap_or(Path::new(""));
            std::fs::create_dir_all(output.join(parent))?;
            let stem = rel.file_stem().unwrap_or_default().to_string_lossy();
            let mut windows = Vec::with_capacity(grid.len());
            for w in grid {
                let name = parent.join(format!("{stem}_r{}_c{}.pgm", w.row, w.col));
                w.image.write_pgm(output.join(&name))?;
                windows.push(id_of(&name));
            }
            Ok(CroppedSource {
                source: id_of(rel),
                width: img.width(),
                height: img.height(),
                windows,
            })
        })
        .collect();

    let mut sources = Vec::new();
    for r in results {
        match r {
            Ok(s) => sources.push(s),
            Err(e) => outcome.failures.push(format!("{e:#}")),
        }
    }
    let manifest = CropManifest {
        window: spec.window,
        stride: spec.stride,
        sources,
    };
    table::write_json(output.join("manifest.json"), &manifest)?;
    Ok(outcome)
}

/// Path of the JSON manifest stored next to a feature table.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Extracts the descriptor of every image under `input` into `out_csv`.
///
/// With `labeled`, each image's class is the first directory below `input`
/// and is written to a trailing `label` column.
pub fn cmd_extract(
    input: &Path,
    out_csv: &Path,
    cfg: &RunConfig,
    labeled: bool,
) -> Result<Outcome> {
    let features = cfg.features()?;
    let images = list_images(input)?;
    let mut outcome = Outcome::default();
    if images.is_empty() {
        outcome
            .warnings
            .push(format!("{}: no PNG or PGM images found", input.display()));
    }

    let results: Vec<Result<(FeatureVector, Option<String>)>> = images
        .par_iter()
        .map(|rel| {
            let path = input.join(rel);
            let label = if labeled {
                let mut parts = rel.components();
                match (parts.next(), parts.next()) {
                    (Some(class), Some(_)) => {
                        Some(class.as_os_str().to_string_lossy().into_owned())
                    }
                    _ => bail!("{}: not inside a class directory", path.display()),
                }
            } else {
                None
            };
            let img = load_gray(&path, features.levels)?;
            let v = extract_features(&img, id_of(rel), &features)
                .with_context(|| format!("{}", path.display()))?;
            Ok((v, label))
        })
        .collect();

    let mut table = FeatureTable {
        vectors: Vec::new(),
        labels: labeled.then(Vec::new),
    };
    for r in results {
        match r {
            Ok((v, label)) => {
                table.vectors.push(v);
                if let (Some(labels), Some(label)) = (table.labels.as_mut(), label) {
                    labels.push(label);
                }
            }
            Err(e) => outcome.failures.push(format!("{e:#}")),
        }
    }
    if let Some(parent) = out_csv.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    table::write_csv_file(out_csv, &table)?;
    let manifest = FeatureManifest {
        config: features,
        rows: table.len(),
        bounds: fit_bounds(&table.vectors).ok(),
    };
    table::write_json(manifest_path(out_csv), &manifest)?;
    Ok(outcome)
}

fn normalized_rows(csv: &Path) -> Result<FeatureTable> {
    let mut t = table::read_csv_file(csv)?;
    if !t.is_empty() {
        let bounds = fit_bounds(&t.vectors)?;
        t.vectors = normalize_all(&t.vectors, &bounds);
    }
    Ok(t)
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(path) => table::write_json(path, value)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut stdout, value)?;
            writeln!(stdout)?;
        }
    }
    Ok(())
}

/// Normalizes the table with its own bounds and selects `n` diverse rows.
pub fn run_curate(csv: &Path, cfg: &RunConfig) -> Result<CurationResult> {
    let pool = normalized_rows(csv)?;
    let n = cfg.n.context("--n is required")?;
    Ok(curate(&pool.vectors, n, cfg.seed, cfg.max_iter)?)
}

pub fn cmd_curate(csv: &Path, cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let result = run_curate(csv, cfg)?;
    emit_json(out, &result)?;
    let mut outcome = Outcome::default();
    if !result.converged {
        outcome.warnings.push(format!(
            "assignments still changing after {} iterations",
            result.iterations
        ));
    }
    Ok(outcome)
}

/// Fisher spread of all rows, optionally after min-max normalization with the
/// table's own bounds.
pub fn run_fisher(csv: &Path, normalize: bool) -> Result<f64> {
    let rows = if normalize {
        normalized_rows(csv)?
    } else {
        table::read_csv_file(csv)?
    };
    Ok(fisher(&rows.vectors)?)
}

pub fn cmd_fisher(csv: &Path, normalize: bool) -> Result<Outcome> {
    println!("{:.6}", run_fisher(csv, normalize)?);
    Ok(Outcome::default())
}

pub fn run_classify(csv: &Path, cfg: &RunConfig) -> Result<Vec<AccuracyReport>> {
    cfg.validate_evaluation()?;
    let t = normalized_rows(csv)?;
    let Some(labels) = t.labels else {
        bail!("{}: missing `label` column", csv.display());
    };
    let data: Vec<LabeledVector> = t
        .vectors
        .into_iter()
        .zip(labels)
        .map(|(v, l)| LabeledVector::new(v, l))
        .collect();
    cfg.k
        .iter()
        .map(|&k| {
            evaluate(
                &data,
                k,
                cfg.trials,
                cfg.train_fraction,
                cfg.seed,
                cfg.metric,
            )
            .map_err(Into::into)
        })
        .collect()
}

pub fn cmd_classify(csv: &Path, cfg: &RunConfig, out: Option<&Path>) -> Result<Outcome> {
    let reports = run_classify(csv, cfg)?;
    print!(
        "{}",
        render_table(&format!("proposed/{}", cfg.metric.name()), &reports)
    );
    if let Some(path) = out {
        table::write_json(path, &reports)?;
    } else {
        emit_json(None, &reports)?;
    }
    Ok(Outcome::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use texcollect_core::GrayImage;

    fn write_noise(path: &Path, w: usize, h: usize, seed: u64) {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let img = GrayImage::from_fn(w, h, 256, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 56) as u16
        })
        .unwrap();
        img.write_pgm(path).unwrap();
    }

    #[test]
    fn listing_is_sorted_and_filters_extensions() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::create_dir(dir.path().join("b")).unwrap();
        for name in ["z.pgm", "a.PNG", "notes.txt", "b/c.pgm"] {
            std::fs::write(dir.path().join(name), b"").unwrap();
        }
        let files = list_images(dir.path()).unwrap();
        let ids: Vec<String> = files.iter().map(|p| id_of(p)).collect();
        assert_eq!(ids, vec!["a.PNG", "b/c.pgm", "z.pgm"]);
    }

    #[test]
    fn extract_reports_small_images_and_continues() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in");
        std::fs::create_dir(&input).unwrap();
        write_noise(&input.join("a.pgm"), 16, 16, 1);
        write_noise(&input.join("b.pgm"), 2, 2, 2);
        write_noise(&input.join("c.pgm"), 16, 12, 3);
        let csv = dir.path().join("f.csv");
        let outcome = cmd_extract(&input, &csv, &RunConfig::default(), false).unwrap();
        assert_eq!(outcome.failures.len(), 1);
        assert!(outcome.failures[0].contains("b.pgm"));
        let t = table::read_csv_file(&csv).unwrap();
        let ids: Vec<_> = t.vectors.iter().map(|v| v.id.as_str()).collect();
        assert_eq!(ids, vec!["a.pgm", "c.pgm"]);
        let m: FeatureManifest = table::read_json(manifest_path(&csv)).unwrap();
        assert_eq!(m.rows, 2);
        assert!(m.bounds.is_some());
    }

    #[test]
    fn labeled_extract_needs_class_directories() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in");
        std::fs::create_dir_all(input.join("bark")).unwrap();
        write_noise(&input.join("bark/1.pgm"), 8, 8, 1);
        write_noise(&input.join("loose.pgm"), 8, 8, 2);
        let csv = dir.path().join("f.csv");
        let outcome = cmd_extract(&input, &csv, &RunConfig::default(), true).unwrap();
        assert_eq!(outcome.failures.len(), 1);
        assert!(outcome.failures[0].contains("loose.pgm"));
        let t = table::read_csv_file(&csv).unwrap();
        assert_eq!(t.labels, Some(vec!["bark".to_string()]));
    }

    #[test]
    fn classify_requires_labels() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("f.csv");
        table::write_csv_file(
            &csv,
            &FeatureTable::unlabeled(vec![FeatureVector::new("a", [0.0; 18])]),
        )
        .unwrap();
        let err = run_classify(&csv, &RunConfig::default()).unwrap_err();
        assert!(err.to_string().contains("label"));
    }

    #[test]
    fn curate_requires_n() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("f.csv");
        table::write_csv_file(
            &csv,
            &FeatureTable::unlabeled(vec![FeatureVector::new("a", [0.0; 18])]),
        )
        .unwrap();
        assert!(run_curate(&csv, &RunConfig::default()).is_err());
        let cfg = RunConfig {
            n: Some(2),
            ..RunConfig::default()
        };
        assert!(run_curate(&csv, &cfg).is_err());
    }
}
