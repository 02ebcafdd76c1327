//! Batch orchestration behind the command-line tool.
//!
//! Map files are paired by file stem across a heatmap directory and a
//! gradient-map directory. Stems follow `<image_id>__<label>`, so one
//! image can carry maps for several disease labels. Bad inputs become
//! failure rows and never abort a batch. Outputs are sorted by
//! `(image_id, label)` so they do not depend on the worker count.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::boxgen::{BoundingBox, BoxGeneration};
use crate::error::{Error, Result};
use crate::eval::{accuracy_table, pair_scores, scale_box, validate_thresholds, EvalTable, GroundTruthRecord, PredictionRecord, DEFAULT_THRESHOLDS};
use crate::io::records::{self, FailureRow};
use crate::io::{load_map, overlay, save_map, MapFormat};
use crate::map::{FusionParams, SaliencyMap};

/// Separates image id from label in map file stems.
pub const STEM_SEPARATOR: &str = "__";

pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const FAILURES_FILE: &str = "failures.csv";
pub const EVAL_FILE: &str = "eval.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const OVERLAY_DIR: &str = "overlays";

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: FusionParams,
    pub heat_dir: PathBuf,
    pub grad_dir: PathBuf,
    pub annotations: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub thresholds: Vec<f64>,
    pub workers: usize,
    pub overlays: bool,
}

impl RunConfig {
    pub fn new(heat_dir: impl Into<PathBuf>, grad_dir: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            params: FusionParams::default(),
            heat_dir: heat_dir.into(),
            grad_dir: grad_dir.into(),
            annotations: None,
            out_dir: out_dir.into(),
            thresholds: DEFAULT_THRESHOLDS.to_vec(),
            workers: 1,
            overlays: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        validate_thresholds(&self.thresholds)?;
        if self.workers == 0 {
            return Err(Error::param("worker count must be at least 1"));
        }
        Ok(())
    }
}

/// Splits a file stem into `(image_id, label)`.
pub fn parse_stem(stem: &str) -> Option<(&str, &str)> {
    let (id, label) = stem.rsplit_once(STEM_SEPARATOR)?;
    (!id.is_empty() && !label.is_empty()).then_some((id, label))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapPair {
    pub image_id: String,
    pub label: String,
    pub heat: PathBuf,
    pub grad: PathBuf,
}

fn list_maps(dir: &Path) -> Result<BTreeMap<String, Vec<PathBuf>>> {
    let mut out: BTreeMap<String, Vec<PathBuf>> = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_file() || MapFormat::from_path(&path).is_err() {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            out.entry(stem.to_string()).or_default().push(path);
        }
    }
    Ok(out)
}

fn failure(stem: &str, error: impl Into<String>) -> FailureRow {
    let (image_id, label) = parse_stem(stem).unwrap_or((stem, ""));
    FailureRow {
        image_id: image_id.to_string(),
        label: label.to_string(),
        error: error.into(),
    }
}

/// Pairs heatmaps with gradient maps by stem; unmatched or ambiguous
/// files are reported as failures.
pub fn discover_pairs(heat_dir: &Path, grad_dir: &Path) -> Result<(Vec<MapPair>, Vec<FailureRow>)> {
    let heats = list_maps(heat_dir)?;
    let grads = list_maps(grad_dir)?;
    let stems: BTreeSet<&String> = heats.keys().chain(grads.keys()).collect();

    let mut pairs = Vec::new();
    let mut failures = Vec::new();
    for stem in stems {
        let h = heats.get(stem).map(Vec::as_slice).unwrap_or(&[]);
        let g = grads.get(stem).map(Vec::as_slice).unwrap_or(&[]);
        let Some((image_id, label)) = parse_stem(stem) else {
            failures.push(failure(
                stem,
                format!("file stem '{stem}' is not <image_id>{STEM_SEPARATOR}<label>"),
            ));
            continue;
        };
        match (h, g) {
            ([heat], [grad]) => pairs.push(MapPair {
                image_id: image_id.to_string(),
                label: label.to_string(),
                heat: heat.clone(),
                grad: grad.clone(),
            }),
            ([], _) => failures.push(failure(stem, "missing heatmap")),
            (_, []) => failures.push(failure(stem, "missing gradient map")),
            _ => failures.push(failure(stem, "several map files share this stem")),
        }
    }
    Ok((pairs, failures))
}

#[derive(Debug, Clone)]
pub struct LoadedPair {
    pub image_id: String,
    pub label: String,
    pub heat: SaliencyMap,
    pub grad: SaliencyMap,
}

impl LoadedPair {
    fn stem(&self) -> String {
        format!("{}{STEM_SEPARATOR}{}", self.image_id, self.label)
    }
}

fn load_pair(pair: &MapPair) -> std::result::Result<LoadedPair, FailureRow> {
    let fail = |e: Error| FailureRow {
        image_id: pair.image_id.clone(),
        label: pair.label.clone(),
        error: e.to_string(),
    };
    let heat = load_map(&pair.heat).map_err(fail)?;
    let grad = load_map(&pair.grad).map_err(fail)?;
    if heat.dims() != grad.dims() {
        let ((hw, hh), (gw, gh)) = (heat.dims(), grad.dims());
        return Err(fail(Error::DimensionMismatch {
            left_w: hw,
            left_h: hh,
            right_w: gw,
            right_h: gh,
        }));
    }
    Ok(LoadedPair {
        image_id: pair.image_id.clone(),
        label: pair.label.clone(),
        heat,
        grad,
    })
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::param(format!("cannot start {workers} workers: {e}")))
}

/// Loads every pair, moving unreadable or mismatched ones into `failures`.
pub fn load_pairs(pairs: &[MapPair], workers: usize, failures: &mut Vec<FailureRow>) -> Result<Vec<LoadedPair>> {
    let results: Vec<_> = build_pool(workers)?.install(|| pairs.par_iter().map(load_pair).collect());
    let mut loaded = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(p) => loaded.push(p),
            Err(f) => failures.push(f),
        }
    }
    Ok(loaded)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchOutcome {
    pub predictions: Vec<PredictionRecord>,
    pub failures: Vec<FailureRow>,
    pub warnings: Vec<String>,
}

impl BatchOutcome {
    fn normalize(&mut self) {
        self.predictions
            .sort_by(|a, b| (&a.image_id, &a.label).cmp(&(&b.image_id, &b.label)));
        self.failures.sort();
    }
}

type Annotated<'a> = HashMap<(&'a str, &'a str), &'a GroundTruthRecord>;

fn index_truth(truth: &[GroundTruthRecord]) -> Annotated<'_> {
    truth
        .iter()
        .map(|g| ((g.image_id.as_str(), g.label.as_str()), g))
        .collect()
}

/// Runs box generation over already loaded maps. When `overlay_dir` is
/// set, one PNG per prediction is written there.
pub fn generate_predictions(
    loaded: &[LoadedPair],
    params: &FusionParams,
    workers: usize,
    overlay_dir: Option<&Path>,
    truth: &[GroundTruthRecord],
) -> Result<BatchOutcome> {
    params.validate()?;
    let annotated = index_truth(truth);
    let results: Vec<Result<std::result::Result<PredictionRecord, FailureRow>>> = build_pool(workers)?.install(|| {
        loaded
            .par_iter()
            .map(|pair| {
                let gen = match BoxGeneration::run(&pair.heat, &pair.grad, params) {
                    Ok(g) => g,
                    Err(e) => {
                        return Ok(Err(FailureRow {
                            image_id: pair.image_id.clone(),
                            label: pair.label.clone(),
                            error: e.to_string(),
                        }))
                    }
                };
                let map_dims = pair.heat.dims();
                if let Some(dir) = overlay_dir {
                    let gt = annotated
                        .get(&(pair.image_id.as_str(), pair.label.as_str()))
                        .and_then(|g| scale_box(&g.bbox, g.image_dims, map_dims).ok());
                    let img = overlay::render(&gen.fused, Some(&gen.selected), gt.as_ref());
                    overlay::save_png(&img, dir.join(format!("{}.png", pair.stem())))?;
                }
                Ok(Ok(PredictionRecord {
                    image_id: pair.image_id.clone(),
                    label: pair.label.clone(),
                    bbox: gen.selected,
                    map_dims,
                }))
            })
            .collect()
    });

    let mut outcome = BatchOutcome::default();
    for r in results {
        match r? {
            Ok(p) => outcome.predictions.push(p),
            Err(f) => outcome.failures.push(f),
        }
    }
    outcome.normalize();
    Ok(outcome)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn load_truth(config: &RunConfig) -> Result<Vec<GroundTruthRecord>> {
    match &config.annotations {
        Some(p) => records::read_annotations(p),
        None => Ok(Vec::new()),
    }
}

/// Generates one box per `(image, label)` map pair and writes
/// `predictions.csv` and `failures.csv` (plus overlays when enabled)
/// into the output directory.
pub fn cmd_boxgen(config: &RunConfig) -> Result<BatchOutcome> {
    config.validate()?;
    ensure_dir(&config.out_dir)?;
    let truth = load_truth(config)?;
    let (pairs, mut failures) = discover_pairs(&config.heat_dir, &config.grad_dir)?;
    let loaded = load_pairs(&pairs, config.workers, &mut failures)?;

    let overlay_dir = config.overlays.then(|| config.out_dir.join(OVERLAY_DIR));
    if let Some(dir) = &overlay_dir {
        ensure_dir(dir)?;
    }
    let mut outcome = generate_predictions(&loaded, &config.params, config.workers, overlay_dir.as_deref(), &truth)?;
    outcome.failures.extend(failures);
    outcome.normalize();
    if pairs.is_empty() {
        outcome.warnings.push(format!(
            "no map pairs found in {} and {}",
            config.heat_dir.display(),
            config.grad_dir.display()
        ));
    }

    records::write_predictions(config.out_dir.join(PREDICTIONS_FILE), &outcome.predictions)?;
    records::write_failures(config.out_dir.join(FAILURES_FILE), &outcome.failures)?;
    Ok(outcome)
}

/// Sorted distinct labels present in the annotations.
pub fn annotation_labels(truth: &[GroundTruthRecord]) -> Vec<String> {
    truth
        .iter()
        .map(|g| g.label.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub table: EvalTable,
    pub warnings: Vec<String>,
}

/// Scores predictions against annotations. Predictions with labels that
/// never occur in the annotations are dropped with a warning.
pub fn evaluate(preds: &[PredictionRecord], truth: &[GroundTruthRecord], thresholds: &[f64]) -> Result<EvalReport> {
    let labels = annotation_labels(truth);
    let mut warnings = Vec::new();
    let unknown: BTreeSet<&str> = preds
        .iter()
        .filter(|p| !labels.contains(&p.label))
        .map(|p| p.label.as_str())
        .collect();
    for label in &unknown {
        warnings.push(format!("predictions for unknown label '{label}' excluded"));
    }
    let kept: Vec<PredictionRecord> = preds
        .iter()
        .filter(|p| !unknown.contains(p.label.as_str()))
        .cloned()
        .collect();
    let table = accuracy_table(&kept, truth, thresholds, &labels)?;
    Ok(EvalReport { table, warnings })
}

fn cell_text(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |a| format!("{a:.2}"))
}

/// Aligned plain-text rendering: one block per threshold, one row per
/// label, then the mean.
pub fn render_table(table: &EvalTable) -> String {
    let label_w = table
        .labels
        .iter()
        .map(String::len)
        .chain(["Label".len(), "Mean".len()])
        .max()
        .unwrap_or(5);
    let mut out = String::new();
    let rule = "-".repeat(8 + label_w + 2 + 8);
    let _ = writeln!(out, "{:<8}{:<label_w$}  {:>8}", "T(IoU)", "Label", "Accuracy");
    for (ti, t) in table.thresholds.iter().enumerate() {
        let _ = writeln!(out, "{rule}");
        for (li, label) in table.labels.iter().enumerate() {
            let first = if li == 0 { format!("{t}") } else { String::new() };
            let _ = writeln!(out, "{first:<8}{label:<label_w$}  {:>8}", cell_text(table.accuracy[ti][li]));
        }
        let first = if table.labels.is_empty() { format!("{t}") } else { String::new() };
        let _ = writeln!(out, "{first:<8}{:<label_w$}  {:>8}", "Mean", cell_text(table.mean[ti]));
    }
    let _ = writeln!(out, "{rule}");
    out
}

#[derive(Debug, Serialize)]
struct EvalCsvRow<'a> {
    threshold: f64,
    label: &'a str,
    accuracy: String,
    support: usize,
}

pub fn write_table_csv(table: &EvalTable, path: impl AsRef<Path>) -> Result<()> {
    let total: usize = table.support.iter().sum();
    let mut rows = Vec::new();
    for (ti, &threshold) in table.thresholds.iter().enumerate() {
        for (li, label) in table.labels.iter().enumerate() {
            rows.push(EvalCsvRow {
                threshold,
                label,
                accuracy: cell_text(table.accuracy[ti][li]),
                support: table.support[li],
            });
        }
        rows.push(EvalCsvRow {
            threshold,
            label: "Mean",
            accuracy: cell_text(table.mean[ti]),
            support: total,
        });
    }
    records::write_rows(path.as_ref(), &rows, &["threshold", "label", "accuracy", "support"])
}

/// Reads both CSVs, builds the table and, when `out_dir` is given,
/// writes `eval.csv` there.
pub fn cmd_eval(predictions: &Path, annotations: &Path, thresholds: &[f64], out_dir: Option<&Path>) -> Result<EvalReport> {
    validate_thresholds(thresholds)?;
    let preds = records::read_predictions(predictions)?;
    let truth = records::read_annotations(annotations)?;
    let report = evaluate(&preds, &truth, thresholds)?;
    if let Some(dir) = out_dir {
        ensure_dir(dir)?;
        write_table_csv(&report.table, dir.join(EVAL_FILE))?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub threshold_frac: f64,
    /// Mean of the per-threshold mean accuracies.
    pub mean_accuracy: f64,
    /// Mean IoU over annotated pairs; undetected pairs score 0.
    pub mean_iou: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Index into `rows` of the highest mean IoU (first on ties).
    pub best: usize,
}

/// Evaluates every `(t, threshold_frac)` combination in grid order
/// (t outer, fraction inner) and writes `sweep.csv`.
pub fn cmd_sweep(config: &RunConfig, t_values: &[f64], frac_values: &[f64]) -> Result<SweepReport> {
    if t_values.is_empty() || frac_values.is_empty() {
        return Err(Error::param("sweep grid is empty"));
    }
    config.validate()?;
    for &t in t_values {
        FusionParams { t, ..config.params }.validate()?;
    }
    for &f in frac_values {
        FusionParams { threshold_frac: f, ..config.params }.validate()?;
    }
    let annotations = config
        .annotations
        .as_ref()
        .ok_or_else(|| Error::param("sweep needs an annotation file"))?;
    let truth = records::read_annotations(annotations)?;
    if truth.is_empty() {
        return Err(Error::InvalidRecord(format!("{} has no annotations", annotations.display())));
    }
    ensure_dir(&config.out_dir)?;

    let (pairs, mut failures) = discover_pairs(&config.heat_dir, &config.grad_dir)?;
    let loaded = load_pairs(&pairs, config.workers, &mut failures)?;

    let mut rows = Vec::with_capacity(t_values.len() * frac_values.len());
    for &t in t_values {
        for &threshold_frac in frac_values {
            let params = FusionParams {
                t,
                threshold_frac,
                ..config.params
            };
            let outcome = generate_predictions(&loaded, &params, config.workers, None, &truth)?;
            let report = evaluate(&outcome.predictions, &truth, &config.thresholds)?;
            let scores = pair_scores(&outcome.predictions, &truth)?;
            let mean_iou = scores.iter().map(|s| s.iou.unwrap_or(0.0)).sum::<f64>() / scores.len() as f64;
            rows.push(SweepRow {
                t,
                threshold_frac,
                mean_accuracy: report.table.overall_mean().unwrap_or(0.0),
                mean_iou,
            });
        }
    }
    let best = rows
        .iter()
        .enumerate()
        .fold(0, |best, (i, r)| if r.mean_iou > rows[best].mean_iou { i } else { best });
    records::write_rows(
        &config.out_dir.join(SWEEP_FILE),
        &rows,
        &["t", "threshold_frac", "mean_accuracy", "mean_iou"],
    )?;
    Ok(SweepReport { rows, best })
}

/// Synthetic heatmap/gradient-map pair with known geometry.
///
/// The gradient map holds a textured elliptical lesion plus a thin bright
/// vertical line far from it; the heatmap is a coarse blocky bump over the
/// lesion only, so the line is not class-related.
#[derive(Debug, Clone)]
pub struct DemoFixture {
    pub heat: SaliencyMap,
    pub grad: SaliencyMap,
    /// Bounding box of the elliptical lesion.
    pub lesion: BoundingBox,
    /// Column holding the off-class line.
    pub edge_column: usize,
}

pub const DEMO_IMAGE_ID: &str = "demo-0001";
pub const DEMO_LABEL: &str = "Mass";

impl DemoFixture {
    pub const SIZE: usize = 128;

    pub fn new() -> Self {
        let n = Self::SIZE;
        let (cx, cy, ax, ay) = (64.0, 64.0, 24.0, 16.0);
        let edge_column = 12;
        let inside = |x: usize, y: usize| {
            let dx = (x as f64 + 0.5 - cx) / ax;
            let dy = (y as f64 + 0.5 - cy) / ay;
            dx * dx + dy * dy <= 1.0
        };
        // cheap deterministic speckle in [0, 1)
        let speckle = |x: usize, y: usize| {
            let h = (x as u64).wrapping_mul(73_856_093) ^ (y as u64).wrapping_mul(19_349_663);
            (h.wrapping_mul(2_654_435_761) % 1000) as f64 / 1000.0
        };
        let grad = SaliencyMap::from_fn(n, n, |x, y| {
            if inside(x, y) {
                let texture = 0.5 + 0.5 * (x as f64 * 0.7).sin() * (y as f64 * 0.5).cos();
                0.6 + 0.4 * texture
            } else if x == edge_column && (10..n - 10).contains(&y) {
                0.55
            } else {
                0.04 * speckle(x, y)
            }
        })
        .expect("fixture dimensions are valid");

        // Sampled on an 8-pixel grid, like an upsampled late-layer map.
        let sigma = 20.0;
        let heat = SaliencyMap::from_fn(n, n, |x, y| {
            let gx = (x / 8) as f64 * 8.0 + 4.0 - cx;
            let gy = (y / 8) as f64 * 8.0 + 4.0 - cy;
            (-(gx * gx + gy * gy) / (2.0 * sigma * sigma)).exp()
        })
        .expect("fixture dimensions are valid");

        Self {
            heat,
            grad,
            lesion: BoundingBox {
                x1: 40,
                y1: 48,
                x2: 88,
                y2: 80,
            },
            edge_column,
        }
    }

    pub fn truth(&self) -> GroundTruthRecord {
        GroundTruthRecord {
            image_id: DEMO_IMAGE_ID.to_string(),
            label: DEMO_LABEL.to_string(),
            bbox: self.lesion,
            image_dims: (Self::SIZE, Self::SIZE),
        }
    }

    /// Writes `heat/`, `grad/` and `annotations.csv` under `dir` and
    /// returns a config pointing at them.
    pub fn write(&self, dir: &Path) -> Result<RunConfig> {
        let heat_dir = dir.join("heat");
        let grad_dir = dir.join("grad");
        ensure_dir(&heat_dir)?;
        ensure_dir(&grad_dir)?;
        let name = format!("{DEMO_IMAGE_ID}{STEM_SEPARATOR}{DEMO_LABEL}.npy");
        save_map(&self.heat, heat_dir.join(&name))?;
        save_map(&self.grad, grad_dir.join(&name))?;
        let annotations = dir.join("annotations.csv");
        records::write_annotations(&annotations, &[self.truth()])?;
        let mut config = RunConfig::new(heat_dir, grad_dir, dir.join("out"));
        config.annotations = Some(annotations);
        Ok(config)
    }
}

impl Default for DemoFixture {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoReport {
    pub predicted: Option<BoundingBox>,
    pub lesion: BoundingBox,
    pub iou: f64,
    pub edge_excluded: bool,
    pub table: EvalTable,
}

impl DemoReport {
    pub const MIN_IOU: f64 = 0.5;

    pub fn passed(&self) -> bool {
        self.predicted.is_some() && self.iou >= Self::MIN_IOU && self.edge_excluded
    }
}

/// Writes the synthetic fixture under `dir`, runs box generation with
/// overlays and evaluation, and reports the achieved IoU.
pub fn cmd_demo(dir: &Path, params: &FusionParams) -> Result<DemoReport> {
    ensure_dir(dir)?;
    let fixture = DemoFixture::new();
    let mut config = fixture.write(dir)?;
    config.params = *params;
    config.overlays = true;
    let outcome = cmd_boxgen(&config)?;

    let truth = [fixture.truth()];
    let report = evaluate(&outcome.predictions, &truth, &config.thresholds)?;
    write_table_csv(&report.table, config.out_dir.join(EVAL_FILE))?;

    let predicted = outcome.predictions.first().map(|p| p.bbox);
    let iou = predicted.map_or(0.0, |b| crate::eval::iou(&b, &fixture.lesion));
    let edge_excluded = predicted.is_some_and(|b| !(b.x1..b.x2).contains(&fixture.edge_column));
    Ok(DemoReport {
        predicted,
        lesion: fixture.lesion,
        iou,
        edge_excluded,
        table: report.table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stems() {
        assert_eq!(parse_stem("00013118_008__Atelectasis"), Some(("00013118_008", "Atelectasis")));
        assert_eq!(parse_stem("a__b__Mass"), Some(("a__b", "Mass")));
        assert_eq!(parse_stem("plain"), None);
        assert_eq!(parse_stem("__Mass"), None);
    }

    #[test]
    fn fixture_lesion_matches_ellipse() {
        let f = DemoFixture::new();
        // every lesion pixel is above 0.6, everything else below 0.56
        let (mut x1, mut y1, mut x2, mut y2) = (usize::MAX, usize::MAX, 0, 0);
        for y in 0..DemoFixture::SIZE {
            for x in 0..DemoFixture::SIZE {
                if f.grad.get(x, y) >= 0.6 {
                    x1 = x1.min(x);
                    y1 = y1.min(y);
                    x2 = x2.max(x + 1);
                    y2 = y2.max(y + 1);
                }
            }
        }
        assert_eq!(BoundingBox { x1, y1, x2, y2 }, f.lesion);
    }

    #[test]
    fn demo_fixture_is_recovered() {
        let f = DemoFixture::new();
        let gen = BoxGeneration::run(&f.heat, &f.grad, &FusionParams::default()).unwrap();
        assert!((0..DemoFixture::SIZE).any(|y| gen.mask.get(f.edge_column, y)));
        let iou = crate::eval::iou(&gen.selected, &f.lesion);
        assert!(iou >= 0.5, "iou {iou} box {}", gen.selected);
        assert!(!(gen.selected.x1..gen.selected.x2).contains(&f.edge_column));
    }

    #[test]
    fn table_rendering() {
        let table = EvalTable {
            thresholds: vec![0.1, 0.2],
            labels: vec!["Cardiomegaly".into(), "Mass".into()],
            accuracy: vec![vec![Some(1.0), None], vec![Some(0.25), None]],
            mean: vec![Some(1.0), Some(0.25)],
            support: vec![4, 0],
        };
        let text = render_table(&table);
        assert!(text.contains("0.1     Cardiomegaly      1.00"), "{text}");
        assert!(text.contains("        Mass               n/a"), "{text}");
        assert!(text.contains("        Mean              0.25"), "{text}");
    }
}
