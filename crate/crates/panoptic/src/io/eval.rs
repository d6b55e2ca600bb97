//! Directory-level evaluation: pair prediction and ground-truth rasters
//! by file stem, accumulate per-image stats (optionally across worker
//! threads), and reduce them in stem order so the result is independent
//! of the job count and of directory listing order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::catalog::ClassCatalog;
use crate::error::{Error, Result};
use crate::io::panoptic_png::read_panoptic;
use crate::metrics::{self, MetricsReport, PqStats};

fn png_stems(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    if !dir.is_dir() {
        return Err(Error::MissingInput(dir.to_path_buf()));
    }
    let mut out = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for entry in entries {
        let entry = entry.map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some("png") {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_string(), path);
            }
        }
    }
    Ok(out)
}

/// Stem-paired (pred, gt) raster paths, sorted by stem. A stem present on
/// only one side is a validation error rather than a silent skip.
pub fn pair_by_stem(pred_dir: &Path, gt_dir: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    let pred = png_stems(pred_dir)?;
    let mut gt = png_stems(gt_dir)?;
    let mut pairs = Vec::with_capacity(pred.len());
    for (stem, pred_path) in pred {
        match gt.remove(&stem) {
            Some(gt_path) => pairs.push((stem, pred_path, gt_path)),
            None => return Err(Error::MissingCounterpart(stem)),
        }
    }
    if let Some((stem, _)) = gt.into_iter().next() {
        return Err(Error::MissingCounterpart(stem));
    }
    Ok(pairs)
}

fn accumulate_pair(
    pred_path: &Path,
    gt_path: &Path,
    catalog: &ClassCatalog,
) -> Result<PqStats> {
    let pred = read_panoptic(pred_path)?;
    let gt = read_panoptic(gt_path)?;
    pred.validate_kinds(catalog)?;
    gt.validate_kinds(catalog)?;
    metrics::accumulate(&pred, &gt, catalog)
}

/// Evaluates a directory pair and reports dataset metrics.
///
/// `jobs` limits the worker threads used for per-image accumulation;
/// `None` uses the default pool. Per-image stats are merged sequentially
/// in stem order, so the report is byte-stable for any job count.
pub fn evaluate_directories(
    pred_dir: &Path,
    gt_dir: &Path,
    catalog: &ClassCatalog,
    jobs: Option<usize>,
) -> Result<MetricsReport> {
    let pairs = pair_by_stem(pred_dir, gt_dir)?;
    let per_image = accumulate_all(&pairs, catalog, jobs)?;
    let mut total = PqStats::new();
    for stats in &per_image {
        total = metrics::merge_stats(&total, stats);
    }
    metrics::report(&total, catalog)
}

#[cfg(feature = "parallel")]
fn accumulate_all(
    pairs: &[(String, PathBuf, PathBuf)],
    catalog: &ClassCatalog,
    jobs: Option<usize>,
) -> Result<Vec<PqStats>> {
    use rayon::prelude::*;
    let work = || {
        pairs
            .par_iter()
            .map(|(_, pred, gt)| accumulate_pair(pred, gt, catalog))
            .collect::<Result<Vec<_>>>()
    };
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            pool.install(work)
        }
        None => work(),
    }
}

#[cfg(not(feature = "parallel"))]
fn accumulate_all(
    pairs: &[(String, PathBuf, PathBuf)],
    catalog: &ClassCatalog,
    _jobs: Option<usize>,
) -> Result<Vec<PqStats>> {
    pairs
        .iter()
        .map(|(_, pred, gt)| accumulate_pair(pred, gt, catalog))
        .collect()
}

/// Serializes a report with the fixed key order
/// (pq, sq, rq, pq_things, pq_stuff, per_class).
pub fn write_metrics(report: &MetricsReport, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(report).expect("metrics serialization");
    std::fs::write(path, json + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
