//! Panoptic Quality evaluation: IoU > 0.5 segment matching, per-class
//! PQ/SQ/RQ, things/stuff aggregation, and associative stat merging so
//! datasets can be evaluated in parallel and reduced in any tree order.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::catalog::{ClassCatalog, ClassKind};
use crate::error::{Error, Result};
use crate::par;
use crate::segment::{PanopticMap, SegmentId, SegmentInfo};

/// Per-class accumulators. Counts are integers and the IoU sum is kept in
/// double precision, so merging is exact.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassStats {
    pub iou_sum: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

/// Accumulated matching statistics, keyed by class id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PqStats(pub BTreeMap<u32, ClassStats>);

impl PqStats {
    pub fn new() -> Self {
        Self::default()
    }

    fn entry(&mut self, class_id: u32) -> &mut ClassStats {
        self.0.entry(class_id).or_default()
    }
}

/// One matched pred/gt segment pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentMatch {
    pub pred: SegmentInfo,
    pub gt: SegmentInfo,
    pub iou: f64,
}

/// Output of [`match_segments`].
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub matches: Vec<SegmentMatch>,
    pub unmatched_pred: Vec<SegmentInfo>,
    pub unmatched_gt: Vec<SegmentInfo>,
}

/// Pixel-level overlap table between two maps.
struct OverlapTable {
    /// (pred id, gt id) -> shared pixel count. Includes void on either side.
    intersections: HashMap<(u32, u32), u64>,
}

fn build_overlaps(pred: &PanopticMap, gt: &PanopticMap) -> Result<OverlapTable> {
    if pred.height() != gt.height() || pred.width() != gt.width() {
        return Err(Error::DimensionMismatch {
            expected_h: gt.height(),
            expected_w: gt.width(),
            got_h: pred.height(),
            got_w: pred.width(),
        });
    }
    let gt_ids = gt.ids();
    let intersections = par::fold_chunks(
        pred.ids(),
        8192,
        HashMap::<(u32, u32), u64>::new,
        |mut acc, chunk_idx, chunk| {
            let base = chunk_idx * 8192;
            for (j, &pred_id) in chunk.iter().enumerate() {
                let key = (pred_id.0, gt_ids[base + j].0);
                *acc.entry(key).or_insert(0) += 1;
            }
            acc
        },
        |mut a, b| {
            for (k, n) in b {
                *a.entry(k).or_insert(0) += n;
            }
            a
        },
    );
    Ok(OverlapTable { intersections })
}

impl OverlapTable {
    /// Pixels of each pred segment that fall on gt void.
    fn pred_void_overlap(&self) -> HashMap<u32, u64> {
        let mut out = HashMap::new();
        for (&(pred_id, gt_id), &n) in &self.intersections {
            if gt_id == SegmentId::VOID.0 && pred_id != SegmentId::VOID.0 {
                out.insert(pred_id, n);
            }
        }
        out
    }
}

fn check_classes(map: &PanopticMap, catalog: &ClassCatalog) -> Result<()> {
    for seg in map.segments() {
        if !catalog.contains(seg.class_id) {
            return Err(Error::UnknownClass(seg.class_id));
        }
    }
    Ok(())
}

/// Matches pred and gt segments of the same class at IoU > 0.5.
///
/// Ground-truth void pixels are excluded from the pred side of the IoU
/// denominator. The > 0.5 rule makes matches unique, so no assignment
/// search is needed; remaining segments are reported unmatched.
pub fn match_segments(
    pred: &PanopticMap,
    gt: &PanopticMap,
    catalog: &ClassCatalog,
) -> Result<MatchResult> {
    check_classes(pred, catalog)?;
    check_classes(gt, catalog)?;
    let table = build_overlaps(pred, gt)?;
    Ok(match_with_table(pred, gt, &table))
}

fn match_with_table(pred: &PanopticMap, gt: &PanopticMap, table: &OverlapTable) -> MatchResult {
    let void_overlap = table.pred_void_overlap();

    let pred_by_id: HashMap<u32, &SegmentInfo> =
        pred.segments().iter().map(|s| (s.id.0, s)).collect();
    let gt_by_id: HashMap<u32, &SegmentInfo> = gt.segments().iter().map(|s| (s.id.0, s)).collect();

    let mut matches = Vec::new();
    for (&(pred_id, gt_id), &inter) in &table.intersections {
        if pred_id == SegmentId::VOID.0 || gt_id == SegmentId::VOID.0 {
            continue;
        }
        let pred_seg = pred_by_id[&pred_id];
        let gt_seg = gt_by_id[&gt_id];
        if pred_seg.class_id != gt_seg.class_id {
            continue;
        }
        let pred_eff = pred_seg.area - void_overlap.get(&pred_id).copied().unwrap_or(0);
        let union = pred_eff + gt_seg.area - inter;
        let iou = inter as f64 / union as f64;
        if iou > 0.5 {
            matches.push(SegmentMatch {
                pred: *pred_seg,
                gt: *gt_seg,
                iou,
            });
        }
    }
    matches.sort_by_key(|m| (m.pred.id, m.gt.id));

    let matched_pred: std::collections::HashSet<u32> =
        matches.iter().map(|m| m.pred.id.0).collect();
    let matched_gt: std::collections::HashSet<u32> = matches.iter().map(|m| m.gt.id.0).collect();
    let unmatched_pred = pred
        .segments()
        .iter()
        .filter(|s| !matched_pred.contains(&s.id.0))
        .copied()
        .collect();
    let unmatched_gt = gt
        .segments()
        .iter()
        .filter(|s| !matched_gt.contains(&s.id.0))
        .copied()
        .collect();
    MatchResult {
        matches,
        unmatched_pred,
        unmatched_gt,
    }
}

/// Accumulates one image pair into per-class statistics.
///
/// Unmatched pred segments more than half covered by gt void are ignored
/// rather than counted as false positives.
pub fn accumulate(pred: &PanopticMap, gt: &PanopticMap, catalog: &ClassCatalog) -> Result<PqStats> {
    check_classes(pred, catalog)?;
    check_classes(gt, catalog)?;
    let table = build_overlaps(pred, gt)?;
    let void_overlap = table.pred_void_overlap();
    let result = match_with_table(pred, gt, &table);

    let mut stats = PqStats::new();
    for m in &result.matches {
        let s = stats.entry(m.gt.class_id);
        s.tp += 1;
        s.iou_sum += m.iou;
    }
    for seg in &result.unmatched_pred {
        let void = void_overlap.get(&seg.id.0).copied().unwrap_or(0);
        if void * 2 > seg.area {
            continue;
        }
        stats.entry(seg.class_id).fp += 1;
    }
    for seg in &result.unmatched_gt {
        stats.entry(seg.class_id).fn_ += 1;
    }
    Ok(stats)
}

/// Fieldwise sum of two stat sets; associative and commutative.
pub fn merge_stats(a: &PqStats, b: &PqStats) -> PqStats {
    let mut out = a.clone();
    for (&class_id, s) in &b.0 {
        let e = out.entry(class_id);
        e.iou_sum += s.iou_sum;
        e.tp += s.tp;
        e.fp += s.fp;
        e.fn_ += s.fn_;
    }
    out
}

/// Per-class quality scores on a 0-100 scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub pq: f64,
    pub sq: f64,
    pub rq: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

/// Dataset-level quality scores on a 0-100 scale. Classes never seen in
/// either prediction or ground truth are excluded from the averages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub pq: f64,
    pub sq: f64,
    pub rq: f64,
    pub pq_things: f64,
    pub pq_stuff: f64,
    pub per_class: BTreeMap<u32, ClassReport>,
    /// Number of classes that participated in the averages.
    #[serde(skip)]
    pub classes_evaluated: usize,
}

/// Computes the report from accumulated stats.
///
/// Per class: `sq = 100 * iou_sum / tp` (0 when tp = 0),
/// `rq = 100 * tp / (tp + fp/2 + fn/2)`, `pq = sq * rq / 100`. Dataset
/// scores are unweighted means over participating classes.
pub fn report(stats: &PqStats, catalog: &ClassCatalog) -> Result<MetricsReport> {
    let mut per_class = BTreeMap::new();
    let mut sums = (0.0f64, 0.0f64, 0.0f64);
    let mut thing_pq = (0.0f64, 0usize);
    let mut stuff_pq = (0.0f64, 0usize);
    for (&class_id, s) in &stats.0 {
        if s.tp + s.fp + s.fn_ == 0 {
            continue;
        }
        let kind = catalog
            .kind_of(class_id)
            .ok_or(Error::UnknownClass(class_id))?;
        let sq = if s.tp > 0 {
            100.0 * s.iou_sum / s.tp as f64
        } else {
            0.0
        };
        let rq = 100.0 * s.tp as f64 / (s.tp as f64 + 0.5 * s.fp as f64 + 0.5 * s.fn_ as f64);
        let pq = sq * rq / 100.0;
        per_class.insert(
            class_id,
            ClassReport {
                pq,
                sq,
                rq,
                tp: s.tp,
                fp: s.fp,
                fn_: s.fn_,
            },
        );
        sums.0 += pq;
        sums.1 += sq;
        sums.2 += rq;
        match kind {
            ClassKind::Thing => {
                thing_pq.0 += pq;
                thing_pq.1 += 1;
            }
            ClassKind::Stuff => {
                stuff_pq.0 += pq;
                stuff_pq.1 += 1;
            }
        }
    }
    let n = per_class.len();
    let mean = |sum: f64, count: usize| if count > 0 { sum / count as f64 } else { 0.0 };
    Ok(MetricsReport {
        pq: mean(sums.0, n),
        sq: mean(sums.1, n),
        rq: mean(sums.2, n),
        pq_things: mean(thing_pq.0, thing_pq.1),
        pq_stuff: mean(stuff_pq.0, stuff_pq.1),
        per_class,
        classes_evaluated: n,
    })
}
