//! Merges parallel semantic and instance predictions into one panoptic map.
//!
//! The pipeline pastes instance masks to full-image layers and resolves
//! overlaps by per-pixel score, replaces semantic things predictions with
//! high-scoring stuff (threshold `alpha`) or void, removes stuff segments
//! smaller than a fraction `stuff_fraction` of the image, and finally
//! overlays the instances onto the stuff grid.

use std::collections::HashMap;

use crate::catalog::{ClassCatalog, ClassKind, VOID_ID};
use crate::error::{Error, Result};
use crate::instance::InstanceSet;
use crate::par;
use crate::scoremap::{argmax_channel, normalize_scores, SemanticScoreMap};
use crate::segment::{PanopticMap, SegmentId};

/// Knobs of the merging pipeline. All values live in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    /// Minimum stuff score for substituting a semantic things prediction.
    pub alpha: f32,
    /// Minimum stuff segment size as a fraction of the image pixel count.
    pub stuff_fraction: f64,
    /// Soft-mask binarization cutoff.
    pub mask_bin_threshold: f32,
    /// Detections below this confidence are dropped before pasting.
    pub min_confidence: f32,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            alpha: 0.25,
            stuff_fraction: 1.0 / 512.0,
            mask_bin_threshold: 0.5,
            min_confidence: 0.5,
        }
    }
}

impl FusionConfig {
    /// Defaults tuned for 19-class street scenes (stuff fraction 1/512).
    pub fn cityscapes() -> Self {
        Self::default()
    }

    /// Defaults tuned for 65-class street scenes (stuff fraction 1/256).
    pub fn vistas() -> Self {
        Self {
            stuff_fraction: 1.0 / 256.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (what, value) in [
            ("alpha", self.alpha as f64),
            ("stuff_fraction", self.stuff_fraction),
            ("mask_bin_threshold", self.mask_bin_threshold as f64),
            ("min_confidence", self.min_confidence as f64),
        ] {
            if !value.is_finite() || !(0.0..=1.0).contains(&value) {
                return Err(Error::ValueOutOfRange { what, value });
            }
        }
        Ok(())
    }
}

/// Effective minimum stuff segment size in pixels: `ceil(f * H * W)`.
pub fn stuff_area_threshold(fraction: f64, height: u32, width: u32) -> u64 {
    (fraction * (height as f64 * width as f64)).ceil() as u64
}

/// One admitted detection pasted to full-image coordinates: the sparse
/// set of pixels whose box-local mask score passed binarization, with the
/// raw score kept per pixel.
#[derive(Debug, Clone)]
pub struct PastedEntry {
    pub detection_index: usize,
    pub class_id: u32,
    pub confidence: f32,
    /// (linear pixel index, raw mask score), in raster order.
    pub pixels: Vec<(u32, f32)>,
}

/// Full-image instance layers, in detection order.
#[derive(Debug, Clone)]
pub struct PastedInstances {
    height: u32,
    width: u32,
    entries: Vec<PastedEntry>,
}

impl PastedInstances {
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn entries(&self) -> &[PastedEntry] {
        &self.entries
    }
}

const UNASSIGNED: u32 = u32::MAX;

/// Result of overlap removal: at most one owning entry per pixel.
#[derive(Debug, Clone)]
pub struct InstanceAssignment {
    height: u32,
    width: u32,
    winner: Vec<u32>,
}

impl InstanceAssignment {
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Entry index claiming the pixel, if any.
    pub fn entry_at(&self, pixel: usize) -> Option<usize> {
        match self.winner[pixel] {
            UNASSIGNED => None,
            e => Some(e as usize),
        }
    }

    pub fn n_pixels(&self) -> usize {
        self.winner.len()
    }
}

/// Transforms admitted instance masks to full-image sparse layers.
///
/// Detections with confidence below `min_confidence` are dropped. A pixel
/// enters a layer when its box-local mask score passes the binarization
/// threshold and is positive; the stored score is the raw mask score.
pub fn paste_masks(instances: &InstanceSet, config: &FusionConfig) -> Result<PastedInstances> {
    config.validate()?;
    let width = instances.width();
    let height = instances.height();
    let mut entries = Vec::new();
    for (index, det) in instances.detections().iter().enumerate() {
        det.bbox.validate(width, height)?;
        if det.confidence < config.min_confidence {
            continue;
        }
        let mut pixels = Vec::new();
        for y in det.bbox.y0..=det.bbox.y1 {
            for x in det.bbox.x0..=det.bbox.x1 {
                let score = det.mask_at(x, y);
                if score >= config.mask_bin_threshold && score > 0.0 {
                    pixels.push((y * width + x, score));
                }
            }
        }
        entries.push(PastedEntry {
            detection_index: index,
            class_id: det.class_id,
            confidence: det.confidence,
            pixels,
        });
    }
    Ok(PastedInstances {
        height,
        width,
        entries,
    })
}

/// Assigns every claimed pixel to the layer with the highest score there.
/// Ties break to the higher detection confidence, then the lower entry index.
pub fn resolve_overlaps(pasted: &PastedInstances) -> InstanceAssignment {
    let n = pasted.height as usize * pasted.width as usize;
    let mut winner = vec![UNASSIGNED; n];
    let mut best_score = vec![0.0f32; n];
    for (idx, entry) in pasted.entries.iter().enumerate() {
        for &(pixel, score) in &entry.pixels {
            let p = pixel as usize;
            let current = winner[p];
            let take = if current == UNASSIGNED {
                true
            } else if score != best_score[p] {
                score > best_score[p]
            } else {
                // Equal scores: higher confidence wins; the earlier entry
                // keeps the pixel on a full tie.
                entry.confidence > pasted.entries[current as usize].confidence
            };
            if take {
                winner[p] = idx as u32;
                best_score[p] = score;
            }
        }
    }
    InstanceAssignment {
        height: pasted.height,
        width: pasted.width,
        winner,
    }
}

/// Per-channel catalog facts, resolved once per call.
struct ChannelKinds {
    /// Channel index -> class id.
    class_ids: Vec<u32>,
    /// Channel indices whose class is stuff.
    stuff_channels: Vec<usize>,
    is_stuff: Vec<bool>,
}

fn resolve_channels(scores: &SemanticScoreMap, catalog: &ClassCatalog) -> Result<ChannelKinds> {
    let mut class_ids = Vec::with_capacity(scores.channels());
    let mut stuff_channels = Vec::new();
    let mut is_stuff = Vec::with_capacity(scores.channels());
    for (c, &id) in scores.channel_order().iter().enumerate() {
        let kind = catalog.kind_of(id).ok_or(Error::UnknownClass(id))?;
        class_ids.push(id);
        let stuff = kind == ClassKind::Stuff;
        is_stuff.push(stuff);
        if stuff {
            stuff_channels.push(c);
        }
    }
    Ok(ChannelKinds {
        class_ids,
        stuff_channels,
        is_stuff,
    })
}

/// Best-scoring channel among `channels`, ties to the lowest channel index.
fn best_channel_of(px: &[f32], channels: &[usize]) -> Option<(usize, f32)> {
    let mut best: Option<(usize, f32)> = None;
    for &c in channels {
        let v = px[c];
        match best {
            None => best = Some((c, v)),
            Some((_, bv)) if v > bv => best = Some((c, v)),
            _ => {}
        }
    }
    best
}

/// Replaces semantic things predictions with stuff or void.
///
/// Pixels whose argmax class is stuff keep it. Pixels whose argmax is a
/// thing become the highest-scoring stuff class there when that score
/// reaches `alpha`, and void otherwise. Expects a normalized score map.
pub fn suppress_things(
    scores: &SemanticScoreMap,
    catalog: &ClassCatalog,
    config: &FusionConfig,
) -> Result<Vec<u32>> {
    config.validate()?;
    if !catalog.has_stuff() {
        return Err(Error::MissingClassKind("stuff"));
    }
    let kinds = resolve_channels(scores, catalog)?;
    let c = scores.channels();
    let data = scores.data();
    Ok(par::map_indexed(scores.n_pixels(), |p| {
        let px = &data[p * c..(p + 1) * c];
        let top = argmax_channel(px);
        if kinds.is_stuff[top] {
            return kinds.class_ids[top];
        }
        match best_channel_of(px, &kinds.stuff_channels) {
            Some((ch, score)) if score >= config.alpha => kinds.class_ids[ch],
            _ => VOID_ID,
        }
    }))
}

/// Removes stuff classes whose pixel count falls below
/// `ceil(stuff_fraction * H * W)`.
///
/// Counts are measured once and all removals happen simultaneously; each
/// removed pixel becomes the highest-scoring surviving stuff class there
/// when that score reaches `alpha`, and void otherwise. Substitution only
/// targets survivors, which makes the operation idempotent.
pub fn remove_small_stuff(
    stuff_grid: &[u32],
    scores: &SemanticScoreMap,
    catalog: &ClassCatalog,
    config: &FusionConfig,
) -> Result<Vec<u32>> {
    config.validate()?;
    if stuff_grid.len() != scores.n_pixels() {
        return Err(Error::InvalidArgument(format!(
            "stuff grid has {} pixels, score map has {}",
            stuff_grid.len(),
            scores.n_pixels()
        )));
    }
    let threshold = stuff_area_threshold(config.stuff_fraction, scores.height(), scores.width());
    let counts = par::fold_chunks(
        stuff_grid,
        8192,
        HashMap::<u32, u64>::new,
        |mut acc, _i, chunk| {
            for &class in chunk {
                if class != VOID_ID {
                    *acc.entry(class).or_insert(0) += 1;
                }
            }
            acc
        },
        |mut a, b| {
            for (class, n) in b {
                *a.entry(class).or_insert(0) += n;
            }
            a
        },
    );
    let removed: std::collections::HashSet<u32> = counts
        .iter()
        .filter(|&(_, &n)| n < threshold)
        .map(|(&class, _)| class)
        .collect();
    if removed.is_empty() {
        return Ok(stuff_grid.to_vec());
    }
    let kinds = resolve_channels(scores, catalog)?;
    let surviving_channels: Vec<usize> = kinds
        .stuff_channels
        .iter()
        .copied()
        .filter(|&ch| {
            let class = kinds.class_ids[ch];
            counts.get(&class).is_some_and(|&n| n >= threshold)
        })
        .collect();
    let c = scores.channels();
    let data = scores.data();
    Ok(par::map_indexed(stuff_grid.len(), |p| {
        let class = stuff_grid[p];
        if class == VOID_ID || !removed.contains(&class) {
            return class;
        }
        let px = &data[p * c..(p + 1) * c];
        match best_channel_of(px, &surviving_channels) {
            Some((ch, score)) if score >= config.alpha => kinds.class_ids[ch],
            _ => VOID_ID,
        }
    }))
}

/// Overlays resolved instances on the stuff grid, producing the final map.
///
/// Instance indices run 1, 2, ... per class over entries that kept at
/// least one pixel, in descending detection confidence (ties by entry
/// order). Entries that lost every pixel produce no segment.
pub fn overlay(
    stuff_grid: &[u32],
    assignment: &InstanceAssignment,
    pasted: &PastedInstances,
    catalog: &ClassCatalog,
) -> Result<PanopticMap> {
    let n = stuff_grid.len();
    if assignment.n_pixels() != n {
        return Err(Error::InvalidArgument(
            "assignment and stuff grid disagree on pixel count".into(),
        ));
    }
    for entry in &pasted.entries {
        catalog.expect_kind(entry.class_id, ClassKind::Thing)?;
    }

    // Pixels kept per entry, to skip fully-occluded instances.
    let mut kept = vec![0u64; pasted.entries.len()];
    for &w in &assignment.winner {
        if w != UNASSIGNED {
            kept[w as usize] += 1;
        }
    }

    let mut order: Vec<usize> = (0..pasted.entries.len()).filter(|&e| kept[e] > 0).collect();
    order.sort_by(|&a, &b| {
        pasted.entries[b]
            .confidence
            .partial_cmp(&pasted.entries[a].confidence)
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut per_class: HashMap<u32, u32> = HashMap::new();
    let mut entry_ids = vec![SegmentId::VOID; pasted.entries.len()];
    for &e in &order {
        let class = pasted.entries[e].class_id;
        let count = per_class.entry(class).or_insert(0);
        *count += 1;
        if *count > 999 {
            return Err(Error::InstanceCapacity(*count as u64));
        }
        entry_ids[e] = SegmentId::encode(class, *count)?;
    }

    let winner = &assignment.winner;
    let ids = par::map_indexed(n, |p| match winner[p] {
        UNASSIGNED => {
            let class = stuff_grid[p];
            if class == VOID_ID {
                SegmentId::VOID
            } else {
                SegmentId(class * 1000)
            }
        }
        e => entry_ids[e as usize],
    });
    PanopticMap::from_ids(assignment.height, assignment.width, ids)
}

/// The full merging pipeline: normalize, paste and resolve instances,
/// suppress semantic things, drop undersized stuff, overlay.
pub fn fuse(
    scores: &SemanticScoreMap,
    instances: &InstanceSet,
    catalog: &ClassCatalog,
    config: &FusionConfig,
) -> Result<PanopticMap> {
    config.validate()?;
    if scores.height() != instances.height() || scores.width() != instances.width() {
        return Err(Error::DimensionMismatch {
            expected_h: scores.height(),
            expected_w: scores.width(),
            got_h: instances.height(),
            got_w: instances.width(),
        });
    }
    if !catalog.has_stuff() {
        return Err(Error::MissingClassKind("stuff"));
    }
    if !catalog.has_things() {
        return Err(Error::MissingClassKind("thing"));
    }
    for det in instances.detections() {
        catalog.expect_kind(det.class_id, ClassKind::Thing)?;
    }
    let normalized = normalize_scores(scores)?;
    let pasted = paste_masks(instances, config)?;
    let assignment = resolve_overlaps(&pasted);
    let stuff = suppress_things(&normalized, catalog, config)?;
    let stuff = remove_small_stuff(&stuff, &normalized, catalog, config)?;
    overlay(&stuff, &assignment, &pasted, catalog)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{ClassDef, ClassKind};
    use crate::instance::{BoundingBox, InstanceDetection};

    fn catalog() -> ClassCatalog {
        ClassCatalog::new(vec![
            ClassDef {
                id: 1,
                name: "road".into(),
                kind: ClassKind::Stuff,
            },
            ClassDef {
                id: 2,
                name: "sky".into(),
                kind: ClassKind::Stuff,
            },
            ClassDef {
                id: 26,
                name: "car".into(),
                kind: ClassKind::Thing,
            },
        ])
        .unwrap()
    }

    fn det(class_id: u32, confidence: f32, bbox: BoundingBox, mask: Vec<f32>) -> InstanceDetection {
        InstanceDetection {
            class_id,
            confidence,
            bbox,
            mask,
        }
    }

    #[test]
    fn paste_applies_binarization() {
        let inst = InstanceSet::new(
            4,
            4,
            vec![det(
                26,
                0.9,
                BoundingBox::new(0, 0, 1, 1),
                vec![0.9, 0.4, 0.6, 0.1],
            )],
        )
        .unwrap();
        let pasted = paste_masks(&inst, &FusionConfig::default()).unwrap();
        assert_eq!(pasted.entries().len(), 1);
        assert_eq!(pasted.entries()[0].pixels, vec![(0, 0.9), (4, 0.6)]);
    }

    #[test]
    fn paste_drops_low_confidence() {
        let inst = InstanceSet::new(
            4,
            4,
            vec![det(26, 0.3, BoundingBox::new(0, 0, 0, 0), vec![1.0])],
        )
        .unwrap();
        let pasted = paste_masks(&inst, &FusionConfig::default()).unwrap();
        assert!(pasted.entries().is_empty());
    }

    #[test]
    fn paste_keeps_detection_order() {
        let inst = InstanceSet::new(
            4,
            4,
            vec![
                det(26, 0.7, BoundingBox::new(0, 0, 0, 0), vec![1.0]),
                det(26, 0.9, BoundingBox::new(1, 1, 1, 1), vec![1.0]),
            ],
        )
        .unwrap();
        let pasted = paste_masks(&inst, &FusionConfig::default()).unwrap();
        assert_eq!(pasted.entries()[0].detection_index, 0);
        assert_eq!(pasted.entries()[1].detection_index, 1);
    }

    fn two_layer_set(score_a: f32, score_b: f32, conf_a: f32, conf_b: f32) -> PastedInstances {
        PastedInstances {
            height: 1,
            width: 1,
            entries: vec![
                PastedEntry {
                    detection_index: 0,
                    class_id: 26,
                    confidence: conf_a,
                    pixels: vec![(0, score_a)],
                },
                PastedEntry {
                    detection_index: 1,
                    class_id: 26,
                    confidence: conf_b,
                    pixels: vec![(0, score_b)],
                },
            ],
        }
    }

    #[test]
    fn overlap_resolution_takes_highest_score() {
        let a = resolve_overlaps(&two_layer_set(0.9, 0.7, 0.5, 0.5));
        assert_eq!(a.entry_at(0), Some(0));
        let b = resolve_overlaps(&two_layer_set(0.6, 0.7, 0.5, 0.5));
        assert_eq!(b.entry_at(0), Some(1));
    }

    #[test]
    fn overlap_resolution_single_claim() {
        let mut pasted = two_layer_set(0.9, 0.7, 0.5, 0.5);
        pasted.entries[0].pixels.clear();
        let a = resolve_overlaps(&pasted);
        assert_eq!(a.entry_at(0), Some(1));
    }

    #[test]
    fn overlap_resolution_tie_breaks_on_confidence_then_index() {
        let a = resolve_overlaps(&two_layer_set(0.5, 0.5, 0.6, 0.8));
        assert_eq!(a.entry_at(0), Some(1));
        let b = resolve_overlaps(&two_layer_set(0.5, 0.5, 0.8, 0.8));
        assert_eq!(b.entry_at(0), Some(0));
    }

    fn scores_1px(px: Vec<f32>) -> SemanticScoreMap {
        SemanticScoreMap::new(1, 1, vec![26, 1, 2], px).unwrap()
    }

    #[test]
    fn suppress_substitutes_stuff_above_alpha() {
        // (car 0.50, road 0.30, sky 0.20) -> road
        let grid =
            suppress_things(&scores_1px(vec![0.50, 0.30, 0.20]), &catalog(), &FusionConfig::default())
                .unwrap();
        assert_eq!(grid, vec![1]);
    }

    #[test]
    fn suppress_voids_below_alpha() {
        // (car 0.80, road 0.12, sky 0.08) -> void
        let grid =
            suppress_things(&scores_1px(vec![0.80, 0.12, 0.08]), &catalog(), &FusionConfig::default())
                .unwrap();
        assert_eq!(grid, vec![VOID_ID]);
    }

    #[test]
    fn suppress_keeps_stuff_argmax() {
        // (car 0.40, road 0.60) -> road unchanged
        let grid =
            suppress_things(&scores_1px(vec![0.40, 0.60, 0.0]), &catalog(), &FusionConfig::default())
                .unwrap();
        assert_eq!(grid, vec![1]);
    }

    #[test]
    fn suppress_requires_stuff_classes() {
        let things_only = ClassCatalog::new(vec![ClassDef {
            id: 26,
            name: "car".into(),
            kind: ClassKind::Thing,
        }])
        .unwrap();
        let scores = SemanticScoreMap::new(1, 1, vec![26], vec![1.0]).unwrap();
        assert!(matches!(
            suppress_things(&scores, &things_only, &FusionConfig::default()).unwrap_err(),
            Error::MissingClassKind("stuff")
        ));
    }

    #[test]
    fn threshold_matches_reference_resolution() {
        // 1024x2048 at f = 1/512 reproduces the fixed 4096-pixel cutoff.
        assert_eq!(stuff_area_threshold(1.0 / 512.0, 1024, 2048), 4096);
        // ceil(10000 / 256) = 40
        assert_eq!(stuff_area_threshold(1.0 / 256.0, 100, 100), 40);
        assert_eq!(stuff_area_threshold(0.0, 100, 100), 0);
    }

    /// 100x100 scene, 30 sky pixels in a road image, uniform scores that
    /// favor road as a substitute.
    fn small_stuff_fixture(sky_pixels: usize) -> (Vec<u32>, SemanticScoreMap) {
        let n = 100 * 100;
        let mut grid = vec![1u32; n];
        let mut data = Vec::with_capacity(n * 3);
        for (p, cell) in grid.iter_mut().enumerate() {
            if p < sky_pixels {
                *cell = 2;
                data.extend_from_slice(&[0.0, 0.40, 0.60]);
            } else {
                data.extend_from_slice(&[0.0, 0.90, 0.10]);
            }
        }
        let scores = SemanticScoreMap::new(100, 100, vec![26, 1, 2], data).unwrap();
        (grid, scores)
    }

    #[test]
    fn small_stuff_is_removed_and_substituted() {
        let (grid, scores) = small_stuff_fixture(30);
        let cfg = FusionConfig {
            stuff_fraction: 1.0 / 256.0,
            ..FusionConfig::default()
        };
        let out = remove_small_stuff(&grid, &scores, &catalog(), &cfg).unwrap();
        // T = 40 > 30: sky removed, its pixels fall to road (0.40 >= alpha).
        assert!(out.iter().all(|&c| c == 1));
    }

    #[test]
    fn stuff_at_exact_threshold_survives() {
        let (grid, scores) = small_stuff_fixture(40);
        let cfg = FusionConfig {
            stuff_fraction: 1.0 / 256.0,
            ..FusionConfig::default()
        };
        let out = remove_small_stuff(&grid, &scores, &catalog(), &cfg).unwrap();
        assert_eq!(out.iter().filter(|&&c| c == 2).count(), 40);
    }

    #[test]
    fn removed_pixels_fall_to_void_without_survivor_score() {
        let (grid, mut_scores) = small_stuff_fixture(30);
        // Rebuild with sky pixels whose road score is below alpha.
        let mut data = mut_scores.data().to_vec();
        for p in 0..30 {
            data[p * 3] = 0.0;
            data[p * 3 + 1] = 0.20;
            data[p * 3 + 2] = 0.80;
        }
        let scores = SemanticScoreMap::new(100, 100, vec![26, 1, 2], data).unwrap();
        let cfg = FusionConfig {
            stuff_fraction: 1.0 / 256.0,
            ..FusionConfig::default()
        };
        let out = remove_small_stuff(&grid, &scores, &catalog(), &cfg).unwrap();
        assert_eq!(out.iter().filter(|&&c| c == VOID_ID).count(), 30);
    }

    fn uniform_road_scores(h: u32, w: u32) -> SemanticScoreMap {
        let n = (h * w) as usize;
        let mut data = Vec::with_capacity(n * 3);
        for _ in 0..n {
            data.extend_from_slice(&[0.0, 1.0, 0.0]);
        }
        SemanticScoreMap::new(h, w, vec![26, 1, 2], data).unwrap()
    }

    #[test]
    fn overlay_composes_segments() {
        let scores = uniform_road_scores(4, 4);
        let inst = InstanceSet::new(
            4,
            4,
            vec![det(26, 0.9, BoundingBox::new(1, 1, 2, 2), vec![1.0; 4])],
        )
        .unwrap();
        let map = fuse(&scores, &inst, &catalog(), &FusionConfig::default()).unwrap();
        let segs = map.segments();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].id.0, 1000);
        assert_eq!(segs[0].area, 12);
        assert_eq!(segs[1].id.0, 26001);
        assert_eq!(segs[1].area, 4);
    }

    #[test]
    fn fuse_without_instances_is_stuff_only() {
        let scores = uniform_road_scores(4, 4);
        let inst = InstanceSet::new(4, 4, vec![]).unwrap();
        let map = fuse(&scores, &inst, &catalog(), &FusionConfig::default()).unwrap();
        assert_eq!(map.segments().len(), 1);
        assert_eq!(map.segments()[0].id.0, 1000);
        assert_eq!(map.segments()[0].area, 16);
    }

    #[test]
    fn instance_indices_follow_confidence() {
        let scores = uniform_road_scores(4, 4);
        let inst = InstanceSet::new(
            4,
            4,
            vec![
                det(26, 0.7, BoundingBox::new(0, 0, 0, 0), vec![1.0]),
                det(26, 0.9, BoundingBox::new(3, 3, 3, 3), vec![1.0]),
            ],
        )
        .unwrap();
        let map = fuse(&scores, &inst, &catalog(), &FusionConfig::default()).unwrap();
        // The 0.9 detection gets index 1 even though it comes second.
        assert_eq!(map.label_at(3, 3), (26, 1));
        assert_eq!(map.label_at(0, 0), (26, 2));
    }

    #[test]
    fn occluded_instances_produce_no_segment() {
        let scores = uniform_road_scores(4, 4);
        // Same pixel: the second, stronger mask score takes it; with equal
        // scores the higher confidence wins the whole single-pixel layer.
        let inst = InstanceSet::new(
            4,
            4,
            vec![
                det(26, 0.8, BoundingBox::new(0, 0, 0, 0), vec![0.6]),
                det(26, 0.9, BoundingBox::new(0, 0, 0, 0), vec![0.8]),
            ],
        )
        .unwrap();
        let map = fuse(&scores, &inst, &catalog(), &FusionConfig::default()).unwrap();
        let cars: Vec<_> = map.segments().iter().filter(|s| s.class_id == 26).collect();
        assert_eq!(cars.len(), 1);
        assert_eq!(map.label_at(0, 0), (26, 1));
    }

    #[test]
    fn fuse_checks_dimensions() {
        let scores = uniform_road_scores(4, 4);
        let inst = InstanceSet::new(2, 2, vec![]).unwrap();
        assert!(matches!(
            fuse(&scores, &inst, &catalog(), &FusionConfig::default()).unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn config_validation() {
        let bad = FusionConfig {
            alpha: 1.5,
            ..FusionConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
