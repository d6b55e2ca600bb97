//! Seeded synthetic scenes and brute-force reference implementations.
//!
//! Scenes are built from random rectangles and ellipses over a banded
//! stuff background, with a noise knob that perturbs scores, boxes, and
//! confidences. At noise 0 the semantic map is the exact one-hot ground
//! truth and detections reproduce the visible masks, so the merge
//! pipeline must return the ground truth byte for byte.
//!
//! `oracle_fuse` and `oracle_pq` re-implement fusion and PQ evaluation as
//! straight-line per-pixel loops. They exist to differentially test the
//! optimized paths and are not used outside tests.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{ClassCatalog, ClassKind, VOID_ID};
use crate::error::{Error, Result};
use crate::fusion::FusionConfig;
use crate::instance::{BoundingBox, InstanceDetection, InstanceSet};
use crate::metrics::{ClassReport, MetricsReport};
use crate::scoremap::SemanticScoreMap;
use crate::segment::{PanopticMap, SegmentId};

/// Parameters of one synthetic scene. Identical specs produce identical
/// scene bytes on every platform: the generator is a seeded ChaCha8
/// stream with a fixed draw order.
#[derive(Debug, Clone)]
pub struct SceneSpec {
    pub seed: u64,
    pub height: u32,
    pub width: u32,
    pub n_instances: u32,
    /// Corruption magnitude in [0, 1]: 0 means exact outputs.
    pub noise: f64,
    pub catalog: ClassCatalog,
}

/// A generated scene: ground truth plus the two branch outputs.
#[derive(Debug, Clone)]
pub struct SynthScene {
    pub gt: PanopticMap,
    pub semantic: SemanticScoreMap,
    pub instances: InstanceSet,
}

const MIN_DIM: u32 = 32;

pub fn generate_scene(spec: &SceneSpec) -> Result<SynthScene> {
    if !(0.0..=1.0).contains(&spec.noise) {
        return Err(Error::ValueOutOfRange {
            what: "noise",
            value: spec.noise,
        });
    }
    if spec.height < MIN_DIM || spec.width < MIN_DIM {
        return Err(Error::SceneGeneration(format!(
            "dimensions {}x{} are below the {}x{} placement minimum",
            spec.height, spec.width, MIN_DIM, MIN_DIM
        )));
    }
    if spec.n_instances >= 1000 {
        return Err(Error::SceneGeneration(
            "more than 999 instances cannot be indexed".into(),
        ));
    }
    if !spec.catalog.has_stuff() {
        return Err(Error::MissingClassKind("stuff"));
    }
    if spec.n_instances > 0 && !spec.catalog.has_things() {
        return Err(Error::MissingClassKind("thing"));
    }

    let (h, w) = (spec.height as usize, spec.width as usize);
    let n = h * w;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    // Stuff background: 2-4 horizontal bands of distinct stuff classes.
    // Bands keep at least half the nominal height, and instances stay off
    // a left margin strip, so every band retains enough pixels to survive
    // the small-stuff removal at the shipped fractions.
    let stuff_ids: Vec<u32> = spec.catalog.stuff_ids().collect();
    let mut n_bands = 2 + rng.random_range(0..3usize);
    n_bands = n_bands.min(stuff_ids.len());
    let mut band_classes = stuff_ids.clone();
    band_classes.shuffle(&mut rng);
    band_classes.truncate(n_bands);

    let base = h / n_bands;
    let mut cuts = Vec::with_capacity(n_bands + 1);
    cuts.push(0usize);
    for i in 1..n_bands {
        let jitter_cap = (base / 4) as i64;
        let jitter = rng.random_range(-jitter_cap..=jitter_cap);
        cuts.push((base as i64 * i as i64 + jitter) as usize);
    }
    cuts.push(h);

    let mut class_grid = vec![0u32; n];
    for band in 0..n_bands {
        for row in cuts[band]..cuts[band + 1] {
            class_grid[row * w..(row + 1) * w].fill(band_classes[band]);
        }
    }

    // Paint instances in draw order; later shapes occlude earlier ones.
    let thing_ids: Vec<u32> = spec.catalog.thing_ids().collect();
    let margin_x = w.div_ceil(8);
    let mut owner = vec![0u32; n];
    let mut inst_class = Vec::with_capacity(spec.n_instances as usize);
    for i in 0..spec.n_instances as usize {
        let class = thing_ids[rng.random_range(0..thing_ids.len())];
        let rect = rng.random_range(0..2u32) == 0;
        let lo_w = (w / 16).max(2);
        let hi_w = (w / 5).max(lo_w + 1);
        let lo_h = (h / 16).max(2);
        let hi_h = (h / 5).max(lo_h + 1);
        let sw = rng.random_range(lo_w..=hi_w);
        let sh = rng.random_range(lo_h..=hi_h);
        let x0 = rng.random_range(margin_x..=w - sw);
        let y0 = rng.random_range(0..=h - sh);
        for y in y0..y0 + sh {
            for x in x0..x0 + sw {
                let inside = if rect {
                    true
                } else {
                    let a = sw as f64 / 2.0;
                    let b = sh as f64 / 2.0;
                    let dx = (x as f64 + 0.5 - (x0 as f64 + a)) / a;
                    let dy = (y as f64 + 0.5 - (y0 as f64 + b)) / b;
                    dx * dx + dy * dy <= 1.0
                };
                if inside {
                    let p = y * w + x;
                    class_grid[p] = class;
                    owner[p] = (i + 1) as u32;
                }
            }
        }
        inst_class.push(class);
    }

    // Visible pixels per instance, in raster order.
    let mut pixels: Vec<Vec<(u32, u32)>> = vec![Vec::new(); spec.n_instances as usize];
    for y in 0..h {
        for x in 0..w {
            let o = owner[y * w + x];
            if o > 0 {
                pixels[(o - 1) as usize].push((x as u32, y as u32));
            }
        }
    }
    let survivors: Vec<usize> = (0..spec.n_instances as usize)
        .filter(|&i| !pixels[i].is_empty())
        .collect();

    // Ground-truth instance indices: 1, 2, ... per class in draw order.
    let mut per_class: HashMap<u32, u32> = HashMap::new();
    let mut gt_index = vec![0u32; spec.n_instances as usize];
    for &i in &survivors {
        let count = per_class.entry(inst_class[i]).or_insert(0);
        *count += 1;
        gt_index[i] = *count;
    }

    let mut gt_ids = Vec::with_capacity(n);
    for p in 0..n {
        let id = if owner[p] > 0 {
            let i = (owner[p] - 1) as usize;
            SegmentId::encode(inst_class[i], gt_index[i])?
        } else {
            SegmentId::encode(class_grid[p], 0)?
        };
        gt_ids.push(id);
    }
    let gt = PanopticMap::from_ids(spec.height, spec.width, gt_ids)?;

    // Detections: tight box over visible pixels, jittered by noise; the
    // soft mask keeps binarizing to the exact shape (on-scores stay above
    // 0.5, off-scores below), so degradation comes from displacement,
    // confidence dips, and the overlaps those introduce.
    let mut detections = Vec::with_capacity(survivors.len());
    for (rank, &i) in survivors.iter().enumerate() {
        let vis = &pixels[i];
        let (mut bx0, mut by0, mut bx1, mut by1) = (u32::MAX, u32::MAX, 0u32, 0u32);
        for &(x, y) in vis {
            bx0 = bx0.min(x);
            by0 = by0.min(y);
            bx1 = bx1.max(x);
            by1 = by1.max(y);
        }
        let bw = bx1 - bx0 + 1;
        let bh = by1 - by0 + 1;

        let u = rng.random::<f64>();
        let conf = (1.0 - 0.5 * rank as f64 / survivors.len() as f64 - spec.noise * u * 0.3)
            .clamp(0.05, 1.0) as f32;

        let max_shift = (spec.noise * spec.width.min(spec.height) as f64 / 16.0).round() as i64;
        let dx = rng.random_range(-max_shift..=max_shift);
        let dy = rng.random_range(-max_shift..=max_shift);
        let nx0 = (bx0 as i64 + dx).clamp(0, (spec.width - bw) as i64) as u32;
        let ny0 = (by0 as i64 + dy).clamp(0, (spec.height - bh) as i64) as u32;

        let on: HashSet<(u32, u32)> = vis.iter().copied().collect();
        let mut mask = Vec::with_capacity((bw * bh) as usize);
        for y in by0..=by1 {
            for x in bx0..=bx1 {
                let u = rng.random::<f64>();
                let v = if on.contains(&(x, y)) {
                    1.0 - spec.noise * u * 0.49
                } else {
                    spec.noise * u * 0.49
                };
                mask.push(v as f32);
            }
        }
        detections.push(InstanceDetection {
            class_id: inst_class[i],
            confidence: conf,
            bbox: BoundingBox::new(nx0, ny0, nx0 + bw - 1, ny0 + bh - 1),
            mask,
        });
    }
    let instances = InstanceSet::new(spec.height, spec.width, detections)?;

    // Semantic scores: one-hot ground truth blended with uniform noise,
    // then renormalized to a per-pixel distribution.
    let order = spec.catalog.channel_order();
    let channel_of: HashMap<u32, usize> =
        order.iter().enumerate().map(|(c, &id)| (id, c)).collect();
    let channels = order.len();
    let mut data = Vec::with_capacity(n * channels);
    let mut vals = vec![0.0f64; channels];
    for p in 0..n {
        let gt_channel = channel_of[&class_grid[p]];
        let mut sum = 0.0f64;
        for (c, val) in vals.iter_mut().enumerate() {
            let u = rng.random::<f64>();
            let onehot = if c == gt_channel { 1.0 } else { 0.0 };
            *val = (1.0 - spec.noise) * onehot + spec.noise * u;
            sum += *val;
        }
        for &val in &vals {
            data.push((val / sum) as f32);
        }
    }
    let semantic = SemanticScoreMap::new(spec.height, spec.width, order, data)?;

    Ok(SynthScene {
        gt,
        semantic,
        instances,
    })
}

// ---------------------------------------------------------------------------
// Reference fusion: same contract as `fusion::fuse`, written as plain
// per-pixel loops with dense per-entry score grids.
// ---------------------------------------------------------------------------

pub fn oracle_fuse(
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

    let c = scores.channels();
    let n = scores.n_pixels();
    let (h, w) = (scores.height(), scores.width());

    // Normalize: softmax per pixel unless the map is already a
    // distribution (all values in [0, 1], sums within 1e-6 of one).
    if let Some(bad) = scores.data().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteScore {
            pixel: bad / c,
            channel: bad % c,
        });
    }
    let mut already = true;
    for p in 0..n {
        let px = &scores.data()[p * c..(p + 1) * c];
        let mut sum = 0.0f64;
        for &v in px {
            if !(0.0..=1.0).contains(&v) {
                already = false;
            }
            sum += v as f64;
        }
        if (sum - 1.0).abs() > 1e-6 {
            already = false;
        }
        if !already {
            break;
        }
    }
    let mut norm = scores.data().to_vec();
    if !already {
        for p in 0..n {
            let px = &mut norm[p * c..(p + 1) * c];
            let mut max = f32::NEG_INFINITY;
            for &v in px.iter() {
                if v > max {
                    max = v;
                }
            }
            let mut exps = vec![0.0f64; c];
            let mut sum = 0.0f64;
            for (i, &v) in px.iter().enumerate() {
                let e = ((v - max) as f64).exp();
                exps[i] = e;
                sum += e;
            }
            let inv = 1.0 / sum;
            for (i, v) in px.iter_mut().enumerate() {
                *v = (exps[i] * inv) as f32;
            }
        }
    }

    // Channel kinds.
    let order = scores.channel_order();
    let mut is_stuff = vec![false; c];
    for (ch, &id) in order.iter().enumerate() {
        match catalog.kind_of(id) {
            Some(ClassKind::Stuff) => is_stuff[ch] = true,
            Some(ClassKind::Thing) => {}
            None => return Err(Error::UnknownClass(id)),
        }
    }

    // Suppress things.
    let mut stuff_grid = vec![0u32; n];
    for p in 0..n {
        let px = &norm[p * c..(p + 1) * c];
        let mut top = 0;
        for i in 1..c {
            if px[i] > px[top] {
                top = i;
            }
        }
        if is_stuff[top] {
            stuff_grid[p] = order[top];
            continue;
        }
        let mut best: Option<usize> = None;
        for i in 0..c {
            if is_stuff[i] && (best.is_none() || px[i] > px[best.unwrap()]) {
                best = Some(i);
            }
        }
        stuff_grid[p] = match best {
            Some(ch) if px[ch] >= config.alpha => order[ch],
            _ => VOID_ID,
        };
    }

    // Remove small stuff.
    let threshold = (config.stuff_fraction * (h as f64 * w as f64)).ceil() as u64;
    let mut counts: HashMap<u32, u64> = HashMap::new();
    for &class in &stuff_grid {
        if class != VOID_ID {
            *counts.entry(class).or_insert(0) += 1;
        }
    }
    let removed: HashSet<u32> = counts
        .iter()
        .filter(|&(_, &cnt)| cnt < threshold)
        .map(|(&class, _)| class)
        .collect();
    if !removed.is_empty() {
        let surviving: Vec<usize> = (0..c)
            .filter(|&ch| {
                is_stuff[ch] && counts.get(&order[ch]).is_some_and(|&cnt| cnt >= threshold)
            })
            .collect();
        for p in 0..n {
            if !removed.contains(&stuff_grid[p]) {
                continue;
            }
            let px = &norm[p * c..(p + 1) * c];
            let mut best: Option<usize> = None;
            for &ch in &surviving {
                if best.is_none() || px[ch] > px[best.unwrap()] {
                    best = Some(ch);
                }
            }
            stuff_grid[p] = match best {
                Some(ch) if px[ch] >= config.alpha => order[ch],
                _ => VOID_ID,
            };
        }
    }

    // Paste admitted detections to dense full-image score grids.
    struct Layer {
        class_id: u32,
        confidence: f32,
        grid: Vec<f32>,
    }
    let mut layers = Vec::new();
    for det in instances.detections() {
        det.bbox.validate(w, h)?;
        if det.confidence < config.min_confidence {
            continue;
        }
        let mut grid = vec![-1.0f32; n];
        for y in det.bbox.y0..=det.bbox.y1 {
            for x in det.bbox.x0..=det.bbox.x1 {
                let score = det.mask_at(x, y);
                if score >= config.mask_bin_threshold && score > 0.0 {
                    grid[(y * w + x) as usize] = score;
                }
            }
        }
        layers.push(Layer {
            class_id: det.class_id,
            confidence: det.confidence,
            grid,
        });
    }

    // Per-pixel overlap removal.
    let mut winner = vec![usize::MAX; n];
    for (p, slot) in winner.iter_mut().enumerate() {
        let mut best: Option<(f32, f32, usize)> = None;
        for (e, layer) in layers.iter().enumerate() {
            let score = layer.grid[p];
            if score < 0.0 {
                continue;
            }
            let replace = match best {
                None => true,
                Some((bs, bc, _)) => score > bs || (score == bs && layer.confidence > bc),
            };
            if replace {
                best = Some((score, layer.confidence, e));
            }
        }
        if let Some((_, _, e)) = best {
            *slot = e;
        }
    }

    // Index assignment over entries that kept at least one pixel.
    let mut kept = vec![false; layers.len()];
    for &e in &winner {
        if e != usize::MAX {
            kept[e] = true;
        }
    }
    let mut alive: Vec<usize> = (0..layers.len()).filter(|&e| kept[e]).collect();
    alive.sort_by(|&a, &b| {
        layers[b]
            .confidence
            .partial_cmp(&layers[a].confidence)
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut per_class: HashMap<u32, u32> = HashMap::new();
    let mut layer_id = vec![SegmentId::VOID; layers.len()];
    for &e in &alive {
        let count = per_class.entry(layers[e].class_id).or_insert(0);
        *count += 1;
        if *count > 999 {
            return Err(Error::InstanceCapacity(*count as u64));
        }
        layer_id[e] = SegmentId::encode(layers[e].class_id, *count)?;
    }

    let mut ids = Vec::with_capacity(n);
    for p in 0..n {
        let id = if winner[p] != usize::MAX {
            layer_id[winner[p]]
        } else if stuff_grid[p] == VOID_ID {
            SegmentId::VOID
        } else {
            SegmentId(stuff_grid[p] * 1000)
        };
        ids.push(id);
    }
    PanopticMap::from_ids(h, w, ids)
}

// ---------------------------------------------------------------------------
// Reference PQ: exhaustive same-class pair enumeration.
// ---------------------------------------------------------------------------

pub fn oracle_pq(
    pred: &PanopticMap,
    gt: &PanopticMap,
    catalog: &ClassCatalog,
) -> Result<MetricsReport> {
    if pred.height() != gt.height() || pred.width() != gt.width() {
        return Err(Error::DimensionMismatch {
            expected_h: gt.height(),
            expected_w: gt.width(),
            got_h: pred.height(),
            got_w: pred.width(),
        });
    }
    for seg in pred.segments().iter().chain(gt.segments()) {
        if !catalog.contains(seg.class_id) {
            return Err(Error::UnknownClass(seg.class_id));
        }
    }

    // Pairwise intersections and per-pred void overlap, one pixel scan.
    let mut inter: HashMap<(u32, u32), u64> = HashMap::new();
    let mut void_overlap: HashMap<u32, u64> = HashMap::new();
    for (pi, gi) in pred.ids().iter().zip(gt.ids()) {
        *inter.entry((pi.0, gi.0)).or_insert(0) += 1;
        if gi.is_void() && !pi.is_void() {
            *void_overlap.entry(pi.0).or_insert(0) += 1;
        }
    }

    // Every same-class pair, in segment-list order.
    let mut matched_pred: HashMap<u32, u32> = HashMap::new();
    let mut matched_gt: HashSet<u32> = HashSet::new();
    let mut per_class: BTreeMap<u32, (f64, u64, u64, u64)> = BTreeMap::new();
    for pseg in pred.segments() {
        for gseg in gt.segments() {
            if pseg.class_id != gseg.class_id {
                continue;
            }
            let shared = inter.get(&(pseg.id.0, gseg.id.0)).copied().unwrap_or(0);
            if shared == 0 {
                continue;
            }
            let pred_eff = pseg.area - void_overlap.get(&pseg.id.0).copied().unwrap_or(0);
            let iou = shared as f64 / (pred_eff + gseg.area - shared) as f64;
            if iou > 0.5 {
                // The > 0.5 rule admits at most one partner per segment.
                assert!(
                    matched_pred.insert(pseg.id.0, gseg.id.0).is_none(),
                    "pred segment matched twice"
                );
                assert!(matched_gt.insert(gseg.id.0), "gt segment matched twice");
                let entry = per_class.entry(pseg.class_id).or_insert((0.0, 0, 0, 0));
                entry.0 += iou;
                entry.1 += 1;
            }
        }
    }
    for pseg in pred.segments() {
        if matched_pred.contains_key(&pseg.id.0) {
            continue;
        }
        let void = void_overlap.get(&pseg.id.0).copied().unwrap_or(0);
        if void * 2 > pseg.area {
            continue;
        }
        per_class.entry(pseg.class_id).or_insert((0.0, 0, 0, 0)).2 += 1;
    }
    for gseg in gt.segments() {
        if !matched_gt.contains(&gseg.id.0) {
            per_class.entry(gseg.class_id).or_insert((0.0, 0, 0, 0)).3 += 1;
        }
    }

    let mut report_classes = BTreeMap::new();
    let (mut pq_sum, mut sq_sum, mut rq_sum) = (0.0, 0.0, 0.0);
    let mut things = (0.0, 0usize);
    let mut stuff = (0.0, 0usize);
    for (&class_id, &(iou_sum, tp, fp, fn_)) in &per_class {
        if tp + fp + fn_ == 0 {
            continue;
        }
        let sq = if tp > 0 { 100.0 * iou_sum / tp as f64 } else { 0.0 };
        let rq = 100.0 * tp as f64 / (tp as f64 + 0.5 * fp as f64 + 0.5 * fn_ as f64);
        let pq = sq * rq / 100.0;
        report_classes.insert(
            class_id,
            ClassReport {
                pq,
                sq,
                rq,
                tp,
                fp,
                fn_,
            },
        );
        pq_sum += pq;
        sq_sum += sq;
        rq_sum += rq;
        match catalog.kind_of(class_id).unwrap() {
            ClassKind::Thing => {
                things.0 += pq;
                things.1 += 1;
            }
            ClassKind::Stuff => {
                stuff.0 += pq;
                stuff.1 += 1;
            }
        }
    }
    let n = report_classes.len();
    let mean = |sum: f64, count: usize| if count > 0 { sum / count as f64 } else { 0.0 };
    Ok(MetricsReport {
        pq: mean(pq_sum, n),
        sq: mean(sq_sum, n),
        rq: mean(rq_sum, n),
        pq_things: mean(things.0, things.1),
        pq_stuff: mean(stuff.0, stuff.1),
        per_class: report_classes,
        classes_evaluated: n,
    })
}
