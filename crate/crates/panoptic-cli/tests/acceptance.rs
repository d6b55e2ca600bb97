//! Acceptance suite. Each test prints one `ACCEPTANCE <name>: PASS/FAIL`
//! line (run with `--nocapture` to see them) and covers one release
//! criterion. Tests share a 200-scene corpus and serialize on a mutex so
//! the timing checks are not perturbed by concurrent work.

use std::path::Path;
use std::process::Command;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use panoptic::exchange::{
    expand_boxes, extract_things_clusters, Connectivity, ExchangeConfig,
};
use panoptic::fusion::{
    fuse, paste_masks, resolve_overlaps, stuff_area_threshold, FusionConfig,
};
use panoptic::io::{self, Profile};
use panoptic::metrics::{accumulate, report, MetricsReport};
use panoptic::scoremap::{argmax_map, normalize_scores};
use panoptic::synth::{generate_scene, oracle_fuse, oracle_pq, SceneSpec};

static LOCK: Mutex<()> = Mutex::new(());

fn serialized() -> std::sync::MutexGuard<'static, ()> {
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

fn criterion(name: &str, ok: bool, detail: &str) {
    println!(
        "ACCEPTANCE {name}: {} {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "acceptance criterion `{name}` failed: {detail}");
}

// ---------------------------------------------------------------------------
// Shared corpus: 200 seeded scenes up to 256x384 with up to 12 instances
// and noise in {0, 0.1, 0.3}, fused by both the optimized pipeline and
// the straight-line oracle.
// ---------------------------------------------------------------------------

struct SceneOutcome {
    seed: u64,
    noise: f64,
    fuse_matches_oracle: bool,
    counts_equal: bool,
    reals_close: bool,
    product_identity: bool,
    /// Only for noise-0 scenes: fused output equals the ground truth.
    roundtrip_exact: Option<bool>,
    pq: f64,
}

struct Corpus {
    outcomes: Vec<SceneOutcome>,
    elapsed: Duration,
}

fn reports_agree(fast: &MetricsReport, slow: &MetricsReport) -> (bool, bool) {
    let mut counts = fast.per_class.len() == slow.per_class.len()
        && fast.classes_evaluated == slow.classes_evaluated;
    let mut reals = (fast.pq - slow.pq).abs() <= 1e-9
        && (fast.sq - slow.sq).abs() <= 1e-9
        && (fast.rq - slow.rq).abs() <= 1e-9
        && (fast.pq_things - slow.pq_things).abs() <= 1e-9
        && (fast.pq_stuff - slow.pq_stuff).abs() <= 1e-9;
    for (class_id, f) in &fast.per_class {
        match slow.per_class.get(class_id) {
            None => counts = false,
            Some(s) => {
                counts &= (f.tp, f.fp, f.fn_) == (s.tp, s.fp, s.fn_);
                reals &= (f.pq - s.pq).abs() <= 1e-9
                    && (f.sq - s.sq).abs() <= 1e-9
                    && (f.rq - s.rq).abs() <= 1e-9;
            }
        }
    }
    (counts, reals)
}

fn corpus() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let catalog = Profile::Cityscapes.catalog();
        let dims = [(64u32, 96u32), (128, 192), (192, 288), (256, 384)];
        let noises = [0.0, 0.1, 0.3];
        let fractions = [1.0 / 512.0, 1.0 / 256.0];
        let start = Instant::now();
        let mut outcomes = Vec::with_capacity(200);
        for seed in 0..200u64 {
            let (height, width) = dims[seed as usize % dims.len()];
            let noise = noises[seed as usize % noises.len()];
            let config = FusionConfig {
                stuff_fraction: fractions[seed as usize % fractions.len()],
                ..FusionConfig::default()
            };
            let scene = generate_scene(&SceneSpec {
                seed,
                height,
                width,
                n_instances: (seed % 13) as u32,
                noise,
                catalog: catalog.clone(),
            })
            .expect("scene generation");
            let fast = fuse(&scene.semantic, &scene.instances, &catalog, &config)
                .expect("fuse");
            let slow = oracle_fuse(&scene.semantic, &scene.instances, &catalog, &config)
                .expect("oracle fuse");
            let fuse_matches_oracle =
                fast.ids() == slow.ids() && fast.segments() == slow.segments();

            let fast_report = report(
                &accumulate(&fast, &scene.gt, &catalog).expect("accumulate"),
                &catalog,
            )
            .expect("report");
            let slow_report = oracle_pq(&fast, &scene.gt, &catalog).expect("oracle pq");
            let (counts_equal, reals_close) = reports_agree(&fast_report, &slow_report);
            let product_identity = fast_report
                .per_class
                .values()
                .all(|c| (c.pq - c.sq * c.rq / 100.0).abs() <= 1e-9);
            let roundtrip_exact = (noise == 0.0).then(|| fast == scene.gt);
            outcomes.push(SceneOutcome {
                seed,
                noise,
                fuse_matches_oracle,
                counts_equal,
                reals_close,
                product_identity,
                roundtrip_exact,
                pq: fast_report.pq,
            });
        }
        Corpus {
            outcomes,
            elapsed: start.elapsed(),
        }
    })
}

#[test]
fn oracle_fusion_equivalence() {
    let _guard = serialized();
    let corpus = corpus();
    let mismatches: Vec<u64> = corpus
        .outcomes
        .iter()
        .filter(|o| !o.fuse_matches_oracle)
        .map(|o| o.seed)
        .collect();
    let within_budget = corpus.elapsed < Duration::from_secs(60);
    criterion(
        "oracle-fusion-equivalence",
        mismatches.is_empty() && within_budget,
        &format!(
            "(200 scenes byte-identical, corpus built in {:.1}s; mismatched seeds: {:?})",
            corpus.elapsed.as_secs_f64(),
            mismatches
        ),
    );
}

#[test]
fn oracle_pq_equivalence() {
    let _guard = serialized();
    let corpus = corpus();
    let bad: Vec<u64> = corpus
        .outcomes
        .iter()
        .filter(|o| !(o.counts_equal && o.reals_close))
        .map(|o| o.seed)
        .collect();
    criterion(
        "oracle-pq-equivalence",
        bad.is_empty(),
        &format!("(exact counts, reals within 1e-9; offending seeds: {bad:?})"),
    );
}

#[test]
fn noise_free_round_trip() {
    let _guard = serialized();
    let corpus = corpus();
    let zero_noise: Vec<&SceneOutcome> = corpus
        .outcomes
        .iter()
        .filter(|o| o.noise == 0.0)
        .collect();
    let enough = zero_noise.len() >= 50;
    let all_exact = zero_noise.iter().all(|o| o.roundtrip_exact == Some(true));
    let all_perfect = zero_noise.iter().all(|o| (o.pq - 100.0).abs() <= 1e-9);
    criterion(
        "noise-free-round-trip",
        enough && all_exact && all_perfect,
        &format!(
            "({} noise-0 scenes, fused == gt: {all_exact}, PQ == 100: {all_perfect})",
            zero_noise.len()
        ),
    );
}

#[test]
fn paper_constants() {
    let _guard = serialized();
    let cityscapes = Profile::Cityscapes.fusion_config();
    let vistas = Profile::Vistas.fusion_config();
    let threshold = stuff_area_threshold(cityscapes.stuff_fraction, 1024, 2048);
    let ok = threshold == 4096
        && cityscapes.alpha == 0.25
        && vistas.alpha == 0.25
        && cityscapes.stuff_fraction == 1.0 / 512.0
        && vistas.stuff_fraction == 1.0 / 256.0
        && FusionConfig::default().alpha == 0.25;
    criterion(
        "paper-constants",
        ok,
        &format!(
            "(cityscapes @1024x2048 threshold = {threshold}, alpha = {}, fractions = 1/512 and 1/256)",
            cityscapes.alpha
        ),
    );
}

#[test]
fn pq_product_identity() {
    let _guard = serialized();
    let corpus = corpus();
    let bad: Vec<u64> = corpus
        .outcomes
        .iter()
        .filter(|o| !o.product_identity)
        .map(|o| o.seed)
        .collect();
    criterion(
        "pq-product-identity",
        bad.is_empty(),
        &format!("(pq == sq*rq/100 within 1e-9 on every evaluated class; offenders: {bad:?})"),
    );
}

#[test]
fn baseline_degeneration() {
    let _guard = serialized();
    let catalog = Profile::Cityscapes.catalog();
    let config = FusionConfig {
        alpha: 1.0,
        stuff_fraction: 0.0,
        ..FusionConfig::default()
    };
    let mut violations = 0usize;
    for seed in 0..50u64 {
        let scene = generate_scene(&SceneSpec {
            seed: 10_000 + seed,
            height: 64,
            width: 96,
            n_instances: (seed % 10) as u32,
            noise: [0.0, 0.2, 0.4][seed as usize % 3],
            catalog: catalog.clone(),
        })
        .unwrap();
        let map = fuse(&scene.semantic, &scene.instances, &catalog, &config).unwrap();
        let normalized = normalize_scores(&scene.semantic).unwrap();
        let top = argmax_map(&normalized);
        let assignment = resolve_overlaps(&paste_masks(&scene.instances, &config).unwrap());
        for (p, &t) in top.iter().enumerate() {
            if catalog.is_thing(t)
                && assignment.entry_at(p).is_none()
                && !map.ids()[p].is_void()
            {
                violations += 1;
            }
        }
    }
    criterion(
        "baseline-degeneration",
        violations == 0,
        &format!("(alpha=1, f=0 over 50 scenes; unclaimed things pixels left non-void: {violations})"),
    );
}

#[test]
fn parallel_determinism() {
    let _guard = serialized();
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let catalog = Profile::Cityscapes.catalog();
    let config = FusionConfig::cityscapes();
    let pred_dir = root.join("pred");
    std::fs::create_dir_all(&pred_dir).unwrap();
    for seed in 0..50u64 {
        let stem = format!("img_{seed:03}");
        let scene = generate_scene(&SceneSpec {
            seed: 20_000 + seed,
            height: 48,
            width: 64,
            n_instances: 4,
            noise: 0.2,
            catalog: catalog.clone(),
        })
        .unwrap();
        io::write_scene(&scene, &catalog, root, &stem).unwrap();
        let pred = fuse(&scene.semantic, &scene.instances, &catalog, &config).unwrap();
        io::write_panoptic(&pred, &pred_dir.join(format!("{stem}.png"))).unwrap();
    }
    let eval = |jobs: &str, out: &Path| {
        let status = Command::new(env!("CARGO_BIN_EXE_panoptic"))
            .args([
                "eval",
                "--pred",
                pred_dir.to_str().unwrap(),
                "--gt",
                root.join("gt").to_str().unwrap(),
                "--catalog",
                root.join("catalog.json").to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--jobs",
                jobs,
            ])
            .status()
            .expect("spawn eval");
        assert!(status.success(), "eval --jobs {jobs} failed");
    };
    let m1 = root.join("metrics_j1.json");
    let m8 = root.join("metrics_j8.json");
    eval("1", &m1);
    eval("8", &m8);
    let identical = std::fs::read(&m1).unwrap() == std::fs::read(&m8).unwrap();
    criterion(
        "parallel-determinism",
        identical,
        "(eval --jobs 1 and --jobs 8 metrics JSON byte-identical on 50 images)",
    );
}

#[test]
fn fuse_performance() {
    let _guard = serialized();
    let catalog = Profile::Cityscapes.catalog();
    let config = FusionConfig::cityscapes();
    let scene = generate_scene(&SceneSpec {
        seed: 77,
        height: 512,
        width: 1024,
        n_instances: 20,
        noise: 0.2,
        catalog: catalog.clone(),
    })
    .unwrap();
    // Scores arriving as raw logits exercise the softmax too.
    let logits: Vec<f32> = scene
        .semantic
        .data()
        .iter()
        .map(|v| v * 8.0 - 2.0)
        .collect();
    let raw = panoptic::SemanticScoreMap::new(
        512,
        1024,
        scene.semantic.channel_order().to_vec(),
        logits,
    )
    .unwrap();

    let single_threaded = |scores: &panoptic::SemanticScoreMap| -> Duration {
        let work = || {
            let t = Instant::now();
            std::hint::black_box(
                fuse(scores, &scene.instances, &catalog, &config).unwrap(),
            );
            t.elapsed()
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        pool.install(|| {
            work(); // warm-up
            let mut times: Vec<Duration> = (0..5).map(|_| work()).collect();
            times.sort();
            times[2]
        })
    };
    let normalized_ms = single_threaded(&scene.semantic).as_secs_f64() * 1e3;
    let logits_ms = single_threaded(&raw).as_secs_f64() * 1e3;
    criterion(
        "fuse-performance",
        normalized_ms < 250.0 && logits_ms < 250.0,
        &format!(
            "(512x1024, 20 instances, 19 classes, single-threaded median: \
             {normalized_ms:.1} ms from probabilities, {logits_ms:.1} ms from logits; budget 250 ms)"
        ),
    );
}

#[test]
fn exchange_properties() {
    let _guard = serialized();
    let catalog = Profile::Cityscapes.catalog();

    // 100 random grids: four-connectivity never yields fewer clusters.
    use rand::{Rng, SeedableRng};
    let pool: Vec<u32> = vec![0, 1, 11, 12, 14, 19];
    let mut four_ge_eight = true;
    for seed in 0..100u64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let grid: Vec<u32> = (0..32 * 48)
            .map(|_| pool[rng.random_range(0..pool.len())])
            .collect();
        let cfg = |connectivity| ExchangeConfig {
            connectivity,
            min_cluster_area: 1,
        };
        let four =
            extract_things_clusters(&grid, 32, 48, &catalog, &cfg(Connectivity::Four)).unwrap();
        let eight =
            extract_things_clusters(&grid, 32, 48, &catalog, &cfg(Connectivity::Eight)).unwrap();
        four_ge_eight &= four.len() >= eight.len();
    }

    // Diagonal touch splits exactly as specified.
    let diag = vec![14u32, 1, 1, 14];
    let cfg = |connectivity| ExchangeConfig {
        connectivity,
        min_cluster_area: 1,
    };
    let eight =
        extract_things_clusters(&diag, 2, 2, &catalog, &cfg(Connectivity::Eight)).unwrap();
    let four = extract_things_clusters(&diag, 2, 2, &catalog, &cfg(Connectivity::Four)).unwrap();
    let diagonal_ok = eight.len() == 1 && four.len() == 2;

    // Expanded boxes always contain the originals.
    let mut expansion_ok = true;
    for seed in 0..20u64 {
        let scene = generate_scene(&SceneSpec {
            seed: 30_000 + seed,
            height: 64,
            width: 96,
            n_instances: 6,
            noise: 0.3,
            catalog: catalog.clone(),
        })
        .unwrap();
        let grid = argmax_map(&scene.semantic);
        let clusters =
            extract_things_clusters(&grid, 64, 96, &catalog, &cfg(Connectivity::Eight)).unwrap();
        let expanded = expand_boxes(&scene.instances, &clusters);
        for (det, grown) in scene.instances.detections().iter().zip(&expanded) {
            expansion_ok &= grown.x0 <= det.bbox.x0
                && grown.y0 <= det.bbox.y0
                && grown.x1 >= det.bbox.x1
                && grown.y1 >= det.bbox.y1;
        }
    }

    criterion(
        "exchange-properties",
        four_ge_eight && diagonal_ok && expansion_ok,
        &format!(
            "(four>=eight on 100 grids: {four_ge_eight}, diagonal split 2/1: {diagonal_ok}, \
             expansion superset: {expansion_ok})"
        ),
    );
}
