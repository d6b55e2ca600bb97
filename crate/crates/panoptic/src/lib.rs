//! Panoptic segmentation post-processing and evaluation.
//!
//! Fuses per-pixel semantic scores with instance detections into a single
//! panoptic map (per-pixel class plus instance id), derives region
//! proposals and box expansions from semantic things clusters, and scores
//! predictions with the PQ/SQ/RQ metric family. Seeded synthetic scenes
//! and brute-force oracles make every pipeline differentially testable
//! without trained networks.
//!
//! Per-pixel loops run on rayon with the default `parallel` feature and
//! fall back to plain loops without it; both produce identical bytes.

pub mod catalog;
pub mod error;
pub mod exchange;
pub mod fusion;
pub mod instance;
pub mod io;
pub mod metrics;
pub mod par;
pub mod scoremap;
pub mod segment;
pub mod synth;

pub use catalog::{ClassCatalog, ClassDef, ClassKind, VOID_ID};
pub use error::{Error, ErrorKind, Result};
pub use fusion::{fuse, FusionConfig};
pub use instance::{BoundingBox, InstanceDetection, InstanceSet};
pub use metrics::{accumulate, match_segments, merge_stats, report, MetricsReport, PqStats};
pub use scoremap::{argmax_map, normalize_scores, SemanticScoreMap};
pub use segment::{PanopticMap, SegmentId, SegmentInfo};
