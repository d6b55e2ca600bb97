//! Argument parsing and command dispatch for the `panoptic` binary.
//!
//! Exit codes: 0 on success, 1 on validation or usage errors, 2 on
//! malformed on-disk data.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};

use panoptic::catalog::ClassCatalog;
use panoptic::error::{Error, ErrorKind, Result};
use panoptic::exchange::{self, Connectivity, ExchangeConfig};
use panoptic::fusion::fuse;
use panoptic::io::{self, Profile};
use panoptic::scoremap::argmax_map;
use panoptic::synth::{generate_scene, SceneSpec};

#[derive(Parser)]
#[command(
    name = "panoptic",
    version,
    about = "Fuse segmentation branch outputs, emit region proposals, \
             synthesize test scenes, and evaluate panoptic quality"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn parse_fraction(s: &str) -> std::result::Result<f64, String> {
    let value = match s.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num.trim().parse().map_err(|_| format!("bad fraction `{s}`"))?;
            let den: f64 = den.trim().parse().map_err(|_| format!("bad fraction `{s}`"))?;
            if den == 0.0 {
                return Err(format!("bad fraction `{s}`: zero denominator"));
            }
            num / den
        }
        None => s.trim().parse().map_err(|_| format!("bad fraction `{s}`"))?,
    };
    if !(0.0..=1.0).contains(&value) {
        return Err(format!("fraction `{s}` is outside [0, 1]"));
    }
    Ok(value)
}

fn parse_profile(s: &str) -> std::result::Result<Profile, String> {
    Profile::from_str(s).map_err(|e| e.to_string())
}

fn parse_connectivity(s: &str) -> std::result::Result<Connectivity, String> {
    match s {
        "4" => Ok(Connectivity::Four),
        "8" => Ok(Connectivity::Eight),
        other => Err(format!("connectivity must be 4 or 8, got `{other}`")),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fuse a semantic score tensor with an instance manifest into a
    /// panoptic PNG + sidecar.
    Fuse {
        /// Semantic scores, a rank-3 (H, W, C) PSTF tensor.
        #[arg(long)]
        semantic: PathBuf,
        /// Instance manifest JSON.
        #[arg(long)]
        instances: PathBuf,
        /// Catalog JSON; defaults to the profile's catalog.
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Dataset profile (cityscapes or vistas); sets alpha and the
        /// stuff fraction.
        #[arg(long, value_parser = parse_profile)]
        profile: Option<Profile>,
        /// Stuff-substitution score threshold.
        #[arg(long)]
        alpha: Option<f32>,
        /// Minimum stuff segment size as a fraction (e.g. 1/512 or 0.002).
        #[arg(long, value_parser = parse_fraction)]
        stuff_fraction: Option<f64>,
        /// Output directory; the raster is named after the tensor stem.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a directory of predictions against ground truth.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long, value_parser = parse_profile)]
        profile: Option<Profile>,
        /// Where to write the metrics JSON.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for per-image accumulation.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Emit region proposals (and optionally expanded detection boxes)
    /// derived from semantic things clusters.
    Proposals {
        #[arg(long)]
        semantic: PathBuf,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long, value_parser = parse_profile)]
        profile: Option<Profile>,
        /// Pixel connectivity for clustering: 4 or 8.
        #[arg(long, default_value = "8", value_parser = parse_connectivity)]
        connectivity: Connectivity,
        /// Discard clusters below this pixel count.
        #[arg(long, default_value_t = 16)]
        min_cluster_area: u64,
        /// Instance manifest; when given, expanded boxes are included.
        #[arg(long)]
        instances: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic scene on disk.
    Synth {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        height: u32,
        #[arg(long)]
        width: u32,
        /// Number of thing instances to place.
        #[arg(long)]
        instances: u32,
        /// Corruption magnitude in [0, 1].
        #[arg(long)]
        noise: f64,
        #[arg(long)]
        out: PathBuf,
        /// File stem for the scene files.
        #[arg(long, default_value = "scene")]
        name: String,
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Dataset profile for the catalog (default cityscapes).
        #[arg(long, value_parser = parse_profile)]
        profile: Option<Profile>,
    },
}

fn resolve_catalog(path: &Option<PathBuf>, profile: Option<Profile>) -> Result<ClassCatalog> {
    match (path, profile) {
        (Some(path), _) => io::read_catalog(path),
        (None, Some(profile)) => Ok(profile.catalog()),
        (None, None) => Err(Error::InvalidArgument(
            "either --catalog or --profile is required".into(),
        )),
    }
}

fn load_semantic(path: &Path, catalog: &ClassCatalog) -> Result<panoptic::SemanticScoreMap> {
    let tensor = io::read_tensor(path)?;
    io::semantic_from_tensor(tensor, catalog.channel_order())
}

fn stem_of(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("panoptic")
        .to_string()
}

fn run_command(command: Command) -> Result<()> {
    match command {
        Command::Fuse {
            semantic,
            instances,
            catalog,
            profile,
            alpha,
            stuff_fraction,
            out,
        } => {
            let cat = resolve_catalog(&catalog, profile)?;
            let mut config = profile
                .map(|p| p.fusion_config())
                .unwrap_or_default();
            if let Some(alpha) = alpha {
                config.alpha = alpha;
            }
            if let Some(fraction) = stuff_fraction {
                config.stuff_fraction = fraction;
            }
            let scores = load_semantic(&semantic, &cat)?;
            let set = io::read_instances(&instances)?;
            let map = fuse(&scores, &set, &cat, &config)?;
            std::fs::create_dir_all(&out).map_err(|source| Error::Io {
                path: out.clone(),
                source,
            })?;
            let png_path = out.join(format!("{}.png", stem_of(&semantic)));
            io::write_panoptic(&map, &png_path)?;
            println!(
                "fused {}x{} -> {} ({} segments)",
                map.width(),
                map.height(),
                png_path.display(),
                map.segments().len()
            );
            Ok(())
        }
        Command::Eval {
            pred,
            gt,
            catalog,
            profile,
            out,
            jobs,
        } => {
            let cat = resolve_catalog(&catalog, profile)?;
            let report = io::evaluate_directories(&pred, &gt, &cat, jobs)?;
            io::write_metrics(&report, &out)?;
            println!(
                "PQ {:.2}  SQ {:.2}  RQ {:.2}  PQ_th {:.2}  PQ_st {:.2}  ({} classes) -> {}",
                report.pq,
                report.sq,
                report.rq,
                report.pq_things,
                report.pq_stuff,
                report.classes_evaluated,
                out.display()
            );
            Ok(())
        }
        Command::Proposals {
            semantic,
            catalog,
            profile,
            connectivity,
            min_cluster_area,
            instances,
            out,
        } => {
            let cat = resolve_catalog(&catalog, profile)?;
            let scores = load_semantic(&semantic, &cat)?;
            let grid = argmax_map(&scores);
            let config = ExchangeConfig {
                connectivity,
                min_cluster_area,
            };
            let clusters = exchange::extract_things_clusters(
                &grid,
                scores.height(),
                scores.width(),
                &cat,
                &config,
            )?;
            let expanded = match &instances {
                Some(path) => {
                    let set = io::read_instances(path)?;
                    Some(exchange::expand_boxes(&set, &clusters))
                }
                None => None,
            };
            let doc = io::proposals_doc(
                scores.height(),
                scores.width(),
                connectivity,
                min_cluster_area,
                &clusters,
                expanded.as_deref(),
            );
            io::write_proposals(&doc, &out)?;
            println!("{} proposals -> {}", doc.proposals.len(), out.display());
            Ok(())
        }
        Command::Synth {
            seed,
            height,
            width,
            instances,
            noise,
            out,
            name,
            catalog,
            profile,
        } => {
            let cat = resolve_catalog(&catalog, Some(profile.unwrap_or(Profile::Cityscapes)))?;
            let scene = generate_scene(&SceneSpec {
                seed,
                height,
                width,
                n_instances: instances,
                noise,
                catalog: cat.clone(),
            })?;
            io::write_scene(&scene, &cat, &out, &name)?;
            println!(
                "scene `{}` ({}x{}, {} detections) -> {}",
                name,
                width,
                height,
                scene.instances.len(),
                out.display()
            );
            Ok(())
        }
    }
}

/// Parses and runs; returns the process exit code.
pub fn run<I>(args: I) -> i32
where
    I: IntoIterator<Item = String>,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // Usage problems exit 1; --help and --version exit 0.
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return code;
        }
    };
    match run_command(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            match err.kind() {
                ErrorKind::Validation => 1,
                ErrorKind::Format => 2,
            }
        }
    }
}
