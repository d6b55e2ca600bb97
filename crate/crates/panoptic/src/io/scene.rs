//! On-disk layout for generated scenes, shared by the CLI and tests.
//!
//! `<dir>/<stem>.pstf`               semantic score tensor (H, W, C)
//! `<dir>/<stem>.instances.json`     detection manifest
//! `<dir>/<stem>.masks/det_*.pstf`   per-detection soft masks
//! `<dir>/gt/<stem>.png` + `.json`   ground-truth panoptic raster/sidecar
//! `<dir>/catalog.json`              the catalog the scene was built with

use std::path::Path;

use crate::catalog::ClassCatalog;
use crate::error::{Error, Result};
use crate::io::catalog_file::write_catalog;
use crate::io::manifest::write_instances;
use crate::io::panoptic_png::write_panoptic;
use crate::io::tensor::{semantic_to_tensor, write_tensor};
use crate::synth::SynthScene;

pub fn write_scene(
    scene: &SynthScene,
    catalog: &ClassCatalog,
    dir: &Path,
    stem: &str,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    write_tensor(
        &semantic_to_tensor(&scene.semantic),
        &dir.join(format!("{stem}.pstf")),
    )?;
    write_instances(&scene.instances, dir, stem)?;
    let gt_dir = dir.join("gt");
    std::fs::create_dir_all(&gt_dir).map_err(|source| Error::Io {
        path: gt_dir.clone(),
        source,
    })?;
    write_panoptic(&scene.gt, &gt_dir.join(format!("{stem}.png")))?;
    write_catalog(catalog, &dir.join("catalog.json"))
}
