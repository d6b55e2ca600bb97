//! Instance manifest JSON: detection metadata plus one mask tensor file
//! per detection, referenced relative to the manifest location.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{BoundingBox, InstanceDetection, InstanceSet};
use crate::io::tensor::{read_tensor, write_tensor, Tensor};

#[derive(Debug, Serialize, Deserialize)]
struct ManifestImage {
    height: u32,
    width: u32,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestDetection {
    class_id: u32,
    confidence: f32,
    /// [x0, y0, x1, y1], inclusive corners.
    #[serde(rename = "box")]
    bbox: [u32; 4],
    mask_file: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    image: ManifestImage,
    detections: Vec<ManifestDetection>,
}

pub fn read_instances(manifest_path: &Path) -> Result<InstanceSet> {
    if !manifest_path.exists() {
        return Err(Error::MissingInput(manifest_path.to_path_buf()));
    }
    let json = std::fs::read_to_string(manifest_path).map_err(|source| Error::Io {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let manifest: Manifest = serde_json::from_str(&json).map_err(|source| Error::Json {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let mut detections = Vec::with_capacity(manifest.detections.len());
    for det in manifest.detections {
        let [x0, y0, x1, y1] = det.bbox;
        let bbox = BoundingBox::new(x0, y0, x1, y1);
        let mask = read_tensor(&base.join(&det.mask_file))?;
        if mask.rank() != 2 || mask.dims[0] != bbox.height() || mask.dims[1] != bbox.width() {
            return Err(Error::MaskShapeMismatch {
                mask_h: mask.dims.first().copied().unwrap_or(0),
                mask_w: mask.dims.get(1).copied().unwrap_or(0),
                box_h: bbox.height(),
                box_w: bbox.width(),
            });
        }
        detections.push(InstanceDetection {
            class_id: det.class_id,
            confidence: det.confidence,
            bbox,
            mask: mask.data,
        });
    }
    InstanceSet::new(manifest.image.height, manifest.image.width, detections)
}

/// Writes `<stem>.instances.json` and one mask tensor per detection under
/// `<stem>.masks/` next to it. Returns the manifest path.
pub fn write_instances(
    instances: &InstanceSet,
    dir: &Path,
    stem: &str,
) -> Result<std::path::PathBuf> {
    let masks_dir_name = format!("{stem}.masks");
    let masks_dir = dir.join(&masks_dir_name);
    std::fs::create_dir_all(&masks_dir).map_err(|source| Error::Io {
        path: masks_dir.clone(),
        source,
    })?;
    let mut entries = Vec::with_capacity(instances.len());
    for (i, det) in instances.detections().iter().enumerate() {
        let mask_file = format!("{masks_dir_name}/det_{i:03}.pstf");
        let tensor = Tensor::new(
            vec![det.bbox.height(), det.bbox.width()],
            det.mask.clone(),
        )?;
        write_tensor(&tensor, &dir.join(&mask_file))?;
        entries.push(ManifestDetection {
            class_id: det.class_id,
            confidence: det.confidence,
            bbox: [det.bbox.x0, det.bbox.y0, det.bbox.x1, det.bbox.y1],
            mask_file,
        });
    }
    let manifest = Manifest {
        image: ManifestImage {
            height: instances.height(),
            width: instances.width(),
        },
        detections: entries,
    };
    let path = dir.join(format!("{stem}.instances.json"));
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialization");
    std::fs::write(&path, json + "\n").map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}
