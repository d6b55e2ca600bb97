//! Panoptic maps on disk: a lossless 24-bit RGB raster where the pixel
//! value encodes the packed segment id as `R + 256*G + 65536*B`, plus a
//! JSON sidecar listing the segments.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segment::{PanopticMap, SegmentId, SegmentInfo};

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    segments: Vec<SegmentInfo>,
}

fn sidecar_path(png_path: &Path) -> PathBuf {
    png_path.with_extension("json")
}

pub fn write_panoptic(map: &PanopticMap, png_path: &Path) -> Result<()> {
    let mut raster = Vec::with_capacity(map.n_pixels() * 3);
    for id in map.ids() {
        if id.0 > 0x00FF_FFFF {
            return Err(Error::IdOverflow(id.0));
        }
        raster.push((id.0 & 0xFF) as u8);
        raster.push(((id.0 >> 8) & 0xFF) as u8);
        raster.push(((id.0 >> 16) & 0xFF) as u8);
    }
    let file = std::fs::File::create(png_path).map_err(|source| Error::Io {
        path: png_path.to_path_buf(),
        source,
    })?;
    let encoder = image::codecs::png::PngEncoder::new(std::io::BufWriter::new(file));
    image::ImageEncoder::write_image(
        encoder,
        &raster,
        map.width(),
        map.height(),
        image::ExtendedColorType::Rgb8,
    )
    .map_err(|source| Error::Png {
        path: png_path.to_path_buf(),
        source,
    })?;

    let sidecar = Sidecar {
        segments: map.segments().to_vec(),
    };
    let json = serde_json::to_string_pretty(&sidecar).expect("sidecar serialization");
    let sc_path = sidecar_path(png_path);
    std::fs::write(&sc_path, json + "\n").map_err(|source| Error::Io {
        path: sc_path,
        source,
    })
}

pub fn read_panoptic(png_path: &Path) -> Result<PanopticMap> {
    if !png_path.exists() {
        return Err(Error::MissingInput(png_path.to_path_buf()));
    }
    let image = image::ImageReader::open(png_path)
        .map_err(|source| Error::Io {
            path: png_path.to_path_buf(),
            source,
        })?
        .decode()
        .map_err(|source| Error::Png {
            path: png_path.to_path_buf(),
            source,
        })?
        .into_rgb8();
    let (width, height) = image.dimensions();
    let ids: Vec<SegmentId> = image
        .pixels()
        .map(|p| SegmentId(p.0[0] as u32 + 256 * p.0[1] as u32 + 65536 * p.0[2] as u32))
        .collect();
    let map = PanopticMap::from_ids(height, width, ids)
        .map_err(|e| Error::MalformedRaster(e.to_string()))?;

    let sc_path = sidecar_path(png_path);
    if !sc_path.exists() {
        return Err(Error::SidecarMismatch(format!(
            "sidecar {} not found",
            sc_path.display()
        )));
    }
    let json = std::fs::read_to_string(&sc_path).map_err(|source| Error::Io {
        path: sc_path.clone(),
        source,
    })?;
    let sidecar: Sidecar = serde_json::from_str(&json).map_err(|source| Error::Json {
        path: sc_path,
        source,
    })?;
    let mut listed = sidecar.segments;
    listed.sort_unstable_by_key(|s| s.id);
    if listed != map.segments() {
        return Err(Error::SidecarMismatch(
            "sidecar segments do not match the raster contents".into(),
        ));
    }
    Ok(map)
}
