//! Catalog JSON files and the two shipped dataset profiles.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::catalog::{ClassCatalog, ClassDef, VOID_ID};
use crate::error::{Error, Result};
use crate::fusion::FusionConfig;

#[derive(Debug, Serialize, Deserialize)]
struct CatalogFile {
    void_id: u32,
    classes: Vec<ClassDef>,
}

fn catalog_from_json(json: &str, path: &Path) -> Result<ClassCatalog> {
    let file: CatalogFile = serde_json::from_str(json).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    if file.void_id != VOID_ID {
        return Err(Error::InvalidCatalog(format!(
            "void_id must be {}, got {}",
            VOID_ID, file.void_id
        )));
    }
    ClassCatalog::new(file.classes)
}

pub fn read_catalog(path: &Path) -> Result<ClassCatalog> {
    if !path.exists() {
        return Err(Error::MissingInput(path.to_path_buf()));
    }
    let json = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    catalog_from_json(&json, path)
}

pub fn write_catalog(catalog: &ClassCatalog, path: &Path) -> Result<()> {
    let file = CatalogFile {
        void_id: VOID_ID,
        classes: catalog.classes().to_vec(),
    };
    let json = serde_json::to_string_pretty(&file).expect("catalog serialization");
    std::fs::write(path, json + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Shipped dataset profiles. A profile carries a class catalog plus the
/// fusion defaults tuned for it: alpha 0.25 for both, stuff fraction
/// 1/512 for cityscapes and 1/256 for vistas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Cityscapes,
    Vistas,
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::Cityscapes => "cityscapes",
            Profile::Vistas => "vistas",
        }
    }

    pub fn catalog(&self) -> ClassCatalog {
        let (json, name) = match self {
            Profile::Cityscapes => (
                include_str!("../../data/cityscapes.json"),
                "cityscapes.json",
            ),
            Profile::Vistas => (include_str!("../../data/vistas.json"), "vistas.json"),
        };
        catalog_from_json(json, Path::new(name)).expect("embedded profile catalog")
    }

    pub fn fusion_config(&self) -> FusionConfig {
        match self {
            Profile::Cityscapes => FusionConfig::cityscapes(),
            Profile::Vistas => FusionConfig::vistas(),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cityscapes" => Ok(Profile::Cityscapes),
            "vistas" => Ok(Profile::Vistas),
            other => Err(Error::InvalidArgument(format!(
                "unknown profile `{other}` (expected cityscapes or vistas)"
            ))),
        }
    }
}
