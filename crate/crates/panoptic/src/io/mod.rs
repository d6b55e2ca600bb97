//! File formats and dataset plumbing: PSTF tensors, instance manifests,
//! panoptic PNG rasters with JSON sidecars, catalog files and shipped
//! profiles, proposal documents, and directory evaluation.

pub mod catalog_file;
pub mod eval;
pub mod manifest;
pub mod panoptic_png;
pub mod proposals;
pub mod scene;
pub mod tensor;

pub use catalog_file::{read_catalog, write_catalog, Profile};
pub use eval::{evaluate_directories, pair_by_stem, write_metrics};
pub use manifest::{read_instances, write_instances};
pub use panoptic_png::{read_panoptic, write_panoptic};
pub use proposals::{proposals_doc, write_proposals, ProposalsDoc};
pub use scene::write_scene;
pub use tensor::{read_tensor, semantic_from_tensor, semantic_to_tensor, write_tensor, Tensor};
