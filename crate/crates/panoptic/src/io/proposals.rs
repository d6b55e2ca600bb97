//! Region-proposal JSON emitted for external detector pipelines.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exchange::{Connectivity, ThingsCluster};
use crate::instance::BoundingBox;

#[derive(Debug, Serialize, Deserialize)]
pub struct ProposalsImage {
    pub height: u32,
    pub width: u32,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProposalEntry {
    pub class_id: u32,
    /// [x0, y0, x1, y1], inclusive corners.
    #[serde(rename = "box")]
    pub bbox: [u32; 4],
    pub area: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ProposalsDoc {
    pub image: ProposalsImage,
    pub connectivity: u8,
    pub min_cluster_area: u64,
    pub proposals: Vec<ProposalEntry>,
    /// Expanded detection boxes, parallel to the input manifest order.
    /// Present only when detections were supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expanded_boxes: Option<Vec<[u32; 4]>>,
}

fn box_array(b: &BoundingBox) -> [u32; 4] {
    [b.x0, b.y0, b.x1, b.y1]
}

pub fn proposals_doc(
    height: u32,
    width: u32,
    connectivity: Connectivity,
    min_cluster_area: u64,
    clusters: &[ThingsCluster],
    expanded: Option<&[BoundingBox]>,
) -> ProposalsDoc {
    ProposalsDoc {
        image: ProposalsImage { height, width },
        connectivity: match connectivity {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        },
        min_cluster_area,
        proposals: clusters
            .iter()
            .map(|c| ProposalEntry {
                class_id: c.class_id,
                bbox: box_array(&c.bbox),
                area: c.area,
            })
            .collect(),
        expanded_boxes: expanded.map(|boxes| boxes.iter().map(box_array).collect()),
    }
}

pub fn write_proposals(doc: &ProposalsDoc, path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(doc).expect("proposals serialization");
    std::fs::write(path, json + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doc_serializes_boxes_in_order() {
        let clusters = vec![ThingsCluster {
            class_id: 12,
            pixels: vec![(2, 1)],
            bbox: BoundingBox::new(2, 1, 4, 3),
            area: 9,
        }];
        let doc = proposals_doc(10, 20, Connectivity::Eight, 16, &clusters, None);
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.contains("\"box\":[2,1,4,3]"));
        assert!(!json.contains("expanded_boxes"));
        let with_exp = proposals_doc(
            10,
            20,
            Connectivity::Four,
            1,
            &clusters,
            Some(&[BoundingBox::new(0, 0, 5, 5)]),
        );
        let json = serde_json::to_string(&with_exp).unwrap();
        assert!(json.contains("\"expanded_boxes\":[[0,0,5,5]]"));
        assert!(json.contains("\"connectivity\":4"));
    }
}
