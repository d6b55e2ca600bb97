//! Geometric information exchange from the semantic branch to the
//! detector: things clusters become region proposals, and detection boxes
//! grow to cover the matching semantic segment.

use crate::catalog::ClassCatalog;
use crate::error::{Error, Result};
use crate::instance::{BoundingBox, InstanceSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExchangeConfig {
    pub connectivity: Connectivity,
    /// Clusters below this pixel count are discarded.
    pub min_cluster_area: u64,
}

impl Default for ExchangeConfig {
    fn default() -> Self {
        Self {
            connectivity: Connectivity::Eight,
            min_cluster_area: 16,
        }
    }
}

impl ExchangeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_cluster_area < 1 {
            return Err(Error::ValueOutOfRange {
                what: "min_cluster_area",
                value: 0.0,
            });
        }
        Ok(())
    }
}

/// One connected component of same-class things pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThingsCluster {
    pub class_id: u32,
    /// Member coordinates as (x, y), in raster order.
    pub pixels: Vec<(u32, u32)>,
    /// Tight bounding box of the member pixels.
    pub bbox: BoundingBox,
    pub area: u64,
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut i: u32) -> u32 {
        while self.parent[i as usize] != i {
            let grand = self.parent[self.parent[i as usize] as usize];
            self.parent[i as usize] = grand;
            i = grand;
        }
        i
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            self.parent[ra as usize] = rb;
            self.size[rb as usize] += self.size[ra as usize];
        } else {
            self.parent[rb as usize] = ra;
            self.size[ra as usize] += self.size[rb as usize];
        }
    }
}

/// Finds connected components of same-class things pixels in a class grid.
///
/// Returns clusters of at least `min_cluster_area` pixels, sorted by
/// (class_id, bbox.y0, bbox.x0) with the first raster pixel as the final
/// tie-break, so identical inputs yield identical orderings.
pub fn extract_things_clusters(
    class_grid: &[u32],
    height: u32,
    width: u32,
    catalog: &ClassCatalog,
    config: &ExchangeConfig,
) -> Result<Vec<ThingsCluster>> {
    config.validate()?;
    let n = height as usize * width as usize;
    if class_grid.len() != n {
        return Err(Error::InvalidArgument(format!(
            "class grid has {} pixels, expected {}x{}",
            class_grid.len(),
            height,
            width
        )));
    }
    let w = width as usize;
    let mut is_thing = vec![false; n];
    for (p, &class) in class_grid.iter().enumerate() {
        if class == crate::catalog::VOID_ID {
            continue;
        }
        match catalog.kind_of(class) {
            Some(crate::catalog::ClassKind::Thing) => is_thing[p] = true,
            Some(crate::catalog::ClassKind::Stuff) => {}
            None => return Err(Error::UnknownClass(class)),
        }
    }

    let mut uf = UnionFind::new(n);
    for y in 0..height as usize {
        for x in 0..w {
            let p = y * w + x;
            if !is_thing[p] {
                continue;
            }
            let class = class_grid[p];
            // West and north neighbors; the diagonals join under
            // eight-connectivity. Scanning forward means every edge is
            // seen exactly once.
            if x > 0 && is_thing[p - 1] && class_grid[p - 1] == class {
                uf.union(p as u32, (p - 1) as u32);
            }
            if y > 0 {
                let up = p - w;
                if is_thing[up] && class_grid[up] == class {
                    uf.union(p as u32, up as u32);
                }
                if config.connectivity == Connectivity::Eight {
                    if x > 0 && is_thing[up - 1] && class_grid[up - 1] == class {
                        uf.union(p as u32, (up - 1) as u32);
                    }
                    if x + 1 < w && is_thing[up + 1] && class_grid[up + 1] == class {
                        uf.union(p as u32, (up + 1) as u32);
                    }
                }
            }
        }
    }

    let mut by_root: std::collections::HashMap<u32, ThingsCluster> =
        std::collections::HashMap::new();
    for y in 0..height {
        for x in 0..width {
            let p = (y as usize) * w + x as usize;
            if !is_thing[p] {
                continue;
            }
            let root = uf.find(p as u32);
            let entry = by_root.entry(root).or_insert_with(|| ThingsCluster {
                class_id: class_grid[p],
                pixels: Vec::new(),
                bbox: BoundingBox::new(x, y, x, y),
                area: 0,
            });
            entry.pixels.push((x, y));
            entry.area += 1;
            entry.bbox.x0 = entry.bbox.x0.min(x);
            entry.bbox.y0 = entry.bbox.y0.min(y);
            entry.bbox.x1 = entry.bbox.x1.max(x);
            entry.bbox.y1 = entry.bbox.y1.max(y);
        }
    }

    let mut clusters: Vec<ThingsCluster> = by_root
        .into_values()
        .filter(|c| c.area >= config.min_cluster_area)
        .collect();
    clusters.sort_by_key(|c| {
        let first = c.pixels[0];
        (c.class_id, c.bbox.y0, c.bbox.x0, first.1, first.0)
    });
    Ok(clusters)
}

/// One region proposal per cluster: its class and tight bounding box,
/// in cluster order.
pub fn propose_boxes(clusters: &[ThingsCluster]) -> Vec<(u32, BoundingBox)> {
    clusters.iter().map(|c| (c.class_id, c.bbox)).collect()
}

/// Grows each detection box to cover its matched semantic segment.
///
/// A detection matches the same-class cluster with the most pixels inside
/// its box (at least one required); ties go to the earlier cluster. The
/// result is the union of the original box and the cluster's box, so it
/// always contains the original. Unmatched boxes pass through unchanged.
pub fn expand_boxes(instances: &InstanceSet, clusters: &[ThingsCluster]) -> Vec<BoundingBox> {
    instances
        .detections()
        .iter()
        .map(|det| {
            let mut best: Option<(u64, usize)> = None;
            for (idx, cluster) in clusters.iter().enumerate() {
                if cluster.class_id != det.class_id {
                    continue;
                }
                let overlap = cluster
                    .pixels
                    .iter()
                    .filter(|&&(x, y)| det.bbox.contains(x, y))
                    .count() as u64;
                if overlap == 0 {
                    continue;
                }
                if best.is_none_or(|(best_overlap, _)| overlap > best_overlap) {
                    best = Some((overlap, idx));
                }
            }
            match best {
                Some((_, idx)) => det.bbox.union(&clusters[idx].bbox),
                None => det.bbox,
            }
        })
        .collect()
}
