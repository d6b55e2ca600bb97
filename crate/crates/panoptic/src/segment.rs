//! Packed segment ids and the panoptic label map.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::catalog::VOID_ID;
use crate::error::{Error, Result};
use crate::par;

/// Instances per class are capped so ids pack as `class_id * 1000 + index`.
pub const INSTANCE_CAPACITY: u32 = 1000;

/// A (class, instance) pair packed into one integer:
/// `class_id * 1000 + instance_index`. Stuff and void use index 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SegmentId(pub u32);

impl SegmentId {
    pub const VOID: SegmentId = SegmentId(0);

    pub fn encode(class_id: u32, instance_index: u32) -> Result<SegmentId> {
        if instance_index >= INSTANCE_CAPACITY {
            return Err(Error::InstanceCapacity(instance_index as u64));
        }
        class_id
            .checked_mul(INSTANCE_CAPACITY)
            .and_then(|v| v.checked_add(instance_index))
            .map(SegmentId)
            .ok_or_else(|| {
                Error::InvalidArgument(format!("class id {class_id} is too large to pack"))
            })
    }

    pub fn decode(self) -> (u32, u32) {
        (self.0 / INSTANCE_CAPACITY, self.0 % INSTANCE_CAPACITY)
    }

    pub fn class_id(self) -> u32 {
        self.0 / INSTANCE_CAPACITY
    }

    pub fn instance_index(self) -> u32 {
        self.0 % INSTANCE_CAPACITY
    }

    pub fn is_void(self) -> bool {
        self.0 == 0
    }
}

/// Metadata for one segment present in a [`PanopticMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentInfo {
    pub id: SegmentId,
    pub class_id: u32,
    pub instance_index: u32,
    pub area: u64,
}

/// The final output format: one (class, instance) pair per pixel plus the
/// list of segments actually present, sorted by packed id.
#[derive(Debug, Clone, PartialEq)]
pub struct PanopticMap {
    height: u32,
    width: u32,
    ids: Vec<SegmentId>,
    segments: Vec<SegmentInfo>,
}

impl PanopticMap {
    /// Builds a map from a pixel id grid, rebuilding the segment list.
    /// Void pixels must carry exactly `SegmentId::VOID`.
    pub fn from_ids(height: u32, width: u32, ids: Vec<SegmentId>) -> Result<Self> {
        let expected = height as usize * width as usize;
        if ids.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "label grid has {} entries, expected {}x{} = {}",
                ids.len(),
                height,
                width,
                expected
            )));
        }
        let areas = par::fold_chunks(
            &ids,
            8192,
            HashMap::<SegmentId, u64>::new,
            |mut acc, _i, chunk| {
                for &id in chunk {
                    *acc.entry(id).or_insert(0) += 1;
                }
                acc
            },
            |mut a, b| {
                for (id, n) in b {
                    *a.entry(id).or_insert(0) += n;
                }
                a
            },
        );
        let mut segments = Vec::with_capacity(areas.len());
        for (&id, &area) in &areas {
            let (class_id, instance_index) = id.decode();
            if class_id == VOID_ID {
                if instance_index != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "void pixels must have instance index 0, found id {}",
                        id.0
                    )));
                }
                continue;
            }
            segments.push(SegmentInfo {
                id,
                class_id,
                instance_index,
                area,
            });
        }
        segments.sort_unstable_by_key(|s| s.id);
        Ok(Self {
            height,
            width,
            ids,
            segments,
        })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn n_pixels(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[SegmentId] {
        &self.ids
    }

    /// Segments present in the map, sorted by packed id.
    pub fn segments(&self) -> &[SegmentInfo] {
        &self.segments
    }

    pub fn id_at(&self, x: u32, y: u32) -> SegmentId {
        self.ids[y as usize * self.width as usize + x as usize]
    }

    /// (class_id, instance_index) at a pixel.
    pub fn label_at(&self, x: u32, y: u32) -> (u32, u32) {
        self.id_at(x, y).decode()
    }

    /// Checks the kind discipline against a catalog: stuff pixels carry
    /// index 0, thing pixels index >= 1, and every class is known.
    pub fn validate_kinds(&self, catalog: &crate::catalog::ClassCatalog) -> Result<()> {
        use crate::catalog::ClassKind;
        for seg in &self.segments {
            match catalog.kind_of(seg.class_id) {
                None => return Err(Error::UnknownClass(seg.class_id)),
                Some(ClassKind::Stuff) if seg.instance_index != 0 => {
                    return Err(Error::InvalidArgument(format!(
                        "stuff class {} carries instance index {}",
                        seg.class_id, seg.instance_index
                    )));
                }
                Some(ClassKind::Thing) if seg.instance_index == 0 => {
                    return Err(Error::InvalidArgument(format!(
                        "thing class {} carries instance index 0",
                        seg.class_id
                    )));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_examples() {
        assert_eq!(SegmentId::encode(26, 3).unwrap(), SegmentId(26003));
        assert_eq!(SegmentId::encode(7, 0).unwrap(), SegmentId(7000));
        assert_eq!(SegmentId::encode(0, 0).unwrap(), SegmentId::VOID);
    }

    #[test]
    fn encode_capacity_error() {
        assert!(matches!(
            SegmentId::encode(1, 1000).unwrap_err(),
            Error::InstanceCapacity(1000)
        ));
    }

    #[test]
    fn decode_examples() {
        assert_eq!(SegmentId(26003).decode(), (26, 3));
        assert_eq!(SegmentId(0).decode(), (0, 0));
        // Arithmetic edge: class 0 is reserved; callers must flag it.
        assert_eq!(SegmentId(999).decode(), (0, 999));
    }

    #[test]
    fn map_rebuilds_segments() {
        let ids = vec![
            SegmentId(1000),
            SegmentId(1000),
            SegmentId(26001),
            SegmentId::VOID,
        ];
        let map = PanopticMap::from_ids(2, 2, ids).unwrap();
        let segs = map.segments();
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].id, SegmentId(1000));
        assert_eq!(segs[0].area, 2);
        assert_eq!(segs[1].id, SegmentId(26001));
        assert_eq!(segs[1].area, 1);
        assert_eq!(map.label_at(0, 1), (26, 1));
    }

    #[test]
    fn void_with_nonzero_index_is_rejected() {
        let err = PanopticMap::from_ids(1, 1, vec![SegmentId(5)]).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }
}
