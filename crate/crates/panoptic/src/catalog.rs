//! The label universe: class ids, names, things/stuff designation.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reserved label for pixels with no confident class assignment.
pub const VOID_ID: u32 = 0;

/// Countable objects (`Thing`) get per-instance ids; region classes
/// (`Stuff`) share one segment per class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Thing,
    Stuff,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassDef {
    pub id: u32,
    pub name: String,
    pub kind: ClassKind,
}

/// Immutable catalog of classes. Ids are unique and strictly positive;
/// id 0 is reserved for void.
#[derive(Debug, Clone)]
pub struct ClassCatalog {
    classes: Vec<ClassDef>,
    by_id: HashMap<u32, usize>,
}

impl ClassCatalog {
    pub fn new(classes: Vec<ClassDef>) -> Result<Self> {
        // Ids must pack as class_id * 1000 + index in a u32.
        const MAX_PACKABLE_ID: u32 = (u32::MAX - 999) / 1000;
        let mut by_id = HashMap::with_capacity(classes.len());
        for (idx, class) in classes.iter().enumerate() {
            if class.id == VOID_ID {
                return Err(Error::InvalidCatalog(format!(
                    "class `{}` claims the reserved void id 0",
                    class.name
                )));
            }
            if class.id > MAX_PACKABLE_ID {
                return Err(Error::InvalidCatalog(format!(
                    "class id {} exceeds the packable maximum {}",
                    class.id, MAX_PACKABLE_ID
                )));
            }
            if by_id.insert(class.id, idx).is_some() {
                return Err(Error::InvalidCatalog(format!(
                    "duplicate class id {}",
                    class.id
                )));
            }
        }
        Ok(Self { classes, by_id })
    }

    /// Classes in declaration order. This order also defines the channel
    /// layout convention for score tensors read from disk.
    pub fn classes(&self) -> &[ClassDef] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&ClassDef> {
        self.by_id.get(&id).map(|&idx| &self.classes[idx])
    }

    pub fn kind_of(&self, id: u32) -> Option<ClassKind> {
        self.get(id).map(|c| c.kind)
    }

    pub fn contains(&self, id: u32) -> bool {
        self.by_id.contains_key(&id)
    }

    pub fn is_thing(&self, id: u32) -> bool {
        self.kind_of(id) == Some(ClassKind::Thing)
    }

    pub fn is_stuff(&self, id: u32) -> bool {
        self.kind_of(id) == Some(ClassKind::Stuff)
    }

    pub fn has_things(&self) -> bool {
        self.classes.iter().any(|c| c.kind == ClassKind::Thing)
    }

    pub fn has_stuff(&self) -> bool {
        self.classes.iter().any(|c| c.kind == ClassKind::Stuff)
    }

    pub fn thing_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.classes
            .iter()
            .filter(|c| c.kind == ClassKind::Thing)
            .map(|c| c.id)
    }

    pub fn stuff_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.classes
            .iter()
            .filter(|c| c.kind == ClassKind::Stuff)
            .map(|c| c.id)
    }

    /// Class ids in declaration order, the default channel order.
    pub fn channel_order(&self) -> Vec<u32> {
        self.classes.iter().map(|c| c.id).collect()
    }

    /// Errors unless `id` is a catalog class of kind `kind`.
    pub fn expect_kind(&self, id: u32, kind: ClassKind) -> Result<()> {
        match self.kind_of(id) {
            None => Err(Error::UnknownClass(id)),
            Some(k) if k == kind => Ok(()),
            Some(_) => Err(Error::WrongClassKind(
                id,
                match kind {
                    ClassKind::Thing => "thing",
                    ClassKind::Stuff => "stuff",
                },
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn def(id: u32, name: &str, kind: ClassKind) -> ClassDef {
        ClassDef {
            id,
            name: name.to_string(),
            kind,
        }
    }

    #[test]
    fn rejects_void_id_claim() {
        let err = ClassCatalog::new(vec![def(0, "road", ClassKind::Stuff)]).unwrap_err();
        assert!(matches!(err, Error::InvalidCatalog(_)));
    }

    #[test]
    fn rejects_duplicate_ids() {
        let err = ClassCatalog::new(vec![
            def(3, "road", ClassKind::Stuff),
            def(3, "car", ClassKind::Thing),
        ])
        .unwrap_err();
        assert!(matches!(err, Error::InvalidCatalog(_)));
    }

    #[test]
    fn lookups() {
        let cat = ClassCatalog::new(vec![
            def(1, "road", ClassKind::Stuff),
            def(26, "car", ClassKind::Thing),
        ])
        .unwrap();
        assert!(cat.is_stuff(1));
        assert!(cat.is_thing(26));
        assert!(!cat.contains(7));
        assert_eq!(cat.channel_order(), vec![1, 26]);
        assert!(cat.expect_kind(26, ClassKind::Thing).is_ok());
        assert!(matches!(
            cat.expect_kind(26, ClassKind::Stuff).unwrap_err(),
            Error::WrongClassKind(26, "stuff")
        ));
        assert!(matches!(
            cat.expect_kind(7, ClassKind::Stuff).unwrap_err(),
            Error::UnknownClass(7)
        ));
    }
}
