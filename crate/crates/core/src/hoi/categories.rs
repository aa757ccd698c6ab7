use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HoiCategory {
    pub id: u32,
    pub verb: String,
    /// Object class the interaction is defined over.
    pub object: u32,
    /// Marks the null "no interaction with <object>" categories.
    pub no_interaction: bool,
}

/// Ordered category list. Classifier outputs are indexed by position here.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HoiCategoryTable {
    categories: Vec<HoiCategory>,
    by_id: BTreeMap<u32, usize>,
}

impl HoiCategoryTable {
    pub fn new(categories: Vec<HoiCategory>) -> Result<Self> {
        let mut by_id = BTreeMap::new();
        for (i, c) in categories.iter().enumerate() {
            if by_id.insert(c.id, i).is_some() {
                return Err(Error::Integrity(format!("duplicate category id {}", c.id)));
            }
        }
        Ok(Self { categories, by_id })
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &HoiCategory> {
        self.categories.iter()
    }

    pub fn get(&self, index: usize) -> Option<&HoiCategory> {
        self.categories.get(index)
    }

    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.by_id.get(&id).copied()
    }

    pub fn by_id(&self, id: u32) -> Option<&HoiCategory> {
        self.index_of(id).map(|i| &self.categories[i])
    }

    pub fn contains(&self, id: u32) -> bool {
        self.by_id.contains_key(&id)
    }

    /// Unknown ids count as ordinary (interactive) categories.
    pub fn is_no_interaction(&self, id: u32) -> bool {
        self.by_id(id).is_some_and(|c| c.no_interaction)
    }
}
