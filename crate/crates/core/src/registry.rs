//! Name-keyed strategy registry.
//!
//! Every family of interchangeable algorithms in the crate (heading filters,
//! segmentation losses, segmenters) is exposed as a trait object. A
//! [`Registry`] maps a stable name to a constructor so the variant can be
//! picked from a config file or a CLI flag.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// Constructor stored in a registry. `A` is the argument bundle the family
/// needs to build an instance (filter parameters, class weights, ...).
pub type Constructor<T, A> = Box<dyn Fn(&A) -> Result<Box<T>> + Send + Sync>;

pub struct Registry<T: ?Sized, A> {
    kind: &'static str,
    entries: BTreeMap<String, Constructor<T, A>>,
}

impl<T: ?Sized, A> Registry<T, A> {
    pub fn new(kind: &'static str) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Registers `ctor` under `name`, replacing any previous entry.
    pub fn register<F>(&mut self, name: &str, ctor: F) -> &mut Self
    where
        F: Fn(&A) -> Result<Box<T>> + Send + Sync + 'static,
    {
        self.entries.insert(name.to_owned(), Box::new(ctor));
        self
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn create(&self, name: &str, args: &A) -> Result<Box<T>> {
        match self.entries.get(name) {
            Some(ctor) => ctor(args),
            None => Err(Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_owned(),
                available: self.names().collect::<Vec<_>>().join(", "),
            }),
        }
    }
}

impl<T: ?Sized, A> fmt::Debug for Registry<T, A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Registry")
            .field("kind", &self.kind)
            .field("names", &self.entries.keys().collect::<Vec<_>>())
            .finish()
    }
}
