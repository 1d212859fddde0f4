//! The global phrase ↔ variable table.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::formula::Formula;

/// Opaque variable identifier, allocated in first-seen order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VarId(pub u32);

const GREEK: [&str; 24] = [
    "α", "β", "γ", "δ", "ε", "ζ", "η", "θ", "ι", "κ", "λ", "μ", "ν", "ξ", "ο", "π", "ρ", "σ", "τ",
    "υ", "φ", "χ", "ψ", "ω",
];

impl VarId {
    /// Display name: α, β, … ω, then p1, p2, …
    pub fn display_name(self) -> String {
        match GREEK.get(self.0 as usize) {
            Some(g) => (*g).to_string(),
            None => format!("p{}", self.0 as usize - GREEK.len() + 1),
        }
    }

    /// ASCII atom name used in formula syntax: a … x mirroring α … ω, then
    /// p1, p2, … exactly like the display name.
    pub fn atom_name(self) -> String {
        let i = self.0 as usize;
        if i < GREEK.len() {
            char::from(b'a' + i as u8).to_string()
        } else {
            format!("p{}", i - GREEK.len() + 1)
        }
    }

    /// Inverse of [`VarId::atom_name`].
    pub fn from_atom_name(name: &str) -> Option<VarId> {
        let bytes = name.as_bytes();
        if bytes.len() == 1 && (b'a'..b'a' + GREEK.len() as u8).contains(&bytes[0]) {
            return Some(VarId((bytes[0] - b'a') as u32));
        }
        let n: u32 = name.strip_prefix('p')?.parse().ok()?;
        if n == 0 || name.starts_with("p0") {
            return None;
        }
        Some(VarId(n - 1 + GREEK.len() as u32))
    }

    pub fn atom(self) -> Formula {
        Formula::atom(self.atom_name())
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarEntry {
    /// Purified phrase key; the lookup key.
    pub key: String,
    /// Human-facing phrase (the key with auxiliary verbs dropped).
    pub display: String,
}

/// Bijective mapping between purified phrases and variable ids, in
/// insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarTable {
    entries: Vec<VarEntry>,
    by_key: HashMap<String, VarId>,
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Returns the id for `key`, allocating the next id if the key is new.
    pub fn map_phrase(&mut self, key: &str) -> VarId {
        self.map_phrase_with_display(key, key)
    }

    /// Like [`VarTable::map_phrase`], recording `display` for a new entry.
    /// An existing entry keeps its original display text.
    pub fn map_phrase_with_display(&mut self, key: &str, display: &str) -> VarId {
        if let Some(&id) = self.by_key.get(key) {
            return id;
        }
        let id = VarId(self.entries.len() as u32);
        self.entries.push(VarEntry {
            key: key.to_string(),
            display: display.to_string(),
        });
        self.by_key.insert(key.to_string(), id);
        id
    }

    pub fn lookup(&self, key: &str) -> Option<VarId> {
        self.by_key.get(key).copied()
    }

    pub fn entry(&self, id: VarId) -> Option<&VarEntry> {
        self.entries.get(id.0 as usize)
    }

    /// Display phrase for an atom name such as `"a"`.
    pub fn phrase_for_atom(&self, atom: &str) -> Option<&str> {
        VarId::from_atom_name(atom)
            .and_then(|id| self.entry(id))
            .map(|e| e.display.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &VarEntry)> {
        self.entries
            .iter()
            .enumerate()
            .map(|(i, e)| (VarId(i as u32), e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for i in 0..200 {
            let id = VarId(i);
            assert_eq!(VarId::from_atom_name(&id.atom_name()), Some(id), "{i}");
        }
        assert_eq!(VarId(0).display_name(), "α");
        assert_eq!(VarId(1).display_name(), "β");
        assert_eq!(VarId(24).display_name(), "p1");
        assert_eq!(VarId(24).atom_name(), "p1");
        assert_eq!(VarId(23).atom_name(), "x");
        assert_eq!(VarId::from_atom_name("y"), None);
        assert_eq!(VarId::from_atom_name("p0"), None);
        assert_eq!(VarId::from_atom_name("p01"), None);
    }

    #[test]
    fn lookup_never_reallocates() {
        let mut vt = VarTable::new();
        assert_eq!(vt.map_phrase("rain"), VarId(0));
        assert_eq!(vt.map_phrase("rain"), VarId(0));
        assert_eq!(
            vt.map_phrase_with_display("ground get wet", "ground wet"),
            VarId(1)
        );
        assert_eq!(vt.len(), 2);
        assert_eq!(vt.phrase_for_atom("b"), Some("ground wet"));
        assert_eq!(vt.phrase_for_atom("c"), None);
    }
}
