//! The PDF value model: the eight basic object types plus indirect references,
//! and the document (object store + trailer) built from them.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::name::PdfName;

/// Indirect object identity: object number and generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjId {
    pub num: u32,
    pub gen: u16,
}

impl ObjId {
    pub fn new(num: u32, gen: u16) -> Self {
        ObjId { num, gen }
    }
}

/// Ordered dictionary keyed by decoded Name text. Key order is preserved from
/// parse and respected by the writer so serialization is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dict {
    entries: Vec<(PdfName, PdfValue)>,
}

impl Dict {
    pub fn new() -> Self {
        Dict::default()
    }

    pub fn get(&self, decoded_key: &str) -> Option<&PdfValue> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k.decoded() == decoded_key)
            .map(|(_, v)| v)
    }

    pub fn get_mut(&mut self, decoded_key: &str) -> Option<&mut PdfValue> {
        self.entries
            .iter_mut()
            .rev()
            .find(|(k, _)| k.decoded() == decoded_key)
            .map(|(_, v)| v)
    }

    /// Insert or overwrite. An existing key keeps its position and raw form.
    pub fn insert(&mut self, key: PdfName, value: PdfValue) {
        if let Some(slot) = self
            .entries
            .iter_mut()
            .find(|(k, _)| k.decoded() == key.decoded())
        {
            slot.1 = value;
        } else {
            self.entries.push((key, value));
        }
    }

    /// Remove every entry with the given decoded key. Returns true if any was removed.
    pub fn remove(&mut self, decoded_key: &str) -> bool {
        let before = self.entries.len();
        self.entries.retain(|(k, _)| k.decoded() != decoded_key);
        self.entries.len() != before
    }

    pub fn contains_key(&self, decoded_key: &str) -> bool {
        self.get(decoded_key).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PdfName, &PdfValue)> {
        self.entries.iter().map(|(k, v)| (k, v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&PdfName, &mut PdfValue)> {
        self.entries.iter_mut().map(|(k, v)| (&*k, v))
    }

    /// Mutable access to keys and values both (used by name obfuscation).
    pub fn entries_mut(&mut self) -> impl Iterator<Item = (&mut PdfName, &mut PdfValue)> {
        self.entries.iter_mut().map(|(k, v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl FromIterator<(PdfName, PdfValue)> for Dict {
    fn from_iter<T: IntoIterator<Item = (PdfName, PdfValue)>>(iter: T) -> Self {
        let mut d = Dict::new();
        for (k, v) in iter {
            d.insert(k, v);
        }
        d
    }
}

/// A stream: its dictionary plus the raw (undecoded) payload bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdfStream {
    pub dict: Dict,
    pub data: Vec<u8>,
}

/// The eight basic PDF object types plus indirect references.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PdfValue {
    Boolean(bool),
    Numeric(f64),
    String(Vec<u8>),
    Null,
    Name(PdfName),
    Array(Vec<PdfValue>),
    Dictionary(Dict),
    Stream(PdfStream),
    Reference(ObjId),
}

impl PdfValue {
    pub fn name(text: &str) -> Self {
        PdfValue::Name(PdfName::new(text))
    }

    pub fn reference(num: u32) -> Self {
        PdfValue::Reference(ObjId::new(num, 0))
    }

    pub fn as_dict(&self) -> Option<&Dict> {
        match self {
            PdfValue::Dictionary(d) => Some(d),
            PdfValue::Stream(s) => Some(&s.dict),
            _ => None,
        }
    }

    pub fn as_dict_mut(&mut self) -> Option<&mut Dict> {
        match self {
            PdfValue::Dictionary(d) => Some(d),
            PdfValue::Stream(s) => Some(&mut s.dict),
            _ => None,
        }
    }

    pub fn as_name(&self) -> Option<&PdfName> {
        match self {
            PdfValue::Name(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            PdfValue::Numeric(n) => Some(*n),
            _ => None,
        }
    }

    /// Coarse type label, used for donor selection in the replacement pass.
    pub fn type_label(&self) -> &'static str {
        match self {
            PdfValue::Boolean(_) => "boolean",
            PdfValue::Numeric(_) => "numeric",
            PdfValue::String(_) => "string",
            PdfValue::Null => "null",
            PdfValue::Name(_) => "name",
            PdfValue::Array(_) => "array",
            PdfValue::Dictionary(_) => "dictionary",
            PdfValue::Stream(_) => "stream",
            PdfValue::Reference(_) => "reference",
        }
    }
}

/// A parsed document: version, numbered object store, and trailer dictionary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdfDocument {
    pub version: String,
    pub objects: BTreeMap<ObjId, PdfValue>,
    pub trailer: Dict,
}

impl PdfDocument {
    pub fn new(version: &str) -> Self {
        PdfDocument {
            version: version.to_string(),
            objects: BTreeMap::new(),
            trailer: Dict::new(),
        }
    }

    pub fn get(&self, id: ObjId) -> Option<&PdfValue> {
        self.objects.get(&id)
    }

    /// Follow a reference one step; non-references resolve to themselves.
    /// Dangling references resolve to None.
    pub fn resolve<'a>(&'a self, value: &'a PdfValue) -> Option<&'a PdfValue> {
        match value {
            PdfValue::Reference(id) => self.objects.get(id),
            other => Some(other),
        }
    }

    /// The /Root reference from the trailer, if present and resolvable.
    pub fn root_id(&self) -> Option<ObjId> {
        match self.trailer.get("/Root") {
            Some(PdfValue::Reference(id)) if self.objects.contains_key(id) => Some(*id),
            _ => None,
        }
    }

    pub fn max_obj_num(&self) -> u32 {
        self.objects.keys().map(|id| id.num).max().unwrap_or(0)
    }

    /// Fresh object number above everything in the store.
    pub fn next_obj_num(&self) -> u32 {
        self.max_obj_num() + 1
    }

    /// All references that do not resolve to a stored object.
    pub fn dangling_references(&self) -> Vec<ObjId> {
        let mut out = Vec::new();
        let visit = |v: &PdfValue, out: &mut Vec<ObjId>| {
            if let PdfValue::Reference(id) = v {
                if !self.objects.contains_key(id) {
                    out.push(*id);
                }
            }
        };
        for v in self.objects.values() {
            walk_value(v, &mut |val| visit(val, &mut out));
        }
        for (_, v) in self.trailer.iter() {
            walk_value(v, &mut |val| visit(val, &mut out));
        }
        out.sort();
        out.dedup();
        out
    }
}

/// Collect every reference inside a value.
pub fn walk_value_refs(value: &PdfValue, out: &mut Vec<ObjId>) {
    walk_value(value, &mut |v| {
        if let PdfValue::Reference(id) = v {
            out.push(*id);
        }
    });
}

/// Depth-first visit of a value and everything nested inside it.
pub(crate) fn walk_value(value: &PdfValue, f: &mut impl FnMut(&PdfValue)) {
    f(value);
    match value {
        PdfValue::Array(items) => {
            for item in items {
                walk_value(item, f);
            }
        }
        PdfValue::Dictionary(d) => {
            for (_, v) in d.iter() {
                walk_value(v, f);
            }
        }
        PdfValue::Stream(s) => {
            for (_, v) in s.dict.iter() {
                walk_value(v, f);
            }
        }
        _ => {}
    }
}
