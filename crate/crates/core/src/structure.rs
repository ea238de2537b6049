//! Reduced logical-structure tree and mutation primitives.
//!
//! The tree is built breadth-first from the Catalog: dictionary entries
//! contribute edges labeled by their decoded key, arrays are transparent
//! (elements inherit the incoming label), and a referenced object is expanded
//! only on its first visit, so every node's path is a shortest reference path
//! and cycles terminate. Structural paths are canonical slash-joined label
//! sequences ("" is the root).
//!
//! Mutations (delete / replace / graft / swap) address entries by structural
//! path, apply to all occurrences simultaneously, and drop objects that become
//! unreachable from the trailer.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::pdf::{Dict, ObjId, PdfDocument, PdfName, PdfValue};

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("document has no resolvable /Root")]
    NoRoot,
    #[error("no occurrence of structural path {0:?}")]
    PathAbsent(String),
    #[error("node at {0:?} is not a dictionary")]
    NotADictionary(String),
}

/// One navigation step inside an object's value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Step {
    Key(String),
    Index(usize),
}

/// Where a tree node's value lives: an object plus steps into it.
/// Empty steps address the object value itself.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Location {
    pub obj: ObjId,
    pub steps: Vec<Step>,
}

/// A node of the reduced tree.
#[derive(Debug, Clone)]
pub struct TreeNode {
    /// Canonical structural path ("" for the root).
    pub path: String,
    pub location: Location,
    /// Reference target when the stored value is a reference.
    pub target: Option<ObjId>,
    /// False when the node is a repeated reference left unexpanded.
    pub expanded: bool,
    /// Path length in edges (array transparency does not add depth).
    pub depth: usize,
    /// Reference expansions strictly above this entry.
    pub ref_hops: usize,
}

/// BFS-reduced structural tree; `nodes[0]` is the root.
#[derive(Debug, Clone)]
pub struct StructuralTree {
    pub nodes: Vec<TreeNode>,
}

pub fn value_at_location<'a>(doc: &'a PdfDocument, loc: &Location) -> Option<&'a PdfValue> {
    let mut cur = doc.objects.get(&loc.obj)?;
    for step in &loc.steps {
        cur = match step {
            Step::Key(k) => cur.as_dict()?.get(k)?,
            Step::Index(i) => match cur {
                PdfValue::Array(items) => items.get(*i)?,
                _ => return None,
            },
        };
    }
    Some(cur)
}

fn value_at_location_mut<'a>(doc: &'a mut PdfDocument, loc: &Location) -> Option<&'a mut PdfValue> {
    let mut cur = doc.objects.get_mut(&loc.obj)?;
    for step in &loc.steps {
        cur = match step {
            Step::Key(k) => cur.as_dict_mut()?.get_mut(k)?,
            Step::Index(i) => match cur {
                PdfValue::Array(items) => items.get_mut(*i)?,
                _ => return None,
            },
        };
    }
    Some(cur)
}

/// Build the reduced tree.
///
/// Nodes are processed in (path depth, enqueue order) so that a shared object
/// is always claimed at its minimal path depth even though array transparency
/// lets a deeper-nested entry be *created* earlier; within one node, children
/// are enqueued in (lexicographic edge label, array index) order. Whether a
/// reference expands is decided when its node is processed: first visit wins.
pub fn build_reduced_tree(doc: &PdfDocument) -> Result<StructuralTree, StructureError> {
    let root = doc.root_id().ok_or(StructureError::NoRoot)?;
    let mut visited: BTreeSet<ObjId> = BTreeSet::new();
    visited.insert(root);
    let mut nodes = vec![TreeNode {
        path: String::new(),
        location: Location {
            obj: root,
            steps: Vec::new(),
        },
        target: None,
        expanded: true,
        depth: 0,
        ref_hops: 0,
    }];
    // depth level -> node indices in enqueue order
    let mut levels: std::collections::BTreeMap<usize, VecDeque<usize>> =
        std::collections::BTreeMap::new();
    levels.entry(0).or_default().push_back(0);

    while let Some((&depth, _)) = levels.iter().find(|(_, q)| !q.is_empty()) {
        let idx = levels.get_mut(&depth).unwrap().pop_front().unwrap();
        if levels.get(&depth).map_or(false, |q| q.is_empty()) {
            levels.remove(&depth);
        }
        let node = nodes[idx].clone();
        let stored = match value_at_location(doc, &node.location) {
            Some(v) => v,
            None => continue,
        };
        // resolve one reference level; repeated targets stay leaves
        let (effective, child_base): (&PdfValue, Option<ObjId>) = match stored {
            PdfValue::Reference(id) => {
                nodes[idx].target = Some(*id);
                let first_visit = doc.objects.contains_key(id) && visited.insert(*id);
                nodes[idx].expanded = first_visit;
                if !first_visit {
                    continue;
                }
                (doc.objects.get(id).unwrap(), Some(*id))
            }
            other => (other, None),
        };
        let child_hops = node.ref_hops + usize::from(child_base.is_some());
        let child_loc = |steps_tail: Step| match child_base {
            Some(obj) => Location {
                obj,
                steps: vec![steps_tail],
            },
            None => {
                let mut steps = node.location.steps.clone();
                steps.push(steps_tail);
                Location {
                    obj: node.location.obj,
                    steps,
                }
            }
        };
        let mut children: Vec<TreeNode> = Vec::new();
        match effective {
            PdfValue::Dictionary(_) | PdfValue::Stream(_) => {
                let dict = effective.as_dict().unwrap();
                let mut keys: Vec<&PdfName> = dict.iter().map(|(k, _)| k).collect();
                keys.sort_by(|a, b| a.decoded().cmp(b.decoded()));
                for key in keys {
                    children.push(TreeNode {
                        path: format!("{}{}", node.path, key.decoded()),
                        location: child_loc(Step::Key(key.decoded().to_string())),
                        target: None,
                        expanded: true,
                        depth: node.depth + 1,
                        ref_hops: child_hops,
                    });
                }
            }
            PdfValue::Array(items) => {
                for i in 0..items.len() {
                    // transparent: same path and depth as the array itself
                    children.push(TreeNode {
                        path: node.path.clone(),
                        location: child_loc(Step::Index(i)),
                        target: None,
                        expanded: true,
                        depth: node.depth,
                        ref_hops: child_hops,
                    });
                }
            }
            _ => {}
        }
        for child in children {
            let child_depth = child.depth;
            nodes.push(child);
            levels
                .entry(child_depth)
                .or_default()
                .push_back(nodes.len() - 1);
        }
    }
    Ok(StructuralTree { nodes })
}

/// The set of canonical paths of every tree node (root excluded).
pub fn extract_structural_paths(doc: &PdfDocument) -> Result<BTreeSet<String>, StructureError> {
    let tree = build_reduced_tree(doc)?;
    Ok(tree
        .nodes
        .iter()
        .skip(1)
        .map(|n| n.path.clone())
        .filter(|p| !p.is_empty())
        .collect())
}

/// First-BFS-occurrence value stored at a structural path.
pub fn value_at_path<'a>(doc: &'a PdfDocument, path: &str) -> Option<&'a PdfValue> {
    let tree = build_reduced_tree(doc).ok()?;
    let node = tree.nodes.iter().skip(1).find(|n| n.path == path)?;
    value_at_location(doc, &node.location)
}

/// A donor value, optionally backed by the document whose references it uses.
#[derive(Clone, Copy)]
pub struct Donor<'a> {
    pub doc: Option<&'a PdfDocument>,
    pub value: &'a PdfValue,
}

impl<'a> Donor<'a> {
    pub fn bare(value: &'a PdfValue) -> Self {
        Donor { doc: None, value }
    }

    pub fn from_doc(doc: &'a PdfDocument, value: &'a PdfValue) -> Self {
        Donor {
            doc: Some(doc),
            value,
        }
    }
}

/// Deep-copy a donor value into `target`, assigning fresh object numbers to
/// every donor-document object it references.
fn import_value(
    target: &mut PdfDocument,
    donor_doc: Option<&PdfDocument>,
    value: &PdfValue,
    memo: &mut HashMap<ObjId, ObjId>,
    next_num: &mut u32,
) -> PdfValue {
    match value {
        PdfValue::Reference(id) => {
            if let Some(mapped) = memo.get(id) {
                return PdfValue::Reference(*mapped);
            }
            match donor_doc.and_then(|d| d.objects.get(id)) {
                Some(donor_obj) => {
                    let fresh = ObjId::new(*next_num, 0);
                    *next_num += 1;
                    memo.insert(*id, fresh);
                    let copied =
                        import_value(target, donor_doc, &donor_obj.clone(), memo, next_num);
                    target.objects.insert(fresh, copied);
                    PdfValue::Reference(fresh)
                }
                // no backing store: keep as-is (recorded as dangling at parse)
                None => PdfValue::Reference(*id),
            }
        }
        PdfValue::Array(items) => PdfValue::Array(
            items
                .iter()
                .map(|v| import_value(target, donor_doc, v, memo, next_num))
                .collect(),
        ),
        PdfValue::Dictionary(d) => {
            let mut out = Dict::new();
            for (k, v) in d.iter() {
                out.insert(k.clone(), import_value(target, donor_doc, v, memo, next_num));
            }
            PdfValue::Dictionary(out)
        }
        PdfValue::Stream(s) => {
            let mut dict = Dict::new();
            for (k, v) in s.dict.iter() {
                dict.insert(k.clone(), import_value(target, donor_doc, v, memo, next_num));
            }
            PdfValue::Stream(crate::pdf::PdfStream {
                dict,
                data: s.data.clone(),
            })
        }
        other => other.clone(),
    }
}

/// Drop objects unreachable from the trailer.
fn collect_garbage(doc: &mut PdfDocument) {
    let mut reachable: BTreeSet<ObjId> = BTreeSet::new();
    let mut stack: Vec<ObjId> = Vec::new();
    for (_, v) in doc.trailer.iter() {
        push_refs(v, &mut stack);
    }
    while let Some(id) = stack.pop() {
        if !reachable.insert(id) {
            continue;
        }
        if let Some(value) = doc.objects.get(&id) {
            push_refs(value, &mut stack);
        }
    }
    doc.objects.retain(|id, _| reachable.contains(id));
}

fn push_refs(value: &PdfValue, out: &mut Vec<ObjId>) {
    crate::pdf::walk_value_refs(value, out);
}

/// Matched entry locations for a path, outermost-only (a location nested
/// inside another match is dropped, e.g. array slots under a matched entry).
fn locations_at_path(doc: &PdfDocument, path: &str) -> Result<Vec<Location>, StructureError> {
    let tree = build_reduced_tree(doc)?;
    let mut locs: Vec<Location> = tree
        .nodes
        .iter()
        .skip(1)
        .filter(|n| n.path == path)
        .map(|n| n.location.clone())
        .collect();
    locs.sort();
    locs.dedup();
    let outer: Vec<Location> = locs
        .iter()
        .filter(|l| {
            !locs.iter().any(|other| {
                *other != **l
                    && other.obj == l.obj
                    && other.steps.len() < l.steps.len()
                    && l.steps.starts_with(&other.steps)
            })
        })
        .cloned()
        .collect();
    if outer.is_empty() {
        return Err(StructureError::PathAbsent(path.to_string()));
    }
    Ok(outer)
}

/// Remove every entry at `path` (all occurrences simultaneously), severing the
/// subtree and dropping orphaned objects.
pub fn delete_at_path(doc: &PdfDocument, path: &str) -> Result<PdfDocument, StructureError> {
    assert!(!path.is_empty(), "cannot delete the root");
    let mut locs = locations_at_path(doc, path)?;
    // deepest-last-index first so earlier removals don't shift later ones
    locs.sort();
    locs.reverse();
    let mut out = doc.clone();
    for loc in &locs {
        remove_at(&mut out, loc);
    }
    collect_garbage(&mut out);
    Ok(out)
}

fn remove_at(doc: &mut PdfDocument, loc: &Location) {
    let Some(last) = loc.steps.last() else {
        doc.objects.remove(&loc.obj);
        return;
    };
    let parent = Location {
        obj: loc.obj,
        steps: loc.steps[..loc.steps.len() - 1].to_vec(),
    };
    if let Some(container) = value_at_location_mut(doc, &parent) {
        match (container, last) {
            (PdfValue::Dictionary(d), Step::Key(k)) => {
                d.remove(k);
            }
            (PdfValue::Stream(s), Step::Key(k)) => {
                s.dict.remove(k);
            }
            (PdfValue::Array(items), Step::Index(i)) => {
                if *i < items.len() {
                    items.remove(*i);
                }
            }
            _ => {}
        }
    }
}

/// Replace every entry at `path` with an independent deep copy of the donor.
pub fn replace_at_path(
    doc: &PdfDocument,
    path: &str,
    donor: Donor,
) -> Result<PdfDocument, StructureError> {
    let locs = locations_at_path(doc, path)?;
    let mut out = doc.clone();
    let mut next_num = out.next_obj_num();
    for loc in &locs {
        let mut memo = HashMap::new();
        let copied = import_value(&mut out, donor.doc, donor.value, &mut memo, &mut next_num);
        if let Some(slot) = value_at_location_mut(&mut out, loc) {
            *slot = copied;
        }
    }
    collect_garbage(&mut out);
    Ok(out)
}

/// Insert (key -> donor copy) into the dictionary at `parent_path`
/// ("" addresses the Catalog). An existing key is overwritten.
pub fn graft_entry(
    doc: &PdfDocument,
    parent_path: &str,
    key: &PdfName,
    donor: Donor,
) -> Result<PdfDocument, StructureError> {
    let tree = build_reduced_tree(doc)?;
    // array members share their parent's path, so several nodes can carry
    // `parent_path`; graft into the first one that is (or resolves to) a
    // dictionary.
    let mut saw_path = false;
    let mut loc = None;
    for node in tree.nodes.iter().filter(|n| n.path == parent_path) {
        saw_path = true;
        // resolve a reference-valued node to its target object
        let cand = match &node.target {
            Some(id) if doc.objects.contains_key(id) => Location {
                obj: *id,
                steps: Vec::new(),
            },
            _ => node.location.clone(),
        };
        match value_at_location(doc, &cand) {
            Some(PdfValue::Dictionary(_)) | Some(PdfValue::Stream(_)) => {
                loc = Some(cand);
                break;
            }
            _ => {}
        }
    }
    let loc = match (loc, saw_path) {
        (Some(loc), _) => loc,
        (None, true) => return Err(StructureError::NotADictionary(parent_path.to_string())),
        (None, false) => return Err(StructureError::PathAbsent(parent_path.to_string())),
    };
    let mut out = doc.clone();
    let mut next_num = out.next_obj_num();
    let mut memo = HashMap::new();
    let copied = import_value(&mut out, donor.doc, donor.value, &mut memo, &mut next_num);
    if let Some(container) = value_at_location_mut(&mut out, &loc) {
        if let Some(d) = container.as_dict_mut() {
            d.insert(key.clone(), copied);
        }
    }
    collect_garbage(&mut out);
    Ok(out)
}

/// Replace the entry at `path` with a deep copy of the donor document's entry
/// at `donor_path`.
pub fn swap_entry(
    doc: &PdfDocument,
    path: &str,
    donor_doc: &PdfDocument,
    donor_path: &str,
) -> Result<PdfDocument, StructureError> {
    let donor_value = value_at_path(donor_doc, donor_path)
        .ok_or_else(|| StructureError::PathAbsent(donor_path.to_string()))?;
    replace_at_path(doc, path, Donor::from_doc(donor_doc, donor_value))
}
