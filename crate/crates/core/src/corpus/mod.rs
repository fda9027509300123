//! Layout documents and the operations that read structure out of them.
//!
//! A [`LayoutDoc`] is a canvas plus a tree of source-markup nodes. Only nodes
//! with an element type (explicit, or inferred from tag and attributes) count
//! as layout elements; everything else is structure. Element indices used
//! throughout the crate are positions in the depth-first pre-order listing
//! produced by [`flatten_elements`].

mod infer;
mod io;
mod stats;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ir::{Domain, ElementType, IrRoot};

pub use infer::infer_element_type;
pub use io::{
    doc_to_json, load_layout_jsonl, load_records_jsonl, parse_record, read_records, record_to_json, save_layout_jsonl,
    DocRecord, LayoutWriter,
};
pub use stats::{compute_stats, CorpusStats, Histogram2d, StatsBuilder, TypeStats};

/// Documents with more typed elements than this are rejected at load time.
pub const MAX_ELEMENTS_PER_DOC: usize = 100;

/// Attribute marking an element as auto-completed rather than requested.
pub const COMPLETE_ATTR: &str = "complete";

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: schema violation at `{field}`: {message}")]
    SchemaViolation { line: usize, field: String, message: String },
    #[error("corpus is empty")]
    EmptyCorpus,
}

impl CorpusError {
    pub fn code(&self) -> &'static str {
        match self {
            CorpusError::Io(_) => "Io",
            CorpusError::SchemaViolation { .. } => "SchemaViolation",
            CorpusError::EmptyCorpus => "EmptyCorpus",
        }
    }
}

/// Axis-aligned box in canvas units: left, top, width, height.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BBox {
    pub l: f64,
    pub t: f64,
    pub w: f64,
    pub h: f64,
}

impl BBox {
    pub const fn new(l: f64, t: f64, w: f64, h: f64) -> Self {
        BBox { l, t, w, h }
    }

    pub fn right(&self) -> f64 {
        self.l + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.t + self.h
    }

    pub fn center(&self) -> (f64, f64) {
        (self.l + self.w / 2.0, self.t + self.h / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }

    pub fn intersection_area(&self, other: &BBox) -> f64 {
        let w = self.right().min(other.right()) - self.l.max(other.l);
        let h = self.bottom().min(other.bottom()) - self.t.max(other.t);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    pub fn iou(&self, other: &BBox) -> f64 {
        let inter = self.intersection_area(other);
        let union = self.area() + other.area() - inter;
        if union <= 0.0 {
            0.0
        } else {
            inter / union
        }
    }

    /// Smallest box covering both.
    pub fn union(&self, other: &BBox) -> BBox {
        let l = self.l.min(other.l);
        let t = self.t.min(other.t);
        BBox::new(l, t, self.right().max(other.right()) - l, self.bottom().max(other.bottom()) - t)
    }

    pub fn clamp_to(&self, canvas: Canvas) -> BBox {
        let l = self.l.clamp(0.0, canvas.w);
        let t = self.t.clamp(0.0, canvas.h);
        let r = self.right().clamp(0.0, canvas.w);
        let b = self.bottom().clamp(0.0, canvas.h);
        BBox::new(l, t, (r - l).max(0.0), (b - t).max(0.0))
    }

    pub fn contains(&self, other: &BBox, slack: f64) -> bool {
        other.l >= self.l - slack
            && other.t >= self.t - slack
            && other.right() <= self.right() + slack
            && other.bottom() <= self.bottom() + slack
    }

    fn is_finite(&self) -> bool {
        self.l.is_finite() && self.t.is_finite() && self.w.is_finite() && self.h.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Canvas {
    pub w: f64,
    pub h: f64,
}

impl Canvas {
    pub const fn new(w: f64, h: f64) -> Self {
        Canvas { w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn full_box(&self) -> BBox {
        BBox::new(0.0, 0.0, self.w, self.h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementTreeNode {
    pub tag: String,
    /// Explicit element type; when absent the type is inferred from the tag.
    pub etype: Option<ElementType>,
    pub bbox: BBox,
    pub attrs: BTreeMap<String, String>,
    pub children: Vec<ElementTreeNode>,
}

impl ElementTreeNode {
    pub fn new(tag: impl Into<String>, bbox: BBox) -> Self {
        ElementTreeNode { tag: tag.into(), etype: None, bbox, attrs: BTreeMap::new(), children: Vec::new() }
    }

    pub fn typed(tag: impl Into<String>, etype: ElementType, bbox: BBox) -> Self {
        let mut node = ElementTreeNode::new(tag, bbox);
        node.etype = Some(etype);
        node
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attrs.insert(key.into(), value.into());
        self
    }

    pub fn with_children(mut self, children: Vec<ElementTreeNode>) -> Self {
        self.children = children;
        self
    }

    pub fn is_completed(&self) -> bool {
        self.attrs.get(COMPLETE_ATTR).is_some_and(|v| v == "true")
    }

    pub fn mark_completed(&mut self) {
        self.attrs.insert(COMPLETE_ATTR.into(), "true".into());
    }

    /// Number of nodes in this subtree, including self.
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(ElementTreeNode::node_count).sum::<usize>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutDoc {
    pub id: String,
    pub domain: Domain,
    pub canvas: Canvas,
    pub root: ElementTreeNode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTriple {
    pub text: String,
    pub ir: IrRoot,
    pub layout: LayoutDoc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    pub ir: IrRoot,
    pub layout: LayoutDoc,
}

/// A typed element extracted from a document.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatElement {
    pub index: usize,
    pub etype: ElementType,
    /// Geometry exactly as stored in the document.
    pub bbox: BBox,
    pub completed: bool,
}

/// Elements plus the number of typed nodes dropped for unusable geometry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Extraction {
    pub elements: Vec<FlatElement>,
    pub dropped: usize,
}

/// A repeated structure found under a container node such as `ul`.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub container: BBox,
    /// Element indices per item (direct child of the container), in order.
    pub items: Vec<Vec<usize>>,
}

impl Group {
    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.items.iter().flatten().copied()
    }

    pub fn member_count(&self) -> usize {
        self.items.iter().map(Vec::len).sum()
    }
}

/// Container tags whose typed descendants form groups.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContainerSet {
    tags: BTreeSet<String>,
}

/// Tag used for group containers rebuilt from layout sequences. Such
/// containers form a group with a single typed descendant.
pub const EXPLICIT_GROUP_TAG: &str = "group";
/// Tag used for group items rebuilt from layout sequences.
pub const EXPLICIT_ITEM_TAG: &str = "item";

impl ContainerSet {
    pub fn new<I, S>(tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut tags: BTreeSet<String> = tags.into_iter().map(|t| t.as_ref().to_ascii_lowercase()).collect();
        tags.insert(EXPLICIT_GROUP_TAG.into());
        ContainerSet { tags }
    }

    pub fn for_domain(domain: Domain) -> Self {
        match domain {
            Domain::WebUi => ContainerSet::new(["ul", "ol"]),
            Domain::Rico => ContainerSet::new(["ul", "ol", "list", "listview", "recyclerview", "gridview"]),
        }
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.tags.contains(&tag.to_ascii_lowercase())
    }
}

fn usable_geometry(bbox: &BBox, canvas: Canvas) -> bool {
    bbox.is_finite()
        && bbox.w > 0.0
        && bbox.h > 0.0
        && bbox.right() > 0.0
        && bbox.bottom() > 0.0
        && bbox.l < canvas.w
        && bbox.t < canvas.h
}

/// Single depth-first walk shared by element flattening and group extraction.
struct Walker<'a> {
    doc: &'a LayoutDoc,
    containers: Option<&'a ContainerSet>,
    out: Extraction,
    groups: Vec<Group>,
}

impl Walker<'_> {
    fn visit(&mut self, node: &ElementTreeNode, inside_group: bool) {
        if let Some(etype) = infer_element_type(node, self.doc.domain) {
            if usable_geometry(&node.bbox, self.doc.canvas) {
                self.out.elements.push(FlatElement {
                    index: self.out.elements.len(),
                    etype,
                    bbox: node.bbox,
                    completed: node.is_completed(),
                });
            } else {
                self.out.dropped += 1;
            }
        }
        let is_container = !inside_group && self.containers.is_some_and(|c| c.contains(&node.tag));
        if !is_container {
            for child in &node.children {
                self.visit(child, inside_group);
            }
            return;
        }
        let mut items = Vec::new();
        for child in &node.children {
            let start = self.out.elements.len();
            self.visit(child, true);
            let end = self.out.elements.len();
            if end > start {
                items.push((start..end).collect::<Vec<_>>());
            }
        }
        let members: usize = items.iter().map(Vec::len).sum();
        let explicit = node.tag.eq_ignore_ascii_case(EXPLICIT_GROUP_TAG);
        if members >= 2 || (explicit && members >= 1) {
            let slack = 0.02 * self.doc.canvas.w.max(self.doc.canvas.h);
            for &m in items.iter().flatten() {
                let member = &self.out.elements[m];
                if !node.bbox.contains(&member.bbox, slack) {
                    log::debug!(
                        "doc {}: group member {} ({}) lies outside its `{}` container",
                        self.doc.id,
                        m,
                        member.etype,
                        node.tag
                    );
                }
            }
            self.groups.push(Group { container: node.bbox, items });
        }
    }
}

/// Typed elements in depth-first pre-order, dropping unusable geometry.
pub fn extract_elements(doc: &LayoutDoc) -> Extraction {
    let mut w = Walker { doc, containers: None, out: Extraction::default(), groups: Vec::new() };
    w.visit(&doc.root, false);
    w.out
}

/// Typed elements in depth-first pre-order.
pub fn flatten_elements(doc: &LayoutDoc) -> Vec<FlatElement> {
    extract_elements(doc).elements
}

/// Groups under the domain's default container tags.
pub fn extract_groups(doc: &LayoutDoc) -> Vec<Group> {
    extract_groups_with(doc, &ContainerSet::for_domain(doc.domain))
}

/// Groups under the given container tags. Only the outermost container of a
/// nested chain forms a group; its items are the container's direct children
/// that hold at least one typed element.
pub fn extract_groups_with(doc: &LayoutDoc, containers: &ContainerSet) -> Vec<Group> {
    extract_structure(doc, containers).1
}

/// Elements and groups from one walk.
pub fn extract_structure(doc: &LayoutDoc, containers: &ContainerSet) -> (Extraction, Vec<Group>) {
    let mut w = Walker { doc, containers: Some(containers), out: Extraction::default(), groups: Vec::new() };
    w.visit(&doc.root, false);
    (w.out, w.groups)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::TypeVocabulary;

    fn ty(name: &str) -> ElementType {
        TypeVocabulary::webui().get(name).unwrap().clone()
    }

    fn doc(root: ElementTreeNode) -> LayoutDoc {
        LayoutDoc { id: "d".into(), domain: Domain::WebUi, canvas: Canvas::new(100.0, 100.0), root }
    }

    fn b(l: f64, t: f64, w: f64, h: f64) -> BBox {
        BBox::new(l, t, w, h)
    }

    #[test]
    fn box_geometry() {
        let a = b(0.0, 0.0, 10.0, 10.0);
        let c = b(5.0, 5.0, 10.0, 10.0);
        assert_eq!(a.intersection_area(&c), 25.0);
        assert!((a.iou(&c) - 25.0 / 175.0).abs() < 1e-12);
        assert_eq!(a.intersection_area(&b(10.0, 0.0, 5.0, 5.0)), 0.0);
        assert_eq!(a.union(&c), b(0.0, 0.0, 15.0, 15.0));
        assert_eq!(b(-5.0, 90.0, 20.0, 20.0).clamp_to(Canvas::new(100.0, 100.0)), b(0.0, 90.0, 15.0, 10.0));
    }

    #[test]
    fn flatten_keeps_typed_nodes_in_dfs_order() {
        // 5 nodes, 3 typed: div > (h1, div > (p, a))
        let root = ElementTreeNode::new("div", b(0.0, 0.0, 100.0, 100.0)).with_children(vec![
            ElementTreeNode::new("h1", b(0.0, 0.0, 50.0, 10.0)),
            ElementTreeNode::new("div", b(0.0, 20.0, 100.0, 50.0)).with_children(vec![
                ElementTreeNode::new("p", b(0.0, 20.0, 50.0, 10.0)),
                ElementTreeNode::new("a", b(0.0, 40.0, 50.0, 10.0)),
            ]),
        ]);
        let d = doc(root);
        assert_eq!(d.root.node_count(), 5);
        let els = flatten_elements(&d);
        let types: Vec<&str> = els.iter().map(|e| e.etype.as_str()).collect();
        assert_eq!(types, ["title", "description", "link"]);
        assert_eq!(els.iter().map(|e| e.index).collect::<Vec<_>>(), [0, 1, 2]);
    }

    #[test]
    fn nested_typed_nodes_are_both_emitted() {
        let root = ElementTreeNode::new("a", b(0.0, 0.0, 50.0, 50.0))
            .with_children(vec![ElementTreeNode::new("img", b(0.0, 0.0, 20.0, 20.0))]);
        let els = flatten_elements(&doc(root));
        assert_eq!(els.len(), 2);
        assert_eq!(els[0].etype, ty("link"));
        assert_eq!(els[1].etype, ty("image"));
    }

    #[test]
    fn bad_geometry_is_dropped_and_counted() {
        let root = ElementTreeNode::new("div", b(0.0, 0.0, 100.0, 100.0)).with_children(vec![
            ElementTreeNode::typed("x", ty("text"), b(0.0, 0.0, 0.0, 10.0)),
            ElementTreeNode::typed("x", ty("text"), b(200.0, 0.0, 10.0, 10.0)),
            ElementTreeNode::typed("x", ty("text"), b(0.0, 0.0, 10.0, -1.0)),
            ElementTreeNode::typed("x", ty("text"), b(95.0, 95.0, 10.0, 10.0)),
        ]);
        let ex = extract_elements(&doc(root));
        assert_eq!(ex.elements.len(), 1);
        assert_eq!(ex.dropped, 3);
    }

    fn card(x: f64) -> ElementTreeNode {
        ElementTreeNode::new("li", b(x, 50.0, 20.0, 30.0)).with_children(vec![
            ElementTreeNode::new("img", b(x, 50.0, 20.0, 15.0)).with_attr("src", "a.png"),
            ElementTreeNode::new("h3", b(x, 66.0, 20.0, 5.0)),
        ])
    }

    #[test]
    fn ul_with_three_cards_is_one_group_of_three_items() {
        let root = ElementTreeNode::new("body", b(0.0, 0.0, 100.0, 100.0)).with_children(vec![
            ElementTreeNode::new("h1", b(0.0, 0.0, 100.0, 10.0)),
            ElementTreeNode::new("ul", b(0.0, 50.0, 100.0, 30.0)).with_children(vec![
                card(0.0),
                card(30.0),
                card(60.0),
            ]),
        ]);
        let groups = extract_groups(&doc(root));
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].member_count(), 6);
        assert_eq!(groups[0].items, vec![vec![1, 2], vec![3, 4], vec![5, 6]]);
    }

    #[test]
    fn no_container_no_group() {
        let root = ElementTreeNode::new("body", b(0.0, 0.0, 100.0, 100.0)).with_children(vec![card(0.0), card(30.0)]);
        assert!(extract_groups(&doc(root)).is_empty());
    }

    #[test]
    fn container_below_threshold_is_not_a_group() {
        let root = ElementTreeNode::new("ul", b(0.0, 0.0, 100.0, 100.0)).with_children(vec![ElementTreeNode::new(
            "li",
            b(0.0, 0.0, 50.0, 10.0),
        )
        .with_children(vec![ElementTreeNode::new("a", b(0.0, 0.0, 50.0, 10.0))])]);
        assert!(extract_groups(&doc(root)).is_empty());
    }

    #[test]
    fn explicit_group_with_one_member_counts() {
        let root = ElementTreeNode::new("root", b(0.0, 0.0, 100.0, 100.0)).with_children(vec![ElementTreeNode::new(
            EXPLICIT_GROUP_TAG,
            b(0.0, 0.0, 50.0, 10.0),
        )
        .with_children(vec![ElementTreeNode::new(EXPLICIT_ITEM_TAG, b(0.0, 0.0, 50.0, 10.0))
            .with_children(vec![ElementTreeNode::typed("element", ty("link"), b(0.0, 0.0, 50.0, 10.0))])])]);
        let groups = extract_groups(&doc(root));
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].items, vec![vec![0]]);
    }

    #[test]
    fn nested_containers_belong_to_the_outer_group() {
        let inner = ElementTreeNode::new("ul", b(0.0, 0.0, 50.0, 50.0)).with_children(vec![
            ElementTreeNode::new("li", b(0.0, 0.0, 10.0, 10.0))
                .with_children(vec![ElementTreeNode::new("a", b(0.0, 0.0, 10.0, 10.0))]),
            ElementTreeNode::new("li", b(0.0, 10.0, 10.0, 10.0))
                .with_children(vec![ElementTreeNode::new("a", b(0.0, 10.0, 10.0, 10.0))]),
        ]);
        let root = ElementTreeNode::new("ul", b(0.0, 0.0, 100.0, 100.0)).with_children(vec![
            ElementTreeNode::new("li", b(0.0, 0.0, 50.0, 50.0)).with_children(vec![inner]),
            ElementTreeNode::new("li", b(50.0, 0.0, 50.0, 50.0))
                .with_children(vec![ElementTreeNode::new("a", b(50.0, 0.0, 10.0, 10.0))]),
        ]);
        let groups = extract_groups(&doc(root));
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].items, vec![vec![0, 1], vec![2]]);
    }
}
