use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use super::{
    continuize, discretize, discretize_size, lex, lookup_type, split_structure, GridSpec, SeqError, COMPLETE, NULL,
};
use crate::corpus::{
    extract_structure, BBox, Canvas, ContainerSet, ElementTreeNode, LayoutDoc, EXPLICIT_GROUP_TAG, EXPLICIT_ITEM_TAG,
};
use crate::ir::{Domain, ElementType, TypeVocabulary};

/// Root tag of decoded documents.
pub const DECODED_ROOT_TAG: &str = "canvas";
/// Tag of decoded element nodes.
pub const DECODED_ELEMENT_TAG: &str = "element";

/// One element: optional `complete` flag, type, and `l t w h` in bins.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LayoutElementTok {
    pub completed: bool,
    pub etype: ElementType,
    pub l: u32,
    pub t: u32,
    pub w: u32,
    pub h: u32,
}

impl LayoutElementTok {
    fn key(&self) -> (&str, u32, u32, u32, u32, bool) {
        (self.etype.as_str(), self.t, self.l, self.w, self.h, self.completed)
    }

    pub fn validate(&self, grid: GridSpec) -> Result<(), SeqError> {
        let err = |field, value: u32, bins| Err(SeqError::BinOutOfRange { field, value: value as i64, bins });
        if self.l >= grid.w_bins {
            return err("l", self.l, grid.w_bins);
        }
        if self.t >= grid.h_bins {
            return err("t", self.t, grid.h_bins);
        }
        if self.w == 0 || self.l + self.w > grid.w_bins {
            return err("w", self.w, grid.w_bins);
        }
        if self.h == 0 || self.t + self.h > grid.h_bins {
            return err("h", self.h, grid.h_bins);
        }
        Ok(())
    }

    /// Box in canvas units.
    pub fn to_box(&self, grid: GridSpec, canvas: Canvas) -> BBox {
        BBox::new(
            continuize(self.l, canvas.w, grid.w_bins),
            continuize(self.t, canvas.h, grid.h_bins),
            continuize(self.w, canvas.w, grid.w_bins),
            continuize(self.h, canvas.h, grid.h_bins),
        )
    }
}

impl Ord for LayoutElementTok {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for LayoutElementTok {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LayoutElementTok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.completed {
            write!(f, "{COMPLETE} ")?;
        }
        write!(f, "{} {} {} {} {}", self.etype, self.l, self.t, self.w, self.h)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct LayoutSeq {
    pub ungrouped: Vec<LayoutElementTok>,
    pub groups: Vec<Vec<LayoutElementTok>>,
}

impl LayoutSeq {
    pub fn is_empty(&self) -> bool {
        self.ungrouped.is_empty() && self.groups.iter().all(Vec::is_empty)
    }

    pub fn len(&self) -> usize {
        self.ungrouped.len() + self.groups.iter().map(Vec::len).sum::<usize>()
    }

    pub fn elements(&self) -> impl Iterator<Item = &LayoutElementTok> {
        self.ungrouped.iter().chain(self.groups.iter().flatten())
    }

    pub fn tokens(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let push = |out: &mut Vec<String>, e: &LayoutElementTok| {
            if e.completed {
                out.push(COMPLETE.into());
            }
            out.push(e.etype.as_str().into());
            out.extend([e.l, e.t, e.w, e.h].iter().map(u32::to_string));
        };
        for e in &self.ungrouped {
            if !out.is_empty() {
                out.push("|".into());
            }
            push(&mut out, e);
        }
        for g in &self.groups {
            if !out.is_empty() {
                out.push("|".into());
            }
            out.push("[".into());
            for (i, e) in g.iter().enumerate() {
                if i > 0 {
                    out.push("|".into());
                }
                push(&mut out, e);
            }
            out.push("]".into());
        }
        out
    }
}

impl fmt::Display for LayoutSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>| {
            if !std::mem::take(&mut first) {
                f.write_str(" | ")?;
            }
            Ok(())
        };
        for e in &self.ungrouped {
            sep(f)?;
            write!(f, "{e}")?;
        }
        for g in &self.groups {
            sep(f)?;
            f.write_str("[ ")?;
            for (i, e) in g.iter().enumerate() {
                if i > 0 {
                    f.write_str(" | ")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str(" ]")?;
        }
        Ok(())
    }
}

/// Canonical element order: by type name, then reading order `(t, l)`, then
/// size. Blocks are sorted internally, then by their element sequences.
pub fn canonicalize(seq: &mut LayoutSeq) {
    seq.ungrouped.sort();
    for g in &mut seq.groups {
        g.sort();
    }
    seq.groups.retain(|g| !g.is_empty());
    seq.groups.sort();
}

pub fn render_layout_tokens(seq: &LayoutSeq) -> String {
    seq.to_string()
}

fn parse_element(seg: &[&str], vocab: &TypeVocabulary) -> Result<LayoutElementTok, SeqError> {
    let (completed, rest) = match seg.first() {
        Some(&COMPLETE) => (true, &seg[1..]),
        Some(&NULL) => (false, &seg[1..]),
        _ => (false, seg),
    };
    let n_num = rest.iter().rev().take_while(|t| t.bytes().all(|b| b.is_ascii_digit()) || t.starts_with('-')).count();
    let type_words = rest.len() - n_num;
    if n_num != 4 || type_words == 0 {
        let found = usize::from(seg.len() > rest.len()) + usize::from(type_words > 0) + n_num;
        return Err(SeqError::TokenArity { segment: seg.join(" "), found });
    }
    let etype = lookup_type(&rest[..type_words], vocab)?;
    let mut nums = [0u32; 4];
    const FIELDS: [&str; 4] = ["l", "t", "w", "h"];
    for (k, tok) in rest[type_words..].iter().enumerate() {
        nums[k] = tok.parse::<u32>().map_err(|_| SeqError::BinOutOfRange {
            field: FIELDS[k],
            value: tok.parse::<i64>().unwrap_or(i64::MIN),
            bins: 0,
        })?;
    }
    let [l, t, w, h] = nums;
    Ok(LayoutElementTok { completed, etype, l, t, w, h })
}

/// Parses layout sequence text. Input order is kept.
pub fn parse_layout_tokens(text: &str, vocab: &TypeVocabulary) -> Result<LayoutSeq, SeqError> {
    let tokens = lex(text);
    if tokens.is_empty() {
        return Err(SeqError::EmptyLayout);
    }
    let s = split_structure(&tokens)?;
    let ungrouped = s.ungrouped.iter().map(|seg| parse_element(seg, vocab)).collect::<Result<_, _>>()?;
    let groups = s
        .blocks
        .iter()
        .map(|b| b.iter().map(|seg| parse_element(seg, vocab)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    Ok(LayoutSeq { ungrouped, groups })
}

fn encode_box(b: &BBox, canvas: Canvas, grid: GridSpec) -> Result<[u32; 4], SeqError> {
    let c = b.clamp_to(canvas);
    let l = discretize(c.l, canvas.w, grid.w_bins)?;
    let t = discretize(c.t, canvas.h, grid.h_bins)?;
    let w = discretize_size(c.w, canvas.w, grid.w_bins)?.min(grid.w_bins - l);
    let h = discretize_size(c.h, canvas.h, grid.h_bins)?.min(grid.h_bins - t);
    Ok([l, t, w, h])
}

/// Encodes a document. Elements are flagged `complete` when their index is in
/// `completed_ids` or their node carries the completion attribute. Members of
/// extracted groups become one bracketed block per item.
pub fn encode_layout(doc: &LayoutDoc, grid: GridSpec, completed_ids: &BTreeSet<usize>) -> Result<LayoutSeq, SeqError> {
    let (ex, groups) = extract_structure(doc, &ContainerSet::for_domain(doc.domain));
    if ex.elements.is_empty() {
        return Err(SeqError::EmptyLayout);
    }
    let mut toks = Vec::with_capacity(ex.elements.len());
    for e in &ex.elements {
        let [l, t, w, h] = encode_box(&e.bbox, doc.canvas, grid)?;
        let completed = e.completed || completed_ids.contains(&e.index);
        toks.push(LayoutElementTok { completed, etype: e.etype.clone(), l, t, w, h });
    }
    let mut grouped = vec![false; toks.len()];
    let mut seq = LayoutSeq::default();
    for g in &groups {
        for item in &g.items {
            seq.groups.push(item.iter().map(|&i| toks[i].clone()).collect());
            for &i in item {
                grouped[i] = true;
            }
        }
    }
    seq.ungrouped = toks.into_iter().zip(grouped).filter(|(_, g)| !g).map(|(t, _)| t).collect();
    canonicalize(&mut seq);
    Ok(seq)
}

fn element_node(e: &LayoutElementTok, grid: GridSpec, canvas: Canvas) -> ElementTreeNode {
    let mut node = ElementTreeNode::typed(DECODED_ELEMENT_TAG, e.etype.clone(), e.to_box(grid, canvas));
    if e.completed {
        node.mark_completed();
    }
    node
}

fn union_box(nodes: &[ElementTreeNode]) -> BBox {
    nodes.iter().skip(1).fold(nodes[0].bbox, |acc, n| acc.union(&n.bbox))
}

fn type_signature(block: &[LayoutElementTok]) -> Vec<&str> {
    let mut sig: Vec<&str> = block.iter().map(|e| e.etype.as_str()).collect();
    sig.sort_unstable();
    sig
}

/// Rebuilds a document from a sequence. Consecutive blocks with the same type
/// multiset share one group container; each block becomes an item.
pub fn decode_layout(seq: &LayoutSeq, grid: GridSpec, canvas: Canvas, domain: Domain) -> Result<LayoutDoc, SeqError> {
    if seq.is_empty() {
        return Err(SeqError::EmptyLayout);
    }
    for e in seq.elements() {
        e.validate(grid)?;
    }
    let mut children: Vec<ElementTreeNode> = seq.ungrouped.iter().map(|e| element_node(e, grid, canvas)).collect();
    let blocks: Vec<&Vec<LayoutElementTok>> = seq.groups.iter().filter(|g| !g.is_empty()).collect();
    let mut i = 0;
    while i < blocks.len() {
        let sig = type_signature(blocks[i]);
        let mut j = i + 1;
        while j < blocks.len() && type_signature(blocks[j]) == sig {
            j += 1;
        }
        let items: Vec<ElementTreeNode> = blocks[i..j]
            .iter()
            .map(|b| {
                let members: Vec<ElementTreeNode> = b.iter().map(|e| element_node(e, grid, canvas)).collect();
                ElementTreeNode::new(EXPLICIT_ITEM_TAG, union_box(&members)).with_children(members)
            })
            .collect();
        children.push(ElementTreeNode::new(EXPLICIT_GROUP_TAG, union_box(&items)).with_children(items));
        i = j;
    }
    Ok(LayoutDoc {
        id: String::new(),
        domain,
        canvas,
        root: ElementTreeNode::new(DECODED_ROOT_TAG, canvas.full_box()).with_children(children),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::extract_groups;

    fn web() -> &'static TypeVocabulary {
        TypeVocabulary::webui()
    }

    const ROW4: &str = "button 54 33 10 10 | complete input 10 65 94 2 | title 20 0 78 4 | [ image 14 71 15 9 | link 15 72 14 8 ] | [ image 33 71 15 9 | link 34 72 14 8 ] | [ image 51 71 15 9 | link 52 72 14 8 ] | [ image 68 71 15 9 | link 69 72 14 8 ] | [ image 86 71 15 9 | link 87 72 14 8 ]";

    #[test]
    fn render_parse_round_trip() {
        let seq = parse_layout_tokens(ROW4, web()).unwrap();
        assert_eq!(seq.len(), 13);
        assert_eq!(seq.groups.len(), 5);
        assert!(seq.ungrouped[1].completed);
        assert_eq!(seq.to_string(), ROW4);
        assert_eq!(seq.tokens().join(" "), ROW4);
    }

    #[test]
    fn decode_arithmetic() {
        let seq = parse_layout_tokens("title 13 0 93 4", web()).unwrap();
        let doc = decode_layout(&seq, GridSpec::WEBUI, Canvas::new(1200.0, 1200.0), Domain::WebUi).unwrap();
        assert_eq!(doc.root.children[0].bbox, BBox::new(130.0, 0.0, 930.0, 40.0));
    }

    #[test]
    fn decode_keeps_groups_and_flags() {
        let seq = parse_layout_tokens(ROW4, web()).unwrap();
        let canvas = Canvas::new(1200.0, 1200.0);
        let doc = decode_layout(&seq, GridSpec::WEBUI, canvas, Domain::WebUi).unwrap();
        let groups = extract_groups(&doc);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].items.len(), 5);
        let again = encode_layout(&doc, GridSpec::WEBUI, &BTreeSet::new()).unwrap();
        assert_eq!(again, seq);
    }

    #[test]
    fn errors() {
        assert_eq!(parse_layout_tokens("", web()), Err(SeqError::EmptyLayout));
        assert_eq!(parse_layout_tokens("  ", web()), Err(SeqError::EmptyLayout));
        assert!(matches!(parse_layout_tokens("title 1 2 3", web()), Err(SeqError::TokenArity { found: 4, .. })));
        assert!(matches!(parse_layout_tokens("complete title 1 2 3 4 5", web()), Err(SeqError::TokenArity { .. })));
        assert!(matches!(parse_layout_tokens("widget 1 2 3 4", web()), Err(SeqError::UnknownToken { .. })));
        let seq = parse_layout_tokens("title 119 0 2 4", web()).unwrap();
        assert!(matches!(
            decode_layout(&seq, GridSpec::WEBUI, Canvas::new(1.0, 1.0), Domain::WebUi),
            Err(SeqError::BinOutOfRange { field: "w", .. })
        ));
        assert!(matches!(
            decode_layout(&LayoutSeq::default(), GridSpec::WEBUI, Canvas::new(1.0, 1.0), Domain::WebUi),
            Err(SeqError::EmptyLayout)
        ));
    }

    #[test]
    fn null_attribute_is_accepted() {
        let seq = parse_layout_tokens("null title 1 2 3 4", web()).unwrap();
        assert!(!seq.ungrouped[0].completed);
        assert_eq!(seq.to_string(), "title 1 2 3 4");
    }
}
