use std::cmp::Ordering;
use std::fmt;

use super::{lex, lookup_type, split_structure, SeqError, UNDEFINED};
use crate::ir::{ElementNode, ElementType, GroupNode, IrNode, IrRoot, Position, SizeClass, TypeVocabulary};

/// `type pos size`, with `undefined` for a missing position or size.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PointwiseTriple {
    pub etype: ElementType,
    pub pos: Option<Position>,
    pub size: Option<SizeClass>,
}

impl PointwiseTriple {
    pub fn new(etype: ElementType, pos: Option<Position>, size: Option<SizeClass>) -> Self {
        PointwiseTriple { etype, pos, size }
    }

    pub fn of(e: &ElementNode) -> Self {
        PointwiseTriple { etype: e.etype.clone(), pos: e.position, size: e.size }
    }

    pub fn pos_token(&self) -> &'static str {
        self.pos.map_or(UNDEFINED, Position::as_str)
    }

    pub fn size_token(&self) -> &'static str {
        self.size.map_or(UNDEFINED, SizeClass::as_str)
    }

    fn key(&self) -> (&str, &str, &str) {
        (self.etype.as_str(), self.pos_token(), self.size_token())
    }

    pub fn to_element(&self) -> ElementNode {
        ElementNode { etype: self.etype.clone(), position: self.pos, size: self.size, repeat: None }
    }
}

impl Ord for PointwiseTriple {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for PointwiseTriple {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PointwiseTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.etype, self.pos_token(), self.size_token())
    }
}

/// Pointwise triples followed by group blocks, both in canonical order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ConstraintSeq {
    pub pointwise: Vec<PointwiseTriple>,
    pub groups: Vec<Vec<PointwiseTriple>>,
}

impl ConstraintSeq {
    pub fn is_empty(&self) -> bool {
        self.pointwise.is_empty() && self.groups.is_empty()
    }

    /// Sorts triples by type name then position and size token, blocks
    /// internally the same way, and blocks by their element sequence.
    pub fn canonicalize(&mut self) {
        self.pointwise.sort();
        for g in &mut self.groups {
            g.sort();
        }
        self.groups.sort();
    }

    /// Token list; multi-word types are single tokens.
    pub fn tokens(&self) -> Vec<String> {
        let mut out = Vec::new();
        let push_triple = |out: &mut Vec<String>, t: &PointwiseTriple| {
            out.push(t.etype.as_str().to_string());
            out.push(t.pos_token().to_string());
            out.push(t.size_token().to_string());
        };
        for t in &self.pointwise {
            if !out.is_empty() {
                out.push("|".into());
            }
            push_triple(&mut out, t);
        }
        for g in &self.groups {
            if !out.is_empty() {
                out.push("|".into());
            }
            out.push("[".into());
            for (i, t) in g.iter().enumerate() {
                if i > 0 {
                    out.push("|".into());
                }
                push_triple(&mut out, t);
            }
            out.push("]".into());
        }
        out
    }

    /// Rebuilds an IR with the same constraint multiset. Runs of identical
    /// blocks become one group.
    pub fn to_ir(&self) -> Option<IrRoot> {
        let mut children: Vec<IrNode> = self.pointwise.iter().map(|t| IrNode::Element(t.to_element())).collect();
        let mut i = 0;
        while i < self.groups.len() {
            let mut j = i + 1;
            while j < self.groups.len() && self.groups[j] == self.groups[i] {
                j += 1;
            }
            children.push(IrNode::Group(GroupNode {
                repeat: (j - i) as u32,
                items: self.groups[i].iter().map(PointwiseTriple::to_element).collect(),
            }));
            i = j;
        }
        IrRoot::new(children).ok()
    }

    /// Distinct element types mentioned anywhere.
    pub fn types(&self) -> impl Iterator<Item = &ElementType> {
        self.pointwise.iter().chain(self.groups.iter().flatten()).map(|t| &t.etype)
    }
}

impl fmt::Display for ConstraintSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tokens().join(" "))
    }
}

impl Ord for ConstraintSeq {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.pointwise, &self.groups).cmp(&(&other.pointwise, &other.groups))
    }
}

impl PartialOrd for ConstraintSeq {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Deterministic serialization of an IR. Element repeats expand into copies,
/// group repeats into identical blocks.
pub fn compile_constraints(ir: &IrRoot) -> ConstraintSeq {
    let mut cs = ConstraintSeq::default();
    for child in &ir.children {
        match child {
            IrNode::Element(e) => {
                let t = PointwiseTriple::of(e);
                for _ in 0..e.multiplicity() {
                    cs.pointwise.push(t.clone());
                }
            }
            IrNode::Group(g) => {
                let block: Vec<PointwiseTriple> = g.items.iter().map(PointwiseTriple::of).collect();
                for _ in 0..g.repeat {
                    cs.groups.push(block.clone());
                }
            }
        }
    }
    cs.canonicalize();
    cs
}

pub fn render_constraint_tokens(cs: &ConstraintSeq) -> String {
    cs.to_string()
}

fn parse_triple(seg: &[&str], vocab: &TypeVocabulary) -> Result<PointwiseTriple, SeqError> {
    let malformed = |reason| SeqError::MalformedTriple { segment: seg.join(" "), reason };
    if seg.len() < 3 {
        return Err(malformed("expected `type pos size`"));
    }
    let (words, rest) = seg.split_at(seg.len() - 2);
    let pos = match rest[0] {
        UNDEFINED => None,
        p => Some(p.parse::<Position>().map_err(|_| SeqError::UnknownToken { token: p.into() })?),
    };
    let size = match rest[1] {
        UNDEFINED => None,
        s => Some(s.parse::<SizeClass>().map_err(|_| SeqError::UnknownToken { token: s.into() })?),
    };
    Ok(PointwiseTriple { etype: lookup_type(words, vocab)?, pos, size })
}

/// Parses constraint sequence text. Input order is kept; empty text gives an
/// empty sequence.
pub fn parse_constraint_tokens(text: &str, vocab: &TypeVocabulary) -> Result<ConstraintSeq, SeqError> {
    let tokens = lex(text);
    let s = split_structure(&tokens)?;
    let pointwise = s.ungrouped.iter().map(|seg| parse_triple(seg, vocab)).collect::<Result<_, _>>()?;
    let groups = s
        .blocks
        .iter()
        .map(|b| b.iter().map(|seg| parse_triple(seg, vocab)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    Ok(ConstraintSeq { pointwise, groups })
}
