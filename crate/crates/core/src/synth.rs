//! IR synthesis from unlabeled layouts.
//!
//! Per document: discard a random fraction of elements (they become
//! completion targets), read position, size and hierarchy constraints off the
//! remaining geometry, keep a random subset of them, and print the result as
//! an IR. Randomness comes from per-document streams keyed by
//! `(seed, doc id, purpose)`, so output does not depend on scheduling.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{extract_structure, BBox, Canvas, ContainerSet, CorpusError, FlatElement, Group, LayoutDoc};
use crate::ir::{ElementNode, ElementType, GroupNode, HierarchyAtom, IrNode, IrRoot, MemberSig, Position, SizeClass};
use crate::seq::{compile_constraints, encode_layout, GridSpec, SeqError};

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("document `{id}` has no typed elements")]
    NoTypedElements { id: String },
    #[error("invalid synthesis parameters: {0}")]
    InvalidParams(String),
    #[error("document `{id}`: {source}")]
    Seq { id: String, source: SeqError },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

impl SynthError {
    pub fn code(&self) -> &'static str {
        match self {
            SynthError::NoTypedElements { .. } => "NoTypedElements",
            SynthError::InvalidParams(_) => "InvalidParams",
            SynthError::Seq { source, .. } => source.code(),
            SynthError::Corpus(e) => e.code(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    pub discard_rate: f64,
    pub keep_prob_pos: f64,
    pub keep_prob_size: f64,
    pub keep_prob_hier: f64,
    pub pos_margin: f64,
    pub size_small_max: f64,
    pub size_large_min: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            discard_rate: 0.1,
            keep_prob_pos: 0.5,
            keep_prob_size: 0.3,
            keep_prob_hier: 0.8,
            pos_margin: 0.25,
            size_small_max: 0.05,
            size_large_min: 0.40,
            seed: 0,
        }
    }
}

impl SynthParams {
    /// No discarding and every constraint kept.
    pub fn exhaustive(seed: u64) -> Self {
        SynthParams {
            discard_rate: 0.0,
            keep_prob_pos: 1.0,
            keep_prob_size: 1.0,
            keep_prob_hier: 1.0,
            seed,
            ..SynthParams::default()
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidParams(m));
        if !(0.0..1.0).contains(&self.discard_rate) {
            return bad(format!("discard_rate {} not in [0, 1)", self.discard_rate));
        }
        for (name, p) in [
            ("keep_prob_pos", self.keep_prob_pos),
            ("keep_prob_size", self.keep_prob_size),
            ("keep_prob_hier", self.keep_prob_hier),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} not in [0, 1]"));
            }
        }
        if !(self.pos_margin > 0.0 && self.pos_margin < 0.5) {
            return bad(format!("pos_margin {} not in (0, 0.5)", self.pos_margin));
        }
        if !(0.0 <= self.size_small_max && self.size_small_max < self.size_large_min && self.size_large_min <= 1.0) {
            return bad("size thresholds must satisfy 0 <= small_max < large_min <= 1".into());
        }
        Ok(())
    }

    pub fn predicates(&self) -> Predicates {
        Predicates {
            pos_margin: self.pos_margin,
            size_small_max: self.size_small_max,
            size_large_min: self.size_large_min,
        }
    }
}

/// Geometry thresholds shared by extraction, the placer, and the
/// consistency metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Predicates {
    pub pos_margin: f64,
    pub size_small_max: f64,
    pub size_large_min: f64,
}

impl Default for Predicates {
    fn default() -> Self {
        SynthParams::default().predicates()
    }
}

impl Predicates {
    pub fn position(&self, b: &BBox, canvas: Canvas) -> Option<Position> {
        position_const(b, canvas, self.pos_margin)
    }

    pub fn size(&self, b: &BBox, canvas: Canvas) -> Option<SizeClass> {
        size_const(b, canvas, self.size_small_max, self.size_large_min)
    }

    /// Whether a box satisfies an optional position and size requirement.
    pub fn satisfies(&self, b: &BBox, canvas: Canvas, pos: Option<Position>, size: Option<SizeClass>) -> bool {
        pos.is_none_or(|p| self.position(b, canvas) == Some(p)) && size.is_none_or(|s| self.size(b, canvas) == Some(s))
    }
}

/// Position class of a box from its center. Vertical classes win over
/// horizontal ones for corner boxes.
pub fn position_const(b: &BBox, canvas: Canvas, margin: f64) -> Option<Position> {
    let (cx, cy) = b.clamp_to(canvas).center();
    if cy < margin * canvas.h {
        Some(Position::Top)
    } else if cy > (1.0 - margin) * canvas.h {
        Some(Position::Bottom)
    } else if cx < margin * canvas.w {
        Some(Position::Left)
    } else if cx > (1.0 - margin) * canvas.w {
        Some(Position::Right)
    } else {
        None
    }
}

/// Size class of a box from its share of the canvas area.
pub fn size_const(b: &BBox, canvas: Canvas, small_max: f64, large_min: f64) -> Option<SizeClass> {
    let frac = b.clamp_to(canvas).area() / canvas.area();
    if frac <= small_max {
        Some(SizeClass::Small)
    } else if frac >= large_min {
        Some(SizeClass::Large)
    } else {
        None
    }
}

/// Deterministic RNG for one `(seed, key, purpose)` triple.
pub fn stream_rng(seed: u64, key: &str, purpose: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((key.len() as u64).to_le_bytes());
    h.update(key.as_bytes());
    h.update(purpose.as_bytes());
    let digest: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// Splits `0..n` into kept and discarded indices, each discarded with
/// probability `r`. Redraws while nothing would be kept.
pub fn discard_elements<R: Rng + ?Sized>(n: usize, r: f64, rng: &mut R) -> (Vec<usize>, Vec<usize>) {
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    loop {
        let (mut kept, mut discarded) = (Vec::with_capacity(n), Vec::new());
        for i in 0..n {
            if rng.random::<f64>() < r {
                discarded.push(i);
            } else {
                kept.push(i);
            }
        }
        if !kept.is_empty() {
            return (kept, discarded);
        }
    }
}

/// Constraints read off one element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementConst {
    pub index: usize,
    pub etype: ElementType,
    pub pos: Option<Position>,
    pub size: Option<SizeClass>,
}

impl ElementConst {
    fn of(e: &FlatElement, canvas: Canvas, preds: &Predicates) -> Self {
        ElementConst {
            index: e.index,
            etype: e.etype.clone(),
            pos: preds.position(&e.bbox, canvas),
            size: preds.size(&e.bbox, canvas),
        }
    }

    fn sig(&self) -> MemberSig {
        MemberSig::new(self.etype.clone(), self.pos, self.size)
    }
}

/// A hierarchy atom plus the element indices of its first item, used to
/// place the group in document order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedHierarchy {
    pub atom: HierarchyAtom,
    pub first_index: usize,
}

/// Merges items with identical signatures, across all groups, into one atom
/// whose repeat is the number of such items.
pub fn hierarchy_const(items: &[Vec<ElementConst>]) -> Vec<ExtractedHierarchy> {
    let mut by_sig: BTreeMap<Vec<MemberSig>, (u32, usize)> = BTreeMap::new();
    for item in items.iter().filter(|i| !i.is_empty()) {
        let mut sig: Vec<MemberSig> = item.iter().map(ElementConst::sig).collect();
        sig.sort();
        let first = item.iter().map(|e| e.index).min().unwrap_or(0);
        let entry = by_sig.entry(sig).or_insert((0, first));
        entry.0 += 1;
        entry.1 = entry.1.min(first);
    }
    let mut out: Vec<ExtractedHierarchy> = by_sig
        .into_iter()
        .map(|(members, (repeat, first_index))| ExtractedHierarchy {
            atom: HierarchyAtom { members, repeat },
            first_index,
        })
        .collect();
    out.sort_by_key(|h| h.first_index);
    out
}

/// Everything extraction produced for one document, before sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct Extracted {
    /// Kept elements outside any group, in document order.
    pub pointwise: Vec<ElementConst>,
    pub hierarchies: Vec<ExtractedHierarchy>,
}

fn extract_constraints(
    elements: &[FlatElement],
    groups: &[Group],
    kept: &BTreeSet<usize>,
    canvas: Canvas,
    preds: &Predicates,
) -> Extracted {
    let mut in_group = vec![false; elements.len()];
    let mut items = Vec::new();
    for g in groups {
        for item in &g.items {
            let members: Vec<ElementConst> = item
                .iter()
                .filter(|i| kept.contains(i))
                .map(|&i| ElementConst::of(&elements[i], canvas, preds))
                .collect();
            for &i in item {
                in_group[i] = true;
            }
            items.push(members);
        }
    }
    let pointwise = elements
        .iter()
        .filter(|e| kept.contains(&e.index) && !in_group[e.index])
        .map(|e| ElementConst::of(e, canvas, preds))
        .collect();
    Extracted { pointwise, hierarchies: hierarchy_const(&items) }
}

/// Keep decisions for one element slot.
#[derive(Debug, Clone, Copy)]
struct SlotDraw {
    pos: f64,
    size: f64,
}

impl SlotDraw {
    fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        SlotDraw { pos: rng.random(), size: rng.random() }
    }

    fn apply(
        &self,
        etype: &ElementType,
        pos: Option<Position>,
        size: Option<SizeClass>,
        p: &SynthParams,
    ) -> ElementNode {
        ElementNode {
            etype: etype.clone(),
            position: pos.filter(|_| self.pos < p.keep_prob_pos),
            size: size.filter(|_| self.size < p.keep_prob_size),
            repeat: None,
        }
    }
}

/// Samples a constraint subset and assembles the IR.
///
/// Every uniform is drawn regardless of the probabilities, so with a shared
/// stream lowering a keep probability can only remove constraints. Type
/// atoms are always kept. A dropped hierarchy contributes its members as
/// plain elements, `repeat` times each.
pub fn sample_const<R: Rng + ?Sized>(ex: &Extracted, params: &SynthParams, rng: &mut R) -> Option<IrRoot> {
    let point_draws: Vec<SlotDraw> = ex.pointwise.iter().map(|_| SlotDraw::draw(rng)).collect();
    let hier_draws: Vec<(f64, Vec<SlotDraw>)> = ex
        .hierarchies
        .iter()
        .map(|h| (rng.random::<f64>(), h.atom.members.iter().map(|_| SlotDraw::draw(rng)).collect()))
        .collect();

    // (first document index, element) for pointwise output.
    let mut loose: Vec<(usize, ElementNode)> = ex
        .pointwise
        .iter()
        .zip(&point_draws)
        .map(|(e, d)| (e.index, d.apply(&e.etype, e.pos, e.size, params)))
        .collect();
    let mut grouped: Vec<(usize, IrNode)> = Vec::new();
    for (h, (keep, draws)) in ex.hierarchies.iter().zip(&hier_draws) {
        let members: Vec<ElementNode> =
            h.atom.members.iter().zip(draws).map(|(m, d)| d.apply(&m.etype, m.position, m.size, params)).collect();
        if *keep < params.keep_prob_hier {
            grouped.push((h.first_index, IrNode::Group(GroupNode { repeat: h.atom.repeat, items: members })));
        } else {
            for _ in 0..h.atom.repeat {
                loose.extend(members.iter().map(|m| (h.first_index, m.clone())));
            }
        }
    }

    // Collapse identical loose elements into repeats, first occurrence wins.
    loose.sort_by_key(|(i, _)| *i);
    let mut collapsed: Vec<(usize, ElementNode, u32)> = Vec::new();
    let mut slot: BTreeMap<(ElementType, Option<Position>, Option<SizeClass>), usize> = BTreeMap::new();
    for (i, e) in loose {
        let key = (e.etype.clone(), e.position, e.size);
        match slot.get(&key) {
            Some(&k) => collapsed[k].2 += 1,
            None => {
                slot.insert(key, collapsed.len());
                collapsed.push((i, e, 1));
            }
        }
    }
    let mut children: Vec<(usize, IrNode)> =
        collapsed.into_iter().map(|(i, e, n)| (i, IrNode::Element(if n > 1 { e.with_repeat(n) } else { e }))).collect();
    children.extend(grouped);
    children.sort_by_key(|(i, _)| *i);
    IrRoot::new(children.into_iter().map(|(_, n)| n).collect()).ok()
}

/// Result of synthesizing one document.
#[derive(Debug, Clone, PartialEq)]
pub struct Synthesized {
    pub ir: IrRoot,
    /// Element indices (pre-order over typed elements) that were discarded.
    pub discarded: BTreeSet<usize>,
}

/// Synthesizes an IR for a document using explicit RNG streams.
pub fn synthesize_ir_with<R: Rng + ?Sized>(
    doc: &LayoutDoc,
    params: &SynthParams,
    discard_rng: &mut R,
    sample_rng: &mut R,
) -> Result<Synthesized, SynthError> {
    let (ex, groups) = extract_structure(doc, &ContainerSet::for_domain(doc.domain));
    if ex.elements.is_empty() {
        return Err(SynthError::NoTypedElements { id: doc.id.clone() });
    }
    let (kept, discarded) = discard_elements(ex.elements.len(), params.discard_rate, discard_rng);
    let kept: BTreeSet<usize> = kept.into_iter().collect();
    let extracted = extract_constraints(&ex.elements, &groups, &kept, doc.canvas, &params.predicates());
    let ir = sample_const(&extracted, params, sample_rng)
        .ok_or_else(|| SynthError::NoTypedElements { id: doc.id.clone() })?;
    Ok(Synthesized { ir, discarded: discarded.into_iter().collect() })
}

/// Synthesizes an IR with RNG streams derived from `(params.seed, doc.id)`.
pub fn synthesize_ir(doc: &LayoutDoc, params: &SynthParams) -> Result<Synthesized, SynthError> {
    params.validate()?;
    let mut discard_rng = stream_rng(params.seed, &doc.id, "discard");
    let mut sample_rng = stream_rng(params.seed, &doc.id, "sample");
    synthesize_ir_with(doc, params, &mut discard_rng, &mut sample_rng)
}

/// One training pair, ready to serialize as a JSONL line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthRecord {
    pub id: String,
    pub ir: String,
    pub layout_seq: String,
    pub constraint_seq: String,
    pub params: SynthParams,
}

pub fn synthesize_record(doc: &LayoutDoc, params: &SynthParams) -> Result<SynthRecord, SynthError> {
    let s = synthesize_ir(doc, params)?;
    let grid = GridSpec::for_domain(doc.domain);
    let layout =
        encode_layout(doc, grid, &s.discarded).map_err(|source| SynthError::Seq { id: doc.id.clone(), source })?;
    Ok(SynthRecord {
        id: doc.id.clone(),
        ir: s.ir.to_string(),
        layout_seq: layout.to_string(),
        constraint_seq: compile_constraints(&s.ir).to_string(),
        params: *params,
    })
}

/// Counts from a dataset build.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthSummary {
    pub read: u64,
    pub written: u64,
    pub skipped: u64,
}

/// Streams documents through synthesis in fixed-size chunks, writing one JSON
/// line per success in input order. Per-record failures (including schema
/// violations on input) are logged and counted; I/O failures abort.
pub fn build_synthetic_dataset<I, W>(
    docs: I,
    params: &SynthParams,
    out: &mut W,
    chunk_size: usize,
) -> Result<SynthSummary, SynthError>
where
    I: IntoIterator<Item = Result<LayoutDoc, CorpusError>>,
    W: Write,
{
    params.validate()?;
    let mut summary = SynthSummary::default();
    let mut chunk: Vec<LayoutDoc> = Vec::with_capacity(chunk_size.max(1));
    let mut flush = |chunk: &mut Vec<LayoutDoc>, summary: &mut SynthSummary| -> Result<(), SynthError> {
        let lines: Vec<Result<String, SynthError>> = chunk
            .par_iter()
            .map(|d| synthesize_record(d, params).map(|r| serde_json::to_string(&r).expect("record serializes")))
            .collect();
        for line in lines {
            match line {
                Ok(l) => {
                    out.write_all(l.as_bytes()).map_err(CorpusError::from)?;
                    out.write_all(b"\n").map_err(CorpusError::from)?;
                    summary.written += 1;
                }
                Err(e) => {
                    log::warn!("skipping record: {e}");
                    summary.skipped += 1;
                }
            }
        }
        chunk.clear();
        Ok(())
    };
    for doc in docs {
        match doc {
            Ok(d) => {
                summary.read += 1;
                chunk.push(d);
                if chunk.len() >= chunk_size.max(1) {
                    flush(&mut chunk, &mut summary)?;
                }
            }
            Err(CorpusError::Io(e)) => return Err(CorpusError::Io(e).into()),
            Err(e) => {
                log::warn!("skipping record: {e}");
                summary.read += 1;
                summary.skipped += 1;
            }
        }
    }
    flush(&mut chunk, &mut summary)?;
    Ok(summary)
}
