//! Layout quality and constraint consistency metrics.
//!
//! Geometric metrics work on boxes clamped to the canvas and normalized to
//! `[0, 1]`, so they are invariant to canvas scale.

mod assign;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{extract_elements, extract_structure, BBox, ContainerSet, FlatElement, LayoutDoc};
use crate::ir::{flatten_constraints, ConstraintAtom, IrNode, IrRoot, MemberSig, Position, SizeClass};
use crate::synth::Predicates;

pub use assign::max_weight_assignment;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("layout has no elements")]
    EmptyLayout,
    #[error("empty layout set")]
    EmptySet,
    #[error("constraints require groups but the layout has none")]
    MissingGroupStructure,
    #[error("{generated} generated layouts but {references} references")]
    LengthMismatch { generated: usize, references: usize },
}

impl MetricsError {
    pub fn code(&self) -> &'static str {
        match self {
            MetricsError::EmptyLayout => "EmptyLayout",
            MetricsError::EmptySet => "EmptySet",
            MetricsError::MissingGroupStructure => "MissingGroupStructure",
            MetricsError::LengthMismatch { .. } => "LengthMismatch",
        }
    }
}

/// Element type and box normalized by the canvas.
fn normalized(doc: &LayoutDoc) -> Vec<(FlatElement, BBox)> {
    extract_elements(doc)
        .elements
        .into_iter()
        .map(|e| {
            let c = e.bbox.clamp_to(doc.canvas);
            let n = BBox::new(c.l / doc.canvas.w, c.t / doc.canvas.h, c.w / doc.canvas.w, c.h / doc.canvas.h);
            (e, n)
        })
        .collect()
}

fn axes(b: &BBox) -> [f64; 6] {
    let (cx, cy) = b.center();
    [b.l, cx, b.right(), b.t, cy, b.bottom()]
}

/// Mean over elements of the smallest gap, over the six alignment axes and
/// all other elements, between an element's axis and the same axis of another.
pub fn alignment(doc: &LayoutDoc) -> Result<f64, MetricsError> {
    let els = normalized(doc);
    if els.is_empty() {
        return Err(MetricsError::EmptyLayout);
    }
    if els.len() == 1 {
        return Ok(0.0);
    }
    let ax: Vec<[f64; 6]> = els.iter().map(|(_, b)| axes(b)).collect();
    let total: f64 = (0..ax.len())
        .map(|i| {
            (0..ax.len())
                .filter(|&j| j != i)
                .flat_map(|j| (0..6).map(move |k| (j, k)))
                .map(|(j, k)| (ax[i][k] - ax[j][k]).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / ax.len() as f64)
}

/// Pairwise intersection area over total area, ignoring background images.
pub fn overlap(doc: &LayoutDoc) -> Result<f64, MetricsError> {
    let els = normalized(doc);
    if els.is_empty() {
        return Err(MetricsError::EmptyLayout);
    }
    let boxes: Vec<BBox> = els.iter().filter(|(e, _)| !e.etype.is_background()).map(|(_, b)| *b).collect();
    let area: f64 = boxes.iter().map(BBox::area).sum();
    if area <= 0.0 {
        return Ok(0.0);
    }
    let mut inter = 0.0;
    for i in 0..boxes.len() {
        for j in i + 1..boxes.len() {
            inter += boxes[i].intersection_area(&boxes[j]);
        }
    }
    Ok(inter / area)
}

fn by_type(els: &[(FlatElement, BBox)]) -> BTreeMap<&str, Vec<BBox>> {
    let mut m: BTreeMap<&str, Vec<BBox>> = BTreeMap::new();
    for (e, b) in els {
        m.entry(e.etype.as_str()).or_default().push(*b);
    }
    m
}

/// Sum over types of the best one-to-one same-type matching under `weight`,
/// divided by the larger element count.
fn matched_similarity(a: &LayoutDoc, b: &LayoutDoc, weight: impl Fn(&BBox, &BBox) -> f64) -> Result<f64, MetricsError> {
    let (ea, eb) = (normalized(a), normalized(b));
    if ea.is_empty() || eb.is_empty() {
        return Err(MetricsError::EmptyLayout);
    }
    let (ta, tb) = (by_type(&ea), by_type(&eb));
    let mut total = 0.0;
    for (t, boxes_a) in &ta {
        let Some(boxes_b) = tb.get(t) else { continue };
        let w: Vec<Vec<f64>> = boxes_a.iter().map(|x| boxes_b.iter().map(|y| weight(x, y)).collect()).collect();
        total += max_weight_assignment(&w).1;
    }
    Ok(total / ea.len().max(eb.len()) as f64)
}

/// Matching-based maximum IoU between a generated and a reference layout.
pub fn max_iou(generated: &LayoutDoc, reference: &LayoutDoc) -> Result<f64, MetricsError> {
    matched_similarity(generated, reference, BBox::iou)
}

/// Element-matching document similarity. Pair weight is
/// `sqrt(min area) * 2^(-|center delta|_2 - 2 |size delta|_1)`; the total is
/// divided by the larger element count, so `docsim(x, x)` bounds `docsim(x, y)`.
pub fn docsim(a: &LayoutDoc, b: &LayoutDoc) -> Result<f64, MetricsError> {
    matched_similarity(a, b, |x, y| {
        let (xc, yc) = (x.center(), y.center());
        let dc = ((xc.0 - yc.0).powi(2) + (xc.1 - yc.1).powi(2)).sqrt();
        let ds = (x.w - y.w).abs() + (x.h - y.h).abs();
        x.area().min(y.area()).sqrt() * 2f64.powf(-dc - 2.0 * ds)
    })
}

/// Index of the most similar training layout, lowest index on ties.
pub fn retrieve(generated: &LayoutDoc, train: &[LayoutDoc]) -> Result<usize, MetricsError> {
    if train.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (j, t) in train.iter().enumerate() {
        let s = docsim(generated, t)?;
        if s > best.1 {
            best = (j, s);
        }
    }
    Ok(best.0)
}

/// Distinct retrieved training layouts over the number of generated layouts.
pub fn unique_match(generated: &[LayoutDoc], train: &[LayoutDoc]) -> Result<f64, MetricsError> {
    if generated.is_empty() || train.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let hits: Vec<usize> = generated.par_iter().map(|g| retrieve(g, train)).collect::<Result<_, _>>()?;
    let distinct: BTreeSet<usize> = hits.into_iter().collect();
    Ok(distinct.len() as f64 / generated.len() as f64)
}

/// One element-level requirement: a type plus optional position and size.
#[derive(Debug, Clone, PartialEq)]
struct Requirement {
    sig: MemberSig,
}

/// Every element the IR asks for: pointwise elements times their repeat and
/// group members times the group repeat.
fn requirements(ir: &IrRoot) -> Vec<Requirement> {
    let mut out = Vec::new();
    for child in &ir.children {
        match child {
            IrNode::Element(e) => {
                for _ in 0..e.multiplicity() {
                    out.push(Requirement { sig: MemberSig::new(e.etype.clone(), e.position, e.size) });
                }
            }
            IrNode::Group(g) => {
                for _ in 0..g.repeat {
                    for m in &g.items {
                        out.push(Requirement { sig: MemberSig::new(m.etype.clone(), m.position, m.size) });
                    }
                }
            }
        }
    }
    out
}

fn active(doc: &LayoutDoc) -> Vec<FlatElement> {
    extract_elements(doc).elements.into_iter().filter(|e| !e.completed).collect()
}

/// Share of required elements present, counting each type up to its
/// available number of non-completed elements. Vacuously 1 with no
/// requirements.
pub fn type_consistency(ir: &IrRoot, doc: &LayoutDoc) -> f64 {
    let reqs = requirements(ir);
    if reqs.is_empty() {
        return 1.0;
    }
    let mut need: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &reqs {
        *need.entry(r.sig.etype.as_str()).or_insert(0) += 1;
    }
    let mut have: BTreeMap<String, usize> = BTreeMap::new();
    for e in active(doc) {
        *have.entry(e.etype.as_str().to_string()).or_insert(0) += 1;
    }
    let satisfied: usize = need.iter().map(|(t, n)| (*n).min(have.get(*t).copied().unwrap_or(0))).sum();
    satisfied as f64 / reqs.len() as f64
}

fn satisfied_atoms(
    preds: &Predicates,
    b: &BBox,
    doc: &LayoutDoc,
    pos: Option<Position>,
    size: Option<SizeClass>,
) -> f64 {
    let p = pos.is_some_and(|p| preds.position(b, doc.canvas) == Some(p));
    let s = size.is_some_and(|s| preds.size(b, doc.canvas) == Some(s));
    f64::from(u8::from(p) + u8::from(s))
}

pub fn pos_size_consistency(ir: &IrRoot, doc: &LayoutDoc) -> f64 {
    pos_size_consistency_with(ir, doc, &Predicates::default())
}

/// Share of position and size atoms satisfied under a maximum-satisfaction
/// matching of constrained requirements to same-type elements.
pub fn pos_size_consistency_with(ir: &IrRoot, doc: &LayoutDoc, preds: &Predicates) -> f64 {
    let reqs: Vec<Requirement> =
        requirements(ir).into_iter().filter(|r| r.sig.position.is_some() || r.sig.size.is_some()).collect();
    let atoms: usize =
        reqs.iter().map(|r| usize::from(r.sig.position.is_some()) + usize::from(r.sig.size.is_some())).sum();
    if atoms == 0 {
        return 1.0;
    }
    let elements = active(doc);
    let mut by_type: BTreeMap<&str, (Vec<&Requirement>, Vec<&FlatElement>)> = BTreeMap::new();
    for r in &reqs {
        by_type.entry(r.sig.etype.as_str()).or_default().0.push(r);
    }
    for e in &elements {
        if let Some(slot) = by_type.get_mut(e.etype.as_str()) {
            slot.1.push(e);
        }
    }
    let mut satisfied = 0.0;
    for (rs, es) in by_type.values() {
        if es.is_empty() {
            continue;
        }
        let w: Vec<Vec<f64>> = rs
            .iter()
            .map(|r| es.iter().map(|e| satisfied_atoms(preds, &e.bbox, doc, r.sig.position, r.sig.size)).collect())
            .collect();
        satisfied += max_weight_assignment(&w).1;
    }
    satisfied / atoms as f64
}

pub fn hierarchy_consistency(ir: &IrRoot, doc: &LayoutDoc) -> Result<f64, MetricsError> {
    hierarchy_consistency_with(ir, doc, &Predicates::default())
}

/// Whether an item's members can be assigned one-to-one to the signature
/// slots with matching types and satisfied predicates.
fn item_matches(sig: &[MemberSig], members: &[&FlatElement], doc: &LayoutDoc, preds: &Predicates) -> bool {
    if sig.len() != members.len() {
        return false;
    }
    let mut a: Vec<&str> = sig.iter().map(|m| m.etype.as_str()).collect();
    let mut b: Vec<&str> = members.iter().map(|e| e.etype.as_str()).collect();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return false;
    }
    let w: Vec<Vec<f64>> = sig
        .iter()
        .map(|m| {
            members
                .iter()
                .map(|e| {
                    f64::from(u8::from(e.etype == m.etype && preds.satisfies(&e.bbox, doc.canvas, m.position, m.size)))
                })
                .collect()
        })
        .collect();
    max_weight_assignment(&w).1 >= sig.len() as f64 - 0.5
}

/// Mean over hierarchy atoms of the share of their `repeat` items found in
/// the layout's groups. Items are matched one-to-one across all atoms.
pub fn hierarchy_consistency_with(ir: &IrRoot, doc: &LayoutDoc, preds: &Predicates) -> Result<f64, MetricsError> {
    let set = flatten_constraints(ir);
    let atoms: Vec<_> = set.hierarchy_atoms().collect();
    if atoms.is_empty() {
        return Ok(1.0);
    }
    let (ex, groups) = extract_structure(doc, &ContainerSet::for_domain(doc.domain));
    if groups.is_empty() {
        return Err(MetricsError::MissingGroupStructure);
    }
    let items: Vec<Vec<&FlatElement>> = groups
        .iter()
        .flat_map(|g| g.items.iter())
        .map(|item| item.iter().map(|&i| &ex.elements[i]).filter(|e| !e.completed).collect::<Vec<_>>())
        .filter(|m| !m.is_empty())
        .collect();
    // One row per required item; weight 1/repeat so the optimum maximizes
    // the sum of per-atom shares. Shares are recounted from the assignment
    // so a perfect layout scores exactly 1.
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut owner: Vec<usize> = Vec::new();
    for (a, atom) in atoms.iter().enumerate() {
        let ok: Vec<bool> = items.iter().map(|it| item_matches(&atom.members, it, doc, preds)).collect();
        let w = 1.0 / atom.repeat as f64;
        for _ in 0..atom.repeat {
            rows.push(ok.iter().map(|&m| if m { w } else { 0.0 }).collect());
            owner.push(a);
        }
    }
    let mut hits = vec![0u32; atoms.len()];
    if !items.is_empty() {
        let (assignment, _) = max_weight_assignment(&rows);
        for (r, c) in assignment.into_iter().enumerate() {
            if c.is_some_and(|c| rows[r][c] > 0.0) {
                hits[owner[r]] += 1;
            }
        }
    }
    let total: f64 = atoms.iter().zip(&hits).map(|(a, &h)| f64::from(h) / f64::from(a.repeat)).sum();
    Ok((total / atoms.len() as f64).clamp(0.0, 1.0))
}

fn has_pos_size(ir: &IrRoot) -> bool {
    flatten_constraints(ir).atoms().iter().any(|a| match a {
        ConstraintAtom::Pos(..) | ConstraintAtom::Size(..) => true,
        ConstraintAtom::Hierarchy(h) => h.members.iter().any(|m| m.position.is_some() || m.size.is_some()),
        ConstraintAtom::Type(_) => false,
    })
}

fn has_hierarchy(ir: &IrRoot) -> bool {
    ir.children.iter().any(|c| matches!(c, IrNode::Group(_)))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalCounts {
    pub pairs: usize,
    pub pos_size_pairs: usize,
    pub hier_pairs: usize,
    pub references: usize,
    pub train: usize,
}

/// Aggregate scores. `miou` and `um` are present only when references or a
/// training set were supplied. There is no FID field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub align: f64,
    pub overlap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub miou: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub um: Option<f64>,
    pub type_cons: f64,
    pub pos_size_cons: f64,
    pub hier_cons: f64,
    pub n: EvalCounts,
}

struct PairScores {
    align: f64,
    overlap: f64,
    type_cons: f64,
    pos_size: Option<f64>,
    hier: Option<f64>,
}

fn score_pair(ir: &IrRoot, doc: &LayoutDoc) -> Result<PairScores, MetricsError> {
    Ok(PairScores {
        align: alignment(doc)?,
        overlap: overlap(doc)?,
        type_cons: type_consistency(ir, doc),
        pos_size: has_pos_size(ir).then(|| pos_size_consistency(ir, doc)),
        hier: if has_hierarchy(ir) { Some(hierarchy_consistency(ir, doc)?) } else { None },
    })
}

fn mean(v: impl Iterator<Item = f64>) -> (f64, usize) {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (if n == 0 { 1.0 } else { s / n as f64 }, n)
}

/// Evaluates generated `(ir, layout)` pairs. `references[i]` is the real
/// layout for pair `i`; `train` is the retrieval pool for unique match.
pub fn evaluate(
    pairs: &[(IrRoot, LayoutDoc)],
    references: Option<&[LayoutDoc]>,
    train: Option<&[LayoutDoc]>,
) -> Result<EvalReport, MetricsError> {
    if pairs.is_empty() {
        return Err(MetricsError::EmptySet);
    }
    let scores: Vec<PairScores> = pairs.par_iter().map(|(ir, doc)| score_pair(ir, doc)).collect::<Result<_, _>>()?;
    let miou = match references {
        Some(refs) => {
            if refs.len() != pairs.len() {
                return Err(MetricsError::LengthMismatch { generated: pairs.len(), references: refs.len() });
            }
            let v: Vec<f64> = pairs.par_iter().zip(refs).map(|((_, g), r)| max_iou(g, r)).collect::<Result<_, _>>()?;
            Some(mean(v.into_iter()).0)
        }
        None => None,
    };
    let um = match train {
        Some(t) => {
            let gens: Vec<LayoutDoc> = pairs.iter().map(|(_, d)| d.clone()).collect();
            Some(unique_match(&gens, t)?)
        }
        None => None,
    };
    let (align, _) = mean(scores.iter().map(|s| s.align));
    let (overlap, _) = mean(scores.iter().map(|s| s.overlap));
    let (type_cons, _) = mean(scores.iter().map(|s| s.type_cons));
    let (pos_size_cons, ps_n) = mean(scores.iter().filter_map(|s| s.pos_size));
    let (hier_cons, h_n) = mean(scores.iter().filter_map(|s| s.hier));
    Ok(EvalReport {
        align,
        overlap,
        miou,
        um,
        type_cons,
        pos_size_cons,
        hier_cons,
        n: EvalCounts {
            pairs: pairs.len(),
            pos_size_pairs: ps_n,
            hier_pairs: h_n,
            references: references.map_or(0, <[LayoutDoc]>::len),
            train: train.map_or(0, <[LayoutDoc]>::len),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Canvas, ElementTreeNode, EXPLICIT_GROUP_TAG, EXPLICIT_ITEM_TAG};
    use crate::ir::{parse_ir, Domain, TypeVocabulary};

    fn ty(n: &str) -> crate::ir::ElementType {
        TypeVocabulary::webui().get(n).unwrap().clone()
    }

    fn doc(els: &[(&str, BBox)]) -> LayoutDoc {
        let children = els.iter().map(|(t, b)| ElementTreeNode::typed("x", ty(t), *b)).collect();
        LayoutDoc {
            id: "d".into(),
            domain: Domain::WebUi,
            canvas: Canvas::new(1.0, 1.0),
            root: ElementTreeNode::new("root", BBox::new(0.0, 0.0, 1.0, 1.0)).with_children(children),
        }
    }

    fn ir(s: &str) -> IrRoot {
        parse_ir(s, TypeVocabulary::webui()).unwrap()
    }

    #[test]
    fn alignment_cases() {
        let shared = doc(&[("text", BBox::new(0.1, 0.1, 0.2, 0.1)), ("text", BBox::new(0.1, 0.5, 0.4, 0.1))]);
        assert_eq!(alignment(&shared).unwrap(), 0.0);
        let near = doc(&[("text", BBox::new(0.10, 0.0, 0.2, 0.1)), ("text", BBox::new(0.12, 0.5, 0.5, 0.3))]);
        assert!((alignment(&near).unwrap() - 0.02).abs() < 1e-12);
        assert_eq!(alignment(&doc(&[("text", BBox::new(0.3, 0.3, 0.1, 0.1))])).unwrap(), 0.0);
        assert_eq!(alignment(&doc(&[])), Err(MetricsError::EmptyLayout));
    }

    #[test]
    fn overlap_cases() {
        let disjoint = doc(&[("text", BBox::new(0.0, 0.0, 0.2, 0.2)), ("text", BBox::new(0.5, 0.5, 0.2, 0.2))]);
        assert_eq!(overlap(&disjoint).unwrap(), 0.0);
        let same = doc(&[("text", BBox::new(0.0, 0.0, 0.5, 0.5)), ("text", BBox::new(0.0, 0.0, 0.5, 0.5))]);
        assert!((overlap(&same).unwrap() - 0.5).abs() < 1e-12);
        let nested = doc(&[("text", BBox::new(0.0, 0.0, 0.5, 0.5)), ("text", BBox::new(0.0, 0.0, 0.25, 0.5))]);
        assert!((overlap(&nested).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let bg = doc(&[("background image", BBox::new(0.0, 0.0, 1.0, 1.0)), ("text", BBox::new(0.0, 0.0, 0.5, 0.5))]);
        assert_eq!(overlap(&bg).unwrap(), 0.0);
    }

    #[test]
    fn iou_and_um_boundaries() {
        let a = doc(&[("text", BBox::new(0.0, 0.0, 0.5, 0.5)), ("image", BBox::new(0.5, 0.5, 0.2, 0.2))]);
        let b = doc(&[("link", BBox::new(0.0, 0.0, 0.5, 0.5))]);
        assert!((max_iou(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(max_iou(&a, &b).unwrap(), 0.0);
        let gens = vec![a.clone(), a.clone(), a.clone()];
        assert!((unique_match(&gens, &[a.clone(), b.clone()]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(unique_match(&[a.clone(), b.clone()], &[a.clone(), b.clone()]).unwrap(), 1.0);
        assert_eq!(unique_match(&[], &[a]), Err(MetricsError::EmptySet));
    }

    #[test]
    fn type_consistency_counts() {
        let d = doc(&[("link", BBox::new(0.0, 0.0, 0.1, 0.1)); 3]);
        assert!((type_consistency(&ir(r#"[e:link [prop:repeat "5"]]"#), &d) - 0.6).abs() < 1e-12);
        assert_eq!(type_consistency(&ir(r#"[e:link [prop:repeat "2"]]"#), &d), 1.0);
    }

    #[test]
    fn pos_size_thresholds() {
        let top = doc(&[("title", BBox::new(0.1, 0.05, 0.8, 0.1))]);
        let bottom = doc(&[("title", BBox::new(0.1, 0.85, 0.8, 0.1))]);
        let want = ir(r#"[e:title [prop:position "top"]]"#);
        assert_eq!(pos_size_consistency(&want, &top), 1.0);
        assert_eq!(pos_size_consistency(&want, &bottom), 0.0);
        assert_eq!(pos_size_consistency(&ir("[e:title]"), &bottom), 1.0);
    }

    #[test]
    fn matching_assigns_each_element_once() {
        // Two top titles requested, one present at the top and one mid-page.
        let d = doc(&[("title", BBox::new(0.1, 0.05, 0.8, 0.1)), ("title", BBox::new(0.1, 0.45, 0.8, 0.1))]);
        let want = ir(r#"[e:title [prop:position "top"] [prop:repeat "2"]]"#);
        assert_eq!(pos_size_consistency(&want, &d), 0.5);
    }

    fn grouped(n_items: usize) -> LayoutDoc {
        let item = |i: usize| {
            let x = 0.1 + i as f64 * 0.2;
            ElementTreeNode::new(EXPLICIT_ITEM_TAG, BBox::new(x, 0.8, 0.15, 0.15)).with_children(vec![
                ElementTreeNode::typed("e", ty("image"), BBox::new(x, 0.8, 0.15, 0.1)),
                ElementTreeNode::typed("e", ty("link"), BBox::new(x, 0.9, 0.15, 0.05)),
            ])
        };
        let mut d = doc(&[("title", BBox::new(0.0, 0.0, 1.0, 0.1))]);
        d.root.children.push(
            ElementTreeNode::new(EXPLICIT_GROUP_TAG, BBox::new(0.0, 0.8, 1.0, 0.2))
                .with_children((0..n_items).map(item).collect()),
        );
        d
    }

    #[test]
    fn hierarchy_counts() {
        let want = ir(
            r#"[group [prop:repeat "3"] [item [e:image [prop:position "bottom"]] [e:link [prop:position "bottom"]]]]"#,
        );
        assert_eq!(hierarchy_consistency(&want, &grouped(3)).unwrap(), 1.0);
        assert!((hierarchy_consistency(&want, &grouped(2)).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        let flat = doc(&[("image", BBox::new(0.1, 0.8, 0.1, 0.1))]);
        assert_eq!(hierarchy_consistency(&want, &flat), Err(MetricsError::MissingGroupStructure));
        let top = ir(r#"[group [prop:repeat "1"] [item [e:image [prop:position "top"]] [e:link]]]"#);
        assert_eq!(hierarchy_consistency(&top, &grouped(3)).unwrap(), 0.0);
        assert_eq!(hierarchy_consistency(&ir("[e:title]"), &flat).unwrap(), 1.0);
    }

    #[test]
    fn completed_elements_are_ignored() {
        let mut d = doc(&[("link", BBox::new(0.0, 0.0, 0.1, 0.1)), ("link", BBox::new(0.5, 0.5, 0.1, 0.1))]);
        d.root.children[1].mark_completed();
        assert_eq!(type_consistency(&ir(r#"[e:link [prop:repeat "2"]]"#), &d), 0.5);
        assert_eq!(type_consistency(&ir("[e:link]"), &d), 1.0);
    }

    #[test]
    fn evaluate_self_pairs() {
        let d = grouped(3);
        let want = ir(r#"[ [e:title [prop:position "top"]] [group [prop:repeat "3"] [item [e:image] [e:link]]] ]"#);
        let r = evaluate(&[(want.clone(), d.clone())], Some(&[d.clone()]), Some(&[d.clone()])).unwrap();
        assert_eq!(r.miou, Some(1.0));
        assert_eq!(r.um, Some(1.0));
        assert_eq!((r.type_cons, r.pos_size_cons, r.hier_cons), (1.0, 1.0, 1.0));
        assert_eq!(r.n.hier_pairs, 1);
        let back: EvalReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
