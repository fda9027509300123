use std::collections::BTreeMap;

use super::{ElementNode, ElementType, IrError, IrNode, IrRoot, Position, SizeClass};

/// One member slot of a hierarchy item: type plus optional position and size.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MemberSig {
    pub etype: ElementType,
    pub position: Option<Position>,
    pub size: Option<SizeClass>,
}

impl MemberSig {
    pub fn new(etype: ElementType, position: Option<Position>, size: Option<SizeClass>) -> Self {
        MemberSig { etype, position, size }
    }

    pub(crate) fn of(e: &ElementNode) -> Self {
        MemberSig { etype: e.etype.clone(), position: e.position, size: e.size }
    }
}

/// A repeated group: `repeat` items, each containing exactly `members`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HierarchyAtom {
    /// Sorted item signature.
    pub members: Vec<MemberSig>,
    pub repeat: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintAtom {
    Type(ElementType),
    Pos(ElementType, Position),
    Size(ElementType, SizeClass),
    Hierarchy(HierarchyAtom),
}

/// Order-insensitive multiset of constraint atoms, stored sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ConstraintSet {
    atoms: Vec<ConstraintAtom>,
}

impl ConstraintSet {
    pub fn from_atoms(mut atoms: Vec<ConstraintAtom>) -> Self {
        atoms.sort();
        ConstraintSet { atoms }
    }

    pub fn atoms(&self) -> &[ConstraintAtom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn type_atoms(&self) -> impl Iterator<Item = &ElementType> {
        self.atoms.iter().filter_map(|a| match a {
            ConstraintAtom::Type(t) => Some(t),
            _ => None,
        })
    }

    pub fn hierarchy_atoms(&self) -> impl Iterator<Item = &HierarchyAtom> {
        self.atoms.iter().filter_map(|a| match a {
            ConstraintAtom::Hierarchy(h) => Some(h),
            _ => None,
        })
    }
}

/// Flattens an IR into its constraint multiset.
///
/// An element with `repeat = N` contributes N copies of its atoms. A group
/// contributes a single hierarchy atom; groups sharing an item signature are
/// merged by summing their repeats, mirroring the element-level expansion.
pub fn flatten_constraints(ir: &IrRoot) -> ConstraintSet {
    let mut atoms = Vec::new();
    let mut groups: BTreeMap<Vec<MemberSig>, u32> = BTreeMap::new();
    for child in &ir.children {
        match child {
            IrNode::Element(e) => {
                for _ in 0..e.multiplicity() {
                    atoms.push(ConstraintAtom::Type(e.etype.clone()));
                    if let Some(p) = e.position {
                        atoms.push(ConstraintAtom::Pos(e.etype.clone(), p));
                    }
                    if let Some(s) = e.size {
                        atoms.push(ConstraintAtom::Size(e.etype.clone(), s));
                    }
                }
            }
            IrNode::Group(g) => {
                let mut members: Vec<MemberSig> = g.items.iter().map(MemberSig::of).collect();
                members.sort();
                *groups.entry(members).or_insert(0) += g.repeat;
            }
        }
    }
    atoms.extend(
        groups.into_iter().map(|(members, repeat)| ConstraintAtom::Hierarchy(HierarchyAtom { members, repeat })),
    );
    ConstraintSet::from_atoms(atoms)
}

/// Two IRs are equal when their constraint multisets are.
pub fn ir_equal(a: &IrRoot, b: &IrRoot) -> bool {
    flatten_constraints(a) == flatten_constraints(b)
}

/// Fraction of positions where the predicted IR equals the gold IR.
pub fn ir_accuracy(pred: &[IrRoot], gold: &[IrRoot]) -> Result<f64, IrError> {
    if pred.len() != gold.len() || pred.is_empty() {
        return Err(IrError::LengthMismatch { pred: pred.len(), gold: gold.len() });
    }
    let correct = pred.iter().zip(gold).filter(|(p, g)| ir_equal(p, g)).count();
    Ok(correct as f64 / pred.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{parse_ir, GroupNode, TypeVocabulary};

    fn ty(name: &str) -> ElementType {
        TypeVocabulary::webui().get(name).unwrap().clone()
    }

    fn parse(text: &str) -> IrRoot {
        parse_ir(text, TypeVocabulary::webui()).unwrap()
    }

    #[test]
    fn element_repeat_expands() {
        let set = flatten_constraints(&parse(r#"[e:description [prop:repeat "2"]]"#));
        assert_eq!(set.atoms(), &[ConstraintAtom::Type(ty("description")), ConstraintAtom::Type(ty("description"))]);
        let set = flatten_constraints(&parse("[e:title]"));
        assert_eq!(set.atoms(), &[ConstraintAtom::Type(ty("title"))]);
    }

    #[test]
    fn group_yields_one_hierarchy_atom() {
        let ir = parse(
            r#"[group [prop:repeat "5"] [item [e:image [prop:position "bottom"] ] [e:link [prop:position "bottom"] ] ] ]"#,
        );
        let set = flatten_constraints(&ir);
        assert_eq!(
            set.atoms(),
            &[ConstraintAtom::Hierarchy(HierarchyAtom {
                members: vec![
                    MemberSig::new(ty("image"), Some(Position::Bottom), None),
                    MemberSig::new(ty("link"), Some(Position::Bottom), None),
                ],
                repeat: 5,
            })]
        );
    }

    #[test]
    fn repeat_equals_explicit_copies() {
        let compact = parse(r#"[ [e:text [prop:size "small"] [prop:repeat "3"] ] [e:title] ]"#);
        let explicit = parse(
            r#"[ [e:text [prop:size "small"] ] [e:title] [e:text [prop:size "small"] ] [e:text [prop:size "small"] ] ]"#,
        );
        assert!(ir_equal(&compact, &explicit));
        // Brute-force expansion oracle: every element node copied `repeat` times.
        let expanded = IrRoot {
            children: compact
                .children
                .iter()
                .flat_map(|c| match c {
                    IrNode::Element(e) => {
                        let mut one = e.clone();
                        one.repeat = None;
                        vec![IrNode::Element(one); e.multiplicity() as usize]
                    }
                    g => vec![g.clone()],
                })
                .collect(),
        };
        assert_eq!(flatten_constraints(&expanded), flatten_constraints(&compact));
    }

    #[test]
    fn position_matters() {
        let a = parse(r#"[ [e:title [prop:position "top"] ] [e:link] ]"#);
        let b = parse(r#"[ [e:title [prop:position "bottom"] ] [e:link] ]"#);
        assert!(!ir_equal(&a, &b));
    }

    #[test]
    fn permutation_invariant() {
        let a = parse(
            r#"[ [e:title [prop:position "top"] ] [e:link] [group [prop:repeat "2"] [item [e:image] [e:text] ] ] ]"#,
        );
        let b = parse(
            r#"[ [group [prop:repeat "2"] [item [e:text] [e:image] ] ] [e:link] [e:title [prop:position "top"] ] ]"#,
        );
        assert!(ir_equal(&a, &b));
    }

    #[test]
    fn identical_groups_merge() {
        let one = IrRoot::new(vec![IrNode::Group(GroupNode { repeat: 2, items: vec![ElementNode::new(ty("image"))] })])
            .unwrap();
        let two =
            parse(r#"[ [group [prop:repeat "1"] [item [e:image] ] ] [group [prop:repeat "1"] [item [e:image] ] ] ]"#);
        assert!(ir_equal(&one, &two));
    }

    #[test]
    fn accuracy() {
        let a = parse("[e:title]");
        let b = parse("[e:link]");
        assert_eq!(ir_accuracy(&[a.clone(), b.clone()], &[a.clone(), b.clone()]).unwrap(), 1.0);
        assert_eq!(ir_accuracy(&[a.clone(), a.clone()], &[a.clone(), b.clone()]).unwrap(), 0.5);
        assert!(matches!(ir_accuracy(&[a.clone()], &[]), Err(IrError::LengthMismatch { .. })));
        assert!(matches!(ir_accuracy(&[], &[]), Err(IrError::LengthMismatch { .. })));
    }
}
