//! The layout intermediate representation (IR).
//!
//! An IR is a bracketed tree naming the elements a layout must contain along
//! with optional position, size and repeat properties, plus repeated groups of
//! elements:
//!
//! ```text
//! [ [e:title [prop:position "top"] ] [group [prop:repeat "3"] [item [e:image] [e:text] ] ] ]
//! ```
//!
//! [`parse_ir`] accepts the lenient surface syntax (optional quotes, arbitrary
//! whitespace, a bare single element or group without the outer brackets) and
//! [`print_ir`] emits the canonical form.

mod constraints;
mod parser;
mod vocab;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use constraints::{
    flatten_constraints, ir_accuracy, ir_equal, ConstraintAtom, ConstraintSet, HierarchyAtom, MemberSig,
};
pub use parser::parse_ir;
pub use vocab::{Domain, ElementType, TypeVocabulary};

/// Largest accepted repeat count. Real layouts top out well below this.
pub const MAX_REPEAT: u32 = 100;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IrError {
    #[error("syntax error at byte {position}: expected {}, found {found}", .expected.join(" or "))]
    Syntax { position: usize, expected: Vec<&'static str>, found: String },
    #[error("unknown element type `{name}` at byte {position}")]
    UnknownType { name: String, position: usize },
    #[error("duplicate {kind} property at byte {position}")]
    DuplicateProp { kind: PropKind, position: usize },
    #[error("groups cannot be nested (byte {position})")]
    NestedGroup { position: usize },
    #[error("repeat is not allowed on a group item element (byte {position})")]
    RepeatInItem { position: usize },
    #[error("repeat value {value} outside 1..={MAX_REPEAT}")]
    RepeatOutOfRange { value: u64 },
    #[error("an IR needs at least one element or group")]
    EmptyRoot,
    #[error("a group needs at least one item element")]
    EmptyGroup,
    #[error("length mismatch: {pred} predictions vs {gold} gold IRs")]
    LengthMismatch { pred: usize, gold: usize },
}

impl IrError {
    /// Stable machine-readable name of the error variant.
    pub fn code(&self) -> &'static str {
        match self {
            IrError::Syntax { .. } => "SyntaxError",
            IrError::UnknownType { .. } => "UnknownType",
            IrError::DuplicateProp { .. } => "DuplicateProp",
            IrError::NestedGroup { .. } => "NestedGroup",
            IrError::RepeatInItem { .. } => "RepeatInItem",
            IrError::RepeatOutOfRange { .. } => "RepeatOutOfRange",
            IrError::EmptyRoot => "EmptyRoot",
            IrError::EmptyGroup => "EmptyGroup",
            IrError::LengthMismatch { .. } => "LengthMismatch",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Top,
    Bottom,
    Left,
    Right,
}

impl Position {
    pub const ALL: [Position; 4] = [Position::Top, Position::Bottom, Position::Left, Position::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Position::Top => "top",
            Position::Bottom => "bottom",
            Position::Left => "left",
            Position::Right => "right",
        }
    }
}

impl FromStr for Position {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "top" => Ok(Position::Top),
            "bottom" => Ok(Position::Bottom),
            "left" => Ok(Position::Left),
            "right" => Ok(Position::Right),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SizeClass {
    Small,
    Large,
}

impl SizeClass {
    pub const ALL: [SizeClass; 2] = [SizeClass::Small, SizeClass::Large];

    pub fn as_str(self) -> &'static str {
        match self {
            SizeClass::Small => "small",
            SizeClass::Large => "large",
        }
    }
}

impl FromStr for SizeClass {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "small" => Ok(SizeClass::Small),
            "large" => Ok(SizeClass::Large),
            _ => Err(()),
        }
    }
}

impl fmt::Display for SizeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropKind {
    Position,
    Size,
    Repeat,
}

impl PropKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PropKind::Position => "position",
            PropKind::Size => "size",
            PropKind::Repeat => "repeat",
        }
    }
}

impl fmt::Display for PropKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single property attached to an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prop {
    Position(Position),
    Size(SizeClass),
    Repeat(u32),
}

impl Prop {
    pub fn kind(&self) -> PropKind {
        match self {
            Prop::Position(_) => PropKind::Position,
            Prop::Size(_) => PropKind::Size,
            Prop::Repeat(_) => PropKind::Repeat,
        }
    }
}

/// `[e:Type Prop*]`. Each property kind appears at most once, which the
/// option fields enforce structurally.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ElementNode {
    pub etype: ElementType,
    pub position: Option<Position>,
    pub size: Option<SizeClass>,
    /// Element-level repeat: the element occurs this many times.
    pub repeat: Option<u32>,
}

impl ElementNode {
    pub fn new(etype: ElementType) -> Self {
        ElementNode { etype, position: None, size: None, repeat: None }
    }

    pub fn with_position(mut self, position: Position) -> Self {
        self.position = Some(position);
        self
    }

    pub fn with_size(mut self, size: SizeClass) -> Self {
        self.size = Some(size);
        self
    }

    pub fn with_repeat(mut self, repeat: u32) -> Self {
        self.repeat = Some(repeat);
        self
    }

    /// Properties in canonical order (position, size, repeat).
    pub fn props(&self) -> Vec<Prop> {
        let mut props = Vec::with_capacity(3);
        if let Some(p) = self.position {
            props.push(Prop::Position(p));
        }
        if let Some(s) = self.size {
            props.push(Prop::Size(s));
        }
        if let Some(n) = self.repeat {
            props.push(Prop::Repeat(n));
        }
        props
    }

    /// Number of elements this node stands for.
    pub fn multiplicity(&self) -> u32 {
        self.repeat.unwrap_or(1)
    }
}

/// `[group [prop:repeat N] [item Element+ ] ]`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupNode {
    pub repeat: u32,
    pub items: Vec<ElementNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IrNode {
    Element(ElementNode),
    Group(GroupNode),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IrRoot {
    pub children: Vec<IrNode>,
}

impl IrRoot {
    /// Builds a root, checking every structural invariant.
    pub fn new(children: Vec<IrNode>) -> Result<Self, IrError> {
        let root = IrRoot { children };
        root.validate()?;
        Ok(root)
    }

    pub fn validate(&self) -> Result<(), IrError> {
        if self.children.is_empty() {
            return Err(IrError::EmptyRoot);
        }
        for child in &self.children {
            match child {
                IrNode::Element(e) => check_repeat(e.repeat)?,
                IrNode::Group(g) => {
                    check_repeat(Some(g.repeat))?;
                    if g.items.is_empty() {
                        return Err(IrError::EmptyGroup);
                    }
                    if g.items.iter().any(|e| e.repeat.is_some()) {
                        return Err(IrError::RepeatInItem { position: 0 });
                    }
                }
            }
        }
        Ok(())
    }

    /// Total number of elements after expanding every repeat.
    pub fn expanded_element_count(&self) -> usize {
        self.children
            .iter()
            .map(|c| match c {
                IrNode::Element(e) => e.multiplicity() as usize,
                IrNode::Group(g) => g.repeat as usize * g.items.len(),
            })
            .sum()
    }
}

fn check_repeat(repeat: Option<u32>) -> Result<(), IrError> {
    match repeat {
        Some(n) if n == 0 || n > MAX_REPEAT => Err(IrError::RepeatOutOfRange { value: n as u64 }),
        _ => Ok(()),
    }
}

/// Canonical text form: quoted values, single spaces, balanced brackets.
pub fn print_ir(ir: &IrRoot) -> String {
    ir.to_string()
}

fn write_element(f: &mut fmt::Formatter<'_>, e: &ElementNode) -> fmt::Result {
    write!(f, "[e:{}", e.etype)?;
    let props = e.props();
    for prop in &props {
        match prop {
            Prop::Position(p) => write!(f, " [prop:position \"{p}\"]")?,
            Prop::Size(s) => write!(f, " [prop:size \"{s}\"]")?,
            Prop::Repeat(n) => write!(f, " [prop:repeat \"{n}\"]")?,
        }
    }
    if props.is_empty() {
        f.write_str("]")
    } else {
        f.write_str(" ]")
    }
}

impl fmt::Display for IrNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrNode::Element(e) => write_element(f, e),
            IrNode::Group(g) => {
                write!(f, "[group [prop:repeat \"{}\"] [item", g.repeat)?;
                for item in &g.items {
                    f.write_str(" ")?;
                    write_element(f, item)?;
                }
                f.write_str(" ] ]")
            }
        }
    }
}

impl fmt::Display for IrRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for child in &self.children {
            write!(f, " {child}")?;
        }
        f.write_str(" ]")
    }
}
