//! Layout intermediate representation toolkit.
//!
//! An element-level constraint language for UI layouts ([`ir`]), its
//! serialization into constraint and layout token sequences ([`seq`]),
//! a corpus layer for normalized layout documents ([`corpus`]), synthetic
//! constraint extraction from real layouts ([`synth`]), a baseline placer
//! ([`placer`]), evaluation metrics ([`metrics`]), and SVG wireframes
//! ([`render`]). [`api`] exposes the same operations over strings and JSON.

pub mod api;
pub mod corpus;
pub mod gen;
pub mod ir;
pub mod metrics;
pub mod placer;
pub mod render;
pub mod seq;
pub mod synth;

pub use corpus::{BBox, Canvas, CorpusError, CorpusStats, ElementTreeNode, LayoutDoc};
pub use ir::{parse_ir, print_ir, Domain, ElementType, IrError, IrRoot, Position, SizeClass, TypeVocabulary};
pub use metrics::{evaluate, EvalReport, MetricsError};
pub use placer::{place, place_samples, PlacerConfig, PlacerError};
pub use render::{render_svg, RenderStyle};
pub use seq::{
    compile_constraints, decode_layout, encode_layout, parse_constraint_tokens, parse_layout_tokens, ConstraintSeq,
    GridSpec, LayoutSeq, SeqError,
};
pub use synth::{synthesize_ir, SynthError, SynthParams};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Any error raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error(transparent)]
    Seq(#[from] SeqError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Placer(#[from] PlacerError),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Ir(e) => e.code(),
            Error::Seq(e) => e.code(),
            Error::Corpus(e) => e.code(),
            Error::Synth(e) => e.code(),
            Error::Metrics(e) => e.code(),
            Error::Placer(e) => e.code(),
        }
    }
}
