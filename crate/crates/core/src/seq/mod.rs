//! Flat token sequences: constraint sequences (placer input) and layout
//! sequences (placer output), with their text codecs and the coordinate grid.
//!
//! Text form uses `|` between elements and `[` `]` around group blocks:
//!
//! ```text
//! button undefined undefined | [ image bottom undefined | link bottom undefined ]
//! button 54 33 10 10 | complete input 10 65 94 2 | [ image 14 71 15 9 | link 15 72 14 8 ]
//! ```

mod constraint;
mod layout;

use serde::{Deserialize, Serialize};

use crate::ir::{Domain, ElementType, TypeVocabulary};

pub use constraint::{
    compile_constraints, parse_constraint_tokens, render_constraint_tokens, ConstraintSeq, PointwiseTriple,
};
pub use layout::{
    canonicalize, decode_layout, encode_layout, parse_layout_tokens, render_layout_tokens, LayoutElementTok, LayoutSeq,
};

pub const SEPARATOR: &str = "|";
pub const GROUP_OPEN: &str = "[";
pub const GROUP_CLOSE: &str = "]";
/// Placeholder for an unconstrained position or size.
pub const UNDEFINED: &str = "undefined";
/// Attribute token marking an auto-completed element.
pub const COMPLETE: &str = "complete";
/// Explicit "not completed" attribute token. Accepted on input, never emitted.
pub const NULL: &str = "null";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SeqError {
    #[error("malformed triple `{segment}`: {reason}")]
    MalformedTriple { segment: String, reason: &'static str },
    #[error("unbalanced group bracket at token {token_index}")]
    UnbalancedGroupBracket { token_index: usize },
    #[error("unknown token `{token}`")]
    UnknownToken { token: String },
    #[error("value {value} outside [0, {extent}]")]
    OutOfRange { value: f64, extent: f64 },
    #[error("layout has no elements")]
    EmptyLayout,
    #[error("element `{segment}` has {found} tokens, expected 6 or 7")]
    TokenArity { segment: String, found: usize },
    #[error("bin {value} out of range for `{field}` on a {bins}-bin axis")]
    BinOutOfRange { field: &'static str, value: i64, bins: u32 },
    #[error("grid dimensions must be positive")]
    InvalidGrid,
}

impl SeqError {
    pub fn code(&self) -> &'static str {
        match self {
            SeqError::MalformedTriple { .. } => "MalformedTriple",
            SeqError::UnbalancedGroupBracket { .. } => "UnbalancedGroupBracket",
            SeqError::UnknownToken { .. } => "UnknownToken",
            SeqError::OutOfRange { .. } => "OutOfRange",
            SeqError::EmptyLayout => "EmptyLayout",
            SeqError::TokenArity { .. } => "TokenArity",
            SeqError::BinOutOfRange { .. } => "BinOutOfRange",
            SeqError::InvalidGrid => "InvalidGrid",
        }
    }
}

/// Discretization grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    pub w_bins: u32,
    pub h_bins: u32,
}

impl GridSpec {
    pub const WEBUI: GridSpec = GridSpec { w_bins: 120, h_bins: 120 };
    pub const RICO: GridSpec = GridSpec { w_bins: 144, h_bins: 256 };

    pub fn new(w_bins: u32, h_bins: u32) -> Result<Self, SeqError> {
        if w_bins == 0 || h_bins == 0 {
            return Err(SeqError::InvalidGrid);
        }
        Ok(GridSpec { w_bins, h_bins })
    }

    pub fn for_domain(domain: Domain) -> Self {
        match domain {
            Domain::WebUi => GridSpec::WEBUI,
            Domain::Rico => GridSpec::RICO,
        }
    }
}

fn check_range(v: f64, extent: f64, bins: u32) -> Result<f64, SeqError> {
    if !v.is_finite() || !extent.is_finite() || extent <= 0.0 || v < 0.0 || v > extent || bins == 0 {
        return Err(SeqError::OutOfRange { value: v, extent });
    }
    Ok(v * bins as f64 / extent)
}

/// Position bin: `floor(v / extent * bins)` clamped to `[0, bins - 1]`.
pub fn discretize(v: f64, extent: f64, bins: u32) -> Result<u32, SeqError> {
    let x = check_range(v, extent, bins)?;
    // The epsilon absorbs float error when re-encoding a decoded bin edge.
    Ok(((x + 1e-9).floor() as u32).min(bins - 1))
}

/// Size bin: `round(v / extent * bins)` clamped to `[1, bins]`.
pub fn discretize_size(v: f64, extent: f64, bins: u32) -> Result<u32, SeqError> {
    let x = check_range(v, extent, bins)?;
    Ok((x.round() as u32).clamp(1, bins))
}

/// Left edge of a bin, or the extent of a size bin count, in canvas units.
pub fn continuize(b: u32, extent: f64, bins: u32) -> f64 {
    b as f64 * extent / bins as f64
}

/// Splits sequence text into `|`, `[`, `]` and word tokens. Brackets and
/// separators need not be surrounded by spaces.
pub(crate) fn lex(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let mut start = 0;
        for (i, c) in word.char_indices() {
            if matches!(c, '|' | '[' | ']') {
                if i > start {
                    out.push(&word[start..i]);
                }
                out.push(&word[i..i + 1]);
                start = i + 1;
            }
        }
        if start < word.len() {
            out.push(&word[start..]);
        }
    }
    out
}

/// Ungrouped entries and bracketed blocks, in input order.
pub(crate) struct Structure<'a> {
    pub ungrouped: Vec<Vec<&'a str>>,
    pub blocks: Vec<Vec<Vec<&'a str>>>,
}

/// Splits lexed tokens into element segments. Every entry must be followed by
/// `|` or the end of input; blocks may not nest or be empty.
pub(crate) fn split_structure<'a>(tokens: &[&'a str]) -> Result<Structure<'a>, SeqError> {
    let mut s = Structure { ungrouped: Vec::new(), blocks: Vec::new() };
    let mut i = 0;
    let malformed = |reason| SeqError::MalformedTriple { segment: tokens.join(" "), reason };
    let segment = |i: &mut usize| -> Vec<&'a str> {
        let start = *i;
        while *i < tokens.len() && !matches!(tokens[*i], "|" | "[" | "]") {
            *i += 1;
        }
        tokens[start..*i].to_vec()
    };
    while i < tokens.len() {
        if tokens[i] == GROUP_OPEN {
            let open = i;
            i += 1;
            let mut block = Vec::new();
            loop {
                let seg = segment(&mut i);
                if seg.is_empty() {
                    return Err(match tokens.get(i) {
                        Some(&"]") if block.is_empty() => malformed("empty group block"),
                        Some(&"|") | Some(&"]") => malformed("empty element"),
                        _ => SeqError::UnbalancedGroupBracket { token_index: i.min(tokens.len()) },
                    });
                }
                block.push(seg);
                match tokens.get(i) {
                    Some(&"|") => i += 1,
                    Some(&"]") => {
                        i += 1;
                        break;
                    }
                    Some(_) => return Err(SeqError::UnbalancedGroupBracket { token_index: i }),
                    None => return Err(SeqError::UnbalancedGroupBracket { token_index: open }),
                }
            }
            s.blocks.push(block);
        } else if tokens[i] == GROUP_CLOSE {
            return Err(SeqError::UnbalancedGroupBracket { token_index: i });
        } else {
            let seg = segment(&mut i);
            if seg.is_empty() {
                return Err(malformed("empty element"));
            }
            s.ungrouped.push(seg);
        }
        match tokens.get(i) {
            None => break,
            Some(&"|") => {
                i += 1;
                if i == tokens.len() {
                    return Err(malformed("trailing separator"));
                }
            }
            Some(&"]") => return Err(SeqError::UnbalancedGroupBracket { token_index: i }),
            Some(_) => return Err(malformed("missing separator")),
        }
    }
    Ok(s)
}

/// Resolves a run of words to a vocabulary type.
pub(crate) fn lookup_type(words: &[&str], vocab: &TypeVocabulary) -> Result<ElementType, SeqError> {
    let name = words.join(" ");
    vocab.get(&name).cloned().ok_or(SeqError::UnknownToken { token: name })
}
