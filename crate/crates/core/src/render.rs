//! SVG wireframes of layout documents.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::corpus::{extract_structure, ContainerSet, LayoutDoc};
use crate::ir::Domain;

/// Categorical palette; vocabulary types take colors by index.
pub const PALETTE: [&str; 16] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#393b79", "#637939", "#8c6d31", "#843c39", "#7b4173", "#3182bd",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    pub fills: BTreeMap<String, String>,
    pub stroke: String,
    pub font_size: f64,
    /// Output pixels per canvas unit.
    pub scale: f64,
}

impl RenderStyle {
    pub fn for_domain(domain: Domain) -> Self {
        let fills = domain
            .vocabulary()
            .types()
            .iter()
            .enumerate()
            .map(|(i, t)| (t.as_str().to_string(), PALETTE[i % PALETTE.len()].to_string()))
            .collect();
        RenderStyle { fills, stroke: "#222222".into(), font_size: 12.0, scale: 0.5 }
    }

    /// Fill for a type; names outside the table hash to a stable palette slot.
    pub fn fill(&self, etype: &str) -> &str {
        match self.fills.get(etype) {
            Some(c) => c,
            None => PALETTE[(fnv1a(etype) % PALETTE.len() as u64) as usize],
        }
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn num(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == r.trunc() {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

/// One `rect` and label per typed element; groups get a dashed outline.
pub fn render_svg(doc: &LayoutDoc, style: &RenderStyle) -> String {
    let s = style.scale;
    let (w, h) = (doc.canvas.w * s, doc.canvas.h * s);
    let (ex, groups) = extract_structure(doc, &ContainerSet::for_domain(doc.domain));
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        num(w),
        num(h),
        num(w),
        num(h)
    );
    let _ = writeln!(out, "<title>{}</title>", escape(&doc.id));
    let _ = writeln!(
        out,
        "<rect class=\"canvas\" x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\" stroke=\"{}\"/>",
        num(w),
        num(h),
        style.stroke
    );
    for g in &groups {
        let b = g.container;
        let _ = writeln!(
            out,
            "<rect class=\"group\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\" stroke-dasharray=\"8 4\"/>",
            num(b.l * s),
            num(b.t * s),
            num(b.w * s),
            num(b.h * s),
            style.stroke
        );
    }
    for e in &ex.elements {
        let b = e.bbox;
        let dash = if e.completed { " stroke-dasharray=\"4 2\"" } else { "" };
        let _ = writeln!(
            out,
            "<rect class=\"element\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" fill-opacity=\"0.35\" stroke=\"{}\"{}/>",
            num(b.l * s),
            num(b.t * s),
            num(b.w * s),
            num(b.h * s),
            style.fill(e.etype.as_str()),
            style.stroke,
            dash
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"{}\">{}</text>",
            num(b.l * s + 2.0),
            num(b.t * s + style.font_size),
            num(style.font_size),
            escape(e.etype.as_str())
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{BBox, Canvas, ElementTreeNode};
    use crate::ir::TypeVocabulary;

    fn doc(children: Vec<ElementTreeNode>) -> LayoutDoc {
        LayoutDoc {
            id: "d<1>".into(),
            domain: Domain::WebUi,
            canvas: Canvas::new(1200.0, 800.0),
            root: ElementTreeNode::new("body", BBox::new(0.0, 0.0, 1200.0, 800.0)).with_children(children),
        }
    }

    fn el(t: &str, y: f64) -> ElementTreeNode {
        ElementTreeNode::typed("div", TypeVocabulary::webui().get(t).unwrap().clone(), BBox::new(10.0, y, 200.0, 40.0))
    }

    #[test]
    fn canvas_only_when_empty() {
        let svg = render_svg(&doc(vec![]), &RenderStyle::for_domain(Domain::WebUi));
        assert_eq!(svg.matches("class=\"element\"").count(), 0);
        assert!(svg.contains("class=\"canvas\""));
        assert!(svg.contains("d&lt;1&gt;"));
    }

    #[test]
    fn rect_per_element_and_deterministic() {
        let mut b = el("button", 100.0);
        b.mark_completed();
        let list = ElementTreeNode::new("ul", BBox::new(0.0, 200.0, 600.0, 200.0))
            .with_children(vec![el("link", 210.0), el("link", 260.0)]);
        let d = doc(vec![el("title", 0.0), b, list]);
        let style = RenderStyle::for_domain(Domain::WebUi);
        let svg = render_svg(&d, &style);
        assert_eq!(svg.matches("class=\"element\"").count(), 4);
        assert_eq!(svg.matches("class=\"group\"").count(), 1);
        assert_eq!(svg.matches("stroke-dasharray=\"4 2\"").count(), 1);
        assert!(svg.contains("width=\"600\" height=\"400\""));
        assert_eq!(svg, render_svg(&d.clone(), &style));
    }

    #[test]
    fn every_type_has_a_fill_and_unknowns_are_stable() {
        for domain in [Domain::WebUi, Domain::Rico] {
            let style = RenderStyle::for_domain(domain);
            for t in domain.vocabulary().types() {
                assert!(style.fills.contains_key(t.as_str()));
            }
        }
        let style = RenderStyle::for_domain(Domain::WebUi);
        assert_eq!(style.fill("hologram"), style.fill("hologram"));
        assert!(PALETTE.contains(&style.fill("hologram")));
    }
}
