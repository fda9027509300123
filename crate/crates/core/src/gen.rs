//! Procedural layout documents for tests, benchmarks, and demos.
//!
//! Pages are assembled from common blocks (header with navigation, hero,
//! card lists, forms, footers for web pages; toolbars, feeds, and bottom
//! navigation for mobile screens). WebUI nodes carry HTML-like tags so type
//! inference is exercised; RICO nodes use component names.

use rand::Rng;

use crate::corpus::{BBox, Canvas, ElementTreeNode, LayoutDoc};
use crate::ir::Domain;
use crate::synth::stream_rng;

fn node(tag: &str, l: f64, t: f64, w: f64, h: f64) -> ElementTreeNode {
    ElementTreeNode::new(tag, BBox::new(l, t, w, h))
}

fn jitter<R: Rng + ?Sized>(rng: &mut R, v: f64, frac: f64) -> f64 {
    v * (1.0 + rng.random_range(-frac..=frac))
}

/// Horizontal list of `n` items, each built by `item` inside its slot.
fn list_row<R, F>(
    rng: &mut R,
    tag: &str,
    item_tag: &str,
    l: f64,
    t: f64,
    w: f64,
    h: f64,
    n: usize,
    mut item: F,
) -> ElementTreeNode
where
    R: Rng + ?Sized,
    F: FnMut(&mut R, f64, f64, f64, f64) -> Vec<ElementTreeNode>,
{
    let gap = 12.0;
    let slot = (w - gap * (n as f64 - 1.0)) / n as f64;
    let children = (0..n)
        .map(|i| {
            let x = l + i as f64 * (slot + gap);
            node(item_tag, x, t, slot, h).with_children(item(rng, x, t, slot, h))
        })
        .collect();
    node(tag, l, t, w, h).with_children(children)
}

fn webui_doc<R: Rng + ?Sized>(rng: &mut R, id: String) -> LayoutDoc {
    let w = 1200.0;
    let h = [1200.0, 1600.0, 2000.0][rng.random_range(0..3)];
    let mut body = Vec::new();
    let mut y = 0.0;

    if rng.random_bool(0.3) {
        body.push(node("div", 0.0, 0.0, w, h).with_attr("style", "background-image: url(bg.png)"));
    }
    // Header: logo, optional title, navigation links.
    let head_h = jitter(rng, 80.0, 0.2).round();
    body.push(node("img", 24.0, 16.0, jitter(rng, 140.0, 0.3).round(), head_h - 32.0).with_attr("class", "logo"));
    if rng.random_bool(0.5) {
        body.push(node("h1", 200.0, 20.0, 320.0, head_h - 40.0));
    }
    let nav_n = rng.random_range(2..=6);
    let nav_w = 90.0 * nav_n as f64;
    body.push(list_row(rng, "ul", "li", w - nav_w - 24.0, 24.0, nav_w, head_h - 48.0, nav_n, |_, x, t, sw, sh| {
        vec![node("a", x + 4.0, t, sw - 8.0, sh)]
    }));
    y += head_h + 24.0;

    // Hero.
    if rng.random_bool(0.6) {
        let hero_h = jitter(rng, 0.3 * h, 0.2).round().min(0.4 * h);
        if rng.random_bool(0.5) {
            body.push(node("img", 0.0, y, w, hero_h));
            y += hero_h + 24.0;
        } else {
            body.push(node("h2", 120.0, y, 960.0, 60.0));
            body.push(node("p", 120.0, y + 80.0, 960.0, jitter(rng, 80.0, 0.4).round()));
            body.push(node("button", 520.0, y + 180.0, 160.0, 48.0));
            y += 260.0;
        }
    }

    // Cards.
    if rng.random_bool(0.8) {
        let n = rng.random_range(2..=4);
        let card_h = jitter(rng, 260.0, 0.2).round();
        let with_title = rng.random_bool(0.5);
        body.push(list_row(rng, "ul", "li", 60.0, y, w - 120.0, card_h, n, |rng, x, t, sw, sh| {
            let img_h = (sh * 0.55).round();
            let mut c = vec![node("img", x, t, sw, img_h)];
            let mut cy = t + img_h + 8.0;
            if with_title {
                c.push(node("h3", x, cy, sw, 28.0));
                cy += 36.0;
            }
            c.push(node("p", x, cy, sw, (sh - (cy - t) - 40.0).max(12.0)));
            if rng.random_bool(0.9) {
                c.push(node("a", x, t + sh - 28.0, sw * 0.5, 24.0));
            }
            c
        }));
        y += card_h + 32.0;
    }

    // Form.
    if rng.random_bool(0.4) && y + 160.0 < h - 200.0 {
        body.push(node("span", 300.0, y, 200.0, 24.0));
        body.push(node("input", 300.0, y + 32.0, 480.0, 40.0));
        body.push(node("button", 800.0, y + 32.0, 120.0, 40.0).with_attr("type", "submit"));
        y += 100.0;
    }

    // Side icons in the middle band.
    if rng.random_bool(0.3) {
        let my = (0.4 * h).max(y);
        if my + 40.0 < 0.7 * h {
            body.push(node("i", 16.0, my, 32.0, 32.0));
            body.push(node("i", w - 48.0, my, 32.0, 32.0));
        }
    }

    // Footer.
    let foot_h = 60.0;
    let fy = h - foot_h - 16.0;
    if rng.random_bool(0.5) {
        let n = rng.random_range(2..=5);
        body.push(list_row(rng, "ul", "li", 200.0, fy, 800.0, foot_h, n, |_, x, t, sw, sh| {
            vec![node("a", x, t + 16.0, sw, sh - 32.0)]
        }));
    } else {
        body.push(node("small", 400.0, fy + 16.0, 400.0, 24.0));
    }

    LayoutDoc {
        id,
        domain: Domain::WebUi,
        canvas: Canvas::new(w, h),
        root: node("body", 0.0, 0.0, w, h).with_children(body),
    }
}

fn rico_doc<R: Rng + ?Sized>(rng: &mut R, id: String) -> LayoutDoc {
    let (w, h) = (1440.0, 2560.0);
    let mut screen = Vec::new();
    let bar_h = 168.0;
    screen.push(node("Toolbar", 0.0, 0.0, w, bar_h).with_children(vec![
        node("Icon", 24.0, 40.0, 88.0, 88.0),
        node("Text", 160.0, 48.0, jitter(rng, 520.0, 0.3).round(), 72.0),
    ]));
    let mut y = bar_h + 24.0;
    if rng.random_bool(0.2) {
        screen.push(node("Background_Image", 0.0, 0.0, w, h));
    }
    match rng.random_range(0..4) {
        0 => {
            // Onboarding pager.
            screen.push(node("Image", 120.0, y + 80.0, w - 240.0, jitter(rng, 1200.0, 0.1).round()));
            screen.push(node("Text", 160.0, y + 1400.0, w - 320.0, 160.0));
            screen.push(node("Pager_Indicator", 560.0, h - 260.0, 320.0, 60.0));
            y = h - 200.0;
        }
        1 | 2 => {
            // Feed.
            let n = rng.random_range(3..=6);
            let item_h = jitter(rng, 240.0, 0.15).round();
            let children = (0..n)
                .map(|i| {
                    let t = y + i as f64 * (item_h + 8.0);
                    node("List_Item", 0.0, t, w, item_h).with_children(vec![
                        node("Image", 32.0, t + 24.0, item_h - 48.0, item_h - 48.0),
                        node("Text", item_h + 8.0, t + 40.0, w - item_h - 60.0, 64.0),
                    ])
                })
                .collect();
            let list_h = n as f64 * (item_h + 8.0);
            screen.push(node("ListView", 0.0, y, w, list_h).with_children(children));
            y += list_h + 24.0;
        }
        _ => {
            // Form.
            let n = rng.random_range(2..=4);
            for i in 0..n {
                screen.push(node("Input", 96.0, y + i as f64 * 180.0, w - 192.0, 140.0));
            }
            y += n as f64 * 180.0;
            if rng.random_bool(0.5) {
                screen.push(node("Checkbox", 96.0, y, 72.0, 72.0));
                y += 100.0;
            }
            screen.push(node("Text_Button", 420.0, y + 40.0, 600.0, 140.0));
            y += 200.0;
        }
    }
    if rng.random_bool(0.5) && y < h - 400.0 {
        let n = rng.random_range(3..=5);
        let slot = w / n as f64;
        let children =
            (0..n).map(|i| node("Icon", i as f64 * slot + slot / 2.0 - 48.0, h - 180.0, 96.0, 96.0)).collect();
        screen.push(node("Bottom_Navigation", 0.0, h - 200.0, w, 200.0).with_children(children));
    } else if rng.random_bool(0.3) {
        screen.push(node("Advertisement", 0.0, h - 220.0, w, 200.0));
    }
    LayoutDoc {
        id,
        domain: Domain::Rico,
        canvas: Canvas::new(w, h),
        root: node("FrameLayout", 0.0, 0.0, w, h).with_children(screen),
    }
}

/// One document; the same `(domain, seed, index)` always gives the same page.
pub fn generate_doc(domain: Domain, seed: u64, index: usize) -> LayoutDoc {
    let id = format!("{}-{index:06}", domain.as_str());
    let mut rng = stream_rng(seed, &id, "gen");
    match domain {
        Domain::WebUi => webui_doc(&mut rng, id),
        Domain::Rico => rico_doc(&mut rng, id),
    }
}

/// Lazily generated corpus of `n` documents.
pub fn generate_corpus(domain: Domain, seed: u64, n: usize) -> impl Iterator<Item = LayoutDoc> {
    (0..n).map(move |i| generate_doc(domain, seed, i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{extract_groups, flatten_elements};

    #[test]
    fn deterministic_and_grouped() {
        for domain in [Domain::WebUi, Domain::Rico] {
            assert_eq!(generate_doc(domain, 3, 7), generate_doc(domain, 3, 7));
            let docs: Vec<_> = generate_corpus(domain, 1, 50).collect();
            assert!(docs.iter().all(|d| !flatten_elements(d).is_empty()));
            let grouped = docs.iter().filter(|d| !extract_groups(d).is_empty()).count();
            assert!(grouped > 10, "{domain:?} {grouped}");
            for d in &docs {
                for e in flatten_elements(d) {
                    assert!(e.bbox.right() <= d.canvas.w + 1e-9 && e.bbox.bottom() <= d.canvas.h + 1e-9, "{}", d.id);
                }
            }
        }
    }
}
