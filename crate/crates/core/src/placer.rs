//! Baseline constraint-driven placer.
//!
//! Turns a constraint sequence into layout sequences without a learned model.
//! Elements and group blocks become units; units are shelf-packed into rows
//! in a top band, a bottom band, and a middle region (side rows for
//! left/right units, free rows for unconstrained ones). Sizes come from the
//! corpus statistics. Every candidate layout is checked against the same
//! predicates the consistency metrics use; failures shrink flexible sizes and
//! retry. The places where a trained model would sample a token are exposed
//! as [`CandidateDist`]s drawn with top-k sampling.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{BBox, Canvas, CorpusStats};
use crate::ir::{Position, SizeClass};
use crate::seq::{canonicalize, ConstraintSeq, GridSpec, LayoutElementTok, LayoutSeq, PointwiseTriple};
use crate::synth::{stream_rng, Predicates};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlacerError {
    #[error("nothing to place: constraint sequence is empty")]
    EmptyConstraints,
    #[error("infeasible: {constraint}")]
    Infeasible { constraint: String },
    #[error("invalid placer configuration: {0}")]
    InvalidConfig(String),
    #[error("candidate distribution is empty or has non-finite scores")]
    BadDistribution,
}

impl PlacerError {
    pub fn code(&self) -> &'static str {
        match self {
            PlacerError::EmptyConstraints => "EmptyConstraints",
            PlacerError::Infeasible { .. } => "Infeasible",
            PlacerError::InvalidConfig(_) => "InvalidConfig",
            PlacerError::BadDistribution => "BadDistribution",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlacerConfig {
    pub grid: GridSpec,
    pub k: usize,
    pub n_samples: usize,
    /// Spacing between units, in bins.
    pub gutter: u32,
    pub completion_enabled: bool,
    pub completion_min_support: f64,
    pub seed: u64,
    pub predicates: Predicates,
    /// Shrink-and-retry rounds before giving up.
    pub max_attempts: usize,
}

impl Default for PlacerConfig {
    fn default() -> Self {
        PlacerConfig {
            grid: GridSpec::WEBUI,
            k: 5,
            n_samples: 4,
            gutter: 1,
            completion_enabled: true,
            completion_min_support: 0.8,
            seed: 0,
            predicates: Predicates::default(),
            max_attempts: 25,
        }
    }
}

impl PlacerConfig {
    pub fn validate(&self) -> Result<(), PlacerError> {
        let bad = |m: &str| Err(PlacerError::InvalidConfig(m.into()));
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.n_samples == 0 {
            return bad("n_samples must be at least 1");
        }
        if self.grid.w_bins < 4 || self.grid.h_bins < 4 {
            return bad("grid must be at least 4x4 bins");
        }
        if !(0.0..=1.0).contains(&self.completion_min_support) {
            return bad("completion_min_support must be in [0, 1]");
        }
        if self.max_attempts == 0 {
            return bad("max_attempts must be at least 1");
        }
        Ok(())
    }
}

/// Scored proposals for one placement decision.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateDist<T> {
    candidates: Vec<(T, f64)>,
}

impl<T> CandidateDist<T> {
    pub fn new(candidates: Vec<(T, f64)>) -> Result<Self, PlacerError> {
        if candidates.is_empty() || candidates.iter().any(|(_, s)| !s.is_finite()) {
            return Err(PlacerError::BadDistribution);
        }
        Ok(CandidateDist { candidates })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn candidates(&self) -> &[(T, f64)] {
        &self.candidates
    }

    /// `(index, probability)` for the `k` best candidates after a softmax
    /// over scores, renormalized. Ties keep the lower index first.
    pub fn top_k(&self, k: usize) -> Vec<(usize, f64)> {
        let mut order: Vec<usize> = (0..self.candidates.len()).collect();
        order.sort_by(|&a, &b| self.candidates[b].1.total_cmp(&self.candidates[a].1).then(a.cmp(&b)));
        order.truncate(k.max(1));
        let top = self.candidates[order[0]].1;
        let weights: Vec<f64> = order.iter().map(|&i| (self.candidates[i].1 - top).exp()).collect();
        let z: f64 = weights.iter().sum();
        order.into_iter().zip(weights).map(|(i, w)| (i, w / z)).collect()
    }
}

/// Draws from the renormalized top-`k` softmax. With `k = 1` this is the
/// argmax and consumes no randomness.
pub fn sample_topk<'a, T, R: Rng + ?Sized>(dist: &'a CandidateDist<T>, k: usize, rng: &mut R) -> &'a T {
    let probs = dist.top_k(k);
    if probs.len() == 1 {
        return &dist.candidates[probs[0].0].0;
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(i, p) in &probs {
        acc += p;
        if u < acc {
            return &dist.candidates[i].0;
        }
    }
    &dist.candidates[probs[probs.len() - 1].0].0
}

/// Types to add as completions: absent from `cs` and with co-occurrence
/// support at least `cfg.completion_min_support`.
pub fn complete_elements(cs: &ConstraintSeq, stats: &CorpusStats, cfg: &PlacerConfig) -> Vec<PointwiseTriple> {
    if !cfg.completion_enabled {
        return Vec::new();
    }
    let present: Vec<&str> = {
        let mut v: Vec<&str> = cs.types().map(|t| t.as_str()).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut out = Vec::new();
    for name in stats.types.keys() {
        if present.contains(&name.as_str()) {
            continue;
        }
        let Some(etype) = lookup_any(name) else { continue };
        if stats.support(name, &present) >= cfg.completion_min_support {
            out.push(PointwiseTriple::new(etype, None, None));
        }
    }
    out
}

fn lookup_any(name: &str) -> Option<crate::ir::ElementType> {
    crate::ir::TypeVocabulary::webui().get(name).or_else(|| crate::ir::TypeVocabulary::rico().get(name)).cloned()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Zone {
    Top,
    Bottom,
    Side,
    Any,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Justify {
    Start,
    Center,
    End,
}

#[derive(Debug, Clone)]
struct Member {
    triple: PointwiseTriple,
    completed: bool,
}

#[derive(Debug, Clone)]
struct Unit {
    members: Vec<Member>,
    /// Index into the output block list, or `None` for an ungrouped element.
    block: Option<usize>,
    zone: Zone,
    layered: bool,
}

fn zone_of(members: &[Member]) -> Zone {
    let has = |p: Position| members.iter().any(|m| m.triple.pos == Some(p));
    if has(Position::Top) {
        Zone::Top
    } else if has(Position::Bottom) {
        Zone::Bottom
    } else if has(Position::Left) || has(Position::Right) {
        Zone::Side
    } else {
        Zone::Any
    }
}

fn build_units(cs: &ConstraintSeq, completions: &[PointwiseTriple]) -> Vec<Unit> {
    let single = |t: &PointwiseTriple, completed: bool| {
        let members = vec![Member { triple: t.clone(), completed }];
        Unit { zone: zone_of(&members), layered: t.etype.is_background(), members, block: None }
    };
    let mut units: Vec<Unit> = cs.pointwise.iter().map(|t| single(t, false)).collect();
    units.extend(completions.iter().map(|t| single(t, true)));
    for (i, g) in cs.groups.iter().enumerate() {
        let members: Vec<Member> = g.iter().map(|t| Member { triple: t.clone(), completed: false }).collect();
        let zones: Vec<Zone> =
            members.iter().map(|m| zone_of(std::slice::from_ref(m))).filter(|z| *z != Zone::Any).collect();
        if zones.windows(2).all(|w| w[0] == w[1]) {
            units.push(Unit { zone: zone_of(&members), layered: false, members, block: Some(i) });
        } else {
            // Members pull toward different bands; place them one by one.
            for m in members {
                let zone = zone_of(std::slice::from_ref(&m));
                units.push(Unit { zone, layered: false, members: vec![m], block: Some(i) });
            }
        }
    }
    units
}

/// All sampled choices for one output layout.
#[derive(Debug, Clone)]
struct Decisions {
    sizes: BTreeMap<String, (u32, u32)>,
    justify: Vec<Justify>,
    order: usize,
    offset_frac: f64,
}

fn size_dist(etype: &str, stats: Option<&CorpusStats>, grid: GridSpec) -> CandidateDist<(u32, u32)> {
    let fallback = ((grid.w_bins / 4).max(1), (grid.h_bins / 16).max(1));
    let mut cands = Vec::new();
    if let Some(s) = stats {
        if let Some(ts) = s.type_stats(etype) {
            let (sx, sy) = (grid.w_bins as f64 / s.grid.w_bins as f64, grid.h_bins as f64 / s.grid.h_bins as f64);
            for ((w, h), n) in ts.size_hist.top(8) {
                let w = ((w as f64 * sx).round() as u32).clamp(1, grid.w_bins);
                let h = ((h as f64 * sy).round() as u32).clamp(1, grid.h_bins);
                cands.push(((w, h), (n as f64).ln()));
            }
        }
    }
    if cands.is_empty() {
        cands.push((fallback, 0.0));
    }
    CandidateDist { candidates: cands }
}

fn fixed_dist<T: Copy>(items: &[(T, f64)]) -> CandidateDist<T> {
    CandidateDist { candidates: items.to_vec() }
}

fn draw_decisions<R: Rng + ?Sized>(
    units: &[Unit],
    stats: Option<&CorpusStats>,
    cfg: &PlacerConfig,
    rng: &mut R,
) -> Decisions {
    let mut sizes = BTreeMap::new();
    for u in units {
        for m in &u.members {
            let name = m.triple.etype.as_str();
            if !sizes.contains_key(name) {
                let d = size_dist(name, stats, cfg.grid);
                sizes.insert(name.to_string(), *sample_topk(&d, cfg.k, rng));
            }
        }
    }
    let jd = fixed_dist(&[(Justify::Start, 1.0), (Justify::Center, 0.5), (Justify::End, 0.0)]);
    let justify = (0..units.len() * 2 + 2).map(|_| *sample_topk(&jd, cfg.k, rng)).collect();
    let order = *sample_topk(&fixed_dist(&[(0usize, 1.0), (1, 0.5), (2, 0.5)]), cfg.k, rng);
    let offset_frac = *sample_topk(&fixed_dist(&[(0.0, 1.0), (0.25, 0.5), (0.5, 0.25)]), cfg.k, rng);
    Decisions { sizes, justify, order, offset_frac }
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    l: i64,
    t: i64,
    w: i64,
    h: i64,
}

/// Member size for one attempt: stats size, shrunk by `scale`, then forced
/// into the requested size class. Large sizes are fixed shapes.
fn member_size(m: &Member, d: &Decisions, scale: f64, grid: GridSpec, preds: &Predicates) -> (i64, i64) {
    let (gw, gh) = (grid.w_bins as i64, grid.h_bins as i64);
    let area = (gw * gh) as f64;
    if m.triple.size == Some(SizeClass::Large) {
        let frac = preds.size_large_min + 0.01;
        return match m.triple.pos {
            Some(Position::Left) | Some(Position::Right) => {
                let w = ((gw as f64 * (preds.pos_margin * 2.0 - 0.02)).floor() as i64).max(1);
                (w, ((area * frac / w as f64).ceil() as i64).min(gh))
            }
            _ => (gw, ((gh as f64 * frac).ceil() as i64).min(gh)),
        };
    }
    let (bw, bh) = d.sizes[m.triple.etype.as_str()];
    let mut w = ((bw as f64 * scale).round() as i64).clamp(1, gw);
    let mut h = ((bh as f64 * scale).round() as i64).clamp(1, (gh as f64 * 0.3).ceil() as i64);
    if m.triple.size == Some(SizeClass::Small) {
        let cap = area * (preds.size_small_max - 0.001).max(0.0);
        if (w * h) as f64 > cap {
            let f = (cap / (w * h) as f64).sqrt();
            w = ((w as f64 * f).floor() as i64).max(1);
            h = ((h as f64 * f).floor() as i64).max(1);
            while (w * h) as f64 > cap && (w > 1 || h > 1) {
                if w >= h {
                    w -= 1;
                } else {
                    h -= 1;
                }
            }
        }
    }
    (w, h)
}

fn layered_rect(m: &Member, grid: GridSpec, preds: &Predicates, size: (i64, i64)) -> Rect {
    let (gw, gh) = (grid.w_bins as i64, grid.h_bins as i64);
    let band_h = ((gh as f64) * (preds.size_large_min + 0.01)).ceil() as i64;
    let band_w = ((gw as f64) * (preds.pos_margin * 2.0 - 0.02)).floor() as i64;
    let (w, h) = match m.triple.size {
        Some(SizeClass::Small) => size,
        _ => match m.triple.pos {
            Some(Position::Top) | Some(Position::Bottom) => (gw, band_h.min(gh)),
            Some(Position::Left) | Some(Position::Right) => (band_w.max(1), gh),
            None => (gw, gh),
        },
    };
    let (l, t) = match m.triple.pos {
        Some(Position::Top) => ((gw - w) / 2, 0),
        Some(Position::Bottom) => ((gw - w) / 2, gh - h),
        Some(Position::Left) => (0, (gh - h) / 2),
        Some(Position::Right) => (gw - w, (gh - h) / 2),
        None => ((gw - w) / 2, (gh - h) / 2),
    };
    Rect { l, t, w, h }
}

/// A unit's footprint and member offsets inside it.
struct Shape {
    w: i64,
    h: i64,
    offsets: Vec<Rect>,
}

fn shape_column(sizes: &[(i64, i64)], gutter: i64) -> Shape {
    let w = sizes.iter().map(|s| s.0).max().unwrap_or(1);
    let mut y = 0;
    let mut offsets = Vec::with_capacity(sizes.len());
    for &(mw, mh) in sizes {
        offsets.push(Rect { l: (w - mw) / 2, t: y, w: mw, h: mh });
        y += mh + gutter;
    }
    Shape { w, h: y - gutter, offsets }
}

/// Full-width row: left members from the left edge, right members from the
/// right edge, others in between.
fn shape_side_row(members: &[Member], sizes: &[(i64, i64)], gutter: i64, width: i64) -> Shape {
    let h = sizes.iter().map(|s| s.1).max().unwrap_or(1);
    let mut offsets = vec![Rect { l: 0, t: 0, w: 0, h: 0 }; members.len()];
    let (mut left, mut right) = (0, width);
    let mut middle = Vec::new();
    for (i, m) in members.iter().enumerate() {
        let (mw, mh) = sizes[i];
        let t = (h - mh) / 2;
        match m.triple.pos {
            Some(Position::Left) => {
                offsets[i] = Rect { l: left, t, w: mw, h: mh };
                left += mw + gutter;
            }
            Some(Position::Right) => {
                right -= mw;
                offsets[i] = Rect { l: right, t, w: mw, h: mh };
                right -= gutter;
            }
            _ => middle.push(i),
        }
    }
    let mid_w: i64 = middle.iter().map(|&i| sizes[i].0 + gutter).sum::<i64>() - gutter;
    let mut x = (left + right - mid_w.max(0)) / 2;
    for i in middle {
        let (mw, mh) = sizes[i];
        offsets[i] = Rect { l: x, t: (h - mh) / 2, w: mw, h: mh };
        x += mw + gutter;
    }
    Shape { w: width, h, offsets }
}

struct Row {
    units: Vec<usize>,
    xs: Vec<i64>,
    w: i64,
    h: i64,
}

/// Left-to-right shelf packing; a unit starts a new row when it would not fit.
fn shelf(indices: &[usize], shapes: &[Shape], width: i64, gutter: i64) -> Vec<Row> {
    let mut rows: Vec<Row> = Vec::new();
    for &i in indices {
        let s = &shapes[i];
        let fits = rows.last().is_some_and(|r| r.w + gutter + s.w <= width);
        if fits {
            let r = rows.last_mut().expect("checked");
            r.xs.push(r.w + gutter);
            r.w += gutter + s.w;
            r.h = r.h.max(s.h);
            r.units.push(i);
        } else {
            rows.push(Row { units: vec![i], xs: vec![0], w: s.w, h: s.h });
        }
    }
    rows
}

/// Side units pack left ones from the left and right ones from the right.
/// Full-width units get their own row.
fn side_rows(indices: &[usize], units: &[Unit], shapes: &[Shape], width: i64, gutter: i64) -> Vec<Row> {
    let mut rows: Vec<Row> = Vec::new();
    // (row, next free x from the left, next free x from the right)
    let mut open: Option<(Row, i64, i64)> = None;
    for &i in indices {
        let s = &shapes[i];
        if s.w >= width {
            if let Some((r, _, _)) = open.take() {
                rows.push(r);
            }
            rows.push(Row { units: vec![i], xs: vec![0], w: width, h: s.h });
            continue;
        }
        let is_right = units[i].members[0].triple.pos == Some(Position::Right);
        let fits = open.as_ref().is_some_and(|(_, l, r)| l + s.w <= *r);
        if !fits {
            if let Some((r, _, _)) = open.take() {
                rows.push(r);
            }
            open = Some((Row { units: Vec::new(), xs: Vec::new(), w: width, h: 0 }, 0, width));
        }
        let (row, l, r) = open.as_mut().expect("opened above");
        let x = if is_right {
            *r -= s.w;
            let x = *r;
            *r -= gutter;
            x
        } else {
            let x = *l;
            *l += s.w + gutter;
            x
        };
        row.units.push(i);
        row.xs.push(x);
        row.h = row.h.max(s.h);
    }
    if let Some((r, _, _)) = open {
        rows.push(r);
    }
    rows
}

fn justify_offset(j: Justify, row_w: i64, width: i64) -> i64 {
    match j {
        Justify::Start => 0,
        Justify::Center => (width - row_w) / 2,
        Justify::End => width - row_w,
    }
}

/// Member rectangles, indexed like `units[i].members[j]`.
type Placement = Vec<Vec<Rect>>;

fn layout_once(units: &[Unit], d: &Decisions, scale: f64, cfg: &PlacerConfig) -> Placement {
    let grid = cfg.grid;
    let (gw, gh, g) = (grid.w_bins as i64, grid.h_bins as i64, cfg.gutter as i64);
    let preds = &cfg.predicates;
    let sizes: Vec<Vec<(i64, i64)>> =
        units.iter().map(|u| u.members.iter().map(|m| member_size(m, d, scale, grid, preds)).collect()).collect();
    let shapes: Vec<Shape> = units
        .iter()
        .zip(&sizes)
        .map(|(u, s)| {
            if u.zone == Zone::Side && u.members.len() > 1 {
                shape_side_row(&u.members, s, g, gw)
            } else {
                shape_column(s, g)
            }
        })
        .collect();
    let mut out: Placement = units.iter().map(|u| vec![Rect { l: 0, t: 0, w: 1, h: 1 }; u.members.len()]).collect();
    let put = |i: usize, x: i64, y: i64, out: &mut Placement| {
        for (j, off) in shapes[i].offsets.iter().enumerate() {
            out[i][j] = Rect { l: x + off.l, t: y + off.t, w: off.w, h: off.h };
        }
    };
    let pick =
        |z: Zone| -> Vec<usize> { (0..units.len()).filter(|&i| !units[i].layered && units[i].zone == z).collect() };
    let mut jn = d.justify.iter().copied().cycle();

    // Top band, downward from the top edge; units top-aligned.
    let mut top_end = 0;
    for row in shelf(&pick(Zone::Top), &shapes, gw, g) {
        let x0 = justify_offset(jn.next().unwrap_or(Justify::Start), row.w, gw);
        for (k, &i) in row.units.iter().enumerate() {
            put(i, x0 + row.xs[k], top_end, &mut out);
        }
        top_end += row.h + g;
    }
    // Bottom band, upward from the bottom edge; units bottom-aligned.
    let mut bottom_start = gh;
    for row in shelf(&pick(Zone::Bottom), &shapes, gw, g) {
        let x0 = justify_offset(jn.next().unwrap_or(Justify::Start), row.w, gw);
        let y = bottom_start - row.h;
        for (k, &i) in row.units.iter().enumerate() {
            put(i, x0 + row.xs[k], y + row.h - shapes[i].h, &mut out);
        }
        bottom_start = y - g;
    }

    // Middle: free rows first, then side rows pushed below the top margin.
    let mut any = pick(Zone::Any);
    match d.order {
        1 => any.reverse(),
        2 => any.sort_by_key(|&i| std::cmp::Reverse(shapes[i].h)),
        _ => {}
    }
    let any_rows = shelf(&any, &shapes, gw, g);
    let side = side_rows(&pick(Zone::Side), units, &shapes, gw, g);
    let used: i64 = any_rows.iter().chain(&side).map(|r| r.h + g).sum();
    let slack = (bottom_start + g - top_end - used).max(0);
    let mut y = top_end + (slack as f64 * d.offset_frac).floor() as i64;
    for row in &any_rows {
        let x0 = justify_offset(jn.next().unwrap_or(Justify::Start), row.w, gw);
        for (k, &i) in row.units.iter().enumerate() {
            put(i, x0 + row.xs[k], y, &mut out);
        }
        y += row.h + g;
    }
    let top_line = preds.pos_margin * gh as f64;
    for row in &side {
        // Units are centered vertically in the row; the row starts low enough
        // that every unit's members sit below the top margin.
        let min_center = row
            .units
            .iter()
            .flat_map(|&i| {
                let dy = (row.h - shapes[i].h) / 2;
                shapes[i].offsets.iter().map(move |o| dy as f64 + o.t as f64 + o.h as f64 / 2.0)
            })
            .fold(f64::INFINITY, f64::min);
        let need = (top_line - min_center).floor() as i64 + 1;
        let ry = y.max(need);
        for (k, &i) in row.units.iter().enumerate() {
            put(i, row.xs[k], ry + (row.h - shapes[i].h) / 2, &mut out);
        }
        y = ry + row.h + g;
    }

    for (i, u) in units.iter().enumerate() {
        if u.layered {
            let m = &u.members[0];
            out[i][0] = layered_rect(m, grid, preds, sizes[i][0]);
        }
    }
    out
}

/// First violated requirement, if any. Position and size predicates must hold
/// with slightly perturbed thresholds so decoding on any canvas agrees.
fn verify(units: &[Unit], placement: &Placement, cfg: &PlacerConfig) -> Option<String> {
    let (gw, gh) = (cfg.grid.w_bins as i64, cfg.grid.h_bins as i64);
    let canvas = Canvas::new(gw as f64, gh as f64);
    let eps = 1e-6;
    let p = cfg.predicates;
    let variants = [
        p,
        Predicates {
            pos_margin: p.pos_margin - eps,
            size_small_max: p.size_small_max - eps,
            size_large_min: p.size_large_min + eps,
        },
        Predicates {
            pos_margin: p.pos_margin + eps,
            size_small_max: p.size_small_max + eps,
            size_large_min: p.size_large_min - eps,
        },
    ];
    let mut solid: Vec<Rect> = Vec::new();
    for (u, rects) in units.iter().zip(placement) {
        for (m, r) in u.members.iter().zip(rects) {
            if r.w < 1 || r.h < 1 || r.l < 0 || r.t < 0 || r.l + r.w > gw || r.t + r.h > gh {
                return Some(format!("{} does not fit on the grid", m.triple));
            }
            let b = BBox::new(r.l as f64, r.t as f64, r.w as f64, r.h as f64);
            if !m.completed && !variants.iter().all(|v| v.satisfies(&b, canvas, m.triple.pos, m.triple.size)) {
                return Some(format!("{} cannot be satisfied", m.triple));
            }
            if !u.layered {
                if solid.iter().any(|o| r.l < o.l + o.w && o.l < r.l + r.w && r.t < o.t + o.h && o.t < r.t + r.h) {
                    return Some(format!("{} overlaps another element", m.triple));
                }
                solid.push(*r);
            }
        }
    }
    None
}

fn to_seq(units: &[Unit], placement: &Placement, n_blocks: usize) -> LayoutSeq {
    let mut seq = LayoutSeq { ungrouped: Vec::new(), groups: vec![Vec::new(); n_blocks] };
    for (u, rects) in units.iter().zip(placement) {
        for (m, r) in u.members.iter().zip(rects) {
            let tok = LayoutElementTok {
                completed: m.completed,
                etype: m.triple.etype.clone(),
                l: r.l as u32,
                t: r.t as u32,
                w: r.w as u32,
                h: r.h as u32,
            };
            match u.block {
                Some(b) => seq.groups[b].push(tok),
                None => seq.ungrouped.push(tok),
            }
        }
    }
    canonicalize(&mut seq);
    seq
}

fn place_with<R: Rng + ?Sized>(
    cs: &ConstraintSeq,
    cfg: &PlacerConfig,
    stats: Option<&CorpusStats>,
    rng: &mut R,
) -> Result<LayoutSeq, PlacerError> {
    cfg.validate()?;
    let completions = match stats {
        Some(s) => complete_elements(cs, s, cfg),
        None => Vec::new(),
    };
    if cs.is_empty() && completions.is_empty() {
        return Err(PlacerError::EmptyConstraints);
    }
    let with = build_units(cs, &completions);
    let decisions = draw_decisions(&with, stats, cfg, rng);
    let mut attempts: Vec<Vec<Unit>> = vec![with];
    if !completions.is_empty() && !cs.is_empty() {
        attempts.push(build_units(cs, &[]));
    }
    let mut last = String::new();
    for units in &attempts {
        let mut scale = 1.0;
        for _ in 0..cfg.max_attempts {
            let placement = layout_once(units, &decisions, scale, cfg);
            match verify(units, &placement, cfg) {
                None => return Ok(to_seq(units, &placement, cs.groups.len())),
                Some(why) => last = why,
            }
            scale *= 0.85;
        }
    }
    Err(PlacerError::Infeasible { constraint: last })
}

/// Deterministic placement: every decision takes the highest-scoring
/// candidate.
pub fn place(cs: &ConstraintSeq, cfg: &PlacerConfig, stats: Option<&CorpusStats>) -> Result<LayoutSeq, PlacerError> {
    let argmax = PlacerConfig { k: 1, ..*cfg };
    let mut rng = stream_rng(cfg.seed, &cs.to_string(), "place");
    place_with(cs, &argmax, stats, &mut rng)
}

/// `cfg.n_samples` independent top-`k` samples. Each sample has its own RNG
/// stream keyed by the seed, the sequence text, and the sample index.
pub fn place_samples(
    cs: &ConstraintSeq,
    cfg: &PlacerConfig,
    stats: Option<&CorpusStats>,
) -> Result<Vec<LayoutSeq>, PlacerError> {
    cfg.validate()?;
    let key = cs.to_string();
    (0..cfg.n_samples)
        .map(|i| {
            let mut rng = stream_rng(cfg.seed, &key, &format!("sample-{i}"));
            place_with(cs, cfg, stats, &mut rng)
        })
        .collect()
}
