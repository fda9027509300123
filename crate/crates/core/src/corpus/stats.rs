use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{flatten_elements, CorpusError, LayoutDoc};
use crate::seq::{discretize, discretize_size, GridSpec};

/// Sparse 2-D count table keyed by bin pairs. Serialized as `[[a, b, n], ..]`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<[u64; 3]>", into = "Vec<[u64; 3]>")]
pub struct Histogram2d {
    counts: BTreeMap<(u32, u32), u64>,
}

impl From<Vec<[u64; 3]>> for Histogram2d {
    fn from(v: Vec<[u64; 3]>) -> Self {
        let mut h = Histogram2d::default();
        for [a, b, n] in v {
            h.add((a as u32, b as u32), n);
        }
        h
    }
}

impl From<Histogram2d> for Vec<[u64; 3]> {
    fn from(h: Histogram2d) -> Self {
        h.counts.into_iter().map(|((a, b), n)| [a as u64, b as u64, n]).collect()
    }
}

impl Histogram2d {
    pub fn add(&mut self, key: (u32, u32), n: u64) {
        if n > 0 {
            *self.counts.entry(key).or_insert(0) += n;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(&self, key: (u32, u32)) -> u64 {
        self.counts.get(&key).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), u64)> + '_ {
        self.counts.iter().map(|(&k, &n)| (k, n))
    }

    /// Most frequent keys, by count descending then key ascending.
    pub fn top(&self, limit: usize) -> Vec<((u32, u32), u64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        v.truncate(limit);
        v
    }

    pub fn mode(&self) -> Option<(u32, u32)> {
        self.top(1).first().map(|&(k, _)| k)
    }

    fn merge(&mut self, other: &Histogram2d) {
        for (k, n) in other.iter() {
            self.add(k, n);
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeStats {
    /// Element occurrences.
    pub count: u64,
    /// Documents containing the type at least once.
    pub doc_count: u64,
    /// `(w_bin, h_bin)` counts.
    pub size_hist: Histogram2d,
    /// `(l_bin, t_bin)` counts.
    pub pos_hist: Histogram2d,
}

/// Corpus summary feeding the placer and element completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub grid: GridSpec,
    pub doc_count: u64,
    pub types: BTreeMap<String, TypeStats>,
    /// Document-level co-occurrence, symmetric, stored once per unordered pair
    /// as `[a, b, n]` with `a <= b`.
    #[serde(with = "cooc_serde")]
    pub cooccurrence: BTreeMap<(String, String), u64>,
}

mod cooc_serde {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<(String, String), u64>, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<(&str, &str, u64)> = m.iter().map(|((a, b), n)| (a.as_str(), b.as_str(), *n)).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<(String, String), u64>, D::Error> {
        let v: Vec<(String, String, u64)> = Vec::deserialize(d)?;
        let mut m = BTreeMap::new();
        for (a, b, n) in v {
            let key = if a <= b { (a, b) } else { (b, a) };
            *m.entry(key).or_insert(0) += n;
        }
        Ok(m)
    }
}

impl CorpusStats {
    pub fn empty(grid: GridSpec) -> Self {
        CorpusStats { grid, doc_count: 0, types: BTreeMap::new(), cooccurrence: BTreeMap::new() }
    }

    pub fn type_stats(&self, etype: &str) -> Option<&TypeStats> {
        self.types.get(etype)
    }

    /// Documents containing both types (order-insensitive). For `a == b` this
    /// is the number of documents with at least two elements of that type.
    pub fn cooc(&self, a: &str, b: &str) -> u64 {
        let key = if a <= b { (a.to_string(), b.to_string()) } else { (b.to_string(), a.to_string()) };
        self.cooccurrence.get(&key).copied().unwrap_or(0)
    }

    pub fn doc_freq(&self, etype: &str) -> u64 {
        self.types.get(etype).map_or(0, |t| t.doc_count)
    }

    /// Estimated probability that a document containing every type in
    /// `given` also contains `target`: the minimum over `s` in `given` of
    /// `cooc(s, target) / doc_freq(s)`, or `doc_freq(target) / doc_count`
    /// when `given` is empty.
    pub fn support(&self, target: &str, given: &[&str]) -> f64 {
        if given.is_empty() {
            if self.doc_count == 0 {
                return 0.0;
            }
            return self.doc_freq(target) as f64 / self.doc_count as f64;
        }
        given
            .iter()
            .map(|s| {
                let df = self.doc_freq(s);
                if df == 0 {
                    0.0
                } else {
                    self.cooc(s, target) as f64 / df as f64
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Associative, commutative combination of two summaries over the same grid.
    pub fn merge(&mut self, other: &CorpusStats) {
        debug_assert_eq!(self.grid, other.grid);
        self.doc_count += other.doc_count;
        for (name, ts) in &other.types {
            let mine = self.types.entry(name.clone()).or_default();
            mine.count += ts.count;
            mine.doc_count += ts.doc_count;
            mine.size_hist.merge(&ts.size_hist);
            mine.pos_hist.merge(&ts.pos_hist);
        }
        for (k, n) in &other.cooccurrence {
            *self.cooccurrence.entry(k.clone()).or_insert(0) += n;
        }
    }
}

/// Incremental stats accumulator.
#[derive(Debug, Clone)]
pub struct StatsBuilder {
    stats: CorpusStats,
}

impl StatsBuilder {
    pub fn new(grid: GridSpec) -> Self {
        StatsBuilder { stats: CorpusStats::empty(grid) }
    }

    pub fn add_doc(&mut self, doc: &LayoutDoc) {
        let grid = self.stats.grid;
        let elements = flatten_elements(doc);
        let mut per_type: BTreeMap<&str, u64> = BTreeMap::new();
        for e in &elements {
            let b = e.bbox.clamp_to(doc.canvas);
            let ts = self.stats.types.entry(e.etype.as_str().to_string()).or_default();
            ts.count += 1;
            // Clamped boxes are always in range.
            let l = discretize(b.l, doc.canvas.w, grid.w_bins).unwrap_or(0);
            let t = discretize(b.t, doc.canvas.h, grid.h_bins).unwrap_or(0);
            let w = discretize_size(b.w, doc.canvas.w, grid.w_bins).unwrap_or(1).min(grid.w_bins - l);
            let h = discretize_size(b.h, doc.canvas.h, grid.h_bins).unwrap_or(1).min(grid.h_bins - t);
            ts.size_hist.add((w, h), 1);
            ts.pos_hist.add((l, t), 1);
            *per_type.entry(e.etype.as_str()).or_insert(0) += 1;
        }
        let present: BTreeSet<&str> = per_type.keys().copied().collect();
        for name in &present {
            self.stats.types.get_mut(*name).expect("inserted above").doc_count += 1;
        }
        let names: Vec<&str> = present.into_iter().collect();
        for (i, a) in names.iter().enumerate() {
            if per_type[a] >= 2 {
                *self.stats.cooccurrence.entry((a.to_string(), a.to_string())).or_insert(0) += 1;
            }
            for b in &names[i + 1..] {
                *self.stats.cooccurrence.entry((a.to_string(), b.to_string())).or_insert(0) += 1;
            }
        }
        self.stats.doc_count += 1;
    }

    pub fn merge(&mut self, other: StatsBuilder) {
        self.stats.merge(&other.stats);
    }

    pub fn finish(self) -> Result<CorpusStats, CorpusError> {
        if self.stats.doc_count == 0 {
            return Err(CorpusError::EmptyCorpus);
        }
        Ok(self.stats)
    }
}

pub fn compute_stats<'a, I>(docs: I, grid: GridSpec) -> Result<CorpusStats, CorpusError>
where
    I: IntoIterator<Item = &'a LayoutDoc>,
{
    let mut b = StatsBuilder::new(grid);
    for d in docs {
        b.add_doc(d);
    }
    b.finish()
}
