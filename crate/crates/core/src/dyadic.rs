//! Dyadic intervals, sets of level-`m` cells, and dyadic Hausdorff content.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Largest supported set resolution.
pub const MAX_RESOLUTION: u32 = 30;

/// Relative slack used when comparing contents.
pub const CONTENT_SLACK: f64 = 1e-12;

/// The closed interval `[k·2^{-j}, (k+1)·2^{-j}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub level: u32,
    pub index: u64,
}

impl DyadicInterval {
    pub fn new(level: u32, index: u64) -> Result<Self> {
        if level > 62 {
            return Err(param("level", format!("{level} exceeds 62")));
        }
        if index >= 1u64 << level {
            return Err(param("index", format!("{index} outside [0, 2^{level})")));
        }
        Ok(Self { level, index })
    }

    pub fn unit() -> Self {
        Self { level: 0, index: 0 }
    }

    pub fn length(&self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    pub fn start(&self) -> f64 {
        self.index as f64 * self.length()
    }

    pub fn end(&self) -> f64 {
        (self.index + 1) as f64 * self.length()
    }

    pub fn center(&self) -> f64 {
        (self.index as f64 + 0.5) * self.length()
    }

    pub fn children(&self) -> [Self; 2] {
        let level = self.level + 1;
        [
            Self {
                level,
                index: 2 * self.index,
            },
            Self {
                level,
                index: 2 * self.index + 1,
            },
        ]
    }

    pub fn parent(&self) -> Option<Self> {
        (self.level > 0).then(|| Self {
            level: self.level - 1,
            index: self.index / 2,
        })
    }

    pub fn contains_point(&self, x: f64) -> bool {
        x >= self.start() && x <= self.end()
    }

    /// Whether `other` is a (non-strict) sub-interval.
    pub fn contains(&self, other: &Self) -> bool {
        other.level >= self.level && other.index >> (other.level - self.level) == self.index
    }

    /// Level-`m` cell indices covered, as a half-open range.
    pub fn cell_range(&self, m: u32) -> std::ops::Range<u64> {
        let shift = m - self.level;
        (self.index << shift)..((self.index + 1) << shift)
    }

    /// `l(Q)^β`.
    pub fn cost(&self, beta: f64) -> f64 {
        (-(self.level as f64) * beta).exp2()
    }
}

/// A union of level-`m` dyadic cells of `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DyadicSetJson", into = "DyadicSetJson")]
pub struct DyadicSet {
    resolution: u32,
    bits: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct DyadicSetJson {
    resolution: u32,
    mask: String,
}

impl From<DyadicSet> for DyadicSetJson {
    fn from(set: DyadicSet) -> Self {
        Self {
            resolution: set.resolution,
            mask: set.to_hex(),
        }
    }
}

impl TryFrom<DyadicSetJson> for DyadicSet {
    type Error = Error;

    fn try_from(raw: DyadicSetJson) -> Result<Self> {
        DyadicSet::from_hex(raw.resolution, &raw.mask)
    }
}

fn check_resolution(m: u32) -> Result<()> {
    if m > MAX_RESOLUTION {
        return Err(param(
            "resolution",
            format!("{m} exceeds the supported maximum {MAX_RESOLUTION}"),
        ));
    }
    Ok(())
}

impl DyadicSet {
    pub fn empty(resolution: u32) -> Result<Self> {
        check_resolution(resolution)?;
        let cells = 1usize << resolution;
        Ok(Self {
            resolution,
            bits: vec![0; cells.div_ceil(64)],
        })
    }

    pub fn full(resolution: u32) -> Result<Self> {
        let mut set = Self::empty(resolution)?;
        set.fill_range(0, set.cell_count());
        Ok(set)
    }

    pub fn from_cells(resolution: u32, cells: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut set = Self::empty(resolution)?;
        for k in cells {
            if k >= set.cell_count() {
                return Err(param("cells", format!("index {k} outside 2^{resolution}")));
            }
            set.insert(k);
        }
        Ok(set)
    }

    /// The cells of `q` at resolution `m`.
    pub fn from_interval(resolution: u32, q: DyadicInterval) -> Result<Self> {
        if q.level > resolution {
            return Err(param("interval", "finer than the resolution"));
        }
        let mut set = Self::empty(resolution)?;
        let r = q.cell_range(resolution);
        set.fill_range(r.start, r.end);
        Ok(set)
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    /// Number of level-`m` cells, `2^m`.
    pub fn cell_count(&self) -> u64 {
        1u64 << self.resolution
    }

    pub fn cell_width(&self) -> f64 {
        (-(self.resolution as f64)).exp2()
    }

    pub fn contains_cell(&self, k: u64) -> bool {
        k < self.cell_count() && (self.bits[(k / 64) as usize] >> (k % 64)) & 1 == 1
    }

    pub fn insert(&mut self, k: u64) {
        self.bits[(k / 64) as usize] |= 1 << (k % 64);
    }

    pub fn remove(&mut self, k: u64) {
        self.bits[(k / 64) as usize] &= !(1 << (k % 64));
    }

    fn fill_range(&mut self, lo: u64, hi: u64) {
        for k in lo..hi {
            self.insert(k);
        }
    }

    /// Number of kept cells.
    pub fn len(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Lebesgue measure, `len · 2^{-m}`.
    pub fn measure(&self) -> f64 {
        self.len() as f64 * self.cell_width()
    }

    /// Kept cells in `[lo, hi)`.
    pub fn count_range(&self, lo: u64, hi: u64) -> u64 {
        if lo >= hi {
            return 0;
        }
        let (wl, wh) = ((lo / 64) as usize, ((hi - 1) / 64) as usize);
        let mask_lo = !0u64 << (lo % 64);
        let mask_hi = !0u64 >> (63 - (hi - 1) % 64);
        if wl == wh {
            return (self.bits[wl] & mask_lo & mask_hi).count_ones() as u64;
        }
        let mut n = (self.bits[wl] & mask_lo).count_ones() as u64
            + (self.bits[wh] & mask_hi).count_ones() as u64;
        for w in &self.bits[wl + 1..wh] {
            n += w.count_ones() as u64;
        }
        n
    }

    /// Kept cell indices in increasing order.
    pub fn cells(&self) -> impl Iterator<Item = u64> + '_ {
        self.bits.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as u64;
                w &= w - 1;
                Some(i as u64 * 64 + b)
            })
        })
    }

    /// Kept cells as dyadic intervals.
    pub fn intervals(&self) -> impl Iterator<Item = DyadicInterval> + '_ {
        let level = self.resolution;
        self.cells().map(move |index| DyadicInterval { level, index })
    }

    /// Closed-cell membership of a real point.
    pub fn contains_point(&self, x: f64) -> bool {
        if !(0.0..=1.0).contains(&x) {
            return false;
        }
        let u = x * self.cell_count() as f64;
        let k = u.floor() as u64;
        if self.contains_cell(k.min(self.cell_count() - 1)) {
            return true;
        }
        u == k as f64 && k > 0 && self.contains_cell(k - 1)
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.resolution != other.resolution {
            return Err(param(
                "other",
                format!("resolutions {} and {} differ", self.resolution, other.resolution),
            ));
        }
        Ok(())
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(self.zip_bits(other, |a, b| a | b))
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(self.zip_bits(other, |a, b| a & b))
    }

    pub fn complement(&self) -> Self {
        let mut out = self.zip_bits(self, |a, _| !a);
        let n = self.cell_count();
        if n % 64 != 0 {
            let last = out.bits.len() - 1;
            out.bits[last] &= (1u64 << (n % 64)) - 1;
        }
        out
    }

    fn zip_bits(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        Self {
            resolution: self.resolution,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `self ∩ Q` at the same resolution.
    pub fn restrict(&self, q: DyadicInterval) -> Result<Self> {
        self.intersection(&Self::from_interval(self.resolution, q)?)
    }

    /// Hex mask, bit `k` of the little-endian byte stream is cell `k`.
    pub fn to_hex(&self) -> String {
        let nbytes = (self.cell_count() as usize).div_ceil(8);
        let bytes: Vec<u8> = self
            .bits
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(nbytes)
            .collect();
        hex::encode(bytes)
    }

    pub fn from_hex(resolution: u32, mask: &str) -> Result<Self> {
        let mut set = Self::empty(resolution)?;
        let bytes = hex::decode(mask).map_err(|e| Error::Format(format!("hex mask: {e}")))?;
        let nbytes = (set.cell_count() as usize).div_ceil(8);
        if bytes.len() != nbytes {
            return Err(Error::Format(format!(
                "mask has {} bytes, resolution {resolution} needs {nbytes}",
                bytes.len()
            )));
        }
        for (i, b) in bytes.iter().enumerate() {
            set.bits[i / 8] |= (*b as u64) << (8 * (i % 8));
        }
        if set.complement().complement() != set {
            return Err(Error::Format("mask sets bits beyond 2^resolution".into()));
        }
        Ok(set)
    }

    /// Run-length text such as `m=4: 0-3,9,12-15`.
    pub fn to_run_length(&self) -> String {
        let mut out = format!("m={}:", self.resolution);
        let mut first = true;
        let mut cells = self.cells().peekable();
        while let Some(lo) = cells.next() {
            let mut hi = lo;
            while cells.peek() == Some(&(hi + 1)) {
                hi = cells.next().unwrap_or(hi);
            }
            out.push_str(if first { " " } else { "," });
            first = false;
            if hi == lo {
                let _ = write!(out, "{lo}");
            } else {
                let _ = write!(out, "{lo}-{hi}");
            }
        }
        out
    }

    pub fn from_run_length(text: &str) -> Result<Self> {
        let bad = |what: &str| Error::Format(format!("run-length text: {what}"));
        let (head, body) = text.trim().split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let m: u32 = head
            .trim()
            .strip_prefix("m=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("expected m=<level>"))?;
        let mut set = Self::empty(m)?;
        for run in body.split(',').map(str::trim).filter(|r| !r.is_empty()) {
            let (lo, hi) = match run.split_once('-') {
                Some((a, b)) => (a.trim().parse(), b.trim().parse()),
                None => (run.parse(), run.parse()),
            };
            let (lo, hi): (u64, u64) = (lo.map_err(|_| bad(run))?, hi.map_err(|_| bad(run))?);
            if lo > hi || hi >= set.cell_count() {
                return Err(bad(run));
            }
            set.fill_range(lo, hi + 1);
        }
        Ok(set)
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(param("beta", format!("must lie in (0, 1], got {beta}")));
    }
    Ok(())
}

/// Minimal cost of a dyadic cover of `set ∩ q` by intervals inside `q`.
fn subtree_content(set: &DyadicSet, q: DyadicInterval, costs: &[f64]) -> f64 {
    let r = q.cell_range(set.resolution);
    let kept = set.count_range(r.start, r.end);
    let own = costs[q.level as usize];
    if kept == 0 {
        return 0.0;
    }
    if kept == r.end - r.start {
        return own;
    }
    let [a, b] = q.children();
    let split = subtree_content(set, a, costs) + subtree_content(set, b, costs);
    if split >= own * (1.0 - CONTENT_SLACK) {
        own
    } else {
        split
    }
}

fn level_costs(m: u32, beta: f64) -> Vec<f64> {
    (0..=m).map(|j| (-(j as f64) * beta).exp2()).collect()
}

/// Dyadic Hausdorff content `H^β_∞(set)` over covers by dyadic intervals in `[0, 1]`.
pub fn content_upper(set: &DyadicSet, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(subtree_content(
        set,
        DyadicInterval::unit(),
        &level_costs(set.resolution, beta),
    ))
}

/// Content of `set ∩ q`.
pub fn content_within(set: &DyadicSet, q: DyadicInterval, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if q.level > set.resolution {
        return Err(param("q", "finer than the set resolution"));
    }
    Ok(subtree_content(set, q, &level_costs(set.resolution, beta)))
}

/// Coarsest, then leftmost, dyadic `Q` with `H^β_∞(set ∩ Q) ≥ (1-δ)·l(Q)^β`.
pub fn find_dense_cube(set: &DyadicSet, beta: f64, delta: f64) -> Result<DyadicInterval> {
    check_beta(beta)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(param("delta", format!("must lie in (0, 1), got {delta}")));
    }
    if set.is_empty() {
        return Err(Error::NotFound("dense cube of an empty set".into()));
    }
    let costs = level_costs(set.resolution, beta);
    for level in 0..=set.resolution {
        let width = 1u64 << (set.resolution - level);
        for index in 0..(1u64 << level) {
            if set.count_range(index * width, (index + 1) * width) == 0 {
                continue;
            }
            let q = DyadicInterval { level, index };
            let need = (1.0 - delta) * costs[level as usize] * (1.0 - CONTENT_SLACK);
            if subtree_content(set, q, &costs) >= need {
                return Ok(q);
            }
        }
    }
    unreachable!("every kept leaf is its own dense cube")
}

/// Image of `set ∩ Q` under `y ↦ 2^j (y − x_Q)`, at resolution `m − j`.
pub fn rescale(set: &DyadicSet, q: DyadicInterval) -> Result<DyadicSet> {
    if q.level > set.resolution {
        return Err(param(
            "q",
            format!("level {} exceeds resolution {}", q.level, set.resolution),
        ));
    }
    let range = q.cell_range(set.resolution);
    let mut out = DyadicSet::empty(set.resolution - q.level)?;
    for k in range.clone() {
        if set.contains_cell(k) {
            out.insert(k - range.start);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_geometry() {
        let q = DyadicInterval::new(3, 5).unwrap();
        assert_eq!((q.start(), q.end(), q.length()), (0.625, 0.75, 0.125));
        let [a, b] = q.children();
        assert_eq!((a.start(), a.end(), b.start(), b.end()), (0.625, 0.6875, 0.6875, 0.75));
        assert_eq!(a.parent(), Some(q));
        assert!(q.contains(&b) && !a.contains(&q));
        assert!(DyadicInterval::new(2, 4).is_err());
    }

    #[test]
    fn set_algebra_and_counts() {
        let a = DyadicSet::from_cells(7, [0, 1, 64, 127]).unwrap();
        let b = DyadicSet::from_cells(7, [1, 2, 127]).unwrap();
        assert_eq!(a.union(&b).unwrap().len(), 5);
        assert_eq!(a.intersection(&b).unwrap().len(), 2);
        assert_eq!(a.complement().len(), 124);
        assert_eq!(a.count_range(1, 65), 2);
        assert_eq!(a.cells().collect::<Vec<_>>(), vec![0, 1, 64, 127]);
        assert!(a.union(&DyadicSet::empty(6).unwrap()).is_err());
    }

    #[test]
    fn closed_cell_membership() {
        let s = DyadicSet::from_cells(2, [1]).unwrap();
        assert!(s.contains_point(0.25) && s.contains_point(0.5) && s.contains_point(0.3));
        assert!(!s.contains_point(0.2) && !s.contains_point(0.6));
        let last = DyadicSet::from_cells(2, [3]).unwrap();
        assert!(last.contains_point(1.0));
    }

    #[test]
    fn serialization_round_trips() {
        let s = DyadicSet::from_cells(5, [0, 1, 2, 7, 20, 31]).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<DyadicSet>(&json).unwrap(), s);
        assert_eq!(s.to_run_length(), "m=5: 0-2,7,20,31");
        assert_eq!(DyadicSet::from_run_length(&s.to_run_length()).unwrap(), s);
        let tiny = DyadicSet::from_cells(1, [1]).unwrap();
        assert_eq!(tiny.to_hex(), "02");
        assert!(DyadicSet::from_hex(1, "04").is_err());
    }

    #[test]
    fn content_basics() {
        let full = DyadicSet::full(8).unwrap();
        assert_eq!(content_upper(&full, 0.5).unwrap(), 1.0);
        assert_eq!(content_upper(&DyadicSet::empty(8).unwrap(), 0.5).unwrap(), 0.0);
        assert!(content_upper(&full, 0.0).is_err());
        assert!(content_upper(&full, 1.5).is_err());
        let single = DyadicSet::from_cells(4, [5]).unwrap();
        assert!((content_upper(&single, 0.5).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn dense_cube_examples() {
        let full = DyadicSet::full(6).unwrap();
        assert_eq!(find_dense_cube(&full, 0.7, 0.1).unwrap(), DyadicInterval::unit());
        let q = DyadicInterval::new(3, 0).unwrap();
        let s = DyadicSet::from_interval(8, q).unwrap();
        assert_eq!(find_dense_cube(&s, 0.9, 0.1).unwrap(), q);
        assert!(matches!(
            find_dense_cube(&DyadicSet::empty(4).unwrap(), 0.5, 0.1),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn rescale_examples() {
        let full = DyadicSet::full(6).unwrap();
        let half = DyadicInterval::new(1, 0).unwrap();
        assert_eq!(rescale(&full, half).unwrap(), DyadicSet::full(5).unwrap());
        let s = DyadicSet::from_cells(4, [1, 9]).unwrap();
        assert_eq!(rescale(&s, DyadicInterval::unit()).unwrap(), s);
        assert!(rescale(&s, DyadicInterval::new(5, 0).unwrap()).is_err());
    }
}
