use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

/// Closed interval `[lo, hi]`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Finite union of disjoint closed intervals, kept sorted and merged.
///
/// Complements are taken as closures, so `complement([0, ∞)) = (−∞, 0]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    pub fn real_line() -> Self {
        Self::single(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn nonnegative() -> Self {
        Self::single(0.0, f64::INFINITY)
    }

    pub fn single(lo: f64, hi: f64) -> Self {
        Self::from_intervals([Interval::new(lo, hi)])
    }

    /// Canonicalizes arbitrary (possibly overlapping) intervals. Intervals
    /// with `lo > hi` or NaN ends are dropped.
    pub fn from_intervals(items: impl IntoIterator<Item = Interval>) -> Self {
        let mut v: Vec<Interval> = items
            .into_iter()
            .filter(|iv| !iv.lo.is_nan() && !iv.hi.is_nan() && iv.lo <= iv.hi)
            .filter(|iv| iv.lo < f64::INFINITY && iv.hi > f64::NEG_INFINITY)
            .collect();
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self::from_intervals(pairs.iter().map(|&(a, b)| Interval::new(a, b)))
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_real_line(&self) -> bool {
        self.intervals.len() == 1
            && self.intervals[0].lo == f64::NEG_INFINITY
            && self.intervals[0].hi == f64::INFINITY
    }

    pub fn contains(&self, x: f64) -> bool {
        // first interval with lo > x, then check its predecessor
        let idx = self.intervals.partition_point(|iv| iv.lo <= x);
        idx > 0 && self.intervals[idx - 1].hi >= x
    }

    /// Distance from `x` to the set (0 inside).
    pub fn distance(&self, x: f64) -> f64 {
        self.intervals
            .iter()
            .map(|iv| {
                if x < iv.lo {
                    iv.lo - x
                } else if x > iv.hi {
                    x - iv.hi
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        Self::from_intervals(self.intervals.iter().chain(other.intervals.iter()).copied())
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let (a, b) = (&self.intervals, &other.intervals);
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let lo = a[i].lo.max(b[j].lo);
            let hi = a[i].hi.min(b[j].hi);
            if lo <= hi {
                out.push(Interval::new(lo, hi));
            }
            if a[i].hi < b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_intervals(out)
    }

    /// Closure of the set complement.
    pub fn complement(&self) -> IntervalSet {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = f64::NEG_INFINITY;
        for iv in &self.intervals {
            if iv.lo > cursor || (cursor == f64::NEG_INFINITY && iv.lo > f64::NEG_INFINITY) {
                out.push(Interval::new(cursor, iv.lo));
            }
            cursor = iv.hi;
        }
        if cursor < f64::INFINITY {
            out.push(Interval::new(cursor, f64::INFINITY));
        }
        Self::from_intervals(out)
    }

    pub fn union_all<'a>(sets: impl IntoIterator<Item = &'a IntervalSet>) -> IntervalSet {
        Self::from_intervals(sets.into_iter().flat_map(|s| s.intervals.iter().copied()))
    }

    /// Intersection of all sets; the empty family gives the real line.
    pub fn intersect_all<'a>(sets: impl IntoIterator<Item = &'a IntervalSet>) -> IntervalSet {
        let mut acc = IntervalSet::real_line();
        for s in sets {
            acc = acc.intersect(s);
            if acc.is_empty() {
                break;
            }
        }
        acc
    }

    /// Image under an increasing map applied to the endpoints.
    pub fn map_increasing(&self, f: impl Fn(f64) -> f64) -> IntervalSet {
        Self::from_intervals(self.intervals.iter().map(|iv| Interval::new(f(iv.lo), f(iv.hi))))
    }

    /// Multiply by a positive scalar.
    pub fn scale(&self, c: f64) -> IntervalSet {
        assert!(c > 0.0, "scale factor must be positive");
        self.map_increasing(|x| x * c)
    }

    /// Endpoint pairs, infinities preserved.
    pub fn to_pairs(&self) -> Vec<(f64, f64)> {
        self.intervals.iter().map(|iv| (iv.lo, iv.hi)).collect()
    }
}

impl std::fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "∅");
        }
        for (k, iv) in self.intervals.iter().enumerate() {
            if k > 0 {
                write!(f, " ∪ ")?;
            }
            let l = if iv.lo == f64::NEG_INFINITY { "(-inf".to_string() } else { format!("[{}", iv.lo) };
            let r = if iv.hi == f64::INFINITY { "inf)".to_string() } else { format!("{}]", iv.hi) };
            write!(f, "{l}, {r}")?;
        }
        Ok(())
    }
}

/// JSON form: `[[lo, hi], ...]` with `null` for infinite ends.
impl Serialize for IntervalSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.intervals.len()))?;
        for iv in &self.intervals {
            let lo = iv.lo.is_finite().then_some(iv.lo);
            let hi = iv.hi.is_finite().then_some(iv.hi);
            seq.serialize_element(&[lo, hi])?;
        }
        seq.end()
    }
}
