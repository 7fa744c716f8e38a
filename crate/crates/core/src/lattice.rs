//! Integer paths with downward steps of at most one: lattice bridges,
//! first-passage bridges, their cyclic shifts, and coding walks.
//!
//! Paths are stored as value sequences `b(0), ..., b(n)`; increments are
//! derived on demand.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `b(0) = 0` and every increment is `>= -1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct LatticePath {
    values: Vec<i64>,
}

impl LatticePath {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        match values.first() {
            None => return Err(Error::InvalidPath("empty value sequence".into())),
            Some(&v) if v != 0 => return Err(Error::InvalidPath(format!("path starts at {v}, not 0"))),
            _ => {}
        }
        if let Some(i) = values.windows(2).position(|w| w[1] - w[0] < -1) {
            return Err(Error::InvalidPath(format!(
                "step {} -> {} at index {i} goes down by more than one",
                values[i],
                values[i + 1]
            )));
        }
        Ok(Self { values })
    }

    /// Number of steps.
    pub fn len(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn end(&self) -> i64 {
        self.values[self.values.len() - 1]
    }

    pub fn increments(&self) -> impl Iterator<Item = i64> + '_ {
        self.values.windows(2).map(|w| w[1] - w[0])
    }

    pub fn into_values(self) -> Vec<i64> {
        self.values
    }

    /// Rows for CSV export: `index,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,value\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{i},{v}\n"));
        }
        out
    }
}

impl TryFrom<Vec<i64>> for LatticePath {
    type Error = Error;
    fn try_from(values: Vec<i64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<LatticePath> for Vec<i64> {
    fn from(p: LatticePath) -> Self {
        p.values
    }
}

/// A lattice path ending at `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct LatticeBridge(LatticePath);

impl LatticeBridge {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        Self::from_path(LatticePath::new(values)?)
    }

    pub fn from_path(path: LatticePath) -> Result<Self> {
        if path.is_empty() || path.end() != -1 {
            return Err(Error::InvalidPath(format!(
                "a bridge must have at least one step and end at -1 (ends at {} after {} steps)",
                path.end(),
                path.len()
            )));
        }
        Ok(Self(path))
    }

    pub fn path(&self) -> &LatticePath {
        &self.0
    }

    pub fn values(&self) -> &[i64] {
        self.0.values()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The bridge `b^(k)(i) = b(k + i) - b(k)`, where the path is continued
    /// periodically by `b(n + i) = -1 + b(i)`.
    ///
    /// # Panics
    /// If `k` is not in `1..=n`.
    pub fn cyclic_shift(&self, k: usize) -> LatticeBridge {
        let n = self.len();
        assert!((1..=n).contains(&k), "shift {k} outside 1..={n}");
        let b = self.values();
        let base = b[k];
        let values = (0..=n)
            .map(|i| {
                let j = k + i;
                let v = if j <= n { b[j] } else { b[j - n] - 1 };
                v - base
            })
            .collect();
        LatticeBridge(LatticePath { values })
    }

    /// The smallest `r` in `1..=n` at which the bridge attains its minimum.
    /// Shifting by `r` is the unique rotation producing a first-passage
    /// bridge.
    pub fn rotation_index(&self) -> usize {
        let b = self.values();
        let mut best = 1;
        for i in 2..b.len() {
            if b[i] < b[best] {
                best = i;
            }
        }
        best
    }

    pub fn is_first_passage(&self) -> bool {
        is_first_passage(&self.0)
    }

    /// Rotates into the first-passage bridge given by [`Self::rotation_index`].
    pub fn to_first_passage(&self) -> (usize, FirstPassageBridge) {
        let r = self.rotation_index();
        (r, FirstPassageBridge(self.cyclic_shift(r)))
    }
}

impl TryFrom<Vec<i64>> for LatticeBridge {
    type Error = Error;
    fn try_from(values: Vec<i64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<LatticeBridge> for Vec<i64> {
    fn from(b: LatticeBridge) -> Self {
        b.0.values
    }
}

/// True iff `path` is a bridge that stays nonnegative until its final step.
pub fn is_first_passage(path: &LatticePath) -> bool {
    let v = path.values();
    let n = path.len();
    n >= 1 && v[n] == -1 && v[..n].iter().all(|&x| x >= 0)
}

/// A lattice bridge whose first visit to `-1` is its last step.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct FirstPassageBridge(LatticeBridge);

impl FirstPassageBridge {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        let bridge = LatticeBridge::new(values)?;
        if !bridge.is_first_passage() {
            return Err(Error::MalformedBridge("bridge reaches -1 before its final step".into()));
        }
        Ok(Self(bridge))
    }

    pub fn bridge(&self) -> &LatticeBridge {
        &self.0
    }

    pub fn into_bridge(self) -> LatticeBridge {
        self.0
    }

    pub fn values(&self) -> &[i64] {
        self.0.values()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl TryFrom<Vec<i64>> for FirstPassageBridge {
    type Error = Error;
    fn try_from(values: Vec<i64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<FirstPassageBridge> for Vec<i64> {
    fn from(b: FirstPassageBridge) -> Self {
        b.0.into()
    }
}

/// A lattice path from `0` to `-k` with `1 <= k <= n`; codes a marked cyclic
/// forest with `k` trees.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct CodingWalk {
    path: LatticePath,
    depth: usize,
}

impl CodingWalk {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        Self::from_path(LatticePath::new(values)?)
    }

    pub fn from_path(path: LatticePath) -> Result<Self> {
        let end = path.end();
        if end >= 0 {
            return Err(Error::NotAWalk(end));
        }
        let depth = (-end) as usize;
        debug_assert!(depth <= path.len());
        Ok(Self { path, depth })
    }

    /// `W(j) = sum_{i <= j} (c_i - 1)`.
    pub fn from_degrees(degrees: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(degrees.len() + 1);
        let mut acc = 0i64;
        values.push(0);
        for &d in degrees {
            acc += d as i64 - 1;
            values.push(acc);
        }
        if acc >= 0 {
            return Err(Error::NotAWalk(acc));
        }
        Ok(Self {
            depth: (-acc) as usize,
            path: LatticePath { values },
        })
    }

    /// Terminal depth `k = -W(n)`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn values(&self) -> &[i64] {
        self.path.values()
    }

    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn path(&self) -> &LatticePath {
        &self.path
    }

    /// Degrees `increment + 1` in walk order.
    pub fn degrees(&self) -> Vec<usize> {
        self.path.increments().map(|d| (d + 1) as usize).collect()
    }

    /// First time the walk is at or below `level` (`level < 0`).
    pub fn hitting_time(&self, level: i64) -> Option<usize> {
        self.values().iter().position(|&w| w <= level)
    }

    /// Indices `tau(-1), ..., tau(-k)` of the first visits to each negative
    /// level, computed in one pass.
    pub fn passage_times(&self) -> Vec<usize> {
        passage_times(self.values(), self.depth)
    }

    /// Splits the walk at the first visits to `-1, ..., -(k-1)`: `k - 1`
    /// first-passage bridges followed by the remaining lattice bridge.
    pub fn split_at_passage_times(&self) -> PassageSplit {
        let w = self.values();
        let times = self.passage_times();
        let segment = |from: usize, to: usize| -> Vec<i64> { w[from..=to].iter().map(|&x| x - w[from]).collect() };
        let mut start = 0;
        let mut trees = Vec::with_capacity(self.depth - 1);
        for &t in &times[..self.depth - 1] {
            let values = segment(start, t);
            trees.push(FirstPassageBridge(LatticeBridge(LatticePath { values })));
            start = t;
        }
        let last = LatticeBridge(LatticePath {
            values: segment(start, self.len()),
        });
        PassageSplit { trees, last }
    }

    /// Concatenates first-passage bridges and a final lattice bridge into a
    /// coding walk; inverse of [`Self::split_at_passage_times`].
    pub fn concatenate(trees: &[FirstPassageBridge], last: &LatticeBridge) -> CodingWalk {
        let mut values = vec![0i64];
        let mut offset = 0i64;
        for seg in trees.iter().map(|t| t.values()).chain(std::iter::once(last.values())) {
            values.extend(seg[1..].iter().map(|&x| x + offset));
            offset = values[values.len() - 1];
        }
        let depth = (-offset) as usize;
        CodingWalk {
            path: LatticePath { values },
            depth,
        }
    }
}

impl TryFrom<Vec<i64>> for CodingWalk {
    type Error = Error;
    fn try_from(values: Vec<i64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<CodingWalk> for Vec<i64> {
    fn from(w: CodingWalk) -> Self {
        w.path.values
    }
}

/// First indices at which `values` reaches `-1, -2, ..., -depth`.
pub(crate) fn passage_times(values: &[i64], depth: usize) -> Vec<usize> {
    let mut times = Vec::with_capacity(depth);
    if depth == 0 {
        return times;
    }
    let mut next = -1i64;
    for (i, &w) in values.iter().enumerate() {
        // Steps go down by at most one, so levels are reached in order.
        if w == next {
            times.push(i);
            if times.len() == depth {
                break;
            }
            next -= 1;
        }
    }
    times
}

/// Output of [`CodingWalk::split_at_passage_times`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassageSplit {
    pub trees: Vec<FirstPassageBridge>,
    pub last: LatticeBridge,
}

impl PassageSplit {
    /// All `k` segments as lattice bridges, in walk order.
    pub fn segments(&self) -> Vec<LatticeBridge> {
        self.trees
            .iter()
            .map(|t| t.bridge().clone())
            .chain(std::iter::once(self.last.clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bridge(v: &[i64]) -> LatticeBridge {
        LatticeBridge::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rejects_malformed_paths() {
        assert!(LatticePath::new(vec![]).is_err());
        assert!(LatticePath::new(vec![1, 0]).is_err());
        assert!(LatticePath::new(vec![0, -2]).is_err());
        assert!(LatticeBridge::new(vec![0]).is_err());
        assert!(LatticeBridge::new(vec![0, 1]).is_err());
        assert!(FirstPassageBridge::new(vec![0, -1, -1]).is_err());
    }

    #[test]
    fn walk_from_degree_examples() {
        let w = CodingWalk::from_degrees(&[0, 0, 0, 1, 1, 3]).unwrap();
        assert_eq!(w.values(), &[0, -1, -2, -3, -3, -3, -1]);
        assert_eq!(w.depth(), 1);
        let w = CodingWalk::from_degrees(&[0]).unwrap();
        assert_eq!((w.values(), w.depth()), (&[0, -1][..], 1));
        let w = CodingWalk::from_degrees(&[2, 0, 0]).unwrap();
        assert_eq!((w.values(), w.depth()), (&[0, 1, 0, -1][..], 1));
        assert_eq!(CodingWalk::from_degrees(&[2, 0, 1]), Err(Error::NotAWalk(0)));
        assert_eq!(CodingWalk::from_degrees(&[]), Err(Error::NotAWalk(0)));
    }

    #[test]
    fn cyclic_shift_examples() {
        let b = bridge(&[0, -1, -1, -2, -1, 1, 0, -1]);
        assert_eq!(b.cyclic_shift(3).values(), &[0, 1, 3, 2, 1, 0, 0, -1]);
        assert_eq!(b.cyclic_shift(7), b);
        assert_eq!(bridge(&[0, -1]).cyclic_shift(1), bridge(&[0, -1]));
    }

    #[test]
    fn rotation_index_examples() {
        assert_eq!(bridge(&[0, -1, -1, -2, -1, 1, 0, -1]).rotation_index(), 3);
        assert_eq!(bridge(&[0, -1]).rotation_index(), 1);
        assert_eq!(bridge(&[0, 1, 0, -1]).rotation_index(), 3);
    }

    #[test]
    fn first_passage_examples() {
        assert!(is_first_passage(&LatticePath::new(vec![0, 1, 0, -1]).unwrap()));
        assert!(!is_first_passage(&LatticePath::new(vec![0, -1, -1]).unwrap()));
        assert!(is_first_passage(&LatticePath::new(vec![0, 1, 3, 2, 1, 0, 0, -1]).unwrap()));
        assert!(!is_first_passage(&LatticePath::new(vec![0, 1]).unwrap()));
    }

    #[test]
    fn split_examples() {
        let w = CodingWalk::new(vec![0, -1, -2, -3, -3, -3, -1]).unwrap();
        let split = w.split_at_passage_times();
        assert!(split.trees.is_empty());
        assert_eq!(split.last.values(), w.values());

        let w = CodingWalk::new(vec![0, -1, 0, -1, -2]).unwrap();
        let split = w.split_at_passage_times();
        assert_eq!(split.trees.len(), 1);
        assert_eq!(split.trees[0].values(), &[0, -1]);
        assert_eq!(split.last.values(), &[0, 1, 0, -1]);
        assert_eq!(CodingWalk::concatenate(&split.trees, &split.last), w);

        let w = CodingWalk::new(vec![0, -1, -2]).unwrap();
        let segs = w.split_at_passage_times().segments();
        assert_eq!(segs, vec![bridge(&[0, -1]), bridge(&[0, -1])]);
    }

    #[test]
    fn json_shapes() {
        let b = bridge(&[0, 1, 0, -1]);
        assert_eq!(serde_json::to_string(&b).unwrap(), "[0,1,0,-1]");
        assert!(serde_json::from_str::<FirstPassageBridge>("[0,-1,-1]").is_err());
        assert!(serde_json::from_str::<LatticeBridge>("[0,0]").is_err());
        assert!(serde_json::from_str::<CodingWalk>("[0,-1,-1]").is_ok());
        assert_eq!(b.path().to_csv(), "i,value\n0,0\n1,1\n2,0\n3,-1\n");
    }
}
