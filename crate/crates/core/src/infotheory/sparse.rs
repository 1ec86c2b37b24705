//! Weighted joints over interned symbols, for alphabets too large to grid.

use std::collections::HashMap;
use std::hash::Hash;

use indexmap::IndexSet;

/// Assigns dense ids to symbols in first-seen order.
#[derive(Debug, Clone)]
pub struct Interner<K: Hash + Eq> {
    set: IndexSet<K>,
}

impl<K: Hash + Eq> Default for Interner<K> {
    fn default() -> Self {
        Interner {
            set: IndexSet::new(),
        }
    }
}

impl<K: Hash + Eq> Interner<K> {
    pub fn id(&mut self, key: K) -> usize {
        self.set.insert_full(key).0
    }

    pub fn len(&self) -> usize {
        self.set.len()
    }

    pub fn is_empty(&self) -> bool {
        self.set.is_empty()
    }
}

/// Nonnegative weights over `(a, b, c)` triples. Weights need not be
/// normalized; every measure divides by the total.
#[derive(Debug, Clone, Default)]
pub struct SparseJoint {
    cells: HashMap<(usize, usize, usize), f64>,
}

impl SparseJoint {
    pub fn new() -> Self {
        SparseJoint::default()
    }

    pub fn add(&mut self, a: usize, b: usize, c: usize, weight: f64) {
        *self.cells.entry((a, b, c)).or_insert(0.0) += weight;
    }

    pub fn add_pair(&mut self, a: usize, b: usize, weight: f64) {
        self.add(a, b, 0, weight);
    }

    /// Cell-wise addition.
    pub fn merge(&mut self, other: &SparseJoint) {
        for (&k, &w) in &other.cells {
            *self.cells.entry(k).or_insert(0.0) += w;
        }
    }

    pub fn total(&self) -> f64 {
        self.sorted_cells().iter().map(|(_, w)| w).sum()
    }

    /// Number of occupied cells in the (A, B) marginal and each of A, B.
    pub fn occupied(&self) -> (usize, usize, usize) {
        let mut ab = std::collections::HashSet::new();
        let mut a = std::collections::HashSet::new();
        let mut b = std::collections::HashSet::new();
        for (&(x, y, _), &w) in &self.cells {
            if w > 0.0 {
                ab.insert((x, y));
                a.insert(x);
                b.insert(y);
            }
        }
        (ab.len(), a.len(), b.len())
    }

    fn sorted_cells(&self) -> Vec<((usize, usize, usize), f64)> {
        let mut cells: Vec<_> = self
            .cells
            .iter()
            .filter(|(_, &w)| w > 0.0)
            .map(|(&k, &w)| (k, w))
            .collect();
        cells.sort_unstable_by_key(|&(k, _)| k);
        cells
    }

    /// I(A; B), marginalizing C.
    pub fn mutual_information(&self) -> f64 {
        let cells = self.sorted_cells();
        let total: f64 = cells.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            return 0.0;
        }
        let mut ab: HashMap<(usize, usize), f64> = HashMap::new();
        let mut pa: HashMap<usize, f64> = HashMap::new();
        let mut pb: HashMap<usize, f64> = HashMap::new();
        for &((a, b, _), w) in &cells {
            *ab.entry((a, b)).or_insert(0.0) += w;
            *pa.entry(a).or_insert(0.0) += w;
            *pb.entry(b).or_insert(0.0) += w;
        }
        let mut ab: Vec<_> = ab.into_iter().collect();
        ab.sort_unstable_by_key(|&(k, _)| k);
        let mi: f64 = ab
            .iter()
            .map(|&((a, b), w)| w * (w * total / (pa[&a] * pb[&b])).ln())
            .sum::<f64>()
            / total;
        mi.max(0.0)
    }

    /// I(A; B | C).
    pub fn conditional_mutual_information(&self) -> f64 {
        let cells = self.sorted_cells();
        let total: f64 = cells.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            return 0.0;
        }
        let mut pc: HashMap<usize, f64> = HashMap::new();
        let mut pac: HashMap<(usize, usize), f64> = HashMap::new();
        let mut pbc: HashMap<(usize, usize), f64> = HashMap::new();
        for &((a, b, c), w) in &cells {
            *pc.entry(c).or_insert(0.0) += w;
            *pac.entry((a, c)).or_insert(0.0) += w;
            *pbc.entry((b, c)).or_insert(0.0) += w;
        }
        let cmi: f64 = cells
            .iter()
            .map(|&((a, b, c), w)| w * (w * pc[&c] / (pac[&(a, c)] * pbc[&(b, c)])).ln())
            .sum::<f64>()
            / total;
        cmi.max(0.0)
    }
}
