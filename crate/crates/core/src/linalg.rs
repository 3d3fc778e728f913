//! Sparse row reduction over coefficient maps.

use std::collections::BTreeMap;

use num_complex::Complex64;

const PIVOT_EPS: f64 = 1e-10;

/// Incremental echelon basis for the span of sparse vectors keyed by `K`.
///
/// Each stored row has its pivot at its smallest key with coefficient 1,
/// so reducing a vector only ever touches keys at or after the pivot.
#[derive(Debug, Clone)]
pub struct SparseSpan<K: Ord + Clone> {
    rows: BTreeMap<K, BTreeMap<K, Complex64>>,
    seen: Vec<BTreeMap<K, Complex64>>,
}

impl<K: Ord + Clone> Default for SparseSpan<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Ord + Clone> SparseSpan<K> {
    pub fn new() -> Self {
        Self {
            rows: BTreeMap::new(),
            seen: Vec::new(),
        }
    }

    /// Eliminates every stored pivot from `v`. The smallest pivot key still
    /// present strictly increases, so this terminates.
    fn reduce(&self, v: &BTreeMap<K, Complex64>) -> BTreeMap<K, Complex64> {
        let scale = v.values().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
        let tol = PIVOT_EPS * scale;
        let mut r: BTreeMap<K, Complex64> = v
            .iter()
            .filter(|(_, c)| c.norm() > tol)
            .map(|(k, c)| (k.clone(), *c))
            .collect();
        while let Some(key) = r.keys().find(|k| self.rows.contains_key(*k)).cloned() {
            let coeff = r[&key];
            for (k, c) in &self.rows[&key] {
                let e = r.entry(k.clone()).or_default();
                *e -= coeff * c;
                if e.norm() <= tol {
                    r.remove(k);
                }
            }
            r.remove(&key);
        }
        r
    }

    /// Adds `v` to the span; returns `true` when it was independent.
    pub fn insert(&mut self, v: &BTreeMap<K, Complex64>) -> bool {
        self.seen.push(v.clone());
        let r = self.reduce(v);
        let Some((pivot, lead)) = r.iter().next().map(|(k, c)| (k.clone(), *c)) else {
            return false;
        };
        let row = r.into_iter().map(|(k, c)| (k, c / lead)).collect();
        self.rows.insert(pivot, row);
        true
    }

    pub fn contains(&self, v: &BTreeMap<K, Complex64>) -> bool {
        self.reduce(v).is_empty()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Every vector passed to [`SparseSpan::insert`], in order.
    pub fn vectors(&self) -> &[BTreeMap<K, Complex64>] {
        &self.seen
    }
}
