use std::collections::HashMap;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TupleStats {
    pub count: u64,
    pub sum: f64,
}

impl TupleStats {
    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }
}

/// Fitness statistics for every 1-tuple, every 2-tuple and the full tuple of
/// dimensions, keyed by the value indices the tuple picks out of a point.
#[derive(Clone, Debug, PartialEq)]
pub struct LandscapeModel {
    tuples: Vec<Vec<usize>>,
    tables: Vec<HashMap<Vec<usize>, TupleStats>>,
    total: u64,
}

impl LandscapeModel {
    pub fn new(dims: usize) -> LandscapeModel {
        Self::with_pairs(dims, true)
    }

    /// Like [`LandscapeModel::new`], with the 2-tuples only when `pairs` is set.
    pub fn with_pairs(dims: usize, pairs: bool) -> LandscapeModel {
        let mut tuples: Vec<Vec<usize>> = (0..dims).map(|d| vec![d]).collect();
        for a in 0..dims * usize::from(pairs) {
            for b in a + 1..dims {
                tuples.push(vec![a, b]);
            }
        }
        if dims > 2 {
            tuples.push((0..dims).collect());
        }
        let tables = vec![HashMap::new(); tuples.len()];
        LandscapeModel { tuples, tables, total: 0 }
    }

    pub fn tuples(&self) -> &[Vec<usize>] {
        &self.tuples
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    fn key(tuple: &[usize], point: &[usize]) -> Vec<usize> {
        tuple.iter().map(|&d| point[d]).collect()
    }

    pub fn add(&mut self, point: &[usize], fitness: f64) {
        for (t, table) in self.tuples.iter().zip(&mut self.tables) {
            let s = table.entry(Self::key(t, point)).or_default();
            s.count += 1;
            s.sum += fitness;
        }
        self.total += 1;
    }

    pub fn stats(&self, tuple_index: usize, point: &[usize]) -> TupleStats {
        let key = Self::key(&self.tuples[tuple_index], point);
        self.tables[tuple_index].get(&key).copied().unwrap_or_default()
    }

    /// Mean over tuples of the tuple's mean fitness plus the exploration bonus
    /// `c * sqrt(ln(total + 1) / (visits + epsilon))`. Unvisited tuples give
    /// only the bonus, at its largest.
    pub fn estimate(&self, point: &[usize], c: f64, epsilon: f64) -> f64 {
        let log_total = ((self.total + 1) as f64).ln();
        let sum: f64 = (0..self.tuples.len())
            .map(|i| {
                let s = self.stats(i, point);
                let bonus = c * (log_total / (s.count as f64 + epsilon)).sqrt();
                if s.count == 0 {
                    bonus
                } else {
                    s.mean() + bonus
                }
            })
            .sum();
        sum / self.tuples.len() as f64
    }

    /// Every populated table entry as (tuple, value indices, stats), sorted.
    pub fn entries(&self) -> Vec<(Vec<usize>, Vec<usize>, TupleStats)> {
        let mut out = Vec::new();
        for (t, table) in self.tuples.iter().zip(&self.tables) {
            let mut rows: Vec<_> = table.iter().collect();
            rows.sort_by(|a, b| a.0.cmp(b.0));
            for (k, s) in rows {
                out.push((t.clone(), k.clone(), *s));
            }
        }
        out
    }
}
