//! Systems of nonlinear recursive equations (SNREs) for block counts.
//!
//! Row `i` of an SNRE of degree `(d, k)` is a polynomial
//! `F_i = sum r * a_1^{c_1} ... a_k^{c_k}` with `c_1 + ... + c_k = d`, and
//! the sequence is `a_{i;n} = F_i(a_{.;n-1})`. A reduced system keeps exactly
//! one monomial per row; its exponent vectors form the weighted adjacency matrix.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{check_cap, Error, Result};
use crate::treeshift::MarkovTreeShift;

/// Default cap on the number of reduced systems enumerated.
pub const DEFAULT_REDUCED_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub coefficient: u64,
    pub exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(coefficient: u64, exponents: impl Into<Vec<u32>>) -> Self {
        Monomial {
            coefficient,
            exponents: exponents.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snre {
    degree: usize,
    rows: Vec<Vec<Monomial>>,
    init: Vec<u64>,
}

impl Snre {
    /// Validates and canonicalizes: rows are sorted by exponent vector,
    /// lexicographically descending.
    pub fn new(degree: usize, rows: Vec<Vec<Monomial>>, init: Vec<u64>) -> Result<Self> {
        let k = rows.len();
        if init.len() != k {
            return Err(Error::Parse(format!("expected {k} initial values, got {}", init.len())));
        }
        if init.contains(&0) {
            return Err(Error::Parse("initial values must be positive".into()));
        }
        let mut canon = Vec::with_capacity(k);
        for (i, row) in rows.into_iter().enumerate() {
            let mut seen = BTreeMap::new();
            for m in row {
                if m.exponents.len() != k {
                    return Err(Error::Parse(format!("row {i}: exponent vector length must be {k}")));
                }
                if m.exponents.iter().map(|&c| c as usize).sum::<usize>() != degree {
                    return Err(Error::Parse(format!("row {i}: exponents must sum to d = {degree}")));
                }
                if m.coefficient == 0 {
                    return Err(Error::Parse(format!("row {i}: coefficients must be positive")));
                }
                if seen.insert(m.exponents.clone(), m.coefficient).is_some() {
                    return Err(Error::Parse(format!("row {i}: repeated exponent vector")));
                }
            }
            canon.push(
                seen.into_iter()
                    .rev()
                    .map(|(c, r)| Monomial::new(r, c))
                    .collect(),
            );
        }
        Ok(Snre {
            degree,
            rows: canon,
            init,
        })
    }

    /// Groups the allowed blocks rooted at each symbol by the multiset of
    /// their children; the coefficient is the number of ordered blocks
    /// sharing that multiset.
    pub fn from_tsft(x: &MarkovTreeShift) -> Snre {
        let k = x.num_symbols();
        let rows = (0..k)
            .map(|i| {
                let mut counts: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
                for b in x.blocks_rooted_at(i) {
                    let mut exps = vec![0u32; k];
                    for &c in &b.children {
                        exps[c] += 1;
                    }
                    *counts.entry(exps).or_default() += 1;
                }
                counts.into_iter().map(|(c, r)| Monomial::new(r, c)).collect()
            })
            .collect();
        Snre::new(x.degree(), rows, vec![1; k]).expect("tree-shift blocks form a valid system")
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_symbols(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Monomial>] {
        &self.rows
    }

    pub fn init(&self) -> &[u64] {
        &self.init
    }

    /// Values `a_{i;n}` for `n = 1..=levels`.
    pub fn evaluate(&self, levels: usize) -> Vec<Vec<BigUint>> {
        let mut out: Vec<Vec<BigUint>> = vec![self.init.iter().map(|&v| BigUint::from(v)).collect()];
        for _ in 1..levels {
            let prev = out.last().expect("at least one level");
            let next = self
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|m| {
                            m.exponents
                                .iter()
                                .enumerate()
                                .fold(BigUint::from(m.coefficient), |acc, (j, &c)| acc * prev[j].pow(c))
                        })
                        .sum()
                })
                .collect();
            out.push(next);
        }
        out
    }

    pub fn indicator_matrix(&self) -> IndicatorMatrix {
        let columns = compositions(self.num_symbols(), self.degree);
        let entries = self
            .rows
            .iter()
            .map(|row| {
                columns
                    .iter()
                    .map(|col| {
                        row.iter()
                            .find(|m| &m.exponents == col)
                            .map_or(0, |m| m.coefficient)
                    })
                    .collect()
            })
            .collect();
        IndicatorMatrix { columns, entries }
    }

    /// Number of reduced systems: the product of row lengths.
    pub fn reduced_count(&self) -> u128 {
        self.rows
            .iter()
            .fold(1u128, |acc, r| acc.saturating_mul(r.len() as u128))
    }

    /// Every reduced system, in lexicographic order of the selection vector.
    pub fn enumerate_reduced(&self, cap: u128) -> Result<ReducedIter<'_>> {
        check_cap("reduced systems", self.reduced_count(), cap)?;
        let radices: Vec<usize> = self.rows.iter().map(Vec::len).collect();
        let start = if radices.contains(&0) {
            None
        } else {
            Some(vec![0; radices.len()])
        };
        Ok(ReducedIter {
            parent: self,
            radices,
            next: start,
        })
    }

    /// The reduced system picking monomial `selection[i]` in row `i`.
    pub fn reduced(&self, selection: Vec<usize>) -> Result<ReducedSnre<'_>> {
        if selection.len() != self.num_symbols()
            || selection.iter().zip(&self.rows).any(|(&s, row)| s >= row.len())
        {
            return Err(Error::InvalidInput("selection out of range".into()));
        }
        Ok(ReducedSnre {
            parent: self,
            selection,
        })
    }

    pub fn to_doc(&self) -> SnreDoc {
        SnreDoc {
            d: self.degree,
            k: self.num_symbols(),
            rows: self
                .rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|m| TermDoc {
                            r: m.coefficient,
                            c: m.exponents.clone(),
                        })
                        .collect()
                })
                .collect(),
            init: self.init.clone(),
        }
    }

    pub fn from_json(text: &str) -> Result<Snre> {
        let doc: SnreDoc = serde_json::from_str(text)?;
        doc.into_snre()
    }
}

/// Serialized form `{d, k, rows: [[{r, c: [...]}, ...], ...], init: [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnreDoc {
    pub d: usize,
    pub k: usize,
    pub rows: Vec<Vec<TermDoc>>,
    #[serde(default)]
    pub init: Vec<u64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc {
    pub r: u64,
    pub c: Vec<u32>,
}

impl SnreDoc {
    pub fn into_snre(self) -> Result<Snre> {
        if self.rows.len() != self.k {
            return Err(Error::Parse(format!("expected {} rows, got {}", self.k, self.rows.len())));
        }
        let init = if self.init.is_empty() { vec![1; self.k] } else { self.init };
        let rows = self
            .rows
            .into_iter()
            .map(|row| row.into_iter().map(|t| Monomial::new(t.r, t.c)).collect())
            .collect();
        Snre::new(self.d, rows, init)
    }
}

/// Coefficient matrix of an SNRE over all degree-`d` exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndicatorMatrix {
    columns: Vec<Vec<u32>>,
    entries: Vec<Vec<u64>>,
}

impl IndicatorMatrix {
    /// Column labels: exponent vectors, lexicographically descending.
    pub fn columns(&self) -> &[Vec<u32>] {
        &self.columns
    }

    pub fn entries(&self) -> &[Vec<u64>] {
        &self.entries
    }

    /// Entrywise `self <= other` over identical column sets.
    pub fn dominated_by(&self, other: &IndicatorMatrix) -> bool {
        self.columns == other.columns
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x <= y))
    }

    /// Rebuilds the system (with unit initial values) from the matrix.
    pub fn to_snre(&self) -> Result<Snre> {
        let degree = self.columns.first().map_or(0, |c| c.iter().sum::<u32>() as usize);
        let rows = self
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&self.columns)
                    .filter(|(&r, _)| r > 0)
                    .map(|(&r, c)| Monomial::new(r, c.clone()))
                    .collect()
            })
            .collect();
        Snre::new(degree, rows, vec![1; self.entries.len()])
    }
}

/// All vectors of `k` nonnegative integers summing to `d`, lexicographically descending.
pub fn compositions(k: usize, d: usize) -> Vec<Vec<u32>> {
    fn rec(k: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == k {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in (0..=left).rev() {
            prefix.push(c);
            rec(k, left - c, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        rec(k, d as u32, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// One monomial per row of the parent system, with coefficient forced to 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedSnre<'a> {
    parent: &'a Snre,
    selection: Vec<usize>,
}

impl<'a> ReducedSnre<'a> {
    pub fn parent(&self) -> &'a Snre {
        self.parent
    }

    /// Index of the chosen monomial within each parent row.
    pub fn selection(&self) -> &[usize] {
        &self.selection
    }

    pub fn selected_exponents(&self, row: usize) -> &'a [u32] {
        &self.parent.rows[row][self.selection[row]].exponents
    }

    /// The reduced system as a standalone SNRE (unit coefficients, parent's initial values).
    pub fn as_snre(&self) -> Snre {
        let rows = (0..self.selection.len())
            .map(|i| vec![Monomial::new(1, self.selected_exponents(i).to_vec())])
            .collect();
        Snre::new(self.parent.degree, rows, self.parent.init.clone()).expect("selection of a valid system")
    }

    pub fn indicator_matrix(&self) -> IndicatorMatrix {
        self.as_snre().indicator_matrix()
    }

    /// `M(i, j)` = exponent of symbol `j` in the monomial kept for row `i`.
    pub fn weighted_adjacency(&self) -> WeightedAdjacency {
        WeightedAdjacency {
            entries: (0..self.selection.len())
                .map(|i| self.selected_exponents(i).to_vec())
                .collect(),
        }
    }
}

pub struct ReducedIter<'a> {
    parent: &'a Snre,
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl<'a> Iterator for ReducedIter<'a> {
    type Item = ReducedSnre<'a>;

    fn next(&mut self) -> Option<Self::Item> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut pos = succ.len();
        while pos > 0 {
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < self.radices[pos] {
                self.next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(ReducedSnre {
            parent: self.parent,
            selection: cur,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightedAdjacency {
    entries: Vec<Vec<u32>>,
}

impl WeightedAdjacency {
    pub fn entries(&self) -> &[Vec<u32>] {
        &self.entries
    }

    pub fn row_sums(&self) -> Vec<u32> {
        self.entries.iter().map(|r| r.iter().sum()).collect()
    }

    /// Principal submatrix on the rows/columns flagged in `keep`.
    pub fn principal_submatrix(&self, keep: &[bool]) -> Vec<Vec<u32>> {
        self.entries
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(row, _)| row.iter().zip(keep).filter(|(_, &k)| k).map(|(&v, _)| v).collect())
            .collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|&v| v as f64).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treeshift::count_blocks;

    fn example_system() -> Snre {
        Snre::new(
            2,
            vec![
                vec![Monomial::new(1, [2, 0]), Monomial::new(1, [0, 2])],
                vec![Monomial::new(2, [1, 1])],
            ],
            vec![1, 1],
        )
        .unwrap()
    }

    fn golden_mean() -> MarkovTreeShift {
        MarkovTreeShift::from_named(
            2,
            &["0", "1"],
            &[
                ("1", &["0", "0"]),
                ("0", &["0", "0"]),
                ("0", &["0", "1"]),
                ("0", &["1", "0"]),
                ("0", &["1", "1"]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn golden_mean_system() {
        let f = Snre::from_tsft(&golden_mean());
        // gamma_0 = g0^2 + 2 g0 g1 + g1^2 ; gamma_1 = g0^2
        assert_eq!(
            f.rows()[0],
            vec![Monomial::new(1, [2, 0]), Monomial::new(2, [1, 1]), Monomial::new(1, [0, 2])]
        );
        assert_eq!(f.rows()[1], vec![Monomial::new(1, [2, 0])]);
    }

    #[test]
    fn full_shift_is_binomial() {
        let f = Snre::from_tsft(&MarkovTreeShift::full(&["a", "b"], 2).unwrap());
        let im = f.indicator_matrix();
        assert_eq!(im.entries(), &[vec![1, 2, 1], vec![1, 2, 1]]);
        assert_eq!(f.enumerate_reduced(DEFAULT_REDUCED_CAP).unwrap().count(), 9);
    }

    #[test]
    fn example_indicator_matrix() {
        let im = example_system().indicator_matrix();
        assert_eq!(im.columns(), &[vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(im.entries(), &[vec![1, 0, 1], vec![0, 2, 0]]);
        assert_eq!(im.to_snre().unwrap(), example_system());
    }

    #[test]
    fn example_reduction() {
        let f = example_system();
        let all: Vec<_> = f.enumerate_reduced(DEFAULT_REDUCED_CAP).unwrap().collect();
        assert_eq!(all.len(), 2);
        let e = &all[0];
        assert_eq!(e.indicator_matrix().entries(), &[vec![1, 0, 0], vec![0, 1, 0]]);
        assert!(e.indicator_matrix().dominated_by(&f.indicator_matrix()));
        assert_eq!(e.weighted_adjacency().entries(), &[vec![2, 0], vec![1, 1]]);
    }

    #[test]
    fn single_monomial_rows_reduce_uniquely() {
        let f = Snre::new(3, vec![vec![Monomial::new(4, [3, 0])], vec![Monomial::new(1, [1, 2])]], vec![1, 1]).unwrap();
        assert_eq!(f.indicator_matrix().entries().iter().map(|r| r.iter().filter(|&&v| v > 0).count()).collect::<Vec<_>>(), vec![1, 1]);
        let all: Vec<_> = f.enumerate_reduced(10).unwrap().collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].weighted_adjacency().entries(), &[vec![3, 0], vec![1, 2]]);
    }

    #[test]
    fn reduction_cap() {
        let f = Snre::from_tsft(&MarkovTreeShift::full(&["a", "b"], 2).unwrap());
        assert!(matches!(f.enumerate_reduced(8), Err(Error::CapExceeded { requested: 9, .. })));
    }

    #[test]
    fn evaluation_reproduces_counts() {
        let gm = golden_mean();
        let f = Snre::from_tsft(&gm);
        let exact = count_blocks(&gm, 6, 1_000_000).unwrap();
        for (n, level) in f.evaluate(6).iter().enumerate() {
            assert_eq!(level.as_slice(), exact.level(n + 1));
        }
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(Snre::new(2, vec![vec![Monomial::new(1, [1, 0])]], vec![1]).is_err());
        assert!(Snre::new(2, vec![vec![Monomial::new(1, [2]), Monomial::new(3, [2])]], vec![1]).is_err());
        assert!(Snre::new(2, vec![vec![Monomial::new(0, [2])]], vec![1]).is_err());
    }

    #[test]
    fn document_round_trip() {
        let f = example_system();
        let text = serde_json::to_string(&f.to_doc()).unwrap();
        assert_eq!(Snre::from_json(&text).unwrap(), f);
    }

    #[test]
    fn composition_order() {
        assert_eq!(compositions(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(compositions(3, 3).len(), 10);
        assert_eq!(compositions(3, 1), vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn adjacency_rows_sum_to_degree() {
        let f = Snre::from_tsft(&MarkovTreeShift::full(&["a", "b", "c"], 3).unwrap());
        for e in f.enumerate_reduced(u128::MAX).unwrap().take(500) {
            assert!(e.weighted_adjacency().row_sums().iter().all(|&s| s == 3));
        }
    }
}
