//! Markov tree-shifts on rooted d-ary Cayley trees.
//!
//! A Markov tree-shift is fixed by the set of allowed two-blocks: a root symbol
//! together with the ordered labels of its `d` children. Everything downstream
//! (block counts, recursive systems, entropy) works on symbol indices into the
//! [`Alphabet`], so the alphabet order defines all vector and matrix indexing.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_cap, Error, Result};

/// Default cap on brute-force enumeration candidates.
pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;
/// Default budget (decimal digits) for exact block counts.
pub const DEFAULT_DIGIT_BUDGET: u64 = 1_000_000;
/// Cap on the number of two-blocks materialized when complementing a forbidden set.
pub const TWO_BLOCK_CAP: u128 = 10_000_000;

const LOG10_2: f64 = std::f64::consts::LOG10_2;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(Error::Parse(format!("duplicate symbol {s:?}")));
            }
        }
        Ok(Alphabet { symbols })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, s: &str) -> Option<usize> {
        self.symbols.iter().position(|x| x == s)
    }
}

/// A root symbol with its ordered children `g_1 .. g_d`, as alphabet indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TwoBlock {
    pub root: usize,
    pub children: Vec<usize>,
}

impl TwoBlock {
    pub fn new(root: usize, children: impl Into<Vec<usize>>) -> Self {
        TwoBlock {
            root,
            children: children.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovTreeShift {
    alphabet: Alphabet,
    degree: usize,
    allowed: BTreeSet<TwoBlock>,
}

impl MarkovTreeShift {
    pub fn new(
        alphabet: Alphabet,
        degree: usize,
        allowed: impl IntoIterator<Item = TwoBlock>,
    ) -> Result<Self> {
        if degree == 0 {
            return Err(Error::InvalidInput("degree d must be at least 1".into()));
        }
        let k = alphabet.len();
        let mut set = BTreeSet::new();
        for b in allowed {
            if b.children.len() != degree {
                return Err(Error::Parse(format!(
                    "two-block has {} children, expected {degree}",
                    b.children.len()
                )));
            }
            if b.root >= k || b.children.iter().any(|&c| c >= k) {
                return Err(Error::Parse("two-block references unknown symbol".into()));
            }
            set.insert(b);
        }
        Ok(MarkovTreeShift {
            alphabet,
            degree,
            allowed: set,
        })
    }

    /// Builds the shift whose allowed set is the complement of `forbidden`.
    pub fn from_forbidden(
        alphabet: Alphabet,
        degree: usize,
        forbidden: impl IntoIterator<Item = TwoBlock>,
    ) -> Result<Self> {
        let empty = MarkovTreeShift::new(alphabet, degree, std::iter::empty())?;
        let forbidden = MarkovTreeShift::new(empty.alphabet.clone(), degree, forbidden)?.allowed;
        let allowed: Vec<TwoBlock> = empty
            .all_two_blocks()?
            .into_iter()
            .filter(|b| !forbidden.contains(b))
            .collect();
        MarkovTreeShift::new(empty.alphabet, degree, allowed)
    }

    /// Convenience constructor from symbol names, e.g. `("1", &["0", "0"])`.
    pub fn from_named(degree: usize, symbols: &[&str], blocks: &[(&str, &[&str])]) -> Result<Self> {
        let alphabet = Alphabet::new(symbols.iter().copied())?;
        let lookup = |s: &str| {
            alphabet
                .index_of(s)
                .ok_or_else(|| Error::Parse(format!("unknown symbol {s:?}")))
        };
        let mut allowed = Vec::with_capacity(blocks.len());
        for (root, children) in blocks {
            let children = children.iter().map(|c| lookup(c)).collect::<Result<Vec<_>>>()?;
            allowed.push(TwoBlock::new(lookup(root)?, children));
        }
        MarkovTreeShift::new(alphabet, degree, allowed)
    }

    /// The full shift: every two-block allowed.
    pub fn full(symbols: &[&str], degree: usize) -> Result<Self> {
        let alphabet = Alphabet::new(symbols.iter().copied())?;
        let shell = MarkovTreeShift::new(alphabet, degree, std::iter::empty())?;
        let all = shell.all_two_blocks()?;
        MarkovTreeShift::new(shell.alphabet, degree, all)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_symbols(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphabet.is_empty()
    }

    pub fn allowed(&self) -> &BTreeSet<TwoBlock> {
        &self.allowed
    }

    pub fn is_allowed(&self, block: &TwoBlock) -> bool {
        self.allowed.contains(block)
    }

    /// Allowed blocks rooted at symbol `i`, in canonical order.
    pub fn blocks_rooted_at(&self, i: usize) -> impl Iterator<Item = &TwoBlock> {
        let lo = TwoBlock::new(i, Vec::new());
        self.allowed.range(lo..).take_while(move |b| b.root == i)
    }

    /// All `k * k^d` two-blocks in canonical order.
    pub fn all_two_blocks(&self) -> Result<Vec<TwoBlock>> {
        let k = self.num_symbols();
        let total = (k as u128).saturating_pow(self.degree as u32 + 1);
        check_cap("two-block universe", total, TWO_BLOCK_CAP)?;
        let mut out = Vec::with_capacity(total as usize);
        for root in 0..k {
            for children in odometer(k, self.degree) {
                out.push(TwoBlock::new(root, children));
            }
        }
        Ok(out)
    }

    pub fn forbidden(&self) -> Result<Vec<TwoBlock>> {
        Ok(self
            .all_two_blocks()?
            .into_iter()
            .filter(|b| !self.allowed.contains(b))
            .collect())
    }

    /// Restricts the shift to the symbols flagged in `keep`, reindexing them.
    pub fn restrict(&self, keep: &[bool]) -> MarkovTreeShift {
        let mut remap = vec![usize::MAX; keep.len()];
        let mut names = Vec::new();
        for (i, &k) in keep.iter().enumerate() {
            if k {
                remap[i] = names.len();
                names.push(self.alphabet.symbol(i).to_string());
            }
        }
        let allowed = self
            .allowed
            .iter()
            .filter(|b| keep[b.root] && b.children.iter().all(|&c| keep[c]))
            .map(|b| TwoBlock::new(remap[b.root], b.children.iter().map(|&c| remap[c]).collect::<Vec<_>>()))
            .collect();
        MarkovTreeShift {
            alphabet: Alphabet { symbols: names },
            degree: self.degree,
            allowed,
        }
    }

    pub fn to_doc(&self) -> TreeShiftDoc {
        let name = |i: usize| self.alphabet.symbol(i).to_string();
        TreeShiftDoc {
            d: self.degree,
            alphabet: self.alphabet.symbols.clone(),
            allowed: Some(
                self.allowed
                    .iter()
                    .map(|b| BlockDoc {
                        root: name(b.root),
                        children: b.children.iter().map(|&c| name(c)).collect(),
                    })
                    .collect(),
            ),
            forbidden: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TreeShiftDoc = serde_json::from_str(text)?;
        doc.into_shift()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("tree-shift document serializes")
    }
}

/// On-disk tree-shift document. Exactly one of `allowed` / `forbidden` is present.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeShiftDoc {
    pub d: usize,
    pub alphabet: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub allowed: Option<Vec<BlockDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forbidden: Option<Vec<BlockDoc>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockDoc {
    pub root: String,
    pub children: Vec<String>,
}

impl TreeShiftDoc {
    pub fn into_shift(self) -> Result<MarkovTreeShift> {
        let alphabet = Alphabet::new(self.alphabet)?;
        let convert = |blocks: Vec<BlockDoc>| -> Result<Vec<TwoBlock>> {
            blocks
                .into_iter()
                .map(|b| {
                    let idx = |s: &str| {
                        alphabet
                            .index_of(s)
                            .ok_or_else(|| Error::Parse(format!("unknown symbol {s:?}")))
                    };
                    let children = b.children.iter().map(|c| idx(c)).collect::<Result<Vec<_>>>()?;
                    Ok(TwoBlock::new(idx(&b.root)?, children))
                })
                .collect()
        };
        match (self.allowed, self.forbidden) {
            (Some(a), None) => {
                let blocks = convert(a)?;
                MarkovTreeShift::new(alphabet, self.d, blocks)
            }
            (None, Some(f)) => {
                let blocks = convert(f)?;
                MarkovTreeShift::from_forbidden(alphabet, self.d, blocks)
            }
            _ => Err(Error::Parse(
                "exactly one of `allowed` or `forbidden` must be present".into(),
            )),
        }
    }
}

/// Iterates all words of length `len` over `0..k` in lexicographic order.
pub(crate) fn odometer(k: usize, len: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next = if k == 0 && len > 0 { None } else { Some(vec![0; len]) };
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut succ = cur.clone();
        let mut pos = len;
        while pos > 0 {
            pos -= 1;
            succ[pos] += 1;
            if succ[pos] < k {
                next = Some(succ);
                break;
            }
            succ[pos] = 0;
        }
        Some(cur)
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pruned {
    pub shift: MarkovTreeShift,
    /// Names of removed symbols, in original alphabet order.
    pub removed: Vec<String>,
}

impl Pruned {
    pub fn is_empty(&self) -> bool {
        self.shift.is_empty()
    }
}

/// Removes symbols that cannot label any node of an infinite tree.
///
/// A symbol dies when no allowed block rooted at it has only live children;
/// this repeats until stable.
pub fn prune_dead_symbols(x: &MarkovTreeShift) -> Pruned {
    let k = x.num_symbols();
    let mut alive = vec![true; k];
    loop {
        let mut changed = false;
        for i in 0..k {
            if alive[i]
                && !x
                    .blocks_rooted_at(i)
                    .any(|b| b.children.iter().all(|&c| alive[c]))
            {
                alive[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let removed = (0..k)
        .filter(|&i| !alive[i])
        .map(|i| x.alphabet.symbol(i).to_string())
        .collect();
    Pruned {
        shift: x.restrict(&alive),
        removed,
    }
}

/// Essential symbols of a pruned shift (`gamma_{i;n} >= 2` for some `n`).
///
/// Least fixpoint: a symbol is essential if it roots two or more allowed
/// blocks, or its single block has an essential child.
pub fn essential_symbols(x: &MarkovTreeShift) -> Vec<bool> {
    let k = x.num_symbols();
    let mut essential: Vec<bool> = (0..k).map(|i| x.blocks_rooted_at(i).nth(1).is_some()).collect();
    loop {
        let mut changed = false;
        for i in 0..k {
            if !essential[i] && x.blocks_rooted_at(i).any(|b| b.children.iter().any(|&c| essential[c])) {
                essential[i] = true;
                changed = true;
            }
        }
        if !changed {
            return essential;
        }
    }
}

/// Exact per-symbol block counts `gamma_{i;n}` for `n = 1..=levels`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockCountSeries {
    levels: Vec<Vec<BigUint>>,
}

impl BlockCountSeries {
    /// Counts at level `n` (1-based).
    pub fn level(&self, n: usize) -> &[BigUint] {
        &self.levels[n - 1]
    }

    pub fn total(&self, n: usize) -> BigUint {
        self.level(n).iter().sum()
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `ln gamma_{i;n}`, `-inf` where the count is zero.
    pub fn ln_level(&self, n: usize) -> Vec<f64> {
        self.level(n).iter().map(ln_biguint).collect()
    }
}

/// Log-space block counts `L_{i;n} = ln gamma_{i;n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogBlockSeries {
    levels: Vec<Vec<f64>>,
}

impl LogBlockSeries {
    pub fn level(&self, n: usize) -> &[f64] {
        &self.levels[n - 1]
    }

    /// `ln |B_n|`.
    pub fn ln_total(&self, n: usize) -> f64 {
        log_sum_exp(self.level(n).iter().copied())
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Natural log of an unbounded integer; `-inf` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit head fits in f64");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Exact counts of locally admissible blocks, by the two-block recursion
/// `gamma_{i;n} = sum over blocks rooted at i of prod_j gamma_{child_j; n-1}`.
///
/// On a pruned shift these are exactly the `n`-blocks of the tree-shift.
pub fn count_blocks(x: &MarkovTreeShift, n: usize, digit_budget: u64) -> Result<BlockCountSeries> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let k = x.num_symbols();
    let mut levels = vec![vec![BigUint::one(); k]];
    for level in 2..=n {
        let prev = levels.last().expect("at least one level");
        let bits: Vec<u64> = prev.iter().map(|g| g.bits()).collect();
        let mut worst = 0.0f64;
        for i in 0..k {
            let many = x.blocks_rooted_at(i).count() as f64;
            let widest = x
                .blocks_rooted_at(i)
                .map(|b| b.children.iter().map(|&c| bits[c]).sum::<u64>())
                .max()
                .unwrap_or(0);
            worst = worst.max((widest as f64 + many.log2().max(0.0) + 1.0) * LOG10_2);
        }
        let digits = worst.ceil() as u64;
        if digits > digit_budget {
            return Err(Error::DigitBudget {
                level,
                digits,
                budget: digit_budget,
            });
        }
        let next: Vec<BigUint> = (0..k)
            .map(|i| {
                x.blocks_rooted_at(i)
                    .map(|b| b.children.iter().fold(BigUint::one(), |acc, &c| acc * &prev[c]))
                    .sum()
            })
            .collect();
        levels.push(next);
    }
    Ok(BlockCountSeries { levels })
}

/// The same recursion carried out on `ln gamma`, with no size limit.
pub fn count_blocks_log(x: &MarkovTreeShift, n: usize) -> Result<LogBlockSeries> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let k = x.num_symbols();
    // Group blocks by child multiset so each level costs one term per monomial.
    let rows: Vec<Vec<(f64, Vec<usize>)>> = (0..k)
        .map(|i| {
            let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
            for b in x.blocks_rooted_at(i) {
                let mut key = b.children.clone();
                key.sort_unstable();
                *counts.entry(key).or_default() += 1;
            }
            counts.into_iter().map(|(c, r)| ((r as f64).ln(), c)).collect()
        })
        .collect();
    let mut levels = vec![vec![0.0; k]];
    for _ in 2..=n {
        let prev = levels.last().expect("at least one level");
        let next = rows
            .iter()
            .map(|row| {
                log_sum_exp(
                    row.iter()
                        .map(|(lr, children)| lr + children.iter().map(|&c| prev[c]).sum::<f64>()),
                )
            })
            .collect();
        levels.push(next);
    }
    Ok(LogBlockSeries { levels })
}

/// Number of nodes of the full subtree supporting an `n`-block.
pub fn block_support_size(d: usize, n: usize) -> usize {
    (0..n).map(|l| d.pow(l as u32)).sum()
}

/// Brute-force enumeration of `n`-blocks.
///
/// Patterns are label vectors in breadth-first (heap) order: node `j` has
/// children `j*d + 1 ..= j*d + d`. Every internal node must root an allowed block.
pub fn enumerate_blocks(x: &MarkovTreeShift, n: usize, cap: u128) -> Result<Vec<Vec<usize>>> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let k = x.num_symbols();
    let d = x.degree();
    let nodes = block_support_size(d, n);
    let internal = block_support_size(d, n - 1);
    let candidates = (k as u128).checked_pow(nodes as u32).unwrap_or(u128::MAX);
    check_cap("block enumeration candidates", candidates, cap)?;
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    let mut probe = TwoBlock::new(0, vec![0; d]);
    for labels in odometer(k, nodes) {
        let ok = (0..internal).all(|j| {
            probe.root = labels[j];
            probe.children.copy_from_slice(&labels[j * d + 1..=j * d + d]);
            x.is_allowed(&probe)
        });
        if ok {
            out.push(labels);
        }
    }
    Ok(out)
}

/// Result of the finite-level entropy estimate `ln ln |B_n| / n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyEstimate {
    pub value: f64,
    /// `|B_n| <= 1`; the value is reported as 0.
    pub degenerate: bool,
    /// No symbol survives pruning.
    pub empty: bool,
}

/// `ln(ln |B_n(X)|) / n` via the log-space recursion on the pruned shift.
///
/// The raw value may be negative for zero-entropy shifts with small counts;
/// only its limit is meaningful.
pub fn entropy_estimate(x: &MarkovTreeShift, n: usize) -> Result<EntropyEstimate> {
    let pruned = prune_dead_symbols(x);
    if pruned.is_empty() {
        return Ok(EntropyEstimate {
            value: 0.0,
            degenerate: true,
            empty: true,
        });
    }
    let logs = count_blocks_log(&pruned.shift, n)?;
    let ln_total = logs.ln_total(n);
    // |B_n| is an integer, so ln |B_n| is 0 or at least ln 2.
    if ln_total < 0.5 * std::f64::consts::LN_2 {
        return Ok(EntropyEstimate {
            value: 0.0,
            degenerate: true,
            empty: false,
        });
    }
    Ok(EntropyEstimate {
        value: ln_total.ln() / n as f64,
        degenerate: false,
        empty: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn golden_mean() -> MarkovTreeShift {
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

    fn frozen() -> MarkovTreeShift {
        MarkovTreeShift::from_named(2, &["+", "-"], &[("+", &["-", "-"]), ("-", &["-", "-"])]).unwrap()
    }

    #[test]
    fn prune_keeps_full_and_golden_mean() {
        let full = MarkovTreeShift::full(&["a", "b"], 2).unwrap();
        assert_eq!(prune_dead_symbols(&full).shift, full);
        let gm = golden_mean();
        let p = prune_dead_symbols(&gm);
        assert_eq!(p.shift, gm);
        assert!(p.removed.is_empty());
    }

    #[test]
    fn prune_cascades_to_empty() {
        let x = MarkovTreeShift::from_named(2, &["+", "-"], &[("+", &["-", "-"])]).unwrap();
        let p = prune_dead_symbols(&x);
        assert!(p.is_empty());
        assert_eq!(p.removed, vec!["+".to_string(), "-".to_string()]);
    }

    #[test]
    fn essential_examples() {
        assert_eq!(essential_symbols(&golden_mean()), vec![true, true]);
        assert_eq!(essential_symbols(&frozen()), vec![false, false]);
        let full = MarkovTreeShift::full(&["a", "b"], 2).unwrap();
        assert_eq!(essential_symbols(&full), vec![true, true]);
    }

    #[test]
    fn golden_mean_counts() {
        let s = count_blocks(&golden_mean(), 3, DEFAULT_DIGIT_BUDGET).unwrap();
        assert_eq!(s.level(1), &[BigUint::from(1u32), BigUint::from(1u32)]);
        assert_eq!(s.level(2), &[BigUint::from(4u32), BigUint::from(1u32)]);
        assert_eq!(s.total(2), BigUint::from(5u32));
        assert_eq!(s.level(3), &[BigUint::from(25u32), BigUint::from(16u32)]);
        assert_eq!(s.total(3), BigUint::from(41u32));
    }

    #[test]
    fn full_shift_level_two() {
        let full = MarkovTreeShift::full(&["a", "b"], 2).unwrap();
        assert_eq!(count_blocks(&full, 2, 100).unwrap().total(2), BigUint::from(8u32));
        assert_eq!(enumerate_blocks(&full, 2, DEFAULT_ENUMERATION_CAP).unwrap().len(), 8);
    }

    #[test]
    fn enumeration_matches_golden_mean() {
        assert_eq!(enumerate_blocks(&golden_mean(), 3, DEFAULT_ENUMERATION_CAP).unwrap().len(), 41);
    }

    #[test]
    fn enumeration_of_empty_shift() {
        let empty = prune_dead_symbols(
            &MarkovTreeShift::from_named(2, &["+", "-"], &[("+", &["-", "-"])]).unwrap(),
        )
        .shift;
        assert!(enumerate_blocks(&empty, 2, 10).unwrap().is_empty());
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        let full = MarkovTreeShift::full(&["a", "b", "c"], 2).unwrap();
        let err = enumerate_blocks(&full, 3, 1000).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { requested: 2187, .. }));
    }

    #[test]
    fn digit_budget_is_enforced() {
        let full = MarkovTreeShift::full(&["a", "b"], 2).unwrap();
        // |B_n| of the binary full shift is 2^(2^n - 1).
        assert!(count_blocks(&full, 10, 1_000).is_ok());
        let err = count_blocks(&full, 14, 1_000).unwrap_err();
        assert!(matches!(err, Error::DigitBudget { .. }));
    }

    #[test]
    fn log_series_matches_exact() {
        let gm = golden_mean();
        let exact = count_blocks(&gm, 8, DEFAULT_DIGIT_BUDGET).unwrap();
        let logs = count_blocks_log(&gm, 8).unwrap();
        for n in 1..=8 {
            for (e, l) in exact.ln_level(n).iter().zip(logs.level(n)) {
                assert!((e - l).abs() <= 1e-9 * e.abs().max(1.0));
            }
        }
    }

    #[test]
    fn estimates_approach_ln_d() {
        let gm = entropy_estimate(&golden_mean(), 200).unwrap();
        assert!((gm.value - 2f64.ln()).abs() < 0.05, "{gm:?}");
        let full3 = MarkovTreeShift::full(&["a", "b"], 3).unwrap();
        let e = entropy_estimate(&full3, 100).unwrap();
        assert!((e.value - 3f64.ln()).abs() < 0.05, "{e:?}");
    }

    #[test]
    fn frozen_shift_estimate_is_raw_negative_value() {
        // |B_n| = 2 for every n: ln ln 2 / n < 0, tending to zero.
        let e = entropy_estimate(&frozen(), 10).unwrap();
        assert!(!e.degenerate);
        assert!((e.value - 2f64.ln().ln() / 10.0).abs() < 1e-12);
    }

    #[test]
    fn single_symbol_estimate_is_degenerate() {
        let one = MarkovTreeShift::full(&["a"], 2).unwrap();
        let e = entropy_estimate(&one, 5).unwrap();
        assert!(e.degenerate);
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn forbidden_document_round_trip() {
        let text = r#"{"d": 2, "alphabet": ["0", "1"],
            "forbidden": [{"root": "1", "children": ["0", "1"]},
                          {"root": "1", "children": ["1", "0"]},
                          {"root": "1", "children": ["1", "1"]}]}"#;
        let x = MarkovTreeShift::from_json(text).unwrap();
        assert_eq!(x, golden_mean());
        assert_eq!(MarkovTreeShift::from_json(&x.to_json()).unwrap(), x);
    }

    #[test]
    fn document_needs_exactly_one_block_list() {
        let both = r#"{"d": 1, "alphabet": ["a"], "allowed": [], "forbidden": []}"#;
        assert!(matches!(MarkovTreeShift::from_json(both), Err(Error::Parse(_))));
        let neither = r#"{"d": 1, "alphabet": ["a"]}"#;
        assert!(matches!(MarkovTreeShift::from_json(neither), Err(Error::Parse(_))));
        let wrong_arity = r#"{"d": 2, "alphabet": ["a"], "allowed": [{"root": "a", "children": ["a"]}]}"#;
        assert!(matches!(MarkovTreeShift::from_json(wrong_arity), Err(Error::Parse(_))));
    }

    #[test]
    fn child_order_matters() {
        let x = MarkovTreeShift::from_named(2, &["a", "b"], &[("a", &["a", "b"]), ("a", &["b", "a"])]).unwrap();
        assert_eq!(x.allowed().len(), 2);
    }
}
