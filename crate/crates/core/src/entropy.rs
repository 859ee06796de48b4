//! Entropy of Markov tree-shifts through reduced systems and Perron roots.
//!
//! `h(X) = max_E ln rho(M_E')` where `E` ranges over reduced systems of the
//! SNRE of `X` and `M_E'` is the weighted adjacency matrix with the rows and
//! columns of inessential symbols deleted. An empty `M_E'` contributes 0, as
//! does a nilpotent one.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{cap_from_env, check_cap, Result};
use crate::snre::{Snre, DEFAULT_REDUCED_CAP};
use crate::spectral::spectral_radius_int;
use crate::treeshift::{essential_symbols, prune_dead_symbols, Alphabet, MarkovTreeShift, TwoBlock};

/// Default cap on the number of matrices enumerated for a spectrum.
pub const DEFAULT_SPECTRUM_CAP: u128 = 10_000_000;
/// Spectral radii closer than this are treated as one spectrum value.
pub const SPECTRUM_DEDUP_TOL: f64 = 1e-9;
const TIE_TOL: f64 = 1e-12;

/// Outcome of [`entropy_tsft`]. Symbol-indexed fields refer to `symbols`,
/// the alphabet left after pruning dead symbols.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyReport {
    pub entropy: f64,
    pub rho: f64,
    pub symbols: Vec<String>,
    /// Monomial index chosen in each row of the maximizing reduced system.
    pub argmax_selection: Vec<usize>,
    /// Weighted adjacency matrix of the maximizing reduced system.
    pub matrix: Vec<Vec<u32>>,
    /// Same matrix with inessential rows and columns deleted.
    pub reduced_matrix: Vec<Vec<u32>>,
    pub essential: Vec<String>,
    pub pruned_symbols: Vec<String>,
    pub empty: bool,
}

pub fn entropy_tsft(x: &MarkovTreeShift) -> Result<EntropyReport> {
    entropy_tsft_with_cap(x, cap_from_env(DEFAULT_REDUCED_CAP))
}

/// Only the rows of essential symbols influence `M_E'`, so the search runs
/// over their selections; inessential rows keep their first monomial, which
/// makes the reported selection the lexicographically first maximizer.
pub fn entropy_tsft_with_cap(x: &MarkovTreeShift, cap: u128) -> Result<EntropyReport> {
    let pruned = prune_dead_symbols(x);
    let shift = &pruned.shift;
    let symbols: Vec<String> = shift.alphabet().symbols().to_vec();
    if shift.is_empty() {
        return Ok(EntropyReport {
            entropy: 0.0,
            rho: 0.0,
            symbols,
            argmax_selection: Vec::new(),
            matrix: Vec::new(),
            reduced_matrix: Vec::new(),
            essential: Vec::new(),
            pruned_symbols: pruned.removed,
            empty: true,
        });
    }

    let k = shift.num_symbols();
    let essential = essential_symbols(shift);
    let ess_idx: Vec<usize> = (0..k).filter(|&i| essential[i]).collect();
    let snre = Snre::from_tsft(shift);
    let radices: Vec<usize> = ess_idx.iter().map(|&i| snre.rows()[i].len()).collect();
    let combos = radices.iter().fold(1u128, |a, &r| a.saturating_mul(r as u128));
    check_cap("reduced systems", combos, cap)?;

    let mut selection = vec![0usize; k];
    let mut best_rho = 0.0f64;
    let mut best_selection = selection.clone();
    let mut best_sub: Vec<Vec<u32>> = Vec::new();
    let mut cache: HashMap<Vec<Vec<u32>>, f64> = HashMap::new();

    if !ess_idx.is_empty() {
        let mut digits = vec![0usize; ess_idx.len()];
        let mut first = true;
        loop {
            for (p, &i) in ess_idx.iter().enumerate() {
                selection[i] = digits[p];
            }
            let sub: Vec<Vec<u32>> = ess_idx
                .iter()
                .map(|&i| {
                    let exps = &snre.rows()[i][selection[i]].exponents;
                    ess_idx.iter().map(|&j| exps[j]).collect()
                })
                .collect();
            let rho = match cache.get(&sub) {
                Some(&r) => r,
                None => {
                    let r = spectral_radius_int(&sub)?;
                    cache.insert(sub.clone(), r);
                    r
                }
            };
            if first || rho > best_rho + TIE_TOL {
                best_rho = rho;
                best_selection = selection.clone();
                best_sub = sub;
                first = false;
            }
            // advance the mixed-radix counter, last row fastest
            let mut pos = digits.len();
            let mut done = true;
            while pos > 0 {
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < radices[pos] {
                    done = false;
                    break;
                }
                digits[pos] = 0;
            }
            if done {
                break;
            }
        }
    }

    let reduced = snre
        .reduced(best_selection.clone())
        .expect("selection indices come from the system rows");
    let entropy = if best_rho > 1.0 { best_rho.ln() } else { 0.0 };
    Ok(EntropyReport {
        entropy,
        rho: best_rho,
        symbols: symbols.clone(),
        argmax_selection: best_selection,
        matrix: reduced.weighted_adjacency().entries().to_vec(),
        reduced_matrix: best_sub,
        essential: ess_idx.iter().map(|&i| symbols[i].clone()).collect(),
        pruned_symbols: pruned.removed,
        empty: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumValue {
    pub entropy: f64,
    pub rho: f64,
    /// A matrix in the enumeration attaining `rho`.
    pub witness: Vec<Vec<u32>>,
}

/// All row vectors of length `len` with entries summing to at most `d`.
fn bounded_rows(len: usize, d: u32) -> Vec<Vec<u32>> {
    fn rec(len: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(len, left - c, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(len, d, &mut Vec::with_capacity(len), &mut out);
    out
}

fn insert_value(acc: &mut Vec<(f64, u128, Vec<Vec<u32>>)>, rho: f64, order: u128, witness: impl FnOnce() -> Vec<Vec<u32>>) {
    let pos = acc.partition_point(|(r, _, _)| *r < rho - SPECTRUM_DEDUP_TOL);
    if let Some(entry) = acc.get_mut(pos) {
        if (entry.0 - rho).abs() <= SPECTRUM_DEDUP_TOL {
            if order < entry.1 {
                *entry = (rho, order, witness());
            }
            return;
        }
    }
    acc.insert(pos, (rho, order, witness()));
}

/// Entropy values attainable by Markov tree-shifts of degree `d` over `k` symbols.
///
/// A tree-shift whose symbols are all essential has entropy `ln d`; otherwise
/// its entropy is `ln rho(M)` for the adjacency matrix `M` on at most `k - 1`
/// essential symbols, whose rows sum to at most `d`. Conversely every such
/// `M` with `rho >= 1` is attained (see [`tsft_from_adjacency`]). The
/// enumeration therefore covers matrices of dimension `1..=k-1`, which also
/// produces `ln d` through `[[d]]`, plus the value 0.
pub fn entropy_spectrum(d: usize, k: usize, cap: u128) -> Result<Vec<SpectrumValue>> {
    let d32 = d as u32;
    let mut total: u128 = 0;
    for dim in 1..k {
        let rows = bounded_rows(dim, d32).len() as u128;
        total = total.saturating_add(rows.saturating_pow(dim as u32));
    }
    check_cap("spectrum matrices", total, cap)?;

    let mut acc: Vec<(f64, u128, Vec<Vec<u32>>)> = vec![(1.0, 0, vec![vec![1]])];
    let mut offset: u128 = 1;
    for dim in 1..k {
        let rows = bounded_rows(dim, d32);
        let r = rows.len() as u128;
        let count = r.pow(dim as u32);
        let decode = |mut idx: u128| -> Vec<Vec<u32>> {
            let mut m = vec![Vec::new(); dim];
            for slot in m.iter_mut().rev() {
                *slot = rows[(idx % r) as usize].clone();
                idx /= r;
            }
            m
        };
        let local = (0..count as u64)
            .into_par_iter()
            .try_fold(Vec::new, |mut acc, idx| -> Result<_> {
                let m = decode(idx as u128);
                let rho = spectral_radius_int(&m)?;
                if rho >= 1.0 - SPECTRUM_DEDUP_TOL {
                    insert_value(&mut acc, rho, offset + idx as u128, || m);
                }
                Ok(acc)
            })
            .try_reduce(Vec::new, |mut a, b| {
                for (rho, order, w) in b {
                    insert_value(&mut a, rho, order, || w);
                }
                Ok(a)
            })?;
        for (rho, order, w) in local {
            insert_value(&mut acc, rho, order, || w);
        }
        offset += count;
    }
    Ok(acc
        .into_iter()
        .map(|(rho, _, witness)| SpectrumValue {
            entropy: rho.max(1.0).ln(),
            rho,
            witness,
        })
        .collect())
}

/// A tree-shift realizing `ln rho(M)` for a nonnegative integer matrix with row
/// sums at most `d`.
///
/// Symbols `a1..al` follow the rows of `M`; an extra symbol `a{l+1}` only roots
/// the all-`a{l+1}` block. Row `i` contributes the block whose children are
/// `M(i, j)` copies of `a_j` (in order) padded with `a{l+1}`, plus the block
/// of all `a{l+1}` children.
pub fn tsft_from_adjacency(d: usize, m: &[Vec<u32>]) -> Result<MarkovTreeShift> {
    let l = m.len();
    for row in m {
        if row.len() != l {
            return Err(crate::Error::InvalidInput("matrix must be square".into()));
        }
        if row.iter().sum::<u32>() as usize > d {
            return Err(crate::Error::InvalidInput(format!("row sums must be at most d = {d}")));
        }
    }
    let alphabet = Alphabet::new((1..=l + 1).map(|i| format!("a{i}")))?;
    let sink = l;
    let mut blocks = vec![TwoBlock::new(sink, vec![sink; d])];
    for (i, row) in m.iter().enumerate() {
        let mut children = Vec::with_capacity(d);
        for (j, &c) in row.iter().enumerate() {
            children.extend(std::iter::repeat_n(j, c as usize));
        }
        children.resize(d, sink);
        blocks.push(TwoBlock::new(i, children));
        blocks.push(TwoBlock::new(i, vec![sink; d]));
    }
    MarkovTreeShift::new(alphabet, d, blocks)
}

/// The two-symbol tree-shift with recursion
/// `g1 = g1^c g2^(d-c) + g2^d`, `g2 = g2^d`, whose entropy is `ln c`.
pub fn construct_tsft_with_entropy(d: usize, c: usize) -> Result<MarkovTreeShift> {
    if c == 0 || c > d {
        return Err(crate::Error::InvalidInput(format!("need 1 <= c <= d, got c = {c}, d = {d}")));
    }
    tsft_from_adjacency(d, &[vec![c as u32]])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LnDCriterion {
    pub holds: bool,
    /// Largest essential subset closed under some allowed block per symbol.
    pub witness: Vec<String>,
}

/// Whether some nonempty set of essential symbols has every member rooting
/// an allowed block with all children inside the set.
///
/// Closed sets are stable under union, so the greatest fixpoint of
/// "drop symbols without an internal block" decides existence.
pub fn check_ln_d_criterion(x: &MarkovTreeShift) -> LnDCriterion {
    let shift = prune_dead_symbols(x).shift;
    let mut inside = essential_symbols(&shift);
    loop {
        let mut changed = false;
        for i in 0..shift.num_symbols() {
            if inside[i]
                && !shift
                    .blocks_rooted_at(i)
                    .any(|b| b.children.iter().all(|&c| inside[c]))
            {
                inside[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let witness: Vec<String> = (0..shift.num_symbols())
        .filter(|&i| inside[i])
        .map(|i| shift.alphabet().symbol(i).to_string())
        .collect();
    LnDCriterion {
        holds: !witness.is_empty(),
        witness,
    }
}
