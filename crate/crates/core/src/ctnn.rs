//! Nearest-neighbor neural networks on Cayley trees.
//!
//! A node `w` with output `y_w` and children outputs `v = (y_{w1}, ..., y_{wd})`
//! sits at a mosaic equilibrium iff
//!
//! * `y_w = +1`: `a - 1 + z > -alpha . v`
//! * `y_w = -1`: `a - 1 - z >  alpha . v`
//!
//! These strict inequalities define the basic set of admissible two-blocks
//! over `{+, -}`, hence a Markov tree-shift whose entropy is always `0` or
//! `ln d`.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::entropy::entropy_tsft;
use crate::error::{Error, Result};
use crate::treeshift::{Alphabet, MarkovTreeShift, TwoBlock};

/// Distance below which a parameter is treated as lying on a partition line.
pub const BOUNDARY_TOL: f64 = 1e-12;
/// Agreement tolerance between spectral entropy and the region-code rule.
pub const DICHOTOMY_TOL: f64 = 1e-9;

/// Symbol index of `+` in the tree-shift built from a basic set.
pub const PLUS: usize = 0;
/// Symbol index of `-`.
pub const MINUS: usize = 1;

/// A child configuration in `{-1, +1}^d`.
pub type ChildVector = Vec<i8>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Template {
    /// Self-feedback.
    pub a: f64,
    /// Child couplings `a_1 .. a_d`.
    pub alpha: Vec<f64>,
    /// Threshold.
    pub z: f64,
}

impl Template {
    pub fn new(a: f64, alpha: impl Into<Vec<f64>>, z: f64) -> Result<Self> {
        let t = Template {
            a,
            alpha: alpha.into(),
            z,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn degree(&self) -> usize {
        self.alpha.len()
    }

    fn validate(&self) -> Result<()> {
        if self.alpha.is_empty() {
            return Err(Error::InvalidInput("template needs at least one child coupling".into()));
        }
        if !self.a.is_finite() || !self.z.is_finite() || self.alpha.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("template parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TemplateDoc = serde_json::from_str(text)?;
        if doc.alpha.len() != doc.d {
            return Err(Error::Parse(format!("alpha has {} entries, expected d = {}", doc.alpha.len(), doc.d)));
        }
        Template::new(doc.a, doc.alpha, doc.z).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_doc(&self) -> TemplateDoc {
        TemplateDoc {
            d: self.degree(),
            a: self.a,
            alpha: self.alpha.clone(),
            z: self.z,
        }
    }
}

/// Template file `{d, a, alpha: [...], z}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateDoc {
    pub d: usize,
    pub a: f64,
    pub alpha: Vec<f64>,
    pub z: f64,
}

fn dot(alpha: &[f64], v: &[i8]) -> f64 {
    alpha.iter().zip(v).map(|(a, &s)| a * s as f64).sum()
}

/// `{-1, +1}^d` in lexicographic order (`-1` before `+1`).
pub fn hypercube(d: usize) -> Vec<ChildVector> {
    (0..1usize << d)
        .map(|bits| (0..d).map(|i| if bits >> (d - 1 - i) & 1 == 1 { 1 } else { -1 }).collect())
        .collect()
}

/// Derived profile of the child couplings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChildCouplings {
    pub alpha: Vec<f64>,
    /// All `2^d` sums `sum l_i a_i`, `l_i = +-1`, ascending, with multiplicity.
    pub sums: Vec<f64>,
    /// Largest element of `sums`, equal to `sum |a_i|`.
    pub k1: f64,
    /// Second element of `sums` from the top (counted with multiplicity).
    pub k2: f64,
    /// Index of the smallest `|a_i|`, lowest index on ties.
    pub ell: usize,
    /// Some `a_i` is zero or two magnitudes coincide, so `sums` has repeats.
    pub degenerate: bool,
}

impl ChildCouplings {
    pub fn new(alpha: impl Into<Vec<f64>>) -> Result<Self> {
        let alpha: Vec<f64> = alpha.into();
        if alpha.is_empty() || alpha.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("child couplings must be finite and nonempty".into()));
        }
        let mut sums: Vec<f64> = hypercube(alpha.len()).iter().map(|v| dot(&alpha, v)).collect();
        sums.sort_by(f64::total_cmp);
        let n = sums.len();
        let k1 = sums[n - 1];
        let k2 = if n >= 2 { sums[n - 2] } else { k1 };
        let mut ell = 0;
        for (i, v) in alpha.iter().enumerate() {
            if v.abs() < alpha[ell].abs() {
                ell = i;
            }
        }
        let degenerate = sums.windows(2).any(|w| (w[1] - w[0]).abs() <= BOUNDARY_TOL);
        Ok(ChildCouplings {
            alpha,
            sums,
            k1,
            k2,
            ell,
            degenerate,
        })
    }

    pub fn degree(&self) -> usize {
        self.alpha.len()
    }

    /// Distinct values of `sums`, ascending.
    pub fn distinct_sums(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &s in &self.sums {
            if out.last().is_none_or(|&l| s - l > BOUNDARY_TOL) {
                out.push(s);
            }
        }
        out
    }
}

/// `[p, q]` = number of admissible child vectors under `+` and under `-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RegionCode {
    pub p: usize,
    pub q: usize,
}

impl RegionCode {
    pub fn swapped(self) -> RegionCode {
        RegionCode { p: self.q, q: self.p }
    }

    /// Zero-entropy rule: `min{p, q} = 0` or `max{p, q} = 1`.
    pub fn predicts_zero_entropy(self) -> bool {
        self.p.min(self.q) == 0 || self.p.max(self.q) == 1
    }
}

impl fmt::Display for RegionCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.p, self.q)
    }
}

/// Admissible child vectors under root `+` and root `-`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasicSet {
    pub d: usize,
    pub plus: BTreeSet<ChildVector>,
    pub minus: BTreeSet<ChildVector>,
}

impl BasicSet {
    pub fn new(
        d: usize,
        plus: impl IntoIterator<Item = ChildVector>,
        minus: impl IntoIterator<Item = ChildVector>,
    ) -> Result<Self> {
        let check = |v: &ChildVector| v.len() == d && v.iter().all(|&s| s == 1 || s == -1);
        let plus: BTreeSet<_> = plus.into_iter().collect();
        let minus: BTreeSet<_> = minus.into_iter().collect();
        if d == 0 || !plus.iter().chain(&minus).all(check) {
            return Err(Error::Parse(format!("child vectors must have {d} entries in {{-1, 1}}")));
        }
        Ok(BasicSet { d, plus, minus })
    }

    pub fn empty(d: usize) -> Self {
        BasicSet {
            d,
            plus: BTreeSet::new(),
            minus: BTreeSet::new(),
        }
    }

    pub fn full(d: usize) -> Self {
        BasicSet {
            d,
            plus: hypercube(d).into_iter().collect(),
            minus: hypercube(d).into_iter().collect(),
        }
    }

    pub fn code(&self) -> RegionCode {
        RegionCode {
            p: self.plus.len(),
            q: self.minus.len(),
        }
    }

    /// The set obtained by flipping every output: `+` and `-` exchange roles
    /// and each child vector is negated.
    pub fn negated(&self) -> BasicSet {
        let neg = |s: &BTreeSet<ChildVector>| s.iter().map(|v| v.iter().map(|x| -x).collect()).collect();
        BasicSet {
            d: self.d,
            plus: neg(&self.minus),
            minus: neg(&self.plus),
        }
    }

    /// Two-blocks rendered as `(root, child_1, ..., child_d)` over `{+, -}`.
    pub fn blocks(&self) -> Vec<String> {
        let render = |root: char, v: &ChildVector| {
            let mut s = format!("({root}");
            for &x in v {
                s.push_str(if x > 0 { ", +" } else { ", -" });
            }
            s.push(')');
            s
        };
        self.plus
            .iter()
            .rev()
            .map(|v| render('+', v))
            .chain(self.minus.iter().rev().map(|v| render('-', v)))
            .collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BasicSetDoc = serde_json::from_str(text)?;
        BasicSet::new(doc.d, doc.plus, doc.minus)
    }

    pub fn to_doc(&self) -> BasicSetDoc {
        BasicSetDoc {
            d: self.d,
            plus: self.plus.iter().cloned().collect(),
            minus: self.minus.iter().cloned().collect(),
        }
    }
}

/// Basic-set file `{d, plus: [[+-1, ...], ...], minus: [...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasicSetDoc {
    pub d: usize,
    pub plus: Vec<ChildVector>,
    pub minus: Vec<ChildVector>,
}

/// Basic set from the strict inequalities, together with whether any
/// inequality is within [`BOUNDARY_TOL`] of equality.
#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub basic: BasicSet,
    pub boundary: bool,
}

pub fn classify(t: &Template) -> Classification {
    let d = t.degree();
    let s = t.a - 1.0 + t.z;
    let u = t.a - 1.0 - t.z;
    let mut basic = BasicSet::empty(d);
    let mut boundary = false;
    for v in hypercube(d) {
        let av = dot(&t.alpha, &v);
        boundary |= (s + av).abs() < BOUNDARY_TOL || (u - av).abs() < BOUNDARY_TOL;
        if s > -av {
            basic.plus.insert(v.clone());
        }
        if u > av {
            basic.minus.insert(v);
        }
    }
    Classification { basic, boundary }
}

/// The basic set of a template off the partition lines.
pub fn admissible_patterns(t: &Template) -> Result<BasicSet> {
    let c = classify(t);
    if c.boundary {
        return Err(Error::BoundaryParameter(format!(
            "a = {}, z = {}, alpha = {:?}",
            t.a, t.z, t.alpha
        )));
    }
    Ok(c.basic)
}

/// The Markov tree-shift over `{+, -}` whose allowed blocks are `b`.
pub fn tsft_from_basic(b: &BasicSet) -> MarkovTreeShift {
    let alphabet = Alphabet::new(["+", "-"]).expect("two distinct symbols");
    let index = |v: &ChildVector| -> Vec<usize> { v.iter().map(|&x| if x > 0 { PLUS } else { MINUS }).collect() };
    let blocks = b
        .plus
        .iter()
        .map(|v| TwoBlock::new(PLUS, index(v)))
        .chain(b.minus.iter().map(|v| TwoBlock::new(MINUS, index(v))));
    MarkovTreeShift::new(alphabet, b.d, blocks).expect("child vectors have d entries")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CtnnEntropy {
    pub entropy: f64,
    pub code: RegionCode,
}

/// Entropy of a basic set's tree-shift, cross-checked against the region-code rule.
pub fn basic_set_entropy(b: &BasicSet) -> Result<CtnnEntropy> {
    let code = b.code();
    let entropy = entropy_tsft(&tsft_from_basic(b))?.entropy;
    let expected = if code.predicts_zero_entropy() {
        0.0
    } else {
        (b.d as f64).ln()
    };
    if (entropy - expected).abs() > DICHOTOMY_TOL {
        return Err(Error::InternalInconsistency(format!(
            "region {code}: spectral entropy {entropy} but rule predicts {expected}"
        )));
    }
    Ok(CtnnEntropy { entropy, code })
}

pub fn ctnn_entropy(t: &Template) -> Result<CtnnEntropy> {
    basic_set_entropy(&admissible_patterns(t)?)
}

/// `a` on the critical curve at threshold `z`:
/// `a = 1 + ||z| - |a_l|| - sum_{i != l} |a_i|`.
pub fn critical_a(cc: &ChildCouplings, z: f64) -> f64 {
    let min = cc.alpha[cc.ell].abs();
    let rest: f64 = cc
        .alpha
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != cc.ell)
        .map(|(_, v)| v.abs())
        .sum();
    1.0 + (z.abs() - min).abs() - rest
}

/// The same curve through the two largest coupling sums:
/// `a = 1 + ||z| - (K1 - K2)/2| - (K1 + K2)/2`.
pub fn critical_a_from_sums(cc: &ChildCouplings, z: f64) -> f64 {
    1.0 + (z.abs() - (cc.k1 - cc.k2) / 2.0).abs() - (cc.k1 + cc.k2) / 2.0
}

pub fn is_critical(t: &Template, tol: f64) -> Result<bool> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let cc = ChildCouplings::new(t.alpha.clone())?;
    Ok((t.a - critical_a(&cc, t.z)).abs() <= tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalProbe {
    pub critical: bool,
    pub saw_zero: bool,
    pub saw_ln_d: bool,
    pub samples: usize,
    /// Samples that fell on a partition line and were skipped.
    pub boundary_skipped: usize,
    pub seed: u64,
}

/// Samples the disc of radius `r` around `(a, z)` and reports whether both
/// entropy values occur, i.e. the definition of a critical parameter at scale `r`.
pub fn verify_critical_by_definition(
    cc: &ChildCouplings,
    point: (f64, f64),
    r: f64,
    samples: usize,
    seed: u64,
) -> Result<CriticalProbe> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::InvalidInput("radius must be positive".into()));
    }
    if samples < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut saw_zero, mut saw_ln_d) = (false, false);
    let mut boundary_skipped = 0;
    for _ in 0..samples {
        let radius = r * rng.gen::<f64>().sqrt();
        let angle = rng.gen::<f64>() * std::f64::consts::TAU;
        let t = Template {
            a: point.0 + radius * angle.cos(),
            alpha: cc.alpha.clone(),
            z: point.1 + radius * angle.sin(),
        };
        match ctnn_entropy(&t) {
            Ok(e) if e.entropy > DICHOTOMY_TOL => saw_ln_d = true,
            Ok(_) => saw_zero = true,
            Err(Error::BoundaryParameter(_)) => boundary_skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(CriticalProbe {
        critical: saw_zero && saw_ln_d,
        saw_zero,
        saw_ln_d,
        samples,
        boundary_skipped,
        seed,
    })
}

/// A finite labeled tree over `{+1, -1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledTree {
    pub label: i8,
    pub children: Vec<LabeledTree>,
}

impl LabeledTree {
    pub fn leaf(label: i8) -> Self {
        LabeledTree {
            label,
            children: Vec::new(),
        }
    }

    /// Complete `d`-ary tree of the given height with every node labeled `label`.
    pub fn uniform(label: i8, d: usize, height: usize) -> Self {
        LabeledTree {
            label,
            children: if height == 0 {
                Vec::new()
            } else {
                (0..d).map(|_| LabeledTree::uniform(label, d, height - 1)).collect()
            },
        }
    }

    /// Height if the tree is complete `d`-ary (all leaves at one depth).
    pub fn complete_height(&self, d: usize) -> Option<usize> {
        if self.children.is_empty() {
            return Some(0);
        }
        if self.children.len() != d {
            return None;
        }
        let h = self.children[0].complete_height(d)?;
        self.children[1..]
            .iter()
            .all(|c| c.complete_height(d) == Some(h))
            .then_some(h + 1)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TreeDoc = serde_json::from_str(text)?;
        doc.into_tree()
    }
}

/// Pattern-tree file: nested `{label, children: [...]}`, labels `"+"`/`"-"` or `1`/`-1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeDoc {
    pub label: serde_json::Value,
    #[serde(default)]
    pub children: Vec<TreeDoc>,
}

impl TreeDoc {
    fn into_tree(self) -> Result<LabeledTree> {
        let label = match &self.label {
            serde_json::Value::String(s) if s == "+" || s == "1" || s == "+1" => 1,
            serde_json::Value::String(s) if s == "-" || s == "-1" => -1,
            serde_json::Value::Number(n) if n.as_i64() == Some(1) => 1,
            serde_json::Value::Number(n) if n.as_i64() == Some(-1) => -1,
            other => return Err(Error::Parse(format!("bad node label {other}"))),
        };
        Ok(LabeledTree {
            label,
            children: self.children.into_iter().map(TreeDoc::into_tree).collect::<Result<_>>()?,
        })
    }
}

/// Internal states `x_w = z + a y_w + sum_i a_i y_{wi}`; `None` at leaves.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateTree {
    pub label: i8,
    pub x: Option<f64>,
    pub children: Vec<StateTree>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MosaicCheck {
    pub valid: bool,
    pub states: StateTree,
}

/// Checks that every node with children satisfies its mosaic inequality
/// (`|x_w| > 1` with the sign of `y_w`). Leaf constraints are vacuous.
pub fn verify_mosaic(t: &Template, y: &LabeledTree) -> Result<MosaicCheck> {
    let d = t.degree();
    match y.complete_height(d) {
        Some(h) if h >= 1 => {}
        Some(_) => return Err(Error::InvalidInput("pattern tree must have height at least 1".into())),
        None => return Err(Error::InvalidInput(format!("pattern tree is not a complete {d}-ary tree"))),
    }
    fn walk(t: &Template, node: &LabeledTree, ok: &mut bool) -> StateTree {
        let x = if node.children.is_empty() {
            None
        } else {
            let coupling: f64 = t
                .alpha
                .iter()
                .zip(&node.children)
                .map(|(a, c)| a * c.label as f64)
                .sum();
            let x = t.z + t.a * node.label as f64 + coupling;
            *ok &= if node.label > 0 { x > 1.0 } else { x < -1.0 };
            Some(x)
        };
        StateTree {
            label: node.label,
            x,
            children: node.children.iter().map(|c| walk(t, c, ok)).collect(),
        }
    }
    let mut valid = true;
    let states = walk(t, y, &mut valid);
    Ok(MosaicCheck { valid, states })
}

/// The template with the threshold negated. Its basic set is the output-flip
/// of the original, so region codes swap and entropies agree.
pub fn dual_region_map(t: &Template) -> Template {
    Template {
        a: t.a,
        alpha: t.alpha.clone(),
        z: -t.z,
    }
}
