//! Linear separation on hypercube vertices and template learning.
//!
//! Both problems are small linear programs solved exactly over the
//! rationals, so strict inequalities get exact verdicts.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::ctnn::{admissible_patterns, hypercube, BasicSet, ChildVector, Template, TemplateDoc};
use crate::error::{Error, Result};
use crate::lp::{rat, LinearProgram, LpOutcome, Rational};

/// Largest dimension accepted by the LP routines.
pub const MAX_DIMENSION: usize = 10;
/// Bound on every separating coefficient.
pub const SEPARATION_BOX: i64 = 1;
/// Bound on every template parameter in [`realize`].
pub const REALIZE_BOX: i64 = 10;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexSet {
    pub d: usize,
    pub members: BTreeSet<ChildVector>,
}

impl VertexSet {
    pub fn new(d: usize, members: impl IntoIterator<Item = ChildVector>) -> Result<Self> {
        let members: BTreeSet<ChildVector> = members.into_iter().collect();
        if members.iter().any(|v| v.len() != d || v.iter().any(|&s| s != 1 && s != -1)) {
            return Err(Error::InvalidInput(format!("vertices must lie in {{-1, 1}}^{d}")));
        }
        Ok(VertexSet { d, members })
    }

    pub fn complement(&self) -> VertexSet {
        VertexSet {
            d: self.d,
            members: hypercube(self.d).into_iter().filter(|v| !self.members.contains(v)).collect(),
        }
    }

    pub fn negated(&self) -> VertexSet {
        VertexSet {
            d: self.d,
            members: self.members.iter().map(|v| v.iter().map(|x| -x).collect()).collect(),
        }
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.members.is_subset(&other.members)
    }

    /// All `2^(2^d)` subsets of the hypercube, indexed by bitmask over [`hypercube`] order.
    pub fn all_subsets(d: usize) -> Vec<VertexSet> {
        let cube = hypercube(d);
        (0u64..1 << cube.len())
            .map(|mask| VertexSet {
                d,
                members: cube
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, v)| v.clone())
                    .collect(),
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SeparationMode {
    /// `c . v + b`.
    #[default]
    Affine,
    /// `c . v` with no constant term.
    Homogeneous,
}

/// `c . v + b >= t` on the set and `<= -t` off it.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparatingFunctional {
    pub weights: Vec<Rational>,
    pub bias: Rational,
    pub margin: Rational,
}

impl SeparatingFunctional {
    pub fn value(&self, v: &[i8]) -> Rational {
        self.weights
            .iter()
            .zip(v)
            .fold(self.bias.clone(), |acc, (c, &s)| acc + c * rat(s as i64))
    }

    /// Exact check of the strict separation this functional claims.
    pub fn separates(&self, u: &VertexSet) -> bool {
        self.margin.is_positive()
            && hypercube(u.d).iter().all(|v| {
                let g = self.value(v);
                if u.members.contains(v) {
                    g >= self.margin
                } else {
                    g <= -self.margin.clone()
                }
            })
    }
}

fn check_dimension(d: usize) -> Result<()> {
    if d == 0 || d > MAX_DIMENSION {
        return Err(Error::InvalidInput(format!("dimension must be in 1..={MAX_DIMENSION}, got {d}")));
    }
    Ok(())
}

/// Splits each free variable into a difference of two nonnegative ones.
/// Variable `i` maps to columns `2i` (positive part) and `2i + 1`.
struct SplitProgram {
    free: usize,
    lp: LinearProgram,
}

impl SplitProgram {
    /// `free` signed unknowns, each boxed to `|x| <= bound`, plus a margin `t >= 0`.
    fn new(free: usize, bound: i64) -> Self {
        let mut lp = LinearProgram::new(2 * free + 1);
        for col in 0..2 * free {
            let mut row = vec![Rational::zero(); 2 * free + 1];
            row[col] = rat(1);
            lp.add_le(row, rat(bound));
        }
        let mut objective = vec![Rational::zero(); 2 * free + 1];
        objective[2 * free] = rat(1);
        lp.set_objective(objective);
        SplitProgram { free, lp }
    }

    fn row(&self, coeffs: &[i64], margin: i64) -> Vec<Rational> {
        let mut row = Vec::with_capacity(2 * self.free + 1);
        for &c in coeffs {
            row.push(rat(c));
            row.push(rat(-c));
        }
        row.push(rat(margin));
        row
    }

    /// `coeffs . x + margin * t >= bound`.
    fn ge(&mut self, coeffs: &[i64], margin: i64, bound: i64) {
        let row = self.row(coeffs, margin);
        self.lp.add_ge(row, rat(bound));
    }

    /// `coeffs . x + margin * t <= bound`.
    fn le(&mut self, coeffs: &[i64], margin: i64, bound: i64) {
        let row = self.row(coeffs, margin);
        self.lp.add_le(row, rat(bound));
    }

    /// Signed unknowns and the margin at the optimum.
    fn solve(&self) -> (Vec<Rational>, Rational) {
        match self.lp.solve() {
            LpOutcome::Optimal { x, .. } => {
                let vals = (0..self.free).map(|i| &x[2 * i] - &x[2 * i + 1]).collect();
                (vals, x[2 * self.free].clone())
            }
            // All variables are boxed and the origin is feasible.
            other => unreachable!("bounded feasible program returned {other:?}"),
        }
    }
}

/// Maximum-margin separating functional, if the set and its complement are
/// strictly separable. Empty and full sets are separable in affine mode.
pub fn is_linearly_separable(u: &VertexSet, mode: SeparationMode) -> Result<Option<SeparatingFunctional>> {
    check_dimension(u.d)?;
    let d = u.d;
    let free = match mode {
        SeparationMode::Affine => d + 1,
        SeparationMode::Homogeneous => d,
    };
    let mut p = SplitProgram::new(free, SEPARATION_BOX);
    for v in hypercube(d) {
        let mut coeffs: Vec<i64> = v.iter().map(|&s| s as i64).collect();
        if mode == SeparationMode::Affine {
            coeffs.push(1);
        }
        if u.members.contains(&v) {
            p.ge(&coeffs, -1, 0);
        } else {
            p.le(&coeffs, 1, 0);
        }
    }
    let (mut vals, margin) = p.solve();
    if !margin.is_positive() {
        return Ok(None);
    }
    let bias = if mode == SeparationMode::Affine {
        vals.pop().expect("bias column")
    } else {
        Rational::zero()
    };
    Ok(Some(SeparatingFunctional {
        weights: vals,
        bias,
        margin,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// `-plus` is contained in `minus` and `minus` is separable.
    Inv1,
    /// `-minus` is contained in `plus` and `plus` is separable.
    Inv2,
    #[serde(rename = "none")]
    None,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Inv1 => "Inv1",
            Condition::Inv2 => "Inv2",
            Condition::None => "none",
        })
    }
}

fn sides(b: &BasicSet) -> (VertexSet, VertexSet) {
    (
        VertexSet {
            d: b.d,
            members: b.plus.clone(),
        },
        VertexSet {
            d: b.d,
            members: b.minus.clone(),
        },
    )
}

/// Evaluates the two sufficient realizability conditions, `Inv1` first.
pub fn check_realizable(b: &BasicSet) -> Result<Condition> {
    check_dimension(b.d)?;
    let (plus, minus) = sides(b);
    if plus.negated().is_subset(&minus) && is_linearly_separable(&minus, SeparationMode::Affine)?.is_some() {
        return Ok(Condition::Inv1);
    }
    if minus.negated().is_subset(&plus) && is_linearly_separable(&plus, SeparationMode::Affine)?.is_some() {
        return Ok(Condition::Inv2);
    }
    Ok(Condition::None)
}

/// Exact solution of the learning program.
#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    pub template: Template,
    pub a: Rational,
    pub alpha: Vec<Rational>,
    pub z: Rational,
    pub margin: Rational,
}

/// Finds `(a, alpha, z)` whose basic set is exactly `b`, maximizing the
/// smallest slack of the defining inequalities.
pub fn realize(b: &BasicSet) -> Result<Option<Realization>> {
    check_dimension(b.d)?;
    let d = b.d;
    // unknowns: a, z, alpha_1..alpha_d
    let mut p = SplitProgram::new(d + 2, REALIZE_BOX);
    for v in hypercube(d) {
        let av: Vec<i64> = v.iter().map(|&s| s as i64).collect();
        // a + z + alpha.v compared with 1
        let mut plus_row = vec![1, 1];
        plus_row.extend(&av);
        if b.plus.contains(&v) {
            p.ge(&plus_row, -1, 1);
        } else {
            p.le(&plus_row, 1, 1);
        }
        // a - z - alpha.v compared with 1
        let mut minus_row = vec![1, -1];
        minus_row.extend(av.iter().map(|c| -c));
        if b.minus.contains(&v) {
            p.ge(&minus_row, -1, 1);
        } else {
            p.le(&minus_row, 1, 1);
        }
    }
    let (vals, margin) = p.solve();
    if !margin.is_positive() {
        return Ok(None);
    }
    let to_f64 = |r: &Rational| r.to_f64().expect("bounded rational");
    let template = Template::new(
        to_f64(&vals[0]),
        vals[2..].iter().map(to_f64).collect::<Vec<_>>(),
        to_f64(&vals[1]),
    )?;
    let back = admissible_patterns(&template).map_err(|e| {
        Error::InternalInconsistency(format!("realized template lies on a boundary: {e}"))
    })?;
    if &back != b {
        return Err(Error::InternalInconsistency(
            "realized template does not reproduce the basic set".into(),
        ));
    }
    Ok(Some(Realization {
        template,
        a: vals[0].clone(),
        z: vals[1].clone(),
        alpha: vals[2..].to_vec(),
        margin,
    }))
}

/// Report `{realizable, condition, template?, margin}`.
#[derive(Clone, Debug, Serialize)]
pub struct RealizationReport {
    pub realizable: bool,
    pub condition: Condition,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub template: Option<TemplateDoc>,
    pub margin: f64,
}

pub fn realization_report(b: &BasicSet) -> Result<RealizationReport> {
    let condition = check_realizable(b)?;
    let found = realize(b)?;
    Ok(RealizationReport {
        realizable: found.is_some(),
        condition,
        margin: found.as_ref().map_or(0.0, |r| r.margin.to_f64().unwrap_or(0.0)),
        template: found.map(|r| r.template.to_doc()),
    })
}
