//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Solves `maximize c.x  s.t.  A x <= b, x >= 0`. Intended for the small
//! separation and realization programs in this crate; Bland's rule guarantees
//! termination and exact arithmetic makes every strict-inequality verdict exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<Rational>, value: Rational },
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    objective: Vec<Rational>,
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
}

impl LinearProgram {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            objective: vec![Rational::zero(); num_vars],
            rows: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn set_objective(&mut self, coeffs: Vec<Rational>) {
        assert_eq!(coeffs.len(), self.num_vars());
        self.objective = coeffs;
    }

    /// Adds `coeffs . x <= bound`.
    pub fn add_le(&mut self, coeffs: Vec<Rational>, bound: Rational) {
        assert_eq!(coeffs.len(), self.num_vars());
        self.rows.push(coeffs);
        self.rhs.push(bound);
    }

    /// Adds `coeffs . x >= bound`.
    pub fn add_ge(&mut self, coeffs: Vec<Rational>, bound: Rational) {
        self.add_le(coeffs.into_iter().map(|c| -c).collect(), -bound);
    }

    pub fn solve(&self) -> LpOutcome {
        Tableau::build(self).solve(&self.objective)
    }
}

struct Tableau {
    n: usize,
    /// First artificial column; columns `n..art_start` are slacks.
    art_start: usize,
    cols: usize,
    t: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Tableau {
        let n = lp.num_vars();
        let m = lp.rows.len();
        let negative: Vec<usize> = (0..m).filter(|&i| lp.rhs[i].is_negative()).collect();
        let art_start = n + m;
        let cols = art_start + negative.len();
        let mut t = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_art = art_start;
        for i in 0..m {
            let mut row = vec![Rational::zero(); cols];
            let flip = lp.rhs[i].is_negative();
            let sign = if flip { -Rational::one() } else { Rational::one() };
            for (cell, v) in row.iter_mut().zip(&lp.rows[i]) {
                *cell = v * &sign;
            }
            row[n + i] = sign.clone();
            if flip {
                row[next_art] = Rational::one();
                basis.push(next_art);
                next_art += 1;
            } else {
                basis.push(n + i);
            }
            t.push(row);
            rhs.push(&lp.rhs[i] * &sign);
        }
        Tableau {
            n,
            art_start,
            cols,
            t,
            rhs,
            basis,
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c].clone();
        for v in self.t[r].iter_mut() {
            *v = &*v / &p;
        }
        self.rhs[r] = &self.rhs[r] / &p;
        let prow = self.t[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.t.len() {
            if i == r || self.t[i][c].is_zero() {
                continue;
            }
            let f = self.t[i][c].clone();
            for (v, pv) in self.t[i].iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[i] = &self.rhs[i] - &f * &prhs;
        }
        self.basis[r] = c;
    }

    /// Maximizes `cost` over the columns in `active`. Returns false if unbounded.
    fn optimize(&mut self, cost: &[Rational], active: usize) -> bool {
        loop {
            let entering = (0..active).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut reduced = cost[j].clone();
                for (i, &b) in self.basis.iter().enumerate() {
                    if !cost[b].is_zero() && !self.t[i][j].is_zero() {
                        reduced -= &cost[b] * &self.t[i][j];
                    }
                }
                reduced.is_positive()
            });
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.t.len() {
                if self.t[i][c].is_positive() {
                    let ratio = &self.rhs[i] / &self.t[i][c];
                    let better = match &leave {
                        None => true,
                        Some((r, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*r]),
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    fn solve(mut self, objective: &[Rational]) -> LpOutcome {
        if self.art_start < self.cols {
            let mut phase1 = vec![Rational::zero(); self.cols];
            for v in phase1.iter_mut().skip(self.art_start) {
                *v = -Rational::one();
            }
            self.optimize(&phase1, self.cols);
            let infeasibility: Rational = self
                .basis
                .iter()
                .zip(&self.rhs)
                .filter(|(&b, _)| b >= self.art_start)
                .map(|(_, v)| v.clone())
                .sum();
            if infeasibility.is_positive() {
                return LpOutcome::Infeasible;
            }
            // Drive zero-level artificials out of the basis, dropping redundant rows.
            let mut i = 0;
            while i < self.t.len() {
                if self.basis[i] >= self.art_start {
                    match (0..self.art_start).find(|&j| !self.t[i][j].is_zero()) {
                        Some(j) => {
                            self.pivot(i, j);
                            i += 1;
                        }
                        None => {
                            self.t.remove(i);
                            self.rhs.remove(i);
                            self.basis.remove(i);
                        }
                    }
                } else {
                    i += 1;
                }
            }
        }
        let mut cost = vec![Rational::zero(); self.cols];
        cost[..self.n].clone_from_slice(objective);
        if !self.optimize(&cost, self.art_start) {
            return LpOutcome::Unbounded;
        }
        let mut x = vec![Rational::zero(); self.n];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.rhs[i].clone();
            }
        }
        let value = x.iter().zip(objective).map(|(a, b)| a * b).sum();
        LpOutcome::Optimal { x, value }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![rat(3), rat(5)]);
        lp.add_le(vec![rat(1), rat(0)], rat(4));
        lp.add_le(vec![rat(0), rat(2)], rat(12));
        lp.add_le(vec![rat(3), rat(2)], rat(18));
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(x, vec![rat(2), rat(6)]);
                assert_eq!(value, rat(36));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn needs_phase_one() {
        // max -x - y, x + y >= 1/2, x <= 3 -> value -1/2
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![rat(-1), rat(-1)]);
        lp.add_ge(vec![rat(1), rat(1)], r(1, 2));
        lp.add_le(vec![rat(1), rat(0)], rat(3));
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, r(-1, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1);
        lp.set_objective(vec![rat(1)]);
        lp.add_le(vec![rat(1)], rat(1));
        lp.add_ge(vec![rat(1)], rat(2));
        assert_eq!(lp.solve(), LpOutcome::Infeasible);

        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![rat(1), rat(0)]);
        lp.add_le(vec![rat(-1), rat(1)], rat(1));
        assert_eq!(lp.solve(), LpOutcome::Unbounded);
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Classic instance that cycles under the largest-coefficient rule.
        let mut lp = LinearProgram::new(4);
        lp.set_objective(vec![rat(10), rat(-57), rat(-9), rat(-24)]);
        lp.add_le(vec![r(1, 2), r(-11, 2), r(-5, 2), rat(9)], rat(0));
        lp.add_le(vec![r(1, 2), r(-3, 2), r(-1, 2), rat(1)], rat(0));
        lp.add_le(vec![rat(1), rat(0), rat(0), rat(0)], rat(1));
        match lp.solve() {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn redundant_equalities() {
        // x + y >= 1 twice and x + y <= 1: a redundant artificial row.
        let mut lp = LinearProgram::new(2);
        lp.set_objective(vec![rat(1), rat(2)]);
        lp.add_ge(vec![rat(1), rat(1)], rat(1));
        lp.add_ge(vec![rat(1), rat(1)], rat(1));
        lp.add_le(vec![rat(1), rat(1)], rat(1));
        match lp.solve() {
            LpOutcome::Optimal { x, value } => {
                assert_eq!(value, rat(2));
                assert_eq!(x, vec![rat(0), rat(1)]);
            }
            other => panic!("{other:?}"),
        }
    }
}
