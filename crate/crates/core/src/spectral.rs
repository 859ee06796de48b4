//! Perron root of nonnegative matrices.
//!
//! The matrix is split into strongly connected components of its support
//! graph; the spectral radius is the largest Perron root over the irreducible
//! diagonal blocks. Each block `B` is iterated as `B + I`, which is primitive,
//! starting from the all-ones vector. The Collatz–Wielandt quotients
//! `min (Ax)_i / x_i <= rho <= max (Ax)_i / x_i` bracket the root at every step,
//! so the iteration stops once the bracket is narrower than the tolerance.
//! Splitting first keeps reducible inputs (Jordan-like chains of equal roots)
//! from degrading to the `O(1/n)` convergence of a plain power iteration.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 100_000;
pub const TOLERANCE: f64 = 1e-13;

pub fn spectral_radius(m: &[Vec<f64>]) -> Result<f64> {
    let n = m.len();
    if n == 0 {
        return Err(Error::InvalidInput("matrix must have dimension at least 1".into()));
    }
    for row in m {
        if row.len() != n {
            return Err(Error::InvalidInput("matrix must be square".into()));
        }
        if row.iter().any(|&v| v < 0.0 || !v.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite and nonnegative".into()));
        }
    }

    let mut graph = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if m[i][j] > 0.0 {
                graph.add_edge(nodes[i], nodes[j], ());
            }
        }
    }

    let mut rho = 0.0f64;
    for component in tarjan_scc(&graph) {
        let idx: Vec<usize> = component.iter().map(|v| v.index()).collect();
        let r = if idx.len() == 1 {
            m[idx[0]][idx[0]]
        } else {
            irreducible_root(m, &idx)?
        };
        rho = rho.max(r);
    }
    Ok(rho)
}

fn irreducible_root(m: &[Vec<f64>], idx: &[usize]) -> Result<f64> {
    let n = idx.len();
    let mut x = vec![1.0f64; n];
    let mut y = vec![0.0f64; n];
    for _ in 0..MAX_ITERATIONS {
        for (a, &i) in idx.iter().enumerate() {
            y[a] = x[a] + idx.iter().enumerate().map(|(b, &j)| m[i][j] * x[b]).sum::<f64>();
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for a in 0..n {
            let q = y[a] / x[a];
            lo = lo.min(q);
            hi = hi.max(q);
        }
        if hi - lo <= TOLERANCE * hi.max(1.0) {
            return Ok(0.5 * (lo + hi) - 1.0);
        }
        let scale = y.iter().copied().fold(0.0f64, f64::max);
        for a in 0..n {
            x[a] = y[a] / scale;
        }
    }
    Err(Error::NumericalFailure(format!(
        "power iteration did not converge within {MAX_ITERATIONS} steps"
    )))
}

/// Spectral radius of a nonnegative integer matrix.
pub fn spectral_radius_int(m: &[Vec<u32>]) -> Result<f64> {
    let f: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    spectral_radius(&f)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Largest real root of a monic polynomial by bisection on `[lo, hi]`.
    fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo).signum() == f(mid).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn triangular() {
        assert!((spectral_radius(&[vec![2.0, 0.0], vec![1.0, 1.0]]).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn tribonacci_root() {
        let m = vec![vec![1.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        let root = bisect(|x| x * x * x - x * x - x - 1.0, 1.5, 2.0);
        let rho = spectral_radius(&m).unwrap();
        assert!((rho - root).abs() < 1e-12, "{rho} vs {root}");
        assert!((rho - 1.839287).abs() < 1e-6);
    }

    #[test]
    fn periodic_matrix() {
        // characteristic polynomial x^2 - 2
        let rho = spectral_radius(&[vec![0.0, 2.0], vec![1.0, 0.0]]).unwrap();
        assert!((rho - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn reducible_chain_of_equal_roots() {
        let rho = spectral_radius(&[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0], vec![0.0, 0.0, 1.0]]).unwrap();
        assert!((rho - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nilpotent_and_zero() {
        assert_eq!(spectral_radius(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap(), 0.0);
        assert_eq!(spectral_radius(&[vec![0.0]]).unwrap(), 0.0);
    }

    #[test]
    fn long_cycle() {
        let n = 6;
        let m: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if j == (i + 1) % n { 1.0 } else { 0.0 }).collect())
            .collect();
        assert!((spectral_radius(&m).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(spectral_radius(&[]).is_err());
        assert!(spectral_radius(&[vec![1.0, 2.0]]).is_err());
        assert!(spectral_radius(&[vec![-1.0]]).is_err());
    }
}
