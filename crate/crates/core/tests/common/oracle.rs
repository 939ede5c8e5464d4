//! Brute-force LP oracle: enumerate every basic solution of `A·x = b`,
//! keep the feasible ones and return the best objective.

use nalgebra::{DMatrix, DVector};

const TOL: f64 = 1e-9;

fn rank(rows: &[Vec<f64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    m.rank(1e-10)
}

/// Minimum of `c·x` over `{x ≥ 0 : A·x = b}`, or `None` if infeasible.
/// The feasible set must be bounded.
pub fn min_by_vertex_enumeration(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<(f64, Vec<f64>)> {
    let n = c.len();
    // Keep a maximal set of independent rows.
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    for (row, &bi) in a.iter().zip(b) {
        let mut trial = rows.clone();
        trial.push(row.clone());
        if rank(&trial) > rows.len() {
            rows = trial;
            rhs.push(bi);
        }
    }
    let m = rows.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for basis in combinations(n, m) {
        let bm = DMatrix::from_fn(m, m, |i, k| rows[i][basis[k]]);
        let Some(inv) = bm.clone().try_inverse() else { continue };
        if bm.rank(1e-10) < m {
            continue;
        }
        let xb = inv * DVector::from_column_slice(&rhs);
        if xb.iter().any(|&v| v < -TOL) {
            continue;
        }
        let mut x = vec![0.0; n];
        for (k, &j) in basis.iter().enumerate() {
            x[j] = xb[k].max(0.0);
        }
        let feasible = a.iter().zip(b).all(|(row, &bi)| {
            (row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() - bi).abs() <= TOL * bi.abs().max(1.0)
        });
        if !feasible {
            continue;
        }
        let value: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            best = Some((value, x));
        }
    }
    best
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Largest trace of a row-stochastic `R` with `Rᵀ·f = c`, by enumeration.
pub fn max_structural_trace(f: [f64; 3], c: [f64; 3]) -> Option<f64> {
    let mut obj = vec![0.0; 9];
    for i in 0..3 {
        obj[4 * i] = -1.0;
    }
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in 0..3 {
        let mut row = vec![0.0; 9];
        for i in 0..3 {
            row[3 * i + j] = f[i];
        }
        a.push(row);
        b.push(c[j]);
    }
    for i in 0..3 {
        let mut row = vec![0.0; 9];
        row[3 * i..3 * i + 3].fill(1.0);
        a.push(row);
        b.push(1.0);
    }
    min_by_vertex_enumeration(&obj, &a, &b).map(|(v, _)| -v)
}
