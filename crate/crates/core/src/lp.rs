//! Dense two-phase simplex for small equality-form programs.
//!
//! Solves `min c·x  s.t.  A·x = b, x ≥ 0`. Entering and leaving variables are
//! chosen by Bland's rule (lowest index), so the pivot sequence and the
//! returned vertex are fully determined by the input.

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("constraint row {row} has {found} coefficients, expected {expected}")]
    Dimension { row: usize, found: usize, expected: usize },
    #[error("{rows} constraint rows but {rhs} right-hand sides")]
    RhsLength { rows: usize, rhs: usize },
    #[error("program has no variables")]
    Empty,
    #[error("non-finite coefficient in the program")]
    NonFinite,
}

/// Absolute threshold below which a pivot candidate is treated as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-10;
const REDUCED_COST_TOLERANCE: f64 = 1e-11;
const MAX_PIVOTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Vec<f64>>,
    rhs: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, constraints: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self, LpError> {
        let n = objective.len();
        if n == 0 {
            return Err(LpError::Empty);
        }
        if constraints.len() != rhs.len() {
            return Err(LpError::RhsLength { rows: constraints.len(), rhs: rhs.len() });
        }
        for (row, a) in constraints.iter().enumerate() {
            if a.len() != n {
                return Err(LpError::Dimension { row, found: a.len(), expected: n });
            }
        }
        let finite = objective.iter().chain(rhs.iter()).chain(constraints.iter().flatten()).all(|v| v.is_finite());
        if !finite {
            return Err(LpError::NonFinite);
        }
        Ok(Self { objective, constraints, rhs })
    }

    pub fn var_count(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Vec<f64>] {
        &self.constraints
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// `‖A·x − b‖∞`.
    pub fn residual(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a.iter().zip(x).map(|(ai, xi)| ai * xi).sum::<f64>() - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Pivot budget exhausted; only reachable through numerical cycling.
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    /// Empty unless `status` is `Optimal`.
    pub x: Vec<f64>,
    pub objective_value: f64,
    pub status: LpStatus,
}

impl LpSolution {
    fn failed(status: LpStatus) -> Self {
        let objective_value = match status {
            LpStatus::Unbounded => f64::NEG_INFINITY,
            _ => f64::NAN,
        };
        Self { x: Vec::new(), objective_value, status }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Simplex tableau: `rows[i]` holds the constraint coefficients followed by
/// the right-hand side; `cost` holds reduced costs and `-z` in the last slot.
struct Tableau {
    rows: Vec<Vec<f64>>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.cost[c];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Runs Bland-rule pivots over columns `0..allowed`.
    fn optimize(&mut self, allowed: usize, budget: &mut usize) -> Outcome {
        loop {
            let Some(entering) = (0..allowed).find(|&j| self.cost[j] < -REDUCED_COST_TOLERANCE) else {
                return Outcome::Optimal;
            };
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][entering];
                if a > PIVOT_TOLERANCE {
                    let ratio = self.rhs(i) / a;
                    let better = match leaving {
                        None => true,
                        Some((r, best)) => ratio < best || (ratio == best && self.basis[i] < self.basis[r]),
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leaving else {
                return Outcome::Unbounded;
            };
            if *budget == 0 {
                return Outcome::IterationLimit;
            }
            *budget -= 1;
            self.pivot(r, entering);
        }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> LpSolution {
    let n = lp.var_count();
    let m = lp.constraints.len();
    let width = n + m;
    let scale = lp.rhs.iter().fold(1.0_f64, |acc, b| acc.max(b.abs()));

    // Phase 1: artificial variable per row, rows flipped so b ≥ 0.
    let mut rows = Vec::with_capacity(m);
    for (i, (a, &b)) in lp.constraints.iter().zip(&lp.rhs).enumerate() {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; width + 1];
        for (j, &v) in a.iter().enumerate() {
            row[j] = sign * v;
        }
        row[n + i] = 1.0;
        row[width] = sign * b;
        rows.push(row);
    }
    let mut cost = vec![0.0; width + 1];
    for row in &rows {
        for j in 0..n {
            cost[j] -= row[j];
        }
        cost[width] -= row[width];
    }
    let mut t = Tableau { rows, cost, basis: (n..n + m).collect(), width };
    let mut budget = MAX_PIVOTS;

    match t.optimize(width, &mut budget) {
        Outcome::Optimal => {}
        Outcome::IterationLimit => return LpSolution::failed(LpStatus::IterationLimit),
        // Phase-1 objective is bounded below by zero.
        Outcome::Unbounded => unreachable!("phase-1 objective is bounded"),
    }
    if -t.cost[width] > 1e-9 * scale {
        return LpSolution::failed(LpStatus::Infeasible);
    }

    // Pivot remaining artificials out of the basis; rows where that is
    // impossible are linearly dependent and dropped.
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| t.rows[i][j].abs() > PIVOT_TOLERANCE) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    // Phase 2 over the original columns.
    let mut cost = vec![0.0; width + 1];
    cost[..n].copy_from_slice(&lp.objective);
    for (row, &b) in t.rows.iter().zip(&t.basis) {
        let cb = lp.objective[b];
        if cb != 0.0 {
            for (v, rv) in cost.iter_mut().zip(row) {
                *v -= cb * rv;
            }
        }
    }
    t.cost = cost;
    match t.optimize(n, &mut budget) {
        Outcome::Optimal => {}
        Outcome::Unbounded => return LpSolution::failed(LpStatus::Unbounded),
        Outcome::IterationLimit => return LpSolution::failed(LpStatus::IterationLimit),
    }

    let mut x = vec![0.0; n];
    for (i, &b) in t.basis.iter().enumerate() {
        x[b] = t.rhs(i).max(0.0);
    }
    let objective_value = x.iter().zip(&lp.objective).map(|(xi, ci)| xi * ci).sum();
    LpSolution { x, objective_value, status: LpStatus::Optimal }
}
