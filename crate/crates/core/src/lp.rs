//! Dense two-phase simplex with Bland's rule, and the matrix-game solver
//! built on it.
//!
//! Sized for desk-scale games (tens of rows and columns); the tableau is a
//! plain `Vec<Vec<f64>>`.

use crate::error::{Error, Result};

const EPS: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize cᵀx` subject to the constraints and `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColKind {
    Original,
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    /// reduced-cost row; last entry is minus the objective value
    obj: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<ColKind>,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        *self.rows[i].last().unwrap()
    }

    fn ncols(&self) -> usize {
        self.kinds.len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                row.iter_mut().zip(&pivot_row).for_each(|(v, pr)| *v -= f * pr);
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            self.obj.iter_mut().zip(&pivot_row).for_each(|(v, pr)| *v -= f * pr);
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Rebuilds the reduced-cost row for cost vector `cost`.
    fn set_objective(&mut self, cost: &[f64]) {
        let n = self.ncols();
        let mut obj = vec![0.0; n + 1];
        obj[..n].copy_from_slice(cost);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb != 0.0 {
                obj.iter_mut().zip(&self.rows[i]).for_each(|(v, a)| *v -= cb * a);
            }
        }
        self.obj = obj;
    }

    /// Runs simplex iterations with Bland's rule over the allowed columns.
    fn optimize(&mut self, allowed: impl Fn(usize) -> bool) -> Result<()> {
        let max_iters = 50_000;
        for _ in 0..max_iters {
            let entering = (0..self.ncols()).find(|&j| allowed(j) && self.obj[j] < -EPS);
            let Some(c) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > EPS {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - EPS || (ratio <= lr + EPS && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else { return Err(Error::Unbounded) };
            self.pivot(r, c);
        }
        Err(Error::MaxItersExceeded { iters: max_iters, last_residual: f64::NAN })
    }
}

impl LinearProgram {
    pub fn solve(&self) -> Result<LpSolution> {
        let n = self.objective.len();
        let m = self.constraints.len();
        for c in &self.constraints {
            if c.coeffs.len() != n {
                return Err(Error::DimensionMismatch("constraint width differs from objective".into()));
            }
        }
        // normalize to rhs >= 0
        let rows: Vec<(Vec<f64>, Relation, f64)> = self
            .constraints
            .iter()
            .map(|c| {
                if c.rhs < 0.0 {
                    let rel = match c.relation {
                        Relation::Le => Relation::Ge,
                        Relation::Ge => Relation::Le,
                        Relation::Eq => Relation::Eq,
                    };
                    (c.coeffs.iter().map(|v| -v).collect(), rel, -c.rhs)
                } else {
                    (c.coeffs.clone(), c.relation, c.rhs)
                }
            })
            .collect();
        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let total = n + n_slack + n_art;
        let mut kinds = vec![ColKind::Original; n];
        kinds.extend(std::iter::repeat_n(ColKind::Slack, n_slack));
        kinds.extend(std::iter::repeat_n(ColKind::Artificial, n_art));

        let mut tab_rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let (mut si, mut ai) = (n, n + n_slack);
        for (coeffs, rel, rhs) in &rows {
            let mut row = vec![0.0; total + 1];
            row[..n].copy_from_slice(coeffs);
            row[total] = *rhs;
            match rel {
                Relation::Le => {
                    row[si] = 1.0;
                    basis.push(si);
                    si += 1;
                }
                Relation::Ge => {
                    row[si] = -1.0;
                    si += 1;
                    row[ai] = 1.0;
                    basis.push(ai);
                    ai += 1;
                }
                Relation::Eq => {
                    row[ai] = 1.0;
                    basis.push(ai);
                    ai += 1;
                }
            }
            tab_rows.push(row);
        }
        let mut tab = Tableau {
            rows: tab_rows,
            obj: Vec::new(),
            basis,
            kinds,
        };

        // phase 1
        if n_art > 0 {
            let cost: Vec<f64> = tab
                .kinds
                .iter()
                .map(|k| if *k == ColKind::Artificial { 1.0 } else { 0.0 })
                .collect();
            tab.set_objective(&cost);
            tab.optimize(|_| true)?;
            let infeas = -tab.obj[total];
            if infeas > 1e-9 {
                return Err(Error::Infeasible);
            }
            // drive zero-level artificials out of the basis where possible
            for i in 0..m {
                if tab.kinds[tab.basis[i]] == ColKind::Artificial {
                    if let Some(c) = (0..total).find(|&j| tab.kinds[j] != ColKind::Artificial && tab.rows[i][j].abs() > EPS) {
                        tab.pivot(i, c);
                    }
                }
            }
        }

        // phase 2
        let mut cost = vec![0.0; total];
        cost[..n].copy_from_slice(&self.objective);
        tab.set_objective(&cost);
        let kinds = tab.kinds.clone();
        tab.optimize(|j| kinds[j] != ColKind::Artificial)?;

        let mut x = vec![0.0; n];
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < n {
                x[b] = tab.rhs(i).max(0.0);
            }
        }
        let objective = self.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution { x, objective })
    }
}

/// Solution of `max_φ min_j Σ_a φ(a) M(a, j)` over the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameSolution {
    /// Value guaranteed by `row_strategy`: `min_j φᵀ M e_j`.
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    /// `max_a (M y)_a − min_j (φᵀ M)_j ≥ 0`, the certified duality gap.
    pub gap: f64,
}

fn clean_distribution(x: &[f64]) -> Vec<f64> {
    let v: Vec<f64> = x.iter().map(|&a| if a < 1e-13 { 0.0 } else { a }).collect();
    let s: f64 = v.iter().sum();
    v.iter().map(|a| a / s).collect()
}

/// Solves the zero-sum matrix game with row player maximizing. `payoff` is
/// indexed `[row][col]`.
pub fn solve_matrix_game(payoff: &[Vec<f64>]) -> Result<MatrixGameSolution> {
    let m = payoff.len();
    let n = payoff.first().map_or(0, Vec::len);
    if m == 0 || n == 0 || payoff.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch("payoff matrix must be non-empty and rectangular".into()));
    }
    let lo = payoff.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
    let shift = 1.0 - lo;
    let shifted = |a: usize, j: usize| payoff[a][j] + shift;

    // row player: vars φ_0..φ_{m-1}, t; minimize -t
    let mut objective = vec![0.0; m + 1];
    objective[m] = -1.0;
    let mut constraints: Vec<Constraint> = (0..n)
        .map(|j| {
            let mut c: Vec<f64> = (0..m).map(|a| -shifted(a, j)).collect();
            c.push(1.0);
            Constraint { coeffs: c, relation: Relation::Le, rhs: 0.0 }
        })
        .collect();
    let mut sum = vec![1.0; m];
    sum.push(0.0);
    constraints.push(Constraint { coeffs: sum, relation: Relation::Eq, rhs: 1.0 });
    let row = LinearProgram { objective, constraints }.solve()?;
    let phi = clean_distribution(&row.x[..m]);

    // column player: vars y_0..y_{n-1}, t; minimize t
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut constraints: Vec<Constraint> = (0..m)
        .map(|a| {
            let mut c: Vec<f64> = (0..n).map(|j| shifted(a, j)).collect();
            c.push(-1.0);
            Constraint { coeffs: c, relation: Relation::Le, rhs: 0.0 }
        })
        .collect();
    let mut sum = vec![1.0; n];
    sum.push(0.0);
    constraints.push(Constraint { coeffs: sum, relation: Relation::Eq, rhs: 1.0 });
    let col = LinearProgram { objective, constraints }.solve()?;
    let y = clean_distribution(&col.x[..n]);

    let lower = (0..n)
        .map(|j| (0..m).map(|a| phi[a] * payoff[a][j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let upper = (0..m)
        .map(|a| (0..n).map(|j| y[j] * payoff[a][j]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(MatrixGameSolution {
        value: lower,
        row_strategy: phi,
        col_strategy: y,
        gap: (upper - lower).max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_lp() {
        // max 3x + 5y  s.t. x <= 4, 2y <= 12, 3x + 2y <= 18  → (2, 6), 36
        let lp = LinearProgram {
            objective: vec![-3.0, -5.0],
            constraints: vec![
                Constraint { coeffs: vec![1.0, 0.0], relation: Relation::Le, rhs: 4.0 },
                Constraint { coeffs: vec![0.0, 2.0], relation: Relation::Le, rhs: 12.0 },
                Constraint { coeffs: vec![3.0, 2.0], relation: Relation::Le, rhs: 18.0 },
            ],
        };
        let sol = lp.solve().unwrap();
        assert!((sol.objective + 36.0).abs() < 1e-12);
        assert!((sol.x[0] - 2.0).abs() < 1e-12 && (sol.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn needs_phase_one() {
        // min x + y s.t. x + y >= 2, x - y = 0.5
        let lp = LinearProgram {
            objective: vec![1.0, 1.0],
            constraints: vec![
                Constraint { coeffs: vec![1.0, 1.0], relation: Relation::Ge, rhs: 2.0 },
                Constraint { coeffs: vec![1.0, -1.0], relation: Relation::Eq, rhs: 0.5 },
            ],
        };
        let sol = lp.solve().unwrap();
        assert!((sol.objective - 2.0).abs() < 1e-12);
        assert!((sol.x[0] - 1.25).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LinearProgram {
            objective: vec![1.0],
            constraints: vec![
                Constraint { coeffs: vec![1.0], relation: Relation::Le, rhs: 1.0 },
                Constraint { coeffs: vec![1.0], relation: Relation::Ge, rhs: 2.0 },
            ],
        };
        assert!(matches!(lp.solve(), Err(Error::Infeasible)));
        let lp = LinearProgram {
            objective: vec![-1.0],
            constraints: vec![Constraint { coeffs: vec![1.0], relation: Relation::Ge, rhs: 1.0 }],
        };
        assert!(matches!(lp.solve(), Err(Error::Unbounded)));
    }

    #[test]
    fn two_by_two_closed_form() {
        // equalize 3p + (1-p) = 0p + 2(1-p)  → p = 1/4, value 1.5
        let sol = solve_matrix_game(&[vec![3.0, 0.0], vec![1.0, 2.0]]).unwrap();
        assert!((sol.value - 1.5).abs() < 1e-12);
        assert!((sol.row_strategy[0] - 0.25).abs() < 1e-12);
        assert!((sol.row_strategy[1] - 0.75).abs() < 1e-12);
        assert!(sol.gap < 1e-12);
    }

    #[test]
    fn matching_pennies() {
        let sol = solve_matrix_game(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((sol.value - 0.5).abs() < 1e-12);
        assert_eq!(sol.row_strategy, vec![0.5, 0.5]);
    }

    #[test]
    fn saddle_point_and_degenerate_games() {
        let sol = solve_matrix_game(&[vec![2.0, 3.0], vec![1.0, 4.0]]).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-12);
        let sol = solve_matrix_game(&[vec![1.0, 1.0, 1.0]]).unwrap();
        assert!((sol.value - 1.0).abs() < 1e-12);
        let sol = solve_matrix_game(&vec![vec![0.0; 3]; 3]).unwrap();
        assert!(sol.value.abs() < 1e-12 && sol.gap < 1e-12);
    }
}
