//! Dense two-phase simplex with Bland's pivoting rule. Fully deterministic:
//! identical inputs produce bit-identical solutions. Built for desk-scale
//! problems (up to a few thousand variables).

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-8;
const MAX_ITERS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarBound {
    /// x >= 0
    NonNegative,
    /// unbounded in both directions
    Free,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub maximize: bool,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBound>,
}

impl LinearProgram {
    pub fn new(maximize: bool, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            maximize,
            objective,
            constraints: Vec::new(),
            bounds: vec![VarBound::NonNegative; n],
        }
    }

    pub fn constrain(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, sense, rhs });
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
}

struct Tableau {
    rows: Vec<Vec<f64>>, // m x (n_cols + 1), last column is rhs
    basis: Vec<usize>,
    n_cols: usize,
}

impl Tableau {
    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.rows[row][col];
        for x in self.rows[row].iter_mut() {
            *x /= piv;
        }
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let factor = r[col];
            if factor != 0.0 {
                for (x, p) in r.iter_mut().zip(&pivot_row) {
                    *x -= factor * p;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule simplex on a maximization objective over the current
    /// columns. Returns Ok(true) on optimality, Ok(false) on unboundedness.
    fn optimize(&mut self, cost: &[f64], allowed: &dyn Fn(usize) -> bool) -> Result<bool> {
        for _ in 0..MAX_ITERS {
            // Reduced costs r_j = c_j - c_B . T_j
            let mut entering = None;
            for j in 0..self.n_cols {
                if !allowed(j) || self.basis.contains(&j) {
                    continue;
                }
                let mut r = cost[j];
                for (i, row) in self.rows.iter().enumerate() {
                    r -= cost[self.basis[i]] * row[j];
                }
                if r > PIVOT_TOL {
                    entering = Some(j);
                    break; // lowest index
                }
            }
            let Some(col) = entering else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[col] > PIVOT_TOL {
                    let ratio = row[self.n_cols] / row[col];
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - PIVOT_TOL
                                || (ratio <= lr + PIVOT_TOL && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Ok(false);
            };
            self.pivot(row, col);
        }
        Err(Error::Numerical(
            "simplex exceeded the iteration limit".into(),
        ))
    }
}

/// Solves an LP. `status` reports optimal/infeasible/unbounded; optimal
/// solutions satisfy every constraint within 1e-8 or an explicit numerical
/// failure is raised instead of a wrong answer.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    let n = lp.objective.len();
    if lp.bounds.len() != n {
        return Err(Error::validation("bounds length must match objective"));
    }
    for c in &lp.constraints {
        if c.coeffs.len() != n {
            return Err(Error::validation("constraint arity must match objective"));
        }
        if !c.rhs.is_finite() || c.coeffs.iter().any(|x| !x.is_finite()) {
            return Err(Error::validation("non-finite LP coefficient"));
        }
    }
    if lp.objective.iter().any(|x| !x.is_finite()) {
        return Err(Error::validation("non-finite objective coefficient"));
    }

    // Column layout: original vars (free vars split into plus/minus), then one
    // slack/surplus per inequality, then artificials.
    let mut var_cols: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
    let mut n_cols = 0;
    for b in &lp.bounds {
        match b {
            VarBound::NonNegative => {
                var_cols.push((n_cols, None));
                n_cols += 1;
            }
            VarBound::Free => {
                var_cols.push((n_cols, Some(n_cols + 1)));
                n_cols += 2;
            }
        }
    }
    let m = lp.constraints.len();
    let slack_start = n_cols;

    // Normalize rows to nonnegative rhs, note slack/artificial needs.
    struct Row {
        coeffs: Vec<f64>,
        rhs: f64,
        slack: Option<f64>, // +1 or -1
        needs_artificial: bool,
    }
    let mut rows: Vec<Row> = Vec::with_capacity(m);
    for c in &lp.constraints {
        let flip = c.rhs < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        let sense = if flip {
            match c.sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            }
        } else {
            c.sense
        };
        let (slack, needs_artificial) = match sense {
            Sense::Le => (Some(1.0), false),
            Sense::Ge => (Some(-1.0), true),
            Sense::Eq => (None, true),
        };
        rows.push(Row {
            coeffs: c.coeffs.iter().map(|x| sign * x).collect(),
            rhs: sign * c.rhs,
            slack,
            needs_artificial,
        });
    }
    let n_slacks = rows.iter().filter(|r| r.slack.is_some()).count();
    let art_start = slack_start + n_slacks;
    let n_arts = rows.iter().filter(|r| r.needs_artificial).count();
    let total_cols = art_start + n_arts;

    let mut tab = Tableau {
        rows: vec![vec![0.0; total_cols + 1]; m],
        basis: vec![0; m],
        n_cols: total_cols,
    };
    let mut slack_idx = slack_start;
    let mut art_idx = art_start;
    for (i, r) in rows.iter().enumerate() {
        for (v, &(plus, minus)) in var_cols.iter().enumerate() {
            tab.rows[i][plus] = r.coeffs[v];
            if let Some(mcol) = minus {
                tab.rows[i][mcol] = -r.coeffs[v];
            }
        }
        tab.rows[i][total_cols] = r.rhs;
        if let Some(sign) = r.slack {
            tab.rows[i][slack_idx] = sign;
            if sign > 0.0 && !r.needs_artificial {
                tab.basis[i] = slack_idx;
            }
            slack_idx += 1;
        }
        if r.needs_artificial {
            tab.rows[i][art_idx] = 1.0;
            tab.basis[i] = art_idx;
            art_idx += 1;
        }
    }

    // Phase 1: maximize -(sum of artificials).
    if n_arts > 0 {
        let mut cost = vec![0.0; total_cols];
        for j in art_start..total_cols {
            cost[j] = -1.0;
        }
        if !tab.optimize(&cost, &|_| true)? {
            return Err(Error::Numerical(
                "phase-1 objective unbounded (internal inconsistency)".into(),
            ));
        }
        let infeas: f64 = tab
            .rows
            .iter()
            .enumerate()
            .filter(|(i, _)| tab.basis[*i] >= art_start)
            .map(|(_, row)| row[total_cols])
            .sum();
        if infeas > FEAS_TOL {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: vec![0.0; n],
                objective: f64::NAN,
            });
        }
        // Drive remaining artificials out of the basis where possible.
        for i in 0..m {
            if tab.basis[i] >= art_start {
                if let Some(col) = (0..art_start).find(|&j| tab.rows[i][j].abs() > PIVOT_TOL) {
                    tab.pivot(i, col);
                }
                // A row still basic in an artificial is redundant (rhs ~ 0);
                // the artificial column stays blocked in phase 2.
            }
        }
    }

    // Phase 2 on the real objective (as maximization).
    let obj_sign = if lp.maximize { 1.0 } else { -1.0 };
    let mut cost = vec![0.0; total_cols];
    for (v, &(plus, minus)) in var_cols.iter().enumerate() {
        cost[plus] = obj_sign * lp.objective[v];
        if let Some(mcol) = minus {
            cost[mcol] = -obj_sign * lp.objective[v];
        }
    }
    let optimal = tab.optimize(&cost, &|j| j < art_start)?;
    if !optimal {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: vec![0.0; n],
            objective: if lp.maximize {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            },
        });
    }

    let mut col_values = vec![0.0; total_cols];
    for (i, &b) in tab.basis.iter().enumerate() {
        col_values[b] = tab.rows[i][total_cols];
    }
    let x: Vec<f64> = var_cols
        .iter()
        .map(|&(plus, minus)| match minus {
            Some(mcol) => col_values[plus] - col_values[mcol],
            None => col_values[plus],
        })
        .collect();

    // Never report a wrong "optimal": re-check primal feasibility.
    let scale = lp
        .constraints
        .iter()
        .map(|c| c.rhs.abs())
        .fold(1.0, f64::max);
    for (k, c) in lp.constraints.iter().enumerate() {
        let lhs: f64 = c.coeffs.iter().zip(&x).map(|(a, b)| a * b).sum();
        let viol = match c.sense {
            Sense::Le => lhs - c.rhs,
            Sense::Ge => c.rhs - lhs,
            Sense::Eq => (lhs - c.rhs).abs(),
        };
        if viol > FEAS_TOL * scale.max(lhs.abs()) {
            return Err(Error::Numerical(format!(
                "simplex produced an infeasible point (constraint {k} violated by {viol:.3e})"
            )));
        }
    }

    let objective: f64 = lp.objective.iter().zip(&x).map(|(a, b)| a * b).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
    })
}
