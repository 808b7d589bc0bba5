//! Dense two-phase simplex for canonical-form linear programs
//! `min cᵀg  s.t.  A g = b, g ≥ 0`.
//!
//! The controller's programs are small (tens of rows and columns) and dense,
//! so a tableau method is the right tool. The default pivot rule is largest
//! reduced cost; after `50·M` pivots the solver falls back to Bland's rule,
//! which guarantees termination on degenerate instances.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Optimality tolerance on reduced costs.
const OPT_TOL: f64 = 1e-10;
/// Feasibility tolerance on the phase-1 objective.
const FEAS_TOL: f64 = 1e-9;
/// Smallest pivot element accepted in the ratio test.
const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: A is {rows}×{cols}, c has {cost} entries, b has {rhs}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        cost: usize,
        rhs: usize,
    },
    #[error("problem data contains non-finite entries")]
    NonFinite,
    #[error(
        "numerical breakdown after {pivots} pivots (largest tableau entry {max_abs:.3e}); \
         the basis is likely ill-conditioned"
    )]
    NumericalBreakdown { pivots: usize, max_abs: f64 },
}

/// `min cᵀg  s.t.  A g = b, g ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalLp {
    pub cost: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Optional column names for diagnostics (empty or one per column).
    pub names: Vec<String>,
}

impl CanonicalLp {
    pub fn new(cost: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>) -> Self {
        Self {
            cost,
            a,
            b,
            names: Vec::new(),
        }
    }

    fn validate(&self) -> Result<(), LpError> {
        if self.cost.len() != self.a.ncols() || self.b.len() != self.a.nrows() {
            return Err(LpError::DimensionMismatch {
                rows: self.a.nrows(),
                cols: self.a.ncols(),
                cost: self.cost.len(),
                rhs: self.b.len(),
            });
        }
        let finite = self.cost.iter().all(|v| v.is_finite())
            && self.b.iter().all(|v| v.is_finite())
            && self.a.iter().all(|v| v.is_finite());
        if !finite {
            return Err(LpError::NonFinite);
        }
        Ok(())
    }

    /// Plain-text dump of `(c, A, b)` for cross-checking with external
    /// solvers. Format: a comment line, then `c`, `A` (row per line), `b`.
    pub fn write_debug(&self, mut w: impl std::io::Write) -> std::io::Result<()> {
        writeln!(w, "# canonical LP: min c^T g  s.t.  A g = b, g >= 0")?;
        writeln!(w, "# {} rows, {} columns", self.a.nrows(), self.a.ncols())?;
        if !self.names.is_empty() {
            writeln!(w, "# columns: {}", self.names.join(" "))?;
        }
        let fmt = |v: &f64| format!("{v:.17e}");
        writeln!(
            w,
            "c {}",
            self.cost.iter().map(fmt).collect::<Vec<_>>().join(" ")
        )?;
        for i in 0..self.a.nrows() {
            writeln!(
                w,
                "A {}",
                self.a.row(i).iter().map(fmt).collect::<Vec<_>>().join(" ")
            )?;
        }
        writeln!(
            w,
            "b {}",
            self.b.iter().map(fmt).collect::<Vec<_>>().join(" ")
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solution of a [`CanonicalLp`].
///
/// `g` and `objective` are meaningful only when `status` is `Optimal`
/// (`objective` is NaN otherwise).
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub g: DVector<f64>,
    pub objective: f64,
    pub status: LpStatus,
    /// Basic column indices of the final basis, in row order.
    pub basis: Vec<usize>,
    /// Total simplex pivots across both phases.
    pub pivots: usize,
}

struct Tableau {
    /// m rows of `cols + 1` entries; the last entry is the rhs.
    rows: Vec<Vec<f64>>,
    /// Reduced-cost row of `cols + 1` entries; last entry is −objective.
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// Columns eligible to enter (structural only in phase 2).
    eligible: usize,
    pivots: usize,
    bland_after: usize,
    hard_cap: usize,
}

enum RunOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c];
        let width = self.rows[r].len();
        for j in 0..width {
            self.rows[r][j] /= piv;
        }
        self.rows[r][c] = 1.0;
        for i in 0..self.rows.len() {
            if i != r {
                let factor = self.rows[i][c];
                if factor != 0.0 {
                    for j in 0..width {
                        self.rows[i][j] -= factor * self.rows[r][j];
                    }
                    self.rows[i][c] = 0.0;
                }
            }
        }
        let factor = self.cost[c];
        if factor != 0.0 {
            for j in 0..width {
                self.cost[j] -= factor * self.rows[r][j];
            }
            self.cost[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn entering(&self) -> Option<usize> {
        if self.pivots >= self.bland_after {
            // Bland: lowest-index improving column.
            (0..self.eligible).find(|&j| self.cost[j] < -OPT_TOL)
        } else {
            // Dantzig: most negative reduced cost, lowest index on ties.
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.eligible {
                let rc = self.cost[j];
                if rc < -OPT_TOL && best.is_none_or(|(_, b)| rc < b) {
                    best = Some((j, rc));
                }
            }
            best.map(|(j, _)| j)
        }
    }

    fn leaving(&self, c: usize) -> Option<usize> {
        let rhs = self.rows[0].len() - 1;
        let bland = self.pivots >= self.bland_after;
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.rows.len() {
            let a = self.rows[r][c];
            if a > PIVOT_TOL {
                let ratio = self.rows[r][rhs] / a;
                let better = match best {
                    None => true,
                    Some((br, bratio)) => {
                        if (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs()) {
                            // Tie break: smallest basis index under Bland,
                            // smallest row index otherwise.
                            if bland {
                                self.basis[r] < self.basis[br]
                            } else {
                                false
                            }
                        } else {
                            ratio < bratio
                        }
                    }
                };
                if better {
                    best = Some((r, ratio));
                }
            }
        }
        best.map(|(r, _)| r)
    }

    fn run(&mut self) -> Result<RunOutcome, LpError> {
        loop {
            let Some(c) = self.entering() else {
                return Ok(RunOutcome::Optimal);
            };
            let Some(r) = self.leaving(c) else {
                return Ok(RunOutcome::Unbounded);
            };
            self.pivot(r, c);
            if self.pivots > self.hard_cap {
                let max_abs = self
                    .rows
                    .iter()
                    .flat_map(|row| row.iter())
                    .fold(0.0_f64, |m, v| m.max(v.abs()));
                return Err(LpError::NumericalBreakdown {
                    pivots: self.pivots,
                    max_abs,
                });
            }
        }
    }

    fn objective(&self) -> f64 {
        -self.cost[self.cost.len() - 1]
    }
}

/// Solve a canonical-form LP.
///
/// Deterministic: identical inputs take identical pivot sequences.
pub fn solve(lp: &CanonicalLp) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let m = lp.a.nrows();
    let n = lp.a.ncols();
    let total = n + m;

    // Tableau with artificial columns n..n+m and b scaled non-negative.
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![0.0; total + 1];
        let flip = if lp.b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            row[j] = flip * lp.a[(i, j)];
        }
        row[n + i] = 1.0;
        row[total] = flip * lp.b[i];
        rows.push(row);
    }

    // Phase-1 reduced costs: minimize the sum of artificials.
    let mut cost = vec![0.0; total + 1];
    for row in &rows {
        for (j, v) in cost.iter_mut().enumerate().take(n) {
            *v -= row[j];
        }
        cost[total] -= row[total];
    }

    let mut tab = Tableau {
        rows,
        cost,
        basis: (n..total).collect(),
        eligible: total,
        pivots: 0,
        bland_after: 50 * total.max(1),
        hard_cap: 50 * total.max(1) + 200 * total.max(1) + 10_000,
    };

    match tab.run()? {
        RunOutcome::Unbounded => {
            // Phase 1 is bounded below by zero; an unbounded ray here means
            // the arithmetic has broken down.
            return Err(LpError::NumericalBreakdown {
                pivots: tab.pivots,
                max_abs: f64::INFINITY,
            });
        }
        RunOutcome::Optimal => {}
    }
    if tab.objective() > FEAS_TOL {
        return Ok(LpSolution {
            g: DVector::zeros(n),
            objective: f64::NAN,
            status: LpStatus::Infeasible,
            basis: Vec::new(),
            pivots: tab.pivots,
        });
    }

    // Drive leftover artificials out of the basis; rows that cannot pivot on
    // any structural column are redundant and dropped.
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| tab.rows[r][j].abs() > PIVOT_TOL) {
                tab.pivot(r, c);
            } else {
                tab.rows.remove(r);
                tab.basis.remove(r);
                continue;
            }
        }
        r += 1;
    }

    // Phase 2: original cost over structural columns, reduced by the basis.
    let rhs_col = total;
    tab.cost = vec![0.0; total + 1];
    for j in 0..n {
        tab.cost[j] = lp.cost[j];
    }
    for r in 0..tab.rows.len() {
        let cb = lp.cost[tab.basis[r]];
        if cb != 0.0 {
            for j in 0..=rhs_col {
                tab.cost[j] -= cb * tab.rows[r][j];
            }
        }
    }
    for j in 0..tab.rows.len() {
        // Basic columns must have exactly zero reduced cost.
        tab.cost[tab.basis[j]] = 0.0;
    }
    tab.eligible = n;

    match tab.run()? {
        RunOutcome::Unbounded => Ok(LpSolution {
            g: DVector::zeros(n),
            objective: f64::NAN,
            status: LpStatus::Unbounded,
            basis: tab.basis.clone(),
            pivots: tab.pivots,
        }),
        RunOutcome::Optimal => {
            let mut g = DVector::zeros(n);
            for (r, &b) in tab.basis.iter().enumerate() {
                if b < n {
                    g[b] = tab.rows[r][rhs_col];
                }
            }
            let objective = lp.cost.dot(&g);
            let solution = LpSolution {
                g,
                objective,
                status: LpStatus::Optimal,
                basis: tab.basis.clone(),
                pivots: tab.pivots,
            };
            check_solution(lp, &solution, tab.pivots)?;
            Ok(solution)
        }
    }
}

/// Post-solve sanity: `‖A g − b‖∞ ≤ 1e-8 (1 + ‖b‖∞)` and `g ≥ −1e-10`.
fn check_solution(lp: &CanonicalLp, sol: &LpSolution, pivots: usize) -> Result<(), LpError> {
    let residual = (&lp.a * &sol.g - &lp.b).amax();
    let bound = 1e-8 * (1.0 + lp.b.amax());
    let min_g = sol.g.iter().cloned().fold(f64::INFINITY, f64::min);
    if residual > bound || min_g < -1e-10 {
        return Err(LpError::NumericalBreakdown {
            pivots,
            max_abs: residual,
        });
    }
    Ok(())
}

/// Minimum-norm least-squares step `J† rhs` through a rank-revealing SVD.
///
/// The unconstrained 2-norm baseline the canonical program is compared
/// against in tests.
pub fn pseudoinverse_step(j: &DMatrix<f64>, rhs: &DVector<f64>) -> DVector<f64> {
    let svd = j.clone().svd(true, true);
    svd.solve(rhs, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(j.ncols()))
}
