//! Dense two-phase simplex with Bland's pivoting rule.
//!
//! Problems are stated as `maximize c.x` subject to rows `a_i.x (<=|=|>=) b_i`
//! with every variable either nonnegative or free. The tableau drives the
//! pivoting; once a basis is optimal the primal values and the duals are
//! recomputed from the original data with an LU solve, which keeps the
//! residuals at roundoff level regardless of how many pivots were taken.

use serde::Serialize;

use crate::error::{Error, Result};

/// Entering threshold on reduced costs.
pub const OPTIMALITY_TOL: f64 = 1e-10;
/// Phase-one objective above this means the problem is infeasible.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Smallest admissible pivot element.
pub const PIVOT_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RowKind {
    Le,
    Eq,
    Ge,
}

/// `maximize objective.x` subject to `rows[i].x kinds[i] rhs[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StandardLp {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub kinds: Vec<RowKind>,
    /// `true` for a free variable, `false` for `x_j >= 0`.
    pub free: Vec<bool>,
}

impl StandardLp {
    /// New problem with all variables nonnegative and no constraints.
    pub fn maximize(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self { objective, rows: Vec::new(), rhs: Vec::new(), kinds: Vec::new(), free: vec![false; n] }
    }

    pub fn with_row(mut self, coeffs: Vec<f64>, kind: RowKind, rhs: f64) -> Self {
        self.add_row(coeffs, kind, rhs);
        self
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, kind: RowKind, rhs: f64) {
        self.rows.push(coeffs);
        self.kinds.push(kind);
        self.rhs.push(rhs);
    }

    pub fn set_free(&mut self, var: usize) {
        self.free[var] = true;
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.objective.len();
        if n == 0 {
            return Err(Error::MalformedLp("no variables".into()));
        }
        if self.free.len() != n {
            return Err(Error::MalformedLp(format!("{} bound flags for {} variables", self.free.len(), n)));
        }
        if self.rhs.len() != self.rows.len() || self.kinds.len() != self.rows.len() {
            return Err(Error::MalformedLp("rows, rhs and kinds differ in length".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::MalformedLp(format!("row {i} has {} coefficients for {n} variables", row.len())));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::MalformedLp(format!("row {i} has a non-finite coefficient")));
            }
        }
        if self.objective.iter().chain(&self.rhs).any(|v| !v.is_finite()) {
            return Err(Error::MalformedLp("non-finite objective or right-hand side".into()));
        }
        Ok(())
    }

    /// Primal and dual residuals of a candidate solution.
    pub fn certify(&self, x: &[f64], dual: &[f64]) -> Certificate {
        let mut primal: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            let ax = dot(row, x);
            let v = match self.kinds[i] {
                RowKind::Le => (ax - self.rhs[i]).max(0.0),
                RowKind::Ge => (self.rhs[i] - ax).max(0.0),
                RowKind::Eq => (ax - self.rhs[i]).abs(),
            };
            primal = primal.max(v);
        }
        for (j, &xj) in x.iter().enumerate() {
            if !self.free[j] {
                primal = primal.max(-xj);
            }
        }

        let mut dual_res: f64 = 0.0;
        for (i, &y) in dual.iter().enumerate() {
            let v = match self.kinds[i] {
                RowKind::Le => -y,
                RowKind::Ge => y,
                RowKind::Eq => 0.0,
            };
            dual_res = dual_res.max(v);
        }
        for j in 0..self.n_vars() {
            let aty: f64 = self.rows.iter().zip(dual).map(|(row, y)| row[j] * y).sum();
            let slack = self.objective[j] - aty;
            let v = if self.free[j] { slack.abs() } else { slack.max(0.0) };
            dual_res = dual_res.max(v);
        }

        let primal_value = dot(&self.objective, x);
        let dual_value = dot(&self.rhs, dual);
        Certificate { primal_residual: primal, dual_residual: dual_res, primal_value, dual_value }
    }
}

/// Residuals of a primal-dual pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub primal_value: f64,
    pub dual_value: f64,
}

impl Certificate {
    pub fn gap(&self) -> f64 {
        (self.primal_value - self.dual_value).abs()
    }

    /// Feasibility within `1e-9` and a duality gap within `1e-8 (1 + |value|)`.
    pub fn is_optimal(&self) -> bool {
        self.primal_residual <= 1e-9
            && self.dual_residual <= 1e-9
            && self.gap() <= 1e-8 * (1.0 + self.primal_value.abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub status: LpStatus,
    /// One multiplier per constraint row, signed for the maximization dual.
    pub dual: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    fn non_optimal(status: LpStatus, lp: &StandardLp, iterations: usize) -> Self {
        Self { x: vec![0.0; lp.n_vars()], value: f64::NAN, status, dual: vec![0.0; lp.n_rows()], iterations }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ColumnKind {
    Structural { var: usize, negated: bool },
    Slack,
    Artificial,
}

struct Tableau {
    // m rows of (n_cols + 1) entries; the last entry is the right-hand side.
    rows: Vec<Vec<f64>>,
    reduced: Vec<f64>,
    basis: Vec<usize>,
    // Original constraint index of each tableau row.
    row_ids: Vec<usize>,
    columns: Vec<ColumnKind>,
    iterations: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn n_cols(&self) -> usize {
        self.columns.len()
    }

    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.n_cols()]
    }

    fn set_objective(&mut self, costs: &[f64]) {
        let n = self.n_cols();
        let mut reduced: Vec<f64> = costs.to_vec();
        reduced.push(0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = costs[b];
            if cb != 0.0 {
                for j in 0..=n {
                    reduced[j] -= cb * self.rows[i][j];
                }
            }
        }
        self.reduced = reduced;
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let n = self.n_cols();
        let p = self.rows[row][col];
        for v in self.rows[row].iter_mut() {
            *v /= p;
        }
        self.rows[row][col] = 1.0;
        let pivot_row = self.rows[row].clone();
        for (i, r) in self.rows.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for j in 0..=n {
                    r[j] -= f * pivot_row[j];
                }
                r[col] = 0.0;
            }
        }
        let f = self.reduced[col];
        if f != 0.0 {
            for j in 0..=n {
                self.reduced[j] -= f * pivot_row[j];
            }
            self.reduced[col] = 0.0;
        }
        self.basis[row] = col;
        self.iterations += 1;
    }

    // Bland's rule: lowest-index improving column, then the minimum-ratio row
    // whose basic variable has the lowest index.
    fn run(&mut self, allow_artificial: bool, max_iter: usize) -> Result<PhaseOutcome> {
        loop {
            if self.iterations > max_iter {
                return Err(Error::LpStatus("stalled (iteration limit)"));
            }
            let entering = (0..self.n_cols()).find(|&j| {
                self.reduced[j] > OPTIMALITY_TOL && (allow_artificial || self.columns[j] != ColumnKind::Artificial)
            });
            let Some(col) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][col];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                        if ratio < br && !tie || tie && self.basis[i] < self.basis[bi] {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            match best {
                None => return Ok(PhaseOutcome::Unbounded),
                Some((row, _)) => self.pivot(row, col),
            }
        }
    }
}

/// Solves the linear program with a deterministic two-phase simplex.
pub fn solve(lp: &StandardLp) -> Result<LpSolution> {
    lp.validate()?;
    let m = lp.n_rows();
    let n = lp.n_vars();

    let mut columns = Vec::new();
    for j in 0..n {
        columns.push(ColumnKind::Structural { var: j, negated: false });
        if lp.free[j] {
            columns.push(ColumnKind::Structural { var: j, negated: true });
        }
    }
    let n_structural = columns.len();

    // Normalize every row to a nonnegative right-hand side.
    let signs: Vec<f64> = lp.rhs.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
    let kinds: Vec<RowKind> = lp
        .kinds
        .iter()
        .zip(&signs)
        .map(|(&k, &s)| match (k, s < 0.0) {
            (RowKind::Le, true) => RowKind::Ge,
            (RowKind::Ge, true) => RowKind::Le,
            (k, _) => k,
        })
        .collect();

    let mut slack_of_row = vec![None; m];
    for (i, k) in kinds.iter().enumerate() {
        if *k != RowKind::Eq {
            slack_of_row[i] = Some(columns.len());
            columns.push(ColumnKind::Slack);
        }
    }
    let mut artificial_of_row = vec![None; m];
    for (i, k) in kinds.iter().enumerate() {
        if *k != RowKind::Le {
            artificial_of_row[i] = Some(columns.len());
            columns.push(ColumnKind::Artificial);
        }
    }
    let n_cols = columns.len();

    let mut rows = vec![vec![0.0; n_cols + 1]; m];
    let mut basis = vec![0; m];
    for i in 0..m {
        let s = signs[i];
        for (c, col) in columns[..n_structural].iter().enumerate() {
            if let ColumnKind::Structural { var, negated } = *col {
                let a = s * lp.rows[i][var];
                rows[i][c] = if negated { -a } else { a };
            }
        }
        if let Some(c) = slack_of_row[i] {
            rows[i][c] = if kinds[i] == RowKind::Le { 1.0 } else { -1.0 };
        }
        if let Some(c) = artificial_of_row[i] {
            rows[i][c] = 1.0;
            basis[i] = c;
        } else {
            basis[i] = slack_of_row[i].expect("inequality row has a slack");
        }
        rows[i][n_cols] = s * lp.rhs[i];
    }

    let mut tab = Tableau { rows, reduced: Vec::new(), basis, row_ids: (0..m).collect(), columns, iterations: 0 };
    let max_iter = 50_000 + 50 * (m + n_cols);
    let has_artificial = artificial_of_row.iter().any(Option::is_some);

    if has_artificial {
        let phase1: Vec<f64> =
            tab.columns.iter().map(|c| if *c == ColumnKind::Artificial { -1.0 } else { 0.0 }).collect();
        tab.set_objective(&phase1);
        tab.run(true, max_iter)?;
        let infeasibility: f64 = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| tab.columns[b] == ColumnKind::Artificial)
            .map(|(i, _)| tab.rhs(i).abs())
            .sum();
        if infeasibility > FEASIBILITY_TOL {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible, lp, tab.iterations));
        }
        // Drive zero-level artificials out of the basis; rows where that is
        // impossible are linearly dependent and get dropped.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.columns[tab.basis[i]] == ColumnKind::Artificial {
                let replacement =
                    (0..n_cols).find(|&j| tab.columns[j] != ColumnKind::Artificial && tab.rows[i][j].abs() > 1e-9);
                match replacement {
                    Some(j) => tab.pivot(i, j),
                    None => {
                        tab.rows.remove(i);
                        tab.basis.remove(i);
                        tab.row_ids.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let costs: Vec<f64> = tab
        .columns
        .iter()
        .map(|c| match *c {
            ColumnKind::Structural { var, negated } => {
                if negated {
                    -lp.objective[var]
                } else {
                    lp.objective[var]
                }
            }
            _ => 0.0,
        })
        .collect();
    tab.set_objective(&costs);
    if let PhaseOutcome::Unbounded = tab.run(false, max_iter)? {
        return Ok(LpSolution::non_optimal(LpStatus::Unbounded, lp, tab.iterations));
    }

    Ok(extract(lp, &tab, &signs, &kinds, &slack_of_row, &artificial_of_row, &costs))
}

// Internal coefficient of tableau column `col` in original row `row` after
// the sign normalization.
#[allow(clippy::too_many_arguments)]
fn internal_coeff(
    lp: &StandardLp,
    columns: &[ColumnKind],
    sign: f64,
    kind: RowKind,
    row: usize,
    col: usize,
    slack_of_row: &[Option<usize>],
    artificial_of_row: &[Option<usize>],
) -> f64 {
    match columns[col] {
        ColumnKind::Structural { var, negated } => {
            let a = sign * lp.rows[row][var];
            if negated {
                -a
            } else {
                a
            }
        }
        ColumnKind::Slack => {
            if slack_of_row[row] == Some(col) {
                if kind == RowKind::Le {
                    1.0
                } else {
                    -1.0
                }
            } else {
                0.0
            }
        }
        ColumnKind::Artificial => {
            if artificial_of_row[row] == Some(col) {
                1.0
            } else {
                0.0
            }
        }
    }
}

fn extract(
    lp: &StandardLp,
    tab: &Tableau,
    signs: &[f64],
    kinds: &[RowKind],
    slack_of_row: &[Option<usize>],
    artificial_of_row: &[Option<usize>],
    costs: &[f64],
) -> LpSolution {
    let k = tab.rows.len();
    let basis_matrix: Vec<Vec<f64>> = tab
        .row_ids
        .iter()
        .map(|&row| {
            tab.basis
                .iter()
                .map(|&col| {
                    internal_coeff(lp, &tab.columns, signs[row], kinds[row], row, col, slack_of_row, artificial_of_row)
                })
                .collect()
        })
        .collect();
    let rhs: Vec<f64> = tab.row_ids.iter().map(|&row| signs[row] * lp.rhs[row]).collect();
    let cb: Vec<f64> = tab.basis.iter().map(|&col| costs[col]).collect();

    let refined = Lu::factor(&basis_matrix).map(|lu| (lu.solve(&rhs), lu.solve_transposed(&cb)));
    let (xb, y_internal) = match refined {
        Some(pair) => pair,
        None => {
            // Singular refit: fall back to the tableau values.
            let xb = (0..k).map(|i| tab.rhs(i)).collect();
            let y = tab
                .row_ids
                .iter()
                .map(|&row| match (slack_of_row[row], artificial_of_row[row]) {
                    (Some(s), _) if kinds[row] == RowKind::Le => -tab.reduced[s],
                    (Some(s), _) => tab.reduced[s],
                    (None, Some(a)) => -tab.reduced[a],
                    (None, None) => 0.0,
                })
                .collect();
            (xb, y)
        }
    };

    let mut x = vec![0.0; lp.n_vars()];
    for (i, &col) in tab.basis.iter().enumerate() {
        if let ColumnKind::Structural { var, negated } = tab.columns[col] {
            if negated {
                x[var] -= xb[i];
            } else {
                x[var] += xb[i];
            }
        }
    }
    let mut dual = vec![0.0; lp.n_rows()];
    for (i, &row) in tab.row_ids.iter().enumerate() {
        dual[row] = signs[row] * y_internal[i];
    }
    let value = dot(&lp.objective, &x);
    LpSolution { x, value, status: LpStatus::Optimal, dual, iterations: tab.iterations }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense LU factorization with partial pivoting.
struct Lu {
    lu: Vec<Vec<f64>>,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &[Vec<f64>]) -> Option<Self> {
        let n = a.len();
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for c in 0..n {
            let p = (c..n).max_by(|&i, &j| lu[i][c].abs().total_cmp(&lu[j][c].abs()).then(j.cmp(&i)))?;
            if lu[p][c].abs() <= 1e-13 * scale {
                return None;
            }
            lu.swap(c, p);
            perm.swap(c, p);
            for i in (c + 1)..n {
                let f = lu[i][c] / lu[c][c];
                lu[i][c] = f;
                if f != 0.0 {
                    for j in (c + 1)..n {
                        lu[i][j] -= f * lu[c][j];
                    }
                }
            }
        }
        Some(Self { lu, perm })
    }

    // Solves A x = b.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.len();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] -= self.lu[i][j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                x[i] -= self.lu[i][j] * x[j];
            }
            x[i] /= self.lu[i][i];
        }
        x
    }

    // Solves A^T y = c.
    fn solve_transposed(&self, c: &[f64]) -> Vec<f64> {
        let n = self.lu.len();
        // P A = L U, so A^T = U^T L^T P and y = P^T L^-T U^-T c.
        let mut z = c.to_vec();
        for i in 0..n {
            for j in 0..i {
                z[i] -= self.lu[j][i] * z[j];
            }
            z[i] /= self.lu[i][i];
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                z[i] -= self.lu[j][i] * z[j];
            }
        }
        let mut y = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            y[p] = z[i];
        }
        y
    }
}

/// Solution of the matrix game `max_lambda min_r sum_k lambda_k G[k][r]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimaxSolution {
    /// Mixed strategy over rows (configurations).
    pub lambda: Vec<f64>,
    /// Game value `min_r lambda^T G[., r]`.
    pub value: f64,
    /// Optimal mixed strategy over columns (parameter samples).
    pub dual: Vec<f64>,
    pub certificate: Certificate,
    pub iterations: usize,
}

/// Epigraph LP for the minimax design: `max t` s.t. `t <= sum_k lambda_k G[k][r]`
/// for every column `r`, `sum lambda = 1`, `lambda >= 0`.
pub fn minimax_lp(g: &[Vec<f64>]) -> Result<StandardLp> {
    let n_rows = g.len();
    let n_cols = g.first().map(Vec::len).unwrap_or(0);
    if n_rows == 0 || n_cols == 0 {
        return Err(Error::MalformedLp("empty payoff matrix".into()));
    }
    if g.iter().any(|row| row.len() != n_cols) {
        return Err(Error::MalformedLp("ragged payoff matrix".into()));
    }
    let t = n_rows;
    let mut objective = vec![0.0; n_rows + 1];
    objective[t] = 1.0;
    let mut lp = StandardLp::maximize(objective);
    lp.set_free(t);
    for r in 0..n_cols {
        let mut coeffs: Vec<f64> = g.iter().map(|row| -row[r]).collect();
        coeffs.push(1.0);
        lp.add_row(coeffs, RowKind::Le, 0.0);
    }
    let mut simplex = vec![1.0; n_rows];
    simplex.push(0.0);
    lp.add_row(simplex, RowKind::Eq, 1.0);
    Ok(lp)
}

/// Solves the worst-case design game for the payoff matrix `g`
/// (`N_config x n_theta`).
pub fn solve_minimax(g: &[Vec<f64>]) -> Result<MinimaxSolution> {
    let lp = minimax_lp(g)?;
    let sol = solve(&lp)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::LpStatus("infeasible")),
        LpStatus::Unbounded => return Err(Error::LpStatus("unbounded")),
    }
    let certificate = lp.certify(&sol.x, &sol.dual);
    let n = g.len();
    let lambda = sol.x[..n].to_vec();
    let n_cols = g[0].len();
    let value = (0..n_cols)
        .map(|r| g.iter().zip(&lambda).map(|(row, l)| row[r] * l).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let dual = sol.dual[..n_cols].to_vec();
    Ok(MinimaxSolution { lambda, value, dual, certificate, iterations: sol.iterations })
}
