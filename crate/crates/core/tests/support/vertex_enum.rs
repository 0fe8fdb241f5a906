//! Brute-force vertex enumeration used as an LP oracle in tests.
//!
//! Every vertex of a polyhedron in R^n is the solution of n linearly
//! independent active constraints, so enumerating all n-subsets of the
//! constraints and keeping the feasible solutions finds the optimum of any
//! bounded, feasible LP. Exponential, fine for n <= 7.

#![allow(dead_code)]

/// Solves a square system by Gaussian elimination with full pivoting.
/// Returns `None` for (numerically) singular systems.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let mut col_order: Vec<usize> = (0..n).collect();
    for c in 0..n {
        let mut best = (c, c, 0.0f64);
        for i in c..n {
            for j in c..n {
                if a[i][j].abs() > best.2 {
                    best = (i, j, a[i][j].abs());
                }
            }
        }
        if best.2 < 1e-12 {
            return None;
        }
        a.swap(c, best.0);
        b.swap(c, best.0);
        for row in a.iter_mut() {
            row.swap(c, best.1);
        }
        col_order.swap(c, best.1);
        for i in (c + 1)..n {
            let f = a[i][c] / a[c][c];
            for j in c..n {
                a[i][j] -= f * a[c][j];
            }
            b[i] -= f * b[c];
        }
    }
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= a[i][j] * y[j];
        }
        y[i] = s / a[i][i];
    }
    let mut x = vec![0.0; n];
    for (pos, &var) in col_order.iter().enumerate() {
        x[var] = y[pos];
    }
    Some(x)
}

fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// `max c.x` s.t. `A x <= b`, `x >= 0`, by enumerating vertices. Returns the
/// optimal value, or `None` when no vertex is feasible.
pub fn max_le_nonneg(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let n = c.len();
    let m = a.len();
    // Constraint i < m is row i of A; constraint m + j is x_j >= 0.
    let coeff = |i: usize| -> (Vec<f64>, f64) {
        if i < m {
            (a[i].clone(), b[i])
        } else {
            let mut e = vec![0.0; n];
            e[i - m] = 1.0;
            (e, 0.0)
        }
    };
    let mut best: Option<f64> = None;
    for_each_subset(m + n, n, &mut |active| {
        let (rows, rhs): (Vec<_>, Vec<_>) = active.iter().map(|&i| coeff(i)).unzip();
        let Some(x) = solve_square(rows, rhs) else { return };
        let feasible = x.iter().all(|&v| v >= -1e-9)
            && a.iter().zip(b).all(|(row, &bi)| row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() <= bi + 1e-9);
        if feasible {
            let v: f64 = c.iter().zip(&x).map(|(p, q)| p * q).sum();
            best = Some(best.map_or(v, |bv: f64| bv.max(v)));
        }
    });
    best
}

/// Value of the game `max_lambda min_r sum_k lambda_k G[k][r]` over the
/// probability simplex, by enumerating vertices of the epigraph polytope.
pub fn minimax_value(g: &[Vec<f64>]) -> f64 {
    let n = g.len();
    let m = g[0].len();
    // Unknowns (lambda_0..lambda_{n-1}, t). Inequalities: lambda_k >= 0 (k < n)
    // and t - sum_k G[k][r] lambda_k <= 0 (n + r). Sum lambda = 1 is always active.
    let mut best = f64::NEG_INFINITY;
    for_each_subset(n + m, n, &mut |active| {
        let mut rows = Vec::with_capacity(n + 1);
        let mut rhs = Vec::with_capacity(n + 1);
        let mut simplex = vec![1.0; n + 1];
        simplex[n] = 0.0;
        rows.push(simplex);
        rhs.push(1.0);
        for &i in active {
            let mut row = vec![0.0; n + 1];
            if i < n {
                row[i] = 1.0;
            } else {
                let r = i - n;
                for k in 0..n {
                    row[k] = -g[k][r];
                }
                row[n] = 1.0;
            }
            rows.push(row);
            rhs.push(0.0);
        }
        let Some(sol) = solve_square(rows, rhs) else { return };
        let (lambda, t) = sol.split_at(n);
        let t = t[0];
        if lambda.iter().any(|&l| l < -1e-9) {
            return;
        }
        let feasible = (0..m).all(|r| t <= (0..n).map(|k| g[k][r] * lambda[k]).sum::<f64>() + 1e-9);
        if feasible && t > best {
            best = t;
        }
    });
    best
}
