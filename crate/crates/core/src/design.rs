//! Experiment design over a [`FisherTable`].
//!
//! The average-case design maximizes the prior-averaged Fisher information
//! and is solved in closed form by picking the best configuration. The
//! worst-case design maximizes the smallest Fisher information over the
//! parameter samples; it is the matrix game solved by [`lp::solve_minimax`].
//! Configurations with a singular Fisher entry anywhere on the parameter grid
//! are left out of both designs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fisher::FisherTable;
use crate::lp::{self, RowKind, StandardLp};

/// Weights above this are reported in a design's support.
pub const SUPPORT_TOL: f64 = 1e-8;
/// Tolerance on `sum(lambda) = 1`.
pub const SIMPLEX_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DesignKind {
    AverageCase,
    WorstCase,
}

impl DesignKind {
    pub fn name(self) -> &'static str {
        match self {
            DesignKind::AverageCase => "average-case",
            DesignKind::WorstCase => "worst-case",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SupportEntry {
    pub config: usize,
    pub phi: f64,
    pub beta: f64,
    pub weight: f64,
}

/// Evidence that a design is optimal.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DesignCertificate {
    /// Prior-averaged Fisher information per configuration; `None` marks a
    /// configuration excluded for singularity.
    Argmax { averaged_fisher: Vec<Option<f64>> },
    /// Optimal distribution over the parameter samples for the minimax game
    /// and the LP residuals.
    Dual {
        theta_weights: Vec<f64>,
        primal_value: f64,
        dual_value: f64,
        primal_residual: f64,
        dual_residual: f64,
        iterations: usize,
    },
}

/// Distribution of experiments over configurations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DesignDistribution {
    pub kind: DesignKind,
    pub lambda: Vec<f64>,
    pub objective: f64,
    pub support: Vec<SupportEntry>,
    pub certificate: DesignCertificate,
}

impl DesignDistribution {
    fn new(
        kind: DesignKind,
        table: &FisherTable,
        lambda: Vec<f64>,
        objective: f64,
        certificate: DesignCertificate,
    ) -> Self {
        let support = lambda
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > SUPPORT_TOL)
            .map(|(k, &weight)| {
                let label = table.grid().label(k);
                SupportEntry { config: k, phi: label.phi, beta: label.beta, weight }
            })
            .collect();
        Self { kind, lambda, objective, support, certificate }
    }
}

fn candidates(table: &FisherTable) -> Result<Vec<usize>> {
    if table.n_configs() == 0 || table.n_thetas() == 0 {
        return Err(Error::EmptyTable);
    }
    let usable: Vec<usize> = (0..table.n_configs()).filter(|&k| !table.config_is_singular(k)).collect();
    if usable.is_empty() {
        return Err(Error::NoUsableConfiguration);
    }
    Ok(usable)
}

/// Best single configuration for the prior-averaged Fisher information.
pub fn average_case(table: &FisherTable) -> Result<DesignDistribution> {
    let usable = candidates(table)?;
    let averaged = table.averaged();
    let mut best = usable[0];
    for &k in &usable[1..] {
        if averaged[k] > averaged[best] {
            best = k;
        }
    }
    let mut lambda = vec![0.0; table.n_configs()];
    lambda[best] = 1.0;
    let witness =
        (0..table.n_configs()).map(|k| if table.config_is_singular(k) { None } else { Some(averaged[k]) }).collect();
    Ok(DesignDistribution::new(
        DesignKind::AverageCase,
        table,
        lambda,
        averaged[best],
        DesignCertificate::Argmax { averaged_fisher: witness },
    ))
}

/// Mixture of configurations maximizing the worst Fisher information over
/// the parameter samples.
pub fn worst_case(table: &FisherTable) -> Result<DesignDistribution> {
    let usable = candidates(table)?;
    let payoff: Vec<Vec<f64>> = usable.iter().map(|&k| table.row(k).to_vec()).collect();
    let game = lp::solve_minimax(&payoff)?;

    let mut lambda = vec![0.0; table.n_configs()];
    for (&k, &w) in usable.iter().zip(&game.lambda) {
        if w < -1e-9 {
            return Err(Error::InvalidDistribution(format!("negative weight {w:e} from the LP")));
        }
        lambda[k] = w.max(0.0);
    }
    let objective = worst_objective(table, &lambda)?;
    let cert = game.certificate;
    Ok(DesignDistribution::new(
        DesignKind::WorstCase,
        table,
        lambda,
        objective,
        DesignCertificate::Dual {
            theta_weights: game.dual,
            primal_value: cert.primal_value,
            dual_value: cert.dual_value,
            primal_residual: cert.primal_residual,
            dual_residual: cert.dual_residual,
            iterations: game.iterations,
        },
    ))
}

/// Average-case design solved as a generic LP instead of the closed form.
/// Returns the optimal weights and objective value.
pub fn average_case_lp(table: &FisherTable) -> Result<(Vec<f64>, f64)> {
    let usable = candidates(table)?;
    let averaged = table.averaged();
    let objective: Vec<f64> = usable.iter().map(|&k| averaged[k]).collect();
    let n = objective.len();
    let lp = StandardLp::maximize(objective).with_row(vec![1.0; n], RowKind::Eq, 1.0);
    let sol = lp::solve(&lp)?;
    if sol.status != lp::LpStatus::Optimal {
        return Err(Error::LpStatus("not optimal"));
    }
    let mut lambda = vec![0.0; table.n_configs()];
    for (&k, &w) in usable.iter().zip(&sol.x) {
        lambda[k] = w;
    }
    Ok((lambda, sol.value))
}

fn check_distribution(table: &FisherTable, lambda: &[f64]) -> Result<()> {
    if lambda.len() != table.n_configs() {
        return Err(Error::InvalidDistribution(format!(
            "{} weights for {} configurations",
            lambda.len(),
            table.n_configs()
        )));
    }
    if let Some(w) = lambda.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidDistribution(format!("weight {w} is negative or not finite")));
    }
    let total: f64 = lambda.iter().sum();
    if (total - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
    }
    Ok(())
}

/// Fisher information `F(lambda, theta_r) = sum_k lambda_k G[k][r]` at every sample.
pub fn evaluate_curve(table: &FisherTable, lambda: &[f64]) -> Result<Vec<f64>> {
    check_distribution(table, lambda)?;
    let mut curve = vec![0.0; table.n_thetas()];
    for (k, &w) in lambda.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (f, g) in curve.iter_mut().zip(table.row(k)) {
            *f += w * g;
        }
    }
    Ok(curve)
}

/// Prior-averaged Fisher information of a distribution.
pub fn average_objective(table: &FisherTable, lambda: &[f64]) -> Result<f64> {
    let curve = evaluate_curve(table, lambda)?;
    Ok(curve.iter().zip(table.prior()).map(|(f, p)| f * p).sum())
}

/// Smallest Fisher information of a distribution over the samples.
pub fn worst_objective(table: &FisherTable, lambda: &[f64]) -> Result<f64> {
    let curve = evaluate_curve(table, lambda)?;
    Ok(curve.into_iter().fold(f64::INFINITY, f64::min))
}

pub fn objective_for(kind: DesignKind, table: &FisherTable, lambda: &[f64]) -> Result<f64> {
    match kind {
        DesignKind::AverageCase => average_objective(table, lambda),
        DesignKind::WorstCase => worst_objective(table, lambda),
    }
}

/// Integer experiment counts derived from a relaxed design.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentCounts {
    pub kind: DesignKind,
    pub counts: Vec<u64>,
    pub total: u64,
    /// Objective at `counts / total`: achievable with integer counts.
    pub lower_bound: f64,
    /// Objective of the relaxed design: no integer allocation can beat it.
    pub upper_bound: f64,
}

/// Largest-remainder apportionment of `total` experiments.
pub fn apportion(lambda: &[f64], total: u64) -> Vec<u64> {
    let scaled: Vec<f64> = lambda.iter().map(|w| w.max(0.0) * total as f64).collect();
    let mut counts: Vec<u64> = scaled.iter().map(|s| s.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut leftover = total.saturating_sub(assigned);
    let mut order: Vec<usize> = (0..lambda.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = scaled[a] - scaled[a].floor();
        let fb = scaled[b] - scaled[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &k in order.iter().cycle() {
        if leftover == 0 {
            break;
        }
        counts[k] += 1;
        leftover -= 1;
    }
    counts
}

/// Rounds a design to integer counts summing to `total`, bracketing the
/// integer-constrained optimum between the rounded and relaxed objectives.
pub fn round_counts(design: &DesignDistribution, total: u64, table: &FisherTable) -> Result<ExperimentCounts> {
    if total == 0 {
        return Err(Error::InvalidDistribution("total number of experiments must be at least 1".into()));
    }
    check_distribution(table, &design.lambda)?;
    let counts = apportion(&design.lambda, total);
    let rounded: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
    let lower_bound = objective_for(design.kind, table, &rounded)?;
    Ok(ExperimentCounts { kind: design.kind, counts, total, lower_bound, upper_bound: design.objective })
}
