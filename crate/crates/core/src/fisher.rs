//! Classical and quantum Fisher information.
//!
//! A configuration is one (POVM, input) pair. Its Fisher information at a
//! parameter value is `g = sum_i (dp_i)^2 / p_i` with the outcome
//! probabilities of the channel output. [`build_table`] evaluates `g` over a
//! configuration grid and a sample of parameter values.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{outcome_prob_gradient, outcome_probs, InputFamily, ParamChannel, PovmFamily};
use crate::error::{Error, Result};
use crate::matkernel::{herm_eig, sld_solve, CMatrix};

/// Probabilities at or below this are treated as zero.
pub const PROB_EPS: f64 = 1e-12;
/// A zero-probability outcome whose derivative exceeds this makes the
/// Fisher information diverge.
pub const GRAD_EPS: f64 = 1e-9;
/// Tolerance on the prior normalization.
pub const PRIOR_TOL: f64 = 1e-12;

/// Fisher information of one outcome distribution given its derivative.
///
/// Terms with `p <= PROB_EPS` and `|dp| <= GRAD_EPS` contribute zero; a
/// vanishing probability with a nonvanishing derivative is reported as
/// [`Error::SingularFisher`].
pub fn fisher_from_probs(probs: &[f64], grads: &[f64]) -> Result<f64> {
    let mut total = 0.0;
    for (outcome, (&p, &dp)) in probs.iter().zip(grads).enumerate() {
        if p <= PROB_EPS {
            if dp.abs() > GRAD_EPS {
                return Err(Error::SingularFisher { outcome, prob: p, grad: dp });
            }
            continue;
        }
        total += dp * dp / p;
    }
    Ok(total)
}

/// Fisher information `g(phi, beta, theta)` of one configuration.
pub fn config_fisher(ch: &ParamChannel, rho: &CMatrix, povm: &[CMatrix], theta: f64) -> Result<f64> {
    let (sigma, dsigma) = ch.evolve_with_derivative(rho, theta)?;
    fisher_at(&sigma, &dsigma, povm)
}

fn fisher_at(sigma: &CMatrix, dsigma: &CMatrix, povm: &[CMatrix]) -> Result<f64> {
    let p = outcome_probs(sigma, povm)?;
    let dp = outcome_prob_gradient(dsigma, povm)?;
    fisher_from_probs(&p, &dp)
}

/// Quantum Fisher information `Tr(S^2 sigma)` of the channel output for input `rho`.
pub fn qfi(ch: &ParamChannel, rho: &CMatrix, theta: f64) -> Result<f64> {
    let (sigma, dsigma) = ch.evolve_with_derivative(rho, theta)?;
    let s = sld_solve(&sigma, &dsigma)?;
    let value = (&(&s * &s) * &sigma).trace().re;
    Ok(value.max(0.0))
}

/// `(lambda_max(H) - lambda_min(H))^2`, the QFI ceiling for a pure input
/// under `exp(-i theta H)`.
pub fn pure_qfi_bound(h: &CMatrix) -> Result<f64> {
    let eig = herm_eig(h)?;
    let spread = eig.max() - eig.min();
    Ok(spread * spread)
}

/// QFI for every input of a family at every parameter sample, indexed `[input][theta]`.
pub fn qfi_table(ch: &ParamChannel, inputs: &InputFamily, thetas: &[f64]) -> Result<Vec<Vec<f64>>> {
    inputs
        .states()
        .par_iter()
        .map(|rho| thetas.iter().map(|&t| qfi(ch, rho, t)).collect::<Result<Vec<f64>>>())
        .collect()
}

/// Uniform prior over `n` samples.
pub fn uniform_prior(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// Normalizes nonnegative weights to sum to one.
pub fn normalize_prior(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::InvalidGrid("empty prior".into()));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidGrid("prior weights must be finite and nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidGrid("prior weights sum to zero".into()));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// Label of one configuration in a [`ConfigGrid`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConfigLabel {
    pub index: usize,
    pub povm_index: usize,
    pub input_index: usize,
    pub phi: f64,
    pub beta: f64,
}

/// Flattened product of POVM and input settings, POVM-major:
/// `index = povm_index * n_input + input_index`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigGrid {
    n_povm: usize,
    n_input: usize,
    labels: Vec<ConfigLabel>,
}

impl ConfigGrid {
    pub fn new(phis: &[f64], betas: &[f64]) -> Result<Self> {
        if phis.is_empty() || betas.is_empty() {
            return Err(Error::InvalidGrid("configuration grid needs at least one POVM and one input".into()));
        }
        let n_input = betas.len();
        let labels = phis
            .iter()
            .enumerate()
            .flat_map(|(k, &phi)| {
                betas.iter().enumerate().map(move |(l, &beta)| ConfigLabel {
                    index: k * n_input + l,
                    povm_index: k,
                    input_index: l,
                    phi,
                    beta,
                })
            })
            .collect();
        Ok(Self { n_povm: phis.len(), n_input, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_povm(&self) -> usize {
        self.n_povm
    }

    pub fn n_input(&self) -> usize {
        self.n_input
    }

    pub fn labels(&self) -> &[ConfigLabel] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &ConfigLabel {
        &self.labels[index]
    }

    pub fn index_of(&self, povm_index: usize, input_index: usize) -> usize {
        povm_index * self.n_input + input_index
    }
}

/// Fisher information `G[k][r] = g(config k, theta_r)` with the prior over
/// the parameter samples.
#[derive(Clone, Debug, PartialEq)]
pub struct FisherTable {
    grid: ConfigGrid,
    thetas: Vec<f64>,
    prior: Vec<f64>,
    values: Vec<f64>,
    singular: Vec<bool>,
}

impl FisherTable {
    /// Builds a table from explicit rows (one per configuration). Non-finite
    /// entries are flagged singular.
    pub fn from_rows(grid: ConfigGrid, rows: &[Vec<f64>], thetas: Vec<f64>, prior: Vec<f64>) -> Result<Self> {
        if rows.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("{} rows for {} configurations", rows.len(), grid.len())));
        }
        let n = thetas.len();
        let mut values = Vec::with_capacity(rows.len() * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::InvalidGrid(format!("row of length {} for {} theta samples", row.len(), n)));
            }
            values.extend_from_slice(row);
        }
        let singular = values.iter().map(|v| !v.is_finite()).collect();
        Self::assemble(grid, thetas, prior, values, singular)
    }

    fn assemble(
        grid: ConfigGrid,
        thetas: Vec<f64>,
        prior: Vec<f64>,
        values: Vec<f64>,
        singular: Vec<bool>,
    ) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::InvalidGrid("no theta samples".into()));
        }
        if prior.len() != thetas.len() {
            return Err(Error::InvalidGrid(format!(
                "prior has {} weights for {} theta samples",
                prior.len(),
                thetas.len()
            )));
        }
        if prior.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidGrid("prior weights must be finite and nonnegative".into()));
        }
        let total: f64 = prior.iter().sum();
        if (total - 1.0).abs() > PRIOR_TOL {
            return Err(Error::InvalidGrid(format!("prior sums to {total}")));
        }
        Ok(Self { grid, thetas, prior, values, singular })
    }

    pub fn grid(&self) -> &ConfigGrid {
        &self.grid
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn n_configs(&self) -> usize {
        self.grid.len()
    }

    pub fn n_thetas(&self) -> usize {
        self.thetas.len()
    }

    #[inline]
    pub fn value(&self, config: usize, r: usize) -> f64 {
        self.values[config * self.thetas.len() + r]
    }

    pub fn row(&self, config: usize) -> &[f64] {
        let n = self.thetas.len();
        &self.values[config * n..(config + 1) * n]
    }

    pub fn column(&self, r: usize) -> Vec<f64> {
        (0..self.n_configs()).map(|k| self.value(k, r)).collect()
    }

    pub fn is_singular(&self, config: usize, r: usize) -> bool {
        self.singular[config * self.thetas.len() + r]
    }

    /// True when any entry of the configuration's row is singular.
    pub fn config_is_singular(&self, config: usize) -> bool {
        let n = self.thetas.len();
        self.singular[config * n..(config + 1) * n].iter().any(|&s| s)
    }

    pub fn singular_count(&self) -> usize {
        self.singular.iter().filter(|&&s| s).count()
    }

    /// Prior-averaged Fisher information per configuration.
    pub fn averaged(&self) -> Vec<f64> {
        (0..self.n_configs()).map(|k| self.row(k).iter().zip(&self.prior).map(|(g, p)| g * p).sum()).collect()
    }
}

/// Evaluates `g` for every configuration of `povms x inputs` at every `theta`.
///
/// Rows are ordered POVM-major. Singular points are flagged and stored as
/// `+inf`; errors that are not singularities abort the build.
pub fn build_table(
    ch: &ParamChannel,
    inputs: &InputFamily,
    povms: &PovmFamily,
    thetas: &[f64],
    prior: &[f64],
) -> Result<FisherTable> {
    let grid = ConfigGrid::new(povms.phis(), inputs.betas())?;
    let n_theta = thetas.len();

    // Output states are shared by every POVM; evaluate them once per (input, theta).
    let outputs: Vec<Vec<(CMatrix, CMatrix)>> = inputs
        .states()
        .par_iter()
        .map(|rho| thetas.iter().map(|&t| ch.evolve_with_derivative(rho, t)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let rows: Vec<Vec<(f64, bool)>> = grid
        .labels()
        .par_iter()
        .map(|label| {
            let povm = &povms.povms()[label.povm_index];
            outputs[label.input_index]
                .iter()
                .map(|(sigma, dsigma)| match fisher_at(sigma, dsigma, povm) {
                    Ok(g) => Ok((g, false)),
                    Err(Error::SingularFisher { .. }) => Ok((f64::INFINITY, true)),
                    Err(e) => Err(e),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut values = Vec::with_capacity(grid.len() * n_theta);
    let mut singular = Vec::with_capacity(grid.len() * n_theta);
    for row in rows {
        for (g, s) in row {
            values.push(g);
            singular.push(s);
        }
    }
    FisherTable::assemble(grid, thetas.to_vec(), prior.to_vec(), values, singular)
}

/// Largest Fisher information available at sample `r`, with the lowest
/// maximizing configuration index. Singular entries are skipped.
pub fn f_max(table: &FisherTable, r: usize) -> Result<(f64, usize)> {
    if r >= table.n_thetas() {
        return Err(Error::InvalidGrid(format!("theta index {r} out of range {}", table.n_thetas())));
    }
    let mut best: Option<(f64, usize)> = None;
    for k in 0..table.n_configs() {
        if table.is_singular(k, r) {
            continue;
        }
        let g = table.value(k, r);
        if best.is_none_or(|(b, _)| g > b) {
            best = Some((g, k));
        }
    }
    best.ok_or(Error::SingularColumn(r))
}
