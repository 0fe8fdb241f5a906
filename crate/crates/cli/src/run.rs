use rayon::prelude::*;

use qmetro_core::channel::{InputFamily, ParamChannel, PovmFamily};
use qmetro_core::design::{self, DesignDistribution, DesignKind, ExperimentCounts};
use qmetro_core::fisher::{self, FisherTable};

use crate::error::CliError;
use crate::scenario::{linspace, Mode, Scenario};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fisher information curves over the theta grid for one cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Curves {
    pub theta: Vec<f64>,
    pub f_ac: Vec<f64>,
    pub f_wc: Vec<f64>,
    pub f_max: Vec<f64>,
    /// Configuration attaining `f_max` at each theta.
    pub f_max_config: Vec<usize>,
    /// Largest QFI over the inputs available in the cell.
    pub f_qfi_best_beta: Vec<f64>,
}

/// Everything computed for one (gamma, mode) pair.
#[derive(Clone, Debug)]
pub struct CellReport {
    pub gamma: f64,
    pub mode: Mode,
    pub table: FisherTable,
    /// QFI indexed `[input][theta]` over the cell's inputs.
    pub qfi: Vec<Vec<f64>>,
    pub average: DesignDistribution,
    pub worst: DesignDistribution,
    pub curves: Curves,
    pub average_counts: ExperimentCounts,
    pub worst_counts: ExperimentCounts,
    pub warnings: Vec<String>,
}

impl CellReport {
    pub fn design(&self, kind: DesignKind) -> &DesignDistribution {
        match kind {
            DesignKind::AverageCase => &self.average,
            DesignKind::WorstCase => &self.worst,
        }
    }
}

/// QFI against the input angle on a dense grid and on the scenario's grid.
#[derive(Clone, Debug, PartialEq)]
pub struct QfiSweep {
    pub gamma: f64,
    pub theta: f64,
    pub betas: Vec<f64>,
    pub values: Vec<f64>,
    pub grid_betas: Vec<f64>,
    pub grid_values: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub version: &'static str,
    pub scenario_sha256: String,
    pub thetas: Vec<f64>,
    pub cells: Vec<CellReport>,
    pub sweeps: Vec<QfiSweep>,
}

impl RunReport {
    pub fn cell(&self, gamma: f64, mode: Mode) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.gamma == gamma && c.mode == mode)
    }

    pub fn sweep(&self, gamma: f64) -> Option<&QfiSweep> {
        self.sweeps.iter().find(|s| s.gamma == gamma)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &str> {
        self.cells.iter().flat_map(|c| c.warnings.iter().map(String::as_str))
    }
}

fn cells(scenario: &Scenario) -> Vec<(f64, Mode)> {
    scenario.gammas.iter().flat_map(|&g| scenario.modes.iter().map(move |&m| (g, m))).collect()
}

pub fn build_cell_table(
    scenario: &Scenario,
    gamma: f64,
    mode: Mode,
) -> Result<(ParamChannel, InputFamily, FisherTable), CliError> {
    let channel = ParamChannel::amplitude_damped(scenario.hamiltonian.clone(), gamma)?;
    let (phis, betas) = scenario.config_axes(mode);
    let inputs = InputFamily::qubit(&betas)?;
    let povms = PovmFamily::qubit(&phis)?;
    let table = fisher::build_table(&channel, &inputs, &povms, &scenario.thetas(), &scenario.prior)?;
    Ok((channel, inputs, table))
}

fn run_cell(scenario: &Scenario, gamma: f64, mode: Mode) -> Result<CellReport, CliError> {
    let (channel, inputs, table) = build_cell_table(scenario, gamma, mode)?;
    let thetas = table.thetas().to_vec();

    let mut warnings = Vec::new();
    if table.singular_count() > 0 {
        let excluded = (0..table.n_configs()).filter(|&k| table.config_is_singular(k)).count();
        warnings.push(format!(
            "gamma={gamma} mode={mode}: {} singular Fisher entries, {excluded} configurations excluded from designs",
            table.singular_count()
        ));
    }

    let average = design::average_case(&table)?;
    let worst = design::worst_case(&table)?;

    let qfi = fisher::qfi_table(&channel, &inputs, &thetas)?;
    let mut f_max = Vec::with_capacity(thetas.len());
    let mut f_max_config = Vec::with_capacity(thetas.len());
    for r in 0..thetas.len() {
        let (v, k) = fisher::f_max(&table, r)?;
        f_max.push(v);
        f_max_config.push(k);
    }
    let f_qfi_best_beta =
        (0..thetas.len()).map(|r| qfi.iter().map(|row| row[r]).fold(f64::NEG_INFINITY, f64::max)).collect();
    let curves = Curves {
        f_ac: design::evaluate_curve(&table, &average.lambda)?,
        f_wc: design::evaluate_curve(&table, &worst.lambda)?,
        theta: thetas,
        f_max,
        f_max_config,
        f_qfi_best_beta,
    };

    let average_counts = design::round_counts(&average, scenario.l_expt, &table)?;
    let worst_counts = design::round_counts(&worst, scenario.l_expt, &table)?;

    Ok(CellReport { gamma, mode, table, qfi, average, worst, curves, average_counts, worst_counts, warnings })
}

/// QFI sweep over the input angle at the first theta sample; the model's QFI
/// does not depend on theta.
pub fn qfi_sweep(scenario: &Scenario, gamma: f64) -> Result<QfiSweep, CliError> {
    let channel = ParamChannel::amplitude_damped(scenario.hamiltonian.clone(), gamma)?;
    let theta = scenario.thetas()[0];
    let (lo, hi) = scenario.beta_range;
    let betas = linspace(lo, hi, scenario.qfi_sweep_points);
    let grid_betas = scenario.betas();
    let eval = |bs: &[f64]| -> Result<Vec<f64>, CliError> {
        let inputs = InputFamily::qubit(bs)?;
        Ok(fisher::qfi_table(&channel, &inputs, &[theta])?.into_iter().map(|row| row[0]).collect())
    };
    Ok(QfiSweep { gamma, theta, values: eval(&betas)?, grid_values: eval(&grid_betas)?, betas, grid_betas })
}

pub fn run(scenario: &Scenario) -> Result<RunReport, CliError> {
    let cells =
        cells(scenario).into_par_iter().map(|(g, m)| run_cell(scenario, g, m)).collect::<Result<Vec<_>, _>>()?;
    let sweeps = scenario.gammas.par_iter().map(|&g| qfi_sweep(scenario, g)).collect::<Result<Vec<_>, _>>()?;
    Ok(RunReport {
        version: VERSION,
        scenario_sha256: scenario.sha256.clone(),
        thetas: scenario.thetas(),
        cells,
        sweeps,
    })
}

/// One design per (gamma, mode) without the curves and counts.
pub fn designs(
    scenario: &Scenario,
    kind: DesignKind,
) -> Result<Vec<(f64, Mode, FisherTable, DesignDistribution)>, CliError> {
    cells(scenario)
        .into_par_iter()
        .map(|(g, m)| {
            let (_, _, table) = build_cell_table(scenario, g, m)?;
            let d = match kind {
                DesignKind::AverageCase => design::average_case(&table)?,
                DesignKind::WorstCase => design::worst_case(&table)?,
            };
            Ok((g, m, table, d))
        })
        .collect()
}
