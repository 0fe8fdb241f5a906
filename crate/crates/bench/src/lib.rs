//! Fixtures shared by the benchmarks.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use qmetro_core::channel::{InputFamily, ParamChannel, PovmFamily};
use qmetro_core::fisher::{build_table, uniform_prior, FisherTable};
use qmetro_core::CMatrix;

pub fn hadamard_like() -> CMatrix {
    CMatrix::from_real_rows(&[vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2], vec![FRAC_1_SQRT_2, -FRAC_1_SQRT_2]])
        .expect("2x2 rows")
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|j| lo + j as f64 * (hi - lo) / (n - 1) as f64).collect()
}

pub struct Fixture {
    pub channel: ParamChannel,
    pub inputs: InputFamily,
    pub povms: PovmFamily,
    pub thetas: Vec<f64>,
}

/// Joint POVM and input grid of `n_cfg` x `n_cfg` over `n_theta` samples.
pub fn fixture(gamma: f64, n_cfg: usize, n_theta: usize) -> Fixture {
    let grid = linspace(0.0, PI, n_cfg);
    Fixture {
        channel: ParamChannel::amplitude_damped(hadamard_like(), gamma).expect("valid gamma"),
        inputs: InputFamily::qubit(&grid).expect("nonempty grid"),
        povms: PovmFamily::qubit(&grid).expect("nonempty grid"),
        thetas: linspace(0.1 * PI, 0.4 * PI, n_theta),
    }
}

impl Fixture {
    pub fn table(&self) -> FisherTable {
        build_table(&self.channel, &self.inputs, &self.povms, &self.thetas, &uniform_prior(self.thetas.len()))
            .expect("reference table builds")
    }
}
