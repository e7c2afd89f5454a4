use std::time::Duration;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{unvectorize, vectorize, C64};

/// `N_T × L` transmit waveform matrix; row `n` is antenna `n`'s code.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformMatrix(DMatrix<C64>);

impl WaveformMatrix {
    pub fn new(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn from_vec(s: &DVector<C64>, n_tx: usize, code_len: usize) -> Self {
        Self(unvectorize(s, n_tx, code_len))
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    /// `s = vec(S)`.
    pub fn to_vec(&self) -> DVector<C64> {
        vectorize(&self.0)
    }

    pub fn n_tx(&self) -> usize {
        self.0.nrows()
    }

    pub fn code_len(&self) -> usize {
        self.0.ncols()
    }

    /// `‖S‖_F²`.
    pub fn energy(&self) -> f64 {
        self.0.norm_squared()
    }

    pub fn antenna_energy(&self, n: usize) -> f64 {
        self.0.row(n).norm_squared()
    }

    /// Peak-to-average power ratio of antenna `n`'s code.
    pub fn papr(&self, n: usize) -> f64 {
        let row = self.0.row(n);
        let peak = row.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        let mean = row.norm_squared() / row.len() as f64;
        if mean == 0.0 {
            0.0
        } else {
            peak / mean
        }
    }

    /// Signal emitted toward a direction, `(a† S)ᵀ`, as a length-L vector.
    pub fn emitted(&self, steering: &DVector<C64>) -> DVector<C64> {
        (steering.adjoint() * &self.0).transpose()
    }

    /// Transmit SINR `a† S S† a`.
    pub fn transmit_sinr(&self, target_steering: &DVector<C64>) -> f64 {
        self.emitted(target_steering).norm_squared()
    }
}

/// One outer iteration of an iterative solver.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub sinr: f64,
    /// `‖a†(θ_k) S − d_kᵀ‖²` per constrained direction.
    pub matching_residuals: Vec<f64>,
    /// `sqrt(Σ‖y_k − (G_k† s − d_k)‖² + ‖v − M_r s‖²)`.
    pub primal_residual: f64,
    /// `μ · ‖s^(m+1) − s^(m)‖`.
    pub dual_residual: f64,
    pub inner_iterations: usize,
}

#[derive(Debug, Clone, Default)]
pub struct SolverReport {
    /// `s† M s`.
    pub sinr: f64,
    pub energy: f64,
    pub matching_residuals: Vec<f64>,
    /// Lagrange multiplier ν* of the energy constraint, when one is solved for.
    pub multiplier: Option<f64>,
    /// `|f(ν*) − ê_t| / ê_t` for the secular equation.
    pub secular_residual: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<IterationRecord>,
    /// Objective sequence of every inner MM run, one vector per outer iteration.
    pub inner_objectives: Vec<Vec<f64>>,
    /// Inner MM steps that increased the objective beyond the slack.
    pub monotonicity_violations: usize,
    pub elapsed: Duration,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn papr_and_energy() {
        let m = DMatrix::from_row_slice(2, 2, &[
            C64::new(1.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(2.0, 0.0),
            C64::new(0.0, 0.0),
        ]);
        let w = WaveformMatrix::new(m);
        assert_eq!(w.energy(), 6.0);
        assert_eq!(w.antenna_energy(1), 4.0);
        assert_eq!(w.papr(0), 1.0);
        assert_eq!(w.papr(1), 2.0);
        let ones = DVector::from_element(2, C64::new(1.0, 0.0));
        assert_eq!(w.emitted(&ones)[0], C64::new(3.0, 0.0));
        assert_eq!(WaveformMatrix::from_vec(&w.to_vec(), 2, 2), w);
    }
}
