use nalgebra::{DMatrix, DVector};

use crate::array_model::{check_angle, steering_matrix, tx_steering, ArrayGeometry, DirectionSet};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::waveform::WaveformMatrix;

/// A multifunction design problem: target, constrained directions with their
/// desired signals, and the transmit energy budget.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub geom: ArrayGeometry,
    /// Target direction θ_t in degrees.
    pub theta_t: f64,
    /// Communication directions first, then jamming directions.
    pub dirs: DirectionSet,
    pub n_comm: usize,
    /// `N_0 × L`; row k is the desired signal for direction k.
    pub desired: DMatrix<C64>,
    /// Total transmit energy e_t.
    pub e_t: f64,
}

impl Scenario {
    pub fn new(
        geom: ArrayGeometry,
        theta_t: f64,
        dirs: DirectionSet,
        n_comm: usize,
        desired: DMatrix<C64>,
        e_t: f64,
    ) -> Result<Self> {
        check_angle(theta_t)?;
        if dirs.is_empty() {
            return Err(Error::Domain("at least one constrained direction is required".into()));
        }
        dirs.check_against(&geom)?;
        if desired.nrows() != dirs.len() {
            return Err(Error::Domain(format!(
                "desired-signal matrix has {} rows for {} directions",
                desired.nrows(),
                dirs.len()
            )));
        }
        if desired.ncols() == 0 {
            return Err(Error::Domain("code length must be positive".into()));
        }
        if n_comm > dirs.len() {
            return Err(Error::Domain(format!("{n_comm} communication directions out of {}", dirs.len())));
        }
        if !(e_t > 0.0 && e_t.is_finite()) {
            return Err(Error::Domain(format!("transmit energy must be positive, got {e_t}")));
        }
        Ok(Self { geom, theta_t, dirs, n_comm, desired, e_t })
    }

    pub fn with_energy(&self, e_t: f64) -> Result<Self> {
        Self::new(self.geom, self.theta_t, self.dirs.clone(), self.n_comm, self.desired.clone(), e_t)
    }

    pub fn code_len(&self) -> usize {
        self.desired.ncols()
    }

    pub fn n_constrained(&self) -> usize {
        self.dirs.len()
    }

    pub fn n_jam(&self) -> usize {
        self.dirs.len() - self.n_comm
    }

    pub fn steering(&self) -> Result<DMatrix<C64>> {
        steering_matrix(&self.geom, &self.dirs)
    }

    pub fn target_steering(&self) -> Result<DVector<C64>> {
        tx_steering(&self.geom, self.theta_t)
    }

    /// `d_k` as a length-L column.
    pub fn desired_signal(&self, k: usize) -> DVector<C64> {
        self.desired.row(k).transpose()
    }

    /// `ē_k = ‖d_k‖²`.
    pub fn desired_energies(&self) -> Vec<f64> {
        (0..self.n_constrained()).map(|k| self.desired.row(k).norm_squared()).collect()
    }

    /// `‖a†(θ_k) S − d_kᵀ‖²` per direction.
    pub fn matching_residuals(&self, s: &WaveformMatrix) -> Result<Vec<f64>> {
        let a = self.steering()?;
        let emitted = a.adjoint() * s.matrix();
        Ok((0..self.n_constrained())
            .map(|k| (emitted.row(k) - self.desired.row(k)).norm_squared())
            .collect())
    }

    /// `‖A† S − D‖_F`.
    pub fn constraint_residual(&self, s: &WaveformMatrix) -> Result<f64> {
        let a = self.steering()?;
        Ok((a.adjoint() * s.matrix() - &self.desired).norm())
    }
}
