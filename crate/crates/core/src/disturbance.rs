//! Receiver disturbance models and the SINR quadratic form
//! `M = H†(θ_t) R⁻¹ H(θ_t)`.
//!
//! Two covariance models are supported. A general `(L·N_R) × (L·N_R)`
//! covariance is handled densely and is only accepted for small problems. The
//! structured model `R = I_L ⊗ R̄` (white noise plus uncorrelated white
//! jammers) collapses `M` to `I_L ⊗ (SINR_R · a a†)` and is never
//! materialized.

use nalgebra::DMatrix;

use crate::array_model::{check_angle, lift_target, rx_steering, tx_steering, ArrayGeometry};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_part, hpd_solve, kron_identity, C64};
use crate::operator::HermitianOp;

/// Largest `L·N_T` for which the general-covariance path builds a dense `M`.
pub const MAX_DENSE_DIM: usize = 1024;

#[derive(Debug, Clone)]
pub struct GeneralCovariance {
    r: DMatrix<C64>,
}

impl GeneralCovariance {
    pub fn new(r: DMatrix<C64>) -> Result<Self> {
        if r.nrows() != r.ncols() || r.nrows() == 0 {
            return Err(Error::Domain(format!("covariance must be square, got {:?}", r.shape())));
        }
        let asym = (&r - r.adjoint()).norm();
        if asym > 1e-10 * r.norm() {
            return Err(Error::Domain(format!("covariance is not Hermitian (‖R − R†‖ = {asym:.3e})")));
        }
        let r = hermitian_part(&r);
        hpd_solve(&r, &DMatrix::identity(r.nrows(), 1))?;
        Ok(Self { r })
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jammer {
    /// Direction in degrees.
    pub angle: f64,
    /// Jammer power σ²_j (linear).
    pub power: f64,
}

/// `R = I_L ⊗ (σ² I + Σ σ²_j b(θ_j) b†(θ_j))`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredCovariance {
    pub noise_power: f64,
    pub jammers: Vec<Jammer>,
    pub code_len: usize,
}

impl StructuredCovariance {
    pub fn new(noise_power: f64, jammers: Vec<Jammer>, code_len: usize) -> Result<Self> {
        let model = Self { noise_power, jammers, code_len };
        model.validate()?;
        Ok(model)
    }

    /// White noise only.
    pub fn white(noise_power: f64, code_len: usize) -> Result<Self> {
        Self::new(noise_power, Vec::new(), code_len)
    }

    fn validate(&self) -> Result<()> {
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(Error::Domain(format!("noise power must be positive, got {}", self.noise_power)));
        }
        if self.code_len == 0 {
            return Err(Error::Domain("code length must be positive".into()));
        }
        for j in &self.jammers {
            check_angle(j.angle)?;
            if !(j.power > 0.0 && j.power.is_finite()) {
                return Err(Error::Domain(format!("jammer power must be positive, got {}", j.power)));
            }
        }
        Ok(())
    }

    /// Materializes `I_L ⊗ R̄` as a general covariance (test and small-problem use).
    pub fn to_general(&self, geom: &ArrayGeometry) -> Result<GeneralCovariance> {
        let rbar = spatial_covariance(self, geom)?;
        GeneralCovariance::new(kron_identity(self.code_len, &rbar))
    }
}

#[derive(Debug, Clone)]
pub enum Covariance {
    General(GeneralCovariance),
    Structured(StructuredCovariance),
}

/// Spatial covariance `R̄ = σ² I + Σ σ²_j b(θ_j) b†(θ_j)`.
pub fn spatial_covariance(model: &StructuredCovariance, geom: &ArrayGeometry) -> Result<DMatrix<C64>> {
    model.validate()?;
    let mut rbar = DMatrix::<C64>::identity(geom.n_rx, geom.n_rx).map(|z| z * model.noise_power);
    for j in &model.jammers {
        let b = rx_steering(geom, j.angle)?;
        rbar += (&b * b.adjoint()).map(|z| z * j.power);
    }
    Ok(hermitian_part(&rbar))
}

/// Receive SINR `b†(θ_t) R̄⁻¹ b(θ_t)`.
pub fn receive_sinr(model: &StructuredCovariance, geom: &ArrayGeometry, theta_t: f64) -> Result<f64> {
    let rbar = spatial_covariance(model, geom)?;
    let b = rx_steering(geom, theta_t)?;
    let bmat = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    let x = hpd_solve(&rbar, &bmat)?;
    Ok(b.dotc(&x.column(0)).re)
}

/// Builds `M = H†(θ_t) R⁻¹ H(θ_t)` on `C^{L·N_T}`.
pub fn quadratic_form_matrix(
    cov: &Covariance,
    geom: &ArrayGeometry,
    theta_t: f64,
    code_len: usize,
) -> Result<HermitianOp> {
    match cov {
        Covariance::Structured(model) => {
            if model.code_len != code_len {
                return Err(Error::Domain(format!(
                    "covariance code length {} does not match {code_len}",
                    model.code_len
                )));
            }
            let sinr_r = receive_sinr(model, geom, theta_t)?;
            let a = tx_steering(geom, theta_t)?;
            Ok(HermitianOp::kron((&a * a.adjoint()).map(|z| z * sinr_r), code_len))
        }
        Covariance::General(general) => {
            let dim = code_len * geom.n_tx;
            if dim > MAX_DENSE_DIM {
                return Err(Error::TooLarge(format!(
                    "L·N_T = {dim} exceeds {MAX_DENSE_DIM}; use the structured covariance model"
                )));
            }
            let expected = code_len * geom.n_rx;
            if general.r.nrows() != expected {
                return Err(Error::Domain(format!(
                    "covariance is {0}×{0}, expected L·N_R = {expected}",
                    general.r.nrows()
                )));
            }
            let h = lift_target(geom, theta_t, code_len)?.materialize();
            let x = hpd_solve(&general.r, &h)?;
            Ok(HermitianOp::dense(h.adjoint() * x))
        }
    }
}

/// Hermitian square root `M_r` with `M_r M_r = M`.
pub fn sqrt_operator(m: &HermitianOp) -> Result<HermitianOp> {
    m.sqrt()
}
