//! Uniform linear array geometry, steering vectors and beampatterns, plus the
//! Kronecker-lifted target and direction operators acting on `vec(S)`.
//!
//! Angles are given in degrees, measured from broadside, and must lie in the
//! open interval (-90°, 90°). Element `m` (0-based) of a steering vector is
//! `exp(i·2π·d·m·sin θ)` with `d` the element spacing in wavelengths, so the
//! first element is the phase reference.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{kron_identity, unvectorize, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    pub n_tx: usize,
    pub n_rx: usize,
    /// Transmit element spacing in wavelengths.
    pub tx_spacing: f64,
    /// Receive element spacing in wavelengths.
    pub rx_spacing: f64,
}

impl ArrayGeometry {
    pub fn new(n_tx: usize, n_rx: usize, tx_spacing: f64, rx_spacing: f64) -> Result<Self> {
        if n_tx == 0 || n_rx == 0 {
            return Err(Error::Domain(format!(
                "antenna counts must be positive (n_tx = {n_tx}, n_rx = {n_rx})"
            )));
        }
        if !(tx_spacing > 0.0 && tx_spacing.is_finite() && rx_spacing > 0.0 && rx_spacing.is_finite()) {
            return Err(Error::Domain(format!(
                "element spacings must be positive (tx = {tx_spacing}, rx = {rx_spacing})"
            )));
        }
        Ok(Self { n_tx, n_rx, tx_spacing, rx_spacing })
    }

    /// Half-wavelength spacing on both arrays.
    pub fn half_wavelength(n_tx: usize, n_rx: usize) -> Result<Self> {
        Self::new(n_tx, n_rx, 0.5, 0.5)
    }
}

/// Ordered set of distinct constrained directions (degrees); communication
/// directions first, then jamming directions.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    angles: Vec<f64>,
}

impl DirectionSet {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        for &a in &angles {
            check_angle(a)?;
        }
        for (i, a) in angles.iter().enumerate() {
            if angles[..i].iter().any(|b| b == a) {
                return Err(Error::Domain(format!("duplicate direction {a}°")));
            }
        }
        Ok(Self { angles })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Checks the working assumption `N_0 < N_T`.
    pub fn check_against(&self, geom: &ArrayGeometry) -> Result<()> {
        if self.angles.len() >= geom.n_tx {
            return Err(Error::Domain(format!(
                "{} constrained directions need more than {} transmit antennas",
                self.angles.len(),
                geom.n_tx
            )));
        }
        Ok(())
    }
}

pub(crate) fn check_angle(theta_deg: f64) -> Result<()> {
    if !(theta_deg > -90.0 && theta_deg < 90.0) {
        return Err(Error::Domain(format!("angle {theta_deg}° outside (-90°, 90°)")));
    }
    Ok(())
}

fn ula_steering(n: usize, spacing: f64, theta_deg: f64) -> Result<DVector<C64>> {
    check_angle(theta_deg)?;
    let phase_step = 2.0 * PI * spacing * theta_deg.to_radians().sin();
    Ok(DVector::from_fn(n, |m, _| C64::from_polar(1.0, phase_step * m as f64)))
}

/// Transmit steering vector `a(θ)`.
pub fn tx_steering(geom: &ArrayGeometry, theta_deg: f64) -> Result<DVector<C64>> {
    ula_steering(geom.n_tx, geom.tx_spacing, theta_deg)
}

/// Receive steering vector `b(θ)`.
pub fn rx_steering(geom: &ArrayGeometry, theta_deg: f64) -> Result<DVector<C64>> {
    ula_steering(geom.n_rx, geom.rx_spacing, theta_deg)
}

/// `A(Θ) = [a(θ_1), …, a(θ_N0)]`, columns in the order of `dirs`.
pub fn steering_matrix(geom: &ArrayGeometry, dirs: &DirectionSet) -> Result<DMatrix<C64>> {
    if dirs.is_empty() {
        return Err(Error::Domain("steering matrix needs at least one direction".into()));
    }
    let mut a = DMatrix::zeros(geom.n_tx, dirs.len());
    for (k, &theta) in dirs.angles().iter().enumerate() {
        a.set_column(k, &tx_steering(geom, theta)?);
    }
    Ok(a)
}

/// Normalized transmit beampattern `B(θp, θe) = a†(θe) a(θp) / N_T` of the
/// array pointed at `theta_point`, evaluated at `theta_eval`.
pub fn normalized_beampattern(geom: &ArrayGeometry, theta_point: f64, theta_eval: f64) -> Result<C64> {
    let ap = tx_steering(geom, theta_point)?;
    let ae = tx_steering(geom, theta_eval)?;
    Ok(ae.dotc(&ap) / geom.n_tx as f64)
}

/// Normalized gain `G = |B(θp, θe)|`.
pub fn normalized_gain(geom: &ArrayGeometry, theta_point: f64, theta_eval: f64) -> Result<f64> {
    Ok(normalized_beampattern(geom, theta_point, theta_eval)?.norm())
}

/// Target lift `H(θ_t) = I_L ⊗ b(θ_t) a†(θ_t)`, applied implicitly.
#[derive(Debug, Clone)]
pub struct TargetLift {
    pub tx: DVector<C64>,
    pub rx: DVector<C64>,
    pub code_len: usize,
}

pub fn lift_target(geom: &ArrayGeometry, theta_t: f64, code_len: usize) -> Result<TargetLift> {
    if code_len == 0 {
        return Err(Error::Domain("code length must be positive".into()));
    }
    Ok(TargetLift {
        tx: tx_steering(geom, theta_t)?,
        rx: rx_steering(geom, theta_t)?,
        code_len,
    })
}

impl TargetLift {
    /// `H s = vec(b a† S)`.
    pub fn apply(&self, s: &DVector<C64>) -> DVector<C64> {
        let waveform = unvectorize(s, self.tx.len(), self.code_len);
        let beam = self.tx.adjoint() * waveform; // 1 × L
        let out = &self.rx * beam;
        DVector::from_column_slice(out.as_slice())
    }

    pub fn materialize(&self) -> DMatrix<C64> {
        kron_identity(self.code_len, &(&self.rx * self.tx.adjoint()))
    }
}

/// Direction lift `G(θ) = I_L ⊗ a(θ)`, applied implicitly.
#[derive(Debug, Clone)]
pub struct DirectionLift {
    pub steering: DVector<C64>,
    pub code_len: usize,
}

pub fn lift_direction(geom: &ArrayGeometry, theta: f64, code_len: usize) -> Result<DirectionLift> {
    if code_len == 0 {
        return Err(Error::Domain("code length must be positive".into()));
    }
    Ok(DirectionLift { steering: tx_steering(geom, theta)?, code_len })
}

impl DirectionLift {
    pub fn from_steering(steering: DVector<C64>, code_len: usize) -> Self {
        Self { steering, code_len }
    }

    /// `G† s`: the length-L signal emitted toward the direction.
    pub fn adjoint_apply(&self, s: &DVector<C64>) -> DVector<C64> {
        let n = self.steering.len();
        assert_eq!(s.len(), n * self.code_len, "waveform vector has the wrong length");
        DVector::from_fn(self.code_len, |l, _| self.steering.dotc(&s.rows(l * n, n)))
    }

    /// `G y = vec(a yᵀ)`.
    pub fn apply(&self, y: &DVector<C64>) -> DVector<C64> {
        let n = self.steering.len();
        assert_eq!(y.len(), self.code_len, "code vector has the wrong length");
        DVector::from_fn(n * self.code_len, |i, _| self.steering[i % n] * y[i / n])
    }

    pub fn materialize(&self) -> DMatrix<C64> {
        let col = DMatrix::from_column_slice(self.steering.len(), 1, self.steering.as_slice());
        kron_identity(self.code_len, &col)
    }
}
