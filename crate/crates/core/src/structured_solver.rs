//! Closed-form optimum for the structured disturbance `R = I_L ⊗ R̄`, where
//! the SINR factors into a receive part `b†R̄⁻¹b` and a transmit part
//! `‖a†(θ_t) S‖²`.

use nalgebra::{DMatrix, DVector};

use crate::array_model::{normalized_beampattern, normalized_gain};
use crate::disturbance::{receive_sinr, StructuredCovariance};
use crate::energy_solver::parameterize;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::scenario::Scenario;
use crate::waveform::WaveformMatrix;

#[derive(Debug, Clone)]
pub struct StructuredSolution {
    pub waveform: WaveformMatrix,
    /// `q = Ŝ† a(θ_t)`, length L.
    pub q: DVector<C64>,
    /// `u = B† a(θ_t)`, length `N_T − N_0`.
    pub u: DVector<C64>,
    /// `√ê_t / (‖u‖‖q‖)`; absent when either norm vanishes.
    pub beta0: Option<f64>,
    /// Transmit SINR `‖a†(θ_t) S‖²`.
    pub sinr_t: f64,
    /// Receive SINR `b†(θ_t) R̄⁻¹ b(θ_t)`.
    pub sinr_r: f64,
    pub residual_energy: f64,
}

impl StructuredSolution {
    pub fn total_sinr(&self) -> f64 {
        self.sinr_t * self.sinr_r
    }
}

/// Conjugated row `k` of `D`, normalized: the `x` with `x† = d_kᵀ/‖d_k‖` for
/// the first non-zero desired signal, or the first code direction if `D = 0`.
fn fallback_code_direction(desired: &DMatrix<C64>) -> DVector<C64> {
    for row in desired.row_iter() {
        let norm = row.norm();
        if norm > 0.0 {
            return row.adjoint().map(|z| z / norm);
        }
    }
    let mut e1 = DVector::zeros(desired.ncols());
    e1[0] = C64::new(1.0, 0.0);
    e1
}

pub fn solve_structured(scn: &Scenario, model: &StructuredCovariance) -> Result<StructuredSolution> {
    let l = scn.code_len();
    if model.code_len != l {
        return Err(Error::Domain(format!("covariance code length {} does not match {l}", model.code_len)));
    }
    let sinr_r = receive_sinr(model, &scn.geom, scn.theta_t)?;
    let param = parameterize(scn)?;
    let a_t = scn.target_steering()?;
    let q = param.s_hat.adjoint() * &a_t;
    let u = param.basis.adjoint() * &a_t;
    let e_hat = param.residual_energy;
    let (q_norm, u_norm) = (q.norm(), u.norm());
    let u_zero = u_norm <= 1e-12 * (scn.geom.n_tx as f64).sqrt();
    let q_zero = q_norm <= 1e-14 * (param.s_hat.norm() * (scn.geom.n_tx as f64).sqrt()) || q_norm == 0.0;

    // S = Ŝ + √ê_t · (null-space direction) x†.
    let null_dir: DVector<C64> = if u_zero { param.basis.column(0).into_owned() } else { &param.basis * u.map(|z| z / u_norm) };
    let code_dir: DVector<C64> = if q_zero { fallback_code_direction(&scn.desired) } else { q.map(|z| z / q_norm) };
    let s = &param.s_hat + (null_dir * code_dir.adjoint()).map(|z| z * e_hat.sqrt());
    let waveform = WaveformMatrix::new(s);

    let beta0 = if u_zero || q_zero { None } else { Some(e_hat.sqrt() / (u_norm * q_norm)) };
    let sinr_t = if u_zero { q_norm * q_norm } else { (q_norm + e_hat.sqrt() * u_norm).powi(2) };
    Ok(StructuredSolution { waveform, q, u, beta0, sinr_t, sinr_r, residual_energy: e_hat })
}

/// Rank-one solution `S = w dᵀ` for a single constrained direction θ̄, with
/// `w = α_1 a(θ̄) + α_2 a(θ_t)`.
#[derive(Debug, Clone)]
pub struct CoherentSolution {
    pub beamformer: DVector<C64>,
    /// `(α_1, α_2)`; absent when the target steering lies in the span of a(θ̄).
    pub alphas: Option<(f64, C64)>,
    pub solution: StructuredSolution,
}

pub fn coherent_case(scn: &Scenario, model: &StructuredCovariance) -> Result<CoherentSolution> {
    if scn.n_constrained() != 1 {
        return Err(Error::Usage(format!(
            "coherent form needs exactly one constrained direction, got {}",
            scn.n_constrained()
        )));
    }
    let d = scn.desired_signal(0);
    let d_energy = d.norm_squared();
    if d_energy == 0.0 {
        return Err(Error::Usage("coherent form needs a non-zero desired signal".into()));
    }
    let solution = solve_structured(scn, model)?;
    // S = w dᵀ  ⇒  S d* = w ‖d‖².
    let beamformer = (solution.waveform.matrix() * d.conjugate()).map(|z| z / d_energy);

    let nt = scn.geom.n_tx as f64;
    let theta_bar = scn.dirs.angles()[0];
    // B(θ_t, θ̄) = a†(θ̄) a(θ_t) / N_T.
    let beam = normalized_beampattern(&scn.geom, scn.theta_t, theta_bar)?;
    let alphas = match solution.beta0 {
        Some(beta0) => Some((1.0 / nt - beta0 * beam.norm_sqr(), beam.conj() * beta0)),
        None if solution.u.norm() > 1e-12 * nt.sqrt() => {
            // q = 0: matching and detection components decouple.
            Some((1.0 / nt, C64::new((solution.residual_energy / (nt * d_energy)).sqrt(), 0.0)))
        }
        None => None,
    };
    Ok(CoherentSolution { beamformer, alphas, solution })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrApproximation {
    /// Approximate transmit SINR (linear).
    pub value: f64,
    /// Sum of squared normalized gains toward the constrained directions.
    pub gain_sum: f64,
    /// False when `gain_sum > 1`, where the large-array approximation breaks
    /// down; `gain_sum` is then clamped to 1 in `value`.
    pub valid: bool,
}

/// Large-array approximation of the transmit SINR, assuming near-orthogonal
/// steering vectors and desired signals. Accuracy degrades for correlated
/// desired signals or constrained directions inside the target mainlobe.
pub fn approximate_sinr(scn: &Scenario) -> Result<SinrApproximation> {
    let nt = scn.geom.n_tx as f64;
    let energies = scn.desired_energies();
    let mut weighted = 0.0;
    let mut gain_sum = 0.0;
    for (k, &theta) in scn.dirs.angles().iter().enumerate() {
        let g2 = normalized_gain(&scn.geom, theta, scn.theta_t)?.powi(2);
        weighted += energies[k] * g2;
        gain_sum += g2;
    }
    let e_hat = (scn.e_t - energies.iter().sum::<f64>() / nt).max(0.0);
    let valid = gain_sum <= 1.0;
    let free = (e_hat * nt * (1.0 - gain_sum.min(1.0))).sqrt();
    Ok(SinrApproximation { value: (weighted.sqrt() + free).powi(2), gain_sum, valid })
}

/// Largest transmit SINR reachable with `N_0` constrained directions that each
/// receive energy `ē`: `e_t N_T − (N_0 − 1) ē`.
pub fn sinr_bound_case2(e_t: f64, n_tx: usize, n_constrained: usize, e_bar: f64) -> Result<f64> {
    if !(e_t > 0.0 && e_bar >= 0.0 && n_tx > 0 && n_constrained > 0) {
        return Err(Error::Domain("bound arguments must be positive".into()));
    }
    Ok(e_t * n_tx as f64 - (n_constrained as f64 - 1.0) * e_bar)
}
