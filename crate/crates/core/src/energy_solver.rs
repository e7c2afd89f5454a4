//! Optimal waveform under the exact multifunction constraint `A†(Θ) S = D`
//! and the total-energy constraint `‖S‖_F² = e_t`, for a general quadratic
//! form `M`.
//!
//! Every feasible `S` is written `Ŝ + B V` with `Ŝ` the minimum-norm solution
//! and `B` an orthonormal basis of the null space of `A†`. The remaining
//! sphere-constrained quadratic maximization over `v = vec(V)` is solved
//! through its Lagrange condition, which reduces to a scalar secular equation
//! in the multiplier ν.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, householder_full_q, hpd_solve, kron_identity, unvectorize, vectorize, C64};
use crate::operator::HermitianOp;
use crate::scenario::Scenario;
use crate::waveform::{SolverReport, WaveformMatrix};

/// Largest accepted condition number of `A†A`.
pub const MAX_CONDITION: f64 = 1e8;

/// Largest `(N_T − N_0)·L` for which `B̂† M B̂` is built densely.
pub const MAX_FREE_DIM: usize = 2048;

/// Relative energy deficit tolerated (and clamped) at the feasibility boundary.
const BOUNDARY_TOL: f64 = 1e-12;

const SECULAR_TOL: f64 = 1e-13;
const SECULAR_MAX_ITER: usize = 200;

#[derive(Debug, Clone)]
pub struct NullSpaceParam {
    /// Minimum-norm particular solution `Ŝ = A (A†A)⁻¹ D`.
    pub s_hat: DMatrix<C64>,
    /// Orthonormal basis `B` of the null space of `A†`, `N_T × (N_T − N_0)`.
    pub basis: DMatrix<C64>,
    /// Free energy `ê_t = e_t − ‖Ŝ‖_F²` (clamped to 0 at the boundary).
    pub residual_energy: f64,
}

impl NullSpaceParam {
    /// `Ŝ + B V`.
    pub fn waveform(&self, v: &DMatrix<C64>) -> DMatrix<C64> {
        &self.s_hat + &self.basis * v
    }
}

/// Minimum energy `tr(D† (A†A)⁻¹ D)` needed to satisfy the matching constraint.
pub fn minimum_energy(scn: &Scenario) -> Result<f64> {
    Ok(particular_solution(scn)?.norm_squared())
}

fn particular_solution(scn: &Scenario) -> Result<DMatrix<C64>> {
    let a = scn.steering()?;
    let gram = a.adjoint() * &a;
    let eig = hermitian_eigen(&gram);
    let hi = eig.max_value();
    let lo = eig.values[eig.values.len() - 1];
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if condition > MAX_CONDITION {
        return Err(Error::IllConditioned { condition, limit: MAX_CONDITION });
    }
    Ok(&a * hpd_solve(&gram, &scn.desired)?)
}

pub fn parameterize(scn: &Scenario) -> Result<NullSpaceParam> {
    let s_hat = particular_solution(scn)?;
    let required = s_hat.norm_squared();
    let mut residual_energy = scn.e_t - required;
    if residual_energy < 0.0 {
        if residual_energy < -BOUNDARY_TOL * scn.e_t.max(required) {
            return Err(Error::InfeasibleEnergy { available: scn.e_t, required });
        }
        residual_energy = 0.0;
    }
    let a = scn.steering()?;
    let (q, _) = householder_full_q(&a);
    let n0 = a.ncols();
    let basis = q.columns(n0, a.nrows() - n0).into_owned();
    Ok(NullSpaceParam { s_hat, basis, residual_energy })
}

/// Shifted secular function `f(x) = Σ w_m / (x + δ_m)²` with `x = ν − τ_1`
/// and `δ_m = τ_1 − τ_m ≥ 0`.
fn secular_value(x: f64, deltas: &[f64], weights: &[f64]) -> f64 {
    deltas.iter().zip(weights).map(|(d, w)| w / ((x + d) * (x + d))).sum()
}

/// Root of `f(x) = budget` in `[lo, hi]` by Newton on `1/√f` (nearly linear
/// in x), falling back to bisection whenever a step leaves the bracket.
fn secular_root(deltas: &[f64], weights: &[f64], budget: f64, mut lo: f64, mut hi: f64) -> (f64, usize) {
    let target = 1.0 / budget.sqrt();
    let mut x = hi;
    for iter in 1..=SECULAR_MAX_ITER {
        let f = secular_value(x, deltas, weights);
        if (f - budget).abs() <= SECULAR_TOL * budget {
            return (x, iter);
        }
        if f > budget {
            lo = lo.max(x);
        } else {
            hi = hi.min(x);
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
            return (x, iter);
        }
        let cube: f64 = deltas.iter().zip(weights).map(|(d, w)| w / (x + d).powi(3)).sum();
        let phi = 1.0 / f.sqrt() - target;
        let dphi = cube / f.powf(1.5);
        let step = x - phi / dphi;
        x = if step.is_finite() && step > lo && step < hi { step } else { 0.5 * (lo + hi) };
    }
    (x, SECULAR_MAX_ITER)
}

/// Solves `Σ |s̃_m|² / (ν − τ_m)² = ê_t` for the unique root `ν* > τ_1`.
///
/// `spectrum` must be sorted non-increasingly.
pub fn solve_secular(spectrum: &[f64], coeffs: &[C64], budget: f64) -> Result<f64> {
    if spectrum.len() != coeffs.len() || spectrum.is_empty() {
        return Err(Error::Domain("spectrum and coefficients must be non-empty and of equal length".into()));
    }
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::Domain(format!("secular budget must be positive, got {budget}")));
    }
    if spectrum.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::Domain("spectrum must be sorted in non-increasing order".into()));
    }
    let weights: Vec<f64> = coeffs.iter().map(|c| c.norm_sqr()).collect();
    let total: f64 = weights.iter().sum();
    if total == 0.0 {
        return Err(Error::DegenerateSecular);
    }
    let tau1 = spectrum[0];
    let deltas: Vec<f64> = spectrum.iter().map(|t| tau1 - t).collect();
    let norm = total.sqrt();
    let spread = tau1 - spectrum[spectrum.len() - 1];
    let hi = norm / budget.sqrt();
    let lo = (hi - spread).max(0.0);
    let (x, _) = secular_root(&deltas, &weights, budget, lo, hi);
    Ok(tau1 + x)
}

/// Outcome of the sphere-constrained maximization over `v`.
struct FreeSolution {
    v: DMatrix<C64>,
    nu: f64,
    secular_residual: Option<f64>,
    iterations: usize,
}

/// Maximizes `(ŝ + B̂v)† M (ŝ + B̂v)` over `‖v‖² = budget`, given the
/// decomposition `B̂†MB̂ = I_reps ⊗ (U diag(τ) U†)` and `g = B̂†Mŝ` reshaped to
/// `bs × reps`.
fn maximize_on_sphere(eig_values: &DVector<f64>, eig_vectors: &DMatrix<C64>, g: &DMatrix<C64>, budget: f64) -> FreeSolution {
    let bs = eig_vectors.nrows();
    let reps = g.ncols();
    let tau1 = eig_values[0];
    let projected = eig_vectors.adjoint() * g; // s̃ laid out as bs × reps
    let weights: Vec<f64> = (0..bs).map(|j| projected.row(j).norm_squared()).collect();
    let total: f64 = weights.iter().sum();

    let top_eigvec = |v: &mut DMatrix<C64>, magnitude: f64| {
        v.view_mut((0, 0), (bs, 1)).copy_from(&eig_vectors.column(0));
        v.scale_mut(magnitude);
    };

    if budget == 0.0 {
        return FreeSolution { v: DMatrix::zeros(bs, reps), nu: tau1, secular_residual: None, iterations: 0 };
    }
    let g_scale = g.norm();
    if total == 0.0 || total.sqrt() <= 1e-14 * g_scale.max(f64::MIN_POSITIVE) {
        // No linear term: any unit top eigenvector is optimal; take the first.
        let mut v = DMatrix::zeros(bs, reps);
        top_eigvec(&mut v, budget.sqrt());
        return FreeSolution { v, nu: tau1, secular_residual: None, iterations: 0 };
    }

    let spectral_scale = eig_values.iter().fold(0.0_f64, |m, t| m.max(t.abs())).max(f64::MIN_POSITIVE);
    let cluster_tol = 1e-10 * spectral_scale;
    let deltas: Vec<f64> = eig_values.iter().map(|t| tau1 - t).collect();
    let in_cluster: Vec<bool> = deltas.iter().map(|&d| d <= cluster_tol).collect();
    let rest_at_zero: f64 = deltas
        .iter()
        .zip(&weights)
        .zip(&in_cluster)
        .filter(|(_, &c)| !c)
        .map(|((d, w), _)| w / (d * d))
        .sum();
    let top_weight: f64 = weights.iter().zip(&in_cluster).filter(|(_, &c)| c).map(|(w, _)| w).sum();

    if rest_at_zero + top_weight / (cluster_tol * cluster_tol) <= budget {
        // Hard case: the root sits at τ_1 within eigenvalue resolution. Use the
        // pseudo-inverse part plus a top-eigenspace component filling the rest.
        let mut v = DMatrix::zeros(bs, reps);
        for j in 0..bs {
            if !in_cluster[j] {
                let coef = projected.row(j).map(|z| z / deltas[j]);
                v += eig_vectors.column(j) * coef;
            }
        }
        let fill = (budget - rest_at_zero).max(0.0).sqrt();
        let mut top = DMatrix::zeros(bs, reps);
        for j in 0..bs {
            if in_cluster[j] {
                top += eig_vectors.column(j) * projected.row(j);
            }
        }
        let top_norm = top.norm();
        if top_norm > 0.0 {
            v += top.map(|z| z * (fill / top_norm));
        } else {
            let mut t = DMatrix::zeros(bs, reps);
            top_eigvec(&mut t, fill);
            v += t;
        }
        return FreeSolution { v, nu: tau1, secular_residual: None, iterations: 0 };
    }

    let hi = total.sqrt() / budget.sqrt();
    let spread = deltas[deltas.len() - 1];
    let lo = (hi - spread).max(cluster_tol).min(hi);
    let (x, iterations) = secular_root(&deltas, &weights, budget, lo, hi);
    let f = secular_value(x, &deltas, &weights);
    let mut scaled = projected;
    for j in 0..bs {
        let d = x + deltas[j];
        scaled.row_mut(j).unscale_mut(d);
    }
    let v = eig_vectors * scaled;
    FreeSolution {
        v,
        nu: tau1 + x,
        secular_residual: Some((f - budget).abs() / budget),
        iterations,
    }
}

/// Maximizes `s† M s` subject to `A† S = D` and `‖s‖² = e_t`.
pub fn solve_general(scn: &Scenario, m: &HermitianOp) -> Result<(WaveformMatrix, SolverReport)> {
    let start = Instant::now();
    let l = scn.code_len();
    let nt = scn.geom.n_tx;
    if m.dim() != l * nt {
        return Err(Error::Domain(format!("quadratic form has dimension {}, expected L·N_T = {}", m.dim(), l * nt)));
    }
    let param = parameterize(scn)?;
    let k = param.basis.ncols();
    let s_hat_vec = vectorize(&param.s_hat);
    let m_shat = m.apply(&s_hat_vec);

    let (eig, g) = match m {
        HermitianOp::Kron { block, .. } => {
            // B̂†MB̂ = I_L ⊗ (B† X B); g = vec(B† X Ŝ).
            let reduced = param.basis.adjoint() * block * &param.basis;
            let g = param.basis.adjoint() * unvectorize(&m_shat, nt, l);
            (hermitian_eigen(&reduced), g)
        }
        HermitianOp::Dense(dense) => {
            if k * l > MAX_FREE_DIM {
                return Err(Error::TooLarge(format!(
                    "(N_T − N_0)·L = {} exceeds {MAX_FREE_DIM}; use the structured solver",
                    k * l
                )));
            }
            let b_hat = kron_identity(l, &param.basis);
            let reduced = b_hat.adjoint() * dense * &b_hat;
            let g = b_hat.adjoint() * &m_shat;
            (hermitian_eigen(&reduced), DMatrix::from_column_slice(k * l, 1, g.as_slice()))
        }
    };

    let free = maximize_on_sphere(&eig.values, &eig.vectors, &g, param.residual_energy);
    let mut v = DMatrix::from_column_slice(k, l, free.v.as_slice());
    let vnorm = v.norm();
    if vnorm > 0.0 {
        v.scale_mut(param.residual_energy.sqrt() / vnorm);
    }
    let waveform = WaveformMatrix::new(param.waveform(&v));
    let s = waveform.to_vec();
    let report = SolverReport {
        sinr: m.quad(&s),
        energy: waveform.energy(),
        matching_residuals: scn.matching_residuals(&waveform)?,
        multiplier: Some(free.nu),
        secular_residual: free.secular_residual,
        iterations: free.iterations,
        converged: true,
        elapsed: start.elapsed(),
        ..Default::default()
    };
    Ok((waveform, report))
}

/// Radar-only optimum: `s = √e_t · e_max(M)` with SINR `e_t · λ_max(M)`.
pub fn radar_only_optimum(m: &HermitianOp, e_t: f64) -> Result<(DVector<C64>, f64)> {
    if !(e_t > 0.0 && e_t.is_finite()) {
        return Err(Error::Domain(format!("transmit energy must be positive, got {e_t}")));
    }
    let (lambda, v) = m.principal();
    Ok((v.map(|z| z * e_t.sqrt()), e_t * lambda))
}
