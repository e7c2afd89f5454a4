//! SINR maximization under matching-error balls, per-antenna energy and a
//! peak-to-average power ratio (PAPR) bound, solved by ADMM with an inner
//! majorization-minimization (MM) loop.

use std::collections::VecDeque;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::array_model::DirectionLift;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::operator::HermitianOp;
use crate::scenario::Scenario;
use crate::waveform::{IterationRecord, SolverReport, WaveformMatrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaprConstraint {
    /// PAPR bound ρ ∈ [1, L].
    pub rho: f64,
    /// `e_t / N_T`.
    pub per_antenna_energy: f64,
    pub code_len: usize,
}

impl PaprConstraint {
    pub fn new(rho: f64, e_t: f64, n_tx: usize, code_len: usize) -> Result<Self> {
        if code_len == 0 || n_tx == 0 {
            return Err(Error::Domain("array size and code length must be positive".into()));
        }
        if !(e_t > 0.0 && e_t.is_finite()) {
            return Err(Error::Domain(format!("transmit energy must be positive, got {e_t}")));
        }
        check_rho(rho, code_len)?;
        Ok(Self { rho, per_antenna_energy: e_t / n_tx as f64, code_len })
    }

    /// Constant modulus `a_s = √(e_t / (L N_T))` used when ρ = 1.
    pub fn amplitude(&self) -> f64 {
        (self.per_antenna_energy / self.code_len as f64).sqrt()
    }

    /// Largest allowed `|s_n(l)|²`.
    pub fn peak_power(&self) -> f64 {
        self.rho * self.per_antenna_energy / self.code_len as f64
    }
}

fn check_rho(rho: f64, code_len: usize) -> Result<()> {
    if !(rho >= 1.0 - 1e-12 && rho <= code_len as f64 * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!("PAPR bound must lie in [1, {code_len}], got {rho}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingTolerances {
    eps: Vec<f64>,
}

impl MatchingTolerances {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::Domain(format!("matching tolerances must be positive, got {eps:?}")));
        }
        Ok(Self { eps })
    }

    pub fn values(&self) -> &[f64] {
        &self.eps
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmmOptions {
    /// Penalty μ; must exceed 2.
    pub mu: f64,
    pub max_outer: usize,
    /// Relative SINR change below which the outer loop may stop.
    pub sinr_tol: f64,
    pub inner_max: usize,
    /// Relative objective change below which the MM loop stops.
    pub inner_tol: f64,
    /// Window of outer iterations over which a flat, above-tolerance matching
    /// residual marks the tolerances as unreachable.
    pub plateau: usize,
    /// Keep every inner objective sequence in the report.
    pub record_inner: bool,
    pub seed: u64,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        Self {
            mu: 5.0,
            max_outer: 2000,
            sinr_tol: 1e-5,
            inner_max: 500,
            inner_tol: 1e-6,
            plateau: 200,
            record_inner: false,
            seed: 0,
        }
    }
}

/// Relative slack on matching residuals at convergence.
pub const MATCHING_SLACK: f64 = 1e-3;

/// Relative slack allowed for an MM step before it counts as non-monotone.
pub const MONOTONE_SLACK: f64 = 1e-9;

/// Maximizes `Re(target† s)` over `‖s‖² = energy`, `|s_l|² ≤ ρ·energy/L`.
///
/// The maximizer is `s_l = e^{i arg target_l} · min(γ|target_l|, √cap)`; the
/// clipped entries are the largest ones, so γ is found by scanning the sorted
/// magnitudes. Entries with zero target (and the whole vector for a zero
/// target) get phase zero; energy not absorbed by non-zero entries is spread
/// evenly over them.
pub fn papr_project(target: &DVector<C64>, energy: f64, rho: f64) -> Result<DVector<C64>> {
    let l = target.len();
    if l == 0 {
        return Err(Error::Domain("empty projection target".into()));
    }
    if !(energy > 0.0 && energy.is_finite()) {
        return Err(Error::Domain(format!("projection energy must be positive, got {energy}")));
    }
    check_rho(rho, l)?;
    let phase = |z: C64| if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
    if rho <= 1.0 + 1e-12 {
        let a_s = (energy / l as f64).sqrt();
        return Ok(target.map(|z| phase(z) * a_s));
    }
    let cap = rho.min(l as f64) * energy / l as f64;
    let root_cap = cap.sqrt();
    let mags: Vec<f64> = target.iter().map(|z| z.norm()).collect();
    let mut order: Vec<usize> = (0..l).collect();
    order.sort_by(|&i, &j| mags[j].total_cmp(&mags[i]));
    let mut suffix = vec![0.0; l + 1];
    for k in (0..l).rev() {
        suffix[k] = suffix[k + 1] + mags[order[k]] * mags[order[k]];
    }
    let mut out = DVector::zeros(l);
    for k in 0..l {
        let remaining = energy - k as f64 * cap;
        if suffix[k] == 0.0 {
            // Only zero-target entries remain.
            let r = (remaining / (l - k) as f64).sqrt().min(root_cap);
            for &i in &order[..k] {
                out[i] = phase(target[i]) * root_cap;
            }
            for &i in &order[k..] {
                out[i] = C64::new(r, 0.0);
            }
            return Ok(out);
        }
        let gamma = (remaining / suffix[k]).sqrt();
        if gamma * mags[order[k]] <= root_cap {
            for &i in &order[..k] {
                out[i] = phase(target[i]) * root_cap;
            }
            for &i in &order[k..] {
                out[i] = target[i] * gamma;
            }
            return Ok(out);
        }
    }
    // Every entry clipped: only reachable when ρ = L rounds below the bound.
    Ok(target.map(|z| phase(z) * root_cap))
}

/// Projects each antenna's code of `t̄` (entries `n + l·N_T` of `vec(S)`).
fn project_antennas(tbar: &DVector<C64>, n_tx: usize, constraint: &PaprConstraint) -> Result<DVector<C64>> {
    let l = constraint.code_len;
    let mut s = DVector::zeros(n_tx * l);
    let mut row = DVector::zeros(l);
    for n in 0..n_tx {
        for j in 0..l {
            row[j] = tbar[n + j * n_tx];
        }
        let projected = papr_project(&row, constraint.per_antenna_energy, constraint.rho)?;
        for j in 0..l {
            s[n + j * n_tx] = projected[j];
        }
    }
    Ok(s)
}

#[derive(Debug, Clone)]
pub struct InnerSolution {
    pub s: DVector<C64>,
    /// `s† T s − 2 Re(t† s)` at the start and after every step.
    pub objectives: Vec<f64>,
    pub iterations: usize,
    /// Steps that increased the objective beyond the slack.
    pub violations: usize,
}

fn mm_objective(t_op: &HermitianOp, t_vec: &DVector<C64>, s: &DVector<C64>) -> f64 {
    t_op.quad(s) - 2.0 * t_vec.dotc(s).re
}

/// Minimizes `s† T s − 2 Re(t† s)` over the per-antenna energy and PAPR set
/// by majorization-minimization, warm-started at `start`.
pub fn mm_inner_solve(
    t_op: &HermitianOp,
    lambda_max: f64,
    t_vec: &DVector<C64>,
    start: &DVector<C64>,
    constraint: &PaprConstraint,
    max_iter: usize,
    tol: f64,
) -> Result<InnerSolution> {
    let dim = t_op.dim();
    if t_vec.len() != dim || start.len() != dim || dim % constraint.code_len != 0 {
        return Err(Error::Domain("MM operands have inconsistent dimensions".into()));
    }
    let n_tx = dim / constraint.code_len;
    let mut s = start.clone();
    let mut f = mm_objective(t_op, t_vec, &s);
    let mut objectives = vec![f];
    let mut violations = 0;
    let mut iterations = 0;
    while iterations < max_iter {
        // t̄ = t − (T − λ_max I) s.
        let tbar = t_vec - t_op.apply(&s) + s.map(|z| z * lambda_max);
        let next = project_antennas(&tbar, n_tx, constraint)?;
        let f_next = mm_objective(t_op, t_vec, &next);
        iterations += 1;
        if f_next > f + MONOTONE_SLACK * f.abs().max(1.0) {
            violations += 1;
        }
        objectives.push(f_next);
        let change = (f_next - f).abs();
        s = next;
        let scale = f.abs().max(f_next.abs());
        f = f_next;
        if change <= tol * scale {
            break;
        }
    }
    Ok(InnerSolution { s, objectives, iterations, violations })
}

/// Constant-modulus start with independent uniform phases.
pub fn random_constant_modulus(n_tx: usize, constraint: &PaprConstraint, rng: &mut ChaCha8Rng) -> DVector<C64> {
    let a_s = constraint.amplitude();
    DVector::from_fn(n_tx * constraint.code_len, |_, _| {
        C64::from_polar(a_s, 2.0 * std::f64::consts::PI * rng.random::<f64>())
    })
}

/// `Σ_k a_k a_k†` (per code slot) plus `M`, keeping the block structure when
/// `M` has it.
fn admm_quadratic(lifts: &[DirectionLift], m: &HermitianOp, code_len: usize) -> HermitianOp {
    let nt = lifts[0].steering.len();
    let mut block = DMatrix::<C64>::zeros(nt, nt);
    for g in lifts {
        block += &g.steering * g.steering.adjoint();
    }
    HermitianOp::kron(block, code_len).plus(m)
}

/// ADMM for the PAPR-constrained design. `m` is the SINR quadratic form and
/// `m_r` its Hermitian square root.
pub fn admm_solve(
    scn: &Scenario,
    m: &HermitianOp,
    m_r: &HermitianOp,
    tol: &MatchingTolerances,
    constraint: &PaprConstraint,
    opts: &AdmmOptions,
) -> Result<(WaveformMatrix, SolverReport)> {
    let start_time = Instant::now();
    let nt = scn.geom.n_tx;
    let l = scn.code_len();
    let n0 = scn.n_constrained();
    let dim = nt * l;
    if !(opts.mu > 2.0 && opts.mu.is_finite()) {
        return Err(Error::Domain(format!("ADMM penalty must exceed 2, got {}", opts.mu)));
    }
    if tol.values().len() != n0 {
        return Err(Error::Domain(format!("{} matching tolerances for {n0} directions", tol.values().len())));
    }
    if constraint.code_len != l || (constraint.per_antenna_energy * nt as f64 - scn.e_t).abs() > 1e-12 * scn.e_t {
        return Err(Error::Domain("PAPR constraint does not match the scenario".into()));
    }
    if m.dim() != dim || m_r.dim() != dim {
        return Err(Error::Domain(format!("quadratic forms must have dimension L·N_T = {dim}")));
    }
    if opts.max_outer == 0 || opts.inner_max == 0 {
        return Err(Error::Domain("iteration caps must be positive".into()));
    }

    let steering = scn.steering()?;
    let lifts: Vec<DirectionLift> =
        (0..n0).map(|k| DirectionLift::from_steering(steering.column(k).into_owned(), l)).collect();
    let desired: Vec<DVector<C64>> = (0..n0).map(|k| scn.desired_signal(k)).collect();
    let eps = tol.values();
    let t_op = admm_quadratic(&lifts, m, l);
    let lambda_max = t_op.lambda_max();
    let mu = opts.mu;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut s = random_constant_modulus(nt, constraint, &mut rng);
    let mut y: Vec<DVector<C64>> = vec![DVector::zeros(l); n0];
    let mut gamma: Vec<DVector<C64>> = vec![DVector::zeros(l); n0];
    let mut v = DVector::<C64>::zeros(dim);
    let mut lambda = DVector::<C64>::zeros(dim);

    let residuals_of = |s: &DVector<C64>| -> Vec<f64> {
        lifts.iter().zip(&desired).map(|(g, d)| (g.adjoint_apply(s) - d).norm_squared()).collect()
    };
    let violation = |res: &[f64]| -> f64 { res.iter().zip(eps).map(|(r, e)| r / e).fold(0.0, f64::max) };

    let mut report = SolverReport::default();
    let mut sinr = m.quad(&s);
    // Worst residual-to-tolerance ratio of the most recent iterations.
    let mut window: VecDeque<f64> = VecDeque::with_capacity(opts.plateau + 1);

    for iter in 1..=opts.max_outer {
        // s-update: t = Σ G_k (y_k + d_k + γ_k) + M_r (v + λ).
        let mut t_vec = m_r.apply(&(&v + &lambda));
        for k in 0..n0 {
            t_vec += lifts[k].apply(&(&y[k] + &desired[k] + &gamma[k]));
        }
        let inner = mm_inner_solve(&t_op, lambda_max, &t_vec, &s, constraint, opts.inner_max, opts.inner_tol)?;
        report.monotonicity_violations += inner.violations;
        let dual_residual = mu * (&inner.s - &s).norm();
        s = inner.s;

        // y-update: projection onto the ε_k balls; γ-update reuses G_k† s − d_k.
        let mut primal_sq = 0.0;
        for k in 0..n0 {
            let emitted = lifts[k].adjoint_apply(&s) - &desired[k];
            let z = &emitted - &gamma[k];
            let zn = z.norm();
            y[k] = if zn > 0.0 { z.map(|c| c * (eps[k].sqrt() / zn).min(1.0)) } else { z };
            let gap = &y[k] - &emitted;
            primal_sq += gap.norm_squared();
            gamma[k] += gap;
        }

        // (v, t)-update and λ-update.
        let mrs = m_r.apply(&s);
        let zbar = &mrs - &lambda;
        v = zbar.map(|c| c * (mu / (mu - 2.0)));
        let gap = &v - &mrs;
        primal_sq += gap.norm_squared();
        lambda += gap;

        let new_sinr = m.quad(&s);
        let residuals = residuals_of(&s);
        let excess = violation(&residuals) - 1.0;
        report.trace.push(IterationRecord {
            iteration: iter,
            sinr: new_sinr,
            matching_residuals: residuals.clone(),
            primal_residual: primal_sq.sqrt(),
            dual_residual,
            inner_iterations: inner.iterations,
        });
        if opts.record_inner {
            report.inner_objectives.push(inner.objectives);
        }

        let sinr_change = (new_sinr - sinr).abs() / sinr.abs().max(f64::MIN_POSITIVE);
        sinr = new_sinr;
        let feasible = excess <= MATCHING_SLACK;
        report.iterations = iter;
        if sinr_change < opts.sinr_tol && feasible {
            report.converged = true;
            break;
        }
        window.push_back(excess + 1.0);
        if window.len() > opts.plateau {
            window.pop_front();
        }
        if window.len() == opts.plateau && plateaued(&window) {
            return Err(stalled(&residuals, eps, iter));
        }
    }

    let waveform = WaveformMatrix::from_vec(&s, nt, l);
    let residuals = residuals_of(&s);
    if violation(&residuals) > 1.0 + MATCHING_SLACK {
        return Err(stalled(&residuals, eps, report.iterations));
    }
    report.sinr = sinr;
    report.energy = waveform.energy();
    report.matching_residuals = residuals;
    report.elapsed = start_time.elapsed();
    Ok((waveform, report))
}

/// The violation ratio stayed above the slack and inside a 1% band.
fn plateaued(window: &VecDeque<f64>) -> bool {
    let (lo, hi) = window.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    lo > 1.0 + MATCHING_SLACK && hi - lo <= 1e-2 * lo
}

fn stalled(residuals: &[f64], eps: &[f64], iterations: usize) -> Error {
    let (direction, _) = residuals
        .iter()
        .zip(eps)
        .map(|(r, e)| r / e)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (k, ratio)| if ratio > best.1 { (k, ratio) } else { best });
    Error::MatchingInfeasible { direction, residual: residuals[direction], tolerance: eps[direction], iterations }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::{tx_steering, ArrayGeometry, DirectionSet};
    use crate::disturbance::{quadratic_form_matrix, Covariance, StructuredCovariance};
    use crate::energy_solver::minimum_energy;
    use crate::structured_solver::solve_structured;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<C64> {
        DVector::from_fn(n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn constant_modulus_projection() {
        let t = DVector::from_vec(vec![c(1.0, 1.0), c(-2.0, 0.0)]);
        let s = papr_project(&t, 2.0, 1.0).unwrap();
        assert!((s[0] - C64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);
        assert!((s[1] - c(-1.0, 0.0)).norm() < 1e-15);
        let zero = papr_project(&DVector::zeros(4), 4.0, 1.0).unwrap();
        assert!(zero.iter().all(|z| *z == c(1.0, 0.0)));
    }

    #[test]
    fn unconstrained_peak_gives_scaled_target() {
        let t = DVector::from_vec(vec![c(0.0, 0.0), c(0.0, 3.0), c(0.0, 0.0)]);
        let s = papr_project(&t, 5.0, 3.0).unwrap();
        assert!((s[1] - c(0.0, 5f64.sqrt())).norm() < 1e-12);
        assert!(s[0].norm() < 1e-12 && s[2].norm() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_vec(&mut rng, 6);
        let s = papr_project(&t, 2.0, 6.0).unwrap();
        assert!((s - t.map(|z| z * (2f64.sqrt() / t.norm()))).norm() < 1e-12);
    }

    #[test]
    fn projection_rejects_bad_arguments() {
        let t = DVector::from_element(4, c(1.0, 0.0));
        assert!(papr_project(&t, 0.0, 1.0).is_err());
        assert!(papr_project(&t, 1.0, 0.5).is_err());
        assert!(papr_project(&t, 1.0, 4.5).is_err());
        assert!(papr_project(&DVector::zeros(0), 1.0, 1.0).is_err());
    }

    #[test]
    fn projection_zero_entries_absorb_leftover_energy() {
        let t = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let s = papr_project(&t, 4.0, 2.0).unwrap();
        assert!((s.norm_squared() - 4.0).abs() < 1e-12);
        assert!((s[0].norm() - 2f64.sqrt()).abs() < 1e-12);
        for k in 1..4 {
            assert!(s[k].norm_sqr() <= 2.0 + 1e-12);
        }
    }

    /// Maximum of Re(t†s) for L = 2 by a grid over the energy split and the
    /// phase of the first entry; the second phase is aligned in closed form.
    fn grid_oracle(t: &DVector<C64>, energy: f64, rho: f64) -> f64 {
        let cap = rho * energy / 2.0;
        let n = 2000;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=n {
            let alpha = 0.5 * PI * i as f64 / n as f64;
            let (r1, r2) = (energy.sqrt() * alpha.cos(), energy.sqrt() * alpha.sin());
            if r1 * r1 > cap * (1.0 + 1e-12) || r2 * r2 > cap * (1.0 + 1e-12) {
                continue;
            }
            for j in 0..n {
                let phi = 2.0 * PI * j as f64 / n as f64;
                let value = (t[0].conj() * C64::from_polar(r1, phi)).re + t[1].norm() * r2;
                best = best.max(value);
            }
        }
        best
    }

    #[test]
    fn projection_matches_grid_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for rho in [1.0, 1.25, 1.5, 2.0] {
            for _ in 0..3 {
                let t = random_vec(&mut rng, 2);
                let s = papr_project(&t, 1.0, rho).unwrap();
                let value = t.dotc(&s).re;
                let oracle = grid_oracle(&t, 1.0, rho);
                assert!(value >= oracle - 1e-12);
                assert!((value - oracle).abs() <= 1e-3 * oracle.abs());
            }
        }
    }

    #[test]
    fn projection_beats_random_feasible_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for rho in [1.0, 1.5, 3.0] {
            let t = random_vec(&mut rng, 8);
            let s = papr_project(&t, 2.0, rho).unwrap();
            let value = t.dotc(&s).re;
            assert!((s.norm_squared() - 2.0).abs() < 1e-12);
            assert!(s.iter().all(|z| z.norm_sqr() <= rho * 2.0 / 8.0 * (1.0 + 1e-12)));
            for _ in 0..20_000 {
                let x = papr_project(&random_vec(&mut rng, 8), 2.0, rho).unwrap();
                assert!(t.dotc(&x).re <= value + 1e-12);
            }
        }
    }

    #[test]
    fn mm_is_exact_for_scaled_identity() {
        let constraint = PaprConstraint::new(1.0, 8.0, 2, 4).unwrap();
        let t_op = HermitianOp::kron(DMatrix::identity(2, 2).map(|z: C64| z * 3.0), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t_vec = random_vec(&mut rng, 8);
        let start = random_constant_modulus(2, &constraint, &mut rng);
        let inner = mm_inner_solve(&t_op, 3.0, &t_vec, &start, &constraint, 50, 1e-12).unwrap();
        let direct = project_antennas(&t_vec, 2, &constraint).unwrap();
        assert!((inner.s - direct).norm() < 1e-12);
        assert!(inner.iterations <= 2);
    }

    #[test]
    fn mm_is_monotone_and_near_random_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (nt, l) = (2, 4);
        let x = DMatrix::from_fn(8, 8, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        let t_op = HermitianOp::dense(&x * x.adjoint());
        let t_vec = random_vec(&mut rng, 8);
        let constraint = PaprConstraint::new(1.0, 8.0, nt, l).unwrap();
        let mut best_mm = f64::INFINITY;
        for _ in 0..20 {
            let start = random_constant_modulus(nt, &constraint, &mut rng);
            let inner = mm_inner_solve(&t_op, t_op.lambda_max(), &t_vec, &start, &constraint, 500, 1e-10).unwrap();
            assert_eq!(inner.violations, 0);
            assert!(inner.objectives.windows(2).all(|w| w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0)));
            best_mm = best_mm.min(*inner.objectives.last().unwrap());
        }
        let mut best_random = f64::INFINITY;
        for _ in 0..200_000 {
            let s = random_constant_modulus(nt, &constraint, &mut rng);
            best_random = best_random.min(mm_objective(&t_op, &t_vec, &s));
        }
        assert!(best_mm <= best_random + 1e-3 * best_random.abs());
    }

    /// Scaled-down version of the radar/communication/jamming setup: 12
    /// antennas, one 8PSK communication row and one noise-like jamming row.
    fn small_problem(eps: Vec<f64>, l: usize) -> (Scenario, HermitianOp, HermitianOp, MatchingTolerances, PaprConstraint) {
        use rand_distr::{Distribution, StandardNormal};
        let g = ArrayGeometry::half_wavelength(12, 12).unwrap();
        let e_t = 500.0 * l as f64 / 128.0;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut d = DMatrix::zeros(2, l);
        for j in 0..l {
            d[(0, j)] = C64::from_polar(1.0, PI / 4.0 * rng.random_range(0..8) as f64);
            let (re, im): (f64, f64) = (StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
            d[(1, j)] = c(re, im) / 2f64.sqrt();
        }
        let scn = Scenario::new(g, 0.0, DirectionSet::new(vec![-25.0, 20.0]).unwrap(), 1, d, e_t).unwrap();
        let m = quadratic_form_matrix(&Covariance::Structured(StructuredCovariance::white(1.0, l).unwrap()), &g, 0.0, l).unwrap();
        let m_r = m.sqrt().unwrap();
        let tol = MatchingTolerances::new(eps).unwrap();
        let constraint = PaprConstraint::new(1.0, e_t, 12, l).unwrap();
        (scn, m, m_r, tol, constraint)
    }

    #[test]
    fn admm_output_is_feasible_and_below_energy_optimum() {
        let (scn, m, m_r, tol, constraint) = small_problem(vec![1e-3, 0.2], 16);
        let opts = AdmmOptions { seed: 7, record_inner: true, ..Default::default() };
        let (s, report) = admm_solve(&scn, &m, &m_r, &tol, &constraint, &opts).unwrap();
        assert!(report.converged);
        let a_s = constraint.amplitude();
        assert!(s.matrix().iter().all(|z| (z.norm() - a_s).abs() <= 1e-12));
        let per_antenna = constraint.per_antenna_energy;
        for n in 0..12 {
            assert!((s.antenna_energy(n) - per_antenna).abs() <= 1e-10 * per_antenna);
            assert!(s.papr(n) <= 1.0 + 1e-9);
        }
        for (r, e) in report.matching_residuals.iter().zip(tol.values()) {
            assert!(*r <= e * (1.0 + MATCHING_SLACK));
        }
        assert!((report.sinr - m.quad(&s.to_vec())).abs() <= 1e-9 * report.sinr);
        assert_eq!(report.monotonicity_violations, 0);
        assert_eq!(report.inner_objectives.len(), report.iterations);
        let optimum = solve_structured(&scn, &StructuredCovariance::white(1.0, 16).unwrap()).unwrap();
        assert!(report.sinr <= optimum.total_sinr());
        assert!(report.sinr >= 0.9 * optimum.total_sinr());
    }

    #[test]
    fn admm_is_deterministic() {
        let (scn, m, m_r, tol, constraint) = small_problem(vec![1e-3, 0.2], 8);
        let opts = AdmmOptions { seed: 3, ..Default::default() };
        let run = || admm_solve(&scn, &m, &m_r, &tol, &constraint, &opts).unwrap();
        let (a, ra) = run();
        let (b, rb) = run();
        assert_eq!(a, b);
        assert_eq!(ra.trace, rb.trace);
    }

    #[test]
    fn admm_rejects_small_penalty_and_mismatched_tolerances() {
        let (scn, m, m_r, tol, constraint) = small_problem(vec![1e-3, 0.2], 8);
        let opts = AdmmOptions { mu: 2.0, ..Default::default() };
        assert!(matches!(admm_solve(&scn, &m, &m_r, &tol, &constraint, &opts), Err(Error::Domain(_))));
        let one = MatchingTolerances::new(vec![0.1]).unwrap();
        assert!(admm_solve(&scn, &m, &m_r, &one, &constraint, &AdmmOptions::default()).is_err());
        assert!(MatchingTolerances::new(vec![0.0]).is_err());
    }

    #[test]
    fn admm_reports_unreachable_tolerances() {
        // |a† s_l| ≤ N_T a_s, so a desired amplitude far above it cannot be matched.
        let g = ArrayGeometry::half_wavelength(4, 4).unwrap();
        let l = 4;
        let e_t = 4.0;
        let d = DMatrix::from_element(1, l, c(40.0, 0.0));
        let scn = Scenario::new(g, 0.0, DirectionSet::new(vec![30.0]).unwrap(), 1, d, e_t).unwrap();
        assert!(minimum_energy(&scn).unwrap() > e_t);
        let m = quadratic_form_matrix(&Covariance::Structured(StructuredCovariance::white(1.0, l).unwrap()), &g, 0.0, l).unwrap();
        let m_r = m.sqrt().unwrap();
        let tol = MatchingTolerances::new(vec![1e-3]).unwrap();
        let constraint = PaprConstraint::new(1.0, e_t, 4, l).unwrap();
        let opts = AdmmOptions { plateau: 50, ..Default::default() };
        match admm_solve(&scn, &m, &m_r, &tol, &constraint, &opts) {
            Err(Error::MatchingInfeasible { direction, residual, tolerance, .. }) => {
                assert_eq!(direction, 0);
                assert!(residual > tolerance);
            }
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    /// Largest transmit SINR over all waveforms of total energy e_t whose
    /// single emitted signal lies within √ε of d: with one constrained
    /// direction the optimum depends on the matched norm x = ‖d'‖ only, as
    /// (G x + √((e_t − x²/N_T) N_T (1 − G²)))², concave in x with its peak at
    /// x = G √(N_T e_t).
    fn relaxed_single_direction_bound(n_tx: usize, gain: f64, e_t: f64, d_norm: f64, eps: f64) -> f64 {
        let nt = n_tx as f64;
        let hi = (d_norm + eps.sqrt()).min((nt * e_t).sqrt());
        let lo = (d_norm - eps.sqrt()).max(0.0);
        let x = (gain * (nt * e_t).sqrt()).clamp(lo, hi);
        (gain * x + ((e_t - x * x / nt).max(0.0) * nt * (1.0 - gain * gain)).sqrt()).powi(2)
    }

    #[test]
    fn admm_tiny_instance_stays_below_exhaustive_optimum() {
        let g = ArrayGeometry::half_wavelength(3, 2).unwrap();
        let l = 4;
        let e_t = 3.0;
        let eps = 1e-6;
        let d = DMatrix::from_fn(1, l, |_, j| C64::from_polar(1.2, j as f64 * PI / 2.0 + 0.3));
        let theta_c = 40.0;
        let scn = Scenario::new(g, 0.0, DirectionSet::new(vec![theta_c]).unwrap(), 1, d.clone(), e_t).unwrap();
        let m = quadratic_form_matrix(&Covariance::Structured(StructuredCovariance::white(1.0, l).unwrap()), &g, 0.0, l).unwrap();
        let m_r = m.sqrt().unwrap();
        let tol = MatchingTolerances::new(vec![eps]).unwrap();
        let constraint = PaprConstraint::new(1.0, e_t, 3, l).unwrap();
        let opts = AdmmOptions { seed: 1, ..Default::default() };
        let (s, report) = admm_solve(&scn, &m, &m_r, &tol, &constraint, &opts).unwrap();
        assert!(report.matching_residuals[0] <= eps * (1.0 + MATCHING_SLACK));
        let a_t = tx_steering(&g, 0.0).unwrap();
        let admm = s.transmit_sinr(&a_t);
        // Exact-matching constant-modulus optimum, widened by the ε-ball slack.
        let oracle = exact_matching_optimum(&g, theta_c, 0.0, &d, constraint.amplitude(), 20_000);
        let gain = crate::array_model::normalized_gain(&g, theta_c, 0.0).unwrap();
        let relaxed = relaxed_single_direction_bound(3, gain, e_t, d.norm(), eps);
        let exact = relaxed_single_direction_bound(3, gain, e_t, d.norm(), 0.0);
        assert!(admm <= relaxed * (1.0 + 1e-12));
        assert!(oracle <= exact * (1.0 + 1e-12));
        assert!(admm <= oracle + 4.0 * (relaxed - exact) + 1e-9);
        // ADMM is a local method here: it settles in a feasible local optimum
        // below the exhaustive one rather than at it.
        assert!(admm >= 0.5 * oracle);
    }

    /// Best transmit SINR of constant-modulus codes for N_T = 3 with exact
    /// per-slot matching: for each slot, sweep the first (rotated) phase and
    /// solve the remaining two unit phasors in closed form.
    fn exact_matching_optimum(g: &ArrayGeometry, theta_c: f64, theta_t: f64, d: &DMatrix<C64>, a_s: f64, grid: usize) -> f64 {
        let psi = PI * theta_c.to_radians().sin();
        let chi = PI * theta_t.to_radians().sin();
        assert_eq!(g.n_tx, 3);
        let mut total = 0.0;
        for l in 0..d.ncols() {
            let r = d[(0, l)] / a_s;
            let mut best = f64::NEG_INFINITY;
            for i in 0..grid {
                let x0 = C64::from_polar(1.0, 2.0 * PI * i as f64 / grid as f64);
                let w = r - x0;
                if w.norm() > 2.0 {
                    continue;
                }
                let beta = (w.norm() / 2.0).acos();
                for sign in [1.0, -1.0] {
                    let x1 = C64::from_polar(1.0, w.arg() + sign * beta);
                    let x2 = C64::from_polar(1.0, w.arg() - sign * beta);
                    let gain = x0 + x1 * C64::from_polar(1.0, psi - chi) + x2 * C64::from_polar(1.0, 2.0 * (psi - chi));
                    best = best.max(a_s * a_s * gain.norm_sqr());
                }
            }
            total += best;
        }
        total
    }
}
