//! Turns a configuration into a scenario and runs the selected solver.

use mfrf_core::array_model::tx_steering;
use mfrf_core::disturbance::{quadratic_form_matrix, Covariance};
use mfrf_core::energy_solver::solve_general;
use mfrf_core::linalg::from_db;
use mfrf_core::papr_solver::{admm_solve, AdmmOptions, MatchingTolerances, PaprConstraint};
use mfrf_core::signals::{generate_desired, DesiredSignalSpec, SignalKind};
use mfrf_core::structured_solver::solve_structured;
use mfrf_core::{
    ArrayGeometry, DirectionSet, Jammer, Scenario, SolverReport, StructuredCovariance, WaveformMatrix,
};
use nalgebra::DMatrix;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{RunConfig, SignalConfig, SolverKind};
use crate::error::CliError;

/// Stream numbers for seeds derived from the base seed; desired signal `k`
/// uses stream `k`.
pub const ADMM_STREAM: u64 = 1 << 20;
pub const MONTE_CARLO_STREAM: u64 = (1 << 20) + 1;
pub const VICTIM_STREAM: u64 = (1 << 20) + 2;

/// Independent 64-bit seed for one purpose.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

pub fn signal_spec(signal: &SignalConfig, length: usize, seed: u64) -> DesiredSignalSpec {
    let kind = match *signal {
        SignalConfig::Psk { order, amplitude } => SignalKind::Psk { order, amplitude },
        SignalConfig::NoiseLike { variance } => SignalKind::NoiseLike { variance },
    };
    DesiredSignalSpec { kind, length, seed }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub scn: Scenario,
    pub model: StructuredCovariance,
}

pub fn build_problem(cfg: &RunConfig) -> Result<Problem, CliError> {
    let a = &cfg.array;
    let s = &cfg.scenario;
    let geom = ArrayGeometry::new(a.n_tx, a.n_rx, a.tx_spacing, a.rx_spacing)?;
    let dirs: Vec<_> = s.comm.iter().chain(&s.jam).collect();
    let mut desired = DMatrix::zeros(dirs.len(), s.code_len);
    for (k, d) in dirs.iter().enumerate() {
        let signal = generate_desired(&signal_spec(&d.signal, s.code_len, derive_seed(cfg.seed, k as u64)))?;
        desired.set_row(k, &signal.transpose());
    }
    let angles = DirectionSet::new(dirs.iter().map(|d| d.angle).collect())?;
    let scn = Scenario::new(geom, s.theta_t, angles, s.comm.len(), desired, s.e_t)?;
    let noise = cfg.disturbance.noise_power;
    let jammers = cfg
        .disturbance
        .jammers
        .iter()
        .map(|j| Jammer { angle: j.angle, power: noise * from_db(j.inr_db) })
        .collect();
    let model = StructuredCovariance::new(noise, jammers, s.code_len)?;
    Ok(Problem { scn, model })
}

#[derive(Debug, Clone)]
pub struct Design {
    pub solver: SolverKind,
    pub waveform: WaveformMatrix,
    /// `‖a†(θ_t) S‖²`.
    pub sinr_t: f64,
    /// `b†(θ_t) R̄⁻¹ b(θ_t)`.
    pub sinr_r: f64,
    /// Iteration data for the iterative solvers.
    pub report: Option<SolverReport>,
}

impl Design {
    pub fn total_sinr(&self) -> f64 {
        self.sinr_t * self.sinr_r
    }
}

pub fn admm_options(cfg: &RunConfig, record_inner: bool) -> AdmmOptions {
    AdmmOptions {
        mu: cfg.solver.mu,
        max_outer: cfg.solver.max_outer,
        record_inner,
        seed: derive_seed(cfg.seed, ADMM_STREAM),
        ..AdmmOptions::default()
    }
}

pub fn solve(cfg: &RunConfig, problem: &Problem) -> Result<Design, CliError> {
    solve_with(cfg, problem, false)
}

pub fn solve_with(cfg: &RunConfig, problem: &Problem, record_inner: bool) -> Result<Design, CliError> {
    let scn = &problem.scn;
    let a_t = tx_steering(&scn.geom, scn.theta_t)?;
    let sinr_r = mfrf_core::disturbance::receive_sinr(&problem.model, &scn.geom, scn.theta_t)?;
    let kind = cfg.solver.kind;
    let (waveform, report) = match kind {
        SolverKind::Structured => (solve_structured(scn, &problem.model)?.waveform, None),
        SolverKind::Energy | SolverKind::Papr => {
            let m = quadratic_form_matrix(
                &Covariance::Structured(problem.model.clone()),
                &scn.geom,
                scn.theta_t,
                scn.code_len(),
            )?;
            let (w, report) = if kind == SolverKind::Energy {
                solve_general(scn, &m)?
            } else {
                let m_r = m.sqrt()?;
                let tol = MatchingTolerances::new(cfg.solver.eps.clone())?;
                let constraint = PaprConstraint::new(cfg.solver.rho, scn.e_t, scn.geom.n_tx, scn.code_len())?;
                admm_solve(scn, &m, &m_r, &tol, &constraint, &admm_options(cfg, record_inner))?
            };
            (w, Some(report))
        }
    };
    let sinr_t = waveform.transmit_sinr(&a_t);
    Ok(Design { solver: kind, waveform, sinr_t, sinr_r, report })
}
