//! The five subcommands. Each returns the tables it produces plus a short
//! human-readable summary; nothing touches the filesystem here.

use mfrf_core::array_model::tx_steering;
use mfrf_core::linalg::{db, from_db};
use mfrf_core::signals::{
    detection_probability, generate_desired, jamming_power, normality_check, psk_constellation, ser_monte_carlo,
    JamSpec, SerExperiment, SerPoint,
};
use mfrf_core::structured_solver::approximate_sinr;
use mfrf_core::Error as CoreError;
use rayon::prelude::*;

use crate::config::{RunConfig, SignalConfig, SweepConfig, SweepVar};
use crate::error::CliError;
use crate::output::{raw, round2, Table};
use crate::problem::{build_problem, derive_seed, signal_spec, solve, Design, Problem, MONTE_CARLO_STREAM, VICTIM_STREAM};

pub struct CommandOutput {
    pub tables: Vec<Table>,
    pub summary: String,
}

/// Radar-only transmit SINR `N_T e_t`.
fn radar_only(cfg: &RunConfig) -> f64 {
    cfg.array.n_tx as f64 * cfg.scenario.e_t
}

fn tolerance(cfg: &RunConfig, k: usize) -> f64 {
    if cfg.solver.kind == crate::config::SolverKind::Papr {
        cfg.solver.eps[k]
    } else {
        0.0
    }
}

pub fn design(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let problem = build_problem(cfg)?;
    let d = solve(cfg, &problem)?;
    let scn = &problem.scn;
    let radar = radar_only(cfg);
    let (iterations, converged) = d.report.as_ref().map_or((0, true), |r| (r.iterations, r.converged));

    let mut results = Table::new(
        "results",
        &[
            "solver",
            "sinr_t_db",
            "total_sinr_db",
            "radar_only_db",
            "loss_db",
            "energy",
            "iterations",
            "converged",
            "sinr_t_db_raw",
            "total_sinr_db_raw",
        ],
    );
    results.push(vec![
        d.solver.name().to_string(),
        round2(db(d.sinr_t)),
        round2(db(d.total_sinr())),
        round2(db(radar)),
        round2(db(radar) - db(d.sinr_t)),
        raw(d.waveform.energy()),
        iterations.to_string(),
        converged.to_string(),
        raw(db(d.sinr_t)),
        raw(db(d.total_sinr())),
    ]);

    let residuals = scn.matching_residuals(&d.waveform)?;
    let mut directions = Table::new(
        "directions",
        &[
            "index",
            "role",
            "angle_deg",
            "desired_energy",
            "emitted_energy",
            "matching_residual",
            "tolerance",
            "power_lower",
            "power_upper",
        ],
    );
    let mut emitted = Table::new("emitted", &["index", "slot", "desired_re", "desired_im", "emitted_re", "emitted_im"]);
    let mut normality = Table::new(
        "normality",
        &["index", "part", "skewness", "excess_kurtosis", "qq_deviation", "qq_threshold", "passed"],
    );
    let mut qq = Table::new("qq", &["index", "part", "theoretical", "sample"]);
    for (k, &angle) in scn.dirs.angles().iter().enumerate() {
        let desired = scn.desired_signal(k);
        let y = d.waveform.emitted(&tx_steering(&scn.geom, angle)?);
        let is_jam = k >= scn.n_comm;
        let (lower, upper) = if is_jam {
            let jp = jamming_power(scn, &d.waveform, k - scn.n_comm, tolerance(cfg, k))?;
            (raw(jp.lower), raw(jp.upper))
        } else {
            (String::new(), String::new())
        };
        directions.push(vec![
            k.to_string(),
            if is_jam { "jam" } else { "comm" }.to_string(),
            raw(angle),
            raw(desired.norm_squared()),
            raw(y.norm_squared()),
            raw(residuals[k]),
            raw(tolerance(cfg, k)),
            lower,
            upper,
        ]);
        for (l, (dz, yz)) in desired.iter().zip(y.iter()).enumerate() {
            emitted.push(vec![k.to_string(), l.to_string(), raw(dz.re), raw(dz.im), raw(yz.re), raw(yz.im)]);
        }
        if is_jam && y.len() >= 32 {
            let report = normality_check(&y)?;
            for (part, p) in [("re", &report.real), ("im", &report.imag)] {
                normality.push(vec![
                    k.to_string(),
                    part.to_string(),
                    raw(p.skewness),
                    raw(p.excess_kurtosis),
                    raw(p.qq_deviation),
                    raw(report.qq_threshold),
                    p.passed.to_string(),
                ]);
                for &(t, s) in &p.qq_pairs {
                    qq.push(vec![k.to_string(), part.to_string(), raw(t), raw(s)]);
                }
            }
        }
    }

    let mut waveform = Table::new("waveform", &["antenna", "slot", "re", "im"]);
    let m = d.waveform.matrix();
    for n in 0..m.nrows() {
        for l in 0..m.ncols() {
            waveform.push(vec![n.to_string(), l.to_string(), raw(m[(n, l)].re), raw(m[(n, l)].im)]);
        }
    }

    let mut tables = vec![results, directions, emitted, waveform];
    if !normality.rows.is_empty() {
        tables.push(normality);
        tables.push(qq);
    }
    if let Some(report) = d.report.as_ref().filter(|r| !r.trace.is_empty()) {
        let mut header: Vec<String> =
            ["iteration", "sinr_db", "primal_residual", "dual_residual", "inner_iterations"].map(String::from).into();
        header.extend((0..scn.n_constrained()).map(|k| format!("residual_{k}")));
        let mut trace = Table::with_header("trace", header);
        for rec in &report.trace {
            let mut row = vec![
                rec.iteration.to_string(),
                raw(db(rec.sinr)),
                raw(rec.primal_residual),
                raw(rec.dual_residual),
                rec.inner_iterations.to_string(),
            ];
            row.extend(rec.matching_residuals.iter().map(|&r| raw(r)));
            trace.push(row);
        }
        tables.push(trace);
    }

    let summary = format!(
        "{} solver: SINR_T = {:.2} dB, total SINR = {:.2} dB, loss vs radar-only = {:.3} dB",
        d.solver.name(),
        db(d.sinr_t),
        db(d.total_sinr()),
        db(radar) - db(d.sinr_t)
    );
    Ok(CommandOutput { tables, summary })
}

fn status(err: &CliError) -> &'static str {
    match err {
        CliError::Solver(CoreError::InfeasibleEnergy { .. }) | CliError::Solver(CoreError::MatchingInfeasible { .. }) => {
            "infeasible"
        }
        CliError::Solver(CoreError::IllConditioned { .. }) => "ill_conditioned",
        CliError::Solver(CoreError::Numerical(_)) | CliError::Solver(CoreError::DegenerateSecular) => "numerical",
        _ => "invalid",
    }
}

/// Configuration for one sweep point.
pub fn apply_sweep_value(cfg: &RunConfig, sweep: &SweepConfig, value: f64) -> RunConfig {
    let mut c = cfg.clone();
    match sweep.var {
        SweepVar::ThetaT => c.scenario.theta_t = value,
        SweepVar::ThetaC => {
            c.scenario.comm[0].angle = value;
            if let Some(offset) = sweep.jam_offset {
                c.scenario.jam[0].angle = value + offset;
            }
        }
        SweepVar::ThetaJam => c.scenario.jam[0].angle = value,
        SweepVar::ET => c.scenario.e_t = value,
        SweepVar::NoisePower => c.disturbance.noise_power = value,
    }
    c
}

struct SweepPoint {
    design: Design,
    approx: f64,
    approx_valid: bool,
}

fn sweep_point(cfg: &RunConfig) -> Result<SweepPoint, CliError> {
    let problem: Problem = build_problem(cfg)?;
    let design = solve(cfg, &problem)?;
    let approx = approximate_sinr(&problem.scn)?;
    Ok(SweepPoint { design, approx: approx.value, approx_valid: approx.valid })
}

pub fn sweep(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let sw = cfg.sweep.clone().ok_or_else(|| CliError::Config(vec!["sweep: no sweep specified".into()]))?;
    let grid = sw.grid();
    if grid.is_empty() {
        return Err(CliError::Config(vec!["sweep: grid is empty".into()]));
    }
    let points: Vec<(RunConfig, Result<SweepPoint, CliError>)> = grid
        .par_iter()
        .map(|&v| {
            let c = apply_sweep_value(cfg, &sw, v);
            let r = sweep_point(&c);
            (c, r)
        })
        .collect();

    let mut table = Table::new(
        "sweep",
        &[
            sw.var.name(),
            "status",
            "sinr_t_db",
            "approx_db",
            "total_sinr_db",
            "radar_only_db",
            "approx_valid",
            "sinr_t_db_raw",
            "approx_db_raw",
            "total_sinr_db_raw",
        ],
    );
    let mut best: Option<(f64, f64)> = None;
    let mut worst: Option<(f64, f64)> = None;
    let mut failed = 0;
    for (&v, (c, r)) in grid.iter().zip(&points) {
        match r {
            Ok(p) => {
                let s = db(p.design.sinr_t);
                table.push(vec![
                    raw(v),
                    "ok".into(),
                    round2(s),
                    round2(db(p.approx)),
                    round2(db(p.design.total_sinr())),
                    round2(db(radar_only(c))),
                    p.approx_valid.to_string(),
                    raw(s),
                    raw(db(p.approx)),
                    raw(db(p.design.total_sinr())),
                ]);
                if best.is_none_or(|(_, b)| s > b) {
                    best = Some((v, s));
                }
                if worst.is_none_or(|(_, w)| s < w) {
                    worst = Some((v, s));
                }
            }
            Err(e) => {
                failed += 1;
                let mut row = vec![raw(v), status(e).to_string()];
                row.extend(std::iter::repeat_n(String::new(), 8));
                table.push(row);
            }
        }
    }
    let summary = match (best, worst) {
        (Some((bv, b)), Some((wv, w))) => format!(
            "{} points ({failed} failed): max SINR_T {b:.2} dB at {} = {bv}, min {w:.2} dB at {wv}",
            grid.len(),
            sw.var.name()
        ),
        _ => format!("{} points, all failed", grid.len()),
    };
    Ok(CommandOutput { tables: vec![table], summary })
}

fn ser_rows(table: &mut Table, curve: &str, points: &[SerPoint]) {
    for p in points {
        table.push(vec![
            curve.to_string(),
            raw(p.snr_db),
            raw(p.ser),
            p.errors.to_string(),
            p.symbols.to_string(),
            raw(p.std_error()),
        ]);
    }
}

pub fn ser(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let problem = build_problem(cfg)?;
    let scn = &problem.scn;
    let (order, amplitude) = match cfg.scenario.comm.first().map(|c| c.signal) {
        Some(SignalConfig::Psk { order, amplitude }) => (order, amplitude),
        _ => return Err(CliError::Config(vec!["scenario.comm[0].signal: SER needs a PSK communication signal".into()])),
    };
    let d = solve(cfg, &problem)?;
    let mc = &cfg.monte_carlo;
    let seed = derive_seed(cfg.seed, MONTE_CARLO_STREAM);
    let constellation = psk_constellation(order, amplitude);
    let experiment = |tx, jam| SerExperiment {
        tx_signal: tx,
        constellation: constellation.clone(),
        snr_db: mc.snr_db.clone(),
        trials: mc.trials,
        seed,
        jam,
    };

    let mut table = Table::new("ser", &["curve", "snr_db", "ser", "errors", "symbols", "std_error"]);
    let comm_angle = scn.dirs.angles()[0];
    let desired = ser_monte_carlo(&experiment(scn.desired_signal(0), None))?;
    let synthesized = ser_monte_carlo(&experiment(d.waveform.emitted(&tx_steering(&scn.geom, comm_angle)?), None))?;
    ser_rows(&mut table, "comm_desired", &desired);
    ser_rows(&mut table, "comm_synthesized", &synthesized);
    let mut summary = format!(
        "comm SER at {} dB: desired {:.3e}, synthesized {:.3e}",
        mc.snr_db[mc.snr_db.len() / 2],
        desired[mc.snr_db.len() / 2].ser,
        synthesized[mc.snr_db.len() / 2].ser
    );

    if scn.n_jam() > 0 {
        let k = scn.n_comm;
        let victim = generate_desired(&signal_spec(
            &cfg.scenario.comm[0].signal,
            scn.code_len(),
            derive_seed(cfg.seed, VICTIM_STREAM),
        ))?;
        let jam_desired = scn.desired_signal(k);
        let jam_synth = d.waveform.emitted(&tx_steering(&scn.geom, scn.dirs.angles()[k])?);
        let clean = ser_monte_carlo(&experiment(victim.clone(), None))?;
        let with_desired = ser_monte_carlo(&experiment(
            victim.clone(),
            Some(JamSpec { signal: jam_desired, jnr_db: mc.jnr_db }),
        ))?;
        let with_synth =
            ser_monte_carlo(&experiment(victim, Some(JamSpec { signal: jam_synth, jnr_db: mc.jnr_db })))?;
        ser_rows(&mut table, "victim_no_jam", &clean);
        ser_rows(&mut table, "victim_desired_jam", &with_desired);
        ser_rows(&mut table, "victim_synthesized_jam", &with_synth);
        let mid = mc.snr_db.len() / 2;
        summary.push_str(&format!(
            "; victim SER: no jam {:.3e}, desired jam {:.3e}, synthesized jam {:.3e}",
            clean[mid].ser, with_desired[mid].ser, with_synth[mid].ser
        ));
    }
    Ok(CommandOutput { tables: vec![table], summary })
}

pub fn detect(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let problem = build_problem(cfg)?;
    let d = solve(cfg, &problem)?;
    let grid = cfg.detect.sinr_grid();
    let mut curves = Table::new("detect", &["p_fa", "sinr_db", "pd"]);
    let mut point = Table::new("detect_design", &["p_fa", "total_sinr_db", "pd"]);
    for &p_fa in &cfg.detect.p_fa {
        for &s in &grid {
            curves.push(vec![raw(p_fa), raw(s), raw(detection_probability(p_fa, from_db(s))?)]);
        }
        point.push(vec![raw(p_fa), raw(db(d.total_sinr())), raw(detection_probability(p_fa, d.total_sinr())?)]);
    }
    let summary = format!("design total SINR {:.2} dB", db(d.total_sinr()));
    Ok(CommandOutput { tables: vec![curves, point], summary })
}

pub fn compare(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let energies = cfg
        .compare
        .as_ref()
        .map(|c| c.e_t.clone())
        .filter(|e| !e.is_empty())
        .ok_or_else(|| CliError::Config(vec!["compare.e_t: energy grid is empty".into()]))?;
    let results: Vec<Result<Design, CliError>> = energies
        .par_iter()
        .map(|&e| {
            let mut c = cfg.clone();
            c.scenario.e_t = e;
            build_problem(&c).and_then(|p| solve(&c, &p))
        })
        .collect();

    let mut table = Table::new(
        "compare",
        &["e_t", "status", "mfrf_sinr_db", "radar_only_db", "loss_db", "mfrf_sinr_db_raw", "loss_db_raw"],
    );
    let mut ok = 0;
    for (&e, r) in energies.iter().zip(&results) {
        let radar = db(cfg.array.n_tx as f64 * e);
        match r {
            Ok(d) => {
                ok += 1;
                let s = db(d.sinr_t);
                table.push(vec![
                    raw(e),
                    "ok".into(),
                    round2(s),
                    round2(radar),
                    round2(radar - s),
                    raw(s),
                    raw(radar - s),
                ]);
            }
            Err(err) => table.push(vec![
                raw(e),
                status(err).into(),
                String::new(),
                round2(radar),
                String::new(),
                String::new(),
                String::new(),
            ]),
        }
    }
    let summary = format!("{} energies, {ok} feasible", energies.len());
    Ok(CommandOutput { tables: vec![table], summary })
}
