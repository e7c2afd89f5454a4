//! Desired-signal generation and the receiver-side metrics: detection
//! probability, communication SINR and sum rate, jamming power, Monte Carlo
//! symbol error rate and a normality check for noise-like signals.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::{erfc, erfc_inv};

use crate::array_model::tx_steering;
use crate::error::{Error, Result};
use crate::linalg::{from_db, C64};
use crate::scenario::Scenario;
use crate::waveform::WaveformMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SignalKind {
    /// `order`-ary PSK with symbols on a circle of radius `amplitude`.
    Psk { order: usize, amplitude: f64 },
    /// i.i.d. circular complex Gaussian entries with the given variance.
    NoiseLike { variance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesiredSignalSpec {
    pub kind: SignalKind,
    pub length: usize,
    pub seed: u64,
}

impl DesiredSignalSpec {
    pub fn psk(order: usize, amplitude: f64, length: usize, seed: u64) -> Self {
        Self { kind: SignalKind::Psk { order, amplitude }, length, seed }
    }

    pub fn noise_like(variance: f64, length: usize, seed: u64) -> Self {
        Self { kind: SignalKind::NoiseLike { variance }, length, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length == 0 {
            return Err(Error::Domain("signal length must be positive".into()));
        }
        match self.kind {
            SignalKind::Psk { order, amplitude } => {
                if order < 2 {
                    return Err(Error::Domain(format!("PSK order must be at least 2, got {order}")));
                }
                if !(amplitude >= 0.0 && amplitude.is_finite()) {
                    return Err(Error::Domain(format!("PSK amplitude must be non-negative, got {amplitude}")));
                }
            }
            SignalKind::NoiseLike { variance } => {
                if !(variance >= 0.0 && variance.is_finite()) {
                    return Err(Error::Domain(format!("variance must be non-negative, got {variance}")));
                }
            }
        }
        Ok(())
    }
}

/// Points `amplitude · e^{i2πk/order}`, `k = 0..order`.
pub fn psk_constellation(order: usize, amplitude: f64) -> Vec<C64> {
    (0..order)
        .map(|k| C64::from_polar(amplitude, 2.0 * PI * k as f64 / order as f64))
        .collect()
}

/// Circular complex Gaussian sample with `E|z|² = variance`.
fn complex_gaussian<R: Rng>(rng: &mut R, variance: f64) -> C64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(scale * re, scale * im)
}

pub fn generate_desired(spec: &DesiredSignalSpec) -> Result<DVector<C64>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok(match spec.kind {
        SignalKind::Psk { order, amplitude } => {
            let points = psk_constellation(order, amplitude);
            DVector::from_fn(spec.length, |_, _| points[rng.random_range(0..order)])
        }
        SignalKind::NoiseLike { variance } => {
            DVector::from_fn(spec.length, |_, _| complex_gaussian(&mut rng, variance))
        }
    })
}

/// `P_D = ½ erfc(erfc⁻¹(2 P_FA) − √SINR)` for the Neyman-Pearson detector
/// with known target amplitude. `sinr` is linear.
pub fn detection_probability(p_fa: f64, sinr: f64) -> Result<f64> {
    if !(p_fa > 0.0 && p_fa < 1.0) {
        return Err(Error::Domain(format!("false-alarm probability must lie in (0, 1), got {p_fa}")));
    }
    if !(sinr >= 0.0 && sinr.is_finite()) {
        return Err(Error::Domain(format!("SINR must be non-negative, got {sinr}")));
    }
    Ok(0.5 * erfc(erfc_inverse(2.0 * p_fa) - sinr.sqrt()))
}

/// `erfc⁻¹(y)` for `y ∈ (0, 2)`, polished with Newton steps on `erfc` (the
/// library inverse alone is accurate to about 1e−10).
fn erfc_inverse(y: f64) -> f64 {
    let mut x = erfc_inv(y);
    for _ in 0..3 {
        let slope = -2.0 / PI.sqrt() * (-x * x).exp();
        if slope == 0.0 {
            break;
        }
        let step = (erfc(x) - y) / slope;
        x -= step;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// SINR `χ_n` of communication receiver `n`: mean desired power over the mean
/// per-slot matching error plus noise. Equals `CSNR = E|d|²/σ_n²` when the
/// emitted signal matches exactly.
pub fn comm_sinr(scn: &Scenario, s: &WaveformMatrix, n: usize, noise_power: f64) -> Result<f64> {
    if n >= scn.n_comm {
        return Err(Error::Domain(format!("receiver {n} out of {} communication directions", scn.n_comm)));
    }
    if !(noise_power > 0.0 && noise_power.is_finite()) {
        return Err(Error::Domain(format!("noise power must be positive, got {noise_power}")));
    }
    let l = scn.code_len() as f64;
    let d = scn.desired_signal(n);
    let emitted = s.emitted(&tx_steering(&scn.geom, scn.dirs.angles()[n])?);
    let signal = d.norm_squared() / l;
    let interference = (emitted - d).norm_squared() / l;
    Ok(signal / (interference + noise_power))
}

/// Achievable sum rate `Σ log₂(1 + χ_n)` in bit/s/Hz; one noise power per receiver.
pub fn sum_rate(scn: &Scenario, s: &WaveformMatrix, noise_powers: &[f64]) -> Result<f64> {
    if noise_powers.len() != scn.n_comm {
        return Err(Error::Domain(format!(
            "{} noise powers for {} communication receivers",
            noise_powers.len(),
            scn.n_comm
        )));
    }
    let mut rate = 0.0;
    for (n, &p) in noise_powers.iter().enumerate() {
        rate += (1.0 + comm_sinr(scn, s, n, p)?).log2();
    }
    Ok(rate)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JammingPower {
    /// `‖Sᵀ a*(θ)‖²`.
    pub power: f64,
    /// `(‖d‖ − √ε)²`, or 0 when `√ε ≥ ‖d‖`.
    pub lower: f64,
    /// `(‖d‖ + √ε)²`.
    pub upper: f64,
    /// The tolerance is not small next to the desired energy (`ε ≥ ‖d‖²`), so
    /// the lower bound carries no information.
    pub degenerate: bool,
}

/// Emitted power toward jamming direction `m` (0-based among the jamming
/// directions) with the bounds implied by a matching tolerance `eps`.
pub fn jamming_power(scn: &Scenario, s: &WaveformMatrix, m: usize, eps: f64) -> Result<JammingPower> {
    if m >= scn.n_jam() {
        return Err(Error::Domain(format!("jamming direction {m} out of {}", scn.n_jam())));
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::Domain(format!("matching tolerance must be non-negative, got {eps}")));
    }
    let k = scn.n_comm + m;
    let power = s.transmit_sinr(&tx_steering(&scn.geom, scn.dirs.angles()[k])?);
    let d_norm = scn.desired_signal(k).norm();
    let root = eps.sqrt();
    let degenerate = root >= d_norm;
    let lower = if degenerate { 0.0 } else { (d_norm - root).powi(2) };
    Ok(JammingPower { power, lower, upper: (d_norm + root).powi(2), degenerate })
}

/// Additive interference for the victim in a SER experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct JamSpec {
    /// Jamming waveform, aligned slot by slot with the transmitted signal.
    pub signal: DVector<C64>,
    /// Jam power over noise power at the victim, in dB.
    pub jnr_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SerExperiment {
    pub tx_signal: DVector<C64>,
    pub constellation: Vec<C64>,
    pub snr_db: Vec<f64>,
    /// Independent noise realizations per SNR point; each covers the whole block.
    pub trials: usize,
    pub seed: u64,
    pub jam: Option<JamSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SerPoint {
    pub snr_db: f64,
    pub ser: f64,
    pub errors: u64,
    pub symbols: u64,
}

impl SerPoint {
    /// Binomial standard error `√(p(1−p)/n)`.
    pub fn std_error(&self) -> f64 {
        (self.ser * (1.0 - self.ser) / self.symbols as f64).sqrt()
    }
}

fn nearest(points: &[C64], z: C64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let d = (z - p).norm_sqr();
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

/// Monte Carlo SER with minimum-distance detection.
///
/// SNR is the mean constellation energy over the noise power. The reference
/// symbol of each slot is the constellation point nearest to the noiseless
/// transmitted sample. Trial `t` at SNR index `i` draws from its own ChaCha
/// stream, so results are independent of thread scheduling and of the number
/// of trials at other points.
pub fn ser_monte_carlo(exp: &SerExperiment) -> Result<Vec<SerPoint>> {
    if exp.tx_signal.is_empty() {
        return Err(Error::Domain("transmitted signal is empty".into()));
    }
    if exp.constellation.len() < 2 {
        return Err(Error::Domain("constellation must have at least two points".into()));
    }
    if exp.trials == 0 {
        return Err(Error::Domain("at least one trial is required".into()));
    }
    if exp.snr_db.iter().any(|s| !s.is_finite()) {
        return Err(Error::Domain("SNR grid must be finite".into()));
    }
    let l = exp.tx_signal.len();
    let jam_power = match &exp.jam {
        Some(j) => {
            if j.signal.len() != l {
                return Err(Error::Domain(format!("jam signal has {} samples, expected {l}", j.signal.len())));
            }
            let p = j.signal.norm_squared() / l as f64;
            if !(p > 0.0) || !j.jnr_db.is_finite() {
                return Err(Error::Domain("jam signal must have positive power and finite JNR".into()));
            }
            p
        }
        None => 0.0,
    };
    let symbol_energy =
        exp.constellation.iter().map(|p| p.norm_sqr()).sum::<f64>() / exp.constellation.len() as f64;
    let reference: Vec<usize> = exp.tx_signal.iter().map(|&z| nearest(&exp.constellation, z)).collect();

    let points = exp
        .snr_db
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| {
            let noise_power = symbol_energy / from_db(snr_db);
            let jam = exp.jam.as_ref().map(|j| {
                let gain = (from_db(j.jnr_db) * noise_power / jam_power).sqrt();
                j.signal.map(|z| z * gain)
            });
            let errors: u64 = (0..exp.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = ChaCha8Rng::seed_from_u64(exp.seed);
                    rng.set_stream(((i as u64) << 32) | t as u64);
                    let mut errs = 0u64;
                    for (slot, &z) in exp.tx_signal.iter().enumerate() {
                        let mut y = z + complex_gaussian(&mut rng, noise_power);
                        if let Some(j) = &jam {
                            y += j[slot];
                        }
                        if nearest(&exp.constellation, y) != reference[slot] {
                            errs += 1;
                        }
                    }
                    errs
                })
                .sum();
            let symbols = (exp.trials * l) as u64;
            SerPoint { snr_db, ser: errors as f64 / symbols as f64, errors, symbols }
        })
        .collect();
    Ok(points)
}

/// Exact M-PSK symbol error rate in AWGN at symbol SNR `snr` (linear):
/// `P_s = (1/π) ∫_0^{(M−1)π/M} exp(−snr·sin²(π/M)/sin²φ) dφ`.
pub fn analytic_mpsk_ser(order: usize, snr: f64) -> Result<f64> {
    if order < 2 {
        return Err(Error::Domain(format!("PSK order must be at least 2, got {order}")));
    }
    if !(snr >= 0.0 && snr.is_finite()) {
        return Err(Error::Domain(format!("SNR must be non-negative, got {snr}")));
    }
    if order == 2 {
        return Ok(0.5 * erfc(snr.sqrt()));
    }
    let g = (PI / order as f64).sin().powi(2) * snr;
    let upper = (order as f64 - 1.0) * PI / order as f64;
    // Composite Simpson; the integrand is smooth and vanishes at φ = 0.
    let n = 2000;
    let h = upper / n as f64;
    let f = |phi: f64| {
        let s = phi.sin();
        if s == 0.0 {
            0.0
        } else {
            (-g / (s * s)).exp()
        }
    };
    let mut acc = f(0.0) + f(upper);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(k as f64 * h);
    }
    Ok(acc * h / 3.0 / PI)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartNormality {
    pub mean: f64,
    pub std_dev: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    /// Largest gap between the empirical plotting positions `(i − ½)/n` and
    /// `Φ` of the standardized order statistics.
    pub qq_deviation: f64,
    /// `(theoretical quantile, standardized sample quantile)` pairs.
    pub qq_pairs: Vec<(f64, f64)>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalityReport {
    pub real: PartNormality,
    pub imag: PartNormality,
    /// Q-Q deviation threshold `4/√L`.
    pub qq_threshold: f64,
}

impl NormalityReport {
    pub fn passed(&self) -> bool {
        self.real.passed && self.imag.passed
    }
}

fn part_normality(x: &[f64], qq_threshold: f64) -> PartNormality {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let m2 = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let m4 = x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n;
    let std_dev = m2.sqrt();
    let (skewness, excess_kurtosis) =
        if m2 > 0.0 { (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0) } else { (0.0, f64::INFINITY) };

    let normal = Normal::standard();
    let mut z: Vec<f64> = x.iter().map(|v| if std_dev > 0.0 { (v - mean) / std_dev } else { 0.0 }).collect();
    z.sort_by(f64::total_cmp);
    let mut qq_deviation: f64 = 0.0;
    let qq_pairs = z
        .iter()
        .enumerate()
        .map(|(i, &zi)| {
            let p = (i as f64 + 0.5) / n;
            qq_deviation = qq_deviation.max((normal.cdf(zi) - p).abs());
            (normal.inverse_cdf(p), zi)
        })
        .collect();
    let passed = excess_kurtosis.abs() < 1.0 && qq_deviation < qq_threshold;
    PartNormality { mean, std_dev, skewness, excess_kurtosis, qq_deviation, qq_pairs, passed }
}

/// Checks real and imaginary parts separately against a normal distribution.
/// A part passes when `|excess kurtosis| < 1` and the Q-Q deviation is below
/// `4/√L`.
pub fn normality_check(signal: &DVector<C64>) -> Result<NormalityReport> {
    if signal.len() < 32 {
        return Err(Error::Domain(format!("normality check needs at least 32 samples, got {}", signal.len())));
    }
    let qq_threshold = 4.0 / (signal.len() as f64).sqrt();
    let re: Vec<f64> = signal.iter().map(|z| z.re).collect();
    let im: Vec<f64> = signal.iter().map(|z| z.im).collect();
    Ok(NormalityReport {
        real: part_normality(&re, qq_threshold),
        imag: part_normality(&im, qq_threshold),
        qq_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::{ArrayGeometry, DirectionSet};
    use crate::disturbance::StructuredCovariance;
    use crate::linalg::db;
    use crate::structured_solver::solve_structured;
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    #[test]
    fn psk_symbols_lie_on_the_circle() {
        let d = generate_desired(&DesiredSignalSpec::psk(8, 1.0, 128, 3)).unwrap();
        assert!((d.norm_squared() - 128.0).abs() < 1e-10);
        let d2 = generate_desired(&DesiredSignalSpec::psk(8, 2.5, 64, 3)).unwrap();
        assert!(d2.iter().all(|z| (z.norm() - 2.5).abs() < 1e-12));
    }

    #[test]
    fn bpsk_is_reproducible_and_real() {
        let spec = DesiredSignalSpec::psk(2, 1.0, 50, 11);
        let a = generate_desired(&spec).unwrap();
        let b = generate_desired(&spec).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|z| (z.re.abs() - 1.0).abs() < 1e-12 && z.im.abs() < 1e-12));
        assert!(a.iter().any(|z| z.re > 0.0) && a.iter().any(|z| z.re < 0.0));
    }

    #[test]
    fn noise_like_energy_moments() {
        // ‖d‖² for L unit-variance CN entries has mean L and standard deviation √L.
        let l = 128;
        let mut outside = 0;
        let mut total = 0.0;
        let seeds = 200;
        for seed in 0..seeds {
            let e = generate_desired(&DesiredSignalSpec::noise_like(1.0, l, seed)).unwrap().norm_squared();
            if (e - l as f64).abs() > 3.0 * (l as f64).sqrt() {
                outside += 1;
            }
            total += e;
        }
        assert!(outside <= 5, "{outside} of {seeds} outside 3σ");
        let mean = total / seeds as f64;
        assert!((mean - l as f64).abs() < 3.0 * (l as f64 / seeds as f64).sqrt());
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(generate_desired(&DesiredSignalSpec::psk(1, 1.0, 8, 0)).is_err());
        assert!(generate_desired(&DesiredSignalSpec::noise_like(-1.0, 8, 0)).is_err());
        assert!(generate_desired(&DesiredSignalSpec::noise_like(1.0, 0, 0)).is_err());
    }

    #[test]
    fn detection_at_zero_sinr_is_false_alarm() {
        for p in [1e-6, 1e-3, 0.01, 0.2, 0.5, 0.9] {
            let pd = detection_probability(p, 0.0).unwrap();
            assert!((pd - p).abs() < 1e-12, "{p}: {pd}");
        }
    }

    #[test]
    fn detection_limits_and_domain() {
        assert!(detection_probability(0.5, 1e4).unwrap() > 1.0 - 1e-12);
        assert!(detection_probability(0.0, 1.0).is_err());
        assert!(detection_probability(1.0, 1.0).is_err());
        assert!(detection_probability(0.1, -1.0).is_err());
    }

    /// Known-amplitude NP detector on `y = x + n`, `n ~ CN(0, I)`, with the
    /// statistic `Re(x† y)` and the threshold that gives `P_FA` under H0.
    fn simulate_np_detector(p_fa: f64, sinr: f64, trials: usize, seed: u64) -> f64 {
        let x = [C64::new((sinr / 2.0).sqrt(), 0.0), C64::new(0.0, (sinr / 2.0).sqrt())];
        let threshold = (sinr / 2.0).sqrt() * Normal::standard().inverse_cdf(1.0 - p_fa);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0;
        for _ in 0..trials {
            let stat: f64 = x.iter().map(|xi| (xi.conj() * (xi + complex_gaussian(&mut rng, 1.0))).re).sum();
            if stat > threshold {
                hits += 1;
            }
        }
        hits as f64 / trials as f64
    }

    #[test]
    fn detection_matches_np_detector_simulation() {
        let trials = 200_000;
        for (p_fa, sinr_db) in [(1e-2, 10.0), (1e-3, 5.0)] {
            let pd = detection_probability(p_fa, from_db(sinr_db)).unwrap();
            let mc = simulate_np_detector(p_fa, from_db(sinr_db), trials, 5);
            let se = (pd * (1.0 - pd) / trials as f64).sqrt();
            assert!((mc - pd).abs() < 3.0 * se, "P_FA {p_fa}, {sinr_db} dB: {mc} vs {pd}");
        }
    }

    #[test]
    fn detection_increasing_on_dense_grid() {
        for p_fa in [1e-6, 1e-3, 1e-2, 0.1, 0.5] {
            let mut prev = detection_probability(p_fa, 0.0).unwrap();
            for k in 1..=20_000 {
                let pd = detection_probability(p_fa, k as f64 * 2e-3).unwrap();
                assert!(pd >= prev);
                if 1.0 - prev > 1e-10 {
                    assert!(pd > prev, "P_FA {p_fa}, SINR {}", k as f64 * 2e-3);
                }
                prev = pd;
            }
        }
    }

    proptest! {
        #[test]
        fn detection_increasing_in_sinr(p_fa in 1e-6f64..0.5, s in 0.0f64..100.0, ds in 1e-3f64..10.0) {
            let a = detection_probability(p_fa, s).unwrap();
            let b = detection_probability(p_fa, s + ds).unwrap();
            // Near P_D = 1 the increment falls below double-precision resolution.
            prop_assert!(b >= a);
            if 1.0 - a > 1e-10 {
                prop_assert!(b > a);
            }
        }
    }

    fn two_direction_scenario(e_t: f64) -> Scenario {
        let g = ArrayGeometry::half_wavelength(8, 8).unwrap();
        let dirs = DirectionSet::new(vec![-25.0, 20.0]).unwrap();
        let l = 32;
        let c = generate_desired(&DesiredSignalSpec::psk(8, 1.0, l, 1)).unwrap();
        let j = generate_desired(&DesiredSignalSpec::noise_like(1.0, l, 2)).unwrap();
        let mut d = DMatrix::zeros(2, l);
        d.set_row(0, &c.transpose());
        d.set_row(1, &j.transpose());
        Scenario::new(g, 0.0, dirs, 1, d, e_t).unwrap()
    }

    #[test]
    fn exact_match_gives_csnr() {
        let scn = two_direction_scenario(200.0);
        let sol = solve_structured(&scn, &StructuredCovariance::white(1.0, 32).unwrap()).unwrap();
        let chi = comm_sinr(&scn, &sol.waveform, 0, 0.1).unwrap();
        assert!((chi - 10.0).abs() < 1e-9);
        assert!(comm_sinr(&scn, &sol.waveform, 1, 0.1).is_err());
    }

    #[test]
    fn mismatch_lowers_comm_sinr_by_mean_error() {
        let scn = two_direction_scenario(200.0);
        let sol = solve_structured(&scn, &StructuredCovariance::white(1.0, 32).unwrap()).unwrap();
        // Add a component that changes only the emitted signal toward θ_c.
        let a_c = tx_steering(&scn.geom, -25.0).unwrap();
        let pert = DVector::from_fn(32, |l, _| C64::new(0.05 * (l as f64).cos(), 0.0));
        let s = sol.waveform.matrix() + a_c.map(|z| z / a_c.norm_squared()) * pert.transpose();
        let w = WaveformMatrix::new(s);
        let err = pert.norm_squared() / 32.0;
        let chi = comm_sinr(&scn, &w, 0, 0.1).unwrap();
        assert!((chi - 1.0 / (err + 0.1)).abs() < 1e-9);
        assert!(chi >= 10.0 / (1.0 + pert.norm_squared() / 32.0 / 0.1) - 1e-9);
    }

    #[test]
    fn sum_rate_two_receivers() {
        let g = ArrayGeometry::half_wavelength(8, 8).unwrap();
        let dirs = DirectionSet::new(vec![-25.0, -50.0]).unwrap();
        let mut d = DMatrix::zeros(2, 16);
        d.set_row(0, &generate_desired(&DesiredSignalSpec::psk(8, 1.0, 16, 4)).unwrap().transpose());
        d.set_row(1, &generate_desired(&DesiredSignalSpec::psk(4, 2.0, 16, 5)).unwrap().transpose());
        let scn = Scenario::new(g, 0.0, dirs, 2, d, 100.0).unwrap();
        let sol = solve_structured(&scn, &StructuredCovariance::white(1.0, 16).unwrap()).unwrap();
        let rate = sum_rate(&scn, &sol.waveform, &[0.5, 0.25]).unwrap();
        let expect = (1.0 + 1.0 / 0.5f64).log2() + (1.0 + 4.0 / 0.25f64).log2();
        assert!((rate - expect).abs() < 1e-9);
        assert!(sum_rate(&scn, &sol.waveform, &[0.5]).is_err());
    }

    #[test]
    fn jamming_power_exact_and_degenerate() {
        let scn = two_direction_scenario(200.0);
        let sol = solve_structured(&scn, &StructuredCovariance::white(1.0, 32).unwrap()).unwrap();
        let e = scn.desired_signal(1).norm_squared();
        let jp = jamming_power(&scn, &sol.waveform, 0, 0.0).unwrap();
        assert!((jp.power - e).abs() < 1e-9 * e);
        assert!((jp.lower - e).abs() < 1e-12 * e && (jp.upper - e).abs() < 1e-12 * e);
        let wide = jamming_power(&scn, &sol.waveform, 0, e).unwrap();
        assert!(wide.degenerate && wide.lower == 0.0);
        assert!((wide.upper - 4.0 * e).abs() < 1e-9 * e);
        assert!(jamming_power(&scn, &sol.waveform, 1, 0.0).is_err());
    }

    #[test]
    fn analytic_ser_reference_values() {
        // BPSK: ½erfc(√snr).
        assert!((analytic_mpsk_ser(2, 1.0).unwrap() - 0.5 * erfc(1.0)).abs() < 1e-15);
        // QPSK exact: 2Q(√snr) − Q(√snr)² with Q(x) = ½erfc(x/√2).
        for snr_db in [0.0, 5.0, 10.0] {
            let snr = from_db(snr_db);
            let q = 0.5 * erfc((snr / 2.0).sqrt());
            let exact = 2.0 * q - q * q;
            assert!((analytic_mpsk_ser(4, snr).unwrap() - exact).abs() < 1e-10 * exact.max(1e-300));
        }
        // High-SNR 8PSK approaches erfc(√snr sin(π/8)).
        let snr = from_db(20.0);
        let approx = erfc(snr.sqrt() * (PI / 8.0).sin());
        let exact = analytic_mpsk_ser(8, snr).unwrap();
        assert!((exact - approx).abs() < 0.05 * approx);
    }

    #[test]
    fn monte_carlo_ser_matches_analytic_8psk() {
        let tx = generate_desired(&DesiredSignalSpec::psk(8, 1.0, 500, 9)).unwrap();
        let exp = SerExperiment {
            tx_signal: tx,
            constellation: psk_constellation(8, 1.0),
            snr_db: vec![0.0, 6.0, 12.0, 30.0],
            trials: 200,
            seed: 1,
            jam: None,
        };
        let points = ser_monte_carlo(&exp).unwrap();
        for p in &points {
            let analytic = analytic_mpsk_ser(8, from_db(p.snr_db)).unwrap();
            let se = (analytic * (1.0 - analytic) / p.symbols as f64).sqrt();
            assert!((p.ser - analytic).abs() <= 3.0 * se + 1e-12, "{} dB: {} vs {analytic}", p.snr_db, p.ser);
        }
        assert!(points[3].ser < 1e-4);
        assert_eq!(points, ser_monte_carlo(&exp).unwrap());
    }

    #[test]
    fn jamming_degrades_ser() {
        let tx = generate_desired(&DesiredSignalSpec::psk(8, 1.0, 128, 2)).unwrap();
        let jam = generate_desired(&DesiredSignalSpec::noise_like(1.0, 128, 3)).unwrap();
        let mut exp = SerExperiment {
            tx_signal: tx,
            constellation: psk_constellation(8, 1.0),
            snr_db: vec![0.0, 5.0, 10.0, 15.0],
            trials: 100,
            seed: 4,
            jam: None,
        };
        let clean = ser_monte_carlo(&exp).unwrap();
        exp.jam = Some(JamSpec { signal: jam, jnr_db: 0.0 });
        let jammed = ser_monte_carlo(&exp).unwrap();
        for (c, j) in clean.iter().zip(&jammed) {
            assert!(j.ser > c.ser, "{} dB: {} vs {}", c.snr_db, j.ser, c.ser);
        }
    }

    #[test]
    fn ser_argument_checks() {
        let exp = SerExperiment {
            tx_signal: DVector::zeros(0),
            constellation: psk_constellation(8, 1.0),
            snr_db: vec![0.0],
            trials: 1,
            seed: 0,
            jam: None,
        };
        assert!(ser_monte_carlo(&exp).is_err());
        let exp = SerExperiment { tx_signal: DVector::from_element(4, C64::new(1.0, 0.0)), trials: 0, ..exp };
        assert!(ser_monte_carlo(&exp).is_err());
    }

    #[test]
    fn gaussian_passes_and_psk_fails_normality() {
        let g = generate_desired(&DesiredSignalSpec::noise_like(1.0, 4096, 21)).unwrap();
        let report = normality_check(&g).unwrap();
        assert!(report.passed(), "{:?} {:?}", report.real.excess_kurtosis, report.real.qq_deviation);
        assert_eq!(report.real.qq_pairs.len(), 4096);
        let p = generate_desired(&DesiredSignalSpec::psk(8, 1.0, 4096, 21)).unwrap();
        let report = normality_check(&p).unwrap();
        assert!(!report.real.passed && report.real.excess_kurtosis < -1.0);
        assert!(normality_check(&DVector::zeros(16)).is_err());
    }

    #[test]
    fn synthesized_jam_signal_is_noise_like() {
        let g = ArrayGeometry::half_wavelength(12, 12).unwrap();
        let dirs = DirectionSet::new(vec![-25.0, 20.0]).unwrap();
        let l = 128;
        let mut d = DMatrix::zeros(2, l);
        d.set_row(0, &generate_desired(&DesiredSignalSpec::psk(8, 1.0, l, 1)).unwrap().transpose());
        d.set_row(1, &generate_desired(&DesiredSignalSpec::noise_like(1.0, l, 2)).unwrap().transpose());
        let scn = Scenario::new(g, 0.0, dirs, 1, d, 4.0 * l as f64 / 12.0).unwrap();
        let sol = solve_structured(&scn, &StructuredCovariance::white(1.0, l).unwrap()).unwrap();
        let emitted = sol.waveform.emitted(&tx_steering(&g, 20.0).unwrap());
        assert!(normality_check(&emitted).unwrap().passed());
        assert!(db(sol.sinr_t) > 20.0);
    }
}
