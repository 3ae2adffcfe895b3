//! Derivative-free fits of fixed-size GKSL models to a target `sigma_z` series.
//!
//! [`fit_markov`] adjusts the two rates of generalized amplitude damping with
//! the qubit splitting held fixed; [`fit_embedding`] adjusts all seven
//! parameters of a qubit coupled to a damped two-level effective reservoir.
//! Rates are optimised in log space, so every trial generator is valid.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::ComplexMatrix;
use crate::error::{Error, Result};
use crate::lindblad::{
    embedding2_generator, embedding_initial_state, excited_projector, gad_generator, propagate,
    EmbeddingParams, MarkovParams, Trajectory,
};

/// Log-rate bounds used when mapping search coordinates to rates.
const LOG_RATE_MIN: f64 = -30.0;
const LOG_RATE_MAX: f64 = 8.0;
/// Objective value reported when a trial model cannot be propagated; above the
/// largest possible squared error of a `sigma_z` series.
const FAILED_EVALUATION: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    /// Objective evaluations allowed per start.
    pub max_evals: usize,
    /// Simplex diameter below which a start is converged.
    pub tol: f64,
    pub seed: u64,
    /// Extra starts after the first, each from a seeded perturbation of the best point.
    pub restarts: usize,
    /// Initial simplex edge, scaled by `max(1, |x_i|)`.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            tol: 1e-10,
            seed: 0,
            restarts: 5,
            initial_step: 0.1,
        }
    }
}

/// Best point found by [`nelder_mead`].
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub iterations: usize,
    /// Best value after every iteration, across all starts.
    pub log: Vec<f64>,
}

struct Counted<'a, F> {
    f: &'a mut F,
    calls: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<'_, F> {
    fn eval(&mut self, x: &[f64]) -> Result<f64> {
        self.calls += 1;
        let v = (self.f)(x);
        if !v.is_finite() {
            return Err(Error::Objective {
                point: x.to_vec(),
                value: v,
            });
        }
        Ok(v)
    }
}

fn axpy(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    // a + s (b - a)
    a.iter().zip(b).map(|(x, y)| x + s * (y - x)).collect()
}

/// Simplex minimisation with reflection 1, expansion 2, contraction 0.5 and
/// shrink 0.5.
pub fn nelder_mead<F>(mut objective: F, x0: &[f64], options: &NelderMeadOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> f64,
{
    if x0.is_empty() {
        return Err(Error::Validation("starting point is empty".into()));
    }
    let mut f = Counted {
        f: &mut objective,
        calls: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut best_x = x0.to_vec();
    let mut best_v = f.eval(x0)?;
    let mut log = Vec::new();
    let mut iterations = 0;

    for start in 0..=options.restarts {
        let base: Vec<f64> = if start == 0 {
            best_x.clone()
        } else {
            best_x
                .iter()
                .map(|&x| x + options.initial_step * x.abs().max(1.0) * rng.gen_range(-1.0..1.0))
                .collect()
        };
        let budget = f.calls + options.max_evals;
        let (x, v, iters) = simplex_run(&mut f, &base, options, budget, &mut log, best_v)?;
        iterations += iters;
        if v < best_v {
            best_v = v;
            best_x = x;
        }
    }
    Ok(Minimum {
        x: best_x,
        value: best_v,
        evaluations: f.calls,
        iterations,
        log,
    })
}

fn simplex_run<F: FnMut(&[f64]) -> f64>(
    f: &mut Counted<'_, F>,
    base: &[f64],
    options: &NelderMeadOptions,
    budget: usize,
    log: &mut Vec<f64>,
    incumbent: f64,
) -> Result<(Vec<f64>, f64, usize)> {
    let n = base.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((base.to_vec(), f.eval(base)?));
    for i in 0..n {
        let mut x = base.to_vec();
        x[i] += options.initial_step * base[i].abs().max(1.0);
        let v = f.eval(&x)?;
        simplex.push((x, v));
    }
    let mut iters = 0;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < options.tol || f.calls >= budget {
            break;
        }
        iters += 1;
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflected = axpy(&centroid, &worst.0, -1.0);
        let fr = f.eval(&reflected)?;
        if fr < simplex[0].1 {
            let expanded = axpy(&centroid, &worst.0, -2.0);
            let fe = f.eval(&expanded)?;
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (point, fc) = if fr < worst.1 {
                let outside = axpy(&centroid, &reflected, 0.5);
                let v = f.eval(&outside)?;
                (outside, v)
            } else {
                let inside = axpy(&centroid, &worst.0, 0.5);
                let v = f.eval(&inside)?;
                (inside, v)
            };
            if fc < fr.min(worst.1) {
                simplex[n] = (point, fc);
            } else {
                let anchor = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = axpy(&anchor, &vertex.0, 0.5);
                    let v = f.eval(&x)?;
                    *vertex = (x, v);
                }
            }
        }
        let current = simplex.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
        log.push(current.min(incumbent).min(log.last().copied().unwrap_or(f64::INFINITY)));
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    Ok((x, v, iters))
}

/// Fitted parameters and the quality of the fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Physical parameter values (rates, not their logarithms).
    pub params: Vec<(String, f64)>,
    pub mse: f64,
    pub evaluations: usize,
    pub seed: u64,
    /// Model `sigma_z` on the target grid at the fitted parameters.
    pub fitted: Vec<f64>,
    pub log: Vec<f64>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn markov_params(&self) -> Option<MarkovParams> {
        Some(MarkovParams {
            omega: self.param("omega")?,
            gamma_down: self.param("gamma_down")?,
            gamma_up: self.param("gamma_up")?,
        })
    }

    pub fn embedding_params(&self) -> Option<EmbeddingParams> {
        let mut v = [0.0; 7];
        for (slot, name) in v.iter_mut().zip(EmbeddingParams::NAMES) {
            *slot = self.param(name)?;
        }
        Some(EmbeddingParams::from_vector(v))
    }
}

/// Budget and seed of a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_evals: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            restarts: 5,
            seed: 0,
        }
    }
}

impl FitOptions {
    fn simplex(&self) -> NelderMeadOptions {
        NelderMeadOptions {
            max_evals: self.max_evals,
            restarts: self.restarts,
            seed: self.seed,
            tol: 1e-9,
            initial_step: 0.5,
        }
    }
}

fn target_series(target: &Trajectory) -> Result<(&[f64], &[f64])> {
    let z = target
        .observable("sigma_z")
        .ok_or_else(|| Error::Validation("target trajectory has no sigma_z series".into()))?;
    if z.is_empty() {
        return Err(Error::Validation("target trajectory is empty".into()));
    }
    Ok((&target.times, z))
}

pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

fn rate(log_rate: f64) -> f64 {
    log_rate.clamp(LOG_RATE_MIN, LOG_RATE_MAX).exp()
}

fn sigma_z_operator(dim_right: usize) -> ComplexMatrix {
    let z = &excited_projector().scale_real(2.0) - &ComplexMatrix::identity(2);
    crate::algebra::kron(&z, &ComplexMatrix::identity(dim_right)).expect("small operands")
}

/// `sigma_z(t)` of generalized amplitude damping from the excited state.
pub fn markov_sigma_z(p: &MarkovParams, times: &[f64]) -> Result<Vec<f64>> {
    let gen = gad_generator(p)?;
    let traj = propagate(&gen, &excited_projector(), times)?;
    let z = sigma_z_operator(1);
    let states = traj.states.as_ref().expect("propagate stores states");
    Ok(states.iter().map(|s| crate::lindblad::expectation(&z, s).re).collect())
}

/// `sigma_z(t)` of the qubit coupled to a two-level effective reservoir,
/// starting from `|1><1| (x) |0><0|`.
pub fn embedding_sigma_z(p: &EmbeddingParams, times: &[f64]) -> Result<Vec<f64>> {
    let gen = embedding2_generator(p)?;
    let traj = propagate(&gen, &embedding_initial_state(), times)?;
    let z = sigma_z_operator(2);
    let states = traj.states.as_ref().expect("propagate stores states");
    Ok(states.iter().map(|s| crate::lindblad::expectation(&z, s).re).collect())
}

fn markov_from(x: &[f64], omega: f64) -> MarkovParams {
    MarkovParams {
        omega,
        gamma_down: rate(x[0]),
        gamma_up: rate(x[1]),
    }
}

fn embedding_from(x: &[f64]) -> EmbeddingParams {
    EmbeddingParams {
        omega1: x[0],
        omega2: x[1],
        g_tilde: x[2],
        gamma1_down: rate(x[3]),
        gamma1_up: rate(x[4]),
        gamma2_down: rate(x[5]),
        gamma2_up: rate(x[6]),
    }
}

fn span(times: &[f64]) -> f64 {
    (times.last().copied().unwrap_or(1.0) - times.first().copied().unwrap_or(0.0)).max(1e-12)
}

/// Best generalized-amplitude-damping description of the target with the
/// splitting fixed at `omega`.
pub fn fit_markov(target: &Trajectory, omega: f64, seed: u64) -> Result<FitResult> {
    fit_markov_with(target, omega, &FitOptions { seed, ..FitOptions::default() })
}

pub fn fit_markov_with(target: &Trajectory, omega: f64, options: &FitOptions) -> Result<FitResult> {
    let (times, z) = target_series(target)?;
    let s = span(times);
    let x0 = [(1.0 / s).ln(), (0.01 / s).ln()];
    let objective = |x: &[f64]| match markov_sigma_z(&markov_from(x, omega), times) {
        Ok(model) => mse(&model, z),
        Err(_) => FAILED_EVALUATION,
    };
    let best = nelder_mead(objective, &x0, &options.simplex())?;
    let p = markov_from(&best.x, omega);
    let fitted = markov_sigma_z(&p, times)?;
    Ok(FitResult {
        params: vec![
            ("omega".into(), p.omega),
            ("gamma_down".into(), p.gamma_down),
            ("gamma_up".into(), p.gamma_up),
        ],
        mse: mse(&fitted, z),
        evaluations: best.evaluations,
        seed: options.seed,
        fitted,
        log: best.log,
    })
}

/// Best two-level effective-reservoir description of the target.
pub fn fit_embedding(target: &Trajectory, seed: u64) -> Result<FitResult> {
    fit_embedding_with(target, &FitOptions { seed, ..FitOptions::default() }, None)
}

/// As [`fit_embedding`]; with `warm` given, a second search starts from the
/// Markov solution embedded with a decoupled, undamped reservoir and the
/// better of the two fits is returned.
pub fn fit_embedding_with(
    target: &Trajectory,
    options: &FitOptions,
    warm: Option<&MarkovParams>,
) -> Result<FitResult> {
    let (times, z) = target_series(target)?;
    let s = span(times);
    let objective = |x: &[f64]| match embedding_sigma_z(&embedding_from(x), times) {
        Ok(model) => mse(&model, z),
        Err(_) => FAILED_EVALUATION,
    };
    let cold = [
        0.0,
        0.0,
        std::f64::consts::PI / s,
        (0.1 / s).ln(),
        (0.001 / s).ln(),
        (1.0 / s).ln(),
        (0.001 / s).ln(),
    ];
    let mut best = nelder_mead(objective, &cold, &options.simplex())?;
    let mut evaluations = best.evaluations;
    if let Some(m) = warm {
        let lr = |r: f64| if r > 0.0 { r.ln().max(LOG_RATE_MIN) } else { LOG_RATE_MIN };
        let x0 = [m.omega, m.omega, 0.0, lr(m.gamma_down), lr(m.gamma_up), LOG_RATE_MIN, LOG_RATE_MIN];
        let other = nelder_mead(objective, &x0, &options.simplex())?;
        evaluations += other.evaluations;
        if other.value < best.value {
            best = other;
        }
    }
    let p = embedding_from(&best.x);
    let fitted = embedding_sigma_z(&p, times)?;
    Ok(FitResult {
        params: EmbeddingParams::NAMES
            .iter()
            .zip(p.to_vector())
            .map(|(n, v)| (n.to_string(), v))
            .collect(),
        mse: mse(&fitted, z),
        evaluations,
        seed: options.seed,
        fitted,
        log: best.log,
    })
}

/// Wraps a `sigma_z` series as a fit target.
pub fn target_from_series(times: Vec<f64>, sigma_z: Vec<f64>) -> Result<Trajectory> {
    let mut t = Trajectory::new(times);
    t.push_observable("sigma_z", sigma_z)?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::uniform_grid;
    use approx::assert_relative_eq;

    #[test]
    fn quadratic_bowl() {
        let c = [1.5, -0.25, 3.0];
        let f = |x: &[f64]| x.iter().zip(&c).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let opts = NelderMeadOptions {
            max_evals: 5000,
            restarts: 1,
            tol: 1e-12,
            ..Default::default()
        };
        let m = nelder_mead(f, &[0.0; 3], &opts).unwrap();
        for (a, b) in m.x.iter().zip(&c) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions {
            max_evals: 5000,
            restarts: 3,
            tol: 1e-12,
            ..Default::default()
        };
        let m = nelder_mead(f, &[-1.2, 1.0], &opts).unwrap();
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6, "{:?}", m.x);
    }

    #[test]
    fn log_is_non_increasing_and_runs_are_deterministic() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + (x[1] * x[0] - 1.0).powi(2) + x[1].sin();
        let opts = NelderMeadOptions {
            seed: 42,
            ..Default::default()
        };
        let a = nelder_mead(f, &[0.0, 0.0], &opts).unwrap();
        let b = nelder_mead(f, &[0.0, 0.0], &opts).unwrap();
        assert_eq!(a, b);
        assert!(a.log.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn non_finite_objective_reports_point() {
        let f = |x: &[f64]| if x[0] > 0.05 { f64::NAN } else { -x[0] };
        let err = nelder_mead(f, &[0.0], &NelderMeadOptions::default()).unwrap_err();
        match err {
            Error::Objective { point, value } => {
                assert!(point[0] > 0.05);
                assert!(value.is_nan());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn markov_fit_recovers_rates() {
        let truth = MarkovParams {
            omega: 1.0,
            gamma_down: 1.0,
            gamma_up: 0.3,
        };
        let times = uniform_grid(5.0, 101);
        let z = markov_sigma_z(&truth, &times).unwrap();
        let target = target_from_series(times.clone(), z).unwrap();
        let fit = fit_markov(&target, 1.0, 7).unwrap();
        let p = fit.markov_params().unwrap();
        assert_relative_eq!(p.gamma_down, 1.0, max_relative = 1e-3);
        assert_relative_eq!(p.gamma_up, 0.3, max_relative = 1e-3);
        // analytic population oracle at the fitted rates
        let analytic: Vec<f64> = times.iter().map(|&t| 2.0 * p.population(1.0, t) - 1.0).collect();
        let z = target.observable("sigma_z").unwrap();
        assert!((mse(&analytic, z) - fit.mse).abs() < 1e-10);
    }

    #[test]
    fn embedding_fit_reproduces_embedding_target() {
        let truth = EmbeddingParams {
            omega1: 1.0,
            omega2: 1.2,
            g_tilde: 0.8,
            gamma1_down: 0.05,
            gamma1_up: 0.0,
            gamma2_down: 0.6,
            gamma2_up: 0.02,
        };
        let times = uniform_grid(10.0, 81);
        let z = embedding_sigma_z(&truth, &times).unwrap();
        let target = target_from_series(times, z).unwrap();
        let fit = fit_embedding(&target, 1).unwrap();
        assert!(fit.mse <= 1e-6, "mse {}", fit.mse);
        assert!(fit.params.iter().skip(3).all(|(_, v)| *v >= 0.0));
    }

    #[test]
    fn warm_started_embedding_is_no_worse_than_markov() {
        let truth = EmbeddingParams {
            omega1: 1.0,
            omega2: 1.0,
            g_tilde: 0.5,
            gamma1_down: 0.0,
            gamma1_up: 0.0,
            gamma2_down: 1.5,
            gamma2_up: 0.0,
        };
        let times = uniform_grid(8.0, 61);
        let z = embedding_sigma_z(&truth, &times).unwrap();
        let target = target_from_series(times, z).unwrap();
        let opts = FitOptions {
            max_evals: 600,
            restarts: 1,
            seed: 3,
        };
        let markov = fit_markov_with(&target, 1.0, &opts).unwrap();
        let emb = fit_embedding_with(&target, &opts, markov.markov_params().as_ref()).unwrap();
        assert!(emb.mse <= markov.mse + 1e-12);
    }
}
