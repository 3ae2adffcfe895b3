//! Qubit coupled to a band of bosonic modes in the single-excitation sector.
//!
//! The state `alpha(t)|1, vac> + sum_m beta_m(t)|0, 1_m>` evolves under the
//! arrowhead matrix with diagonal `(Omega, omega_1, ..., omega_N)` and border
//! `g`. Mode `m` sits at the midpoint `omega_min + (m - 1/2) delta_omega` of the
//! `m`-th slice of the band, so the finite sum over modes is a midpoint rule for
//! the continuum kernel.

use crate::algebra::{C64, ONE, ZERO};
use crate::complexity::PhysicalParams;
use crate::error::{Error, Result};
use crate::lindblad::Trajectory;

/// Largest number of modes accepted by [`solve_finite`].
pub const MAX_MODES: usize = 4096;

/// Flat-band model: qubit splitting `omega`, band `[omega_min, omega_max]`
/// sliced into modes of spacing `delta_omega`, per-mode coupling `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactModel {
    pub omega: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub delta_omega: f64,
    pub g: f64,
}

impl ExactModel {
    pub fn new(omega: f64, omega_min: f64, omega_max: f64, delta_omega: f64, g: f64) -> Result<Self> {
        let m = Self {
            omega,
            omega_min,
            omega_max,
            delta_omega,
            g,
        };
        m.validate()?;
        Ok(m)
    }

    /// Model with `modes` equal slices of the band.
    pub fn with_modes(omega: f64, omega_min: f64, omega_max: f64, modes: usize, g: f64) -> Result<Self> {
        if modes == 0 {
            return Err(Error::Validation("at least one mode is required".into()));
        }
        Self::new(omega, omega_min, omega_max, (omega_max - omega_min) / modes as f64, g)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega", self.omega),
            ("omega_min", self.omega_min),
            ("omega_max", self.omega_max),
            ("delta_omega", self.delta_omega),
            ("g", self.g),
        ] {
            if !v.is_finite() {
                return Err(Error::Validation(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.omega_min > 0.0 && self.omega_max > self.omega_min) {
            return Err(Error::Validation(format!(
                "band edges must satisfy 0 < omega_min < omega_max, got [{}, {}]",
                self.omega_min, self.omega_max
            )));
        }
        if !(self.delta_omega > 0.0) {
            return Err(Error::Validation(format!("delta_omega must be positive, got {}", self.delta_omega)));
        }
        let ratio = self.bandwidth() / self.delta_omega;
        if ratio.round() < 1.0 || (ratio - ratio.round()).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "bandwidth / delta_omega = {ratio} is not a positive integer"
            )));
        }
        Ok(())
    }

    pub fn bandwidth(&self) -> f64 {
        self.omega_max - self.omega_min
    }

    pub fn modes(&self) -> usize {
        (self.bandwidth() / self.delta_omega).round() as usize
    }

    /// Frequency of mode `m`, `1 <= m <= N`.
    pub fn mode_frequency(&self, m: usize) -> f64 {
        self.omega_min + (m as f64 - 0.5) * self.delta_omega
    }

    /// Reservoir correlation time `1 / (omega_max - omega_min)`.
    pub fn correlation_time(&self) -> f64 {
        1.0 / self.bandwidth()
    }

    /// Memory-kernel prefactor `g^2 / delta_omega`.
    pub fn kappa(&self) -> f64 {
        self.g * self.g / self.delta_omega
    }

    /// `int_{omega_min}^{omega_max} exp(-i omega s) d omega`
    pub fn kernel(&self, s: f64) -> C64 {
        let w = self.bandwidth();
        let centre = 0.5 * (self.omega_min + self.omega_max);
        let x = 0.5 * w * s;
        let sinc = if x.abs() < 1e-4 {
            1.0 - x * x / 6.0 + x.powi(4) / 120.0
        } else {
            x.sin() / x
        };
        C64::from_polar(w * sinc, -centre * s)
    }
}

/// Reduced parameters: two coupling terms, `T = 1/(omega_max - omega_min)`,
/// `tau = 1/omega_max`, `gamma = g (omega_max - omega_min) / delta_omega`.
pub fn derived_params(m: &ExactModel, epsilon: f64) -> Result<PhysicalParams> {
    m.validate()?;
    let gamma = m.g.abs() * m.bandwidth() / m.delta_omega;
    PhysicalParams::new(2, gamma, m.correlation_time(), 1.0 / m.omega_max, epsilon)
}

/// Excited amplitude and single-photon amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeState {
    pub alpha: C64,
    pub betas: Vec<C64>,
}

impl AmplitudeState {
    pub fn excited(modes: usize) -> Self {
        Self {
            alpha: ONE,
            betas: vec![ZERO; modes],
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.alpha.norm_sqr() + self.betas.iter().map(|b| b.norm_sqr()).sum::<f64>()
    }

    /// `tr[sigma_z rho] = 2 |alpha|^2 - 1`
    pub fn sigma_z(&self) -> f64 {
        2.0 * self.alpha.norm_sqr() - 1.0
    }
}

/// Eigendecomposition of the arrowhead generator.
#[derive(Debug, Clone)]
pub struct FiniteSolver {
    eigenvalues: Vec<f64>,
    /// Eigenvectors as rows, each of length `N + 1` with the qubit component first.
    vectors: Vec<Vec<f64>>,
}

impl FiniteSolver {
    pub fn new(m: &ExactModel) -> Result<Self> {
        m.validate()?;
        let n = m.modes();
        if n > MAX_MODES {
            return Err(Error::Size(format!("{n} modes exceed the cap of {MAX_MODES}")));
        }
        if m.g == 0.0 {
            let mut eigenvalues = vec![m.omega];
            let mut vectors = vec![unit(n + 1, 0)];
            for k in 1..=n {
                eigenvalues.push(m.mode_frequency(k));
                vectors.push(unit(n + 1, k));
            }
            return Ok(Self { eigenvalues, vectors });
        }
        let g2 = m.g * m.g;
        let poles: Vec<f64> = (1..=n).map(|k| m.mode_frequency(k)).collect();
        let spread = m.g.abs() * (n as f64).sqrt() + (m.omega - poles[0]).abs().max((m.omega - poles[n - 1]).abs());
        let mut eigenvalues = Vec::with_capacity(n + 1);
        let mut vectors = Vec::with_capacity(n + 1);
        // secular function f(lambda) = lambda - Omega - sum g^2 / (lambda - omega_m),
        // increasing between consecutive poles; each root is found as a shift
        // from the pole it is closest to so that lambda - omega_m keeps full
        // relative precision
        let secular = |origin: usize, delta: f64| -> f64 {
            let lambda = poles[origin] + delta;
            let mut sum = 0.0;
            for k in 0..poles.len() {
                let gap = (origin as f64 - k as f64) * m.delta_omega + delta;
                sum += g2 / gap;
            }
            lambda - m.omega - sum
        };
        for j in 0..=n {
            // root between pole j-1 and pole j (0-based), with open ends outside
            let (origin, mut lo, mut hi) = if j == 0 {
                (0, -(spread + m.delta_omega), 0.0)
            } else if j == n {
                (n - 1, 0.0, spread + m.delta_omega)
            } else {
                let half = 0.5 * m.delta_omega;
                if secular(j - 1, half) > 0.0 {
                    (j - 1, 0.0, half)
                } else {
                    (j, -half, 0.0)
                }
            };
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid == lo || mid == hi {
                    break;
                }
                let f = secular(origin, mid);
                if f.is_nan() || f > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let delta = 0.5 * (lo + hi);
            let mut v = Vec::with_capacity(n + 1);
            v.push(1.0);
            for k in 0..n {
                let gap = (origin as f64 - k as f64) * m.delta_omega + delta;
                v.push(m.g / gap);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                return Err(Error::Numerical(format!("eigenvector {j} could not be normalised")));
            }
            for x in v.iter_mut() {
                *x /= norm;
            }
            eigenvalues.push(poles[origin] + delta);
            vectors.push(v);
        }
        Ok(Self { eigenvalues, vectors })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `alpha(t)` starting from the excited qubit and empty modes.
    pub fn alpha(&self, t: f64) -> C64 {
        self.eigenvalues
            .iter()
            .zip(&self.vectors)
            .map(|(&l, v)| C64::from_polar(v[0] * v[0], -l * t))
            .sum()
    }

    /// Propagates an arbitrary state by `t` (negative `t` runs backwards).
    pub fn evolve(&self, state: &AmplitudeState, t: f64) -> Result<AmplitudeState> {
        let dim = self.vectors.len();
        if state.betas.len() + 1 != dim {
            return Err(Error::Shape(format!(
                "state has {} modes, model has {}",
                state.betas.len(),
                dim - 1
            )));
        }
        let mut psi = Vec::with_capacity(dim);
        psi.push(state.alpha);
        psi.extend_from_slice(&state.betas);
        let mut out = vec![ZERO; dim];
        for (&l, v) in self.eigenvalues.iter().zip(&self.vectors) {
            let overlap: C64 = v.iter().zip(&psi).map(|(a, b)| b * *a).sum();
            let c = overlap * C64::from_polar(1.0, -l * t);
            for (o, a) in out.iter_mut().zip(v) {
                *o += c * *a;
            }
        }
        Ok(AmplitudeState {
            alpha: out[0],
            betas: out[1..].to_vec(),
        })
    }
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return Err(Error::Validation("time grid must start at 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Validation("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

fn trajectory_from_alpha(times: &[f64], alpha: &[C64]) -> Result<Trajectory> {
    let mut traj = Trajectory::new(times.to_vec());
    let pop: Vec<f64> = alpha.iter().map(|a| a.norm_sqr()).collect();
    traj.push_observable("sigma_z", pop.iter().map(|p| 2.0 * p - 1.0).collect())?;
    traj.push_observable("excited_population", pop)?;
    Ok(traj)
}

/// Finite-mode dynamics by exact diagonalization; records `sigma_z` and
/// `excited_population`.
pub fn solve_finite(m: &ExactModel, times: &[f64]) -> Result<Trajectory> {
    check_times(times)?;
    let solver = FiniteSolver::new(m)?;
    let alpha: Vec<C64> = times.iter().map(|&t| solver.alpha(t)).collect();
    trajectory_from_alpha(times, &alpha)
}

/// Slowly varying amplitude `c(t) = exp(i Omega t) alpha(t)` of the continuum
/// limit on the grid `0, h, 2h, ...` up to `t_max`.
///
/// Solves `c' = -kappa int_0^t G(t - t') exp(i Omega (t - t')) c(t') dt'`, the
/// rotating-frame form of `alpha' = -i Omega alpha - kappa int G alpha`, with a
/// trapezoidal memory integral and a Heun predictor-corrector step. The free
/// rotation is then exact, so `g = 0` keeps `|alpha| = 1` to rounding.
fn continuum_envelope(m: &ExactModel, t_max: f64, h: f64) -> Result<Vec<C64>> {
    m.validate()?;
    let tau = 1.0 / m.omega_max;
    if !(h > 0.0) || h > tau / 20.0 * (1.0 + 1e-12) {
        return Err(Error::Step(format!("step {h} must lie in (0, tau/20 = {}]", tau / 20.0)));
    }
    if !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(Error::Validation(format!("final time must be non-negative, got {t_max}")));
    }
    let steps = (t_max / h - 1e-9).ceil().max(0.0) as usize;
    let kappa = m.kappa();
    let kernel: Vec<C64> = (0..=steps)
        .map(|k| {
            let s = k as f64 * h;
            m.kernel(s) * C64::from_polar(1.0, m.omega * s)
        })
        .collect();
    let mut c: Vec<C64> = Vec::with_capacity(steps + 1);
    c.push(ONE);

    // -kappa times the trapezoidal memory integral at step k, given c_0..c_{k-1}
    // and a candidate value for c_k
    let rate = |c: &[C64], k: usize, last: C64| -> C64 {
        if k == 0 {
            return ZERO;
        }
        let mut acc = 0.5 * (kernel[k] * c[0] + kernel[0] * last);
        for j in 1..k {
            acc += kernel[k - j] * c[j];
        }
        -kappa * h * acc
    };
    let mut f_prev = ZERO;
    for k in 0..steps {
        let a = c[k];
        let predicted = a + h * f_prev;
        let f_pred = rate(&c, k + 1, predicted);
        let corrected = a + 0.5 * h * (f_prev + f_pred);
        f_prev = rate(&c, k + 1, corrected);
        c.push(corrected);
    }
    Ok(c)
}

/// Continuum-limit amplitude `alpha` on the grid `0, h, 2h, ...` up to `t_max`.
pub fn continuum_alpha(m: &ExactModel, t_max: f64, h: f64) -> Result<Vec<C64>> {
    let c = continuum_envelope(m, t_max, h)?;
    Ok(c
        .iter()
        .enumerate()
        .map(|(k, ck)| ck * C64::from_polar(1.0, -m.omega * k as f64 * h))
        .collect())
}

/// Continuum-limit dynamics sampled at `times` (the envelope is interpolated
/// linearly between grid points); records `sigma_z` and `excited_population`.
pub fn solve_continuum(m: &ExactModel, times: &[f64], h: f64) -> Result<Trajectory> {
    check_times(times)?;
    let t_max = *times.last().expect("non-empty");
    let grid = continuum_envelope(m, t_max, h)?;
    let alpha: Vec<C64> = times
        .iter()
        .map(|&t| {
            if grid.len() == 1 {
                return grid[0];
            }
            let x = t / h;
            let k = (x.floor() as usize).min(grid.len() - 2);
            let w = x - k as f64;
            (grid[k] * (1.0 - w) + grid[k + 1] * w) * C64::from_polar(1.0, -m.omega * t)
        })
        .collect();
    trajectory_from_alpha(times, &alpha)
}
