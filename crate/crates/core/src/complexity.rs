//! Closed-form complexity estimates.
//!
//! Given the coupling strength `gamma`, the number of coupling terms `n`, the
//! reservoir correlation time `T`, the minimal timescale `tau` and a target
//! accuracy `epsilon`, the Renyi entropy of the timeline reservoir network is
//! bounded in closed form. Plugging the bound into the rank needed for a
//! matrix-product approximation of accuracy `epsilon`, and minimising over the
//! Renyi order, gives the sufficient rank `r_suff` and the effective reservoir
//! dimension `d_er = sqrt(r_suff)`.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Smallest and largest Renyi order searched; both ends of (0, 1) are singular.
pub const ALPHA_MIN: f64 = 1e-4;
pub const ALPHA_MAX: f64 = 1.0 - 1e-4;
const BRACKET_STEP: f64 = 1e-3;

/// Relative slack when rounding `d_er` up to an integer. The clipped search
/// domain overestimates the infimum by roughly `1e-4` in log scale, which would
/// otherwise turn a value of `1.0002` into a ceiling of 2.
pub const CEIL_SNAP: f64 = 1e-3;

/// Reduced description of an open system: `n` coupling terms of strength
/// `gamma`, reservoir correlation time `big_t`, minimal timescale `tau`, and the
/// target accuracy `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub n: usize,
    pub gamma: f64,
    pub big_t: f64,
    pub tau: f64,
    pub epsilon: f64,
}

impl PhysicalParams {
    pub fn new(n: usize, gamma: f64, big_t: f64, tau: f64, epsilon: f64) -> Result<Self> {
        let p = Self {
            n,
            gamma,
            big_t,
            tau,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters from the two dimensionless combinations, with `tau = 1`.
    pub fn from_dimensionless(n: usize, n_gamma_t: f64, gamma_tau: f64, epsilon: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation("n must be positive to split n*gamma*T".into()));
        }
        let big_t = n_gamma_t / (n as f64 * gamma_tau);
        Self::new(n, gamma_tau, big_t, 1.0, epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::Validation(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::Validation(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.big_t >= 0.0) || !self.big_t.is_finite() {
            return Err(Error::Validation(format!("T must be non-negative, got {}", self.big_t)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Validation(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.gamma_tau() >= 1.0 {
            return Err(Error::Validation(format!(
                "gamma*tau must be below 1, got {}",
                self.gamma_tau()
            )));
        }
        Ok(())
    }

    pub fn gamma_tau(&self) -> f64 {
        self.gamma * self.tau
    }

    pub fn n_gamma_t(&self) -> f64 {
        self.n as f64 * self.gamma * self.big_t
    }

    /// Number of time steps spanning the correlation time.
    pub fn memory_steps(&self) -> f64 {
        self.big_t / self.tau
    }
}

/// Which side of the Renyi entropy bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundMode {
    /// `(1/(1-a)) ln{[1 + 2n (g tau)^a]^(T/tau) / (1 + 2n g tau)^(a T/tau)}`
    Exact,
    /// `2 n g T ((g tau)^(a-1) - a) / (1 - a)`
    #[default]
    Asymptotic,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("Renyi order must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Upper bound on the Renyi entropy (nats) of the timeline reservoir network.
pub fn renyi_bound(p: &PhysicalParams, alpha: f64, mode: BoundMode) -> Result<f64> {
    check_alpha(alpha)?;
    p.validate()?;
    Ok(renyi_bound_unchecked(p, alpha, mode))
}

fn renyi_bound_unchecked(p: &PhysicalParams, alpha: f64, mode: BoundMode) -> f64 {
    let gt = p.gamma_tau();
    let two_n = 2.0 * p.n as f64;
    match mode {
        BoundMode::Exact => {
            let steps = p.memory_steps();
            steps * ((two_n * gt.powf(alpha)).ln_1p() - alpha * (two_n * gt).ln_1p()) / (1.0 - alpha)
        }
        BoundMode::Asymptotic => {
            two_n * p.gamma * p.big_t * (gt.powf(alpha - 1.0) - alpha) / (1.0 - alpha)
        }
    }
}

/// `ln[(1-a) eps^(-a/(1-a)) exp(S_a)]`
fn ln_rank_objective(p: &PhysicalParams, alpha: f64) -> f64 {
    let s = renyi_bound_unchecked(p, alpha, BoundMode::Asymptotic);
    (1.0 - alpha).ln() - alpha / (1.0 - alpha) * p.epsilon.ln() + s
}

/// `ln[sqrt(1-a) eps^(-a/(2(1-a))) exp(n g T ((g tau)^(a-1) - a)/(1-a))]`
fn ln_dimension_objective(p: &PhysicalParams, alpha: f64) -> f64 {
    let gt = p.gamma_tau();
    let exponent = p.n_gamma_t() * (gt.powf(alpha - 1.0) - alpha) / (1.0 - alpha);
    0.5 * (1.0 - alpha).ln() - alpha / (2.0 * (1.0 - alpha)) * p.epsilon.ln() + exponent
}

/// Minimises `f` over `[ALPHA_MIN, ALPHA_MAX]`: grid bracketing, then golden section.
fn minimize_alpha(f: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let count = ((ALPHA_MAX - ALPHA_MIN) / BRACKET_STEP).ceil() as usize;
    let grid: Vec<f64> = (0..=count)
        .map(|k| (ALPHA_MIN + k as f64 * BRACKET_STEP).min(ALPHA_MAX))
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (k, &a) in grid.iter().enumerate() {
        let v = f(a);
        if v.is_finite() && best.is_none_or(|(_, b)| v < b) {
            best = Some((k, v));
        }
    }
    let (k, _) = best.ok_or_else(|| {
        Error::Numerical("complexity objective is non-finite on the whole alpha grid".into())
    })?;
    let mut lo = grid[k.saturating_sub(1)];
    let mut hi = grid[(k + 1).min(grid.len() - 1)];

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > 1e-12 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    // the bracket ends may beat the interior point when the minimum sits on the boundary
    let candidates = [(grid[k], f(grid[k])), (lo, f(lo)), (hi, f(hi)), (x1, f1), (x2, f2)];
    let (a, v) = candidates
        .into_iter()
        .filter(|(_, v)| v.is_finite())
        .fold((f64::NAN, f64::INFINITY), |acc, c| if c.1 < acc.1 { c } else { acc });
    Ok((a, v))
}

/// Sufficient matrix-product rank for accuracy `epsilon`, at least 1.
pub fn sufficient_rank(p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    let (_, ln_r) = minimize_alpha(|a| ln_rank_objective(p, a))?;
    Ok(ln_r.exp().max(1.0))
}

/// Result of the effective-dimension minimisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityEstimate {
    /// Minimised objective, clamped below at 1.
    pub d_er: f64,
    /// Smallest integer not below `d_er` (up to [`CEIL_SNAP`]).
    pub d_er_ceil: f64,
    /// `ceil(log2(d_er_ceil))`
    pub qubits: u32,
    pub r_suff: f64,
    pub alpha_star: f64,
}

impl ComplexityEstimate {
    pub fn log2_d_er(&self) -> f64 {
        self.d_er.log2()
    }
}

pub fn snapped_ceil(x: f64) -> f64 {
    (x * (1.0 - CEIL_SNAP)).ceil().max(1.0)
}

/// Effective reservoir dimension and the companion quantities.
pub fn effective_dimension(p: &PhysicalParams) -> Result<ComplexityEstimate> {
    p.validate()?;
    let (alpha_star, ln_d) = minimize_alpha(|a| ln_dimension_objective(p, a))?;
    let d_er = ln_d.exp().max(1.0);
    if !d_er.is_finite() {
        return Err(Error::Numerical(format!(
            "effective dimension overflows (ln d = {ln_d:.3}) for n*gamma*T = {}, gamma*tau = {}",
            p.n_gamma_t(),
            p.gamma_tau()
        )));
    }
    let d_er_ceil = snapped_ceil(d_er);
    let qubits = d_er_ceil.log2().ceil() as u32;
    let r_suff = sufficient_rank(p)?;
    Ok(ComplexityEstimate {
        d_er,
        d_er_ceil,
        qubits,
        r_suff,
        alpha_star,
    })
}

/// Grid of `log2(d_er)` over log-spaced `n gamma T` and `gamma tau` axes.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapGrid {
    pub ngt_axis: Vec<f64>,
    pub gt_axis: Vec<f64>,
    /// `cells[i][j]` is `log2(d_er)` at `ngt_axis[i]`, `gt_axis[j]`.
    pub cells: Vec<Vec<f64>>,
    /// Integer qubit counts `ceil(log2(d_er_ceil))` on the same grid.
    pub qubits: Vec<Vec<u32>>,
    pub epsilon: f64,
}

/// A pair of neighbouring cells that breaks the expected ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityViolation {
    pub from: (usize, usize),
    pub to: (usize, usize),
    pub values: (f64, f64),
}

impl HeatmapGrid {
    /// Cells must not decrease with `n gamma T` and must not increase with `gamma tau`.
    pub fn monotonicity_violations(&self) -> Vec<MonotonicityViolation> {
        let mut out = Vec::new();
        for i in 0..self.ngt_axis.len() {
            for j in 0..self.gt_axis.len() {
                let v = self.cells[i][j];
                if i + 1 < self.ngt_axis.len() && self.cells[i + 1][j] < v {
                    out.push(MonotonicityViolation {
                        from: (i, j),
                        to: (i + 1, j),
                        values: (v, self.cells[i + 1][j]),
                    });
                }
                if j + 1 < self.gt_axis.len() && self.cells[i][j + 1] > v {
                    out.push(MonotonicityViolation {
                        from: (i, j),
                        to: (i, j + 1),
                        values: (v, self.cells[i][j + 1]),
                    });
                }
            }
        }
        out
    }
}

pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| {
            if k == count - 1 {
                hi
            } else {
                (a + (b - a) * k as f64 / (count - 1) as f64).exp()
            }
        })
        .collect()
}

/// Default axis ranges for the heatmap.
pub const DEFAULT_NGT_RANGE: (f64, f64) = (1e-2, 10.0);
pub const DEFAULT_GT_RANGE: (f64, f64) = (1e-3, 1e-1);
pub const DEFAULT_RESOLUTION: usize = 64;

/// Evaluates the effective dimension on a `resolution x resolution` log grid.
///
/// A single-point range (`lo == hi`) with resolution 1 yields a 1x1 grid.
/// Cells are computed in parallel on the current rayon pool; placement is
/// deterministic.
pub fn heatmap(
    ngt_range: (f64, f64),
    gt_range: (f64, f64),
    resolution: usize,
    epsilon: f64,
) -> Result<HeatmapGrid> {
    let single = ngt_range.0 == ngt_range.1 && gt_range.0 == gt_range.1;
    if resolution < 2 && !(single && resolution == 1) {
        return Err(Error::Validation(format!("heatmap resolution must be at least 2, got {resolution}")));
    }
    for (name, (lo, hi)) in [("n*gamma*T", ngt_range), ("gamma*tau", gt_range)] {
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Validation(format!(
                "{name} range must be positive and ordered, got [{lo}, {hi}]"
            )));
        }
    }
    let ngt_axis = logspace(ngt_range.0, ngt_range.1, resolution);
    let gt_axis = logspace(gt_range.0, gt_range.1, resolution);
    let coords: Vec<(usize, usize)> = (0..resolution)
        .flat_map(|i| (0..resolution).map(move |j| (i, j)))
        .collect();
    let results: Vec<Result<ComplexityEstimate>> = coords
        .par_iter()
        .map(|&(i, j)| {
            PhysicalParams::from_dimensionless(1, ngt_axis[i], gt_axis[j], epsilon)
                .and_then(|p| effective_dimension(&p))
                .map_err(|e| annotate(e, i, j, ngt_axis[i], gt_axis[j]))
        })
        .collect();
    let mut cells = vec![vec![0.0; resolution]; resolution];
    let mut qubits = vec![vec![0; resolution]; resolution];
    for (&(i, j), r) in coords.iter().zip(results) {
        let est = r?;
        cells[i][j] = est.log2_d_er();
        qubits[i][j] = est.qubits;
    }
    Ok(HeatmapGrid {
        ngt_axis,
        gt_axis,
        cells,
        qubits,
        epsilon,
    })
}

fn annotate(e: Error, i: usize, j: usize, ngt: f64, gt: f64) -> Error {
    let at = format!(" at cell ({i}, {j}), n*gamma*T = {ngt}, gamma*tau = {gt}");
    match e {
        Error::Numerical(m) => Error::Numerical(m + &at),
        Error::Validation(m) => Error::Validation(m + &at),
        other => other,
    }
}
