use crate::algebra::{eigh, ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Renyi orders at which truncation bounds are checked.
pub const ALPHA_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Squared Schmidt coefficients across one cut of a unit-norm state,
/// non-increasing and summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    /// Number of sites (including the initial-state site) left of the cut.
    pub cut: usize,
    pub values: Vec<f64>,
}

impl SchmidtSpectrum {
    pub fn new(cut: usize, mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Self { cut, values }
    }

    pub fn rank(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Weight beyond the `r` largest values.
    pub fn discarded_weight(&self, r: usize) -> f64 {
        self.values.iter().skip(r).sum()
    }

    pub fn von_neumann(&self) -> f64 {
        -self
            .values
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| v * v.ln())
            .sum::<f64>()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("Renyi order must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn renyi_of_values(values: impl Iterator<Item = f64>, alpha: f64) -> f64 {
    let sum: f64 = values.filter(|&v| v > 0.0).map(|v| v.powf(alpha)).sum();
    sum.ln() / (1.0 - alpha)
}

/// `ln(sum_k lambda_k^alpha) / (1 - alpha)` in nats.
pub fn renyi_entropy(spec: &SchmidtSpectrum, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(renyi_of_values(spec.values.iter().copied(), alpha))
}

/// Renyi entropy of a positive semidefinite matrix from its eigenvalues.
/// Eigenvalues below `1e-14` times the largest are treated as zero.
pub fn renyi_entropy_of_matrix(m: &ComplexMatrix, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let values = eigh(m)?.values;
    let top = values.iter().fold(0.0f64, |a, &b| a.max(b));
    let floor = 1e-14 * top;
    Ok(renyi_of_values(values.into_iter().filter(|&v| v > floor), alpha))
}

/// `ln(sum_q (v_q^H v_q)^alpha) / (1 - alpha)` for `M = sum_q v_q v_q^H`.
///
/// This majorization bound dominates the Renyi entropy of `M` when `M` has
/// unit trace.
pub fn decomposition_bound(vectors: &[Vec<C64>], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let weights = vectors.iter().map(|v| v.iter().map(|x| x.norm_sqr()).sum::<f64>());
    Ok(renyi_of_values(weights, alpha))
}

/// Right-hand side of the rank-`r` truncation bound,
/// `ln eps(r) <= ((1 - alpha)/alpha) (S_alpha - ln(r/(1 - alpha)))`,
/// with `S_alpha` the largest Renyi entropy over the given cuts.
pub fn truncation_bound(spectra: &[SchmidtSpectrum], r: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if r == 0 {
        return Err(Error::Validation("rank must be at least 1".into()));
    }
    if spectra.is_empty() {
        return Err(Error::Validation("no Schmidt spectra given".into()));
    }
    let s = spectra
        .iter()
        .map(|sp| renyi_of_values(sp.values.iter().copied(), alpha))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((1.0 - alpha) / alpha * (s - (r as f64 / (1.0 - alpha)).ln()))
}
