//! Trotterized system-reservoir dynamics and the timeline reservoir network.
//!
//! Each Trotter step applies the first-order interaction layer
//! `Phi_int = sum_i A_i (x) B_i` and then the free layer `Phi_0`. Summing the
//! reservoir out of the resulting chain gives a matrix-product object whose
//! sites are time steps and whose physical index `i` runs over the `2n + 1`
//! interaction terms. This module builds the layers, the network, its Schmidt
//! spectra and truncations, and contracts the network back with the system.
//!
//! Vectorized operators on the joint space are kept in the split ordering
//! `(s, s', r, r')` so that `A_i` acts on the first factor and `B_i` on the
//! second. [`to_split`] and [`from_split`] convert from and to the row-major
//! vectorization of the joint density matrix.

mod entropy;
mod mps;

pub use entropy::{
    decomposition_bound, renyi_entropy, renyi_entropy_of_matrix, truncation_bound,
    SchmidtSpectrum, ALPHA_GRID,
};
pub use mps::{build_trn, contract_with_system, truncate, SiteTensor, TimelineMps};

use rand::Rng;

use crate::algebra::{kron, svd, unitary, vectorize, ComplexMatrix, C64, I, ZERO};
use crate::error::{Error, Result};
use crate::lindblad::{partial_trace, validate_density, Keep};

/// Largest reservoir dimension accepted for network construction.
pub const MAX_RESERVOIR_DIM: usize = 8;
/// Largest number of Trotter steps accepted for network construction.
pub const MAX_STEPS: usize = 64;
/// Largest `gamma * tau` accepted for the first-order interaction layer.
pub const MAX_GAMMA_TAU: f64 = 0.1;

/// System, stand-in reservoir, couplings and a (possibly correlated) initial
/// state `rho(0) = sum_l sigma_S^(l) (x) sigma_R^(l)`.
#[derive(Debug, Clone)]
pub struct CoupledModel {
    pub hs: ComplexMatrix,
    pub hr: ComplexMatrix,
    /// Pairs `(A_i, B_i)`; the interaction is `gamma * sum_i A_i (x) B_i`.
    pub couplings: Vec<(ComplexMatrix, ComplexMatrix)>,
    pub gamma: f64,
    pub initial: Vec<(ComplexMatrix, ComplexMatrix)>,
}

fn check_hermitian(name: &str, m: &ComplexMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Validation(format!("{name} must be square, got {:?}", m.shape())));
    }
    let defect = m.hermiticity_defect();
    if defect > 1e-12 * m.max_abs().max(1.0) {
        return Err(Error::Validation(format!("{name} is not Hermitian (defect {defect:.3e})")));
    }
    Ok(())
}

impl CoupledModel {
    pub fn new(
        hs: ComplexMatrix,
        hr: ComplexMatrix,
        couplings: Vec<(ComplexMatrix, ComplexMatrix)>,
        gamma: f64,
        initial: Vec<(ComplexMatrix, ComplexMatrix)>,
    ) -> Result<Self> {
        let m = Self {
            hs,
            hr,
            couplings,
            gamma,
            initial,
        };
        m.validate()?;
        Ok(m)
    }

    /// Model with an uncorrelated initial state `rho_s (x) rho_r`.
    pub fn product(
        hs: ComplexMatrix,
        hr: ComplexMatrix,
        couplings: Vec<(ComplexMatrix, ComplexMatrix)>,
        gamma: f64,
        rho_s: ComplexMatrix,
        rho_r: ComplexMatrix,
    ) -> Result<Self> {
        Self::new(hs, hr, couplings, gamma, vec![(rho_s, rho_r)])
    }

    /// Splits a joint initial state into system and reservoir terms by an
    /// operator Schmidt decomposition.
    pub fn from_joint_state(
        hs: ComplexMatrix,
        hr: ComplexMatrix,
        couplings: Vec<(ComplexMatrix, ComplexMatrix)>,
        gamma: f64,
        rho: &ComplexMatrix,
    ) -> Result<Self> {
        let (ds, dr) = (hs.rows(), hr.rows());
        let initial = operator_schmidt(rho, ds, dr)?;
        Self::new(hs, hr, couplings, gamma, initial)
    }

    /// Random model with Hermitian couplings of unit spectral norm.
    pub fn random<R: Rng + ?Sized>(
        ds: usize,
        dr: usize,
        n: usize,
        gamma: f64,
        correlated: bool,
        rng: &mut R,
    ) -> Result<Self> {
        let hs = ComplexMatrix::random_hermitian(ds, rng);
        let hr = ComplexMatrix::random_hermitian(dr, rng);
        let unit = |m: ComplexMatrix| -> Result<ComplexMatrix> {
            let s = svd(&m)?.s[0];
            Ok(m.scale_real(1.0 / s))
        };
        let mut couplings = Vec::with_capacity(n);
        for _ in 0..n {
            let a = unit(ComplexMatrix::random_hermitian(ds, rng))?;
            let b = unit(ComplexMatrix::random_hermitian(dr, rng))?;
            couplings.push((a, b));
        }
        if correlated {
            let rho = ComplexMatrix::random_density(ds * dr, rng);
            Self::from_joint_state(hs, hr, couplings, gamma, &rho)
        } else {
            let rs = ComplexMatrix::random_density(ds, rng);
            let rr = ComplexMatrix::random_density(dr, rng);
            Self::product(hs, hr, couplings, gamma, rs, rr)
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_hermitian("H_S", &self.hs)?;
        check_hermitian("H_R", &self.hr)?;
        let (ds, dr) = (self.hs.rows(), self.hr.rows());
        if self.couplings.is_empty() {
            return Err(Error::Validation("at least one coupling term is required".into()));
        }
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(Error::Validation(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        for (k, (a, b)) in self.couplings.iter().enumerate() {
            if a.shape() != (ds, ds) || b.shape() != (dr, dr) {
                return Err(Error::Validation(format!(
                    "coupling {k} has shapes {:?} and {:?}, expected {ds}x{ds} and {dr}x{dr}",
                    a.shape(),
                    b.shape()
                )));
            }
        }
        check_hermitian("H_int", &self.interaction())?;
        if self.initial.is_empty() {
            return Err(Error::Validation("initial state has no terms".into()));
        }
        for (k, (s, r)) in self.initial.iter().enumerate() {
            if s.shape() != (ds, ds) || r.shape() != (dr, dr) {
                return Err(Error::Validation(format!("initial term {k} has wrong shape")));
            }
        }
        validate_density(&self.initial_state(), ds * dr, 1e-10)
    }

    pub fn system_dim(&self) -> usize {
        self.hs.rows()
    }

    pub fn reservoir_dim(&self) -> usize {
        self.hr.rows()
    }

    pub fn n(&self) -> usize {
        self.couplings.len()
    }

    /// `sum_i A_i (x) B_i`, without the factor `gamma`.
    pub fn interaction(&self) -> ComplexMatrix {
        let (ds, dr) = (self.system_dim(), self.reservoir_dim());
        let mut h = ComplexMatrix::zeros(ds * dr, ds * dr);
        for (a, b) in &self.couplings {
            h = &h + &kron(a, b).expect("dims are small");
        }
        h
    }

    /// `H_S (x) 1 + 1 (x) H_R + gamma * sum_i A_i (x) B_i`
    pub fn total_hamiltonian(&self) -> ComplexMatrix {
        let (ds, dr) = (self.system_dim(), self.reservoir_dim());
        let free = &kron(&self.hs, &ComplexMatrix::identity(dr)).expect("dims are small")
            + &kron(&ComplexMatrix::identity(ds), &self.hr).expect("dims are small");
        &free + &self.interaction().scale_real(self.gamma)
    }

    pub fn initial_state(&self) -> ComplexMatrix {
        let (ds, dr) = (self.system_dim(), self.reservoir_dim());
        let mut rho = ComplexMatrix::zeros(ds * dr, ds * dr);
        for (s, r) in &self.initial {
            rho = &rho + &kron(s, r).expect("dims are small");
        }
        rho
    }

    pub fn system_initial(&self) -> Vec<ComplexMatrix> {
        self.initial.iter().map(|(s, _)| s.clone()).collect()
    }
}

/// `rho = sum_l sigma_S^(l) (x) sigma_R^(l)` with the fewest terms.
pub fn operator_schmidt(
    rho: &ComplexMatrix,
    ds: usize,
    dr: usize,
) -> Result<Vec<(ComplexMatrix, ComplexMatrix)>> {
    let d = ds * dr;
    if rho.shape() != (d, d) {
        return Err(Error::Shape(format!("joint state must be {d}x{d}, got {:?}", rho.shape())));
    }
    // rows (j_S, k_S), columns (j_R, k_R)
    let m = ComplexMatrix::from_fn(ds * ds, dr * dr, |row, col| {
        let (js, ks) = (row / ds, row % ds);
        let (jr, kr) = (col / dr, col % dr);
        rho[(js * dr + jr, ks * dr + kr)]
    });
    let dec = svd(&m)?;
    let cutoff = 1e-14 * dec.s.first().copied().unwrap_or(0.0);
    let mut terms = Vec::new();
    for (l, &s) in dec.s.iter().enumerate() {
        if s <= cutoff {
            break;
        }
        let sys = ComplexMatrix::from_fn(ds, ds, |j, k| dec.u[(j * ds + k, l)] * s);
        let res = ComplexMatrix::from_fn(dr, dr, |j, k| dec.vh[(l, j * dr + k)]);
        terms.push((sys, res));
    }
    Ok(terms)
}

/// Row-major joint vectorization to the split `(s, s', r, r')` ordering.
pub fn to_split(v: &[C64], ds: usize, dr: usize) -> Result<Vec<C64>> {
    let d = ds * dr;
    if v.len() != d * d {
        return Err(Error::Shape(format!("expected length {}, got {}", d * d, v.len())));
    }
    let mut out = vec![ZERO; d * d];
    for js in 0..ds {
        for jr in 0..dr {
            for ks in 0..ds {
                for kr in 0..dr {
                    let std = (js * dr + jr) * d + ks * dr + kr;
                    let split = (js * ds + ks) * dr * dr + jr * dr + kr;
                    out[split] = v[std];
                }
            }
        }
    }
    Ok(out)
}

/// Inverse of [`to_split`].
pub fn from_split(v: &[C64], ds: usize, dr: usize) -> Result<Vec<C64>> {
    let d = ds * dr;
    if v.len() != d * d {
        return Err(Error::Shape(format!("expected length {}, got {}", d * d, v.len())));
    }
    let mut out = vec![ZERO; d * d];
    for js in 0..ds {
        for jr in 0..dr {
            for ks in 0..ds {
                for kr in 0..dr {
                    let std = (js * dr + jr) * d + ks * dr + kr;
                    let split = (js * ds + ks) * dr * dr + jr * dr + kr;
                    out[std] = v[split];
                }
            }
        }
    }
    Ok(out)
}

/// Factors of one Trotter step in the split ordering.
#[derive(Debug, Clone)]
pub struct TrotterLayers {
    pub tau: f64,
    /// `exp(-i tau H_S) (x) exp(i tau H_S^T)`
    pub phi0_sys: ComplexMatrix,
    /// `exp(-i tau H_R) (x) exp(i tau H_R^T)`
    pub phi0_res: ComplexMatrix,
    pub a_ops: Vec<ComplexMatrix>,
    pub b_ops: Vec<ComplexMatrix>,
    ds: usize,
    dr: usize,
}

impl TrotterLayers {
    pub fn system_dim(&self) -> usize {
        self.ds
    }

    pub fn reservoir_dim(&self) -> usize {
        self.dr
    }

    /// Physical dimension `2n + 1` of the network sites.
    pub fn terms(&self) -> usize {
        self.a_ops.len()
    }

    /// `sum_i A_i (x) B_i` on the split space.
    pub fn phi_int(&self) -> ComplexMatrix {
        let n = self.ds * self.ds * self.dr * self.dr;
        let mut out = ComplexMatrix::zeros(n, n);
        for (a, b) in self.a_ops.iter().zip(&self.b_ops) {
            out = &out + &kron(a, b).expect("dims are small");
        }
        out
    }

    pub fn phi0(&self) -> ComplexMatrix {
        kron(&self.phi0_sys, &self.phi0_res).expect("dims are small")
    }

    /// One step on a split-ordered vector viewed as a `ds^2 x dr^2` matrix.
    fn step(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut y = ComplexMatrix::zeros(x.rows(), x.cols());
        for (a, b) in self.a_ops.iter().zip(&self.b_ops) {
            // (A (x) B) vec(X) = vec(A X B^T)
            y = &y + &(&(a * x) * &b.transpose());
        }
        &(&self.phi0_sys * &y) * &self.phi0_res.transpose()
    }
}

/// Builds `Phi_0` and the `2n + 1` pairs `(A_i, B_i)` of the interaction layer.
pub fn build_trotter_layers(m: &CoupledModel, tau: f64) -> Result<TrotterLayers> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Validation(format!("tau must be positive, got {tau}")));
    }
    let gt = m.gamma * tau;
    if gt > MAX_GAMMA_TAU {
        return Err(Error::Step(format!(
            "gamma*tau = {gt} exceeds {MAX_GAMMA_TAU}; the first-order layer is not accurate"
        )));
    }
    let (ds, dr) = (m.system_dim(), m.reservoir_dim());
    let us = unitary(&m.hs, tau)?;
    let ur = unitary(&m.hr, tau)?;
    let phi0_sys = kron(&us, &us.conj())?;
    let phi0_res = kron(&ur, &ur.conj())?;

    let is = ComplexMatrix::identity(ds);
    let ir = ComplexMatrix::identity(dr);
    let root = gt.sqrt();
    let mut a_ops = vec![ComplexMatrix::identity(ds * ds)];
    let mut b_ops = vec![ComplexMatrix::identity(dr * dr)];
    for (a, b) in &m.couplings {
        a_ops.push(kron(a, &is)?.scale_real(root));
        b_ops.push(kron(b, &ir)?.scale(-I * root));
    }
    for (a, b) in &m.couplings {
        a_ops.push(kron(&is, &a.transpose())?.scale_real(root));
        b_ops.push(kron(&ir, &b.transpose())?.scale(I * root));
    }
    Ok(TrotterLayers {
        tau,
        phi0_sys,
        phi0_res,
        a_ops,
        b_ops,
        ds,
        dr,
    })
}

/// Applies `(Phi_0 Phi_int)^steps` to a row-major joint vectorized state.
pub fn trotter_propagate(layers: &TrotterLayers, rho0_vec: &[C64], steps: usize) -> Result<Vec<C64>> {
    let (ds, dr) = (layers.ds, layers.dr);
    let split = to_split(rho0_vec, ds, dr)?;
    let mut x = ComplexMatrix::from_vec(ds * ds, dr * dr, split)?;
    for _ in 0..steps {
        x = layers.step(&x);
    }
    from_split(&x.into_vec(), ds, dr)
}

/// Every intermediate state `rho(k tau)`, `k = 0..=steps`.
pub fn trotter_trajectory(layers: &TrotterLayers, rho0_vec: &[C64], steps: usize) -> Result<Vec<Vec<C64>>> {
    let (ds, dr) = (layers.ds, layers.dr);
    let split = to_split(rho0_vec, ds, dr)?;
    let mut x = ComplexMatrix::from_vec(ds * ds, dr * dr, split)?;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(from_split(x.as_slice(), ds, dr)?);
    for _ in 0..steps {
        x = layers.step(&x);
        out.push(from_split(x.as_slice(), ds, dr)?);
    }
    Ok(out)
}

/// Reduced system state of a row-major joint vectorized state.
pub fn reduce_to_system(v: &[C64], ds: usize, dr: usize) -> Result<ComplexMatrix> {
    let d = ds * dr;
    let rho = ComplexMatrix::from_vec(d, d, v.to_vec())?;
    partial_trace(&rho, (ds, dr), Keep::A)
}

/// Exact joint evolution `exp(-i t H) rho exp(i t H)`, vectorized.
pub fn exact_propagate(m: &CoupledModel, t: f64) -> Result<Vec<C64>> {
    let u = unitary(&m.total_hamiltonian(), t)?;
    let rho = &(&u * &m.initial_state()) * &u.adjoint();
    vectorize(&rho)
}
