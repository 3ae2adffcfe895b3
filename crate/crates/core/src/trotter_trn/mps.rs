use crate::algebra::{svd, vectorize, ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};
use crate::lindblad::{trace_functional, Trajectory};

use super::entropy::{decomposition_bound, SchmidtSpectrum};
use super::{build_trotter_layers, CoupledModel, TrotterLayers, MAX_RESERVOIR_DIM, MAX_STEPS};

/// Largest dense `psi` the explicit-state helpers will build.
const DENSE_BUDGET: usize = 1 << 22;
/// Relative floor below which singular values are not inverted.
const PINV_FLOOR: f64 = 1e-13;
/// Singular values below this multiple of the largest are rounding noise.
const NOISE_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Three-index tensor `(left bond, physical, right bond)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor {
    left: usize,
    phys: usize,
    right: usize,
    data: Vec<C64>,
}

impl SiteTensor {
    pub fn zeros(left: usize, phys: usize, right: usize) -> Self {
        Self {
            left,
            phys,
            right,
            data: vec![ZERO; left * phys * right],
        }
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.left, self.phys, self.right)
    }

    pub fn get(&self, a: usize, i: usize, b: usize) -> C64 {
        self.data[(a * self.phys + i) * self.right + b]
    }

    fn set(&mut self, a: usize, i: usize, b: usize, v: C64) {
        self.data[(a * self.phys + i) * self.right + b] = v;
    }

    /// `(left * phys) x right` view.
    pub fn left_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_vec(self.left * self.phys, self.right, self.data.clone())
            .expect("consistent shape")
    }

    /// `left x (phys * right)` view.
    pub fn right_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_vec(self.left, self.phys * self.right, self.data.clone())
            .expect("consistent shape")
    }

    fn from_matrix(m: ComplexMatrix, left: usize, phys: usize, right: usize) -> Self {
        debug_assert_eq!(m.rows() * m.cols(), left * phys * right);
        Self {
            left,
            phys,
            right,
            data: m.into_vec(),
        }
    }

    /// Matrix `left x right` at physical index `i`.
    pub fn slice(&self, i: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.left, self.right, |a, b| self.get(a, i, b))
    }

    fn contract_right(&self, m: &ComplexMatrix) -> Self {
        let out = &self.left_matrix() * m;
        let right = out.cols();
        Self::from_matrix(out, self.left, self.phys, right)
    }

    fn contract_left(&self, m: &ComplexMatrix) -> Self {
        let out = m * &self.right_matrix();
        let left = out.rows();
        Self::from_matrix(out, left, self.phys, self.right)
    }
}

/// Timeline reservoir network of a finite stand-in reservoir.
///
/// Contracting `left_boundary`, the `sites` and `right_boundary` gives the
/// network tensor `TRN[l, i_1, ..., i_N]`; dividing by `normalization` gives
/// the unit-norm state `psi`. After truncation the contraction gives
/// `normalization * psi_r` with `psi_r` the truncated (not renormalised) state.
#[derive(Debug, Clone)]
pub struct TimelineMps {
    /// Rows are initial-state terms `l`, columns the first bond.
    pub left_boundary: ComplexMatrix,
    pub sites: Vec<SiteTensor>,
    pub right_boundary: Vec<C64>,
    pub normalization: f64,
    /// Reservoir trace functional on each bond, for readout at intermediate steps.
    trace_functionals: Vec<Vec<C64>>,
}

impl TimelineMps {
    pub fn steps(&self) -> usize {
        self.sites.len()
    }

    /// Number of initial-state terms.
    pub fn initial_terms(&self) -> usize {
        self.left_boundary.rows()
    }

    pub fn physical_dim(&self) -> Option<usize> {
        self.sites.first().map(|s| s.phys)
    }

    /// Bond dimensions from the left boundary to the right boundary, `N + 1` entries.
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.left_boundary.cols()];
        dims.extend(self.sites.iter().map(|s| s.right));
        dims
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(0)
    }

    pub fn trace_functional(&self, bond: usize) -> Option<&[C64]> {
        self.trace_functionals.get(bond).map(|v| v.as_slice())
    }

    /// Chain with the left boundary as site 0 and the right boundary absorbed
    /// into the last site.
    fn chain(&self) -> (Vec<SiteTensor>, Vec<Vec<C64>>) {
        let nl = self.left_boundary.rows();
        let d0 = self.left_boundary.cols();
        let mut chain = Vec::with_capacity(self.sites.len() + 1);
        chain.push(SiteTensor::from_matrix(self.left_boundary.clone(), 1, nl, d0));
        chain.extend(self.sites.iter().cloned());
        let rb = ComplexMatrix::column(&self.right_boundary);
        let last = chain.len() - 1;
        chain[last] = chain[last].contract_right(&rb);
        let mut tf = self.trace_functionals.clone();
        let n = tf.len() - 1;
        tf[n] = vec![C64::new(1.0, 0.0)];
        (chain, tf)
    }

    /// Left-canonical sweep over all but the last site; returns the network norm.
    fn left_canonicalize(chain: &mut [SiteTensor], tf: &mut [Vec<C64>]) -> Result<f64> {
        let last = chain.len() - 1;
        for k in 0..last {
            let (left, phys, _) = chain[k].shape();
            let dec = svd(&chain[k].left_matrix())?;
            let q = dec.s.len();
            let r = ComplexMatrix::from_fn(q, dec.vh.cols(), |j, b| dec.vh[(j, b)] * dec.s[j]);
            chain[k] = SiteTensor::from_matrix(dec.u, left, phys, q);
            chain[k + 1] = chain[k + 1].contract_left(&r);
            tf[k] = r.apply(&tf[k]);
        }
        Ok(chain[last].left_matrix().norm_fro())
    }

    /// Right-to-left sweep keeping at most `rank` values per bond. Returns the
    /// normalised spectra of bonds `N-1, ..., 0` and the discarded weight.
    fn right_sweep(
        chain: &mut [SiteTensor],
        tf: &mut [Vec<C64>],
        norm: f64,
        rank: usize,
    ) -> Result<(Vec<SchmidtSpectrum>, f64)> {
        let mut spectra = Vec::with_capacity(chain.len());
        let mut discarded = 0.0;
        for k in (1..chain.len()).rev() {
            let (_, phys, right) = chain[k].shape();
            let dec = svd(&chain[k].right_matrix())?;
            let q = dec.s.len();
            let keep = rank.min(q);
            let noise = NOISE_FLOOR * dec.s.first().copied().unwrap_or(0.0);
            let weights: Vec<f64> = dec
                .s
                .iter()
                .map(|&s| if s > noise { (s / norm).powi(2) } else { 0.0 })
                .collect();
            discarded += weights[keep..].iter().sum::<f64>();
            spectra.push(SchmidtSpectrum::new(k - 1, weights));

            let vh = dec.vh.block(0, 0, keep, dec.vh.cols());
            chain[k] = SiteTensor::from_matrix(vh, keep, phys, right);
            let us = ComplexMatrix::from_fn(dec.u.rows(), keep, |a, j| dec.u[(a, j)] * dec.s[j]);
            chain[k - 1] = chain[k - 1].contract_right(&us);
            let floor = PINV_FLOOR * dec.s.first().copied().unwrap_or(0.0);
            let pinv = ComplexMatrix::from_fn(keep, dec.u.rows(), |j, a| {
                if dec.s[j] > floor {
                    dec.u[(a, j)].conj() / dec.s[j]
                } else {
                    ZERO
                }
            });
            tf[k - 1] = pinv.apply(&tf[k - 1]);
        }
        Ok((spectra, discarded))
    }

    /// Norm of the network tensor from transfer matrices.
    pub fn norm(&self) -> f64 {
        let mut env = &self.left_boundary.adjoint() * &self.left_boundary;
        for site in &self.sites {
            let mut next = ComplexMatrix::zeros(site.right, site.right);
            for i in 0..site.phys {
                let w = site.slice(i);
                next = &next + &(&(&w.adjoint() * &env) * &w);
            }
            env = next;
        }
        let rb = &self.right_boundary;
        let v = env.apply(rb);
        rb.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<C64>().re.max(0.0).sqrt()
    }

    /// Schmidt spectra of the unit-normalised state at bonds `0, ..., N-1`.
    pub fn schmidt_spectra(&self) -> Result<Vec<SchmidtSpectrum>> {
        if self.sites.is_empty() {
            return Ok(Vec::new());
        }
        let (mut chain, mut tf) = self.chain();
        let norm = Self::left_canonicalize(&mut chain, &mut tf)?;
        if !(norm > 0.0) {
            return Err(Error::Numerical("network has zero norm".into()));
        }
        let (mut spectra, _) = Self::right_sweep(&mut chain, &mut tf, norm, usize::MAX)?;
        spectra.reverse();
        Ok(spectra)
    }

    /// Schmidt spectrum across the cut after site `m` (the initial-state
    /// index plus the first `m` time steps on the left), `0 < m < N`.
    pub fn schmidt_cut(&self, m: usize) -> Result<SchmidtSpectrum> {
        let n = self.steps();
        if m == 0 || m >= n {
            return Err(Error::Range(format!("cut {m} is outside 1..{n}")));
        }
        Ok(self.schmidt_spectra()?.swap_remove(m))
    }

    /// Explicit network tensor, index order `(l, i_1, ..., i_N)`.
    pub fn to_dense(&self) -> Result<Vec<C64>> {
        let p = self.physical_dim().unwrap_or(1);
        let size = (0..self.steps()).try_fold(self.initial_terms(), |acc, _| acc.checked_mul(p));
        match size {
            Some(s) if s <= DENSE_BUDGET => {}
            _ => {
                return Err(Error::Size(format!(
                    "dense network with {} steps exceeds the {DENSE_BUDGET} entry budget",
                    self.steps()
                )))
            }
        }
        let mut acc = self.left_boundary.clone();
        for site in &self.sites {
            let rows = acc.rows();
            let next = ComplexMatrix::from_fn(rows * site.phys, site.right, |row, b| {
                let (c, i) = (row / site.phys, row % site.phys);
                (0..site.left).map(|a| acc[(c, a)] * site.get(a, i, b)).sum()
            });
            acc = next;
        }
        Ok(acc.apply(&self.right_boundary))
    }

    /// Majorization bound on `S_alpha` at cut `m` evaluated on the explicit
    /// unit-norm state: columns of the `(left, right)` unfolding serve as the
    /// decomposition vectors.
    pub fn column_weight_bound(&self, m: usize, alpha: f64) -> Result<f64> {
        let n = self.steps();
        if m == 0 || m >= n {
            return Err(Error::Range(format!("cut {m} is outside 1..{n}")));
        }
        let psi = self.to_dense()?;
        let p = self.physical_dim().unwrap_or(1);
        let right = p.pow((n - m) as u32);
        let left = psi.len() / right;
        let norm: f64 = psi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        let columns: Vec<Vec<C64>> = (0..right)
            .map(|q| (0..left).map(|row| psi[row * right + q] / norm).collect())
            .collect();
        decomposition_bound(&columns, alpha)
    }
}

/// Builds the network of `steps` Trotter steps of size `tau`.
pub fn build_trn(m: &CoupledModel, tau: f64, steps: usize) -> Result<TimelineMps> {
    let dr = m.reservoir_dim();
    if dr > MAX_RESERVOIR_DIM || steps > MAX_STEPS {
        return Err(Error::Size(format!(
            "network with d_R = {dr} and {steps} steps exceeds the budget d_R <= {MAX_RESERVOIR_DIM}, steps <= {MAX_STEPS}"
        )));
    }
    let layers = build_trotter_layers(m, tau)?;
    let d = dr * dr;
    let p = layers.terms();
    let rows: Vec<Vec<C64>> = m
        .initial
        .iter()
        .map(|(_, r)| vectorize(r))
        .collect::<Result<_>>()?;
    let left_boundary = ComplexMatrix::from_fn(rows.len(), d, |l, a| rows[l][a]);

    let mut site = SiteTensor::zeros(d, p, d);
    for (i, b) in layers.b_ops.iter().enumerate() {
        let step = &layers.phi0_res * b;
        for a in 0..d {
            for bb in 0..d {
                site.set(a, i, bb, step[(bb, a)]);
            }
        }
    }
    let psi_plus = trace_functional(dr);
    let mut trn = TimelineMps {
        left_boundary,
        sites: vec![site; steps],
        right_boundary: psi_plus.clone(),
        normalization: 1.0,
        trace_functionals: vec![psi_plus; steps + 1],
    };
    trn.normalization = trn.norm();
    if !(trn.normalization > 0.0) || !trn.normalization.is_finite() {
        return Err(Error::Numerical(format!("network norm is {}", trn.normalization)));
    }
    Ok(trn)
}

/// Caps every bond at `r` with a left-canonical sweep followed by a truncating
/// right-to-left sweep. Returns the truncated network and the Frobenius
/// distance between the unit-norm original and truncated states.
pub fn truncate(trn: &TimelineMps, r: usize) -> Result<(TimelineMps, f64)> {
    if r == 0 {
        return Err(Error::Validation("truncation rank must be at least 1".into()));
    }
    if trn.sites.is_empty() {
        return Ok((trn.clone(), 0.0));
    }
    let (mut chain, mut tf) = trn.chain();
    let norm = TimelineMps::left_canonicalize(&mut chain, &mut tf)?;
    if !(norm > 0.0) {
        return Err(Error::Numerical("network has zero norm".into()));
    }
    let (_, discarded) = TimelineMps::right_sweep(&mut chain, &mut tf, norm, r)?;
    let first = chain.remove(0);
    let (_, nl, d0) = first.shape();
    let left_boundary = ComplexMatrix::from_vec(nl, d0, first.data)?;
    let out = TimelineMps {
        left_boundary,
        sites: chain,
        right_boundary: vec![C64::new(1.0, 0.0)],
        normalization: trn.normalization,
        trace_functionals: tf,
    };
    Ok((out, discarded.max(0.0).sqrt()))
}

/// Contracts the network with the system chain and reads out `rho_S` after
/// every step.
pub fn contract_with_system(
    trn: &TimelineMps,
    layers: &TrotterLayers,
    sys_initial: &[ComplexMatrix],
) -> Result<Trajectory> {
    let ds = layers.system_dim();
    if sys_initial.len() != trn.initial_terms() {
        return Err(Error::Shape(format!(
            "{} system initial terms for {} network rows",
            sys_initial.len(),
            trn.initial_terms()
        )));
    }
    if let Some(p) = trn.physical_dim() {
        if p != layers.terms() {
            return Err(Error::Shape(format!(
                "network physical dimension {p} differs from {} interaction terms",
                layers.terms()
            )));
        }
    }
    let mut cols = Vec::with_capacity(sys_initial.len());
    for (l, s) in sys_initial.iter().enumerate() {
        if s.shape() != (ds, ds) {
            return Err(Error::Shape(format!("system term {l} is {:?}, expected {ds}x{ds}", s.shape())));
        }
        cols.push(vectorize(s)?);
    }
    let v = ComplexMatrix::from_fn(ds * ds, cols.len(), |s, l| cols[l][s]);
    let ops: Vec<ComplexMatrix> = layers.a_ops.iter().map(|a| &layers.phi0_sys * a).collect();

    let mut x = &v * &trn.left_boundary;
    let mut states = Vec::with_capacity(trn.steps() + 1);
    let readout = |x: &ComplexMatrix, bond: usize| -> Result<Vec<C64>> {
        let t = &trn.trace_functionals[bond];
        if t.len() != x.cols() {
            return Err(Error::Shape(format!("trace functional on bond {bond} has wrong length")));
        }
        Ok(x.apply(t))
    };
    states.push(readout(&x, 0)?);
    for (k, site) in trn.sites.iter().enumerate() {
        let mut next = ComplexMatrix::zeros(ds * ds, site.right);
        for (i, op) in ops.iter().enumerate() {
            next = &next + &(op * &(&x * &site.slice(i)));
        }
        x = next;
        states.push(readout(&x, k + 1)?);
    }
    let times = (0..states.len()).map(|k| k as f64 * layers.tau).collect();
    Trajectory::with_states_unchecked(times, states)
}
