use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Thin singular value decomposition `a = u * diag(s) * vh`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    /// Non-increasing, non-negative.
    pub s: Vec<f64>,
    pub vh: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let k = self.s.len();
        let us = ComplexMatrix::from_fn(self.u.rows(), k, |i, j| self.u[(i, j)] * self.s[j]);
        &us * &self.vh
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if !a.is_finite() {
        return Err(Error::Numerical("svd input has non-finite entries".into()));
    }
    if a.rows() < a.cols() {
        let t = svd_tall(&a.adjoint())?;
        return Ok(Svd {
            u: t.vh.adjoint(),
            s: t.s,
            vh: t.u.adjoint(),
        });
    }
    svd_tall(a)
}

fn col_dot(w: &[C64], n: usize, p: usize, q: usize, rows: usize) -> C64 {
    let mut acc = ZERO;
    for i in 0..rows {
        acc += w[i * n + p].conj() * w[i * n + q];
    }
    acc
}

fn col_norm_sqr(w: &[C64], n: usize, p: usize, rows: usize) -> f64 {
    (0..rows).map(|i| w[i * n + p].norm_sqr()).sum()
}

#[allow(clippy::too_many_arguments)]
fn rotate_cols(w: &mut [C64], n: usize, rows: usize, p: usize, q: usize, c: f64, s: f64, phase: C64) {
    // (p, q) <- (c p - s e^{-i phi} q, s p + c e^{-i phi} q)
    for i in 0..rows {
        let xp = w[i * n + p];
        let xq = w[i * n + q] * phase;
        w[i * n + p] = xp * c - xq * s;
        w[i * n + q] = xp * s + xq * c;
    }
}

fn svd_tall(a: &ComplexMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    let mut w = a.as_slice().to_vec();
    let mut v = ComplexMatrix::identity(n).into_vec();
    let eps = f64::EPSILON;

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let alpha = col_norm_sqr(&w, n, p, m);
                let beta = col_norm_sqr(&w, n, q, m);
                let gamma = col_dot(&w, n, p, q, m);
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_cols(&mut w, n, m, p, q, c, s, phase);
                rotate_cols(&mut v, n, n, p, q, c, s, phase);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi SVD did not converge in {MAX_SWEEPS} sweeps for a {m}x{n} matrix"
        )));
    }

    let norms: Vec<f64> = (0..n).map(|j| col_norm_sqr(&w, n, j, m).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    let smax = norms.iter().copied().fold(0.0, f64::max);
    let cutoff = smax * eps * (m.max(n) as f64) * 4.0;
    let mut u = ComplexMatrix::zeros(m, n);
    let mut vh = ComplexMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    let mut deficient = Vec::new();
    for (k, &j) in order.iter().enumerate() {
        s.push(norms[j]);
        for i in 0..n {
            vh[(k, i)] = v[i * n + j].conj();
        }
        if norms[j] > cutoff && norms[j] > 0.0 {
            for i in 0..m {
                u[(i, k)] = w[i * n + j] / norms[j];
            }
        } else {
            deficient.push(k);
        }
    }
    complete_columns(&mut u, &deficient);
    Ok(Svd { u, s, vh })
}

/// Fills the listed columns of `u` with unit vectors orthogonal to all other columns.
fn complete_columns(u: &mut ComplexMatrix, missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let (m, n) = u.shape();
    let mut filled: Vec<usize> = (0..n).filter(|k| !missing.contains(k)).collect();
    let mut seed = 0usize;
    for &k in missing {
        loop {
            let mut cand = vec![ZERO; m];
            cand[seed % m] = C64::new(1.0, 0.0);
            seed += 1;
            for _ in 0..2 {
                for &f in &filled {
                    let col = u.col(f);
                    let proj: C64 = col.iter().zip(&cand).map(|(x, y)| x.conj() * y).sum();
                    for (c, x) in cand.iter_mut().zip(&col) {
                        *c -= proj * x;
                    }
                }
            }
            let nrm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nrm > 1e-8 {
                for c in cand.iter_mut() {
                    *c /= nrm;
                }
                u.set_col(k, &cand);
                filled.push(k);
                break;
            }
            if seed > 4 * m {
                // no room left, u has more columns than rows
                break;
            }
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues, eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

/// Cyclic complex Jacobi for Hermitian matrices.
pub fn eigh(a: &ComplexMatrix) -> Result<Eigh> {
    if !a.is_square() {
        return Err(Error::Shape(format!("eigh needs a square matrix, got {:?}", a.shape())));
    }
    if !a.is_finite() {
        return Err(Error::Numerical("eigh input has non-finite entries".into()));
    }
    let n = a.rows();
    // symmetrise so that round-off in the input does not bias the result
    let mut h = (a + &a.adjoint()).scale_real(0.5);
    let mut v = ComplexMatrix::identity(n);
    let total = h.norm_fro().max(f64::MIN_POSITIVE);

    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| h[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= f64::EPSILON * total * 0.1 {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let hpq = h[(p, q)];
                let g = hpq.norm();
                if g == 0.0 {
                    continue;
                }
                // make the (p, q) entry real with a phase on index q
                let phase = hpq / g;
                for i in 0..n {
                    h[(i, q)] *= phase.conj();
                    v[(i, q)] *= phase.conj();
                }
                for j in 0..n {
                    h[(q, j)] *= phase;
                }
                let app = h[(p, p)].re;
                let aqq = h[(q, q)].re;
                let tau = (aqq - app) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // h <- J^T h J with J = [[c, s], [-s, c]] on (p, q)
                for i in 0..n {
                    let hp = h[(i, p)];
                    let hq = h[(i, q)];
                    h[(i, p)] = hp * c - hq * s;
                    h[(i, q)] = hp * s + hq * c;
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * c - vq * s;
                    v[(i, q)] = vp * s + vq * c;
                }
                for j in 0..n {
                    let hp = h[(p, j)];
                    let hq = h[(q, j)];
                    h[(p, j)] = hp * c - hq * s;
                    h[(q, j)] = hp * s + hq * c;
                }
                h[(p, q)] = ZERO;
                h[(q, p)] = ZERO;
            }
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi eigensolver did not converge in {MAX_SWEEPS} sweeps (n = {n})"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| h[(x, x)].re.total_cmp(&h[(y, y)].re));
    let values = order.iter().map(|&k| h[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(Eigh { values, vectors })
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(a: &ComplexMatrix) -> Result<f64> {
    Ok(eigh(a)?.values.first().copied().unwrap_or(0.0))
}
