use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

const PADE_ORDER: usize = 6;
const SCALE_THRESHOLD: f64 = 0.5;

/// Solves `a x = b` by LU factorisation with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::Shape(format!(
            "solve needs square a with matching rows, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let n = a.rows();
    let m = b.cols();
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for k in 0..n {
        let (piv, pmax) = (k..n)
            .map(|i| (i, lu[(i, k)].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= scale * 1e-300 {
            return Err(Error::Numerical(format!("singular matrix at pivot {k}")));
        }
        if piv != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(piv, j)];
                lu[(piv, j)] = t;
            }
            for j in 0..m {
                let t = x[(k, j)];
                x[(k, j)] = x[(piv, j)];
                x[(piv, j)] = t;
            }
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / pivot;
            if f == ZERO {
                continue;
            }
            lu[(i, k)] = f;
            for j in k + 1..n {
                let t = lu[(k, j)];
                lu[(i, j)] -= f * t;
            }
            for j in 0..m {
                let t = x[(k, j)];
                x[(i, j)] -= f * t;
            }
        }
    }
    for k in (0..n).rev() {
        let pivot = lu[(k, k)];
        for j in 0..m {
            let mut s = x[(k, j)];
            for p in k + 1..n {
                s -= lu[(k, p)] * x[(p, j)];
            }
            x[(k, j)] = s / pivot;
        }
    }
    if !x.is_finite() {
        return Err(Error::Numerical("linear solve produced non-finite values".into()));
    }
    Ok(x)
}

/// Matrix exponential by scaling and squaring around a diagonal Pade approximant.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 0.5, the
/// `[6/6]` approximant is evaluated there, and the result is squared `s` times.
pub fn matexp(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "matexp needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if !a.is_finite() {
        return Err(Error::Numerical("matexp argument has non-finite entries".into()));
    }
    let n = a.rows();
    let norm = a.norm_1();
    let squarings = if norm > SCALE_THRESHOLD {
        (norm / SCALE_THRESHOLD).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a.scale_real(0.5f64.powi(squarings));

    let mut coeff = 1.0;
    let mut numer = ComplexMatrix::identity(n);
    let mut denom = ComplexMatrix::identity(n);
    let mut power = ComplexMatrix::identity(n);
    let q = PADE_ORDER as f64;
    for k in 1..=PADE_ORDER {
        let kf = k as f64;
        coeff *= (q - kf + 1.0) / (kf * (2.0 * q - kf + 1.0));
        power = &power * &scaled;
        let term = power.scale_real(coeff);
        numer = &numer + &term;
        denom = if k % 2 == 0 { &denom + &term } else { &denom - &term };
    }
    let mut result = solve(&denom, &numer)?;
    for _ in 0..squarings {
        result = &result * &result;
        if !result.is_finite() {
            return Err(Error::Numerical(format!(
                "matexp overflow while squaring (1-norm {norm:.3e})"
            )));
        }
    }
    Ok(result)
}

/// `exp(-i t h)` for Hermitian `h`.
pub fn unitary(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    matexp(&h.scale(C64::new(0.0, -t)))
}
