//! GKSL generators, their superoperator matrices, semigroup propagation and
//! partial traces, plus the three concrete generators used for comparisons:
//! generalized amplitude damping, a qubit with a two-level effective
//! reservoir, and a qubit coupled to a damped pseudomode.

mod models;
mod trajectory;

pub use models::{
    annihilation, embedding2_generator, embedding_initial_state, excited_projector, gad_generator,
    pseudomode_generator, pseudomode_initial_state, EmbeddingParams, MarkovParams,
    PseudomodeParams,
};
pub use trajectory::Trajectory;

use crate::algebra::{eigh, kron, matexp, vectorize, ComplexMatrix, C64, I, ONE, ZERO};
use crate::error::{Error, Result};

/// A jump operator with its non-negative rate.
#[derive(Debug, Clone)]
pub struct Jump {
    pub operator: ComplexMatrix,
    pub rate: f64,
}

/// Hamiltonian plus weighted jump operators of a semigroup generator.
#[derive(Debug, Clone)]
pub struct GkslGenerator {
    dim: usize,
    hamiltonian: ComplexMatrix,
    jumps: Vec<Jump>,
}

impl GkslGenerator {
    pub fn new(hamiltonian: ComplexMatrix, jumps: Vec<(ComplexMatrix, f64)>) -> Result<Self> {
        if !hamiltonian.is_square() {
            return Err(Error::Validation(format!(
                "hamiltonian must be square, got {:?}",
                hamiltonian.shape()
            )));
        }
        let dim = hamiltonian.rows();
        let defect = hamiltonian.hermiticity_defect();
        if defect > 1e-12 * hamiltonian.max_abs().max(1.0) {
            return Err(Error::Validation(format!(
                "hamiltonian is not Hermitian (defect {defect:.3e})"
            )));
        }
        let mut checked = Vec::with_capacity(jumps.len());
        for (k, (operator, rate)) in jumps.into_iter().enumerate() {
            if !(rate >= 0.0) || !rate.is_finite() {
                return Err(Error::Validation(format!("jump {k} has invalid rate {rate}")));
            }
            if operator.shape() != (dim, dim) {
                return Err(Error::Validation(format!(
                    "jump {k} is {:?}, expected {dim}x{dim}",
                    operator.shape()
                )));
            }
            checked.push(Jump { operator, rate });
        }
        Ok(Self {
            dim,
            hamiltonian,
            jumps: checked,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// Direct evaluation of `-i[H, rho] + sum_k g_k (L rho L^+ - 1/2 {L^+ L, rho})`.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let mut out = self.hamiltonian.commutator(rho).scale(-I);
        for jump in &self.jumps {
            let l = &jump.operator;
            let ld = l.adjoint();
            let ldl = &ld * l;
            let sandwich = &(l * rho) * &ld;
            let anti = ldl.anticommutator(rho).scale_real(0.5);
            out = &out + &(&sandwich - &anti).scale_real(jump.rate);
        }
        out
    }

    pub fn superoperator(&self) -> ComplexMatrix {
        build_superoperator(self)
    }
}

/// Superoperator matrix acting on row-major vectorized density operators.
pub fn build_superoperator(gen: &GkslGenerator) -> ComplexMatrix {
    let d = gen.dim;
    let id = ComplexMatrix::identity(d);
    let h = &gen.hamiltonian;
    let kr = |a: &ComplexMatrix, b: &ComplexMatrix| kron(a, b).expect("dims are small");
    let mut sup = (&kr(h, &id) - &kr(&id, &h.transpose())).scale(-I);
    for jump in &gen.jumps {
        if jump.rate == 0.0 {
            continue;
        }
        let l = &jump.operator;
        let ldl = &l.adjoint() * l;
        let term = &(&kr(l, &l.conj()) - &kr(&ldl, &id).scale_real(0.5))
            - &kr(&id, &ldl.transpose()).scale_real(0.5);
        sup = &sup + &term.scale_real(jump.rate);
    }
    sup
}

/// Vectorized identity; as a row vector it is the trace functional.
pub fn trace_functional(dim: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim * dim];
    for j in 0..dim {
        v[j * dim + j] = ONE;
    }
    v
}

/// Checks that `rho` is a density operator within `tol`.
pub fn validate_density(rho: &ComplexMatrix, dim: usize, tol: f64) -> Result<()> {
    if rho.shape() != (dim, dim) {
        return Err(Error::Validation(format!(
            "density operator is {:?}, expected {dim}x{dim}",
            rho.shape()
        )));
    }
    let defect = rho.hermiticity_defect();
    if defect > tol {
        return Err(Error::Validation(format!(
            "density operator is not Hermitian (defect {defect:.3e})"
        )));
    }
    let tr = rho.trace();
    if (tr - ONE).norm() > tol {
        return Err(Error::Validation(format!("density operator has trace {tr}")));
    }
    let min = eigh(rho)?.values[0];
    if min < -tol {
        return Err(Error::Validation(format!(
            "density operator has negative eigenvalue {min:.3e}"
        )));
    }
    Ok(())
}

/// `rho(t) = exp(L t) rho0` on the given times; one exponential per distinct gap.
pub fn propagate(gen: &GkslGenerator, rho0: &ComplexMatrix, times: &[f64]) -> Result<Trajectory> {
    validate_density(rho0, gen.dim, 1e-10)?;
    check_grid(times)?;
    let sup = build_superoperator(gen);
    let mut cache: Vec<(f64, ComplexMatrix)> = Vec::new();
    let mut step = |gap: f64| -> Result<ComplexMatrix> {
        let tol = 1e-12 * gap.abs().max(1.0);
        if let Some((_, m)) = cache.iter().find(|(g, _)| (g - gap).abs() <= tol) {
            return Ok(m.clone());
        }
        let m = matexp(&sup.scale_real(gap))?;
        cache.push((gap, m.clone()));
        Ok(m)
    };

    let mut states = Vec::with_capacity(times.len());
    let mut current = vectorize(rho0)?;
    let mut t_prev = 0.0;
    for &t in times {
        let gap = t - t_prev;
        if gap != 0.0 {
            current = step(gap)?.apply(&current);
        }
        if current.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical(format!("propagation diverged at t = {t}")));
        }
        states.push(current.clone());
        t_prev = t;
    }
    Trajectory::with_states(times.to_vec(), states)
}

fn check_grid(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Validation("time grid has non-finite entries".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation("time grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `tr[O rho]` for a row-major vectorized `rho`.
pub fn expectation(op: &ComplexMatrix, rho_vec: &[C64]) -> C64 {
    let d = op.rows();
    let mut acc = ZERO;
    for j in 0..d {
        for k in 0..d {
            acc += op[(k, j)] * rho_vec[j * d + k];
        }
    }
    acc
}

/// Which factor of a bipartite space survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

pub fn partial_trace(rho: &ComplexMatrix, dims: (usize, usize), keep: Keep) -> Result<ComplexMatrix> {
    let (da, db) = dims;
    let n = da * db;
    if rho.shape() != (n, n) {
        return Err(Error::Shape(format!(
            "partial trace over {da}x{db} needs a {n}x{n} matrix, got {:?}",
            rho.shape()
        )));
    }
    Ok(match keep {
        Keep::A => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| rho[(i * db + k, j * db + k)]).sum()
        }),
        Keep::B => ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| rho[(k * db + i, k * db + j)]).sum()
        }),
    })
}

/// Time grid `0, dt, 2 dt, ..., (samples - 1) dt`.
pub fn uniform_grid(t_max: f64, samples: usize) -> Vec<f64> {
    if samples < 2 {
        return vec![0.0];
    }
    let dt = t_max / (samples - 1) as f64;
    (0..samples).map(|k| k as f64 * dt).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{devectorize, sigma_minus, sigma_plus};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_generator(dim: usize, jumps: usize, rng: &mut ChaCha8Rng) -> GkslGenerator {
        let h = ComplexMatrix::random_hermitian(dim, rng);
        let js = (0..jumps)
            .map(|_| (ComplexMatrix::random(dim, dim, rng), rng.gen_range(0.0..1.0)))
            .collect();
        GkslGenerator::new(h, js).unwrap()
    }

    #[test]
    fn null_generator_is_zero() {
        let g = GkslGenerator::new(ComplexMatrix::zeros(3, 3), vec![]).unwrap();
        assert_eq!(build_superoperator(&g).max_abs(), 0.0);
    }

    #[test]
    fn trace_functional_is_left_null_vector() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for dim in [2, 3] {
            let g = random_generator(dim, 3, &mut rng);
            let row = build_superoperator(&g).apply_left(&trace_functional(dim));
            assert!(row.iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn superoperator_matches_elementwise_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..10 {
            let g = random_generator(2, 2, &mut rng);
            let rho = ComplexMatrix::random_hermitian(2, &mut rng);
            let via_sup = devectorize(&g.superoperator().apply(&vectorize(&rho).unwrap())).unwrap();
            // elementwise oracle
            let d = 2;
            let h = g.hamiltonian();
            let mut oracle = ComplexMatrix::zeros(d, d);
            for j in 0..d {
                for k in 0..d {
                    let mut v = ZERO;
                    for m in 0..d {
                        v += -I * (h[(j, m)] * rho[(m, k)] - rho[(j, m)] * h[(m, k)]);
                    }
                    for jump in g.jumps() {
                        let l = &jump.operator;
                        for a in 0..d {
                            for b in 0..d {
                                v += jump.rate * l[(j, a)] * rho[(a, b)] * l[(k, b)].conj();
                                // L^+L rho and rho L^+L
                                v -= 0.5 * jump.rate * l[(b, j)].conj() * l[(b, a)] * rho[(a, k)];
                                v -= 0.5 * jump.rate * rho[(j, a)] * l[(b, a)].conj() * l[(b, k)];
                            }
                        }
                    }
                    oracle[(j, k)] = v;
                }
            }
            assert!((&via_sup - &oracle).max_abs() < 1e-12);
            assert!((&g.apply(&rho) - &oracle).max_abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_generators() {
        let non_herm = sigma_plus();
        assert!(matches!(
            GkslGenerator::new(non_herm, vec![]),
            Err(Error::Validation(_))
        ));
        let h = ComplexMatrix::zeros(2, 2);
        assert!(GkslGenerator::new(h.clone(), vec![(sigma_minus(), -0.1)]).is_err());
        assert!(GkslGenerator::new(h, vec![(ComplexMatrix::zeros(3, 3), 0.1)]).is_err());
    }

    #[test]
    fn propagate_at_zero_returns_initial() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let g = random_generator(3, 2, &mut rng);
        let rho = ComplexMatrix::random_density(3, &mut rng);
        let tr = propagate(&g, &rho, &[0.0]).unwrap();
        assert_eq!(tr.state_matrix(0).unwrap(), rho);
    }

    #[test]
    fn propagate_rejects_invalid_state() {
        let g = GkslGenerator::new(ComplexMatrix::zeros(2, 2), vec![]).unwrap();
        let bad = ComplexMatrix::diag_real(&[1.5, -0.5]);
        assert!(matches!(propagate(&g, &bad, &[0.0, 1.0]), Err(Error::Validation(_))));
        let good = ComplexMatrix::diag_real(&[1.0, 0.0]);
        assert!(propagate(&g, &good, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn semigroup_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let g = random_generator(2, 2, &mut rng);
        let l = g.superoperator();
        let (t1, t2) = (0.7, 1.9);
        let lhs = matexp(&l.scale_real(t1 + t2)).unwrap();
        let rhs = &matexp(&l.scale_real(t1)).unwrap() * &matexp(&l.scale_real(t2)).unwrap();
        assert!((&lhs - &rhs).max_abs() < 1e-9);
    }

    #[test]
    fn propagated_states_stay_physical() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for dim in [2, 3, 4] {
            let g = random_generator(dim, 3, &mut rng);
            let rho = ComplexMatrix::random_density(dim, &mut rng);
            let times = uniform_grid(5.0, 21);
            let tr = propagate(&g, &rho, &times).unwrap();
            for k in 0..times.len() {
                let s = tr.state_matrix(k).unwrap();
                assert!((s.trace() - ONE).norm() < 1e-10);
                assert!(eigh(&s).unwrap().values[0] >= -1e-9);
            }
        }
    }

    #[test]
    fn partial_trace_product_and_index_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let ra = ComplexMatrix::random_density(2, &mut rng);
        let rb = ComplexMatrix::random_density(3, &mut rng);
        let joint = kron(&ra, &rb).unwrap();
        assert!((&partial_trace(&joint, (2, 3), Keep::A).unwrap() - &ra).max_abs() < 1e-14);
        assert!((&partial_trace(&joint, (2, 3), Keep::B).unwrap() - &rb).max_abs() < 1e-14);

        let rho = ComplexMatrix::random_density(6, &mut rng);
        let red = partial_trace(&rho, (2, 3), Keep::A).unwrap();
        assert!((red.trace() - rho.trace()).norm() < 1e-13);
        for i in 0..2 {
            for j in 0..2 {
                let mut s = ZERO;
                for k in 0..3 {
                    s += rho[(3 * i + k, 3 * j + k)];
                }
                assert!((red[(i, j)] - s).norm() < 1e-13);
            }
        }
        assert!(matches!(
            partial_trace(&rho, (2, 2), Keep::A),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn expectation_matches_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let o = ComplexMatrix::random(3, 3, &mut rng);
        let rho = ComplexMatrix::random_density(3, &mut rng);
        let direct = (&o * &rho).trace();
        let via = expectation(&o, &vectorize(&rho).unwrap());
        assert!((direct - via).norm() < 1e-14);
    }
}
