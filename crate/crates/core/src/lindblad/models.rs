use crate::algebra::{kron, pauli_x, sigma_minus, sigma_plus, ComplexMatrix, C64};
use crate::complexity::PhysicalParams;
use crate::error::{Error, Result};

use super::GkslGenerator;

fn check_rate(name: &str, value: f64) -> Result<()> {
    if !(value >= 0.0) || !value.is_finite() {
        return Err(Error::Validation(format!("{name} must be a finite non-negative rate, got {value}")));
    }
    Ok(())
}

fn check_real(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::Validation(format!("{name} must be finite, got {value}")));
    }
    Ok(())
}

fn kr(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    kron(a, b).expect("small operands")
}

/// Projector on the excited level `|1><1| = sigma_+ sigma_-`.
pub fn excited_projector() -> ComplexMatrix {
    &sigma_plus() * &sigma_minus()
}

/// Generalized amplitude damping of a single qubit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkovParams {
    pub omega: f64,
    pub gamma_down: f64,
    pub gamma_up: f64,
}

impl MarkovParams {
    pub fn validate(&self) -> Result<()> {
        check_real("omega", self.omega)?;
        check_rate("gamma_down", self.gamma_down)?;
        check_rate("gamma_up", self.gamma_up)
    }

    /// Stationary excited population `g_up / (g_down + g_up)`; `None` without dissipation.
    pub fn steady_population(&self) -> Option<f64> {
        let total = self.gamma_down + self.gamma_up;
        (total > 0.0).then(|| self.gamma_up / total)
    }

    /// Excited population at `t` starting from `p0`.
    pub fn population(&self, p0: f64, t: f64) -> f64 {
        match self.steady_population() {
            Some(p_inf) => p_inf + (p0 - p_inf) * (-(self.gamma_down + self.gamma_up) * t).exp(),
            None => p0,
        }
    }
}

/// `H = omega sigma_+ sigma_-`, jumps `(sigma_-, gamma_down)` and `(sigma_+, gamma_up)`.
pub fn gad_generator(p: &MarkovParams) -> Result<GkslGenerator> {
    p.validate()?;
    GkslGenerator::new(
        excited_projector().scale_real(p.omega),
        vec![(sigma_minus(), p.gamma_down), (sigma_plus(), p.gamma_up)],
    )
}

/// Qubit exchange-coupled to a damped two-level effective reservoir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingParams {
    pub omega1: f64,
    pub omega2: f64,
    pub g_tilde: f64,
    pub gamma1_down: f64,
    pub gamma1_up: f64,
    pub gamma2_down: f64,
    pub gamma2_up: f64,
}

impl EmbeddingParams {
    pub const NAMES: [&'static str; 7] = [
        "omega1",
        "omega2",
        "g_tilde",
        "gamma1_down",
        "gamma1_up",
        "gamma2_down",
        "gamma2_up",
    ];

    pub fn validate(&self) -> Result<()> {
        check_real("omega1", self.omega1)?;
        check_real("omega2", self.omega2)?;
        check_real("g_tilde", self.g_tilde)?;
        check_rate("gamma1_down", self.gamma1_down)?;
        check_rate("gamma1_up", self.gamma1_up)?;
        check_rate("gamma2_down", self.gamma2_down)?;
        check_rate("gamma2_up", self.gamma2_up)
    }

    pub fn to_vector(&self) -> [f64; 7] {
        [
            self.omega1,
            self.omega2,
            self.g_tilde,
            self.gamma1_down,
            self.gamma1_up,
            self.gamma2_down,
            self.gamma2_up,
        ]
    }

    pub fn from_vector(v: [f64; 7]) -> Self {
        Self {
            omega1: v[0],
            omega2: v[1],
            g_tilde: v[2],
            gamma1_down: v[3],
            gamma1_up: v[4],
            gamma2_down: v[5],
            gamma2_up: v[6],
        }
    }
}

/// Two-qubit generator on system (left factor) and effective reservoir (right factor).
pub fn embedding2_generator(p: &EmbeddingParams) -> Result<GkslGenerator> {
    p.validate()?;
    let id = ComplexMatrix::identity(2);
    let sp = sigma_plus();
    let sm = sigma_minus();
    let n = excited_projector();
    let h = &(&kr(&n, &id).scale_real(p.omega1) + &kr(&id, &n).scale_real(p.omega2))
        + &(&kr(&sp, &sm) + &kr(&sm, &sp)).scale_real(p.g_tilde);
    GkslGenerator::new(
        h,
        vec![
            (kr(&sm, &id), p.gamma1_down),
            (kr(&sp, &id), p.gamma1_up),
            (kr(&id, &sm), p.gamma2_down),
            (kr(&id, &sp), p.gamma2_up),
        ],
    )
}

/// `|1><1|_S (x) |0><0|_ER`.
pub fn embedding_initial_state() -> ComplexMatrix {
    kr(&excited_projector(), &ComplexMatrix::diag_real(&[1.0, 0.0]))
}

/// Qubit coupled through `Omega0 sigma_x (a^+ + a)` to a damped, truncated bosonic mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudomodeParams {
    pub omega0: f64,
    pub omega: f64,
    pub omega_rabi: f64,
    pub gamma_decay: f64,
    pub cutoff: usize,
    pub n0: f64,
}

impl PseudomodeParams {
    pub fn validate(&self) -> Result<()> {
        check_real("omega0", self.omega0)?;
        check_real("omega", self.omega)?;
        check_real("omega_rabi", self.omega_rabi)?;
        check_rate("gamma_decay", self.gamma_decay)?;
        check_rate("n0", self.n0)?;
        if self.cutoff < 1 {
            return Err(Error::Validation("pseudomode cutoff must be at least 1".into()));
        }
        Ok(())
    }

    /// Reduced parameters: one coupling term, `T = 1/Gamma`, `tau = 1/omega`,
    /// `gamma = Omega0 sqrt(n0 + 1)`.
    pub fn physical_params(&self, epsilon: f64) -> Result<PhysicalParams> {
        self.validate()?;
        PhysicalParams::new(
            1,
            self.omega_rabi.abs() * (self.n0 + 1.0).sqrt(),
            1.0 / self.gamma_decay,
            1.0 / self.omega,
            epsilon,
        )
    }

    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        Self { cutoff, ..*self }
    }
}

/// Truncated annihilation operator, `a|k> = sqrt(k)|k-1>`.
pub fn annihilation(cutoff: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(cutoff, cutoff, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Qubit (left factor) and pseudomode (right factor), dimension `2 * cutoff`.
pub fn pseudomode_generator(p: &PseudomodeParams) -> Result<GkslGenerator> {
    p.validate()?;
    let c = p.cutoff;
    let a = annihilation(c);
    let ad = a.adjoint();
    let number = &ad * &a;
    let h = &(&kr(&excited_projector(), &ComplexMatrix::identity(c)).scale_real(p.omega0)
        + &kr(&ComplexMatrix::identity(2), &number).scale_real(p.omega))
        + &kr(&pauli_x(), &(&ad + &a)).scale_real(p.omega_rabi);
    GkslGenerator::new(h, vec![(kr(&ComplexMatrix::identity(2), &a), p.gamma_decay)])
}

/// Excited qubit and pseudomode vacuum.
pub fn pseudomode_initial_state(cutoff: usize) -> ComplexMatrix {
    let mut vac = ComplexMatrix::zeros(cutoff, cutoff);
    vac[(0, 0)] = C64::new(1.0, 0.0);
    kr(&excited_projector(), &vac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{devectorize, eigh, solve, vectorize};
    use crate::lindblad::{build_superoperator, propagate, trace_functional, uniform_grid};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Stationary state from `L x = 0` with the first row replaced by the trace constraint.
    fn null_space_state(gen: &GkslGenerator) -> ComplexMatrix {
        let l = build_superoperator(gen);
        let n = l.rows();
        let tf = trace_functional(gen.dim());
        let mut a = l.clone();
        for j in 0..n {
            a[(0, j)] = tf[j];
        }
        let mut rhs = ComplexMatrix::zeros(n, 1);
        rhs[(0, 0)] = C64::new(1.0, 0.0);
        devectorize(&solve(&a, &rhs).unwrap().into_vec()).unwrap()
    }

    #[test]
    fn gad_without_dissipation_is_unitary() {
        let g = gad_generator(&MarkovParams { omega: 1.3, gamma_down: 0.0, gamma_up: 0.0 }).unwrap();
        assert_eq!(g.jumps().len(), 2);
        let l = build_superoperator(&g);
        assert!((&l + &l.adjoint()).max_abs() < 1e-15);
    }

    #[test]
    fn gad_rejects_negative_rates() {
        let bad = MarkovParams { omega: 1.0, gamma_down: -1.0, gamma_up: 0.0 };
        assert!(matches!(gad_generator(&bad), Err(Error::Validation(_))));
    }

    #[test]
    fn gad_steady_state_from_null_space() {
        let p = MarkovParams { omega: 0.7, gamma_down: 2.0, gamma_up: 1.0 };
        let rho = null_space_state(&gad_generator(&p).unwrap());
        assert!((rho[(1, 1)].re - 1.0 / 3.0).abs() < 1e-12);
        assert!((p.steady_population().unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gad_population_follows_rate_equation() {
        let p = MarkovParams { omega: 1.1, gamma_down: 0.8, gamma_up: 0.3 };
        let g = gad_generator(&p).unwrap();
        let rho0 = excited_projector();
        let times = uniform_grid(6.0, 61);
        let mut tr = propagate(&g, &rho0, &times).unwrap();
        tr.record_expectation("p", &excited_projector()).unwrap();
        for (t, v) in times.iter().zip(tr.observable("p").unwrap()) {
            assert!((v - p.population(1.0, *t)).abs() < 1e-8);
        }
    }

    #[test]
    fn vacuum_bath_decay_is_exponential() {
        let p = MarkovParams { omega: 2.0, gamma_down: 0.45, gamma_up: 0.0 };
        let g = gad_generator(&p).unwrap();
        let times = uniform_grid(8.0, 41);
        let mut tr = propagate(&g, &excited_projector(), &times).unwrap();
        tr.record_expectation("p", &excited_projector()).unwrap();
        for (t, v) in times.iter().zip(tr.observable("p").unwrap()) {
            assert!((v - (-0.45 * t).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn embedding_decoupled_case_factorizes() {
        let p = EmbeddingParams::from_vector([1.0, 1.7, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let g = embedding2_generator(&p).unwrap();
        assert_eq!(g.jumps().len(), 4);
        assert_eq!(p.to_vector().len(), 7);
        // H is diagonal with entries omega1 n1 + omega2 n2
        let h = g.hamiltonian();
        let expect = ComplexMatrix::diag_real(&[0.0, 1.7, 1.0, 2.7]);
        assert!((h - &expect).max_abs() < 1e-15);
        let l = build_superoperator(&g);
        assert!((&l + &l.adjoint()).max_abs() < 1e-15);
    }

    #[test]
    fn embedding_preserves_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let p = EmbeddingParams::from_vector([1.0, 0.9, 0.3, 0.2, 0.05, 0.7, 0.1]);
        let g = embedding2_generator(&p).unwrap();
        let l = build_superoperator(&g);
        for _ in 0..10 {
            let rho = ComplexMatrix::random_hermitian(4, &mut rng);
            let out = devectorize(&l.apply(&vectorize(&rho).unwrap())).unwrap();
            assert!(out.hermiticity_defect() < 1e-12);
        }
        let bad = EmbeddingParams { gamma2_up: -0.1, ..p };
        assert!(embedding2_generator(&bad).is_err());
    }

    #[test]
    fn number_operator_spectrum() {
        for c in [1, 3, 6] {
            let a = annihilation(c);
            let ev = eigh(&(&a.adjoint() * &a)).unwrap().values;
            for (k, v) in ev.iter().enumerate() {
                assert!((v - k as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn decoupled_pseudomode_keeps_qubit_population() {
        let p = PseudomodeParams {
            omega0: 1.0,
            omega: 1.2,
            omega_rabi: 0.0,
            gamma_decay: 0.5,
            cutoff: 4,
            n0: 0.0,
        };
        let g = pseudomode_generator(&p).unwrap();
        assert_eq!(g.dim(), 8);
        let times = uniform_grid(5.0, 11);
        let mut tr = propagate(&g, &pseudomode_initial_state(4), &times).unwrap();
        let obs = kr(&excited_projector(), &ComplexMatrix::identity(4));
        tr.record_expectation("p", &obs).unwrap();
        assert!(tr.observable("p").unwrap().iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn pseudomode_reduced_parameters() {
        let p = PseudomodeParams {
            omega0: 1.0,
            omega: 4.0,
            omega_rabi: 0.1,
            gamma_decay: 0.5,
            cutoff: 2,
            n0: 3.0,
        };
        let pp = p.physical_params(0.05).unwrap();
        assert_eq!(pp.n, 1);
        assert!((pp.gamma - 0.2).abs() < 1e-15);
        assert!((pp.big_t - 2.0).abs() < 1e-15);
        assert!((pp.tau - 0.25).abs() < 1e-15);
        assert!(PseudomodeParams { cutoff: 0, ..p }.validate().is_err());
    }
}
