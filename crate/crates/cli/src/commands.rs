use std::path::Path;

use erdim_core::algebra::{kron, ComplexMatrix};
use erdim_core::complexity::{effective_dimension, heatmap, snapped_ceil};
use erdim_core::exact_model::{derived_params, solve_continuum, solve_finite, ExactModel};
use erdim_core::fitting::{fit_embedding_with, fit_markov_with, target_from_series, FitOptions, FitResult};
use erdim_core::lindblad::{
    embedding2_generator, embedding_initial_state, excited_projector, expectation, gad_generator, propagate,
    pseudomode_generator, pseudomode_initial_state, uniform_grid, GkslGenerator, PseudomodeParams,
};
use erdim_core::trotter_trn::{build_trn, renyi_entropy, truncate, truncation_bound, CoupledModel, ALPHA_GRID};
use erdim_core::{Error, Trajectory};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{
    EstimateConfig, ExactRunConfig, FitConfig, FitModels, HeatmapConfig, HeatmapLayout, LindbladRunConfig,
    TrnVerifyConfig,
};
use crate::output::{format_g, Table};
use crate::CliError;

/// Maps a core error: numerical failures exit 3, anything caused by inputs exits 2.
fn core_err(op: &str, e: Error) -> CliError {
    if e.is_numerical() {
        CliError::Numerical(format!("{op}: {e}"))
    } else {
        CliError::Config(format!("{op}: {e}"))
    }
}

pub fn estimate(cfg: &EstimateConfig) -> Result<Table, CliError> {
    let p = cfg.params()?;
    let op = format!(
        "effective_dimension(n = {}, n_gamma_t = {}, gamma_tau = {}, epsilon = {})",
        p.n,
        p.n_gamma_t(),
        p.gamma_tau(),
        p.epsilon
    );
    let e = effective_dimension(&p).map_err(|err| core_err(&op, err))?;
    let mut t = Table::new(&[
        "n", "gamma", "T", "tau", "epsilon", "n_gamma_t", "gamma_tau", "d_er", "d_er_ceil", "log2_d_er",
        "qubits", "r_suff", "alpha_star",
    ]);
    t.push_numbers(&[
        p.n as f64,
        p.gamma,
        p.big_t,
        p.tau,
        p.epsilon,
        p.n_gamma_t(),
        p.gamma_tau(),
        e.d_er,
        e.d_er_ceil,
        e.log2_d_er(),
        e.qubits as f64,
        e.r_suff,
        e.alpha_star,
    ]);
    Ok(t)
}

pub fn heatmap_grid(cfg: &HeatmapConfig) -> Result<Table, CliError> {
    let ngt = (cfg.n_gamma_t_range[0], cfg.n_gamma_t_range[1]);
    let gt = (cfg.gamma_tau_range[0], cfg.gamma_tau_range[1]);
    let grid = heatmap(ngt, gt, cfg.resolution, cfg.epsilon).map_err(|e| core_err("heatmap", e))?;
    let mut t = match cfg.layout {
        HeatmapLayout::Matrix => {
            let mut header = vec!["n_gamma_t".to_string()];
            header.extend(grid.gt_axis.iter().map(|&g| format_g(g)));
            let mut t = Table { header, ..Default::default() };
            t.meta("cells", "log2(d_er); rows n_gamma_t, columns gamma_tau");
            for (i, &x) in grid.ngt_axis.iter().enumerate() {
                let mut row = vec![x];
                row.extend(&grid.cells[i]);
                t.push_numbers(&row);
            }
            t
        }
        HeatmapLayout::Long => {
            let mut t = Table::new(&["n_gamma_t", "gamma_tau", "log2_d_er", "d_er_ceil", "qubits"]);
            for (i, &x) in grid.ngt_axis.iter().enumerate() {
                for (j, &y) in grid.gt_axis.iter().enumerate() {
                    let d = grid.cells[i][j].exp2();
                    t.push_numbers(&[x, y, grid.cells[i][j], snapped_ceil(d), grid.qubits[i][j] as f64]);
                }
            }
            t
        }
    };
    t.meta("epsilon", format_g(cfg.epsilon));
    t.meta("monotonicity_violations", grid.monotonicity_violations().len());
    Ok(t)
}

fn describe(m: &ExactModel) -> String {
    format!(
        "Omega = {}, band [{}, {}], {} modes, g = {}",
        m.omega,
        m.omega_min,
        m.omega_max,
        m.modes(),
        m.g
    )
}

pub fn exact_run(cfg: &ExactRunConfig) -> Result<Table, CliError> {
    let m = cfg.model.model("exact-run")?;
    let t_max = cfg.t_max.unwrap_or(10.0 * m.correlation_time());
    let times = uniform_grid(t_max, cfg.samples);
    let finite = solve_finite(&m, &times).map_err(|e| core_err(&format!("solve_finite({})", describe(&m)), e))?;
    let h = cfg.step.unwrap_or(1.0 / m.omega_max / 20.0);
    let continuum = if cfg.continuum {
        let op = format!("solve_continuum({}, h = {h})", describe(&m));
        Some(solve_continuum(&m, &times, h).map_err(|e| core_err(&op, e))?)
    } else {
        None
    };

    let mut header = vec!["t", "sigma_z", "excited_population"];
    if continuum.is_some() {
        header.extend(["sigma_z_continuum", "excited_population_continuum"]);
    }
    let mut t = Table::new(&header);
    t.meta("time_unit", "1/omega_max");
    t.meta("modes", m.modes());
    if cfg.continuum {
        t.meta("continuum_step", format_g(h));
    }
    let series = |traj: &Trajectory, name: &str| -> Result<Vec<f64>, CliError> {
        traj.observable(name)
            .map(<[f64]>::to_vec)
            .ok_or_else(|| CliError::Numerical(format!("solver produced no `{name}` series")))
    };
    let z = series(&finite, "sigma_z")?;
    let p = series(&finite, "excited_population")?;
    let (zc, pc) = match &continuum {
        Some(c) => (series(c, "sigma_z")?, series(c, "excited_population")?),
        None => (Vec::new(), Vec::new()),
    };
    for (k, &time) in times.iter().enumerate() {
        let mut row = vec![time * m.omega_max, z[k], p[k]];
        if continuum.is_some() {
            row.extend([zc[k], pc[k]]);
        }
        t.push_numbers(&row);
    }
    if let Ok(pp) = derived_params(&m, 0.05) {
        t.meta("n_gamma_t", format_g(pp.n_gamma_t()));
        t.meta("gamma_tau", format_g(pp.gamma_tau()));
    }
    Ok(t)
}

fn read_series(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let bad = |msg: String| CliError::Config(format!("fit: target.csv {}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| bad(format!("missing column `{name}`")))
    };
    let (ti, zi) = (column("t")?, column("sigma_z")?);
    let (mut times, mut z) = (Vec::new(), Vec::new());
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |i: usize| -> Result<f64, CliError> {
            rec.get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(format!("record {}: not a number", line + 1)))
        };
        times.push(num(ti)?);
        z.push(num(zi)?);
    }
    Ok((times, z))
}

fn push_params(t: &mut Table, prefix: &str, fit: &FitResult) {
    for (name, value) in &fit.params {
        t.meta(&format!("{prefix}.{name}"), format_g(*value));
    }
    t.meta(&format!("{prefix}.mse"), format_g(fit.mse));
    t.meta(&format!("{prefix}.evaluations"), fit.evaluations);
}

pub fn fit(cfg: &FitConfig, seed: u64, config_dir: &Path) -> Result<Table, CliError> {
    let (target, model_omega) = match (&cfg.target.exact, &cfg.target.csv) {
        (Some(ex), None) => {
            let m = ex.model.model("fit: target.exact")?;
            let times = uniform_grid(ex.t_max, ex.samples);
            let traj = solve_finite(&m, &times).map_err(|e| core_err(&format!("solve_finite({})", describe(&m)), e))?;
            (traj, Some(m.omega))
        }
        (None, Some(path)) => {
            let (times, z) = read_series(&config_dir.join(path))?;
            (target_from_series(times, z).map_err(|e| core_err("fit: target.csv", e))?, None)
        }
        (None, None) => return Err(CliError::Config("fit: target: missing field `exact` (or `csv`)".into())),
        (Some(_), Some(_)) => return Err(CliError::Config("fit: target: give only one of `exact` and `csv`".into())),
    };
    let defaults = FitOptions::default();
    let opts = FitOptions {
        max_evals: cfg.max_evals.unwrap_or(defaults.max_evals),
        restarts: cfg.restarts.unwrap_or(defaults.restarts),
        seed,
    };
    let want_markov = matches!(cfg.models, FitModels::Markov | FitModels::Both);
    let want_embedding = matches!(cfg.models, FitModels::Embedding | FitModels::Both);

    let markov = if want_markov || (want_embedding && cfg.warm_start) {
        let omega = cfg
            .omega
            .or(model_omega)
            .ok_or_else(|| CliError::Config("fit: missing field `omega` (needed with a csv target)".into()))?;
        Some(fit_markov_with(&target, omega, &opts).map_err(|e| core_err("fit_markov", e))?)
    } else {
        None
    };
    let embedding = if want_embedding {
        let warm = if cfg.warm_start { markov.as_ref().and_then(FitResult::markov_params) } else { None };
        Some(fit_embedding_with(&target, &opts, warm.as_ref()).map_err(|e| core_err("fit_embedding", e))?)
    } else {
        None
    };

    let mut header = vec!["t", "sigma_z"];
    let markov = markov.filter(|_| want_markov);
    if markov.is_some() {
        header.push("sigma_z_markov");
    }
    if embedding.is_some() {
        header.push("sigma_z_embedding");
    }
    let mut t = Table::new(&header);
    if let Some(f) = &markov {
        push_params(&mut t, "markov", f);
    }
    if let Some(f) = &embedding {
        push_params(&mut t, "embedding", f);
    }
    let z = target.observable("sigma_z").unwrap_or_default();
    for (k, &time) in target.times.iter().enumerate() {
        let mut row = vec![time, z[k]];
        row.extend(markov.iter().map(|f| f.fitted[k]));
        row.extend(embedding.iter().map(|f| f.fitted[k]));
        t.push_numbers(&row);
    }
    Ok(t)
}

pub fn lindblad_run(cfg: &LindbladRunConfig) -> Result<Table, CliError> {
    let block = "lindblad-run";
    let chosen = [cfg.gad.is_some(), cfg.embedding.is_some(), cfg.pseudomode.is_some()];
    if chosen.iter().filter(|&&b| b).count() != 1 {
        return Err(CliError::Config(format!(
            "{block}: give exactly one of `gad`, `embedding`, `pseudomode`"
        )));
    }
    let mut t = Table::new(&["t", "sigma_z", "excited_population", "trace"]);
    let (gen, rho0, excited): (GkslGenerator, ComplexMatrix, ComplexMatrix) = if let Some(g) = cfg.gad {
        t.meta("model", "gad");
        let gen = gad_generator(&g.into()).map_err(|e| core_err(&format!("{block}: gad"), e))?;
        (gen, excited_projector(), excited_projector())
    } else if let Some(e) = cfg.embedding {
        t.meta("model", "embedding");
        let gen = embedding2_generator(&e.into()).map_err(|err| core_err(&format!("{block}: embedding"), err))?;
        let op = kron(&excited_projector(), &ComplexMatrix::identity(2)).map_err(|e| core_err(block, e))?;
        (gen, embedding_initial_state(), op)
    } else {
        let pc = cfg.pseudomode.expect("checked above");
        let p: PseudomodeParams = pc.into();
        t.meta("model", "pseudomode");
        let gen = pseudomode_generator(&p).map_err(|e| core_err(&format!("{block}: pseudomode"), e))?;
        let est = p
            .physical_params(pc.epsilon)
            .and_then(|pp| effective_dimension(&pp))
            .map_err(|e| core_err(&format!("{block}: pseudomode cutoff estimate"), e))?;
        t.meta("d_er", format_g(est.d_er));
        t.meta("d_er_ceil", format_g(est.d_er_ceil));
        let op = kron(&excited_projector(), &ComplexMatrix::identity(p.cutoff)).map_err(|e| core_err(block, e))?;
        (gen, pseudomode_initial_state(p.cutoff), op)
    };
    let times = uniform_grid(cfg.t_max, cfg.samples);
    let traj = propagate(&gen, &rho0, &times).map_err(|e| core_err(&format!("{block}: propagate"), e))?;
    let states = traj.states.as_ref().ok_or_else(|| CliError::Numerical("propagation kept no states".into()))?;
    let dim = gen.dim();
    for (k, state) in states.iter().enumerate() {
        let p = expectation(&excited, state).re;
        let trace: f64 = (0..dim).map(|i| state[i * dim + i].re).sum();
        t.push_numbers(&[times[k], 2.0 * p - 1.0, p, trace]);
    }
    Ok(t)
}

pub fn trn_verify(cfg: &TrnVerifyConfig, seed: u64) -> Result<Table, CliError> {
    let block = "trn-verify";
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = CoupledModel::random(cfg.system_dim, cfg.reservoir_dim, cfg.n, cfg.gamma, cfg.correlated, &mut rng)
        .map_err(|e| core_err(&format!("{block}: model"), e))?;
    let op = format!(
        "build_trn(d_S = {}, d_R = {}, n = {}, gamma = {}, tau = {}, steps = {})",
        cfg.system_dim, cfg.reservoir_dim, cfg.n, cfg.gamma, cfg.tau, cfg.steps
    );
    let trn = build_trn(&m, cfg.tau, cfg.steps).map_err(|e| core_err(&op, e))?;
    let spectra = trn.schmidt_spectra().map_err(|e| core_err("schmidt_spectra", e))?;
    let ranks: Vec<usize> = cfg.ranks.clone().unwrap_or_else(|| (1..=trn.max_bond_dim()).collect());
    let alphas: Vec<f64> = cfg.alphas.clone().unwrap_or_else(|| ALPHA_GRID.to_vec());

    let mut t = Table::new(&["cut", "r", "alpha", "s_alpha", "bound", "eps_cut", "eps"]);
    let mut violations = 0usize;
    let mut single_violations = 0usize;
    for &r in &ranks {
        let (_, eps) = truncate(&trn, r).map_err(|e| core_err(&format!("{block}: truncate(r = {r})"), e))?;
        for &a in &alphas {
            let whole = truncation_bound(&spectra, r, a).map_err(|e| core_err(block, e))?;
            if eps.ln() > whole {
                violations += 1;
            }
            for sp in &spectra {
                let s = renyi_entropy(sp, a).map_err(|e| core_err(block, e))?;
                let bound = truncation_bound(std::slice::from_ref(sp), r, a).map_err(|e| core_err(block, e))?;
                let eps_cut = sp.discarded_weight(r).max(0.0).sqrt();
                if eps_cut.ln() > bound {
                    single_violations += 1;
                }
                t.push_numbers(&[sp.cut as f64, r as f64, a, s, bound, eps_cut, eps]);
            }
        }
    }
    t.meta("bond_dims", format!("{:?}", trn.bond_dims()));
    t.meta("violations_all_cuts", violations);
    t.meta("violations_single_cut", single_violations);
    Ok(t)
}
