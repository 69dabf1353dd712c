//! Experiment dispatch. Each experiment is a pure function of
//! `(config, seed)`; reductions are fixed-order, so results are bit-identical
//! regardless of worker count.

use std::time::Instant;

use qlock_core::bounds::{
    hs_centered_projector_norm, khintchine_t_bound, required_parameters, simplex_moments,
    tv_lower_bound_expression,
};
use qlock_core::divergences::ProbDist;
use qlock_core::embedding::{
    certify_distortion, dvoretzky_dimension, norm_identity_check, EmbeddingMap,
};
use qlock_core::linalg::BipartiteDims;
use qlock_core::locking::{
    adversarial_conditional_check, build_adversarial_povm, data_hiding_eval,
    fhs_parameter_check, hellinger_locking_bound, identification_check, key_length_lower_bound,
    locking_resource_accounting, random_effect, verify_locking, LockingScheme, MessagePrior,
};
use qlock_core::measurement::{validate_povm, PureState};
use qlock_core::randomness::{sample_simplex, sample_sphere, Seed};
use qlock_core::stats::mean_and_se;
use qlock_core::uncertainty::{
    estimate_r, worst_case_search, SearchOpts, StateSubset, UnitaryEnsemble,
};

use crate::config::{ExperimentConfig, ExperimentKind, SubsetKind};
use crate::report::{MatrixJson, Provenance, Report};
use crate::Result;

/// Dense members up to this dimension; the factored Haar form beyond. The
/// cutoff is a pure function of the config, so the choice is reproducible.
const DENSE_DIM_LIMIT: usize = 256;

fn sample_ensemble(dims: BipartiteDims, t: usize, seed: Seed) -> Result<UnitaryEnsemble> {
    Ok(if dims.d() <= DENSE_DIM_LIMIT {
        UnitaryEnsemble::sample_qr(dims, t, seed)?
    } else {
        UnitaryEnsemble::sample_factored(dims, t, seed)?
    })
}

fn search_opts(config: &ExperimentConfig, seed: Seed) -> SearchOpts {
    let mut opts = SearchOpts::new(seed);
    opts.restarts = config.restarts;
    opts.max_iters = config.max_iters;
    opts
}

/// Runs one experiment and assembles its report.
pub fn run(config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    let start = Instant::now();
    let mut report = Report::new(config.clone());
    match config.experiment {
        ExperimentKind::Moments => run_moments(config, &mut report)?,
        ExperimentKind::Bounds => run_bounds(config, &mut report)?,
        ExperimentKind::Uncertainty => run_uncertainty(config, &mut report)?,
        ExperimentKind::WorstCase => run_worst_case(config, &mut report)?,
        ExperimentKind::Locking => run_locking(config, &mut report)?,
        ExperimentKind::Adversary => run_adversary(config, &mut report)?,
        ExperimentKind::DataHiding => run_data_hiding(config, &mut report)?,
        ExperimentKind::Embedding => run_embedding(config, &mut report)?,
    }
    report.wall_time_s = start.elapsed().as_secs_f64();
    report.check_finite()?;
    Ok(report)
}

fn run_moments(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let d = config.d();
    let m = simplex_moments(d)?;
    report.push("mean_closed", m.mean, Provenance::ClosedForm);
    report.push("variance_closed", m.variance, Provenance::ClosedForm);
    report.push("covariance_closed", m.covariance, Provenance::ClosedForm);

    let mut rng = config.seed.rng();
    let n = config.trials;
    let mut first = Vec::with_capacity(n);
    let mut cross = Vec::with_capacity(n);
    for _ in 0..n {
        let p = sample_simplex(d, &mut rng);
        first.push(p.weights()[0]);
        if d > 1 {
            cross.push((p.weights()[0] - m.mean) * (p.weights()[1] - m.mean));
        }
    }
    let (mean, se) = mean_and_se(&first);
    report.push_with_se("mean_mc", mean, se, Provenance::MonteCarlo);
    let centered: Vec<f64> = first.iter().map(|x| (x - m.mean) * (x - m.mean)).collect();
    let (var, se_var) = mean_and_se(&centered);
    report.push_with_se("variance_mc", var, se_var, Provenance::MonteCarlo);
    if d > 1 {
        let (cov, se_cov) = mean_and_se(&cross);
        report.push_with_se("covariance_mc", cov, se_cov, Provenance::MonteCarlo);
    }

    if let Some(path) = &config.trial_table_path {
        let mut table = String::from("trial,first_weight\n");
        for (i, w) in first.iter().enumerate() {
            table.push_str(&format!("{i},{w}\n"));
        }
        std::fs::write(path, table)?;
        report.trial_table = Some(path.clone());
    }
    Ok(())
}

fn run_bounds(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let dims = BipartiteDims::new(config.d_a, config.d_b)?;
    if config.d_a >= 2 {
        let tv = tv_lower_bound_expression(config.d_a, config.d_b)?;
        report.push("tv_lower_exact", tv.exact, Provenance::ClosedForm);
        report.push("tv_lower_simplified", tv.simplified, Provenance::ClosedForm);
    }
    let req = required_parameters(config.eps)?;
    report.push("required_order_inverse_eps_sq", req.inverse_eps_sq, Provenance::ClosedForm);
    report.push("required_t_min_pinned", req.t_min_pinned, Provenance::ClosedForm);
    report.push(
        "required_db_min_coefficient",
        req.db_min_coefficient,
        Provenance::ClosedForm,
    );
    report.push(
        "hs_centered_projector_norm_sq",
        hs_centered_projector_norm(config.d_a, config.d_b),
        Provenance::ClosedForm,
    );

    if config.d_a >= 2 {
        let ens = sample_ensemble(dims, config.t, config.seed)?;
        let k = khintchine_t_bound(&ens, config.trials, config.seed.child(1))?;
        report.push("khintchine_analytic_bound", k.analytic_bound, Provenance::ClosedForm);
        let provenance = if k.exact_enumeration {
            Provenance::Exact
        } else {
            Provenance::MonteCarlo
        };
        report.push_with_se("khintchine_mc_estimate", k.mc_estimate, k.mc_se, provenance);
        report.push(
            "khintchine_patterns",
            k.patterns as f64,
            Provenance::Exact,
        );
    }
    Ok(())
}

fn run_uncertainty(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let dims = BipartiteDims::new(config.d_a, config.d_b)?;
    let est = estimate_r(dims, config.t, config.trials, config.seed)?;
    if let Some(path) = &config.trial_table_path {
        let samples =
            qlock_core::uncertainty::estimate_r_samples(dims, config.t, config.trials, config.seed)?;
        let mut table = String::from("trial,y,mean_fidelity\n");
        for (i, (y, f)) in samples.iter().enumerate() {
            table.push_str(&format!("{i},{y},{f}\n"));
        }
        std::fs::write(path, table)?;
        report.trial_table = Some(path.clone());
    }
    report.push_with_se("r_mean", est.y_mean, est.y_se, Provenance::MonteCarlo);
    report.push_with_se(
        "fidelity_mean",
        est.fidelity_mean,
        est.fidelity_se,
        Provenance::MonteCarlo,
    );
    report.push(
        "r_upper_bound",
        1.0 / (config.d_b as f64).sqrt(),
        Provenance::ClosedForm,
    );
    report.push(
        "fidelity_lower_bound",
        (1.0 - 1.0 / config.d_b as f64).sqrt(),
        Provenance::ClosedForm,
    );
    Ok(())
}

fn run_worst_case(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let dims = BipartiteDims::new(config.d_a, config.d_b)?;
    let ens = sample_ensemble(dims, config.t, config.seed)?;
    let subset = match config.subset {
        SubsetKind::FullSphere => StateSubset::FullSphere,
        SubsetKind::Separable => StateSubset::Separable,
    };
    let opts = search_opts(config, config.seed.child(1));
    let rep = worst_case_search(&ens, &subset, &opts)?;
    report.push("epsilon_fidelity", rep.epsilon_fidelity, Provenance::SearchLowerBound);
    report.push("epsilon_metric", rep.epsilon_metric, Provenance::SearchLowerBound);
    report.push("epsilon_entropic", rep.epsilon_entropic, Provenance::SearchLowerBound);
    report.push("best_y", rep.best_y, Provenance::SearchLowerBound);
    report.push(
        "search_iterations",
        rep.diagnostics.total_iterations as f64,
        Provenance::Exact,
    );
    report.push(
        "search_converged",
        if rep.diagnostics.converged { 1.0 } else { 0.0 },
        Provenance::Exact,
    );
    Ok(())
}

fn run_locking(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let dims = BipartiteDims::new(config.d_a, config.d_b)?;
    let n = config.message_bits();
    let ens = sample_ensemble(dims, config.t, config.seed)?;
    let scheme = LockingScheme::new(ens, n)?;
    let prior = MessagePrior::uniform(n);

    let mut rng = config.seed.child(1).rng();
    let effects: Vec<_> = (0..config.n_effects)
        .map(|_| random_effect(dims.d(), &mut rng))
        .collect();
    let audit = verify_locking(&scheme, &prior, &effects)?;
    report.push("max_posterior_hellinger", audit.max_hellinger, Provenance::MonteCarlo);
    report.push("max_posterior_tv", audit.max_tv, Provenance::MonteCarlo);

    if dims.d() <= 64 {
        report.push(
            "identification_deviation",
            identification_check(&scheme)?,
            Provenance::Exact,
        );
    }

    report.push(
        "hellinger_locking_bound_uniform",
        hellinger_locking_bound(config.eps, n as f64, n)?,
        Provenance::ClosedForm,
    );
    report.push(
        "key_length_lower_bound_bits",
        key_length_lower_bound(config.eps, n)?,
        Provenance::ClosedForm,
    );
    let acc = locking_resource_accounting(config.eps, n)?;
    report.push(
        "qubits_no_additive_constant",
        acc.qubits_no_additive_constant,
        Provenance::ClosedForm,
    );
    report.push(
        "key_bits_no_additive_constant",
        acc.key_bits_no_additive_constant,
        Provenance::ClosedForm,
    );

    let fhs = fhs_parameter_check(config.eps, config.d_b, config.t, dims.d())?;
    report.push("fhs_db_threshold", fhs.db_threshold, Provenance::ClosedForm);
    report.push("fhs_t_threshold", fhs.t_threshold, Provenance::ClosedForm);
    report.push(
        "fhs_probability_lower_bound",
        fhs.probability_lower_bound,
        Provenance::ClosedForm,
    );
    Ok(())
}

fn run_adversary(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let dims = BipartiteDims::new(config.d_a, config.d_b)?;
    let n = config.message_bits();
    let ens = sample_ensemble(dims, config.t, config.seed)?;
    let scheme = LockingScheme::new(ens, n)?;
    let support: Vec<usize> = (0..config.support_size).collect();
    let adv = build_adversarial_povm(&scheme, &support)?;
    let povm_report = validate_povm(&adv.to_povm())?;
    report.push(
        "completeness_residual",
        povm_report.completeness_residual,
        Provenance::Exact,
    );
    report.push(
        "min_effect_eigenvalue",
        povm_report.min_effect_eigenvalue,
        Provenance::Exact,
    );
    report.push(
        "max_conditional_deviation",
        adversarial_conditional_check(&scheme, &adv)?,
        Provenance::Exact,
    );
    report.push("indexed_effects", adv.effects.len() as f64, Provenance::Exact);
    Ok(())
}

fn run_data_hiding(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let dims = BipartiteDims::new(config.d_a, config.d_b)?;
    let n = config.message_bits();
    let ens = sample_ensemble(dims, 1, config.seed)?;
    let scheme = LockingScheme::new(ens, n)?;
    let prior = MessagePrior::uniform(n);
    let rep = data_hiding_eval(&scheme, &prior, config.n_effects, config.seed.child(1))?;
    report.push("max_posterior_hellinger", rep.max_hellinger, Provenance::MonteCarlo);
    report.push("max_posterior_tv", rep.max_tv, Provenance::MonteCarlo);
    report.push(
        "separable_y_sup",
        rep.separable_y_sup,
        Provenance::SearchLowerBound,
    );
    report.push(
        "effects_evaluated",
        rep.effects_evaluated as f64,
        Provenance::Exact,
    );
    Ok(())
}

fn run_embedding(config: &ExperimentConfig, report: &mut Report) -> Result<()> {
    let dims = BipartiteDims::new(config.d_a, config.d_b)?;
    let ens = sample_ensemble(dims, config.t, config.seed)?;
    let map = EmbeddingMap::new(ens);

    // Worst norm-identity residual over sampled states.
    let mut rng = config.seed.child(1).rng();
    let mut max_residual = 0.0f64;
    let identity_trials = config.trials.min(200);
    for _ in 0..identity_trials {
        let psi = PureState::new(sample_sphere(dims.d(), &mut rng), dims)
            .expect("sphere point is unit");
        max_residual = max_residual.max(norm_identity_check(&map, &psi)?);
    }
    report.push("norm_identity_max_residual", max_residual, Provenance::Exact);

    let opts = search_opts(config, config.seed.child(2));
    let dist = certify_distortion(&map, config.trials, Some(&opts), config.seed.child(3))?;
    report.push("distortion", dist.distortion, Provenance::SearchLowerBound);
    report.push("min_ratio", dist.min_ratio, Provenance::SearchLowerBound);
    report.push("max_ratio", dist.max_ratio, Provenance::SearchLowerBound);
    report.push("scale_analytic", dist.scale_analytic, Provenance::MonteCarlo);
    report.push("scale_median", dist.scale_median, Provenance::MonteCarlo);

    let dv = dvoretzky_dimension(config.d_a * config.t, config.d_b, config.eps)?;
    report.push("dvoretzky_dimension", dv.dimension, Provenance::ClosedForm);
    report.push("dvoretzky_prior_art", dv.prior_art, Provenance::ClosedForm);

    if config.export_map {
        let matrices: Vec<MatrixJson> = (0..map.ensemble().t())
            .map(|k| MatrixJson::from_matrix(&map.ensemble().op(k).to_dense()))
            .collect();
        report.matrices = Some(matrices);
    }
    Ok(())
}

/// Sanity helper used by tests: uniform distribution over the measurement
/// outcomes of the configured A system.
pub fn uniform_marginal(config: &ExperimentConfig) -> ProbDist {
    ProbDist::uniform(config.d_a)
}
