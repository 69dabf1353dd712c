//! Uncertainty functionals of unitary ensembles.
//!
//! For an ensemble `U_1, ..., U_t` on `H_A (x) H_B` and a pure state `psi`,
//! the central quantity is the quadratic-mean Hellinger deviation of the
//! measurement marginals from uniform,
//!
//! ```text
//! Y(psi) = sqrt( (1/t) sum_k D_H(p^A_{U_k psi}, Unif([d_A]))^2 ),
//! ```
//!
//! together with its fidelity form `1 - Y^2`, the total-variation and entropy
//! averages, the ensemble average `R = E Y`, and worst-case searches over the
//! full sphere, the product-state manifold, or explicit state lists.

use rayon::prelude::*;

use crate::divergences::{hellinger, shannon_entropy, total_variation, ProbDist};
use crate::linalg::{hs_norm, BipartiteDims, CMatrix, CVector, C64};
use crate::measurement::{marginal_a_of_entries, PureState};
use crate::randomness::{sample_haar_qr, sample_sphere, HaarFactors, Seed};
use crate::stats::mean_and_se;
use crate::{Error, Result};

/// Regularization inside `sqrt(p)` derivatives; point-mass marginals sit
/// exactly on the square-root singularity.
const GRAD_REG: f64 = 1e-12;

/// A member of an ensemble: either a dense matrix or a Haar unitary in
/// factored (reflector stack) form. The factored form samples and applies in
/// `O(d^2)`, which is what makes large `(d, t)` Monte Carlo feasible.
#[derive(Debug, Clone)]
pub enum UnitaryOp {
    Dense(CMatrix),
    Factored(HaarFactors),
}

impl UnitaryOp {
    pub fn dim(&self) -> usize {
        match self {
            UnitaryOp::Dense(m) => m.rows(),
            UnitaryOp::Factored(f) => f.dim(),
        }
    }

    pub fn apply_in_place(&self, scratch: &mut [C64]) {
        match self {
            UnitaryOp::Dense(m) => {
                let v = CVector::new(scratch.to_vec()).expect("finite");
                let out = m.matvec(&v);
                scratch.copy_from_slice(out.entries());
            }
            UnitaryOp::Factored(f) => f.apply_in_place(scratch),
        }
    }

    pub fn apply_adjoint_in_place(&self, scratch: &mut [C64]) {
        match self {
            UnitaryOp::Dense(m) => {
                let v = CVector::new(scratch.to_vec()).expect("finite");
                let out = m.adjoint_matvec(&v);
                scratch.copy_from_slice(out.entries());
            }
            UnitaryOp::Factored(f) => f.apply_adjoint_in_place(scratch),
        }
    }

    /// Materializes a dense copy.
    pub fn to_dense(&self) -> CMatrix {
        match self {
            UnitaryOp::Dense(m) => m.clone(),
            UnitaryOp::Factored(f) => f.to_dense(),
        }
    }
}

/// Ordered list of `t` unitaries acting on a bipartite space.
#[derive(Debug, Clone)]
pub struct UnitaryEnsemble {
    ops: Vec<UnitaryOp>,
    dims: BipartiteDims,
}

impl UnitaryEnsemble {
    /// Builds from dense matrices, checking unitarity to `1e-9`.
    pub fn from_matrices(matrices: Vec<CMatrix>, dims: BipartiteDims) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::Domain("ensemble needs t >= 1".into()));
        }
        for m in &matrices {
            if m.rows() != dims.d() || m.cols() != dims.d() {
                return Err(Error::DimensionMismatch {
                    context: "UnitaryEnsemble::from_matrices",
                    expected: dims.d(),
                    got: m.rows(),
                });
            }
            let res = m.unitarity_residual();
            if res > 1e-9 {
                return Err(Error::InvalidState(format!(
                    "ensemble member not unitary, residual {res:.3e}"
                )));
            }
        }
        Ok(Self {
            ops: matrices.into_iter().map(UnitaryOp::Dense).collect(),
            dims,
        })
    }

    /// Fresh i.i.d. Haar members via QR of Ginibre matrices (dense form).
    pub fn sample_qr(dims: BipartiteDims, t: usize, seed: Seed) -> Result<Self> {
        let mut rng = seed.rng();
        let ops = (0..t)
            .map(|_| Ok(UnitaryOp::Dense(sample_haar_qr(dims.d(), &mut rng)?)))
            .collect::<Result<Vec<_>>>()?;
        if ops.is_empty() {
            return Err(Error::Domain("ensemble needs t >= 1".into()));
        }
        Ok(Self { ops, dims })
    }

    /// Fresh i.i.d. Haar members in factored form; `O(t d^2)` to sample.
    pub fn sample_factored(dims: BipartiteDims, t: usize, seed: Seed) -> Result<Self> {
        let mut rng = seed.rng();
        let ops = (0..t)
            .map(|_| Ok(UnitaryOp::Factored(HaarFactors::sample(dims.d(), &mut rng)?)))
            .collect::<Result<Vec<_>>>()?;
        if ops.is_empty() {
            return Err(Error::Domain("ensemble needs t >= 1".into()));
        }
        Ok(Self { ops, dims })
    }

    pub fn t(&self) -> usize {
        self.ops.len()
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }

    pub fn op(&self, k: usize) -> &UnitaryOp {
        &self.ops[k]
    }

    pub fn apply(&self, k: usize, v: &CVector) -> CVector {
        let mut w = v.entries().to_vec();
        self.ops[k].apply_in_place(&mut w);
        CVector::new(w).expect("unitary image is finite")
    }

    pub fn apply_adjoint(&self, k: usize, v: &CVector) -> CVector {
        let mut w = v.entries().to_vec();
        self.ops[k].apply_adjoint_in_place(&mut w);
        CVector::new(w).expect("unitary image is finite")
    }

    /// `sqrt(sum_k ||U_k - V_k||_HS^2)`; the distance the Lipschitz bound is
    /// stated in. Materializes dense copies, so intended for small dims.
    pub fn hs_distance(&self, other: &UnitaryEnsemble) -> Result<f64> {
        if self.t() != other.t() || self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                context: "UnitaryEnsemble::hs_distance",
                expected: self.t(),
                got: other.t(),
            });
        }
        let mut acc = 0.0;
        for (a, b) in self.ops.iter().zip(&other.ops) {
            let diff = a.to_dense().sub(&b.to_dense());
            let n = hs_norm(&diff);
            acc += n * n;
        }
        Ok(acc.sqrt())
    }

    fn check_state(&self, psi: &PureState) -> Result<()> {
        if psi.dims() != self.dims {
            return Err(Error::DimensionMismatch {
                context: "ensemble/state dims",
                expected: self.dims.d(),
                got: psi.dims().d(),
            });
        }
        Ok(())
    }
}

/// `1 - F(p^A_{U_k psi}, Unif)` summed into the quadratic mean, raw-slice
/// version used by the optimizers.
fn y_squared_of_entries(ens: &UnitaryEnsemble, entries: &[C64], scratch: &mut Vec<C64>) -> f64 {
    1.0 - mean_fidelity_of_entries(ens, entries, scratch)
}

fn mean_fidelity_of_entries(
    ens: &UnitaryEnsemble,
    entries: &[C64],
    scratch: &mut Vec<C64>,
) -> f64 {
    let dims = ens.dims();
    let inv_sqrt_da = 1.0 / (dims.d_a as f64).sqrt();
    let mut acc = 0.0;
    for k in 0..ens.t() {
        scratch.clear();
        scratch.extend_from_slice(entries);
        ens.ops[k].apply_in_place(scratch);
        let mut fid = 0.0;
        for a in 0..dims.d_a {
            let block = &scratch[a * dims.d_b..(a + 1) * dims.d_b];
            let p: f64 = block.iter().map(|z| z.norm_sqr()).sum();
            fid += p.sqrt() * inv_sqrt_da;
        }
        acc += fid.min(1.0);
    }
    acc / ens.t() as f64
}

fn mean_tv_of_entries(ens: &UnitaryEnsemble, entries: &[C64], scratch: &mut Vec<C64>) -> f64 {
    let dims = ens.dims();
    let inv_da = 1.0 / dims.d_a as f64;
    let mut acc = 0.0;
    for k in 0..ens.t() {
        scratch.clear();
        scratch.extend_from_slice(entries);
        ens.ops[k].apply_in_place(scratch);
        let mut tv = 0.0;
        for a in 0..dims.d_a {
            let block = &scratch[a * dims.d_b..(a + 1) * dims.d_b];
            let p: f64 = block.iter().map(|z| z.norm_sqr()).sum();
            tv += (p - inv_da).abs();
        }
        acc += 0.5 * tv;
    }
    acc / ens.t() as f64
}

/// `Y(psi)`: quadratic-mean Hellinger distance of the marginals from uniform.
pub fn eval_y(ens: &UnitaryEnsemble, psi: &PureState) -> Result<f64> {
    ens.check_state(psi)?;
    let mut scratch = Vec::new();
    Ok(y_squared_of_entries(ens, psi.vector().entries(), &mut scratch)
        .max(0.0)
        .sqrt())
}

/// Mean fidelity of the marginals with uniform; equals `1 - Y^2`.
pub fn eval_fidelity_uncertainty(ens: &UnitaryEnsemble, psi: &PureState) -> Result<f64> {
    ens.check_state(psi)?;
    let mut scratch = Vec::new();
    Ok(mean_fidelity_of_entries(ens, psi.vector().entries(), &mut scratch))
}

/// Mean total-variation distance of the marginals from uniform.
pub fn eval_metric_uncertainty(ens: &UnitaryEnsemble, psi: &PureState) -> Result<f64> {
    ens.check_state(psi)?;
    let mut scratch = Vec::new();
    Ok(mean_tv_of_entries(ens, psi.vector().entries(), &mut scratch))
}

/// Mean Shannon entropy (nats) of the marginals; lies in `[0, log d_A]`.
pub fn eval_entropic_uncertainty(ens: &UnitaryEnsemble, psi: &PureState) -> Result<f64> {
    ens.check_state(psi)?;
    let dims = ens.dims();
    let mut scratch = psi.vector().entries().to_vec();
    let mut acc = 0.0;
    for k in 0..ens.t() {
        scratch.copy_from_slice(psi.vector().entries());
        ens.ops[k].apply_in_place(&mut scratch);
        let p = marginal_a_of_entries(&scratch, dims);
        acc += shannon_entropy(&p);
    }
    Ok(acc / ens.t() as f64)
}

/// Monte Carlo summary of `R = E Y` and the companion mean fidelity.
#[derive(Debug, Clone)]
pub struct REstimate {
    pub y_mean: f64,
    pub y_se: f64,
    pub fidelity_mean: f64,
    pub fidelity_se: f64,
    pub trials: usize,
}

/// Per-trial `(y, mean fidelity)` values of the `R` estimator.
///
/// Since the image of a fixed unit vector under a Haar unitary is uniform on
/// the sphere (the first-column property of the recursive representation),
/// each `U_k psi` is drawn directly as a sphere point; the estimator is
/// equal in distribution to building full ensembles. [`estimate_r_at`] keeps
/// the explicit-ensemble route, used to verify the reference-state
/// independence rather than assume it.
pub fn estimate_r_samples(
    dims: BipartiteDims,
    t: usize,
    trials: usize,
    seed: Seed,
) -> Result<Vec<(f64, f64)>> {
    if trials < 2 {
        return Err(Error::Domain("need at least 2 trials".into()));
    }
    let inv_sqrt_da = 1.0 / (dims.d_a as f64).sqrt();
    Ok((0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.child(i as u64).rng();
            let mut fid_sum = 0.0;
            for _ in 0..t {
                let z = sample_sphere(dims.d(), &mut rng);
                let mut fid = 0.0;
                for a in 0..dims.d_a {
                    let block = &z.entries()[a * dims.d_b..(a + 1) * dims.d_b];
                    let p: f64 = block.iter().map(|w| w.norm_sqr()).sum();
                    fid += p.sqrt() * inv_sqrt_da;
                }
                fid_sum += fid.min(1.0);
            }
            let mean_fid = fid_sum / t as f64;
            ((1.0 - mean_fid).max(0.0).sqrt(), mean_fid)
        })
        .collect())
}

/// Monte Carlo estimate of `R = E Y` (and the companion mean fidelity) over
/// fresh Haar ensembles at a fixed reference state.
pub fn estimate_r(dims: BipartiteDims, t: usize, trials: usize, seed: Seed) -> Result<REstimate> {
    summarize_r(estimate_r_samples(dims, t, trials, seed)?)
}

/// Same estimator via explicit Haar ensembles applied to an arbitrary
/// reference state.
pub fn estimate_r_at(
    dims: BipartiteDims,
    t: usize,
    trials: usize,
    seed: Seed,
    reference: &PureState,
) -> Result<REstimate> {
    if trials < 2 {
        return Err(Error::Domain("need at least 2 trials".into()));
    }
    if reference.dims() != dims {
        return Err(Error::DimensionMismatch {
            context: "estimate_r_at",
            expected: dims.d(),
            got: reference.dims().d(),
        });
    }
    let per_trial: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let ens = UnitaryEnsemble::sample_factored(dims, t, seed.child(i as u64))
                .expect("valid dims");
            let mut scratch = Vec::new();
            let f = mean_fidelity_of_entries(&ens, reference.vector().entries(), &mut scratch);
            ((1.0 - f).max(0.0).sqrt(), f)
        })
        .collect();
    summarize_r(per_trial)
}

fn summarize_r(per_trial: Vec<(f64, f64)>) -> Result<REstimate> {
    let ys: Vec<f64> = per_trial.iter().map(|p| p.0).collect();
    let fs: Vec<f64> = per_trial.iter().map(|p| p.1).collect();
    let (y_mean, y_se) = mean_and_se(&ys);
    let (fidelity_mean, fidelity_se) = mean_and_se(&fs);
    Ok(REstimate {
        y_mean,
        y_se,
        fidelity_mean,
        fidelity_se,
        trials: ys.len(),
    })
}

/// Domain over which the worst case is searched.
#[derive(Debug, Clone)]
pub enum StateSubset {
    FullSphere,
    Separable,
    ExplicitList(Vec<PureState>),
}

/// Which functional the search ascends.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchObjective {
    /// Maximize `Y^2` (the quadratic-mean Hellinger form). Default.
    HellingerY,
    /// Maximize the mean total-variation distance. Piecewise linear; the
    /// subgradient breaks ties toward `+` at `p(a) = 1/d_A`.
    TotalVariation,
}

#[derive(Debug, Clone)]
pub struct SearchOpts {
    pub restarts: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub init_step: f64,
    pub objective: SearchObjective,
    pub seed: Seed,
}

impl SearchOpts {
    pub fn new(seed: Seed) -> Self {
        Self {
            restarts: 20,
            max_iters: 5000,
            grad_tol: 1e-8,
            init_step: 0.5,
            objective: SearchObjective::HellingerY,
            seed,
        }
    }

    /// Reduced-budget options for large-dimension trend experiments.
    pub fn light(seed: Seed, restarts: usize, max_iters: usize) -> Self {
        Self {
            restarts,
            max_iters,
            ..Self::new(seed)
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchDiagnostics {
    pub restarts: usize,
    pub total_iterations: usize,
    pub converged: bool,
}

/// Result of a worst-case search. Every `epsilon_*` is a certified lower
/// bound on the corresponding supremum: it was attained by an explicit state.
#[derive(Debug, Clone)]
pub struct UncertaintyReport {
    /// `1 -` (smallest mean fidelity found) `= max Y^2` over visited optima.
    pub epsilon_fidelity: f64,
    /// Largest mean total-variation distance over visited optima.
    pub epsilon_metric: f64,
    /// Largest entropy deficit `log d_A - mean entropy` over visited optima.
    pub epsilon_entropic: f64,
    /// Largest `Y` value found.
    pub best_y: f64,
    pub worst_state: PureState,
    pub diagnostics: SearchDiagnostics,
}

struct GradientWorkspace {
    z: Vec<C64>,
    grad: Vec<C64>,
    scratch: Vec<C64>,
}

impl GradientWorkspace {
    fn new(d: usize) -> Self {
        Self {
            z: vec![C64::new(0.0, 0.0); d],
            grad: vec![C64::new(0.0, 0.0); d],
            scratch: Vec::with_capacity(d),
        }
    }
}

fn objective_of(ens: &UnitaryEnsemble, obj: SearchObjective, psi: &[C64], ws: &mut GradientWorkspace) -> f64 {
    match obj {
        SearchObjective::HellingerY => y_squared_of_entries(ens, psi, &mut ws.scratch),
        SearchObjective::TotalVariation => mean_tv_of_entries(ens, psi, &mut ws.scratch),
    }
}

/// Euclidean ascent direction `g` with `f(psi + delta) ~ f + 2 Re<g, delta>`,
/// written into `ws.grad`.
fn gradient_of(
    ens: &UnitaryEnsemble,
    obj: SearchObjective,
    psi: &[C64],
    ws: &mut GradientWorkspace,
    sign: f64,
) {
    let dims = ens.dims();
    let t = ens.t();
    let inv_sqrt_da = 1.0 / (dims.d_a as f64).sqrt();
    let inv_da = 1.0 / dims.d_a as f64;
    ws.grad.iter_mut().for_each(|g| *g = C64::new(0.0, 0.0));
    for k in 0..t {
        ws.z.copy_from_slice(psi);
        ens.ops[k].apply_in_place(&mut ws.z);
        // Per-block weights applied to z, then pulled back through U_k†.
        match obj {
            SearchObjective::HellingerY => {
                // d(Y^2)/d(conj psi) = -(1/t) sum_k U_k† w_k with
                // w_(a,b) = z_(a,b) / (2 sqrt(d_A) sqrt(p_a)).
                for a in 0..dims.d_a {
                    let block = &mut ws.z[a * dims.d_b..(a + 1) * dims.d_b];
                    let p: f64 = block.iter().map(|z| z.norm_sqr()).sum();
                    let w = -inv_sqrt_da / (2.0 * (p + GRAD_REG).sqrt());
                    block.iter_mut().for_each(|z| *z *= w);
                }
            }
            SearchObjective::TotalVariation => {
                for a in 0..dims.d_a {
                    let block = &mut ws.z[a * dims.d_b..(a + 1) * dims.d_b];
                    let p: f64 = block.iter().map(|z| z.norm_sqr()).sum();
                    let s = if p >= inv_da { 0.5 } else { -0.5 };
                    block.iter_mut().for_each(|z| *z *= s);
                }
            }
        }
        ens.ops[k].apply_adjoint_in_place(&mut ws.z);
        let scale = sign / t as f64;
        for (g, z) in ws.grad.iter_mut().zip(&ws.z) {
            *g += z * scale;
        }
    }
}

fn project_tangent(psi: &[C64], grad: &mut [C64]) -> f64 {
    let mut overlap = C64::new(0.0, 0.0);
    for (p, g) in psi.iter().zip(grad.iter()) {
        overlap += p.conj() * g;
    }
    let mut norm_sqr = 0.0;
    for (g, p) in grad.iter_mut().zip(psi) {
        *g -= overlap * p;
        norm_sqr += g.norm_sqr();
    }
    norm_sqr.sqrt()
}

fn normalize_in_place(v: &mut [C64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let inv = 1.0 / norm;
    v.iter_mut().for_each(|z| *z *= inv);
}

struct RestartOutcome {
    value: f64,
    state: Vec<C64>,
    iterations: usize,
    converged: bool,
}

/// Projected gradient ascent on the unit sphere with normalization
/// retraction, step halving on non-improvement and growth on success.
fn ascend_sphere(
    ens: &UnitaryEnsemble,
    obj: SearchObjective,
    sign: f64,
    start: Vec<C64>,
    opts: &SearchOpts,
) -> RestartOutcome {
    let d = ens.dims().d();
    let mut ws = GradientWorkspace::new(d);
    let mut psi = start;
    normalize_in_place(&mut psi);
    let mut value = sign * objective_of(ens, obj, &psi, &mut ws);
    let mut step = opts.init_step;
    let mut candidate = vec![C64::new(0.0, 0.0); d];
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..opts.max_iters {
        iterations += 1;
        gradient_of(ens, obj, &psi, &mut ws, sign);
        let gnorm = project_tangent(&psi, &mut ws.grad);
        if gnorm < opts.grad_tol {
            converged = true;
            break;
        }
        let mut improved = false;
        while step > 1e-14 {
            for ((c, p), g) in candidate.iter_mut().zip(&psi).zip(&ws.grad) {
                *c = p + g * step;
            }
            normalize_in_place(&mut candidate);
            let cval = sign * objective_of(ens, obj, &candidate, &mut ws);
            if cval > value {
                std::mem::swap(&mut psi, &mut candidate);
                value = cval;
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            converged = true;
            break;
        }
    }
    RestartOutcome {
        value,
        state: psi,
        iterations,
        converged,
    }
}

/// Alternating ascent on the product of two spheres; the state is retracted
/// as `psi_A (x) psi_B` after each factor update.
fn ascend_separable(
    ens: &UnitaryEnsemble,
    obj: SearchObjective,
    start_a: Vec<C64>,
    start_b: Vec<C64>,
    opts: &SearchOpts,
) -> RestartOutcome {
    let dims = ens.dims();
    let (d_a, d_b) = (dims.d_a, dims.d_b);
    let d = dims.d();
    let mut ws = GradientWorkspace::new(d);
    let mut a = start_a;
    let mut b = start_b;
    normalize_in_place(&mut a);
    normalize_in_place(&mut b);
    let tensor_of = |a: &[C64], b: &[C64]| {
        let mut out = Vec::with_capacity(d);
        for ai in a {
            for bj in b {
                out.push(ai * bj);
            }
        }
        out
    };
    let mut psi = tensor_of(&a, &b);
    let mut value = objective_of(ens, obj, &psi, &mut ws);
    let mut step = opts.init_step;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..opts.max_iters {
        iterations += 1;
        gradient_of(ens, obj, &psi, &mut ws, 1.0);
        // Chain rule onto each factor's sphere.
        let mut ga = vec![C64::new(0.0, 0.0); d_a];
        let mut gb = vec![C64::new(0.0, 0.0); d_b];
        for i in 0..d_a {
            for j in 0..d_b {
                let g = ws.grad[i * d_b + j];
                ga[i] += g * b[j].conj();
                gb[j] += g * a[i].conj();
            }
        }
        let na = project_tangent(&a, &mut ga);
        let nb = project_tangent(&b, &mut gb);
        if na.max(nb) < opts.grad_tol {
            converged = true;
            break;
        }
        let mut improved = false;
        while step > 1e-14 {
            let mut a2 = a.clone();
            for (x, g) in a2.iter_mut().zip(&ga) {
                *x += g * step;
            }
            normalize_in_place(&mut a2);
            let mut b2 = b.clone();
            for (x, g) in b2.iter_mut().zip(&gb) {
                *x += g * step;
            }
            normalize_in_place(&mut b2);
            let cand = tensor_of(&a2, &b2);
            let cval = objective_of(ens, obj, &cand, &mut ws);
            if cval > value {
                a = a2;
                b = b2;
                psi = cand;
                value = cval;
                step *= 1.5;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            converged = true;
            break;
        }
    }
    RestartOutcome {
        value,
        state: psi,
        iterations,
        converged,
    }
}

/// Maximizes the chosen uncertainty functional over the requested subset by
/// multi-start projected gradient ascent (full sphere), alternating ascent on
/// the product of spheres (separable), or exhaustive evaluation (explicit
/// lists). The reported values are certified lower bounds on the suprema;
/// non-convergence is reported in the diagnostics, never fatal.
pub fn worst_case_search(
    ens: &UnitaryEnsemble,
    subset: &StateSubset,
    opts: &SearchOpts,
) -> Result<UncertaintyReport> {
    let dims = ens.dims();
    let d = dims.d();
    let outcomes: Vec<RestartOutcome> = match subset {
        StateSubset::ExplicitList(states) => {
            if states.is_empty() {
                return Err(Error::Domain("explicit list must be non-empty".into()));
            }
            let mut ws = GradientWorkspace::new(d);
            states
                .iter()
                .map(|s| {
                    ens.check_state(s)?;
                    Ok(RestartOutcome {
                        value: objective_of(ens, opts.objective, s.vector().entries(), &mut ws),
                        state: s.vector().entries().to_vec(),
                        iterations: 0,
                        converged: true,
                    })
                })
                .collect::<Result<Vec<_>>>()?
        }
        StateSubset::FullSphere => (0..opts.restarts.max(1))
            .into_par_iter()
            .map(|r| {
                let start = if r == 0 {
                    // Structured start: the preimage of a product basis state
                    // under the first member has a point-mass marginal there.
                    let mut e = vec![C64::new(0.0, 0.0); d];
                    e[0] = C64::new(1.0, 0.0);
                    ens.ops[0].apply_adjoint_in_place(&mut e);
                    e
                } else {
                    let mut rng = opts.seed.child(r as u64).rng();
                    sample_sphere(d, &mut rng).entries().to_vec()
                };
                ascend_sphere(ens, opts.objective, 1.0, start, opts)
            })
            .collect(),
        StateSubset::Separable => (0..opts.restarts.max(1))
            .into_par_iter()
            .map(|r| {
                let mut rng = opts.seed.child(r as u64).rng();
                let a = sample_sphere(dims.d_a, &mut rng).entries().to_vec();
                let b = sample_sphere(dims.d_b, &mut rng).entries().to_vec();
                ascend_separable(ens, opts.objective, a, b, opts)
            })
            .collect(),
    };

    let best_idx = outcomes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.value.partial_cmp(&b.1.value).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    let total_iterations: usize = outcomes.iter().map(|o| o.iterations).sum();
    let converged = outcomes.iter().any(|o| o.converged);

    // Evaluate all three functionals at every visited optimum; each maximum
    // is a valid lower bound for its own supremum.
    let mut scratch = Vec::new();
    let mut eps_fidelity: f64 = 0.0;
    let mut eps_metric: f64 = 0.0;
    let mut min_entropy_mean = f64::INFINITY;
    for o in &outcomes {
        eps_fidelity = eps_fidelity.max(y_squared_of_entries(ens, &o.state, &mut scratch));
        eps_metric = eps_metric.max(mean_tv_of_entries(ens, &o.state, &mut scratch));
        let mut ent = 0.0;
        for k in 0..ens.t() {
            scratch.clear();
            scratch.extend_from_slice(&o.state);
            ens.ops[k].apply_in_place(&mut scratch);
            ent += shannon_entropy(&marginal_a_of_entries(&scratch, dims));
        }
        min_entropy_mean = min_entropy_mean.min(ent / ens.t() as f64);
    }

    let best = &outcomes[best_idx];
    let worst_state = PureState::new(
        CVector::new(best.state.clone())?.normalized()?,
        dims,
    )?;
    let best_y = y_squared_of_entries(ens, best.state.as_slice(), &mut scratch)
        .max(0.0)
        .sqrt();
    Ok(UncertaintyReport {
        epsilon_fidelity: eps_fidelity.clamp(0.0, 1.0),
        epsilon_metric: eps_metric.clamp(0.0, 1.0),
        epsilon_entropic: ((dims.d_a as f64).ln() - min_entropy_mean).max(0.0),
        best_y,
        worst_state,
        diagnostics: SearchDiagnostics {
            restarts: outcomes.len(),
            total_iterations,
            converged,
        },
    })
}

/// Finds a state with nearly uniform marginals (a minimizer of `Y`), used to
/// certify the upper end of the embedding norm ratios. Returns `(y, state)`.
pub fn min_y_search(ens: &UnitaryEnsemble, opts: &SearchOpts) -> Result<(f64, PureState)> {
    let d = ens.dims().d();
    let outcomes: Vec<RestartOutcome> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut rng = opts.seed.child(r as u64).rng();
            let start = sample_sphere(d, &mut rng).entries().to_vec();
            ascend_sphere(ens, SearchObjective::HellingerY, -1.0, start, opts)
        })
        .collect();
    let best = outcomes
        .into_iter()
        .max_by(|a, b| a.value.partial_cmp(&b.value).unwrap())
        .unwrap();
    let y = (-best.value).max(0.0).sqrt();
    let state = PureState::new(CVector::new(best.state)?.normalized()?, ens.dims())?;
    Ok((y, state))
}

/// Exact width of the product-state set for a Gaussian direction:
/// `sup { Re <G|psi_A (x) psi_B> : unit psi_A, psi_B }` equals the largest
/// singular value of the `d_A x d_B` reshaping of `G`.
pub fn separable_width_exact(g: &crate::randomness::GaussianVector, dims: BipartiteDims) -> Result<f64> {
    if g.dim() != dims.d() {
        return Err(Error::DimensionMismatch {
            context: "separable_width_exact",
            expected: dims.d(),
            got: g.dim(),
        });
    }
    let m = CMatrix::new(g.vector.entries().to_vec(), dims.d_a, dims.d_b)?;
    Ok(crate::linalg::operator_norm(&m))
}

/// Pathwise Lipschitz check of the searched supremum proxy.
#[derive(Debug, Clone)]
pub struct LipschitzReport {
    /// `|f(ens1) - f(ens2)| / hs_distance` with `f` the max of `Y` over the
    /// shared sampled states.
    pub ratio: f64,
    /// `1 / sqrt(2 t)`.
    pub bound: f64,
    pub hs_distance: f64,
}

/// Compares the max-over-sampled-states `Y` objective between two ensembles
/// against the `1/sqrt(2t)` Lipschitz constant in the summed HS distance.
pub fn lipschitz_check(
    ens1: &UnitaryEnsemble,
    ens2: &UnitaryEnsemble,
    n_states: usize,
    seed: Seed,
) -> Result<LipschitzReport> {
    if ens1.t() != ens2.t() || ens1.dims() != ens2.dims() {
        return Err(Error::DimensionMismatch {
            context: "lipschitz_check",
            expected: ens1.t(),
            got: ens2.t(),
        });
    }
    let d = ens1.dims().d();
    let mut rng = seed.rng();
    let mut scratch = Vec::new();
    let mut f1 = 0.0f64;
    let mut f2 = 0.0f64;
    for _ in 0..n_states.max(1) {
        let psi = sample_sphere(d, &mut rng);
        let y1 = y_squared_of_entries(ens1, psi.entries(), &mut scratch).max(0.0).sqrt();
        let y2 = y_squared_of_entries(ens2, psi.entries(), &mut scratch).max(0.0).sqrt();
        f1 = f1.max(y1);
        f2 = f2.max(y2);
    }
    let dist = ens1.hs_distance(ens2)?;
    let ratio = if dist > 1e-300 {
        (f1 - f2).abs() / dist
    } else {
        0.0
    };
    Ok(LipschitzReport {
        ratio,
        bound: 1.0 / (2.0 * ens1.t() as f64).sqrt(),
        hs_distance: dist,
    })
}

/// Empirical subgaussian diagnostic for increments `Y_psi - Y_phi` over fresh
/// Haar ensembles.
#[derive(Debug, Clone)]
pub struct IncrementReport {
    pub std_dev: f64,
    /// `||psi - phi|| / sqrt(t d)`: the scale the tail bound is stated in.
    pub predicted_scale: f64,
    /// `std_dev / predicted_scale`; 0 when the states coincide up to phase.
    pub std_ratio: f64,
    /// `(u, empirical P(|delta| >= u * predicted_scale))` for u = 1, 2, 3.
    pub exceedance: Vec<(f64, f64)>,
    pub trials: usize,
}

pub fn increment_diagnostic(
    dims: BipartiteDims,
    t: usize,
    psi: &PureState,
    phi: &PureState,
    trials: usize,
    seed: Seed,
) -> Result<IncrementReport> {
    if psi.dims() != dims || phi.dims() != dims {
        return Err(Error::DimensionMismatch {
            context: "increment_diagnostic",
            expected: dims.d(),
            got: psi.dims().d(),
        });
    }
    let deltas: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let ens = UnitaryEnsemble::sample_factored(dims, t, seed.child(i as u64))
                .expect("valid dims");
            let mut scratch = Vec::new();
            let y1 = y_squared_of_entries(&ens, psi.vector().entries(), &mut scratch)
                .max(0.0)
                .sqrt();
            let y2 = y_squared_of_entries(&ens, phi.vector().entries(), &mut scratch)
                .max(0.0)
                .sqrt();
            y1 - y2
        })
        .collect();
    let diff_norm = psi.vector().sub(phi.vector()).norm();
    let predicted_scale = diff_norm / ((t * dims.d()) as f64).sqrt();
    let std_dev = if deltas.len() >= 2 {
        crate::stats::sample_variance(&deltas).sqrt()
    } else {
        0.0
    };
    let std_ratio = if predicted_scale > 1e-300 {
        std_dev / predicted_scale
    } else {
        0.0
    };
    let exceedance = [1.0f64, 2.0, 3.0]
        .iter()
        .map(|&u| {
            let thresh = u * predicted_scale;
            let freq = if predicted_scale > 1e-300 {
                deltas.iter().filter(|&&x| x.abs() >= thresh).count() as f64
                    / deltas.len() as f64
            } else {
                0.0
            };
            (u, freq)
        })
        .collect();
    Ok(IncrementReport {
        std_dev,
        predicted_scale,
        std_ratio,
        exceedance,
        trials: deltas.len(),
    })
}

/// Convenience: mean Hellinger-squared objective used by tests that compose
/// the marginal / Hellinger / mean steps through the public pieces.
pub fn y_via_composition(ens: &UnitaryEnsemble, psi: &PureState) -> Result<f64> {
    ens.check_state(psi)?;
    let unif = ProbDist::uniform(ens.dims().d_a);
    let mut acc = 0.0;
    for k in 0..ens.t() {
        let moved = ens.apply(k, psi.vector());
        let p = marginal_a_of_entries(moved.entries(), ens.dims());
        let dh = hellinger(&p, &unif)?;
        acc += dh * dh;
    }
    Ok((acc / ens.t() as f64).sqrt())
}

/// Mean TV against uniform through the public divergence path; oracle twin
/// of [`eval_metric_uncertainty`].
pub fn tv_via_composition(ens: &UnitaryEnsemble, psi: &PureState) -> Result<f64> {
    ens.check_state(psi)?;
    let unif = ProbDist::uniform(ens.dims().d_a);
    let mut acc = 0.0;
    for k in 0..ens.t() {
        let moved = ens.apply(k, psi.vector());
        let p = marginal_a_of_entries(moved.entries(), ens.dims());
        acc += total_variation(&p, &unif)?;
    }
    Ok(acc / ens.t() as f64)
}
