//! Information locking: the random-unitary encoding scheme, posterior
//! analysis under rank-one measurements, Hellinger/TV locking audits,
//! key-length bounds, the adversarial unlocking measurement, and the
//! single-unitary data-hiding variant against separable effects.
//!
//! Messages, keys and outcomes are 0-indexed; the message register is the A
//! system with computational basis states `|x>`.

use rand::Rng;

use crate::divergences::{hellinger, min_entropy, total_variation, ProbDist};
use crate::linalg::{nullspace_vector, CMatrix, CVector};
use crate::measurement::{marginal_a_of_entries, Povm, RankOneEffect, PSD_TOL};
use crate::randomness::{sample_sphere, Seed};
use crate::uncertainty::{
    worst_case_search, SearchOpts, StateSubset, UnitaryEnsemble,
};
use crate::{Error, Result};

/// Encoding scheme: `E(x, k) = (1/d_B) sum_b U_k† (|x><x| (x) |b><b|) U_k`,
/// with `d_A = 2^n` message states and `t` keys.
#[derive(Debug, Clone)]
pub struct LockingScheme {
    ensemble: UnitaryEnsemble,
    n: u32,
}

impl LockingScheme {
    pub fn new(ensemble: UnitaryEnsemble, n: u32) -> Result<Self> {
        let expected = 1usize << n;
        if ensemble.dims().d_a != expected {
            return Err(Error::DimensionMismatch {
                context: "LockingScheme::new (d_A = 2^n)",
                expected,
                got: ensemble.dims().d_a,
            });
        }
        Ok(Self { ensemble, n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn message_count(&self) -> usize {
        1usize << self.n
    }

    pub fn t(&self) -> usize {
        self.ensemble.t()
    }

    pub fn ensemble(&self) -> &UnitaryEnsemble {
        &self.ensemble
    }

    pub fn dims(&self) -> crate::linalg::BipartiteDims {
        self.ensemble.dims()
    }

    /// The encoded density operator for message `x` under key `k`:
    /// PSD, unit trace, rank `d_B`.
    pub fn encode(&self, x: usize, k: usize) -> Result<CMatrix> {
        let dims = self.dims();
        if x >= self.message_count() {
            return Err(Error::IndexOutOfRange {
                context: "encode message",
                index: x,
                size: self.message_count(),
            });
        }
        if k >= self.t() {
            return Err(Error::IndexOutOfRange {
                context: "encode key",
                index: k,
                size: self.t(),
            });
        }
        let d = dims.d();
        let mut rho = CMatrix::zeros(d, d);
        let w = 1.0 / dims.d_b as f64;
        for b in 0..dims.d_b {
            let u = self
                .ensemble
                .apply_adjoint(k, &CVector::basis(d, dims.flat(x, b)));
            rho.add_scaled_outer(&u, w);
        }
        Ok(rho)
    }
}

/// Prior distribution of the message.
#[derive(Debug, Clone)]
pub struct MessagePrior {
    dist: ProbDist,
}

impl MessagePrior {
    pub fn new(dist: ProbDist) -> Self {
        Self { dist }
    }

    pub fn uniform(n: u32) -> Self {
        Self {
            dist: ProbDist::uniform(1 << n),
        }
    }

    /// Uniform on a subset of messages; the extremal shape for the
    /// min-entropy bounds (`H_min = log2 |subset|`).
    pub fn uniform_on_subset(n: u32, subset: &[usize]) -> Result<Self> {
        let total = 1usize << n;
        if subset.is_empty() {
            return Err(Error::Domain("subset prior needs a non-empty subset".into()));
        }
        let mut weights = vec![0.0; total];
        for &x in subset {
            if x >= total {
                return Err(Error::IndexOutOfRange {
                    context: "prior subset",
                    index: x,
                    size: total,
                });
            }
            weights[x] = 1.0 / subset.len() as f64;
        }
        Ok(Self {
            dist: ProbDist::new(weights)?,
        })
    }

    pub fn point_mass(n: u32, x: usize) -> Self {
        Self {
            dist: ProbDist::point_mass(1 << n, x),
        }
    }

    pub fn dist(&self) -> &ProbDist {
        &self.dist
    }

    pub fn min_entropy_bits(&self) -> f64 {
        min_entropy(&self.dist)
    }
}

/// Maximum deviation of `(1/2) ||E(x,k) - E(x',k)||_1` from 1 over all
/// message pairs and keys. The supports under one key are orthogonal, so the
/// deviation is pure numerical error.
pub fn identification_check(scheme: &LockingScheme) -> Result<f64> {
    let mut max_dev = 0.0f64;
    for k in 0..scheme.t() {
        let encoded: Vec<CMatrix> = (0..scheme.message_count())
            .map(|x| scheme.encode(x, k))
            .collect::<Result<Vec<_>>>()?;
        for x in 0..encoded.len() {
            for x2 in (x + 1)..encoded.len() {
                let dist = 0.5 * crate::linalg::trace_norm(&encoded[x].sub(&encoded[x2]))?;
                max_dev = max_dev.max((dist - 1.0).abs());
            }
        }
    }
    Ok(max_dev)
}

/// Posterior message distribution given a rank-one measurement click:
/// `P(X = x | I) = mix(x) p(x) / alpha` where
/// `mix(x) = (1/t) sum_k p^A_{U_k e}(x)` and `alpha` normalizes.
/// The effect weight cancels.
pub fn posterior(
    scheme: &LockingScheme,
    prior: &MessagePrior,
    effect: &RankOneEffect,
) -> Result<ProbDist> {
    let mix = effect_marginal_mixture(scheme, effect)?;
    posterior_from_mixture(&mix, prior)
}

/// `(1/t) sum_k p^A_{U_k e}` for a rank-one effect direction `e`.
pub fn effect_marginal_mixture(scheme: &LockingScheme, effect: &RankOneEffect) -> Result<Vec<f64>> {
    let dims = scheme.dims();
    if effect.direction.dim() != dims.d() {
        return Err(Error::DimensionMismatch {
            context: "posterior effect",
            expected: dims.d(),
            got: effect.direction.dim(),
        });
    }
    let t = scheme.t();
    let mut mix = vec![0.0f64; dims.d_a];
    for k in 0..t {
        let moved = scheme.ensemble.apply(k, &effect.direction);
        let p = marginal_a_of_entries(moved.entries(), dims);
        for (m, w) in mix.iter_mut().zip(p.weights()) {
            *m += w / t as f64;
        }
    }
    Ok(mix)
}

fn posterior_from_mixture(mix: &[f64], prior: &MessagePrior) -> Result<ProbDist> {
    let weights: Vec<f64> = mix
        .iter()
        .zip(prior.dist.weights())
        .map(|(m, p)| m * p)
        .collect();
    let alpha: f64 = weights.iter().sum();
    if alpha < 1e-14 {
        return Err(Error::DegenerateOutcome(alpha));
    }
    ProbDist::new(weights.into_iter().map(|w| w / alpha).collect())
}

/// Posterior under a general (coarse) effect via the trace route
/// `P(X=x|I) ~ p(x) (1/t) sum_k Tr(E(x,k) M)`. Used as the independent
/// second path for the rank-one reduction identity.
pub fn coarse_posterior(
    scheme: &LockingScheme,
    prior: &MessagePrior,
    effect: &CMatrix,
) -> Result<ProbDist> {
    let d = scheme.dims().d();
    if effect.rows() != d || effect.cols() != d {
        return Err(Error::DimensionMismatch {
            context: "coarse_posterior",
            expected: d,
            got: effect.rows(),
        });
    }
    let t = scheme.t();
    let mut weights = vec![0.0f64; scheme.message_count()];
    for (x, w) in weights.iter_mut().enumerate() {
        let px = prior.dist.weights()[x];
        if px == 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for k in 0..t {
            let rho = scheme.encode(x, k)?;
            let mut tr = 0.0;
            for i in 0..d {
                for j in 0..d {
                    tr += (rho.at(i, j) * effect.at(j, i)).re;
                }
            }
            acc += tr / t as f64;
        }
        *w = px * acc;
    }
    let alpha: f64 = weights.iter().sum();
    if alpha < 1e-14 {
        return Err(Error::DegenerateOutcome(alpha));
    }
    ProbDist::new(weights.into_iter().map(|w| w / alpha).collect())
}

/// Worst posterior deviation from the prior over a collection of rank-one
/// effects.
#[derive(Debug, Clone)]
pub struct LockingAudit {
    pub max_hellinger: f64,
    pub max_tv: f64,
    pub effects_evaluated: usize,
    /// Effects whose click probability vanished under the prior. Posteriors
    /// condition on the click, so null outcomes carry no deviation; they can
    /// only occur when the prior misses part of the message space.
    pub degenerate_outcomes: usize,
}

pub fn verify_locking(
    scheme: &LockingScheme,
    prior: &MessagePrior,
    effects: &[RankOneEffect],
) -> Result<LockingAudit> {
    let mut max_hellinger = 0.0f64;
    let mut max_tv = 0.0f64;
    let mut degenerate_outcomes = 0usize;
    for effect in effects {
        let post = match posterior(scheme, prior, effect) {
            Ok(post) => post,
            Err(Error::DegenerateOutcome(_)) => {
                degenerate_outcomes += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        max_hellinger = max_hellinger.max(hellinger(&post, prior.dist())?);
        max_tv = max_tv.max(total_variation(&post, prior.dist())?);
    }
    Ok(LockingAudit {
        max_hellinger,
        max_tv,
        effects_evaluated: effects.len(),
        degenerate_outcomes,
    })
}

/// Hellinger locking level guaranteed for a scheme satisfying an
/// `eps^2`-fidelity uncertainty relation, at message min-entropy `l` out of
/// `n` bits: `2 eps / (2^((l-n)/2) - sqrt(2) eps)`, with the uniform-message
/// case `l = n` giving `eps` directly.
pub fn hellinger_locking_bound(eps: f64, l: f64, n: u32) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps {eps} outside (0, 1)")));
    }
    let nf = n as f64;
    if (l - nf).abs() < 1e-12 {
        return Ok(eps);
    }
    let gap = (l - nf) / 2.0;
    let denom_guard = 2f64.powf(l - nf);
    if denom_guard <= 2.0 * eps * eps {
        return Err(Error::Domain(format!(
            "min-entropy too small: 2^(l-n) = {denom_guard:.3e} <= 2 eps^2"
        )));
    }
    Ok(2.0 * eps / (2f64.powf(gap) - 2f64.sqrt() * eps))
}

/// Lower bound on the key length (in bits) of any scheme that locks an
/// `n`-bit uniform message at Hellinger level `eps`:
/// `log2(1 / (2 eps^2 + 2^(1 - n/2)))`.
pub fn key_length_lower_bound(eps: f64, n: u32) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps {eps} outside (0, 1)")));
    }
    let nf = n as f64;
    Ok((1.0 / (2.0 * eps * eps + 2f64.powf(1.0 - nf / 2.0))).log2())
}

/// Resource accounting for the random-unitary locking construction, without
/// the unknown additive constants: `n + 2 log2(1/eps)` qubits and
/// `2 log2(1/eps)` key bits.
#[derive(Debug, Clone, Copy)]
pub struct ResourceAccounting {
    pub qubits_no_additive_constant: f64,
    pub key_bits_no_additive_constant: f64,
}

pub fn locking_resource_accounting(eps: f64, n: u32) -> Result<ResourceAccounting> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps {eps} outside (0, 1)")));
    }
    let two_log = 2.0 * (1.0 / eps).log2();
    Ok(ResourceAccounting {
        qubits_no_additive_constant: n as f64 + two_log,
        key_bits_no_additive_constant: two_log,
    })
}

/// Reference thresholds of the total-variation construction, for side-by-side
/// comparison with measured behaviour.
#[derive(Debug, Clone, Copy)]
pub struct FhsReport {
    /// `9 / eps^2`.
    pub db_threshold: f64,
    pub db_satisfied: bool,
    /// `72 * 16 * ln(9/eps) / eps^2`.
    pub t_threshold: f64,
    pub t_satisfied: bool,
    /// `1 - 4 exp(-d (eps^2 t / 144 - 2 ln(9/eps)))`; always at most 1, and
    /// vacuous (negative) unless `t` clears the threshold regime.
    pub probability_lower_bound: f64,
    pub vacuous: bool,
}

pub fn fhs_parameter_check(eps: f64, d_b: usize, t: usize, d: usize) -> Result<FhsReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps {eps} outside (0, 1)")));
    }
    let db_threshold = 9.0 / (eps * eps);
    let t_threshold = 72.0 * 16.0 * (9.0 / eps).ln() / (eps * eps);
    let exponent = d as f64 * (eps * eps * t as f64 / 144.0 - 2.0 * (9.0 / eps).ln());
    let probability_lower_bound = 1.0 - 4.0 * (-exponent).exp();
    Ok(FhsReport {
        db_threshold,
        db_satisfied: d_b as f64 >= db_threshold,
        t_threshold,
        t_satisfied: t as f64 > t_threshold,
        probability_lower_bound,
        vacuous: probability_lower_bound <= 0.0,
    })
}

/// The unlocking measurement of the key-length optimality construction:
/// one rank-one effect per `(message, key)` pair on a support set `S`, each
/// orthogonal to every other pair's encoded subspace, plus a fail effect.
#[derive(Debug, Clone)]
pub struct AdversarialPovm {
    pub support: Vec<usize>,
    /// Effects in `(x, k)` order, row-major over `support x keys`.
    pub effects: Vec<AdversarialEffect>,
    pub fail: CMatrix,
}

#[derive(Debug, Clone)]
pub struct AdversarialEffect {
    pub x: usize,
    pub k: usize,
    pub effect: RankOneEffect,
}

impl AdversarialPovm {
    /// Flattens into a plain POVM (indexed effects then the fail effect).
    pub fn to_povm(&self) -> Povm {
        let mut effects: Vec<CMatrix> = self
            .effects
            .iter()
            .map(|e| {
                let mut m = CMatrix::zeros(e.effect.direction.dim(), e.effect.direction.dim());
                m.add_scaled_outer(&e.effect.direction, e.effect.weight);
                m
            })
            .collect();
        effects.push(self.fail.clone());
        Povm::new_unchecked(effects)
    }
}

/// Builds the adversarial POVM for a support set `S`. Each direction
/// `e_{x,k}` is the deterministic smallest-singular-vector nullspace choice
/// orthogonal to `span { U_i† |y b> : (y,i) != (x,k), y in S }`, so that a
/// click on `(x, k)` identifies message and key with certainty.
pub fn build_adversarial_povm(scheme: &LockingScheme, support: &[usize]) -> Result<AdversarialPovm> {
    let dims = scheme.dims();
    let d = dims.d();
    let t = scheme.t();
    let mut sorted: Vec<usize> = support.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != support.len() {
        return Err(Error::Domain("support set has duplicates".into()));
    }
    if sorted.is_empty() {
        return Err(Error::Domain("support set is empty".into()));
    }
    for &x in &sorted {
        if x >= scheme.message_count() {
            return Err(Error::IndexOutOfRange {
                context: "adversarial support",
                index: x,
                size: scheme.message_count(),
            });
        }
    }
    let s = sorted.len();
    let span_dim = (t * s - 1) * dims.d_b;
    if span_dim >= d {
        return Err(Error::Domain(format!(
            "no nullspace: (t |S| - 1) d_B = {span_dim} >= d = {d}"
        )));
    }

    let weight = 1.0 / (s * t) as f64;
    let mut effects = Vec::with_capacity(s * t);
    for &x in &sorted {
        for k in 0..t {
            let mut columns = Vec::with_capacity(span_dim);
            for &y in &sorted {
                for i in 0..t {
                    if (y, i) == (x, k) {
                        continue;
                    }
                    for b in 0..dims.d_b {
                        columns.push(
                            scheme
                                .ensemble
                                .apply_adjoint(i, &CVector::basis(d, dims.flat(y, b))),
                        );
                    }
                }
            }
            let e = nullspace_vector(&columns, d)?;
            // Generic position: the click must be reachable from its own
            // encoded state.
            let mut own_overlap = 0.0;
            for b in 0..dims.d_b {
                let u = scheme
                    .ensemble
                    .apply_adjoint(k, &CVector::basis(d, dims.flat(x, b)));
                own_overlap += u.inner(&e).norm_sqr();
            }
            if own_overlap < 1e-12 {
                return Err(Error::NumericalFailure(format!(
                    "degenerate ensemble: effect ({x},{k}) orthogonal to its own encoding"
                )));
            }
            effects.push(AdversarialEffect {
                x,
                k,
                effect: RankOneEffect::new(weight, e)?,
            });
        }
    }

    let mut sum = CMatrix::zeros(d, d);
    for e in &effects {
        sum.add_scaled_outer(&e.effect.direction, e.effect.weight);
    }
    let fail = CMatrix::identity(d).sub(&sum);
    let min_eig = fail.hermitian_eigenvalues()?[0];
    if min_eig < -PSD_TOL {
        return Err(Error::InvalidPovm(format!(
            "fail effect not PSD: min eigenvalue {min_eig:.3e}"
        )));
    }
    Ok(AdversarialPovm {
        support: sorted,
        effects,
        fail,
    })
}

/// Max deviation of `P(X = x, K = k | I = (x, k))` from 1 over all indexed
/// effects, for the uniform prior on the support set and uniform keys.
pub fn adversarial_conditional_check(
    scheme: &LockingScheme,
    adv: &AdversarialPovm,
) -> Result<f64> {
    let dims = scheme.dims();
    let d = dims.d();
    let t = scheme.t();
    let s = adv.support.len();
    // click_prob[(y, i) -> effect e] = Tr(E(y,i) M_e), via
    // (w/d_B) sum_b |<e | U_i† | y b>|^2.
    let mut max_dev = 0.0f64;
    for target in &adv.effects {
        let mut own = 0.0;
        let mut total = 0.0;
        for &y in &adv.support {
            for i in 0..t {
                let mut tr = 0.0;
                for b in 0..dims.d_b {
                    let u = scheme
                        .ensemble
                        .apply_adjoint(i, &CVector::basis(d, dims.flat(y, b)));
                    tr += u.inner(&target.effect.direction).norm_sqr();
                }
                let joint = tr * target.effect.weight / (dims.d_b as f64 * (s * t) as f64);
                total += joint;
                if (y, i) == (target.x, target.k) {
                    own = joint;
                }
            }
        }
        if total < 1e-300 {
            return Err(Error::DegenerateOutcome(total));
        }
        max_dev = max_dev.max((own / total - 1.0).abs());
    }
    Ok(max_dev)
}

/// Data-hiding audit of a single-unitary scheme against separable rank-one
/// effects: Haar product directions plus the product-manifold search
/// extremizer seeded as an additional candidate.
#[derive(Debug, Clone)]
pub struct DataHidingReport {
    pub max_hellinger: f64,
    pub max_tv: f64,
    /// Searched supremum of `Y` over product states (a lower bound).
    pub separable_y_sup: f64,
    pub effects_evaluated: usize,
}

pub fn data_hiding_eval(
    scheme: &LockingScheme,
    prior: &MessagePrior,
    n_effects: usize,
    seed: Seed,
) -> Result<DataHidingReport> {
    if scheme.t() != 1 {
        return Err(Error::Domain(format!(
            "data hiding uses a single unitary, got t = {}",
            scheme.t()
        )));
    }
    let dims = scheme.dims();
    let mut rng = seed.rng();
    let mut effects = Vec::with_capacity(n_effects + 1);
    for _ in 0..n_effects {
        let a = sample_sphere(dims.d_a, &mut rng);
        let b = sample_sphere(dims.d_b, &mut rng);
        effects.push(RankOneEffect::new(1.0, crate::linalg::tensor(&a, &b))?);
    }
    // Product-state extremizer of Y as a designed worst-case candidate.
    let mut opts = SearchOpts::new(seed.child(u64::MAX / 2));
    opts.restarts = 4;
    opts.max_iters = 300;
    let sep = worst_case_search(scheme.ensemble(), &StateSubset::Separable, &opts)?;
    effects.push(RankOneEffect::new(1.0, sep.worst_state.vector().clone())?);

    let audit = verify_locking(scheme, prior, &effects)?;
    Ok(DataHidingReport {
        max_hellinger: audit.max_hellinger,
        max_tv: audit.max_tv,
        separable_y_sup: sep.best_y,
        effects_evaluated: effects.len(),
    })
}

/// Samples a Haar-random rank-one effect direction on the full space.
pub fn random_effect<R: Rng + ?Sized>(d: usize, rng: &mut R) -> RankOneEffect {
    RankOneEffect::new(1.0, sample_sphere(d, rng)).expect("unit direction")
}
