//! Exact and Monte Carlo evaluation of the computable quantities behind the
//! parameter lower bounds: uniform-simplex moments, the ancilla-dimension
//! expression, the conjugated block projectors, their Hilbert-Schmidt
//! identity, and the Rademacher average that pins the number of unitaries.

use rayon::prelude::*;

use crate::linalg::{hs_norm, CMatrix, CVector, C64};
use crate::randomness::Seed;
use crate::stats::mean_and_se;
use crate::uncertainty::UnitaryEnsemble;
use crate::{Error, Result};

/// Closed-form moments of one coordinate of a uniform point on the
/// probability simplex in dimension `d`.
#[derive(Debug, Clone, Copy)]
pub struct SimplexMoments {
    pub d: usize,
    pub mean: f64,
    pub variance: f64,
    /// Covariance of two distinct coordinates.
    pub covariance: f64,
}

pub fn simplex_moments(d: usize) -> Result<SimplexMoments> {
    if d == 0 {
        return Err(Error::Domain("simplex dimension must be positive".into()));
    }
    let df = d as f64;
    Ok(SimplexMoments {
        d,
        mean: 1.0 / df,
        variance: (df - 1.0) / (df * df * (df + 1.0)),
        covariance: -1.0 / (df * df * (df + 1.0)),
    })
}

/// The ancilla lower-bound expression. `exact` is
/// `sqrt((d_A - 1) / (d_A d_B + 1))` (the unspecified moment-comparison
/// constant is carried symbolically by callers); `simplified` is the weaker
/// `1 / (2 sqrt(d_B))`, valid for `d_A >= 2`.
#[derive(Debug, Clone, Copy)]
pub struct TvLowerBound {
    pub exact: f64,
    pub simplified: f64,
}

pub fn tv_lower_bound_expression(d_a: usize, d_b: usize) -> Result<TvLowerBound> {
    if d_a < 2 {
        return Err(Error::Domain("ancilla bound needs d_A >= 2".into()));
    }
    if d_b == 0 {
        return Err(Error::Domain("d_B must be positive".into()));
    }
    let (da, db) = (d_a as f64, d_b as f64);
    Ok(TvLowerBound {
        exact: ((da - 1.0) / (da * db + 1.0)).sqrt(),
        simplified: 1.0 / (2.0 * db.sqrt()),
    })
}

/// The rank-`d_B` orthogonal projector
/// `A_{ka} = sum_b U_k† |a b><a b| U_k`.
pub fn projector_a(ens: &UnitaryEnsemble, k: usize, a: usize) -> Result<CMatrix> {
    let dims = ens.dims();
    if k >= ens.t() {
        return Err(Error::IndexOutOfRange {
            context: "projector_a key",
            index: k,
            size: ens.t(),
        });
    }
    if a >= dims.d_a {
        return Err(Error::IndexOutOfRange {
            context: "projector_a outcome",
            index: a,
            size: dims.d_a,
        });
    }
    let d = dims.d();
    let mut out = CMatrix::zeros(d, d);
    for b in 0..dims.d_b {
        let u = ens.apply_adjoint(k, &CVector::basis(d, dims.flat(a, b)));
        out.add_scaled_outer(&u, 1.0);
    }
    Ok(out)
}

/// Closed form for `|| A_{ka} - Id/d_A ||_HS^2`:
/// `d_B (1 - 1/d_A)^2 + (d_A d_B - d_B) / d_A^2`.
pub fn hs_centered_projector_norm(d_a: usize, d_b: usize) -> f64 {
    let (da, db) = (d_a as f64, d_b as f64);
    db * (1.0 - 1.0 / da) * (1.0 - 1.0 / da) + (da * db - db) / (da * da)
}

/// Rademacher average of the centered projector sum.
#[derive(Debug, Clone)]
pub struct KhintchineReport {
    /// `(1/(t sqrt(2d))) sqrt(sum_{k,a} ||A_{ka} - Id/d_A||_HS^2)`; always at
    /// least `1/(2 sqrt(2t))` for `d_A >= 2`.
    pub analytic_bound: f64,
    /// Average over sign patterns of `||sum eps_{ka} (A_{ka} - Id/d_A)||_HS
    /// / (t sqrt(d))`. Exact when the pattern space was enumerated.
    pub mc_estimate: f64,
    /// Standard error of the estimate; zero for exact enumeration.
    pub mc_se: f64,
    /// True when all `2^(t d_A)` sign patterns were enumerated.
    pub exact_enumeration: bool,
    pub patterns: usize,
}

/// Enumeration kicks in when the pattern space is this small.
const ENUMERATION_LIMIT: u32 = 20;

/// Evaluates the Rademacher lower-bound machinery on a concrete ensemble.
/// All `t * d_A` centered projectors are materialized, so this is meant for
/// small dimensions.
pub fn khintchine_t_bound(
    ens: &UnitaryEnsemble,
    n_sign_samples: usize,
    seed: Seed,
) -> Result<KhintchineReport> {
    let dims = ens.dims();
    if dims.d_a < 2 {
        return Err(Error::Domain("Rademacher bound needs d_A >= 2".into()));
    }
    let d = dims.d();
    let t = ens.t();
    let m = t * dims.d_a;

    let per_member = hs_centered_projector_norm(dims.d_a, dims.d_b);
    let analytic_bound =
        (1.0 / (t as f64 * (2.0 * d as f64).sqrt())) * (m as f64 * per_member).sqrt();

    // Centered projectors C_{ka} = A_{ka} - Id/d_A, flattened in (k, a) order.
    let centered: Vec<CMatrix> = (0..m)
        .map(|idx| {
            let (k, a) = (idx / dims.d_a, idx % dims.d_a);
            let id_scaled = CMatrix::identity(d).scale(C64::new(1.0 / dims.d_a as f64, 0.0));
            Ok(projector_a(ens, k, a)?.sub(&id_scaled))
        })
        .collect::<Result<Vec<_>>>()?;

    let scale = 1.0 / (t as f64 * (d as f64).sqrt());

    if (m as u32) <= ENUMERATION_LIMIT {
        // Exact mean over all sign patterns via Gray-code single-sign flips.
        let total: u64 = 1u64 << m;
        let mut signs = vec![1.0f64; m];
        let mut sum = CMatrix::zeros(d, d);
        for c in &centered {
            sum = sum.add(c);
        }
        let mut acc = hs_norm(&sum) * scale;
        let mut gray_prev = 0u64;
        for i in 1..total {
            let gray = i ^ (i >> 1);
            let flipped = (gray ^ gray_prev).trailing_zeros() as usize;
            gray_prev = gray;
            let delta = -2.0 * signs[flipped];
            signs[flipped] = -signs[flipped];
            sum = sum.add(&centered[flipped].scale(C64::new(delta, 0.0)));
            acc += hs_norm(&sum) * scale;
        }
        return Ok(KhintchineReport {
            analytic_bound,
            mc_estimate: acc / total as f64,
            mc_se: 0.0,
            exact_enumeration: true,
            patterns: total as usize,
        });
    }

    let samples = n_sign_samples.max(2);
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.child(i as u64).rng();
            let mut sum = CMatrix::zeros(d, d);
            for c in &centered {
                let s: f64 = if rand::Rng::gen::<bool>(&mut rng) { 1.0 } else { -1.0 };
                sum = sum.add(&c.scale(C64::new(s, 0.0)));
            }
            hs_norm(&sum) * scale
        })
        .collect();
    let (mc_estimate, mc_se) = mean_and_se(&values);
    Ok(KhintchineReport {
        analytic_bound,
        mc_estimate,
        mc_se,
        exact_enumeration: false,
        patterns: samples,
    })
}

/// Constant-free parameter orders required for an `eps`-level uncertainty
/// relation, plus the two displays whose constants are pinned.
#[derive(Debug, Clone, Copy)]
pub struct RequiredParameters {
    /// Order `1/eps^2` shared by the ancilla dimension and the number of
    /// unitaries.
    pub inverse_eps_sq: f64,
    /// The pinned display `t >= 1/(32 eps^2)`.
    pub t_min_pinned: f64,
    /// Coefficient of the ancilla bound, `1/(16 eps^2)`; the full bound
    /// divides by the square of an unspecified moment-comparison constant.
    pub db_min_coefficient: f64,
}

pub fn required_parameters(eps: f64) -> Result<RequiredParameters> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps {eps} outside (0, 1]")));
    }
    Ok(RequiredParameters {
        inverse_eps_sq: 1.0 / (eps * eps),
        t_min_pinned: 1.0 / (32.0 * eps * eps),
        db_min_coefficient: 1.0 / (16.0 * eps * eps),
    })
}
