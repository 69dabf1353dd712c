//! The isometric embedding of the bipartite space into the mixed-norm matrix
//! space `l1^n(l2^m)` induced by a unitary ensemble, the exact identity
//! linking the mixed norm to the uncertainty functional `Y`, and distortion
//! certification for the almost-Euclidean subspace it spans.

use rayon::prelude::*;

use crate::linalg::{BipartiteDims, CMatrix, CVector, C64};
use crate::measurement::PureState;
use crate::randomness::{sample_sphere, Seed};
use crate::uncertainty::{
    estimate_r, min_y_search, worst_case_search, REstimate, SearchOpts, StateSubset,
    UnitaryEnsemble,
};
use crate::{Error, Result};

/// Element of `l1^n(l2^m)` with `m = d_B` rows and `n = d_A t` columns;
/// column `(a, k)` sits at index `a t + k`.
#[derive(Debug, Clone)]
pub struct MatrixSpaceElement {
    pub matrix: CMatrix,
}

impl MatrixSpaceElement {
    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.cols()
    }

    /// Euclidean (Frobenius) norm of the element.
    pub fn frobenius_norm(&self) -> f64 {
        crate::linalg::hs_norm(&self.matrix)
    }
}

/// The map `T psi = (1/sqrt(t)) sum_k (U_k psi) |k>`, viewed as a
/// `d_B x (d_A t)` matrix: column `(a, k)` holds the B-block of `U_k psi`
/// at A-index `a`, scaled by `1/sqrt(t)`. A Euclidean isometry.
#[derive(Debug, Clone)]
pub struct EmbeddingMap {
    ensemble: UnitaryEnsemble,
}

impl EmbeddingMap {
    pub fn new(ensemble: UnitaryEnsemble) -> Self {
        Self { ensemble }
    }

    pub fn ensemble(&self) -> &UnitaryEnsemble {
        &self.ensemble
    }

    pub fn dims(&self) -> BipartiteDims {
        self.ensemble.dims()
    }
}

pub fn apply_t(map: &EmbeddingMap, psi: &PureState) -> Result<MatrixSpaceElement> {
    apply_t_vector(map, psi.vector())
}

/// Same as [`apply_t`] for a raw vector (not necessarily unit norm); the map
/// is linear.
pub fn apply_t_vector(map: &EmbeddingMap, v: &CVector) -> Result<MatrixSpaceElement> {
    let dims = map.dims();
    if v.dim() != dims.d() {
        return Err(Error::DimensionMismatch {
            context: "apply_t",
            expected: dims.d(),
            got: v.dim(),
        });
    }
    let t = map.ensemble.t();
    let scale = C64::new(1.0 / (t as f64).sqrt(), 0.0);
    let mut out = CMatrix::zeros(dims.d_b, dims.d_a * t);
    for k in 0..t {
        let z = map.ensemble.apply(k, v);
        for a in 0..dims.d_a {
            let col = a * t + k;
            for b in 0..dims.d_b {
                out.set(b, col, z.entries()[dims.flat(a, b)] * scale);
            }
        }
    }
    Ok(MatrixSpaceElement { matrix: out })
}

/// Mixed norm: sum over columns of the column Euclidean norms. Always at
/// least the Frobenius norm.
pub fn l1l2_norm(x: &MatrixSpaceElement) -> f64 {
    let m = &x.matrix;
    let mut acc = 0.0;
    for j in 0..m.cols() {
        let mut col = 0.0;
        for i in 0..m.rows() {
            col += m.at(i, j).norm_sqr();
        }
        acc += col.sqrt();
    }
    acc
}

/// Residual of the exact identity
/// `||T psi||_{l1(l2)} = sqrt(d_A t) (1 - Y(psi)^2)`.
pub fn norm_identity_check(map: &EmbeddingMap, psi: &PureState) -> Result<f64> {
    let lhs = l1l2_norm(&apply_t(map, psi)?);
    let y = crate::uncertainty::eval_y(&map.ensemble, psi)?;
    let dims = map.dims();
    let rhs = ((dims.d_a * map.ensemble.t()) as f64).sqrt() * (1.0 - y * y);
    Ok((lhs - rhs).abs())
}

/// Distortion certificate over sampled states plus search extremizers.
#[derive(Debug, Clone)]
pub struct DistortionReport {
    /// Smallest and largest mixed-norm value against the analytic scale.
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `max value / min value`; at least 1, and a certified lower bound on
    /// the true distortion (the extremes are witnessed by explicit states).
    pub distortion: f64,
    /// `sqrt(d_A t) (1 - R^2)` with the Monte Carlo estimate of `R`.
    pub scale_analytic: f64,
    /// Empirical median of the sampled mixed-norm values.
    pub scale_median: f64,
    pub r_estimate: REstimate,
    pub states_evaluated: usize,
}

/// Ratio extremes of the mixed norm over random states; when `search_opts`
/// is given, the `Y`-maximizing search pins the lower end and a `Y`-minimizing
/// search the upper end.
pub fn certify_distortion(
    map: &EmbeddingMap,
    n_random_states: usize,
    search_opts: Option<&SearchOpts>,
    seed: Seed,
) -> Result<DistortionReport> {
    let dims = map.dims();
    if dims.d_b < 2 {
        return Err(Error::Domain("distortion certification needs d_B >= 2".into()));
    }
    let t = map.ensemble.t();
    let mut values: Vec<f64> = (0..n_random_states.max(2))
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.child(i as u64).rng();
            let v = sample_sphere(dims.d(), &mut rng);
            Ok(l1l2_norm(&apply_t_vector(map, &v)?))
        })
        .collect::<Result<Vec<_>>>()?;

    if let Some(opts) = search_opts {
        let max_y = worst_case_search(&map.ensemble, &StateSubset::FullSphere, opts)?;
        values.push(l1l2_norm(&apply_t(map, &max_y.worst_state)?));
        let (_, min_state) = min_y_search(&map.ensemble, opts)?;
        values.push(l1l2_norm(&apply_t(map, &min_state)?));
    }

    let r_estimate = estimate_r(dims, t, 400, seed.child(u64::MAX / 3))?;
    let scale_analytic = ((dims.d_a * t) as f64).sqrt()
        * (1.0 - r_estimate.y_mean * r_estimate.y_mean);

    let mut sorted = values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let scale_median = sorted[sorted.len() / 2];
    let vmin = sorted[0];
    let vmax = sorted[sorted.len() - 1];
    Ok(DistortionReport {
        min_ratio: vmin / scale_analytic,
        max_ratio: vmax / scale_analytic,
        distortion: vmax / vmin,
        scale_analytic,
        scale_median,
        r_estimate,
        states_evaluated: values.len(),
    })
}

/// Almost-Euclidean subspace dimension achievable inside `l1^n(l2^m)` at
/// distortion `1 + eps`: `N min(eps, eps^2 m)` with `N = n m`, constant-free.
/// `prior_art` is the `N eps^2` dependence the construction improves on for
/// large `m`.
#[derive(Debug, Clone, Copy)]
pub struct DvoretzkyDimension {
    pub dimension: f64,
    pub prior_art: f64,
    /// True when `m >= 1/eps`, i.e. the linear-in-eps regime.
    pub linear_regime: bool,
}

pub fn dvoretzky_dimension(n: usize, m: usize, eps: f64) -> Result<DvoretzkyDimension> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::Domain(format!("eps {eps} outside (0, 1]")));
    }
    if n == 0 || m == 0 {
        return Err(Error::Domain("matrix space dimensions must be positive".into()));
    }
    let big_n = (n * m) as f64;
    Ok(DvoretzkyDimension {
        dimension: big_n * eps.min(eps * eps * m as f64),
        prior_art: big_n * eps * eps,
        linear_regime: m as f64 >= 1.0 / eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uncertainty::eval_y;

    fn haar_map(d_a: usize, d_b: usize, t: usize, seed: u64) -> EmbeddingMap {
        let dims = BipartiteDims::new(d_a, d_b).unwrap();
        EmbeddingMap::new(UnitaryEnsemble::sample_qr(dims, t, Seed::new(seed)).unwrap())
    }

    #[test]
    fn identity_map_is_reshaping() {
        let dims = BipartiteDims::new(3, 2).unwrap();
        let ens =
            UnitaryEnsemble::from_matrices(vec![CMatrix::identity(6)], dims).unwrap();
        let map = EmbeddingMap::new(ens);
        let mut rng = Seed::new(110).rng();
        let v = sample_sphere(6, &mut rng);
        let out = apply_t_vector(&map, &v).unwrap();
        assert_eq!(out.rows(), 2);
        assert_eq!(out.cols(), 3);
        for a in 0..3 {
            for b in 0..2 {
                assert!((out.matrix.at(b, a) - v.entries()[dims.flat(a, b)]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn apply_t_entry_oracle_and_isometry() {
        let map = haar_map(3, 2, 4, 111);
        let dims = map.dims();
        let mut rng = Seed::new(112).rng();
        for _ in 0..10 {
            let v = sample_sphere(dims.d(), &mut rng);
            let out = apply_t_vector(&map, &v).unwrap();
            // Entry-level oracle.
            let scale = 1.0 / 2.0; // 1/sqrt(4)
            for k in 0..4 {
                let z = map.ensemble().apply(k, &v);
                for a in 0..dims.d_a {
                    for b in 0..dims.d_b {
                        let expected = z.entries()[dims.flat(a, b)] * C64::new(scale, 0.0);
                        let got = out.matrix.at(b, a * 4 + k);
                        assert!((expected - got).norm() < 1e-14);
                    }
                }
            }
            // Frobenius isometry.
            assert!((out.frobenius_norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_t_is_linear() {
        let map = haar_map(2, 3, 2, 113);
        let d = map.dims().d();
        let mut rng = Seed::new(114).rng();
        let u = sample_sphere(d, &mut rng);
        let v = sample_sphere(d, &mut rng);
        let alpha = C64::new(0.3, -1.2);
        let combo = u.scale(alpha).add(&v);
        let lhs = apply_t_vector(&map, &combo).unwrap();
        let t_u = apply_t_vector(&map, &u).unwrap();
        let t_v = apply_t_vector(&map, &v).unwrap();
        let rhs = t_u.matrix.scale(alpha).add(&t_v.matrix);
        assert!(crate::linalg::hs_norm(&lhs.matrix.sub(&rhs)) < 1e-12);

        // Isometry on the combination as well.
        assert!((lhs.frobenius_norm() - combo.norm()).abs() < 1e-12);
    }

    #[test]
    fn l1l2_norm_known_values_and_oracle() {
        // Single nonzero column.
        let mut m = CMatrix::zeros(3, 4);
        m.set(0, 2, C64::new(3.0, 0.0));
        m.set(2, 2, C64::new(4.0, 0.0));
        let x = MatrixSpaceElement { matrix: m };
        assert!((l1l2_norm(&x) - 5.0).abs() < 1e-14);
        assert!((x.frobenius_norm() - 5.0).abs() < 1e-14);

        // Identity-like columns: m unit columns sum to m.
        let id = MatrixSpaceElement {
            matrix: CMatrix::identity(4),
        };
        assert!((l1l2_norm(&id) - 4.0).abs() < 1e-14);

        // Two-loop oracle, and strict dominance with >= 2 nonzero columns.
        let mut rng = Seed::new(115).rng();
        let v = sample_sphere(12, &mut rng);
        let m = CMatrix::new(v.entries().to_vec(), 3, 4).unwrap();
        let x = MatrixSpaceElement { matrix: m.clone() };
        let mut oracle = 0.0;
        for j in 0..4 {
            let mut c = 0.0;
            for i in 0..3 {
                c += m.at(i, j).norm_sqr();
            }
            oracle += c.sqrt();
        }
        assert!((l1l2_norm(&x) - oracle).abs() < 1e-13);
        assert!(l1l2_norm(&x) > x.frobenius_norm() + 1e-6);
    }

    #[test]
    fn norm_identity_on_structured_states() {
        // Identity ensemble with t copies: a product basis state has t
        // nonzero columns of norm 1/sqrt(t) each, so the mixed norm is
        // sqrt(t); the right side gives sqrt(d_a t) / sqrt(d_a).
        let dims = BipartiteDims::new(4, 2).unwrap();
        let t = 3;
        let ens = UnitaryEnsemble::from_matrices(
            vec![CMatrix::identity(8); t],
            dims,
        )
        .unwrap();
        let map = EmbeddingMap::new(ens);
        let psi = PureState::basis(dims, 2, 1);
        let out = apply_t(&map, &psi).unwrap();
        assert!((l1l2_norm(&out) - (t as f64).sqrt()).abs() < 1e-12);
        assert!(norm_identity_check(&map, &psi).unwrap() < 1e-12);

        // State with uniform marginals: both sides sqrt(d_a t).
        let c = C64::new(1.0 / (dims.d() as f64).sqrt(), 0.0);
        let flat = PureState::new(CVector::new(vec![c; dims.d()]).unwrap(), dims).unwrap();
        let out = apply_t(&map, &flat).unwrap();
        assert!((l1l2_norm(&out) - ((dims.d_a * t) as f64).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn norm_identity_on_random_pairs() {
        let mut rng = Seed::new(116).rng();
        for trial in 0..20 {
            let map = haar_map(3, 3, 2, 200 + trial);
            let psi = PureState::new(sample_sphere(9, &mut rng), map.dims()).unwrap();
            let residual = norm_identity_check(&map, &psi).unwrap();
            assert!(residual < 1e-9, "residual {residual}");
        }
    }

    #[test]
    fn distortion_trivial_single_column_block() {
        // d_a = 1, t = 1: the element has one column per the single A-index,
        // so the mixed norm equals the Euclidean norm and distortion is 1.
        let dims = BipartiteDims::new(1, 4).unwrap();
        let ens = UnitaryEnsemble::sample_qr(dims, 1, Seed::new(117)).unwrap();
        let map = EmbeddingMap::new(ens);
        let rep = certify_distortion(&map, 30, None, Seed::new(118)).unwrap();
        assert!((rep.distortion - 1.0).abs() < 1e-9);
    }

    #[test]
    fn distortion_at_least_one_with_search() {
        let map = haar_map(4, 4, 2, 119);
        let mut opts = SearchOpts::new(Seed::new(120));
        opts.restarts = 2;
        opts.max_iters = 200;
        let rep = certify_distortion(&map, 40, Some(&opts), Seed::new(121)).unwrap();
        assert!(rep.distortion >= 1.0);
        assert!(rep.min_ratio <= rep.max_ratio);
        assert!(rep.scale_analytic > 0.0);

        // The searched max-Y state must sit at or below the sampled minimum.
        let y_max = worst_case_search(
            map.ensemble(),
            &StateSubset::FullSphere,
            &opts,
        )
        .unwrap();
        let v = l1l2_norm(&apply_t(&map, &y_max.worst_state).unwrap());
        assert!(v <= rep.min_ratio * rep.scale_analytic + 1e-9);
        let y = eval_y(map.ensemble(), &y_max.worst_state).unwrap();
        let dims = map.dims();
        let predicted = ((dims.d_a * 2) as f64).sqrt() * (1.0 - y * y);
        assert!((v - predicted).abs() < 1e-9);
    }

    #[test]
    fn dvoretzky_dimension_regimes() {
        // Crossover at m = 1/eps.
        let d = dvoretzky_dimension(64, 16, 0.25).unwrap();
        assert!(d.linear_regime);
        assert!((d.dimension - (64.0 * 16.0) * 0.25).abs() < 1e-9);

        let d2 = dvoretzky_dimension(64, 2, 0.25).unwrap();
        assert!(!d2.linear_regime);
        assert!((d2.dimension - (64.0 * 2.0) * 0.25 * 0.25 * 2.0).abs() < 1e-9);

        // eps = 1 collapses to N.
        let d3 = dvoretzky_dimension(8, 3, 1.0).unwrap();
        assert!((d3.dimension - 24.0).abs() < 1e-12);

        assert!(dvoretzky_dimension(8, 3, 0.0).is_err());
        assert!(dvoretzky_dimension(8, 3, 1.5).is_err());
    }
}
