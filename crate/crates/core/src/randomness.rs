//! Seeded random sources: Haar-distributed unitaries (two independent
//! constructions), uniform sphere and simplex points, and standard Gaussian
//! vectors on the Hilbert space.
//!
//! Every draw is determined by a [`Seed`]; parallel work derives independent
//! substreams by trial index so results never depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::divergences::ProbDist;
use crate::linalg::{householder_qr, accumulate_q, CMatrix, CVector, Reflector, C64};
use crate::{Error, Result};

/// Seed for a reproducible random stream. The pair `(value, stream_id)`
/// fully determines every draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Seed {
    pub value: u64,
    #[serde(default)]
    pub stream_id: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl Seed {
    pub fn new(value: u64) -> Self {
        Self { value, stream_id: 0 }
    }

    /// Derives an independent substream for the given trial index.
    pub fn child(&self, index: u64) -> Seed {
        Seed {
            value: self.value,
            stream_id: splitmix64(self.stream_id ^ splitmix64(index.wrapping_add(0xA076_1D64_78BD_642F))),
        }
    }

    /// Instantiates the stream. Single-owner and stateful; do not share.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.value);
        rng.set_stream(self.stream_id);
        rng
    }
}

/// Standard Gaussian vector on the Hilbert space, normalized so that
/// `E ||G||^2 = d` (each coordinate is `(xi + i eta) / sqrt(2)` with
/// independent standard normals `xi`, `eta`).
#[derive(Debug, Clone)]
pub struct GaussianVector {
    pub vector: CVector,
}

impl GaussianVector {
    pub fn dim(&self) -> usize {
        self.vector.dim()
    }
}

#[inline]
fn standard_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Standard Gaussian vector with `E |G_i|^2 = 1` per coordinate.
pub fn sample_gaussian_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> GaussianVector {
    let entries = (0..d).map(|_| standard_complex(rng)).collect();
    GaussianVector {
        vector: CVector::from_entries(entries),
    }
}

/// Uniform point on the complex unit sphere in dimension `d`.
pub fn sample_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVector {
    assert!(d >= 1, "sphere dimension must be positive");
    loop {
        let g = sample_gaussian_state(d, rng).vector;
        let n = g.norm();
        if n > 1e-150 {
            return g.scale(C64::new(1.0 / n, 0.0));
        }
    }
}

/// Uniform point on the probability simplex, realized as the squared moduli
/// of a uniform point on the complex sphere in `C^d`.
pub fn sample_simplex<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ProbDist {
    let sphere = sample_sphere(d, rng);
    let weights: Vec<f64> = sphere.entries().iter().map(|z| z.norm_sqr()).collect();
    ProbDist::new(weights).expect("squared moduli of a unit vector form a distribution")
}

/// Haar-distributed unitary via QR of a complex Ginibre matrix with the
/// diagonal phase correction: `U = Q diag(R_jj / |R_jj|)`. Without the
/// correction the distribution is not Haar.
pub fn sample_haar_qr<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CMatrix> {
    if d == 0 {
        return Err(Error::Domain("Haar sampler needs dimension >= 1".into()));
    }
    let mut g = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            g.set(i, j, standard_complex(rng));
        }
    }
    let (reflectors, diag) = householder_qr(&mut g);
    let mut q = accumulate_q(&reflectors, d);
    for (j, r_jj) in diag.iter().enumerate() {
        let m = r_jj.norm();
        let phase = if m > 1e-300 { r_jj / m } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            let v = q.at(i, j) * phase;
            q.set(i, j, v);
        }
    }
    Ok(q)
}

/// Haar unitary in factored form: the recursive construction
/// `U_d = M (1 (+) U_{d-1})`, where `M` is a deterministic unitary completion
/// of a uniform sphere point as first column. Stored as a stack of reflectors,
/// so sampling costs `O(d^2)` and applying the operator to a vector costs the
/// same as a dense mat-vec, without ever materializing the matrix.
#[derive(Debug, Clone)]
pub struct HaarFactors {
    dim: usize,
    levels: Vec<Level>,
}

#[derive(Debug, Clone)]
struct Level {
    reflector: Reflector,
    alpha: C64,
}

impl HaarFactors {
    pub fn sample<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("Haar sampler needs dimension >= 1".into()));
        }
        let mut levels = Vec::with_capacity(d);
        for j in 0..d {
            let x = sample_sphere(d - j, rng);
            // H x = alpha e_1 with |alpha| = 1, so M = H diag(alpha, 1, ..)
            // has first column exactly x.
            let (reflector, alpha) = Reflector::annihilate(x.entries());
            levels.push(Level { reflector, alpha });
        }
        Ok(Self { dim: d, levels })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// In-place application `w <- U w`.
    pub fn apply_in_place(&self, w: &mut [C64]) {
        debug_assert_eq!(w.len(), self.dim);
        for (j, level) in self.levels.iter().enumerate().rev() {
            let block = &mut w[j..];
            block[0] *= level.alpha;
            level.reflector.apply(block);
        }
    }

    /// In-place application `w <- U† w`.
    pub fn apply_adjoint_in_place(&self, w: &mut [C64]) {
        debug_assert_eq!(w.len(), self.dim);
        for (j, level) in self.levels.iter().enumerate() {
            let block = &mut w[j..];
            level.reflector.apply(block);
            block[0] *= level.alpha.conj();
        }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        let mut w = v.entries().to_vec();
        self.apply_in_place(&mut w);
        CVector::from_entries(w)
    }

    pub fn apply_adjoint(&self, v: &CVector) -> CVector {
        let mut w = v.entries().to_vec();
        self.apply_adjoint_in_place(&mut w);
        CVector::from_entries(w)
    }

    /// Materializes the dense matrix (columns are images of basis vectors).
    pub fn to_dense(&self) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d, d);
        let mut col = vec![C64::new(0.0, 0.0); d];
        for i in 0..d {
            col.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            col[i] = C64::new(1.0, 0.0);
            self.apply_in_place(&mut col);
            for (r, z) in col.iter().enumerate() {
                out.set(r, i, *z);
            }
        }
        out
    }
}

/// Haar unitary built by the recursive first-column construction; exists as
/// an independently coded cross-check of [`sample_haar_qr`].
pub fn sample_haar_recursive<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Result<CMatrix> {
    Ok(HaarFactors::sample(d, rng)?.to_dense())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_test_cdf, mean_and_se, normal_cdf};

    #[test]
    fn seed_reproducibility() {
        let seed = Seed::new(42);
        let a = sample_haar_qr(5, &mut seed.rng()).unwrap();
        let b = sample_haar_qr(5, &mut seed.rng()).unwrap();
        assert_eq!(a.entries(), b.entries());

        let c = sample_haar_qr(5, &mut seed.child(1).rng()).unwrap();
        assert_ne!(a.entries(), c.entries());
    }

    #[test]
    fn haar_qr_dimension_one_is_a_phase() {
        let u = sample_haar_qr(1, &mut Seed::new(7).rng()).unwrap();
        assert!((u.at(0, 0).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn haar_qr_rejects_zero_dim() {
        assert!(sample_haar_qr(0, &mut Seed::new(0).rng()).is_err());
    }

    #[test]
    fn haar_qr_is_unitary() {
        for d in [2, 5, 8] {
            let u = sample_haar_qr(d, &mut Seed::new(d as u64).rng()).unwrap();
            assert!(u.unitarity_residual() < 1e-10, "d = {d}");
        }
    }

    #[test]
    fn haar_recursive_is_unitary() {
        for d in [1, 4, 6] {
            let u = sample_haar_recursive(d, &mut Seed::new(100 + d as u64).rng()).unwrap();
            assert!(u.unitarity_residual() < 1e-10, "d = {d}");
        }
    }

    #[test]
    fn factored_apply_matches_dense() {
        let mut rng = Seed::new(3).rng();
        let f = HaarFactors::sample(7, &mut rng).unwrap();
        let dense = f.to_dense();
        let v = sample_sphere(7, &mut rng);
        let via_factors = f.apply(&v);
        let via_dense = dense.matvec(&v);
        assert!(via_factors.sub(&via_dense).norm() < 1e-12);

        let adj_factors = f.apply_adjoint(&v);
        let adj_dense = dense.adjoint_matvec(&v);
        assert!(adj_factors.sub(&adj_dense).norm() < 1e-12);

        // U† U = Id on a probe vector.
        let round_trip = f.apply_adjoint(&f.apply(&v));
        assert!(round_trip.sub(&v).norm() < 1e-12);
    }

    #[test]
    fn haar_first_entry_moment() {
        // E |U_11|^2 = 1/d for Haar measure (first column uniform on sphere).
        let d = 8;
        let n = 100_000;
        let mut rng = Seed::new(11).rng();
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                let u = sample_haar_qr(d, &mut rng).unwrap();
                u.at(0, 0).norm_sqr()
            })
            .collect();
        let (mean, se) = mean_and_se(&xs);
        assert!(
            (mean - 1.0 / d as f64).abs() < 3.0 * se,
            "mean {mean} vs 1/{d}, se {se}"
        );
    }

    #[test]
    fn recursive_first_entry_beta_law() {
        // |<e1|U|e1>|^2 ~ Beta(1, d-1) with CDF 1 - (1-x)^(d-1).
        let d = 6;
        let n = 20_000;
        let mut rng = Seed::new(13).rng();
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                let f = HaarFactors::sample(d, &mut rng).unwrap();
                let mut e1 = vec![C64::new(0.0, 0.0); d];
                e1[0] = C64::new(1.0, 0.0);
                f.apply_in_place(&mut e1);
                e1[0].norm_sqr()
            })
            .collect();
        let (_, p) = ks_test_cdf(&xs, |x| 1.0 - (1.0 - x.clamp(0.0, 1.0)).powi(d as i32 - 1));
        assert!(p > 0.01, "KS p = {p}");
    }

    #[test]
    fn left_invariance_of_first_column_moments() {
        // Statistics of V U match U for a fixed deterministic V.
        let d = 4;
        let n = 20_000;
        let v = sample_haar_qr(d, &mut Seed::new(555).rng()).unwrap();
        let mut rng = Seed::new(14).rng();
        let mut moments = vec![Vec::with_capacity(n); d];
        for _ in 0..n {
            let u = sample_haar_qr(d, &mut rng).unwrap();
            let rotated = v.matmul(&u);
            for (i, bucket) in moments.iter_mut().enumerate() {
                bucket.push(rotated.at(i, 0).norm_sqr());
            }
        }
        for bucket in &moments {
            let (mean, se) = mean_and_se(bucket);
            assert!(
                (mean - 1.0 / d as f64).abs() < 3.0 * se,
                "mean {mean}, se {se}"
            );
        }
    }

    #[test]
    fn sphere_point_is_unit_and_symmetric() {
        let mut rng = Seed::new(15).rng();
        let v = sample_sphere(1, &mut rng);
        assert!((v.entries()[0].norm() - 1.0).abs() < 1e-12);

        let d = 4;
        let n = 20_000;
        let mut coords = vec![Vec::with_capacity(n); d];
        for _ in 0..n {
            let v = sample_sphere(d, &mut rng);
            assert!((v.norm() - 1.0).abs() < 1e-12);
            for (i, bucket) in coords.iter_mut().enumerate() {
                bucket.push(v.entries()[i].norm_sqr());
            }
        }
        for bucket in &coords {
            let (mean, se) = mean_and_se(bucket);
            assert!((mean - 1.0 / d as f64).abs() < 3.0 * se);
        }
    }

    #[test]
    fn simplex_point_properties() {
        let mut rng = Seed::new(16).rng();
        let p = sample_simplex(1, &mut rng);
        assert!((p.weights()[0] - 1.0).abs() < 1e-12);

        for _ in 0..100 {
            let p = sample_simplex(5, &mut rng);
            let sum: f64 = p.weights().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(p.weights().iter().all(|&w| w >= 0.0));
        }

        // First coordinate of a uniform point on the 1-simplex is Uniform(0,1):
        // variance 1/12.
        let n = 20_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_simplex(2, &mut rng).weights()[0]).collect();
        let centered_sq: Vec<f64> = xs.iter().map(|x| (x - 0.5) * (x - 0.5)).collect();
        let (var, se) = mean_and_se(&centered_sq);
        assert!((var - 1.0 / 12.0).abs() < 3.0 * se, "var {var}, se {se}");
    }

    #[test]
    fn gaussian_vector_moments() {
        let d = 16;
        let n = 20_000;
        let mut rng = Seed::new(17).rng();
        let mut norms = Vec::with_capacity(n);
        let mut first_re = Vec::with_capacity(n);
        let mut projections = Vec::with_capacity(n);
        let psi = sample_sphere(d, &mut Seed::new(18).rng());
        for _ in 0..n {
            let g = sample_gaussian_state(d, &mut rng);
            norms.push(g.vector.norm_sqr());
            first_re.push(g.vector.entries()[0].re);
            projections.push(psi.inner(&g.vector).re);
        }
        let (mean_norm, se_norm) = mean_and_se(&norms);
        assert!((mean_norm - d as f64).abs() < 3.0 * se_norm);

        let (mean_re, se_re) = mean_and_se(&first_re);
        assert!(mean_re.abs() < 3.0 * se_re);

        // Under E |G_i|^2 = 1, the real part of <G|psi> has variance 1/2.
        let (_, p) = ks_test_cdf(&projections, normal_cdf(0.0, 0.5f64.sqrt()));
        assert!(p > 0.01, "KS p = {p}");
    }
}
