//! Outcome distributions of projective and POVM measurements, and the
//! A-marginal distribution that every uncertainty functional is built from.

use crate::divergences::ProbDist;
use crate::linalg::{operator_norm, BipartiteDims, CMatrix, CVector};
use crate::{Error, Result};

/// Eigenvalue slack for positive semidefiniteness checks. Adversarial POVMs
/// are assembled from differences and need a little room.
pub const PSD_TOL: f64 = 1e-9;
const STATE_NORM_TOL: f64 = 1e-10;

/// Unit vector on a bipartite space.
#[derive(Debug, Clone)]
pub struct PureState {
    vector: CVector,
    dims: BipartiteDims,
}

impl PureState {
    pub fn new(vector: CVector, dims: BipartiteDims) -> Result<Self> {
        if vector.dim() != dims.d() {
            return Err(Error::DimensionMismatch {
                context: "PureState::new",
                expected: dims.d(),
                got: vector.dim(),
            });
        }
        let norm = vector.norm();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state norm {norm} deviates from 1"
            )));
        }
        Ok(Self { vector, dims })
    }

    /// Product basis state `|a>|b>`.
    pub fn basis(dims: BipartiteDims, a: usize, b: usize) -> Self {
        Self {
            vector: CVector::basis(dims.d(), dims.flat(a, b)),
            dims,
        }
    }

    pub fn vector(&self) -> &CVector {
        &self.vector
    }

    pub fn dims(&self) -> BipartiteDims {
        self.dims
    }
}

/// General measurement: positive effects summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    effects: Vec<CMatrix>,
}

/// Rank-one effect `xi |e><e|`.
#[derive(Debug, Clone)]
pub struct RankOneEffect {
    pub weight: f64,
    pub direction: CVector,
}

impl RankOneEffect {
    pub fn new(weight: f64, direction: CVector) -> Result<Self> {
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(Error::InvalidPovm(format!(
                "rank-one weight {weight} outside (0, 1]"
            )));
        }
        let norm = direction.norm();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::InvalidPovm(format!(
                "effect direction norm {norm} deviates from 1"
            )));
        }
        Ok(Self { weight, direction })
    }
}

/// Validation summary for a POVM (report-only; never fails).
#[derive(Debug, Clone)]
pub struct PovmReport {
    /// Operator norm of `sum_i M_i - Id`.
    pub completeness_residual: f64,
    /// Smallest eigenvalue over all effects.
    pub min_effect_eigenvalue: f64,
    pub effect_count: usize,
    /// True when both checks pass at tolerance [`PSD_TOL`].
    pub valid: bool,
}

impl Povm {
    /// Builds a POVM, enforcing completeness and positivity at [`PSD_TOL`].
    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        let povm = Self { effects };
        let report = povm.validate()?;
        if !report.valid {
            return Err(Error::InvalidPovm(format!(
                "completeness residual {:.3e}, min eigenvalue {:.3e}",
                report.completeness_residual, report.min_effect_eigenvalue
            )));
        }
        Ok(povm)
    }

    /// Builds without checks; used for deliberately broken inputs in tests
    /// and for report-only validation flows.
    pub fn new_unchecked(effects: Vec<CMatrix>) -> Self {
        Self { effects }
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    pub fn dim(&self) -> usize {
        self.effects.first().map(|m| m.rows()).unwrap_or(0)
    }

    fn validate(&self) -> Result<PovmReport> {
        if self.effects.is_empty() {
            return Err(Error::InvalidPovm("no effects".into()));
        }
        let d = self.effects[0].rows();
        let mut sum = CMatrix::zeros(d, d);
        let mut min_eig = f64::INFINITY;
        for m in &self.effects {
            if m.rows() != d || m.cols() != d {
                return Err(Error::DimensionMismatch {
                    context: "Povm::validate",
                    expected: d,
                    got: m.rows(),
                });
            }
            sum = sum.add(m);
            let eigs = m.hermitian_eigenvalues()?;
            min_eig = min_eig.min(eigs[0]);
        }
        let residual = operator_norm(&sum.sub(&CMatrix::identity(d)));
        Ok(PovmReport {
            completeness_residual: residual,
            min_effect_eigenvalue: min_eig,
            effect_count: self.effects.len(),
            valid: residual < PSD_TOL && min_eig > -PSD_TOL,
        })
    }
}

/// Report-only POVM validation: completeness residual and minimum effect
/// eigenvalue, with a pass flag at [`PSD_TOL`].
pub fn validate_povm(povm: &Povm) -> Result<PovmReport> {
    povm.validate()
}

/// Outcome distribution of the local projective measurement on the A system:
/// `p(a) = sum_b |<ab|psi>|^2`. Direct squared-modulus block sums; this sits
/// in the innermost Monte Carlo loops, the partial-trace route is kept as a
/// test oracle only.
pub fn marginal_a(state: &PureState) -> ProbDist {
    marginal_a_of_entries(state.vector().entries(), state.dims())
}

/// Same as [`marginal_a`] for a raw coefficient slice; avoids constructing a
/// `PureState` in hot loops.
pub fn marginal_a_of_entries(entries: &[crate::linalg::C64], dims: BipartiteDims) -> ProbDist {
    let (d_a, d_b) = (dims.d_a, dims.d_b);
    debug_assert_eq!(entries.len(), d_a * d_b);
    let mut weights = Vec::with_capacity(d_a);
    for a in 0..d_a {
        let block = &entries[a * d_b..(a + 1) * d_b];
        weights.push(block.iter().map(|z| z.norm_sqr()).sum());
    }
    ProbDist::new(weights).expect("marginal of a unit state is a distribution")
}

/// Born-rule outcome distribution `p(i) = Tr(M_i rho)` of a POVM on a state.
pub fn born_probabilities(povm: &Povm, rho: &CMatrix) -> Result<ProbDist> {
    if !rho.is_square() {
        return Err(Error::NotSquare {
            rows: rho.rows(),
            cols: rho.cols(),
        });
    }
    if rho.rows() != povm.dim() {
        return Err(Error::DimensionMismatch {
            context: "born_probabilities",
            expected: povm.dim(),
            got: rho.rows(),
        });
    }
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > 1e-9 || trace.im.abs() > 1e-9 {
        return Err(Error::InvalidState(format!(
            "density operator trace {trace} deviates from 1"
        )));
    }
    let min_eig = rho.hermitian_eigenvalues()?[0];
    if min_eig < -PSD_TOL {
        return Err(Error::InvalidState(format!(
            "density operator min eigenvalue {min_eig:.3e}"
        )));
    }
    let mut weights = Vec::with_capacity(povm.effects().len());
    for m in povm.effects() {
        // Tr(M rho) = sum_ij M_ij rho_ji
        let d = rho.rows();
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                acc += (m.at(i, j) * rho.at(j, i)).re;
            }
        }
        weights.push(acc.max(0.0));
    }
    ProbDist::new(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace_b, tensor, C64};
    use crate::randomness::{sample_haar_qr, sample_sphere, Seed};

    #[test]
    fn marginal_of_product_state_is_point_mass() {
        let dims = BipartiteDims::new(4, 3).unwrap();
        let state = PureState::basis(dims, 2, 1);
        let p = marginal_a(&state);
        assert_eq!(p.weights()[2], 1.0);
        assert_eq!(p.weights().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn marginal_of_maximally_spread_state_is_uniform() {
        let dims = BipartiteDims::new(3, 2).unwrap();
        let d = dims.d();
        let coeff = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        let vector = CVector::new(vec![coeff; d]).unwrap();
        let p = marginal_a(&PureState::new(vector, dims).unwrap());
        for &w in p.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn marginal_matches_partial_trace_diagonal() {
        let dims = BipartiteDims::new(4, 4).unwrap();
        let mut rng = Seed::new(31).rng();
        for _ in 0..20 {
            let v = sample_sphere(dims.d(), &mut rng);
            let state = PureState::new(v.clone(), dims).unwrap();
            let p = marginal_a(&state);

            let rho = CMatrix::outer(&v, &v);
            let red = partial_trace_b(&rho, dims).unwrap();
            for a in 0..dims.d_a {
                assert!((p.weights()[a] - red.at(a, a).re).abs() < 1e-12);
            }
            assert!((p.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn b_local_unitaries_leave_marginal_invariant() {
        let dims = BipartiteDims::new(3, 4).unwrap();
        let mut rng = Seed::new(32).rng();
        let v_b = sample_haar_qr(dims.d_b, &mut rng).unwrap();
        let local = CMatrix::identity(dims.d_a).kron(&v_b);
        for _ in 0..10 {
            let psi = sample_sphere(dims.d(), &mut rng);
            let rotated = local.matvec(&psi);
            let p = marginal_a(&PureState::new(psi, dims).unwrap());
            let q = marginal_a(&PureState::new(rotated, dims).unwrap());
            for (a, b) in p.weights().iter().zip(q.weights()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn born_on_computational_basis_povm() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let d = dims.d();
        let effects: Vec<CMatrix> = (0..d)
            .map(|i| {
                let e = CVector::basis(d, i);
                CMatrix::outer(&e, &e)
            })
            .collect();
        let povm = Povm::new(effects).unwrap();
        let state = PureState::basis(dims, 1, 0);
        let rho = CMatrix::outer(state.vector(), state.vector());
        let p = born_probabilities(&povm, &rho).unwrap();
        assert_eq!(p.weights()[dims.flat(1, 0)], 1.0);
    }

    #[test]
    fn born_on_identity_povm() {
        let povm = Povm::new(vec![CMatrix::identity(3)]).unwrap();
        let rho = CMatrix::identity(3).scale(C64::new(1.0 / 3.0, 0.0));
        let p = born_probabilities(&povm, &rho).unwrap();
        assert!((p.weights()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn born_matches_rank_one_oracle() {
        let d = 6;
        let mut rng = Seed::new(33).rng();
        // Random rank-one POVM from a Haar unitary's columns.
        let u = sample_haar_qr(d, &mut rng).unwrap();
        let effects: Vec<CMatrix> = (0..d)
            .map(|j| {
                let col = CVector::new((0..d).map(|i| u.at(i, j)).collect()).unwrap();
                CMatrix::outer(&col, &col)
            })
            .collect();
        let povm = Povm::new(effects).unwrap();
        let psi = sample_sphere(d, &mut rng);
        let rho = CMatrix::outer(&psi, &psi);
        let p = born_probabilities(&povm, &rho).unwrap();
        for j in 0..d {
            let col = CVector::new((0..d).map(|i| u.at(i, j)).collect()).unwrap();
            let oracle = col.inner(&psi).norm_sqr();
            assert!((p.weights()[j] - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn validate_povm_flags_scaled_effect() {
        let half = CMatrix::identity(2).scale(C64::new(0.5, 0.0));
        let ok = validate_povm(&Povm::new_unchecked(vec![half.clone(), half.clone()])).unwrap();
        assert!(ok.valid);
        assert!(ok.completeness_residual < 1e-12);

        // Deliberately scaled effect breaks completeness.
        let bad = validate_povm(&Povm::new_unchecked(vec![
            half.clone(),
            half.scale(C64::new(1.5, 0.0)),
        ]))
        .unwrap();
        assert!(!bad.valid);
        assert!(bad.completeness_residual > 0.1);
    }

    #[test]
    fn state_validation() {
        let dims = BipartiteDims::new(2, 2).unwrap();
        let bad = CVector::new(vec![C64::new(0.4, 0.0); 4]).unwrap();
        assert!(PureState::new(bad, dims).is_err());

        let good = tensor(&CVector::basis(2, 0), &CVector::basis(2, 1));
        assert!(PureState::new(good, dims).is_ok());
    }
}
