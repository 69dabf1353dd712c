//! Dense complex vectors and matrices plus the handful of numerical kernels
//! the rest of the crate is built on: tensor products, partial trace,
//! Schatten norms, Householder reflectors and SVD-based nullspaces.
//!
//! Storage is row-major throughout. Bipartite basis labels `(a, b)` flatten
//! A-major, i.e. to `a * d_b + b`, which makes the partial trace over the B
//! system a contiguous block sum. Target dimensions stay at or below a few
//! thousand, so dense storage is used everywhere.

use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;

use crate::{Error, Result};

/// Complex scalar used everywhere in the crate.
pub type C64 = Complex64;

/// Orthogonality acceptance threshold for nullspace vectors.
const NULLSPACE_TOL: f64 = 1e-8;

/// Dimensions of a bipartite space `H_A (x) H_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct BipartiteDims {
    pub d_a: usize,
    pub d_b: usize,
}

impl BipartiteDims {
    pub fn new(d_a: usize, d_b: usize) -> Result<Self> {
        if d_a == 0 || d_b == 0 {
            return Err(Error::Domain(format!(
                "bipartite dimensions must be positive, got ({d_a}, {d_b})"
            )));
        }
        Ok(Self { d_a, d_b })
    }

    /// Total dimension `d = d_a * d_b`.
    pub fn d(&self) -> usize {
        self.d_a * self.d_b
    }

    /// Flat index of the product basis vector `|a>|b>`.
    pub fn flat(&self, a: usize, b: usize) -> usize {
        a * self.d_b + b
    }
}

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector {
    entries: Vec<C64>,
}

impl CVector {
    /// Builds a vector, rejecting NaN/Inf entries.
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("CVector::new"));
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_entries(entries: Vec<C64>) -> Self {
        Self { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: vec![C64::new(0.0, 0.0); dim],
        }
    }

    /// Computational basis vector `|i>`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[i] = C64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut [C64] {
        &mut self.entries
    }

    /// Inner product `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &CVector) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, c: C64) -> CVector {
        Self {
            entries: self.entries.iter().map(|z| z * c).collect(),
        }
    }

    pub fn add(&self, other: &CVector) -> CVector {
        debug_assert_eq!(self.dim(), other.dim());
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &CVector) -> CVector {
        debug_assert_eq!(self.dim(), other.dim());
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Returns a unit-norm copy, or an error for the zero vector.
    pub fn normalized(&self) -> Result<CVector> {
        let n = self.norm();
        if n < 1e-300 {
            return Err(Error::InvalidState("cannot normalize zero vector".into()));
        }
        Ok(self.scale(C64::new(1.0 / n, 0.0)))
    }
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    entries: Vec<C64>,
    rows: usize,
    cols: usize,
}

impl CMatrix {
    pub fn new(entries: Vec<C64>, rows: usize, cols: usize) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "CMatrix::new",
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("CMatrix::new"));
        }
        Ok(Self { entries, rows, cols })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            entries: vec![C64::new(0.0, 0.0); rows * cols],
            rows,
            cols,
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.entries[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// Matrix-vector product `M v`.
    pub fn matvec(&self, v: &CVector) -> CVector {
        debug_assert_eq!(self.cols, v.dim());
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = C64::new(0.0, 0.0);
            for (m, x) in row.iter().zip(v.entries()) {
                acc += m * x;
            }
            out.push(acc);
        }
        CVector::from_entries(out)
    }

    /// Adjoint-vector product `M† v`.
    pub fn adjoint_matvec(&self, v: &CVector) -> CVector {
        debug_assert_eq!(self.rows, v.dim());
        let mut out = vec![C64::new(0.0, 0.0); self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let vi = v.entries()[i];
            for (o, m) in out.iter_mut().zip(row) {
                *o += m.conj() * vi;
            }
        }
        CVector::from_entries(out)
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.at(i, k);
                if aik == C64::new(0.0, 0.0) {
                    continue;
                }
                let orow = other.row(k);
                let out_row =
                    &mut out.entries[i * other.cols..(i + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(orow) {
                    *o += aik * b;
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.at(i, j).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self.at(i, i)).sum()
    }

    pub fn scale(&self, c: C64) -> CMatrix {
        Self {
            entries: self.entries.iter().map(|z| z * c).collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }

    /// Rank-one matrix `|u><v|`.
    pub fn outer(u: &CVector, v: &CVector) -> CMatrix {
        let mut out = CMatrix::zeros(u.dim(), v.dim());
        for (i, ui) in u.entries().iter().enumerate() {
            for (j, vj) in v.entries().iter().enumerate() {
                out.set(i, j, ui * vj.conj());
            }
        }
        out
    }

    /// Adds `w * |u><u|` in place; the workhorse for assembling projectors
    /// and density operators from vectors.
    pub fn add_scaled_outer(&mut self, u: &CVector, w: f64) {
        debug_assert_eq!(self.rows, u.dim());
        debug_assert_eq!(self.cols, u.dim());
        let n = u.dim();
        for i in 0..n {
            let ui = u.entries()[i] * w;
            let row = &mut self.entries[i * n..(i + 1) * n];
            for (r, uj) in row.iter_mut().zip(u.entries()) {
                *r += ui * uj.conj();
            }
        }
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let s = self.at(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, s * other.at(k, l));
                    }
                }
            }
        }
        out
    }

    /// Residual `max |(U†U - Id)_ij|`-style check in HS norm.
    pub fn unitarity_residual(&self) -> f64 {
        debug_assert!(self.is_square());
        let gram = self.adjoint().matmul(self);
        let id = CMatrix::identity(self.rows);
        hs_norm(&gram.sub(&id))
    }

    fn to_nalgebra(&self) -> DMatrix<Complex<f64>> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.at(i, j))
    }

    /// Singular values in descending order (SVD backend).
    pub fn singular_values(&self) -> Vec<f64> {
        let m = self.to_nalgebra();
        let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        sv
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let m = self.to_nalgebra();
        let eig = m.symmetric_eigen();
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(vals)
    }
}

/// Tensor product of two vectors; entry `i*dim(v) + j` is `u_i * v_j`.
pub fn tensor(u: &CVector, v: &CVector) -> CVector {
    let mut out = Vec::with_capacity(u.dim() * v.dim());
    for ui in u.entries() {
        for vj in v.entries() {
            out.push(ui * vj);
        }
    }
    CVector::from_entries(out)
}

/// Partial trace over the B system: the `(a, a')` entry of the result is
/// `sum_b rho[(a,b), (a',b)]`. Preserves the trace.
pub fn partial_trace_b(rho: &CMatrix, dims: BipartiteDims) -> Result<CMatrix> {
    let d = dims.d();
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::DimensionMismatch {
            context: "partial_trace_b",
            expected: d,
            got: rho.rows(),
        });
    }
    let (d_a, d_b) = (dims.d_a, dims.d_b);
    let mut out = CMatrix::zeros(d_a, d_a);
    for a in 0..d_a {
        for a2 in 0..d_a {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..d_b {
                acc += rho.at(a * d_b + b, a2 * d_b + b);
            }
            out.set(a, a2, acc);
        }
    }
    Ok(out)
}

/// Trace norm (sum of singular values).
pub fn trace_norm(m: &CMatrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(m.singular_values().iter().sum())
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(m: &CMatrix) -> f64 {
    m.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator norm (largest singular value).
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    m.singular_values()[0]
}

/// Unit vector orthogonal to every input column.
///
/// The columns are stacked as rows `c_i†` of a matrix padded to `d x d`; the
/// right singular vector of the smallest singular value is the nullspace
/// direction, accepted when that singular value is below `1e-8`. The phase is
/// canonicalized so the largest-modulus entry is real positive. An empty
/// column list returns the first canonical basis vector.
pub fn nullspace_vector(columns: &[CVector], d: usize) -> Result<CVector> {
    if d == 0 {
        return Err(Error::Domain("nullspace in zero-dimensional space".into()));
    }
    for (idx, c) in columns.iter().enumerate() {
        if c.dim() != d {
            return Err(Error::DimensionMismatch {
                context: "nullspace_vector",
                expected: d,
                got: columns[idx].dim(),
            });
        }
    }
    if columns.is_empty() {
        return Ok(CVector::basis(d, 0));
    }

    // Rows are c_i†, zero-padded to a square matrix so the full set of right
    // singular vectors (including the nullspace) is available.
    let mut m = DMatrix::<Complex<f64>>::zeros(d.max(columns.len()), d);
    for (i, c) in columns.iter().enumerate() {
        for (j, z) in c.entries().iter().enumerate() {
            m[(i, j)] = z.conj();
        }
    }
    let svd = m.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::NumericalFailure("SVD did not return V^H".into()))?;
    let (min_idx, &min_sv) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    if min_sv >= NULLSPACE_TOL {
        return Err(Error::NoNullspace(min_sv));
    }

    // Row i of V^H is the conjugate of the right singular vector.
    let mut v: Vec<C64> = (0..d).map(|j| v_t[(min_idx, j)].conj()).collect();

    // One re-orthogonalization pass against the original columns. The span
    // basis is the set of right singular vectors with non-negligible singular
    // values.
    for (i, &sv) in svd.singular_values.iter().enumerate() {
        if sv < NULLSPACE_TOL {
            continue;
        }
        let mut overlap = C64::new(0.0, 0.0);
        for (j, vj) in v.iter().enumerate() {
            overlap += v_t[(i, j)] * vj;
        }
        for (j, vj) in v.iter_mut().enumerate() {
            *vj -= overlap * v_t[(i, j)].conj();
        }
    }

    let mut out = CVector::from_entries(v).normalized()?;
    canonicalize_phase(&mut out);
    Ok(out)
}

/// Rotates a vector's global phase so its largest-modulus entry is real
/// positive. Keeps outputs reproducible across runs.
pub fn canonicalize_phase(v: &mut CVector) {
    let mut best = 0usize;
    let mut best_mod = -1.0;
    for (i, z) in v.entries().iter().enumerate() {
        let m = z.norm_sqr();
        if m > best_mod {
            best_mod = m;
            best = i;
        }
    }
    let z = v.entries()[best];
    let m = z.norm();
    if m > 1e-300 {
        let phase = z.conj() / m;
        for e in v.entries_mut() {
            *e *= phase;
        }
    }
}

/// Householder reflector `H = I - beta v v†` (unitary and Hermitian).
#[derive(Debug, Clone)]
pub struct Reflector {
    v: Vec<C64>,
    beta: f64,
}

impl Reflector {
    /// Reflector sending `x` to `alpha e_1` with `|alpha| = ||x||`; returns
    /// `(H, alpha)`. The sign of `alpha` is chosen to avoid cancellation.
    pub fn annihilate(x: &[C64]) -> (Reflector, C64) {
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 {
            return (
                Reflector {
                    v: vec![C64::new(0.0, 0.0); x.len()],
                    beta: 0.0,
                },
                C64::new(0.0, 0.0),
            );
        }
        let x0 = x[0];
        let phase = if x0.norm() > 1e-300 {
            x0 / x0.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vnorm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let beta = if vnorm_sqr > 1e-300 {
            2.0 / vnorm_sqr
        } else {
            0.0
        };
        (Reflector { v, beta }, alpha)
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// Applies `H` in place: `w <- w - beta v (v† w)`.
    #[inline]
    pub fn apply(&self, w: &mut [C64]) {
        if self.beta == 0.0 {
            return;
        }
        debug_assert_eq!(w.len(), self.v.len());
        let mut dot = C64::new(0.0, 0.0);
        for (vi, wi) in self.v.iter().zip(w.iter()) {
            dot += vi.conj() * wi;
        }
        let c = dot * self.beta;
        for (vi, wi) in self.v.iter().zip(w.iter_mut()) {
            *wi -= c * vi;
        }
    }

    /// Applies `H` to the trailing rows of a row-major matrix block:
    /// `M <- H M`, with `M` given as `nrows x ncols` starting at `data`.
    pub fn apply_rows(&self, data: &mut [C64], ncols: usize) {
        if self.beta == 0.0 {
            return;
        }
        let nrows = self.v.len();
        debug_assert_eq!(data.len(), nrows * ncols);
        let mut w = vec![C64::new(0.0, 0.0); ncols];
        for (r, vr) in self.v.iter().enumerate() {
            let vrc = vr.conj();
            let row = &data[r * ncols..(r + 1) * ncols];
            for (acc, m) in w.iter_mut().zip(row) {
                *acc += vrc * m;
            }
        }
        for (r, vr) in self.v.iter().enumerate() {
            let c = vr * self.beta;
            let row = &mut data[r * ncols..(r + 1) * ncols];
            for (m, acc) in row.iter_mut().zip(&w) {
                *m -= c * acc;
            }
        }
    }
}

/// Householder QR of a square matrix. Returns the reflectors and the diagonal
/// of `R`; `A = H_0 H_1 ... H_{d-1} R`.
pub fn householder_qr(a: &mut CMatrix) -> (Vec<Reflector>, Vec<C64>) {
    assert!(a.is_square());
    let d = a.rows();
    let mut reflectors = Vec::with_capacity(d);
    let mut diag = Vec::with_capacity(d);
    for j in 0..d {
        let col: Vec<C64> = (j..d).map(|i| a.at(i, j)).collect();
        let (h, alpha) = Reflector::annihilate(&col);
        // Apply H to the trailing block rows j.., columns j.. .
        let ncols = d - j;
        let mut block = vec![C64::new(0.0, 0.0); (d - j) * ncols];
        for i in j..d {
            block[(i - j) * ncols..(i - j + 1) * ncols]
                .copy_from_slice(&a.row(i)[j..]);
        }
        h.apply_rows(&mut block, ncols);
        for i in j..d {
            let src = &block[(i - j) * ncols..(i - j + 1) * ncols];
            for (c, v) in src.iter().enumerate() {
                a.set(i, j + c, *v);
            }
        }
        diag.push(if h.beta == 0.0 { a.at(j, j) } else { alpha });
        reflectors.push(h);
    }
    (reflectors, diag)
}

/// Accumulates the unitary `Q = H_0 H_1 ... H_{d-1}` from QR reflectors.
pub fn accumulate_q(reflectors: &[Reflector], d: usize) -> CMatrix {
    let mut q = CMatrix::identity(d);
    for (j, h) in reflectors.iter().enumerate().rev() {
        // H_j acts on rows j.. of Q.
        let ncols = d;
        let mut block = vec![C64::new(0.0, 0.0); (d - j) * ncols];
        for i in j..d {
            block[(i - j) * ncols..(i - j + 1) * ncols].copy_from_slice(q.row(i));
        }
        h.apply_rows(&mut block, ncols);
        for i in j..d {
            let src = &block[(i - j) * ncols..(i - j + 1) * ncols];
            for (c, v) in src.iter().enumerate() {
                q.set(i, c, *v);
            }
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn tensor_basis_vectors() {
        let e1 = CVector::basis(2, 0);
        let v = tensor(&e1, &e1);
        assert_eq!(v.dim(), 4);
        assert_eq!(v.entries()[0], c(1.0, 0.0));
        assert_eq!(v.entries()[1..], CVector::zeros(3).entries()[..]);

        // (1,0) (x) (0,1) -> (0,1,0,0)
        let u = CVector::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let w = CVector::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let t = tensor(&u, &w);
        assert_eq!(t.entries()[1], c(1.0, 0.0));
        assert_eq!(t.entries()[0], c(0.0, 0.0));
        assert_eq!(t.entries()[2], c(0.0, 0.0));
        assert_eq!(t.entries()[3], c(0.0, 0.0));
    }

    #[test]
    fn tensor_matches_double_loop_oracle() {
        let u = CVector::new(vec![c(0.3, -0.1), c(-0.7, 0.2), c(0.1, 0.9)]).unwrap();
        let v = CVector::new(vec![c(0.5, 0.5), c(-0.2, 0.4)]).unwrap();
        let t = tensor(&u, &v);
        for i in 0..3 {
            for j in 0..2 {
                let expected = u.entries()[i] * v.entries()[j];
                let got = t.entries()[i * 2 + j];
                assert!((expected - got).norm() < 1e-15);
            }
        }
    }

    proptest! {
        // Bilinearity is exact with small integer-scaled entries.
        #[test]
        fn tensor_is_bilinear(a in -8i32..8, b in -8i32..8, c0 in -8i32..8) {
            let u = CVector::new(vec![c(a as f64, b as f64), c(-(b as f64), a as f64)]).unwrap();
            let v = CVector::new(vec![c(c0 as f64, 1.0), c(2.0, -(c0 as f64))]).unwrap();
            let alpha = c(3.0, -2.0);
            let lhs = tensor(&u.scale(alpha), &v);
            let rhs = tensor(&u, &v).scale(alpha);
            prop_assert_eq!(lhs.entries(), rhs.entries());
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        let dims = BipartiteDims::new(3, 2).unwrap();
        let a0 = CVector::basis(3, 1);
        let b0 = CVector::basis(2, 0);
        let psi = tensor(&a0, &b0);
        let rho = CMatrix::outer(&psi, &psi);
        let red = partial_trace_b(&rho, dims).unwrap();
        let expected = CMatrix::outer(&a0, &a0);
        assert!(hs_norm(&red.sub(&expected)) < 1e-14);
    }

    #[test]
    fn partial_trace_of_maximally_mixed() {
        let dims = BipartiteDims::new(2, 3).unwrap();
        let rho = CMatrix::identity(6).scale(c(1.0 / 6.0, 0.0));
        let red = partial_trace_b(&rho, dims).unwrap();
        let expected = CMatrix::identity(2).scale(c(0.5, 0.0));
        assert!(hs_norm(&red.sub(&expected)) < 1e-14);
    }

    #[test]
    fn partial_trace_matches_index_sum_oracle() {
        let dims = BipartiteDims::new(3, 4).unwrap();
        let d = dims.d();
        // Deterministic pseudo-random Hermitian PSD matrix.
        let mut g = CMatrix::zeros(d, d);
        let mut s = 1u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..d {
            for j in 0..d {
                g.set(i, j, c(next(), next()));
            }
        }
        let rho = g.matmul(&g.adjoint());
        let tr = rho.trace().re;
        let rho = rho.scale(c(1.0 / tr, 0.0));

        let red = partial_trace_b(&rho, dims).unwrap();
        for a in 0..3 {
            for a2 in 0..3 {
                let mut acc = c(0.0, 0.0);
                for b in 0..4 {
                    acc += rho.at(dims.flat(a, b), dims.flat(a2, b));
                }
                assert!((red.at(a, a2) - acc).norm() < 1e-13);
            }
        }
        assert!((red.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norms_on_known_matrices() {
        let id = CMatrix::identity(5);
        assert!((trace_norm(&id).unwrap() - 5.0).abs() < 1e-12);
        assert!((hs_norm(&id) - 5f64.sqrt()).abs() < 1e-12);
        assert!((operator_norm(&id) - 1.0).abs() < 1e-12);

        let zero = CMatrix::zeros(3, 3);
        assert_eq!(hs_norm(&zero), 0.0);
        assert_eq!(operator_norm(&zero), 0.0);

        let e0 = CVector::basis(4, 0);
        let proj = CMatrix::outer(&e0, &e0);
        assert!((trace_norm(&proj).unwrap() - 1.0).abs() < 1e-12);

        // Difference of orthogonal rank-one projectors has trace norm 2.
        let e1 = CVector::basis(4, 1);
        let diff = proj.sub(&CMatrix::outer(&e1, &e1));
        assert!((trace_norm(&diff).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_rejects_non_square() {
        let m = CMatrix::zeros(2, 3);
        assert!(trace_norm(&m).is_err());
    }

    #[test]
    fn norm_chain_on_random_matrices() {
        let mut s = 7u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for _ in 0..100 {
            let mut m = CMatrix::zeros(3, 3);
            for i in 0..3 {
                for j in 0..3 {
                    m.set(i, j, c(next(), next()));
                }
            }
            let tn = trace_norm(&m).unwrap();
            let hs = hs_norm(&m);
            let op = operator_norm(&m);
            assert!(tn >= hs - 1e-12);
            assert!(hs >= op - 1e-12);

            // SVD oracle: HS norm must equal the l2 norm of singular values.
            let sv = m.singular_values();
            let sv_l2 = sv.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((hs - sv_l2).abs() < 1e-10);
        }
    }

    #[test]
    fn nullspace_of_two_basis_columns() {
        let cols = vec![CVector::basis(3, 0), CVector::basis(3, 1)];
        let v = nullspace_vector(&cols, 3).unwrap();
        // Must be +/- e_3 up to phase; canonicalization makes it exactly e_3.
        assert!((v.entries()[2].norm() - 1.0).abs() < 1e-12);
        assert!(v.entries()[0].norm() < 1e-12);
        assert!(v.entries()[1].norm() < 1e-12);
    }

    #[test]
    fn nullspace_of_empty_list_is_first_canonical() {
        let v = nullspace_vector(&[], 4).unwrap();
        assert_eq!(v.entries()[0], c(1.0, 0.0));
    }

    #[test]
    fn nullspace_orthogonality_residual() {
        let mut s = 99u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let cols: Vec<CVector> = (0..5)
            .map(|_| {
                CVector::from_entries((0..8).map(|_| c(next(), next())).collect())
                    .normalized()
                    .unwrap()
            })
            .collect();
        let v = nullspace_vector(&cols, 8).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);
        for col in &cols {
            assert!(col.inner(&v).norm() < 1e-10, "Gram check failed");
        }
    }

    #[test]
    fn nullspace_fails_on_full_span() {
        let cols: Vec<CVector> = (0..3).map(|i| CVector::basis(3, i)).collect();
        match nullspace_vector(&cols, 3) {
            Err(Error::NoNullspace(_)) => {}
            other => panic!("expected NoNullspace, got {other:?}"),
        }
    }

    #[test]
    fn householder_qr_reconstructs() {
        let mut s = 5u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let d = 6;
        let mut a = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                a.set(i, j, c(next(), next()));
            }
        }
        let orig = a.clone();
        let (refl, diag) = householder_qr(&mut a);
        let q = accumulate_q(&refl, d);
        assert!(q.unitarity_residual() < 1e-12);
        // Q R reconstructs the input; R is the in-place triangle.
        let mut r = CMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                r.set(i, j, a.at(i, j));
            }
        }
        assert!(hs_norm(&q.matmul(&r).sub(&orig)) < 1e-12);
        for (j, dj) in diag.iter().enumerate() {
            assert!((dj - r.at(j, j)).norm() < 1e-12);
        }
    }
}
