//! Finite-dimensional matrix realizations: single-site Weyl matrices,
//! tensor-product (local) operators, and full dense operators.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::words::Phase;
use crate::zmod::ModVec2;

/// Default limit on the dimension of a dense operator.
pub const DEFAULT_DIM_CAP: usize = 3125;

pub type CMatrix = DMatrix<Complex64>;

/// Numerator `z` with `zeta = exp(i*pi*z/d)`. For odd `d` the prefactor is
/// the d-th root `omega^((d+1)/2)`, which makes `W_k` depend only on `k mod d`
/// and gives `W_k^d = 1`.
fn zeta_numerator(d: u32) -> i64 {
    if d % 2 == 0 {
        1
    } else {
        d as i64 + 1
    }
}

/// `W_k = zeta^(-k1*k2) Z^k1 X^k2` with `Z = diag(omega^j)` and
/// `X|j> = |j+1>`.
pub fn weyl_matrix(k: ModVec2) -> CMatrix {
    let d = k.modulus();
    let (k1, k2) = (k.k1() as i64, k.k2() as i64);
    let base = -zeta_numerator(d) * k1 * k2;
    let mut m = CMatrix::zeros(d as usize, d as usize);
    for col in 0..d as i64 {
        let row = (col + k2).rem_euclid(d as i64);
        m[(row as usize, col as usize)] = Phase::new(base + 2 * k1 * row, d).to_complex();
    }
    m
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// `a * b`, accumulating columns of `a` scaled by the nonzero entries of
/// `b`. Weyl-type operators have one nonzero per column, which makes their
/// products quadratic instead of cubic in the dimension.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut c = CMatrix::zeros(a.nrows(), b.ncols());
    matmul_into(a, b, &mut c);
    c
}

fn matmul_into(a: &CMatrix, b: &CMatrix, c: &mut CMatrix) {
    assert_eq!(a.ncols(), b.nrows(), "inner dimensions differ");
    assert_eq!((c.nrows(), c.ncols()), (a.nrows(), b.ncols()), "output shape differs");
    let zero = Complex64::new(0.0, 0.0);
    let (n, inner) = (a.nrows(), b.nrows());
    // column-major storage: column j of each matrix is a contiguous slice
    let (av, bv) = (a.as_slice(), b.as_slice());
    for (j, out) in c.as_mut_slice().chunks_exact_mut(n.max(1)).enumerate() {
        out.fill(zero);
        for (k, &bkj) in bv[j * inner..(j + 1) * inner].iter().enumerate() {
            if bkj != zero {
                for (o, &x) in out.iter_mut().zip(&av[k * n..(k + 1) * n]) {
                    *o += bkj * x;
                }
            }
        }
    }
}

/// Nonzero entries `(row, col, value)` of `f_0 (x) f_1 (x) ...`, built
/// from products of nonzero factor entries.
fn kron_entries(factors: &[CMatrix]) -> Vec<(usize, usize, Complex64)> {
    let zero = Complex64::new(0.0, 0.0);
    let mut entries = vec![(0usize, 0usize, Complex64::new(1.0, 0.0))];
    for f in factors {
        let (rows, cols) = (f.nrows(), f.ncols());
        let mut next = Vec::with_capacity(entries.len() * rows);
        for &(r, c, x) in &entries {
            for j in 0..cols {
                for i in 0..rows {
                    let y = f[(i, j)];
                    if y != zero {
                        next.push((r * rows + i, c * cols + j, x * y));
                    }
                }
            }
        }
        entries = next;
    }
    entries
}

fn kron_into(factors: &[CMatrix], out: &mut CMatrix) {
    out.fill(Complex64::new(0.0, 0.0));
    for (r, c, x) in kron_entries(factors) {
        out[(r, c)] = x;
    }
}

/// Kronecker buffer that remembers which entries it wrote, so refilling
/// it only has to clear those.
struct KronBuffer {
    mat: CMatrix,
    written: Vec<(usize, usize)>,
}

impl KronBuffer {
    fn zeros(dim: usize) -> Self {
        Self { mat: CMatrix::zeros(dim, dim), written: Vec::new() }
    }

    fn fill(&mut self, factors: &[CMatrix]) {
        for &(r, c) in &self.written {
            self.mat[(r, c)] = Complex64::new(0.0, 0.0);
        }
        self.written.clear();
        for (r, c, x) in kron_entries(factors) {
            self.mat[(r, c)] = x;
            self.written.push((r, c));
        }
    }
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max).sqrt()
}

fn checked_dim(d: u32, sites: usize, cap: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..sites {
        dim = dim.checked_mul(d as usize).filter(|&x| x <= cap).ok_or(Error::DimensionCap {
            dim: (d as usize).saturating_pow(sites as u32),
            cap,
        })?;
    }
    Ok(dim)
}

/// An operator on `(C^d)^{sites}` stored as a full matrix. Site 0 is the
/// most significant tensor factor.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    d: u32,
    sites: usize,
    mat: CMatrix,
}

impl DenseOperator {
    pub fn new(d: u32, sites: usize, mat: CMatrix) -> Result<Self> {
        let dim = (d as usize).pow(sites as u32);
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch { left: dim, right: mat.nrows() });
        }
        Ok(Self { d, sites, mat })
    }

    pub fn identity(d: u32, sites: usize, cap: usize) -> Result<Self> {
        let dim = checked_dim(d, sites, cap)?;
        Ok(Self { d, sites, mat: identity(dim) })
    }

    pub fn modulus(&self) -> u32 {
        self.d
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { left: self.dim(), right: other.dim() });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self { d: self.d, sites: self.sites, mat: matmul(&self.mat, &other.mat) })
    }

    pub fn adjoint(&self) -> Self {
        Self { d: self.d, sites: self.sites, mat: self.mat.adjoint() }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { d: self.d, sites: self.sites, mat: self.mat.map(|z| z * c) }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = identity(self.dim());
        for _ in 0..e {
            acc = matmul(&acc, &self.mat);
        }
        Self { d: self.d, sites: self.sites, mat: acc }
    }

    /// `[self, other] = self*other - other*self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mat = matmul(&self.mat, &other.mat) - matmul(&other.mat, &self.mat);
        Ok(Self { d: self.d, sites: self.sites, mat })
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        self.mat.singular_values().max()
    }

    /// `tr(A) / dim`.
    pub fn normalized_trace(&self) -> Complex64 {
        self.mat.trace() / self.dim() as f64
    }

    /// Largest entry of `|A^dagger A - 1|`.
    pub fn unitarity_deviation(&self) -> f64 {
        max_abs(&(matmul(&self.mat.adjoint(), &self.mat) - identity(self.dim())))
    }

    /// Largest entry of `|A - B|`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_shape(other)?;
        Ok(max_abs(&(&self.mat - &other.mat)))
    }

    /// The scalar `lambda` with `A B = lambda B A`, estimated as
    /// `tr(AB (BA)^dagger) / tr(BA (BA)^dagger)`, and the residual
    /// `max |AB - lambda BA|`.
    pub fn commutation_phase(&self, other: &Self) -> Result<(Complex64, f64)> {
        self.same_shape(other)?;
        let ab = matmul(&self.mat, &other.mat);
        let ba = matmul(&other.mat, &self.mat);
        Ok(scalar_ratio(&ab, &ba))
    }
}

fn scalar_ratio(ab: &CMatrix, ba: &CMatrix) -> (Complex64, f64) {
    let (x, y) = (ab.as_slice(), ba.as_slice());
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0f64;
    for (p, q) in x.iter().zip(y) {
        num += p * q.conj();
        den += q.norm_sqr();
    }
    if den == 0.0 {
        return (Complex64::new(0.0, 0.0), max_abs(ab));
    }
    let lambda = num / den;
    let residual = x.iter().zip(y).fold(0.0f64, |acc, (p, q)| acc.max((p - lambda * q).norm_sqr())).sqrt();
    (lambda, residual)
}

/// A tensor product `f_0 (x) f_1 (x) ... ` of single-site `d x d` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperator {
    d: u32,
    factors: Vec<CMatrix>,
}

impl LocalOperator {
    pub fn identity(d: u32, sites: usize) -> Self {
        Self { d, factors: vec![identity(d as usize); sites] }
    }

    pub fn from_factors(d: u32, factors: Vec<CMatrix>) -> Result<Self> {
        for f in &factors {
            if f.nrows() != d as usize || f.ncols() != d as usize {
                return Err(Error::DimensionMismatch { left: d as usize, right: f.nrows() });
            }
        }
        Ok(Self { d, factors })
    }

    pub fn modulus(&self) -> u32 {
        self.d
    }

    pub fn sites(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[CMatrix] {
        &self.factors
    }

    pub fn factor(&self, site: usize) -> &CMatrix {
        &self.factors[site]
    }

    /// Multiplies the factor at `site` on the right by `m`.
    pub fn apply_at(&mut self, site: usize, m: &CMatrix) -> Result<()> {
        let max = self.sites() as i64 - 1;
        let f = self
            .factors
            .get_mut(site)
            .ok_or(Error::SiteOutOfRange { site: site as i64, max })?;
        *f = &*f * m;
        Ok(())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        if let Some(f) = out.factors.first_mut() {
            *f = f.map(|z| z * c);
        }
        out
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.d != other.d || self.sites() != other.sites() {
            return Err(Error::DimensionMismatch { left: self.sites(), right: other.sites() });
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let factors = self.factors.iter().zip(&other.factors).map(|(a, b)| a * b).collect();
        Ok(Self { d: self.d, factors })
    }

    pub fn adjoint(&self) -> Self {
        Self { d: self.d, factors: self.factors.iter().map(|f| f.adjoint()).collect() }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::identity(self.d, self.sites());
        for _ in 0..e {
            acc = acc.mul(self).expect("same shape");
        }
        acc
    }

    /// `prod_l tr(f_l) / d`.
    pub fn normalized_trace(&self) -> Complex64 {
        self.factors.iter().map(|f| f.trace() / self.d as f64).product()
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let id = identity(self.d as usize);
        self.factors.iter().map(|f| max_abs(&(f.adjoint() * f - &id))).fold(0.0, f64::max)
    }

    /// Per-site commutation scalars: `a_l b_l = lambda_l b_l a_l`. Returns
    /// `prod lambda_l` together with the largest per-site residual, so
    /// `A B = (prod lambda_l) B A` holds up to that residual in each factor.
    pub fn commutation_phase(&self, other: &Self) -> Result<(Complex64, f64)> {
        self.same_shape(other)?;
        let mut lambda = Complex64::new(1.0, 0.0);
        let mut residual = 0.0f64;
        for (a, b) in self.factors.iter().zip(&other.factors) {
            let (l, r) = scalar_ratio(&(a * b), &(b * a));
            lambda *= l;
            residual = residual.max(r);
        }
        Ok((lambda, residual))
    }

    /// Expands the Kronecker product into a full matrix.
    pub fn to_dense(&self, cap: usize) -> Result<DenseOperator> {
        let dim = checked_dim(self.d, self.sites(), cap)?;
        let mut mat = CMatrix::zeros(dim, dim);
        kron_into(&self.factors, &mut mat);
        Ok(DenseOperator { d: self.d, sites: self.sites(), mat })
    }
}

/// Four full matrices reused across dense commutation checks at one
/// dimension. At `5^5` each matrix is 156 MB, and allocating them afresh
/// for every pair costs more than the arithmetic.
pub struct DenseWorkspace {
    d: u32,
    sites: usize,
    a: KronBuffer,
    b: KronBuffer,
    ab: CMatrix,
    ba: CMatrix,
}

impl DenseWorkspace {
    pub fn new(d: u32, sites: usize, cap: usize) -> Result<Self> {
        let dim = checked_dim(d, sites, cap)?;
        Ok(Self {
            d,
            sites,
            a: KronBuffer::zeros(dim),
            b: KronBuffer::zeros(dim),
            ab: CMatrix::zeros(dim, dim),
            ba: CMatrix::zeros(dim, dim),
        })
    }

    /// Same as [`DenseOperator::commutation_phase`] on the expanded
    /// operators.
    pub fn commutation_phase(&mut self, x: &LocalOperator, y: &LocalOperator) -> Result<(Complex64, f64)> {
        for op in [x, y] {
            if op.d != self.d || op.sites() != self.sites {
                let right = (op.d as usize).saturating_pow(op.sites() as u32);
                return Err(Error::DimensionMismatch { left: self.ab.nrows(), right });
            }
        }
        self.a.fill(&x.factors);
        self.b.fill(&y.factors);
        matmul_into(&self.a.mat, &self.b.mat, &mut self.ab);
        matmul_into(&self.b.mat, &self.a.mat, &mut self.ba);
        Ok(scalar_ratio(&self.ab, &self.ba))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zmod::symplectic;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        max_abs(&(a - b)) <= tol
    }

    fn v(k1: i64, k2: i64, d: u32) -> ModVec2 {
        ModVec2::new(k1, k2, d).unwrap()
    }

    #[test]
    fn pauli_matrices() {
        let z = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        let x = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let y = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
        assert!(close(&weyl_matrix(v(1, 0, 2)), &z, 1e-15));
        assert!(close(&weyl_matrix(v(0, 1, 2)), &x, 1e-15));
        assert!(close(&weyl_matrix(v(1, 1, 2)), &y, 1e-15));
        assert!(close(&weyl_matrix(v(1, 1, 2)), &((&z * &x) * c(0., -1.)), 1e-15));
    }

    #[test]
    fn clock_and_shift() {
        let d = 5;
        let omega = Phase::root(1, d).to_complex();
        let z = weyl_matrix(v(1, 0, d));
        let x = weyl_matrix(v(0, 1, d));
        for j in 0..d as usize {
            assert!((z[(j, j)] - omega.powu(j as u32)).norm() < 1e-14);
            assert!((x[((j + 1) % d as usize, j)] - c(1., 0.)).norm() < 1e-14);
        }
        assert!(close(&(&z * &x), &((&x * &z) * omega), 1e-13));
    }

    #[test]
    fn weyl_relations_for_prime_moduli() {
        for d in [2u32, 3, 5, 7] {
            let omega = Phase::root(1, d).to_complex();
            let id = identity(d as usize);
            for k in ModVec2::all(d) {
                let wk = weyl_matrix(k);
                assert!(close(&(&wk * weyl_matrix(k.neg())), &id, 1e-12), "d={d} k={k:?}");
                assert!(close(&(wk.adjoint() * &wk), &id, 1e-12));
                let mut p = id.clone();
                for _ in 0..d {
                    p = &p * &wk;
                }
                assert!(close(&p, &id, 1e-11));
                for m in ModVec2::all(d) {
                    let wm = weyl_matrix(m);
                    let s = symplectic(k, m).unwrap().value();
                    assert!(close(&(&wk * &wm), &((&wm * &wk) * omega.powu(s)), 1e-12));
                }
            }
        }
    }

    #[test]
    fn half_angle_prefactor_breaks_inverse_for_odd_d() {
        // zeta = exp(i*pi/3) applied to W_(1,1) for d=3 gives W_k W_{-k} = -1.
        let d = 3;
        let k = v(1, 1, d);
        let plain = |k: ModVec2| {
            let (k1, k2) = (k.k1() as i64, k.k2() as i64);
            let mut m = CMatrix::zeros(3, 3);
            for col in 0..3i64 {
                let row = (col + k2).rem_euclid(3);
                m[(row as usize, col as usize)] = Phase::new(-k1 * k2 + 2 * k1 * row, d).to_complex();
            }
            m
        };
        let prod = plain(k) * plain(k.neg());
        assert!(close(&prod, &(identity(3) * c(-1., 0.)), 1e-12));
    }

    #[test]
    fn local_matches_dense() {
        let d = 3;
        let a = LocalOperator::from_factors(d, vec![weyl_matrix(v(1, 2, d)), weyl_matrix(v(0, 1, d))]).unwrap();
        let b = LocalOperator::from_factors(d, vec![weyl_matrix(v(2, 2, d)), weyl_matrix(v(1, 1, d))]).unwrap();
        let (da, db) = (a.to_dense(DEFAULT_DIM_CAP).unwrap(), b.to_dense(DEFAULT_DIM_CAP).unwrap());
        let ab = a.mul(&b).unwrap().to_dense(DEFAULT_DIM_CAP).unwrap();
        assert!(ab.max_abs_diff(&da.mul(&db).unwrap()).unwrap() < 1e-13);
        let (l1, r1) = a.commutation_phase(&b).unwrap();
        let (l2, r2) = da.commutation_phase(&db).unwrap();
        assert!((l1 - l2).norm() < 1e-12 && r1 < 1e-12 && r2 < 1e-12);
        assert!((a.normalized_trace() - da.normalized_trace()).norm() < 1e-14);
    }

    #[test]
    fn matmul_matches_nalgebra() {
        let a = CMatrix::from_fn(5, 4, |i, j| c(i as f64 - 1.5 * j as f64, (i * j) as f64 * 0.25));
        let b = CMatrix::from_fn(4, 3, |i, j| if (i + j) % 2 == 0 { c(0.0, 0.0) } else { c(j as f64, -(i as f64)) });
        assert!(close(&matmul(&a, &b), &(&a * &b), 1e-12));
    }

    #[test]
    fn kron_matches_nalgebra() {
        let f = |s: f64| CMatrix::from_fn(3, 3, |i, j| if (i + 2 * j) % 4 == 1 { c(0.0, 0.0) } else { c(s + i as f64, j as f64 - s) });
        let factors = vec![f(0.5), weyl_matrix(v(1, 2, 3)), f(-1.0)];
        let want = factors.iter().fold(identity(1), |acc, m| acc.kronecker(m));
        let mut got = CMatrix::zeros(27, 27);
        kron_into(&factors, &mut got);
        assert!(close(&got, &want, 1e-12));
    }

    #[test]
    fn workspace_matches_dense_operator() {
        let d = 3;
        let a = LocalOperator::from_factors(d, vec![weyl_matrix(v(1, 2, d)), weyl_matrix(v(0, 1, d)), identity(3)]).unwrap();
        let b = LocalOperator::from_factors(d, vec![weyl_matrix(v(2, 2, d)), weyl_matrix(v(1, 1, d)), weyl_matrix(v(1, 0, d))]).unwrap();
        let mut ws = DenseWorkspace::new(d, 3, DEFAULT_DIM_CAP).unwrap();
        for (x, y) in [(&a, &b), (&b, &a), (&a, &a)] {
            let (l1, r1) = ws.commutation_phase(x, y).unwrap();
            let (l2, r2) = x.to_dense(64).unwrap().commutation_phase(&y.to_dense(64).unwrap()).unwrap();
            assert!((l1 - l2).norm() < 1e-14 && (r1 - r2).abs() < 1e-14);
        }
        assert!(ws.commutation_phase(&a, &LocalOperator::identity(d, 2)).is_err());
        assert!(matches!(DenseWorkspace::new(5, 6, DEFAULT_DIM_CAP), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn cap_is_enforced() {
        let op = LocalOperator::identity(5, 6);
        assert!(matches!(op.to_dense(DEFAULT_DIM_CAP), Err(Error::DimensionCap { dim: 15625, cap: 3125 })));
        assert!(LocalOperator::identity(5, 5).to_dense(DEFAULT_DIM_CAP).is_ok());
    }

    #[test]
    fn commutator_and_norm() {
        let z = LocalOperator::from_factors(2, vec![weyl_matrix(v(1, 0, 2)), identity(2)]).unwrap();
        let x = LocalOperator::from_factors(2, vec![weyl_matrix(v(0, 1, 2)), identity(2)]).unwrap();
        let (z, x) = (z.to_dense(64).unwrap(), x.to_dense(64).unwrap());
        let comm = z.commutator(&x).unwrap();
        assert!((comm.op_norm() - 2.0).abs() < 1e-12);
        assert!(z.commutator(&z).unwrap().op_norm() < 1e-15);
        let other = DenseOperator::identity(2, 3, 64).unwrap();
        assert!(matches!(z.commutator(&other), Err(Error::DimensionMismatch { .. })));
    }
}
