//! Exact arithmetic over Z_d for scalars, 2-vectors and 2x2 matrices.
//!
//! Every value carries its modulus. Binary operations between values with
//! different moduli return [`Error::ModulusMismatch`] instead of coercing.

use std::fmt;

use crate::error::{check_modulus, Error, Result};

#[inline]
fn reduce(value: i64, d: u32) -> u32 {
    value.rem_euclid(d as i64) as u32
}

fn validate(d: u32) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidModulus(d))
    } else {
        Ok(())
    }
}

pub fn is_prime(d: u32) -> bool {
    if d < 2 {
        return false;
    }
    let mut f = 2u32;
    while (f as u64) * (f as u64) <= d as u64 {
        if d % f == 0 {
            return false;
        }
        f += 1;
    }
    true
}

/// Inverse of `a` modulo `d` when `gcd(a, d) = 1`.
pub fn inv_mod(a: u32, d: u32) -> Option<u32> {
    let (mut r0, mut r1) = (d as i64, (a % d) as i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 == 1 {
        Some(reduce(t0, d))
    } else {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModScalar {
    value: u32,
    modulus: u32,
}

impl ModScalar {
    pub fn new(value: i64, modulus: u32) -> Result<Self> {
        validate(modulus)?;
        Ok(Self::reduced(value, modulus))
    }

    pub(crate) fn reduced(value: i64, modulus: u32) -> Self {
        Self { value: reduce(value, modulus), modulus }
    }

    pub fn value(self) -> u32 {
        self.value
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn add(self, other: Self) -> Result<Self> {
        check_modulus(self.modulus, other.modulus)?;
        Ok(Self::reduced(self.value as i64 + other.value as i64, self.modulus))
    }

    pub fn sub(self, other: Self) -> Result<Self> {
        check_modulus(self.modulus, other.modulus)?;
        Ok(Self::reduced(self.value as i64 - other.value as i64, self.modulus))
    }

    pub fn mul(self, other: Self) -> Result<Self> {
        check_modulus(self.modulus, other.modulus)?;
        Ok(Self::reduced(self.value as i64 * other.value as i64, self.modulus))
    }

    pub fn neg(self) -> Self {
        Self::reduced(-(self.value as i64), self.modulus)
    }

    pub fn inv(self) -> Option<Self> {
        inv_mod(self.value, self.modulus).map(|v| Self { value: v, modulus: self.modulus })
    }
}

impl fmt::Display for ModScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.value, self.modulus)
    }
}

/// A vector `(k1, k2)` in Z_d^2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModVec2 {
    k1: u32,
    k2: u32,
    modulus: u32,
}

impl ModVec2 {
    pub fn new(k1: i64, k2: i64, modulus: u32) -> Result<Self> {
        validate(modulus)?;
        Ok(Self::reduced(k1, k2, modulus))
    }

    pub(crate) fn reduced(k1: i64, k2: i64, modulus: u32) -> Self {
        Self { k1: reduce(k1, modulus), k2: reduce(k2, modulus), modulus }
    }

    pub fn zero(modulus: u32) -> Self {
        Self { k1: 0, k2: 0, modulus }
    }

    pub fn k1(self) -> u32 {
        self.k1
    }

    pub fn k2(self) -> u32 {
        self.k2
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.k1 == 0 && self.k2 == 0
    }

    pub fn add(self, other: Self) -> Result<Self> {
        check_modulus(self.modulus, other.modulus)?;
        Ok(Self::reduced(
            self.k1 as i64 + other.k1 as i64,
            self.k2 as i64 + other.k2 as i64,
            self.modulus,
        ))
    }

    pub fn neg(self) -> Self {
        Self::reduced(-(self.k1 as i64), -(self.k2 as i64), self.modulus)
    }

    pub fn scale(self, c: i64) -> Self {
        Self::reduced(c * self.k1 as i64, c * self.k2 as i64, self.modulus)
    }

    /// All `d^2` vectors of Z_d^2 in lexicographic order.
    pub fn all(modulus: u32) -> impl Iterator<Item = ModVec2> {
        (0..modulus).flat_map(move |a| (0..modulus).map(move |b| ModVec2 { k1: a, k2: b, modulus }))
    }
}

impl fmt::Display for ModVec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.k1, self.k2)
    }
}

/// Symplectic form `k1*m2 - k2*m1 mod d`.
pub fn symplectic(k: ModVec2, m: ModVec2) -> Result<ModScalar> {
    check_modulus(k.modulus, m.modulus)?;
    Ok(ModScalar::reduced(symplectic_raw(k, m), k.modulus))
}

/// Unreduced integer value of the symplectic form on the canonical
/// representatives. Callers must have checked the moduli.
#[inline]
pub(crate) fn symplectic_raw(k: ModVec2, m: ModVec2) -> i64 {
    k.k1 as i64 * m.k2 as i64 - k.k2 as i64 * m.k1 as i64
}

/// A 2x2 matrix over Z_d, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModMat2 {
    a: [[u32; 2]; 2],
    modulus: u32,
}

impl ModMat2 {
    pub fn new(entries: [[i64; 2]; 2], modulus: u32) -> Result<Self> {
        validate(modulus)?;
        Ok(Self::reduced(entries, modulus))
    }

    pub(crate) fn reduced(e: [[i64; 2]; 2], modulus: u32) -> Self {
        Self {
            a: [
                [reduce(e[0][0], modulus), reduce(e[0][1], modulus)],
                [reduce(e[1][0], modulus), reduce(e[1][1], modulus)],
            ],
            modulus,
        }
    }

    pub fn identity(modulus: u32) -> Self {
        Self { a: [[1, 0], [0, 1]], modulus }
    }

    pub fn zero(modulus: u32) -> Self {
        Self { a: [[0, 0], [0, 0]], modulus }
    }

    pub fn diag(t: u32, s: u32, modulus: u32) -> Self {
        Self::reduced([[t as i64, 0], [0, s as i64]], modulus)
    }

    pub fn entries(&self) -> [[u32; 2]; 2] {
        self.a
    }

    pub fn entry(&self, row: usize, col: usize) -> u32 {
        self.a[row][col]
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    fn signed(&self) -> [[i64; 2]; 2] {
        let a = self.a;
        [[a[0][0] as i64, a[0][1] as i64], [a[1][0] as i64, a[1][1] as i64]]
    }

    pub fn det(&self) -> ModScalar {
        let a = self.signed();
        ModScalar::reduced(a[0][0] * a[1][1] - a[0][1] * a[1][0], self.modulus)
    }

    /// `[[a11,a12],[a21,a22]] -> [[a22,-a12],[a21,a11]]`.
    ///
    /// Note `det(hat(A)) = a11*a22 + a12*a21`, which agrees with `det(A)` only
    /// when `2*a12*a21 = 0 mod d`. The map with the symplectic transfer
    /// property `sigma(A k, m) = sigma(k, B m)` is the [`adjugate`](Self::adjugate).
    pub fn hat(&self) -> Self {
        let a = self.signed();
        Self::reduced([[a[1][1], -a[0][1]], [a[1][0], a[0][0]]], self.modulus)
    }

    /// `[[a22,-a12],[-a21,a11]]`, so that `A * adj(A) = det(A) * 1`.
    pub fn adjugate(&self) -> Self {
        let a = self.signed();
        Self::reduced([[a[1][1], -a[0][1]], [-a[1][0], a[0][0]]], self.modulus)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        check_modulus(self.modulus, other.modulus)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Self) -> Self {
        let (a, b) = (self.signed(), other.signed());
        let mut c = [[0i64; 2]; 2];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self::reduced(c, self.modulus)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_modulus(self.modulus, other.modulus)?;
        let (a, b) = (self.signed(), other.signed());
        Ok(Self::reduced(
            [[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]],
            self.modulus,
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_modulus(self.modulus, other.modulus)?;
        let (a, b) = (self.signed(), other.signed());
        Ok(Self::reduced(
            [[a[0][0] - b[0][0], a[0][1] - b[0][1]], [a[1][0] - b[1][0], a[1][1] - b[1][1]]],
            self.modulus,
        ))
    }

    pub fn scale(&self, c: ModScalar) -> Result<Self> {
        check_modulus(self.modulus, c.modulus)?;
        let a = self.signed();
        let c = c.value as i64;
        Ok(Self::reduced([[c * a[0][0], c * a[0][1]], [c * a[1][0], c * a[1][1]]], self.modulus))
    }

    pub fn apply(&self, v: ModVec2) -> Result<ModVec2> {
        check_modulus(self.modulus, v.modulus)?;
        Ok(self.apply_unchecked(v))
    }

    #[inline]
    pub(crate) fn apply_unchecked(&self, v: ModVec2) -> ModVec2 {
        let a = self.signed();
        let (x, y) = (v.k1 as i64, v.k2 as i64);
        ModVec2::reduced(a[0][0] * x + a[0][1] * y, a[1][0] * x + a[1][1] * y, self.modulus)
    }

    /// Two-sided inverse. Requires a prime modulus and a nonzero determinant.
    pub fn inv(&self) -> Result<Self> {
        if !is_prime(self.modulus) {
            return Err(Error::NonPrimeModulus(self.modulus));
        }
        let det = self.det();
        let det_inv = det
            .inv()
            .ok_or(Error::NotInvertible { det: det.value, modulus: self.modulus })?;
        self.adjugate().scale(det_inv)
    }

    /// Every 2x2 matrix over Z_d (`d^4` of them).
    pub fn all(modulus: u32) -> impl Iterator<Item = ModMat2> {
        (0..modulus.pow(4)).map(move |mut code| {
            let mut e = [[0i64; 2]; 2];
            for cell in e.iter_mut().flatten() {
                *cell = (code % modulus) as i64;
                code /= modulus;
            }
            ModMat2::reduced(e, modulus)
        })
    }
}

impl fmt::Display for ModMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{}, {}], [{}, {}]] (mod {})",
            self.a[0][0], self.a[0][1], self.a[1][0], self.a[1][1], self.modulus
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(a: i64, b: i64, d: u32) -> ModVec2 {
        ModVec2::new(a, b, d).unwrap()
    }

    fn m(e: [[i64; 2]; 2], d: u32) -> ModMat2 {
        ModMat2::new(e, d).unwrap()
    }

    #[test]
    fn symplectic_examples() {
        assert_eq!(symplectic(v(1, 0, 5), v(0, 1, 5)).unwrap().value(), 1);
        assert_eq!(symplectic(v(1, 2, 5), v(3, 4, 5)).unwrap().value(), 3);
        for k in ModVec2::all(5) {
            assert!(symplectic(k, k).unwrap().is_zero());
        }
    }

    #[test]
    fn symplectic_rejects_mixed_moduli() {
        let err = symplectic(v(1, 0, 5), v(0, 1, 7)).unwrap_err();
        assert!(matches!(err, Error::ModulusMismatch { left: 5, right: 7 }));
    }

    #[test]
    fn invalid_modulus() {
        assert!(matches!(ModScalar::new(1, 1), Err(Error::InvalidModulus(1))));
        assert!(matches!(ModMat2::new([[0; 2]; 2], 0), Err(Error::InvalidModulus(0))));
    }

    #[test]
    fn hat_examples() {
        assert_eq!(m([[1, 2], [3, 4]], 5).hat(), m([[4, 3], [3, 1]], 5));
        assert_eq!(ModMat2::identity(7).hat(), ModMat2::identity(7));
        // det(hat A) = a11 a22 + a12 a21
        let a = m([[1, 2], [3, 4]], 5);
        assert_eq!(a.hat().det().value(), (4 + 6) % 5);
        assert_ne!(a.hat().det(), a.det());
    }

    #[test]
    fn hat_and_adjugate_agree_mod_two() {
        for a in ModMat2::all(2) {
            assert_eq!(a.hat(), a.adjugate());
        }
    }

    #[test]
    fn adjugate_examples() {
        assert_eq!(ModMat2::identity(7).adjugate(), ModMat2::identity(7));
        for d in [2u32, 3, 5, 7] {
            let a = m([[0, 1], [d as i64 - 1, 0]], d);
            assert_eq!(a.adjugate(), m([[0, d as i64 - 1], [1, 0]], d));
            assert_eq!(a.det().value(), 1);
        }
    }

    #[test]
    fn inverse_examples() {
        let a = m([[1, 1], [0, 1]], 3);
        assert_eq!(a.inv().unwrap(), m([[1, 2], [0, 1]], 3));
        assert_eq!(ModMat2::identity(5).inv().unwrap(), ModMat2::identity(5));
    }

    #[test]
    fn inverse_errors() {
        assert!(matches!(m([[1, 2], [2, 4]], 5).inv(), Err(Error::NotInvertible { .. })));
        assert!(matches!(ModMat2::identity(4).inv(), Err(Error::NonPrimeModulus(4))));
    }

    #[test]
    fn det_is_multiplicative_exhaustive() {
        for d in [2u32, 3] {
            let all: Vec<_> = ModMat2::all(d).collect();
            for a in &all {
                for b in &all {
                    let lhs = a.mul(b).unwrap().det();
                    let rhs = a.det().mul(b.det()).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn every_nonsingular_matrix_is_invertible_for_prime_d() {
        for d in [2u32, 3, 5] {
            for a in ModMat2::all(d).filter(|a| !a.det().is_zero()) {
                let ai = a.inv().unwrap();
                assert_eq!(a.mul(&ai).unwrap(), ModMat2::identity(d));
                assert_eq!(ai.mul(&a).unwrap(), ModMat2::identity(d));
            }
        }
    }

    #[test]
    fn adjugate_is_the_symplectic_transpose() {
        // sigma(A k, m) = sigma(k, adj(A) m)
        for a in ModMat2::all(3) {
            for k in ModVec2::all(3) {
                for mm in ModVec2::all(3) {
                    let lhs = symplectic(a.apply(k).unwrap(), mm).unwrap();
                    let rhs = symplectic(k, a.adjugate().apply(mm).unwrap()).unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn inv_mod_values() {
        assert_eq!(inv_mod(3, 7), Some(5));
        assert_eq!(inv_mod(2, 4), None);
        assert_eq!(inv_mod(0, 5), None);
    }

    #[test]
    fn primality() {
        let primes: Vec<u32> = (0..30).filter(|&d| is_prime(d)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
    }

    fn arb_mat(d: u32) -> impl Strategy<Value = ModMat2> {
        prop::array::uniform4(0..d as i64)
            .prop_map(move |e| ModMat2::reduced([[e[0], e[1]], [e[2], e[3]]], d))
    }

    fn arb_vec(d: u32) -> impl Strategy<Value = ModVec2> {
        (0..d as i64, 0..d as i64).prop_map(move |(a, b)| ModVec2::reduced(a, b, d))
    }

    proptest! {
        #[test]
        fn adjugate_identity(a in arb_mat(7)) {
            let det1 = ModMat2::identity(7).scale(a.det()).unwrap();
            prop_assert_eq!(a.mul(&a.adjugate()).unwrap(), det1);
            prop_assert_eq!(a.adjugate().mul(&a).unwrap(), det1);
        }

        #[test]
        fn hat_and_adjugate_are_involutions(a in arb_mat(7)) {
            prop_assert_eq!(a.hat().hat(), a);
            prop_assert_eq!(a.adjugate().adjugate(), a);
        }

        #[test]
        fn symplectic_antisymmetric(k in arb_vec(11), mm in arb_vec(11)) {
            prop_assert_eq!(symplectic(k, mm).unwrap(), symplectic(mm, k).unwrap().neg());
        }

        #[test]
        fn symplectic_bilinear(
            a in arb_mat(5), k in arb_vec(5), k2 in arb_vec(5), mm in arb_vec(5), c in 0i64..5
        ) {
            let lhs = symplectic(k.add(k2.scale(c)).unwrap(), a.apply(mm).unwrap()).unwrap();
            let rhs = symplectic(k, a.apply(mm).unwrap()).unwrap()
                .add(ModScalar::reduced(c, 5).mul(symplectic(k2, a.apply(mm).unwrap()).unwrap()).unwrap())
                .unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn determinant_scales_symplectic(a in arb_mat(5), k in arb_vec(5), mm in arb_vec(5)) {
            let lhs = symplectic(a.apply(k).unwrap(), a.apply(mm).unwrap()).unwrap();
            let rhs = a.det().mul(symplectic(k, mm).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
