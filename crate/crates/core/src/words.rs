//! The word algebra: multi-indices, the shift, twist phases `u_n(I;J)`, and
//! the regular-representation group law with its cocycle.
//!
//! All phases are exact integers. A [`Phase`] with numerator `p` stands for
//! `exp(i*pi*p/d)`, so the group of phases is Z_{2d}; the twist phases
//! `exp(2*pi*i*u/d)` sit in the index-2 subgroup of even numerators.
//!
//! A [`GroupElement`] `(p, I)` denotes `exp(i*pi*p/d) * Pi(W_I)`, where the
//! basis operators satisfy `Pi(W_I) Pi(W_J) = exp(i*pi*c(I,J)/d) Pi(W_{I+J})`
//! with the cocycle `c` from [`cocycle`]. The cocycle is a lift of
//! `u_0(I;J)` whose antisymmetric part is `2 u_0(I;J)`, so group commutators
//! reproduce the twisted commutation relations, and every basis operator
//! satisfies `Pi(W_I)^d = 1`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_modulus, Error, Result};
use crate::zmod::{symplectic_raw, ModMat2, ModScalar, ModVec2};

/// Anything that can supply the twist matrices `A_n` for all integers `n`.
///
/// Implementations must return the identity for `n = 0` and the adjugate of
/// `A_{-n}` for negative `n`; this is the only extension of the sequence to
/// negative indices compatible with exchanging the two sites in the twisted
/// commutation relation.
pub trait TwistSource {
    fn modulus(&self) -> u32;
    fn matrix(&self, n: i64) -> Result<ModMat2>;
}

/// Finitely supported map `site -> Z_d^2`, stored without zero vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    modulus: u32,
    support: BTreeMap<i64, ModVec2>,
}

impl MultiIndex {
    pub fn empty(modulus: u32) -> Self {
        Self { modulus, support: BTreeMap::new() }
    }

    pub fn singleton(site: i64, k: ModVec2) -> Self {
        let mut idx = Self::empty(k.modulus());
        if !k.is_zero() {
            idx.support.insert(site, k);
        }
        idx
    }

    /// Builds an index from `(site, k1, k2)` triples. Repeated sites are summed.
    pub fn from_triples<I>(modulus: u32, triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, i64, i64)>,
    {
        let mut idx = Self::empty(modulus);
        for (site, k1, k2) in triples {
            idx.insert_add(site, ModVec2::new(k1, k2, modulus)?)?;
        }
        Ok(idx)
    }

    fn insert_add(&mut self, site: i64, k: ModVec2) -> Result<()> {
        check_modulus(self.modulus, k.modulus())?;
        let sum = match self.support.get(&site) {
            Some(old) => old.add(k)?,
            None => k,
        };
        if sum.is_zero() {
            self.support.remove(&site);
        } else {
            self.support.insert(site, sum);
        }
        Ok(())
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn get(&self, site: i64) -> ModVec2 {
        self.support.get(&site).copied().unwrap_or(ModVec2::zero(self.modulus))
    }

    /// Supported sites in increasing order with their vectors.
    pub fn iter(&self) -> impl Iterator<Item = (i64, ModVec2)> + '_ {
        self.support.iter().map(|(&s, &k)| (s, k))
    }

    pub fn min_site(&self) -> Option<i64> {
        self.support.keys().next().copied()
    }

    pub fn max_site(&self) -> Option<i64> {
        self.support.keys().next_back().copied()
    }

    /// `max_site - min_site`, or 0 for the empty index.
    pub fn span(&self) -> i64 {
        match (self.min_site(), self.max_site()) {
            (Some(a), Some(b)) => b - a,
            _ => 0,
        }
    }

    pub fn shift(&self, n: i64) -> Self {
        Self {
            modulus: self.modulus,
            support: self.support.iter().map(|(&s, &k)| (s + n, k)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_modulus(self.modulus, other.modulus)?;
        let mut out = self.clone();
        for (s, k) in other.iter() {
            out.insert_add(s, k)?;
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        Self {
            modulus: self.modulus,
            support: self.support.iter().map(|(&s, &k)| (s, k.neg())).collect(),
        }
    }

    pub fn scale(&self, c: i64) -> Self {
        Self {
            modulus: self.modulus,
            support: self
                .support
                .iter()
                .map(|(&s, &k)| (s, k.scale(c)))
                .filter(|(_, k)| !k.is_zero())
                .collect(),
        }
    }

    /// `(site, k1, k2)` triples in increasing site order.
    /// Parses the display form `site:k1,k2;site:k1,k2`, or `{}` for the
    /// empty word. Repeated sites are summed.
    pub fn parse(text: &str, modulus: u32) -> Result<Self> {
        let text = text.trim();
        let bad = |reason: String| Error::InvalidSpec { spec: text.to_string(), reason };
        if text == "{}" || text.is_empty() {
            ModVec2::new(0, 0, modulus)?;
            return Ok(Self::empty(modulus));
        }
        let triples = text
            .split(';')
            .map(|letter| {
                let (site, k) = letter
                    .split_once(':')
                    .ok_or_else(|| bad(format!("letter `{letter}` is not `site:k1,k2`")))?;
                let (k1, k2) = k
                    .split_once(',')
                    .ok_or_else(|| bad(format!("letter `{letter}` is not `site:k1,k2`")))?;
                let int = |x: &str| x.trim().parse::<i64>().map_err(|_| bad(format!("`{x}` is not an integer")));
                Ok((int(site)?, int(k1)?, int(k2)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_triples(modulus, triples)
    }

    pub fn triples(&self) -> Vec<(i64, u32, u32)> {
        self.iter().map(|(s, k)| (s, k.k1(), k.k2())).collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{{}}");
        }
        let parts: Vec<String> =
            self.iter().map(|(s, k)| format!("{}:{},{}", s, k.k1(), k.k2())).collect();
        write!(f, "{}", parts.join(";"))
    }
}

#[derive(Serialize, Deserialize)]
struct MultiIndexJson {
    d: u32,
    support: Vec<(i64, i64, i64)>,
}

impl Serialize for MultiIndex {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MultiIndexJson {
            d: self.modulus,
            support: self.iter().map(|(s, k)| (s, k.k1() as i64, k.k2() as i64)).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = MultiIndexJson::deserialize(deserializer)?;
        if raw.support.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(D::Error::custom("support sites must be strictly increasing"));
        }
        MultiIndex::from_triples(raw.d, raw.support).map_err(D::Error::custom)
    }
}

/// `exp(i*pi*numerator/d)`, numerator taken mod `2d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase {
    numerator: u32,
    modulus: u32,
}

impl Phase {
    pub fn new(numerator: i64, modulus: u32) -> Self {
        let m = 2 * modulus as i64;
        Self { numerator: numerator.rem_euclid(m) as u32, modulus }
    }

    pub fn zero(modulus: u32) -> Self {
        Self { numerator: 0, modulus }
    }

    /// `exp(2*pi*i*j/d)`.
    pub fn root(j: i64, modulus: u32) -> Self {
        Self::new(2 * j, modulus)
    }

    pub fn numerator(self) -> u32 {
        self.numerator
    }

    pub fn modulus(self) -> u32 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.numerator == 0
    }

    pub fn add(self, other: Self) -> Result<Self> {
        check_modulus(self.modulus, other.modulus)?;
        Ok(Self::new(self.numerator as i64 + other.numerator as i64, self.modulus))
    }

    pub fn neg(self) -> Self {
        Self::new(-(self.numerator as i64), self.modulus)
    }

    /// For phases in the d-th-root subgroup, the exponent `j` with
    /// `self = exp(2*pi*i*j/d)`.
    pub fn root_exponent(self) -> Option<u32> {
        (self.numerator % 2 == 0).then_some(self.numerator / 2)
    }

    pub fn to_complex(self) -> Complex64 {
        let theta = std::f64::consts::PI * self.numerator as f64 / self.modulus as f64;
        Complex64::from_polar(1.0, theta)
    }
}

/// `d * u_n(I;J) mod d`, i.e. the sum over letters `a` of `I` and `b` of `J`
/// of `sigma(k_a, A_{b+n-a} k_b)`.
pub fn twist_u<S: TwistSource + ?Sized>(
    i: &MultiIndex,
    j: &MultiIndex,
    n: i64,
    seq: &S,
) -> Result<ModScalar> {
    let d = seq.modulus();
    check_modulus(i.modulus, j.modulus)?;
    check_modulus(i.modulus, d)?;
    let mut acc = 0i64;
    for (a, ka) in i.iter() {
        for (b, kb) in j.iter() {
            let m = seq.matrix(b + n - a)?;
            acc += symplectic_raw(ka, m.apply_unchecked(kb));
            acc %= d as i64;
        }
    }
    Ok(ModScalar::reduced(acc, d))
}

/// The phase relating `W_I alpha^n(W_J)` to `alpha^n(W_J) W_I`.
pub fn commutation_phase<S: TwistSource + ?Sized>(
    i: &MultiIndex,
    j: &MultiIndex,
    n: i64,
    seq: &S,
) -> Result<Phase> {
    let t = twist_u(i, j, n, seq)?;
    Ok(Phase::root(t.value() as i64, t.modulus()))
}

/// Upper-triangular part of the twist form with respect to the basis order
/// `(site, component)`. Its antisymmetrization is `u_0`.
fn upper_form<S: TwistSource + ?Sized>(x: &MultiIndex, y: &MultiIndex, seq: &S) -> Result<i64> {
    let d = seq.modulus() as i64;
    let mut acc = 0i64;
    for (s, kx) in x.iter() {
        for (t, ky) in y.iter() {
            if s < t {
                let m = seq.matrix(t - s)?;
                acc += symplectic_raw(kx, m.apply_unchecked(ky));
            } else if s == t {
                acc += kx.k1() as i64 * ky.k2() as i64;
            }
            acc %= d;
        }
    }
    Ok(acc.rem_euclid(d))
}

/// The regular-representation cocycle `c(I,J)`, returned as the phase
/// `exp(i*pi*c/d)`.
///
/// For odd `d` this is `(d+1) * u_0(I;J)`, i.e. `exp(i*pi*u_0)` evaluated on
/// the even lift of `d*u_0`; the form is bilinear, hence a cocycle. For even
/// `d` no bilinear lift has involutive basis elements, so the cocycle is
/// `2*b(I,J) + f(I) + f(J) - f(I+J)` with `b` the upper-triangular twist form
/// and `f(I) = b(I,I)`. Both satisfy
/// `c(I,J) - c(J,I) = 2*d*u_0(I;J) mod 2d` and `sum_j c(I, jI) = 0`.
pub fn cocycle<S: TwistSource + ?Sized>(i: &MultiIndex, j: &MultiIndex, seq: &S) -> Result<Phase> {
    let d = seq.modulus();
    check_modulus(i.modulus, j.modulus)?;
    check_modulus(i.modulus, d)?;
    if i.is_empty() || j.is_empty() {
        return Ok(Phase::zero(d));
    }
    if d % 2 == 1 {
        let t = twist_u(i, j, 0, seq)?;
        Ok(Phase::new((d as i64 + 1) * t.value() as i64, d))
    } else {
        let f = |x: &MultiIndex| upper_form(x, x, seq);
        let sum = i.add(j)?;
        let c = 2 * upper_form(i, j, seq)? + f(i)? + f(j)? - f(&sum)?;
        Ok(Phase::new(c, d))
    }
}

/// `exp(i*pi*p/d) * Pi(W_I)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub phase: Phase,
    pub index: MultiIndex,
}

impl GroupElement {
    pub fn identity(modulus: u32) -> Self {
        Self { phase: Phase::zero(modulus), index: MultiIndex::empty(modulus) }
    }

    pub fn word(index: MultiIndex) -> Self {
        Self { phase: Phase::zero(index.modulus), index }
    }

    pub fn letter(site: i64, k: ModVec2) -> Self {
        Self::word(MultiIndex::singleton(site, k))
    }

    pub fn modulus(&self) -> u32 {
        self.index.modulus
    }

    /// The ordered product of letters `(site, k)`, left to right. Reordering
    /// phases end up in the element's phase.
    pub fn from_letters<S: TwistSource + ?Sized>(letters: &[(i64, ModVec2)], seq: &S) -> Result<Self> {
        let mut acc = Self::identity(seq.modulus());
        for &(site, k) in letters {
            acc = multiply(&acc, &Self::letter(site, k), seq)?;
        }
        Ok(acc)
    }

    pub fn inverse<S: TwistSource + ?Sized>(&self, seq: &S) -> Result<Self> {
        let neg = self.index.neg();
        let c = cocycle(&self.index, &neg, seq)?;
        Ok(Self { phase: self.phase.neg().add(c.neg())?, index: neg })
    }

    pub fn pow<S: TwistSource + ?Sized>(&self, e: u32, seq: &S) -> Result<Self> {
        let mut acc = Self::identity(self.modulus());
        for _ in 0..e {
            acc = multiply(&acc, self, seq)?;
        }
        Ok(acc)
    }

    pub fn shift(&self, n: i64) -> Self {
        Self { phase: self.phase, index: self.index.shift(n) }
    }
}

pub fn multiply<S: TwistSource + ?Sized>(
    x: &GroupElement,
    y: &GroupElement,
    seq: &S,
) -> Result<GroupElement> {
    let c = cocycle(&x.index, &y.index, seq)?;
    Ok(GroupElement { phase: x.phase.add(y.phase)?.add(c)?, index: x.index.add(&y.index)? })
}

/// The normalized trace: the phase for the identity word, 0 otherwise.
pub fn trace(x: &GroupElement) -> Complex64 {
    if x.index.is_empty() {
        x.phase.to_complex()
    } else {
        Complex64::new(0.0, 0.0)
    }
}
