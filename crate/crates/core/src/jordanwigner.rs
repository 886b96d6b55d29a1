//! The doubled-chain representation: lattice point `m` owns sites `2m` and
//! `2m+1`, and a letter carries a commuting tail of `(0, .)` factors to its
//! left that encodes its twists with earlier letters.
//!
//! With `(b_n, a_n) = A_n k`, the letter `W^{(m)}_k` is
//!
//! ```text
//! core:  (k1, 0) at 2m,        (k2, -k1) at 2m+1
//! tail:  (0, a_n) at 2m-2n,    (0, -b_n) at 2m-2n+1,   n = 1..=T
//! ```
//!
//! The literal labels `(k2, k1)` and `(0, b_n), (0, a_n)` are available as
//! [`Convention::Verbatim`]; they produce `-sigma` on the core and the wrong
//! cross term on the tail, so the commutation phases do not match the word
//! algebra.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dense::{weyl_matrix, CMatrix, DenseOperator, LocalOperator};
use crate::error::{check_modulus, Error, Result};
use crate::seqgen::{Bitstream, DefiningSequence};
use crate::words::{MultiIndex, TwistSource};
use crate::zmod::ModVec2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Corrected,
    Verbatim,
}

/// A Weyl label per site; sites not listed carry the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteLabels {
    modulus: u32,
    labels: BTreeMap<i64, ModVec2>,
}

impl SiteLabels {
    pub fn empty(modulus: u32) -> Self {
        Self { modulus, labels: BTreeMap::new() }
    }

    fn put(&mut self, site: i64, k: ModVec2) {
        // each site is written at most once per letter
        if !k.is_zero() {
            self.labels.insert(site, k);
        }
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, ModVec2)> + '_ {
        self.labels.iter().map(|(&s, &k)| (s, k))
    }

    pub fn get(&self, site: i64) -> ModVec2 {
        self.labels.get(&site).copied().unwrap_or(ModVec2::zero(self.modulus))
    }

    pub fn is_identity(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn translate(&self, by: i64) -> Self {
        Self { modulus: self.modulus, labels: self.labels.iter().map(|(&s, &k)| (s + by, k)).collect() }
    }

    /// `W_{label}` at each site of `lo..=hi`.
    pub fn to_local(&self, lo: i64, hi: i64) -> Result<LocalOperator> {
        if let Some((&s, _)) = self.labels.iter().find(|(&s, _)| s < lo || s > hi) {
            return Err(Error::SiteOutOfRange { site: s, max: hi });
        }
        let d = self.modulus;
        let factors = (lo..=hi)
            .map(|s| match self.labels.get(&s) {
                Some(&k) => weyl_matrix(k),
                None => crate::dense::identity(d as usize),
            })
            .collect();
        LocalOperator::from_factors(d, factors)
    }

    pub fn to_dense(&self, lo: i64, hi: i64, cap: usize) -> Result<DenseOperator> {
        self.to_local(lo, hi)?.to_dense(cap)
    }
}

/// The image of one letter in the doubled chain (or, for Price-Powers
/// letters, in the single chain of even sites).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JWEmbedding {
    pub m: i64,
    pub k: ModVec2,
    pub tail: usize,
    pub convention: Convention,
    pub labels: SiteLabels,
}

impl JWEmbedding {
    pub fn modulus(&self) -> u32 {
        self.labels.modulus
    }

    /// The doubled-chain window `[2m - 2T, 2m + 1]`.
    pub fn window(&self) -> (i64, i64) {
        (2 * self.m - 2 * self.tail as i64, 2 * self.m + 1)
    }
}

#[derive(Serialize, Deserialize)]
struct EmbeddingJson {
    d: u32,
    m: i64,
    k: (u32, u32),
    tail: usize,
    convention: Convention,
    factors: Vec<(i64, u32, u32)>,
}

impl Serialize for JWEmbedding {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        EmbeddingJson {
            d: self.modulus(),
            m: self.m,
            k: (self.k.k1(), self.k.k2()),
            tail: self.tail,
            convention: self.convention,
            factors: self.labels.iter().map(|(s, k)| (s, k.k1(), k.k2())).collect(),
        }
        .serialize(serializer)
    }
}

/// The letter `W^{(m)}_k` with its tail truncated after `T` terms.
pub fn jw_embed<S: TwistSource + ?Sized>(
    m: i64,
    k: ModVec2,
    seq: &S,
    tail: usize,
    convention: Convention,
) -> Result<JWEmbedding> {
    let d = seq.modulus();
    check_modulus(d, k.modulus())?;
    let (k1, k2) = (k.k1() as i64, k.k2() as i64);
    let v = |a: i64, b: i64| ModVec2::reduced(a, b, d);
    let mut labels = SiteLabels::empty(d);
    if !k.is_zero() {
        match convention {
            Convention::Corrected => {
                labels.put(2 * m, v(k1, 0));
                labels.put(2 * m + 1, v(k2, -k1));
            }
            Convention::Verbatim => {
                labels.put(2 * m, v(k1, 0));
                labels.put(2 * m + 1, v(k2, k1));
            }
        }
        for n in 1..=tail as i64 {
            let t = seq.matrix(n)?.apply(k)?;
            let (b, a) = (t.k1() as i64, t.k2() as i64);
            let (even, odd) = match convention {
                Convention::Corrected => (v(0, a), v(0, -b)),
                Convention::Verbatim => (v(0, b), v(0, a)),
            };
            labels.put(2 * m - 2 * n, even);
            labels.put(2 * m - 2 * n + 1, odd);
        }
    }
    Ok(JWEmbedding { m, k, tail, convention, labels })
}

/// The Price-Powers generator `e_m = X_{m-T}^{g(T)} ... X_{m-1}^{g(1)} Z_m`
/// on the single chain. It is the even-site part of the corrected embedding
/// of `k = (1, 0)`; the odd sites only carry `X`-type factors, which commute
/// with every other letter's factors and are dropped.
pub fn price_powers_letter(m: i64, bits: &Bitstream, tail: usize) -> Result<JWEmbedding> {
    let seq = DefiningSequence::price_powers(bits.clone());
    let k = ModVec2::reduced(1, 0, 2);
    let full = jw_embed(m, k, &seq, tail, Convention::Corrected)?;
    let mut labels = SiteLabels::empty(2);
    for (s, label) in full.labels.iter() {
        if s.rem_euclid(2) == 0 {
            labels.put(s.div_euclid(2), label);
        }
    }
    Ok(JWEmbedding { m, k, tail, convention: Convention::Corrected, labels })
}

/// Ordered product of letters over the site window `lo..=hi`.
pub fn product_local(letters: &[&SiteLabels], lo: i64, hi: i64) -> Result<LocalOperator> {
    let d = letters
        .first()
        .map(|l| l.modulus)
        .ok_or_else(|| Error::InvalidArgument("need at least one letter".into()))?;
    let mut acc = LocalOperator::identity(d, (hi - lo + 1).max(0) as usize);
    for l in letters {
        check_modulus(d, l.modulus)?;
        acc = acc.mul(&l.to_local(lo, hi)?)?;
    }
    Ok(acc)
}

/// The word `W_I` as the ordered product of its letters' embeddings, on the
/// window spanned by all their factors.
pub fn jw_embed_word<S: TwistSource + ?Sized>(
    index: &MultiIndex,
    seq: &S,
    tail: usize,
    convention: Convention,
) -> Result<Vec<JWEmbedding>> {
    index.iter().map(|(site, k)| jw_embed(site, k, seq, tail, convention)).collect()
}

/// Smallest window containing every factor of the given letters.
pub fn window_of(letters: &[&JWEmbedding]) -> Option<(i64, i64)> {
    let lo = letters.iter().map(|e| e.window().0).min()?;
    let hi = letters.iter().map(|e| e.window().1).max()?;
    Some((lo, hi))
}

/// Per-site commutation scalar between two products of embedded letters,
/// evaluated with explicit matrices on a common window.
pub fn dense_commutation_phase(a: &[JWEmbedding], b: &[JWEmbedding]) -> Result<(Complex64, f64)> {
    let all: Vec<&JWEmbedding> = a.iter().chain(b).collect();
    let (lo, hi) = window_of(&all).ok_or_else(|| Error::InvalidArgument("empty word".into()))?;
    let d = all[0].modulus();
    let side = |w: &[JWEmbedding]| -> Result<LocalOperator> {
        if w.is_empty() {
            return Ok(LocalOperator::identity(d, (hi - lo + 1) as usize));
        }
        product_local(&w.iter().map(|e| &e.labels).collect::<Vec<_>>(), lo, hi)
    };
    side(a)?.commutation_phase(&side(b)?)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SiteFactor {
    pub site: i64,
    pub value: Complex64,
    pub magnitude: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ProductStateReport {
    pub value: Complex64,
    pub factors: Vec<SiteFactor>,
    /// Product of the factor magnitudes on sites left of every core.
    pub tail_magnitude: f64,
}

/// `<psi^{(x)}| L_1 L_2 ... |psi^{(x)}>` for the ordered product of letters,
/// evaluated site by site.
pub fn product_state_expectation(letters: &[JWEmbedding], psi: &[Complex64]) -> Result<ProductStateReport> {
    let Some(first) = letters.first() else {
        return Ok(ProductStateReport { value: Complex64::new(1.0, 0.0), factors: vec![], tail_magnitude: 1.0 });
    };
    let d = first.modulus();
    if psi.len() != d as usize {
        return Err(Error::DimensionMismatch { left: d as usize, right: psi.len() });
    }
    let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitVector(norm));
    }
    let refs: Vec<&JWEmbedding> = letters.iter().collect();
    let (lo, hi) = window_of(&refs).expect("non-empty");
    let op = product_local(&refs.iter().map(|e| &e.labels).collect::<Vec<_>>(), lo, hi)?;
    let v = CMatrix::from_column_slice(d as usize, 1, psi);
    let core_lo = letters.iter().map(|e| 2 * e.m).min().expect("non-empty");
    let mut factors = Vec::with_capacity(op.sites());
    let mut value = Complex64::new(1.0, 0.0);
    let mut tail_magnitude = 1.0;
    for (i, f) in op.factors().iter().enumerate() {
        let site = lo + i as i64;
        let z = (v.adjoint() * f * &v)[(0, 0)];
        value *= z;
        if site < core_lo {
            tail_magnitude *= z.norm();
        }
        factors.push(SiteFactor { site, value: z, magnitude: z.norm() });
    }
    Ok(ProductStateReport { value, factors, tail_magnitude })
}
