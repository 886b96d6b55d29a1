//! The spin-chain representation: letters at site `j` act on sites `0..=j`
//! as `W_{A_{0,j}k} (x) W_{A_{1,j}k} (x) ... (x) W_{A_{j,j}k}`.
//!
//! For `p < q` the letters at `p` and `q` pick up the phase
//! `sum_l sigma(A_{l,p}k, A_{l,q}m)`, and `sigma(Bk, m) = sigma(k, adj(B)m)`,
//! so the table must satisfy `sum_{l<=p} adj(A_{l,p}) A_{l,q} = A_{q-p}`.
//! Each column is solved top-down for `A_{p,q}`; the diagonal block is
//! `diag(t, 1)` with `t = 1 - sum_{l<q} det(A_{l,q})`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dense::{DenseOperator, DenseWorkspace, LocalOperator};
use crate::error::{Error, Result};
use crate::words::{commutation_phase, multiply, GroupElement, MultiIndex, TwistSource};
use crate::zmod::{is_prime, symplectic, ModMat2, ModScalar, ModVec2};

pub use crate::dense::{weyl_matrix, DEFAULT_DIM_CAP};

/// The triangular table `A_{l,j}`, `0 <= l <= j <= N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepTable {
    modulus: u32,
    columns: Vec<Vec<ModMat2>>,
}

impl RepTable {
    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    /// The largest site index `N`.
    pub fn n(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn sites(&self) -> usize {
        self.columns.len()
    }

    pub fn entry(&self, l: usize, j: usize) -> Option<ModMat2> {
        self.columns.get(j).and_then(|c| c.get(l)).copied()
    }

    /// Overwrites one entry; used to build deliberately broken tables.
    pub fn set_entry(&mut self, l: usize, j: usize, m: ModMat2) -> Result<()> {
        crate::error::check_modulus(self.modulus, m.modulus())?;
        let max = self.n() as i64;
        let slot = self
            .columns
            .get_mut(j)
            .and_then(|c| c.get_mut(l))
            .ok_or(Error::SiteOutOfRange { site: j.max(l) as i64, max })?;
        *slot = m;
        Ok(())
    }

    /// `sum_l det(A_{l,j})` for every column `j`.
    pub fn det_sums(&self) -> Vec<ModScalar> {
        self.columns
            .iter()
            .map(|col| {
                col.iter()
                    .fold(ModScalar::reduced(0, self.modulus), |acc, m| acc.add(m.det()).expect("same modulus"))
            })
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct RepTableJson {
    d: u32,
    #[serde(rename = "N")]
    n: usize,
    entries: Vec<(usize, usize, [[i64; 2]; 2])>,
}

impl Serialize for RepTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut entries = Vec::new();
        for (j, col) in self.columns.iter().enumerate() {
            for (l, m) in col.iter().enumerate() {
                entries.push((l, j, m.entries().map(|r| r.map(i64::from))));
            }
        }
        RepTableJson { d: self.modulus, n: self.n(), entries }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RepTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RepTableJson::deserialize(deserializer)?;
        if raw.d < 2 {
            return Err(D::Error::custom(Error::InvalidModulus(raw.d)));
        }
        let mut slots: Vec<Vec<Option<ModMat2>>> = (0..=raw.n).map(|j| vec![None; j + 1]).collect();
        for (l, j, a) in raw.entries {
            if l > j || j > raw.n {
                return Err(D::Error::custom(format!("entry ({l},{j}) outside the table")));
            }
            let m = ModMat2::new(a, raw.d).map_err(D::Error::custom)?;
            if slots[j][l].replace(m).is_some() {
                return Err(D::Error::custom(format!("duplicate entry ({l},{j})")));
            }
        }
        let columns = slots
            .into_iter()
            .enumerate()
            .map(|(j, col)| {
                col.into_iter()
                    .enumerate()
                    .map(|(l, m)| m.ok_or_else(|| D::Error::custom(format!("missing entry ({l},{j})"))))
                    .collect::<std::result::Result<Vec<_>, _>>()
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(RepTable { modulus: raw.d, columns })
    }
}

/// Solves the column recursion for sites `0..=n`.
pub fn build_rep_table<S: TwistSource + ?Sized>(seq: &S, n: usize) -> Result<RepTable> {
    let d = seq.modulus();
    if !is_prime(d) {
        return Err(Error::NonPrimeModulus(d));
    }
    let mut columns: Vec<Vec<ModMat2>> = Vec::with_capacity(n + 1);
    // adj(A_{p,p})^{-1}, cached per diagonal block
    let mut diag_inv: Vec<ModMat2> = Vec::with_capacity(n + 1);
    for q in 0..=n {
        let mut col: Vec<ModMat2> = Vec::with_capacity(q + 1);
        for p in 0..q {
            let mut rhs = seq.matrix((q - p) as i64)?;
            for l in 0..p {
                rhs = rhs.sub(&columns[p][l].adjugate().mul_unchecked(&col[l]))?;
            }
            col.push(diag_inv[p].mul_unchecked(&rhs));
        }
        let partial = col
            .iter()
            .fold(0i64, |acc, m| (acc + m.det().value() as i64) % d as i64);
        let t = ModScalar::reduced(1 - partial, d);
        if t.is_zero() {
            return Err(Error::ConditionViolated { column: q, modulus: d });
        }
        let diag = ModMat2::diag(t.value(), 1, d);
        diag_inv.push(diag.adjugate().inv()?);
        col.push(diag);
        columns.push(col);
    }
    Ok(RepTable { modulus: d, columns })
}

/// The symplectic-sum identity `sum_l sigma(A_{l,j}k, A_{l,j}m) = sigma(k,m)`
/// for every column, via determinants. For `d <= 5` it is also checked
/// directly on all pairs `(k, m)`.
pub fn check_sympl_sum(table: &RepTable) -> bool {
    let det_ok = table.det_sums().iter().all(|s| s.value() == 1);
    if table.modulus <= 5 {
        det_ok && check_sympl_sum_direct(table)
    } else {
        det_ok
    }
}

/// Exhaustive pairwise form of the symplectic-sum identity.
pub fn check_sympl_sum_direct(table: &RepTable) -> bool {
    let d = table.modulus;
    table.columns.iter().all(|col| {
        ModVec2::all(d).all(|k| {
            ModVec2::all(d).all(|m| {
                let lhs = col.iter().fold(0i64, |acc, a| {
                    let s = symplectic(a.apply_unchecked(k), a.apply_unchecked(m)).expect("same modulus");
                    acc + s.value() as i64
                });
                lhs.rem_euclid(d as i64) == symplectic(k, m).expect("same modulus").value() as i64
            })
        })
    })
}

/// The cross-site conditions `sum_{l<=p} adj(A_{l,p}) A_{l,q} = A_{q-p}`.
pub fn check_cross_conditions<S: TwistSource + ?Sized>(table: &RepTable, seq: &S) -> Result<bool> {
    crate::error::check_modulus(table.modulus, seq.modulus())?;
    for q in 0..table.sites() {
        for p in 0..q {
            let mut sum = ModMat2::zero(table.modulus);
            for l in 0..=p {
                sum = sum.add(&table.columns[p][l].adjugate().mul_unchecked(&table.columns[q][l]))?;
            }
            if sum != seq.matrix((q - p) as i64)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The letter `W^{(j)}_k` as a tensor product over sites `0..=N`.
pub fn embed_letter(j: usize, k: ModVec2, table: &RepTable) -> Result<LocalOperator> {
    crate::error::check_modulus(table.modulus, k.modulus())?;
    let col = table
        .columns
        .get(j)
        .ok_or(Error::SiteOutOfRange { site: j as i64, max: table.n() as i64 })?;
    let mut op = LocalOperator::identity(table.modulus, table.sites());
    for (l, a) in col.iter().enumerate() {
        op.apply_at(l, &weyl_matrix(a.apply_unchecked(k)))?;
    }
    Ok(op)
}

pub fn embed_letter_dense(j: usize, k: ModVec2, table: &RepTable, cap: usize) -> Result<DenseOperator> {
    embed_letter(j, k, table)?.to_dense(cap)
}

fn site_index(site: i64, table: &RepTable) -> Result<usize> {
    usize::try_from(site)
        .ok()
        .filter(|&s| s <= table.n())
        .ok_or(Error::SiteOutOfRange { site, max: table.n() as i64 })
}

/// The ordered product of the letters of `I`, by increasing site.
pub fn embed_word(index: &MultiIndex, table: &RepTable) -> Result<LocalOperator> {
    crate::error::check_modulus(table.modulus, index.modulus())?;
    let mut op = LocalOperator::identity(table.modulus, table.sites());
    for (site, k) in index.iter() {
        op = op.mul(&embed_letter(site_index(site, table)?, k, table)?)?;
    }
    Ok(op)
}

/// The matrix image of a group element `(p, I)`.
///
/// Letters `e_{s,1} = W^{(s)}_{(1,0)}` and `e_{s,2} = W^{(s)}_{(0,1)}` are
/// multiplied in increasing `(s, i)` order with exponents `n_{s,i}` in
/// `[0, d)`. The same ordered product in the group gives `(psi, I)`, so
/// `(p, I)` maps to `exp(i*pi*(p - psi)/d)` times the matrix product.
pub fn embed_element<S: TwistSource + ?Sized>(
    x: &GroupElement,
    table: &RepTable,
    seq: &S,
) -> Result<LocalOperator> {
    let d = table.modulus;
    let mut op = LocalOperator::identity(d, table.sites());
    let mut group = GroupElement::identity(d);
    for (site, k) in x.index.iter() {
        let s = site_index(site, table)?;
        for (unit, power) in [(ModVec2::reduced(1, 0, d), k.k1()), (ModVec2::reduced(0, 1, d), k.k2())] {
            let letter = embed_letter(s, unit, table)?;
            let g = GroupElement::letter(site, unit);
            for _ in 0..power {
                op = op.mul(&letter)?;
                group = multiply(&group, &g, seq)?;
            }
        }
    }
    debug_assert_eq!(group.index, x.index);
    let correction = x.phase.add(group.phase.neg())?;
    Ok(op.scale(correction.to_complex()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RelationCheck {
    pub samples: usize,
    pub cap: usize,
    /// Largest number of letters in a sampled word.
    pub max_letters: usize,
    /// Pairs are also multiplied out as full matrices when the dimension is
    /// at most this.
    pub full_dense_max_dim: usize,
    pub seed: u64,
}

impl Default for RelationCheck {
    fn default() -> Self {
        Self { samples: 200, cap: DEFAULT_DIM_CAP, max_letters: 3, full_dense_max_dim: 243, seed: 0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RelationReport {
    pub d: u32,
    pub sites: usize,
    pub dim: usize,
    pub pairs: usize,
    pub full_dense_pairs: usize,
    /// Largest `|lambda - exp(2*pi*i*u_0(I;J))|` or per-factor residual.
    pub max_deviation: f64,
    pub max_unitarity_deviation: f64,
}

impl RelationReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_deviation <= tol && self.max_unitarity_deviation <= tol
    }
}

fn random_word(rng: &mut ChaCha8Rng, d: u32, sites: usize, max_letters: usize) -> MultiIndex {
    loop {
        let letters = rng.random_range(1..=max_letters.max(1));
        let triples: Vec<_> = (0..letters)
            .map(|_| {
                (
                    rng.random_range(0..sites) as i64,
                    rng.random_range(0..d) as i64,
                    rng.random_range(0..d) as i64,
                )
            })
            .collect();
        let idx = MultiIndex::from_triples(d, triples).expect("valid modulus");
        if !idx.is_empty() {
            return idx;
        }
    }
}

/// Samples word pairs supported on `0..=N` and compares the commutation
/// scalar of their matrix images with the algebraic phase. Even-numbered
/// samples are single letters, odd-numbered ones words of up to
/// `max_letters` letters.
pub fn verify_relations<S: TwistSource + Sync + ?Sized>(
    table: &RepTable,
    seq: &S,
    check: &RelationCheck,
) -> Result<RelationReport> {
    let d = table.modulus;
    crate::error::check_modulus(d, seq.modulus())?;
    let sites = table.sites();
    let dim = (d as usize)
        .checked_pow(sites as u32)
        .filter(|&x| x <= check.cap)
        .ok_or(Error::DimensionCap { dim: (d as usize).saturating_pow(sites as u32), cap: check.cap })?;
    let mut rng = ChaCha8Rng::seed_from_u64(check.seed);
    let pairs: Vec<(MultiIndex, MultiIndex)> = (0..check.samples)
        .map(|i| {
            let letters = if i % 2 == 0 { 1 } else { check.max_letters };
            (random_word(&mut rng, d, sites, letters), random_word(&mut rng, d, sites, letters))
        })
        .collect();
    let full = dim <= check.full_dense_max_dim;
    let embedded = pairs
        .par_iter()
        .map(|(i, j)| -> Result<(LocalOperator, LocalOperator, Complex64)> {
            let expected = commutation_phase(i, j, 0, seq)?.to_complex();
            Ok((embed_word(i, table)?, embed_word(j, table)?, expected))
        })
        .collect::<Result<Vec<_>>>()?;
    let results = embedded
        .par_iter()
        .map(|(a, b, expected)| -> Result<(f64, f64)> {
            let (lambda, residual) = a.commutation_phase(b)?;
            let dev = (lambda - expected).norm().max(residual);
            Ok((dev, a.unitarity_deviation().max(b.unitarity_deviation())))
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut max_deviation, max_unitarity_deviation) =
        results.iter().fold((0.0f64, 0.0f64), |(m, u), &(x, y)| (m.max(x), u.max(y)));
    if full {
        // sequential, so that only one set of full matrices is alive
        let mut ws = DenseWorkspace::new(d, sites, check.cap)?;
        for (a, b, expected) in &embedded {
            let (lambda, residual) = ws.commutation_phase(a, b)?;
            max_deviation = max_deviation.max((lambda - expected).norm()).max(residual);
        }
    }
    Ok(RelationReport {
        d,
        sites,
        dim,
        pairs: pairs.len(),
        full_dense_pairs: if full { pairs.len() } else { 0 },
        max_deviation,
        max_unitarity_deviation,
    })
}

/// Left-nested commutator `[[...[o_0, o_1], o_2], ... o_n]`.
pub fn multicommutator(ops: &[DenseOperator]) -> Result<DenseOperator> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("multicommutator needs at least one operator".into()))?;
    rest.iter().try_fold(first.clone(), |acc, op| acc.commutator(op))
}

pub fn is_nonvanishing(op: &DenseOperator, tol: f64) -> bool {
    op.op_norm() > tol
}
