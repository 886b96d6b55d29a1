//! Defining sequences `{A_n}` and empirical typicality checks.
//!
//! Random sequences use a counter-based SplitMix64 stream: the `i`-th output
//! for seed `s` is `mix(s + (i+1)*0x9e3779b97f4a7c15)`, where `mix` is the
//! standard SplitMix64 finalizer. Entry `e` (row-major, 0..4) of `A_n` is
//! output `4(n-1)+e`, mapped to `[0, d)` by `(x*d) >> 64`. The constrained
//! family uses outputs `2(n-1)+e` for its top row. A Bernoulli(1/2)
//! bitstream takes the top bit of output `n-1` as `g(n)`.
//!
//! Every value depends only on `(seed, n)`, so any `A_n` can be produced on
//! demand from any thread without a shared cache.

use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{roots_of_unity, CompensatedSum};
use crate::words::{twist_u, MultiIndex, TwistSource};
use crate::zmod::ModMat2;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Accepted `--seq` forms, one per line.
pub const SPEC_GRAMMAR: &str = "\
bernoulli:d=D,seed=S
bernoulli-constrained:d=D,seed=S
commuting:d=D
constant:d=D,m=a11/a12/a21/a22
periodic:d=D,m=a11/a12/a21/a22;b11/b12/b21/b22;...
pp:thue-morse | pp:bernoulli,seed=S | pp:bits=0110...
file:PATH";

/// The `index`-th SplitMix64 output for `seed`.
pub fn splitmix64(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(index.wrapping_add(1)));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn uniform_below(x: u64, d: u32) -> i64 {
    ((x as u128 * d as u128) >> 64) as i64
}

/// A bitstream `g : N -> {0,1}` with `g(0) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bitstream {
    /// `g(1), g(2), ...`; zero past the end.
    Explicit(Vec<u8>),
    ThueMorse,
    Bernoulli { seed: u64 },
}

impl Bitstream {
    pub fn bit(&self, n: u64) -> u8 {
        if n == 0 {
            return 0;
        }
        match self {
            Bitstream::Explicit(bits) => bits.get(n as usize - 1).copied().unwrap_or(0) & 1,
            Bitstream::ThueMorse => (n.count_ones() & 1) as u8,
            Bitstream::Bernoulli { seed } => (splitmix64(*seed, n - 1) >> 63) as u8,
        }
    }

    fn spec(&self) -> String {
        match self {
            Bitstream::Explicit(bits) => {
                let s: String = bits.iter().map(|b| if *b & 1 == 1 { '1' } else { '0' }).collect();
                format!("bits={s}")
            }
            Bitstream::ThueMorse => "thue-morse".into(),
            Bitstream::Bernoulli { seed } => format!("bernoulli,seed={seed}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SequenceKind {
    Constant(ModMat2),
    /// `A_n = P[n mod p]` for `n >= 1`.
    Periodic(Vec<ModMat2>),
    PricePowers(Bitstream),
    Bernoulli { seed: u64 },
    BernoulliConstrained { seed: u64 },
    /// `A_0, ..., A_{L-1}` as loaded; indices beyond are an error.
    Explicit(Vec<ModMat2>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefiningSequence {
    modulus: u32,
    kind: SequenceKind,
}

fn check_d(d: u32) -> Result<()> {
    if d < 2 {
        Err(Error::InvalidModulus(d))
    } else {
        Ok(())
    }
}

impl DefiningSequence {
    pub fn constant(m: ModMat2) -> Self {
        Self { modulus: m.modulus(), kind: SequenceKind::Constant(m) }
    }

    /// `A_n = 0` for all `n >= 1`: letters on distinct sites commute.
    pub fn commuting(d: u32) -> Result<Self> {
        check_d(d)?;
        Ok(Self::constant(ModMat2::zero(d)))
    }

    pub fn periodic(period: Vec<ModMat2>) -> Result<Self> {
        let d = period
            .first()
            .ok_or_else(|| Error::InvalidArgument("periodic sequence needs at least one matrix".into()))?
            .modulus();
        for m in &period {
            crate::error::check_modulus(d, m.modulus())?;
        }
        Ok(Self { modulus: d, kind: SequenceKind::Periodic(period) })
    }

    pub fn price_powers(bits: Bitstream) -> Self {
        Self { modulus: 2, kind: SequenceKind::PricePowers(bits) }
    }

    pub fn bernoulli(d: u32, seed: u64) -> Result<Self> {
        check_d(d)?;
        Ok(Self { modulus: d, kind: SequenceKind::Bernoulli { seed } })
    }

    pub fn bernoulli_constrained(d: u32, seed: u64) -> Result<Self> {
        check_d(d)?;
        Ok(Self { modulus: d, kind: SequenceKind::BernoulliConstrained { seed } })
    }

    /// `matrices[n]` is `A_n`; `A_0` is forced to the identity.
    pub fn explicit(d: u32, matrices: Vec<ModMat2>) -> Result<Self> {
        check_d(d)?;
        for m in &matrices {
            crate::error::check_modulus(d, m.modulus())?;
        }
        Ok(Self { modulus: d, kind: SequenceKind::Explicit(matrices) })
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    pub fn seed(&self) -> Option<u64> {
        match &self.kind {
            SequenceKind::Bernoulli { seed } | SequenceKind::BernoulliConstrained { seed } => Some(*seed),
            SequenceKind::PricePowers(Bitstream::Bernoulli { seed }) => Some(*seed),
            _ => None,
        }
    }

    fn forward(&self, n: u64) -> Result<ModMat2> {
        let d = self.modulus;
        if n == 0 {
            return Ok(ModMat2::identity(d));
        }
        Ok(match &self.kind {
            SequenceKind::Constant(m) => *m,
            SequenceKind::Periodic(p) => p[(n % p.len() as u64) as usize],
            SequenceKind::PricePowers(g) => {
                if g.bit(n) == 1 {
                    ModMat2::reduced([[0, 1], [1, 0]], 2)
                } else {
                    ModMat2::identity(2)
                }
            }
            SequenceKind::Bernoulli { seed } => {
                let base = 4 * (n - 1);
                let e = |i: u64| uniform_below(splitmix64(*seed, base + i), d);
                ModMat2::reduced([[e(0), e(1)], [e(2), e(3)]], d)
            }
            SequenceKind::BernoulliConstrained { seed } => {
                let base = 2 * (n - 1);
                let e = |i: u64| uniform_below(splitmix64(*seed, base + i), d);
                ModMat2::reduced([[e(0), e(1)], [0, 0]], d)
            }
            SequenceKind::Explicit(ms) => {
                *ms.get(n as usize).ok_or(Error::SequenceOutOfRange(n as i64))?
            }
        })
    }

    /// Precomputes `A_n` for `lo <= n <= hi`.
    pub fn window(&self, lo: i64, hi: i64) -> Result<SequenceWindow> {
        let mats = (lo..=hi).map(|n| self.matrix(n)).collect::<Result<Vec<_>>>()?;
        Ok(SequenceWindow { modulus: self.modulus, lo, mats })
    }

    /// Canonical spec string accepted by [`DefiningSequence::parse`]
    /// (explicit sequences have none).
    pub fn spec(&self) -> Option<String> {
        let d = self.modulus;
        let mat = |m: &ModMat2| {
            let e = m.entries();
            format!("{}/{}/{}/{}", e[0][0], e[0][1], e[1][0], e[1][1])
        };
        Some(match &self.kind {
            SequenceKind::Constant(m) => format!("constant:d={d},m={}", mat(m)),
            SequenceKind::Periodic(p) => {
                format!("periodic:d={d},m={}", p.iter().map(mat).collect::<Vec<_>>().join(";"))
            }
            SequenceKind::PricePowers(g) => format!("pp:{}", g.spec()),
            SequenceKind::Bernoulli { seed } => format!("bernoulli:d={d},seed={seed}"),
            SequenceKind::BernoulliConstrained { seed } => {
                format!("bernoulli-constrained:d={d},seed={seed}")
            }
            SequenceKind::Explicit(_) => return None,
        })
    }

    /// Parses a `--seq` spec:
    ///
    /// ```text
    /// bernoulli:d=3,seed=42
    /// bernoulli-constrained:d=3,seed=1
    /// pp:thue-morse | pp:bernoulli,seed=5 | pp:bits=0110
    /// constant:d=3,m=a11/a12/a21/a22
    /// commuting:d=3
    /// periodic:d=2,m=1/0/0/1;0/1/1/0
    /// file:path/to/seq.jsonl
    /// ```
    pub fn parse(spec: &str) -> Result<Self> {
        let invalid = |reason: &str| Error::InvalidSpec { spec: spec.to_string(), reason: reason.to_string() };
        let (kind, rest) = spec.split_once(':').ok_or_else(|| invalid("expected `kind:params`"))?;
        if kind == "file" {
            return Self::read_jsonl_path(rest);
        }
        let mut flags = Vec::new();
        let mut params = std::collections::BTreeMap::new();
        for part in rest.split(',').filter(|p| !p.is_empty()) {
            match part.split_once('=') {
                Some((k, v)) => {
                    if params.insert(k.trim(), v.trim()).is_some() {
                        return Err(invalid(&format!("duplicate parameter `{k}`")));
                    }
                }
                None => flags.push(part.trim()),
            }
        }
        let int = |key: &str| -> Result<Option<u64>> {
            params
                .get(key)
                .map(|v| v.parse::<u64>().map_err(|_| invalid(&format!("`{key}` must be a non-negative integer"))))
                .transpose()
        };
        let need = |key: &str| -> Result<u64> { int(key)?.ok_or_else(|| invalid(&format!("missing `{key}`"))) };
        let modulus = || -> Result<u32> {
            let d = need("d")?;
            if !(2..=u32::MAX as u64).contains(&d) {
                return Err(invalid("`d` must be at least 2"));
            }
            Ok(d as u32)
        };
        let matrix = |text: &str, d: u32| -> Result<ModMat2> {
            let e: Vec<i64> = text
                .split('/')
                .map(|x| x.trim().parse::<i64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| invalid("matrix entries must be integers"))?;
            if e.len() != 4 {
                return Err(invalid("a matrix is `a11/a12/a21/a22`"));
            }
            ModMat2::new([[e[0], e[1]], [e[2], e[3]]], d)
        };
        let allow = |keys: &[&str], allowed_flags: &[&str]| -> Result<()> {
            if let Some(k) = params.keys().find(|k| !keys.contains(k)) {
                return Err(invalid(&format!("unknown parameter `{k}`")));
            }
            if let Some(f) = flags.iter().find(|f| !allowed_flags.contains(f)) {
                return Err(invalid(&format!("unexpected token `{f}`")));
            }
            Ok(())
        };
        match kind {
            "bernoulli" => {
                allow(&["d", "seed"], &[])?;
                Self::bernoulli(modulus()?, need("seed")?)
            }
            "bernoulli-constrained" => {
                allow(&["d", "seed"], &[])?;
                Self::bernoulli_constrained(modulus()?, need("seed")?)
            }
            "commuting" => {
                allow(&["d"], &[])?;
                Self::commuting(modulus()?)
            }
            "constant" => {
                allow(&["d", "m"], &[])?;
                let d = modulus()?;
                let m = params.get("m").ok_or_else(|| invalid("missing `m`"))?;
                Ok(Self::constant(matrix(m, d)?))
            }
            "periodic" => {
                allow(&["d", "m"], &[])?;
                let d = modulus()?;
                let m = params.get("m").ok_or_else(|| invalid("missing `m`"))?;
                let period = m.split(';').map(|t| matrix(t, d)).collect::<Result<Vec<_>>>()?;
                Self::periodic(period)
            }
            "pp" => {
                if let Some(d) = int("d")? {
                    if d != 2 {
                        return Err(invalid("Price-Powers sequences require d=2"));
                    }
                }
                let bits = match (flags.as_slice(), params.get("bits")) {
                    (["thue-morse"], None) => {
                        allow(&["d"], &["thue-morse"])?;
                        Bitstream::ThueMorse
                    }
                    (["bernoulli"], None) => {
                        allow(&["d", "seed"], &["bernoulli"])?;
                        Bitstream::Bernoulli { seed: need("seed")? }
                    }
                    ([], Some(b)) => {
                        allow(&["d", "bits"], &[])?;
                        let bits = b
                            .chars()
                            .map(|c| match c {
                                '0' => Ok(0),
                                '1' => Ok(1),
                                _ => Err(invalid("bits must be 0/1 digits for g(1), g(2), ...")),
                            })
                            .collect::<Result<Vec<u8>>>()?;
                        Bitstream::Explicit(bits)
                    }
                    _ => return Err(invalid("expected `thue-morse`, `bernoulli,seed=S` or `bits=...`")),
                };
                Ok(Self::price_powers(bits))
            }
            _ => Err(invalid(
                "unknown kind; expected bernoulli, bernoulli-constrained, pp, constant, commuting, periodic or file",
            )),
        }
    }

    /// Writes a header `{"d":d}` and then `A_0, ..., A_{count-1}`, one JSON
    /// object per line.
    pub fn write_jsonl<W: Write>(&self, count: usize, mut out: W) -> Result<()> {
        writeln!(out, "{}", serde_json::to_string(&Header { d: self.modulus })?)?;
        for n in 0..count {
            let a = self.matrix(n as i64)?.entries();
            let line = Line { n: n as u64, a: a.map(|r| r.map(i64::from)) };
            writeln!(out, "{}", serde_json::to_string(&line)?)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let header = lines.next().ok_or_else(|| Error::Format("empty sequence file".into()))??;
        let Header { d } = serde_json::from_str(&header)
            .map_err(|e| Error::Format(format!("bad header line: {e}")))?;
        check_d(d)?;
        let mut slots: Vec<Option<ModMat2>> = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let Line { n, a } = serde_json::from_str(&line)
                .map_err(|e| Error::Format(format!("bad line {}: {e}", i + 2)))?;
            let n = n as usize;
            if slots.len() <= n {
                slots.resize(n + 1, None);
            }
            if slots[n].replace(ModMat2::new(a, d)?).is_some() {
                return Err(Error::Format(format!("duplicate entry for n={n}")));
            }
        }
        let mats = slots
            .into_iter()
            .enumerate()
            .map(|(n, m)| m.ok_or_else(|| Error::Format(format!("missing entry for n={n}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::explicit(d, mats)
    }

    pub fn read_jsonl_path<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_jsonl(std::io::BufReader::new(file))
    }
}

impl TwistSource for DefiningSequence {
    fn modulus(&self) -> u32 {
        self.modulus
    }

    fn matrix(&self, n: i64) -> Result<ModMat2> {
        if n < 0 {
            Ok(self.forward(n.unsigned_abs())?.adjugate())
        } else {
            self.forward(n as u64)
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    d: u32,
}

#[derive(Serialize, Deserialize)]
struct Line {
    n: u64,
    #[serde(rename = "A")]
    a: [[i64; 2]; 2],
}

/// `A_n` for `lo <= n <= hi`, precomputed.
#[derive(Clone, Debug)]
pub struct SequenceWindow {
    modulus: u32,
    lo: i64,
    mats: Vec<ModMat2>,
}

impl TwistSource for SequenceWindow {
    fn modulus(&self) -> u32 {
        self.modulus
    }

    fn matrix(&self, n: i64) -> Result<ModMat2> {
        usize::try_from(n - self.lo)
            .ok()
            .and_then(|i| self.mats.get(i).copied())
            .ok_or(Error::SequenceOutOfRange(n))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TypicalityReport {
    pub index: MultiIndex,
    pub sequence: Option<String>,
    pub seed: Option<u64>,
    pub n: usize,
    pub k_max: usize,
    pub mean: Complex64,
    /// `gaps[k-1]` is `|(1/N) sum f_n conj(f_{n+k}) - |mean|^2|`.
    pub gaps: Vec<f64>,
}

/// Empirical self-averaging and mixing of `f_n = exp(2*pi*i*u_n(I;I))`,
/// the product of the functions `G` attached to the letters of `I`.
pub fn typicality_test(seq: &DefiningSequence, index: &MultiIndex, n: usize, k_max: usize) -> Result<TypicalityReport> {
    if n == 0 || k_max == 0 {
        return Err(Error::InvalidArgument("typicality_test needs N >= 1 and K >= 1".into()));
    }
    let d = seq.modulus();
    let span = index.span();
    let total = n + k_max;
    let window = seq.window(-span, total as i64 + span)?;
    let roots = roots_of_unity(d);
    let f: Vec<Complex64> = (0..total)
        .map(|t| twist_u(index, index, t as i64, &window).map(|u| roots[u.value() as usize]))
        .collect::<Result<_>>()?;
    let mean = f[..n].iter().copied().collect::<CompensatedSum>().total() / n as f64;
    let gaps = (1..=k_max)
        .map(|k| {
            let pair = (0..n).map(|t| f[t] * f[t + k].conj()).collect::<CompensatedSum>().total() / n as f64;
            (pair - mean * mean.conj()).norm()
        })
        .collect();
    Ok(TypicalityReport {
        index: index.clone(),
        sequence: seq.spec(),
        seed: seq.seed(),
        n,
        k_max,
        mean,
        gaps,
    })
}
