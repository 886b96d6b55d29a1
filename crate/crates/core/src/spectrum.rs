//! Spectral analysis of phase sequences `v_n(I) = exp(2*pi*i*u_n(I;I))`.
//!
//! The Fourier-Bohr amplitude at frequency `lambda` is
//! `a_N(lambda) = |(1/N) sum_{n<N} v_n exp(-2*pi*i*n*lambda)|`. A frequency
//! is reported as a peak when `a_N` exceeds `c * sqrt(ln N / N)`; for i.i.d.
//! phases the maximum over the `N` grid frequencies concentrates at
//! `sqrt(ln N / N)`, so `c = 4` leaves a wide margin.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{roots_of_unity, CompensatedSum};
use crate::seqgen::DefiningSequence;
use crate::words::{twist_u, MultiIndex, TwistSource};
use crate::zmod::ModVec2;

/// `v_0, ..., v_{N-1}` stored as exact exponents `e_n` with `v_n = omega^{e_n}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseSeq {
    pub index: Option<MultiIndex>,
    pub modulus: u32,
    pub sequence: Option<String>,
    pub seed: Option<u64>,
    #[serde(skip)]
    exponents: Vec<u32>,
    #[serde(skip)]
    values: Vec<Complex64>,
}

impl PhaseSeq {
    pub fn from_exponents(modulus: u32, exponents: Vec<u32>) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidModulus(modulus));
        }
        let roots = roots_of_unity(modulus);
        let exponents: Vec<u32> = exponents.into_iter().map(|e| e % modulus).collect();
        let values = exponents.iter().map(|&e| roots[e as usize]).collect();
        Ok(Self { index: None, modulus, sequence: None, seed: None, exponents, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// The first `n` terms.
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.min(self.len());
        Self {
            exponents: self.exponents[..n].to_vec(),
            values: self.values[..n].to_vec(),
            ..self.clone()
        }
    }
}

/// `v_n = exp(2*pi*i*u_n(I;I))` for `0 <= n < N`.
pub fn phase_sequence(index: &MultiIndex, seq: &DefiningSequence, n: usize) -> Result<PhaseSeq> {
    if n == 0 {
        return Err(Error::InvalidArgument("phase sequence needs N >= 1".into()));
    }
    let span = index.span();
    let window = seq.window(-span, n as i64 + span)?;
    let exponents = (0..n)
        .into_par_iter()
        .map(|t| twist_u(index, index, t as i64, &window).map(|u| u.value()))
        .collect::<Result<Vec<_>>>()?;
    let mut v = PhaseSeq::from_exponents(seq.modulus(), exponents)?;
    v.index = Some(index.clone());
    v.sequence = seq.spec();
    v.seed = seq.seed();
    Ok(v)
}

/// `s_k`, `0 <= k <= K`; negative lags are `s_{-k} = conj(s_k)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorrelationSeq {
    pub n: usize,
    pub s: Vec<Complex64>,
}

impl CorrelationSeq {
    pub fn k_max(&self) -> usize {
        self.s.len() - 1
    }

    pub fn get(&self, k: i64) -> Complex64 {
        let c = self.s[k.unsigned_abs() as usize];
        if k < 0 {
            c.conj()
        } else {
            c
        }
    }
}

fn lag_average(v: &[Complex64], k: usize) -> Complex64 {
    let pairs = v.len() - k;
    let sum: CompensatedSum = (0..pairs).map(|t| v[t].conj() * v[t + k]).collect();
    sum.total() / pairs as f64
}

/// `S_N(k) = (1/(N-k)) sum_{n<N-k} conj(v_n) v_{n+k}`: the average over the
/// `N - k` pairs available in the sample.
pub fn partial_corr(v: &PhaseSeq, k_max: usize) -> Result<CorrelationSeq> {
    if k_max >= v.len() {
        return Err(Error::InvalidArgument(format!("K = {k_max} must be below N = {}", v.len())));
    }
    let s = (0..=k_max).into_par_iter().map(|k| lag_average(&v.values, k)).collect();
    Ok(CorrelationSeq { n: v.len(), s })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubsequenceReport {
    pub checkpoints: Vec<usize>,
    /// `correlations[j][k] = S_{N_j}(k)`.
    pub correlations: Vec<Vec<Complex64>>,
    /// Cesaro mean `(1/N_j) sum_{n<N_j} v_n`.
    pub means: Vec<Complex64>,
    /// `oscillation[j-1]`: largest change of the mean or of any `S(k)`
    /// between checkpoints `j-1` and `j`.
    pub oscillation: Vec<f64>,
    /// Tolerance `scale / sqrt(N_{j-1})` each oscillation is compared with.
    pub tolerance_scale: f64,
    pub flagged: bool,
}

/// Tracks `S_{N_j}(k)` and the Cesaro mean along increasing checkpoints and
/// flags the run as non-Cauchy when the change between the last two
/// checkpoints exceeds `tolerance_scale / sqrt(N_{j-1})`.
pub fn subsequence_diagnostics(
    v: &PhaseSeq,
    k_max: usize,
    checkpoints: &[usize],
    tolerance_scale: f64,
) -> Result<SubsequenceReport> {
    if checkpoints.is_empty() || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("checkpoints must be non-empty and increasing".into()));
    }
    if *checkpoints.last().expect("non-empty") > v.len() || checkpoints[0] <= k_max {
        return Err(Error::InvalidArgument("checkpoints must lie in (K, N]".into()));
    }
    let mut correlations = Vec::with_capacity(checkpoints.len());
    let mut means = Vec::with_capacity(checkpoints.len());
    for &nj in checkpoints {
        let prefix = v.prefix(nj);
        correlations.push(partial_corr(&prefix, k_max)?.s);
        means.push(prefix.values.iter().copied().collect::<CompensatedSum>().total() / nj as f64);
    }
    let oscillation: Vec<f64> = (1..checkpoints.len())
        .map(|j| {
            let dmean = (means[j] - means[j - 1]).norm();
            correlations[j]
                .iter()
                .zip(&correlations[j - 1])
                .map(|(a, b)| (a - b).norm())
                .fold(dmean, f64::max)
        })
        .collect();
    let flagged = match oscillation.last() {
        Some(&o) => {
            let prev = checkpoints[checkpoints.len() - 2] as f64;
            o > tolerance_scale / prev.sqrt()
        }
        None => false,
    };
    Ok(SubsequenceReport { checkpoints: checkpoints.to_vec(), correlations, means, oscillation, tolerance_scale, flagged })
}

/// Smallest eigenvalue of the Hermitian Toeplitz matrix `[s_{i-j}]`,
/// `0 <= i, j <= M`.
pub fn toeplitz_min_eigenvalue(s: &CorrelationSeq, m: usize) -> Result<f64> {
    if m > s.k_max() {
        return Err(Error::InvalidArgument(format!("M = {m} exceeds K = {}", s.k_max())));
    }
    let t = DMatrix::<Complex64>::from_fn(m + 1, m + 1, |i, j| s.get(i as i64 - j as i64));
    Ok(t.symmetric_eigenvalues().min())
}

pub fn positive_definite_check(s: &CorrelationSeq, m: usize, tol: f64) -> Result<bool> {
    Ok(toeplitz_min_eigenvalue(s, m)? >= -tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BochnerMeasure {
    /// Bin `j` is `[j/B - 1/(2B), j/B + 1/(2B)]` on the circle.
    pub centers: Vec<f64>,
    pub masses: Vec<f64>,
    /// Total negative mass removed before renormalization.
    pub clipped: f64,
    pub window: usize,
}

impl BochnerMeasure {
    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// Discretized spectral measure of `s` with `bins` bins: the Fejer-smoothed
/// density `sum_{|k|<L} (1-|k|/L) s_k exp(-2*pi*i*k*x)` integrated exactly
/// over each bin, negative masses clipped and the total rescaled to `s_0`.
pub fn bochner_measure(s: &CorrelationSeq, window: usize, bins: usize) -> Result<BochnerMeasure> {
    if window == 0 || window > s.k_max() + 1 {
        return Err(Error::InvalidArgument(format!("window {window} must lie in 1..={}", s.k_max() + 1)));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("need at least one bin".into()));
    }
    let h = 0.5 / bins as f64;
    let centers: Vec<f64> = (0..bins).map(|j| j as f64 / bins as f64).collect();
    let raw: Vec<f64> = centers
        .par_iter()
        .map(|&c| {
            let mut acc = CompensatedSum::new();
            acc.add(s.s[0] * (2.0 * h));
            for k in 1..window {
                let w = 1.0 - k as f64 / window as f64;
                let bin = (2.0 * PI * k as f64 * h).sin() / (PI * k as f64);
                let phase = Complex64::from_polar(1.0, -2.0 * PI * k as f64 * c);
                // k and -k together give twice the real part
                acc.add(Complex64::new(2.0 * w * bin * (s.s[k] * phase).re, 0.0));
            }
            acc.total().re
        })
        .collect();
    let clipped = raw.iter().filter(|&&x| x < 0.0).fold(0.0, |acc, x| acc - x);
    let positive: Vec<f64> = raw.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = positive.iter().sum();
    let target = s.s[0].re;
    let masses = if total > 0.0 { positive.iter().map(|x| x * target / total).collect() } else { positive };
    Ok(BochnerMeasure { centers, masses, clipped, window })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralConfig {
    /// Threshold constant `c` in `c * sqrt(ln N / N)`.
    pub c: f64,
    /// A lone peak at 0 counts only when `p_0 <= 1 - delta`.
    pub delta: f64,
    /// Number of grid maxima refined off the grid.
    pub refine_top: usize,
    /// Most peaks extracted before the scan stops.
    pub max_peaks: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { c: 4.0, delta: 0.05, refine_top: 5, max_peaks: 32 }
    }
}

pub fn threshold(n: usize, c: f64) -> f64 {
    let n = n as f64;
    c * (n.ln() / n).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub lambda: f64,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeanNu {
    pub nu: Complex64,
    pub p_hat: Vec<f64>,
    pub counts: Vec<u64>,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralReport {
    pub index: Option<MultiIndex>,
    pub sequence: Option<String>,
    pub seed: Option<u64>,
    pub n: usize,
    pub threshold: f64,
    pub config: SpectralConfig,
    pub peaks: Vec<Peak>,
    /// Largest amplitude left once the peaks are subtracted.
    pub residual_amplitude: f64,
    /// The scan stopped at `max_peaks` with amplitude still above threshold.
    pub truncated: bool,
    pub mean: MeanNu,
    /// `a_N(j/N)` for `j = 0..N`.
    #[serde(skip)]
    pub grid: Vec<f64>,
}

impl SpectralReport {
    pub fn grid_step(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn peak_near(&self, lambda: f64, tol: f64) -> Option<Peak> {
        self.peaks.iter().copied().find(|p| circular_distance(p.lambda, lambda) <= tol)
    }

    /// Peaks further than one grid step from 0.
    pub fn off_zero_peaks(&self) -> Vec<Peak> {
        let step = self.grid_step();
        self.peaks.iter().copied().filter(|p| circular_distance(p.lambda, 0.0) > step).collect()
    }
}

pub fn circular_distance(a: f64, b: f64) -> f64 {
    let x = (a - b).rem_euclid(1.0);
    x.min(1.0 - x)
}

fn coefficient(values: &[Complex64], lambda: f64) -> Complex64 {
    let sum: CompensatedSum = values
        .iter()
        .enumerate()
        .map(|(t, &z)| z * Complex64::from_polar(1.0, -2.0 * PI * ((t as f64 * lambda).rem_euclid(1.0))))
        .collect();
    sum.total() / values.len() as f64
}

/// `a_N(lambda)` by direct compensated summation.
pub fn amplitude_at(v: &PhaseSeq, lambda: f64) -> f64 {
    coefficient(&v.values, lambda).norm()
}

fn fft_amplitudes(values: &[Complex64]) -> Vec<f64> {
    let n = values.len();
    let mut buf = values.to_vec();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    buf.iter().map(|z| z.norm() / n as f64).collect()
}

/// `|(1/N) sum v_n exp(-2*pi*i*n*j/N)|` for every `j`.
pub fn grid_amplitudes(v: &PhaseSeq) -> Vec<f64> {
    fft_amplitudes(&v.values)
}

fn golden_section_max(values: &[Complex64], lo: f64, hi: f64, tol: f64) -> Peak {
    let f = |x: f64| coefficient(values, x).norm();
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        Peak { lambda: x1.rem_euclid(1.0), amplitude: f1 }
    } else {
        Peak { lambda: x2.rem_euclid(1.0), amplitude: f2 }
    }
}

/// The strongest frequency of `values`: the `top` largest grid amplitudes,
/// each refined by golden-section search within one grid step down to a
/// bracket of `1/(8N)`.
fn strongest(values: &[Complex64], top: usize) -> Peak {
    let n = values.len();
    let step = 1.0 / n as f64;
    let grid = fft_amplitudes(values);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| grid[b].total_cmp(&grid[a]).then(a.cmp(&b)));
    order
        .into_iter()
        .take(top.max(1))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&j| {
            let on_grid = Peak { lambda: j as f64 * step, amplitude: grid[j] };
            let refined = golden_section_max(values, on_grid.lambda - step, on_grid.lambda + step, step / 8.0);
            if refined.amplitude > on_grid.amplitude {
                refined
            } else {
                on_grid
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Peak { lambda: 0.0, amplitude: -1.0 }, |best, p| if p.amplitude > best.amplitude { p } else { best })
}

/// Root-of-unity frequencies `p_j` from the exact exponents and
/// `nu = sum_j p_j omega^j`.
pub fn mean_nu(v: &PhaseSeq) -> MeanNu {
    let d = v.modulus as usize;
    let mut counts = vec![0u64; d];
    for &e in &v.exponents {
        counts[e as usize] += 1;
    }
    let n = v.len();
    let p_hat: Vec<f64> = counts.iter().map(|&c| c as f64 / n.max(1) as f64).collect();
    let roots = roots_of_unity(v.modulus);
    let nu = counts
        .iter()
        .zip(&roots)
        .map(|(&c, &w)| w * c as f64)
        .collect::<CompensatedSum>()
        .total()
        / n.max(1) as f64;
    MeanNu { nu, p_hat, counts, n }
}

/// Fourier-Bohr scan by successive subtraction. Each round takes the
/// strongest refined frequency of the residual; if it clears the threshold
/// it is recorded and its projection `c * exp(2*pi*i*lambda*n)` is removed,
/// which also removes its sidelobes. A frequency found again within one grid
/// step of a recorded peak is subtracted but not recorded twice.
pub fn fourier_bohr(v: &PhaseSeq, config: &SpectralConfig) -> Result<SpectralReport> {
    let n = v.len();
    if n < 64 {
        return Err(Error::InvalidArgument(format!("Fourier-Bohr scan needs N >= 64, got {n}")));
    }
    let step = 1.0 / n as f64;
    let thr = threshold(n, config.c);
    let mut residual = v.values.clone();
    let mut peaks: Vec<Peak> = Vec::new();
    let mut rounds = 0;
    let residual_amplitude = loop {
        let best = strongest(&residual, config.refine_top);
        if best.amplitude <= thr || rounds == config.max_peaks {
            break best.amplitude;
        }
        rounds += 1;
        let c = coefficient(&residual, best.lambda);
        for (t, r) in residual.iter_mut().enumerate() {
            *r -= c * Complex64::from_polar(1.0, 2.0 * PI * ((t as f64 * best.lambda).rem_euclid(1.0)));
        }
        if peaks.iter().all(|q| circular_distance(best.lambda, q.lambda) > step) {
            peaks.push(best);
        }
    };
    peaks.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    Ok(SpectralReport {
        index: v.index.clone(),
        sequence: v.sequence.clone(),
        seed: v.seed,
        n,
        threshold: thr,
        config: *config,
        peaks,
        residual_amplitude,
        truncated: residual_amplitude > thr,
        mean: mean_nu(v),
        grid: grid_amplitudes(v),
    })
}

/// Phase sequence and Fourier-Bohr report for one word.
pub fn analyze_word(index: &MultiIndex, seq: &DefiningSequence, n: usize, config: &SpectralConfig) -> Result<SpectralReport> {
    fourier_bohr(&phase_sequence(index, seq, n)?, config)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProofRow {
    pub lambda: f64,
    pub k: usize,
    pub n: usize,
    /// `(1/K) sum_{k<K} exp(-2*pi*i*lambda*k) S_N(k)`.
    pub star: Complex64,
    /// `a_N(lambda)^2`.
    pub amplitude_sq: f64,
}

/// The lag-averaged correlations against the squared Fourier-Bohr amplitude
/// over a grid of `(lambda, K, N)`; both tend to the atom of the correlation
/// measure at `lambda`.
pub fn proof_quantities(v: &PhaseSeq, lambdas: &[f64], ks: &[usize], ns: &[usize]) -> Result<Vec<ProofRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        if n > v.len() {
            return Err(Error::InvalidArgument(format!("N = {n} exceeds the sequence length {}", v.len())));
        }
        let prefix = v.prefix(n);
        let k_top = ks.iter().copied().max().unwrap_or(0);
        let corr = partial_corr(&prefix, k_top.saturating_sub(1))?;
        for &lambda in lambdas {
            let amp = amplitude_at(&prefix, lambda);
            for &k in ks.iter().filter(|&&k| k >= 1) {
                let star = (0..k)
                    .map(|j| Complex64::from_polar(1.0, -2.0 * PI * (lambda * j as f64).rem_euclid(1.0)) * corr.s[j])
                    .collect::<CompensatedSum>()
                    .total()
                    / k as f64;
                rows.push(ProofRow { lambda, k, n, star, amplitude_sq: amp * amp });
            }
        }
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum VerdictKind {
    TracialOnly,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause {
    NoPeaks,
    ZeroPeakOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WordEvidence {
    pub index: Option<MultiIndex>,
    pub n: usize,
    pub peaks: Vec<Peak>,
    pub p0: f64,
    pub nu_abs: f64,
    pub clause: Option<Clause>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub verdict: VerdictKind,
    /// Always "evidence at N = ..."; a finite sample proves nothing.
    pub label: String,
    pub delta: f64,
    pub evidence: Vec<WordEvidence>,
}

/// A word satisfies the criterion when its spectrum is empty, or only a
/// peak at 0 with `p_0 <= 1 - delta`. The verdict is `TracialOnly` iff every
/// word does.
pub fn verdict(reports: &[SpectralReport], delta: f64) -> Result<Verdict> {
    if reports.is_empty() {
        return Err(Error::InvalidArgument("verdict needs at least one report".into()));
    }
    let evidence: Vec<WordEvidence> = reports
        .iter()
        .map(|r| {
            let p0 = r.mean.p_hat[0];
            let clause = if r.peaks.is_empty() {
                Some(Clause::NoPeaks)
            } else if r.off_zero_peaks().is_empty() && p0 <= 1.0 - delta {
                Some(Clause::ZeroPeakOnly)
            } else {
                None
            };
            WordEvidence { index: r.index.clone(), n: r.n, peaks: r.peaks.clone(), p0, nu_abs: r.mean.nu.norm(), clause }
        })
        .collect();
    let all = evidence.iter().all(|e| e.clause.is_some());
    let n_min = reports.iter().map(|r| r.n).min().expect("non-empty");
    let n_max = reports.iter().map(|r| r.n).max().expect("non-empty");
    let label = if n_min == n_max {
        format!("evidence at N = {n_min}")
    } else {
        format!("evidence at N = {n_min}..{n_max}")
    };
    Ok(Verdict {
        verdict: if all { VerdictKind::TracialOnly } else { VerdictKind::Inconclusive },
        label,
        delta,
        evidence,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FamilySpec {
    pub singletons: bool,
    /// Number of random two-letter words.
    pub random: usize,
    /// Largest site separation in random words.
    pub width: i64,
    pub seed: u64,
}

/// All nonzero singletons at site 0 and `random` two-letter words with a
/// letter at 0 and one at a site in `1..=width`, both nonzero.
pub fn word_family(d: u32, spec: &FamilySpec) -> Result<Vec<MultiIndex>> {
    if d < 2 {
        return Err(Error::InvalidModulus(d));
    }
    if spec.random > 0 && spec.width < 1 {
        return Err(Error::InvalidArgument("random words need width >= 1".into()));
    }
    let mut out = Vec::new();
    if spec.singletons {
        out.extend(ModVec2::all(d).filter(|k| !k.is_zero()).map(|k| MultiIndex::singleton(0, k)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let nonzero = |rng: &mut ChaCha8Rng| loop {
        let k = ModVec2::reduced(rng.random_range(0..d) as i64, rng.random_range(0..d) as i64, d);
        if !k.is_zero() {
            return k;
        }
    };
    for _ in 0..spec.random {
        let site = rng.random_range(1..=spec.width);
        let a = nonzero(&mut rng);
        let b = nonzero(&mut rng);
        out.push(MultiIndex::singleton(0, a).add(&MultiIndex::singleton(site, b))?);
    }
    Ok(out)
}

/// Parses `singletons`, `random:R` or `singletons+random:R`.
pub fn parse_family(text: &str, width: i64, seed: u64) -> Result<FamilySpec> {
    let mut spec = FamilySpec { singletons: false, random: 0, width, seed };
    for part in text.split('+') {
        match part.split_once(':') {
            None if part == "singletons" => spec.singletons = true,
            Some(("random", r)) => {
                spec.random = r
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad word count in `{text}`")))?;
            }
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "word family `{text}` is not `singletons`, `random:R` or `singletons+random:R`"
                )))
            }
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqgen::Bitstream;
    use crate::zmod::ModMat2;

    fn v(k1: i64, k2: i64, d: u32) -> ModVec2 {
        ModVec2::new(k1, k2, d).unwrap()
    }

    fn rotation(n: usize, q: u32) -> PhaseSeq {
        PhaseSeq::from_exponents(q, (0..n as u32).map(|t| t % q).collect()).unwrap()
    }

    fn doubling_blocks(n: usize) -> PhaseSeq {
        // blocks of length 1, 2, 4, ... alternating between 0 and 1/2
        let mut e = Vec::with_capacity(n);
        let (mut len, mut val) = (1usize, 0u32);
        while e.len() < n {
            e.extend(std::iter::repeat(val).take(len.min(n - e.len())));
            len *= 2;
            val ^= 1;
        }
        PhaseSeq::from_exponents(2, e).unwrap()
    }

    #[test]
    fn phase_sequence_examples() {
        let seq = DefiningSequence::bernoulli(3, 1).unwrap();
        let empty = phase_sequence(&MultiIndex::empty(3), &seq, 50).unwrap();
        assert!(empty.exponents().iter().all(|&e| e == 0));

        let commuting = DefiningSequence::commuting(3).unwrap();
        let s = phase_sequence(&MultiIndex::singleton(0, v(1, 2, 3)), &commuting, 50).unwrap();
        assert!(s.exponents().iter().all(|&e| e == 0));

        let pp = DefiningSequence::price_powers(Bitstream::ThueMorse);
        let s = phase_sequence(&MultiIndex::singleton(0, v(1, 0, 2)), &pp, 200).unwrap();
        for (t, &z) in s.values().iter().enumerate() {
            let sign = if (t as u64).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            assert!((z - Complex64::new(sign, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn phase_sequence_is_oracle_consistent() {
        // two-letter word: u_n(I;I) summed letter by letter
        let seq = DefiningSequence::bernoulli(5, 2).unwrap();
        let i = MultiIndex::from_triples(5, [(0, 1, 2), (2, 3, 1)]).unwrap();
        let s = phase_sequence(&i, &seq, 64).unwrap();
        for t in 0..64i64 {
            let mut acc = 0i64;
            for (a, ka) in i.iter() {
                for (b, kb) in i.iter() {
                    let m = seq.matrix(b + t - a).unwrap();
                    acc += crate::zmod::symplectic(ka, m.apply(kb).unwrap()).unwrap().value() as i64;
                }
            }
            assert_eq!(s.exponents()[t as usize] as i64, acc.rem_euclid(5));
        }
    }

    #[test]
    fn correlation_examples() {
        let ones = PhaseSeq::from_exponents(3, vec![0; 100]).unwrap();
        let c = partial_corr(&ones, 10).unwrap();
        assert!(c.s.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-14));
        let rot = rotation(100, 4);
        let c = partial_corr(&rot, 10).unwrap();
        for k in 0..=10 {
            let want = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 4.0);
            assert!((c.s[k] - want).norm() < 1e-12);
            assert!((c.get(-(k as i64)) - want.conj()).norm() < 1e-12);
        }
        assert!((c.s[0].re - 1.0).abs() < 1e-15 && c.s[0].im == 0.0);
        assert!(partial_corr(&rot, 100).is_err());
    }

    #[test]
    fn bernoulli_correlations_are_small() {
        let seq = DefiningSequence::bernoulli(3, 42).unwrap();
        let n = 100_000;
        let s = phase_sequence(&MultiIndex::singleton(0, v(1, 0, 3)), &seq, n).unwrap();
        let c = partial_corr(&s, 50).unwrap();
        let bound = 4.0 / (n as f64).sqrt();
        for k in 1..=50 {
            assert!(c.s[k].norm() <= bound, "k={k} |s|={}", c.s[k].norm());
        }
    }

    #[test]
    fn subsequence_flags() {
        let ones = PhaseSeq::from_exponents(2, vec![0; 4096]).unwrap();
        let r = subsequence_diagnostics(&ones, 4, &[256, 1024, 4096], 8.0).unwrap();
        assert!(r.oscillation.iter().all(|&o| o == 0.0) && !r.flagged);

        let blocks = doubling_blocks(1 << 14);
        let cps: Vec<usize> = (8..=14).map(|j| (1usize << j) - 1).collect();
        let r = subsequence_diagnostics(&blocks, 4, &cps, 8.0).unwrap();
        assert!(r.flagged);
        assert!(r.oscillation.iter().all(|&o| o > 0.5), "{:?}", r.oscillation);

        let seq = DefiningSequence::bernoulli(3, 7).unwrap();
        let s = phase_sequence(&MultiIndex::singleton(0, v(1, 1, 3)), &seq, 1 << 16).unwrap();
        let cps = [1 << 12, 1 << 13, 1 << 14, 1 << 15, 1 << 16];
        let r = subsequence_diagnostics(&s, 8, &cps, 8.0).unwrap();
        for (j, &o) in r.oscillation.iter().enumerate() {
            assert!(o <= 8.0 / (cps[j] as f64).sqrt(), "{j}: {o}");
        }
        assert!(!r.flagged);
    }

    #[test]
    fn toeplitz_examples() {
        let ones = CorrelationSeq { n: 100, s: vec![Complex64::new(1.0, 0.0); 33] };
        assert!(toeplitz_min_eigenvalue(&ones, 32).unwrap().abs() < 1e-10);
        assert!(positive_definite_check(&ones, 32, 1e-8).unwrap());
        let mut bad = ones.clone();
        bad.s[1] = Complex64::new(2.0, 0.0);
        assert!(!positive_definite_check(&bad, 32, 1e-8).unwrap());
        let seq = DefiningSequence::bernoulli(2, 3).unwrap();
        let s = phase_sequence(&MultiIndex::singleton(0, v(1, 1, 2)), &seq, 4096).unwrap();
        assert!(positive_definite_check(&partial_corr(&s, 32).unwrap(), 32, 1e-8).unwrap());
    }

    #[test]
    fn bochner_examples() {
        let ones = PhaseSeq::from_exponents(2, vec![0; 4096]).unwrap();
        let m = bochner_measure(&partial_corr(&ones, 64).unwrap(), 64, 16).unwrap();
        assert!((m.total() - 1.0).abs() < 1e-6);
        assert!(m.masses[0] > 0.9, "{:?}", m.masses);
        let rot = rotation(4096, 4);
        let m = bochner_measure(&partial_corr(&rot, 64).unwrap(), 64, 16).unwrap();
        assert!((m.total() - 1.0).abs() < 1e-6);
        assert!(m.masses[4] > 0.9, "{:?}", m.masses);
        assert_eq!(m.centers[4], 0.25);
    }

    #[test]
    fn fourier_bohr_examples() {
        let cfg = SpectralConfig::default();
        let ones = PhaseSeq::from_exponents(3, vec![0; 1024]).unwrap();
        let r = fourier_bohr(&ones, &cfg).unwrap();
        assert_eq!(r.peaks.len(), 1);
        assert!(r.peaks[0].lambda.abs() < 1e-12 && (r.peaks[0].amplitude - 1.0).abs() < 1e-12);

        let rot = rotation(1024, 4);
        let r = fourier_bohr(&rot, &cfg).unwrap();
        assert_eq!(r.peaks.len(), 1);
        assert!((r.peaks[0].lambda - 0.25).abs() < 1e-9);

        assert!(fourier_bohr(&ones.prefix(32), &cfg).is_err());
    }

    #[test]
    fn off_grid_frequency_is_refined() {
        // lambda = 0.3 + 1/(3N) lies between grid points
        let n = 4096usize;
        let lambda = 0.3 + 1.0 / (3.0 * n as f64);
        let values: Vec<Complex64> = (0..n).map(|t| Complex64::from_polar(1.0, 2.0 * PI * lambda * t as f64)).collect();
        let mut s = PhaseSeq::from_exponents(2, vec![0; n]).unwrap();
        s.values = values;
        let r = fourier_bohr(&s, &SpectralConfig::default()).unwrap();
        let p = r.peak_near(lambda, 1.0 / n as f64).expect("peak");
        assert!((p.lambda - lambda).abs() <= 1.0 / (8.0 * n as f64), "{p:?}");
        assert!(p.amplitude > 0.99);
        // sidelobes of an off-grid tone exceed the threshold on the raw grid
        // but leave with the subtraction
        assert_eq!(r.peaks.len(), 1, "{:?}", r.peaks);
        assert!(r.residual_amplitude <= r.threshold && !r.truncated, "{}", r.residual_amplitude);
    }

    #[test]
    fn two_tones_give_two_peaks() {
        let n = 2048usize;
        let (l1, l2) = (0.1 + 0.4 / n as f64, 0.7 + 0.5 / n as f64);
        let mut s = PhaseSeq::from_exponents(2, vec![0; n]).unwrap();
        s.values = (0..n)
            .map(|t| {
                let t = t as f64;
                0.6 * Complex64::from_polar(1.0, 2.0 * PI * l1 * t) + 0.4 * Complex64::from_polar(1.0, 2.0 * PI * l2 * t)
            })
            .collect();
        let r = fourier_bohr(&s, &SpectralConfig::default()).unwrap();
        assert_eq!(r.peaks.len(), 2, "{:?}", r.peaks);
        assert!((r.peaks[0].amplitude - 0.6).abs() < 1e-3 && (r.peaks[1].amplitude - 0.4).abs() < 1e-3);
        assert!((r.peaks[0].lambda - l1).abs() < 1.0 / (8.0 * n as f64));
        assert!((r.peaks[1].lambda - l2).abs() < 1.0 / (8.0 * n as f64));
    }

    #[test]
    fn max_peaks_truncates() {
        let n = 1024usize;
        let mut s = PhaseSeq::from_exponents(2, vec![0; n]).unwrap();
        s.values = (0..n)
            .map(|t| (0..4).map(|j| Complex64::from_polar(0.5, 2.0 * PI * (0.2 * j as f64 + 0.05) * t as f64)).sum())
            .collect();
        let cfg = SpectralConfig { max_peaks: 2, ..SpectralConfig::default() };
        let r = fourier_bohr(&s, &cfg).unwrap();
        assert_eq!(r.peaks.len(), 2);
        assert!(r.truncated && r.residual_amplitude > r.threshold);
    }

    #[test]
    fn parseval() {
        let seq = DefiningSequence::bernoulli(5, 3).unwrap();
        for i in [MultiIndex::singleton(0, v(1, 4, 5)), MultiIndex::from_triples(5, [(0, 1, 0), (3, 2, 2)]).unwrap()] {
            let s = phase_sequence(&i, &seq, 3000).unwrap();
            let total: f64 = grid_amplitudes(&s).iter().map(|a| a * a).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn thue_morse_amplitudes() {
        let pp = DefiningSequence::price_powers(Bitstream::ThueMorse);
        let i = MultiIndex::singleton(0, v(1, 0, 2));
        for k in [10u32, 12, 14] {
            let n = 1usize << k;
            let s = phase_sequence(&i, &pp, n).unwrap();
            // exact: |(1/N) sum (-1)^{t_n} e^{-2 pi i n/3}| = (sqrt(3)/2)^k
            let a = amplitude_at(&s, 1.0 / 3.0);
            assert!((a - (3f64.sqrt() / 2.0).powi(k as i32)).abs() < 1e-10);
            assert!(amplitude_at(&s, 0.0) < 1e-12);
        }
        let n = 1usize << 10;
        let r = fourier_bohr(&phase_sequence(&i, &pp, n).unwrap(), &SpectralConfig::default()).unwrap();
        assert!(r.peaks.is_empty(), "{:?}", r.peaks);
        // at N = 2^14 the finite-N amplitude at 1/3 already exceeds 4 sqrt(ln N / N)
        let r = fourier_bohr(&phase_sequence(&i, &pp, 1 << 14).unwrap(), &SpectralConfig::default()).unwrap();
        assert!(r.peak_near(1.0 / 3.0, 1.0 / (1 << 14) as f64).is_some());
    }

    #[test]
    fn mean_nu_examples() {
        let ones = PhaseSeq::from_exponents(3, vec![0; 30]).unwrap();
        let m = mean_nu(&ones);
        assert_eq!(m.p_hat, vec![1.0, 0.0, 0.0]);
        assert!((m.nu - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let alt = rotation(1000, 2);
        let m = mean_nu(&alt);
        assert_eq!(m.p_hat, vec![0.5, 0.5]);
        assert!(m.nu.norm() < 1e-15);
        assert_eq!(m.counts.iter().sum::<u64>(), 1000);

        let seq = DefiningSequence::bernoulli(3, 42).unwrap();
        let n = 100_000;
        let m = mean_nu(&phase_sequence(&MultiIndex::singleton(0, v(0, 1, 3)), &seq, n).unwrap());
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for &c in &m.counts {
            assert!((c as f64 - n as f64 / 3.0).abs() < 4.0 * sigma);
        }
        assert!(m.nu.norm() <= 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn verdict_cases() {
        let cfg = SpectralConfig::default();
        let n = 4096;
        let seq = DefiningSequence::bernoulli(3, 42).unwrap();
        let family = word_family(3, &FamilySpec { singletons: true, random: 20, width: 4, seed: 1 }).unwrap();
        assert_eq!(family.len(), 28);
        let reports: Vec<_> = family.iter().map(|i| analyze_word(i, &seq, n, &cfg).unwrap()).collect();
        let out = verdict(&reports, cfg.delta).unwrap();
        assert_eq!(out.verdict, VerdictKind::TracialOnly);
        assert_eq!(out.label, "evidence at N = 4096");

        let commuting = DefiningSequence::commuting(3).unwrap();
        let r = analyze_word(&MultiIndex::singleton(0, v(1, 0, 3)), &commuting, n, &cfg).unwrap();
        assert_eq!(r.mean.p_hat[0], 1.0);
        assert!(r.peak_near(0.0, 1e-12).is_some());
        assert_eq!(verdict(&[r], cfg.delta).unwrap().verdict, VerdictKind::Inconclusive);

        let periodic = DefiningSequence::periodic(vec![ModMat2::identity(2), ModMat2::new([[0, 1], [1, 0]], 2).unwrap()]).unwrap();
        let r = analyze_word(&MultiIndex::singleton(0, v(1, 0, 2)), &periodic, n, &cfg).unwrap();
        assert!(r.peak_near(0.5, 1.0 / (8.0 * n as f64)).is_some());
        assert_eq!(verdict(&[r], cfg.delta).unwrap().verdict, VerdictKind::Inconclusive);
        assert!(verdict(&[], 0.05).is_err());
    }

    #[test]
    fn zero_peak_clause() {
        // p_0 = 2/3, no other structure: v_n = 1 twice out of three in a
        // random order gives mean 1/3 - a lone peak at 0.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e: Vec<u32> = (0..8192).map(|_| if rng.random_range(0..3) < 2 { 0 } else { 1 }).collect();
        let s = PhaseSeq::from_exponents(2, e).unwrap();
        let r = fourier_bohr(&s, &SpectralConfig::default()).unwrap();
        assert!(r.off_zero_peaks().is_empty() && !r.peaks.is_empty());
        let out = verdict(&[r], 0.05).unwrap();
        assert_eq!(out.evidence[0].clause, Some(Clause::ZeroPeakOnly));
        assert_eq!(out.verdict, VerdictKind::TracialOnly);
    }

    #[test]
    fn threshold_shrinks_with_n() {
        let i = MultiIndex::singleton(0, v(1, 2, 3));
        let mut means = Vec::new();
        for k in 10..=14 {
            let n = 1usize << k;
            let total: f64 = (0..8u64)
                .map(|seed| {
                    let seq = DefiningSequence::bernoulli(3, seed).unwrap();
                    analyze_word(&i, &seq, n, &SpectralConfig::default()).unwrap().residual_amplitude
                })
                .sum();
            means.push(total / 8.0);
        }
        assert!(means.windows(2).all(|w| w[1] <= w[0]), "{means:?}");
    }

    #[test]
    fn proof_quantities_match_atoms() {
        let rot = rotation(4096, 4);
        let rows = proof_quantities(&rot, &[0.25, 0.1], &[16, 64], &[1024, 4096]).unwrap();
        for r in &rows {
            if r.lambda == 0.25 {
                assert!((r.star - Complex64::new(1.0, 0.0)).norm() < 1e-9);
                assert!((r.amplitude_sq - 1.0).abs() < 1e-9);
            } else {
                assert!(r.star.norm() < 0.2);
            }
        }
        assert_eq!(rows.len(), 8);
    }

    #[test]
    fn family_parsing() {
        let f = parse_family("singletons+random:20", 4, 9).unwrap();
        assert!(f.singletons && f.random == 20);
        assert!(parse_family("random:x", 4, 9).is_err());
        assert!(parse_family("all", 4, 9).is_err());
        let words = word_family(2, &f).unwrap();
        assert_eq!(words.len(), 23);
        assert!(words[3..].iter().all(|w| w.len() == 2 && w.min_site() == Some(0)));
    }
}
