//! `twl`: generate defining sequences, build and verify representations,
//! and run Fourier-Bohr spectral verdicts.
//!
//! Exit codes: 0 success, 1 an oracle check failed, 2 configuration error,
//! 3 a mathematical constraint is violated, 4 a resource cap was hit.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use twisted_weyl::jordanwigner::{dense_commutation_phase, jw_embed, jw_embed_word, Convention};
use twisted_weyl::seqgen::SPEC_GRAMMAR;
use twisted_weyl::spectrum::{
    bochner_measure, fourier_bohr, parse_family, partial_corr, phase_sequence, proof_quantities,
    toeplitz_min_eigenvalue, verdict, word_family, BochnerMeasure, ProofRow, SpectralConfig, SpectralReport,
};
use twisted_weyl::spinchain::{
    build_rep_table, check_cross_conditions, check_sympl_sum, embed_element, verify_relations, RelationCheck,
    RelationReport, RepTable, DEFAULT_DIM_CAP,
};
use twisted_weyl::words::{commutation_phase, trace};
use twisted_weyl::{DefiningSequence, Error, GroupElement, ModVec2, MultiIndex, Phase, TwistSource};

const CACHE_ENV: &str = "TWL_CACHE_DIR";

#[derive(Parser)]
#[command(name = "twl", version, about = "Twisted Weyl algebras on a lattice")]
struct Cli {
    /// Worker threads (default: one per core). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write A_0..A_{N-1} as JSON lines after a {"d":..} header
    Gen(GenArgs),
    /// Build the spin-chain table for sites 0..=N
    Table(TableArgs),
    /// Compare matrix commutation phases with the algebraic ones
    Verify(VerifyArgs),
    /// Jordan-Wigner image of one letter
    Jw(JwArgs),
    /// Fourier-Bohr spectrum of one word's phase sequence
    Spectrum(SpectrumArgs),
    /// Tracial-state verdict over a family of words
    Verdict(VerdictArgs),
    /// Algebraic trace against the normalized trace of the matrix image
    Trace(TraceArgs),
}

#[derive(Args)]
struct SeqArg {
    /// Sequence spec, e.g. bernoulli:d=3,seed=42 or pp:thue-morse
    #[arg(long = "seq")]
    seq: String,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    seq: SeqArg,
    /// Number of matrices to write
    #[arg(long = "N")]
    n: usize,
    /// Output file; defaults to $TWL_CACHE_DIR/<spec>_N<N>.jsonl, else stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    seq: SeqArg,
    #[arg(long = "N")]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyPath {
    Both,
    Table,
    Jw,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    seq: SeqArg,
    /// Previously built table; otherwise one is built for sites 0..=N
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long = "N", default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_DIM_CAP)]
    cap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = VerifyPath::Both)]
    path: VerifyPath,
    /// Jordan-Wigner tail length (default: N, exact for sites 0..=N)
    #[arg(long)]
    tail: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    Corrected,
    Verbatim,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Corrected => Convention::Corrected,
            ConventionArg::Verbatim => Convention::Verbatim,
        }
    }
}

#[derive(Args)]
struct JwArgs {
    #[command(flatten)]
    seq: SeqArg,
    /// Letter as m,k1,k2
    #[arg(long, allow_hyphen_values = true)]
    letter: String,
    #[arg(long)]
    tail: usize,
    #[arg(long, value_enum, default_value_t = ConventionArg::Corrected)]
    convention: ConventionArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SpectralArgs {
    /// Threshold constant c in c*sqrt(ln N / N)
    #[arg(long, default_value_t = 4.0)]
    c: f64,
    /// A lone peak at 0 counts only if p_0 <= 1 - delta
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
}

impl SpectralArgs {
    fn config(&self) -> SpectralConfig {
        SpectralConfig { c: self.c, delta: self.delta, ..Default::default() }
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    seq: SeqArg,
    /// Word as site:k1,k2;site:k1,k2
    #[arg(long, allow_hyphen_values = true)]
    word: String,
    #[arg(long = "N")]
    n: usize,
    /// Largest correlation lag
    #[arg(long = "K", default_value_t = 64)]
    k: usize,
    #[command(flatten)]
    spectral: SpectralArgs,
    /// Bochner measure bins
    #[arg(long, default_value_t = 16)]
    bins: usize,
    /// CSV of lambda,amplitude; the JSON sidecar goes next to it
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerdictArgs {
    #[command(flatten)]
    seq: SeqArg,
    /// A file with one word per line, or auto:singletons+random:R
    #[arg(long)]
    words: String,
    #[arg(long = "N")]
    n: usize,
    /// Largest site separation in random words
    #[arg(long, default_value_t = 4)]
    width: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    spectral: SpectralArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-word lambda,amplitude CSV files
    #[arg(long)]
    csv_dir: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    seq: SeqArg,
    #[arg(long, allow_hyphen_values = true)]
    word: String,
    /// Phase numerator p of exp(i*pi*p/d)
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    phase: i64,
    /// Table size (default: the word's largest site)
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_DIM_CAP)]
    cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Everything that determines a run's numbers; embedded in every sidecar.
#[derive(Serialize, Default)]
struct RunConfig {
    command: &'static str,
    d: u32,
    sequence: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    word: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    words: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    outputs: Vec<String>,
}

#[derive(Debug)]
enum Failure {
    CheckFailed(String),
    Config(String),
    Constraint(String),
    Cap(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::CheckFailed(_) => 1,
            Failure::Config(_) => 2,
            Failure::Constraint(_) => 3,
            Failure::Cap(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::CheckFailed(m) | Failure::Config(m) | Failure::Constraint(m) | Failure::Cap(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ConditionViolated { .. } | Error::NotInvertible { .. } => Failure::Constraint(e.to_string()),
            Error::DimensionCap { .. } => Failure::Cap(e.to_string()),
            Error::InvalidSpec { .. } => Failure::Config(format!("{e}\naccepted forms:\n{SPEC_GRAMMAR}")),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(format!("json error: {e}"))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Config(format!("csv error: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn load_sequence(spec: &str) -> Result<DefiningSequence, Failure> {
    Ok(DefiningSequence::parse(spec)?)
}

/// The canonical spec when there is one, else the spec as given.
fn describe(seq: &DefiningSequence, given: &str) -> String {
    seq.spec().unwrap_or_else(|| given.to_string())
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

fn parse_letter(text: &str, d: u32) -> Result<(i64, ModVec2), Failure> {
    let parts: Vec<i64> = text
        .split(',')
        .map(|x| x.trim().parse::<i64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Config(format!("letter `{text}` is not m,k1,k2")))?;
    match parts.as_slice() {
        &[m, k1, k2] => Ok((m, ModVec2::new(k1, k2, d)?)),
        _ => Err(Failure::Config(format!("letter `{text}` is not m,k1,k2"))),
    }
}

fn cmd_gen(args: &GenArgs) -> Outcome {
    let seq = load_sequence(&args.seq.seq)?;
    let out = match (&args.out, std::env::var_os(CACHE_ENV)) {
        (Some(p), _) => Some(p.clone()),
        (None, Some(dir)) => {
            let dir = PathBuf::from(dir);
            fs::create_dir_all(&dir)?;
            let name: String = describe(&seq, &args.seq.seq)
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
                .collect();
            Some(dir.join(format!("{name}_N{}.jsonl", args.n)))
        }
        (None, None) => None,
    };
    let mut buf = Vec::new();
    seq.write_jsonl(args.n, &mut buf)?;
    output::write_text(out.as_deref(), std::str::from_utf8(&buf).expect("JSON is UTF-8"))?;
    if let Some(p) = out {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn cmd_table(args: &TableArgs) -> Outcome {
    let seq = load_sequence(&args.seq.seq)?;
    let table = build_rep_table(&seq, args.n)?;
    output::write_text(args.out.as_deref(), &output::to_json(&table)?)?;
    Ok(())
}

#[derive(Serialize)]
struct TableCheck {
    #[serde(flatten)]
    relations: RelationReport,
    det_sums_ok: bool,
    sympl_sum_ok: bool,
    cross_conditions_ok: bool,
    passes: bool,
}

#[derive(Serialize)]
struct ConventionCheck {
    max_deviation: f64,
    passes: bool,
}

#[derive(Serialize)]
struct JwCheck {
    sites: usize,
    tail: usize,
    pairs: usize,
    corrected: ConventionCheck,
    verbatim: ConventionCheck,
    note: &'static str,
}

#[derive(Serialize)]
struct VerifyReport {
    run_config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    table: Option<TableCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    jordan_wigner: Option<JwCheck>,
    passes: bool,
}

const VERBATIM_NOTE: &str = "verbatim uses core labels (k2, k1) and tails (0, b_n), (0, a_n); \
it does not reproduce the algebra's phases and is reported for comparison only. \
Pass/fail uses the corrected labels (k1, 0), (k2, -k1) with tails (0, a_n), (0, -b_n).";

fn random_word(rng: &mut ChaCha8Rng, d: u32, sites: usize) -> MultiIndex {
    loop {
        let letters = rng.random_range(1..=3usize);
        let triples: Vec<_> = (0..letters)
            .map(|_| (rng.random_range(0..sites) as i64, rng.random_range(0..d) as i64, rng.random_range(0..d) as i64))
            .collect();
        let i = MultiIndex::from_triples(d, triples).expect("valid modulus");
        if !i.is_empty() {
            return i;
        }
    }
}

fn jw_check(seq: &DefiningSequence, sites: usize, tail: usize, samples: usize, seed: u64, tol: f64) -> Result<JwCheck, Failure> {
    let d = seq.modulus();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<(MultiIndex, MultiIndex)> =
        (0..samples).map(|_| (random_word(&mut rng, d, sites), random_word(&mut rng, d, sites))).collect();
    let deviation = |convention: Convention| -> Result<f64, Error> {
        let devs = pairs
            .par_iter()
            .map(|(i, j)| {
                let expected = commutation_phase(i, j, 0, seq)?.to_complex();
                let a = jw_embed_word(i, seq, tail, convention)?;
                let b = jw_embed_word(j, seq, tail, convention)?;
                let (lambda, residual) = dense_commutation_phase(&a, &b)?;
                Ok((lambda - expected).norm().max(residual))
            })
            .collect::<Result<Vec<f64>, Error>>()?;
        Ok(devs.into_iter().fold(0.0, f64::max))
    };
    let corrected = deviation(Convention::Corrected)?;
    let verbatim = deviation(Convention::Verbatim)?;
    Ok(JwCheck {
        sites,
        tail,
        pairs: pairs.len(),
        corrected: ConventionCheck { max_deviation: corrected, passes: corrected <= tol },
        verbatim: ConventionCheck { max_deviation: verbatim, passes: verbatim <= tol },
        note: VERBATIM_NOTE,
    })
}

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let seq = load_sequence(&args.seq.seq)?;
    let d = seq.modulus();
    let loaded: Option<RepTable> = match &args.table {
        Some(p) => {
            let t: RepTable = serde_json::from_str(&fs::read_to_string(p)?)?;
            if t.modulus() != d {
                return Err(Failure::Config(format!("table has d = {}, sequence has d = {d}", t.modulus())));
            }
            Some(t)
        }
        None => None,
    };
    let n = loaded.as_ref().map_or(args.n, RepTable::n);
    let tail = args.tail.unwrap_or(n);
    let mut config = RunConfig {
        command: "verify",
        d,
        sequence: describe(&seq, &args.seq.seq),
        n: Some(n),
        tol: Some(args.tol),
        cap: Some(args.cap),
        seed: Some(args.seed),
        ..Default::default()
    };

    let table = if args.path != VerifyPath::Jw {
        let table = match loaded {
            Some(t) => t,
            None => build_rep_table(&seq, n)?,
        };
        let check = RelationCheck { samples: args.samples, cap: args.cap, seed: args.seed, ..Default::default() };
        let relations = verify_relations(&table, &seq, &check)?;
        let det_sums_ok = table.det_sums().iter().all(|s| s.value() == 1);
        let sympl_sum_ok = check_sympl_sum(&table);
        let cross_conditions_ok = check_cross_conditions(&table, &seq)?;
        let passes = relations.passes(args.tol) && det_sums_ok && sympl_sum_ok && cross_conditions_ok;
        Some(TableCheck { relations, det_sums_ok, sympl_sum_ok, cross_conditions_ok, passes })
    } else {
        None
    };
    let jordan_wigner = if args.path != VerifyPath::Table {
        config.tail = Some(tail);
        Some(jw_check(&seq, n + 1, tail, args.samples, args.seed, args.tol)?)
    } else {
        None
    };
    let passes = table.as_ref().is_none_or(|t| t.passes) && jordan_wigner.as_ref().is_none_or(|j| j.corrected.passes);
    if let Some(p) = &args.out {
        config.outputs.push(path_string(p));
    }
    let report = VerifyReport { run_config: config, table, jordan_wigner, passes };
    output::write_text(args.out.as_deref(), &output::to_json(&report)?)?;
    if passes {
        Ok(())
    } else {
        Err(Failure::CheckFailed("oracle check failed; see report".into()))
    }
}

fn cmd_jw(args: &JwArgs) -> Outcome {
    let seq = load_sequence(&args.seq.seq)?;
    let (m, k) = parse_letter(&args.letter, seq.modulus())?;
    let emb = jw_embed(m, k, &seq, args.tail, args.convention.into())?;
    output::write_text(args.out.as_deref(), &output::to_json(&emb)?)?;
    Ok(())
}

#[derive(Serialize)]
struct SpectrumSidecar {
    run_config: RunConfig,
    #[serde(flatten)]
    report: SpectralReport,
    /// `S(k)` as `[re, im]` for `k = 0..=K`.
    correlations: Vec<[f64; 2]>,
    toeplitz_m: usize,
    toeplitz_min_eigenvalue: f64,
    bochner: BochnerMeasure,
    proof_table: Vec<ProofRow>,
}

fn cmd_spectrum(args: &SpectrumArgs) -> Outcome {
    let seq = load_sequence(&args.seq.seq)?;
    let d = seq.modulus();
    let index = MultiIndex::parse(&args.word, d)?;
    let v = phase_sequence(&index, &seq, args.n)?;
    let cfg = args.spectral.config();
    let report = fourier_bohr(&v, &cfg)?;
    let corr = partial_corr(&v, args.k)?;
    let m = args.k.min(32);
    let toeplitz_min_eigenvalue = toeplitz_min_eigenvalue(&corr, m)?;
    let bochner = bochner_measure(&corr, args.k + 1, args.bins)?;
    let mut lambdas = vec![0.0, 0.5];
    lambdas.extend(report.peaks.iter().map(|p| p.lambda).filter(|l| *l != 0.0 && *l != 0.5));
    let ks: Vec<usize> = [args.k / 4, args.k + 1].into_iter().filter(|&k| k >= 1).collect();
    let ns: Vec<usize> = [args.n / 4, args.n].into_iter().filter(|&n| n > args.k + 1).collect();
    let proof_table = if ns.is_empty() { Vec::new() } else { proof_quantities(&v, &lambdas, &ks, &ns)? };

    let mut config = RunConfig {
        command: "spectrum",
        d,
        sequence: describe(&seq, &args.seq.seq),
        n: Some(args.n),
        k: Some(args.k),
        word: Some(index.to_string()),
        c: Some(cfg.c),
        delta: Some(cfg.delta),
        seed: seq.seed(),
        ..Default::default()
    };
    let sidecar_path = args.out.as_deref().map(output::sidecar_path);
    if let (Some(csv), Some(json)) = (&args.out, &sidecar_path) {
        output::write_amplitudes_csv(csv, &report.grid)?;
        config.outputs = vec![path_string(csv), path_string(json)];
    }
    let sidecar = SpectrumSidecar {
        run_config: config,
        correlations: corr.s.iter().map(|z| [z.re, z.im]).collect(),
        report,
        toeplitz_m: m,
        toeplitz_min_eigenvalue,
        bochner,
        proof_table,
    };
    output::write_text(sidecar_path.as_deref(), &output::to_json(&sidecar)?)?;
    Ok(())
}

fn read_words(path: &Path, d: u32) -> Result<Vec<MultiIndex>, Failure> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| MultiIndex::parse(l, d).map_err(Failure::from))
        .collect()
}

#[derive(Serialize)]
struct VerdictOutput {
    run_config: RunConfig,
    #[serde(flatten)]
    verdict: twisted_weyl::spectrum::Verdict,
    threshold: f64,
    residual_amplitude: f64,
    truncated: bool,
}

fn cmd_verdict(args: &VerdictArgs) -> Outcome {
    let seq = load_sequence(&args.seq.seq)?;
    let d = seq.modulus();
    let words = match args.words.strip_prefix("auto:") {
        Some(family) => word_family(d, &parse_family(family, args.width, args.seed)?)?,
        None => read_words(Path::new(&args.words), d)?,
    };
    if words.is_empty() {
        return Err(Failure::Config("the word family is empty".into()));
    }
    let cfg = args.spectral.config();
    let reports = words
        .par_iter()
        .map(|i| twisted_weyl::spectrum::analyze_word(i, &seq, args.n, &cfg))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut config = RunConfig {
        command: "verdict",
        d,
        sequence: describe(&seq, &args.seq.seq),
        n: Some(args.n),
        words: Some(args.words.clone()),
        c: Some(cfg.c),
        delta: Some(cfg.delta),
        seed: Some(args.seed),
        ..Default::default()
    };
    if let Some(dir) = &args.csv_dir {
        fs::create_dir_all(dir)?;
        for (j, r) in reports.iter().enumerate() {
            let p = dir.join(format!("word_{j:03}.csv"));
            output::write_amplitudes_csv(&p, &r.grid)?;
            config.outputs.push(path_string(&p));
        }
    }
    if let Some(p) = &args.out {
        config.outputs.push(path_string(p));
    }
    let out = VerdictOutput {
        run_config: config,
        threshold: reports[0].threshold,
        residual_amplitude: reports.iter().map(|r| r.residual_amplitude).fold(0.0, f64::max),
        truncated: reports.iter().any(|r| r.truncated),
        verdict: verdict(&reports, cfg.delta)?,
    };
    output::write_text(args.out.as_deref(), &output::to_json(&out)?)?;
    Ok(())
}

#[derive(Serialize)]
struct TraceOutput {
    run_config: RunConfig,
    phase: i64,
    algebraic: [f64; 2],
    local: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    dense: Option<[f64; 2]>,
    deviation: f64,
}

fn cmd_trace(args: &TraceArgs) -> Outcome {
    let seq = load_sequence(&args.seq.seq)?;
    let d = seq.modulus();
    let index = MultiIndex::parse(&args.word, d)?;
    if index.min_site().is_some_and(|s| s < 0) {
        return Err(Failure::Config("spin-chain words live on sites >= 0".into()));
    }
    let top = index.max_site().unwrap_or(0) as usize;
    let n = args.n.unwrap_or(top);
    if n < top {
        return Err(Failure::Config(format!("N = {n} is below the word's largest site {top}")));
    }
    let x = GroupElement { phase: Phase::new(args.phase, d), index };
    let table = build_rep_table(&seq, n)?;
    let op = embed_element(&x, &table, &seq)?;
    let alg = trace(&x);
    let local = op.normalized_trace();
    let dense = match op.to_dense(args.cap) {
        Ok(m) => Some(m.normalized_trace()),
        Err(Error::DimensionCap { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let deviation = dense.iter().chain([&local]).map(|t| (t - alg).norm()).fold(0.0, f64::max);
    let out = TraceOutput {
        run_config: RunConfig {
            command: "trace",
            d,
            sequence: describe(&seq, &args.seq.seq),
            n: Some(n),
            word: Some(x.index.to_string()),
            cap: Some(args.cap),
            ..Default::default()
        },
        phase: args.phase,
        algebraic: [alg.re, alg.im],
        local: [local.re, local.im],
        dense: dense.map(|t| [t.re, t.im]),
        deviation,
    };
    output::write_text(args.out.as_deref(), &output::to_json(&out)?)?;
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Table(a) => cmd_table(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Jw(a) => cmd_jw(a),
        Command::Spectrum(a) => cmd_spectrum(a),
        Command::Verdict(a) => cmd_verdict(a),
        Command::Trace(a) => cmd_trace(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
