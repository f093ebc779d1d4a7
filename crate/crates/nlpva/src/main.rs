//! Command-line front end: algebra loading, verification suites, report
//! emission. Reports go to stdout (one line or one JSON object per check);
//! the exit status is 0 exactly when every report passes. Parallelism uses
//! the rayon default pool; set `RAYON_NUM_THREADS` or `--jobs` to override.

use clap::{Args, Parser, Subcommand, ValueEnum};
use nlpva::bracket::Algebra;
use nlpva::examples::builtin;
use nlpva::logva::fock::{fb_borcherds_n0_check, FbVariant, FockState};
use nlpva::logva::gr::{gr_bracket_fock, gr_bracket_vm, gr_product_check};
use nlpva::logva::vfield::{vector_field_check, VfState};
use nlpva::logva::vm::{vm_borcherds_n0_check, vm_commutator_check, PbwState};
use nlpva::parse::{parse_algebra, parse_expr, parse_fock_state, parse_pbw_state};
use nlpva::q::{qi, Q};
use nlpva::report::VerificationReport;
use rayon::prelude::*;
use std::str::FromStr;

#[derive(Parser)]
#[command(name = "nlpva", version, about = "Exact verification engine for non-local Poisson vertex superalgebras and logarithmic vertex algebra mode algebras")]
struct Cli {
    /// Number of worker threads (default: rayon's choice / RAYON_NUM_THREADS).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Skew,
    Leibniz,
    Jacobi,
    E12,
}

#[derive(Clone, Copy, ValueEnum)]
enum LogvaName {
    FreeBoson,
    FreeBosonK,
    VirasoroMagri,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeCheck {
    #[value(name = "L", alias = "l")]
    L,
    Borcherds,
}

/// An inclusive integer range written `a..b`.
#[derive(Clone, Copy)]
struct IntRange(i64, i64);

impl FromStr for IntRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once("..").ok_or("expected a..b")?;
        let a = a.trim().parse().map_err(|_| format!("bad range start '{a}'"))?;
        let b = b.trim().parse().map_err(|_| format!("bad range end '{b}'"))?;
        if a > b {
            return Err(format!("empty range {a}..{b}"));
        }
        Ok(IntRange(a, b))
    }
}

impl IntRange {
    fn iter(&self) -> impl Iterator<Item = i64> {
        self.0..=self.1
    }
}

#[derive(Args)]
struct AlgebraArgs {
    /// Algebra source: `builtin:NAME` or a path to an algebra file.
    #[arg(long)]
    algebra: String,
    /// Substitute a rational value for a central generator, e.g. `K=0`
    /// (repeatable).
    #[arg(long = "set-central", value_name = "GEN=VALUE")]
    set_central: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an axiom suite over all generator pairs/triples of an algebra.
    Check {
        #[arg(value_enum)]
        suite: Suite,
        #[command(flatten)]
        algebra: AlgebraArgs,
        /// Trust depth / series floor magnitude.
        #[arg(long, default_value_t = 6)]
        depth: u32,
        /// First mode exponent range (e12 suite).
        #[arg(long, default_value = "0..3", allow_hyphen_values = true)]
        m_range: IntRange,
        /// Second mode exponent range (e12 suite).
        #[arg(long, default_value = "0..3", allow_hyphen_values = true)]
        k_range: IntRange,
    },
    /// Evaluate a λ-bracket of two differential polynomials and print it.
    Bracket {
        #[command(flatten)]
        algebra: AlgebraArgs,
        /// Left argument, in the expression grammar.
        #[arg(long)]
        left: String,
        /// Right argument.
        #[arg(long)]
        right: String,
        /// Series floor magnitude.
        #[arg(long, default_value_t = 4)]
        depth: u32,
    },
    /// Compute the bracket induced on the associated graded of a
    /// logarithmic vertex algebra model, and check its product structure.
    Gr {
        #[arg(long, value_enum)]
        logva: LogvaName,
        /// Left state (defaults to the generator).
        #[arg(long)]
        left: Option<String>,
        /// Right state (defaults to the generator).
        #[arg(long)]
        right: Option<String>,
        /// Series floor.
        #[arg(long, default_value_t = -6, allow_hyphen_values = true)]
        floor: i64,
        /// Sample count for the induced-product check (0 disables it).
        #[arg(long, default_value_t = 60)]
        product_samples: usize,
        /// RNG seed for the product check.
        #[arg(long, default_value_t = 20260823)]
        seed: u64,
    },
    /// Verify mode-algebra commutation relations on basis states.
    Modes {
        #[arg(long, value_enum)]
        logva: LogvaName,
        /// Which identity to check: the Virasoro commutators or the
        /// Borcherds identity at n = 0.
        #[arg(long, value_enum, default_value_t = ModeCheck::L)]
        check: ModeCheck,
        #[arg(long, default_value = "-4..4", allow_hyphen_values = true)]
        m_range: IntRange,
        #[arg(long, default_value = "-4..4", allow_hyphen_values = true)]
        k_range: IntRange,
        /// Maximum basis-state degree.
        #[arg(long, default_value_t = 4)]
        deg: u32,
        /// Central charge value; omit to keep the central element symbolic.
        #[arg(long)]
        c: Option<String>,
    },
    /// Verify the Virasoro commutation relations in the vector-field model.
    Vectorfield {
        #[arg(long, default_value = "-3..3", allow_hyphen_values = true)]
        m_range: IntRange,
        #[arg(long, default_value = "-3..3", allow_hyphen_values = true)]
        k_range: IntRange,
        /// Nilpotency order N (D^N = 0).
        #[arg(long, default_value_t = 4)]
        nil_order: u32,
        /// Maximum |a| for basis monomials t^a.
        #[arg(long, default_value_t = 6)]
        t_max: i64,
    },
    /// Verify the binomial-coefficient identities over a finite range.
    Binom {
        #[arg(long, default_value_t = 12)]
        max: i64,
    },
}

fn parse_rational(s: &str) -> Result<Q, String> {
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| format!("bad rational '{s}'"))?;
        let q: i64 = q.trim().parse().map_err(|_| format!("bad rational '{s}'"))?;
        if q == 0 {
            return Err("zero denominator".into());
        }
        Ok(Q::new(p.into(), q.into()))
    } else {
        let n: i64 = s.trim().parse().map_err(|_| format!("bad rational '{s}'"))?;
        Ok(qi(n))
    }
}

fn load_algebra(args: &AlgebraArgs) -> Result<Algebra, String> {
    let mut alg = if let Some(name) = args.algebra.strip_prefix("builtin:") {
        builtin(name).map_err(|e| format!("{e}"))?
    } else {
        let text = std::fs::read_to_string(&args.algebra)
            .map_err(|e| format!("cannot read {}: {e}", args.algebra))?;
        let name = std::path::Path::new(&args.algebra)
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("file")
            .to_string();
        parse_algebra(&text, &name)?
    };
    for spec in &args.set_central {
        let (gen, value) = spec
            .split_once('=')
            .ok_or_else(|| format!("expected GEN=VALUE, got '{spec}'"))?;
        let idx = alg
            .sig
            .index_of(gen.trim())
            .ok_or_else(|| format!("unknown generator '{gen}'"))?;
        let v = parse_rational(value)?;
        alg = alg.specialize(idx, &v).map_err(|e| format!("{e}"))?;
    }
    Ok(alg)
}

fn emit(reports: &[VerificationReport], format: Format) -> bool {
    let mut all_pass = true;
    for r in reports {
        match format {
            Format::Text => println!("{}", r.to_line()),
            Format::Json => println!("{}", r.to_json()),
        }
        all_pass &= r.is_pass();
    }
    all_pass
}

/// All PBW basis words of weight (sum of indices) at most `deg`.
fn pbw_basis(deg: u32) -> Vec<PbwState> {
    fn partitions(sum: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        out.push(prefix.clone());
        for part in (1..=max.min(sum)).rev() {
            prefix.push(part);
            partitions(sum - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut words = Vec::new();
    partitions(deg, deg.max(1), &mut Vec::new(), &mut words);
    words.sort();
    words.dedup();
    words.into_iter().map(|w| PbwState::word(&w)).collect()
}

/// Fock monomials in `x_0..x_3, K` of total degree at most `deg`.
fn fock_basis(deg: u32) -> Vec<FockState> {
    let gens: Vec<FockState> = (0..4).map(FockState::x).chain([FockState::k()]).collect();
    let mut out = vec![FockState::vac()];
    let mut layer = vec![FockState::vac()];
    for _ in 0..deg {
        let mut next = Vec::new();
        for s in &layer {
            for g in &gens {
                let m = s.mul(g);
                if !out.contains(&m) {
                    out.push(m.clone());
                    next.push(m);
                }
            }
        }
        layer = next;
    }
    out
}

fn run() -> Result<bool, String> {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| format!("{e}"))?;
    }
    let format = cli.format;
    match cli.command {
        Command::Check { suite, algebra, depth, m_range, k_range } => {
            let alg = load_algebra(&algebra)?;
            let floor = -(depth as i64);
            let n = alg.sig.len();
            let reports: Vec<VerificationReport> = match suite {
                Suite::Skew => {
                    let cases: Vec<(usize, usize)> =
                        (0..n).flat_map(|g| (0..n).map(move |h| (g, h))).collect();
                    cases.par_iter().map(|&(g, h)| alg.skew_check(g, h, floor)).collect()
                }
                Suite::Leibniz => {
                    let cases: Vec<(usize, usize, usize)> = (0..n)
                        .flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c))))
                        .collect();
                    cases
                        .par_iter()
                        .map(|&(a, b, c)| {
                            alg.leibniz_check(
                                a,
                                &nlpva::superpoly::DiffPoly::gen(b),
                                &nlpva::superpoly::DiffPoly::gen(c),
                                floor,
                            )
                        })
                        .collect()
                }
                Suite::Jacobi => {
                    let cases: Vec<(usize, usize, usize)> = (0..n)
                        .flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c))))
                        .collect();
                    cases
                        .par_iter()
                        .map(|&(a, b, c)| alg.jacobi_check(a, b, c, floor))
                        .collect()
                }
                Suite::E12 => {
                    let mut cases = Vec::new();
                    for m in m_range.iter() {
                        for k in k_range.iter() {
                            for a in 0..n {
                                for b in 0..n {
                                    for c in 0..n {
                                        cases.push((m, k, a, b, c));
                                    }
                                }
                            }
                        }
                    }
                    cases
                        .par_iter()
                        .map(|&(m, k, a, b, c)| alg.verify_e12(m, k, a, b, c))
                        .collect()
                }
            };
            Ok(emit(&reports, format))
        }
        Command::Bracket { algebra, left, right, depth } => {
            let alg = load_algebra(&algebra)?;
            let p = parse_expr(&left, &alg.sig).map_err(|e| e.to_string())?;
            let q = parse_expr(&right, &alg.sig).map_err(|e| e.to_string())?;
            let series = alg.bracket_eval(&p, &q, -(depth as i64));
            println!("{}", series.display(&alg.sig));
            Ok(true)
        }
        Command::Gr { logva, left, right, floor, product_samples, seed } => {
            let mut ok = true;
            match logva {
                LogvaName::FreeBoson | LogvaName::FreeBosonK => {
                    let variant = if matches!(logva, LogvaName::FreeBoson) {
                        FbVariant::Plain
                    } else {
                        FbVariant::WithK
                    };
                    let g = left.as_deref().map_or(Ok(FockState::x(0)), parse_fock_state)?;
                    let h = right.as_deref().map_or(Ok(FockState::x(0)), parse_fock_state)?;
                    let sig = builtin("potential-free-boson").map_err(|e| format!("{e}"))?.sig;
                    let s = gr_bracket_fock(variant, &g, &h, floor)?;
                    println!("{}", s.display(&sig));
                }
                LogvaName::VirasoroMagri => {
                    let g = left.as_deref().map_or(Ok(PbwState::word(&[1])), parse_pbw_state)?;
                    let h = right.as_deref().map_or(Ok(PbwState::word(&[1])), parse_pbw_state)?;
                    let sig = builtin("potential-virasoro-magri").map_err(|e| format!("{e}"))?.sig;
                    let s = gr_bracket_vm(&g, &h, floor)?;
                    println!("{}", s.display(&sig));
                }
            }
            if product_samples > 0 {
                match gr_product_check(seed, product_samples) {
                    Ok(()) => println!("gr-product samples={product_samples} ... pass"),
                    Err(e) => {
                        println!("gr-product samples={product_samples} ... fail: {e}");
                        ok = false;
                    }
                }
            }
            Ok(ok)
        }
        Command::Modes { logva, check, m_range, k_range, deg, c } => {
            let c = c.map(|s| parse_rational(&s)).transpose()?;
            let reports: Vec<VerificationReport> = match (logva, check) {
                (LogvaName::VirasoroMagri, ModeCheck::L) => {
                    let states = pbw_basis(deg);
                    let mut cases = Vec::new();
                    for m in m_range.iter() {
                        for k in k_range.iter() {
                            for s in &states {
                                cases.push((m, k, s.clone()));
                            }
                        }
                    }
                    cases
                        .par_iter()
                        .map(|(m, k, s)| vm_commutator_check(*m, *k, s, c.as_ref()))
                        .collect()
                }
                (LogvaName::VirasoroMagri, ModeCheck::Borcherds) => {
                    let states = pbw_basis(deg);
                    let mut cases = Vec::new();
                    for m in m_range.iter() {
                        for k in k_range.iter() {
                            for s in &states {
                                cases.push((m, k, s.clone()));
                            }
                        }
                    }
                    cases
                        .par_iter()
                        .map(|(m, k, s)| vm_borcherds_n0_check(*m, *k, s))
                        .collect()
                }
                (fb, ModeCheck::Borcherds) => {
                    let variant = if matches!(fb, LogvaName::FreeBoson) {
                        FbVariant::Plain
                    } else {
                        FbVariant::WithK
                    };
                    let states = fock_basis(deg);
                    let mut cases = Vec::new();
                    for m in m_range.iter() {
                        for k in k_range.iter() {
                            for s in &states {
                                cases.push((m, k, s.clone()));
                            }
                        }
                    }
                    cases
                        .par_iter()
                        .map(|(m, k, s)| fb_borcherds_n0_check(variant, *m, *k, s))
                        .collect()
                }
                (_, ModeCheck::L) => {
                    return Err("the L-commutator check applies to the virasoro-magri model".into())
                }
            };
            Ok(emit(&reports, format))
        }
        Command::Vectorfield { m_range, k_range, nil_order, t_max } => {
            let mut cases = Vec::new();
            for a in -t_max..=t_max {
                for p in 0..nil_order {
                    for m in m_range.iter() {
                        for k in k_range.iter() {
                            cases.push((m, k, VfState::mono(nil_order, a, p, qi(1))));
                        }
                    }
                }
            }
            let reports: Vec<VerificationReport> =
                cases.par_iter().map(|(m, k, s)| vector_field_check(*m, *k, s)).collect();
            Ok(emit(&reports, format))
        }
        Command::Binom { max } => {
            let reports: Vec<VerificationReport> = (1..=4u8)
                .map(|item| nlpva::binom::lemma_check(item, max, max as u32))
                .collect();
            Ok(emit(&reports, format))
        }
    }
}

fn main() {
    match run() {
        Ok(true) => {}
        Ok(false) => std::process::exit(1),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
