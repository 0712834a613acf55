use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use thetalift::lattice::{EvenLattice, FrameFile, GrassmannianFrame, LatticeFile};
use thetalift::localpadic::{jordan_decompose_odd, split_status, valuation, SplitStatus, DEFAULT_PRECISION};
use thetalift::polyengine::from_json;
use thetalift::theta::{theta_genus2, zero_pair, SiegelPoint, ThetaSpace};
use thetalift::verify::{k3_hypothesis_check, run_all, run_suite, SuiteConfig, SUITES};
use thetalift::weilrep::{Mp2Word, Mp4Word, WeilRep1, WeilRep2};
use thetalift::Error;

#[derive(Parser)]
#[command(name = "thetalift", version, about = "Lattices, Weil representations and theta functions")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Write JSON output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cap the number of worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Single-threaded reference mode; reports omit timings so runs are byte-identical.
    #[arg(long, global = true)]
    deterministic: bool,
    /// JSON file with suite defaults (ε, τ grid, corpus, bounds, seed).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Random seed for the verification suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a lattice.
    Lattice {
        #[command(subcommand)]
        action: LatticeAction,
    },
    /// Local checks at a prime.
    Local {
        #[command(subcommand)]
        action: LocalAction,
    },
    /// Weil representation matrices.
    Weil {
        #[command(subcommand)]
        action: WeilAction,
    },
    /// Theta function evaluation.
    Theta {
        #[command(subcommand)]
        action: ThetaAction,
    },
    /// Run a verification suite (or `all`).
    Verify {
        suite: String,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        coset_bound: Option<i64>,
        #[arg(long)]
        n_bound: Option<i64>,
    },
    /// Check the two-hyperbolic-planes hypothesis for ⟨2d⟩ ⊕ E8².
    K3Check {
        #[arg(long)]
        d: u64,
    },
}

#[derive(Subcommand)]
enum LatticeAction {
    /// Rank, signature, determinant and discriminant order.
    Info { lattice: String },
    /// Invariant factors of D_L and q of the generators.
    Disc { lattice: String },
}

#[derive(Subcommand)]
enum LocalAction {
    /// Does L ⊗ Z_p split off r hyperbolic planes?
    SplitCheck {
        lattice: String,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        r: usize,
    },
}

#[derive(Subcommand)]
enum WeilAction {
    /// Matrix of ρ_{L,2} (or ρ_L with --genus 1) for a generator word.
    Matrix {
        #[arg(long)]
        lattice: String,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 2)]
        genus: u8,
    },
}

#[derive(Subcommand)]
enum ThetaAction {
    /// Evaluate Θ_{L,2}(τ, g, P) component-wise.
    Eval {
        #[arg(long)]
        lattice: String,
        /// Frame JSON `{"g": [[...]]}`; the base frame if omitted.
        #[arg(long)]
        frame: Option<PathBuf>,
        /// `[[re,im],[re,im],[re,im]]` for τ₁, τ₂, τ₃.
        #[arg(long)]
        tau: String,
        /// Polynomial JSON on the rank × 2 grid; the constant 1 if omitted.
        #[arg(long)]
        poly: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
    },
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Usage(String),
    Compute(String),
    Check(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Compute(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Check(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Compute(m) | Failure::Check(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_)
            | Error::InvalidInput(_)
            | Error::InvalidLattice(_)
            | Error::DimensionMismatch(_)
            | Error::UnsupportedPrime(_)
            | Error::DegenerateFrame(_) => Failure::Usage(e.to_string()),
            _ => Failure::Compute(e.to_string()),
        }
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{} is not valid JSON: {e}", path.display())))
}

/// A lattice from a JSON file `{"gram": ..., "name": ...}` or, if no such file
/// exists, from a name such as `U+U+A1`.
fn load_lattice(arg: &str) -> Result<EvenLattice, Failure> {
    let path = Path::new(arg);
    if path.exists() {
        let file: LatticeFile =
            serde_json::from_value(read_json(path)?).map_err(|e| Failure::Usage(format!("bad lattice file: {e}")))?;
        Ok(EvenLattice::from_file(&file)?)
    } else {
        Ok(EvenLattice::from_name(arg)?)
    }
}

fn complex_matrix_json(m: &nalgebra::DMatrix<Complex64>) -> Value {
    Value::Array(
        (0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect())).collect(),
    )
}

fn parse_tau(s: &str) -> Result<SiegelPoint, Failure> {
    let t: [[f64; 2]; 3] =
        serde_json::from_str(s).map_err(|e| Failure::Usage(format!("--tau must be [[re,im],[re,im],[re,im]]: {e}")))?;
    let c = |k: usize| Complex64::new(t[k][0], t[k][1]);
    Ok(SiegelPoint::from_entries(c(0), c(1), c(2))?)
}

fn suite_config(global: &Global) -> Result<SuiteConfig, Failure> {
    let mut config = match &global.config {
        Some(p) => serde_json::from_value(read_json(p)?).map_err(|e| Failure::Usage(format!("bad config file: {e}")))?,
        None => SuiteConfig::default(),
    };
    if let Some(seed) = global.seed {
        config.seed = seed;
    }
    if global.deterministic {
        config.record_timing = false;
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<(Value, Option<Failure>), Failure> {
    let g = &cli.global;
    Ok(match &cli.command {
        Command::Lattice { action: LatticeAction::Info { lattice } } => {
            let l = load_lattice(lattice)?;
            let d = l.discriminant_group();
            let out = json!({
                "name": l.name(),
                "rank": l.rank(),
                "signature": [l.bplus(), l.bminus()],
                "det": l.det().to_string(),
                "even": true,
                "disc_order": d.order(),
            });
            (out, None)
        }
        Command::Lattice { action: LatticeAction::Disc { lattice } } => {
            let l = load_lattice(lattice)?;
            let d = l.discriminant_group();
            let q: Vec<String> = (0..d.orders().len())
                .map(|k| {
                    let residues: Vec<u64> = (0..d.orders().len()).map(|i| u64::from(i == k)).collect();
                    d.q(d.index(&residues)).to_string()
                })
                .collect();
            (json!({"orders": d.orders(), "q": q}), None)
        }
        Command::Local { action: LocalAction::SplitCheck { lattice, p, r } } => {
            let l = load_lattice(lattice)?;
            let status = split_status(&l, *p, *r)?;
            let mut out = json!({"lattice": l.name(), "p": p, "r": r});
            match status {
                SplitStatus::Verified(b) => {
                    let k = DEFAULT_PRECISION.max(valuation(&l.det(), *p) + 2);
                    let j = jordan_decompose_odd(&l, *p, k)?;
                    out["splits"] = json!(b);
                    out["status"] = json!("verified");
                    out["unimodular_rank"] = json!(j.unimodular_rank());
                    out["jordan"] = serde_json::to_value(&j).expect("serialisable");
                }
                SplitStatus::Structural => {
                    out["splits"] = json!(true);
                    out["status"] = json!("structural");
                }
                SplitStatus::Unverified => {
                    out["splits"] = Value::Null;
                    out["status"] = json!("structural/unverified");
                }
            }
            (out, None)
        }
        Command::Weil { action: WeilAction::Matrix { lattice, word, genus } } => {
            let l = load_lattice(lattice)?;
            let m = match genus {
                1 => WeilRep1::new(&l).matrix(&Mp2Word::parse(word)?),
                2 => WeilRep2::new(&l).matrix(&Mp4Word::parse(word)?),
                _ => return Err(Failure::Usage("--genus must be 1 or 2".into())),
            };
            (json!({"dim": m.nrows(), "word": word, "genus": genus, "matrix": complex_matrix_json(&m)}), None)
        }
        Command::Theta { action: ThetaAction::Eval { lattice, frame, tau, poly, eps } } => {
            if !(*eps > 0.0 && *eps < 1.0) {
                return Err(Failure::Usage(format!("--eps {eps} must lie in (0, 1)")));
            }
            let tau = parse_tau(tau)?;
            let l = load_lattice(lattice)?;
            let frame = match frame {
                Some(p) => {
                    let file: FrameFile =
                        serde_json::from_value(read_json(p)?).map_err(|e| Failure::Usage(format!("bad frame file: {e}")))?;
                    GrassmannianFrame::from_file(&l, &file)?
                }
                None => GrassmannianFrame::base(&l)?,
            };
            let n = l.rank();
            let space = ThetaSpace::for_lattice(&l, &frame)?;
            let rows = space.rows();
            let p = match poly {
                Some(path) => from_json(&read_json(path)?, rows, 2)?.to_complex(),
                None => thetalift::polyengine::MatrixPolynomial::constant(rows, 2, 0, Complex64::new(1.0, 0.0)),
            };
            let z = zero_pair(n);
            let v = theta_genus2(&space, &tau, &z, &z, &p, *eps)?;
            let values: Vec<[f64; 2]> = v.value.iter().map(|c| [c.re, c.im]).collect();
            (json!({"values": values, "radius": v.radius, "tail_estimate": v.tail_estimate, "terms_used": v.terms_used}), None)
        }
        Command::Verify { suite, eps, coset_bound, n_bound } => {
            let mut config = suite_config(g)?;
            if let Some(e) = eps {
                config.eps = *e;
            }
            if let Some(b) = coset_bound {
                config.coset_bound = *b;
            }
            if let Some(b) = n_bound {
                config.n_bound = *b;
            }
            config.validate()?;
            let results = if suite == "all" {
                run_all(&config)?
            } else if SUITES.contains(&suite.as_str()) {
                run_suite(suite, &config)?
            } else {
                return Err(Failure::Usage(format!("unknown suite {suite:?}; known: all, {}", SUITES.join(", "))));
            };
            let failed: Vec<&str> = results.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
            let failure = (!failed.is_empty()).then(|| Failure::Check(format!("failed checks: {}", failed.join(", "))));
            (serde_json::to_value(&results).expect("reports serialise"), failure)
        }
        Command::K3Check { d } => {
            let mut r = k3_hypothesis_check(*d)?;
            if g.deterministic {
                r.wall_time = 0.0;
            }
            let failure = (!r.passed).then(|| Failure::Check(format!("hypothesis fails for d = {d}")));
            (serde_json::to_value(&r).expect("serialisable"), failure)
        }
    })
}

fn emit(global: &Global, value: &Value) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("serialisable") + "\n";
    match &global.out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Compute(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = if cli.global.deterministic { Some(1) } else { cli.global.threads };
    if let Some(n) = threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        // Only fails if a global pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let outcome = run(&cli).and_then(|(value, failure)| {
        emit(&cli.global, &value)?;
        failure.map_or(Ok(()), Err)
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
