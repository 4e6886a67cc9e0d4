//! Command-line front end: construct prime-avoiding perfect powers, emit and
//! verify covering certificates, run the exact lemma-scale checks, and survey
//! maximal prime gaps.
//!
//! Exit codes: 0 success, 1 construction/verification failure, 2 usage or
//! I/O error. All file outputs are byte-identical for a fixed configuration
//! regardless of `--threads`.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;

use powergap_core::analysis::{
    char_sum_lemma3, char_sum_s, char_sum_s_p_major, char_sum_s_reciprocity, check_sieve_bound,
    check_smooth_bound, max_gap, rho_product, smooth_cutoff_z, CharSum, GapRecord, RhoProduct,
    SieveBound, SmoothBound,
};
use powergap_core::certify::{build_certificate, from_jsonl, to_jsonl, verify_certificate};
use powergap_core::construction::{
    construct, derive_params, exceptional_set, ConstructError, ConstructOptions, Mode,
};

#[derive(Parser)]
#[command(
    name = "powergap",
    about = "Prime-avoiding perfect powers: construction, certification, and exact sieve diagnostics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RunMode {
    Adaptive,
    Strict,
}

#[derive(Args)]
struct CommonOpts {
    /// Worker threads for the parallel phases (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Write to this path instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Reserved for future randomized matching strategies; the pipeline is
    /// fully deterministic and ignores it.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build m = Mj + A with m^k + u composite for all |u| <= y.
    Construct {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        x: u64,
        #[arg(long, default_value = "1")]
        c1: String,
        #[arg(long, default_value = "1")]
        c2: String,
        #[arg(long, value_enum, default_value = "adaptive")]
        mode: RunMode,
        #[arg(long, default_value_t = 1_000_000)]
        j_max: u64,
        /// Also emit a covering certificate (optionally naming its path).
        #[arg(long, num_args = 0..=1, default_missing_value = "certificate.jsonl")]
        certify: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Re-check a covering certificate from scratch.
    Verify {
        path: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: OutputFormat,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Exact desk-scale checks of the sieve estimates.
    Lemmas {
        #[command(subcommand)]
        check: LemmaCheck,
    },
    /// Maximal prime gap records with merit statistics.
    Survey {
        #[arg(long)]
        limit: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Subcommand)]
enum LemmaCheck {
    /// Count of z-smooth n <= x against x / log^5 x.
    Smooth {
        #[arg(long)]
        x: u64,
        /// A number, or "auto" for the hypothesis cutoff.
        #[arg(long, default_value = "auto")]
        z: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Primes avoiding a residue class against the Mertens product bound.
    Sieve {
        #[arg(long)]
        x: u64,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        a: i64,
        /// Comma-separated primes, or "p2" for the construction's P2 at this x.
        #[arg(long, default_value = "p2")]
        r: String,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// The quadratic character sum S over the exceptional set (even k).
    Charsum {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        x: u64,
        #[arg(long, default_value = "1")]
        c1: String,
        #[arg(long, default_value = "1")]
        c2: String,
        /// Also evaluate the large-sieve form over odd squarefree moduli.
        #[arg(long)]
        lemma3: bool,
        /// Emit one row per u with its inner sum.
        #[arg(long)]
        per_u: bool,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// The local density product for n^k + u over a prime range.
    Rhoprod {
        #[arg(long, allow_hyphen_values = true)]
        u: i64,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        x: u64,
        #[arg(long)]
        y: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        #[command(flatten)]
        common: CommonOpts,
    },
}

/// Failures the exit code distinguishes from usage problems.
enum CliError {
    /// exit 1: the construction or verification itself failed
    Domain(String),
    /// exit 2: bad arguments, unreadable files, malformed input
    Usage(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(format!("i/o error: {e}"))
    }
}

fn parse_ratio(text: &str) -> Result<Ratio<u64>, CliError> {
    let bad = || CliError::Usage(format!("expected a positive decimal, got {text:?}"));
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || frac_part.len() > 18 {
        return Err(bad());
    }
    let numerator: u64 = digits.parse().map_err(|_| bad())?;
    if numerator == 0 {
        return Err(bad());
    }
    Ok(Ratio::new(numerator, 10u64.pow(frac_part.len() as u32)))
}

fn write_output(common: &CommonOpts, content: &str) -> Result<(), CliError> {
    match &common.output {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Construct {
            k,
            x,
            c1,
            c2,
            mode,
            j_max,
            certify,
            format,
            common,
        } => {
            if k < 1 {
                return Err(CliError::Usage("k must be at least 1".into()));
            }
            let options = ConstructOptions {
                c1: parse_ratio(&c1)?,
                c2: parse_ratio(&c2)?,
                mode: match mode {
                    RunMode::Adaptive => Mode::Adaptive,
                    RunMode::Strict => Mode::Strict,
                },
                j_max,
            };
            let result = construct(k, x, &options).map_err(|e| match e {
                ConstructError::Modular(m) => CliError::Usage(m.to_string()),
                other => CliError::Domain(other.to_string()),
            })?;
            let body = match format {
                OutputFormat::Json => {
                    let mut s = serde_json::to_string_pretty(&result.to_json())
                        .expect("document serializes");
                    s.push('\n');
                    s
                }
                OutputFormat::Csv => format!(
                    "k,x,c1,c2,y_target,y_achieved,j,m,leftovers\n{},{},{},{},{},{},{},{},{}\n",
                    k,
                    x,
                    c1,
                    c2,
                    result.y_target,
                    result.y_achieved(),
                    result.j,
                    result.m,
                    result.assignment.leftovers.len()
                ),
            };
            let summary = format!(
                "m has {} digits | y achieved {} of {} | j = {} | {} leftover value(s)",
                result.m.to_string().len(),
                result.y_achieved(),
                result.y_target,
                result.j,
                result.assignment.leftovers.len()
            );
            if let Some(cert_path) = certify {
                let cert =
                    build_certificate(&result).map_err(|e| CliError::Domain(e.to_string()))?;
                std::fs::write(&cert_path, to_jsonl(&cert))?;
            }
            write_output(&common, &body)?;
            if common.output.is_some() {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
            Ok(())
        }
        Command::Verify {
            path,
            format,
            common,
        } => {
            let text = std::fs::read_to_string(&path)?;
            let cert = from_jsonl(&text).map_err(|e| CliError::Usage(e.to_string()))?;
            let report = verify_certificate(&cert);
            let body = match format {
                OutputFormat::Json => {
                    let mut s =
                        serde_json::to_string_pretty(&report).expect("report serializes");
                    s.push('\n');
                    s
                }
                OutputFormat::Csv => {
                    let mut s = String::from("u,reason\n");
                    for f in &report.failures {
                        let u = f.u.map(|u| u.to_string()).unwrap_or_default();
                        let _ = writeln!(s, "{},{}", u, f.reason.replace(',', ";"));
                    }
                    s
                }
            };
            write_output(&common, &body)?;
            if report.ok {
                eprintln!("certificate ok: {} witnesses", report.checked);
                Ok(())
            } else {
                Err(CliError::Domain(format!(
                    "certificate verification failed with {} issue(s)",
                    report.failures.len()
                )))
            }
        }
        Command::Lemmas { check } => run_lemmas(check),
        Command::Survey {
            limit,
            format,
            common,
        } => {
            if limit < 3 {
                return Err(CliError::Usage("survey needs --limit >= 3".into()));
            }
            let records = max_gap(limit);
            let body = match format {
                OutputFormat::Csv => {
                    let mut s = format!("{}\n", GapRecord::CSV_HEADER);
                    for r in &records {
                        let _ = writeln!(s, "{}", r.csv_row());
                    }
                    s
                }
                OutputFormat::Json => {
                    let rows: Vec<serde_json::Value> = records
                        .iter()
                        .map(|r| {
                            serde_json::json!({
                                "p": r.p, "q": r.q, "gap": r.gap,
                                "merit": r.merit, "rankin_ratio": r.rankin_ratio,
                            })
                        })
                        .collect();
                    let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
                    s.push('\n');
                    s
                }
            };
            write_output(&common, &body)
        }
    }
}

fn run_lemmas(check: LemmaCheck) -> Result<(), CliError> {
    match check {
        LemmaCheck::Smooth {
            x,
            z,
            format,
            common,
        } => {
            if x < 16 {
                return Err(CliError::Usage("smooth check needs --x >= 16".into()));
            }
            let z = if z == "auto" {
                smooth_cutoff_z(x)
            } else {
                z.parse::<u64>()
                    .map_err(|_| CliError::Usage(format!("bad --z value {z:?}")))?
            };
            if z < 2 || z > x {
                return Err(CliError::Usage("need 2 <= z <= x".into()));
            }
            let row = check_smooth_bound(x, z);
            emit_row(
                format,
                &common,
                SmoothBound::CSV_HEADER,
                &row.csv_row(),
                serde_json::json!({
                    "x": row.x, "z": row.z, "count": row.count,
                    "bound_ratio": row.bound_ratio,
                    "bound_ratio_decimal": row.bound_ratio_decimal,
                    "hypothesis_met": row.hypothesis_met,
                }),
            )
        }
        LemmaCheck::Sieve {
            x,
            a,
            r,
            format,
            common,
        } => {
            if a != 1 && a != -1 {
                return Err(CliError::Usage("--a must be 1 or -1".into()));
            }
            let r_set: Vec<u64> = if r == "p2" {
                derive_params(1, x, Ratio::new(1, 1), Ratio::new(1, 1))
                    .map_err(|e| CliError::Usage(format!("cannot derive P2: {e}")))?
                    .p2
            } else {
                r.split(',')
                    .map(|part| {
                        part.trim()
                            .parse::<u64>()
                            .map_err(|_| CliError::Usage(format!("bad prime {part:?} in --r")))
                            .and_then(|p| {
                                if powergap_core::sieve::is_prime_u64(p) {
                                    Ok(p)
                                } else {
                                    Err(CliError::Usage(format!("{p} in --r is not prime")))
                                }
                            })
                    })
                    .collect::<Result<_, _>>()?
            };
            let row = check_sieve_bound(x, &r_set, a);
            emit_row(
                format,
                &common,
                SieveBound::CSV_HEADER,
                &row.csv_row(),
                serde_json::json!({
                    "x": row.x, "a": row.a, "r_len": row.r_len, "count": row.count,
                    "mertens_bound": row.mertens_bound,
                    "mertens_bound_decimal": row.mertens_bound_decimal,
                    "ratio": row.ratio, "ratio_decimal": row.ratio_decimal,
                }),
            )
        }
        LemmaCheck::Charsum {
            k,
            x,
            c1,
            c2,
            lemma3,
            per_u,
            format,
            common,
        } => {
            if k % 2 != 0 {
                return Err(CliError::Usage(
                    "charsum is defined for even k (P3 is empty otherwise)".into(),
                ));
            }
            let params = derive_params(k, x, parse_ratio(&c1)?, parse_ratio(&c2)?)
                .map_err(|e| CliError::Domain(e.to_string()))?;
            let u_set = exceptional_set(&params);
            let direct = char_sum_s(&u_set, &params.p3);
            let p_major = char_sum_s_p_major(&u_set, &params.p3);
            let reciprocity = char_sum_s_reciprocity(&u_set, &params.p3);
            let lemma3_sum = lemma3.then(|| char_sum_lemma3(&params.p3, x));
            let body = match format {
                OutputFormat::Csv => {
                    let mut s = format!("{}\n", CharSum::CSV_HEADER);
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{}",
                        k,
                        x,
                        u_set.members.len(),
                        params.p3.len(),
                        direct.s,
                        p_major,
                        reciprocity
                    );
                    if let Some(l3) = lemma3_sum {
                        let _ = writeln!(s, "lemma3_form,{l3}");
                    }
                    if per_u {
                        let _ = writeln!(s, "u,inner_sum");
                        for (u, inner) in &direct.per_u {
                            let _ = writeln!(s, "{u},{inner}");
                        }
                    }
                    s
                }
                OutputFormat::Json => {
                    let mut doc = serde_json::json!({
                        "k": k, "x": x,
                        "members": u_set.members.len(),
                        "p3_len": params.p3.len(),
                        "s": direct.s as u64,
                        "s_p_major": p_major as u64,
                        "s_reciprocity": reciprocity as u64,
                    });
                    if let Some(l3) = lemma3_sum {
                        doc["lemma3_form"] = serde_json::json!(l3 as u64);
                    }
                    if per_u {
                        doc["per_u"] = serde_json::json!(direct
                            .per_u
                            .iter()
                            .map(|&(u, inner)| serde_json::json!({"u": u, "inner": inner}))
                            .collect::<Vec<_>>());
                    }
                    let mut s = serde_json::to_string_pretty(&doc).expect("doc serializes");
                    s.push('\n');
                    s
                }
            };
            write_output(&common, &body)
        }
        LemmaCheck::Rhoprod {
            u,
            k,
            x,
            y,
            format,
            common,
        } => {
            if u == 0 {
                return Err(CliError::Usage("--u must be nonzero".into()));
            }
            if k < 1 {
                return Err(CliError::Usage("--k must be at least 1".into()));
            }
            if !(2 <= x && x < y) {
                return Err(CliError::Usage("need 2 <= x < y".into()));
            }
            let row = rho_product(u, k, x, y);
            emit_row(
                format,
                &common,
                RhoProduct::CSV_HEADER,
                &row.csv_row(),
                serde_json::json!({
                    "u": row.u, "k": row.k, "x": row.x, "y": row.y,
                    "product": row.product, "product_decimal": row.product_decimal,
                    "ratio": row.ratio, "ratio_decimal": row.ratio_decimal,
                }),
            )
        }
    }
}

fn emit_row(
    format: OutputFormat,
    common: &CommonOpts,
    header: &str,
    csv_row: &str,
    json: serde_json::Value,
) -> Result<(), CliError> {
    let body = match format {
        OutputFormat::Csv => format!("{header}\n{csv_row}\n"),
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&json).expect("row serializes");
            s.push('\n');
            s
        }
    };
    write_output(common, &body)
}

fn threads_from(cli: &Cli) -> Option<usize> {
    match &cli.command {
        Command::Construct { common, .. } => common.threads,
        Command::Verify { common, .. } => common.threads,
        Command::Survey { common, .. } => common.threads,
        Command::Lemmas { check } => match check {
            LemmaCheck::Smooth { common, .. } => common.threads,
            LemmaCheck::Sieve { common, .. } => common.threads,
            LemmaCheck::Charsum { common, .. } => common.threads,
            LemmaCheck::Rhoprod { common, .. } => common.threads,
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = threads_from(&cli).unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    if threads < 1 {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(2);
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot build thread pool: {e}");
            return ExitCode::from(2);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
