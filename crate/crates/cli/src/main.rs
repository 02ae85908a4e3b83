use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::thread;

use clap::{Parser, Subcommand, ValueEnum};
use curvediff::report::{analyze_curve, parse_curve, AnalysisOptions, AnalysisReport};
use curvediff::Error;

mod corpus;

#[derive(Parser)]
#[command(name = "curvediff", version, about = "Torsion of differentials of curve singularities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one curve file.
    Analyze {
        path: PathBuf,
        /// Series precision N (overrides the automatic choice).
        #[arg(long)]
        precision: Option<usize>,
        /// Degree bound D for the implicitization.
        #[arg(long)]
        degree_bound: Option<u32>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Skip relations, torsion and the transform; only valuation data.
        #[arg(long)]
        skip_implicitize: bool,
    },
    /// Compare the worked-example corpus against its golden files.
    Reproduce {
        /// Directory of `.curve`/`.golden` pairs; defaults to the bundled corpus.
        dir: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Records,
}

const EXIT_MISMATCH: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_PRECISION: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::PrecisionExhausted(_) | Error::Unstable { .. } => EXIT_PRECISION,
        Error::Parse(_)
        | Error::Invalid(_)
        | Error::NotACurve { .. }
        | Error::RedundantGenerator { .. }
        | Error::BadConstantTerm { .. } => EXIT_INPUT,
        _ => EXIT_MISMATCH,
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

fn analyze(path: &Path, opts: AnalysisOptions, format: Format) -> ExitCode {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let report = parse_curve(&text, &stem(path)).and_then(|input| analyze_curve(&input, opts));
    match report {
        Ok(r) => {
            match format {
                Format::Text => print!("{}", r.to_text()),
                Format::Records => {
                    for line in r.to_records() {
                        println!("{line}");
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run_case(case: &corpus::Case) -> Result<Vec<String>, String> {
    let golden = corpus::parse_golden(&case.golden)?;
    let input = parse_curve(&case.curve, &case.stem).map_err(|e| e.to_string())?;
    let report: AnalysisReport = analyze_curve(&input, AnalysisOptions::default()).map_err(|e| e.to_string())?;
    Ok(corpus::diff(&golden, &report.facts()))
}

fn reproduce(dir: Option<&Path>) -> ExitCode {
    let cases = match dir {
        Some(d) => match corpus::load_dir(d) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_INPUT);
            }
        },
        None => corpus::bundled(),
    };
    let results: Vec<_> = thread::scope(|s| {
        let handles: Vec<_> = cases.iter().map(|c| s.spawn(move || run_case(c))).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err("analysis panicked".into())))
            .collect()
    });
    let mut failed = 0;
    for (case, res) in cases.iter().zip(&results) {
        match res {
            Ok(d) if d.is_empty() => println!("PASS {}", case.stem),
            Ok(d) => {
                failed += 1;
                println!("FAIL {}", case.stem);
                for line in d {
                    println!("  {line}");
                }
            }
            Err(e) => {
                failed += 1;
                println!("FAIL {}", case.stem);
                println!("  error: {e}");
            }
        }
    }
    println!("{} passed, {failed} failed", cases.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_MISMATCH)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Analyze {
            path,
            precision,
            degree_bound,
            format,
            skip_implicitize,
        } => analyze(
            &path,
            AnalysisOptions {
                precision,
                degree_bound,
                skip_implicitize,
            },
            format,
        ),
        Command::Reproduce { dir } => reproduce(dir.as_deref()),
    }
}
