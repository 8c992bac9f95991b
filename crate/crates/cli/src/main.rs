use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use parendo::cartan::{cartan_test, CartanCase};
use parendo::endo::TypeLabel;
use parendo::generators::GenerateOptions;
use parendo::germ::parse_germ;
use parendo::pipeline::{classify_germ, generate_classified, PipelineConfig};
use parendo::tables::{run_table, Table};

/// Largest δ accepted by `cartan`.
const MAX_DELTA: usize = 3;

const EXIT_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 4;

#[derive(Parser)]
#[command(name = "parendo", version, about = "Parallel endomorphisms of pseudo-Riemannian metric germs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Clone)]
struct PipelineArgs {
    /// Truncate the input germ to this jet order.
    #[arg(long)]
    jet_order: Option<u32>,
    /// Highest covariant derivative of R used for the holonomy span.
    #[arg(long, default_value_t = 2)]
    deriv_order: usize,
    /// Random samples per identity check.
    #[arg(long, default_value_t = 8)]
    samples: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a germ given as JSON.
    Classify {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Run only the identity checks on a germ.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Generate a generic germ of a type.
    Generate {
        #[arg(long)]
        label: String,
        /// Real signature `p,q`.
        #[arg(long, value_parser = parse_pair)]
        signature: Option<(usize, usize)>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 4)]
        jet_order: u32,
        /// Seeds to try before giving up on a generic germ.
        #[arg(long, default_value_t = 5)]
        attempts: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Cartan test of the hyperkähler-type exterior system.
    Cartan {
        #[arg(long)]
        delta: usize,
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        epsilon: i32,
        /// Complexified case (ε is ignored).
        #[arg(long)]
        complex: bool,
        /// Real signature `p,q` of the metric at the base point (ε = −1);
        /// defaults to definite.
        #[arg(long, value_parser = parse_pair)]
        signature: Option<(usize, usize)>,
        #[command(flatten)]
        common: Common,
    },
    /// Check a type table: 1, 2, 3 or types_row.
    Table {
        which: String,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected p,q")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

fn emit<T: Serialize>(value: &T, out: &Option<PathBuf>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Error carrying its exit code.
struct Exit(u8, anyhow::Error);

fn invalid(e: impl Into<anyhow::Error>) -> Exit {
    Exit(EXIT_INVALID, e.into())
}

fn failed(e: impl Into<anyhow::Error>) -> Exit {
    Exit(EXIT_FAILED, e.into())
}

fn config(common: &Common, p: &PipelineArgs) -> PipelineConfig {
    PipelineConfig { seed: common.seed, deriv_order: p.deriv_order, samples: p.samples }
}

fn load_germ(path: &PathBuf, jet_order: Option<u32>) -> Result<parendo::germ::MetricGerm, Exit> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(invalid)?;
    let germ = parse_germ(&text).map_err(invalid)?;
    Ok(match jet_order {
        Some(k) => germ.with_order(k),
        None => germ,
    })
}

fn run(cli: Cli) -> Result<u8, Exit> {
    match cli.command {
        Command::Classify { input, common, pipeline } => {
            let germ = load_germ(&input, pipeline.jet_order)?;
            let report = classify_germ(&germ, &config(&common, &pipeline)).map_err(failed)?;
            emit(&report, &common.out).map_err(failed)?;
            Ok(report.exit_code() as u8)
        }
        Command::Verify { input, common, pipeline } => {
            let germ = load_germ(&input, pipeline.jet_order)?;
            let report = classify_germ(&germ, &config(&common, &pipeline)).map_err(failed)?;
            let out = json!({
                "seed": common.seed,
                "jet_order": report.jet_order,
                "status": report.status,
                "label": report.label,
                "message": report.message,
                "verification": report.verification,
            });
            emit(&out, &common.out).map_err(failed)?;
            Ok(report.exit_code() as u8)
        }
        Command::Generate { label, signature, dim, jet_order, attempts, common } => {
            let label = TypeLabel::parse(&label).ok_or_else(|| invalid(anyhow!("unknown type label {label:?}")))?;
            if label == TypeLabel::HplusH {
                return Err(invalid(anyhow!("HplusH is not realized by any germ")));
            }
            let dim = dim.or(signature.map(|(p, q)| p + q));
            let opts = GenerateOptions { dim, signature, seed: common.seed, order: jet_order, ..Default::default() };
            let cfg = PipelineConfig { seed: common.seed, ..Default::default() };
            let (gen, report, log) = generate_classified(label, &opts, &cfg, attempts).map_err(|e| match e {
                parendo::pipeline::PipelineError::Gen(g) => invalid(g),
                other => failed(other),
            })?;
            let mut v = serde_json::to_value(&gen.germ).map_err(failed)?;
            let obj = v.as_object_mut().expect("germ serializes to an object");
            obj.insert("expected_label".into(), json!(label));
            obj.insert("seed".into(), json!(gen.seed));
            obj.insert("description".into(), json!(gen.description));
            obj.insert("holonomy_dim".into(), json!(report.holonomy.dim));
            obj.insert("attempts".into(), serde_json::to_value(&log).map_err(failed)?);
            if let Some(k) = gen.certified_order {
                obj.insert("certified_order".into(), json!(k));
            }
            emit(&v, &common.out).map_err(failed)?;
            Ok(0)
        }
        Command::Cartan { delta, epsilon, complex, signature, common } => {
            let case = if complex {
                CartanCase::Complex
            } else {
                let p = match signature {
                    Some((p, q)) if p + q != 4 * delta || p % 4 != 0 || epsilon > 0 && p != q => {
                        return Err(invalid(anyhow!(
                            "signature ({p},{q}) not available: need p + q = 4δ = {}, p divisible by 4, p = q when ε = +1",
                            4 * delta
                        )))
                    }
                    Some((p, _)) => p / 4,
                    None => delta,
                };
                CartanCase::Real { epsilon, p }
            };
            let report = cartan_test(delta, case, MAX_DELTA).map_err(invalid)?;
            let passed = report.passed();
            let mut v = serde_json::to_value(&report).map_err(failed)?;
            v.as_object_mut().expect("object").insert("seed".into(), json!(common.seed));
            emit(&v, &common.out).map_err(failed)?;
            Ok(if passed { 0 } else { EXIT_FAILED })
        }
        Command::Table { which, common } => {
            let table = Table::parse(&which)
                .ok_or_else(|| invalid(anyhow!("unknown table {which:?}: expected 1, 2, 3 or types_row")))?;
            let report = run_table(table, common.seed).map_err(failed)?;
            let mut v: Value = serde_json::to_value(&report).map_err(failed)?;
            v.as_object_mut().expect("object").insert("seed".into(), json!(common.seed));
            emit(&v, &common.out).map_err(failed)?;
            for f in report.failures() {
                eprintln!("FAILED {} {:?}: {} {}", f.label, f.signature, f.item, f.witness.as_deref().unwrap_or(""));
            }
            Ok(if report.passed() { 0 } else { EXIT_FAILED })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(Exit(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
