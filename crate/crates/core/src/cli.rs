//! Command-line dispatch: parse a model file, run one computation, emit a report.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::algebra::RelativeModel;
use crate::classify::{classify_su_family, example2_check, homotopy_report, hspace_decision};
use crate::cochains::{cochain_presentation, FiniteDgl};
use crate::derivation::{DerComplex, DerKind};
use crate::dsl::{parse_model, print_model, ModelDocument, Options};
use crate::error::Error;
use crate::hom::verify_psi;
use crate::par::Exec;
use crate::report::{self, ReportDocument};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_INVARIANT: i32 = 2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Table,
}

#[derive(Parser, Debug)]
#[command(name = "derlie", version, about = "Derivation DG Lie algebras of relative Sullivan models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// highest derivation degree computed (default: twice the top fiber degree plus two)
    #[arg(long, global = true)]
    pub max_degree: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// compute without the thread pool
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// homology ranks and representative cycles
    Homology {
        file: PathBuf,
        /// restrict to derivations with values in the positive-degree base ideal
        #[arg(long)]
        based: bool,
        #[command(flatten)]
        common: Common,
    },
    /// structure constants of the bracket on homology
    Brackets {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// bracket-level H-space decision with a witness
    Hspace {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// count rational types of principal SU(n)-bundles over CP^m
    ClassifySu {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: u32,
        #[command(flatten)]
        common: Common,
    },
    /// Chevalley–Eilenberg cochain presentation
    Cochains {
        file: PathBuf,
        /// use homology with its bracket instead of the full derivation algebra
        #[arg(long)]
        homology: bool,
        #[command(flatten)]
        common: Common,
    },
    /// check the derivation/hom correspondence on complete bases
    VerifyPsi {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// everything above for one model
    Report {
        file: PathBuf,
        /// assert the formality hypothesis for the sufficient-condition check
        #[arg(long)]
        assume_formal: bool,
        #[command(flatten)]
        common: Common,
    },
}

/// What a run printed and how it ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn diagnostics(msg: String) -> Self {
        Outcome { stdout: String::new(), stderr: msg, code: EXIT_DIAGNOSTICS }
    }
}

fn error_outcome(e: Error) -> Outcome {
    let code = match e {
        Error::InvalidModel(_) | Error::NotPure | Error::NotWhiteheadTrivial | Error::InvalidSpec(_) => EXIT_DIAGNOSTICS,
        Error::ContainmentViolation { .. } | Error::InhomogeneousValue { .. } | Error::Invariant(_) => EXIT_INVARIANT,
    };
    Outcome { stdout: String::new(), stderr: format!("error: {e}\n"), code }
}

fn load(path: &Path) -> Result<ModelDocument, Outcome> {
    let text = std::fs::read_to_string(path).map_err(|e| Outcome::diagnostics(format!("{}: {e}\n", path.display())))?;
    parse_model(&text).map_err(|ds| {
        let lines: String = ds.iter().map(|d| format!("{}:{d}\n", path.display())).collect();
        Outcome::diagnostics(lines)
    })
}

fn inputs(path: &Path, doc: &ModelDocument, extra: Value) -> Value {
    let mut v = json!({
        "file": path.file_name().map(|s| s.to_string_lossy().into_owned()),
        "model": print_model(&doc.model, &Options::default()),
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut v, extra) {
        m.extend(e);
    }
    v
}

struct Run {
    command: &'static str,
    window: u32,
    inputs: Value,
    result: Value,
    /// an internal check failed; the report is still printed
    failed: Option<String>,
}

fn window_for(common: &Common, doc: &ModelDocument) -> u32 {
    common.max_degree.or(doc.options.max_degree).unwrap_or_else(|| doc.model.default_window())
}

fn exec_for(common: &Common) -> Exec {
    if common.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn complex(model: &RelativeModel, window: u32, kind: DerKind, exec: Exec) -> Result<DerComplex, Error> {
    let c = DerComplex::new(model, window, kind, exec);
    c.check_d_squared()?;
    Ok(c)
}

fn dossier(model: &RelativeModel, window: u32, exec: Exec, formal: bool) -> Result<(Value, Option<String>), Error> {
    let c = complex(model, window, DerKind::Full, exec)?;
    let h = c.homology()?;
    let table = c.homology_bracket(&h)?;
    let verdict = hspace_decision(model, window, exec)?;
    let homotopy = homotopy_report(model, window, exec)?;
    let dgl = FiniteDgl::from_homology(&c, &h, &table);
    let pres = cochain_presentation(&dgl, window);
    let square = pres.check_d_squared();
    let psi = verify_psi(model, window, exec);
    let mut failed = psi.counterexample.clone();
    if !square.is_ok() {
        failed = Some(square.violations.join("; "));
    }
    let example2 = match example2_check(model, formal, window, exec) {
        Ok(r) => {
            if r.discrepancy {
                failed = Some("sufficient-condition prediction disagrees with the bracket computation".into());
            }
            report::example2_payload(&r)
        }
        Err(e @ (Error::NotPure | Error::NotWhiteheadTrivial)) => json!({ "skipped": e.to_string() }),
        Err(e) => return Err(e),
    };
    let n_invariant = match crate::derivation::n_invariant(model) {
        Ok(n) => json!(n),
        Err(Error::NotPure) => Value::Null,
        Err(e) => return Err(e),
    };
    let result = json!({
        "brackets": report::bracket_payload(model, &h, &table),
        "hspace": report::verdict_payload(&verdict),
        "homotopy": report::homotopy_payload(&homotopy),
        "cochains": report::cochain_payload(&pres, &square),
        "verify_psi": report::psi_payload(&psi),
        "sufficient_condition": example2,
        "n_invariant": n_invariant,
    });
    Ok((result, failed))
}

fn execute(command: Command) -> Result<(Run, Format), Outcome> {
    let run = |command: &'static str, file: &Path, common: &Common, extra: Value, f: &dyn Fn(&RelativeModel, u32, Exec) -> Result<(Value, Option<String>), Error>| {
        let doc = load(file)?;
        let window = window_for(common, &doc);
        let (result, failed) = f(&doc.model, window, exec_for(common)).map_err(error_outcome)?;
        Ok((Run { command, window, inputs: inputs(file, &doc, extra), result, failed }, common.format))
    };
    match command {
        Command::Homology { file, based, common } => run("homology", &file, &common, json!({ "based": based }), &|m, w, e| {
            let kind = if based { DerKind::Based } else { DerKind::Full };
            let h = complex(m, w, kind, e)?.homology()?;
            Ok((report::homology_payload(m, &h), None))
        }),
        Command::Brackets { file, common } => run("brackets", &file, &common, json!({}), &|m, w, e| {
            let c = complex(m, w, DerKind::Full, e)?;
            let h = c.homology()?;
            let t = c.homology_bracket(&h)?;
            Ok((report::bracket_payload(m, &h, &t), None))
        }),
        Command::Hspace { file, common } => run("hspace", &file, &common, json!({}), &|m, w, e| {
            complex(m, w, DerKind::Full, e)?;
            Ok((report::verdict_payload(&hspace_decision(m, w, e)?), None))
        }),
        Command::Cochains { file, homology, common } => {
            run("cochains", &file, &common, json!({ "homology": homology }), &|m, w, e| {
                let c = complex(m, w, DerKind::Full, e)?;
                let dgl = if homology {
                    let h = c.homology()?;
                    let t = c.homology_bracket(&h)?;
                    FiniteDgl::from_homology(&c, &h, &t)
                } else {
                    FiniteDgl::from_der_complex(&c)?
                };
                let p = cochain_presentation(&dgl, w);
                let sq = p.check_d_squared();
                let failed = (!sq.is_ok()).then(|| sq.violations.join("; "));
                Ok((report::cochain_payload(&p, &sq), failed))
            })
        }
        Command::VerifyPsi { file, common } => run("verify-psi", &file, &common, json!({}), &|m, w, e| {
            let r = verify_psi(m, w, e);
            Ok((report::psi_payload(&r), r.counterexample.clone()))
        }),
        Command::Report { file, assume_formal, common } => {
            run("report", &file, &common, json!({ "assume_formal": assume_formal }), &|m, w, e| dossier(m, w, e, assume_formal))
        }
        Command::ClassifySu { n, m, common } => {
            if n == 0 || m == 0 {
                return Err(Outcome::diagnostics("error: --n and --m must be at least 1\n".into()));
            }
            let window = common.max_degree.unwrap_or(4 * n);
            let r = classify_su_family(n, m, window, exec_for(&common)).map_err(error_outcome)?;
            let failed = (!r.is_consistent()).then(|| "classification evidence is inconsistent".to_string());
            let run = Run {
                command: "classify-su",
                window,
                inputs: json!({ "n": n, "m": m }),
                result: report::classification_payload(&r),
                failed,
            };
            Ok((run, common.format))
        }
    }
}

/// Runs one command line; never panics on bad input and never exits the process.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_DIAGNOSTICS } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { stdout: text, stderr: String::new(), code }
            } else {
                Outcome::diagnostics(text)
            };
        }
    };
    let (run, format) = match execute(cli.command) {
        Ok(r) => r,
        Err(o) => return o,
    };
    let doc = ReportDocument::new(run.command, run.inputs, run.window, run.result);
    let stdout = match format {
        Format::Json => doc.to_json(),
        Format::Table => doc.to_table(),
    };
    match run.failed {
        None => Outcome { stdout, stderr: String::new(), code: EXIT_OK },
        Some(msg) => Outcome { stdout, stderr: format!("invariant failure: {msg}\n"), code: EXIT_INVARIANT },
    }
}
