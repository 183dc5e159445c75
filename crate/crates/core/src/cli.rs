//! Command-line front end. [`run`] never exits the process; the binary maps
//! the returned [`Outcome`] to stdout/stderr and an exit status.
//!
//! Exit statuses: 0 success, 1 a check failed, 2 usage or parse error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::canonical::reduce_to_canonical;
use crate::catalog::{identify, table_entries};
use crate::document::AlgebraDocument;
use crate::error::Error;
use crate::family::{sample_params, ExtensionFamily, FieldFlag, DEFAULT_SEED};
use crate::jacobi::{check_family, lemma1_family, xnn_system};
use crate::liecore::{center_dim, central_series_of, check_jacobi, derived_series, is_solvable, LieAlgebra};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "trilie", version, about = "Solvable Lie algebras with triangular nilradical T(n)")]
pub struct Cli {
    /// Ground field for normalizations (R or C)
    #[arg(long, global = true)]
    pub field: Option<FieldFlag>,
    /// Seed for generic parameter samples
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Number of parameter samples per symbolic check
    #[arg(long, global = true, default_value_t = 3)]
    pub samples: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write resulting documents into this directory
    #[arg(long, global = true)]
    pub emit: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structure constants of T(n)
    Construct { n: usize },
    /// Check a document: antisymmetry, Jacobi, f range, commutativity, nilindependence, sigma support, NR bound
    Verify { path: PathBuf },
    /// List the classification of L(n,f)
    Classify { n: usize, f: usize },
    /// Bring a family to canonical form and identify it
    Reduce { path: PathBuf },
    /// Derived series, central series of the nilradical, center, NR bound
    Invariants { path: PathBuf },
    /// Dump the [X, N_a, N_b] linear system and its nullspace dimension
    SolveJacobi { n: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { code: 0, stdout, stderr: String::new() }
    }

    fn with_code(code: i32, stdout: String) -> Self {
        Outcome { code, stdout, stderr: String::new() }
    }

    fn usage(msg: impl Into<String>) -> Self {
        Outcome { code: 2, stdout: String::new(), stderr: terminated(msg.into()) }
    }

    fn failure(msg: impl Into<String>) -> Self {
        Outcome { code: 1, stdout: String::new(), stderr: terminated(msg.into()) }
    }
}

fn terminated(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

/// Parse errors and bad sizes are usage errors; everything else is a failed check.
fn from_error(e: Error) -> Outcome {
    match e {
        Error::Document(_) | Error::ExprParse { .. } | Error::ScalarParse(_) | Error::SizeTooSmall { .. } => {
            Outcome::usage(format!("error: {e}"))
        }
        Error::InvalidPair { .. } | Error::IndexOutOfRange { .. } => Outcome::usage(format!("error: {e}")),
        other => Outcome::failure(format!("error: {other}")),
    }
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome::ok(text),
                _ => Outcome::usage(text),
            };
        }
    };
    execute(&cli)
}

pub fn execute(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Construct { n } => construct(cli, *n),
        Command::Verify { path } => verify(cli, path),
        Command::Classify { n, f } => classify(cli, *n, *f),
        Command::Reduce { path } => reduce_cmd(cli, path),
        Command::Invariants { path } => invariants(cli, path),
        Command::SolveJacobi { n } => solve_jacobi(cli, *n),
    }
}

fn load(path: &Path) -> Result<AlgebraDocument, Outcome> {
    let text = fs::read_to_string(path).map_err(|e| Outcome::usage(format!("error: {}: {e}", path.display())))?;
    AlgebraDocument::parse(&text).map_err(|e| Outcome::usage(format!("error: {}: {e}", path.display())))
}

fn emit(cli: &Cli, file: &str, doc: &AlgebraDocument) -> Result<Option<PathBuf>, Outcome> {
    let Some(dir) = &cli.emit else { return Ok(None) };
    let err = |e: std::io::Error| Outcome::failure(format!("error: cannot write to {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(err)?;
    let path = dir.join(file);
    fs::write(&path, doc.to_json() + "\n").map_err(err)?;
    Ok(Some(path))
}

/// `K_{1,4}` → `K_1_4.json`.
pub fn file_name(name: &str) -> String {
    let mut s: String =
        name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect();
    while s.contains("__") {
        s = s.replace("__", "_");
    }
    format!("{}.json", s.trim_matches('_'))
}

fn render_family(fam: &ExtensionFamily) -> String {
    let o = fam.order();
    let mut out = String::new();
    for (a, m) in fam.matrices.iter().enumerate() {
        let diag: Vec<String> = m.diagonal().iter().map(ToString::to_string).collect();
        let _ = write!(out, "  A{}: diag({})", a + 1, diag.join(", "));
        for (x, y, e) in m.off_diagonal() {
            let _ = write!(out, "  ({},{}) = {e}", o.pair(x).label(), o.pair(y).label());
        }
        out.push('\n');
    }
    for (a, b, p, e) in fam.sigma.entries() {
        let _ = writeln!(out, "  [X{}, X{}] = ({e}) N{}", a + 1, b + 1, o.pair(p).label());
    }
    out
}

fn construct(cli: &Cli, n: usize) -> Outcome {
    let doc = match AlgebraDocument::from_tn(n) {
        Ok(d) => d,
        Err(e) => return from_error(e),
    };
    let emitted = match emit(cli, &format!("T{n}.json"), &doc) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let s = doc.structure.as_ref().expect("T(n) documents carry structure");
    let mut out = match cli.format {
        Format::Json => doc.to_json() + "\n",
        Format::Text => {
            let mut t = format!("T({n}): dim {}, {} nonzero brackets\n", s.basis.len(), s.brackets.len());
            for (x, y, z, c) in &s.brackets {
                let coeff = if c == "1/1" { String::new() } else { format!("{c} ") };
                let _ = writeln!(t, "  [{x}, {y}] = {coeff}{z}");
            }
            t
        }
    };
    if let (Some(p), Format::Text) = (emitted, cli.format) {
        let _ = writeln!(out, "wrote {}", p.display());
    }
    Outcome::ok(out)
}

struct Line {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn report(cli: &Cli, lines: &[Line]) -> Outcome {
    let passed = lines.iter().all(|l| l.passed);
    let out = match cli.format {
        Format::Json => {
            let checks: Vec<_> =
                lines.iter().map(|l| json!({"name": l.name, "passed": l.passed, "detail": l.detail})).collect();
            serde_json::to_string_pretty(&json!({"passed": passed, "checks": checks})).unwrap() + "\n"
        }
        Format::Text => {
            let mut t = String::new();
            for l in lines {
                let _ = writeln!(t, "{} {:<17} {}", if l.passed { "PASS" } else { "FAIL" }, l.name, l.detail);
            }
            let _ = writeln!(t, "result: {}", if passed { "PASS" } else { "FAIL" });
            t
        }
    };
    Outcome::with_code(i32::from(!passed), out)
}

fn verify(cli: &Cli, path: &Path) -> Outcome {
    let doc = match load(path) {
        Ok(d) => d,
        Err(o) => return o,
    };
    let mut lines = Vec::new();
    let mut push = |name, passed, detail: String| lines.push(Line { name, passed, detail });

    if doc.structure.is_some() {
        let bad = doc.antisymmetry_violations();
        push("antisymmetry", bad.is_empty(), if bad.is_empty() { "consistent".into() } else { bad.join("; ") });
        if !bad.is_empty() {
            return report(cli, &lines);
        }
        let alg = match doc.to_algebra() {
            Ok(a) => a,
            Err(e) => return from_error(e),
        };
        let rep = check_jacobi(&alg);
        push("jacobi", rep.is_ok(), if rep.is_ok() { "holds".into() } else { rep.describe(&alg) });
        if doc.f > 0 && rep.is_ok() {
            match ExtensionFamily::from_algebra(doc.n, doc.f, doc.field, &alg) {
                Ok(fam) => family_lines(cli, &fam, &mut push),
                Err(e) => push("structure", false, e.to_string()),
            }
        }
        return report(cli, &lines);
    }

    let max = doc.n.saturating_sub(1);
    if doc.f == 0 || doc.f > max {
        let msg = Error::FOutOfRange { n: doc.n, f: doc.f, max }.to_string();
        push("f-range", false, msg);
        return report(cli, &lines);
    }
    push("f-range", true, format!("1 <= f = {} <= n-1 = {max}", doc.f));
    let fam = match doc.to_family() {
        Ok(f) => f,
        Err(Error::Antisymmetry(a)) => {
            push("antisymmetry", false, format!("[X{0}, X{0}] must vanish", a + 1));
            return report(cli, &lines);
        }
        Err(e) => return from_error(e),
    };
    push("antisymmetry", true, "built in by construction".into());
    let fam = match doc.bindings().and_then(|b| fam.bind(&b)) {
        Ok(f) => f,
        Err(e) => return from_error(e),
    };
    family_lines(cli, &fam, &mut push);
    report(cli, &lines)
}

fn family_lines(cli: &Cli, fam: &ExtensionFamily, push: &mut impl FnMut(&'static str, bool, String)) {
    match check_family(fam, cli.samples, cli.seed) {
        Ok(checks) => {
            for c in checks.checks {
                push(c.name, c.passed, c.detail);
            }
        }
        Err(e) => push("assembly", false, e.to_string()),
    }
}

fn classify(cli: &Cli, n: usize, f: usize) -> Outcome {
    let field = cli.field.unwrap_or(FieldFlag::Real);
    let entries = match table_entries(n, f, field) {
        Ok(e) => e,
        Err(Error::Unsupported(msg)) => {
            let mut out = format!("L({n},{f}): {msg}\n");
            if let Ok(fam) = lemma1_family(n, f) {
                let _ = writeln!(out, "general slot form ({} parameters):", fam.variables().len());
                out.push_str(&render_family(&fam));
            }
            return Outcome::with_code(1, out);
        }
        Err(e @ (Error::FOutOfRange { .. } | Error::SizeTooSmall { .. })) => {
            return Outcome::usage(format!("error: {e}"))
        }
        Err(e) => return from_error(e),
    };
    let docs: Vec<AlgebraDocument> =
        entries.iter().map(|e| AlgebraDocument::from_family(&e.family, Some(&e.name))).collect();
    let mut written = Vec::new();
    for (e, d) in entries.iter().zip(&docs) {
        match emit(cli, &file_name(&e.name), d) {
            Ok(Some(p)) => written.push(p),
            Ok(None) => {}
            Err(o) => return o,
        }
    }
    let out = match cli.format {
        Format::Json => serde_json::to_string_pretty(&docs).unwrap() + "\n",
        Format::Text => {
            let noun = if entries.len() == 1 { "family" } else { "families" };
            let mut t = format!("L({n},{f}) over {field}: {} {noun}\n", entries.len());
            for e in &entries {
                let params: Vec<String> = e.params().iter().map(|p| match p.domain {
                    crate::family::ParamDomain::Any => p.name.clone(),
                    crate::family::ParamDomain::Nonzero => format!("{} != 0", p.name),
                }).collect();
                let tag = if e.real_only { "  (real form)" } else { "" };
                let _ = writeln!(t, "{}  parameters: {}{tag}", e.name, params.len());
                if !params.is_empty() {
                    let _ = writeln!(t, "  ({})", params.join(", "));
                }
                t.push_str(&render_family(&e.family));
            }
            for p in &written {
                let _ = writeln!(t, "wrote {}", p.display());
            }
            t
        }
    };
    Outcome::ok(out)
}

fn reduce_cmd(cli: &Cli, path: &Path) -> Outcome {
    let doc = match load(path) {
        Ok(d) => d,
        Err(o) => return o,
    };
    let fam = match doc.to_family().and_then(|f| doc.bindings().and_then(|b| f.bind(&b))) {
        Ok(f) => f,
        Err(e) => return from_error(e),
    };
    let field = cli.field.unwrap_or(doc.field);
    let red = match reduce_to_canonical(&fam, field) {
        Ok(r) => r,
        Err(e) => return from_error(e),
    };
    let mut canon = red.family.clone();
    canon.field = field;
    let ident = match identify(&canon, field) {
        Ok(i) => i,
        Err(e) => return from_error(e),
    };
    let mut out_doc = AlgebraDocument::from_family(&canon, ident.as_ref().map(|i| i.name.as_str()));
    out_doc.transform_log = Some(red.log.iter().map(ToString::to_string).collect());
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("family");
    let emitted = match emit(cli, &format!("{stem}.canonical.json"), &out_doc) {
        Ok(p) => p,
        Err(o) => return o,
    };
    let out = match cli.format {
        Format::Json => out_doc.to_json() + "\n",
        Format::Text => {
            let mut t = String::from("transformations:\n");
            if red.log.is_empty() {
                t.push_str("  (none: already canonical)\n");
            }
            for step in &red.log {
                let _ = writeln!(t, "  {step}");
            }
            let _ = writeln!(t, "canonical form over {field}:");
            t.push_str(&render_family(&canon));
            match &ident {
                Some(i) => {
                    let vals: Vec<String> = i.values.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                    let perm = if i.permutation.iter().enumerate().all(|(a, &b)| a == b) {
                        String::new()
                    } else {
                        let p: Vec<String> = i.permutation.iter().map(|b| format!("X{}", b + 1)).collect();
                        format!(" with generators reordered as ({})", p.join(", "))
                    };
                    let _ = writeln!(t, "identified: {}{}{perm}", i.name, if vals.is_empty() { String::new() } else { format!(" ({})", vals.join(", ")) });
                }
                None => t.push_str("identified: no stored table covers this (n, f)\n"),
            }
            if let Some(p) = emitted {
                let _ = writeln!(t, "wrote {}", p.display());
            }
            t
        }
    };
    Outcome::ok(out)
}

fn invariants(cli: &Cli, path: &Path) -> Outcome {
    let doc = match load(path) {
        Ok(d) => d,
        Err(o) => return o,
    };
    let mut values = match doc.bindings() {
        Ok(v) => v,
        Err(e) => return from_error(e),
    };
    let mut sampled = BTreeMap::new();
    if doc.is_family() {
        let fam = match doc.to_family() {
            Ok(f) => f,
            Err(e) => return from_error(e),
        };
        let free: Vec<_> = fam.all_params().into_iter().filter(|p| !values.contains_key(&p.name)).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
        sampled = sample_params(&free, &mut rng);
        values.extend(sampled.clone());
    }
    let alg = match doc.to_algebra_with(&values) {
        Ok(a) => a,
        Err(e) => return from_error(e),
    };
    let f = if doc.structure.is_some() && doc.f == 0 { 0 } else { doc.f };
    Outcome::ok(render_invariants(cli, &alg, f, &sampled))
}

fn render_invariants(cli: &Cli, alg: &LieAlgebra, f: usize, sampled: &BTreeMap<String, Scalar>) -> String {
    let dim = alg.dim();
    let nr_basis: Vec<_> = alg.unit_basis().into_iter().skip(f).collect();
    let nr = dim - f;
    let derived = derived_series(alg);
    let central = central_series_of(alg, &nr_basis);
    let center = center_dim(alg);
    let solvable = is_solvable(alg);
    let bound = 2 * nr >= dim;
    let samples: BTreeMap<String, String> = sampled.iter().map(|(k, v)| (k.clone(), v.to_string())).collect();
    match cli.format {
        Format::Json => {
            serde_json::to_string_pretty(&json!({
                "dim": dim,
                "derived_series": derived,
                "nilradical_dim": nr,
                "nilradical_central_series": central,
                "center_dim": center,
                "solvable": solvable,
                "nilradical_bound": bound,
                "sampled_parameters": samples,
            }))
            .unwrap()
                + "\n"
        }
        Format::Text => {
            let list = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
            let mut t = String::new();
            let _ = writeln!(t, "dim: {dim}");
            let _ = writeln!(t, "derived series: ({})", list(&derived));
            let _ = writeln!(t, "nilradical dim: {nr}");
            let _ = writeln!(t, "central series of nilradical: ({})", list(&central));
            let _ = writeln!(t, "center dim: {center}");
            let _ = writeln!(t, "solvable: {solvable}");
            let _ = writeln!(
                t,
                "dim NR >= dim L / 2: {nr} >= {dim}/2 {}",
                if bound { "holds" } else { "FAILS" }
            );
            if !samples.is_empty() {
                let s: Vec<String> = samples.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                let _ = writeln!(t, "sampled parameters (seed {}): {}", cli.seed, s.join(", "));
            }
            t
        }
    }
}

fn solve_jacobi(cli: &Cli, n: usize) -> Outcome {
    let sys = match xnn_system(n) {
        Ok(s) => s,
        Err(e) => return from_error(e),
    };
    let eqs: Vec<String> = sys.rows().map(|r| sys.format_row(r)).collect();
    let dim = sys.nullspace_dim();
    let out = match cli.format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "n": n,
            "unknowns": sys.num_unknowns(),
            "equations": eqs,
            "nullspace_dim": dim,
        }))
        .unwrap()
            + "\n",
        Format::Text => {
            let mut t = format!("[X, N_a, N_b] system for n = {n}: {} unknowns, {} equations\n", sys.num_unknowns(), eqs.len());
            for e in &eqs {
                let _ = writeln!(t, "  {e}");
            }
            let _ = writeln!(t, "nullspace dimension: {dim}");
            t
        }
    };
    Outcome::ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Outcome {
        run(std::iter::once("trilie").chain(args.iter().copied()))
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_args(&["construct", "2"]).code, 2);
        assert_eq!(run_args(&["bogus"]).code, 2);
        assert_eq!(run_args(&["classify", "4", "4"]).code, 2);
        assert_eq!(run_args(&["--field", "Q", "classify", "4", "1"]).code, 2);
        assert_eq!(run_args(&["verify", "/nonexistent/file.json"]).code, 2);
    }

    #[test]
    fn construct_and_solve() {
        let o = run_args(&["construct", "4"]);
        assert_eq!(o.code, 0);
        assert!(o.stdout.starts_with("T(4): dim 6, 4 nonzero brackets"));
        let o = run_args(&["solve-jacobi", "4", "--format", "json"]);
        let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
        assert_eq!(v["nullspace_dim"], 11);
    }

    #[test]
    fn classify_counts() {
        let count = |args: &[&str]| {
            let o = run_args(args);
            let v: Vec<serde_json::Value> = serde_json::from_str(&o.stdout).unwrap();
            v.len()
        };
        assert_eq!(count(&["classify", "4", "1", "--field", "C", "--format", "json"]), 12);
        assert_eq!(count(&["classify", "4", "1", "--field", "R", "--format", "json"]), 13);
        assert_eq!(count(&["classify", "6", "5", "--format", "json"]), 1);
        let o = run_args(&["classify", "5", "2"]);
        assert_eq!(o.code, 1);
        assert!(o.stdout.contains("general slot form"));
    }

    #[test]
    fn file_names() {
        assert_eq!(file_name("K_{1,4}"), "K_1_4.json");
        assert_eq!(file_name("L(5,1).3"), "L_5_1_3.json");
    }
}
