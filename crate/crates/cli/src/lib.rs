//! Command dispatch for the `nrw` binary, kept in a library so tests can
//! drive it in-process.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nrw::catalog::{self, DiffEntry};
use nrw::extension::{build_extension, compute_s, validate_extension_data};
use nrw::io::{self, BracketEntry, Term};
use nrw::lie::LieAlgebra;
use nrw::multilinear::{SkewMap, PRUNE_TOL};
use nrw::nomizu::{double_extension, nomizu_algebra, presentation_basis, structure_checks};
use nrw::{InfinitesimalModel, VerificationReport};
use serde_json::{json, Value};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_TOL: f64 = 1e-9;
pub const DIFF_HEADING: &str = "suspected transcription differences";

#[derive(Debug, Parser)]
#[command(name = "nrw", version, about = "Infinitesimal models of naturally reductive spaces")]
struct Cli {
    /// Residual tolerance (falls back to NRW_TOL, then 1e-9).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// JSON output (the default).
    #[arg(long, global = true, conflicts_with = "text")]
    json: bool,
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    text: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the Ambrose-Singer checks on a model file.
    Verify { path: PathBuf },
    /// Build the (k,B)-extension of a base model.
    Extend {
        base: PathBuf,
        ext: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Basis of the symmetry algebra s as 2-forms.
    SAlg {
        path: PathBuf,
        #[command(flatten)]
        isotropy: Isotropy,
    },
    /// Structure constants of the Nomizu algebra, or of the double extension.
    Nomizu {
        path: PathBuf,
        #[command(flatten)]
        isotropy: Isotropy,
        #[arg(long, value_name = "EXT")]
        double_extend: Option<PathBuf>,
    },
    /// Built-in examples.
    #[command(subcommand)]
    Catalog(CatalogCmd),
}

#[derive(Debug, Args)]
struct Isotropy {
    /// `auto` (im R) or a JSON file listing 2-forms.
    #[arg(long, default_value = "auto")]
    isotropy: String,
}

#[derive(Debug, Subcommand)]
enum CatalogCmd {
    List,
    Run {
        name: String,
        #[arg(long = "param", value_name = "K=V")]
        params: Vec<String>,
        /// Write the constructed model file here.
        #[arg(long, alias = "out", short = 'o')]
        export: Option<PathBuf>,
        /// Write the extension data (with inline base) here.
        #[arg(long)]
        export_ext: Option<PathBuf>,
    },
}

/// A command that could not run: bad input or a failed computation.
struct Abort {
    code: i32,
    msg: String,
}

impl Abort {
    fn usage(e: impl std::fmt::Display) -> Self {
        Abort { code: EXIT_USAGE, msg: e.to_string() }
    }

    fn fail(e: impl std::fmt::Display) -> Self {
        Abort { code: EXIT_FAIL, msg: e.to_string() }
    }
}

struct Ctx<'a> {
    tol: f64,
    text: bool,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn emit(&mut self, value: &Value, text: impl FnOnce() -> String) {
        let s = if self.text {
            text()
        } else {
            serde_json::to_string_pretty(value).expect("json value") + "\n"
        };
        let _ = self.out.write_all(s.as_bytes());
    }
}

/// Run the CLI on `args` (including the program name) and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            return if matches!(e.kind(), DisplayHelp | DisplayVersion | DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = write!(out, "{}", e.render());
                if e.kind() == DisplayHelpOnMissingArgumentOrSubcommand { EXIT_USAGE } else { EXIT_PASS }
            } else {
                let _ = write!(err, "{}", e.render());
                EXIT_USAGE
            };
        }
    };
    let tol = match resolve_tol(cli.tol, std::env::var("NRW_TOL").ok()) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut ctx = Ctx { tol, text: cli.text, out, err };
    let result = match cli.command {
        Command::Verify { path } => cmd_verify(&mut ctx, &path),
        Command::Extend { base, ext, out } => cmd_extend(&mut ctx, &base, &ext, out.as_deref()),
        Command::SAlg { path, isotropy } => cmd_s_alg(&mut ctx, &path, &isotropy.isotropy),
        Command::Nomizu { path, isotropy, double_extend } => {
            cmd_nomizu(&mut ctx, &path, &isotropy.isotropy, double_extend.as_deref())
        }
        Command::Catalog(CatalogCmd::List) => cmd_catalog_list(&mut ctx),
        Command::Catalog(CatalogCmd::Run { name, params, export, export_ext }) => {
            cmd_catalog_run(&mut ctx, &name, &params, export.as_deref(), export_ext.as_deref())
        }
    };
    match result {
        Ok(code) => code,
        Err(a) => {
            if a.code == EXIT_FAIL {
                let v = json!({ "error": a.msg, "pass": false });
                ctx.emit(&v, || format!("error: {}\npass: false\n", a.msg));
            }
            let _ = writeln!(ctx.err, "error: {}", a.msg);
            a.code
        }
    }
}

fn resolve_tol(flag: Option<f64>, env: Option<String>) -> Result<f64, String> {
    let tol = match (flag, env) {
        (Some(t), _) => t,
        (None, Some(s)) => s.trim().parse::<f64>().map_err(|_| format!("NRW_TOL is not a number: `{s}`"))?,
        (None, None) => DEFAULT_TOL,
    };
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(format!("tolerance must be positive and finite, got {tol}"))
    }
}

fn report_json(rep: &VerificationReport) -> Value {
    json!({
        "checks": rep.checks,
        "pass": rep.pass(),
        "tolerance": rep.tolerance,
    })
}

fn report_text(rep: &VerificationReport) -> String {
    let mut s = String::new();
    for c in &rep.checks {
        s += &format!("{:<24} {:>11.3e}  {}\n", c.name, c.residual, if c.pass { "PASS" } else { "FAIL" });
    }
    s
}

fn code(pass: bool) -> i32 {
    if pass { EXIT_PASS } else { EXIT_FAIL }
}

fn load_model(path: &Path) -> Result<InfinitesimalModel, Abort> {
    io::read_model(path).map_err(|e| Abort::usage(format!("{}: {e}", path.display())))
}

fn load_isotropy(arg: &str, model: &InfinitesimalModel) -> Result<Option<Vec<SkewMap>>, Abort> {
    if arg == "auto" {
        return Ok(None);
    }
    io::read_two_forms(Path::new(arg), model.dim()).map(Some).map_err(|e| Abort::usage(format!("{arg}: {e}")))
}

fn two_form_terms(a: &SkewMap) -> Vec<Term> {
    io::terms_from_form(&a.to_two_form())
}

fn brackets(alg: &LieAlgebra) -> Vec<BracketEntry> {
    let n = alg.dim();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let v = alg.bracket_basis(i, j);
            if v.amax() > PRUNE_TOL {
                let coeffs = v.iter().map(|&c| if c.abs() > PRUNE_TOL { c } else { 0.0 }).collect();
                out.push(BracketEntry { i: i + 1, j: j + 1, coeffs });
            }
        }
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<(), Abort> {
    std::fs::write(path, text).map_err(|e| Abort::usage(format!("{}: {e}", path.display())))
}

fn cmd_verify(ctx: &mut Ctx, path: &Path) -> Result<i32, Abort> {
    let model = load_model(path)?;
    let rep = model.verify(ctx.tol);
    ctx.emit(&report_json(&rep), || format!("{}pass: {}\n", report_text(&rep), rep.pass()));
    Ok(code(rep.pass()))
}

fn cmd_extend(ctx: &mut Ctx, base: &Path, ext: &Path, out: Option<&Path>) -> Result<i32, Abort> {
    let base = load_model(base)?;
    let data = io::read_extension(ext, Some(base)).map_err(|e| Abort::usage(format!("{}: {e}", ext.display())))?;
    let valid = validate_extension_data(&data, ctx.tol);
    if !valid.pass() {
        ctx.emit(&report_json(&valid), || format!("{}pass: false\n", report_text(&valid)));
        return Ok(EXIT_FAIL);
    }
    let model = build_extension(&data, ctx.tol).map_err(Abort::fail)?;
    let text = io::export_model(&model).map_err(Abort::fail)?;
    let rep = model.verify(ctx.tol);
    match out {
        Some(path) => {
            write_file(path, &text)?;
            ctx.emit(&report_json(&rep), || format!("{}pass: {}\n", report_text(&rep), rep.pass()));
        }
        None => {
            let _ = ctx.out.write_all(text.as_bytes());
            if !rep.pass() {
                let _ = writeln!(ctx.err, "extended model fails: {}", rep.failures().join(", "));
            }
        }
    }
    Ok(code(rep.pass()))
}

fn cmd_s_alg(ctx: &mut Ctx, path: &Path, isotropy: &str) -> Result<i32, Abort> {
    let model = load_model(path)?;
    let iso = load_isotropy(isotropy, &model)?;
    let s = compute_s(&model, iso.as_deref());
    let gens: Vec<Vec<Term>> = s.iter().map(two_form_terms).collect();
    let v = json!({ "dim": s.len(), "isotropy": isotropy, "generators": gens });
    let frame = model.frame.clone();
    ctx.emit(&v, || {
        let mut t = format!("dim s = {}\n", s.len());
        for a in &s {
            t += &format!("  {}\n", a.to_two_form().display(&frame));
        }
        t
    });
    Ok(EXIT_PASS)
}

fn cmd_nomizu(ctx: &mut Ctx, path: &Path, isotropy: &str, ext: Option<&Path>) -> Result<i32, Abort> {
    let model = load_model(path)?;
    let tol = ctx.tol;
    let (alg, rep) = match ext {
        Some(ext) => {
            let data =
                io::read_extension(ext, Some(model)).map_err(|e| Abort::usage(format!("{}: {e}", ext.display())))?;
            let g = double_extension(&data, tol).map_err(Abort::fail)?;
            let rep = structure_checks(&g, tol);
            (g, rep)
        }
        None => {
            let iso = match load_isotropy(isotropy, &model)? {
                Some(iso) => iso,
                None => model.image_of_r(tol).map_err(Abort::fail)?,
            };
            let g = nomizu_algebra(&model, &iso, tol).map_err(Abort::fail)?;
            let mut rep = VerificationReport::detached(tol);
            rep.push("jacobi", g.jacobi_residual());
            rep.push("reductive", g.reductivity_residual());
            (g, rep)
        }
    };
    let blocks: BTreeMap<&str, Vec<usize>> =
        alg.blocks.iter().map(|(n, ix)| (n.as_str(), ix.iter().map(|i| i + 1).collect())).collect();
    let br = brackets(&alg.algebra);
    let labels = alg.algebra.frame().labels().to_vec();
    let v = json!({
        "dim": alg.dim(),
        "labels": labels,
        "blocks": blocks,
        "isotropy": alg.isotropy,
        "brackets": br,
        "checks": rep.checks,
        "pass": rep.pass(),
        "tolerance": rep.tolerance,
    });
    ctx.emit(&v, || {
        let mut t = format!("dim = {}\n", alg.dim());
        for b in &br {
            let rhs: Vec<String> = b
                .coeffs
                .iter()
                .zip(&labels)
                .filter(|(c, _)| **c != 0.0)
                .map(|(c, l)| format!("{c:+}*{l}"))
                .collect();
            t += &format!("[{}, {}] = {}\n", labels[b.i - 1], labels[b.j - 1], rhs.join(" "));
        }
        t + &report_text(&rep) + &format!("pass: {}\n", rep.pass())
    });
    Ok(code(rep.pass()))
}

fn cmd_catalog_list(ctx: &mut Ctx) -> Result<i32, Abort> {
    let entries = catalog::list();
    let v = serde_json::to_value(&entries).expect("serializable");
    ctx.emit(&v, || {
        let mut t = String::new();
        for e in &entries {
            let ps: Vec<String> = e.params.iter().map(|p| format!("{}={}", p.name, p.default)).collect();
            t += &format!("{:<14} {:<36} {}\n", e.name, ps.join(" "), e.summary);
        }
        t
    });
    Ok(EXIT_PASS)
}

fn parse_params(raw: &[String]) -> Result<BTreeMap<String, f64>, Abort> {
    let mut out = BTreeMap::new();
    for p in raw {
        let (k, v) = p.split_once('=').ok_or_else(|| Abort::usage(format!("--param `{p}` is not K=V")))?;
        let x: f64 = v.trim().parse().map_err(|_| Abort::usage(format!("--param `{p}`: `{v}` is not a number")))?;
        out.insert(k.trim().to_string(), x);
    }
    Ok(out)
}

fn diff_text(diff: &[DiffEntry]) -> String {
    let mut t = format!("{DIFF_HEADING}: {}\n", diff.len());
    for d in diff {
        t += &format!("  {:<3} {:<28} constructed {:>12.6}  printed {:>12.6}\n", d.tensor, d.location, d.constructed, d.printed);
    }
    t
}

fn cmd_catalog_run(
    ctx: &mut Ctx,
    name: &str,
    raw: &[String],
    export: Option<&Path>,
    export_ext: Option<&Path>,
) -> Result<i32, Abort> {
    let params = parse_params(raw)?;
    let inst = catalog::instantiate(name, &params).map_err(Abort::usage)?;
    let tol = ctx.tol;
    let model_rep = inst.model.verify(tol);
    let g = double_extension(&inst.data, tol).map_err(Abort::fail)?;
    let structure = structure_checks(&g, tol);
    // Presentation needs a base of semisimple-times-flat type; report why when it does not apply.
    let (presentation, pres_pass, pres_text) = match presentation_basis(&inst.data, tol) {
        Ok(p) => {
            let lines: Vec<String> = (0..p.len()).map(|i| p.describe(i)).collect();
            let t = format!("presentation:\n{}{}", lines.iter().map(|l| format!("  {l}\n")).collect::<String>(), report_text(&p.report));
            let groups: BTreeMap<&str, Vec<usize>> =
                p.groups.iter().map(|(n, ix)| (n.as_str(), ix.iter().map(|i| i + 1).collect())).collect();
            let v = json!({
                "basis": lines,
                "groups": groups,
                "rotated": p.rotated,
                "checks": p.report.checks,
                "pass": p.report.pass(),
            });
            (v, p.report.pass(), t)
        }
        Err(e) => (json!({ "unavailable": e.to_string() }), true, format!("presentation: unavailable ({e})\n")),
    };
    if let Some(path) = export {
        write_file(path, &io::export_model(&inst.model).map_err(Abort::fail)?)?;
    }
    if let Some(path) = export_ext {
        write_file(path, &io::export_extension(&inst.data).map_err(Abort::fail)?)?;
    }
    let pass = model_rep.pass() && structure.pass() && pres_pass;
    let v = json!({
        "entry": inst.entry.name,
        "params": inst.params,
        "dim": inst.model.dim(),
        "model": report_json(&model_rep),
        "structure": report_json(&structure),
        "presentation": presentation,
        "notes": inst.entry.notes,
        "suspected_transcription_differences": inst.diff,
        "pass": pass,
    });
    ctx.emit(&v, || {
        let ps: Vec<String> = inst.params.iter().map(|(k, x)| format!("{k}={x}")).collect();
        format!(
            "{} ({}), dim {}\nmodel checks:\n{}structure checks:\n{}{}{}pass: {pass}\n",
            inst.entry.name,
            ps.join(", "),
            inst.model.dim(),
            report_text(&model_rep),
            report_text(&structure),
            pres_text,
            diff_text(&inst.diff)
        )
    });
    Ok(code(pass))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_resolution() {
        assert_eq!(resolve_tol(None, None), Ok(1e-9));
        assert_eq!(resolve_tol(None, Some("1e-6".into())), Ok(1e-6));
        assert_eq!(resolve_tol(Some(1e-3), Some("1e-6".into())), Ok(1e-3));
        assert!(resolve_tol(None, Some("abc".into())).is_err());
        assert!(resolve_tol(Some(-1.0), None).is_err());
    }

    #[test]
    fn params_parse() {
        let p = parse_params(&["lambda=2".into(), " mu = -1.5".into()]).ok().unwrap();
        assert_eq!(p["lambda"], 2.0);
        assert_eq!(p["mu"], -1.5);
        assert!(parse_params(&["lambda".into()]).is_err());
        assert!(parse_params(&["lambda=x".into()]).is_err());
    }
}
