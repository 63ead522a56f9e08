//! `superdeform` command-line front end.
//!
//! Exit codes: 0 pass, 1 checked and failed (the report carries the residual
//! or witness), 2 usage, load or parse error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use superdeform::atlas::Atlas;
use superdeform::cech::solve_coboundary;
use superdeform::deform::{
    check_all, extract_ks, extract_obstruction, genus_warning, solve_splitting, verify_splitting,
};
use superdeform::format::{atlas_to_raw, load_document, render_text, splitting_to_raw, AtlasDocument};
use superdeform::identities::{verify_identity_suite, SUITES};
use superdeform::report::{Entry, Report};
use superdeform::superconformal::check_atlas_superconformal;
use superdeform::Error;

#[derive(Parser)]
#[command(name = "superdeform", version, about = "Exact checks for odd deformations of super Riemann surfaces")]
struct Cli {
    /// Also write the machine-readable report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cocycle, superconformality, intersection and cochain checks.
    Check {
        file: PathBuf,
        /// Only the superconformality relations.
        #[arg(long)]
        superconformal: bool,
    },
    /// Kodaira-Spencer cocycle of an atlas.
    Ks { file: PathBuf },
    /// Primary obstruction cocycle of an order-2 atlas.
    Obstruction { file: PathBuf },
    /// Build an atlas from the document's `construct` or `twist` directive.
    Build {
        kind: BuildKind,
        file: PathBuf,
        /// Write the built atlas here instead of standard output.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Solve for a splitting map and verify it.
    Split {
        file: PathBuf,
        /// Write the atlas with the solved splitting sections here.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Verify the document's `splitting` sections against its atlas.
    VerifySplitting { file: PathBuf },
    /// Solve a Čech coboundary equation on the model cover of the sphere.
    CechSolve {
        file: PathBuf,
        /// Line bundle degree k of O(k).
        #[arg(long, allow_hyphen_values = true)]
        twist: Option<i64>,
        /// Cochain section to solve; required when the file has several.
        #[arg(long)]
        cochain: Option<String>,
    },
    /// Run a symbolic identity suite (`all` runs every suite).
    VerifyIdentities {
        #[arg(long)]
        suite: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BuildKind {
    Construction,
    Twist,
}

enum Failure {
    Usage(String),
    Engine(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

type Run = Result<Report, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rep = match run(&cli.command) {
        Ok(r) => r,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(Failure::Engine(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    print!("{}", rep.render_human());
    if let Some(path) = &cli.json {
        if let Err(e) = std::fs::write(path, rep.to_json() + "\n") {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if rep.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cmd: &Command) -> Run {
    match cmd {
        Command::Check { file, superconformal } => {
            let a = load(file)?.resolve()?;
            let mut rep = if *superconformal { check_atlas_superconformal(&a)? } else { check_all(&a)? };
            rep.command = if *superconformal { "check --superconformal".into() } else { "check".into() };
            Ok(rep)
        }
        Command::Ks { file } => ks(&load(file)?.resolve()?),
        Command::Obstruction { file } => obstruction(&load(file)?.resolve()?),
        Command::Build { kind, file, out } => build(&load(file)?, *kind, out.as_deref()),
        Command::Split { file, out } => split(&load(file)?.resolve()?, out.as_deref()),
        Command::VerifySplitting { file } => {
            let doc = load(file)?;
            let s = doc.splitting.clone().ok_or_else(|| Failure::Usage("file has no splitting sections".into()))?;
            Ok(verify_splitting(&doc.resolve()?, &s)?)
        }
        Command::CechSolve { file, twist, cochain } => cech_solve(&load(file)?, *twist, cochain.as_deref()),
        Command::VerifyIdentities { suite } => {
            if suite == "all" {
                let mut rep = Report::new("verify-identities all");
                for id in SUITES {
                    rep.extend(verify_identity_suite(id)?);
                }
                Ok(rep)
            } else {
                Ok(verify_identity_suite(suite)?)
            }
        }
    }
}

fn load(path: &Path) -> Result<AtlasDocument, Failure> {
    Ok(load_document(path)?)
}

/// Checked-and-failed engine errors become failing reports with the
/// residuals of the failed check; anything else stays an error.
fn failed_check(command: &str, a: &Atlas, e: Error) -> Run {
    match e {
        Error::NotSuperconformal(_) | Error::NotACocycle(_) | Error::SpinRelationViolated(_) => {
            let mut rep = check_all(a)?;
            rep.command = command.into();
            rep.note(e.to_string());
            if rep.pass {
                // The error names a relation that check_all does not cover.
                rep.push(Entry::new("precondition", "atlas", None, e.to_string(), false));
            }
            Ok(rep)
        }
        Error::BracketObstruction(ref m) => {
            let mut rep = Report::new(command);
            let (loc, res) = m.split_once(": ").unwrap_or(("atlas", m));
            rep.push(Entry::new("delta-g-bracket", loc, None, res.to_string(), false));
            Ok(rep)
        }
        Error::ObstructionNonzero { stage, witness } => {
            let mut rep = Report::new(command);
            rep.push(Entry::new("obstruction", &format!("{stage:?}"), None, witness.render_witness(), false));
            rep.output("h1-witness", witness.residual().render());
            Ok(rep)
        }
        other => Err(other.into()),
    }
}

fn ks(a: &Atlas) -> Run {
    let k = match extract_ks(a) {
        Ok(k) => k,
        Err(e) => return failed_check("ks", a, e),
    };
    let mut rep = Report::new("ks");
    for (i, c) in k.components.iter().enumerate() {
        for (key, v) in &c.kappa.values {
            rep.output(&format!("kappa{}[{}]", i + 1, key.join("->")), v.render());
        }
    }
    rep.note(if k.is_zero() { "Kodaira-Spencer cocycle vanishes" } else { "Kodaira-Spencer cocycle is nonzero" });
    Ok(rep)
}

fn obstruction(a: &Atlas) -> Run {
    let o = match extract_obstruction(a) {
        Ok(o) => o,
        Err(e) => return failed_check("obstruction", a, e),
    };
    let mut rep = Report::new("obstruction");
    for ((u, v), _) in a.transitions() {
        rep.output(&format!("omega[{u}->{v}]"), o.render_pair(u, v));
    }
    for (i, c) in o.p_normalized.iter().enumerate() {
        rep.output(&format!("p-part-normalized{}", i + 1), c.render());
    }
    rep.output("iota-part", o.iota.render());
    Ok(rep)
}

fn build(doc: &AtlasDocument, kind: BuildKind, out: Option<&Path>) -> Run {
    let (name, built) = match kind {
        BuildKind::Construction => ("build construction", doc.construction()),
        BuildKind::Twist => ("build twist", doc.twisted()),
    };
    let a = match built {
        Ok(a) => a,
        Err(e) => return failed_check(name, doc.base_atlas()?, e),
    };
    let mut rep = check_all(&a)?;
    rep.command = name.into();
    emit(&render_text(&atlas_to_raw(&a)), out, &mut rep)?;
    Ok(rep)
}

fn emit(text: &str, out: Option<&Path>, rep: &mut Report) -> Result<(), Failure> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            rep.note(format!("wrote {}", p.display()));
        }
        None => rep.output("atlas", text.trim_end().to_string()),
    }
    Ok(())
}

fn split(a: &Atlas, out: Option<&Path>) -> Run {
    let warning = genus_warning(a);
    let s = match solve_splitting(a) {
        Ok(s) => s,
        Err(Error::UnsupportedCover(why)) if warning.is_some() => {
            let mut rep = check_all(a)?;
            rep.command = "split".into();
            rep.notes.insert(0, warning.unwrap_or_default());
            rep.note(format!("splitting solve not attempted: {why}"));
            rep.note("no claim is made about whether this atlas splits");
            return Ok(rep);
        }
        Err(e) => {
            let mut rep = failed_check("split", a, e)?;
            if let Some(w) = warning {
                rep.notes.insert(0, w);
            }
            return Ok(rep);
        }
    };
    let mut rep = verify_splitting(a, &s)?;
    rep.command = "split".into();
    if let Some(w) = warning {
        rep.note(w);
    }
    let mut raw = atlas_to_raw(a);
    raw.splittings = splitting_to_raw(&s);
    for sp in &raw.splittings {
        for (k, v) in &sp.entries {
            rep.output(&format!("{k}[{}]", sp.chart), v.clone());
        }
    }
    if s.is_identity() {
        rep.note("the atlas is already split; the splitting map is the identity");
    }
    if let Some(p) = out {
        emit(&render_text(&raw), Some(p), &mut rep)?;
    }
    Ok(rep)
}

fn cech_solve(doc: &AtlasDocument, twist: Option<i64>, name: Option<&str>) -> Run {
    let c = match name {
        Some(n) => doc.cochain(n)?,
        None => match doc.cochains.as_slice() {
            [c] => c,
            [] => return Err(Failure::Usage("file has no cochain section".into())),
            _ => return Err(Failure::Usage("file has several cochains; pick one with --cochain".into())),
        },
    };
    let k = match (twist, c.weight) {
        (Some(k), Some(w)) if k != w => {
            return Err(Failure::Usage(format!("--twist {k} disagrees with cochain weight {w}")));
        }
        (Some(k), _) | (None, Some(k)) => k,
        (None, None) => return Err(Failure::Usage("give --twist or a cochain weight".into())),
    };
    let z = c.to_cech(c.bundle(k))?;
    let cls = solve_coboundary(&z, z.bundle)?;
    let mut rep = Report::new(&format!("cech-solve --twist {k}"));
    rep.push(Entry::new("coboundary", &c.name, None, cls.residual().render(), cls.is_trivial()));
    rep.output("verdict", cls.render_witness());
    rep.output("trivializer", cls.trivializer.render());
    if !cls.is_trivial() {
        rep.output("h1-witness", cls.residual().render());
    }
    Ok(rep)
}
