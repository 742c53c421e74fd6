//! Command-line front end. [`run`] is the binary's entry point; [`run_with`]
//! is the same thing with injectable streams and environment for tests.
//!
//! Exit codes: `check` 0 all exact, 1 adaptable, 2 incompatible or unmet
//! demand; `adapt` 0 already exact, 1 adapted, 2 unresolvable; `pool verify`
//! 2 when anything is found; `fmt --check` 1 when the file is not
//! canonical. Every error exits 3.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use adapterforge_core::adapter_gen::{check_template, DEFAULT_TEMPLATE};
use adapterforge_core::analyser::{analyse, ConversionTable, Demand, DemandOrigin, OpShape, Scoring};
use adapterforge_core::aslt::{build_aslt, build_component_aslt, fold, FoldPattern};
use adapterforge_core::spec_lang::{
    parse_document, parse_operation, serialize, ConceptId, SpecDocument, VersionConstraint,
};
use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::formats::{canonical_json, default_conversions, load_conversions, parse_descriptor};
use crate::linkage::{run_workflow, write_outputs, Outcome};
use crate::pool::{resolve_root, Pool, PoolDoc, ENV_POOL};
use crate::report::{render_match_report, render_workflow, Format};
use crate::specs::{load_component, load_project, load_spec_dirs, read_text};

pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "adapterforge", version, about = "Component adaptation toolchain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyse a project without changing anything.
    Check(CheckArgs),
    /// Run the full adaptation workflow.
    Adapt(AdaptArgs),
    /// Administer the component pool.
    #[command(subcommand)]
    Pool(PoolCommand),
    /// Inspect element trees.
    #[command(subcommand)]
    Aslt(AsltCommand),
    /// Print a spec file in canonical form.
    Fmt(FmtArgs),
}

#[derive(Debug, Args)]
pub struct SpecArgs {
    /// Directory of `.cdl` files; repeatable. Defaults to the project's
    /// directory.
    #[arg(long = "specs", value_name = "DIR")]
    pub specs: Vec<PathBuf>,
    /// Conversion table file. Defaults to lossless numeric widening.
    #[arg(long, value_name = "FILE")]
    pub conversions: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PoolArg {
    /// Pool directory; falls back to $ADAPTERFORGE_POOL.
    #[arg(long, value_name = "DIR")]
    pub pool: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub project: PathBuf,
    #[command(flatten)]
    pub spec: SpecArgs,
    #[arg(long, value_enum, default_value = "human")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AdaptArgs {
    pub project: PathBuf,
    #[command(flatten)]
    pub spec: SpecArgs,
    #[command(flatten)]
    pub pool: PoolArg,
    #[arg(long, value_enum, default_value = "human")]
    pub format: Format,
    /// Output directory. Defaults to the project's directory.
    #[arg(long, value_name = "DIR")]
    pub emit: Option<PathBuf>,
    /// Also write a source stub per adapter using the built-in template.
    #[arg(long)]
    pub stub: bool,
    /// Write source stubs using this template.
    #[arg(long, value_name = "FILE", conflicts_with = "stub")]
    pub template: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum PoolCommand {
    /// Store `.cdl` components or `.adapter` descriptors.
    Add {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[command(flatten)]
        pool: PoolArg,
    },
    /// Rank stored documents against a demanded concept.
    Query {
        concept: String,
        /// Demanded operation signature, e.g.
        /// `@concept(data.sort) op sort(xs: list<i32>) -> list<i32>;`
        #[arg(long, value_name = "SIG")]
        op: Option<String>,
        /// Version constraint: `*`, `=X.Y.Z` or `>=X.Y.Z`.
        #[arg(long, value_name = "CONSTRAINT")]
        version: Option<String>,
        /// Conversion table file. Defaults to lossless numeric widening.
        #[arg(long, value_name = "FILE")]
        conversions: Option<PathBuf>,
        #[command(flatten)]
        pool: PoolArg,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Print every stored entry.
    List {
        #[command(flatten)]
        pool: PoolArg,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
    /// Re-hash every stored file.
    Verify {
        #[command(flatten)]
        pool: PoolArg,
        #[arg(long, value_enum, default_value = "human")]
        format: Format,
    },
}

#[derive(Debug, Subcommand)]
pub enum AsltCommand {
    /// Print the tree of a project or component file.
    Dump {
        file: PathBuf,
        /// Directory of `.cdl` files for a project; repeatable.
        #[arg(long = "specs", value_name = "DIR")]
        specs: Vec<PathBuf>,
        /// Hide nodes matching `kind`, `kind:glob` or `:glob`.
        #[arg(long, value_name = "KIND")]
        fold: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct FmtArgs {
    pub file: PathBuf,
    /// Print nothing; exit 1 if the file is not canonical.
    #[arg(long)]
    pub check: bool,
}

/// Process environment the CLI reads.
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub pool: Option<OsString>,
}

impl Env {
    pub fn from_process() -> Env {
        Env {
            pool: std::env::var_os(ENV_POOL),
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &Env::from_process(), &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, env: &Env, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e);
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e);
                    EXIT_ERROR
                }
            };
        }
    };
    match dispatch(cli.command, env, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e);
            EXIT_ERROR
        }
    }
}

fn parent_dir(p: &Path) -> PathBuf {
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn spec_dirs(project: &Path, given: &[PathBuf]) -> Vec<PathBuf> {
    if given.is_empty() {
        vec![parent_dir(project)]
    } else {
        given.to_vec()
    }
}

fn table(path: Option<&Path>) -> Result<ConversionTable> {
    match path {
        Some(p) => load_conversions(p),
        None => Ok(default_conversions()),
    }
}

fn pool_from(arg: &PoolArg, env: &Env) -> Result<Pool> {
    resolve_root(arg.pool.as_deref(), env.pool.as_deref())
        .map(Pool::open)
        .ok_or_else(|| Error::Usage(format!("no pool given: pass --pool or set {}", ENV_POOL)))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn dispatch(cmd: Command, env: &Env, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Check(a) => cmd_check(a, out),
        Command::Adapt(a) => cmd_adapt(a, env, out),
        Command::Pool(p) => cmd_pool(p, env, out, err),
        Command::Aslt(AsltCommand::Dump { file, specs, fold }) => cmd_dump(&file, &specs, fold, out),
        Command::Fmt(a) => cmd_fmt(a, out, err),
    }
}

fn cmd_check(a: CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let project = load_project(&a.project)?;
    let components = load_spec_dirs(&spec_dirs(&a.project, &a.spec.specs))?;
    let table = table(a.spec.conversions.as_deref())?;
    let tree = build_aslt(&project, &components)?;
    let report = analyse(&tree, &project, &components, &table, &Scoring::default())?;
    emit(out, &render_match_report(&report, a.format))?;
    Ok(if report.any_incompatible() || !report.demands.is_empty() {
        2
    } else if report.all_exact() {
        0
    } else {
        1
    })
}

fn cmd_adapt(a: AdaptArgs, env: &Env, out: &mut dyn Write) -> Result<i32> {
    let template = match (&a.template, a.stub) {
        (Some(p), _) => Some(read_text(p)?),
        (None, true) => Some(DEFAULT_TEMPLATE.to_string()),
        (None, false) => None,
    };
    if let Some(t) = &template {
        check_template(t)?;
    }
    let pool = pool_from(&a.pool, env)?;
    let table = table(a.spec.conversions.as_deref())?;
    let dirs = spec_dirs(&a.project, &a.spec.specs);
    let result = run_workflow(&a.project, &dirs, &pool, &table, &Scoring::default())?;
    let dir = a.emit.clone().unwrap_or_else(|| parent_dir(&a.project));
    let stem = a
        .project
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("project");
    write_outputs(&result, &dir, stem, template.as_deref())?;
    emit(out, &render_workflow(&result, a.format))?;
    Ok(match result.outcome {
        Outcome::AlreadyExact => 0,
        Outcome::Adapted => 1,
        Outcome::Unresolvable { .. } => 2,
    })
}

fn load_pool_doc(path: &Path) -> Result<PoolDoc> {
    if path.extension().is_some_and(|e| e == crate::formats::DESCRIPTOR_EXT) {
        let text = read_text(path)?;
        Ok(PoolDoc::Adapter(parse_descriptor(&text, path)?))
    } else {
        Ok(PoolDoc::Component(load_component(path)?))
    }
}

fn cmd_pool(cmd: PoolCommand, env: &Env, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match cmd {
        PoolCommand::Add { files, pool } => {
            let pool = pool_from(&pool, env)?;
            for f in &files {
                let fp = pool.add(&load_pool_doc(f)?)?;
                emit(out, &format!("{} {}\n", fp, f.display()))?;
            }
            Ok(0)
        }
        PoolCommand::Query {
            concept,
            op,
            version,
            conversions,
            pool,
            format,
        } => {
            let pool = pool_from(&pool, env)?;
            let concept = ConceptId::parse(&concept)
                .ok_or_else(|| Error::Usage(format!("`{}` is not a concept id", concept)))?;
            let shape = match op {
                Some(sig) => {
                    let op = parse_operation(&sig).map_err(|e| Error::Parse {
                        path: "--op".into(),
                        err: e,
                    })?;
                    if op.concept != concept {
                        return Err(Error::Usage(format!(
                            "--op has concept {}, query is for {}",
                            op.concept, concept
                        )));
                    }
                    Some(OpShape::of(&op))
                }
                None => None,
            };
            let constraint = match version {
                Some(v) => Some(
                    VersionConstraint::parse(&v)
                        .ok_or_else(|| Error::Usage(format!("bad version constraint `{}`", v)))?,
                ),
                None => None,
            };
            let demand = Demand {
                concept,
                shape,
                origin: DemandOrigin::Project,
            };
            let hits = pool.query(
                &demand,
                constraint.as_ref(),
                &table(conversions.as_deref())?,
                &Scoring::default(),
            )?;
            match format {
                Format::Human => {
                    for h in &hits {
                        emit(
                            out,
                            &format!("{} {} {}\n", h.fingerprint, h.score.to_decimal(3), h.name),
                        )?;
                    }
                }
                Format::Structured => emit(out, &canonical_json(&hits))?,
            }
            Ok(0)
        }
        PoolCommand::List { pool, format } => {
            let pool = pool_from(&pool, env)?;
            let entries = pool.list()?;
            match format {
                Format::Human => {
                    for (fp, e) in &entries {
                        emit(out, &format!("{} {} {}@{}\n", fp, e.kind, e.name, e.version))?;
                    }
                }
                Format::Structured => {
                    let map: std::collections::BTreeMap<_, _> = entries.into_iter().collect();
                    emit(out, &canonical_json(&map))?
                }
            }
            Ok(0)
        }
        PoolCommand::Verify { pool, format } => {
            let pool = pool_from(&pool, env)?;
            let findings = pool.verify()?;
            match format {
                Format::Human => {
                    for f in &findings {
                        emit(out, &format!("{}\n", f))?;
                    }
                }
                Format::Structured => emit(out, &canonical_json(&findings))?,
            }
            if !findings.is_empty() {
                let _ = writeln!(err, "{} finding(s)", findings.len());
            }
            Ok(if findings.is_empty() { 0 } else { 2 })
        }
    }
}

fn parse_file(path: &Path) -> Result<SpecDocument> {
    let text = read_text(path)?;
    parse_document(&text).map_err(|e| Error::Parse {
        path: path.into(),
        err: e,
    })
}

fn cmd_dump(file: &Path, specs: &[PathBuf], pattern: Option<String>, out: &mut dyn Write) -> Result<i32> {
    let tree = match parse_file(file)? {
        SpecDocument::Component(_) => build_component_aslt(&load_component(file)?),
        SpecDocument::Project(_) => {
            let project = load_project(file)?;
            let components = load_spec_dirs(&spec_dirs(file, specs))?;
            build_aslt(&project, &components)?
        }
    };
    let text = match pattern {
        Some(p) => {
            let pat = FoldPattern::parse(&p)
                .ok_or_else(|| Error::Usage(format!("bad fold pattern `{}`", p)))?;
            fold(&tree, &pat).dump()
        }
        None => tree.dump(),
    };
    emit(out, &text)?;
    Ok(0)
}

fn cmd_fmt(a: FmtArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let text = read_text(&a.file)?;
    let doc = parse_document(&text).map_err(|e| Error::Parse {
        path: a.file.clone(),
        err: e,
    })?;
    let canon = serialize(&doc);
    if a.check {
        if canon == text {
            return Ok(0);
        }
        let _ = writeln!(err, "{}: not in canonical form", a.file.display());
        return Ok(1);
    }
    emit(out, &canon)?;
    Ok(0)
}
