//! Helpers shared by the integration tests.

#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use adapterforge::cli::{run_with, Env};

pub fn corpus() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

pub fn golden(name: &str) -> PathBuf {
    corpus().join("golden").join(name)
}

/// Copies one corpus case (a directory) into `into`, returning the copy.
pub fn copy_case(case: &str, into: &Path) -> PathBuf {
    let dst = into.join(case);
    copy_dir(&corpus().join(case), &dst);
    dst
}

fn copy_dir(src: &Path, dst: &Path) {
    fs::create_dir_all(dst).unwrap();
    for e in fs::read_dir(src).unwrap() {
        let e = e.unwrap();
        let to = dst.join(e.file_name());
        if e.file_type().unwrap().is_dir() {
            copy_dir(&e.path(), &to);
        } else {
            fs::copy(e.path(), to).unwrap();
        }
    }
}

pub struct Run {
    pub code: i32,
    pub out: String,
    pub err: String,
}

/// Runs the CLI in-process with no pool in the environment.
pub fn cli(args: &[&str]) -> Run {
    cli_env(args, &Env::default())
}

pub fn cli_env(args: &[&str], env: &Env) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("adapterforge").chain(args.iter().copied());
    let code = run_with(argv, env, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Compares `actual` with a frozen golden file. With
/// `ADAPTERFORGE_BLESS=1` the golden is rewritten instead.
pub fn assert_golden(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("ADAPTERFORGE_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, actual).unwrap();
        return;
    }
    let expect = fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("golden {}: {}", path.display(), e));
    assert_eq!(actual, expect, "output differs from golden {}", name);
}
