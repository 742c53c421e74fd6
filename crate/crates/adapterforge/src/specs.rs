//! Reading `.cdl` component and `.pdl` project files.

use std::fs;
use std::path::{Path, PathBuf};

use adapterforge_core::spec_lang::{
    decode_utf8, parse_component, parse_project, serialize_component, validate, ComponentSpec,
    ProjectSpec, SourceName,
};

use crate::error::{Error, Result};

pub const COMPONENT_EXT: &str = "cdl";
pub const PROJECT_EXT: &str = "pdl";

pub fn read_text(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_utf8(&bytes).map(str::to_owned).map_err(|err| Error::Parse {
        path: path.into(),
        err,
    })
}

/// Parses and validates one component file.
pub fn load_component(path: &Path) -> Result<ComponentSpec> {
    let text = read_text(path)?;
    let mut spec = parse_component(&text).map_err(|err| Error::Parse {
        path: path.into(),
        err,
    })?;
    spec.source = SourceName(Some(path.display().to_string()));
    let violations = validate(&spec);
    if !violations.is_empty() {
        return Err(Error::Invalid {
            path: path.into(),
            lines: violations.iter().map(ToString::to_string).collect(),
        });
    }
    Ok(spec)
}

pub fn load_project(path: &Path) -> Result<ProjectSpec> {
    let text = read_text(path)?;
    let mut spec = parse_project(&text).map_err(|err| Error::Parse {
        path: path.into(),
        err,
    })?;
    spec.source = SourceName(Some(path.display().to_string()));
    Ok(spec)
}

fn cdl_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == COMPONENT_EXT) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Loads every `.cdl` file directly inside `dirs`, in directory order and
/// then file-name order. A `name@version` seen twice is kept once when both
/// copies are canonically identical and rejected otherwise.
pub fn load_spec_dirs(dirs: &[PathBuf]) -> Result<Vec<ComponentSpec>> {
    let mut specs: Vec<(ComponentSpec, PathBuf, String)> = Vec::new();
    for dir in dirs {
        for path in cdl_files(dir)? {
            let spec = load_component(&path)?;
            let canon = serialize_component(&spec);
            match specs
                .iter()
                .find(|(s, _, _)| s.name == spec.name && s.version == spec.version)
            {
                Some((_, _, c)) if *c == canon => {}
                Some((s, first, _)) => {
                    return Err(Error::DupComponent {
                        name: s.name.clone(),
                        version: s.version.to_string(),
                        first: first.clone(),
                        second: path,
                    })
                }
                None => specs.push((spec, path, canon)),
            }
        }
    }
    Ok(specs.into_iter().map(|(s, _, _)| s).collect())
}
