//! The component pool: a content-addressed directory of component specs
//! and adapter descriptors.
//!
//! ```text
//! <root>/index             canonical JSON, rewritten whole under the lock
//! <root>/index.lock        advisory lock for mutations
//! <root>/components/<fp>.cdl
//! <root>/adapters/<fp>.adapter
//! ```
//!
//! Stored files are immutable once named. Every write goes to a temporary
//! sibling first and is renamed into place, so readers never see partial
//! files and need no lock.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::{self, File, OpenOptions, TryLockError};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use adapterforge_core::adapter_gen::{AdapterSpec, SlotAction};
use adapterforge_core::analyser::{
    match_operation, ConversionTable, Demand, OpShape, Scoring,
};
use adapterforge_core::spec_lang::{
    parse_component, serialize_component, validate, ComponentSpec, ConceptId, Version,
    VersionConstraint,
};
use adapterforge_core::Ratio;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::formats::{canonical_json, emit_descriptor, parse_descriptor, parse_json};

pub const ENV_POOL: &str = "ADAPTERFORGE_POOL";
pub const LOCK_TIMEOUT: Duration = Duration::from_secs(5);

/// Lowercase hex SHA-256.
pub fn fingerprint(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{:02x}", b))
        .collect()
}

fn is_fingerprint(s: &str) -> bool {
    s.len() == 64 && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    Component,
    Adapter,
}

impl fmt::Display for EntryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EntryKind::Component => "component",
            EntryKind::Adapter => "adapter",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexEntry {
    pub kind: EntryKind,
    pub name: String,
    pub version: Version,
    /// Sorted operation concepts of the provided interfaces.
    pub concepts: Vec<ConceptId>,
    /// Relative to the pool root.
    pub path: String,
    /// Seconds since the Unix epoch.
    pub stored_at: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndexDoc {
    /// Fingerprint of the canonical `entries` document.
    checksum: String,
    entries: BTreeMap<String, IndexEntry>,
}

impl IndexDoc {
    fn new(entries: BTreeMap<String, IndexEntry>) -> IndexDoc {
        IndexDoc {
            checksum: fingerprint(canonical_json(&entries).as_bytes()),
            entries,
        }
    }
}

/// Anything the pool stores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PoolDoc {
    Component(ComponentSpec),
    Adapter(AdapterSpec),
}

impl PoolDoc {
    pub fn kind(&self) -> EntryKind {
        match self {
            PoolDoc::Component(_) => EntryKind::Component,
            PoolDoc::Adapter(_) => EntryKind::Adapter,
        }
    }

    pub fn canonical(&self) -> String {
        match self {
            PoolDoc::Component(c) => serialize_component(c),
            PoolDoc::Adapter(a) => emit_descriptor(a),
        }
    }

    /// The document seen as a component; adapters are components too.
    pub fn component(&self) -> ComponentSpec {
        match self {
            PoolDoc::Component(c) => c.clone(),
            PoolDoc::Adapter(a) => a.to_component_spec(),
        }
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(self.canonical().as_bytes())
    }

    fn check(&self) -> std::result::Result<(), Vec<String>> {
        let comp = self.component();
        let mut problems: Vec<String> = validate(&comp).iter().map(ToString::to_string).collect();
        if let PoolDoc::Adapter(a) = self {
            problems.extend(mapping_problems(a));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }
}

/// Structural invariants of adapter mappings.
pub fn mapping_problems(a: &AdapterSpec) -> Vec<String> {
    let mut out = Vec::new();
    for op in &a.implements.operations {
        let Some(m) = a.mapping(&op.name) else {
            out.push(format!("no mapping for `{}`", op.name));
            continue;
        };
        let Some(target) = a.delegates_to.operation(&m.to) else {
            out.push(format!("`{}` maps to unknown operation `{}`", m.from, m.to));
            continue;
        };
        if m.slots.len() != target.params.len() {
            out.push(format!(
                "`{}` has {} slots, `{}` takes {} arguments",
                m.from,
                m.slots.len(),
                m.to,
                target.params.len()
            ));
        }
        let mut seen = vec![0usize; op.params.len()];
        for s in &m.slots {
            let i = match s {
                SlotAction::Take(i) | SlotAction::Convert(i, _) => *i,
                SlotAction::Fill(_) => continue,
            };
            match seen.get_mut(i) {
                Some(n) => *n += 1,
                None => out.push(format!("`{}` takes argument {} of {}", m.from, i, op.params.len())),
            }
        }
        if seen.iter().any(|&n| n != 1) {
            out.push(format!("`{}` does not use every argument exactly once", m.from));
        }
    }
    if a.mappings.len() != a.implements.operations.len() {
        out.push(String::from("mapping count differs from operation count"));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hit {
    pub fingerprint: String,
    pub score: Ratio,
    pub kind: EntryKind,
    pub name: String,
    pub version: Version,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "finding", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Finding {
    /// Stored bytes no longer hash to their fingerprint.
    HashMismatch { fingerprint: String, path: String },
    /// Index entry whose file is gone.
    Dangling { fingerprint: String, path: String },
    /// Index metadata disagrees with the stored document.
    EntryMismatch { fingerprint: String, detail: String },
    IndexCorrupt { detail: String },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::HashMismatch { fingerprint, path } => {
                write!(f, "HASH_MISMATCH {} {}", fingerprint, path)
            }
            Finding::Dangling { fingerprint, path } => {
                write!(f, "DANGLING {} {}", fingerprint, path)
            }
            Finding::EntryMismatch {
                fingerprint,
                detail,
            } => write!(f, "ENTRY_MISMATCH {} {}", fingerprint, detail),
            Finding::IndexCorrupt { detail } => write!(f, "INDEX_CORRUPT {}", detail),
        }
    }
}

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes through a temporary sibling and renames it over `path`.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("file");
    let tmp = dir.join(format!(
        ".{}.tmp-{}-{}",
        name,
        std::process::id(),
        TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let res = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    res.map_err(|e| Error::io(path, e))
}

#[derive(Clone, Debug)]
pub struct Pool {
    root: PathBuf,
    lock_timeout: Duration,
}

impl Pool {
    pub fn open(root: impl Into<PathBuf>) -> Pool {
        Pool {
            root: root.into(),
            lock_timeout: LOCK_TIMEOUT,
        }
    }

    pub fn with_lock_timeout(mut self, t: Duration) -> Pool {
        self.lock_timeout = t;
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn index_path(&self) -> PathBuf {
        self.root.join("index")
    }

    fn lock(&self) -> Result<File> {
        let dir = &self.root;
        fs::create_dir_all(dir.join("components")).map_err(|e| Error::io(dir, e))?;
        fs::create_dir_all(dir.join("adapters")).map_err(|e| Error::io(dir, e))?;
        let path = dir.join("index.lock");
        let f = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        let start = Instant::now();
        loop {
            match f.try_lock() {
                Ok(()) => return Ok(f),
                Err(TryLockError::WouldBlock) if start.elapsed() < self.lock_timeout => {
                    std::thread::sleep(Duration::from_millis(5));
                }
                Err(TryLockError::WouldBlock) => {
                    return Err(Error::Lock {
                        path,
                        secs: self.lock_timeout.as_secs(),
                    })
                }
                Err(TryLockError::Error(e)) => return Err(Error::io(&path, e)),
            }
        }
    }

    fn read_index(&self) -> Result<BTreeMap<String, IndexEntry>> {
        let path = self.index_path();
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(BTreeMap::new()),
            Err(e) => return Err(Error::io(&path, e)),
        };
        let corrupt = |detail: String| Error::Corrupt {
            path: path.clone(),
            detail,
        };
        let text = String::from_utf8(bytes).map_err(|_| corrupt("index is not UTF-8".into()))?;
        let doc: IndexDoc = parse_json(&text, &path).map_err(|e| corrupt(e.to_string()))?;
        let expect = IndexDoc::new(doc.entries);
        if expect.checksum != doc.checksum {
            return Err(corrupt("index checksum mismatch".into()));
        }
        if canonical_json(&expect) != text {
            return Err(corrupt("index is not in canonical form".into()));
        }
        Ok(expect.entries)
    }

    /// The index; a pool that was never written to is empty.
    pub fn index(&self) -> Result<BTreeMap<String, IndexEntry>> {
        self.read_index()
    }

    /// Stores `doc` and returns its fingerprint. Idempotent.
    pub fn add(&self, doc: &PoolDoc) -> Result<String> {
        let label = match doc {
            PoolDoc::Component(c) => c.name.clone(),
            PoolDoc::Adapter(a) => a.name.clone(),
        };
        doc.check().map_err(|lines| Error::Invalid {
            path: label.into(),
            lines,
        })?;
        let bytes = doc.canonical();
        let fp = fingerprint(bytes.as_bytes());
        let _guard = self.lock()?;
        let mut entries = self.read_index()?;
        if entries.contains_key(&fp) {
            return Ok(fp);
        }
        let rel = match doc.kind() {
            EntryKind::Component => format!("components/{}.cdl", fp),
            EntryKind::Adapter => format!("adapters/{}.adapter", fp),
        };
        write_atomic(&self.root.join(&rel), bytes.as_bytes())?;
        let comp = doc.component();
        let stored_at = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        entries.insert(
            fp.clone(),
            IndexEntry {
                kind: doc.kind(),
                name: comp.name.clone(),
                version: comp.version,
                concepts: comp.provided_concepts(),
                path: rel,
                stored_at,
            },
        );
        write_atomic(&self.index_path(), canonical_json(&IndexDoc::new(entries)).as_bytes())?;
        Ok(fp)
    }

    fn load(&self, fp: &str, entry: &IndexEntry) -> Result<PoolDoc> {
        let path = self.root.join(&entry.path);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(Error::Corrupt {
                    path,
                    detail: format!("file for {} is missing", fp),
                })
            }
            Err(e) => return Err(Error::io(&path, e)),
        };
        let corrupt = |detail: String| Error::Corrupt {
            path: path.clone(),
            detail,
        };
        if fingerprint(&bytes) != fp {
            return Err(corrupt(format!("content does not hash to {}", fp)));
        }
        let text = String::from_utf8(bytes).map_err(|_| corrupt("not UTF-8".into()))?;
        let doc = match entry.kind {
            EntryKind::Component => PoolDoc::Component(
                parse_component(&text).map_err(|e| corrupt(e.to_string()))?,
            ),
            EntryKind::Adapter => PoolDoc::Adapter(
                parse_descriptor(&text, &path).map_err(|e| corrupt(e.to_string()))?,
            ),
        };
        if doc.fingerprint() != fp {
            return Err(corrupt("stored document is not canonical".into()));
        }
        Ok(doc)
    }

    pub fn get(&self, fp: &str) -> Result<PoolDoc> {
        if !is_fingerprint(fp) {
            return Err(Error::NoEntry(fp.into()));
        }
        let entries = self.read_index()?;
        let entry = entries.get(fp).ok_or_else(|| Error::NoEntry(fp.into()))?;
        self.load(fp, entry)
    }

    pub fn list(&self) -> Result<Vec<(String, IndexEntry)>> {
        Ok(self.read_index()?.into_iter().collect())
    }

    /// Candidates for `demand`, best first (score desc, fingerprint asc).
    ///
    /// Each stored document is scored by its best provided operation whose
    /// concept lies on the demand's ancestry line. A demand without a shape
    /// takes the candidate operation's own shape, so only concept distance
    /// counts.
    pub fn query(
        &self,
        demand: &Demand,
        constraint: Option<&VersionConstraint>,
        table: &ConversionTable,
        scoring: &Scoring,
    ) -> Result<Vec<Hit>> {
        let mut hits = Vec::new();
        for (fp, entry) in self.read_index()? {
            if constraint.is_some_and(|c| !c.matches(&entry.version)) {
                continue;
            }
            if !entry
                .concepts
                .iter()
                .any(|c| c.hops_to(&demand.concept).is_some())
            {
                continue;
            }
            let comp = self.load(&fp, &entry)?.component();
            let mut best: Option<Ratio> = None;
            for op in comp.provided.iter().flat_map(|i| i.operations.iter()) {
                if op.concept.hops_to(&demand.concept).is_none() {
                    continue;
                }
                let wanted = match &demand.shape {
                    Some(_) => demand.as_operation(),
                    None => Demand {
                        shape: Some(OpShape::of(op)),
                        ..demand.clone()
                    }
                    .as_operation(),
                };
                if let Some(m) = match_operation(&wanted, op, table, scoring) {
                    best = Some(best.map_or(m.score, |b| b.max(m.score)));
                }
            }
            if let Some(score) = best {
                hits.push(Hit {
                    fingerprint: fp,
                    score,
                    kind: entry.kind,
                    name: entry.name,
                    version: entry.version,
                });
            }
        }
        hits.sort_by(|a, b| {
            b.score
                .cmp(&a.score)
                .then_with(|| a.fingerprint.cmp(&b.fingerprint))
        });
        Ok(hits)
    }

    /// Re-hashes every stored file and cross-checks index metadata.
    pub fn verify(&self) -> Result<Vec<Finding>> {
        let entries = match self.read_index() {
            Ok(e) => e,
            Err(Error::Corrupt { detail, .. }) => return Ok(vec![Finding::IndexCorrupt { detail }]),
            Err(e) => return Err(e),
        };
        let mut findings = Vec::new();
        for (fp, entry) in &entries {
            let path = self.root.join(&entry.path);
            let bytes = match fs::read(&path) {
                Ok(b) => b,
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                    findings.push(Finding::Dangling {
                        fingerprint: fp.clone(),
                        path: entry.path.clone(),
                    });
                    continue;
                }
                Err(e) => return Err(Error::io(&path, e)),
            };
            if fingerprint(&bytes) != *fp {
                findings.push(Finding::HashMismatch {
                    fingerprint: fp.clone(),
                    path: entry.path.clone(),
                });
                continue;
            }
            match self.load(fp, entry) {
                Ok(doc) => {
                    let comp = doc.component();
                    let expect_path = match doc.kind() {
                        EntryKind::Component => format!("components/{}.cdl", fp),
                        EntryKind::Adapter => format!("adapters/{}.adapter", fp),
                    };
                    let mut bad = Vec::new();
                    if doc.kind() != entry.kind {
                        bad.push("kind");
                    }
                    if comp.name != entry.name {
                        bad.push("name");
                    }
                    if comp.version != entry.version {
                        bad.push("version");
                    }
                    if comp.provided_concepts() != entry.concepts {
                        bad.push("concepts");
                    }
                    if expect_path != entry.path {
                        bad.push("path");
                    }
                    if !bad.is_empty() {
                        findings.push(Finding::EntryMismatch {
                            fingerprint: fp.clone(),
                            detail: bad.join(","),
                        });
                    }
                }
                Err(e) => findings.push(Finding::EntryMismatch {
                    fingerprint: fp.clone(),
                    detail: e.to_string(),
                }),
            }
        }
        Ok(findings)
    }
}

/// `--pool` wins over the environment variable.
pub fn resolve_root(flag: Option<&Path>, env: Option<&std::ffi::OsStr>) -> Option<PathBuf> {
    flag.map(Path::to_path_buf)
        .or_else(|| env.filter(|v| !v.is_empty()).map(PathBuf::from))
}
