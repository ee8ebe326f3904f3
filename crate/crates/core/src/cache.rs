//! Line-delimited level cache so long enumerations can resume.
//!
//! The first line is a header with the format version and a hash of every
//! configuration field that influences the levels; each further line holds
//! one level's word lists plus a digest of the frontier maps, which is
//! re-checked on replay.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::AnalysisConfig;
use crate::error::{Error, Result};
use crate::gamma::{Level, Node};
use crate::geometry::{format_rational, AxisBox, Ifs, Word};

pub const CACHE_FORMAT: &str = "univoque-level-cache";
pub const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    config_hash: String,
}

#[derive(Serialize, Deserialize)]
struct LevelRecord {
    k: usize,
    s: Vec<Word>,
    t: Vec<Word>,
    pruned: Vec<Word>,
    ghosts: Vec<Word>,
    frontier_digest: String,
}

/// Hash of the fields that determine the level sequence.
pub fn config_hash(cfg: &AnalysisConfig, m: &AxisBox) -> String {
    #[derive(Serialize)]
    struct Key<'a> {
        dimension: usize,
        maps: &'a [crate::config::MapConfig],
        lo: Vec<String>,
        hi: Vec<String>,
        prune_twins: bool,
        neighborhood_radius: usize,
    }
    let key = Key {
        dimension: cfg.dimension,
        maps: &cfg.maps,
        lo: m.lo().iter().map(format_rational).collect(),
        hi: m.hi().iter().map(format_rational).collect(),
        prune_twins: cfg.prune_twins,
        neighborhood_radius: cfg.neighborhood_radius,
    };
    hex::encode(Sha256::digest(serde_json::to_vec(&key).expect("key serializes")))
}

fn frontier_digest(t: &[Node], ghosts: &[Node]) -> String {
    let mut h = Sha256::new();
    for n in t.iter().chain(ghosts) {
        h.update(n.map.to_string().as_bytes());
        h.update(b"\n");
    }
    hex::encode(&h.finalize()[..8])
}

/// Exclusive use of a cache file for the lifetime of the guard.
#[derive(Debug)]
pub struct CacheLock {
    path: PathBuf,
}

impl CacheLock {
    pub fn acquire(cache: &Path) -> Result<CacheLock> {
        let mut name = cache.as_os_str().to_owned();
        name.push(".lock");
        let path = PathBuf::from(name);
        OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(|e| Error::Cache(format!("cannot lock {}: {e}", path.display())))?;
        Ok(CacheLock { path })
    }
}

impl Drop for CacheLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Outcome of reading a cache file.
#[derive(Debug)]
pub enum Loaded {
    Missing,
    /// Written for a different configuration; ignored and overwritten later.
    Stale,
    Levels(Vec<Level>),
}

pub fn load(path: &Path, hash: &str, ifs: &Ifs, m: &AxisBox) -> Result<Loaded> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Loaded::Missing),
        Err(e) => return Err(Error::Cache(e.to_string())),
    };
    let bad = |what: String| Error::Cache(format!("{}: {what}", path.display()));
    let mut lines = BufReader::new(file).lines();
    let header: Header = match lines.next() {
        None => return Ok(Loaded::Missing),
        Some(l) => serde_json::from_str(&l.map_err(|e| bad(e.to_string()))?).map_err(|e| bad(e.to_string()))?,
    };
    if header.format != CACHE_FORMAT || header.version != CACHE_VERSION {
        return Err(bad(format!("unsupported cache format {} v{}", header.format, header.version)));
    }
    if header.config_hash != hash {
        return Ok(Loaded::Stale);
    }
    let mut levels = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| bad(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: LevelRecord = serde_json::from_str(&line).map_err(|e| bad(format!("line {}: {e}", i + 2)))?;
        if r.k != levels.len() + 1 {
            return Err(bad(format!("expected level {}, found {}", levels.len() + 1, r.k)));
        }
        let level = Level::from_words(ifs, m, r.k, &r.s, &r.t, &r.pruned, &r.ghosts)?;
        if frontier_digest(&level.t, &level.ghosts) != r.frontier_digest {
            return Err(bad(format!("level {} does not match its recorded maps", r.k)));
        }
        levels.push(level);
    }
    Ok(Loaded::Levels(levels))
}

/// Writes all levels, replacing the file atomically.
pub fn store(path: &Path, hash: &str, levels: &[Level]) -> Result<()> {
    let err = |e: std::io::Error| Error::Cache(format!("{}: {e}", path.display()));
    let mut tmp_name = path.as_os_str().to_owned();
    tmp_name.push(".tmp");
    let tmp = PathBuf::from(tmp_name);
    {
        let mut out = std::io::BufWriter::new(File::create(&tmp).map_err(err)?);
        let header = Header { format: CACHE_FORMAT.into(), version: CACHE_VERSION, config_hash: hash.into() };
        writeln!(out, "{}", serde_json::to_string(&header).expect("header serializes")).map_err(err)?;
        let words = |ns: &[Node]| ns.iter().map(|n| n.word.clone()).collect::<Vec<_>>();
        for l in levels {
            let r = LevelRecord {
                k: l.depth,
                s: words(&l.s),
                t: words(&l.t),
                pruned: words(&l.pruned),
                ghosts: words(&l.ghosts),
                frontier_digest: frontier_digest(&l.t, &l.ghosts),
            };
            writeln!(out, "{}", serde_json::to_string(&r).expect("record serializes")).map_err(err)?;
        }
        out.flush().map_err(err)?;
    }
    fs::rename(&tmp, path).map_err(err)
}
