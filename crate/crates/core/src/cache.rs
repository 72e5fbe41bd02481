//! On-disk cache of computed stable intervals.
//!
//! The file is a JSON array of records, sorted by cutoff:
//!
//! ```json
//! [
//!   {"cutoff": "1/1", "degree": 1, "prefix": ["0", "1"], "next": "2/1"},
//!   {"cutoff": "2/1", "degree": 2, "prefix": ["0", "1", "2"], "next": "5/2"}
//! ]
//! ```
//!
//! Rationals are always written `p/q` and terms as decimal strings, so the
//! file is byte-stable for a given set of records.

use std::collections::BTreeMap;
use std::fs;
use std::io::ErrorKind;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cutoffs::StableInterval;
use crate::error::Result;
use crate::numerics::{Natural, Rational};

/// File name used inside a cache directory.
pub const CACHE_FILE: &str = "cutoffs.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub cutoff: Rational,
    pub degree: usize,
    #[serde(with = "crate::numerics::decimal::vec")]
    pub prefix: Vec<Natural>,
    pub next: Rational,
}

impl From<&StableInterval> for CacheRecord {
    fn from(i: &StableInterval) -> Self {
        CacheRecord {
            cutoff: i.lower.clone(),
            degree: i.degree,
            prefix: i.prefix.clone(),
            next: i.upper.clone(),
        }
    }
}

impl From<CacheRecord> for StableInterval {
    fn from(r: CacheRecord) -> Self {
        StableInterval {
            lower: r.cutoff,
            upper: r.next,
            degree: r.degree,
            prefix: r.prefix,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CutoffCache {
    intervals: BTreeMap<Rational, StableInterval>,
}

impl CutoffCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Reads a cache file; a missing file is an empty cache.
    pub fn load(path: &Path) -> Result<Self> {
        let text = match fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) if e.kind() == ErrorKind::NotFound => return Ok(Self::new()),
            Err(e) => return Err(e.into()),
        };
        let records: Vec<CacheRecord> = serde_json::from_str(&text)?;
        let mut cache = Self::new();
        cache.extend(records.into_iter().map(StableInterval::from));
        Ok(cache)
    }

    /// Writes the cache through a temporary file and a rename.
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir)?;
            }
        }
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, self.to_json()?)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let records: Vec<CacheRecord> = self.intervals.values().map(CacheRecord::from).collect();
        let mut text = serde_json::to_string_pretty(&records)?;
        text.push('\n');
        Ok(text)
    }

    pub fn get(&self, cutoff: &Rational) -> Option<&StableInterval> {
        self.intervals.get(cutoff)
    }

    pub fn insert(&mut self, interval: StableInterval) {
        self.intervals.insert(interval.lower.clone(), interval);
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn intervals(&self) -> impl Iterator<Item = &StableInterval> {
        self.intervals.values()
    }
}

impl Extend<StableInterval> for CutoffCache {
    fn extend<T: IntoIterator<Item = StableInterval>>(&mut self, iter: T) {
        for interval in iter {
            self.insert(interval);
        }
    }
}
