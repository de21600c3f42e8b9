//! File-backed store of `ψ` values shared across invocations.
//!
//! Format: a version header line, then one tab-separated record per line:
//! `genus  level  weights  count  sha256`. The checksum covers the first four
//! fields. Any malformed or mismatching record rejects the whole file.

use std::fs::{File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gorenstein_core::hilbert::PsiKey;
use gorenstein_core::Error;
use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const HEADER: &str = "gorenstein-memo v1";

fn checksum(body: &str) -> String {
    Sha256::digest(body.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn record_body(key: &PsiKey, value: &BigUint) -> String {
    let w: Vec<String> = key.weights.iter().map(|x| x.to_string()).collect();
    format!("{}\t{}\t{}\t{}", key.genus, key.level, w.join(","), value)
}

fn corrupt(path: &Path, line: usize, why: &str) -> CliError {
    CliError::Core(Error::Integrity(format!(
        "memo store {} rejected: line {line}: {why}",
        path.display()
    )))
}

/// Parses a store's contents.
pub fn parse(path: &Path, text: &str) -> Result<Vec<(PsiKey, BigUint)>, CliError> {
    let mut lines = text.lines();
    match lines.next() {
        None => return Ok(Vec::new()),
        Some(HEADER) => {}
        Some(other) => return Err(corrupt(path, 1, &format!("unknown header `{other}`"))),
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let fields: Vec<&str> = line.split('\t').collect();
        let [g, level, w, count, sum] = fields[..] else {
            return Err(corrupt(path, n, "expected 5 fields"));
        };
        let body = format!("{g}\t{level}\t{w}\t{count}");
        if checksum(&body) != sum {
            return Err(corrupt(path, n, "checksum mismatch"));
        }
        let bad = |_| corrupt(path, n, "unparsable field");
        let weights = if w.is_empty() {
            Vec::new()
        } else {
            w.split(',')
                .map(u32::from_str)
                .collect::<Result<Vec<_>, _>>()
                .map_err(bad)?
        };
        let key = PsiKey {
            genus: g.parse().map_err(bad)?,
            level: level.parse().map_err(bad)?,
            weights,
        };
        if key != PsiKey::canonical(key.genus, &key.weights, key.level) {
            return Err(corrupt(path, n, "key is not canonical"));
        }
        let value = BigUint::from_str(count).map_err(|_| corrupt(path, n, "unparsable count"))?;
        out.push((key, value));
    }
    Ok(out)
}

pub fn render(entries: &[(PsiKey, BigUint)]) -> String {
    let mut s = String::from(HEADER);
    s.push('\n');
    for (k, v) in entries {
        let body = record_body(k, v);
        s.push_str(&body);
        s.push('\t');
        s.push_str(&checksum(&body));
        s.push('\n');
    }
    s
}

/// An open store holding an exclusive lock on its file until dropped.
pub struct MemoStore {
    path: PathBuf,
    file: File,
    entries: Vec<(PsiKey, BigUint)>,
}

impl MemoStore {
    pub fn open(path: &Path) -> Result<Self, CliError> {
        let mut file = OpenOptions::new()
            .read(true)
            .write(true)
            .create(true)
            .truncate(false)
            .open(path)?;
        file.lock()?;
        let mut text = String::new();
        file.read_to_string(&mut text)?;
        let entries = parse(path, &text)?;
        Ok(Self {
            path: path.to_path_buf(),
            file,
            entries,
        })
    }

    pub fn entries(&self) -> &[(PsiKey, BigUint)] {
        &self.entries
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Rewrites the file with `entries`, which must be sorted by key.
    pub fn save(&mut self, entries: Vec<(PsiKey, BigUint)>) -> Result<(), CliError> {
        let text = render(&entries);
        self.file.set_len(0)?;
        self.file.seek(SeekFrom::Start(0))?;
        self.file.write_all(text.as_bytes())?;
        self.file.sync_all()?;
        self.entries = entries;
        Ok(())
    }
}
