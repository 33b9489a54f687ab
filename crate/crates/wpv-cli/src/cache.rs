//! Persistent bracket cache.
//!
//! The cache is a JSON-lines file: a header object followed by one object per
//! bracket, sorted by key so the file is byte-deterministic for a given set of
//! entries.  The header carries a format tag, a version, the entry count, and
//! an FNV-1a checksum of the body; any mismatch (or any parse error) makes the
//! whole file count as stale, which is reported as a warning and treated as an
//! empty cache — a stale cache must never change results, only cost.
//!
//! ```text
//! {"format":"wpv-bracket-cache","version":1,"entries":2,"checksum":"..."}
//! {"g":0,"kappa":0,"psi":[0,0,0],"value":"1"}
//! {"g":1,"kappa":0,"psi":[1],"value":"1/24"}
//! ```

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use num_bigint::BigInt;
use serde_json::{json, Value};
use wpv_core::intersect::{BracketKey, BracketMemo};
use wpv_core::numkit::{rat_to_string, Rat};

const FORMAT_TAG: &str = "wpv-bracket-cache";
const VERSION: u64 = 1;

/// Cache location: an explicit `--cache` flag wins over the `WPV_CACHE`
/// environment variable; with neither, no cache is used.
pub fn resolve_path(flag: Option<PathBuf>) -> Option<PathBuf> {
    flag.or_else(|| std::env::var_os("WPV_CACHE").map(PathBuf::from))
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Parses an exact rational from `p` or `p/q` form.
fn parse_rat(s: &str) -> Result<Rat> {
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n = BigInt::from_str(num.trim()).map_err(|_| anyhow::anyhow!("bad numerator"))?;
    let d = BigInt::from_str(den.trim()).map_err(|_| anyhow::anyhow!("bad denominator"))?;
    if d == BigInt::from(0) {
        bail!("zero denominator");
    }
    Ok(Rat::new(n, d))
}

fn parse_body(body_lines: &[&str]) -> Result<BracketMemo> {
    let mut memo = BracketMemo::new();
    for line in body_lines {
        let row: Value = serde_json::from_str(line).context("bad entry line")?;
        let g = row["g"].as_u64().context("missing g")? as u32;
        let kappa = row["kappa"].as_u64().context("missing kappa")? as u32;
        let psi: Vec<u32> = row["psi"]
            .as_array()
            .context("missing psi")?
            .iter()
            .map(|v| v.as_u64().map(|x| x as u32).context("bad psi entry"))
            .collect::<Result<_>>()?;
        if psi.is_empty() || 2 * g + psi.len() as u32 <= 2 {
            bail!("entry names an unstable surface type");
        }
        let value = parse_rat(row["value"].as_str().context("missing value")?)?;
        memo.insert(BracketKey::new(g, kappa, psi), value);
    }
    Ok(memo)
}

fn try_load(path: &Path) -> Result<BracketMemo> {
    let text = fs::read_to_string(path).context("unreadable")?;
    let mut lines = text.lines();
    let header: Value = serde_json::from_str(lines.next().context("empty file")?)
        .context("bad header")?;
    if header["format"].as_str() != Some(FORMAT_TAG) {
        bail!("wrong format tag");
    }
    if header["version"].as_u64() != Some(VERSION) {
        bail!("unsupported version");
    }
    let body: Vec<&str> = lines.collect();
    if header["entries"].as_u64() != Some(body.len() as u64) {
        bail!("entry count mismatch");
    }
    let mut hashed = String::new();
    for line in &body {
        hashed.push_str(line);
        hashed.push('\n');
    }
    let checksum = format!("{:016x}", fnv1a64(hashed.as_bytes()));
    if header["checksum"].as_str() != Some(checksum.as_str()) {
        bail!("checksum mismatch");
    }
    parse_body(&body)
}

/// Loads the cache at `path`.  A missing file is an empty cache; a stale or
/// corrupt file is reported on stderr and likewise treated as empty.
pub fn load(path: &Path) -> BracketMemo {
    if !path.exists() {
        return BracketMemo::new();
    }
    match try_load(path) {
        Ok(memo) => memo,
        Err(e) => {
            eprintln!(
                "warning: ignoring stale cache at {} ({e:#})",
                path.display()
            );
            BracketMemo::new()
        }
    }
}

/// Serializes `memo` (header + sorted rows) and writes it atomically via a
/// temporary file in the destination directory.
pub fn save(path: &Path, memo: &BracketMemo) -> Result<()> {
    let mut body = String::new();
    for (key, value) in memo {
        let row = json!({
            "g": key.g(),
            "kappa": key.kappa(),
            "psi": key.psi(),
            "value": rat_to_string(value),
        });
        body.push_str(&row.to_string());
        body.push('\n');
    }
    let header = json!({
        "format": FORMAT_TAG,
        "version": VERSION,
        "entries": memo.len(),
        "checksum": format!("{:016x}", fnv1a64(body.as_bytes())),
    });
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or_else(|| Path::new(".")))
        .context("creating temporary cache file")?;
    writeln!(tmp, "{header}")?;
    tmp.write_all(body.as_bytes())?;
    tmp.persist(path).context("moving cache into place")?;
    Ok(())
}
