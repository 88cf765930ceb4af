//! File formats and run-directory layout.
//!
//! Text first: everything a person or plotter consumes is delimited text
//! with headers, floats printed at 17 significant digits so values
//! round-trip exactly. Binary is reserved for latent-state checkpoints.
//! Run directories are named by scenario hash and laid out as
//! `manifest.json`, `data/`, `draws/`, `diag/`, `checkpoints/`.

mod checkpoint;

pub use checkpoint::{read_checkpoint, read_latent_draws, write_checkpoint, write_latent_draws};

use crate::error::{Error, Result};
use crate::likelihood::Dataset;
use crate::mcmc::{BlockStats, Draws};
use crate::spatial::SiteSet;
use crate::taildep::EmpiricalCurve;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// 17 significant digits: enough for exact f64 round trips.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn parse_f64(s: &str, path: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Format {
        path: path.to_string(),
        msg: format!("bad float {s:?}"),
    })
}

/// FNV-1a over raw bytes; the inventory checksum.
pub fn fnv64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::io(path.display().to_string(), &e))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), &e))
}

// ---------------------------------------------------------------------------
// Run directory
// ---------------------------------------------------------------------------

/// Canonical layout rooted at `<out>/<scenario-hash>/`.
#[derive(Debug, Clone)]
pub struct RunDir {
    pub root: PathBuf,
}

impl RunDir {
    pub fn create(out: &Path, scenario_hash: u64) -> Result<Self> {
        let root = out.join(format!("{scenario_hash:016x}"));
        for sub in ["data", "draws", "diag", "checkpoints"] {
            std::fs::create_dir_all(root.join(sub))
                .map_err(|e| Error::io(root.display().to_string(), &e))?;
        }
        Ok(RunDir { root })
    }

    pub fn data(&self, name: &str) -> PathBuf {
        self.root.join("data").join(name)
    }

    pub fn draws(&self, name: &str) -> PathBuf {
        self.root.join("draws").join(name)
    }

    pub fn diag(&self, name: &str) -> PathBuf {
        self.root.join("diag").join(name)
    }

    pub fn checkpoints(&self, name: &str) -> PathBuf {
        self.root.join("checkpoints").join(name)
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.root.join("manifest.json")
    }
}

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub checksum: String,
    pub bytes: u64,
}

/// Inventory of a run. Timing is informational and explicitly outside the
/// byte-identity contract; the inventory checksums are the contract.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub code_version: String,
    pub scenario_hash: String,
    pub seed: u64,
    pub files: Vec<FileEntry>,
    pub wall_seconds: f64,
}

impl RunManifest {
    pub fn new(scenario_hash: u64, seed: u64) -> Self {
        RunManifest {
            format_version: 1,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            scenario_hash: format!("{scenario_hash:016x}"),
            seed,
            files: Vec::new(),
            wall_seconds: 0.0,
        }
    }

    /// Adds a file to the inventory, checksumming its current bytes.
    pub fn add_file(&mut self, root: &Path, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), &e))?;
        let rel = path
            .strip_prefix(root)
            .unwrap_or(path)
            .to_string_lossy()
            .to_string();
        self.files.push(FileEntry {
            path: rel,
            checksum: format!("{:016x}", fnv64(&bytes)),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest).map_err(|e| Error::Format {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    write_text(path, &json)
}

/// Reads a manifest and verifies every inventory checksum against the files
/// on disk.
pub fn read_manifest(path: &Path, root: &Path) -> Result<RunManifest> {
    let text = read_text(path)?;
    let manifest: RunManifest = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    for entry in &manifest.files {
        let fpath = root.join(&entry.path);
        let bytes = std::fs::read(&fpath).map_err(|e| Error::io(fpath.display().to_string(), &e))?;
        let computed = fnv64(&bytes);
        let stored = u64::from_str_radix(&entry.checksum, 16).map_err(|_| Error::Format {
            path: path.display().to_string(),
            msg: format!("bad checksum string {:?}", entry.checksum),
        })?;
        if computed != stored {
            return Err(Error::ChecksumMismatch {
                path: entry.path.clone(),
                stored,
                computed,
            });
        }
    }
    Ok(manifest)
}

// ---------------------------------------------------------------------------
// Sites, knots, dataset
// ---------------------------------------------------------------------------

pub fn write_sites(path: &Path, sites: &SiteSet) -> Result<()> {
    let mut out = String::from("id,x,y,elev\n");
    for j in 0..sites.len() {
        writeln!(
            out,
            "{},{},{},{}",
            sites.ids[j],
            fmt_f64(sites.coords[j].0),
            fmt_f64(sites.coords[j].1),
            fmt_f64(sites.elev[j])
        )
        .expect("string write");
    }
    write_text(path, &out)
}

pub fn read_sites(path: &Path) -> Result<SiteSet> {
    let text = read_text(path)?;
    let p = path.display().to_string();
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format {
        path: p.clone(),
        msg: "empty sites file".to_string(),
    })?;
    if header.trim() != "id,x,y,elev" {
        return Err(Error::Format {
            path: p,
            msg: format!("expected header id,x,y,elev, found {header:?}"),
        });
    }
    let mut ids = Vec::new();
    let mut coords = Vec::new();
    let mut elev = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::Format {
                path: p,
                msg: format!("expected 4 fields, found {}: {line:?}", parts.len()),
            });
        }
        ids.push(parts[0].trim().to_string());
        coords.push((parse_f64(parts[1], &p)?, parse_f64(parts[2], &p)?));
        elev.push(parse_f64(parts[3], &p)?);
    }
    SiteSet::new(ids, coords, elev)
}

pub fn write_knots(path: &Path, knots: &[(f64, f64)]) -> Result<()> {
    let mut out = String::from("x,y\n");
    for k in knots {
        writeln!(out, "{},{}", fmt_f64(k.0), fmt_f64(k.1)).expect("string write");
    }
    write_text(path, &out)
}

pub fn read_knots(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = read_text(path)?;
    let p = path.display().to_string();
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header.trim() != "x,y" {
        return Err(Error::Format {
            path: p,
            msg: format!("expected header x,y, found {header:?}"),
        });
    }
    let mut knots = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::Format {
                path: p,
                msg: format!("expected 2 fields: {line:?}"),
            });
        }
        knots.push((parse_f64(parts[0], &p)?, parse_f64(parts[1], &p)?));
    }
    Ok(knots)
}

/// Observations in matrix form: header row of site ids, one row per
/// replicate, leading `t` column.
pub fn write_observations(path: &Path, data: &Dataset) -> Result<()> {
    let mut out = String::from("t");
    for id in &data.sites.ids {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    for t in 0..data.n_rep {
        write!(out, "{t}").expect("string write");
        for j in 0..data.n_sites() {
            out.push(',');
            out.push_str(&fmt_f64(data.value(t, j)));
        }
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn write_thresholds(path: &Path, data: &Dataset) -> Result<()> {
    let mut out = String::from("site_id,y0\n");
    for j in 0..data.n_sites() {
        writeln!(out, "{},{}", data.sites.ids[j], fmt_f64(data.thresholds[j]))
            .expect("string write");
    }
    write_text(path, &out)
}

/// Reads observations in either format: matrix (`t,<id>,...`) or long
/// (`t,site_id,y`), resolving site order against `sites`.
pub fn read_observations(path: &Path, sites: &SiteSet) -> Result<(Vec<f64>, usize)> {
    let text = read_text(path)?;
    let p = path.display().to_string();
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format {
        path: p.clone(),
        msg: "empty observations file".to_string(),
    })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let d = sites.len();
    if cols == ["t", "site_id", "y"] {
        // long format
        let mut cells: std::collections::BTreeMap<(usize, usize), f64> = Default::default();
        let mut t_max = 0usize;
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Format {
                    path: p,
                    msg: format!("expected t,site_id,y: {line:?}"),
                });
            }
            let t: usize = parts[0].trim().parse().map_err(|_| Error::Format {
                path: p.clone(),
                msg: format!("bad replicate index {:?}", parts[0]),
            })?;
            let j = sites
                .ids
                .iter()
                .position(|id| id == parts[1].trim())
                .ok_or_else(|| Error::Format {
                    path: p.clone(),
                    msg: format!("unknown site id {:?}", parts[1]),
                })?;
            cells.insert((t, j), parse_f64(parts[2], &p)?);
            t_max = t_max.max(t + 1);
        }
        let mut y = vec![f64::NAN; t_max * d];
        for ((t, j), v) in cells {
            y[t * d + j] = v;
        }
        if y.iter().any(|v| v.is_nan()) {
            return Err(Error::Format {
                path: p,
                msg: "long-format observations do not cover every (t, site) cell".to_string(),
            });
        }
        return Ok((y, t_max));
    }
    // matrix format: first column t, then site ids in file order
    if cols.first() != Some(&"t") {
        return Err(Error::Format {
            path: p,
            msg: format!("expected leading t column, found {:?}", cols.first()),
        });
    }
    let file_ids = &cols[1..];
    if file_ids.len() != d {
        return Err(Error::Format {
            path: p,
            msg: format!("{} site columns for {} sites", file_ids.len(), d),
        });
    }
    // map file order onto the site-set order
    let mut order = Vec::with_capacity(d);
    for id in file_ids {
        let j = sites
            .ids
            .iter()
            .position(|s| s == id)
            .ok_or_else(|| Error::Format {
                path: p.clone(),
                msg: format!("unknown site id {id:?} in header"),
            })?;
        order.push(j);
    }
    let mut y = Vec::new();
    let mut n_rep = 0usize;
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != d + 1 {
            return Err(Error::Format {
                path: p,
                msg: format!("expected {} fields: {line:?}", d + 1),
            });
        }
        let mut row = vec![0.0; d];
        for (c, part) in parts[1..].iter().enumerate() {
            row[order[c]] = parse_f64(part, &p)?;
        }
        y.extend_from_slice(&row);
        n_rep += 1;
    }
    Ok((y, n_rep))
}

pub fn read_thresholds(path: &Path, sites: &SiteSet) -> Result<Vec<f64>> {
    let text = read_text(path)?;
    let p = path.display().to_string();
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header.trim() != "site_id,y0" {
        return Err(Error::Format {
            path: p,
            msg: format!("expected header site_id,y0, found {header:?}"),
        });
    }
    let mut out = vec![f64::NAN; sites.len()];
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::Format {
                path: p,
                msg: format!("expected site_id,y0: {line:?}"),
            });
        }
        let j = sites
            .ids
            .iter()
            .position(|id| id == parts[0].trim())
            .ok_or_else(|| Error::Format {
                path: p.clone(),
                msg: format!("unknown site id {:?}", parts[0]),
            })?;
        out[j] = parse_f64(parts[1], &p)?;
    }
    if out.iter().any(|v| v.is_nan()) {
        return Err(Error::Format {
            path: p,
            msg: "thresholds missing for some sites".to_string(),
        });
    }
    Ok(out)
}

/// Full dataset round trip against a data directory
/// (`sites.csv`, `y.csv`, `thresholds.csv`).
pub fn write_dataset(dir: &Path, data: &Dataset) -> Result<()> {
    write_sites(&dir.join("sites.csv"), &data.sites)?;
    write_observations(&dir.join("y.csv"), data)?;
    write_thresholds(&dir.join("thresholds.csv"), data)
}

pub fn read_dataset(dir: &Path, p: f64) -> Result<Dataset> {
    let sites = read_sites(&dir.join("sites.csv"))?;
    let (y, n_rep) = read_observations(&dir.join("y.csv"), &sites)?;
    let thresholds = read_thresholds(&dir.join("thresholds.csv"), &sites)?;
    Dataset::new(sites, y, n_rep, thresholds, p)
}

// ---------------------------------------------------------------------------
// Draws and ledger
// ---------------------------------------------------------------------------

pub fn write_draws(path: &Path, draws: &Draws) -> Result<()> {
    let mut out = draws.columns.join(",");
    out.push('\n');
    for row in &draws.rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&fmt_f64(*v));
            first = false;
        }
        out.push('\n');
    }
    write_text(path, &out)
}

/// Reads draws, requiring the exact expected column order; a shuffled file
/// is rejected with a named-column diff.
pub fn read_draws(path: &Path, expected_columns: &[String]) -> Result<Draws> {
    let text = read_text(path)?;
    let p = path.display().to_string();
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Format {
        path: p.clone(),
        msg: "empty draws file".to_string(),
    })?;
    let cols: Vec<String> = header.split(',').map(|s| s.trim().to_string()).collect();
    if cols != expected_columns {
        let diffs: Vec<String> = expected_columns
            .iter()
            .zip(cols.iter().chain(std::iter::repeat(&String::new())))
            .enumerate()
            .filter(|(_, (e, f))| e != f)
            .map(|(i, (e, f))| format!("column {i}: expected {e:?}, found {f:?}"))
            .collect();
        return Err(Error::Format {
            path: p,
            msg: format!("column order mismatch: {}", diffs.join("; ")),
        });
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != cols.len() {
            return Err(Error::Format {
                path: p,
                msg: format!("expected {} fields, found {}", cols.len(), parts.len()),
            });
        }
        let row: Result<Vec<f64>> = parts.iter().map(|s| parse_f64(s, &p)).collect();
        rows.push(row?);
    }
    Ok(Draws { columns: cols, rows })
}

pub fn write_ledger(path: &Path, ledger: &[BlockStats]) -> Result<()> {
    let mut out = String::from("block,proposals,accepts,final_scale\n");
    for b in ledger {
        writeln!(
            out,
            "{},{},{},{}",
            b.block,
            b.proposals,
            b.accepts,
            fmt_f64(b.final_scale)
        )
        .expect("string write");
    }
    write_text(path, &out)
}

// ---------------------------------------------------------------------------
// Curves (tail-dependence output format)
// ---------------------------------------------------------------------------

/// `u,<name>_hat,se,<name>_lo,<name>_hi` rows; the lo/hi columns carry the
/// theoretical interval when one is known, else repeat the estimate.
pub fn write_curve(
    path: &Path,
    name: &str,
    curve: &EmpiricalCurve,
    bounds: Option<(f64, f64)>,
) -> Result<()> {
    let mut out = format!("u,{name}_hat,se,{name}_lo,{name}_hi\n");
    for pt in &curve.points {
        let (lo, hi) = bounds.unwrap_or((pt.estimate, pt.estimate));
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(pt.u),
            fmt_f64(pt.estimate),
            fmt_f64(pt.se),
            fmt_f64(lo),
            fmt_f64(hi)
        )
        .expect("string write");
    }
    for u in &curve.omitted_us {
        writeln!(out, "{},omitted,,,", fmt_f64(*u)).expect("string write");
    }
    write_text(path, &out)
}
