//! Resumable per-prime scan cache.
//!
//! ```text
//! # dbm scan cache
//! # format=1
//! # map_digest=5d1c6e0f3a9b2c47
//! # ambient=projective 1
//! # point=1,1
//! prime,tail,cycle,overrun
//! 2,1,1,0
//! 3,1,2,0
//! ```
//!
//! `overrun` is `0` for a measured row, `1` when the iteration budget ran out
//! and `bad` for a prime of bad reduction; the last two leave `tail` and
//! `cycle` empty. Rows are appended in ascending order and sorted again on
//! read.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use dbm_core::modarith::sieve_primes;
use dbm_core::scan::{scan_primes, CycleScan, RowOutcome, ScanRow};
use dbm_core::variety::{Ambient, IntPoint, PolyMap};
use dbm_core::{Error, Exec, Result};

pub const FORMAT_VERSION: u32 = 1;
const COLUMNS: &str = "prime,tail,cycle,overrun";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheHeader {
    pub map_digest: u64,
    pub ambient: Ambient,
    pub point: IntPoint,
}

impl CacheHeader {
    pub fn for_map(phi: &PolyMap, point: &IntPoint) -> Self {
        CacheHeader {
            map_digest: phi.digest(),
            ambient: phi.ambient(),
            point: point.clone(),
        }
    }

    fn render(&self) -> String {
        format!(
            "# dbm scan cache\n# format={FORMAT_VERSION}\n# map_digest={:016x}\n# ambient={}\n# point={}\n{COLUMNS}\n",
            self.map_digest, self.ambient, self.point
        )
    }
}

fn parse_ambient(s: &str) -> Result<Ambient> {
    let mut it = s.split_whitespace();
    let (kind, n) = (it.next(), it.next().and_then(|n| n.parse().ok()));
    match (kind, n) {
        (Some("affine"), Some(n)) => Ok(Ambient::Affine(n)),
        (Some("projective"), Some(n)) => Ok(Ambient::Projective(n)),
        _ => Err(Error::CacheMismatch(format!("bad ambient {s:?}"))),
    }
}

pub fn render_row(r: &ScanRow) -> String {
    match r.outcome {
        RowOutcome::Cycle { tail, cycle } => format!("{},{tail},{cycle},0", r.prime),
        RowOutcome::Overrun => format!("{},,,1", r.prime),
        RowOutcome::BadReduction => format!("{},,,bad", r.prime),
    }
}

fn parse_row(rec: &csv::StringRecord) -> Result<ScanRow> {
    let bad = || {
        Error::CacheMismatch(format!(
            "bad cache row {:?}",
            rec.iter().collect::<Vec<_>>()
        ))
    };
    if rec.len() != 4 {
        return Err(bad());
    }
    let prime: u64 = rec[0].parse().map_err(|_| bad())?;
    let outcome = match &rec[3] {
        "0" => RowOutcome::Cycle {
            tail: rec[1].parse().map_err(|_| bad())?,
            cycle: rec[2].parse().map_err(|_| bad())?,
        },
        "1" => RowOutcome::Overrun,
        "bad" => RowOutcome::BadReduction,
        _ => return Err(bad()),
    };
    Ok(ScanRow { prime, outcome })
}

/// Reads a cache file into its header and sorted rows.
pub fn read_cache(path: &Path) -> Result<(CacheHeader, CycleScan)> {
    let text = std::fs::read_to_string(path)?;
    let mut digest = None;
    let mut ambient = None;
    let mut point = None;
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let Some((k, v)) = line.trim_start_matches('#').trim().split_once('=') else {
            continue;
        };
        match k {
            "format" if v != FORMAT_VERSION.to_string() => {
                return Err(Error::CacheMismatch(format!(
                    "unsupported cache format {v}"
                )))
            }
            "map_digest" => {
                digest = Some(
                    u64::from_str_radix(v, 16)
                        .map_err(|_| Error::CacheMismatch("bad digest".into()))?,
                )
            }
            "ambient" => ambient = Some(parse_ambient(v)?),
            "point" => point = Some(v.parse::<IntPoint>()?),
            _ => {}
        }
    }
    let missing = |what: &str| Error::CacheMismatch(format!("cache header lacks {what}"));
    let header = CacheHeader {
        map_digest: digest.ok_or_else(|| missing("map_digest"))?,
        ambient: ambient.ok_or_else(|| missing("ambient"))?,
        point: point.ok_or_else(|| missing("point"))?,
    };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::CacheMismatch(e.to_string()))?;
        rows.push(parse_row(&rec)?);
    }
    rows.sort_by_key(|r| r.prime);
    rows.dedup_by_key(|r| r.prime);
    let scan = CycleScan {
        map_digest: header.map_digest,
        ambient: header.ambient,
        point: header.point.clone(),
        rows,
    };
    Ok((header, scan))
}

/// A cache bound to one map and starting point.
#[derive(Debug)]
pub struct ScanCache {
    path: PathBuf,
    header: CacheHeader,
    scan: CycleScan,
}

impl ScanCache {
    /// Opens `path`, creating it if absent. An existing cache must have been
    /// written for the same map digest, ambient space and point.
    pub fn open(path: &Path, phi: &PolyMap, point: &IntPoint) -> Result<Self> {
        let header = CacheHeader::for_map(phi, point);
        if path.exists() {
            let (found, scan) = read_cache(path)?;
            if found != header {
                return Err(Error::CacheMismatch(format!(
                    "{} was written for map {:016x} at {}, not map {:016x} at {}",
                    path.display(),
                    found.map_digest,
                    found.point,
                    header.map_digest,
                    header.point
                )));
            }
            return Ok(ScanCache {
                path: path.to_path_buf(),
                header,
                scan,
            });
        }
        std::fs::write(path, header.render())?;
        Ok(ScanCache {
            path: path.to_path_buf(),
            scan: CycleScan {
                map_digest: header.map_digest,
                ambient: header.ambient,
                point: point.clone(),
                rows: Vec::new(),
            },
            header,
        })
    }

    pub fn header(&self) -> &CacheHeader {
        &self.header
    }

    pub fn scan(&self) -> &CycleScan {
        &self.scan
    }

    /// Scans primes `<= bound` that are not cached yet, appends them to the
    /// file in ascending order, and returns how many were added.
    pub fn extend(&mut self, phi: &PolyMap, bound: u64, budget: u64, exec: Exec) -> Result<usize> {
        let have: std::collections::HashSet<u64> = self.scan.rows.iter().map(|r| r.prime).collect();
        let todo: Vec<u64> = sieve_primes(bound)?
            .into_iter()
            .filter(|p| !have.contains(p))
            .collect();
        if todo.is_empty() {
            return Ok(0);
        }
        let rows = scan_primes(phi, &self.header.point, &todo, budget, exec)?;
        let file = OpenOptions::new().append(true).open(&self.path)?;
        let mut out = BufWriter::new(file);
        for r in &rows {
            writeln!(out, "{}", render_row(r))?;
        }
        out.flush()?;
        self.scan.rows.extend(rows);
        self.scan.rows.sort_by_key(|r| r.prime);
        Ok(todo.len())
    }
}

/// Writes a scan as a fresh cache file.
pub fn write_cache(path: &Path, scan: &CycleScan) -> Result<()> {
    let header = CacheHeader {
        map_digest: scan.map_digest,
        ambient: scan.ambient,
        point: scan.point.clone(),
    };
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(header.render().as_bytes())?;
    for r in &scan.rows {
        writeln!(out, "{}", render_row(r))?;
    }
    out.flush()?;
    Ok(())
}

/// Rows as plain CSV (`prime,tail,cycle,overrun`) without the header block.
pub fn scan_csv(scan: &CycleScan) -> String {
    let mut out = format!("{COLUMNS}\n");
    for r in &scan.rows {
        out.push_str(&render_row(r));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use dbm_core::variety::text::parse_map;

    fn phi() -> PolyMap {
        parse_map("ambient projective 1\nx1^2 + 5*x2^2\nx2^2\n").unwrap()
    }

    #[test]
    fn create_extend_resume() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scan.csv");
        let pt = IntPoint::from_i64(&[1, 1]);
        let mut c = ScanCache::open(&path, &phi(), &pt).unwrap();
        assert_eq!(c.extend(&phi(), 10, 1000, Exec::Sequential).unwrap(), 4);
        let first = std::fs::read_to_string(&path).unwrap();
        assert!(first.contains("\n3,1,2,0\n") && first.contains("\n7,1,1,0\n"));
        let mut again = ScanCache::open(&path, &phi(), &pt).unwrap();
        assert_eq!(again.extend(&phi(), 10, 1000, Exec::Sequential).unwrap(), 0);
        assert_eq!(std::fs::read_to_string(&path).unwrap(), first);
        assert_eq!(again.extend(&phi(), 20, 1000, Exec::Sequential).unwrap(), 4);
        assert_eq!(again.scan().rows.len(), 8);
        let other = IntPoint::from_i64(&[2, 1]);
        assert!(matches!(
            ScanCache::open(&path, &phi(), &other),
            Err(Error::CacheMismatch(_))
        ));
    }

    #[test]
    fn round_trip_with_every_row_kind() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.csv");
        let scan = CycleScan {
            map_digest: 0xdead_beef,
            ambient: Ambient::Affine(3),
            point: IntPoint::from_i64(&[1, -2, 3]),
            rows: vec![
                ScanRow {
                    prime: 2,
                    outcome: RowOutcome::BadReduction,
                },
                ScanRow {
                    prime: 3,
                    outcome: RowOutcome::Cycle { tail: 0, cycle: 3 },
                },
                ScanRow {
                    prime: 5,
                    outcome: RowOutcome::Overrun,
                },
            ],
        };
        write_cache(&path, &scan).unwrap();
        let (_, back) = read_cache(&path).unwrap();
        assert_eq!(back, scan);
    }

    #[test]
    fn unsorted_rows_are_sorted_on_read() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u.csv");
        std::fs::write(
            &path,
            "# format=1\n# map_digest=00000000000000ff\n# ambient=affine 1\n# point=0\nprime,tail,cycle,overrun\n5,0,1,0\n2,0,1,0\n",
        )
        .unwrap();
        let (_, scan) = read_cache(&path).unwrap();
        assert_eq!(scan.rows[0].prime, 2);
        std::fs::write(&path, "# format=9\n").unwrap();
        assert!(read_cache(&path).is_err());
    }
}
