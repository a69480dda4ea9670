//! File formats: CSV point clouds, TSV and binary distance matrices, TSV
//! merge tables and plot data, one-column signals and label sidecars, JSON
//! reports.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{DistanceMatrix, PointCloud};
use crate::hierarchy::{Dendrogram, Merge};

/// Magic bytes of the condensed binary distance format.
pub const DISTANCE_MAGIC: &[u8; 4] = b"UMD1";

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn parse_f64(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("not a number: {field:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value {field:?}"),
        });
    }
    Ok(v)
}

fn parse_usize(field: &str, line: usize) -> Result<usize> {
    field.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("not a non-negative integer: {field:?}"),
    })
}

/// Headerless CSV, one row per point.
pub fn read_cloud<R: Read>(reader: R) -> Result<PointCloud> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut data = Vec::new();
    let mut m = None;
    let mut n = 0;
    for (idx, record) in rdr.records().enumerate() {
        let record = record?;
        let line = idx + 1;
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        match m {
            None => m = Some(record.len()),
            Some(m) if m != record.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {m} columns, found {}", record.len()),
                })
            }
            _ => {}
        }
        for field in record.iter() {
            data.push(parse_f64(field, line)?);
        }
        n += 1;
    }
    let m = m.ok_or_else(|| Error::invalid("point cloud file is empty"))?;
    PointCloud::new(data, n, m)
}

pub fn read_cloud_csv(path: &Path) -> Result<PointCloud> {
    read_cloud(File::open(path)?)
}

pub fn write_cloud<W: Write>(writer: W, cloud: &PointCloud) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for row in cloud.rows() {
        wtr.write_record(row.iter().map(|v| v.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_cloud_csv(path: &Path, cloud: &PointCloud) -> Result<()> {
    write_cloud(create(path)?, cloud)
}

/// TSV triples `i<TAB>j<TAB>d`, one per pair with `i < j`.
pub fn write_distances_tsv(path: &Path, d: &DistanceMatrix) -> Result<()> {
    let mut w = create(path)?;
    for (i, j, v) in d.pairs() {
        writeln!(w, "{i}\t{j}\t{v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads triples in any order; `n` is one more than the largest index and
/// every pair must appear exactly once.
pub fn read_distances_tsv(path: &Path) -> Result<DistanceMatrix> {
    let mut triples = Vec::new();
    for (idx, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected 3 fields, found {}", f.len()),
            });
        }
        let (i, j) = (parse_usize(f[0], idx + 1)?, parse_usize(f[1], idx + 1)?);
        if i == j {
            return Err(Error::Parse {
                line: idx + 1,
                message: "diagonal entry".into(),
            });
        }
        triples.push((i.min(j), i.max(j), parse_f64(f[2], idx + 1)?));
    }
    let n = triples.iter().map(|t| t.1 + 1).max().unwrap_or(0);
    let mut values = vec![f64::NAN; n * n.saturating_sub(1) / 2];
    for (i, j, v) in triples {
        let slot = &mut values[crate::geometry::condensed_index(n, i, j)];
        if !slot.is_nan() {
            return Err(Error::invalid(format!("pair ({i}, {j}) listed twice")));
        }
        *slot = v;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(Error::invalid("distance file does not list every pair"));
    }
    DistanceMatrix::from_condensed(n, values)
}

/// `UMD1`, then `n` as a little-endian u64, then the condensed values as
/// little-endian f64.
pub fn write_distances_bin(path: &Path, d: &DistanceMatrix) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(DISTANCE_MAGIC)?;
    w.write_all(&(d.n() as u64).to_le_bytes())?;
    for v in d.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_distances_bin(path: &Path) -> Result<DistanceMatrix> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 12 || &bytes[..4] != DISTANCE_MAGIC {
        return Err(Error::invalid("not a UMD1 distance file"));
    }
    let n = u64::from_le_bytes(bytes[4..12].try_into().expect("8 bytes")) as usize;
    let len = n * n.saturating_sub(1) / 2;
    let body = &bytes[12..];
    if body.len() != len * 8 {
        return Err(Error::invalid(format!(
            "UMD1 body holds {} bytes, expected {} for n = {n}",
            body.len(),
            len * 8
        )));
    }
    let values = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    DistanceMatrix::from_condensed(n, values)
}

/// Binary when the file starts with the magic bytes, TSV triples otherwise.
pub fn read_distances(path: &Path) -> Result<DistanceMatrix> {
    let mut head = [0u8; 4];
    let got = File::open(path)?.read(&mut head)?;
    if got == 4 && &head == DISTANCE_MAGIC {
        read_distances_bin(path)
    } else {
        read_distances_tsv(path)
    }
}

/// Merge table `step<TAB>a<TAB>b<TAB>height`, steps counted from 1.
pub fn write_dendrogram_tsv(path: &Path, dend: &Dendrogram) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "step\ta\tb\theight")?;
    for (t, m) in dend.merges.iter().enumerate() {
        writeln!(w, "{}\t{}\t{}\t{}", t + 1, m.a, m.b, m.height)?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_dendrogram_tsv`]; cluster sizes are recomputed.
pub fn read_dendrogram_tsv(path: &Path, constrained: bool) -> Result<Dendrogram> {
    let mut merges: Vec<Merge> = Vec::new();
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if idx == 0 || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 4 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected 4 fields, found {}", f.len()),
            });
        }
        rows.push((
            parse_usize(f[1], idx + 1)?,
            parse_usize(f[2], idx + 1)?,
            parse_f64(f[3], idx + 1)?,
        ));
    }
    let n = rows.len() + 1;
    let mut sizes = vec![1usize; n];
    for (t, (a, b, height)) in rows.into_iter().enumerate() {
        if a >= n + t || b >= n + t {
            return Err(Error::invalid(format!("merge {} refers to an unknown cluster", t + 1)));
        }
        let size = sizes[a] + sizes[b];
        sizes.push(size);
        merges.push(Merge { a, b, height, size });
    }
    Ok(Dendrogram {
        n,
        merges,
        constrained,
    })
}

/// Two-column plot data with a header line.
pub fn write_xy_tsv(path: &Path, x_name: &str, y_name: &str, rows: &[(f64, f64)]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{x_name}\t{y_name}")?;
    for (x, y) in rows {
        writeln!(w, "{x}\t{y}")?;
    }
    w.flush()?;
    Ok(())
}

/// Tab-separated table with a header line.
pub fn write_table_tsv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = create(path)?;
    writeln!(w, "{}", header.join("\t"))?;
    for r in rows {
        writeln!(w, "{}", r.join("\t"))?;
    }
    w.flush()?;
    Ok(())
}

/// One value per line; blank lines are skipped.
pub fn read_signal(path: &Path) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(parse_f64(&line, idx + 1)?);
        }
    }
    if out.is_empty() {
        return Err(Error::invalid("signal file is empty"));
    }
    Ok(out)
}

pub fn write_signal(path: &Path, signal: &[f64]) -> Result<()> {
    let mut w = create(path)?;
    for v in signal {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Label sidecar: one cluster label per line, aligned with the data rows.
pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut w = create(path)?;
    for l in labels {
        writeln!(w, "{l}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(parse_usize(&line, idx + 1)?);
        }
    }
    Ok(out)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}
