use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use rayon::prelude::*;

use super::DatasetIndex;
use crate::imageproc::{load_image, preprocess, PreprocessConfig};
use crate::numlin::{check_range, Matrix, RowSource};
use crate::{Error, Result};

pub const CACHE_MAGIC: &[u8; 8] = b"F101FEAT";
pub const CACHE_VERSION: u32 = 1;

/// A build fails outright when more than this fraction of entries fail.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;

/// Sealed feature file: header, one `u32` class per row, then `n x d`
/// little-endian `f64` values.
#[derive(Debug)]
pub struct FeatureCache {
    path: PathBuf,
    n: usize,
    d: usize,
    labels: Vec<String>,
    classes: Vec<usize>,
    body_offset: u64,
    file: Mutex<File>,
}

fn read_u32(r: &mut impl Read) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> std::io::Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn truncated(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => Error::Truncated(format!("{}: header cut short", path.display())),
        _ => Error::Io(e),
    }
}

impl FeatureCache {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        let file_len = file.metadata()?.len();
        let mut r = BufReader::new(file);
        let eof = truncated(path);

        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(&eof)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Format(format!("{} is not a feature cache", path.display())));
        }
        let version = read_u32(&mut r).map_err(&eof)?;
        if version != CACHE_VERSION {
            return Err(Error::Unsupported(format!(
                "{}: cache version {version}, expected {CACHE_VERSION}",
                path.display()
            )));
        }
        let n = read_u64(&mut r).map_err(&eof)?;
        let d = read_u64(&mut r).map_err(&eof)?;
        let n_labels = read_u32(&mut r).map_err(&eof)?;
        // every later field is at least this many bytes, so a corrupt count
        // cannot trigger a huge allocation
        let mut pos = 8 + 4 + 8 + 8 + 4u64;
        if u64::from(n_labels) * 4 > file_len.saturating_sub(pos) {
            return Err(Error::Truncated(format!("{}: label table cut short", path.display())));
        }
        let mut labels = Vec::with_capacity(n_labels as usize);
        for _ in 0..n_labels {
            let len = read_u32(&mut r).map_err(&eof)?;
            pos += 4;
            if u64::from(len) > file_len.saturating_sub(pos) {
                return Err(Error::Truncated(format!("{}: label table cut short", path.display())));
            }
            let mut bytes = vec![0u8; len as usize];
            r.read_exact(&mut bytes).map_err(&eof)?;
            pos += u64::from(len);
            labels.push(
                String::from_utf8(bytes)
                    .map_err(|_| Error::Format(format!("{}: label is not UTF-8", path.display())))?,
            );
        }
        let expected = n
            .checked_mul(d)
            .and_then(|nd| nd.checked_mul(8))
            .and_then(|body| body.checked_add(n.checked_mul(4)?))
            .and_then(|rest| rest.checked_add(pos))
            .ok_or_else(|| Error::Format(format!("{}: header sizes overflow", path.display())))?;
        if file_len < expected {
            return Err(Error::Truncated(format!(
                "{}: header promises {n} rows of {d} values ({expected} bytes) but the file has {file_len}",
                path.display()
            )));
        }
        if file_len > expected {
            return Err(Error::Format(format!(
                "{}: {} trailing bytes after {n} rows",
                path.display(),
                file_len - expected
            )));
        }
        let n = n as usize;
        let d = d as usize;
        let mut classes = Vec::with_capacity(n);
        for row in 0..n {
            let c = read_u32(&mut r).map_err(&eof)? as usize;
            if c >= labels.len() {
                return Err(Error::Format(format!(
                    "{}: row {row} has class {c} but only {} labels",
                    path.display(),
                    labels.len()
                )));
            }
            classes.push(c);
        }
        let body_offset = pos + 4 * n as u64;
        Ok(Self {
            path: path.to_path_buf(),
            n,
            d,
            labels,
            classes,
            body_offset,
            file: Mutex::new(r.into_inner()),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Class index of every row.
    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    /// Rows `start..end`, exactly as stored.
    pub fn read_rows(&self, start: usize, end: usize) -> Result<Matrix> {
        check_range(start, end, self.n)?;
        let count = (end - start) * self.d;
        let mut bytes = vec![0u8; count * 8];
        if count > 0 {
            let mut file = self.file.lock().unwrap_or_else(|p| p.into_inner());
            file.seek(SeekFrom::Start(self.body_offset + (start * self.d * 8) as u64))?;
            file.read_exact(&mut bytes).map_err(|e| match e.kind() {
                std::io::ErrorKind::UnexpectedEof => {
                    Error::Truncated(format!("{}: body shorter than header claims", self.path.display()))
                }
                _ => Error::Io(e),
            })?;
        }
        let values = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk")))
            .collect();
        Matrix::from_vec(end - start, self.d, values)
    }

    pub fn read_row(&self, row: usize) -> Result<Vec<f64>> {
        Ok(self.read_rows(row, row + 1)?.into_vec())
    }

    /// The given rows, in the given order.
    pub fn read_row_set(&self, rows: &[usize]) -> Result<Matrix> {
        let mut out = Matrix::zeros(rows.len(), self.d);
        let mut i = 0;
        while i < rows.len() {
            let mut j = i + 1;
            while j < rows.len() && rows[j] == rows[j - 1] + 1 {
                j += 1;
            }
            if rows[j - 1] >= self.n {
                return Err(Error::Argument(format!("row {} outside 0..{}", rows[j - 1], self.n)));
            }
            let block = self.read_rows(rows[i], rows[j - 1] + 1)?;
            out.as_mut_slice()[i * self.d..j * self.d].copy_from_slice(block.as_slice());
            i = j;
        }
        Ok(out)
    }
}

impl RowSource for FeatureCache {
    fn n_rows(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn read_block(&self, start: usize, end: usize) -> Result<Matrix> {
        self.read_rows(start, end)
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

/// Appends rows to a temporary body file and assembles the sealed cache on
/// [`CacheWriter::finish`], so a half-written cache never sits at `out`.
pub struct CacheWriter {
    out: PathBuf,
    body_path: PathBuf,
    body: BufWriter<File>,
    labels: Vec<String>,
    classes: Vec<u32>,
    d: usize,
}

impl CacheWriter {
    pub fn create(out: &Path, labels: Vec<String>, d: usize) -> Result<Self> {
        if labels.len() > u32::MAX as usize {
            return Err(Error::Argument("too many labels".into()));
        }
        let body_path = sibling(out, ".body.tmp");
        let body = BufWriter::new(File::create(&body_path)?);
        Ok(Self {
            out: out.to_path_buf(),
            body_path,
            body,
            labels,
            classes: Vec::new(),
            d,
        })
    }

    pub fn rows_written(&self) -> usize {
        self.classes.len()
    }

    pub fn push_row(&mut self, class: usize, row: &[f64]) -> Result<()> {
        if row.len() != self.d {
            return Err(Error::Argument(format!("row has {} values, cache expects {}", row.len(), self.d)));
        }
        if class >= self.labels.len() {
            return Err(Error::Argument(format!("class {class} outside 0..{}", self.labels.len())));
        }
        for v in row {
            self.body.write_all(&v.to_le_bytes())?;
        }
        self.classes.push(class as u32);
        Ok(())
    }

    pub fn finish(self) -> Result<FeatureCache> {
        let Self {
            out,
            body_path,
            body,
            labels,
            classes,
            d,
        } = self;
        body.into_inner().map_err(|e| Error::Io(e.into_error()))?.sync_all()?;

        let tmp = sibling(&out, ".tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            w.write_all(CACHE_MAGIC)?;
            w.write_all(&CACHE_VERSION.to_le_bytes())?;
            w.write_all(&(classes.len() as u64).to_le_bytes())?;
            w.write_all(&(d as u64).to_le_bytes())?;
            w.write_all(&(labels.len() as u32).to_le_bytes())?;
            for l in &labels {
                w.write_all(&(l.len() as u32).to_le_bytes())?;
                w.write_all(l.as_bytes())?;
            }
            for c in &classes {
                w.write_all(&c.to_le_bytes())?;
            }
            std::io::copy(&mut File::open(&body_path)?, &mut w)?;
            w.into_inner().map_err(|e| Error::Io(e.into_error()))?.sync_all()?;
        }
        fs::remove_file(&body_path)?;
        fs::rename(&tmp, &out)?;
        FeatureCache::open(&out)
    }
}

/// Writes an in-memory matrix as a cache.
pub fn write_cache(out: &Path, labels: Vec<String>, classes: &[usize], rows: &Matrix) -> Result<FeatureCache> {
    if classes.len() != rows.rows() {
        return Err(Error::Argument(format!("{} classes for {} rows", classes.len(), rows.rows())));
    }
    let mut w = CacheWriter::create(out, labels, rows.cols())?;
    for (c, row) in classes.iter().zip(rows.row_iter()) {
        w.push_row(*c, row)?;
    }
    w.finish()
}

#[derive(Debug)]
pub struct BuildReport {
    pub cache: FeatureCache,
    /// Entries skipped because they could not be decoded or preprocessed.
    pub failures: Vec<(PathBuf, String)>,
}

/// Decodes and preprocesses every entry, `chunk` images at a time (in
/// parallel within a chunk), committing rows in index order. Entries that fail
/// are skipped and listed; the build errors if more than 1% fail.
pub fn build_feature_cache(idx: &DatasetIndex, cfg: &PreprocessConfig, out: &Path, chunk: usize) -> Result<BuildReport> {
    cfg.validate()?;
    if chunk == 0 {
        return Err(Error::Argument("chunk size must be at least 1".into()));
    }
    let mut writer = CacheWriter::create(out, idx.classes().to_vec(), cfg.feature_dim())?;
    let mut failures = Vec::new();
    for block in idx.entries().chunks(chunk) {
        let rows: Vec<Result<Vec<f64>>> = block
            .par_iter()
            .map(|e| {
                let img = load_image(&idx.full_path(e))?;
                Ok(preprocess(&img, cfg)?.into_inner())
            })
            .collect();
        for (entry, row) in block.iter().zip(rows) {
            match row {
                Ok(row) => writer.push_row(entry.class, &row)?,
                Err(e) => failures.push((idx.full_path(entry), e.to_string())),
            }
        }
    }
    let total = idx.len();
    if failures.len() as f64 > MAX_FAILURE_FRACTION * total as f64 {
        let body = writer.body_path.clone();
        drop(writer);
        let _ = fs::remove_file(body);
        return Err(Error::BuildFailed {
            failed: failures.len(),
            total,
            failures,
        });
    }
    Ok(BuildReport {
        cache: writer.finish()?,
        failures,
    })
}
