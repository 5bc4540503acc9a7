//! File formats: feature files, label files, CSV features, image containers
//! and model files. All binary formats are little-endian.
//!
//! Feature file (`TFV1`):
//!
//! ```text
//! "TFV1" | count: u32 | dim: u32 | count * dim f32, row-major
//! ```
//!
//! Model file (`TILDA01`):
//!
//! ```text
//! "TILDA01" | P: u32 | k: u32 | d: u32 | seed: u64
//! | C: u32 | C * (len: u32, utf-8 label)
//! | C * P * k * (d / P) anchors: f64
//! | C * P * k counters: u64
//! | rng seed: [u8; 32] | rng stream: u64 | rng word position: u128
//! ```
//!
//! Image container (`TIMG`):
//!
//! ```text
//! "TIMG" | count: u32 | height: u32 | width: u32 | channels: u32
//! | count * height * width * channels u8, row-major, channel-interleaved
//! ```

use std::env;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::augment::ImageTensor;
use crate::error::{Error, Result};
use crate::feature::FeatureVector;
use crate::labels::ClassTable;
use crate::model::{AnchorStore, ModelConfig, RngState};

pub const FEATURE_MAGIC: &[u8; 4] = b"TFV1";
pub const MODEL_MAGIC: &[u8; 7] = b"TILDA01";
pub const IMAGE_MAGIC: &[u8; 4] = b"TIMG";
pub const FEATURE_HEADER_LEN: usize = 12;

/// Environment variable whose value prefixes relative data paths.
pub const DATA_DIR_VAR: &str = "TILDA_DATA_DIR";

/// Prefixes relative paths with `$TILDA_DATA_DIR` when it is set.
pub fn resolve_path(path: impl AsRef<Path>) -> PathBuf {
    let dir = env::var_os(DATA_DIR_VAR).map(PathBuf::from);
    resolve_path_with(dir.as_deref(), path.as_ref())
}

pub fn resolve_path_with(data_dir: Option<&Path>, path: &Path) -> PathBuf {
    match data_dir {
        Some(dir) if path.is_relative() && !dir.as_os_str().is_empty() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// Bounds-checked little-endian reader over an in-memory buffer.
struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Cursor { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| {
                Error::CorruptPayload(format!(
                    "unexpected end of data at byte {} (need {n} more)",
                    self.pos
                ))
            })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u128(&mut self) -> Result<u128> {
        Ok(u128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

fn check_magic(found: &[u8], expected: &[u8]) -> Result<()> {
    if found != expected {
        return Err(Error::BadMagic {
            expected: String::from_utf8_lossy(expected).into_owned(),
            found: String::from_utf8_lossy(found).into_owned(),
        });
    }
    Ok(())
}

fn to_u32(n: usize, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::InvalidConfig(format!("{what} {n} does not fit in u32")))
}

// ---------------------------------------------------------------------------
// Feature files

pub fn encode_features(vectors: &[FeatureVector]) -> Result<Vec<u8>> {
    let dim = vectors.first().map_or(0, FeatureVector::len);
    if let Some(bad) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: bad.len(),
        });
    }
    let mut out = Vec::with_capacity(FEATURE_HEADER_LEN + vectors.len() * dim * 4);
    out.extend_from_slice(FEATURE_MAGIC);
    out.extend_from_slice(&to_u32(vectors.len(), "count")?.to_le_bytes());
    out.extend_from_slice(&to_u32(dim, "dim")?.to_le_bytes());
    for v in vectors {
        for x in v.as_slice() {
            out.extend_from_slice(&x.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_features(bytes: &[u8]) -> Result<Vec<FeatureVector>> {
    if bytes.len() < FEATURE_HEADER_LEN {
        if bytes.len() >= 4 {
            check_magic(&bytes[..4], FEATURE_MAGIC)?;
        }
        return Err(Error::Truncated {
            expected: FEATURE_HEADER_LEN as u64,
            actual: bytes.len() as u64,
        });
    }
    let mut cur = Cursor::new(bytes);
    check_magic(cur.take(4)?, FEATURE_MAGIC)?;
    let count = cur.u32()? as usize;
    let dim = cur.u32()? as usize;
    let expected = FEATURE_HEADER_LEN as u64 + count as u64 * dim as u64 * 4;
    if (bytes.len() as u64) < expected {
        return Err(Error::Truncated {
            expected,
            actual: bytes.len() as u64,
        });
    }
    if bytes.len() as u64 > expected {
        return Err(Error::CorruptPayload(format!(
            "{} trailing bytes after {count}x{dim} payload",
            bytes.len() as u64 - expected
        )));
    }
    let payload = &bytes[FEATURE_HEADER_LEN..];
    let mut out = Vec::with_capacity(count);
    for row in 0..count {
        let raw = &payload[row * dim * 4..(row + 1) * dim * 4];
        let mut v = Vec::with_capacity(dim);
        for (col, b) in raw.chunks_exact(4).enumerate() {
            let x = f32::from_le_bytes(b.try_into().unwrap());
            if !x.is_finite() {
                return Err(Error::NonFiniteValue { row, col });
            }
            v.push(x);
        }
        out.push(FeatureVector::from(v));
    }
    Ok(out)
}

pub fn read_features(path: impl AsRef<Path>) -> Result<Vec<FeatureVector>> {
    decode_features(&fs::read(path)?)
}

pub fn write_features(path: impl AsRef<Path>, vectors: &[FeatureVector]) -> Result<()> {
    fs::write(path, encode_features(vectors)?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Label files

pub fn parse_labels(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let label = line.strip_suffix('\r').unwrap_or(line);
        if label.is_empty() {
            return Err(Error::EmptyLabel { line: i + 1 });
        }
        out.push(label.to_owned());
    }
    Ok(out)
}

pub fn read_labels(path: impl AsRef<Path>) -> Result<Vec<String>> {
    parse_labels(&fs::read_to_string(path)?)
}

pub fn write_labels<S: AsRef<str>>(path: impl AsRef<Path>, labels: &[S]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for l in labels {
        writeln!(w, "{}", l.as_ref())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a feature file and its paired label file.
pub fn read_labeled(
    features: impl AsRef<Path>,
    labels: impl AsRef<Path>,
) -> Result<Vec<(FeatureVector, String)>> {
    let xs = read_features(features)?;
    let ls = read_labels(labels)?;
    if xs.len() != ls.len() {
        return Err(Error::LabelCountMismatch {
            features: xs.len(),
            labels: ls.len(),
        });
    }
    Ok(xs.into_iter().zip(ls).collect())
}

// ---------------------------------------------------------------------------
// CSV features: `dim` numeric columns followed by a label column.

pub fn read_csv_features(
    path: impl AsRef<Path>,
    has_header: bool,
) -> Result<Vec<(FeatureVector, String)>> {
    parse_csv_features(File::open(path)?, has_header)
}

pub fn parse_csv_features<R: std::io::Read>(
    reader: R,
    has_header: bool,
) -> Result<Vec<(FeatureVector, String)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut width = None;
    let mut out = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w || w < 2 {
            return Err(Error::RaggedRow {
                line,
                expected: w.max(2),
                actual: rec.len(),
            });
        }
        let mut v = Vec::with_capacity(w - 1);
        for (col, cell) in rec.iter().take(w - 1).enumerate() {
            let x: f32 = cell.parse().map_err(|_| Error::NonNumericCell {
                line,
                col: col + 1,
                value: cell.to_owned(),
            })?;
            if !x.is_finite() {
                return Err(Error::NonFiniteValue { row, col });
            }
            v.push(x);
        }
        let label = &rec[w - 1];
        if label.is_empty() {
            return Err(Error::EmptyLabel {
                line: line as usize,
            });
        }
        out.push((FeatureVector::from(v), label.to_owned()));
    }
    Ok(out)
}

pub fn write_csv_features(path: impl AsRef<Path>, rows: &[(FeatureVector, String)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (x, label) in rows {
        let mut rec: Vec<String> = x.as_slice().iter().map(|v| v.to_string()).collect();
        rec.push(label.clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Model files

pub fn encode_model(store: &AnchorStore) -> Result<Vec<u8>> {
    let cfg = store.config();
    let mut out = Vec::new();
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&to_u32(cfg.subspaces, "P")?.to_le_bytes());
    out.extend_from_slice(&to_u32(cfg.anchors, "k")?.to_le_bytes());
    out.extend_from_slice(&to_u32(cfg.dim, "d")?.to_le_bytes());
    out.extend_from_slice(&cfg.seed.to_le_bytes());
    out.extend_from_slice(&to_u32(store.num_classes(), "class count")?.to_le_bytes());
    for label in store.classes().labels() {
        out.extend_from_slice(&to_u32(label.len(), "label length")?.to_le_bytes());
        out.extend_from_slice(label.as_bytes());
    }
    for a in store.anchors_raw() {
        out.extend_from_slice(&a.to_le_bytes());
    }
    for n in store.counters_raw() {
        out.extend_from_slice(&n.to_le_bytes());
    }
    let rng = store.rng_state();
    out.extend_from_slice(&rng.seed);
    out.extend_from_slice(&rng.stream.to_le_bytes());
    out.extend_from_slice(&rng.word_pos.to_le_bytes());
    Ok(out)
}

pub fn decode_model(bytes: &[u8]) -> Result<AnchorStore> {
    let head = &bytes[..bytes.len().min(MODEL_MAGIC.len())];
    if head != MODEL_MAGIC {
        if head.len() == MODEL_MAGIC.len() && head.starts_with(b"TILDA") {
            return Err(Error::VersionMismatch {
                expected: "01".into(),
                found: String::from_utf8_lossy(&head[5..]).into_owned(),
            });
        }
        check_magic(head, MODEL_MAGIC)?;
    }
    let mut cur = Cursor::new(&bytes[MODEL_MAGIC.len()..]);
    let subspaces = cur.u32()? as usize;
    let anchors = cur.u32()? as usize;
    let dim = cur.u32()? as usize;
    let seed = cur.u64()?;
    let config = ModelConfig {
        subspaces,
        anchors,
        dim,
        seed,
    };
    config
        .validate()
        .map_err(|e| Error::CorruptPayload(e.to_string()))?;

    let c = cur.u32()? as usize;
    let mut classes = ClassTable::new();
    for i in 0..c {
        let len = cur.u32()? as usize;
        let raw = cur.take(len)?;
        let label = std::str::from_utf8(raw)
            .map_err(|_| Error::CorruptPayload(format!("label {i} is not UTF-8")))?;
        if classes.get_or_insert(label) != i {
            return Err(Error::CorruptPayload(format!("duplicate label {label:?}")));
        }
    }

    let slots = (c as u64) * (subspaces as u64) * (anchors as u64);
    let reals = slots * config.sub_dim() as u64;
    // anchors + counters + rng
    let needed = reals * 8 + slots * 8 + 32 + 8 + 16;
    if cur.remaining() as u64 != needed {
        return Err(Error::CorruptPayload(format!(
            "expected {needed} payload bytes after the class table, found {}",
            cur.remaining()
        )));
    }
    let anchor_vals = cur
        .take(reals as usize * 8)?
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let counters = cur
        .take(slots as usize * 8)?
        .chunks_exact(8)
        .map(|b| u64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let rng = RngState {
        seed: cur.take(32)?.try_into().unwrap(),
        stream: cur.u64()?,
        word_pos: cur.u128()?,
    };
    AnchorStore::from_parts(config, classes, anchor_vals, counters, rng)
}

pub fn save_model(path: impl AsRef<Path>, store: &AnchorStore) -> Result<()> {
    fs::write(path, encode_model(store)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<AnchorStore> {
    decode_model(&fs::read(path)?)
}

// ---------------------------------------------------------------------------
// Image containers

pub fn encode_images(images: &[ImageTensor]) -> Result<Vec<u8>> {
    let (h, w, ch) = images
        .first()
        .map_or((0, 0, 0), |i| (i.height(), i.width(), i.channels()));
    if images
        .iter()
        .any(|i| (i.height(), i.width(), i.channels()) != (h, w, ch))
    {
        return Err(Error::InvalidImage(
            "all images in a container must share dimensions".into(),
        ));
    }
    let mut out = Vec::with_capacity(20 + images.len() * h * w * ch);
    out.extend_from_slice(IMAGE_MAGIC);
    for n in [images.len(), h, w, ch] {
        out.extend_from_slice(&to_u32(n, "image header field")?.to_le_bytes());
    }
    for img in images {
        out.extend_from_slice(img.data());
    }
    Ok(out)
}

pub fn decode_images(bytes: &[u8]) -> Result<Vec<ImageTensor>> {
    let mut cur = Cursor::new(bytes);
    let magic = cur.take(4).map_err(|_| Error::Truncated {
        expected: 20,
        actual: bytes.len() as u64,
    })?;
    check_magic(magic, IMAGE_MAGIC)?;
    if bytes.len() < 20 {
        return Err(Error::Truncated {
            expected: 20,
            actual: bytes.len() as u64,
        });
    }
    let count = cur.u32()? as usize;
    let (h, w, ch) = (
        cur.u32()? as usize,
        cur.u32()? as usize,
        cur.u32()? as usize,
    );
    let size = h * w * ch;
    let expected = 20 + count as u64 * size as u64;
    if bytes.len() as u64 != expected {
        return Err(Error::Truncated {
            expected,
            actual: bytes.len() as u64,
        });
    }
    (0..count)
        .map(|_| ImageTensor::new(h, w, ch, cur.take(size)?.to_vec()))
        .collect()
}

pub fn read_images(path: impl AsRef<Path>) -> Result<Vec<ImageTensor>> {
    decode_images(&fs::read(path)?)
}

pub fn write_images(path: impl AsRef<Path>, images: &[ImageTensor]) -> Result<()> {
    fs::write(path, encode_images(images)?)?;
    Ok(())
}
