//! Snapshot dataset files: the little-endian `ESSR` binary layout and a
//! CSV alternative.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use essr_core::sde::SnapshotDataset;

pub const MAGIC: [u8; 4] = *b"ESSR";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not an ESSR dataset (magic bytes {0:?})")]
    BadMagic([u8; 4]),
    #[error("unsupported dataset version {0}")]
    UnsupportedVersion(u32),
    #[error("malformed header: {0}")]
    BadHeader(String),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}, column {column}: cannot parse {text:?} as a number")]
    Number { line: u64, column: usize, text: String },
    #[error("invalid dataset: {0}")]
    Invalid(#[from] essr_core::Error),
}

pub fn write_binary<W: Write>(mut w: W, data: &SnapshotDataset) -> io::Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(data.dim() as u32).to_le_bytes())?;
    w.write_all(&(data.len() as u64).to_le_bytes())?;
    w.write_all(&data.h().to_le_bytes())?;
    for v in data.z_flat().iter().chain(data.x_flat()) {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()
}

/// Reads exactly `buf.len()` bytes, or reports how many were available.
fn fill<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut got = 0;
    while got < buf.len() {
        match r.read(&mut buf[got..])? {
            0 => break,
            n => got += n,
        }
    }
    Ok(got)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<SnapshotDataset, FormatError> {
    let mut head = [0u8; HEADER_LEN];
    let got = fill(&mut r, &mut head)?;
    if got >= 4 && head[..4] != MAGIC {
        return Err(FormatError::BadMagic(head[..4].try_into().unwrap()));
    }
    if got < HEADER_LEN {
        return Err(FormatError::BadHeader(format!("header needs {HEADER_LEN} bytes, found {got}")));
    }
    let version = u32::from_le_bytes(head[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let dim = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
    let m = u64::from_le_bytes(head[12..20].try_into().unwrap());
    let h = f64::from_le_bytes(head[20..28].try_into().unwrap());
    if dim == 0 {
        return Err(FormatError::BadHeader("dimension is zero".into()));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(FormatError::BadHeader(format!("time step {h} is not positive")));
    }
    let values = m
        .checked_mul(dim as u64)
        .and_then(|v| v.checked_mul(2))
        .filter(|v| v.checked_mul(8).is_some())
        .ok_or_else(|| FormatError::BadHeader("sample count overflows".into()))?;
    let expected = values * 8;
    let mut payload = Vec::new();
    r.by_ref().take(expected).read_to_end(&mut payload)?;
    if (payload.len() as u64) < expected {
        return Err(FormatError::Truncated { expected, found: payload.len() as u64 });
    }
    let mut extra = [0u8; 1];
    if fill(&mut r, &mut extra)? > 0 {
        return Err(FormatError::DimensionMismatch(format!(
            "payload is longer than {m} samples of dimension {dim}"
        )));
    }
    let mut all: Vec<f64> = payload.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
    let x = all.split_off(all.len() / 2);
    Ok(SnapshotDataset::new(dim, h, all, x)?)
}

/// CSV with one header row and columns `z1..zn, x1..xn`.
pub fn write_csv<W: Write>(w: W, data: &SnapshotDataset) -> Result<(), FormatError> {
    let n = data.dim();
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<String> = (1..=n).map(|i| format!("z{i}")).chain((1..=n).map(|i| format!("x{i}"))).collect();
    out.write_record(&header)?;
    for i in 0..data.len() {
        let row: Vec<String> = data.z(i).iter().chain(data.x(i)).map(|v| format!("{v:?}")).collect();
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a CSV of `2n` columns; the time step is not part of the file.
pub fn read_csv<R: Read>(r: R, h: f64) -> Result<SnapshotDataset, FormatError> {
    let mut rd = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(r);
    let cols = rd.headers()?.len();
    if cols == 0 || cols % 2 != 0 {
        return Err(FormatError::DimensionMismatch(format!("expected an even number of columns, found {cols}")));
    }
    let n = cols / 2;
    let (mut z, mut x) = (Vec::new(), Vec::new());
    for rec in rd.records() {
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
                FormatError::DimensionMismatch(format!("row has {len} fields, header has {expected_len}"))
            }
            _ => FormatError::Csv(e),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        for (k, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| FormatError::Number { line, column: k + 1, text: field.into() })?;
            if k < n {
                z.push(v);
            } else {
                x.push(v);
            }
        }
    }
    Ok(SnapshotDataset::new(n, h, z, x)?)
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Binary unless the extension is `.csv`, in which case `h` is required.
pub fn load(path: &Path, h: Option<f64>) -> Result<SnapshotDataset, FormatError> {
    let f = BufReader::new(File::open(path)?);
    if is_csv(path) {
        let h = h.ok_or_else(|| FormatError::BadHeader("a CSV dataset needs the time step `h`".into()))?;
        read_csv(f, h)
    } else {
        read_binary(f)
    }
}

pub fn save(path: &Path, data: &SnapshotDataset) -> Result<(), FormatError> {
    let f = BufWriter::new(File::create(path)?);
    if is_csv(path) {
        write_csv(f, data)
    } else {
        Ok(write_binary(f, data)?)
    }
}
