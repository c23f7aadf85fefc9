//! File formats: DTF1 binary tensors, CSV matrices and 8-bit binary PGM.
//!
//! DTF1 layout (all little-endian):
//!
//! ```text
//! b"DTF1" | u32 order d | d x u32 dims | prod(dims) x f64 values
//! ```
//!
//! Values follow the crate-wide linearization (first mode fastest).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{DenseMatrix, DenseTensor};

const MAGIC: &[u8; 4] = b"DTF1";
const MAX_ORDER: usize = 8;

pub fn encode_dtf1(x: &DenseTensor) -> Vec<u8> {
    let mut buf = Vec::with_capacity(8 + 4 * x.order() + 8 * x.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(x.order() as u32).to_le_bytes());
    for &n in x.dims() {
        buf.extend_from_slice(&(n as u32).to_le_bytes());
    }
    for v in x.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf
}

pub fn decode_dtf1(bytes: &[u8]) -> Result<DenseTensor> {
    let mut r = bytes;
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("truncated DTF1 header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Format("missing DTF1 magic".into()));
    }
    let order = read_u32(&mut r)? as usize;
    if order == 0 || order > MAX_ORDER {
        return Err(Error::Format(format!("unsupported tensor order {order}")));
    }
    let mut dims = Vec::with_capacity(order);
    for _ in 0..order {
        dims.push(read_u32(&mut r)? as usize);
    }
    let n = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Format("dimension product overflows".into()))?;
    if r.len() != n * 8 {
        return Err(Error::Format(format!(
            "expected {} value bytes, found {}",
            n * 8,
            r.len()
        )));
    }
    let data = r
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseTensor::new(dims, data).map_err(|e| Error::Format(e.to_string()))
}

fn read_u32(r: &mut &[u8]) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)
        .map_err(|_| Error::Format("truncated DTF1 header".into()))?;
    Ok(u32::from_le_bytes(b))
}

pub fn write_dtf1(path: impl AsRef<Path>, x: &DenseTensor) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_dtf1(x))?;
    Ok(())
}

pub fn read_dtf1(path: impl AsRef<Path>) -> Result<DenseTensor> {
    decode_dtf1(&fs::read(path)?)
}

/// Matrix as CSV, one row per line. Values use Rust's shortest round-trip
/// formatting, so a write/read cycle is exact.
pub fn matrix_to_csv(m: &DenseMatrix) -> String {
    let mut s = String::new();
    for r in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|c| format!("{}", m.get(r, c))).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn matrix_from_csv(text: &str) -> Result<DenseMatrix> {
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, line)| {
            line.split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Format(format!("line {}: {e}", i + 1)))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Err(Error::Format("empty CSV matrix".into()));
    }
    DenseMatrix::from_rows(&rows).map_err(|_| Error::Format("ragged CSV rows".into()))
}

/// Reads a binary (P5) 8-bit PGM as a `height x width` matrix-shaped tensor
/// (mode 1 = image row).
pub fn read_pgm(path: impl AsRef<Path>) -> Result<DenseTensor> {
    decode_pgm(&fs::read(path)?)
}

pub fn decode_pgm(bytes: &[u8]) -> Result<DenseTensor> {
    let mut pos = 0;
    let mut fields = Vec::with_capacity(4);
    while fields.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    if fields[0] != "P5" {
        return Err(Error::Format(format!(
            "unsupported PGM magic {}",
            fields[0]
        )));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::Format(format!("bad PGM field {s}")))
    };
    let (w, h, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
    if maxval == 0 || maxval > 255 {
        return Err(Error::Format(format!(
            "only 8-bit PGM is supported (maxval {maxval})"
        )));
    }
    if w == 0 || h == 0 {
        return Err(Error::Format("empty PGM image".into()));
    }
    let raster = bytes
        .get(pos..pos + w * h)
        .ok_or_else(|| Error::Format("truncated PGM raster".into()))?;
    let mut x = DenseTensor::zeros(vec![h, w])?;
    for r in 0..h {
        for c in 0..w {
            x.set(&[r, c], raster[r * w + c] as f64);
        }
    }
    Ok(x)
}

/// Writes a 2-mode tensor as an 8-bit PGM, rounding and clamping to 0..=255.
pub fn write_pgm(path: impl AsRef<Path>, x: &DenseTensor) -> Result<()> {
    if x.order() != 2 {
        return Err(Error::dims("PGM output needs a 2-mode tensor"));
    }
    let (h, w) = (x.dims()[0], x.dims()[1]);
    let mut buf = format!("P5\n{w} {h}\n255\n").into_bytes();
    for r in 0..h {
        for c in 0..w {
            buf.push(x.get(&[r, c]).round().clamp(0.0, 255.0) as u8);
        }
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Stacks the `*.pgm` frames of a directory (sorted by file name) into a
/// `height x width x frames` tensor.
pub fn read_pgm_frames(dir: impl AsRef<Path>) -> Result<DenseTensor> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Format("no .pgm frames in directory".into()));
    }
    let frames = paths.iter().map(read_pgm).collect::<Result<Vec<_>>>()?;
    let dims = frames[0].dims().to_vec();
    if frames.iter().any(|f| f.dims() != dims.as_slice()) {
        return Err(Error::dims("frames differ in size"));
    }
    let mut data = Vec::with_capacity(dims[0] * dims[1] * frames.len());
    for f in &frames {
        data.extend_from_slice(f.data());
    }
    DenseTensor::new(vec![dims[0], dims[1], frames.len()], data)
}

/// Loads a signal: DTF1 file, PGM image, or a directory of PGM frames.
pub fn read_signal(path: impl AsRef<Path>) -> Result<DenseTensor> {
    let path = path.as_ref();
    if path.is_dir() {
        return read_pgm_frames(path);
    }
    let bytes = fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        decode_dtf1(&bytes)
    } else if bytes.starts_with(b"P5") {
        decode_pgm(&bytes)
    } else {
        Err(Error::Format(format!(
            "{}: neither DTF1 nor P5 PGM",
            path.display()
        )))
    }
}
