//! Binary array format and spectrum CSV.
//!
//! Layout, all little-endian:
//!
//! | field   | type        |                                              |
//! |---------|-------------|----------------------------------------------|
//! | magic   | `[u8; 4]`   | `b"NNCH"`                                     |
//! | version | `u32`       | currently 1                                  |
//! | kind    | `u32`       | 0 state, 1 spectrum, 2 matrix                |
//! | d       | `u32`       | number of dims that follow                   |
//! | dims    | `u32 × d`   | site dimensions (spectrum: `[len]`)          |
//! | tag     | `u32`       | cut index for spectra, 0 otherwise           |
//! | payload | `f64 × 2 n` | `(re, im)` pairs; matrices row-major `N × N` |

use std::io::{Read, Write};
use std::path::Path;

use super::{DenseState, SchmidtSpectrum, SiteGeometry};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, C64};

pub const MAGIC: [u8; 4] = *b"NNCH";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum ArrayKind {
    State = 0,
    Spectrum = 1,
    Matrix = 2,
}

struct Header {
    kind: ArrayKind,
    dims: Vec<usize>,
    tag: u32,
}

fn write_header<W: Write>(w: &mut W, h: &Header) -> Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(h.kind as u32).to_le_bytes())?;
    w.write_all(&(h.dims.len() as u32).to_le_bytes())?;
    for &n in &h.dims {
        let n = u32::try_from(n).map_err(|_| Error::Validation(format!("dimension {n} too large")))?;
        w.write_all(&n.to_le_bytes())?;
    }
    w.write_all(&h.tag.to_le_bytes())?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(Error::Validation("bad magic bytes".into()));
    }
    let version = read_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(Error::Validation(format!("unsupported format version {version}")));
    }
    let kind = match read_u32(r)? {
        0 => ArrayKind::State,
        1 => ArrayKind::Spectrum,
        2 => ArrayKind::Matrix,
        k => return Err(Error::Validation(format!("unknown array kind {k}"))),
    };
    let d = read_u32(r)? as usize;
    if d > 4096 {
        return Err(Error::Validation(format!("implausible dim count {d}")));
    }
    let dims = (0..d)
        .map(|_| read_u32(r).map(|x| x as usize))
        .collect::<Result<Vec<_>>>()?;
    let tag = read_u32(r)?;
    Ok(Header { kind, dims, tag })
}

fn write_payload<W: Write>(w: &mut W, values: impl Iterator<Item = C64>) -> Result<()> {
    for z in values {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_payload<R: Read>(r: &mut R, n: usize) -> Result<Vec<C64>> {
    let mut buf = vec![0u8; 16 * n];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            C64::new(re, im)
        })
        .collect())
}

fn expect_kind(h: &Header, kind: ArrayKind) -> Result<()> {
    if h.kind != kind {
        return Err(Error::Validation(format!(
            "expected {kind:?} array, found {:?}",
            h.kind
        )));
    }
    Ok(())
}

pub fn write_state<W: Write>(w: &mut W, state: &DenseState) -> Result<()> {
    write_header(
        w,
        &Header {
            kind: ArrayKind::State,
            dims: state.geometry().dims().to_vec(),
            tag: 0,
        },
    )?;
    write_payload(w, state.amplitudes().iter().copied())
}

/// Reads a state; the norm is not re-validated so truncated trains round-trip.
pub fn read_state<R: Read>(r: &mut R) -> Result<DenseState> {
    let h = read_header(r)?;
    expect_kind(&h, ArrayKind::State)?;
    let geometry = SiteGeometry::new(h.dims)?;
    let amp = read_payload(r, geometry.total_dim())?;
    DenseState::unnormalized(geometry, CVec::from_vec(amp))
}

pub fn write_spectrum<W: Write>(w: &mut W, spectrum: &SchmidtSpectrum) -> Result<()> {
    write_header(
        w,
        &Header {
            kind: ArrayKind::Spectrum,
            dims: vec![spectrum.values().len()],
            tag: spectrum.cut() as u32,
        },
    )?;
    write_payload(w, spectrum.values().iter().map(|&s| C64::new(s, 0.0)))
}

pub fn read_spectrum<R: Read>(r: &mut R) -> Result<SchmidtSpectrum> {
    let h = read_header(r)?;
    expect_kind(&h, ArrayKind::Spectrum)?;
    if h.dims.len() != 1 {
        return Err(Error::Validation("spectrum must have exactly one dim".into()));
    }
    let vals = read_payload(r, h.dims[0])?;
    SchmidtSpectrum::new(h.tag as usize, vals.into_iter().map(|z| z.re).collect())
}

/// Writes a square operator on a chain with site dimensions `dims`.
pub fn write_matrix<W: Write>(w: &mut W, dims: &[usize], m: &CMat) -> Result<()> {
    let n: usize = dims.iter().product();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Validation(format!(
            "matrix is {}×{}, chain dimension is {n}",
            m.nrows(),
            m.ncols()
        )));
    }
    write_header(
        w,
        &Header {
            kind: ArrayKind::Matrix,
            dims: dims.to_vec(),
            tag: 0,
        },
    )?;
    write_payload(w, (0..n).flat_map(|i| (0..n).map(move |j| m[(i, j)])))
}

pub fn read_matrix<R: Read>(r: &mut R) -> Result<(Vec<usize>, CMat)> {
    let h = read_header(r)?;
    expect_kind(&h, ArrayKind::Matrix)?;
    let n: usize = h.dims.iter().product();
    let vals = read_payload(r, n * n)?;
    Ok((h.dims, CMat::from_row_slice(n, n, &vals)))
}

/// Exports a spectrum as CSV with header `k,sigma` (k is 1-based).
pub fn spectrum_to_csv(path: &Path, spectrum: &SchmidtSpectrum) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "sigma"])?;
    for (k, s) in spectrum.values().iter().enumerate() {
        w.write_record([(k + 1).to_string(), format!("{s:e}")])?;
    }
    w.flush()?;
    Ok(())
}

pub fn spectrum_from_csv(path: &Path, cut: usize) -> Result<SchmidtSpectrum> {
    let mut r = csv::Reader::from_path(path)?;
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let sigma: f64 = rec
            .get(1)
            .ok_or_else(|| Error::Validation("missing sigma column".into()))?
            .trim()
            .parse()
            .map_err(|e| Error::Validation(format!("bad sigma value: {e}")))?;
        values.push(sigma);
    }
    SchmidtSpectrum::new(cut, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::item_rng;
    use crate::tensor_core::schmidt_spectrum;

    #[test]
    fn state_round_trip() {
        let s = DenseState::random(SiteGeometry::new(vec![2, 3, 2]).unwrap(), &mut item_rng(9, 0));
        let mut buf = Vec::new();
        write_state(&mut buf, &s).unwrap();
        assert_eq!(&buf[..4], b"NNCH");
        let back = read_state(&mut buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn spectrum_round_trip_binary_and_csv() {
        let s = DenseState::random(SiteGeometry::uniform(4, 2).unwrap(), &mut item_rng(9, 1));
        let sp = schmidt_spectrum(&s, 2).unwrap();
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &sp).unwrap();
        assert_eq!(read_spectrum(&mut buf.as_slice()).unwrap(), sp);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        spectrum_to_csv(&path, &sp).unwrap();
        let back = spectrum_from_csv(&path, 2).unwrap();
        for (a, b) in back.values().iter().zip(sp.values()) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
    }

    #[test]
    fn matrix_round_trip_and_kind_check() {
        let m = CMat::from_fn(4, 4, |i, j| C64::new(i as f64, j as f64));
        let mut buf = Vec::new();
        write_matrix(&mut buf, &[2, 2], &m).unwrap();
        let (dims, back) = read_matrix(&mut buf.as_slice()).unwrap();
        assert_eq!(dims, vec![2, 2]);
        assert_eq!(back, m);
        assert!(read_state(&mut buf.as_slice()).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(read_matrix(&mut bad.as_slice()).is_err());
    }
}
