//! binvox reader/writer.
//!
//! ```text
//! #binvox 1
//! dim X Y Z
//! translate tx ty tz
//! scale s
//! data
//! <(value, count) byte pairs>
//! ```
//!
//! Runs cover the grid with `x` outermost, then `z`, then `y` innermost;
//! `y` is up in both the file and the in-memory grid.

use std::fmt::Write as _;

use thiserror::Error;

use crate::grid::{Dims, VoxelGrid};

/// Largest accepted grid volume, as a guard against hostile headers.
pub const MAX_VOLUME: usize = 1 << 30;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BinvoxError {
    #[error("byte {offset}: missing `#binvox` magic")]
    BadMagic { offset: usize },
    #[error("byte {offset}: {reason}")]
    Header { offset: usize, reason: String },
    #[error("byte {offset}: dims {dims:?} overflow")]
    DimOverflow { offset: usize, dims: [usize; 3] },
    #[error("byte {offset}: run-length payload covers {covered} of {expected} voxels")]
    RleLength { offset: usize, covered: usize, expected: usize },
    #[error("byte {offset}: {reason}")]
    Payload { offset: usize, reason: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BinvoxHeader {
    pub version: u32,
    pub dims: Dims,
    pub translate: [f64; 3],
    pub scale: f64,
}

impl BinvoxHeader {
    pub fn new(dims: Dims) -> Self {
        BinvoxHeader {
            version: 1,
            dims,
            translate: [0.0; 3],
            scale: 1.0,
        }
    }
}

fn file_order(dims: Dims) -> impl Iterator<Item = [usize; 3]> {
    (0..dims.x).flat_map(move |x| (0..dims.z).flat_map(move |z| (0..dims.y).map(move |y| [x, y, z])))
}

/// Canonical encoding: maximal runs, split at 255.
pub fn write_binvox(g: &VoxelGrid) -> Vec<u8> {
    write_binvox_with(g, &BinvoxHeader::new(g.dims()))
}

pub fn write_binvox_with(g: &VoxelGrid, header: &BinvoxHeader) -> Vec<u8> {
    let d = g.dims();
    let mut text = String::new();
    writeln!(text, "#binvox {}", header.version).unwrap();
    writeln!(text, "dim {} {} {}", d.x, d.y, d.z).unwrap();
    let [tx, ty, tz] = header.translate;
    writeln!(text, "translate {tx} {ty} {tz}").unwrap();
    writeln!(text, "scale {}", header.scale).unwrap();
    text.push_str("data\n");
    let mut out = text.into_bytes();

    let mut run: Option<(bool, u8)> = None;
    for [x, y, z] in file_order(d) {
        let v = g.get(x, y, z);
        run = match run {
            Some((rv, n)) if rv == v && n < 255 => Some((rv, n + 1)),
            Some((rv, n)) => {
                out.extend_from_slice(&[rv as u8, n]);
                Some((v, 1))
            }
            None => Some((v, 1)),
        };
    }
    if let Some((rv, n)) = run {
        out.extend_from_slice(&[rv as u8, n]);
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn line(&mut self) -> Option<(usize, &'a str)> {
        if self.pos >= self.bytes.len() {
            return None;
        }
        let start = self.pos;
        let end = self.bytes[start..]
            .iter()
            .position(|&b| b == b'\n')
            .map_or(self.bytes.len(), |i| start + i);
        self.pos = (end + 1).min(self.bytes.len());
        let s = std::str::from_utf8(&self.bytes[start..end]).ok()?;
        Some((start, s.trim_end_matches('\r')))
    }
}

fn header_err(offset: usize, reason: impl Into<String>) -> BinvoxError {
    BinvoxError::Header {
        offset,
        reason: reason.into(),
    }
}

fn floats<const N: usize>(offset: usize, fields: &[&str]) -> Result<[f64; N], BinvoxError> {
    if fields.len() != N {
        return Err(header_err(offset, format!("expected {N} values, found {}", fields.len())));
    }
    let mut out = [0.0; N];
    for (o, f) in out.iter_mut().zip(fields) {
        *o = f.parse().map_err(|_| header_err(offset, format!("bad number {f:?}")))?;
    }
    Ok(out)
}

pub fn read_binvox(bytes: &[u8]) -> Result<VoxelGrid, BinvoxError> {
    read_binvox_with_header(bytes).map(|(_, g)| g)
}

pub fn read_binvox_with_header(bytes: &[u8]) -> Result<(BinvoxHeader, VoxelGrid), BinvoxError> {
    let mut cur = Cursor { bytes, pos: 0 };
    let (off, first) = cur.line().ok_or(BinvoxError::BadMagic { offset: 0 })?;
    let version = first
        .strip_prefix("#binvox ")
        .and_then(|v| v.trim().parse::<u32>().ok())
        .ok_or(BinvoxError::BadMagic { offset: off })?;

    let mut dims = None;
    let mut translate = [0.0; 3];
    let mut scale = 1.0;
    loop {
        let (off, line) = cur
            .line()
            .ok_or_else(|| header_err(bytes.len(), "header ends before `data`"))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.first().copied() {
            Some("data") => break,
            Some("dim") => {
                let mut d = [0usize; 3];
                if fields.len() != 4 {
                    return Err(header_err(off, "`dim` takes three values"));
                }
                for (o, f) in d.iter_mut().zip(&fields[1..]) {
                    *o = f.parse().map_err(|_| header_err(off, format!("bad dim {f:?}")))?;
                }
                let volume = d[0].checked_mul(d[1]).and_then(|v| v.checked_mul(d[2]));
                match volume {
                    Some(v) if v > 0 && v <= MAX_VOLUME => dims = Some(Dims::new(d[0], d[1], d[2])),
                    _ => return Err(BinvoxError::DimOverflow { offset: off, dims: d }),
                }
            }
            Some("translate") => translate = floats::<3>(off, &fields[1..])?,
            Some("scale") => scale = floats::<1>(off, &fields[1..])?[0],
            Some(other) => return Err(header_err(off, format!("unknown header line {other:?}"))),
            None => {}
        }
    }
    let dims = dims.ok_or_else(|| header_err(cur.pos, "missing `dim` line"))?;

    let payload_start = cur.pos;
    let payload = &bytes[payload_start..];
    let expected = dims.volume();
    let mut g = VoxelGrid::new(dims);
    let mut order = file_order(dims);
    let mut covered = 0usize;
    let mut i = 0;
    while i < payload.len() {
        let offset = payload_start + i;
        if i + 1 >= payload.len() {
            return Err(BinvoxError::Payload {
                offset,
                reason: "odd trailing byte".into(),
            });
        }
        let (value, count) = (payload[i], payload[i + 1] as usize);
        if value > 1 {
            return Err(BinvoxError::Payload {
                offset,
                reason: format!("run value {value} is not 0 or 1"),
            });
        }
        if count == 0 {
            return Err(BinvoxError::Payload {
                offset: offset + 1,
                reason: "zero-length run".into(),
            });
        }
        if covered + count > expected {
            return Err(BinvoxError::RleLength {
                offset,
                covered: covered + count,
                expected,
            });
        }
        for _ in 0..count {
            let [x, y, z] = order.next().expect("bounded by expected");
            if value == 1 {
                g.set(x, y, z, true);
            }
        }
        covered += count;
        i += 2;
    }
    if covered != expected {
        return Err(BinvoxError::RleLength {
            offset: bytes.len(),
            covered,
            expected,
        });
    }
    Ok((
        BinvoxHeader {
            version,
            dims,
            translate,
            scale,
        },
        g,
    ))
}
