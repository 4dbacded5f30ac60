//! NPY v1.0 for 2-D little-endian `f32` probability maps.
//!
//! Layout: the 6-byte magic `\x93NUMPY`, version bytes `1 0`, a `u16` LE
//! header length, then an ASCII dict literal
//! `{'descr': '<f4', 'fortran_order': False, 'shape': (H, W), }` padded with
//! spaces and a trailing newline so the payload starts on a 64-byte
//! boundary, then `H * W` row-major `f32` values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::mask::ProbabilityMap;

use super::{io_err, StorageError};

pub const MAGIC: &[u8; 6] = b"\x93NUMPY";
const ALIGN: usize = 64;

pub fn read_probmap(path: &Path) -> Result<ProbabilityMap<f32>, StorageError> {
    let file = File::open(path).map_err(io_err(path))?;
    read_probmap_from(&mut BufReader::new(file)).map_err(|e| e.at(path))
}

pub fn write_probmap(path: &Path, map: &ProbabilityMap<f32>) -> Result<(), StorageError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    write_probmap_to(&mut w, map)
        .and_then(|_| w.flush())
        .map_err(io_err(path))
}

pub fn read_probmap_from<R: Read>(r: &mut R) -> Result<ProbabilityMap<f32>, StorageError> {
    let mut preamble = [0u8; 10];
    r.read_exact(&mut preamble)
        .map_err(|_| StorageError::BadMagic)?;
    if &preamble[..6] != MAGIC {
        return Err(StorageError::BadMagic);
    }
    if preamble[6] != 1 {
        return Err(StorageError::UnsupportedVersion(preamble[6], preamble[7]));
    }
    let header_len = u16::from_le_bytes([preamble[8], preamble[9]]) as usize;
    let mut header = vec![0u8; header_len];
    r.read_exact(&mut header)
        .map_err(|_| StorageError::BadHeader("truncated header".into()))?;
    let header = std::str::from_utf8(&header)
        .map_err(|_| StorageError::BadHeader("header is not ASCII".into()))?;
    let dict = HeaderDict::parse(header)?;

    if dict.descr != "<f4" {
        return Err(StorageError::WrongDtype(dict.descr));
    }
    if dict.fortran_order {
        return Err(StorageError::FortranOrder);
    }
    let [height, width] = dict.shape[..] else {
        return Err(StorageError::WrongRank(dict.shape.len()));
    };

    let expected = width * height * 4;
    let mut payload = Vec::with_capacity(expected);
    r.read_to_end(&mut payload)
        .map_err(|_| StorageError::BadHeader("unreadable payload".into()))?;
    if payload.len() != expected {
        return Err(StorageError::PayloadSize {
            expected,
            actual: payload.len(),
        });
    }
    let values: Vec<f32> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    if let Some((index, &value)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(StorageError::OutOfRangeValue { index, value });
    }
    Ok(ProbabilityMap::new(width, height, values).expect("validated above"))
}

pub fn write_probmap_to<W: Write>(w: &mut W, map: &ProbabilityMap<f32>) -> std::io::Result<()> {
    let mut header = format!(
        "{{'descr': '<f4', 'fortran_order': False, 'shape': ({}, {}), }}",
        map.height(),
        map.width()
    );
    let unpadded = MAGIC.len() + 4 + header.len() + 1;
    let pad = (ALIGN - unpadded % ALIGN) % ALIGN;
    header.extend(std::iter::repeat_n(' ', pad));
    header.push('\n');

    w.write_all(MAGIC)?;
    w.write_all(&[1, 0])?;
    w.write_all(&(header.len() as u16).to_le_bytes())?;
    w.write_all(header.as_bytes())?;
    let mut buf = Vec::with_capacity(map.values().len() * 4);
    for v in map.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)
}

#[derive(Debug)]
struct HeaderDict {
    descr: String,
    fortran_order: bool,
    shape: Vec<usize>,
}

impl HeaderDict {
    fn parse(text: &str) -> Result<Self, StorageError> {
        let bad = |msg: &str| StorageError::BadHeader(format!("{msg}: {}", text.trim()));
        let body = text
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| bad("not a dict literal"))?;

        let descr = value_after(body, "descr")
            .and_then(|v| {
                let q = v.chars().next().filter(|c| *c == '\'' || *c == '"')?;
                let rest = &v[1..];
                rest.find(q).map(|end| rest[..end].to_owned())
            })
            .ok_or_else(|| bad("missing descr"))?;

        let fortran_order = match value_after(body, "fortran_order") {
            Some(v) if v.starts_with("False") => false,
            Some(v) if v.starts_with("True") => true,
            _ => return Err(bad("missing fortran_order")),
        };

        let shape_text = value_after(body, "shape")
            .and_then(|v| v.strip_prefix('('))
            .and_then(|v| v.find(')').map(|end| &v[..end]))
            .ok_or_else(|| bad("missing shape"))?;
        let shape = shape_text
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.trim_end_matches('L').parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| bad("bad shape"))?;

        Ok(Self {
            descr,
            fortran_order,
            shape,
        })
    }
}

/// Text following `'key':` (or `"key":`) with leading whitespace removed.
fn value_after<'a>(body: &'a str, key: &str) -> Option<&'a str> {
    ["'", "\""].iter().find_map(|q| {
        let pat = format!("{q}{key}{q}");
        let at = body.find(&pat)? + pat.len();
        let rest = body[at..].trim_start().strip_prefix(':')?;
        Some(rest.trim_start())
    })
}
