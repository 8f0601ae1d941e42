//! Middlebury `.flo` files: `"PIEH"`, width and height as little-endian `i32`,
//! then row-major `(dx, dy)` pairs as little-endian `f32`.

use std::io::Write;
use std::path::Path;

use tempyr_core::FlowField;

use crate::error::{io_err, Error, Result};
use crate::fsutil::write_atomic;

pub const MAGIC: &[u8; 4] = b"PIEH";
const HEADER_LEN: usize = 12;

/// Encodes a field. Components are narrowed to `f32`.
pub fn encode_flo(flow: &FlowField) -> Vec<u8> {
    let (h, w) = flow.dims();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * h * w);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(w as i32).to_le_bytes());
    out.extend_from_slice(&(h as i32).to_le_bytes());
    for v in flow.vectors() {
        out.extend_from_slice(&(v[0] as f32).to_le_bytes());
        out.extend_from_slice(&(v[1] as f32).to_le_bytes());
    }
    out
}

/// Decodes a field; `path` is only used in error messages.
pub fn decode_flo(bytes: &[u8], path: &Path) -> Result<FlowField> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::BadMagic { path: path.into() });
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Truncated {
            path: path.into(),
            expected: HEADER_LEN as u64,
            actual: bytes.len() as u64,
        });
    }
    let int = |o: usize| i32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes"));
    let (w, h) = (int(4), int(8));
    if w <= 0 || h <= 0 {
        return Err(Error::BadHeader {
            path: path.into(),
            reason: format!("size {w}x{h}"),
        });
    }
    let (w, h) = (w as usize, h as usize);
    let expected = (HEADER_LEN as u64) + 8 * (w as u64) * (h as u64);
    if (bytes.len() as u64) < expected {
        return Err(Error::Truncated {
            path: path.into(),
            expected,
            actual: bytes.len() as u64,
        });
    }
    let float = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as f64;
    let vectors = (0..w * h)
        .map(|k| {
            let o = HEADER_LEN + 8 * k;
            [float(o), float(o + 4)]
        })
        .collect();
    Ok(FlowField::from_vec(h, w, vectors)?)
}

pub fn write_flo(path: &Path, flow: &FlowField) -> Result<()> {
    let bytes = encode_flo(flow);
    write_atomic(path, |f| f.write_all(&bytes))
}

pub fn read_flo(path: &Path) -> Result<FlowField> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    decode_flo(&bytes, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_one_is_28_bytes() {
        let f = FlowField::from_vec(1, 2, vec![[1.5, -0.25], [1.5, -0.25]]).unwrap();
        let b = encode_flo(&f);
        assert_eq!(b.len(), 28);
        assert_eq!(&b[..4], b"PIEH");
        assert_eq!(i32::from_le_bytes(b[4..8].try_into().unwrap()), 2);
        assert_eq!(i32::from_le_bytes(b[8..12].try_into().unwrap()), 1);
        assert_eq!(f32::from_le_bytes(b[12..16].try_into().unwrap()), 1.5);
        assert_eq!(f32::from_le_bytes(b[16..20].try_into().unwrap()), -0.25);
        assert_eq!(decode_flo(&b, Path::new("x.flo")).unwrap(), f);
    }

    #[test]
    fn bad_magic_and_truncation() {
        let f = FlowField::constant(3, 2, [0.5, 2.0]).unwrap();
        let mut b = encode_flo(&f);
        let p = Path::new("x.flo");
        b.truncate(b.len() - 1);
        assert!(matches!(decode_flo(&b, p), Err(Error::Truncated { .. })));
        assert!(matches!(
            decode_flo(&b[..6], p),
            Err(Error::Truncated { .. })
        ));
        b[0] = b'X';
        assert!(matches!(decode_flo(&b, p), Err(Error::BadMagic { .. })));
        assert!(matches!(decode_flo(b"", p), Err(Error::BadMagic { .. })));
    }

    #[test]
    fn non_positive_size_is_rejected() {
        let mut b = MAGIC.to_vec();
        b.extend_from_slice(&0i32.to_le_bytes());
        b.extend_from_slice(&4i32.to_le_bytes());
        assert!(matches!(
            decode_flo(&b, Path::new("x")),
            Err(Error::BadHeader { .. })
        ));
    }
}
