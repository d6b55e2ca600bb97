//! The PSTF tensor file: a little-endian f32 container with a fixed
//! 8-byte header plus dims. Roundtrips are bitwise.
//!
//! Layout: magic `PSTF` | version u16 | dtype u8 (1 = f32) | rank u8 |
//! rank x dims u32 | row-major f32 payload. All integers little-endian.

use std::path::Path;

use crate::error::{Error, Result};
use crate::scoremap::SemanticScoreMap;

const MAGIC: &[u8; 4] = b"PSTF";
const VERSION: u16 = 1;
const DTYPE_F32: u8 = 1;

/// A dense row-major f32 tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub dims: Vec<u32>,
    pub data: Vec<f32>,
}

impl Tensor {
    pub fn new(dims: Vec<u32>, data: Vec<f32>) -> Result<Self> {
        let expected: usize = dims.iter().map(|&d| d as usize).product();
        if data.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "tensor data has {} values, dims {:?} require {}",
                data.len(),
                dims,
                expected
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }
}

pub fn write_tensor(tensor: &Tensor, path: &Path) -> Result<()> {
    let mut bytes =
        Vec::with_capacity(8 + tensor.dims.len() * 4 + tensor.data.len() * 4);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.push(DTYPE_F32);
    bytes.push(tensor.dims.len() as u8);
    for &d in &tensor.dims {
        bytes.extend_from_slice(&d.to_le_bytes());
    }
    for &v in &tensor.data {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_tensor(path: &Path) -> Result<Tensor> {
    if !path.exists() {
        return Err(Error::MissingInput(path.to_path_buf()));
    }
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.len() < 8 {
        return Err(Error::PayloadSize {
            expected: 8,
            actual: bytes.len(),
        });
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dtype = bytes[6];
    if dtype != DTYPE_F32 {
        return Err(Error::UnsupportedDtype(dtype));
    }
    let rank = bytes[7] as usize;
    let header_len = 8 + rank * 4;
    if bytes.len() < header_len {
        return Err(Error::PayloadSize {
            expected: header_len,
            actual: bytes.len(),
        });
    }
    let mut dims = Vec::with_capacity(rank);
    for i in 0..rank {
        let off = 8 + i * 4;
        dims.push(u32::from_le_bytes([
            bytes[off],
            bytes[off + 1],
            bytes[off + 2],
            bytes[off + 3],
        ]));
    }
    let count: usize = dims.iter().map(|&d| d as usize).product();
    let expected = header_len + count * 4;
    if bytes.len() != expected {
        return Err(Error::PayloadSize {
            expected,
            actual: bytes.len(),
        });
    }
    let data = bytes[header_len..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    Ok(Tensor { dims, data })
}

/// Interprets a rank-3 tensor (H, W, C) as a semantic score map; channel
/// `c` carries class `channel_order[c]`.
pub fn semantic_from_tensor(tensor: Tensor, channel_order: Vec<u32>) -> Result<SemanticScoreMap> {
    if tensor.rank() != 3 {
        return Err(Error::InvalidArgument(format!(
            "semantic tensor must have rank 3 (H, W, C), got rank {}",
            tensor.rank()
        )));
    }
    let (h, w, c) = (tensor.dims[0], tensor.dims[1], tensor.dims[2]);
    if c as usize != channel_order.len() {
        return Err(Error::InvalidArgument(format!(
            "tensor has {} channels but the catalog defines {}",
            c,
            channel_order.len()
        )));
    }
    SemanticScoreMap::new(h, w, channel_order, tensor.data)
}

pub fn semantic_to_tensor(scores: &SemanticScoreMap) -> Tensor {
    Tensor {
        dims: vec![scores.height(), scores.width(), scores.channels() as u32],
        data: scores.data().to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_bitwise() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pstf");
        let t = Tensor::new(vec![2, 3, 4], (0..24).map(|i| i as f32 * 0.5 - 3.0).collect()).unwrap();
        write_tensor(&t, &path).unwrap();
        let back = read_tensor(&path).unwrap();
        assert_eq!(t, back);
        let bits: Vec<u32> = t.data.iter().map(|v| v.to_bits()).collect();
        let back_bits: Vec<u32> = back.data.iter().map(|v| v.to_bits()).collect();
        assert_eq!(bits, back_bits);
    }

    #[test]
    fn bad_magic_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.pstf");
        std::fs::write(&path, b"XXXX\x01\x00\x01\x00").unwrap();
        assert!(matches!(read_tensor(&path).unwrap_err(), Error::BadMagic));
    }

    #[test]
    fn truncated_payload_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.pstf");
        // Declares 2x2 f32 but carries only 12 payload bytes.
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"PSTF");
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.push(1);
        bytes.push(2);
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&2u32.to_le_bytes());
        bytes.extend_from_slice(&[0u8; 12]);
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(
            read_tensor(&path).unwrap_err(),
            Error::PayloadSize {
                expected: 32,
                actual: 28
            }
        ));
    }

    #[test]
    fn unsupported_dtype_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dtype.pstf");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"PSTF");
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.push(7);
        bytes.push(0);
        std::fs::write(&path, bytes).unwrap();
        assert!(matches!(
            read_tensor(&path).unwrap_err(),
            Error::UnsupportedDtype(7)
        ));
    }

    #[test]
    fn missing_file_is_a_validation_error() {
        let err = read_tensor(Path::new("/nonexistent/t.pstf")).unwrap_err();
        assert!(matches!(err, Error::MissingInput(_)));
    }
}
