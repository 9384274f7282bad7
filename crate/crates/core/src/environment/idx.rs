//! IDX container format (as used by MNIST).
//!
//! Layout: a 4-byte big-endian magic `0x0000_08NN` where `NN` is the number of
//! dimensions, then one big-endian `u32` per dimension, then the payload as
//! raw unsigned bytes in row-major order.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Error)]
pub enum IdxError {
    #[error("bad magic number at byte offset {offset}: expected {expected:#010x}, found {found:#010x}")]
    BadMagic { offset: usize, expected: u32, found: u32 },
    #[error("truncated file at byte offset {offset}: needed {needed} more bytes, {available} available")]
    Truncated {
        offset: usize,
        needed: usize,
        available: usize,
    },
    #[error("unexpected image dimensions at byte offset {offset}: {rows}x{cols} (expected 28x28)")]
    BadDimensions { offset: usize, rows: usize, cols: usize },
    #[error("image/label count mismatch at byte offset {offset}: {images} images vs {labels} labels")]
    CountMismatch {
        offset: usize,
        images: usize,
        labels: usize,
    },
    #[error("label {label} at byte offset {offset} is not a digit")]
    BadLabel { offset: usize, label: u8 },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Decoded image file: `count` images of `rows × cols` raw bytes each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn count(&self) -> usize {
        let per = self.rows * self.cols;
        if per == 0 {
            0
        } else {
            self.pixels.len() / per
        }
    }

    pub fn image(&self, i: usize) -> &[u8] {
        let per = self.rows * self.cols;
        &self.pixels[i * per..(i + 1) * per]
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IdxError> {
        let available = self.bytes.len() - self.pos;
        if available < n {
            return Err(IdxError::Truncated {
                offset: self.pos,
                needed: n,
                available,
            });
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32, IdxError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn magic(&mut self, expected: u32) -> Result<(), IdxError> {
        let offset = self.pos;
        let found = self.u32()?;
        if found != expected {
            return Err(IdxError::BadMagic { offset, expected, found });
        }
        Ok(())
    }
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages, IdxError> {
    let mut rd = Reader { bytes, pos: 0 };
    rd.magic(IMAGES_MAGIC)?;
    let count = rd.u32()? as usize;
    let dims_offset = rd.pos;
    let rows = rd.u32()? as usize;
    let cols = rd.u32()? as usize;
    if rows != 28 || cols != 28 {
        return Err(IdxError::BadDimensions {
            offset: dims_offset,
            rows,
            cols,
        });
    }
    let pixels = rd.take(count * rows * cols)?.to_vec();
    Ok(IdxImages { rows, cols, pixels })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, IdxError> {
    let mut rd = Reader { bytes, pos: 0 };
    rd.magic(LABELS_MAGIC)?;
    let count = rd.u32()? as usize;
    let start = rd.pos;
    let labels = rd.take(count)?.to_vec();
    if let Some(i) = labels.iter().position(|&l| l > 9) {
        return Err(IdxError::BadLabel {
            offset: start + i,
            label: labels[i],
        });
    }
    Ok(labels)
}

pub fn write_idx_images(images: &IdxImages) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    out.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.count() as u32).to_be_bytes());
    out.extend_from_slice(&(images.rows as u32).to_be_bytes());
    out.extend_from_slice(&(images.cols as u32).to_be_bytes());
    out.extend_from_slice(&images.pixels);
    out
}

pub fn write_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, IdxError> {
    fs::read(path).map_err(|source| IdxError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(n: usize) -> IdxImages {
        IdxImages {
            rows: 28,
            cols: 28,
            pixels: (0..n * 784).map(|i| (i % 251) as u8).collect(),
        }
    }

    #[test]
    fn header_is_big_endian() {
        let bytes = write_idx_images(&fixture(2));
        assert_eq!(&bytes[..4], &[0, 0, 8, 3]);
        assert_eq!(&bytes[4..8], &[0, 0, 0, 2]);
        assert_eq!(&bytes[8..16], &[0, 0, 0, 28, 0, 0, 0, 28]);
        assert_eq!(bytes.len(), 16 + 2 * 784);
        assert_eq!(&write_idx_labels(&[3, 7])[..], &[0, 0, 8, 1, 0, 0, 0, 2, 3, 7]);
    }

    #[test]
    fn corrupted_magic_reports_offset_zero() {
        let mut bytes = write_idx_images(&fixture(1));
        bytes[3] = 0x01;
        match parse_idx_images(&bytes) {
            Err(IdxError::BadMagic { offset: 0, found, .. }) => assert_eq!(found, 0x0801),
            other => panic!("unexpected {other:?}"),
        }
        let mut labels = write_idx_labels(&[1]);
        labels[2] = 9;
        assert!(matches!(parse_idx_labels(&labels), Err(IdxError::BadMagic { offset: 0, .. })));
    }

    #[test]
    fn truncation_reports_offset() {
        let bytes = write_idx_images(&fixture(2));
        match parse_idx_images(&bytes[..bytes.len() - 10]) {
            Err(IdxError::Truncated { offset: 16, needed, available }) => {
                assert_eq!(needed, 2 * 784);
                assert_eq!(available, 2 * 784 - 10);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_idx_labels(&[0, 0, 8]), Err(IdxError::Truncated { offset: 0, .. })));
    }

    #[test]
    fn wrong_dimensions_rejected() {
        let imgs = IdxImages {
            rows: 2,
            cols: 2,
            pixels: vec![0; 4],
        };
        assert!(matches!(
            parse_idx_images(&write_idx_images(&imgs)),
            Err(IdxError::BadDimensions { offset: 8, rows: 2, cols: 2 })
        ));
    }

    #[test]
    fn non_digit_label_rejected() {
        assert!(matches!(
            parse_idx_labels(&write_idx_labels(&[1, 12])),
            Err(IdxError::BadLabel { offset: 9, label: 12 })
        ));
    }

    #[test]
    fn round_trip() {
        let imgs = fixture(3);
        assert_eq!(parse_idx_images(&write_idx_images(&imgs)).unwrap(), imgs);
        assert_eq!(parse_idx_labels(&write_idx_labels(&[0, 9, 4])).unwrap(), vec![0, 9, 4]);
    }
}
