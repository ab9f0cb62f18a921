//! Input data: synthetic Gaussian points and MNIST IDX images.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use trp_core::{sample_matrix, EntryDistribution, SeedSpec, Vector};

use crate::error::{CliError, Result};

/// Magic number of an IDX file of unsigned bytes with three dimensions.
pub const IDX_IMAGE_MAGIC: u32 = 0x0000_0803;
pub const MNIST_SIDE: usize = 28;
pub const MNIST_DIM: usize = MNIST_SIDE * MNIST_SIDE;

/// `n` i.i.d. standard normal vectors in `ℝᵈ`.
pub fn gen_synthetic(d: usize, n: usize, seed: &SeedSpec) -> Result<Vec<Vector>> {
    if d == 0 || n == 0 {
        return Err(CliError::Config(format!(
            "synthetic data needs d >= 1 and n >= 1, got d = {d}, n = {n}"
        )));
    }
    Ok((0..n)
        .map(|i| {
            sample_matrix(&EntryDistribution::Gaussian, d, 1, &seed.derive(i as u64))
                .map(|m| Vector::new(m.into_data()))
        })
        .collect::<trp_core::Result<Vec<_>>>()?)
}

/// Reads the first `n` images of an IDX image file as unit-norm vectors of
/// length 784: pixels scaled to `[0, 1]`, flattened row-major, then
/// normalized. Only the header and the requested images are read.
pub fn load_mnist(path: &Path, n: usize) -> Result<Vec<Vector>> {
    let file = File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_idx_images(BufReader::new(file), path, n)
}

pub(crate) fn read_idx_images<R: Read>(mut reader: R, path: &Path, n: usize) -> Result<Vec<Vector>> {
    let format = |offset: u64, reason: String| CliError::Format {
        path: path.to_path_buf(),
        offset,
        reason,
    };

    let mut header = [0u8; 16];
    let got = read_full(&mut reader, &mut header).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if got < 4 {
        return Err(format(got as u64, "file ends inside the magic number".into()));
    }
    let word = |i: usize| u32::from_be_bytes([header[i], header[i + 1], header[i + 2], header[i + 3]]);
    let magic = word(0);
    if magic != IDX_IMAGE_MAGIC {
        return Err(format(
            0,
            format!("magic 0x{magic:08x} is not an IDX image file (0x{IDX_IMAGE_MAGIC:08x})"),
        ));
    }
    if got < 16 {
        return Err(format(got as u64, "truncated IDX header".into()));
    }
    let count = word(4) as usize;
    let (rows, cols) = (word(8) as usize, word(12) as usize);
    if rows != MNIST_SIDE || cols != MNIST_SIDE {
        return Err(format(8, format!("expected 28x28 images, found {rows}x{cols}")));
    }
    if n > count {
        return Err(CliError::Range {
            path: path.to_path_buf(),
            requested: n,
            available: count,
        });
    }

    let mut pixels = [0u8; MNIST_DIM];
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let offset = 16 + (i * MNIST_DIM) as u64;
        let got = read_full(&mut reader, &mut pixels).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        if got < MNIST_DIM {
            return Err(format(offset + got as u64, format!("truncated image {i}")));
        }
        let v: Vec<f64> = pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(format(offset, format!("image {i} is blank and cannot be normalized")));
        }
        out.push(Vector::new(v.into_iter().map(|x| x / norm).collect()));
    }
    Ok(out)
}

/// Like `read_exact`, but reports how many bytes were available.
fn read_full<R: Read>(reader: &mut R, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}
