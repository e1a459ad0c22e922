//! Memory estimates checked before any suite allocates.

use qgauss::gqg::model_size;
use qgauss::qfock::basis_size;

use crate::CliError;

pub const GUARD_ENV: &str = "QFOCK_GUARD_BYTES";
pub const DEFAULT_GUARD_BYTES: usize = 4 << 30;

const C64_BYTES: usize = 16;
// value plus column index in a sparse entry
const ENTRY_BYTES: usize = 24;

#[derive(Clone, Copy, Debug)]
pub struct Guard {
    limit: usize,
}

impl Guard {
    pub fn from_env() -> Result<Self, CliError> {
        match std::env::var(GUARD_ENV) {
            Ok(s) => s.trim().parse().map(|limit| Guard { limit }).map_err(|_| {
                CliError::Config(format!("{GUARD_ENV} must be a byte count, got '{s}'"))
            }),
            Err(_) => Ok(Guard {
                limit: DEFAULT_GUARD_BYTES,
            }),
        }
    }

    pub fn check(&self, what: &'static str, needed: Option<usize>) -> Result<(), CliError> {
        match needed {
            Some(n) if n <= self.limit => Ok(()),
            n => Err(CliError::Guard {
                what,
                needed: n.unwrap_or(usize::MAX),
                limit: self.limit,
            }),
        }
    }
}

fn mul(xs: &[usize]) -> Option<usize> {
    xs.iter().try_fold(1usize, |acc, &x| acc.checked_mul(x))
}

/// Sparse operators on the truncated Fock space: a field has at most
/// `dim + cutoff` entries per column and the suites multiply a few of them.
/// A small working set of such operators is kept.
pub fn fock_bytes(dim: usize, cutoff: usize) -> Option<usize> {
    let size = basis_size(dim, cutoff)?;
    let fill = (dim + cutoff).checked_pow(2)?.min(size);
    mul(&[size, fill, ENTRY_BYTES, 8])
}

/// Dense per-degree Gram matrix of the top degree.
pub fn gram_bytes(dim: usize, cutoff: usize) -> Option<usize> {
    let top = dim.checked_pow(cutoff as u32)?;
    mul(&[top, top, 8])
}

/// Lazy model vectors: a few dozen full-length work vectors.
pub fn model_bytes(points: usize, order: usize, kdim: usize, cutoff: usize) -> Option<usize> {
    mul(&[model_size(points, order, kdim, cutoff)?, C64_BYTES, 64])
}

/// Dense quadratic form on degrees `1..=cutoff` plus the sparse operators at
/// cutoff `cutoff + 2`.
pub fn gap_bytes(f_size: usize, cutoff: usize) -> Option<usize> {
    let dim = 2 * f_size;
    let cols = basis_size(dim, cutoff)?;
    let dense = mul(&[cols, cols, C64_BYTES, 4])?;
    dense.checked_add(fock_bytes(dim, cutoff + 2)?)
}

/// One weight array per worker and trial batch.
pub fn rigidity_bytes(resolution: usize) -> Option<usize> {
    mul(&[resolution, resolution, 8, 256])
}
