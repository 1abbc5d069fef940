//! Transform matrices: the integer kernel `T`, its scale `S`, the
//! orthonormal approximation `Ĉ = S·T`, the exact DCT-II, the WHT, and
//! integer kernels loaded from text files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::SquareMatrix;
use crate::scalar::Real;
use crate::N;

/// Rows of the proposed 16-point integer kernel.
#[rustfmt::skip]
pub const PROPOSED_T: [[i32; N]; N] = [
    [ 1,  1,  1,  1,  1,  1,  1,  1,  1,  1,  1,  1,  1,  1,  1,  1],
    [ 1,  1,  1,  1,  1,  1,  1,  1, -1, -1, -1, -1, -1, -1, -1, -1],
    [ 1,  1,  1,  0,  0, -1, -1, -1, -1, -1, -1,  0,  0,  1,  1,  1],
    [ 1,  1,  0,  0,  0,  0, -1, -1,  1,  1,  0,  0,  0,  0, -1, -1],
    [ 1,  0,  0, -1, -1,  0,  0,  1,  1,  0,  0, -1, -1,  0,  0,  1],
    [ 1,  1, -1, -1, -1, -1,  1,  1, -1, -1,  1,  1,  1,  1, -1, -1],
    [ 1,  0, -1, -1,  1,  1,  0, -1, -1,  0,  1,  1, -1, -1,  0,  1],
    [ 0,  0, -1,  1,  1, -1, -1,  1, -1,  1,  1, -1, -1,  1,  0,  0],
    [ 1, -1, -1,  1,  1, -1, -1,  1,  1, -1, -1,  1,  1, -1, -1,  1],
    [ 1, -1, -1,  1,  0,  0,  1, -1,  1, -1,  0,  0, -1,  1,  1, -1],
    [ 1, -1,  0,  1, -1,  0,  1, -1, -1,  1,  0, -1,  1,  0, -1,  1],
    [ 0,  0,  1,  1, -1, -1,  0,  0,  0,  0,  1,  1, -1, -1,  0,  0],
    [ 0, -1,  1,  0,  0,  1, -1,  0,  0, -1,  1,  0,  0,  1, -1,  0],
    [ 1, -1,  1, -1,  1, -1,  0,  0,  0,  0,  1, -1,  1, -1,  1, -1],
    [ 0, -1,  1, -1,  1, -1,  1,  0,  0,  1, -1,  1, -1,  1, -1,  0],
    [ 1, -1,  0,  0, -1,  1, -1,  1, -1,  1, -1,  1,  0,  0,  1, -1],
];

/// Squared row norms of [`PROPOSED_T`], i.e. the diagonal of `T·Tᵀ`.
pub const PROPOSED_GRAM_DIAGONAL: [i64; N] =
    [16, 16, 12, 8, 8, 16, 12, 12, 16, 12, 12, 8, 8, 12, 12, 12];

/// Integer entries admissible in a low-complexity kernel.
pub const KERNEL_ALPHABET: std::ops::RangeInclusive<i64> = -2..=2;

/// A 16×16 integer kernel with entries in `{0, ±1, ±2}` and a diagonal
/// Gram matrix `K·Kᵀ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntKernel16 {
    name: String,
    entries: [[i32; N]; N],
}

impl IntKernel16 {
    pub fn new(name: impl Into<String>, entries: [[i32; N]; N]) -> Result<Self> {
        let name = name.into();
        check_alphabet(&entries)?;
        let gram = gram_matrix(&entries);
        if let Some((row, col, value)) = gram.first_off_diagonal() {
            return Err(Error::NotOrthogonalizable {
                name,
                row,
                col,
                value,
            });
        }
        if let Some(row) = gram.diagonal().iter().position(|&d| d == 0) {
            return Err(Error::NotOrthogonalizable {
                name,
                row,
                col: row,
                value: 0,
            });
        }
        Ok(IntKernel16 { name, entries })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn entries(&self) -> &[[i32; N]; N] {
        &self.entries
    }

    pub fn to_matrix(&self) -> SquareMatrix<i64> {
        SquareMatrix::from_fn(N, |i, j| self.entries[i][j] as i64)
    }

    /// `K·Kᵀ`, exact.
    pub fn gram(&self) -> SquareMatrix<i64> {
        gram_matrix(&self.entries)
    }

    /// Direct dense product `K·x`.
    pub fn apply(&self, x: &[i32; N]) -> [i32; N] {
        let mut y = [0i32; N];
        for (yi, row) in y.iter_mut().zip(&self.entries) {
            *yi = row.iter().zip(x).map(|(&k, &v)| k * v).sum();
        }
        y
    }
}

fn check_alphabet(entries: &[[i32; N]; N]) -> Result<()> {
    for (row, r) in entries.iter().enumerate() {
        for (col, &v) in r.iter().enumerate() {
            if !KERNEL_ALPHABET.contains(&(v as i64)) {
                return Err(Error::KernelDomain {
                    row,
                    col,
                    value: v as i64,
                });
            }
        }
    }
    Ok(())
}

fn gram_matrix(entries: &[[i32; N]; N]) -> SquareMatrix<i64> {
    let k = SquareMatrix::from_fn(N, |i, j| entries[i][j] as i64);
    k.mul_transposed(&k)
}

/// Diagonal orthogonalizing scale, `factors[i] = 1/√((K·Kᵀ)[i][i])`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalScale<T> {
    factors: [T; N],
}

impl<T: Real> DiagonalScale<T> {
    pub fn for_kernel(kernel: &IntKernel16) -> Self {
        let gram = kernel.gram();
        let factors = std::array::from_fn(|i| T::one() / T::lit(gram[(i, i)] as f64).sqrt());
        DiagonalScale { factors }
    }

    pub fn factors(&self) -> &[T; N] {
        &self.factors
    }
}

/// A real square matrix whose rows are orthonormal.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthonormalTransform<T> {
    name: String,
    matrix: SquareMatrix<T>,
}

impl<T: Real> OrthonormalTransform<T> {
    /// Validates `M·Mᵀ = I` to [`Real::orthonormal_tolerance`].
    pub fn new(name: impl Into<String>, matrix: SquareMatrix<T>) -> Result<Self> {
        let name = name.into();
        let deviation = matrix.mul_transposed(&matrix).max_deviation_from_identity();
        if deviation.is_nan() || deviation >= T::orthonormal_tolerance() {
            return Err(Error::NotOrthonormal {
                name,
                deviation: deviation.to_f64_lossy(),
            });
        }
        Ok(OrthonormalTransform { name, matrix })
    }

    /// `S·K` for an orthogonalizable integer kernel.
    pub fn from_kernel(kernel: &IntKernel16) -> Result<Self> {
        let scale = DiagonalScale::<T>::for_kernel(kernel);
        let matrix = SquareMatrix::from_fn(N, |i, j| {
            scale.factors[i] * T::lit(kernel.entries[i][j] as f64)
        });
        Self::new(kernel.name(), matrix)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn matrix(&self) -> &SquareMatrix<T> {
        &self.matrix
    }

    pub fn order(&self) -> usize {
        self.matrix.order()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }
}

pub fn build_t() -> IntKernel16 {
    IntKernel16 {
        name: "proposed".to_owned(),
        entries: PROPOSED_T,
    }
}

pub fn build_s<T: Real>() -> DiagonalScale<T> {
    DiagonalScale::for_kernel(&build_t())
}

/// The orthonormal approximation `Ĉ = S·T`.
pub fn build_c_hat<T: Real>() -> OrthonormalTransform<T> {
    OrthonormalTransform::from_kernel(&build_t()).expect("proposed kernel is orthogonalizable")
}

/// Orthonormal DCT-II of length `n` from the closed form.
pub fn build_dct<T: Real>(n: usize) -> Result<OrthonormalTransform<T>> {
    if n < 2 {
        return Err(Error::InvalidSize(n));
    }
    let nf = n as f64;
    let matrix = SquareMatrix::from_fn(n, |i, j| {
        let v = if i == 0 {
            (1.0 / nf).sqrt()
        } else {
            (2.0 / nf).sqrt() * (std::f64::consts::PI * (i * (2 * j + 1)) as f64 / (2.0 * nf)).cos()
        };
        T::lit(v)
    });
    OrthonormalTransform::new("dct", matrix)
}

/// Row ordering of a Walsh-Hadamard matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WalshOrdering {
    /// Sylvester construction `H₂ₙ = [Hₙ Hₙ; Hₙ −Hₙ]`.
    Natural,
    /// Rows sorted by number of sign changes.
    Sequency,
}

/// The 16-point WHT in natural (Hadamard) order, scaled by 1/4.
pub fn build_wht<T: Real>() -> OrthonormalTransform<T> {
    build_wht_ordered(WalshOrdering::Natural)
}

pub fn build_wht_ordered<T: Real>(ordering: WalshOrdering) -> OrthonormalTransform<T> {
    let mut rows: Vec<[i32; N]> = (0..N)
        .map(|i| std::array::from_fn(|j| if (i & j).count_ones() % 2 == 0 { 1 } else { -1 }))
        .collect();
    if ordering == WalshOrdering::Sequency {
        rows.sort_by_key(|r| r.windows(2).filter(|w| w[0] != w[1]).count());
    }
    let quarter = T::lit(0.25);
    let matrix = SquareMatrix::from_fn(N, |i, j| quarter * T::lit(rows[i][j] as f64));
    OrthonormalTransform::new("wht", matrix).expect("scaled Hadamard matrix is orthonormal")
}

/// Contents of a kernel file after syntactic and alphabet checks, before
/// the orthogonalizability check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelFile {
    pub name: String,
    pub entries: [[i32; N]; N],
}

impl KernelFile {
    pub fn into_kernel(self) -> Result<IntKernel16> {
        IntKernel16::new(self.name, self.entries)
    }
}

/// Parses the plain-text kernel format: a name line followed by sixteen
/// rows of sixteen integers. `#` starts a comment; blank lines are ignored.
pub fn parse_kernel_text(text: &str) -> Result<KernelFile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let name = match lines.next() {
        Some((_, l)) => l.to_owned(),
        None => {
            return Err(Error::KernelFormat {
                line: 0,
                message: "missing kernel name".into(),
            })
        }
    };

    let mut entries = [[0i32; N]; N];
    for (row, slot) in entries.iter_mut().enumerate() {
        let (line, text) = lines.next().ok_or_else(|| Error::KernelFormat {
            line: 0,
            message: format!("expected {N} rows, found {row}"),
        })?;
        let values = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<i64>().map_err(|_| Error::KernelFormat {
                    line,
                    message: format!("`{tok}` is not an integer"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if values.len() != N {
            return Err(Error::KernelFormat {
                line,
                message: format!("expected {N} values, found {}", values.len()),
            });
        }
        for (col, &v) in values.iter().enumerate() {
            if !KERNEL_ALPHABET.contains(&v) {
                return Err(Error::KernelDomain { row, col, value: v });
            }
            slot[col] = v as i32;
        }
    }
    if let Some((line, _)) = lines.next() {
        return Err(Error::KernelFormat {
            line,
            message: "unexpected content after row 16".into(),
        });
    }
    Ok(KernelFile { name, entries })
}

pub fn read_kernel_file(path: &Path) -> Result<KernelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_kernel_text(&text)
}

/// Loads a kernel file and derives its scale from the Gram diagonal.
pub fn load_external_kernel(path: &Path) -> Result<(IntKernel16, DiagonalScale<f64>)> {
    let kernel = read_kernel_file(path)?.into_kernel()?;
    let scale = DiagonalScale::for_kernel(&kernel);
    Ok((kernel, scale))
}

pub fn format_kernel_text(kernel: &IntKernel16) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", kernel.name());
    for row in kernel.entries() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:>2}")).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}
