//! Sequences of Hermitian matrices indexed by frequency bin, together with
//! the norms, inner product and support operations the estimator is built on.
//!
//! A [`MatrixSequence`] holds `F` complex `p × p` Hermitian matrices. All
//! sequence norms pool the frequency axis with a `1/F` factor: the block
//! norm of entry `(i, j)` is `sqrt((1/F) Σ_f |X_{i,j}[f]|²)`, the ℓ1 norm
//! sums block norms over all ordered pairs (diagonal included), and the
//! squared Frobenius norm sums their squares. The inner product is
//! `(1/F) Σ_f tr{A[f] B[f]}`.

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Dense complex matrix used throughout.
pub type CMatrix = DMatrix<Complex64>;

/// Tolerance on the elementwise Hermitian defect accepted at construction.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// A length-`F` sequence of `p × p` complex Hermitian matrices.
///
/// Immutable after construction; shared read access from multiple threads
/// is safe. Construction validates shapes and Hermitian symmetry, so
/// downstream code can rely on both.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSequence {
    mats: Vec<CMatrix>,
    dim: usize,
}

fn hermitian_defect_of(m: &CMatrix) -> f64 {
    let p = m.nrows();
    let mut defect: f64 = 0.0;
    for i in 0..p {
        for j in 0..p {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

impl MatrixSequence {
    /// Builds a sequence, validating that every matrix is square of the
    /// same dimension and Hermitian within [`HERMITIAN_TOL`].
    pub fn new(mats: Vec<CMatrix>) -> Result<Self> {
        if mats.is_empty() {
            return Err(CoreError::InvalidParameter(
                "matrix sequence needs at least one frequency bin".into(),
            ));
        }
        let dim = mats[0].nrows();
        if dim == 0 {
            return Err(CoreError::InvalidParameter(
                "matrix dimension must be at least 1".into(),
            ));
        }
        for m in &mats {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(CoreError::DimensionMismatch(format!(
                    "expected {dim}x{dim} matrices, found {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let defect = hermitian_defect_of(m);
            let within_tol = defect <= HERMITIAN_TOL; // false for NaN too
            if !within_tol {
                return Err(CoreError::NotHermitian {
                    defect,
                    tol: HERMITIAN_TOL,
                });
            }
        }
        Ok(Self { mats, dim })
    }

    /// Replaces every matrix by `(X + X^H)/2` before validating, killing
    /// floating-point asymmetry left by numeric construction.
    pub fn symmetrized(mats: Vec<CMatrix>) -> Result<Self> {
        let mats = mats
            .into_iter()
            .map(|m| {
                let adj = m.adjoint();
                (m + adj).scale(0.5)
            })
            .collect();
        Self::new(mats)
    }

    /// Internal constructor for results of operations that preserve
    /// Hermitian symmetry exactly (sums, real scaling, block masking).
    pub(crate) fn from_parts_unchecked(mats: Vec<CMatrix>, dim: usize) -> Self {
        debug_assert!(mats.iter().all(|m| hermitian_defect_of(m) <= 1e-8));
        Self { mats, dim }
    }

    /// Identity at every frequency bin.
    pub fn identity(f_len: usize, dim: usize) -> Self {
        assert!(f_len >= 1 && dim >= 1);
        Self {
            mats: (0..f_len).map(|_| CMatrix::identity(dim, dim)).collect(),
            dim,
        }
    }

    /// All-zero sequence.
    pub fn zeros(f_len: usize, dim: usize) -> Self {
        assert!(f_len >= 1 && dim >= 1);
        Self {
            mats: (0..f_len).map(|_| CMatrix::zeros(dim, dim)).collect(),
            dim,
        }
    }

    /// Number of frequency bins `F`.
    pub fn f_len(&self) -> usize {
        self.mats.len()
    }

    /// Matrix dimension `p`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Matrix at frequency bin `f` (0-based).
    pub fn mat(&self, f: usize) -> &CMatrix {
        &self.mats[f]
    }

    /// All matrices, ordered by frequency bin.
    pub fn mats(&self) -> &[CMatrix] {
        &self.mats
    }

    /// Largest elementwise deviation from Hermitian symmetry over all bins.
    pub fn hermitian_defect(&self) -> f64 {
        self.mats.iter().map(hermitian_defect_of).fold(0.0, f64::max)
    }

    /// Pooled norm of entry `(i, j)` across frequency:
    /// `sqrt((1/F) Σ_f |X_{i,j}[f]|²)`.
    ///
    /// Panics if `i` or `j` is out of range.
    pub fn block_norm(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.dim && j < self.dim, "entry index out of range");
        let sum: f64 = self.mats.iter().map(|m| m[(i, j)].norm_sqr()).sum();
        (sum / self.f_len() as f64).sqrt()
    }

    /// Sum of block norms over all ordered pairs `(i, j)`, diagonal
    /// included.
    pub fn l1_norm(&self) -> f64 {
        self.l1_norm_filtered(true)
    }

    /// ℓ1 norm restricted to off-diagonal pairs.
    pub fn l1_norm_off_diagonal(&self) -> f64 {
        self.l1_norm_filtered(false)
    }

    fn l1_norm_filtered(&self, include_diagonal: bool) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if include_diagonal || i != j {
                    acc += self.block_norm(i, j);
                }
            }
        }
        acc
    }

    /// Squared generalized Frobenius norm: `Σ_{i,j} block_norm(i,j)²`,
    /// equal to `(1/F) Σ_f ‖X[f]‖_F²`.
    pub fn frobenius_norm_sq(&self) -> f64 {
        let sum: f64 = self.mats.iter().map(|m| m.norm_squared()).sum();
        sum / self.f_len() as f64
    }

    /// Generalized Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    /// Inner product `(1/F) Σ_f tr{A[f] B[f]}`.
    ///
    /// For Hermitian inputs the trace sum is real; the residual imaginary
    /// part is asserted to be below 1e-9 and discarded.
    pub fn inner_product(&self, other: &MatrixSequence) -> Result<f64> {
        if self.dim != other.dim || self.f_len() != other.f_len() {
            return Err(CoreError::DimensionMismatch(format!(
                "inner product needs matching shapes, got (F={}, p={}) vs (F={}, p={})",
                self.f_len(),
                self.dim,
                other.f_len(),
                other.dim
            )));
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.mats.iter().zip(other.mats.iter()) {
            for i in 0..self.dim {
                for k in 0..self.dim {
                    acc += a[(i, k)] * b[(k, i)];
                }
            }
        }
        acc /= self.f_len() as f64;
        assert!(
            acc.im.abs() <= 1e-9,
            "inner product of Hermitian sequences must be real, imag = {:e}",
            acc.im
        );
        Ok(acc.re)
    }

    /// Generalized support: ordered pairs whose block norm exceeds `tol`.
    /// `tol = 0` gives the exact support.
    pub fn gsupport(&self, tol: f64) -> IndexSet {
        assert!(tol >= 0.0, "support tolerance must be nonnegative");
        let mut pairs = BTreeSet::new();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if self.block_norm(i, j) > tol {
                    pairs.insert((i, j));
                }
            }
        }
        IndexSet {
            dim: self.dim,
            pairs,
        }
    }

    /// Zeroes every entry outside `support`, at every frequency bin.
    ///
    /// `support` must be closed under transposition, otherwise the result
    /// would not be Hermitian.
    pub fn restrict_support(&self, support: &IndexSet) -> Result<MatrixSequence> {
        if support.dim != self.dim {
            return Err(CoreError::DimensionMismatch(format!(
                "support is over dimension {}, sequence has dimension {}",
                support.dim, self.dim
            )));
        }
        if !support.is_transpose_closed() {
            return Err(CoreError::SupportNotTransposeClosed);
        }
        let mats = self
            .mats
            .iter()
            .map(|m| {
                let mut out = CMatrix::zeros(self.dim, self.dim);
                for &(i, j) in &support.pairs {
                    out[(i, j)] = m[(i, j)];
                }
                out
            })
            .collect();
        Ok(Self::from_parts_unchecked(mats, self.dim))
    }

    /// Deviation from the mirror symmetry `X[f] = conj(X[F - f])` (0-based
    /// bins; bin 0 is self-mirrored) that any SDM of a real-valued process
    /// satisfies on the grid `θ_f = f/F`. Returns 0 for `F = 1`.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let f_len = self.f_len();
        let mut defect: f64 = 0.0;
        for f in 1..f_len {
            let a = &self.mats[f];
            let b = &self.mats[f_len - f];
            for i in 0..self.dim {
                for j in 0..self.dim {
                    defect = defect.max((a[(i, j)] - b[(i, j)].conj()).norm());
                }
            }
        }
        defect
    }

    /// Elementwise sum; panics on shape mismatch.
    pub fn add(&self, other: &MatrixSequence) -> MatrixSequence {
        self.zip_with(other, |a, b| a + b)
    }

    /// Elementwise difference; panics on shape mismatch.
    pub fn sub(&self, other: &MatrixSequence) -> MatrixSequence {
        self.zip_with(other, |a, b| a - b)
    }

    /// Scales every matrix by a real factor.
    pub fn scale(&self, factor: f64) -> MatrixSequence {
        let mats = self.mats.iter().map(|m| m.scale(factor)).collect();
        Self::from_parts_unchecked(mats, self.dim)
    }

    fn zip_with(
        &self,
        other: &MatrixSequence,
        op: impl Fn(&CMatrix, &CMatrix) -> CMatrix,
    ) -> MatrixSequence {
        assert_eq!(self.dim, other.dim, "sequence dimensions differ");
        assert_eq!(self.f_len(), other.f_len(), "sequence lengths differ");
        let mats = self
            .mats
            .iter()
            .zip(other.mats.iter())
            .map(|(a, b)| op(a, b))
            .collect();
        Self::from_parts_unchecked(mats, self.dim)
    }
}

/// A set of ordered index pairs over `[p] × [p]` (0-based).
///
/// Supports of Hermitian sequences are closed under transposition; the
/// unordered collapse to graph edges lives in [`crate::graph::EdgeSet`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    dim: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl IndexSet {
    /// Builds an index set, validating bounds.
    pub fn new(dim: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let pairs: BTreeSet<_> = pairs.into_iter().collect();
        for &(i, j) in &pairs {
            if i >= dim || j >= dim {
                return Err(CoreError::InvalidParameter(format!(
                    "index pair ({i}, {j}) out of range for dimension {dim}"
                )));
            }
        }
        Ok(Self { dim, pairs })
    }

    /// The empty set over `[p] × [p]`.
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            pairs: BTreeSet::new(),
        }
    }

    /// All `p²` ordered pairs.
    pub fn full(dim: usize) -> Self {
        let pairs = (0..dim)
            .flat_map(|i| (0..dim).map(move |j| (i, j)))
            .collect();
        Self { dim, pairs }
    }

    /// The diagonal pairs `(i, i)`.
    pub fn diagonal(dim: usize) -> Self {
        Self {
            dim,
            pairs: (0..dim).map(|i| (i, i)).collect(),
        }
    }

    /// Complement within `[p] × [p]`.
    pub fn complement(&self) -> Self {
        let pairs = (0..self.dim)
            .flat_map(|i| (0..self.dim).map(move |j| (i, j)))
            .filter(|pair| !self.pairs.contains(pair))
            .collect();
        Self {
            dim: self.dim,
            pairs,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&(i, j))
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    /// Whether `(i, j) ∈ S` implies `(j, i) ∈ S`.
    pub fn is_transpose_closed(&self) -> bool {
        self.pairs.iter().all(|&(i, j)| self.pairs.contains(&(j, i)))
    }

    /// Checks `self ⊆ other`.
    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        self.dim == other.dim && self.pairs.is_subset(&other.pairs)
    }
}
