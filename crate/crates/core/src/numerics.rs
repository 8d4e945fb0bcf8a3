//! Small dense symmetric-matrix primitives shared by every module:
//! eigenvalue extremes, PSD checks with margin, SPD solves, block assembly.
//!
//! Eigenvalues come from a cyclic Jacobi sweep, which is accurate to high
//! relative precision at the dimensions this crate works with (n below a
//! few dozen). Solves go through an unpivoted Cholesky factorization that
//! reports the failing pivot on indefinite input.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Real symmetric matrix. Symmetry is enforced on construction by
/// averaging with the transpose, so downstream code never branches on
/// asymmetric residuals. `n == 0` is a legal empty block.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    m: DMatrix<f64>,
}

impl SymMatrix {
    /// Symmetrize a square matrix as (M + Mᵀ)/2.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::dim(
                "SymMatrix::from_matrix",
                "square matrix",
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
        let sym = (m + m.transpose()) * 0.5;
        Ok(SymMatrix { m: sym })
    }

    /// Row-major entries of an n x n matrix; symmetrized like `from_matrix`.
    pub fn from_rows(n: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::dim(
                "SymMatrix::from_rows",
                format!("{} entries", n * n),
                format!("{}", entries.len()),
            ));
        }
        let m = DMatrix::from_row_slice(n, n, entries);
        Self::from_matrix(&m)
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            m: DMatrix::zeros(n, n),
        }
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix {
            m: DMatrix::identity(n, n),
        }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = v;
        }
        SymMatrix { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.m.nrows() == 0
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn scale(&self, factor: f64) -> Self {
        SymMatrix {
            m: &self.m * factor,
        }
    }

    /// Sum of two symmetric matrices of equal dimension.
    pub fn add(&self, other: &SymMatrix) -> Result<SymMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::dim(
                "SymMatrix::add",
                format!("{}", self.dim()),
                format!("{}", other.dim()),
            ));
        }
        Ok(SymMatrix {
            m: &self.m + &other.m,
        })
    }

    pub fn sub(&self, other: &SymMatrix) -> Result<SymMatrix> {
        self.add(&other.scale(-1.0))
    }

    /// Congruence Xᵀ M X (result is symmetric by construction).
    pub fn congruence(&self, x: &DMatrix<f64>) -> Result<SymMatrix> {
        if x.nrows() != self.dim() {
            return Err(Error::dim(
                "SymMatrix::congruence",
                format!("{} rows", self.dim()),
                format!("{}", x.nrows()),
            ));
        }
        let prod = x.transpose() * &self.m * x;
        SymMatrix::from_matrix(&prod)
    }

    pub fn all_finite(&self) -> bool {
        self.m.iter().all(|v| v.is_finite())
    }

    /// Largest absolute entry, at least 1.0; used as a scale reference.
    fn scale_ref(&self) -> f64 {
        self.m.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0)
    }
}

/// Result of a PSD check: verdict plus the extreme eigenvalues at full
/// working precision. For an empty matrix the check passes vacuously and
/// the extremes follow the empty-set convention (+inf / -inf).
#[derive(Debug, Clone, Copy)]
pub struct PsdReport {
    pub ok: bool,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

/// True iff lambda_min(M) >= -margin. The margin is an absolute
/// eigenvalue floor and must be nonnegative.
pub fn psd_check(m: &SymMatrix, margin: f64) -> Result<PsdReport> {
    if !margin.is_finite() || margin < 0.0 {
        return Err(Error::NegativeMargin(margin));
    }
    if !m.all_finite() {
        return Err(Error::NonFinite("psd_check input".into()));
    }
    if m.is_empty() {
        return Ok(PsdReport {
            ok: true,
            lambda_min: f64::INFINITY,
            lambda_max: f64::NEG_INFINITY,
        });
    }
    let eigs = eigenvalues_sym(m)?;
    let lambda_min = eigs[0];
    let lambda_max = eigs[eigs.len() - 1];
    Ok(PsdReport {
        ok: lambda_min >= -margin,
        lambda_min,
        lambda_max,
    })
}

/// Extreme eigenvalues (min, max) of a nonempty symmetric matrix.
pub fn eig_extremes(m: &SymMatrix) -> Result<(f64, f64)> {
    if m.is_empty() {
        return Err(Error::EmptyMatrix("eig_extremes".into()));
    }
    let eigs = eigenvalues_sym(m)?;
    Ok((eigs[0], eigs[eigs.len() - 1]))
}

/// All eigenvalues of a symmetric matrix, ascending, via cyclic Jacobi.
pub fn eigenvalues_sym(m: &SymMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Err(Error::EmptyMatrix("eigenvalues_sym".into()));
    }
    if !m.all_finite() {
        return Err(Error::NonFinite("eigenvalues_sym input".into()));
    }
    let n = m.dim();
    let scale = m.scale_ref();
    let mut a = m.matrix().clone();

    for _sweep in 0..200 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                // Smaller-angle root of t^2 + 2 t theta - 1 = 0.
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[(k, p)] = new_kp;
                    a[(p, k)] = new_kp;
                    a[(k, q)] = new_kq;
                    a[(q, k)] = new_kq;
                }
            }
        }
    }

    let mut eigs: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
    Ok(eigs)
}

/// Cholesky factor of a symmetric positive definite matrix. Fails on the
/// first nonpositive pivot, naming it.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    l: DMatrix<f64>,
}

impl SpdFactor {
    pub fn new(m: &SymMatrix) -> Result<Self> {
        Self::with_context(m, "SpdFactor")
    }

    pub fn with_context(m: &SymMatrix, context: &str) -> Result<Self> {
        if !m.all_finite() {
            return Err(Error::NonFinite(format!("{context}: factorization input")));
        }
        let n = m.dim();
        let mut l = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = m.get(j, j);
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    pivot: j,
                    context: context.to_string(),
                });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut v = m.get(i, j);
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = v / djj;
            }
        }
        Ok(SpdFactor { l })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// Solve M x = b for each column of b.
    pub fn solve(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if rhs.nrows() != n {
            return Err(Error::dim(
                "SpdFactor::solve",
                format!("{} rows", n),
                format!("{}", rhs.nrows()),
            ));
        }
        let mut x = rhs.clone();
        for col in 0..x.ncols() {
            // Forward: L z = b.
            for i in 0..n {
                let mut v = x[(i, col)];
                for k in 0..i {
                    v -= self.l[(i, k)] * x[(k, col)];
                }
                x[(i, col)] = v / self.l[(i, i)];
            }
            // Backward: Lᵀ x = z.
            for i in (0..n).rev() {
                let mut v = x[(i, col)];
                for k in (i + 1)..n {
                    v -= self.l[(k, i)] * x[(k, col)];
                }
                x[(i, col)] = v / self.l[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn log_det(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim() {
            s += self.l[(i, i)].ln();
        }
        2.0 * s
    }

    /// Diagonal of M⁻¹, used for ellipsoid box bounds.
    pub fn inverse_diagonal(&self) -> Result<Vec<f64>> {
        let n = self.dim();
        let id = DMatrix::identity(n, n);
        let inv = self.solve(&id)?;
        Ok((0..n).map(|i| inv[(i, i)]).collect())
    }
}

/// Solve M x = rhs for symmetric positive definite M.
pub fn solve_spd(m: &SymMatrix, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    SpdFactor::with_context(m, "solve_spd")?.solve(rhs)
}

/// log det of a symmetric positive definite matrix.
pub fn log_det_spd(m: &SymMatrix) -> Result<f64> {
    Ok(SpdFactor::with_context(m, "log_det_spd")?.log_det())
}

// ---------------------------------------------------------------------
// Block assembly helpers. Dimension errors here are programming errors
// in assembly code, so they panic rather than returning Result.
// ---------------------------------------------------------------------

/// Horizontal concatenation. All blocks must share a row count.
pub fn hstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    assert!(!blocks.is_empty(), "hstack of no blocks");
    let rows = blocks[0].nrows();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c0 = 0;
    for b in blocks {
        assert_eq!(b.nrows(), rows, "hstack row mismatch");
        out.view_mut((0, c0), (rows, b.ncols())).copy_from(*b);
        c0 += b.ncols();
    }
    out
}

/// Vertical concatenation. All blocks must share a column count.
pub fn vstack(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    assert!(!blocks.is_empty(), "vstack of no blocks");
    let cols = blocks[0].ncols();
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut r0 = 0;
    for b in blocks {
        assert_eq!(b.ncols(), cols, "vstack column mismatch");
        out.view_mut((r0, 0), (b.nrows(), cols)).copy_from(*b);
        r0 += b.nrows();
    }
    out
}

/// Block-diagonal augmentation.
pub fn blkdiag(blocks: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        out.view_mut((r0, c0), (b.nrows(), b.ncols())).copy_from(*b);
        r0 += b.nrows();
        c0 += b.ncols();
    }
    out
}

/// Reject matrices containing NaN or infinity.
pub fn ensure_finite(m: &DMatrix<f64>, context: &str) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(context.to_string()))
    }
}
