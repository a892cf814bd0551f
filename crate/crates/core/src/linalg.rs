//! Dense orthogonal factorizations and projections.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative tolerance on the diagonal of `R` below which a column is
/// considered numerically dependent.
pub const RANK_TOL: f64 = 1e-10;

/// Householder QR with column pivoting, `A P = Q R`.
///
/// Only the thin factors are kept: `Q` is `m × k` with orthonormal columns
/// and `R` is `k × k` upper triangular, `k = ncols(A)`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    perm: Vec<usize>,
    rank: usize,
}

impl PivotedQr {
    pub fn new(a: &DMatrix<f64>) -> Self {
        let (m, k) = a.shape();
        let mut work = a.clone();
        let mut perm: Vec<usize> = (0..k).collect();
        let steps = m.min(k);
        let mut reflectors: Vec<DVector<f64>> = Vec::with_capacity(steps);
        let mut diag = vec![0.0; k];

        for j in 0..steps {
            // pivot on the largest remaining column norm
            let mut best = j;
            let mut best_norm = -1.0;
            for c in j..k {
                let nrm = work.view((j, c), (m - j, 1)).norm_squared();
                if nrm > best_norm {
                    best_norm = nrm;
                    best = c;
                }
            }
            if best != j {
                work.swap_columns(j, best);
                perm.swap(j, best);
            }

            let x = work.view((j, j), (m - j, 1)).clone_owned();
            let alpha = x.norm();
            let mut v = DVector::from_column_slice(x.as_slice());
            if alpha == 0.0 {
                reflectors.push(DVector::zeros(m - j));
                diag[j] = 0.0;
                continue;
            }
            let sign = if x[0] >= 0.0 { 1.0 } else { -1.0 };
            v[0] += sign * alpha;
            let vnorm = v.norm();
            v /= vnorm;
            diag[j] = -sign * alpha;

            for c in (j + 1)..k {
                let mut col = work.generic_view_mut((j, c), (nalgebra::Dyn(m - j), nalgebra::Const::<1>));
                let dot = v.dot(&col);
                col.axpy(-2.0 * dot, &v, 1.0);
            }
            reflectors.push(v);
        }

        let mut r = DMatrix::zeros(k, k);
        for i in 0..steps {
            r[(i, i)] = diag[i];
            for c in (i + 1)..k {
                r[(i, c)] = work[(i, c)];
            }
        }

        // thin Q = H_0 H_1 ... H_{s-1} [I_k; 0]
        let mut q = DMatrix::zeros(m, k);
        for i in 0..steps {
            q[(i, i)] = 1.0;
        }
        for (j, v) in reflectors.iter().enumerate().rev() {
            for c in 0..k {
                let mut col = q.generic_view_mut((j, c), (nalgebra::Dyn(m - j), nalgebra::Const::<1>));
                let dot = v.dot(&col);
                col.axpy(-2.0 * dot, v, 1.0);
            }
        }

        let lead = diag.first().map(|d| d.abs()).unwrap_or(0.0);
        let rank = diag
            .iter()
            .take(steps)
            .filter(|d| lead > 0.0 && d.abs() > RANK_TOL * lead)
            .count();

        PivotedQr { q, r, perm, rank }
    }

    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn r(&self) -> &DMatrix<f64> {
        &self.r
    }

    /// Column `j` of `Q R` is original column `perm()[j]`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank == self.r.ncols()
    }

    /// Least-squares solution `argmin ‖A b − y‖`. Requires full column rank.
    pub fn solve(&self, y: &DVector<f64>) -> DVector<f64> {
        let qty = self.q.tr_mul(y);
        let z = back_substitute(&self.r, &qty);
        let mut beta = DVector::zeros(z.len());
        for (j, &orig) in self.perm.iter().enumerate() {
            beta[orig] = z[j];
        }
        beta
    }

    /// Moore-Penrose pseudoinverse `A⁺ = P R⁻¹ Qᵀ`, shape `k × m`.
    pub fn pseudo_inverse(&self) -> DMatrix<f64> {
        let k = self.r.ncols();
        let m = self.q.nrows();
        let mut rinv_qt = DMatrix::zeros(k, m);
        for i in 0..m {
            let col = DVector::from_iterator(k, (0..k).map(|c| self.q[(i, c)]));
            let sol = back_substitute(&self.r, &col);
            rinv_qt.set_column(i, &sol);
        }
        let mut out = DMatrix::zeros(k, m);
        for (j, &orig) in self.perm.iter().enumerate() {
            out.set_row(orig, &rinv_qt.row(j));
        }
        out
    }
}

fn back_substitute(r: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let k = r.ncols();
    let mut x = DVector::zeros(k);
    for i in (0..k).rev() {
        let mut acc = b[i];
        for c in (i + 1)..k {
            acc -= r[(i, c)] * x[c];
        }
        x[i] = acc / r[(i, i)];
    }
    x
}

/// Orthogonal projection onto the span of an orthonormal basis, or onto its
/// orthogonal complement.
#[derive(Debug, Clone)]
pub struct Projector {
    basis: DMatrix<f64>,
    complement: bool,
}

impl Projector {
    /// `basis` must have orthonormal columns.
    pub fn from_orthonormal(basis: DMatrix<f64>, complement: bool) -> Self {
        Projector { basis, complement }
    }

    /// Projection onto the column space of `x` (full column rank required).
    pub fn onto_columns(x: &DMatrix<f64>) -> Result<Self> {
        Ok(Self::from_orthonormal(orthonormal_basis(x)?, false))
    }

    /// Projection onto the orthogonal complement of the column space of `x`.
    pub fn residual_maker(x: &DMatrix<f64>) -> Result<Self> {
        Ok(Self::from_orthonormal(orthonormal_basis(x)?, true))
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn is_complement(&self) -> bool {
        self.complement
    }

    /// Trace, i.e. the dimension of the target subspace.
    pub fn trace(&self) -> usize {
        if self.complement {
            self.dim() - self.basis.ncols()
        } else {
            self.basis.ncols()
        }
    }

    pub fn apply(&self, y: &DVector<f64>) -> DVector<f64> {
        let coords = self.basis.tr_mul(y);
        let proj = &self.basis * coords;
        if self.complement {
            y - proj
        } else {
            proj
        }
    }

    /// Diagonal entry `P_ii`.
    pub fn diagonal(&self, i: usize) -> f64 {
        let h = self.basis.row(i).norm_squared();
        if self.complement {
            1.0 - h
        } else {
            h
        }
    }

    /// Dense matrix form; intended for tests and small problems.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let p = &self.basis * self.basis.transpose();
        if self.complement {
            DMatrix::identity(self.dim(), self.dim()) - p
        } else {
            p
        }
    }
}

/// Orthonormal basis of the column space of a full-column-rank matrix.
/// An empty column set yields an `m × 0` basis.
pub fn orthonormal_basis(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if x.ncols() == 0 {
        return Ok(DMatrix::zeros(x.nrows(), 0));
    }
    let qr = PivotedQr::new(x);
    if !qr.is_full_rank() {
        return Err(Error::RankDeficient {
            rank: qr.rank(),
            expected: x.ncols(),
        });
    }
    Ok(qr.q().clone())
}

/// Rows `rows` of `x`, in the given order.
pub fn select_rows(x: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), x.ncols(), |i, j| x[(rows[i], j)])
}

/// Columns `cols` of `x`, in the given order.
pub fn select_columns(x: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(x.nrows(), cols.len(), |i, j| x[(i, cols[j])])
}

pub fn select_entries(y: &DVector<f64>, rows: &[usize]) -> DVector<f64> {
    DVector::from_iterator(rows.len(), rows.iter().map(|&i| y[i]))
}

/// Scatter `values` into a length-`n` zero vector at `rows`.
pub fn pad(values: &DVector<f64>, rows: &[usize], n: usize) -> DVector<f64> {
    let mut out = DVector::zeros(n);
    for (k, &i) in rows.iter().enumerate() {
        out[i] = values[k];
    }
    out
}

/// Scatter the rows of `m` into an `n`-row zero matrix at `rows`.
pub fn pad_rows(m: &DMatrix<f64>, rows: &[usize], n: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(n, m.ncols());
    for (k, &i) in rows.iter().enumerate() {
        out.set_row(i, &m.row(k));
    }
    out
}
