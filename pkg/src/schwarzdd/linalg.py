"""Sparse/dense linear algebra kernels for desk-scale problems.

Sparse matrices are scipy CSR in canonical form (sorted, deduplicated column
indices); dense matrices are plain numpy arrays.  Everything here is real
double precision.
"""

import numpy as np
import scipy.io
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

# Canonical-form scipy CSR plays the role of the sparse type; row-major numpy
# arrays play the role of the dense type.
SparseMatrix = sp.csr_matrix
DenseMatrix = np.ndarray


class SingularMatrixError(Exception):
    """Raised when a direct factorization meets a (near-)zero pivot."""


class NotSymmetricError(Exception):
    pass


class NotSpdError(Exception):
    pass


def sparse_from_triplets(nrows, ncols, triplets):
    """Build a CSR matrix from (row, col, value) triplets.

    Duplicate (row, col) entries are summed, as required by finite element
    assembly.  `triplets` may be an iterable of 3-tuples or a (rows, cols,
    values) triple of arrays.

    Returns the matrix in canonical form: within each row the column indices
    are strictly increasing.
    """
    if isinstance(triplets, tuple) and len(triplets) == 3:
        rows, cols, vals = triplets
    else:
        trip = list(triplets)
        if trip:
            rows, cols, vals = zip(*trip)
        else:
            rows, cols, vals = [], [], []
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if rows.size and (rows.min() < 0 or rows.max() >= nrows):
        raise IndexError("row index out of range")
    if cols.size and (cols.min() < 0 or cols.max() >= ncols):
        raise IndexError("column index out of range")
    M = sp.coo_matrix((vals, (rows, cols)), shape=(nrows, ncols)).tocsr()
    M.sum_duplicates()
    M.sort_indices()
    return M


def spmv(M, x):
    """Sparse matrix-vector product y = M x."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != M.shape[1]:
        raise ValueError(f"dimension mismatch: {M.shape} @ {x.shape}")
    return M @ x


class Factorization:
    """LU factorization of a square sparse matrix (SuperLU with partial
    pivoting and a fill-reducing column ordering)."""

    def __init__(self, M):
        M = sp.csc_matrix(M)
        if M.shape[0] != M.shape[1]:
            raise ValueError("matrix must be square")
        self.shape = M.shape
        try:
            self._lu = spla.splu(M)
        except RuntimeError as exc:  # SuperLU reports exact singularity this way
            raise SingularMatrixError(str(exc)) from exc
        # splu can succeed with a numerically meaningless tiny pivot; report
        # that instead of silently returning garbage.
        du = np.abs(self._lu.U.diagonal())
        if du.size and du.min() <= 1e-14 * max(du.max(), 1e-300):
            raise SingularMatrixError(
                f"numerically singular: pivot ratio {du.min():.2e}/{du.max():.2e}"
            )

    def solve(self, b):
        b = np.asarray(b, dtype=np.float64)
        return self._lu.solve(b)


def factorize(M):
    """Factor a square nonsingular sparse matrix for repeated solves."""
    return Factorization(M)


def solve(F, b):
    """Solve M x = b using a Factorization of M."""
    return F.solve(b)


def symmetric_eigen_extremes(M):
    """Smallest and largest eigenvalue of a symmetric dense matrix."""
    M = np.asarray(M, dtype=np.float64)
    scale = max(np.abs(M).max(), 1e-300)
    if np.abs(M - M.T).max() > 1e-12 * scale:
        raise NotSymmetricError("matrix is not symmetric to 1e-12 relative")
    w = np.linalg.eigvalsh(0.5 * (M + M.T))
    return w[0], w[-1]


class SpdFactorization:
    """Cholesky factor L of an SPD matrix, M = L L^T, with triangular
    apply/solve in both orientations (used for weighted-norm changes of
    variable)."""

    def __init__(self, M, dense_cap=5000):
        if sp.issparse(M):
            if M.shape[0] > dense_cap:
                raise ValueError(
                    f"SPD factorization densifies; {M.shape[0]} dofs exceeds cap {dense_cap}"
                )
            Md = M.toarray()
        else:
            Md = np.asarray(M, dtype=np.float64)
        if Md.shape[0] != Md.shape[1]:
            raise ValueError("matrix must be square")
        scale = max(np.abs(Md).max(), 1e-300)
        if np.abs(Md - Md.T).max() > 1e-10 * scale:
            raise NotSpdError("matrix is not symmetric")
        try:
            self.L = scipy.linalg.cholesky(0.5 * (Md + Md.T), lower=True)
        except scipy.linalg.LinAlgError as exc:  # nonpositive pivot
            raise NotSpdError(str(exc)) from exc
        self.shape = Md.shape

    def apply_L(self, x):
        return self.L @ x

    def apply_L_transpose(self, x):
        return self.L.T @ x

    def solve_L(self, b):
        return scipy.linalg.solve_triangular(self.L, b, lower=True)

    def solve_L_transpose(self, b):
        return scipy.linalg.solve_triangular(self.L.T, b, lower=False)


def spd_factorize(M, dense_cap=5000):
    """Cholesky-factorize a symmetric positive definite matrix."""
    return SpdFactorization(M, dense_cap=dense_cap)


def write_matrix_market(M, path):
    """Export a sparse matrix in MatrixMarket coordinate format (ASCII,
    1-based indices) for external cross-checks."""
    scipy.io.mmwrite(str(path), sp.coo_matrix(M))
