"""Dense linear-algebra kernels shared by the recovery solvers.

Minimum-norm restricted least squares, orthogonal-projection residuals,
Gram-matrix diagnostics, and the plain-text matrix file format used by
the command line tools.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

__all__ = [
    "DesignMatrix",
    "SupportSet",
    "GramDiagnostics",
    "RankDeficiencyError",
    "least_squares_min_norm",
    "projection_residual",
    "gram_diagnostics",
    "rank_from_singular_values",
    "read_matrix_file",
    "write_matrix_file",
    "read_vector_file",
]


class RankDeficiencyError(ValueError):
    """A column submatrix is rank deficient where full rank is required."""


def _as_readonly_vector(v, n: int, what: str) -> NDArray[np.float64]:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != n:
        raise ValueError(f"{what} must be a length-{n} vector, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class DesignMatrix:
    """An n-by-p real design matrix with an optional unit-norm column contract.

    Parameters
    ----------
    entries : ndarray of shape (n, p)
        The matrix entries. Copied and frozen on construction.
    column_norm_tol : float, optional
        Tolerance used by :meth:`require_unit_norm_columns` when a caller
        asserts the unit-norm column contract.
    """

    entries: NDArray[np.float64]
    column_norm_tol: float = 1e-8

    def __post_init__(self) -> None:
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2:
            raise ValueError(f"entries must be 2-dimensional, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"entries must be at least 1x1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def p(self) -> int:
        return self.entries.shape[1]

    def column_norms(self) -> NDArray[np.float64]:
        return np.linalg.norm(self.entries, axis=0)

    def has_unit_norm_columns(self) -> bool:
        return bool(np.all(np.abs(self.column_norms() - 1.0) <= self.column_norm_tol))

    def require_unit_norm_columns(self) -> None:
        """Raise ``ValueError`` unless every column norm is within tolerance of 1."""
        norms = self.column_norms()
        dev = np.abs(norms - 1.0)
        worst = int(np.argmax(dev))
        if dev[worst] > self.column_norm_tol:
            raise ValueError(
                f"column {worst} has norm {norms[worst]:.6g}, "
                f"outside tolerance {self.column_norm_tol:g} of 1"
            )

    def columns(self, support: "SupportSet") -> NDArray[np.float64]:
        """Return the submatrix of the columns indexed by ``support``."""
        if len(support) == 0:
            return self.entries[:, :0]
        idx = support.as_array()
        if idx.min() < 0 or idx.max() >= self.p:
            raise IndexError(f"support indices out of range [0, {self.p})")
        return self.entries[:, idx]


@dataclass(frozen=True)
class SupportSet:
    """An ordered set of distinct column indices.

    Insertion order is preserved because greedy solvers report the order
    in which columns were selected; set-style comparison is available via
    :meth:`set_equal`.
    """

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        idx = tuple(int(i) for i in self.indices)
        if any(i < 0 for i in idx):
            raise ValueError(f"support indices must be nonnegative, got {idx}")
        if len(set(idx)) != len(idx):
            raise ValueError(f"support indices must be distinct, got {idx}")
        object.__setattr__(self, "indices", idx)

    @classmethod
    def empty(cls) -> "SupportSet":
        return cls(())

    @classmethod
    def of(cls, *indices: int) -> "SupportSet":
        return cls(tuple(indices))

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i: int) -> bool:
        return i in self.indices

    def as_array(self) -> NDArray[np.int64]:
        return np.asarray(self.indices, dtype=np.int64)

    def as_set(self) -> frozenset[int]:
        return frozenset(self.indices)

    def set_equal(self, other: "SupportSet") -> bool:
        """Exact set equality, ignoring insertion order."""
        return self.as_set() == other.as_set()

    def extended(self, i: int) -> "SupportSet":
        return SupportSet(self.indices + (int(i),))


@dataclass(frozen=True)
class GramDiagnostics:
    """Spectral and norm diagnostics of a full-column-rank submatrix X_J.

    Attributes
    ----------
    gram_inverse_inf_norm : float
        Induced infinity norm (maximum absolute row sum) of (X_J^T X_J)^{-1}.
    diag_sqrt : ndarray
        Square roots of the diagonal of (X_J^T X_J)^{-1}, one per support index.
    min_eigenvalue : float
        Smallest eigenvalue of X_J^T X_J.
    pseudo_inverse_21_norm : float
        Induced (2 -> 1) norm of the pseudo-inverse of X_J.
    pseudo_inverse_22_norm : float
        Spectral norm of the pseudo-inverse of X_J.
    """

    gram_inverse_inf_norm: float
    diag_sqrt: NDArray[np.float64]
    min_eigenvalue: float
    pseudo_inverse_21_norm: float
    pseudo_inverse_22_norm: float


def rank_from_singular_values(singular_values: NDArray[np.float64], shape: tuple[int, int]) -> int:
    """Numerical rank: singular values below max(n,p)*eps*smax count as zero."""
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0:
        return 0
    tol = max(shape) * np.finfo(float).eps * s[0]
    return int(np.count_nonzero(s > tol))


def least_squares_min_norm(
    X: DesignMatrix, J: SupportSet, y: NDArray[np.float64]
) -> tuple[NDArray[np.float64], float]:
    """Minimum-norm least squares restricted to the columns in ``J``.

    Returns the minimum-norm coefficient vector (length ``len(J)``) and the
    squared residual norm. Rank-deficient submatrices are handled through
    the SVD-based minimum-norm solution; the residual then uses the
    reduced-rank projector.
    """
    if len(J) == 0:
        raise ValueError("least_squares_min_norm requires a nonempty support")
    y = _as_readonly_vector(y, X.n, "y")
    XJ = X.columns(J)
    coeffs, _, _, _ = np.linalg.lstsq(XJ, y, rcond=None)
    residual = y - XJ @ coeffs
    return coeffs, float(residual @ residual)


def projection_residual(
    X: DesignMatrix, J: SupportSet, y: NDArray[np.float64]
) -> tuple[NDArray[np.float64], float]:
    """Residual of ``y`` after orthogonal projection onto span of the ``J`` columns.

    The empty support uses the zero projector, so the residual is ``y`` itself.
    """
    y = _as_readonly_vector(y, X.n, "y")
    if len(J) == 0:
        residual = y.copy()
        return residual, float(residual @ residual)
    XJ = X.columns(J)
    coeffs, _, _, _ = np.linalg.lstsq(XJ, y, rcond=None)
    residual = y - XJ @ coeffs
    return residual, float(residual @ residual)


def _signed_max_l2(A: NDArray[np.float64]) -> float:
    # Induced (2 -> 1) norm of A: max over sign vectors s of ||A^T s||_2.
    # Exact by enumeration over 2^(rows-1) sign patterns (s and -s coincide).
    rows = A.shape[0]
    if rows == 0:
        return 0.0
    if rows > 22:
        raise ValueError(f"pseudo-inverse (2,1) norm enumeration limited to 22 rows, got {rows}")
    count = 1 << (rows - 1)
    best = 0.0
    chunk = 1 << 16
    for start in range(0, count, chunk):
        idx = np.arange(start, min(start + chunk, count), dtype=np.uint64)
        bits = (idx[:, None] >> np.arange(rows - 1, dtype=np.uint64)[None, :]) & 1
        signs = np.empty((idx.size, rows))
        signs[:, 0] = 1.0
        signs[:, 1:] = np.where(bits == 1, 1.0, -1.0)
        norms = np.linalg.norm(signs @ A, axis=1)
        best = max(best, float(norms.max()))
    return best


def gram_diagnostics(X: DesignMatrix, J: SupportSet) -> GramDiagnostics:
    """Compute :class:`GramDiagnostics` for the full-column-rank submatrix X_J.

    Raises
    ------
    RankDeficiencyError
        If X_J fails the singular-value rank rule.
    """
    if len(J) == 0:
        raise ValueError("gram_diagnostics requires a nonempty support")
    XJ = X.columns(J)
    k = XJ.shape[1]
    U, s, Vt = np.linalg.svd(XJ, full_matrices=False)
    if rank_from_singular_values(s, XJ.shape) < k:
        raise RankDeficiencyError(f"columns {J.indices} are rank deficient")
    # Gram inverse via the SVD factors; avoids forming normal equations.
    V = Vt.T
    gram_inv = (V / (s * s)) @ Vt
    diag_sqrt = np.sqrt(np.diag(gram_inv))
    inf_norm = float(np.max(np.sum(np.abs(gram_inv), axis=1)))
    pinv = (V / s) @ U.T
    return GramDiagnostics(
        gram_inverse_inf_norm=inf_norm,
        diag_sqrt=diag_sqrt,
        min_eigenvalue=float(s[-1] ** 2),
        pseudo_inverse_21_norm=_signed_max_l2(pinv),
        pseudo_inverse_22_norm=float(1.0 / s[-1]),
    )


def write_matrix_file(path, X: DesignMatrix) -> None:
    """Write a matrix in the shared text format: header ``n p`` then n rows."""
    lines = [f"{X.n} {X.p}"]
    for row in X.entries:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_matrix_file(path, column_norm_tol: float = 1e-8) -> DesignMatrix:
    """Read a matrix from the shared text format (see :func:`write_matrix_file`)."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise ValueError(f"{path}: first line must be 'n p', got {header!r}")
        n, p = int(header[0]), int(header[1])
        rows = []
        for i in range(n):
            parts = fh.readline().split()
            if len(parts) != p:
                raise ValueError(f"{path}: row {i} has {len(parts)} values, expected {p}")
            rows.append([float(v) for v in parts])
    return DesignMatrix(np.asarray(rows, dtype=float), column_norm_tol=column_norm_tol)


def read_vector_file(path) -> NDArray[np.float64]:
    """Read a vector stored one real per line."""
    values = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if line:
                values.append(float(line))
    if not values:
        raise ValueError(f"{path}: empty vector file")
    return np.asarray(values, dtype=float)
