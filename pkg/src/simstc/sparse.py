"""Sparse matrix substrate shared by graph construction and the model math.

Matrices are stored in coordinate form (row-major sorted, deduplicated, no
explicit zeros) and converted to CSR on demand for products. Instances are
treated as immutable once built.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as _sp


class SparseMatrix:
    """Immutable 2-D sparse matrix of 64-bit floats in COO layout."""

    __slots__ = ("rows", "cols", "row", "col", "val", "_csr", "_csr_t")

    def __init__(self, rows, cols, row, col, val):
        row = np.asarray(row, dtype=np.int64)
        col = np.asarray(col, dtype=np.int64)
        val = np.asarray(val, dtype=np.float64)
        if not (row.shape == col.shape == val.shape) or row.ndim != 1:
            raise ValueError("row/col/val must be 1-D arrays of equal length")
        if rows < 0 or cols < 0:
            raise ValueError("negative dimensions")
        if row.size:
            if row.min() < 0 or row.max() >= rows or col.min() < 0 or col.max() >= cols:
                raise ValueError("index out of range")
            if not np.all(np.isfinite(val)):
                raise ValueError("non-finite value in sparse matrix")
        # normalize: drop explicit zeros, sort row-major, reject duplicates
        keep = val != 0.0
        row, col, val = row[keep], col[keep], val[keep]
        order = np.lexsort((col, row))
        row, col, val = row[order], col[order], val[order]
        if row.size > 1:
            same = (row[1:] == row[:-1]) & (col[1:] == col[:-1])
            if same.any():
                raise ValueError("duplicate (row, col) entry")
        self.rows = int(rows)
        self.cols = int(cols)
        self.row = row
        self.col = col
        self.val = val
        self._csr = None
        self._csr_t = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_entries(cls, rows, cols, entries):
        """Build from an iterable of (row, col, value) triples."""
        if entries:
            r, c, v = zip(*entries)
        else:
            r, c, v = (), (), ()
        return cls(rows, cols, r, c, v)

    @classmethod
    def from_dense(cls, dense):
        dense = np.asarray(dense, dtype=np.float64)
        r, c = np.nonzero(dense)
        return cls(dense.shape[0], dense.shape[1], r, c, dense[r, c])

    @classmethod
    def identity(cls, n):
        idx = np.arange(n, dtype=np.int64)
        return cls(n, n, idx, idx, np.ones(n))

    # -- views ------------------------------------------------------------

    @property
    def shape(self):
        return (self.rows, self.cols)

    @property
    def nnz(self):
        return self.val.size

    def to_dense(self):
        out = np.zeros((self.rows, self.cols))
        out[self.row, self.col] = self.val
        return out

    def transpose(self):
        return SparseMatrix(self.cols, self.rows, self.col, self.row, self.val)

    def row_sums(self):
        out = np.zeros(self.rows)
        np.add.at(out, self.row, self.val)
        return out

    def is_symmetric(self, tol=1e-12):
        if self.rows != self.cols:
            return False
        d = self.csr() - self.csr().T
        return abs(d).max() <= tol if d.nnz else True

    def csr(self):
        if self._csr is None:
            self._csr = _sp.csr_matrix(
                (self.val, (self.row, self.col)), shape=(self.rows, self.cols)
            )
        return self._csr

    def dot(self, dense):
        """Product with a dense matrix; returns a dense ndarray."""
        dense = np.asarray(dense, dtype=np.float64)
        if dense.shape[0] != self.cols:
            raise ValueError(
                f"dimension mismatch: {self.shape} @ {dense.shape}"
            )
        return np.asarray(self.csr() @ dense)

    def tdot(self, dense):
        """Transpose product self.T @ dense (used by backward passes)."""
        if self._csr_t is None:
            self._csr_t = self.csr().T.tocsr()
        dense = np.asarray(dense, dtype=np.float64)
        if dense.shape[0] != self.rows:
            raise ValueError(
                f"dimension mismatch: {(self.cols, self.rows)} @ {dense.shape}"
            )
        return np.asarray(self._csr_t @ dense)

    def __eq__(self, other):
        if not isinstance(other, SparseMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.row, other.row)
            and np.array_equal(self.col, other.col)
            and np.array_equal(self.val, other.val)
        )

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz})"


def write_coord_text(path, m: SparseMatrix):
    """Serialize in the documented coordinate text format.

    First line is "rows cols nnz"; each following line is "row col value"
    in row-major order. Values use shortest round-trip decimal so reloads
    are bit-exact.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{m.rows} {m.cols} {m.nnz}\n")
        for r, c, v in zip(m.row, m.col, m.val):
            fh.write(f"{r} {c} {float(v)!r}\n")


def read_coord_text(path) -> SparseMatrix:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError(f"{path}: malformed coordinate header")
        rows, cols, nnz = (int(x) for x in header)
        r = np.empty(nnz, dtype=np.int64)
        c = np.empty(nnz, dtype=np.int64)
        v = np.empty(nnz, dtype=np.float64)
        for i in range(nnz):
            parts = fh.readline().split()
            if len(parts) != 3:
                raise ValueError(f"{path}: truncated at entry {i}")
            r[i], c[i], v[i] = int(parts[0]), int(parts[1]), float(parts[2])
    return SparseMatrix(rows, cols, r, c, v)
