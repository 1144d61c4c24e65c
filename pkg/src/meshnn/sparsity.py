"""Geometric support patterns between two node clouds.

A pattern keeps the index pairs (i, j) whose nodes are within the support
radius: ``|x_j - x'_i| <= r``, with i indexing output nodes and j input
nodes. Comparisons are made on squared distances (no square roots), so a
serialized pattern is bit-reproducible. Boundary case: distance exactly
equal to r is included.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import EmptyPatternWarning, ParseError
from .mesh import Mesh

# cap on materialized distance-matrix entries per block
_BLOCK_ENTRIES = 1_000_000


@dataclass(frozen=True)
class SparsityPattern:
    """Sorted row-major COO support pattern.

    Attributes
    ----------
    rows, cols : int
        Output / input node counts (matrix shape).
    row_idx, col_idx : int arrays of length nnz
        Index pairs, unique and sorted row-major.
    support_r : float
    """

    rows: int
    cols: int
    row_idx: np.ndarray
    col_idx: np.ndarray
    support_r: float

    @property
    def nnz(self) -> int:
        return len(self.row_idx)

    def indptr(self) -> np.ndarray:
        """CSR row pointer for the row-major sorted entries."""
        return np.concatenate([[0], np.cumsum(np.bincount(self.row_idx, minlength=self.rows))])


def pairwise_sq_distances(x: np.ndarray, x_out: np.ndarray, block=None) -> np.ndarray:
    """Squared Euclidean distances, ``D[i, j] = |x[j] - x_out[i]|^2``.

    Materialized in row blocks of at most ``block`` entries (default 1e6)
    to bound memory; the returned matrix is (len(x_out), len(x)).
    """
    x = np.asarray(x, dtype=float)
    x_out = np.asarray(x_out, dtype=float)
    if x.ndim != 2 or x_out.ndim != 2 or len(x) == 0 or len(x_out) == 0:
        raise ValueError("node arrays must be nonempty (n, d)")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(x_out))):
        raise ValueError("non-finite node coordinates")
    block = block or _BLOCK_ENTRIES
    rows_per_block = max(1, block // len(x))
    d = np.empty((len(x_out), len(x)))
    for lo in range(0, len(x_out), rows_per_block):
        chunk = x_out[lo:lo + rows_per_block]
        diff = chunk[:, None, :] - x[None, :, :]
        d[lo:lo + rows_per_block] = np.einsum("ijd,ijd->ij", diff, diff)
    return d


def support_pattern(x: np.ndarray, x_out: np.ndarray, r: float) -> SparsityPattern:
    """Pattern of node pairs within distance ``r`` (inclusive).

    Emits :class:`EmptyPatternWarning` when no pair qualifies; the
    pattern itself is still returned.
    """
    if not (r > 0):
        raise ValueError(f"support radius must be positive, got {r}")
    x = np.asarray(x, dtype=float)
    x_out = np.asarray(x_out, dtype=float)
    r2 = float(r) * float(r)
    rows_per_block = max(1, _BLOCK_ENTRIES // len(x))
    ri, ci = [], []
    for lo in range(0, len(x_out), rows_per_block):
        d = pairwise_sq_distances(x, x_out[lo:lo + rows_per_block])
        i, j = np.nonzero(d <= r2)
        ri.append(i + lo)
        ci.append(j)
    row_idx = np.concatenate(ri)
    col_idx = np.concatenate(ci)
    # np.nonzero scans row-major already; keep the order explicit anyway
    order = np.lexsort((col_idx, row_idx))
    pat = SparsityPattern(len(x_out), len(x), row_idx[order], col_idx[order], float(r))
    if pat.nnz == 0:
        warnings.warn("support pattern has no entries", EmptyPatternWarning)
    return pat


def prop1_bound(mesh_in: Mesh, mesh_out: Mesh, r: float) -> float:
    """Explicit upper bound on the support-pattern nnz for d=2, P1 nodes.

    ``N_in * 3 * (sigma_out * r / h_min_out)^2``: at most
    ``(sigma' r / h'_min)^2`` output elements fit in a radius-r ball, each
    carrying at most 3 vertices.
    """
    if not (r > 0):
        raise ValueError(f"support radius must be positive, got {r}")
    n_in = mesh_in.n_vertices
    return float(n_in * 3.0 * (mesh_out.sigma * r / mesh_out.h_min) ** 2)


def save_pattern(pat: SparsityPattern, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"PATTERN {pat.rows} {pat.cols} {float(pat.support_r)!r}\n")
        for i, j in zip(pat.row_idx, pat.col_idx):
            fh.write(f"{int(i)} {int(j)}\n")


def load_pattern(path) -> SparsityPattern:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty pattern file", line=1)
    head = lines[0].split()
    if len(head) != 4 or head[0] != "PATTERN":
        raise ParseError("expected header 'PATTERN <rows> <cols> <r>'", line=1)
    rows, cols, r = int(head[1]), int(head[2]), float(head[3])
    nnz = len(lines) - 1
    row_idx = np.empty(nnz, dtype=np.int64)
    col_idx = np.empty(nnz, dtype=np.int64)
    for k, line in enumerate(lines[1:]):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("expected 'i j'", line=k + 2)
        row_idx[k], col_idx[k] = int(parts[0]), int(parts[1])
    return SparsityPattern(rows, cols, row_idx, col_idx, r)
