"""Proposal kernels Q(x|y) and their validation certificates.

Orientation convention: the second argument is the source state, so a dense
kernel is column-indexed by the current configuration and every column is a
probability distribution over proposed configurations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MismatchedDimensions, NegativeProbability

# Entries above this negative floor are treated as rounding noise and clamped.
_CLAMP_FLOOR = -1e-14


@dataclass(frozen=True)
class KernelCertificate:
    """Measured deviations from column/row stochasticity and symmetry."""

    max_column_deviation: float
    max_row_deviation: float
    max_asymmetry: float


class ProposalKernel:
    """Base class: a stochastic map from source configurations to proposals."""

    def __init__(self, n_spins: int):
        if n_spins < 1:
            raise ValueError(f"n_spins must be >= 1, got {n_spins}")
        self.n_spins = n_spins
        self._dense = None

    @property
    def dim(self) -> int:
        return 1 << self.n_spins

    def _build_dense(self) -> np.ndarray:
        raise NotImplementedError

    def dense(self) -> np.ndarray:
        """Dense matrix q[x, y] = Q(x|y), built once and cached."""
        if self._dense is None:
            q = np.asarray(self._build_dense(), dtype=float)
            if np.min(q) < _CLAMP_FLOOR:
                raise NegativeProbability(
                    f"kernel entry {np.min(q):.3e} below clamp floor"
                )
            self._dense = np.clip(q, 0.0, None)
        return self._dense

    def column(self, y: int) -> np.ndarray:
        """Proposal distribution from source state y."""
        return self.dense()[:, y]


class DenseKernel(ProposalKernel):
    def __init__(self, matrix: np.ndarray, n_spins: int | None = None):
        matrix = np.asarray(matrix, dtype=float)
        if n_spins is None:
            n_spins = int(matrix.shape[0]).bit_length() - 1
        super().__init__(n_spins)
        if matrix.shape != (self.dim, self.dim):
            raise MismatchedDimensions(
                f"expected {(self.dim, self.dim)} matrix, got {matrix.shape}"
            )
        self._matrix = matrix

    def _build_dense(self):
        return self._matrix


class StructuredMarkedKernel(ProposalKernel):
    """Kernel with the marked-state orbit structure: four distinct values.

    ``off_marked`` is Q(k|x) = Q(x|k) for any unmarked x, ``off_unmarked`` is
    Q(x|y) for distinct unmarked x, y, and the two ``stay`` values sit on the
    diagonal.
    """

    def __init__(self, n_spins, marked, off_marked, off_unmarked,
                 stay_marked, stay_unmarked):
        super().__init__(n_spins)
        if not 0 <= marked < self.dim:
            raise IndexError(f"marked index {marked} out of range")
        self.marked = marked
        self.off_marked = float(off_marked)
        self.off_unmarked = float(off_unmarked)
        self.stay_marked = float(stay_marked)
        self.stay_unmarked = float(stay_unmarked)

    def _build_dense(self):
        q = np.full((self.dim, self.dim), self.off_unmarked)
        q[self.marked, :] = self.off_marked
        q[:, self.marked] = self.off_marked
        np.fill_diagonal(q, self.stay_unmarked)
        q[self.marked, self.marked] = self.stay_marked
        return q

    def column(self, y):
        col = np.full(self.dim, self.off_unmarked)
        col[self.marked] = self.off_marked
        if y == self.marked:
            col[:] = self.off_marked
            col[y] = self.stay_marked
        else:
            col[y] = self.stay_unmarked
        return col


class ColumnOracleKernel(ProposalKernel):
    """Kernel defined by a reentrant procedure mapping a source state to a
    distribution; densified on demand."""

    def __init__(self, n_spins: int, oracle):
        super().__init__(n_spins)
        self._oracle = oracle

    def column(self, y):
        col = np.asarray(self._oracle(y), dtype=float)
        if col.shape != (self.dim,):
            raise MismatchedDimensions(
                f"oracle returned shape {col.shape}, expected ({self.dim},)"
            )
        return col

    def _build_dense(self):
        return np.column_stack([self.column(y) for y in range(self.dim)])


class AffineKernel(ProposalKernel):
    """Pointwise affine combination of kernels; weights may be negative but the
    combined kernel must be entrywise nonnegative to be usable."""

    def __init__(self, weights, kernels):
        if len(weights) != len(kernels) or not kernels:
            raise MismatchedDimensions("need one weight per kernel")
        n = kernels[0].n_spins
        if any(k.n_spins != n for k in kernels):
            raise MismatchedDimensions("kernels act on different spin counts")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError(f"affine weights must sum to 1, got {sum(weights)!r}")
        super().__init__(n)
        self.weights = [float(w) for w in weights]
        self.kernels = list(kernels)

    def _build_dense(self):
        q = np.zeros((self.dim, self.dim))
        for w, k in zip(self.weights, self.kernels):
            q += w * k.dense()
        return q

    def column(self, y):
        col = np.zeros(self.dim)
        for w, k in zip(self.weights, self.kernels):
            col += w * k.column(y)
        return col


def uniform_kernel(n_spins: int) -> ProposalKernel:
    """Uniform proposal Q(x|y) = 2**-N for all x, y, self-proposal included."""
    dim = 1 << n_spins
    return StructuredMarkedKernel(n_spins, 0, 1.0 / dim, 1.0 / dim,
                                  1.0 / dim, 1.0 / dim)


def single_flip_kernel(n_spins: int) -> ProposalKernel:
    """Local proposal: flip one uniformly chosen spin."""

    def oracle(y):
        col = np.zeros(1 << n_spins)
        for i in range(n_spins):
            col[y ^ (1 << i)] = 1.0 / n_spins
        return col

    return ColumnOracleKernel(n_spins, oracle)


def affine_combination(weights, kernels) -> AffineKernel:
    """Combine kernels with weights summing to 1.

    Raises NegativeProbability if any combined entry falls below -1e-10 (the
    combination is then not realizable as a stochastic proposal).
    """
    combined = AffineKernel(weights, kernels)
    q = combined._build_dense()
    low = float(np.min(q))
    if low < -1e-10:
        raise NegativeProbability(
            f"affine combination has entry {low:.3e} below tolerance"
        )
    combined._dense = np.clip(q, 0.0, None)
    return combined


def validate_kernel(kernel: ProposalKernel) -> KernelCertificate:
    """Measure stochasticity and symmetry deviations; never raises on violation."""
    q = kernel.dense()
    col_dev = float(np.max(np.abs(q.sum(axis=0) - 1.0)))
    row_dev = float(np.max(np.abs(q.sum(axis=1) - 1.0)))
    asym = float(np.max(np.abs(q - q.T)))
    return KernelCertificate(col_dev, row_dev, asym)
