"""Superoperators on B(H0) under column-stacking vectorization.

``vec(A X B) = (B^T (x) A) vec(X)``; ``vec`` stacks columns, so for a 2x2
matrix ``[[a, b], [c, d]]`` it returns ``(a, c, b, d)``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .numerics import as_matrix, operator_norm


def vec(x):
    return as_matrix(x).reshape(-1, order="F")


def unvec(v, n0):
    return np.asarray(v, dtype=complex).reshape(n0, n0, order="F")


@dataclass(frozen=True, eq=False)
class Superoperator:
    n0: int
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (self.n0**2, self.n0**2):
            raise DimensionMismatch(
                f"superoperator on {self.n0}x{self.n0} operators must be "
                f"{self.n0 ** 2}x{self.n0 ** 2}, got {m.shape}"
            )
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    def __call__(self, x):
        x = as_matrix(x)
        if x.shape != (self.n0, self.n0):
            raise DimensionMismatch(f"expected a {self.n0}x{self.n0} operator")
        return unvec(self.matrix @ vec(x), self.n0)

    def __matmul__(self, other):
        if other.n0 != self.n0:
            raise DimensionMismatch("cannot compose superoperators of different size")
        return Superoperator(self.n0, self.matrix @ other.matrix)

    @classmethod
    def identity(cls, n0):
        return cls(n0, np.eye(n0 * n0))

    def norm(self):
        """Spectral norm of the n0^2 x n0^2 matrix."""
        return operator_norm(self.matrix)


def heisenberg_kraus(ops):
    """Superoperator of ``X -> sum_i A_i^H X A_i``."""
    ops = [as_matrix(a) for a in ops]
    n0 = ops[0].shape[0]
    m = sum(np.kron(a.T, a.conj().T) for a in ops)
    return Superoperator(n0, m)


def sandwich(left, right):
    """Superoperator of ``X -> left @ X @ right``."""
    return np.kron(as_matrix(right).T, as_matrix(left))


def choi_matrix(s):
    """``sum_ab E_ab (x) s(E_ab)``; positive semidefinite iff ``s`` is CP."""
    n0 = s.n0
    j = np.zeros((n0 * n0, n0 * n0), dtype=complex)
    for a in range(n0):
        for b in range(n0):
            e = np.zeros((n0, n0), dtype=complex)
            e[a, b] = 1.0
            j += np.kron(e, s(e))
    return j


def min_choi_eigenvalue(s):
    j = choi_matrix(s)
    return float(np.linalg.eigvalsh(0.5 * (j + j.conj().T)).min())
