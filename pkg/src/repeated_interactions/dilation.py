"""Unitary dilation of Kraus families and discrete-to-continuous semigroup checks."""
from dataclasses import dataclass, field

import numpy as np

from .continuous import lindblad_generator, semigroup_apply
from .discrete import iterate_cp, reduced_cp_map
from .errors import CompletionFailure, DimensionMismatch, NotAnIsometry, NotSelfAdjoint
from .model import SpaceDims, flat_to_block
from .numerics import as_matrix, fit_order, operator_norm

ISOMETRY_TOL = 1e-10
DEPENDENCE_TOL = 1e-8
SELF_ADJOINT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class KrausFamily:
    dims: SpaceDims
    ops: np.ndarray

    def __post_init__(self):
        ops = np.array(self.ops, dtype=complex)
        n0, d = self.dims.n0, self.dims.env_dim
        if ops.shape != (d, n0, n0):
            raise DimensionMismatch(f"need {d} Kraus operators of size {n0}x{n0}")
        gram = np.einsum("kba,kbc->ac", ops.conj(), ops)
        defect = operator_norm(gram - np.eye(n0))
        if defect > ISOMETRY_TOL:
            raise NotAnIsometry(f"sum A_i^H A_i deviates from I by {defect:.3e}")
        ops.flags.writeable = False
        object.__setattr__(self, "ops", ops)

    @classmethod
    def from_list(cls, ops):
        ops = [as_matrix(a) for a in ops]
        return cls(SpaceDims(ops[0].shape[0], len(ops) - 1), np.array(ops))


def kraus_dilate(k):
    """Unitary block operator whose first block column is ``A_0, ..., A_N``.

    The remaining columns come from Gram-Schmidt over the canonical basis of
    H0 (x) H in index order (two orthogonalization passes per candidate),
    accepting a candidate when its residual norm exceeds 1e-8.
    """
    dims = k.dims
    total, n0 = dims.total, dims.n0
    cols = [k.ops.reshape(-1, n0)[:, s] for s in range(n0)]
    basis = np.array(cols).T
    for e in range(total):
        if len(cols) == total:
            break
        v = np.zeros(total, dtype=complex)
        v[e] = 1.0
        for _ in range(2):
            v = v - basis @ (basis.conj().T @ v)
        norm = np.linalg.norm(v)
        if norm > DEPENDENCE_TOL:
            cols.append(v / norm)
            basis = np.array(cols).T
    if len(cols) != total:
        raise CompletionFailure(f"completed only {len(cols)} of {total} columns")
    flat = np.array(cols).T
    # the first n0 columns are copied verbatim
    flat[:, :n0] = k.ops.reshape(-1, n0)
    return flat_to_block(flat, dims)


def effective_hamiltonian(c):
    """``H = i (L00 + 1/2 sum_i L_i^0^H L_i^0)``, required to be self-adjoint."""
    l00 = c.table[0, 0]
    h = 1j * (l00 + 0.5 * sum(li.conj().T @ li for li in c.table[1:, 0]))
    defect = operator_norm(h - h.conj().T)
    if defect > SELF_ADJOINT_TOL:
        raise NotSelfAdjoint(defect)
    return 0.5 * (h + h.conj().T)


def steps_for(t, h):
    """``floor(t / h)``, robust to representation error when ``t/h`` is integral."""
    return int(np.floor(t / h + 1e-9))


@dataclass
class SemigroupReport:
    t: float
    h_values: list
    steps: list
    distances: list
    discrete_norms: list = field(default_factory=list)
    continuous_norm: float = None
    fitted_order: float = None


def discrete_semigroup_limit_check(l_family, c, t, h_list, observable=None):
    """Distance between ``ell_h^[t/h]`` and ``exp(t L)`` for each ``h``.

    Without ``observable`` the distance is the spectral norm of the difference
    of the ``n0^2 x n0^2`` superoperator matrices; with one it is the operator
    norm of the difference of the evolved observables.
    """
    hs = [float(h) for h in h_list]
    limit = semigroup_apply(lindblad_generator(c), t)
    dists, steps, dnorms = [], [], []
    for h in hs:
        n = steps_for(t, h)
        disc = iterate_cp(reduced_cp_map(l_family(h)), n)
        if observable is None:
            dists.append(operator_norm(disc.matrix - limit.matrix))
            dnorms.append(disc.norm())
        else:
            x = as_matrix(observable)
            dists.append(operator_norm(disc(x) - limit(x)))
            dnorms.append(operator_norm(disc(x)))
        steps.append(n)
    cnorm = limit.norm() if observable is None else operator_norm(limit(observable))
    order = None
    if len(hs) >= 3 and all(d > 0 for d in dists):
        order = fit_order(zip(hs, dists))
    return SemigroupReport(t, hs, steps, dists, dnorms, cnorm, order)
