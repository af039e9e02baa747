"""Built-in model instances with closed-form behaviour.

Stable identifiers (used by the CLI): ``von-neumann``, ``two-level``,
``weak-coupling``, ``low-density``.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidProjectionFamily, InvalidTimestep
from .hamiltonian import InteractionParams
from .model import BlockOperator, SpaceDims
from .numerics import as_matrix, operator_norm

BUILTINS = ("von-neumann", "two-level", "weak-coupling", "low-density")

PROJECTION_TOL = 1e-10

# lowering operator |ground><excited| of the two-level atom
LOWERING = np.array([[0, 1], [0, 0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class ProjectionFamily:
    n0: int
    projections: tuple

    def __post_init__(self):
        ps = tuple(as_matrix(p) for p in self.projections)
        n0 = self.n0
        if not ps:
            raise InvalidProjectionFamily("at least one projection is required")
        for k, p in enumerate(ps):
            if p.shape != (n0, n0):
                raise InvalidProjectionFamily(f"P_{k + 1} must be {n0}x{n0}")
            if operator_norm(p - p.conj().T) > PROJECTION_TOL:
                raise InvalidProjectionFamily(f"P_{k + 1} is not Hermitian")
            if operator_norm(p @ p - p) > PROJECTION_TOL:
                raise InvalidProjectionFamily(f"P_{k + 1} is not idempotent")
            for l, q in enumerate(ps[k + 1 :], start=k + 1):
                if operator_norm(p @ q) > PROJECTION_TOL:
                    raise InvalidProjectionFamily(
                        f"P_{k + 1} and P_{l + 1} are not orthogonal"
                    )
        if operator_norm(sum(ps) - np.eye(n0)) > PROJECTION_TOL:
            raise InvalidProjectionFamily("projections do not sum to the identity")
        object.__setattr__(self, "projections", ps)

    @classmethod
    def computational(cls, n0):
        """Rank-one projections onto the standard basis."""
        ps = []
        for k in range(n0):
            p = np.zeros((n0, n0), dtype=complex)
            p[k, k] = 1.0
            ps.append(p)
        return cls(n0, tuple(ps))

    def pinching(self, x):
        return sum(p @ x @ p for p in self.projections)


def von_neumann_params(p):
    """Measurement coupling: ``V_k = i P_k``, no free or scattering terms."""
    n0, n = p.n0, len(p.projections)
    dims = SpaceDims(n0, n)
    zero = InteractionParams.zeros(dims)
    return InteractionParams(
        dims, zero.h0, zero.hs, np.array([1j * q for q in p.projections]), zero.d
    )


def von_neumann_closed_form(p, x, t):
    """``(1 - e^-t) sum_k P_k x P_k + e^-t x``."""
    x = as_matrix(x)
    if x.shape != (p.n0, p.n0):
        raise DimensionMismatch(f"observable must be {p.n0}x{p.n0}")
    decay = np.exp(-t)
    return (1.0 - decay) * p.pinching(x) + decay * x


def two_level_step(h, alpha_policy="sqrt_h"):
    """Exchange unitary of two two-level systems.

    ``alpha_policy`` is ``"sqrt_h"`` (rotation angle ``sqrt(h)``) or a number
    used as a fixed angle.
    """
    if not (np.isfinite(h) and h > 0):
        raise InvalidTimestep(f"timestep must be positive, got {h}")
    alpha = np.sqrt(h) if alpha_policy == "sqrt_h" else float(alpha_policy)
    c, s = np.cos(alpha), np.sin(alpha)
    blocks = np.zeros((2, 2, 2, 2), dtype=complex)
    blocks[0, 0] = np.diag([1.0, c])
    blocks[1, 0] = [[0.0, s], [0.0, 0.0]]
    blocks[0, 1] = [[0.0, 0.0], [-s, 0.0]]
    blocks[1, 1] = np.diag([c, 1.0])
    return BlockOperator(SpaceDims(2, 1), blocks)


def two_level_params():
    """Interaction parameters whose step unitary is ``two_level_step(h)``.

    The generating Hamiltonian couples through ``V = i * LOWERING``; the limit
    noise coefficient is then the lowering operator itself.
    """
    dims = SpaceDims(2, 1)
    zero = InteractionParams.zeros(dims)
    return InteractionParams(dims, zero.h0, zero.hs, [1j * LOWERING], zero.d)


def two_level_expected(t):
    """Excited population ``e^{-t}`` of the limit dynamics started excited."""
    return {"excited_population": float(np.exp(-t))}


def weak_coupling_params(h0, hs, v):
    v = np.array(v, dtype=complex)
    n, n0 = v.shape[0], v.shape[1]
    return InteractionParams(SpaceDims(n0, n), h0, hs, v, np.zeros((n0 * n, n0 * n)))


def low_density_params(h0, hs, d):
    h0 = as_matrix(h0)
    n0 = h0.shape[0]
    n = as_matrix(d).shape[0] // n0
    return InteractionParams(SpaceDims(n0, n), h0, hs, np.zeros((n, n0, n0)), d)


def _random_hermitian(rng, n, norm):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    a = a + a.conj().T
    return a * (norm / operator_norm(a))


def random_params(dims, rng, alpha=1.0, coupling=True, scattering=True):
    """Random parameters whose six norms are all at most ``alpha``.

    ``coupling`` / ``scattering`` switch the ``V`` and ``D`` terms on or off.
    """
    n0, n = dims.n0, dims.n_env
    h0 = _random_hermitian(rng, n0, 0.4 * alpha)
    hs = _random_hermitian(rng, n + 1, 0.4 * alpha)
    v = np.zeros((n, n0, n0), dtype=complex)
    if coupling:
        v = rng.normal(size=(n, n0, n0)) + 1j * rng.normal(size=(n, n0, n0))
        v *= 0.9 * alpha / operator_norm(v.reshape(-1, n0))
    d = np.zeros((n0 * n, n0 * n))
    if scattering:
        d = _random_hermitian(rng, n0 * n, 0.9 * alpha)
    # ||M|| <= ||h0|| + ||hs|| and ||H~|| <= ||h0|| + ||hs||, so alpha holds
    return InteractionParams(dims, h0, hs, v, d)
