"""Discrete repeated-interaction dynamics.

The evolution after ``n`` interactions is ``u_n = L_n ... L_1`` where ``L_k``
is the block operator acting on the system and chain site ``k``. Coherent
vectors of the chain are products ``(x)_k (Omega + sum_i phi_i(k) X^i)``.

Worked one-step example for the matrix-element recursion: with ``n = 1`` and
site amplitudes ``f = phi(1)``, ``g = psi(1)`` (vacuum component 1),
``<a (x) e(f), L_1 (b (x) e(g))> = <a, sum_ji conj(f_j) g_i L[j, i] b>``, i.e.
``M_1 = C(1) M_0`` with ``M_0 = I``. Later sites multiply on the left.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InputError, InvalidTimestep, MismatchedTimestep
from .model import (
    DEFAULT_MAX_AMPLITUDES,
    chain_apply_site,
    chain_inner,
    chain_product_vector,
)
from .superop import Superoperator, heisenberg_kraus


@dataclass(frozen=True, eq=False)
class CoherentFunction:
    """Piecewise-constant ``phi: [0, inf) -> C^N``, zero after the last breakpoint.

    ``values[k]`` is the value on ``[breakpoints[k], breakpoints[k+1])``.
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = np.array(self.breakpoints, dtype=float).reshape(-1)
        vals = np.array(self.values, dtype=complex)
        if bp.size == 0 or bp[0] != 0.0:
            raise InputError("breakpoints must start at 0", "breakpoints")
        if np.any(np.diff(bp) <= 0) or not np.all(np.isfinite(bp)):
            raise InputError("breakpoints must be strictly increasing", "breakpoints")
        if vals.ndim != 2 or vals.shape[0] != bp.size - 1:
            raise DimensionMismatch(
                f"need {bp.size - 1} interval values, got shape {vals.shape}", "values"
            )
        if not np.all(np.isfinite(vals)):
            raise InputError("values must be finite", "values")
        bp.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls, n_env):
        return cls([0.0], np.zeros((0, n_env)))

    @classmethod
    def constant(cls, value, t_support):
        value = np.atleast_1d(np.asarray(value, dtype=complex))
        return cls([0.0, float(t_support)], value[None, :])

    @property
    def n_env(self):
        return self.values.shape[1]

    @property
    def support_end(self):
        return float(self.breakpoints[-1])

    def __call__(self, s):
        """Value at time ``s`` (right-continuous)."""
        k = np.searchsorted(self.breakpoints, s, side="right") - 1
        if s < 0 or k >= len(self.values):
            return np.zeros(self.n_env, dtype=complex)
        return self.values[k]

    def inner_integral(self, other, t_end=np.inf):
        """``int_0^t_end <self(s), other(s)> ds`` (conjugate-linear in self)."""
        grid = np.union1d(self.breakpoints, other.breakpoints)
        grid = grid[grid < t_end]
        total = 0.0j
        for a, b in zip(grid, np.append(grid[1:], t_end)):
            if not np.isfinite(b):
                break
            total += (b - a) * np.vdot(self(a), other(a))
        return total


@dataclass(frozen=True, eq=False)
class DiscreteCoherent:
    """Per-site amplitudes ``phi~(n)`` (row ``n - 1``), zero beyond the array."""

    h: float
    sites: np.ndarray

    def __post_init__(self):
        s = np.array(self.sites, dtype=complex)
        if s.ndim != 2:
            raise DimensionMismatch("sites must be a 2-d array (n_sites, N)")
        s.flags.writeable = False
        object.__setattr__(self, "sites", s)

    @property
    def n_env(self):
        return self.sites.shape[1]

    def site(self, n):
        if 1 <= n <= len(self.sites):
            return self.sites[n - 1]
        return np.zeros(self.n_env, dtype=complex)

    def padded(self, n):
        """Site amplitudes for sites ``1..n`` as an ``(n, N)`` array."""
        out = np.zeros((n, self.n_env), dtype=complex)
        k = min(n, len(self.sites))
        out[:k] = self.sites[:k]
        return out


def discretize_coherent(f, h, n_sites=None):
    """``phi~_i(n) = h^{-1/2} int_{(n-1)h}^{nh} phi_i(s) ds``, integrated exactly.

    ``n_sites`` defaults to the number of sites meeting the support.
    """
    if not (np.isfinite(h) and h > 0):
        raise InvalidTimestep(f"timestep must be positive, got {h}")
    if n_sites is None:
        n_sites = int(np.ceil(f.support_end / h - 1e-9))
    starts = np.arange(n_sites) * h
    ends = starts + h
    lo = np.maximum(starts[:, None], f.breakpoints[None, :-1])
    hi = np.minimum(ends[:, None], f.breakpoints[None, 1:])
    overlap = np.clip(hi - lo, 0.0, None)
    return DiscreteCoherent(h, overlap @ f.values / np.sqrt(h))


def _check_pair(phi, psi, l=None):
    if phi.h != psi.h:
        raise MismatchedTimestep(f"timesteps differ: {phi.h} vs {psi.h}")
    if phi.n_env != psi.n_env:
        raise DimensionMismatch("coherent vectors have different level counts")
    if l is not None and l.dims.n_env != phi.n_env:
        raise DimensionMismatch("coherent vector levels do not match the operator")


def tail_factor(phi, psi, n):
    """``prod_{k > n} (1 + <phi~(k), psi~(k)>)`` over the stored sites."""
    _check_pair(phi, psi)
    m = max(len(phi.sites), len(psi.sites))
    if m <= n:
        return 1.0 + 0.0j
    a, b = phi.padded(m)[n:], psi.padded(m)[n:]
    return complex(np.prod(1.0 + np.einsum("ki,ki->k", a.conj(), b)))


@dataclass
class MatrixElement:
    m: np.ndarray
    tail: complex
    bracket_operator: np.ndarray


def site_contractions(l, phi, psi, n):
    """``C(k) = sum_ji conj(phi~_j(k)) psi~_i(k) L[j, i]`` for ``k = 1..n``."""
    ones = np.ones((n, 1), dtype=complex)
    f = np.hstack([ones, phi.padded(n)])
    g = np.hstack([ones, psi.padded(n)])
    return np.einsum("kj,ki,jiab->kab", f.conj(), g, l.blocks)


def discrete_matrix_element(l, phi, psi, n):
    """Compressed ``u_n`` between discrete coherent vectors.

    ``<a (x) e(phi~), u_n (b (x) e(psi~))> = <a, bracket_operator b>``.
    """
    _check_pair(phi, psi, l)
    if n < 0:
        raise InputError(f"n must be nonnegative, got {n}")
    m = np.eye(l.dims.n0, dtype=complex)
    for c in site_contractions(l, phi, psi, n):
        m = c @ m
    tail = tail_factor(phi, psi, n)
    return MatrixElement(m, tail, tail * m)


def reduced_cp_map(l):
    """Heisenberg map ``X -> sum_i L[i, 0]^H X L[i, 0]``."""
    return heisenberg_kraus(list(l.blocks[:, 0]))


def iterate_cp(s, n):
    if n < 0:
        raise InputError(f"n must be nonnegative, got {n}")
    return Superoperator(s.n0, np.linalg.matrix_power(s.matrix, n))


def evolve_chain(l, n, state):
    """``u_n state``: apply ``l`` at sites 1, 2, ..., n in that order."""
    for site in range(1, n + 1):
        state = chain_apply_site(l, site, state)
    return state


def chain_simulate_bracket(
    l, n, a, phi, b, psi, max_amplitudes=DEFAULT_MAX_AMPLITUDES
):
    """Dense-chain evaluation of ``<a (x) e(phi~), u_n (b (x) e(psi~))>``."""
    _check_pair(phi, psi, l)
    dims = l.dims
    ket = chain_product_vector(dims, n, b, psi.padded(n), max_amplitudes)
    bra = chain_product_vector(dims, n, a, phi.padded(n), max_amplitudes)
    return chain_inner(bra, evolve_chain(l, n, ket)) * tail_factor(phi, psi, n)
