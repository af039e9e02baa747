"""State spaces, block operators on H0 (x) H, and the dense atom-chain oracle.

Conventions
-----------
The environment copy ``H`` has dimension ``N + 1`` with basis index 0 for the
ground state (vacuum) and ``1..N`` for the excited levels.

An operator on ``H0 (x) H`` is stored as a :class:`BlockOperator`: an
``(N+1) x (N+1)`` table of ``n0 x n0`` blocks where ``blocks[j, i]`` maps the
level-``i`` sector to the level-``j`` sector. Its flat matrix uses the index
``s + n0 * e`` (environment-major blocks), so
``flat[s' + n0*j, s + n0*i] == blocks[j, i, s', s]``.

A chain state on ``H0 (x) H^{(x) n}`` is a dense vector with index
``s + n0 * (e_1 + (N+1) * e_2 + (N+1)**2 * e_3 + ...)``: the system index runs
fastest, then site 1, site 2, and so on.
"""
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InputError, SiteOutOfRange, StateTooLarge
from .numerics import as_matrix

DEFAULT_MAX_AMPLITUDES = 2**24


@dataclass(frozen=True)
class SpaceDims:
    n0: int
    n_env: int

    def __post_init__(self):
        if int(self.n0) != self.n0 or self.n0 < 1:
            raise InputError(f"n0 must be a positive integer, got {self.n0}")
        if int(self.n_env) != self.n_env or self.n_env < 1:
            raise InputError(f"n_env must be a positive integer, got {self.n_env}")

    @property
    def env_dim(self):
        return self.n_env + 1

    @property
    def total(self):
        """Dimension of H0 (x) H."""
        return self.n0 * (self.n_env + 1)


@dataclass(frozen=True, eq=False)
class BlockOperator:
    dims: SpaceDims
    blocks: np.ndarray

    def __post_init__(self):
        b = np.array(self.blocks, dtype=complex)
        d, n0 = self.dims.env_dim, self.dims.n0
        if b.shape != (d, d, n0, n0):
            raise DimensionMismatch(
                f"blocks must have shape {(d, d, n0, n0)}, got {b.shape}"
            )
        b.flags.writeable = False
        object.__setattr__(self, "blocks", b)

    def __getitem__(self, ji):
        return self.blocks[ji]

    @property
    def flat(self):
        return block_to_flat(self)

    @classmethod
    def identity(cls, dims):
        return flat_to_block(np.eye(dims.total), dims)


def block_to_flat(b):
    d, n0 = b.dims.env_dim, b.dims.n0
    return b.blocks.transpose(0, 2, 1, 3).reshape(d * n0, d * n0).copy()


def flat_to_block(m, dims):
    m = as_matrix(m)
    if m.shape != (dims.total, dims.total):
        raise DimensionMismatch(
            f"flat operator must be {dims.total}x{dims.total}, got {m.shape}"
        )
    d, n0 = dims.env_dim, dims.n0
    return BlockOperator(dims, m.reshape(d, n0, d, n0).transpose(0, 2, 1, 3))


@dataclass(frozen=True, eq=False)
class ChainState:
    dims: SpaceDims
    n_sites: int
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex).reshape(-1)
        expected = chain_size(self.dims, self.n_sites)
        if a.shape != (expected,):
            raise DimensionMismatch(
                f"chain state needs {expected} amplitudes, got {a.shape[0]}"
            )
        a.flags.writeable = False
        object.__setattr__(self, "amplitudes", a)

    def tensor(self):
        """Amplitudes viewed with axes ``(e_n, ..., e_1, s)``."""
        d = self.dims.env_dim
        return self.amplitudes.reshape((d,) * self.n_sites + (self.dims.n0,))


def chain_size(dims, n_sites):
    if n_sites < 0:
        raise InputError(f"n_sites must be nonnegative, got {n_sites}")
    return dims.n0 * dims.env_dim**n_sites


def _guard(dims, n_sites, max_amplitudes):
    size = chain_size(dims, n_sites)
    if size > max_amplitudes:
        raise StateTooLarge(
            f"chain of {n_sites} sites needs {size} amplitudes "
            f"(cap {max_amplitudes})"
        )


def basis_state(dims, n_sites, s, levels, max_amplitudes=DEFAULT_MAX_AMPLITUDES):
    """Chain basis vector with system index ``s`` and ``levels[k-1]`` at site k."""
    _guard(dims, n_sites, max_amplitudes)
    if len(levels) != n_sites:
        raise DimensionMismatch(f"expected {n_sites} levels, got {len(levels)}")
    idx, stride = s, dims.n0
    for e in levels:
        idx += stride * e
        stride *= dims.env_dim
    amps = np.zeros(chain_size(dims, n_sites), dtype=complex)
    amps[idx] = 1.0
    return ChainState(dims, n_sites, amps)


def _check_site(state, site):
    if not 1 <= site <= state.n_sites:
        raise SiteOutOfRange(f"site {site} outside 1..{state.n_sites}")


def _apply_flat_at_site(flat, site, state):
    d, n0, n = state.dims.env_dim, state.dims.n0, state.n_sites
    # axes: (outer sites n..site+1, e_site, inner sites site-1..1, s)
    psi = state.amplitudes.reshape(d ** (n - site), d, d ** (site - 1), n0)
    op = flat.reshape(d, n0, d, n0)
    out = np.einsum("abcd,ocid->oaib", op, psi)
    return ChainState(state.dims, n, out.reshape(-1))


def chain_apply_site(l, site, state):
    """Apply a block operator on (system, site) and the identity elsewhere."""
    if l.dims != state.dims:
        raise DimensionMismatch(f"operator dims {l.dims} != state dims {state.dims}")
    _check_site(state, site)
    return _apply_flat_at_site(block_to_flat(l), site, state)


def toy_op_apply(dims, i, j, site, state):
    """Apply the site operator ``a_j^i`` (``X^i -> X^j``) at ``site``."""
    if state.dims != dims:
        raise DimensionMismatch(f"state dims {state.dims} != {dims}")
    for level in (i, j):
        if not 0 <= level <= dims.n_env:
            raise InputError(f"level {level} outside 0..{dims.n_env}")
    _check_site(state, site)
    unit = np.zeros((dims.env_dim, dims.env_dim), dtype=complex)
    unit[j, i] = 1.0
    return _apply_flat_at_site(np.kron(unit, np.eye(dims.n0)), site, state)


def chain_apply_system(x, state):
    """Apply ``x (x) I`` to a chain state."""
    x = as_matrix(x)
    n0 = state.dims.n0
    if x.shape != (n0, n0):
        raise DimensionMismatch(f"system operator must be {n0}x{n0}, got {x.shape}")
    psi = state.amplitudes.reshape(-1, n0)
    return ChainState(state.dims, state.n_sites, (psi @ x.T).reshape(-1))


def chain_product_vector(
    dims, n_sites, sys, site_vectors, max_amplitudes=DEFAULT_MAX_AMPLITUDES
):
    """Product state ``sys (x) (Omega + sum_i v_i X^i)`` over ``n_sites`` sites.

    Each ``site_vectors[k-1]`` holds the ``N`` excited-level amplitudes of site
    k; the vacuum amplitude is fixed at 1.
    """
    _guard(dims, n_sites, max_amplitudes)
    sys = np.asarray(sys, dtype=complex).reshape(-1)
    if sys.shape != (dims.n0,):
        raise DimensionMismatch(f"system vector must have length {dims.n0}")
    if len(site_vectors) != n_sites:
        raise DimensionMismatch(
            f"expected {n_sites} site vectors, got {len(site_vectors)}"
        )
    amps = sys
    for v in site_vectors:
        v = np.asarray(v, dtype=complex).reshape(-1)
        if v.shape != (dims.n_env,):
            raise DimensionMismatch(f"site vectors must have length {dims.n_env}")
        amps = np.kron(np.concatenate(([1.0], v)), amps)
    return ChainState(dims, n_sites, amps)


def chain_inner(x, y):
    """``<x, y>``, conjugate-linear in ``x``."""
    if x.dims != y.dims or x.n_sites != y.n_sites:
        raise DimensionMismatch("chain states live on different spaces")
    return complex(np.vdot(x.amplitudes, y.amplitudes))
