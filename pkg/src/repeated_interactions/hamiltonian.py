"""Three-time-scale interaction Hamiltonians and their limit coefficients.

The Hamiltonian on ``H0 (x) H`` is

    H = H0 (x) I + I (x) H_S
        + h^{-1/2} sum_i (V_i (x) a_i^0 + V_i^* (x) a_0^i)
        + h^{-1}   sum_ij D_ij (x) a_j^i

Rectangular objects follow the block layout of :mod:`.model`: the column
operator ``V`` is ``(n0*N) x n0`` with block row ``i-1`` holding ``V_i``, and
``D`` is the ``(n0*N) x (n0*N)`` operator whose block ``(j-1, i-1)`` is the
coefficient of ``a_j^i``.
"""
from dataclasses import dataclass, field
from math import exp, lgamma, log

import numpy as np

from .errors import DimensionMismatch, InvalidTimestep, NormTooLarge, NotSelfAdjoint
from .model import BlockOperator, SpaceDims, flat_to_block
from .numerics import (
    as_hermitian,
    as_matrix,
    expm,
    fit_order,
    frobenius_norm,
    hermitian_fn,
    operator_norm,
)

MAX_SERIES_NORM = 20.0


@dataclass(frozen=True, eq=False)
class InteractionParams:
    dims: SpaceDims
    h0: np.ndarray
    hs: np.ndarray
    v: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        n0, n = self.dims.n0, self.dims.n_env
        h0 = as_hermitian(self.h0, "params.h0")
        hs = as_hermitian(self.hs, "params.hs")
        d = as_hermitian(self.d, "params.d")
        v = np.array(self.v, dtype=complex)
        if h0.shape != (n0, n0):
            raise DimensionMismatch(f"must be {n0}x{n0}", "params.h0")
        if hs.shape != (n + 1, n + 1):
            raise DimensionMismatch(f"must be {n + 1}x{n + 1}", "params.hs")
        if v.shape != (n, n0, n0):
            raise DimensionMismatch(f"must hold {n} matrices {n0}x{n0}", "params.v")
        if d.shape != (n0 * n, n0 * n):
            raise DimensionMismatch(f"must be {n0 * n}x{n0 * n}", "params.d")
        for name, value in (("h0", h0), ("hs", hs), ("v", v), ("d", d)):
            value.flags.writeable = False
            object.__setattr__(self, name, value)

    @classmethod
    def zeros(cls, dims):
        n0, n = dims.n0, dims.n_env
        return cls(
            dims,
            np.zeros((n0, n0)),
            np.zeros((n + 1, n + 1)),
            np.zeros((n, n0, n0)),
            np.zeros((n0 * n, n0 * n)),
        )

    @property
    def v_column(self):
        return self.v.reshape(-1, self.dims.n0)

    @property
    def h_tilde(self):
        return self.h0 + self.hs[0, 0] * np.eye(self.dims.n0)

    @property
    def k_ket(self):
        return np.kron(self.hs[1:, :1], np.eye(self.dims.n0))

    @property
    def k_bra(self):
        return np.kron(self.hs[:1, 1:], np.eye(self.dims.n0))

    @property
    def m_matrix(self):
        n0, n = self.dims.n0, self.dims.n_env
        return np.kron(self.hs[1:, 1:], np.eye(n0)) + np.kron(np.eye(n), self.h0)

    def alpha(self):
        """Common bound on the norms of H~, V, D, M, <k| and |k>."""
        return max(
            operator_norm(x)
            for x in (
                self.h_tilde,
                self.v_column,
                self.d,
                self.m_matrix,
                self.k_bra,
                self.k_ket,
            )
        )


def _check_h(h):
    if not (np.isfinite(h) and h > 0):
        raise InvalidTimestep(f"timestep must be positive, got {h}")


def _assemble(dims, top_left, top_right, bottom_left, bottom_right):
    n0 = dims.n0
    m = np.empty((dims.total, dims.total), dtype=complex)
    m[:n0, :n0] = top_left
    m[:n0, n0:] = top_right
    m[n0:, :n0] = bottom_left
    m[n0:, n0:] = bottom_right
    return m


def build_hamiltonian(p, h):
    """Flat Hermitian matrix of the interaction Hamiltonian at timestep ``h``."""
    _check_h(h)
    rh = np.sqrt(h)
    v = p.v_column
    flat = _assemble(
        p.dims,
        p.h_tilde,
        v.conj().T / rh + p.k_bra,
        v / rh + p.k_ket,
        p.d / h + p.m_matrix,
    )
    return as_hermitian(flat)


def unitary_step(p, h):
    """The one-interaction unitary ``exp(-i h H)`` as a block operator."""
    return flat_to_block(expm(-1j * h * build_hamiltonian(p, h)), p.dims)


def _tail_bound(a, m):
    """Bound on ``sum_{k > m} 2 * 7**(k-1) * a**k / k!``."""
    if a == 0:
        return 0.0
    k = m + 1
    term = exp(log(2.0) + (k - 1) * log(7.0) + k * log(a) - lgamma(k + 1))
    total = 0.0
    while True:
        ratio = 7.0 * a / (k + 1)
        if ratio < 0.5:
            return total + term / (1.0 - ratio)
        total += term
        term *= ratio
        k += 1


def series_blocks(p, h, tol=1e-12, max_terms=4000):
    """Series evaluation of ``exp(-i h H)`` through the block recursions.

    Writes ``(hH)^m`` as ``[[h A_m + h^1.5 R1, h^.5 B_m + h R2],
    [h^.5 C_m + h R3, D_m + h R4]]`` and sums ``(-i)^m/m! (hH)^m`` until the
    a priori tail bound ``2 sum 7^(m-1) a^m / m!`` with ``a = alpha max(1, h)``
    drops below ``tol``. Independent of :func:`unitary_step`, which it is meant
    to cross-check.
    """
    _check_h(h)
    a = p.alpha() * max(1.0, h)
    if a >= MAX_SERIES_NORM:
        raise NormTooLarge(f"alpha * max(1, h) = {a:.3g} >= {MAX_SERIES_NORM}")
    n0 = p.dims.n0
    rh = np.sqrt(h)
    ht, v, d, mm = p.h_tilde, p.v_column, p.d, p.m_matrix
    vh = v.conj().T
    bra, ket = p.k_bra, p.k_ket

    # quantities of order m carry the series weight (-i)^m / m!
    c1 = -1j
    A, B, C, D = c1 * ht, c1 * vh, c1 * v, c1 * d
    R1 = np.zeros((n0, n0), dtype=complex)
    R2, R3, R4 = c1 * bra, c1 * ket, c1 * mm

    tl = np.eye(n0, dtype=complex) + h * A + h * rh * R1
    tr = rh * B + h * R2
    bl = rh * C + h * R3
    br = np.eye(d.shape[0], dtype=complex) + D + h * R4

    m = 1
    while _tail_bound(a, m) >= tol:
        if m >= max_terms:
            raise NormTooLarge(f"series did not reach tolerance in {max_terms} terms")
        w = -1j / (m + 1)
        A, R1, B, R2, C, R3, D, R4 = (
            w * (vh @ C),
            w * (rh * ht @ A + h * ht @ R1 + vh @ R3 + bra @ C + rh * bra @ R3),
            w * (vh @ D),
            w * (rh * ht @ B + h * ht @ R2 + rh * vh @ R4 + bra @ D + h * bra @ R4),
            w * (d @ C),
            w
            * (
                rh * v @ A
                + h * v @ R1
                + d @ R3
                + rh * mm @ C
                + h * mm @ R3
                + h * ket @ A
                + h * rh * ket @ R1
            ),
            w * (d @ D),
            w
            * (
                v @ B
                + rh * v @ R2
                + rh * ket @ B
                + h * ket @ R2
                + d @ R4
                + mm @ D
                + h * mm @ R4
            ),
        )
        tl = tl + h * A + h * rh * R1
        tr = tr + rh * B + h * R2
        bl = bl + rh * C + h * R3
        br = br + D + h * R4
        m += 1
    return flat_to_block(_assemble(p.dims, tl, tr, bl, br), p.dims)


@dataclass(frozen=True, eq=False)
class QsdeCoefficients:
    """Coefficients ``L_j^i`` of ``dU = sum L_j^i U da_j^i``.

    ``table[j, i]`` is ``L_j^i``. When the unitary structure is known, ``k``
    (Hermitian), ``w`` (column, ``(n0*N) x n0``) and ``s`` (unitary,
    ``(n0*N) x (n0*N)``) are stored alongside.
    """

    dims: SpaceDims
    table: np.ndarray
    k: np.ndarray = field(default=None)
    w: np.ndarray = field(default=None)
    s: np.ndarray = field(default=None)

    def __post_init__(self):
        t = np.array(self.table, dtype=complex)
        d, n0 = self.dims.env_dim, self.dims.n0
        if t.shape != (d, d, n0, n0):
            raise DimensionMismatch(f"table must have shape {(d, d, n0, n0)}")
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    @property
    def structured(self):
        return self.k is not None

    def column(self):
        """``L_j^0`` for ``j = 1..N`` stacked as a column operator."""
        return self.table[1:, 0].reshape(-1, self.dims.n0)

    def row(self):
        """``L_0^i`` for ``i = 1..N`` as a row operator."""
        return np.concatenate(list(self.table[0, 1:]), axis=1)

    def exchange(self):
        n0, n = self.dims.n0, self.dims.n_env
        return self.table[1:, 1:].transpose(0, 2, 1, 3).reshape(n0 * n, n0 * n)

    @classmethod
    def from_structure(cls, dims, k, w, s):
        """Build the unitary-type table from (K, W, S)."""
        n0, n = dims.n0, dims.n_env
        k, w, s = as_hermitian(k), as_matrix(w), as_matrix(s)
        l00 = -(1j * k + 0.5 * w.conj().T @ w)
        row = -w.conj().T @ s
        ex = s - np.eye(n0 * n)
        flat = _assemble(dims, l00, row, w, ex)
        table = flat_to_block(flat, dims).blocks
        return cls(dims, table, k=k, w=w, s=s)

    def as_block_operator(self):
        return BlockOperator(self.dims, self.table)


def limit_coefficients(p):
    """Closed-form limit coefficients of the repeated-interaction dynamics.

    S = exp(-iD), W = phi1(D) V, K = H~ + V^* psi(D) V, and the table
    L00 = -i H~ + V^* phi2(D) V, L_.^0 = W, L_0^. = V^* phi1(D), L_.^. = S - I.
    """
    n0, n = p.dims.n0, p.dims.n_env
    v = p.v_column
    vh = v.conj().T
    s = hermitian_fn(p.d, "exp_minus_i")
    f1 = hermitian_fn(p.d, "phi1")
    w = f1 @ v
    k_raw = p.h_tilde + vh @ hermitian_fn(p.d, "psi") @ v
    defect = frobenius_norm(k_raw - k_raw.conj().T)
    if defect > 1e-10 * (1 + frobenius_norm(k_raw)):
        raise NotSelfAdjoint(defect)
    k = 0.5 * (k_raw + k_raw.conj().T)
    l00 = -1j * p.h_tilde + vh @ hermitian_fn(p.d, "phi2") @ v
    flat = _assemble(p.dims, l00, vh @ f1, w, s - np.eye(n0 * n))
    return QsdeCoefficients(p.dims, flat_to_block(flat, p.dims).blocks, k=k, w=w, s=s)


def scaling_exponents(n_env):
    """``eps_ij``: 1 at (0, 0), 1/2 on the rest of row and column 0, else 0."""
    e = np.zeros((n_env + 1, n_env + 1))
    e[0, :] = 0.5
    e[:, 0] = 0.5
    e[0, 0] = 1.0
    return e


def scaled_deviation(l, c, h):
    """Blocks ``(L_j^i(h) - delta_ij I) / h^eps_ij - L_j^i``."""
    dims = l.dims
    eps = scaling_exponents(dims.n_env)
    shift = np.zeros_like(l.blocks)
    for i in range(dims.env_dim):
        shift[i, i] = np.eye(dims.n0)
    scale = h ** eps[:, :, None, None]
    return (l.blocks - shift) / scale - c.table


@dataclass
class HypothesisCheck:
    h_values: list
    residuals: list
    residuals_frobenius: list
    fitted_order: float = None


def hypothesis_residuals(step_family, coeffs, h_list):
    """Scaled-deviation residuals ``r(h) = sum_ij ||...||_op^2`` over ``h_list``."""
    hs = [float(h) for h in h_list]
    if any(h <= 0 for h in hs) or any(b >= a for a, b in zip(hs, hs[1:])):
        raise InvalidTimestep("h_list must be positive and strictly decreasing")
    res, res_f = [], []
    for h in hs:
        dev = scaled_deviation(step_family(h), coeffs, h)
        blocks = dev.reshape(-1, *dev.shape[2:])
        res.append(sum(operator_norm(b) ** 2 for b in blocks))
        res_f.append(sum(frobenius_norm(b) ** 2 for b in blocks))
    order = None
    if len(hs) >= 3 and all(r > 0 for r in res):
        order = fit_order(zip(hs, res))
    return HypothesisCheck(hs, res, res_f, order)


def check_convergence_hypothesis(p, h_list):
    return hypothesis_residuals(
        lambda h: unitary_step(p, h), limit_coefficients(p), h_list
    )


@dataclass
class StructureDiagnostics:
    s_isometry: float
    s_coisometry: float
    row_residual: float
    generator_residual: float
    k_hermitian_defect: float
    tol: float

    @property
    def passed(self):
        return max(
            self.s_isometry,
            self.s_coisometry,
            self.row_residual,
            self.generator_residual,
            self.k_hermitian_defect,
        ) <= self.tol


def unitarity_structure_check(c, tol=1e-10):
    """Test whether ``c`` has the form that yields a unitary solution.

    S and W are read off the table (``S = L_.^. + I``, ``W = L_.^0``). K is the
    stored one when present, otherwise ``i (L00 + W^* W / 2)``.
    """
    n0, n = c.dims.n0, c.dims.n_env
    l00 = c.table[0, 0]
    w = c.column()
    s = c.exchange() + np.eye(n0 * n)
    wh = w.conj().T
    k = c.k if c.structured else 1j * (l00 + 0.5 * wh @ w)
    eye = np.eye(n0 * n)
    return StructureDiagnostics(
        s_isometry=operator_norm(s.conj().T @ s - eye),
        s_coisometry=operator_norm(s @ s.conj().T - eye),
        row_residual=operator_norm(c.row() + wh @ s),
        generator_residual=operator_norm(l00 + 1j * k + 0.5 * wh @ w),
        k_hermitian_defect=operator_norm(k - k.conj().T),
        tol=tol,
    )
