"""Dense complex linear algebra used throughout the package.

All matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``.
Functions never mutate their arguments.
"""
from math import factorial

import numpy as np
import scipy.linalg

from .errors import (
    EigenFailure,
    InsufficientPoints,
    InvalidStep,
    NonPositiveValue,
    NonSquareError,
    NotHermitian,
)

HERMITIAN_REJECT_TOL = 1e-6

# Below this magnitude the removable-singularity functions are summed as power
# series. The closed forms lose ~eps/x**2 absolute accuracy, so the switch
# point has to be large enough for that loss to stay under 1e-12.
SERIES_RADIUS = 0.5
_SERIES_TERMS = 24

SCALAR_FUNCTIONS = ("exp_minus_i", "sin", "phi1", "phi2", "psi", "identity")


def as_matrix(a):
    """Return ``a`` as a 2-d complex array (copying only when needed)."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise NonSquareError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def _require_square(m):
    if m.shape[0] != m.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {m.shape}")


def as_hermitian(a, path=None):
    """Validate and symmetrize a Hermitian matrix.

    Rejects inputs whose residual ``||M - M^H||_F`` exceeds
    ``1e-6 * (1 + ||M||_F)`` and returns ``(M + M^H) / 2`` otherwise.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise NonSquareError(f"expected a square matrix, got shape {m.shape}", path)
    residual = np.linalg.norm(m - m.conj().T)
    if residual > HERMITIAN_REJECT_TOL * (1.0 + np.linalg.norm(m)):
        raise NotHermitian(f"matrix is not Hermitian (residual {residual:.3e})", path)
    return 0.5 * (m + m.conj().T)


def kron(a, b):
    """Kronecker product, ``(a (x) b)[i*p + k, j*q + l] = a[i, j] * b[k, l]``."""
    return np.kron(as_matrix(a), as_matrix(b))


def expm(a):
    """Matrix exponential (scaling and squaring with Pade core)."""
    m = as_matrix(a)
    _require_square(m)
    if m.size == 0:
        return m.copy()
    return scipy.linalg.expm(m)


def _series(x, coeffs):
    # Horner evaluation of sum_k coeffs[k] * x**k
    acc = np.zeros_like(x, dtype=complex)
    for c in coeffs[::-1]:
        acc = acc * x + c
    return acc


_PHI1_COEFFS = [(-1j) ** (k + 1) / factorial(k + 1) for k in range(_SERIES_TERMS)]
_PHI2_COEFFS = [(-1j) ** (k + 2) / factorial(k + 2) for k in range(_SERIES_TERMS)]
# (sin x - x)/x**2 = sum_{n>=1} (-1)**n x**(2n-1) / (2n+1)!
_PSI_COEFFS = [0.0] * _SERIES_TERMS
for _n in range(1, _SERIES_TERMS // 2):
    _PSI_COEFFS[2 * _n - 1] = (-1) ** _n / factorial(2 * _n + 1)


def _split(x):
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SERIES_RADIUS
    # dummy value keeps the closed forms finite where the series is used
    safe = np.where(small, 1.0, x)
    return x, small, safe


def _phi1(x):
    x, small, safe = _split(x)
    closed = (-2.0 * np.sin(safe / 2) ** 2 - 1j * np.sin(safe)) / safe
    return np.where(small, _series(x, _PHI1_COEFFS), closed)


def _psi(x):
    x, small, safe = _split(x)
    closed = (np.sin(safe) - safe) / safe**2
    return np.where(small, _series(x, _PSI_COEFFS).real, closed)


def _phi2(x):
    x, small, safe = _split(x)
    # real part (cos x - 1)/x**2 written without cancellation; imag part is -psi
    closed = -2.0 * np.sin(safe / 2) ** 2 / safe**2 - 1j * _psi(safe)
    return np.where(small, _series(x, _PHI2_COEFFS), closed)


_VECTORIZED = {
    "exp_minus_i": lambda x: np.exp(-1j * np.asarray(x, dtype=float)),
    "sin": lambda x: np.sin(np.asarray(x, dtype=float)).astype(complex),
    "phi1": _phi1,
    "phi2": _phi2,
    "psi": lambda x: _psi(x).astype(complex),
    "identity": lambda x: np.asarray(x, dtype=float).astype(complex),
}


def scalar_function(name):
    """Vectorized scalar function by identifier (see ``SCALAR_FUNCTIONS``)."""
    try:
        return _VECTORIZED[name]
    except KeyError:
        raise ValueError(
            f"unknown scalar function {name!r}; expected one of {SCALAR_FUNCTIONS}"
        ) from None


def phi_scalar(x, f):
    """Evaluate one of ``phi1``, ``phi2``, ``psi`` at a real point.

    phi1(x) = (exp(-ix) - 1)/x, phi2(x) = (exp(-ix) - 1 + ix)/x**2 and
    psi(x) = (sin x - x)/x**2, continued through their removable singularity
    at zero.
    """
    if f not in ("phi1", "phi2", "psi"):
        raise ValueError(f"phi_scalar supports phi1, phi2, psi; got {f!r}")
    return complex(scalar_function(f)(float(x)))


def hermitian_fn(d, f):
    """Apply a scalar function to a Hermitian matrix through its eigenbasis."""
    m = as_hermitian(d)
    fn = scalar_function(f)
    if m.size == 0:
        return m.copy()
    try:
        w, q = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    return (q * fn(w)) @ q.conj().T


def operator_norm(a):
    m = as_matrix(a)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def frobenius_norm(a):
    return float(np.linalg.norm(as_matrix(a)))


def norms(a):
    return {"operator_norm": operator_norm(a), "frobenius": frobenius_norm(a)}


def _rk4_propagator(g, dt):
    # one classical RK4 step of M' = G M with constant G is a degree-4 polynomial
    n = g.shape[0]
    gdt = g * dt
    p = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, 5):
        term = term @ gdt / k
        p = p + term
    return p


def ode_solve_linear(g, m0, t_end, step):
    """Integrate ``M'(t) = g(t) M(t)``, ``M(0) = m0`` on ``[0, t_end]`` with RK4.

    ``g`` is either a callable returning a square matrix or a constant matrix.
    The interval is split into ``ceil(t_end / step)`` equal steps, so the step
    actually taken never exceeds ``step``.
    """
    if not step > 0 or not np.isfinite(step):
        raise InvalidStep(f"step must be positive, got {step}")
    if t_end < 0:
        raise InvalidStep(f"t_end must be nonnegative, got {t_end}")
    m = np.array(m0, dtype=complex)
    if t_end == 0:
        return m
    n_steps = max(1, int(np.ceil(t_end / step - 1e-9)))
    dt = t_end / n_steps

    if not callable(g):
        gm = as_matrix(g)
        _require_square(gm)
        return np.linalg.matrix_power(_rk4_propagator(gm, dt), n_steps) @ m

    for k in range(n_steps):
        t = k * dt
        k1 = g(t) @ m
        k2 = g(t + dt / 2) @ (m + dt / 2 * k1)
        k3 = g(t + dt / 2) @ (m + dt / 2 * k2)
        k4 = g(t + dt) @ (m + dt * k3)
        m = m + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return m


def fit_order(points):
    """Least-squares slope of ``log(error)`` against ``log(h)``.

    ``points`` is a sequence of ``(h, error)`` pairs; at least three are
    required and every value must be positive.
    """
    pts = [(float(h), float(e)) for h, e in points]
    if len(pts) < 3:
        raise InsufficientPoints(f"need at least 3 points, got {len(pts)}")
    hs, errs = np.array(pts).T
    if np.any(hs <= 0) or np.any(errs <= 0):
        raise NonPositiveValue("order fitting needs positive steps and errors")
    x, y = np.log(hs), np.log(errs)
    xc = x - x.mean()
    return float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))
