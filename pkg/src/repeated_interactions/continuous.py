"""Limit (continuous-time) dynamics.

Coherent matrix elements of the solution of ``dU = sum L_j^i U da_j^i`` obey
a matrix ODE on H0: for ``Theta_t = <eps(phi)| U_t |eps(psi)>`` (an operator
on H0),

    Theta'(s) = G(s) Theta(s),   G(s) = sum_ji conj(phi_j(s)) psi_i(s) L_j^i,

with ``phi_0 = psi_0 = 1`` and ``Theta_0 = exp(int <phi, psi>) I``.
"""
import numpy as np

from .errors import DimensionMismatch, InputError, InvalidStep
from .numerics import as_matrix, expm, ode_solve_linear, operator_norm
from .superop import Superoperator, sandwich, unvec, vec


def coherent_generator(c, f, g):
    """``G = sum_ji conj(f_j) g_i L_j^i`` for level amplitudes ``f, g`` in C^N."""
    fa = np.concatenate(([1.0], np.asarray(f, dtype=complex)))
    ga = np.concatenate(([1.0], np.asarray(g, dtype=complex)))
    return np.einsum("j,i,jiab->ab", fa.conj(), ga, c.table)


def qsde_matrix_element(c, phi, psi, t, step):
    """``Theta_t`` with ``<a (x) eps(phi), U_t b (x) eps(psi)> = <a, Theta_t b>``.

    Integration restarts at every breakpoint of ``phi`` and ``psi`` so the
    generator is constant on each RK4 segment.
    """
    if not (np.isfinite(step) and step > 0):
        raise InvalidStep(f"step must be positive, got {step}")
    if t < 0:
        raise InputError(f"t must be nonnegative, got {t}")
    if phi.n_env != c.dims.n_env or psi.n_env != c.dims.n_env:
        raise DimensionMismatch("test functions do not match the level count")
    theta = np.exp(phi.inner_integral(psi)) * np.eye(c.dims.n0, dtype=complex)
    grid = np.union1d(phi.breakpoints, psi.breakpoints)
    grid = np.append(grid[grid < t], t)
    for a, b in zip(grid[:-1], grid[1:]):
        g = coherent_generator(c, phi(a), psi(a))
        theta = ode_solve_linear(g, theta, b - a, step)
    return theta


def lindblad_generator(c):
    """``L(X) = L00^H X + X L00 + sum_{i>0} L_i^0^H X L_i^0`` as a superoperator."""
    n0 = c.dims.n0
    l00 = c.table[0, 0]
    m = sandwich(l00.conj().T, np.eye(n0)) + sandwich(np.eye(n0), l00)
    for li in c.table[1:, 0]:
        m = m + sandwich(li.conj().T, li)
    return Superoperator(n0, m)


def unitality_defect(c):
    """``||L(I)||``; zero when the discrete maps preserve the identity to first order."""
    g = lindblad_generator(c)
    return operator_norm(g(np.eye(c.dims.n0)))


def semigroup_apply(g, t):
    if t < 0:
        raise InputError(f"t must be nonnegative, got {t}")
    return Superoperator(g.n0, expm(t * g.matrix))


def vacuum_heisenberg(c, x, t):
    """Vacuum compression of ``U_t^* (x (x) I) U_t``, i.e. ``exp(t L)(x)``."""
    x = as_matrix(x)
    n0 = c.dims.n0
    if x.shape != (n0, n0):
        raise DimensionMismatch(f"observable must be {n0}x{n0}, got {x.shape}")
    p = semigroup_apply(lindblad_generator(c), t)
    return unvec(p.matrix @ vec(x), n0)
