import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repeated_interactions.errors import NormTooLarge
from repeated_interactions.hamiltonian import (
    InteractionParams,
    QsdeCoefficients,
    build_hamiltonian,
    check_convergence_hypothesis,
    hypothesis_residuals,
    limit_coefficients,
    series_blocks,
    scaled_deviation,
    unitarity_structure_check,
    unitary_step,
)
from repeated_interactions.model import SpaceDims
from repeated_interactions.numerics import expm, hermitian_fn, operator_norm
from repeated_interactions.scenarios import (
    LOWERING,
    ProjectionFamily,
    random_params,
    two_level_params,
    two_level_step,
    von_neumann_params,
)

from conftest import random_hermitian


def _free_params(rng, dims):
    zero = InteractionParams.zeros(dims)
    return InteractionParams(dims, random_hermitian(rng, dims.n0), zero.hs, zero.v, zero.d)


def test_free_hamiltonian_is_h0_tensor_identity(rng):
    dims = SpaceDims(2, 2)
    p = _free_params(rng, dims)
    np.testing.assert_allclose(build_hamiltonian(p, 0.01), np.kron(np.eye(3), p.h0), atol=1e-15)


def test_measurement_hamiltonian_entries():
    fam = ProjectionFamily.computational(2)
    p = von_neumann_params(fam)
    h = 0.04
    b = build_hamiltonian(p, h).reshape(3, 2, 3, 2).transpose(0, 2, 1, 3)
    for k, pk in enumerate(fam.projections, start=1):
        np.testing.assert_allclose(b[k, 0], 1j * pk / np.sqrt(h), atol=1e-14)
        np.testing.assert_allclose(b[0, k], -1j * pk / np.sqrt(h), atol=1e-14)
    assert not np.any(b[0, 0]) and not np.any(b[1:, 1:])


def test_hamiltonian_block_layout(seeded_params):
    p, h = seeded_params, 0.02
    n0 = p.dims.n0
    flat = build_hamiltonian(p, h)
    assert operator_norm(flat - flat.conj().T) <= 1e-12
    np.testing.assert_allclose(flat[:n0, :n0], p.h0 + p.hs[0, 0] * np.eye(n0), atol=1e-14)
    # bottom-right block: D/h + hs[1:,1:] (x) I + I (x) h0
    expected_br = p.d / h + np.kron(p.hs[1:, 1:], np.eye(n0)) + np.kron(np.eye(2), p.h0)
    np.testing.assert_allclose(flat[n0:, n0:], expected_br, atol=1e-12)
    expected_bl = p.v.reshape(-1, n0) / np.sqrt(h) + np.kron(p.hs[1:, :1], np.eye(n0))
    np.testing.assert_allclose(flat[n0:, :n0], expected_bl, atol=1e-13)


def test_two_level_hamiltonian_generates_exchange_unitary():
    for h in (1e-1, 1e-2, 1e-4):
        got = unitary_step(two_level_params(), h).blocks
        np.testing.assert_allclose(got, two_level_step(h).blocks, atol=1e-14)


def test_measurement_step_blocks():
    fam = ProjectionFamily(3, (np.diag([1, 1, 0]), np.diag([0, 0, 1])))
    h = 0.01
    l = unitary_step(von_neumann_params(fam), h)
    c, s = np.cos(np.sqrt(h)), np.sin(np.sqrt(h))
    np.testing.assert_allclose(l[0, 0], c * np.eye(3), atol=1e-14)
    for k, pk in enumerate(fam.projections, start=1):
        np.testing.assert_allclose(l[k, 0], s * pk, atol=1e-14)
        np.testing.assert_allclose(l[0, k], -s * pk, atol=1e-14)
        np.testing.assert_allclose(l[k, k], c * pk + np.eye(3) - pk, atol=1e-14)
    np.testing.assert_allclose(l[1, 2], 0, atol=1e-14)
    flat = l.flat
    assert operator_norm(flat.conj().T @ flat - np.eye(9)) < 1e-12


def test_step_is_unitary_and_continuous_at_zero(seeded_params):
    for h in (1e-1, 1e-3):
        flat = unitary_step(seeded_params, h).flat
        assert operator_norm(flat.conj().T @ flat - np.eye(6)) <= 1e-10
    # without scattering the step tends to the identity; with it, exchange blocks tend to e^{-iD}
    p = seeded_params
    weak = InteractionParams(p.dims, p.h0, p.hs, p.v, np.zeros_like(p.d))
    devs = [operator_norm(unitary_step(weak, h).flat - np.eye(6)) for h in (1e-2, 1e-4, 1e-6)]
    assert devs[0] > devs[1] > devs[2] and devs[2] < 1e-2
    s = expm(-1j * p.d)
    tail = unitary_step(p, 1e-8).flat[2:, 2:]
    assert operator_norm(tail - s) < 1e-3


def test_series_free_case_is_blockwise_exponential(rng):
    dims = SpaceDims(2, 2)
    p = _free_params(rng, dims)
    h = 0.3
    l = series_blocks(p, h)
    u = expm(-1j * h * p.h0)
    for j in range(3):
        for i in range(3):
            expected = u if i == j else np.zeros((2, 2))
            np.testing.assert_allclose(l[j, i], expected, atol=1e-13)


@pytest.mark.parametrize("h", [1e-1, 1e-2, 1e-3])
def test_series_matches_exponential(seeded_params, h):
    a = series_blocks(seeded_params, h, tol=1e-12).flat
    b = unitary_step(seeded_params, h).flat
    assert operator_norm(a - b) <= 1e-10


def test_series_with_large_h():
    p = random_params(SpaceDims(3, 1), np.random.default_rng(7), alpha=0.5)
    h = 4.0
    assert operator_norm(series_blocks(p, h).flat - unitary_step(p, h).flat) <= 1e-10


def test_series_rejects_large_norm():
    p = random_params(SpaceDims(2, 1), np.random.default_rng(0), alpha=30.0)
    with pytest.raises(NormTooLarge):
        series_blocks(p, 0.5)


def test_series_leading_vacuum_block(seeded_params):
    p = seeded_params
    vc = p.v_column
    errs = []
    hs = [1e-2, 1e-3, 1e-4]
    for h in hs:
        lead = np.eye(2) - 1j * h * p.h_tilde + h * vc.conj().T @ hermitian_fn(p.d, "phi2") @ vc
        errs.append(operator_norm(series_blocks(p, h)[0, 0] - lead))
    # remainder is O(h^{3/2})
    assert errs[2] / hs[2] ** 1.5 < 3 * errs[0] / hs[0] ** 1.5 + 1e-6
    assert errs[2] < errs[1] < errs[0]


def test_weak_coupling_coefficients(rng):
    dims = SpaceDims(2, 2)
    p = random_params(dims, rng, scattering=False)
    c = limit_coefficients(p)
    v = p.v_column
    np.testing.assert_allclose(c.s, np.eye(4), atol=1e-15)
    np.testing.assert_allclose(c.w, -1j * v, atol=1e-15)
    np.testing.assert_allclose(c.k, p.h_tilde, atol=1e-15)
    np.testing.assert_allclose(
        c.table[0, 0], -1j * p.h_tilde - 0.5 * v.conj().T @ v, atol=1e-14
    )
    assert max(operator_norm(b) for b in c.table[1:, 1:].reshape(-1, 2, 2)) <= 1e-12


def test_anti_hermitian_coupling_row_coefficients(rng):
    dims = SpaceDims(2, 2)
    base = random_params(dims, rng, scattering=False)
    v = np.array([(m - m.conj().T) / 2 for m in base.v])
    p = InteractionParams(dims, base.h0, base.hs, v, base.d)
    c = limit_coefficients(p)
    s_blocks = c.s.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3)
    for i in range(1, 3):
        structural = -sum(c.table[k, 0].conj().T @ s_blocks[k - 1, i - 1] for k in (1, 2))
        np.testing.assert_allclose(c.table[0, i], structural, atol=1e-12)
        np.testing.assert_allclose(c.table[0, i], 1j * v[i - 1], atol=1e-12)


def test_low_density_coefficients(rng):
    dims = SpaceDims(2, 2)
    p = random_params(dims, rng, coupling=False)
    c = limit_coefficients(p)
    assert not np.any(c.w)
    np.testing.assert_allclose(c.k, p.h_tilde, atol=1e-15)
    np.testing.assert_allclose(c.table[0, 0], -1j * p.h_tilde, atol=1e-15)
    np.testing.assert_allclose(c.exchange(), expm(-1j * p.d) - np.eye(4), atol=1e-12)


def test_measurement_coefficients():
    fam = ProjectionFamily.computational(2)
    c = limit_coefficients(von_neumann_params(fam))
    np.testing.assert_allclose(c.table[0, 0], -0.5 * np.eye(2), atol=1e-15)
    for k, pk in enumerate(fam.projections, start=1):
        np.testing.assert_allclose(c.table[k, 0], pk, atol=1e-15)
        np.testing.assert_allclose(c.table[0, k], -pk, atol=1e-15)


def test_reconciliation_identity(seeded_params):
    p = seeded_params
    c = limit_coefficients(p)
    vc = p.v_column
    lhs = -(1j * c.k + 0.5 * c.w.conj().T @ c.w)
    rhs = -1j * p.h_tilde + vc.conj().T @ hermitian_fn(p.d, "phi2") @ vc
    assert operator_norm(lhs - rhs) <= 1e-10
    rebuilt = QsdeCoefficients.from_structure(p.dims, c.k, c.w, c.s)
    assert np.max(np.abs(rebuilt.table - c.table)) <= 1e-12


def test_two_level_hypothesis_limits():
    c = limit_coefficients(two_level_params())
    h = 1e-6
    l = two_level_step(h)
    np.testing.assert_allclose((l[0, 0] - np.eye(2)) / h, np.diag([0, -0.5]), atol=1e-6)
    np.testing.assert_allclose(l[1, 0] / np.sqrt(h), LOWERING, atol=1e-6)
    np.testing.assert_allclose(l[0, 1] / np.sqrt(h), -LOWERING.T, atol=1e-6)
    np.testing.assert_allclose(l[1, 1] - np.eye(2), 0, atol=1e-6)
    assert np.max(np.abs(scaled_deviation(l, c, h))) < 1e-6


def test_free_hypothesis_residual_formula(rng):
    dims = SpaceDims(2, 1)
    p = _free_params(rng, dims)
    hs = [1e-1, 1e-2, 1e-3]
    check = check_convergence_hypothesis(p, hs)
    for h, r in zip(hs, check.residuals):
        u = expm(-1j * h * p.h0)
        vacuum = operator_norm((u - np.eye(2)) / h + 1j * p.h0) ** 2
        # the exchange sector carries exp(-ih H0) too
        exchange = dims.n_env * operator_norm(u - np.eye(2)) ** 2
        assert r == pytest.approx(vacuum + exchange, rel=1e-9)
    assert check.fitted_order == pytest.approx(2.0, abs=0.05)


def test_random_hypothesis_order(seeded_params):
    check = check_convergence_hypothesis(seeded_params, [1e-2, 1e-3, 1e-4])
    assert check.residuals[2] < check.residuals[0] / 3
    assert check.fitted_order >= 0.4
    assert all(f >= r - 1e-15 for f, r in zip(check.residuals_frobenius, check.residuals))


def test_hypothesis_requires_decreasing_steps(seeded_params):
    with pytest.raises(ValueError):
        hypothesis_residuals(
            lambda h: unitary_step(seeded_params, h),
            limit_coefficients(seeded_params),
            [1e-3, 1e-2],
        )


def test_structure_check_cases(seeded_params):
    c = limit_coefficients(seeded_params)
    assert unitarity_structure_check(c, 1e-10).passed
    zero = QsdeCoefficients(c.dims, np.zeros_like(c.table))
    assert unitarity_structure_check(zero).passed
    bumped = c.table.copy()
    bumped[0, 0, 0, 0] += 1e-3
    assert not unitarity_structure_check(QsdeCoefficients(c.dims, bumped), 1e-6).passed
    bumped = c.table.copy()
    bumped[1, 2, 1, 0] += 1e-3
    assert not unitarity_structure_check(QsdeCoefficients(c.dims, bumped), 1e-6).passed


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 2))
def test_limit_coefficients_always_structured(seed, n0, n):
    p = random_params(SpaceDims(n0, n), np.random.default_rng(seed))
    assert unitarity_structure_check(limit_coefficients(p), 1e-10).passed
