import numpy as np
import pytest

from repeated_interactions.continuous import lindblad_generator, semigroup_apply
from repeated_interactions.dilation import steps_for
from repeated_interactions.discrete import iterate_cp, reduced_cp_map
from repeated_interactions.errors import DimensionMismatch, InvalidProjectionFamily, InvalidTimestep
from repeated_interactions.hamiltonian import (
    limit_coefficients,
    unitarity_structure_check,
    unitary_step,
)
from repeated_interactions.model import SpaceDims
from repeated_interactions.numerics import fit_order, operator_norm
from repeated_interactions.scenarios import (
    LOWERING,
    ProjectionFamily,
    low_density_params,
    random_params,
    two_level_expected,
    two_level_params,
    two_level_step,
    von_neumann_closed_form,
    von_neumann_params,
    weak_coupling_params,
)

from conftest import random_hermitian


def test_projection_family_validation():
    with pytest.raises(InvalidProjectionFamily):
        ProjectionFamily(2, (np.diag([1, 0]),))
    with pytest.raises(InvalidProjectionFamily):
        ProjectionFamily(2, (np.diag([1, 0]), np.diag([1, 1])))
    with pytest.raises(InvalidProjectionFamily):
        ProjectionFamily(2, (np.array([[1, 1], [0, 0]]), np.diag([0, 1])))
    with pytest.raises(InvalidProjectionFamily):
        ProjectionFamily(2, ())


def test_measurement_params():
    fam = ProjectionFamily.computational(2)
    p = von_neumann_params(fam)
    assert p.dims == SpaceDims(2, 2)
    np.testing.assert_array_equal(p.v[0], 1j * np.diag([1, 0]))
    np.testing.assert_array_equal(p.v[1], 1j * np.diag([0, 1]))
    assert not np.any(p.h0) and not np.any(p.hs) and not np.any(p.d)
    np.testing.assert_allclose(limit_coefficients(p).table[0, 0], -0.5 * np.eye(2))


def test_measurement_closed_form(rng):
    fam = ProjectionFamily.computational(3)
    x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    np.testing.assert_allclose(von_neumann_closed_form(fam, x, 0.0), x)
    np.testing.assert_allclose(von_neumann_closed_form(fam, x, 60.0), fam.pinching(x), atol=1e-15)
    block = np.diag([1.0, 2.0, 3.0])
    np.testing.assert_allclose(von_neumann_closed_form(fam, block, 0.7), block)
    with pytest.raises(DimensionMismatch):
        von_neumann_closed_form(fam, np.eye(2), 1.0)


def test_measurement_generator_squares_to_minus_itself():
    fam = ProjectionFamily(3, (np.diag([1, 1, 0]), np.diag([0, 0, 1])))
    g = lindblad_generator(limit_coefficients(von_neumann_params(fam))).matrix
    assert operator_norm(g @ g + g) <= 1e-10


def test_measurement_end_to_end_rate():
    fam = ProjectionFamily.computational(2)
    p = von_neumann_params(fam)
    x = np.array([[1, 1], [1, 1]], dtype=complex)
    pts = []
    for h in (1e-2, 1e-3, 1e-4):
        ell = iterate_cp(reduced_cp_map(unitary_step(p, h)), steps_for(1.0, h))
        pts.append((h, operator_norm(ell(x) - von_neumann_closed_form(fam, x, 1.0))))
    assert fit_order(pts) >= 0.8


def test_two_level_step_examples():
    np.testing.assert_allclose(two_level_step(1.0, alpha_policy=0.0).flat, np.eye(4))
    for alpha in (0.3, 1.2, np.pi / 2):
        flat = two_level_step(1.0, alpha_policy=alpha).flat
        assert operator_norm(flat.conj().T @ flat - np.eye(4)) < 1e-15
    h = 1e-8
    np.testing.assert_allclose(two_level_step(h)[1, 0] / np.sqrt(h), LOWERING, atol=1e-7)
    with pytest.raises(InvalidTimestep):
        two_level_step(0.0)


def test_two_level_expected():
    assert two_level_expected(0.0)["excited_population"] == 1.0
    assert two_level_expected(1.0)["excited_population"] == pytest.approx(0.367879, abs=1e-6)
    g = lindblad_generator(limit_coefficients(two_level_params()))
    vv = LOWERING.T @ LOWERING
    for t in (0.5, 1.0, 3.0):
        value = semigroup_apply(g, t)(vv)[1, 1].real
        assert abs(value - two_level_expected(t)["excited_population"]) <= 1e-10


def test_two_level_population_matches_cosine_power():
    vv = LOWERING.T @ LOWERING
    h = 1e-4
    ell = reduced_cp_map(two_level_step(h))
    for n in (1, 10, 1000):
        assert abs(iterate_cp(ell, n)(vv)[1, 1] - np.cos(np.sqrt(h)) ** (2 * n)) <= 1e-12
    assert abs(np.cos(np.sqrt(h)) ** (2 * steps_for(1.0, h)) - np.exp(-1)) <= 1e-3


def test_weak_coupling_reduction(rng):
    v = rng.normal(size=(2, 2, 2)) + 1j * rng.normal(size=(2, 2, 2))
    p = weak_coupling_params(random_hermitian(rng, 2), random_hermitian(rng, 3), v)
    assert not np.any(p.d)
    c = limit_coefficients(p)
    assert max(operator_norm(b) for b in c.table[1:, 1:].reshape(-1, 2, 2)) <= 1e-12


def test_low_density_reduction(rng):
    h0, hs, d = random_hermitian(rng, 2), random_hermitian(rng, 3), random_hermitian(rng, 4)
    p = low_density_params(h0, hs, d)
    assert not np.any(p.v)
    c = limit_coefficients(p)
    np.testing.assert_array_equal(c.table[0, 0], -1j * p.h_tilde)


@pytest.mark.parametrize("seed", range(5))
def test_random_params_respect_alpha(seed):
    p = random_params(SpaceDims(3, 2), np.random.default_rng(seed), alpha=0.7)
    assert p.alpha() <= 0.7 + 1e-12
    assert unitarity_structure_check(limit_coefficients(p)).passed
