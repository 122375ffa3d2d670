import itertools

import numpy as np
import pytest

from mpjc.dynamics import full_state
from mpjc.errors import HermiticityError
from mpjc.hamiltonian import ModelParams
from mpjc.states import DensityMatrix, closed_form_reduced, purity, reduce_oscillator, scenario_of

from oracles import brute_evolve, brute_reduced

GRID = [c for c in itertools.product(range(4), range(4), range(1, 4))]


@pytest.mark.parametrize("n1,n2,m", GRID)
def test_reduced_states_match_full_partial_trace(n1, n2, m):
    p = ModelParams(n1, n2, m, g1=0.7, g2=0.55, phi=0.9)
    t = 2.3
    st = full_state(p, t, "numeric")
    _, psi, nf = brute_evolve(n1, n2, m, p.g1, p.g2, 0.0, p.phi, t)
    for which in (1, 2):
        ref = brute_reduced(psi, nf, which)
        for rho in (reduce_oscillator(st, which), closed_form_reduced(st, which)):
            assert np.max(np.abs(rho.lift(nf - 1) - ref)) < 1e-10


def test_case4_needs_off_diagonal_terms():
    # n1 < m < n2 couples labels in oscillator 2 across both branches
    p = ModelParams(1, 5, 2, phi=0.7)
    st = full_state(p, 1.3, "numeric")
    a = closed_form_reduced(st, 2)
    b = reduce_oscillator(st, 2)
    assert np.allclose(a.lift(12), b.lift(12), atol=1e-12)
    assert np.max(np.abs(a.entries - np.diag(np.diag(a.entries)))) > 1e-3


def test_validate_and_purity():
    st = full_state(ModelParams(0, 0, 2, phi=0.7), 1.0)
    rho = reduce_oscillator(st, 1).validate()
    assert 0 < purity(rho) <= 1 + 1e-12
    assert abs(purity(DensityMatrix.fock(3)) - 1) < 1e-15


def test_validate_rejects_non_hermitian():
    with pytest.raises(HermiticityError):
        DensityMatrix((0, 1), np.array([[0.5, 0.1], [0.3, 0.5]])).validate()
    with pytest.raises(ValueError):
        DensityMatrix((0, 1), np.diag([0.7, 0.7])).validate()


def test_element_and_lift():
    rho = DensityMatrix((1, 4), np.array([[0.6, 0.2j], [-0.2j, 0.4]]))
    assert rho.element(4, 1) == -0.2j
    assert rho.element(2, 2) == 0
    full = rho.lift(5)
    assert full.shape == (6, 6) and full[1, 4] == 0.2j
    back = DensityMatrix.from_full(full)
    assert back.labels == (1, 4)


def test_rotation_keeps_populations():
    rho = DensityMatrix((0, 3), np.array([[0.5, 0.5], [0.5, 0.5]]))
    r = rho.rotated(0.4)
    assert np.allclose(np.diag(r.entries), np.diag(rho.entries))
    assert np.isclose(r.entries[0, 1], 0.5 * np.exp(1.2j))


def test_scenario_of():
    st = full_state(ModelParams(2, 1, 3), 0.5)
    assert scenario_of(st) == (2, 1, 3)


def test_bad_which():
    st = full_state(ModelParams(0, 0, 1), 0.5)
    with pytest.raises(ValueError):
        reduce_oscillator(st, 3)
