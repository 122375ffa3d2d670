import math

import numpy as np
import pytest

from mpjc.errors import CouplingOverflowError, InvalidParameterError
from mpjc.hamiltonian import ModelParams, build_matrices, explicit_case_matrices, ladder_coupling
from mpjc.ladder import enumerate_basis

from oracles import brute_hamiltonian, state_index


def _restrict(H, nf, basis):
    idx = [state_index(0 if s.qubit == "g" else 1, s.n1, s.n2, nf) for s in basis]
    return H[np.ix_(idx, idx)]


@pytest.mark.parametrize("n1,n2,m", [(0, 0, 1), (1, 2, 3), (0, 2, 2), (2, 0, 2), (3, 3, 3), (5, 4, 2), (7, 1, 3)])
def test_matches_brute_force_projection(n1, n2, m):
    p = ModelParams(n1, n2, m, g1=0.37, g2=-1.1, delta=0.8)
    Mx, My = build_matrices(p)
    H, nf = brute_hamiltonian(n1, n2, m, p.g1, p.g2, p.delta, n1 + n2 + m + 1)
    assert np.allclose(Mx.entries, _restrict(H, nf, Mx.basis), atol=1e-12)
    assert np.allclose(My.entries, _restrict(H, nf, My.basis), atol=1e-12)


@pytest.mark.parametrize("n1,n2,m", [(0, 0, 1), (0, 1, 2), (2, 1, 3), (0, 1, 1), (2, 3, 3), (1, 2, 2), (1, 1, 1), (2, 2, 2), (3, 3, 3)])
def test_explicit_listing(n1, n2, m):
    p = ModelParams(n1, n2, m, g1=0.6, g2=0.9, delta=0.3)
    Mx, My = build_matrices(p)
    Ex, Ey = explicit_case_matrices(p)
    assert np.allclose(Mx.entries, Ex, atol=1e-14)
    assert np.allclose(My.entries, Ey, atol=1e-14)


def test_explicit_rejects_case4():
    with pytest.raises(InvalidParameterError):
        explicit_case_matrices(ModelParams(4, 5, 2))


def test_diagonal_signs():
    Mx, My = build_matrices(ModelParams(1, 1, 1, delta=2.0))
    for M in (Mx, My):
        for s, d in zip(M.basis, np.diag(M.entries)):
            assert d == (1.0 if s.qubit == "e" else -1.0)


def test_pentadiagonal():
    for n1, n2, m in [(6, 5, 1), (9, 7, 2), (3, 8, 3)]:
        Mx, My = build_matrices(ModelParams(n1, n2, m))
        assert Mx.bandwidth() <= 2 and My.bandwidth() <= 2


def test_symmetric():
    Mx, My = build_matrices(ModelParams(4, 6, 2, g1=0.2, g2=1.3, delta=-0.4))
    assert np.array_equal(Mx.entries, Mx.entries.T)
    assert np.array_equal(My.entries, My.entries.T)


def test_coupling_exact_integer_ratio():
    assert ladder_coupling(3, 2, 1.0) == math.sqrt(20)
    assert ladder_coupling(0, 4, 0.5) == 0.5 * math.sqrt(24)


def test_coupling_overflow():
    with pytest.raises(CouplingOverflowError) as exc:
        ladder_coupling(0, 200, 1.0, entry=(0, 1))
    assert exc.value.entry == (0, 1)


def test_swapped_and_replace():
    p = ModelParams(1, 2, 3, 0.1, 0.2, 0.3, 0.4)
    assert p.swapped() == ModelParams(2, 1, 3, 0.2, 0.1, 0.3, 0.4)
    assert p.replace(phi=0.0).phi == 0.0


@pytest.mark.parametrize("kw", [dict(n1=-1), dict(m=0), dict(g1=float("nan")), dict(n2=1.5)])
def test_invalid_params(kw):
    base = dict(n1=0, n2=0, m=1)
    base.update(kw)
    with pytest.raises(InvalidParameterError):
        ModelParams(**base)


def test_spec_mismatch():
    with pytest.raises(InvalidParameterError):
        build_matrices(ModelParams(0, 0, 1), enumerate_basis(0, 0, 2))
