import math

import numpy as np
import pytest
from scipy.linalg import expm

from mpjc.hamiltonian import ModelParams
from mpjc.symmetry import beamsplitter_unitary
from mpjc.transfer import (
    beamsplitter_output,
    beamsplitter_prob,
    epsilon_asym,
    swap_amplitude,
    transfer_fidelity,
    transfer_plan,
)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_perfect_swap_from_vacuum(m):
    assert swap_amplitude(0, m, 0.3, 0.3) == 1.0
    t_star = math.pi / math.sqrt(math.factorial(m))
    f = transfer_fidelity(ModelParams(0, m, m), [t_star])[0]
    assert f > 1 - 1e-12


def test_amplitude_below_one_for_excited_start():
    for n1 in (1, 2):
        for m in (1, 2, 3):
            assert swap_amplitude(n1, m, 1.0, 1.0) < 1


def test_amplitude_matches_numeric_peak():
    # three-level ladder: the peak of |x3|^2 is A^2
    n1, m, g1, g2 = 1, 3, 0.4, 0.9
    times = np.linspace(0, 12, 24001)
    peak = transfer_fidelity(ModelParams(n1, m, m, g1, g2), times).max()
    assert abs(peak - swap_amplitude(n1, m, g1, g2) ** 2) < 1e-6


@pytest.mark.parametrize("n1,m,table", [(1, 2, 0.58), (1, 3, 0.50), (2, 3, 0.32)])
def test_epsilon_table(n1, m, table):
    eps = epsilon_asym(n1, m)
    assert abs(eps - table) < 0.005
    rep = transfer_plan(n1, m, 1 / math.sqrt(2))
    assert rep.A == pytest.approx(1.0, abs=1e-12)
    assert rep.peak_fidelity > 1 - 1e-10
    assert rep.g1 == pytest.approx(eps / math.sqrt(2))


def _bs_oracle(n1, n2, theta):
    U = beamsplitter_unitary(theta, n1 + n2)
    nf = n1 + n2 + 1
    psi = np.zeros(nf * nf)
    psi[n1 * nf + n2] = 1
    return (U @ psi).reshape(nf, nf)


@pytest.mark.parametrize("n1,n2,theta", [(0, 3, 0.4), (2, 1, 1.1), (3, 3, 0.7), (1, 4, 2.0)])
def test_beamsplitter_output_matches_expm(n1, n2, theta):
    out = _bs_oracle(n1, n2, theta)
    got = dict(beamsplitter_output(n1, n2, theta))
    for p in range(n1 + n2 + 1):
        q = n1 + n2 - p
        assert abs(got.get((p, q), 0.0) - out[p, q]) < 1e-12
    assert abs(sum(a * a for a in got.values()) - 1) < 1e-12


def test_beamsplitter_prob_consistent():
    for n1, n2 in [(0, 2), (1, 1), (2, 3)]:
        for th in (0.2, 0.9):
            amp = dict(beamsplitter_output(n1, n2, th)).get((n1 + n2, 0), 0.0)
            assert abs(beamsplitter_prob(n1, n2, th) - amp**2) < 1e-12


def test_invalid():
    with pytest.raises(ValueError):
        beamsplitter_output(-1, 0, 0.1)
    with pytest.raises(ValueError):
        swap_amplitude(0, 0, 1, 1)
    with pytest.raises(ValueError):
        transfer_plan(0, 1, 0.0)
