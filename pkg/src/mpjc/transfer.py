"""Excitation transfer between the oscillators and the beamsplitter comparison."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import Evolver
from .hamiltonian import ModelParams
from .ladder import BasisState

__all__ = [
    "TransferReport",
    "swap_amplitude",
    "epsilon_asym",
    "transfer_fidelity",
    "transfer_plan",
    "beamsplitter_output",
    "beamsplitter_prob",
]


def _ratio(n, m):
    # (n+m)!/n! as an exact integer
    return math.prod(range(n + 1, n + m + 1))


def swap_amplitude(n1: int, m: int, g1: float, g2: float) -> float:
    """Peak of ``|x3|`` for ``|n1, m> -> |n1+m, 0>``: ``2 g_{1,n1 m} g_{2m} / (g_{1,n1 m}^2 + g_{2m}^2)``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    a = math.sqrt(_ratio(n1, m)) * abs(g1)
    b = math.sqrt(math.factorial(m)) * abs(g2)
    den = a * a + b * b
    return 0.0 if den == 0 else 2 * a * b / den


def epsilon_asym(n1: int, m: int) -> float:
    """Coupling ratio ``g1/g2 = √(n1! m! / (n1+m)!)`` that equalizes the two ladder couplings."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return math.sqrt(math.factorial(m) / _ratio(n1, m))


@dataclass(frozen=True)
class TransferReport:
    n1: int
    m: int
    g1: float
    g2: float
    A: float
    t_star: float
    peak_fidelity: float
    epsilon_required: float


def transfer_fidelity(params: ModelParams, times, engine: str = "numeric") -> np.ndarray:
    """``|<g, n1+m, 0|ψ(t)>|^2`` for the case-2a scenario ``params``."""
    ev = Evolver(params, engine)
    target = BasisState("g", params.n1 + params.m, 0)
    k = ev.basis.index(target)
    return np.array([abs(ev.state(float(t)).values[k]) ** 2 for t in np.atleast_1d(times)])


def transfer_plan(n1: int, m: int, g2: float, engine: str = "numeric") -> TransferReport:
    """Couplings and timing for complete transfer ``|n1, m> -> |n1+m, 0>`` (qubit in ``|g>``)."""
    if not g2 > 0:
        raise ValueError("g2 must be positive")
    eps = epsilon_asym(n1, m)
    g1 = eps * g2
    a = math.sqrt(_ratio(n1, m)) * g1
    b = math.sqrt(math.factorial(m)) * g2
    t_star = math.pi / math.sqrt(a * a + b * b)
    params = ModelParams(n1, m, m, g1, g2, 0.0, 0.0)
    fid = float(transfer_fidelity(params, [t_star], engine)[0])
    return TransferReport(n1, m, g1, g2, swap_amplitude(n1, m, g1, g2), t_star, fid, eps)


def _bs_coeff(n1, n2, k, l, theta):
    f = math.factorial
    mag = math.sqrt(f(k + l) * f(n1 + n2 - k - l) * f(n1) * f(n2)) / (f(n1 - k) * f(n2 - l) * f(k) * f(l))
    return (-1) ** l * mag * math.sin(theta) ** (n1 - k + l) * math.cos(theta) ** (n2 + k - l)


def beamsplitter_output(n1: int, n2: int, theta: float) -> list[tuple[tuple[int, int], float]]:
    """Output state of ``exp(-θ(a1†a2 - a1 a2†))`` acting on ``|n1, n2>``.

    The ``(n1+1)(n2+1)`` terms ``C_{n1,n2,k,l} |k+l, n1+n2-k-l>`` are summed
    per output state; the result is sorted by the first label.
    """
    if n1 < 0 or n2 < 0:
        raise ValueError("photon numbers must be nonnegative")
    out: dict[tuple[int, int], float] = {}
    for k in range(n1 + 1):
        for l in range(n2 + 1):
            key = (k + l, n1 + n2 - k - l)
            out[key] = out.get(key, 0.0) + _bs_coeff(n1, n2, k, l, theta)
    return sorted(out.items())


def beamsplitter_prob(n1: int, n2: int, theta: float) -> float:
    """Probability of ``|n1+n2, 0>``: ``C(n1+n2, n1) sin^{2 n2}θ cos^{2 n1}θ``."""
    if n1 < 0 or n2 < 0:
        raise ValueError("photon numbers must be nonnegative")
    return math.comb(n1 + n2, n1) * math.sin(theta) ** (2 * n2) * math.cos(theta) ** (2 * n1)
