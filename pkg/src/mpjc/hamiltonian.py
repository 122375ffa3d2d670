"""Coupling matrices M_x, M_y generating the coefficient dynamics.

With ``H_II = Δ/2 σz + Σ_i g_i (a_i^m σ+ + h.c.)`` restricted to one branch of
the ladder, ``d/dt X = -i M_x X`` (and likewise for Y).  Ground-qubit states
carry ``-Δ/2`` on the diagonal, excited ones ``+Δ/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CouplingOverflowError, InvalidParameterError
from .ladder import BasisState, Case, LadderSpec, enumerate_basis, neighbours

__all__ = [
    "ModelParams",
    "CouplingMatrix",
    "ladder_coupling",
    "build_matrices",
    "explicit_case_matrices",
]


@dataclass(frozen=True)
class ModelParams:
    """Scenario parameters (``hbar = 1``; times in units of ``1/g``)."""

    n1: int
    n2: int
    m: int
    g1: float = 1 / math.sqrt(2)
    g2: float = 1 / math.sqrt(2)
    delta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        for name in ("n1", "n2"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise InvalidParameterError(f"{name} must be a nonnegative integer, got {v!r}")
        if int(self.m) != self.m or self.m < 1:
            raise InvalidParameterError(f"m must be a positive integer, got {self.m!r}")
        for name in ("g1", "g2", "delta", "phi"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite")

    @property
    def delta_half(self) -> float:
        return self.delta / 2

    def swapped(self) -> "ModelParams":
        """Same scenario with the two oscillators exchanged."""
        return ModelParams(self.n2, self.n1, self.m, self.g2, self.g1, self.delta, self.phi)

    def replace(self, **changes) -> "ModelParams":
        d = dict(self.__dict__)
        d.update(changes)
        return ModelParams(**d)


@dataclass(frozen=True)
class CouplingMatrix:
    entries: np.ndarray
    basis: tuple[BasisState, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def bandwidth(self) -> int:
        nz = np.argwhere(self.entries != 0)
        return int(np.max(np.abs(nz[:, 0] - nz[:, 1]))) if len(nz) else 0


def ladder_coupling(n: int, m: int, g: float, entry=None) -> float:
    """``g * sqrt((n+m)!/n!)``, the coupling for an ``m``-photon raise from ``n``.

    The factorial ratio is formed as an exact integer product of ``m``
    consecutive integers before conversion to float.
    """
    if n < 0:
        raise InvalidParameterError(f"negative Fock label {n}")
    ratio = math.prod(range(n + 1, n + m + 1))
    try:
        value = math.sqrt(float(ratio))
    except OverflowError:
        raise CouplingOverflowError(entry, f"sqrt({n + m}!/{n}!) overflows a float at entry {entry}") from None
    return g * value


def _branch_matrix(basis, params: ModelParams) -> np.ndarray:
    index = {s: i for i, s in enumerate(basis)}
    dim = len(basis)
    M = np.zeros((dim, dim))
    dh = params.delta_half
    for i, s in enumerate(basis):
        M[i, i] = dh if s.qubit == "e" else -dh
        if s.qubit != "g":
            continue
        for t in neighbours(s, params.m):
            j = index.get(t)
            if j is None:
                continue
            if t.n1 != s.n1:
                c = ladder_coupling(t.n1, params.m, params.g1, entry=(i, j))
            else:
                c = ladder_coupling(t.n2, params.m, params.g2, entry=(i, j))
            M[i, j] = M[j, i] = c
    return M


def build_matrices(params: ModelParams, spec: LadderSpec | None = None) -> tuple[CouplingMatrix, CouplingMatrix]:
    """Build ``(M_x, M_y)`` for any ``(n1, n2, m)``.

    Entries are ``<b_i| H_II |b_j>`` over the ladder basis, so the result is
    real symmetric and (in the four-block ordering) pentadiagonal.
    """
    if spec is None:
        spec = enumerate_basis(params.n1, params.n2, params.m)
    elif (spec.n1, spec.n2, spec.m) != (params.n1, params.n2, params.m):
        raise InvalidParameterError("ladder spec does not match the model parameters")
    Mx = CouplingMatrix(_branch_matrix(spec.x_basis, params), spec.x_basis)
    My = CouplingMatrix(_branch_matrix(spec.y_basis, params), spec.y_basis)
    return Mx, My


def _sqrt_ratio(a, b):
    # sqrt(a!/b!) for a >= b
    return math.sqrt(math.prod(range(b + 1, a + 1)))


def explicit_case_matrices(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Hand-written M matrices for cases 1, 2a and 3 (reference forms).

    Raises
    ------
    InvalidParameterError
        For case 2b and case 4, which have no explicit listing.
    """
    n1, n2, m = params.n1, params.n2, params.m
    g1, g2, d = params.g1, params.g2, params.delta_half
    spec = enumerate_basis(n1, n2, m)
    if spec.case_id is Case.CASE1:
        a = _sqrt_ratio(n1 + m, n1) * g1
        b = _sqrt_ratio(n2 + m, n2) * g2
        Mx = np.array([[-d]])
        My = np.array([[d, a, b], [a, -d, 0.0], [b, 0.0, -d]])
        return Mx, My
    if spec.case_id is Case.CASE2A:
        g1n = _sqrt_ratio(n1 + m, n1) * g1
        g2m = _sqrt_ratio(m, 0) * g2
        g2p = _sqrt_ratio(2 * m, m) * g2
        g1p = _sqrt_ratio(n1 + 2 * m, n1 + m) * g1
        Mx = np.array([[-d, g2m, 0], [g2m, d, g1n], [0, g1n, -d]], dtype=float)
        My = np.array(
            [
                [d, g1n, g2p, 0, 0],
                [g1n, -d, 0, g2m, 0],
                [g2p, 0, -d, 0, 0],
                [0, g2m, 0, d, g1p],
                [0, 0, 0, g1p, -d],
            ],
            dtype=float,
        )
        return Mx, My
    if spec.case_id is Case.CASE3:
        g1m, g2m = _sqrt_ratio(m, 0) * g1, _sqrt_ratio(m, 0) * g2
        g1p, g2p = _sqrt_ratio(2 * m, m) * g1, _sqrt_ratio(2 * m, m) * g2
        g1pp, g2pp = _sqrt_ratio(3 * m, 2 * m) * g1, _sqrt_ratio(3 * m, 2 * m) * g2
        Mx = np.array(
            [
                [-d, g1m, g2m, 0, 0],
                [g1m, d, 0, g2p, 0],
                [g2m, 0, d, 0, g1p],
                [0, g2p, 0, -d, 0],
                [0, 0, g1p, 0, -d],
            ],
            dtype=float,
        )
        My = np.array(
            [
                [d, g1p, g2p, 0, 0, 0, 0],
                [g1p, -d, 0, g2m, 0, 0, 0],
                [g2p, 0, -d, 0, g1m, 0, 0],
                [0, g2m, 0, d, 0, g1pp, 0],
                [0, 0, g1m, 0, d, 0, g2pp],
                [0, 0, 0, g1pp, 0, -d, 0],
                [0, 0, 0, 0, g2pp, 0, -d],
            ],
            dtype=float,
        )
        return Mx, My
    raise InvalidParameterError(f"no explicit matrices for {spec.case_id.value}")
