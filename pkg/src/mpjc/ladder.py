"""Basis sets generated by the MPJC Hamiltonian from the two seed states.

The ground-qubit seed ``|g, n1, n2>`` generates the X branch and the
excited-qubit seed ``|e, n1, n2>`` the Y branch.  Both branches are ordered by
the four-block index pattern ``4k+1 .. 4k+4``; states with a negative Fock label
are dropped and the remaining ones are numbered densely.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple

from .errors import InvalidParameterError

__all__ = [
    "BasisState",
    "Case",
    "LadderSpec",
    "ell",
    "classify_case",
    "enumerate_basis",
    "four_block_states",
    "neighbours",
]


class BasisState(NamedTuple):
    """Product state ``|qubit, n1, n2>`` with ``qubit`` in ``{"g", "e"}``."""

    qubit: str
    n1: int
    n2: int

    def __str__(self):
        return f"|{self.qubit},{self.n1},{self.n2}>"

    @property
    def excitations(self) -> int:
        """Total photon number (the qubit is not counted)."""
        return self.n1 + self.n2


class Case(str, enum.Enum):
    CASE1 = "Case1"
    CASE2A = "Case2a"
    CASE2B = "Case2b"
    CASE3 = "Case3"
    CASE4 = "Case4"


@dataclass(frozen=True)
class LadderSpec:
    n1: int
    n2: int
    m: int
    ell1: int
    ell2: int
    x_basis: tuple[BasisState, ...]
    y_basis: tuple[BasisState, ...]
    case_id: Case

    @property
    def basis(self) -> tuple[BasisState, ...]:
        return self.x_basis + self.y_basis

    def __len__(self):
        return len(self.x_basis) + len(self.y_basis)


def _check_m(m):
    if int(m) != m or m < 1:
        raise InvalidParameterError(f"multiphoton order m must be a positive integer, got {m!r}")


def _check_n(n, name):
    if int(n) != n or n < 0:
        raise InvalidParameterError(f"{name} must be a nonnegative integer, got {n!r}")


def ell(n: int, m: int) -> int:
    """Smallest positive ``l`` with ``n - l*m < 0``."""
    _check_m(m)
    _check_n(n, "n")
    return n // m + 1


def classify_case(n1: int, n2: int, m: int) -> Case:
    """Classify ``(n1, n2, m)`` into the four cases.

    Combinations not covered by cases 1-3 (both above ``m``, or mixed such as
    ``n1 < m < n2``) are all handled by the general builder and reported as
    :attr:`Case.CASE4`.
    """
    _check_m(m)
    _check_n(n1, "n1")
    _check_n(n2, "n2")
    if n1 < m and n2 < m:
        return Case.CASE1
    if n1 < m and n2 == m:
        return Case.CASE2A
    if n2 < m and n1 == m:
        return Case.CASE2B
    if n1 == m and n2 == m:
        return Case.CASE3
    return Case.CASE4


def four_block_states(n1: int, n2: int, m: int, branch: str) -> dict[int, BasisState]:
    """Sparse four-block index -> state map for one branch (1-based indices).

    Indices whose state would carry a negative Fock label are absent, so the
    returned keys can have gaps.  This is the indexing used by the case-4
    reduced-state formulas (``x_{4k+1}``, ``y_{4k-2}``, ...).
    """
    _check_m(m)
    kmax = max(n1, n2) // m + 2
    out = {}
    for k in range(kmax + 1):
        if branch == "x":
            cand = {
                4 * k + 1: BasisState("g", n1 + k * m, n2 - k * m),
                4 * k + 3: BasisState("e", n1 + k * m, n2 - (k + 1) * m),
                4 * k + 2: BasisState("e", n1 - (k + 1) * m, n2 + k * m),
                4 * k + 4: BasisState("g", n1 - (k + 1) * m, n2 + (k + 1) * m),
            }
        elif branch == "y":
            cand = {
                4 * k + 1: BasisState("e", n1 - k * m, n2 + k * m),
                4 * k + 3: BasisState("g", n1 - k * m, n2 + (k + 1) * m),
                4 * k + 2: BasisState("g", n1 + (k + 1) * m, n2 - k * m),
                4 * k + 4: BasisState("e", n1 + (k + 1) * m, n2 - (k + 1) * m),
            }
        else:
            raise InvalidParameterError(f"branch must be 'x' or 'y', got {branch!r}")
        for idx, st in cand.items():
            if st.n1 >= 0 and st.n2 >= 0:
                out[idx] = st
    return dict(sorted(out.items()))


def enumerate_basis(n1: int, n2: int, m: int) -> LadderSpec:
    """Enumerate both branches of the JC ladder for initial Fock labels ``(n1, n2)``."""
    case = classify_case(n1, n2, m)
    xs = tuple(four_block_states(n1, n2, m, "x").values())
    ys = tuple(four_block_states(n1, n2, m, "y").values())
    return LadderSpec(n1, n2, m, ell(n1, m), ell(n2, m), xs, ys, case)


def neighbours(state: BasisState, m: int) -> list[BasisState]:
    """States coupled to ``state`` by one application of the interaction term."""
    q, a, b = state
    if q == "g":
        cand = [BasisState("e", a - m, b), BasisState("e", a, b - m)]
    else:
        cand = [BasisState("g", a + m, b), BasisState("g", a, b + m)]
    return [s for s in cand if s.n1 >= 0 and s.n2 >= 0]
