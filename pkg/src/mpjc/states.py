"""Reduced oscillator states on the effective Fock basis.

A reduced state is stored on the sorted list of Fock labels that occur in the
ladder basis of the scenario.  :func:`reduce_oscillator` is the generic
partial trace; :func:`closed_form_reduced` rebuilds the same matrix from the
explicit per-case expressions in terms of the x and y coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import CoefficientVector
from .errors import CaseMismatchError, HermiticityError
from .ladder import BasisState, Case, classify_case, four_block_states

__all__ = [
    "DensityMatrix",
    "reduce_oscillator",
    "purity",
    "scenario_of",
    "closed_form_reduced",
]


@dataclass
class DensityMatrix:
    """Density matrix over an explicit list of Fock labels."""

    labels: tuple[int, ...]
    entries: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.labels = tuple(int(v) for v in self.labels)
        self.entries = np.asarray(self.entries, dtype=complex)
        n = len(self.labels)
        if self.entries.shape != (n, n):
            raise ValueError(f"entries shape {self.entries.shape} does not match {n} labels")
        if len(set(self.labels)) != n:
            raise ValueError("labels must be distinct")

    @property
    def dim(self) -> int:
        return len(self.labels)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def element(self, a: int, b: int) -> complex:
        """``<a|rho|b>``; zero for labels outside the effective basis."""
        try:
            i, j = self.labels.index(a), self.labels.index(b)
        except ValueError:
            return 0j
        return complex(self.entries[i, j])

    def validate(self, herm_tol=1e-12, trace_tol=1e-10, eig_tol=1e-10):
        """Raise if the matrix is not a valid state within the given tolerances."""
        dev = np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0)
        if dev > herm_tol:
            raise HermiticityError(f"density matrix not Hermitian (deviation {dev:.3e})")
        tr = self.trace()
        if abs(tr - 1) > trace_tol:
            raise ValueError(f"trace {tr.real:.12f} differs from 1")
        w = np.linalg.eigvalsh(0.5 * (self.entries + self.entries.conj().T))
        if w.size and w[0] < -eig_tol:
            raise ValueError(f"negative eigenvalue {w[0]:.3e}")
        return self

    def lift(self, cutoff: int) -> np.ndarray:
        """Embed into the dense ``(cutoff+1) x (cutoff+1)`` Fock matrix."""
        if self.labels and max(self.labels) > cutoff:
            raise ValueError(f"label {max(self.labels)} exceeds cutoff {cutoff}")
        out = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
        idx = np.array(self.labels, dtype=int)
        out[np.ix_(idx, idx)] = self.entries
        return out

    @classmethod
    def from_full(cls, mat: np.ndarray, time: float = 0.0, atol: float = 0.0) -> "DensityMatrix":
        """Restrict a dense Fock matrix to the labels carrying weight above ``atol``."""
        mat = np.asarray(mat, dtype=complex)
        keep = [i for i in range(mat.shape[0]) if np.any(np.abs(mat[i]) > atol) or np.any(np.abs(mat[:, i]) > atol)]
        return cls(tuple(keep), mat[np.ix_(keep, keep)], time)

    @classmethod
    def fock(cls, n: int) -> "DensityMatrix":
        return cls((n,), np.ones((1, 1)), 0.0)

    def rotated(self, theta: float) -> "DensityMatrix":
        """Phase-space rotation ``exp(-i theta a^dag a) rho exp(i theta a^dag a)``."""
        lab = np.array(self.labels)
        ph = np.exp(-1j * theta * (lab[:, None] - lab[None, :]))
        return DensityMatrix(self.labels, self.entries * ph, self.time)


def reduce_oscillator(state: CoefficientVector, which: int) -> DensityMatrix:
    """Partial trace over the qubit and the other oscillator.

    Parameters
    ----------
    state : CoefficientVector
        Full ladder state (both branches).
    which : {1, 2}
        Oscillator to keep.
    """
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    keep = 1 if which == 1 else 2
    labels = sorted({s[keep] for s in state.basis})
    pos = {v: i for i, v in enumerate(labels)}
    rho = np.zeros((len(labels), len(labels)), dtype=complex)
    # group amplitudes by the traced-out part (qubit, other oscillator)
    groups: dict[tuple, list[tuple[int, complex]]] = {}
    other = 2 if which == 1 else 1
    for s, c in zip(state.basis, state.values):
        groups.setdefault((s.qubit, s[other]), []).append((pos[s[keep]], c))
    for members in groups.values():
        idx = np.array([i for i, _ in members])
        amp = np.array([c for _, c in members])
        rho[np.ix_(idx, idx)] += np.outer(amp, amp.conj())
    return DensityMatrix(tuple(labels), rho, state.time)


def purity(rho: DensityMatrix) -> float:
    """``Tr(rho^2)``."""
    return float(np.real(np.vdot(rho.entries.conj().T, rho.entries)))


def scenario_of(state: CoefficientVector) -> tuple[int, int, int]:
    """Recover ``(n1, n2, m)`` from a ladder-ordered full state."""
    seed = state.basis[0]
    if seed.qubit != "g":
        raise ValueError("state does not start with the ground-qubit seed")
    steps = {abs(s.n1 - seed.n1) for s in state.basis} | {abs(s.n2 - seed.n2) for s in state.basis}
    steps.discard(0)
    if not steps:
        raise ValueError("cannot infer m from a single-label basis")
    return seed.n1, seed.n2, min(steps)


# ------------------------------------------------------------ explicit forms

def _coeffs(state):
    """1-based dense x/y coefficient lookups."""
    n1, n2, m = scenario_of(state)
    nx = sum(1 for s in state.basis if (s.n1 + s.n2 + (m if s.qubit == "e" else 0)) == n1 + n2)
    X = np.concatenate([[0], state.values[:nx]])
    Y = np.concatenate([[0], state.values[nx:]])
    return X, Y


def _rho(labels, entries, t):
    return DensityMatrix(tuple(labels), np.array(entries, dtype=complex), t)


def _case1(X, Y, n1, n2, m, which, t):
    x1 = X[1]
    y = Y[2] if which == 1 else Y[3]
    n = n1 if which == 1 else n2
    c = x1 * np.conj(y)
    return _rho([n, n + m], [[1 - abs(y) ** 2, c], [np.conj(c), abs(y) ** 2]], t)


def _case2a(X, Y, n1, m, which, t):
    x, y, cj = X, Y, np.conj
    if which == 1:
        a = x[1] * cj(y[2]) + x[2] * cj(y[4])
        b = x[3] * cj(y[5])
        d = [abs(x[1]) ** 2 + abs(x[2]) ** 2 + abs(y[1]) ** 2 + abs(y[3]) ** 2,
             abs(x[3]) ** 2 + abs(y[2]) ** 2 + abs(y[4]) ** 2,
             abs(y[5]) ** 2]
        labels = [n1, n1 + m, n1 + 2 * m]
    else:
        a = x[2] * cj(y[1]) + x[3] * cj(y[2])
        b = x[1] * cj(y[3])
        d = [abs(x[2]) ** 2 + abs(x[3]) ** 2 + abs(y[4]) ** 2 + abs(y[5]) ** 2,
             abs(x[1]) ** 2 + abs(y[1]) ** 2 + abs(y[2]) ** 2,
             abs(y[3]) ** 2]
        labels = [0, m, 2 * m]
    return _rho(labels, [[d[0], a, 0], [cj(a), d[1], b], [0, cj(b), d[2]]], t)


def _case3(X, Y, m, which, t):
    # the explicit matrices index x4 = |g,2m,0>, x5 = |g,0,2m>
    x = X.copy()
    x[4], x[5] = X[5], X[4]
    y, cj = Y, np.conj
    if which == 1:
        d = [abs(x[2]) ** 2 + abs(x[5]) ** 2 + abs(y[5]) ** 2 + abs(y[7]) ** 2,
             abs(x[1]) ** 2 + abs(x[3]) ** 2 + abs(y[1]) ** 2 + abs(y[3]) ** 2,
             abs(x[4]) ** 2 + abs(y[2]) ** 2 + abs(y[4]) ** 2,
             abs(y[6]) ** 2]
        o = [x[2] * cj(y[1]) + x[5] * cj(y[3]), x[1] * cj(y[2]) + x[3] * cj(y[4]), x[4] * cj(y[6])]
    else:
        d = [abs(x[3]) ** 2 + abs(x[4]) ** 2 + abs(y[4]) ** 2 + abs(y[6]) ** 2,
             abs(x[1]) ** 2 + abs(x[2]) ** 2 + abs(y[1]) ** 2 + abs(y[2]) ** 2,
             abs(x[5]) ** 2 + abs(y[3]) ** 2 + abs(y[5]) ** 2,
             abs(y[7]) ** 2]
        o = [x[3] * cj(y[1]) + x[4] * cj(y[2]), x[1] * cj(y[3]) + x[2] * cj(y[5]), x[5] * cj(y[7])]
    M = np.diag(np.array(d, dtype=complex))
    for i, v in enumerate(o):
        M[i, i + 1] = v
        M[i + 1, i] = np.conj(v)
    return _rho([0, m, 2 * m, 3 * m], M, t)


def _case4(state, n1, n2, m, which, t):
    amp = state.as_dict()
    xs = four_block_states(n1, n2, m, "x")
    ys = four_block_states(n1, n2, m, "y")

    def x(i):
        return amp.get(xs[i], 0j) if i in xs else 0j

    def y(i):
        return amp.get(ys[i], 0j) if i in ys else 0j

    cj = np.conj
    diag: dict[int, float] = {}
    coh: dict[tuple[int, int], complex] = {}

    def add_d(label, v):
        if label >= 0:
            diag[label] = diag.get(label, 0.0) + v

    def add_c(a, b, v):
        if a >= 0 and b >= 0 and v != 0:
            coh[a, b] = coh.get((a, b), 0j) + v

    kmax = (max(n1, n2) // m) + 2
    for k in range(kmax + 1):
        if which == 1:
            add_d(n1 + k * m, abs(x(4 * k + 1)) ** 2 + abs(x(4 * k + 3)) ** 2 + abs(y(4 * k - 2)) ** 2 + abs(y(4 * k)) ** 2)
            add_d(n1 - k * m, abs(x(4 * k - 2)) ** 2 + abs(x(4 * k)) ** 2 + abs(y(4 * k + 1)) ** 2 + abs(y(4 * k + 3)) ** 2)
            add_c(n1 + k * m, n1 + (k + 1) * m, x(4 * k + 1) * cj(y(4 * k + 2)) + x(4 * k + 3) * cj(y(4 * k + 4)))
            add_c(n1 - (k + 1) * m, n1 - k * m, x(4 * k + 4) * cj(y(4 * k + 3)) + x(4 * k + 2) * cj(y(4 * k + 1)))
        else:
            add_d(n2 - k * m, abs(x(4 * k + 1)) ** 2 + abs(y(4 * k + 2)) ** 2 + abs(x(4 * k - 1)) ** 2 + abs(y(4 * k)) ** 2)
            add_d(n2 + k * m, abs(x(4 * k)) ** 2 + abs(y(4 * k - 1)) ** 2 + abs(x(4 * k + 2)) ** 2 + abs(y(4 * k + 1)) ** 2)
            add_c(n2 - (k + 1) * m, n2 - k * m, x(4 * k + 5) * cj(y(4 * k + 2)) + x(4 * k + 3) * cj(y(4 * k)))
            add_c(n2 + k * m, n2 + (k + 1) * m, x(4 * k) * cj(y(4 * k + 3)) + x(4 * k + 2) * cj(y(4 * k + 5)))
    if which == 2:
        # k = 0 terms that the sums above miss
        add_c(n2, n2 + m, x(1) * cj(y(3)))
        add_c(n2 - m, n2, x(3) * cj(y(1)))
    labels = sorted({s[which] for s in state.basis})
    pos = {v: i for i, v in enumerate(labels)}
    M = np.zeros((len(labels), len(labels)), dtype=complex)
    for a, v in diag.items():
        if a in pos:
            M[pos[a], pos[a]] += v
    for (a, b), v in coh.items():
        M[pos[a], pos[b]] += v
        M[pos[b], pos[a]] += np.conj(v)
    return DensityMatrix(tuple(labels), M, t)


def _swap_to_case2a(state, n1, n2, m):
    """Re-express a case-2b state in the case-2a ordering of the swapped scenario."""
    from .ladder import enumerate_basis

    spec = enumerate_basis(n2, n1, m)
    amp = {BasisState(s.qubit, s.n2, s.n1): c for s, c in zip(state.basis, state.values)}
    vals = np.array([amp.get(s, 0j) for s in spec.basis])
    return CoefficientVector(vals, spec.basis, state.time, state.engine)


def closed_form_reduced(state: CoefficientVector, which: int, case_id: Case | None = None) -> DensityMatrix:
    """Reduced state from the explicit per-case expressions in x and y.

    Case 2b is evaluated by exchanging the oscillators and using the case-2a
    expressions for the other oscillator.  Case 4 uses the four-block sparse
    indices, which cover every scenario.
    """
    if which not in (1, 2):
        raise ValueError("which must be 1 or 2")
    n1, n2, m = scenario_of(state)
    actual = classify_case(n1, n2, m)
    if case_id is not None and Case(case_id) is not actual:
        raise CaseMismatchError(f"state is {actual.value}, not {Case(case_id).value}")
    t = state.time
    if actual is Case.CASE1:
        X, Y = _coeffs(state)
        return _case1(X, Y, n1, n2, m, which, t)
    if actual is Case.CASE2A:
        X, Y = _coeffs(state)
        return _case2a(X, Y, n1, m, which, t)
    if actual is Case.CASE2B:
        sw = _swap_to_case2a(state, n1, n2, m)
        X, Y = _coeffs(sw)
        return _case2a(X, Y, n2, m, 3 - which, t)
    if actual is Case.CASE3:
        X, Y = _coeffs(state)
        return _case3(X, Y, m, which, t)
    return _case4(state, n1, n2, m, which, t)
