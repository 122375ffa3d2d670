"""Time evolution of the ladder coefficients X(t), Y(t).

The numeric path diagonalizes the real symmetric generator once,
``M = S D S^T``, and evaluates ``S exp(-iDt) S^T v`` at any time.  The closed
forms for cases 1, 2 and 3 are kept as independent cross-checks and are
used by :func:`full_state` only when ``engine`` allows it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AnalyticDomainError, CaseMismatchError, NumericError
from .hamiltonian import CouplingMatrix, ModelParams, build_matrices
from .ladder import BasisState, Case, LadderSpec, enumerate_basis

__all__ = [
    "CoefficientVector",
    "Propagator",
    "ClosedFormTable",
    "Evolver",
    "evolve_numeric",
    "initial_vectors",
    "closed_form_table",
    "analytic_case1",
    "analytic_case2_x",
    "analytic_case2_y",
    "analytic_case3_x",
    "full_state",
]

SYMMETRY_TOL = 1e-12
DISCRIMINANT_TOL = 1e-12


@dataclass
class CoefficientVector:
    values: np.ndarray
    basis: tuple[BasisState, ...]
    time: float = 0.0
    engine: str = "numeric"

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (len(self.basis),):
            raise ValueError("values and basis have different lengths")

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2)))

    def amplitude(self, state: BasisState) -> complex:
        try:
            return complex(self.values[self.basis.index(state)])
        except ValueError:
            return 0j

    def as_dict(self) -> dict[BasisState, complex]:
        return dict(zip(self.basis, self.values))

    def reordered(self, basis) -> "CoefficientVector":
        lookup = self.as_dict()
        vals = [lookup.get(s, 0j) for s in basis]
        return CoefficientVector(np.array(vals), tuple(basis), self.time, self.engine)


class Propagator:
    """Cached spectral propagator for one coupling matrix."""

    def __init__(self, M: CouplingMatrix | np.ndarray):
        A = M.entries if isinstance(M, CouplingMatrix) else np.asarray(M, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise NumericError(f"generator must be square, got shape {A.shape}")
        asym = np.max(np.abs(A - A.T)) if A.size else 0.0
        if asym > SYMMETRY_TOL * max(1.0, np.max(np.abs(A), initial=0.0)):
            raise NumericError(f"generator is not symmetric (max asymmetry {asym:.3e})")
        try:
            self.eigvals, self.eigvecs = np.linalg.eigh(A)
        except np.linalg.LinAlgError as exc:
            cond = np.linalg.cond(A) if A.size else float("nan")
            raise NumericError(f"eigendecomposition failed ({exc}); condition number {cond:.3e}") from exc

    def matrix(self, t: float) -> np.ndarray:
        S = self.eigvecs
        return (S * np.exp(-1j * self.eigvals * t)) @ S.T

    def apply(self, v, t: float) -> np.ndarray:
        if t == 0:
            return np.array(v, dtype=complex)
        S = self.eigvecs
        return S @ (np.exp(-1j * self.eigvals * t) * (S.T @ np.asarray(v, dtype=complex)))


def evolve_numeric(M: CouplingMatrix, init: CoefficientVector, t: float) -> CoefficientVector:
    """Spectral evolution ``S exp(-iDt) S^T init`` of one branch."""
    if tuple(init.basis) != tuple(M.basis):
        raise ValueError("initial vector basis does not match the coupling matrix basis")
    vals = Propagator(M).apply(init.values, t)
    return CoefficientVector(vals, M.basis, float(t), "numeric")


def initial_vectors(params: ModelParams, spec: LadderSpec | None = None):
    """``X(0) = (cos φ, 0, ...)`` and ``Y(0) = (sin φ, 0, ...)``."""
    spec = spec or enumerate_basis(params.n1, params.n2, params.m)
    x0 = np.zeros(len(spec.x_basis), dtype=complex)
    y0 = np.zeros(len(spec.y_basis), dtype=complex)
    x0[0] = math.cos(params.phi)
    y0[0] = math.sin(params.phi)
    return CoefficientVector(x0, spec.x_basis), CoefficientVector(y0, spec.y_basis)


def _sr(a, b):
    return math.sqrt(math.prod(range(b + 1, a + 1)))


def _sin_over(w, t):
    # sin(w t)/w, continuous at w = 0
    return t * np.sinc(w * t / np.pi)


def _require_case(params, *cases):
    case = enumerate_basis(params.n1, params.n2, params.m).case_id
    if case not in cases:
        names = "/".join(c.value for c in cases)
        raise CaseMismatchError(f"scenario (n1={params.n1}, n2={params.n2}, m={params.m}) is {case.value}, not {names}")
    return case


def _require_resonant(params, what):
    if params.delta != 0:
        raise AnalyticDomainError(f"{what} closed form holds only at zero detuning (got Δ={params.delta}); use evolve_numeric")


# --------------------------------------------------------------------- case 1

def analytic_case1(params: ModelParams, t: float) -> CoefficientVector:
    """Closed-form ``(x1, y1, y2, y3)`` for case 1; valid for any detuning."""
    _require_case(params, Case.CASE1)
    n1, n2, m = params.n1, params.n2, params.m
    dp = params.delta_half
    a = _sr(n1 + m, n1) * params.g1
    b = _sr(n2 + m, n2) * params.g2
    gt = math.sqrt(a * a + b * b + dp * dp)
    c, s = math.cos(params.phi), math.sin(params.phi)
    so = _sin_over(gt, t)
    x1 = c * np.exp(1j * dp * t)
    y1 = s * (np.cos(gt * t) - 1j * dp * so)
    y2 = -1j * a * s * so
    y3 = -1j * b * s * so
    spec = enumerate_basis(n1, n2, m)
    return CoefficientVector(np.array([x1, y1, y2, y3]), spec.basis, float(t), "analytic")


# ---------------------------------------------------------------- case 2 (x)

def _case2a_x(params, t):
    n1, m = params.n1, params.m
    dp = params.delta_half
    a = _sr(n1 + m, n1) * params.g1  # g_{1,n1 m}
    b = _sr(m, 0) * params.g2  # g_{2m}
    c = math.cos(params.phi)
    ab = a * a + b * b
    gt = math.sqrt(ab + dp * dp)
    if ab == 0:
        return np.array([c * np.exp(1j * dp * t), 0j, 0j])
    osc = np.cos(gt * t) + 1j * dp * _sin_over(gt, t)
    f1 = b * b / ab * c
    f1f0 = a * a / ab * c  # f1 * f0 without dividing by g_{2m}^2
    f3 = a * b / ab * c
    x1 = f1 * osc + f1f0 * np.exp(1j * dp * t)
    x2 = -1j * b * c * _sin_over(gt, t)  # f2 sin(g t) with f2 = g_{2m} cos φ / g̃2
    x3 = f3 * (osc - np.exp(1j * dp * t))
    return np.array([x1, x2, x3])


def _swap_state(s: BasisState) -> BasisState:
    return BasisState(s.qubit, s.n2, s.n1)


def _in_case2_frame(params, t, branch, fn):
    case = _require_case(params, Case.CASE2A, Case.CASE2B)
    spec = enumerate_basis(params.n1, params.n2, params.m)
    target = spec.x_basis if branch == "x" else spec.y_basis
    if case is Case.CASE2A:
        return CoefficientVector(fn(params, t), target, float(t), "analytic")
    sw = params.swapped()
    sspec = enumerate_basis(sw.n1, sw.n2, sw.m)
    src = sspec.x_basis if branch == "x" else sspec.y_basis
    vals = fn(sw, t)
    vec = CoefficientVector(vals, tuple(_swap_state(s) for s in src), float(t), "analytic")
    return vec.reordered(target)


def analytic_case2_x(params: ModelParams, t: float) -> CoefficientVector:
    """Closed-form ``(x1, x2, x3)`` for case 2; valid for any detuning.

    Case 2b (``n2 < n1 = m``) is evaluated by exchanging the oscillators.
    """
    return _in_case2_frame(params, t, "x", _case2a_x)


# ---------------------------------------------------- two-frequency closed forms

@dataclass
class ClosedFormTable:
    """Parameters of the two-frequency closed forms (Δ = 0).

    ``gs`` / ``gps2`` map the branch sign ``+1``/``-1`` to ``g̃_{s±}`` and
    ``g̃'^2_{s±}``; ``f`` maps ``(i, ±1)`` to ``f_{i±}``.
    """

    column: str
    g: tuple[float, float, float, float]
    G2: float
    Gp2: float
    GG4: float
    s: float
    gs: dict = field(default_factory=dict)
    gps2: dict = field(default_factory=dict)
    f0: float | None = None
    f: dict = field(default_factory=dict)

    def tau(self, sign, t):
        return self.gs[sign] * t


def closed_form_table(params: ModelParams, column: str) -> ClosedFormTable:
    """Table of closed-form parameters for ``column`` in ``{"case2_y", "case3_x"}``.

    Raises
    ------
    AnalyticDomainError
        If ``G^4 < 4 𝒢^4`` beyond round-off (``s`` would be complex) or the
        two frequencies coincide.
    """
    n1, m = params.n1, params.m
    g1, g2 = params.g1, params.g2
    if column == "case2_y":
        # 𝗀1: y1-y2, 𝗀2: y1-y3, 𝗀3: y2-y4, 𝗀4: y4-y5
        G1 = _sr(n1 + m, n1) * g1
        G2 = _sr(2 * m, m) * g2
        G3 = _sr(m, 0) * g2
        G4 = _sr(n1 + 2 * m, n1 + m) * g1
        Gp2 = G1**2 + G2**2 - G3**2 - G4**2
        GG4 = G1**2 * G4**2 + G2**2 * G3**2 + G2**2 * G4**2
    elif column == "case3_x":
        # 𝗀1: x1-x2, 𝗀2: x1-x3, 𝗀3: x3-x5, 𝗀4: x2-x4
        G1 = _sr(m, 0) * g1
        G2 = _sr(m, 0) * g2
        G3 = _sr(2 * m, m) * g1
        G4 = _sr(2 * m, m) * g2
        Gp2 = G1**2 - G2**2 - G3**2 + G4**2
        GG4 = G1**2 * G3**2 + G2**2 * G4**2 + G3**2 * G4**2
    else:
        raise ValueError(f"unknown closed-form column {column!r}")
    G2sum = G1**2 + G2**2 + G3**2 + G4**2
    disc = G2sum**2 - 4 * GG4
    scale = max(G2sum**2, 1e-300)
    if disc < -DISCRIMINANT_TOL * scale:
        raise AnalyticDomainError(f"G^4 - 4𝒢^4 = {disc:.3e} < 0; closed form needs a real s")
    s = math.sqrt(max(disc, 0.0))
    if s <= DISCRIMINANT_TOL * math.sqrt(scale):
        raise AnalyticDomainError("degenerate frequencies (s = 0); closed form is singular")
    tab = ClosedFormTable(column, (G1, G2, G3, G4), G2sum, Gp2, GG4, s)
    for k in (1, -1):
        tab.gs[k] = math.sqrt(max(0.5 * (G2sum + k * s), 0.0))
        tab.gps2[k] = 0.5 * (Gp2 + k * s)
    gs, gp = tab.gs, tab.gps2
    if column == "case2_y":
        if GG4 == 0:
            raise AnalyticDomainError("𝒢^4 = 0; closed form is singular")
        for k in (1, -1):
            tab.f[2, k] = G1 * gs[k] * (G2**2 * G3**2 + G4**2 * gp[k]) / GG4
            tab.f[3, k] = G2 * gs[k] * (G1**2 * G3**2 - (G3**2 + G4**2) * gp[k]) / GG4
    else:
        tab.f0 = s * gs[1] ** 2 * gs[-1] ** 2
        if tab.f0 == 0:
            raise AnalyticDomainError("f0 = 0; closed form is singular")
        for k in (1, -1):
            tab.f[1, k] = G1**2 * G3**4 + G2**2 * G4**4 - (G1**2 * G3**2 + G2**2 * G4**2) * gs[k] ** 2
            tab.f[2, k] = G1 * (G2**2 * G4**2 + G3**2 * gp[k]) * gs[k]
            tab.f[3, k] = G2 * (G1**2 * G3**2 - G4**2 * gp[-k]) * gs[k]
            tab.f[4, k] = G1 * G4 * (G2**2 * G4**2 + G3**2 * gp[k])
            tab.f[5, k] = G2 * G3 * (G1**2 * G3**2 - G4**2 * gp[-k])
    return tab


def _case2a_y(params, t):
    tab = closed_form_table(params, "case2_y")
    G1, G2, G3, G4 = tab.g
    s, gs, gp, f = tab.s, tab.gs, tab.gps2, tab.f
    sp_ = math.sin(params.phi) / s
    cp, cm = np.cos(gs[1] * t), np.cos(gs[-1] * t)
    sp, sm = np.sin(gs[1] * t), np.sin(gs[-1] * t)
    y1 = sp_ * (gp[1] * cp - gp[-1] * cm)
    y2 = -1j * sp_ * (f[2, 1] * sp - f[2, -1] * sm)
    y3 = 1j * sp_ * (f[3, 1] * sp - f[3, -1] * sm)
    y4 = sp_ * G1 * G3 * (cp - cm)
    y5 = -1j * sp_ * G1 * G3 * G4 * (_sin_over(gs[1], t) - _sin_over(gs[-1], t))
    return np.array([y1, y2, y3, y4, y5])


def analytic_case2_y(params: ModelParams, t: float) -> CoefficientVector:
    """Closed-form ``(y1, ..., y5)`` for case 2 at zero detuning."""
    _require_case(params, Case.CASE2A, Case.CASE2B)
    _require_resonant(params, "case-2 y")
    return _in_case2_frame(params, t, "y", _case2a_y)


def analytic_case3_x(params: ModelParams, t: float) -> CoefficientVector:
    """Closed-form ``(x1, ..., x5)`` for case 3 at zero detuning.

    Ordering is ``|g,m,m>, |e,0,m>, |e,m,0>, |g,0,2m>, |g,2m,0>``.
    """
    _require_case(params, Case.CASE3)
    _require_resonant(params, "case-3 x")
    tab = closed_form_table(params, "case3_x")
    G1, G2, G3, G4 = tab.g
    s, f, f0 = tab.s, tab.f, tab.f0
    pre = math.cos(params.phi) / f0
    cp, cm = np.cos(tab.gs[1] * t), np.cos(tab.gs[-1] * t)
    sp, sm = np.sin(tab.gs[1] * t), np.sin(tab.gs[-1] * t)
    x1 = pre * (f[1, -1] * cm - f[1, 1] * cp + s * G3**2 * G4**2)
    x2 = -1j * pre * (f[2, 1] * sp - f[2, -1] * sm)
    x3 = -1j * pre * (f[3, 1] * sp - f[3, -1] * sm)
    x4 = pre * (f[4, 1] * cp - f[4, -1] * cm - s * G1 * G3**2 * G4)
    x5 = pre * (f[5, 1] * cp - f[5, -1] * cm - s * G2 * G3 * G4**2)
    spec = enumerate_basis(params.n1, params.n2, params.m)
    return CoefficientVector(np.array([x1, x2, x3, x4, x5]), spec.x_basis, float(t), "analytic")


# ------------------------------------------------------------------ full state

def _analytic_x(params, case):
    if case is Case.CASE1:
        return lambda t: analytic_case1(params, t).values[:1]
    if case in (Case.CASE2A, Case.CASE2B):
        return lambda t: analytic_case2_x(params, t).values
    if case is Case.CASE3 and params.delta == 0:
        return lambda t: analytic_case3_x(params, t).values
    return None


def _analytic_y(params, case):
    if case is Case.CASE1:
        return lambda t: analytic_case1(params, t).values[1:]
    if case in (Case.CASE2A, Case.CASE2B) and params.delta == 0:
        return lambda t: analytic_case2_y(params, t).values
    return None


class Evolver:
    """Full-state evolution for one scenario, reusing one eigendecomposition per branch.

    Parameters
    ----------
    params : ModelParams
    engine : {"auto", "numeric", "analytic"}
        ``"auto"`` uses a closed form for a branch whenever one is valid and
        the spectral path otherwise; ``"analytic"`` raises if a branch has no
        closed form.
    """

    def __init__(self, params: ModelParams, engine: str = "auto"):
        if engine not in ("auto", "numeric", "analytic"):
            raise ValueError(f"unknown engine {engine!r}")
        self.params = params
        self.spec = enumerate_basis(params.n1, params.n2, params.m)
        self.Mx, self.My = build_matrices(params, self.spec)
        self.x0, self.y0 = initial_vectors(params, self.spec)
        case = self.spec.case_id
        ax = ay = None
        if engine != "numeric":
            ax, ay = _analytic_x(params, case), _analytic_y(params, case)
            if engine == "analytic" and (ax is None or ay is None):
                raise AnalyticDomainError(f"no closed form for both branches of {case.value} at Δ={params.delta}")
        self._ax, self._ay = ax, ay
        self._px = None if ax else Propagator(self.Mx)
        self._py = None if ay else Propagator(self.My)
        used = {"analytic" if ax else "numeric", "analytic" if ay else "numeric"}
        self.engine = used.pop() if len(used) == 1 else "analytic+numeric"
        self.branch_engines = {"x": "analytic" if ax else "numeric", "y": "analytic" if ay else "numeric"}

    @property
    def basis(self):
        return self.spec.basis

    def branches(self, t: float):
        X = self._ax(t) if self._ax else self._px.apply(self.x0.values, t)
        Y = self._ay(t) if self._ay else self._py.apply(self.y0.values, t)
        return np.asarray(X, dtype=complex), np.asarray(Y, dtype=complex)

    def state(self, t: float) -> CoefficientVector:
        X, Y = self.branches(t)
        return CoefficientVector(np.concatenate([X, Y]), self.spec.basis, float(t), self.engine)


def full_state(params: ModelParams, t: float, engine: str = "auto") -> CoefficientVector:
    """``(X(t), Y(t))`` concatenated over the ladder basis."""
    return Evolver(params, engine).state(t)
