"""Wigner functions of reduced oscillator states and their negativity volume.

Conventions: ``W(α) = Tr[ρ T(α)] / π`` with ``α = (x + ip)/√2``; ``W`` is
normalized over ``d²α``.  Writing ``α = r e^{iθ}`` and ``z = 4r²``,

``W(r, θ) = (2/π) e^{-2r²} [A_0(r) + 2 Re Σ_{d>0} C_d(r) e^{idθ}]``

with ``A_0 = Σ_a ρ_aa (-1)^a L_a(z)`` and
``C_d = Σ_a ρ_{a,a+d} (-1)^a √(a!/(a+d)!) (2r)^d L_a^d(z)``.  For each radius
the bracket is a trigonometric polynomial in θ, so the angular integral of its
negative part is evaluated exactly from its roots on the unit circle.  The
radial integral uses adaptive Gauss-Legendre panels and a certified Gaussian
tail bound.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from functools import reduce

import numpy as np
from scipy import integrate

from .dynamics import CoefficientVector, Evolver
from .errors import CaseMismatchError, HermiticityError, QuadratureError
from .hamiltonian import ModelParams
from .ladder import Case, classify_case
from .states import DensityMatrix, closed_form_reduced, reduce_oscillator, scenario_of

__all__ = [
    "WignerSample",
    "NegativityTrace",
    "laguerre_assoc",
    "t_matrix_element",
    "wigner_at",
    "wigner_sample",
    "negativity_volume",
    "wigner_integral",
    "wigner_closed_form",
    "negativity_trace",
]

DEFAULT_TOL = 1e-6
PRUNE = 1e-14
GL_ORDER = 20
IMAG_TOL = 1e-10
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)


@dataclass(frozen=True)
class WignerSample:
    alpha: complex
    value: float


@dataclass
class NegativityTrace:
    times: list = field(default_factory=list)
    volumes: list = field(default_factory=list)
    abs_err: list = field(default_factory=list)

    def as_arrays(self):
        return np.asarray(self.times), np.asarray(self.volumes), np.asarray(self.abs_err)


# ---------------------------------------------------------------- primitives

def laguerre_assoc(n: int, k: int, x):
    """Associated Laguerre polynomial ``L_n^k(x)`` by upward recurrence.

    ``(j+1) L_{j+1} = (2j + 1 + k - x) L_j - (j + k) L_{j-1}``
    """
    if n < 0 or k < 0:
        raise ValueError("n and k must be nonnegative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + k - x
    for j in range(1, n):
        prev, cur = cur, ((2 * j + 1 + k - x) * cur - (j + k) * prev) / (j + 1)
    return cur if cur.ndim else float(cur)


def _log_sqrt_ratio(a, b):
    # log sqrt(a!/b!)
    return 0.5 * (math.lgamma(a + 1) - math.lgamma(b + 1))


def t_matrix_element(k1: int, k2: int, alpha):
    """``<k1|T(α)|k2>`` for the displaced-parity kernel, with ``T = 2 D(α) Π D(α)†``."""
    if k1 < 0 or k2 < 0:
        raise ValueError("Fock labels must be nonnegative")
    alpha = np.asarray(alpha, dtype=complex)
    r2 = np.abs(alpha) ** 2
    if k2 >= k1:
        lo, d, w = k1, k2 - k1, np.conj(alpha)
    else:
        lo, d, w = k2, k1 - k2, alpha
    pref = 2.0 * (-1) ** lo * math.exp(_log_sqrt_ratio(lo, lo + d))
    out = pref * np.exp(-2 * r2) * (2 * w) ** d * laguerre_assoc(lo, d, 4 * r2)
    return out if out.ndim else complex(out)


def wigner_at(rho: DensityMatrix, alpha):
    """``W(α) = Tr[ρ T(α)]/π`` (scalar or array ``alpha``)."""
    alpha = np.asarray(alpha, dtype=complex)
    acc = np.zeros(alpha.shape, dtype=complex)
    labels = rho.labels
    E = rho.entries
    for i, a in enumerate(labels):
        for j, b in enumerate(labels):
            v = E[i, j]
            if abs(v) < PRUNE:
                continue
            acc = acc + v * t_matrix_element(b, a, alpha)
    acc = acc / math.pi
    resid = np.max(np.abs(acc.imag), initial=0.0)
    if resid > IMAG_TOL:
        raise HermiticityError(f"Wigner function has imaginary residue {resid:.3e}; ρ is not Hermitian")
    out = acc.real
    return out if out.ndim else float(out)


def wigner_sample(rho: DensityMatrix, alpha: complex) -> WignerSample:
    return WignerSample(complex(alpha), float(wigner_at(rho, alpha)))


# ------------------------------------------------------- harmonic expansion

class _Harmonics:
    """Angular Fourier structure of ``W`` for one density matrix."""

    def __init__(self, rho: DensityMatrix):
        lab = rho.labels
        E = rho.entries
        herm = np.max(np.abs(E - E.conj().T), initial=0.0)
        if herm > 1e-10:
            raise HermiticityError(f"density matrix not Hermitian (deviation {herm:.3e})")
        self.diag = [(a, float(E[i, i].real)) for i, a in enumerate(lab) if abs(E[i, i]) >= PRUNE]
        terms: dict[int, list] = {}
        for i, a in enumerate(lab):
            for j, b in enumerate(lab):
                if b > a and abs(E[i, j]) >= PRUNE:
                    d = b - a
                    c = E[i, j] * (-1) ** a * math.exp(_log_sqrt_ratio(a, b))
                    terms.setdefault(d, []).append((a, c))
        self.terms = terms
        ds = sorted(terms)
        self.q = reduce(math.gcd, ds) if ds else 1
        self.ds = ds
        self.max_label = max(lab) if lab else 0

    def components(self, r):
        """``A_0(r)`` (real) and ``{d: C_d(r)}`` for an array of radii."""
        r = np.asarray(r, dtype=float)
        z = 4 * r * r
        A0 = np.zeros_like(r)
        for a, p in self.diag:
            A0 += p * (-1) ** a * laguerre_assoc(a, 0, z)
        C = {}
        for d, lst in self.terms.items():
            acc = np.zeros(r.shape, dtype=complex)
            for a, c in lst:
                acc += c * laguerre_assoc(a, d, z)
            C[d] = acc * (2 * r) ** d
        return A0, C

    def bracket(self, r, theta):
        A0, C = self.components(r)
        out = np.array(A0, dtype=float)
        for d, c in C.items():
            out = out + 2 * np.real(c * np.exp(1j * d * theta))
        return out

    def abs_bound(self, r):
        """Upper bound on ``|A_0| + 2 Σ|C_d|`` using ``|L_n^k(x)| ≤ Σ_i C(n+k, n-i) x^i / i!``."""
        r = np.asarray(r, dtype=float)
        z = 4 * r * r

        def lbound(n, k):
            return sum(math.comb(n + k, n - i) * z**i / math.factorial(i) for i in range(n + 1))

        out = np.zeros_like(r)
        for a, p in self.diag:
            out += abs(p) * lbound(a, 0)
        for d, lst in self.terms.items():
            for a, c in lst:
                out += 2 * abs(c) * lbound(a, d) * (2 * r) ** d
        return out


def _negative_arc_integral(A0, C, ds, q):
    """``∫_0^{2π} max(-f, 0) dθ`` for one radius, ``f = A0 + 2 Re Σ C_d e^{idθ}``."""
    Cs = {d: np.array([C[d]]) for d in ds}
    return float(_negative_arc_batch(np.array([A0], dtype=float), Cs, ds, q)[0])


def _negative_arc_batch(A0, C, ds, q):
    """Vectorized :func:`_negative_arc_integral` over radii.

    The substitution ``θ -> qθ`` (``q`` the gcd of the harmonics) leaves the
    integral over a full period unchanged.  Sign changes of ``f`` are the
    roots of ``z^D f`` on the unit circle; each negative arc is integrated
    in closed form.
    """
    A0 = np.asarray(A0, dtype=float)
    out = np.zeros(A0.shape)
    if not ds:
        return 2 * math.pi * np.maximum(-A0, 0.0)
    red = np.array([d // q for d in ds])
    Cm = np.stack([np.asarray(C[d], dtype=complex) for d in ds], axis=1)  # (N, nd)
    scale = np.maximum(np.abs(A0), np.max(np.abs(Cm), axis=1))
    # effective degree: drop harmonics negligible at this radius
    live = np.abs(Cm) > 1e-13 * scale[:, None]
    deg = np.where(live, red[None, :], 0).max(axis=1)
    for D in np.unique(deg):
        idx = np.flatnonzero(deg == D)
        a0 = A0[idx]
        cm = np.where(live[idx], Cm[idx], 0)
        if D == 0:
            out[idx] = 2 * math.pi * np.maximum(-a0, 0.0)
            continue
        n = idx.size
        coef = np.zeros((n, 2 * D + 1), dtype=complex)
        coef[:, D] = a0
        for k, dr in enumerate(red):
            if dr <= D:
                coef[:, D + dr] += cm[:, k]
                coef[:, D - dr] += np.conj(cm[:, k])
        lead = coef[:, 2 * D]
        comp = np.zeros((n, 2 * D, 2 * D), dtype=complex)
        comp[:, 0, :] = -coef[:, 2 * D - 1::-1] / lead[:, None]
        if D > 0:
            comp[:, np.arange(1, 2 * D), np.arange(2 * D - 1)] = 1.0
        roots = np.linalg.eigvals(comp)
        on = np.abs(np.abs(roots) - 1) < 1e-5
        ang = np.where(on, np.mod(np.angle(roots), 2 * math.pi), np.inf)
        ang.sort(axis=1)
        cnt = on.sum(axis=1)

        def f(th):
            ph = np.exp(1j * red[None, None, :] * th[..., None])
            return a0[:, None] + 2 * np.real(np.sum(cm[:, None, :] * ph, axis=-1))

        def F(th):
            ph = (np.exp(1j * red[None, None, :] * th[..., None]) - 1) / (1j * red[None, None, :])
            return a0[:, None] * th + 2 * np.real(np.sum(cm[:, None, :] * ph, axis=-1))

        first = np.where(cnt > 0, ang[:, 0], 0.0)
        lo = np.where(np.isfinite(ang), ang, 0.0)
        nxt = np.concatenate([ang[:, 1:], np.full((n, 1), np.inf)], axis=1)
        j = np.arange(2 * D)[None, :]
        hi = np.where(j < cnt[:, None] - 1, nxt, first[:, None] + 2 * math.pi)
        valid = j < cnt[:, None]
        lo = np.where(valid, lo, 0.0)
        hi = np.where(valid, hi, 0.0)
        neg = valid & (f(0.5 * (lo + hi)) < 0) & (hi > lo)
        arcs = np.where(neg, -(F(hi) - F(lo)), 0.0).sum(axis=1)
        none = cnt == 0
        f0 = f(np.zeros((n, 1)))[:, 0]
        arcs = np.where(none, np.where(f0 < 0, -2 * math.pi * a0, 0.0), arcs)
        out[idx] = np.maximum(arcs, 0.0)
    return out


# ------------------------------------------------------------------ quadrature

def _gl(func, a, b):
    x = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
    return 0.5 * (b - a) * math.fsum(_GL_W * func(x))


def _adaptive(func, a, b, tol, max_panels=4000, width=0.25):
    """Adaptive Gauss-Legendre panels; error = |coarse - two-halves| per panel."""
    edges = np.linspace(a, b, max(1, int(math.ceil((b - a) / width))) + 1)
    heap = []
    counter = 0

    def make(lo, hi, coarse=None):
        nonlocal counter
        mid = 0.5 * (lo + hi)
        if coarse is None:
            coarse = _gl(func, lo, hi)
        left, right = _gl(func, lo, mid), _gl(func, mid, hi)
        fine = left + right
        counter += 1
        return (-abs(fine - coarse), counter, lo, hi, fine, left, right)

    for lo, hi in zip(edges[:-1], edges[1:]):
        heapq.heappush(heap, make(lo, hi))
    while True:
        err = math.fsum(-p[0] for p in heap)
        if err <= tol:
            break
        if len(heap) >= max_panels:
            val = math.fsum(p[4] for p in heap)
            raise QuadratureError(f"radial quadrature did not reach {tol:.1e} within {max_panels} panels", val, err)
        _, _, lo, hi, _, left, right = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        heapq.heappush(heap, make(lo, mid, left))
        heapq.heappush(heap, make(mid, hi, right))
    return math.fsum(p[4] for p in heap), err


def _tail(h: _Harmonics, R):
    def bound(r):
        return 2 * math.pi * r * (2 / math.pi) * math.exp(-2 * r * r) * float(h.abs_bound(np.array([r]))[0])

    val, _ = integrate.quad(bound, R, np.inf, limit=200)
    return val


def _radius(h: _Harmonics, tol):
    R = math.sqrt(h.max_label + 1) + 4
    tail = _tail(h, R)
    while tail > tol / 10:
        R += 0.5
        tail = _tail(h, R)
    return R, tail


def negativity_volume(rho: DensityMatrix, tol: float = DEFAULT_TOL, max_panels: int = 4000):
    """Volume of the negative part of ``W``.

    Returns
    -------
    volume, err : float
        ``-∫ min(W, 0) d²α`` and a conservative error estimate (panel
        refinement differences plus the tail bound).

    Raises
    ------
    QuadratureError
        If the panel budget is exhausted; carries the achieved estimate.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    h = _Harmonics(rho)
    if not h.diag and not h.terms:
        return 0.0, 0.0
    R, tail = _radius(h, tol)

    def integrand(r):
        A0, C = h.components(r)
        neg = _negative_arc_batch(A0, C, h.ds, h.q)
        return r * (2 / math.pi) * np.exp(-2 * r * r) * neg

    val, err = _adaptive(integrand, 0.0, R, 0.9 * tol, max_panels)
    return max(val, 0.0), err + tail


def wigner_integral(rho: DensityMatrix, tol: float = DEFAULT_TOL):
    """``∫ W d²α`` (should equal ``Tr ρ``) with the same radial machinery."""
    h = _Harmonics(rho)
    if not h.diag:
        return 0.0, 0.0
    R, tail = _radius(h, tol)

    def integrand(r):
        A0, _ = h.components(r)
        return 2 * math.pi * r * (2 / math.pi) * np.exp(-2 * r * r) * A0

    val, err = _adaptive(integrand, 0.0, R, 0.9 * tol)
    return val, err + tail


# -------------------------------------------------------------- closed forms

def _L(n, k, z):
    return laguerre_assoc(n, k, z)


def _sq(a, b):
    return math.exp(_log_sqrt_ratio(a, b))


def _w_case1(x, y, n1, n2, m, which, al, z):
    c = np.conj
    if which == 1:
        n, yy, pop0 = n1, y[2], 1 - abs(y[2]) ** 2
    else:
        n, yy, pop0 = n2, y[3], abs(x[1]) ** 2 + abs(y[1]) ** 2 + abs(y[2]) ** 2
    coh = x[1] * c(yy) * al**m + yy * c(x[1]) * c(al) ** m
    return (-1) ** n * (pop0 * _L(n, 0, z) + 2**m * _sq(n, n + m) * coh * _L(n, m, z)
                        + (-1) ** m * abs(yy) ** 2 * _L(n + m, 0, z))


def _w_case2a(x, y, n1, m, which, al, z):
    c = np.conj
    if which == 1:
        p0 = abs(x[1]) ** 2 + abs(x[2]) ** 2 + abs(y[1]) ** 2 + abs(y[3]) ** 2
        p1 = abs(x[3]) ** 2 + abs(y[2]) ** 2 + abs(y[4]) ** 2
        c1 = x[1] * c(y[2]) + x[2] * c(y[4])
        c2 = x[3] * c(y[5])
        p2 = abs(y[5]) ** 2
        return (-1) ** n1 * (p0 * _L(n1, 0, z) + (-1) ** m * p1 * _L(n1 + m, 0, z)
                             + 2**m * _sq(n1, n1 + m) * (al**m * c1 + c(al) ** m * c(c1)) * _L(n1, m, z)
                             + (-2) ** m * _sq(n1 + m, n1 + 2 * m) * (c2 * al**m + c(c2) * c(al) ** m) * _L(n1 + m, m, z)
                             + p2 * _L(n1 + 2 * m, 0, z))
    n2 = 0  # oscillator 2 occupies 0, m, 2m in this case
    p0 = abs(x[2]) ** 2 + abs(x[3]) ** 2 + abs(y[4]) ** 2 + abs(y[5]) ** 2
    p1 = abs(x[1]) ** 2 + abs(y[1]) ** 2 + abs(y[2]) ** 2
    c1 = x[2] * c(y[1]) + x[3] * c(y[2])
    c2 = x[1] * c(y[3])
    return (p0 * _L(n2, 0, z) + (-1) ** m * p1 * _L(n2 + m, 0, z)
            + 2**m * _sq(n2, n2 + m) * (c1 * al**m + c(c1) * c(al) ** m) * _L(n2, m, z)
            + (-2) ** m * _sq(n2 + m, n2 + 2 * m) * (c2 * al**m + c(c2) * c(al) ** m) * _L(n2 + m, m, z)
            + abs(y[3]) ** 2 * _L(n2 + 2 * m, 0, z))


def _w_case3(rho, m, al, z):
    e = rho.element
    c = np.conj
    inner = (e(0, m) / math.sqrt(math.factorial(m))
             + (-1) ** m * _sq(m, 2 * m) * e(m, 2 * m) * _L(m, m, z)
             + _sq(2 * m, 3 * m) * e(2 * m, 3 * m) * _L(2 * m, m, z))
    return (e(0, 0).real + e(2 * m, 2 * m).real * _L(2 * m, 0, z)
            + (-1) ** m * (e(m, m).real * _L(m, 0, z) + e(3 * m, 3 * m).real * _L(3 * m, 0, z))
            + (2 * al) ** m * inner + c((2 * al) ** m * inner))


def _w_case4(rho, n, m, al, z, which):
    e = rho.element
    c = np.conj
    kmax = n // m + max(rho.labels) // m + 2
    out = 0.0
    seen = set()
    for k in range(kmax + 1):
        # each diagonal label counted once (k = 0 appears in both sums)
        for a in (n + k * m, n - k * m):
            if a >= 0 and a not in seen:
                seen.add(a)
                out = out + (-1) ** a * e(a, a).real * _L(a, 0, z)
        for a in (n + k * m, n - (k + 1) * m):
            if a >= 0:
                v = (-1) ** a * _sq(a, a + m) * _L(a, m, z) * e(a, a + m)
                out = out + (2 * al) ** m * v + c((2 * al) ** m * v)
    return out


def wigner_closed_form(case_id, state: CoefficientVector, which: int, alpha):
    """Per-case closed-form ``W`` of oscillator ``which`` built from the x/y coefficients.

    Cases 1 and 2 use the coefficient expressions directly; cases 3 and 4 use
    the reduced-matrix expressions, whose entries come from
    :func:`mpjc.states.closed_form_reduced`.
    """
    n1, n2, m = scenario_of(state)
    actual = classify_case(n1, n2, m)
    if Case(case_id) is not actual:
        raise CaseMismatchError(f"state is {actual.value}, not {Case(case_id).value}")
    al = np.asarray(alpha, dtype=complex)
    z = 4 * np.abs(al) ** 2
    nx = sum(1 for s in state.basis if s.n1 + s.n2 + (m if s.qubit == "e" else 0) == n1 + n2)
    x = np.concatenate([[0], state.values[:nx]])
    y = np.concatenate([[0], state.values[nx:]])
    if actual is Case.CASE1:
        wt = _w_case1(x, y, n1, n2, m, which, al, z)
    elif actual in (Case.CASE2A, Case.CASE2B):
        if actual is Case.CASE2A:
            wt = _w_case2a(x, y, n1, m, which, al, z)
        else:
            from .states import _swap_to_case2a

            sw = _swap_to_case2a(state, n1, n2, m)
            x = np.concatenate([[0], sw.values[:nx]])
            y = np.concatenate([[0], sw.values[nx:]])
            wt = _w_case2a(x, y, n2, m, 3 - which, al, z)
    elif actual is Case.CASE3:
        wt = _w_case3(closed_form_reduced(state, which), m, al, z)
    else:
        n = n1 if which == 1 else n2
        wt = _w_case4(closed_form_reduced(state, which), n, m, al, z, which)
    out = (2 / math.pi) * np.exp(-2 * np.abs(al) ** 2) * np.real(wt)
    return out if np.ndim(out) else float(out)


# ------------------------------------------------------------------- traces

def negativity_trace(params: ModelParams, times, which: int = 1, tol: float = DEFAULT_TOL,
                     engine: str = "numeric") -> NegativityTrace:
    """``V_{W-}`` of oscillator ``which`` sampled on ``times``."""
    ev = Evolver(params, engine)
    out = NegativityTrace()
    for t in times:
        rho = reduce_oscillator(ev.state(float(t)), which)
        v, e = negativity_volume(rho, tol)
        out.times.append(float(t))
        out.volumes.append(v)
        out.abs_err.append(e)
    return out
