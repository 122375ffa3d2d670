"""Symmetry checks: the m = 1 constant of motion and the canonical beamsplitter transform.

Operator identities are evaluated on a truncated Fock space and compared only
on the interior, away from the truncation edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.linalg import expm

from .errors import AnalyticDomainError, InvalidParameterError
from .fock import FockSpace
from .hamiltonian import ModelParams

__all__ = [
    "OperatorMatrix",
    "constant_of_motion",
    "commutator_norm",
    "commutator_closed_form",
    "CanonicalCouplings",
    "canonical_couplings",
    "rotated_couplings",
    "beamsplitter_unitary",
    "conjugated_couplings",
]


@dataclass
class OperatorMatrix:
    """Operator on ``qubit ⊗ osc1 ⊗ osc2`` truncated at ``cutoff`` per mode."""

    matrix: object
    cutoff: int

    def interior(self, margin: int):
        """Sub-block with both labels ``<= cutoff - margin``."""
        F = FockSpace(self.cutoff)
        _, n1, n2 = F.labels()
        keep = np.flatnonzero((n1 <= self.cutoff - margin) & (n2 <= self.cutoff - margin))
        M = self.matrix
        M = M.toarray() if sp.issparse(M) else np.asarray(M)
        return M[np.ix_(keep, keep)]


def constant_of_motion(params: ModelParams, cutoff: int) -> OperatorMatrix:
    """``𝒞 = (g2² n1 + g1² n2 - g1 g2 (a1†a2 + a2†a1)) / (g1² + g2²)``."""
    F = FockSpace(cutoff)
    g1, g2 = params.g1, params.g2
    norm = g1 * g1 + g2 * g2
    if norm == 0:
        return OperatorMatrix(sp.csr_matrix((F.dim, F.dim)), cutoff)
    hop = F.a1.T @ F.a2
    C = (g2 * g2 * F.n1_op + g1 * g1 * F.n2_op - g1 * g2 * (hop + hop.T)) / norm
    return OperatorMatrix(C.tocsr(), cutoff)


def commutator_norm(params: ModelParams, cutoff: int) -> float:
    """Frobenius norm of ``[H_II, 𝒞]`` on labels ``<= cutoff - m``."""
    m = params.m
    if cutoff < 3 * m + 3:
        raise InvalidParameterError(f"cutoff must be >= 3m + 3 = {3 * m + 3}, got {cutoff}")
    F = FockSpace(cutoff)
    H = F.hamiltonian(params)
    C = constant_of_motion(params, cutoff).matrix
    comm = OperatorMatrix((H @ C - C @ H).tocsr(), cutoff)
    return float(np.linalg.norm(comm.interior(m)))


def commutator_closed_form(params: ModelParams, cutoff: int) -> OperatorMatrix:
    """Bracketed closed form of ``[H, 𝒞]`` (zero prefactor when ``g1 g2 = 0``)."""
    F = FockSpace(cutoff)
    g1, g2, m = params.g1, params.g2, params.m
    norm = g1 * g1 + g2 * g2
    if norm == 0:
        return OperatorMatrix(sp.csr_matrix((F.dim, F.dim)), cutoff)
    sp_, sm = F.sigma_plus, F.sigma_minus
    a1, a2 = F.a1, F.a2

    def pair(op):
        # op σ+ - op† σ-
        return op @ sp_ - op.T @ sm

    body = (g2 * pair(F.power(a1, m)) - g1 * pair(F.power(a1, m - 1) @ a2)
            + g1 * pair(F.power(a2, m)) - g2 * pair(a1 @ F.power(a2, m - 1)))
    return OperatorMatrix((m * g1 * g2 / norm * body).tocsr(), cutoff)


@dataclass(frozen=True)
class CanonicalCouplings:
    theta: float
    g_tilde: float
    g_tilde_tilde: float
    tripartite: tuple[float, ...]


def rotated_couplings(g1: float, g2: float, m: int, theta: float) -> list[float]:
    """Coefficients of ``b1^k b2^{m-k} σ+`` for ``k = 0..m`` after rotating by ``theta``."""
    c, s = math.cos(theta), math.sin(theta)
    return [math.comb(m, k) * (g1 * c**k * (-s) ** (m - k) + g2 * s**k * c ** (m - k)) for k in range(m + 1)]


def _real_root(x, m):
    """Real ``u`` with ``u^m = x``; ``None`` if none exists."""
    if x >= 0:
        return x ** (1.0 / m)
    if m % 2 == 1:
        return -((-x) ** (1.0 / m))
    return None


def canonical_couplings(g1: float, g2: float, m: int) -> CanonicalCouplings:
    """Rotation angle that removes ``b2^m σ+`` and the resulting couplings.

    ``θ`` solves ``(-tan θ)^m = -g2/g1``.  With ``u`` the real m-th root of
    ``-g2/g1`` (``tan θ = -u``), the coefficients are
    ``C(m,k) (g1 u^{m-k} + g2 (-u)^k) / (1 + u²)^{m/2}``; the ``k = m`` one is
    ``g̃ = (g1² + (-1)^{m-1} g2²) / (g1^{2/m} + g2^{2/m})^{m/2}``.

    Raises
    ------
    AnalyticDomainError
        For even ``m`` with ``g2/g1 > 0`` no real angle exists.
    """
    if not g1 > 0:
        raise InvalidParameterError("g1 must be positive")
    if int(m) != m or m < 1:
        raise InvalidParameterError("m must be a positive integer")
    u = _real_root(-g2 / g1, m)
    if u is None:
        raise AnalyticDomainError(
            f"(-tan θ)^{m} = {-g2 / g1:.6g} < 0 has no real solution for even m; "
            "the branch with g2/g1 > 0 fails (needs g2/g1 <= 0)")
    theta = math.atan(-u)
    den = (1 + u * u) ** (m / 2)
    coef = [math.comb(m, k) * (g1 * u ** (m - k) + g2 * (-u) ** k) / den for k in range(m + 1)]
    g_t = (g1 * g1 + (-1) ** (m - 1) * g2 * g2) / (abs(g1) ** (2 / m) + abs(g2) ** (2 / m)) ** (m / 2)
    return CanonicalCouplings(theta, g_t, coef[0], tuple(coef[1:m]))


def beamsplitter_unitary(theta: float, cutoff: int) -> np.ndarray:
    """``exp(-θ(a1†a2 - a1 a2†))`` on the truncated two-mode space (dense)."""
    F = FockSpace(cutoff)
    nf = F.nf
    a = np.diag(np.sqrt(np.arange(1, nf, dtype=float)), 1)
    eye = np.eye(nf)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    return expm(-theta * (a1.T @ a2 - a1 @ a2.T))


def conjugated_couplings(g1: float, g2: float, m: int, theta: float, cutoff: int | None = None):
    """Read the rotated coefficients off ``U† H_int U`` computed numerically.

    Returns ``(coef, residual)``: ``coef[k]`` multiplies ``a1^k a2^{m-k} σ+``
    and ``residual`` is the largest deviation of any matrix element, with both
    states having ``n1 + n2 <= cutoff``, from that operator pattern.
    """
    cutoff = cutoff if cutoff is not None else 2 * m + 2
    nf = cutoff + 1
    U = beamsplitter_unitary(theta, cutoff)
    a = np.diag(np.sqrt(np.arange(1, nf, dtype=float)), 1)
    eye = np.eye(nf)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    up = g1 * np.linalg.matrix_power(a1, m) + g2 * np.linalg.matrix_power(a2, m)  # multiplies σ+
    R = U.conj().T @ up @ U
    n1, n2 = np.divmod(np.arange(nf * nf), nf)
    ok = n1 + n2 <= cutoff
    coef = []
    for k in range(m + 1):
        # <n1-k, n2-m+k| R |n1, n2> at the smallest admissible source state
        src = k * nf + (m - k)
        coef.append(float(np.real(R[0, src])) / math.sqrt(math.factorial(k) * math.factorial(m - k)))
    model = np.zeros_like(R)
    for k in range(m + 1):
        model += coef[k] * np.linalg.matrix_power(a1, k) @ np.linalg.matrix_power(a2, m - k)
    mask = np.outer(ok, ok)
    residual = float(np.max(np.abs((R - model)[mask])))
    return coef, residual
