"""Operators on the truncated tripartite space ``qubit ⊗ osc1 ⊗ osc2``.

Ordering is ``kron(qubit, osc1, osc2)`` with qubit index 0 = ``g`` and
1 = ``e``; each oscillator keeps labels ``0..cutoff``.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .hamiltonian import ModelParams
from .ladder import BasisState

__all__ = ["FockSpace"]


class FockSpace:
    def __init__(self, cutoff: int):
        self.cutoff = int(cutoff)
        self.nf = self.cutoff + 1
        self.dim = 2 * self.nf * self.nf
        a = sp.diags(np.sqrt(np.arange(1, self.nf, dtype=float)), 1, format="csr")
        eye_f = sp.identity(self.nf, format="csr")
        eye_q = sp.identity(2, format="csr")
        self.a1 = sp.kron(eye_q, sp.kron(a, eye_f), format="csr")
        self.a2 = sp.kron(eye_q, sp.kron(eye_f, a), format="csr")
        sm = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))  # |g><e|
        eye_ff = sp.identity(self.nf * self.nf, format="csr")
        self.sigma_minus = sp.kron(sm, eye_ff, format="csr")
        self.sigma_plus = self.sigma_minus.T.tocsr()
        self.sigma_z = sp.kron(sp.diags([-1.0, 1.0]), eye_ff, format="csr")
        self.n1_op = (self.a1.T @ self.a1).tocsr()
        self.n2_op = (self.a2.T @ self.a2).tocsr()

    def index(self, state: BasisState) -> int:
        q = 0 if state.qubit == "g" else 1
        return (q * self.nf + state.n1) * self.nf + state.n2

    def labels(self):
        """Arrays ``(q, n1, n2)`` of the labels of every basis index."""
        q, n1, n2 = np.unravel_index(np.arange(self.dim), (2, self.nf, self.nf))
        return q, n1, n2

    def power(self, op, k):
        out = sp.identity(self.dim, format="csr")
        for _ in range(k):
            out = (out @ op).tocsr()
        return out

    def interaction(self, params: ModelParams):
        """``Σ_i g_i (a_i^m σ+ + a_i†^m σ-)`` as a sparse matrix."""
        m = params.m
        up = params.g1 * self.power(self.a1, m) + params.g2 * self.power(self.a2, m)
        hp = (up @ self.sigma_plus).tocsr()
        return (hp + hp.T).tocsr()

    def hamiltonian(self, params: ModelParams):
        """``H_II = Δ/2 σz + H_int`` on the truncated space."""
        return (params.delta_half * self.sigma_z + self.interaction(params)).tocsr()

    def embed(self, amplitudes, basis) -> np.ndarray:
        """Ladder amplitudes -> state vector on the truncated space."""
        psi = np.zeros(self.dim, dtype=complex)
        for c, s in zip(amplitudes, basis):
            if max(s.n1, s.n2) > self.cutoff:
                raise ValueError(f"state {s} exceeds cutoff {self.cutoff}")
            psi[self.index(s)] += c
        return psi

    def partial_trace(self, rho: np.ndarray, which: int) -> np.ndarray:
        """Reduced state of oscillator ``which`` (1 or 2) from a full density matrix."""
        r = rho.reshape(2, self.nf, self.nf, 2, self.nf, self.nf)
        if which == 1:
            return np.einsum("aibajb->ij", r)
        if which == 2:
            return np.einsum("abiabj->ij", r)
        raise ValueError("which must be 1 or 2")

    def edge_population(self, rho: np.ndarray, width: int = 2) -> float:
        """Population on states with either label within ``width`` of the cutoff."""
        _, n1, n2 = self.labels()
        mask = (n1 > self.cutoff - width) | (n2 > self.cutoff - width)
        return float(np.real(np.sum(np.diag(rho)[mask])))
