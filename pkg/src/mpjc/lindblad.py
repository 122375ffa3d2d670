"""Open-system evolution on the truncated space ``qubit ⊗ osc1 ⊗ osc2``.

``dρ/dt = -i[H_II, ρ] + Σ_k λ_k (L_k ρ L_k† - ½{L_k† L_k, ρ})`` with
``L ∈ {a1, a2, σ-}`` at ``λ_r(1+n_th)``, ``{a1†, a2†, σ+}`` at ``λ_r n_th`` and
``{a1†a1, a2†a2, σz}`` at ``λ_d``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .errors import IntegratorError, InvalidParameterError, TruncationError, TruncationWarning
from .fock import FockSpace
from .hamiltonian import ModelParams
from .ladder import BasisState, Case, classify_case
from .states import DensityMatrix
from .wigner import DEFAULT_TOL, NegativityTrace, negativity_volume

__all__ = [
    "LindbladConfig",
    "LindbladOperator",
    "FullDensityMatrix",
    "default_cutoff",
    "initial_density",
    "build_lindblad_ops",
    "evolve_master",
    "reduced_state",
    "fock_swap_fidelity_open",
    "negativity_trace_open",
]

TRACE_TOL = 1e-6
HERM_TOL = 1e-8
LEAK_TOL = 1e-6


def default_cutoff(params: ModelParams) -> int:
    return max(params.n1, params.n2) + 3 * params.m + 2


@dataclass(frozen=True)
class LindbladConfig:
    """Rates, truncation and integrator control for :func:`evolve_master`."""

    lambda_r: float = 0.0
    lambda_d: float = 0.0
    n_th: float = 0.0
    cutoff: int | None = None
    rtol: float = 1e-11
    atol: float = 1e-13
    strict: bool = False

    def __post_init__(self):
        for name in ("lambda_r", "lambda_d", "n_th"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise InvalidParameterError(f"{name} must be a finite nonnegative number, got {v!r}")
        if self.cutoff is not None and (int(self.cutoff) != self.cutoff or self.cutoff < 1):
            raise InvalidParameterError(f"cutoff must be a positive integer, got {self.cutoff!r}")

    def resolved_cutoff(self, params: ModelParams) -> int:
        c = default_cutoff(params) if self.cutoff is None else int(self.cutoff)
        if c < max(params.n1, params.n2):
            raise InvalidParameterError(f"cutoff {c} cannot hold the initial Fock state")
        return c


@dataclass
class LindbladOperator:
    name: str
    op: object
    rate: float


@dataclass
class FullDensityMatrix:
    """Density matrix on ``2 x (cutoff+1) x (cutoff+1)``."""

    dims: tuple[int, int, int]
    entries: np.ndarray
    time: float = 0.0

    @property
    def cutoff(self) -> int:
        return self.dims[1] - 1

    def trace(self) -> float:
        return float(np.real(np.trace(self.entries)))


def initial_density(params: ModelParams, cutoff: int) -> FullDensityMatrix:
    """``|ψ(0)><ψ(0)|`` with ``|ψ(0)> = cos φ |g,n1,n2> + sin φ |e,n1,n2>``."""
    F = FockSpace(cutoff)
    psi = F.embed([math.cos(params.phi), math.sin(params.phi)],
                  [BasisState("g", params.n1, params.n2), BasisState("e", params.n1, params.n2)])
    return FullDensityMatrix((2, F.nf, F.nf), np.outer(psi, psi.conj()), 0.0)


def _ops(F: FockSpace, config: LindbladConfig):
    down = config.lambda_r * (1 + config.n_th)
    up = config.lambda_r * config.n_th
    cand = [
        ("a1", F.a1, down), ("a2", F.a2, down), ("sigma_minus", F.sigma_minus, down),
        ("a1_dag", F.a1.T.tocsr(), up), ("a2_dag", F.a2.T.tocsr(), up), ("sigma_plus", F.sigma_plus, up),
        ("n1", F.n1_op, config.lambda_d), ("n2", F.n2_op, config.lambda_d), ("sigma_z", F.sigma_z, config.lambda_d),
    ]
    return [LindbladOperator(n, o, r) for n, o, r in cand if r > 0]


def _liouvillian(F: FockSpace, params: ModelParams, config: LindbladConfig):
    """Sparse generator acting on the row-major vectorization of ρ."""
    eye = sp.identity(F.dim, format="csr")
    H = F.hamiltonian(params).astype(complex)
    # vec(A ρ B) = (A ⊗ B^T) vec(ρ) for row-major vec
    Lsup = -1j * (sp.kron(H, eye) - sp.kron(eye, H.T))
    for o in _ops(F, config):
        L = o.op.astype(complex)
        LdL = (L.conj().T @ L).tocsr()
        Lsup = Lsup + o.rate * (sp.kron(L, L.conj()) - 0.5 * sp.kron(LdL, eye) - 0.5 * sp.kron(eye, LdL.T))
    return Lsup.tocsr()


def build_lindblad_ops(config: LindbladConfig, params: ModelParams) -> list[LindbladOperator]:
    """Active jump operators with their dissipator prefactors."""
    return _ops(FockSpace(config.resolved_cutoff(params)), config)


def evolve_master(rho0: FullDensityMatrix, params: ModelParams, config: LindbladConfig, t_grid) -> list[FullDensityMatrix]:
    """Integrate the master equation with an embedded RK 4(5) pair.

    Raises
    ------
    IntegratorError
        If the solver fails or the trace drifts by more than ``1e-6``.
    TruncationError
        In strict mode, if more than ``1e-6`` population sits within two
        levels of the cutoff.  Otherwise a :class:`TruncationWarning` is issued.
    """
    cutoff = rho0.cutoff
    F = FockSpace(cutoff)
    n = F.dim
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or np.any(np.diff(t_grid) < 0):
        raise InvalidParameterError("t_grid must be a nondecreasing 1-d sequence")
    t0 = rho0.time
    if t_grid[0] < t0:
        raise InvalidParameterError("t_grid starts before rho0.time")
    rho_init = np.asarray(rho0.entries, dtype=complex)
    # every term of the generator conserves N(row) - N(col), N = n1 + n2 + m q,
    # so only the sectors present in rho0 are integrated
    q, n1, n2 = F.labels()
    N = n1 + n2 + params.m * q
    dN = N[:, None] - N[None, :]
    present = np.unique(dN[np.abs(rho_init) > 0])
    sel = np.flatnonzero(np.isin(dN.ravel(), present))
    S = _liouvillian(F, params, config)[sel][:, sel].tocsr()
    y0 = rho_init.ravel()[sel]
    if t_grid[-1] == t0:
        sols = np.repeat(y0[:, None], t_grid.size, axis=1)
    else:
        res = solve_ivp(lambda _t, y: S @ y, (t0, float(t_grid[-1])), y0, method="RK45", t_eval=t_grid,
                        rtol=config.rtol, atol=config.atol)
        if not res.success:
            raise IntegratorError(f"RK45 failed: {res.message}; try a smaller rtol/atol")
        sols = res.y
    out = []
    worst_leak = 0.0
    for k, t in enumerate(t_grid):
        flat = np.zeros(n * n, dtype=complex)
        flat[sel] = sols[:, k]
        rho = flat.reshape(n, n)
        herm = np.max(np.abs(rho - rho.conj().T))
        if herm > HERM_TOL:
            raise IntegratorError(f"Hermiticity drift {herm:.3e} at t={t}; reduce rtol/atol")
        rho = 0.5 * (rho + rho.conj().T)
        tr = np.real(np.trace(rho))
        if abs(tr - 1) > TRACE_TOL:
            raise IntegratorError(f"trace drift {abs(tr - 1):.3e} at t={t}; reduce rtol/atol")
        worst_leak = max(worst_leak, F.edge_population(rho))
        out.append(FullDensityMatrix((2, F.nf, F.nf), rho, float(t)))
    if worst_leak > LEAK_TOL:
        msg = f"population {worst_leak:.3e} within 2 levels of cutoff {cutoff}; increase the cutoff"
        if config.strict:
            raise TruncationError(msg)
        warnings.warn(msg, TruncationWarning, stacklevel=2)
    return out


def reduced_state(rho: FullDensityMatrix, which: int) -> DensityMatrix:
    """Reduced oscillator state on labels ``0..cutoff``."""
    F = FockSpace(rho.cutoff)
    r = F.partial_trace(rho.entries, which)
    return DensityMatrix(tuple(range(F.nf)), r, rho.time)


def _run(params, config, t_grid):
    cutoff = config.resolved_cutoff(params)
    return evolve_master(initial_density(params, cutoff), params, config, t_grid)


def fock_swap_fidelity_open(params: ModelParams, config: LindbladConfig, t_grid) -> list[float]:
    """``<n1+m|ρ1(t)|n1+m>`` for a case-2a scenario."""
    if classify_case(params.n1, params.n2, params.m) is not Case.CASE2A:
        raise InvalidParameterError("fock_swap_fidelity_open needs a case-2a scenario (n1 < n2 = m)")
    target = params.n1 + params.m
    return [float(reduced_state(r, 1).entries[target, target].real) for r in _run(params, config, t_grid)]


def negativity_trace_open(params: ModelParams, config: LindbladConfig, t_grid, which: int = 1,
                          tol: float = DEFAULT_TOL) -> NegativityTrace:
    """``V_{W-}`` of oscillator ``which`` under the master equation."""
    out = NegativityTrace()
    for r in _run(params, config, t_grid):
        rho = reduced_state(r, which)
        v, e = negativity_volume(rho, tol)
        out.times.append(r.time)
        out.volumes.append(v)
        out.abs_err.append(e)
    return out
