"""Command-line scenario runner.

Every subcommand writes a CSV plus a JSON manifest next to it::

    mpjc negativity --m 3 --phi 0.7853981633974483 --t-stop 30 --output vac_m3.csv
    mpjc phi-scan --config scan.ini --jobs 4

Exit codes: 0 success, 2 configuration error, 3 numeric failure, 4 truncation
escalation in strict mode.  Errors are reported as one JSON object on stderr.
``MPJC_OUTPUT_DIR`` overrides the output directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import tempfile
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .config import KINDS, ConfigError, ScanSettings, ScenarioConfig, load_config
from .dynamics import Evolver
from .errors import MPJCError, NumericError, TruncationError
from .hamiltonian import ModelParams
from .ladder import Case, classify_case
from .lindblad import evolve_master, initial_density, reduced_state
from .states import reduce_oscillator
from .symmetry import canonical_couplings, commutator_norm, conjugated_couplings
from .transfer import beamsplitter_output, beamsplitter_prob, swap_amplitude, transfer_fidelity
from .wigner import PRUNE, negativity_volume

__all__ = ["main", "run", "RunResult"]

ENV_OUTPUT_DIR = "MPJC_OUTPUT_DIR"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_TRUNCATION = 0, 2, 3, 4


@dataclass
class RunResult:
    columns: list[tuple[str, str]]
    rows: list[tuple]
    engine_path: str
    extra: dict = field(default_factory=dict)


# ----------------------------------------------------------------- workers
# Module-level so they pickle for the process pool.

def _negativity_rows(params: ModelParams, times, which: int, tol: float, engine: str):
    ev = Evolver(params, engine)
    rows = []
    for t in times:
        v, e = negativity_volume(reduce_oscillator(ev.state(float(t)), which), tol)
        rows.append((float(t), v, e))
    return rows, ev.engine


def _phi_point(job):
    params, times, which, tol, engine = job
    rows, eng = _negativity_rows(params, times, which, tol, engine)
    k = int(np.argmax([r[1] for r in rows]))
    return (params.phi, rows[k][1], rows[k][0], rows[k][2], rows[0][1]), eng


def _detuning_point(job):
    params, times, which, tol, engine = job
    rows, eng = _negativity_rows(params, times, which, tol, engine)
    return [(params.delta,) + r for r in rows], eng


def _transfer_point(job):
    n1, m, g1, g2, delta, engine = job
    a = math.sqrt(math.prod(range(n1 + 1, n1 + m + 1))) * abs(g1)
    b = math.sqrt(math.factorial(m)) * abs(g2)
    t_star = math.pi / math.hypot(a, b)
    params = ModelParams(n1, m, m, g1, g2, delta, 0.0)
    fid = float(transfer_fidelity(params, [t_star], engine)[0])
    return (n1, m, swap_amplitude(n1, m, g1, g2), t_star, fid), Evolver(params, engine).engine


def _pool_map(fn, jobs, n_jobs: int):
    if n_jobs <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n_jobs) as ex:
        return list(ex.map(fn, jobs))


def _engine_label(engines) -> str:
    return ",".join(sorted(set(engines)))


# ----------------------------------------------------------------- runners

def _run_evolve(cfg: ScenarioConfig, n_jobs: int) -> RunResult:
    ev = Evolver(cfg.params(), cfg.engine)
    cols = [("t", "time"), ("norm", "state norm")]
    for s in ev.basis:
        tag = f"{s.qubit}_{s.n1}_{s.n2}"
        cols += [(f"re_{tag}", f"Re <{s.qubit},{s.n1},{s.n2}|psi(t)>"),
                 (f"im_{tag}", f"Im <{s.qubit},{s.n1},{s.n2}|psi(t)>")]
    rows = []
    for t in cfg.times():
        st = ev.state(float(t))
        row = [float(t), st.norm()]
        for c in st.values:
            row += [float(c.real), float(c.imag)]
        rows.append(tuple(row))
    return RunResult(cols, rows, ev.engine, {"branch_engines": ev.branch_engines, "case": ev.spec.case_id.value})


def _run_negativity(cfg, n_jobs):
    rows, eng = _negativity_rows(cfg.params(), cfg.times(), cfg.which, cfg.tol, cfg.engine)
    cols = [("t", "time"), ("V", f"Wigner negativity volume of oscillator {cfg.which}"),
            ("V_err", "quadrature error estimate")]
    return RunResult(cols, rows, eng)


def _phis(scan: ScanSettings):
    return np.linspace(0.0, math.pi / 2, scan.phi_points) if scan.phi_points > 1 else np.array([0.0])


def _run_phi_scan(cfg, n_jobs):
    base, times = cfg.params(), cfg.times()
    jobs = [(base.replace(phi=float(p)), times, cfg.which, cfg.tol, cfg.engine) for p in _phis(cfg.scan)]
    out = _pool_map(_phi_point, jobs, n_jobs)
    cols = [("phi", "qubit angle"), ("V_max", "max over the time grid of V"),
            ("t_at_max", "time of V_max"), ("V_err", "quadrature error at V_max"),
            ("V_initial", "V at the first grid time")]
    rows = [r for r, _ in out]
    k = int(np.argmax([r[1] for r in rows]))
    return RunResult(cols, rows, _engine_label(e for _, e in out), {"phi_argmax": rows[k][0]})


def _run_transfer_scan(cfg, n_jobs):
    jobs = [(n1, m, cfg.g1, cfg.g2, cfg.delta, cfg.engine)
            for n1 in range(cfg.scan.n1_max + 1) for m in range(1, cfg.scan.m_max + 1)]
    out = _pool_map(_transfer_point, jobs, n_jobs)
    cols = [("n1", "initial photons in oscillator 1"), ("m", "photon order"),
            ("A", "swap amplitude from the three-level formula"),
            ("t_star", "first transfer time pi/sqrt(g_a^2+g_b^2)"),
            ("fidelity", "|<g,n1+m,0|psi(t_star)>|^2 from the full evolution")]
    return RunResult(cols, [r for r, _ in out], _engine_label(e for _, e in out))


def _run_detuning_scan(cfg, n_jobs):
    s = cfg.scan
    deltas = np.linspace(s.delta_min, s.delta_max, s.delta_points) if s.delta_points > 1 else np.array([s.delta_min])
    base, times = cfg.params(), cfg.times()
    jobs = [(base.replace(delta=float(d)), times, cfg.which, cfg.tol, cfg.engine) for d in deltas]
    out = _pool_map(_detuning_point, jobs, n_jobs)
    cols = [("delta", "detuning"), ("t", "time"), ("V", f"Wigner negativity volume of oscillator {cfg.which}"),
            ("V_err", "quadrature error estimate")]
    rows = [r for block, _ in out for r in block]
    return RunResult(cols, rows, _engine_label(e for _, e in out))


def _run_decoherence(cfg, n_jobs):
    params, lcfg = cfg.params(), cfg.lindblad()
    cutoff = lcfg.resolved_cutoff(params)
    states = evolve_master(initial_density(params, cutoff), params, lcfg, cfg.times())
    swap = classify_case(params.n1, params.n2, params.m) is Case.CASE2A
    cols = [("t", "time"), ("V", f"Wigner negativity volume of oscillator {cfg.which}"),
            ("V_err", "quadrature error estimate"), ("trace", "Tr rho")]
    if swap:
        cols.append(("fidelity", f"<{params.n1 + params.m}|rho_1|{params.n1 + params.m}>"))
    rows = []
    target = params.n1 + params.m
    for r in states:
        v, e = negativity_volume(reduced_state(r, cfg.which), cfg.tol)
        row = [r.time, v, e, r.trace()]
        if swap:
            row.append(float(reduced_state(r, 1).entries[target, target].real))
        rows.append(tuple(row))
    return RunResult(cols, rows, "lindblad-rk45", {"cutoff": cutoff})


def _run_symmetry_check(cfg, n_jobs):
    params = cfg.params()
    m = params.m
    cutoff = max(cfg.cutoff or 0, 3 * m + 3)
    rows = [("commutator_norm", commutator_norm(params, cutoff))]
    cc = canonical_couplings(cfg.g1, cfg.g2, m)
    rows += [("theta", cc.theta), ("g_tilde", cc.g_tilde), ("g_tilde_tilde", cc.g_tilde_tilde)]
    rows += [(f"tripartite_{k + 1}", g) for k, g in enumerate(cc.tripartite)]
    coef, residual = conjugated_couplings(cfg.g1, cfg.g2, m, cc.theta)
    rows += [(f"conjugated_{k}", c) for k, c in enumerate(coef)]
    rows.append(("conjugation_residual", residual))
    cols = [("name", "quantity"), ("value", "value")]
    return RunResult(cols, rows, "numeric", {"commutator_cutoff": cutoff})


def _run_beamsplitter(cfg, n_jobs):
    n1, n2 = cfg.n1, cfg.n2
    npts = cfg.scan.theta_points
    thetas = np.linspace(0.0, math.pi / 2, npts) if npts > 1 else np.array([math.pi / 4])
    labels = [(p, n1 + n2 - p) for p in range(n1 + n2 + 1)]
    cols = [("theta", "beamsplitter angle"), ("P_transfer", f"probability of |{n1 + n2},0>"),
            ("prob_sum", "sum of output probabilities")]
    cols += [(f"P_{p}_{q}", f"probability of |{p},{q}>") for p, q in labels]
    rows = []
    for th in thetas:
        amps = dict(beamsplitter_output(n1, n2, float(th)))
        probs = [amps.get(lab, 0.0) ** 2 for lab in labels]
        rows.append((float(th), beamsplitter_prob(n1, n2, float(th)), math.fsum(probs), *probs))
    k = int(np.argmax([r[1] for r in rows]))
    return RunResult(cols, rows, "analytic", {"P_transfer_max": rows[k][1], "theta_at_max": rows[k][0]})


RUNNERS = {
    "evolve": _run_evolve,
    "negativity": _run_negativity,
    "phi-scan": _run_phi_scan,
    "transfer-scan": _run_transfer_scan,
    "detuning-scan": _run_detuning_scan,
    "decoherence": _run_decoherence,
    "symmetry-check": _run_symmetry_check,
    "beamsplitter": _run_beamsplitter,
}
assert set(RUNNERS) == set(KINDS)


# ------------------------------------------------------------------ output

def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def output_path(cfg: ScenarioConfig) -> Path:
    path = Path(cfg.output or f"{cfg.kind}.csv")
    env = os.environ.get(ENV_OUTPUT_DIR)
    if env:
        path = Path(env) / path.name
    return path


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(result: RunResult) -> str:
    lines = []

    class _Sink:
        def write(self, s):
            lines.append(s)

    w = csv.writer(_Sink(), lineterminator="\n")
    w.writerow([c for c, _ in result.columns])
    for row in result.rows:
        w.writerow([_cell(v) for v in row])
    return "".join(lines)


def run(cfg: ScenarioConfig, jobs: int = 1) -> tuple[Path, Path, dict]:
    """Execute one scenario; returns ``(csv_path, manifest_path, manifest)``."""
    cfg.validate()
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = RUNNERS[cfg.kind](cfg, max(1, int(jobs)))
    wall = time.perf_counter() - start
    csv_path = output_path(cfg)
    man_path = csv_path.with_suffix(".json")
    manifest = {
        "tool": "mpjc",
        "version": __version__,
        "kind": cfg.kind,
        "scenario": cfg.as_dict(),
        "engine_path": result.engine_path,
        "tolerances": {"wigner_tol": cfg.tol, "prune": PRUNE, "rtol": cfg.rtol, "atol": cfg.atol},
        "columns": [{"name": n, "description": d} for n, d in result.columns],
        "rows": len(result.rows),
        "csv": csv_path.name,
        "extra": result.extra,
        "warnings": sorted({f"{w.category.__name__}: {w.message}" for w in caught}),
        "wall_time_s": wall,
    }
    _atomic_write(csv_path, _csv_text(result))
    _atomic_write(man_path, json.dumps(manifest, indent=2, sort_keys=True, default=_cell) + "\n")
    return csv_path, man_path, manifest


# --------------------------------------------------------------------- CLI

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_field_flags(p: argparse.ArgumentParser):
    skip = {"kind", "scan", "schema_version"}
    g = p.add_argument_group("scenario")
    for f in fields(ScenarioConfig):
        if f.name in skip:
            continue
        if f.name == "strict":
            g.add_argument("--strict", action=argparse.BooleanOptionalAction, default=None,
                           help="raise instead of warn on cutoff-edge population")
            continue
        typ = {"int": int, "float": float, "str": str}.get(str(f.type), None)
        if f.name == "cutoff":
            typ = int
        if typ is None:
            typ = f.type if callable(f.type) else str
        g.add_argument(_flag(f.name), dest=f.name, type=typ, default=None)
    s = p.add_argument_group("scan")
    for f in fields(ScanSettings):
        s.add_argument(_flag(f.name), dest=f.name, type=int if str(f.type) == "int" else float, default=None)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mpjc", description="Tripartite multiphoton Jaynes-Cummings scenario runner.")
    p.add_argument("--version", action="version", version=f"mpjc {__version__}")
    sub = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in KINDS:
        sp = sub.add_parser(kind, help=f"run a {kind} scenario")
        sp.add_argument("--config", type=Path, help="scenario INI file; flags override its values")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes for scan grids")
        sp.add_argument("--dump-config", action="store_true", help="print the resolved INI and exit")
        _add_field_flags(sp)
    return p


def resolve_config(ns: argparse.Namespace) -> ScenarioConfig:
    base = load_config(ns.config) if ns.config else ScenarioConfig(kind=ns.kind)
    overrides = {f.name: getattr(ns, f.name, None) for f in fields(ScenarioConfig) if f.name not in ("scan", "schema_version")}
    overrides.update({f.name: getattr(ns, f.name, None) for f in fields(ScanSettings)})
    overrides["kind"] = ns.kind
    return base.with_overrides(**overrides)


def _fail(code: int, exc: BaseException) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("estimate", "error"):
        v = getattr(exc, attr, None)
        if isinstance(v, (int, float)):
            err[attr if attr != "error" else "error_estimate"] = v
    print(json.dumps(err, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        cfg = resolve_config(ns)
        if ns.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        if ns.dump_config:
            sys.stdout.write(cfg.to_ini())
            return EXIT_OK
        csv_path, man_path, manifest = run(cfg, ns.jobs)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, exc)
    except TruncationError as exc:
        return _fail(EXIT_TRUNCATION, exc)
    except NumericError as exc:
        return _fail(EXIT_NUMERIC, exc)
    except MPJCError as exc:
        # parameter-domain problems that slipped past config validation
        code = EXIT_NUMERIC if not isinstance(exc, ValueError) else EXIT_CONFIG
        return _fail(code, exc)
    print(json.dumps({"csv": str(csv_path), "manifest": str(man_path), "rows": manifest["rows"],
                      "engine_path": manifest["engine_path"]}, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
