"""Command line entry point: run residual suites from a JSON config, dump matrices.

    refltrace verify config.json [--suite axioms --suite fused] [--seed 7] [--tol 1e-9]
    refltrace dump-matrix config.json --object T --dump T.txt
    refltrace report --format text < report.json

The report is a JSON object; rows are sorted by tag, and everything except the
``timing`` block is a deterministic function of the config.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from collections.abc import Callable
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .checks import AxiomReport, Check, gather
from .fused_r import DIFF, fuse, fused_report
from .reflection import (
    fuse_K0,
    fuse_T0,
    fused_reflection_report,
    make_reflection_data,
    reflection_report,
    transfer_matrix,
)
from .rmodel import CertificationError, _cplx, model_from_descriptor, sample_spectral, verify_axioms
from .tensor_core import IndexSet, aux, dumps
from .traces import (
    Laurent,
    classical_limit_sweep,
    coincident_dressing,
    dressing_commutant,
    quantum_trace,
    traces_report,
    verify_delta_identity,
)
from .yb_traces import yb_report

SUITES = ("axioms", "fused", "reflection", "traces", "classical", "delta")
MAX_DIM = 2**10
SCHEMA = "refltrace-report/1"

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_GUARD = 0, 1, 2, 3


class ConfigError(ValueError):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind

    def to_dict(self) -> dict:
        return {"error": self.kind, "message": str(self)}


# -- config ------------------------------------------------------------------


@dataclass
class SuiteConfig:
    model: dict = field(default_factory=lambda: {"name": "rational", "eta": 1.0})
    xi: complex = 0.7 + 0.1j
    k_choice: str = "diagonal"
    sites: int = 1
    thetas: list | None = None
    cards_N: list = field(default_factory=lambda: [1, 2])
    cards_M: list = field(default_factory=lambda: [1, 2])
    fused_max_total: int = 5
    count: int = 5
    axiom_count: int = 20
    box: float = 2.0
    seed: int = 20031
    tolerances: dict = field(default_factory=dict)
    suites: list = field(default_factory=lambda: ["all"])
    classical: dict = field(default_factory=lambda: {"etas": [1e-1, 1e-2, 1e-3], "lam": [0.4, 0.3], "n": [1, 2, 3]})
    delta: dict = field(default_factory=lambda: {"cases": 20, "low": -3, "high": 3, "truncation": 6})
    dump_lam: complex = 0.3 + 0.1j

    @classmethod
    def from_dict(cls, raw: dict) -> SuiteConfig:
        if not isinstance(raw, dict):
            raise ConfigError("config", "config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError("config", f"unknown config keys {unknown}")
        cfg = cls(**raw)
        try:
            cfg.xi = _cplx(cfg.xi)
            cfg.dump_lam = _cplx(cfg.dump_lam)
            if cfg.thetas is not None:
                cfg.thetas = [_cplx(t) for t in cfg.thetas]
            cfg.sites, cfg.count, cfg.seed = int(cfg.sites), int(cfg.count), int(cfg.seed)
        except (TypeError, ValueError) as exc:
            raise ConfigError("config", f"bad numeric field: {exc}") from exc
        if isinstance(cfg.suites, str):
            cfg.suites = [cfg.suites]
        bad = [s for s in cfg.suites if s not in (*SUITES, "all")]
        if bad:
            raise ConfigError("config", f"unknown suites {bad}; choose from {list(SUITES) + ['all']}")
        if cfg.k_choice not in ("diagonal", "identity"):
            raise ConfigError("config", f"unknown k_choice {cfg.k_choice!r}")
        if not cfg.cards_N or not cfg.cards_M or min(cfg.cards_N + cfg.cards_M) < 1:
            raise ConfigError("config", "card ranges must be non-empty lists of positive integers")
        if cfg.count < 1 or cfg.sites < 0:
            raise ConfigError("config", "count must be positive and sites non-negative")
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> SuiteConfig:
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"{path} is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def selected(self) -> list[str]:
        """Selected suites in dependency order."""
        chosen = set(SUITES) if "all" in self.suites else set(self.suites)
        return [s for s in SUITES if s in chosen]

    def guard(self, local_dim: int = 2) -> None:
        """Refuse configs whose largest operator would exceed ``MAX_DIM``."""
        spaces = max(self.cards_N) + max(self.cards_M) + self.sites
        total = local_dim**spaces
        if total > MAX_DIM:
            raise ConfigError(
                "dimension-guard",
                f"card(N)={max(self.cards_N)} + card(M')={max(self.cards_M)} + sites={self.sites} "
                f"gives dimension {total} > {MAX_DIM}",
            )
        fused = local_dim ** (self.fused_max_total + 1)
        if "fused" in self.selected() and fused > MAX_DIM:
            raise ConfigError("dimension-guard", f"fused_max_total={self.fused_max_total} gives dimension {fused} > {MAX_DIM}")

    def echo(self) -> dict:
        return _jsonable(asdict(self))


# -- report --------------------------------------------------------------------


@dataclass
class RunReport:
    config: dict
    rows: list[Check] = field(default_factory=list)
    suites: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_dict(self, timing: bool = True) -> dict:
        rows = sorted(self.rows, key=lambda r: (r.tag, r.name))
        out = {
            "schema": SCHEMA,
            "config": self.config,
            "passed": self.passed,
            "summary": {"rows": len(rows), "failed": sum(not r.passed for r in rows)},
            "suites": self.suites,
            "rows": [dict(r.to_dict(), suite=self.suites.get(r.tag, "")) for r in rows],
            "constants": _jsonable(self.constants),
        }
        if timing:
            out["timing"] = self.timing
        return out

    @classmethod
    def from_dict(cls, d: dict) -> RunReport:
        if d.get("schema") != SCHEMA:
            raise ConfigError("report", f"unsupported report schema {d.get('schema')!r}")
        rows = [Check.from_dict(r) for r in d["rows"]]
        return cls(d["config"], rows, d.get("suites", {}), d.get("constants", {}), d.get("timing", {}))


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def emit(report: RunReport, fmt: str = "json", timing: bool = True) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(timing=timing), indent=2, sort_keys=True, allow_nan=True) + "\n"
    if fmt == "text":
        return _text_table(report)
    raise ValueError(f"unknown format {fmt!r}")


def _text_table(report: RunReport) -> str:
    head = f"{'tag':<34} {'suite':<11} {'n':>3} {'residual':>11} {'tol':>9}  status"
    lines = [head, "-" * len(head)]
    for r in sorted(report.rows, key=lambda r: (r.tag, r.name)):
        status = "PASS" if r.passed else "FAIL"
        suite = report.suites.get(r.tag, "")
        lines.append(f"{r.tag[:34]:<34} {suite:<11} {r.samples:>3} {r.residual:>11.3e} {r.tol:>9.1e}  {status}")
    failed = sum(not r.passed for r in report.rows)
    lines.append("-" * len(head))
    lines.append(f"{len(report.rows)} rows, {failed} failed")
    return "\n".join(lines) + "\n"


# -- suites ----------------------------------------------------------------------


def _model(cfg: SuiteConfig):
    return model_from_descriptor(cfg.model)


def _data(cfg: SuiteConfig, model):
    return make_reflection_data(model, cfg.xi, cfg.sites, cfg.thetas, cfg.k_choice)


def _suite_axioms(cfg: SuiteConfig, model) -> AxiomReport:
    samples = sample_spectral(model, cfg.axiom_count, seed=cfg.seed, box=cfg.box)
    return verify_axioms(model, samples)


def _suite_fused(cfg: SuiteConfig, model) -> AxiomReport:
    return fused_report(model, cfg.fused_max_total, count=cfg.count, seed=cfg.seed + 1)


def _suite_reflection(cfg: SuiteConfig, model) -> AxiomReport:
    data = _data(cfg, model)
    rep = reflection_report(data, count=2 * cfg.count, seed=cfg.seed + 2)
    cards = [(n, k) for n in cfg.cards_N for k in cfg.cards_M]
    rep.extend(fused_reflection_report(data, cards, count=cfg.count, seed=cfg.seed + 3))
    return rep


def _suite_traces(cfg: SuiteConfig, model) -> AxiomReport:
    data = _data(cfg, model)
    rep = yb_report(model, data.quantum, data.thetas, seed=cfg.seed + 4)
    rep.extend(traces_report(data, seed=cfg.seed + 5, count=max(1, cfg.count // 2)))
    N2 = IndexSet.of(["n0", "n1"], cfg.dump_lam, model.local_dim)
    rep.constants["dressing_commutant_card2"] = dressing_commutant(model, N2)
    rep.constants["coincident_dressing"] = coincident_dressing(model, N2).descriptor
    return rep


def _suite_classical(cfg: SuiteConfig, model) -> AxiomReport:
    c = cfg.classical
    lam = _cplx(c.get("lam", [0.4, 0.3]))
    rows, sweeps = [], {}
    for n in c.get("n", [1, 2, 3]):
        r = classical_limit_sweep(int(n), lam, c.get("etas", [1e-1, 1e-2, 1e-3]), cfg.xi)
        # a slope below 0.9 counts as failure: residual is the shortfall from 1
        rows.append(gather(f"classlim[{n}]", "|H_N(eta) - Tr t^n| = O(eta): 1 - fitted slope", [max(0.0, 1 - r.slope)], 0.1))
        sweeps[str(n)] = r.to_dict()
    return AxiomReport(rows, {"classical_sweeps": sweeps})


def _suite_delta(cfg: SuiteConfig, model) -> AxiomReport:
    c = cfg.delta
    rng = np.random.default_rng(cfg.seed + 6)
    rs = []
    for _ in range(int(c.get("cases", 20))):
        f = Laurent.random(rng, c.get("low", -3), c.get("high", 3))
        g = Laurent.random(rng, c.get("low", -3), c.get("high", 3))
        rs.append(verify_delta_identity(f, g, int(c.get("truncation", 6))))
    return AxiomReport([gather("d", "delta(l1/l2) f(l1) g(l2) = f(l2) g(l1) delta, coefficientwise", rs, 1e-14)], {})


SUITE_RUNNERS: dict[str, Callable[[SuiteConfig, object], AxiomReport]] = {
    "axioms": _suite_axioms,
    "fused": _suite_fused,
    "reflection": _suite_reflection,
    "traces": _suite_traces,
    "classical": _suite_classical,
    "delta": _suite_delta,
}

# suites that can run without a certified model
_MODEL_FREE = {"classical", "delta"}


def _apply_tolerances(rows: list[Check], overrides: dict, global_tol: float | None) -> None:
    for r in rows:
        base = r.tag.split("[", 1)[0]
        if r.tag in overrides:
            r.tol = float(overrides[r.tag])
        elif base in overrides:
            r.tol = float(overrides[base])
        elif global_tol is not None:
            r.tol = float(global_tol)


def run(cfg: SuiteConfig, global_tol: float | None = None) -> RunReport:
    """Run the selected suites in dependency order; failures become rows, never exceptions."""
    cfg.guard()
    report = RunReport(cfg.echo())
    selected = cfg.selected()
    if not selected:
        return report
    model, model_error = None, None
    if any(s not in _MODEL_FREE for s in selected):
        try:
            model = _model(cfg)
        except CertificationError as exc:
            model_error = exc
            report.rows.append(Check("certify", f"model {exc.model} certification ({exc.tag})", exc.residual, 0.0, note=str(exc)))
            report.suites["certify"] = "axioms"
        except ValueError as exc:
            raise ConfigError("config", f"bad model descriptor: {exc}") from exc
    if model is not None:
        report.constants["model"] = {"name": model.name, "eta": model.eta, "rho": model.rho, "V": model.V, "M": model.M}
    for name in selected:
        if model is None and name not in _MODEL_FREE:
            report.rows.append(Check(f"{name}:skipped", "suite skipped: model did not certify", float("inf"), 0.0, 0, note=str(model_error)))
            report.suites[f"{name}:skipped"] = name
            continue
        t0 = time.perf_counter()
        try:
            rep = SUITE_RUNNERS[name](cfg, model)
        except CertificationError as exc:
            rep = AxiomReport([Check(f"{name}:certify", f"{exc.tag} certification", exc.residual, 0.0, note=str(exc))], {})
        report.timing[name] = round(time.perf_counter() - t0, 6)
        _apply_tolerances(rep.rows, cfg.tolerances, global_tol)
        for r in rep.rows:
            if r.tag in report.suites:
                raise RuntimeError(f"duplicate row tag {r.tag!r}")
            report.suites[r.tag] = name
        report.rows.extend(rep.rows)
        if rep.constants:
            report.constants[name] = rep.constants
    return report


# -- matrix dumps ------------------------------------------------------------------

OBJECTS = ("R", "fusedR", "K", "Kplus", "T", "t", "T0", "K0", "H", "H-dressed")


def build_object(cfg: SuiteConfig, name: str):
    model = _model(cfg)
    lam, d = cfg.dump_lam, model.local_dim
    n = max(cfg.cards_N)
    if name == "R":
        return model.R(aux("1", d, lam), aux("2", d, 0), lam)
    if name == "fusedR":
        N = IndexSet.of([f"n{i}" for i in range(n)], [lam + 0.1 * i for i in range(n)], d)
        Mp = IndexSet.of([f"m{i}" for i in range(max(cfg.cards_M))], -0.2, d)
        return fuse(model, N, Mp, DIFF).op
    data = _data(cfg, model)
    a = aux("a", d, lam)
    if name == "K":
        return data.K_op(a)
    if name == "Kplus":
        return data.K_plus_op(a)
    if name == "T":
        return data.T(a)
    if name == "t":
        return transfer_matrix(data, lam)
    N = IndexSet.of([f"n{i}" for i in range(n)], [lam + 0.15 * i for i in range(n)], d)
    if name == "T0":
        return fuse_T0(data, N).op
    if name == "K0":
        return fuse_K0(data, N).op
    if name == "H":
        return quantum_trace(data, N).op
    if name == "H-dressed":
        Nc = N.with_spectral(lam)
        return quantum_trace(data, Nc, coincident_dressing(model, Nc)).op
    raise ConfigError("object", f"unknown object {name!r}; choose from {list(OBJECTS)}")


# -- argparse -------------------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="refltrace", description="Residual suites for reflection algebras and their commuting traces.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the suites selected by a config")
    v.add_argument("config")
    v.add_argument("--suite", action="append", choices=[*SUITES, "all", "none"], help="override the config suites (repeatable)")
    v.add_argument("--seed", type=int)
    v.add_argument("--tol", type=float, help="tolerance for every row not covered by config overrides")
    v.add_argument("--dump", help="also write the JSON report to this path")
    v.add_argument("--format", choices=("json", "text"), default="json")
    v.add_argument("--no-timing", action="store_true", help="leave the timing block out of the JSON report")

    d = sub.add_parser("dump-matrix", help="write one operator in the text dump format")
    d.add_argument("config")
    d.add_argument("--object", required=True, choices=OBJECTS)
    d.add_argument("--dump", required=True, help="output path, '-' for stdout")
    d.add_argument("--seed", type=int)

    r = sub.add_parser("report", help="re-render a saved JSON report")
    r.add_argument("--format", choices=("json", "text"), default="text")
    r.add_argument("--input", default="-", help="saved report path, '-' for stdin")
    return p


def _error(exc: ConfigError) -> int:
    sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
    return EXIT_GUARD if exc.kind == "dimension-guard" else EXIT_CONFIG


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "report":
            text = sys.stdin.read() if args.input == "-" else Path(args.input).read_text()
            try:
                rep = RunReport.from_dict(json.loads(text))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ConfigError("report", f"cannot parse report: {exc}") from exc
            sys.stdout.write(emit(rep, args.format))
            return EXIT_OK if rep.passed else EXIT_FAIL

        cfg = SuiteConfig.load(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.command == "dump-matrix":
            try:
                op = build_object(cfg, args.object)
            except CertificationError as exc:
                raise ConfigError("certification", str(exc)) from exc
            text = dumps(op)
            if args.dump == "-":
                sys.stdout.write(text)
            else:
                Path(args.dump).write_text(text)
            return EXIT_OK

        if args.suite:
            cfg.suites = [] if args.suite == ["none"] else [s for s in args.suite if s != "none"]
        rep = run(cfg, args.tol)
        if args.dump:
            Path(args.dump).write_text(emit(rep, "json", timing=not args.no_timing))
        sys.stdout.write(emit(rep, args.format, timing=not args.no_timing))
        return EXIT_OK if rep.passed else EXIT_FAIL
    except ConfigError as exc:
        return _error(exc)


if __name__ == "__main__":
    sys.exit(main())
