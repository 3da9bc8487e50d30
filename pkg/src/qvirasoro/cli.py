"""Command-line surface: run verification suites and evaluate
individual special functions / correlators.

Usage:

    qvirasoro verify --suite all --q 0.49 --t 0.7 --json
    qvirasoro verify --suite defining-relation --q 0.7 --t 0.3 \
        --degree 5 --window 3 --json
    qvirasoro eval phi21 --a 0.3 --b 0.5 --c 0.8 --q 0.5 --z 0.2

Configuration precedence: command-line flags override environment
variables (prefix ``QVIR_``, e.g. ``QVIR_DEGREE=5``), which override a
``--config`` file (flat ``key = value`` lines mirroring flag names),
which override built-in defaults.

Exit status: 0 all checks passed; 1 at least one failed; 2 none failed
but at least one was inconclusive; 3 configuration error.

JSON records have exactly the fields {identity, pass, residual,
tolerance, worst_location, params:{q, t, ell, k, L, r, seed},
truncation:{degree, window}, runtime_ms}; ``seed`` rides inside
``params`` because it parameterizes randomized probes the same way the
deformation numbers do.  Identical configuration (including seed) gives
byte-identical output apart from runtime_ms.  An inconclusive check
reports ``pass: false`` with residual Infinity and is distinguished by
the exit status.

The bracket period ``r`` defaults to the admissible value 1/beta
(beta = log t / log q), the unique period at which the elliptic
connection identity holds; pass ``--r`` (or ``r = auto`` in a config
file) to override or restore that choice.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import correlators, qspecial, relations
from .errors import ConfigError, QVirasoroError
from .qspecial import QParams
from .report import CheckReport

DEFAULTS = {
    "q": 0.49,
    "t": 0.7,
    "ell": 1,
    "k": 1,
    "L": 0.5,
    "r": None,
    "degree": 4,
    "window": 4,
    "tol": None,
    "seed": 12345,
    "threads": 1,
    "suite": ["all"],
    "json": False,
    "csv": False,
}

_INT_KEYS = {"ell", "k", "degree", "window", "seed", "threads"}
_FLOAT_KEYS = {"q", "t", "L", "r", "tol"}
_BOOL_KEYS = {"json", "csv"}


@dataclass(frozen=True)
class SuiteConfig:
    """Resolved run configuration for the verification runner."""

    q: float
    t: float
    ell: int
    k: int
    L: float
    r: float | None
    degree: int
    window: int
    tol: float | None
    seed: int
    threads: int
    suites: tuple[str, ...]

    def __post_init__(self) -> None:
        if not (0.0 < self.q < 1.0 and 0.0 < self.t < 1.0):
            raise ConfigError("q and t must lie strictly between 0 and 1")
        if abs(self.q - self.t) < 1e-12:
            raise ConfigError("q = t is excluded (the p = 1 degeneration)")
        if self.r is None:
            # admissible bracket period: beta = log t / log q, r = 1/beta
            object.__setattr__(self, "r", math.log(self.q) / math.log(self.t))
        if self.r <= 0:
            raise ConfigError("bracket period r must be positive")
        if self.degree < self.window:
            raise ConfigError("degree cap must be at least the mode window")
        if self.degree < 0 or self.window < 0:
            raise ConfigError("degree and window must be non-negative")
        if self.ell < 0 or self.k < 0 or self.ell + self.k == 0:
            raise ConfigError("vertex labels need ell, k >= 0, not both zero")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    @property
    def params(self) -> QParams:
        return QParams(self.q, self.t)


# ---------------------------------------------------------------------------
# Suite registry


def _tol(cfg: SuiteConfig, default: float) -> float:
    return cfg.tol if cfg.tol is not None else default


def _suite_defining(cfg: SuiteConfig) -> list[CheckReport]:
    return [
        relations.check_defining_relation(
            cfg.params,
            degree_cap=cfg.degree,
            max_mode=cfg.window,
            tolerance=_tol(cfg, 1e-8),
        )
    ]


def _suite_screening(cfg: SuiteConfig) -> list[CheckReport]:
    return [
        relations.check_screening_relation(
            cfg.params, +1, cfg.degree, cfg.window, tolerance=_tol(cfg, 1e-8)
        )
    ]


def _suite_screening_mirror(cfg: SuiteConfig) -> list[CheckReport]:
    return [
        relations.check_screening_relation(
            cfg.params, -1, cfg.degree, cfg.window, tolerance=_tol(cfg, 1e-8)
        )
    ]


def _suite_vertex_exchange(cfg: SuiteConfig) -> list[CheckReport]:
    ell = max(cfg.ell, 1)
    return [
        relations.check_vertex_exchange(
            ell, cfg.params, v, cfg.degree, cfg.window, tolerance=_tol(cfg, 1e-8)
        )
        for v in ("plain", "theta", "mirror")
    ]


def _suite_current_vertex(cfg: SuiteConfig) -> list[CheckReport]:
    return [
        relations.check_current_vertex_exchange(
            max(cfg.ell, 1),
            cfg.params,
            cfg.degree,
            cfg.window,
            tolerance=_tol(cfg, 1e-8),
        )
    ]


def _suite_adjoint(cfg: SuiteConfig) -> list[CheckReport]:
    return [
        relations.check_adjoint_shift(
            max(cfg.ell, 1),
            cfg.params,
            degree_cap=cfg.degree,
            tolerance=_tol(cfg, 1e-8),
        )
    ]


def _suite_rewrite(cfg: SuiteConfig) -> list[CheckReport]:
    return [
        relations.check_exchange_rewrite(
            max(cfg.ell, 1),
            cfg.params,
            cfg.degree,
            cfg.window,
            tolerance=_tol(cfg, 1e-8),
        )
    ]


def _suite_composite(cfg: SuiteConfig) -> list[CheckReport]:
    return [
        relations.check_composite_exchange(
            max(cfg.ell, 1),
            max(cfg.k, 1),
            cfg.params,
            cfg.degree,
            cfg.window,
            tolerance=_tol(cfg, 1e-8),
        )
    ]


def _suite_fusion(cfg: SuiteConfig) -> list[CheckReport]:
    return [
        relations.check_fusion(max(cfg.ell, 1), cfg.params, tolerance=_tol(cfg, 1e-10))
    ]


def _suite_argument_shift(cfg: SuiteConfig) -> list[CheckReport]:
    return [
        relations.check_argument_shift(
            max(cfg.ell, 1), cfg.params, tolerance=_tol(cfg, 1e-10)
        )
    ]


def _suite_delta(cfg: SuiteConfig) -> list[CheckReport]:
    rng = np.random.default_rng(cfg.seed)
    return [relations.check_delta_identity(rng, tolerance=_tol(cfg, 1e-10))]


def _suite_qspecial(cfg: SuiteConfig) -> list[CheckReport]:
    return [relations.check_qspecial(tolerance=_tol(cfg, 1e-12))]


def _suite_two_point(cfg: SuiteConfig) -> list[CheckReport]:
    return [
        correlators.check_two_point(
            cfg.params, max(cfg.ell, 1), tolerance=_tol(cfg, 1e-12)
        )
    ]


def _suite_four_point(cfg: SuiteConfig) -> list[CheckReport]:
    return [
        correlators.check_four_point(
            cfg.params, max(cfg.ell, 1), cfg.L, tolerance=_tol(cfg, 1e-8)
        )
    ]


def _suite_pseudo_constant(cfg: SuiteConfig) -> list[CheckReport]:
    return [
        correlators.check_pseudo_constant(
            cfg.params, max(cfg.ell, 1), tolerance=_tol(cfg, 1e-10)
        )
    ]


def _suite_connection(cfg: SuiteConfig) -> list[CheckReport]:
    return [
        correlators.check_connection_formula(
            cfg.params,
            max(cfg.ell, 1),
            cfg.L,
            cfg.r,
            tolerance=_tol(cfg, 1e-6),
        )
    ]


SUITES = {
    "defining-relation": _suite_defining,
    "screening": _suite_screening,
    "screening-mirror": _suite_screening_mirror,
    "vertex-exchange": _suite_vertex_exchange,
    "current-vertex-exchange": _suite_current_vertex,
    "adjoint-shift": _suite_adjoint,
    "exchange-rewrite": _suite_rewrite,
    "composite-exchange": _suite_composite,
    "fusion": _suite_fusion,
    "argument-shift": _suite_argument_shift,
    "delta-identity": _suite_delta,
    "qspecial": _suite_qspecial,
    "two-point": _suite_two_point,
    "four-point": _suite_four_point,
    "pseudo-constant": _suite_pseudo_constant,
    "connection": _suite_connection,
}


# ---------------------------------------------------------------------------
# Configuration resolution


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key == "r" and raw.lower() in ("auto", "none"):
        return None
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key in _BOOL_KEYS:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"boolean key {key!r} got {raw!r}")
    if key == "suite":
        return [s.strip() for s in raw.split(",") if s.strip()]
    raise ConfigError(f"unknown configuration key {key!r}")


def _read_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" in line:
                    key, _, raw = line.partition("=")
                elif " " in line:
                    key, _, raw = line.partition(" ")
                else:
                    raise ConfigError(
                        f"{path}:{lineno}: expected 'key = value', got {line!r}"
                    )
                out[key.strip()] = _parse_value(key.strip(), raw)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return out


def _read_env() -> dict:
    out = {}
    for key in DEFAULTS:
        env = os.environ.get(f"QVIR_{key.upper()}")
        if env is not None:
            out[key] = _parse_value(key, env)
    return out


def _resolve(args: argparse.Namespace) -> tuple[SuiteConfig, str]:
    merged = dict(DEFAULTS)
    if args.config:
        merged.update(_read_config_file(args.config))
    merged.update(_read_env())
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None and flag is not False:
            merged[key] = flag
    suites = merged["suite"]
    if isinstance(suites, str):
        suites = [suites]
    expanded: list[str] = []
    for s in suites:
        expanded.extend(x.strip() for x in str(s).split(",") if x.strip())
    if "all" in expanded:
        expanded = list(SUITES)
    unknown = [s for s in expanded if s not in SUITES]
    if unknown:
        raise ConfigError(
            f"unknown suite(s) {', '.join(unknown)}; valid names: "
            + ", ".join(sorted(SUITES)) + ", all"
        )
    cfg = SuiteConfig(
        q=float(merged["q"]),
        t=float(merged["t"]),
        ell=int(merged["ell"]),
        k=int(merged["k"]),
        L=float(merged["L"]),
        r=None if merged["r"] is None else float(merged["r"]),
        degree=int(merged["degree"]),
        window=int(merged["window"]),
        tol=None if merged["tol"] is None else float(merged["tol"]),
        seed=int(merged["seed"]),
        threads=int(merged["threads"]),
        suites=tuple(expanded),
    )
    fmt = "json" if merged["json"] else ("csv" if merged["csv"] else "text")
    return cfg, fmt


# ---------------------------------------------------------------------------
# Report emission


def _record(rep: CheckReport, cfg: SuiteConfig) -> dict:
    return {
        "identity": rep.identity,
        "pass": rep.passed,
        "residual": rep.residual,
        "tolerance": rep.tolerance,
        "worst_location": rep.worst_location,
        "params": {
            "q": cfg.q,
            "t": cfg.t,
            "ell": cfg.ell,
            "k": cfg.k,
            "L": cfg.L,
            "r": cfg.r,
            "seed": cfg.seed,
        },
        "truncation": {"degree": cfg.degree, "window": cfg.window},
        "runtime_ms": rep.runtime_ms,
    }


def emit_report(reports: list[CheckReport], cfg: SuiteConfig, fmt: str) -> str:
    """Serialize reports; JSON/CSV are deterministic apart from
    runtime_ms."""
    if fmt == "json":
        return json.dumps([_record(r, cfg) for r in reports], indent=2)
    if fmt == "csv":
        buf = io.StringIO()
        cols = [
            "identity",
            "pass",
            "residual",
            "tolerance",
            "worst_location",
            "q",
            "t",
            "ell",
            "k",
            "L",
            "r",
            "seed",
            "degree",
            "window",
            "runtime_ms",
        ]
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(cols)
        for r in reports:
            rec = _record(r, cfg)
            flat = {**rec, **rec["params"], **rec["truncation"]}
            writer.writerow([repr(flat[c]) if isinstance(flat[c], float) else flat[c] for c in cols])
        return buf.getvalue().rstrip("\n")
    lines = [r.summary_line() for r in reports]
    n_pass = sum(r.passed for r in reports)
    n_inc = sum(r.status == "inconclusive" for r in reports)
    n_fail = len(reports) - n_pass - n_inc
    lines.append(
        f"{len(reports)} checks: {n_pass} passed, {n_fail} failed, "
        f"{n_inc} inconclusive"
    )
    return "\n".join(lines)


def run(cfg: SuiteConfig) -> list[CheckReport]:
    """Execute the selected suites; report order follows suite order
    regardless of thread scheduling."""
    jobs = [SUITES[name] for name in cfg.suites]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            futures = [pool.submit(job, cfg) for job in jobs]
            chunks = [f.result() for f in futures]
    else:
        chunks = [job(cfg) for job in jobs]
    return [rep for chunk in chunks for rep in chunk]


def _exit_status(reports: list[CheckReport]) -> int:
    if any(r.status == "fail" for r in reports):
        return 1
    if any(r.status == "inconclusive" for r in reports):
        return 2
    return 0


# ---------------------------------------------------------------------------
# eval subcommand


def _eval_functions():
    def need(ns, *names):
        vals = []
        for n in names:
            v = getattr(ns, n)
            if v is None:
                raise ConfigError(f"eval function missing required --{n}")
            vals.append(v)
        return vals

    def f_phi21(ns):
        a, b, c, q, z = need(ns, "a", "b", "c", "q", "z")
        return qspecial.phi21(a, b, c, q, z)

    def f_qpoch(ns):
        a, q = need(ns, "a", "q")
        n = ns.n
        if n is None:
            return qspecial.qpoch_inf(a, q)
        return qspecial.qpoch(a, q, int(n))

    def f_gamma(ns):
        x, q = need(ns, "x", "q")
        return qspecial.gamma_q(x, q)

    def f_beta(ns):
        a, b, q = need(ns, "a", "b", "q")
        return qspecial.beta_q(a, b, q)

    def f_theta(ns):
        z, q = need(ns, "z", "q")
        return qspecial.theta_q(z, q)

    def f_bracket(ns):
        u, q, r = need(ns, "u", "q", "r")
        bp = qspecial.BracketParams(q=q, ell=int(ns.ell or 1), r=r)
        return qspecial.bracket(u, bp)

    def _cp(ns):
        q, t = need(ns, "q", "t")
        return correlators.CorrelatorParams(
            params=QParams(q, t),
            ell=int(ns.ell or 1),
            L=ns.L if ns.L is not None else 1.0,
            r=ns.r,
        )

    def f_two_point(ns):
        z, w = need(ns, "z", "w")
        return correlators.two_point(z, w, _cp(ns))

    def f_screening_wave(ns):
        (x,) = need(ns, "x")
        return correlators.screening_wave(x, _cp(ns))

    def f_four_point(ns):
        z, w = need(ns, "z", "w")
        branch = ns.branch or "plus"
        method = ns.method or "closed"
        fn = (
            correlators.four_point_closed
            if method == "closed"
            else correlators.four_point_jackson
        )
        return fn(branch, z, w, _cp(ns))

    return {
        "phi21": f_phi21,
        "qpoch": f_qpoch,
        "gamma-q": f_gamma,
        "beta-q": f_beta,
        "theta-q": f_theta,
        "bracket": f_bracket,
        "two-point": f_two_point,
        "screening-wave": f_screening_wave,
        "four-point": f_four_point,
    }


EVAL_FUNCTIONS = _eval_functions()


# ---------------------------------------------------------------------------
# Entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(3)


def _build_parser() -> _Parser:
    parser = _Parser(prog="qvirasoro", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser(
        "verify", help="run verification suites", parents=[], add_help=True
    )
    v.add_argument("--q", type=float, default=None)
    v.add_argument("--t", type=float, default=None)
    v.add_argument("--ell", type=int, default=None)
    v.add_argument("--k", type=int, default=None)
    v.add_argument("--L", type=float, default=None)
    v.add_argument("--r", type=float, default=None)
    v.add_argument("--degree", type=int, default=None, help="basis degree cap")
    v.add_argument("--window", type=int, default=None, help="mode window")
    v.add_argument("--tol", type=float, default=None, help="override tolerances")
    v.add_argument(
        "--suite",
        action="append",
        default=None,
        help="suite name (repeatable or comma-separated); 'all' runs everything",
    )
    v.add_argument("--json", action="store_true", default=False)
    v.add_argument("--csv", action="store_true", default=False)
    v.add_argument("--config", type=str, default=None, help="flat key=value file")
    v.add_argument("--seed", type=int, default=None)
    v.add_argument("--threads", type=int, default=None)

    e = sub.add_parser("eval", help="evaluate a single function")
    e.add_argument("function", choices=sorted(EVAL_FUNCTIONS))
    for flag in ("a", "b", "c", "q", "t", "z", "w", "x", "u", "L", "r"):
        e.add_argument(f"--{flag}", type=float, default=None)
    e.add_argument("--n", type=int, default=None)
    e.add_argument("--ell", type=int, default=None)
    e.add_argument("--branch", choices=("plus", "minus"), default=None)
    e.add_argument("--method", choices=("closed", "jackson"), default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "verify":
            cfg, fmt = _resolve(args)
            reports = run(cfg)
            print(emit_report(reports, cfg, fmt))
            return _exit_status(reports)
        value = EVAL_FUNCTIONS[args.function](args)
        print(f"{value:.17g}")
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except QVirasoroError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
