"""Command-line driver: ``uwarrant {price,calibrate,alpha-paths,expect} --config run.toml``.

The config is a TOML document with sections ``capital``, ``market``,
``model``, ``numerics``, ``paths`` and ``output``.  Rates are annualized
decimals and times are in years.  Records are written as JSON (or CSV for
alpha-paths) with every float printed to 17 significant digits, so identical
configs give byte-identical output.

Exit codes: 0 ok, 2 invalid input, 3 divergent integral, 4 calibration did
not converge (or has no feasible solution).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import alpha_path, pricer
from .errors import DomainError, IntegrationError, NonConvergenceError
from .uncertainty import QuadratureRule

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_INVALID, EXIT_DIVERGENT, EXIT_NONCONVERGENT = 0, 2, 3, 4
COMMANDS = ("price", "calibrate", "alpha-paths", "expect")
THREADS_ENV = "UWARRANT_NUM_THREADS"

_SCHEMA = {
    "capital": {"n_shares", "m_warrants", "k_ratio", "j_payment"},
    "market": {"stock_price", "stock_vol", "rate", "horizon", "drift"},
    "model": {"v_t", "sigma"},
    "numerics": {
        "abs_tol", "rel_tol", "max_nodes", "order", "tol", "max_iter", "alpha_levels", "steps",
    },
    "paths": {"times", "n_times", "alphas", "method"},
    "output": {"path", "format"},
}


class ConfigError(DomainError):
    """The run configuration is malformed."""


@dataclass
class RunConfig:
    command: str
    capital: pricer.FirmCapitalStructure
    market: pricer.MarketObservables
    v_t: Optional[float] = None
    sigma: Optional[float] = None
    numerics: dict = field(default_factory=dict)
    paths: dict = field(default_factory=dict)
    out: Optional[str] = None
    fmt: Optional[str] = None
    approx_v: bool = False
    approx_sigma: bool = False

    @property
    def rule(self) -> QuadratureRule:
        keys = {"abs_tol", "rel_tol", "max_nodes", "order"}
        return QuadratureRule(**{k: v for k, v in self.numerics.items() if k in keys})

    @property
    def solver(self) -> pricer.SolverOptions:
        keys = {"tol", "max_iter"}
        return pricer.SolverOptions(**{k: v for k, v in self.numerics.items() if k in keys})


def _number(section, key, value, *, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    if integer and int(value) != value:
        raise ConfigError(f"{section}.{key} must be an integer, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite, got {value!r}")
    return int(value) if integer else float(value)


def _build(cls, section, values):
    try:
        return cls(**{k: _number(section, k, v) for k, v in values.items()})
    except TypeError as exc:
        missing = sorted(set(cls.__dataclass_fields__) - set(values))
        raise ConfigError(f"[{section}] is missing {', '.join(missing)}") from exc
    except DomainError as exc:
        raise ConfigError(f"[{section}] {exc}") from exc


def load_config(text: str, args: Optional[argparse.Namespace] = None) -> RunConfig:
    """Parse and validate a TOML run config, applying command-line overrides."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc
    command = doc.pop("command", None)
    for name, body in doc.items():
        if name not in _SCHEMA or not isinstance(body, dict):
            raise ConfigError(f"unknown config section {name!r}")
        unknown = set(body) - _SCHEMA[name]
        if unknown:
            raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(unknown))}")
    if args is not None and args.command:
        command = args.command
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}, got {command!r}")

    capital = _build(pricer.FirmCapitalStructure, "capital", doc.get("capital", {}))
    market = _build(pricer.MarketObservables, "market", doc.get("market", {}))
    model = {k: _number("model", k, v) for k, v in doc.get("model", {}).items()}
    integer_keys = {"max_nodes", "order", "max_iter", "alpha_levels", "steps"}
    numerics = {
        k: _number("numerics", k, v, integer=k in integer_keys) for k, v in doc.get("numerics", {}).items()
    }
    paths = dict(doc.get("paths", {}))
    output = doc.get("output", {})
    cfg = RunConfig(
        command=command,
        capital=capital,
        market=market,
        v_t=model.get("v_t"),
        sigma=model.get("sigma"),
        numerics=numerics,
        paths=paths,
        out=output.get("path"),
        fmt=output.get("format"),
    )
    if args is not None:
        cfg.approx_v = args.approx_v
        cfg.approx_sigma = args.approx_sigma
        for key in ("tol", "max_iter", "alpha_levels", "steps"):
            if getattr(args, key) is not None:
                cfg.numerics[key] = getattr(args, key)
        cfg.out = args.out or cfg.out
        cfg.fmt = args.format or cfg.fmt
    if cfg.fmt not in (None, "json", "csv"):
        raise ConfigError(f"output.format must be json or csv, got {cfg.fmt!r}")
    if cfg.fmt == "csv" and cfg.command != "alpha-paths":
        raise ConfigError("csv output is only available for alpha-paths")
    try:
        cfg.rule, cfg.solver
    except DomainError as exc:
        raise ConfigError(f"[numerics] {exc}") from exc
    return cfg


def _model(cfg: RunConfig):
    """Firm value and volatility: explicit, or the N*S_t and sigma_s approximations."""
    if cfg.approx_v:
        v_t = cfg.capital.n_shares * cfg.market.stock_price
    elif cfg.v_t is not None:
        v_t = cfg.v_t
    else:
        raise ConfigError("model.v_t is required unless --approx-v is given")
    if cfg.approx_sigma:
        sigma = cfg.market.stock_vol
    elif cfg.sigma is not None:
        sigma = cfg.sigma
    else:
        raise ConfigError("model.sigma is required unless --approx-sigma is given")
    if not v_t > 0:
        raise ConfigError(f"model.v_t must be > 0, got {v_t!r}")
    if not sigma >= 0:
        raise ConfigError(f"model.sigma must be >= 0, got {sigma!r}")
    return v_t, sigma


def _inputs(cfg: RunConfig, **model):
    return {"capital": asdict(cfg.capital), "market": asdict(cfg.market), "model": model}


def run_price(cfg: RunConfig) -> dict:
    v_t, sigma = _model(cfg)
    terms = pricer.pricing_terms(v_t, sigma, cfg.capital, cfg.market)
    f_w = pricer.price_warrant(v_t, sigma, cfg.capital, cfg.market, cfg.rule)
    return {
        "command": "price",
        "f_w": f_w,
        "c": terms.c,
        "alpha0": terms.alpha0,
        "discount": terms.discount,
        "inputs": _inputs(cfg, v_t=v_t, sigma=sigma),
    }


def run_calibrate(cfg: RunConfig) -> dict:
    result = pricer.calibrate(cfg.capital, cfg.market, cfg.solver, cfg.rule)
    record = {"command": "calibrate", "converged": True}
    record.update(asdict(result))
    record["brackets"] = [list(b) for b in result.brackets]
    record["inputs"] = _inputs(cfg)
    return record


def run_expect(cfg: RunConfig) -> dict:
    """Expected firm value at the horizon, E[V_T]."""
    v_t, sigma = _model(cfg)
    spec = alpha_path.GeometricLiuSpec(v_t, cfg.market.drift, sigma)
    tau = cfg.market.horizon
    value = alpha_path.expected_monotone_functional(spec, tau, lambda x: x, cfg.rule)
    return {"command": "expect", "expected_value": value, "c": spec.c(tau), "inputs": _inputs(cfg, v_t=v_t, sigma=sigma)}


def run_alpha_paths(cfg: RunConfig) -> list:
    """Rows (alpha, t, value) of the firm-value alpha-paths, sorted by (alpha, t)."""
    v_t, sigma = _model(cfg)
    spec = alpha_path.GeometricLiuSpec(v_t, cfg.market.drift, sigma)
    paths = cfg.paths
    if "times" in paths:
        times = np.asarray([_number("paths", "times", t) for t in paths["times"]])
    else:
        n_times = _number("paths", "n_times", paths.get("n_times", 11), integer=True)
        if n_times < 2:
            raise ConfigError("paths.n_times must be >= 2")
        times = np.linspace(0.0, cfg.market.horizon, n_times)
    if "alphas" in paths:
        alphas = np.asarray([_number("paths", "alphas", a) for a in paths["alphas"]])
    else:
        levels = cfg.numerics.get("alpha_levels", 999)
        if levels < 1:
            raise ConfigError("numerics.alpha_levels must be >= 1")
        alphas = np.arange(1, levels + 1) / (levels + 1)
    method = paths.get("method", "closed")
    if method not in ("closed", "rk4"):
        raise ConfigError(f"paths.method must be closed or rk4, got {method!r}")
    model = spec if method == "closed" else spec.as_ude()
    try:
        family = alpha_path.alpha_path_family(
            model, times, np.sort(alphas), x0=v_t, steps=cfg.numerics.get("steps", alpha_path.DEFAULT_STEPS)
        )
    except DomainError as exc:
        raise ConfigError(f"[paths] {exc}") from exc
    return [(p.alpha, t, v) for p in family for t, v in zip(p.times, p.values)]


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def dump_json(obj, indent: int = 0) -> str:
    """JSON with floats at 17 significant digits (json.dumps uses shortest repr)."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{k}": {dump_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[" + ", ".join(dump_json(v, indent + 1) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None:
        return {True: "true", False: "false", None: "null"}[obj]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dump_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "t", "value"])
    for alpha, t, value in rows:
        writer.writerow([_fmt_float(alpha), _fmt_float(t), _fmt_float(value)])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _thread_cap() -> Optional[int]:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uwarrant",
        description="Price and calibrate dilution-adjusted equity warrants under uncertainty theory. "
        "Rates are annualized decimals; times are in years.",
        epilog=f"Exit codes: 0 ok, 2 invalid input, 3 divergent integral, 4 no convergence. "
        f"{THREADS_ENV} caps internal parallelism (the library currently runs single-threaded).",
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS, help="overrides the config's command key")
    parser.add_argument("--config", required=True, help="TOML run configuration")
    parser.add_argument("--approx-v", action="store_true", help="use V_t = N * S_t")
    parser.add_argument("--approx-sigma", action="store_true", help="use sigma = sigma_s")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--format", choices=("json", "csv"))
    parser.add_argument("--tol", type=float, help="calibration tolerance (relative residual)")
    parser.add_argument("--max-iter", type=int, help="calibration iteration cap")
    parser.add_argument("--alpha-levels", type=int, help="number of interior alpha levels i/(L+1)")
    parser.add_argument("--steps", type=int, help="RK4 steps for alpha-paths with method = rk4")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _thread_cap()
        with open(args.config, encoding="utf-8") as fh:
            cfg = load_config(fh.read(), args)
    except (OSError, DomainError) as exc:
        print(f"uwarrant: error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    try:
        if cfg.command == "alpha-paths":
            rows = run_alpha_paths(cfg)
            if cfg.fmt == "json":
                text = dump_json({"rows": [list(r) for r in rows]}) + "\n"
            else:
                text = dump_csv(rows)
        else:
            runner = {"price": run_price, "calibrate": run_calibrate, "expect": run_expect}[cfg.command]
            text = dump_json(runner(cfg)) + "\n"
    except DomainError as exc:
        print(f"uwarrant: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except IntegrationError as exc:
        c = getattr(exc, "c", None)
        record = {"command": cfg.command, "error": "divergent", "message": str(exc), "c": c}
        _emit(dump_json(record) + "\n", cfg.out)
        print(f"uwarrant: divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    except NonConvergenceError as exc:
        record = {
            "command": cfg.command,
            "converged": False,
            "error": type(exc).__name__,
            "message": str(exc),
            "last": exc.last,
        }
        _emit(dump_json(record) + "\n", cfg.out)
        print(f"uwarrant: no convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENT
    _emit(text, cfg.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
