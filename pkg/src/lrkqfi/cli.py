"""Command-line entry point: sweeps, fits, oracle checks, predictions, kernel checks.

Exit codes: 0 ok, 1 invalid input, 2 I/O error, 3 fit failure, 4 tolerance failure.
Option precedence is flag > ``--config`` JSON > built-in default.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotics import predict_delta_scaling
from .chain import ChainParams, Channel, DecayKernel, KernelKind, validate_kernel
from .errors import DomainError, FitError, ResourceError, SingularModeError
from .fitting import fit_polylog, fit_power
from .oracle import MAX_SITES, oracle_equivalence
from .qfi import ProbeSpec, qfi

log = logging.getLogger("lrkqfi")

SCHEMA_VERSION = 1
CSV_FIELDS = ("N", "alpha", "kernel", "channel", "J", "mu", "delta", "T", "controlled", "qfi", "gamma")

EXIT_OK, EXIT_INPUT, EXIT_IO, EXIT_FIT, EXIT_TOL = 0, 1, 2, 3, 4

DEFAULTS = {
    "channel": "Delta",
    "kernel": "power",
    "alpha": 0.0,
    "Q": 1,
    "J": 1.0,
    "mu": 1.0,
    "delta": 1.0,
    "T": 1.0,
    "controlled": False,
    "format": "csv",
    "out": "-",
    "seed": 0,
    "model": "power",
    "timing": False,
}


class UsageError(Exception):
    pass


class OutputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def fmt_float(x):
    """17 significant digits, scientific, independent of locale."""
    return format(float(x), ".16e")


@dataclass(frozen=True)
class SweepSpec:
    channel: Channel
    N_values: tuple
    kernel: DecayKernel
    J: float = 1.0
    mu: float = 1.0
    delta: float = 1.0
    T: float = 1.0
    controlled: bool = False

    def __post_init__(self):
        object.__setattr__(self, "channel", Channel.parse(self.channel))
        Ns = tuple(self.N_values)
        if not Ns:
            raise DomainError("N_values: must not be empty")
        for n in Ns:
            if int(n) != n or n < 2 or int(n) % 2:
                raise DomainError(f"N_values: every N must be an even integer >= 2, got {n}")
        if any(b <= a for a, b in zip(Ns, Ns[1:])):
            raise DomainError("N_values: must be strictly increasing")
        object.__setattr__(self, "N_values", tuple(int(n) for n in Ns))
        for name in ("J", "mu", "delta", "T"):
            try:
                value = float(getattr(self, name))
            except (TypeError, ValueError):
                raise DomainError(f"{name}: not a number") from None
            if not np.isfinite(value):
                raise DomainError(f"{name}: must be finite")
            object.__setattr__(self, name, value)
        if self.T < 0:
            raise DomainError("T: must be >= 0")
        if self.kernel.max_separation < max(self.N_values) // 2:
            raise DomainError(f"kernel: table too short for N={max(self.N_values)}")


@dataclass(frozen=True)
class RunRecord:
    N: int
    alpha: float
    kernel: str
    channel: str
    J: float
    mu: float
    delta: float
    T: float
    controlled: bool
    qfi: float
    gamma: float | None = None
    wall_time_ms: int | None = None
    schema_version: int = SCHEMA_VERSION

    def csv_row(self, timing=False):
        row = {
            "N": str(self.N),
            "alpha": fmt_float(self.alpha),
            "kernel": self.kernel,
            "channel": self.channel,
            "J": fmt_float(self.J),
            "mu": fmt_float(self.mu),
            "delta": fmt_float(self.delta),
            "T": fmt_float(self.T),
            "controlled": "true" if self.controlled else "false",
            "qfi": fmt_float(self.qfi),
            "gamma": "" if self.gamma is None else fmt_float(self.gamma),
        }
        if timing:
            row["wall_time_ms"] = str(self.wall_time_ms)
        return row

    def json_obj(self, timing=False):
        obj = dataclasses.asdict(self)
        if not timing:
            obj.pop("wall_time_ms")
        return obj

    @classmethod
    def from_row(cls, row):
        try:
            gamma = row.get("gamma", "")
            wall = row.get("wall_time_ms")
            return cls(
                N=int(row["N"]),
                alpha=float(row["alpha"]),
                kernel=row["kernel"],
                channel=Channel.parse(row["channel"]).value,
                J=float(row["J"]),
                mu=float(row["mu"]),
                delta=float(row["delta"]),
                T=float(row["T"]),
                controlled=row["controlled"].strip().lower() in ("true", "1", "yes"),
                qfi=float(row["qfi"]),
                gamma=float(gamma) if gamma not in ("", None) else None,
                wall_time_ms=int(wall) if wall not in ("", None) else None,
            )
        except KeyError as exc:
            raise DomainError(f"missing column {exc.args[0]!r}") from None
        except ValueError as exc:
            raise DomainError(f"malformed row: {exc}") from None


def _worker_count():
    raw = os.environ.get("LRK_THREADS")
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"LRK_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise DomainError(f"LRK_THREADS must be a positive integer, got {raw!r}")
    return n


def run_sweep(spec: SweepSpec) -> list[RunRecord]:
    """One record per N, in the order of ``spec.N_values``."""
    probe = ProbeSpec(spec.channel, spec.T)

    def one(N):
        start = time.perf_counter()
        params = ChainParams(spec.J, spec.mu, spec.delta, N, spec.kernel)
        res = qfi(params, probe, spec.controlled)
        elapsed = int(round((time.perf_counter() - start) * 1000))
        return RunRecord(
            N, spec.kernel.alpha, spec.kernel.describe(), spec.channel.value,
            spec.J, spec.mu, spec.delta, spec.T, spec.controlled, res.value, res.gamma, elapsed,
        )

    workers = min(_worker_count(), len(spec.N_values))
    if workers <= 1:
        return [one(N) for N in spec.N_values]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        # map yields in submission order, so rows stay deterministic
        return list(pool.map(one, spec.N_values))


# --- I/O helpers ---------------------------------------------------------------------------


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {out}: {exc}") from exc


def _dump_json(obj):
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def records_to_csv(records, timing=False):
    buf = io.StringIO()
    fields = list(CSV_FIELDS) + (["wall_time_ms"] if timing else [])
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow(rec.csv_row(timing))
    return buf.getvalue()


def read_records(path) -> list[RunRecord]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise OutputError(f"cannot read {path}: {exc}") from exc
    return [RunRecord.from_row(r) for r in rows]


def parse_n_values(text) -> tuple:
    """``"4,8,16"`` or inclusive ``"a:b:step"``."""
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise DomainError(f"N_values: range must be a:b:step with step > 0, got {text!r}")
            a, b, step = parts
            return tuple(range(a, b + 1, step))
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise DomainError(f"N_values: cannot parse {text!r}") from None


def parse_kernel(descriptor, alpha, Q=1) -> DecayKernel:
    descriptor = str(descriptor)
    if descriptor.startswith("table:"):
        path = descriptor[len("table:"):]
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise OutputError(f"cannot read kernel table {path}: {exc}") from exc
        try:
            # whitespace, newline or comma separated
            table = np.loadtxt(io.StringIO(text.replace(",", " ")), ndmin=1).ravel()
        except ValueError as exc:
            raise DomainError(f"kernel: malformed table {path}: {exc}") from None
        return DecayKernel.custom(table, Q, alpha)
    try:
        kind = KernelKind(descriptor)
    except ValueError:
        raise DomainError(f"kernel: expected power, log or table:<path>, got {descriptor!r}") from None
    if kind is KernelKind.TABLE:
        raise DomainError("kernel: table kernels are given as table:<path>")
    return DecayKernel(kind, float(alpha), int(Q))


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise OutputError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"config: invalid JSON in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise DomainError("config: top level must be a JSON object")
    return data


def _resolve(args, config, key, config_key=None):
    value = getattr(args, key, None)
    if value is not None:
        return value
    for k in (config_key or key, key):
        if k in config:
            return config[k]
    return DEFAULTS.get(key)


# --- commands ------------------------------------------------------------------------------


def cmd_sweep(spec: SweepSpec, out="-", fmt="csv", timing=False) -> int:
    records = run_sweep(spec)
    if fmt == "csv":
        text = records_to_csv(records, timing)
    else:
        text = _dump_json({"schema_version": SCHEMA_VERSION, "records": [r.json_obj(timing) for r in records]})
    _emit(text, out)
    return EXIT_OK


def cmd_fit(path, model="power", out="-") -> int:
    records = read_records(path)
    if model == "power":
        fit = fit_power([(r.N, r.qfi) for r in records])
        report = {"model": "power", "parameters": {"e": fit.parameters["e"]}}
    elif model == "polylog":
        fit = fit_polylog([(r.N, r.qfi / (r.N**2 * r.T**2)) for r in records])
        report = {"model": "polylog", "parameters": dict(fit.parameters)}
    else:
        raise DomainError(f"model: expected power or polylog, got {model!r}")
    report["residual"] = fit.residual
    report["n_points"] = fit.n_points
    if model == "polylog":
        report["normalization"] = "qfi/(N^2*T^2)"
    report["schema_version"] = SCHEMA_VERSION
    _emit(_dump_json(report), out)
    return EXIT_OK


def cmd_oracle_check(config, out="-", seed=None) -> int:
    for key in ("trials", "N_list", "tol"):
        if key not in config:
            raise DomainError(f"{key}: missing from oracle-check config")
    seed = int(config.get("seed", 0) if seed is None else seed)
    trials = int(config["trials"])
    N_list = [int(n) for n in config["N_list"]]
    tol = float(config["tol"])
    if trials < 1:
        raise DomainError("trials: must be >= 1")
    if any(n > MAX_SITES for n in N_list):
        raise DomainError(f"N_list: exact oracle is limited to N <= {MAX_SITES}")
    kwargs = {}
    if "T_list" in config:
        kwargs["T_list"] = tuple(float(t) for t in config["T_list"])
    if "families" in config:
        kwargs["families"] = tuple(config["families"])
    records = oracle_equivalence(seed, trials, N_list, **kwargs)
    max_rel = max(r.rel_err for r in records)
    report = {
        "schema_version": SCHEMA_VERSION,
        "seed": seed,
        "trials": trials,
        "N_list": N_list,
        "comparisons": len(records),
        "tol": tol,
        "max_rel_err": max_rel,
        "failures": [dataclasses.asdict(r) for r in records if r.rel_err > tol],
    }
    _emit(_dump_json(report), out)
    return EXIT_OK if max_rel <= tol else EXIT_TOL


def cmd_predict(kernel: DecayKernel, N_values, out="-", fmt="csv") -> int:
    rows = [(int(N), predict_delta_scaling(kernel, N)) for N in N_values]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "alpha", "kernel", "prediction"])
        for N, v in rows:
            w.writerow([N, fmt_float(kernel.alpha), kernel.describe(), fmt_float(v)])
        text = buf.getvalue()
    else:
        text = _dump_json({
            "schema_version": SCHEMA_VERSION,
            "kernel": kernel.describe(),
            "alpha": kernel.alpha,
            "predictions": [{"N": N, "prediction": v} for N, v in rows],
        })
    _emit(text, out)
    return EXIT_OK


def cmd_validate_kernel(kernel: DecayKernel, N, out="-") -> int:
    report = validate_kernel(kernel, N)
    _emit(_dump_json({"schema_version": SCHEMA_VERSION, **report.as_dict()}), out)
    return EXIT_OK if report.passed else EXIT_INPUT


# --- argument parsing ----------------------------------------------------------------------


def _add_kernel_flags(p):
    p.add_argument("--kernel", help="power, log or table:<path>")
    p.add_argument("--alpha", type=float)
    p.add_argument("--Q", type=int, help="regularity order of the kernel")


def build_parser():
    parser = _Parser(prog="lrk", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="QFI over a list of chain sizes")
    sw.add_argument("--config")
    sw.add_argument("--channel")
    _add_kernel_flags(sw)
    sw.add_argument("--N", dest="N", help="comma list or a:b:step")
    for name in ("J", "mu", "delta", "T"):
        sw.add_argument(f"--{name}", type=float)
    sw.add_argument("--controlled", action=argparse.BooleanOptionalAction, default=None)
    sw.add_argument("--format", choices=("csv", "json"))
    sw.add_argument("--timing", action=argparse.BooleanOptionalAction, default=None, help="add wall_time_ms (non-deterministic)")
    sw.add_argument("--out")
    sw.add_argument("--seed", type=int, help="accepted for uniformity; sweeps are deterministic")

    ft = sub.add_parser("fit", help="fit a sweep CSV")
    ft.add_argument("--in", dest="input", required=True)
    ft.add_argument("--model", choices=("power", "polylog"))
    ft.add_argument("--out")

    oc = sub.add_parser("oracle-check", help="random momentum-vs-exact comparisons")
    oc.add_argument("--config", required=True)
    oc.add_argument("--seed", type=int)
    oc.add_argument("--out")

    pr = sub.add_parser("predict", help="delta-channel scaling surrogate")
    pr.add_argument("--config")
    _add_kernel_flags(pr)
    pr.add_argument("--N", dest="N")
    pr.add_argument("--format", choices=("csv", "json"))
    pr.add_argument("--out")

    vk = sub.add_parser("validate-kernel", help="check kernel regularity on [1, N]")
    vk.add_argument("--config")
    _add_kernel_flags(vk)
    vk.add_argument("--N", dest="N")
    vk.add_argument("--out")
    return parser


def _dispatch(args) -> int:
    if args.command == "fit":
        return cmd_fit(args.input, args.model or DEFAULTS["model"], args.out or DEFAULTS["out"])
    if args.command == "oracle-check":
        return cmd_oracle_check(_load_config(args.config), args.out or DEFAULTS["out"], args.seed)

    config = _load_config(getattr(args, "config", None))
    kernel = parse_kernel(_resolve(args, config, "kernel"), _resolve(args, config, "alpha"), _resolve(args, config, "Q"))
    raw_n = _resolve(args, config, "N", "N_values")
    if raw_n is None:
        raise DomainError("N_values: --N is required")
    N_values = parse_n_values(raw_n)
    out = _resolve(args, config, "out")

    if args.command == "sweep":
        spec = SweepSpec(
            channel=_resolve(args, config, "channel"),
            N_values=N_values,
            kernel=kernel,
            J=_resolve(args, config, "J"),
            mu=_resolve(args, config, "mu"),
            delta=_resolve(args, config, "delta"),
            T=_resolve(args, config, "T"),
            controlled=bool(_resolve(args, config, "controlled")),
        )
        return cmd_sweep(spec, out, _resolve(args, config, "format"), bool(_resolve(args, config, "timing")))
    if args.command == "predict":
        return cmd_predict(kernel, N_values, out, _resolve(args, config, "format"))
    return cmd_validate_kernel(kernel, max(N_values), out)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"lrk: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return _dispatch(args)
    except OutputError as exc:
        print(f"lrk: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FitError as exc:
        print(f"lrk: fit failed: {exc} (best residual {exc.best_residual!r}, parameters {exc.best_parameters})", file=sys.stderr)
        return EXIT_FIT
    except (DomainError, ResourceError, SingularModeError) as exc:
        print(f"lrk: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
