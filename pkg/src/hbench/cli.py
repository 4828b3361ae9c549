"""Command-line front end: figure and table data as CSV or JSON.

Exit codes: 0 success, 2 usage or validation error, 3 computational or I/O
failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import __version__, bounds, covariant, estimators, multiparam, noisy

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    output_path: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise UsageError(f"unknown format {self.format!r}")
        if not (0 <= self.seed < 2**64):
            raise UsageError("seed must be a 64-bit unsigned integer")

    def metadata(self) -> dict:
        return {"command": self.command, "version": __version__, "seed": self.seed,
                "params": self.params, "format": self.format}


# parsing helpers -----------------------------------------------------------------

def _int_list(text: str) -> list[int]:
    items = [s for s in text.split(",") if s.strip()]
    try:
        return [int(s) for s in items]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    items = [s for s in text.split(",") if s.strip()]
    try:
        return [float(s) for s in items]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _nonempty(name: str, values):
    if not values:
        raise UsageError(f"{name} must not be empty")
    return values


BOUND_KINDS = {
    "pi-minimax": (bounds.pi_corrected_minimax, {"N": "N", "lambda": "lam", "delta": "delta"}),
    "pi-bayes": (bounds.pi_corrected_bayes, {"N": "N", "lambda": "lam", "delta": "delta"}),
    "mean-energy": (bounds.mean_energy_minimax, {"E": "E", "delta": "delta"}),
    "frequency": (bounds.frequency_bound, {"N_pr": "N_pr", "T": "T", "lambda_G": "lam_g",
                                           "delta_omega": "delta_w"}),
    "gradient": (bounds.gradient_bound, {"N_pr": "N_pr", "t": "t", "gamma": "gamma", "L_x": "L_x"}),
}
OPTIONAL_BOUND_PARAMS = {"gradient": {"hbar": "hbar"}}


def _parse_assignments(items: list[str]) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise UsageError(f"parameter {item!r} is not of the form name=value")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError:
            raise UsageError(f"parameter {k!r} has non-numeric value {v!r}")
    return out


# commands --------------------------------------------------------------------------

def cmd_fig_mse(cfg: RunConfig) -> list[dict]:
    p = cfg.params
    _nonempty("k list", p["k"])
    _nonempty("theta grid", p["thetas"])
    rows = estimators.fig_mse_table(p["k"], p["thetas"], n_samples=p["n_samples"], seed=cfg.seed,
                                    lue_theta0=p["lue_theta0"], lue_k=p["lue_k"])
    return [{"estimator": r["estimator"], "theta0": r["theta0"], "theta": r["theta"], "k": r["k"],
             "mean": r["mean"], "mse": r["mse"]} for r in rows]


def cmd_fig_conv(cfg: RunConfig) -> list[dict]:
    p = cfg.params
    _nonempty("M list", p["M"])
    _nonempty("k grid", p["k_grid"])
    rows = estimators.convergence_study(p["M"], p["k_grid"], seed=cfg.seed, n_samples=p["n_samples"],
                                        repetitions=p["repetitions"])
    rows = sorted(rows, key=lambda r: (r["M"], r["k"]))
    return [{"M": r["M"], "k": r["k"], "mse": r["mse"], "stderr": r["stderr"], "cr": r["cr"]} for r in rows]


def cmd_bounds(cfg: RunConfig) -> dict:
    kind = cfg.params["kind"]
    if kind not in BOUND_KINDS:
        raise UsageError(f"unknown bound kind {kind!r}; choose from {', '.join(BOUND_KINDS)}")
    fn, required = BOUND_KINDS[kind]
    optional = OPTIONAL_BOUND_PARAMS.get(kind, {})
    given = cfg.params["values"]
    unknown = sorted(set(given) - set(required) - set(optional))
    if unknown:
        raise UsageError(f"unknown parameter(s) for {kind}: {', '.join(unknown)}")
    missing = [k for k in required if k not in given]
    if missing:
        raise UsageError(f"missing parameter(s) for {kind}: {', '.join(missing)}")
    kwargs = {({**required, **optional})[k]: v for k, v in given.items()}
    return fn(**kwargs).to_dict()


def cmd_phase(cfg: RunConfig) -> list[dict]:
    n_max = cfg.params["N_max"]
    if n_max < 1:
        raise UsageError("N_max must be at least 1")
    return covariant.phase_table(n_max)


def _load_channel(p: dict):
    if p.get("channel_file"):
        try:
            with open(p["channel_file"], encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise OSError(f"cannot read channel file {p['channel_file']}: {exc.strerror}") from exc
        return noisy.channel_from_json(data)
    kind = p.get("channel")
    theta = p["theta"]
    if kind == "dephasing":
        if p.get("p") is None:
            raise UsageError("missing parameter: p")
        return noisy.dephasing_channel(p["p"]), theta
    if kind == "lossy":
        if p.get("eta") is None:
            raise UsageError("missing parameter: eta")
        return noisy.lossy_interferometer_channel(p["eta"]), theta
    if kind == "unitary":
        return noisy.unitary_channel(np.diag([0.5, -0.5])), theta
    raise UsageError("give --channel or --channel-file")


def cmd_noisy(cfg: RunConfig) -> list[dict]:
    p = cfg.params
    n = p["n"]
    if n < 1:
        raise UsageError("n must be at least 1")
    ch, theta = _load_channel(p)
    seed = cfg.seed
    b1, b2 = noisy.adaptive_bound_closed(ch, theta, n, seed=seed)
    rows = [
        ("single", 1, noisy.minimize_parallel_bound(ch, theta, 1, seed=seed)),
        ("parallel", n, noisy.minimize_parallel_bound(ch, theta, n, seed=seed)),
        ("adaptive-iterative", n, noisy.adaptive_bound_iterative(ch, theta, n, seed=seed)),
        ("adaptive-closed-1", n, b1),
        ("adaptive-closed-2", n, b2),
    ]
    return [{"bound_name": name, "n": m, "value": v} for name, m, v in rows]


def cmd_multi(cfg: RunConfig) -> list[dict]:
    p = cfg.params
    model = p["model"]
    if model == "multiphase":
        if p["p"] is None:
            raise UsageError("missing parameter: p")
        rows = multiparam.multiphase_costs(p["p"], p["k"], p["n"], p["N"])
    elif model == "su2":
        rows = multiparam.su2_costs(p["n"], p["k"], p["theta_norm"], p["N"])
    elif model == "two-point":
        rows = multiparam.two_point_field_costs(p["k"], p["n"], p["N"])
    else:
        raise UsageError(f"unknown model {model!r}")
    return [r.to_dict() for r in rows]


COMMANDS = {
    "fig-mse": cmd_fig_mse,
    "fig-conv": cmd_fig_conv,
    "bounds": cmd_bounds,
    "phase": cmd_phase,
    "noisy": cmd_noisy,
    "multi": cmd_multi,
}


# output ------------------------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def render(result, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result, indent=2, sort_keys=isinstance(result, dict), default=float) + "\n"
    rows = result if isinstance(result, list) else [result]
    if not rows:
        raise RuntimeError("command produced no rows")
    buf = io.StringIO()
    header = list(rows[0])
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for r in rows:
        writer.writerow([_cell(r[h]) if not isinstance(r[h], dict) else json.dumps(r[h], sort_keys=True)
                         for h in header])
    return buf.getvalue()


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# argument parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hbench", description="Quantum metrology benchmark tables.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, default_format="csv"):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None, help="output path (stdout if omitted)")
        sp.add_argument("--format", choices=("csv", "json"), default=default_format)

    sp = sub.add_parser("fig-mse", help="estimator bias/MSE table for the coin model")
    sp.add_argument("--k", type=_int_list, default=list(estimators.MSE_K))
    sp.add_argument("--thetas", type=_float_list, default=[float(t) for t in estimators.MSE_THETAS])
    sp.add_argument("--n-samples", type=int, default=10_000)
    sp.add_argument("--lue-theta0", type=_float_list, default=list(estimators.LUE_THETA0))
    sp.add_argument("--lue-k", type=int, default=100)
    common(sp)

    sp = sub.add_parser("fig-conv", help="ML convergence to the CR bound for n00n mixtures")
    sp.add_argument("--M", type=_int_list, default=list(estimators.CONV_M))
    sp.add_argument("--k-grid", type=_int_list, default=list(estimators.CONV_K))
    sp.add_argument("--n-samples", type=int, default=20)
    sp.add_argument("--repetitions", type=int, default=100)
    common(sp)

    sp = sub.add_parser("bounds", help="single finite-resource bound as a JSON report")
    sp.add_argument("kind")
    sp.add_argument("values", nargs="*", metavar="name=value")
    common(sp, "json")

    sp = sub.add_parser("phase", help="optimal covariant phase cost for N = 1..N_max")
    sp.add_argument("--N-max", dest="N_max", type=int, default=100)
    common(sp)

    sp = sub.add_parser("noisy", help="channel Fisher-information bounds at n uses")
    sp.add_argument("--channel", choices=("dephasing", "lossy", "unitary"))
    sp.add_argument("--channel-file")
    sp.add_argument("--p", type=float)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--n", type=int, default=10)
    common(sp)

    sp = sub.add_parser("multi", help="multiparameter cost scenarios")
    sp.add_argument("--model", choices=("multiphase", "su2", "two-point"), required=True)
    sp.add_argument("--p", type=int)
    sp.add_argument("--k", type=float, default=1.0)
    sp.add_argument("--n", type=float, default=1.0)
    sp.add_argument("--N", type=float, default=1.0)
    sp.add_argument("--theta-norm", type=float, default=0.0)
    common(sp)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    skip = {"command", "seed", "out", "format"}
    params = {k: v for k, v in vars(ns).items() if k not in skip}
    if ns.command == "bounds":
        params = {"kind": ns.kind, "values": _parse_assignments(ns.values)}
    return RunConfig(ns.command, params, ns.seed, ns.out, ns.format)


def run(cfg: RunConfig) -> str:
    result = COMMANDS[cfg.command](cfg)
    text = render(result, cfg.format)
    if cfg.output_path:
        write_atomic(cfg.output_path, text)
        write_atomic(cfg.output_path + ".meta.json",
                     json.dumps(cfg.metadata(), indent=2, sort_keys=True, default=float) + "\n")
    return text


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
        text = run(cfg)
    except UsageError as exc:
        print(f"hbench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"hbench: I/O failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (ValueError, RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"hbench: {ns.command} failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if not cfg.output_path:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
