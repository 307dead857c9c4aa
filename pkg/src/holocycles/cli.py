"""Command-line interface.

Exit codes: 0 success, 1 bad input or configuration, 2 degenerate input or
numerical failure, 3 a certificate came out negative.
"""
from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .certify import certify_integrals, certify_multipliers, cycle_integral
from .core import DEFAULT_CONFIG, LocalLinearModel, NumericConfig, PolynomialVectorField
from .errors import HoloError
from .forge import forge_family, select_subsequence
from .paths import BasePath
from .presets import PRESETS, preset
from .projective import Line, field_summary
from .serialize import complex_to_pair, dumps, pair_to_complex
from .transport import GermMap, lift_path

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_UNCERTIFIED = 0, 1, 2, 3


class InputError(Exception):
    """Malformed input file or invalid configuration."""


@dataclass(frozen=True)
class RunConfig:
    inputs: tuple[str, ...]
    out: Path
    fmt: str = "json"
    count: int = 10
    numeric: NumericConfig = DEFAULT_CONFIG

    def __post_init__(self):
        if self.count < 1:
            raise InputError(f"--count must be at least 1, got {self.count}")
        if self.fmt not in ("json", "csv"):
            raise InputError(f"unknown format {self.fmt!r}")


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at $ (line {exc.lineno}, column {exc.colno}): {exc.msg}") from None


def _field(data, where: str) -> PolynomialVectorField:
    if not isinstance(data, dict):
        raise InputError(f"{where}: expected an object with keys p and q")
    try:
        return PolynomialVectorField.from_json(data)
    except (KeyError, ValueError) as exc:
        msg = str(exc.args[0] if exc.args else exc)
        raise InputError(msg if where == "$" else f"{where}: {msg}") from None


def _complex(data, where: str) -> complex:
    try:
        return pair_to_complex(data)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{where}: {exc}") from None


def _write(cfg: RunConfig, name: str, text: str) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.out / name
    path.write_text(text)
    return path


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else f"{v:.17g}" for v in row) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(cfg: RunConfig) -> int:
    data = _load_json(cfg.inputs[0])
    field = _field(data, "$")
    lines = []
    for k, ln in enumerate(data.get("lines", [])):
        try:
            point = tuple(pair_to_complex(v) for v in ln["point"])
            direction = tuple(pair_to_complex(v) for v in ln["direction"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"$.lines[{k}]: {exc}") from None
        lines.append(Line(point, direction))
    report = field_summary(field, lines)
    if cfg.fmt == "csv":
        rows = [[str(p["multiplicity"]), *p["direction"][1], *(p["lambda"] or [float("nan")] * 2)]
                for p in report["infinity_points"]]
        _write(cfg, "analyze.csv", _csv(["multiplicity", "re_dir", "im_dir", "re_lambda", "im_lambda"], rows))
    _write(cfg, "analyze.json", dumps(report))
    return EXIT_OK


def cmd_holonomy(cfg: RunConfig) -> int:
    data = _load_json(cfg.inputs[0])
    if "field" in data:
        foliation = _field(data["field"], "$.field")
    elif "model" in data:
        foliation = LocalLinearModel.normalized(_complex(data["model"].get("lambda"), "$.model.lambda"))
    else:
        raise InputError("$: need a 'field' or a 'model'")
    try:
        path = BasePath.from_json(data["path"])
    except KeyError:
        raise InputError("$.path: missing") from None
    except ValueError as exc:
        raise InputError(f"$.path: {exc}") from None
    base = data.get("base", "x")
    points = [_complex(p, f"$.points[{k}]") for k, p in enumerate(data.get("points", [[0.0, 0.0]]))]
    out = []
    for w in points:
        res = lift_path(foliation, path, w, cfg.numeric, base)
        out.append({"start": complex_to_pair(w), "end": complex_to_pair(res.endpoint),
                    "derivative": complex_to_pair(res.derivative),
                    "estimated_error": res.estimated_error, "steps": res.steps})
    if cfg.fmt == "csv":
        _write(cfg, "holonomy.csv", _csv(["re_start", "im_start", "re_end", "im_end", "re_deriv", "im_deriv"],
                                          [[*o["start"], *o["end"], *o["derivative"]] for o in out]))
    _write(cfg, "holonomy.json", dumps({"base": base, "lifts": out}))
    return EXIT_OK


def _cycles_input(args, cfg: RunConfig):
    if args.preset:
        return preset(args.preset, cfg.numeric)
    if not cfg.inputs:
        raise InputError("give an input file or --preset")
    data = _load_json(cfg.inputs[0])
    lam = _complex(data.get("lambda"), "$.lambda")
    model = LocalLinearModel.normalized(lam)
    if "germ" not in data:
        raise InputError("$.germ: missing")
    try:
        germ = GermMap.from_json(data["germ"], cfg.numeric)
    except (KeyError, ValueError) as exc:
        raise InputError(f"$.germ: {exc.args[0] if exc.args else exc}") from None
    if model.conjugated:
        germ = germ.conjugate()
    return model, germ


def _multiplier_certificate(log_moduli, disjoint_verdict: str):
    selected = select_subsequence(log_moduli=log_moduli)
    caveats = ["numeric univalence", "applied to the selected subsequence"]
    if disjoint_verdict != "certified":
        caveats.append("representatives not certified disjoint")
    cert = certify_multipliers(log_moduli=[log_moduli[i] for i in selected], caveats=caveats)
    return selected, cert


def cmd_cycles(args, cfg: RunConfig) -> int:
    model, germ = _cycles_input(args, cfg)
    family = forge_family(model, germ, cfg.count, args.radius, cfg.numeric)
    dis = family.certificate
    selected, cert = _multiplier_certificate(family.log_moduli, dis.verdict)
    doc = family.to_json()
    doc["selected"] = selected
    _write(cfg, "cycles.json", dumps(doc))
    cj = cert.to_json()
    cj["selected_n"] = [family.cycles[i].n for i in selected]
    cj["disjointness"] = dis.to_json()
    _write(cfg, "certificate.json", dumps(cj))
    if cfg.fmt == "csv":
        rows = [[str(c.n), *complex_to_pair(c.p), *complex_to_pair(c.mu), c.log_abs_mu, c.residual]
                for c in family.cycles]
        _write(cfg, "cycles.csv", _csv(["n", "re_p", "im_p", "re_mu", "im_mu", "log_abs_mu", "residual"], rows))
    ok = dis.verdict == "certified" and cert.verdict == "certified"
    print(f"{len(family.cycles)} cycles from n={family.first_index}; disjointness {dis.verdict}; "
          f"multipliers {cert.verdict} on {len(selected)} selected")
    return EXIT_OK if ok else EXIT_UNCERTIFIED


def _stored_cycles(path: str) -> dict:
    doc = _load_json(path)
    if not isinstance(doc, dict) or not isinstance(doc.get("cycles"), list):
        raise InputError(f"{path}: $.cycles missing or not a list")
    return doc


def _stored_curve(c: dict, k: int):
    try:
        arr = np.asarray(c["curve"], dtype=float).reshape(-1, 4)
        t = np.asarray(c["t"], dtype=float)
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"$.cycles[{k}]: bad curve samples ({exc})") from None
    return t, arr[:, 0] + 1j * arr[:, 1], arr[:, 2] + 1j * arr[:, 3]


def cmd_certify(args, cfg: RunConfig) -> int:
    doc = _stored_cycles(cfg.inputs[0])
    cycles = doc["cycles"]
    dis = (doc.get("certificate") or {}).get("verdict", "unknown")
    if args.method == "multiplier":
        try:
            logs = [float(c["log_abs_mu"]) for c in cycles]
        except (KeyError, TypeError, ValueError):
            raise InputError("$.cycles[*].log_abs_mu: missing") from None
        selected, cert = _multiplier_certificate(logs, dis)
        out = cert.to_json()
        out["selected_n"] = [cycles[i]["n"] for i in selected]
    else:
        model = doc.get("model", {})
        zr, wr = float(model.get("z_radius", 1.0)), float(model.get("w_radius", 1.0))
        values, errs = [], []
        for k, c in enumerate(cycles):
            _, z, w = _stored_curve(c, k)
            ci = cycle_integral(z * zr, w * wr)
            values.append(ci.value)
            errs.append(ci.error)
        caveats = ["quadrature error estimates attached"]
        if dis != "certified":
            caveats.append("representatives not certified disjoint")
        cert = certify_integrals(values, errs, caveats=caveats)
        out = cert.to_json()
        out["integrals"] = [complex_to_pair(v) for v in values]
    _write(cfg, "certificate.json", dumps(out))
    print(f"{args.method} criterion: {cert.verdict}")
    return EXIT_OK if cert.verdict == "certified" else EXIT_UNCERTIFIED


def cmd_plotdata(cfg: RunConfig) -> int:
    doc = _stored_cycles(cfg.inputs[0])
    cfg.out.mkdir(parents=True, exist_ok=True)
    for k, c in enumerate(doc["cycles"]):
        t, z, w = _stored_curve(c, k)
        name = f"cycle_{int(c.get('n', k))}"
        if cfg.fmt == "json":
            _write(cfg, name + ".json", dumps({"t": t.tolist(), "curve": c["curve"]}))
        else:
            rows = [[a, b.real, b.imag, d.real, d.imag] for a, b, d in zip(t, z, w)]
            _write(cfg, name + ".csv", _csv(["t", "re_z", "im_z", "re_w", "im_w"], rows))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # usage errors share the bad-input exit code
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default=None)
    common.add_argument("--tol-ode", type=float, help="relative ODE tolerance")
    common.add_argument("--tol-fixed", type=float, help="fixed point residual tolerance")

    parser = _Parser(prog="holocycles", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", parents=[common], help="singular points, infinity points, tangencies")
    p.add_argument("field")
    p = sub.add_parser("holonomy", parents=[common], help="lift a base path from given start points")
    p.add_argument("input")
    p = sub.add_parser("cycles", parents=[common], help="build and certify a family of limit cycles")
    p.add_argument("input", nargs="?")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--radius", type=float, default=None, help="initial section radius")
    p = sub.add_parser("certify", parents=[common], help="re-run a certificate on cycles.json")
    p.add_argument("input")
    p.add_argument("--method", choices=("multiplier", "integral"), default="multiplier")
    p = sub.add_parser("plotdata", parents=[common], help="per-cycle sample tables")
    p.add_argument("input")
    return parser


def _config(args) -> RunConfig:
    changes = {}
    if args.tol_ode is not None:
        changes.update(ode_rel_tol=args.tol_ode, ode_abs_tol=args.tol_ode * 1e-2)
    if args.tol_fixed is not None:
        changes["fixed_point_tol"] = args.tol_fixed
    try:
        numeric = DEFAULT_CONFIG.replace(**changes)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    inputs = tuple(v for v in (getattr(args, k, None) for k in ("field", "input")) if v)
    fmt = args.fmt or ("csv" if args.command == "plotdata" else "json")
    return RunConfig(inputs, Path(args.out), fmt, getattr(args, "count", 10), numeric)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        if args.command == "analyze":
            return cmd_analyze(cfg)
        if args.command == "holonomy":
            return cmd_holonomy(cfg)
        if args.command == "cycles":
            return cmd_cycles(args, cfg)
        if args.command == "certify":
            return cmd_certify(args, cfg)
        return cmd_plotdata(cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except HoloError as exc:
        stage = f" [{exc.stage}]" if exc.stage else ""
        print(f"error{stage}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
