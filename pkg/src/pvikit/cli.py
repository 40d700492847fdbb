"""Batch command-line front end with JSON input/output.

Schema ``pvi-kit/1``: complex numbers are ``[re, im]`` pairs throughout.
Commands: classify, connect, expand, transform, verify, sample-cubic.
Exit codes: 0 success, 2 schema violation, 3 mathematical precondition
failure, 4 verification failure beyond tolerance.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import random
import sys
from pathlib import Path

from . import classify as _classify
from . import connect as _connect
from . import integrate as _integrate
from . import series as _series
from .errors import PviError
from .monodromy import (
    OkamotoElement,
    PviCoefficients,
    ThetaVector,
    TraceSet,
    apply_okamoto_theta,
    apply_okamoto_traces,
    coefficients_from_theta,
    fricke_residual,
    peripheral_traces,
    solve_third_trace,
    theta_from_coefficients,
)

SCHEMA = "pvi-kit/1"
POINTS = ("0", "1", "inf")


class SchemaError(Exception):
    pass


def _cplx(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise SchemaError(f"expected number or [re, im] pair, got {v!r}")


def _pair(z: complex) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _load_theta(doc: dict) -> ThetaVector:
    if "theta" in doc:
        d = doc["theta"]
        return ThetaVector(*(_cplx(d[k]) for k in ("theta0", "thetax", "theta1", "thetainf")))
    if "coefficients" in doc:
        d = doc["coefficients"]
        c = PviCoefficients(*(_cplx(d[k]) for k in ("alpha", "beta", "gamma", "delta")))
        return theta_from_coefficients(c)
    raise SchemaError("input needs 'theta' or 'coefficients'")


def _load_traces(doc: dict, t: ThetaVector) -> TraceSet:
    d = doc.get("traces")
    if d is None:
        raise SchemaError("input needs 'traces'")
    if all(k in d for k in ("p0", "px", "p1", "pinf")):
        return TraceSet(*(_cplx(d[k]) for k in ("p0", "px", "p1", "pinf", "p0x", "px1", "p01")))
    p0, px, p1, pinf = peripheral_traces(t)
    return TraceSet(p0, px, p1, pinf, _cplx(d["p0x"]), _cplx(d["px1"]), _cplx(d["p01"]))


def _load_descriptor(doc: dict) -> _classify.BehaviourDescriptor:
    d = doc.get("descriptor")
    if d is None:
        raise SchemaError("input needs 'descriptor'")
    kind = _classify.BehaviourKind.from_json(d["kind"])
    constants = {k: _cplx(v) for k, v in d.get("constants", {}).items()}
    return _classify.BehaviourDescriptor(kind=kind, constants=constants)


def _dump(obj, out_dir: Path, name: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def run(command: str, doc: dict, out_dir: Path, *, tol: float = 1e-6,
        order: int = _series.DEFAULT_ORDER, seed: int = 0,
        points: tuple[str, ...] = POINTS) -> dict:
    """Execute one batch command on a parsed input document."""
    if doc.get("schema", SCHEMA) != SCHEMA:
        raise SchemaError(f"unsupported schema {doc.get('schema')!r}")
    t = _load_theta(doc)
    result: dict = {"schema": SCHEMA, "command": command}

    if command == "classify":
        s = _load_traces(doc, t)
        result["fricke_residual"] = _pair(fricke_residual(s))
        result["kinds"] = [
            _classify.classify_at(t, s, p).to_json() for p in points
        ]

    elif command == "connect":
        s = _load_traces(doc, t)
        result["fricke_residual"] = _pair(fricke_residual(s))
        out = []
        for p in points:
            try:
                desc = _connect.descriptor_from_monodromy(t, s, p)
                out.append(desc.to_json())
            except PviError as exc:
                out.append({"point": p, "error": type(exc).__name__, "message": str(exc)})
        result["descriptors"] = out
        result["traces"] = s.to_json()

    elif command == "expand":
        desc = _load_descriptor(doc)
        exp = _series.build_expansion(desc, t, order)
        result["expansion"] = exp.to_json()
        xs = [_cplx(v) for v in doc.get("samples", [])]
        if xs:
            rows = ["x_re,x_im,y_re,y_im,dy_re,dy_im"]
            for xv in xs:
                y, dy = _series.evaluate(exp, xv, radius=doc.get("radius"))
                rows.append(f"{xv.real!r},{xv.imag!r},{y.real!r},{y.imag!r},{dy.real!r},{dy.imag!r}")
            (out_dir / "values.csv").parent.mkdir(parents=True, exist_ok=True)
            (out_dir / "values.csv").write_text("\n".join(rows) + "\n")
            result["values_csv"] = "values.csv"

    elif command == "transform":
        elem = OkamotoElement(doc.get("element", "Sym2"))
        result["theta"] = apply_okamoto_theta(elem, t).to_json()
        if "traces" in doc:
            s = _load_traces(doc, t)
            s2 = apply_okamoto_traces(elem, s)
            result["traces"] = s2.to_json()
            result["fricke_residual"] = _pair(fricke_residual(s2))

    elif command == "verify":
        result.update(_verify(doc, t, tol=tol, order=order))
        if not result["pass"]:
            result["exit"] = 4

    elif command == "sample-cubic":
        rng = random.Random(seed)
        region = doc.get("region", {"re": [-2.0, 2.0], "im": [-0.5, 0.5]})
        count = int(doc.get("count", 10))
        samples = []
        attempts = 0
        while len(samples) < count and attempts < 200 * count:
            attempts += 1
            p0x = complex(rng.uniform(*region["re"]), rng.uniform(*region["im"]))
            px1 = complex(rng.uniform(*region["re"]), rng.uniform(*region["im"]))
            base = TraceSet.from_theta(t, p0x, px1, 0.0)
            p01 = rng.choice(solve_third_trace(base))
            s = TraceSet.from_theta(t, p0x, px1, p01)
            try:
                kinds = {p: _classify.classify_at(t, s, p).to_json() for p in points}
            except PviError:
                continue
            samples.append({"traces": s.to_json(),
                            "fricke_residual": _pair(fricke_residual(s)),
                            "kinds": kinds})
        result["samples"] = samples

    else:
        raise SchemaError(f"unknown command {command!r}")

    _dump(result, out_dir, "result.json")
    return result


def _verify(doc: dict, t: ThetaVector, *, tol: float, order: int) -> dict:
    """Connection verification: seed near 0 from the expansion, integrate to
    the far end, compare with the connected expansion at the target point."""
    desc = _load_descriptor(doc)
    target = doc.get("point", "1")
    x_seed = _cplx(doc.get("x_seed", 1e-2))
    x_end = _cplx(doc.get("x_end", 0.9))
    itol = float(doc.get("integration_tol", 1e-10))
    c = coefficients_from_theta(t)

    exp0 = _series.build_expansion(desc, t, order)
    y0, dy0 = _series.evaluate(exp0, x_seed)
    desc_v = _connect.connect_closed_form(desc, t, target)
    exp_v = _series.build_expansion(desc_v, t, order)

    path = [x_seed, x_end]
    report: dict = {"target": target, "x_seed": _pair(x_seed), "x_end": _pair(x_end),
                    "tolerance": tol, "descriptor_target": desc_v.to_json()}
    try:
        traj = _integrate.integrate_path(c, x_seed, y0, dy0, path, tol=itol)
    except PviError:
        # retry once with a semicircular detour around the failure region
        mid = (x_seed + x_end) / 2.0
        detour = [x_seed, mid - 0.05, mid - 0.05j, mid + 0.05, x_end]
        traj = _integrate.integrate_path(c, x_seed, y0, dy0, detour, tol=itol)
        report["detour"] = True
    y_num = traj.end.y
    y_ser, _ = _series.evaluate(exp_v, x_end, radius=0.5)
    mism = abs(y_num - y_ser) / max(1.0, abs(y_ser))
    report["y_integrated"] = _pair(y_num)
    report["y_series"] = _pair(y_ser)
    report["mismatch"] = mism
    report["pass"] = bool(mism < tol)
    return report


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="pvikit", description=__doc__)
    ap.add_argument("command", choices=["classify", "connect", "expand", "transform",
                                        "verify", "sample-cubic"])
    ap.add_argument("--input", required=True, help="input JSON document")
    ap.add_argument("--output", default="out", help="output directory")
    ap.add_argument("--tol", type=float, default=1e-6)
    ap.add_argument("--order", type=int, default=_series.DEFAULT_ORDER)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--point", choices=list(POINTS), action="append",
                    help="restrict to specific critical points (repeatable)")
    args = ap.parse_args(argv)

    try:
        doc = json.loads(Path(args.input).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read input: {exc}", file=sys.stderr)
        return 2
    points = tuple(args.point) if args.point else POINTS
    try:
        result = run(args.command, doc, Path(args.output), tol=args.tol,
                     order=args.order, seed=args.seed, points=points)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 2
    except PviError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return int(result.get("exit", 0))


if __name__ == "__main__":
    sys.exit(main())
