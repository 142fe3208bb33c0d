"""Command-line entry point: ``qdeq --task <polygon|solve|connect|confluence|check>``.

A problem is read from ``--input`` (JSON, validated against :data:`INPUT_SCHEMA`)
and/or flags; flags win over the file, the file over ``QDEQ_PRECISION``.
The report is JSON (``--format csv`` flattens it to ``path,re,im`` rows).

Exit status: 0 success, 1 parse/validation error, 2 numerical failure,
3 a reported deviation exceeds its tolerance.
"""

from __future__ import annotations

import argparse
import cmath
import csv
import io
import json
import math
import os
import re
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import jsonschema
import mpmath

from . import confluence as cf
from . import connection as cn
from . import qspecial as qs
from . import solver as sv
from .algebra import EvalContext, as_fraction
from .errors import NumericalError, QdeqError, ValidationError
from .operator import (
    QDiffOperator,
    QMonomial,
    characteristic_equation,
    format_operator,
    invert_variable,
    newton_polygon,
    operator_from_json,
    parse_operator,
    relative_residual,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_TOLERANCE = 0, 1, 2, 3
TASKS = ("polygon", "solve", "connect", "confluence", "check")

_NUMBER = {"oneOf": [
    {"type": "number"},
    {"type": "string"},
    {"type": "object", "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
     "required": ["re"], "additionalProperties": False},
]}

INPUT_SCHEMA = {
    "type": "object",
    "properties": {
        "task": {"enum": list(TASKS)},
        "operator": {"oneOf": [{"type": "string"}, {"type": "object", "required": ["terms"]}]},
        "q": _NUMBER,
        "precision": {"type": "integer", "minimum": 10},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "order": {"type": "integer", "minimum": 0},
        "params": {"type": "object"},
    },
    "additionalProperties": False,
}


@dataclass
class ProblemSpec:
    task: str
    operator: Any = None
    q: Any = "1/2"
    precision: int = 53
    tol: float | None = None
    order: int | None = None
    params: dict = field(default_factory=dict)


@dataclass
class ResultReport:
    task: str
    inputs: dict
    outputs: dict
    checks: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def failed(self) -> list:
        return [c for c in self.checks if not c["pass"]]

    def add_check(self, name: str, deviation: float, tol: float, require: bool = True, **extra):
        dev = float(deviation)
        self.checks.append({"name": name, "deviation": dev, "tol": float(tol),
                            "pass": bool(dev < tol and require), **extra})

    def to_dict(self) -> dict:
        return {"task": self.task, "inputs": self.inputs, "outputs": self.outputs,
                "checks": self.checks, "metadata": self.metadata}


# --------------------------------------------------------------------------
# (de)serialisation
# --------------------------------------------------------------------------


def to_jsonable(x):
    """Complex as ``{"re", "im"}``, rationals as ``"a/b"``, mp numbers as floats."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return int(x)
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return x
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if hasattr(x, "coeffs") and not hasattr(x, "denom"):
        return [to_jsonable(v) for v in x.coeffs]
    if isinstance(x, (float, mpmath.mpf)) or getattr(x, "imag", None) is None:
        return float(x)
    z = complex(x)
    return {"re": z.real, "im": z.imag}


_POWER = re.compile(r"^\s*([0-9.]+(?:/[0-9]+)?)\s*\^\s*[{(]?\s*(-?[0-9]+(?:/[0-9]+)?)\s*[})]?\s*$")


def parse_number(x, precision: int = 53):
    """``0.5``, ``"1/2"``, ``"2^{-1/3}"`` or ``{"re", "im"}``; exact when possible."""
    if isinstance(x, dict):
        return complex(float(x.get("re", 0)), float(x.get("im", 0)))
    if isinstance(x, bool):
        raise ValidationError(f"invalid number {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        m = _POWER.match(x)
        try:
            if m:
                base, e = Fraction(m.group(1)), Fraction(m.group(2))
                if e.denominator == 1:
                    return base ** int(e)
                mp = mpmath.MPContext()
                mp.prec = precision + 20
                val = mp.power(mp.mpf(base.numerator) / base.denominator,
                               mp.mpf(e.numerator) / e.denominator)
                return val if precision > 53 else float(val)
            s = x.strip().replace(" ", "")
            if "j" in s or "i" in s:
                return complex(s.replace("i", "j"))
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"invalid number {x!r}") from exc
    raise ValidationError(f"invalid number {x!r}")


def _root(spec, ctx: EvalContext):
    """A characteristic root: a number, or ``{"mantissa", "root_of_unity": [k, n], "q_exp"}``."""
    if isinstance(spec, dict) and ("q_exp" in spec or "root_of_unity" in spec or "mantissa" in spec):
        mant = ctx.num(parse_number(spec.get("mantissa", 1), ctx.precision))
        if "root_of_unity" in spec:
            k, n = spec["root_of_unity"]
            mant = mant * ctx.root_of_unity(int(k), int(n))
        return QMonomial(mant, as_fraction(spec.get("q_exp", "0")))
    return ctx.num(parse_number(spec, ctx.precision))


def _read_operator(x) -> QDiffOperator:
    if x is None:
        raise ValidationError("this task needs an operator")
    if isinstance(x, str):
        if x.strip().lower() == "quintic":
            return parse_operator(sv.QUINTIC)
        return parse_operator(x)
    return operator_from_json(x)


def _context(spec: ProblemSpec) -> EvalContext:
    return EvalContext(parse_number(spec.q, spec.precision), precision=spec.precision, tol=spec.tol)


def _tol(spec: ProblemSpec, default: float) -> float:
    return spec.tol if spec.tol is not None else default


def _rel(a, b) -> float:
    return float(abs(a - b)) / max(float(abs(a)), 1e-300)


def _rel_nil(a, b) -> float:
    return max(_rel(x, y) for x, y in zip(a, b))


def _series_table(series) -> list:
    return [{"exponent": series.exponent(k), "value": c} for k, c in enumerate(series.coeffs)]


# --------------------------------------------------------------------------
# tasks
# --------------------------------------------------------------------------


def cmd_polygon(spec: ProblemSpec, report: ResultReport) -> None:
    op = _read_operator(spec.operator)
    ctx = _context(spec)
    out = {}
    for where, o in (("zero", op), ("infinity", invert_variable(op))):
        poly = newton_polygon(o)
        block = {
            "points": [list(p) for p in poly.points],
            "vertices": [list(v) for v in poly.vertices],
            "segments": [{"start": list(s.start), "end": list(s.end), "slope": s.slope, "kind": s.kind}
                         for s in poly.segments],
            "characteristic_roots": [],
        }
        for seg in poly.horizontal():
            cp = characteristic_equation(o, seg)
            block["characteristic_roots"].append(sorted(cp.roots(ctx), key=lambda z: (abs(z), cmath.phase(z))))
        out[where] = block
    out["operator"] = format_operator(op)
    report.outputs.update(out)


def cmd_solve(spec: ProblemSpec, report: ResultReport) -> None:
    """``params.mode``: ``frobenius`` (``point``, ``roots``), ``adams`` (``s``, ``t``, ``xi``) or ``kgroup``."""
    ctx = _context(spec)
    p = spec.params
    mode = p.get("mode", "frobenius")
    N = int(spec.order if spec.order is not None else p.get("N", 10))
    tol = _tol(spec, 1e-10)
    sols = []
    if mode == "kgroup":
        op = _read_operator(spec.operator) if spec.operator is not None else None
        if p.get("alphas") is not None:
            alphas = [ctx.num(parse_number(a, spec.precision)) for a in p["alphas"]]
            n = int(p["n"])
            ks = sv.kgroup_series(alphas, n, N, ctx)
            op = op or sv.mbw_operator(alphas, n)
        else:
            ks = sv.quintic_ifunction(N, ctx)
            op = op or parse_operator(sv.QUINTIC)
        residuals, scales = sv.apply_kgroup(op, ks, ctx)
        worst = max((float(abs(r[b])) / s[b] for r, s in zip(residuals, scales)
                     for b in range(ks.n) if s[b] > 0), default=0.0)
        report.outputs["components"] = [[c for c in ks.component(b).coeffs] for b in range(ks.n)]
        report.add_check("kgroup_residual", worst, tol)
        return
    op = _read_operator(spec.operator)
    if mode == "frobenius":
        point = p.get("point", "zero")
        o = invert_variable(op) if point == "infinity" else op
        if "roots" in p:
            roots = [_root(r, ctx) for r in p["roots"]]
        else:
            roots = characteristic_equation(o).roots(ctx)
        closed = p.get("quintic_closed_form")
        for i, r in enumerate(roots):
            sol = sv.frobenius_solve(o, r, N, ctx)
            res = relative_residual(o, sol, ctx)
            entry = {"root": r.value(ctx) if isinstance(r, QMonomial) else r,
                     "series": _series_table(sol.series), "residual": res}
            if closed is not None:
                l, m = closed[i] if isinstance(closed[0], list) else closed
                ref = sv.quintic_infinity_closed_form(int(l), int(m), N, ctx)
                dev = max(_rel(b, sol.series.coefficient(d)) for d, b in enumerate(ref))
                entry["closed_form_deviation"] = dev
                report.add_check(f"closed_form[{i}]", dev, 1e-11)
            report.add_check(f"residual[{i}]", res, tol)
            sols.append(entry)
    elif mode == "adams":
        s, t = int(p["s"]), int(p["t"])
        xis = p.get("xi")
        xis = [ctx.root_of_unity(k, s) for k in range(s)] if xis is None else \
            [_root(x, ctx) if not isinstance(x, int) else ctx.root_of_unity(x, s) for x in xis]
        for i, xi in enumerate(xis):
            sol = sv.adams_solve(op, s, t, xi, N, ctx)
            res = relative_residual(op, sol, ctx)
            sols.append({"xi": xi, "character": sol.character_value(ctx), "theta_exponent": sol.theta_exponent,
                         "series": _series_table(sol.series), "residual": res})
            report.add_check(f"residual[{i}]", res, tol)
    else:
        raise ValidationError(f"unknown solve mode {mode!r}")
    report.outputs["solutions"] = sols


def _default_alphas(ctx):
    return cn.fuchsian_alphas(ctx), 4


def cmd_connect(spec: ProblemSpec, report: ResultReport) -> None:
    """Continuation identity at ``params.Q`` points; fuchsian case adds the connection matrix."""
    ctx = _context(spec)
    p = spec.params
    tol = _tol(spec, 1e-7)
    if p.get("alphas") is not None:
        alphas = [ctx.num(parse_number(a, spec.precision)) for a in p["alphas"]]
        n = int(p["n"])
        fuchsian = False
    else:
        alphas, n = _default_alphas(ctx)
        fuchsian = True
    points = [parse_number(x, spec.precision) for x in p.get("Q", [0.2, {"re": 0.3 / math.sqrt(2), "im": 0.3 / math.sqrt(2)}])]
    evals = []
    for i, Q in enumerate(points):
        ev = cn.mbw_check(alphas, n, Q, ctx, target=tol)
        evals.append({"Q": ctx.num(Q), "lhs": ev.lhs, "rhs": ev.rhs, "residual": ev.residual,
                      "condition": ev.condition, "precision": ev.precision})
        report.add_check(f"continuation[{i}]", ev.residual, tol)
    report.outputs["continuation"] = evals
    if fuchsian:
        mats = []
        for i, Q in enumerate(points):
            Q = ctx.num(Q)
            if float(abs(Q)) >= 1:
                continue
            cm = cn.connection_matrix_fuchsian(Q, ctx)
            direct = cn.direct_Xb(Q, ctx)
            dec = cm.decompose()
            dev = max(_rel(a, b) for a, b in zip(direct, dec))
            mats.append({"Q": Q, "entries": cm.entries, "F": cm.F, "G": cm.G,
                         "Xb_direct": direct, "Xb_decomposed": dec, "deviation": dev})
            report.add_check(f"connection_matrix[{i}]", dev, 1e-8)
        report.outputs["connection_matrix"] = mats


def cmd_confluence(spec: ProblemSpec, report: ResultReport) -> None:
    """q-log and q-character limits along ``q0^t``, plus the Gamma-ratio expansion."""
    p = spec.params
    q0 = complex(parse_number(p.get("q0", {"re": math.exp(-1), "im": 0})))
    ts = p.get("t", [1e-1, 1e-2, 1e-3])
    path = cf.ConfluencePath(q0 if q0.imag else q0.real, ts)
    samples = p.get("samples", [{"Q": {"re": 0.3, "im": 0.4}, "mu": 0.5}])
    sign = int(p.get("sign", -1))
    tol = _tol(spec, 1e-2)
    traces = []
    for i, smp in enumerate(samples):
        Q = complex(parse_number(smp["Q"]))
        mu = complex(parse_number(smp.get("mu", 0.5)))
        tl = cf.limit_qlog(Q, path, sign=sign)
        tc = cf.limit_qchar(Q, mu, path, sign=sign)
        traces.append({"Q": Q, "mu": mu, "qlog": {"values": tl.values, "deviations": tl.deviations},
                       "qchar": {"values": tc.values, "deviations": tc.deviations},
                       "monotone": tl.monotone and tc.monotone})
        report.add_check(f"qlog_limit[{i}]", tl.final_deviation, tol, require=tl.monotone, monotone=tl.monotone)
        report.add_check(f"qchar_limit[{i}]", tc.final_deviation, tol, require=tc.monotone, monotone=tc.monotone)
    report.outputs["sign"] = sign
    report.outputs["traces"] = traces
    g = cf.gamma_ratio_expansion()
    ref = [1, 0, -5 * float(mpmath.pi) ** 2 / 3, 40 * float(mpmath.zeta(3))]
    report.outputs["gamma_ratio_expansion"] = g
    report.add_check("gamma_ratio_expansion", max(abs(a - b) for a, b in zip(g, ref)), 1e-10)


def cmd_check(spec: ProblemSpec, report: ResultReport) -> None:
    """Built-in identity suites at the given ``q``."""
    ctx = _context(spec)
    q = ctx.qv
    dev = 0.0
    for Q in (0.3, -0.7 + 0.2j, 2.5j, 4.0 - 1.0j, 0.05 + 0.01j):
        a = qs.theta(Q, ctx).value
        b = qs.theta(Q, ctx, method="product").value
        dev = max(dev, _rel(a, b))
    report.add_check("theta_triple_product", dev, 1e-12)
    dev = 0.0
    for Q in (0.3 + 0.1j, -2.0 + 0.5j, 1.5j):
        th = qs.theta(Q, ctx).value
        dev = max(dev, _rel(qs.theta(q * Q, ctx).value, th / Q))
        dev = max(dev, float(abs(qs.qlog(q * Q, ctx) - qs.qlog(Q, ctx) - 1)) / max(1, float(abs(qs.qlog(Q, ctx)))))
        lam = 0.7 + 0.2j
        dev = max(dev, _rel(qs.qchar(lam, q * Q, ctx), lam * qs.qchar(lam, Q, ctx)))
    for x in (0.3, 1.7, 2.5 + 0.5j):
        dev = max(dev, _rel(qs.qgamma(x + 1, ctx), (1 - q ** x) / (1 - q) * qs.qgamma(x, ctx)))
    report.add_check("functional_equations", dev, 1e-10)
    if complex(q).imag == 0:
        lhs, rhs = cn.csc_sum_check(0.3, 0.3 + 0.2j, ctx)
        report.add_check("csc_sum", _rel(lhs, rhs), 1e-9)
    a = [0.3, 0.45, 0.2 + 0.1j, 0.65]
    b = [0.35, 0.55, 0.7 + 0.1j]
    lhs, rhs = cn.phi43_transform_check(a, b, 0.3 + 0.1j, ctx)
    report.add_check("phi43_transform", _rel(lhs, rhs), 1e-9)
    lhs, rhs = cn.fuchsian_phi43_check(0.2, ctx)
    report.add_check("phi43_fuchsian_specialisation", _rel(lhs, rhs), 1e-9)
    alphas, n = _default_alphas(ctx)
    for Q in (0.2, 0.3 * cmath.exp(0.25j * math.pi)):
        ev = cn.mbw_check(alphas, n, Q, ctx, target=1e-7)
        report.add_check(f"continuation_fuchsian[Q={Q:.3g}]", ev.residual, 1e-7)
    generic = [0.45 + 0.2j, -0.3 + 0.5j, 0.6j]
    ev = cn.mbw_check(generic, 2, 0.2, ctx, target=1e-7)
    report.add_check("continuation_generic", ev.residual, 1e-7)
    res = cf.classical_continuation_check(-1)
    report.add_check("classical_continuation", res.deviation, 1e-9, strategy=res.strategy)
    g = cf.gamma_ratio_expansion()
    ref = [1, 0, -5 * float(mpmath.pi) ** 2 / 3, 40 * float(mpmath.zeta(3))]
    report.add_check("gamma_ratio_expansion", max(abs(x - y) for x, y in zip(g, ref)), 1e-10)


_COMMANDS = {"polygon": cmd_polygon, "solve": cmd_solve, "connect": cmd_connect,
             "confluence": cmd_confluence, "check": cmd_check}


def run(spec: ProblemSpec) -> ResultReport:
    inputs = {"task": spec.task, "operator": spec.operator, "q": spec.q, "precision": spec.precision,
              "tol": spec.tol, "order": spec.order, "params": spec.params}
    report = ResultReport(spec.task, to_jsonable(inputs), {})
    t0 = time.perf_counter()
    _COMMANDS[spec.task](spec, report)
    report.outputs = to_jsonable(report.outputs)
    report.metadata = {"precision": spec.precision, "wall_time_s": round(time.perf_counter() - t0, 3)}
    return report


# --------------------------------------------------------------------------
# argument handling
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qdeq", description="q-difference equation toolkit")
    ap.add_argument("--input", help="JSON problem file")
    ap.add_argument("--task", choices=TASKS)
    ap.add_argument("--operator", help="operator in the text DSL, or 'quintic'")
    ap.add_argument("--q", help="base q: decimal, a/b, b^{r} or complex like 0.3+0.4j")
    ap.add_argument("--precision", type=int, help="working precision in bits")
    ap.add_argument("--tol", type=float)
    ap.add_argument("--order", type=int, help="series truncation order N")
    ap.add_argument("--params", help="task parameters as a JSON object")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--out", help="write the report here instead of stdout")
    return ap


def load_spec(args: argparse.Namespace, environ=os.environ) -> ProblemSpec:
    data: dict = {}
    if args.input:
        try:
            with open(args.input) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read {args.input}: {exc}") from exc
    try:
        jsonschema.validate(data, INPUT_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"input does not match schema: {exc.message}") from exc
    precision = 53
    if environ.get("QDEQ_PRECISION"):
        try:
            precision = int(environ["QDEQ_PRECISION"])
        except ValueError as exc:
            raise ValidationError("QDEQ_PRECISION must be an integer") from exc
    precision = data.get("precision", precision)
    if args.precision is not None:
        precision = args.precision
    params = dict(data.get("params", {}))
    if args.params:
        try:
            extra = json.loads(args.params)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"--params is not valid JSON: {exc}") from exc
        if not isinstance(extra, dict):
            raise ValidationError("--params must be a JSON object")
        params.update(extra)
    task = args.task or data.get("task")
    if task is None:
        raise ValidationError("no task given")
    return ProblemSpec(
        task=task,
        operator=args.operator if args.operator is not None else data.get("operator"),
        q=args.q if args.q is not None else data.get("q", "1/2"),
        precision=precision,
        tol=args.tol if args.tol is not None else data.get("tol"),
        order=args.order if args.order is not None else data.get("order"),
        params=params,
    )


def _flatten(x, path="", rows=None):
    rows = [] if rows is None else rows
    if isinstance(x, dict) and set(x) == {"re", "im"}:
        rows.append((path, x["re"], x["im"]))
    elif isinstance(x, dict):
        for k, v in x.items():
            _flatten(v, f"{path}.{k}" if path else k, rows)
    elif isinstance(x, list):
        for i, v in enumerate(x):
            _flatten(v, f"{path}[{i}]", rows)
    else:
        rows.append((path, x, ""))
    return rows


def render(report: ResultReport, fmt: str) -> str:
    d = report.to_dict()
    if fmt == "json":
        return json.dumps(d, indent=2, sort_keys=False, allow_nan=True) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("path", "re", "im"))
    w.writerows(_flatten(d))
    return buf.getvalue()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = load_spec(args)
        report = run(spec)
    except (ValidationError, jsonschema.ValidationError) as exc:
        print(f"qdeq: validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (NumericalError, ZeroDivisionError, OverflowError) as exc:
        print(f"qdeq: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except QdeqError as exc:
        print(f"qdeq: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    text = render(report, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if report.failed:
        names = ", ".join(c["name"] for c in report.failed)
        print(f"qdeq: tolerance exceeded: {names}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
