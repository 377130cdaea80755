"""Command-line front end.

Every command prints one JSON (or CSV) document on stdout. Exit codes:
0 success, 2 usage error, 3 domain error, 4 failed internal self-check.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .analytics import (
    asymptotic_zero_predict,
    conjecture_evidence,
    jensen_inequality_check,
    jensen_residual,
    lambda_estimate,
    mid_gap_radius,
    zero_sum_residual,
    power_sum_identity,
)
from .certificate import certify, coefficient_bound_check, jensen_chain_check, verify_bound
from .errors import InternalCheckFailure, KummerError
from .kummer import classify, derivative, evaluate
from .precision import BigComplex, PrecisionPolicy
from .zeros import find_zeros

log = logging.getLogger("kummerzero")

COMMANDS = ("eval", "zeros", "certify", "identities", "jensen", "asymptotics", "report")
EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_INTERNAL = 0, 2, 3, 4
DIGITS = 25
COEFFICIENT_CHECK_TERMS = 1000

_NUMBER = r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX = re.compile(
    rf"^\s*(?:(?P<re>[+-]?{_NUMBER})(?![\d.]*i))?\s*(?:(?P<sign>[+-])?\s*(?P<im>{_NUMBER})?\s*i)?\s*$"
)


class UsageError(Exception):
    pass


def parse_complex(text: str) -> complex:
    """Parse 'a+bi', 'a', 'bi', '-i', ... (decimal parts only)."""
    match = _COMPLEX.match(text)
    if not match or not text.strip() or (match.group("re") is None and "i" not in text):
        raise UsageError(f"cannot parse complex literal {text!r}")
    re_part = float(match.group("re")) if match.group("re") else 0.0
    im_part = 0.0
    if "i" in text:
        im_part = float(match.group("im")) if match.group("im") else 1.0
        if match.group("sign") == "-":
            im_part = -im_part
        elif match.group("sign") is None and match.group("re") is not None:
            raise UsageError(f"missing sign before imaginary part in {text!r}")
    return complex(re_part, im_part)


@dataclass(frozen=True)
class RunConfig:
    command: str
    alpha: complex
    gamma: complex
    z: complex | None = None
    r_max: float = 40.0
    r: float | None = None
    nodes: int = 256
    power: int | None = None
    output_format: str = "json"
    output_path: Path | None = None
    workers: int = 1
    verbose: bool = False


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kummerzero", description="Zeros of the confluent hypergeometric function 1F1.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--alpha", required=True, help="complex parameter alpha, e.g. 1+0.3i")
    common.add_argument("--gamma", required=True, help="complex parameter gamma")
    common.add_argument("--format", dest="output_format", choices=("json", "csv"), default="json")
    common.add_argument("--output", dest="output_path", type=Path, default=None)
    common.add_argument("--workers", type=int, default=1, help="threads for the zero search")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", parents=[common], help="evaluate 1F1 and its derivative")
    p.add_argument("--z", required=True)
    for name in ("zeros", "identities", "asymptotics", "report", "jensen"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--rmax", dest="r_max", type=float, default=40.0)
        if name == "identities":
            p.add_argument("--power", type=int, choices=(2, 3), default=None)
        if name in ("jensen", "report"):
            p.add_argument("--r", type=float, default=None, help="circle radius (default: a mid-gap radius)")
            p.add_argument("--nodes", type=int, default=256)
    sub.add_parser("certify", parents=[common], help="proof constants C, beta, M")
    return parser


_VALUE_FLAGS = ("--alpha", "--gamma", "--z")


def _attach_negative_values(argv: list[str]) -> list[str]:
    # argparse would read "-1+0i" as an option; glue it to its flag instead
    out: list[str] = []
    it = iter(range(len(argv)))
    for i in it:
        token = argv[i]
        if token in _VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-") and _COMPLEX.match(argv[i + 1]):
            out.append(f"{token}={argv[i + 1]}")
            next(it, None)
        else:
            out.append(token)
    return out


def parse_args(argv: list[str]) -> RunConfig:
    ns = _build_parser().parse_args(_attach_negative_values(list(argv)))
    values = vars(ns)
    config = RunConfig(
        command=ns.command,
        alpha=parse_complex(ns.alpha),
        gamma=parse_complex(ns.gamma),
        z=parse_complex(ns.z) if values.get("z") is not None else None,
        r_max=values.get("r_max", 40.0),
        r=values.get("r"),
        nodes=values.get("nodes", 256),
        power=values.get("power"),
        output_format=ns.output_format,
        output_path=ns.output_path,
        workers=ns.workers,
        verbose=ns.verbose,
    )
    if not (math.isfinite(config.r_max) and config.r_max >= 1):
        raise UsageError("--rmax must be a finite number >= 1")
    if config.r is not None and not (math.isfinite(config.r) and 0 < config.r < config.r_max):
        raise UsageError("--r must lie in (0, rmax)")
    if config.nodes < 1:
        raise UsageError("--nodes must be positive")
    if config.workers < 1:
        raise UsageError("--workers must be positive")
    return config


# -- serialisation ----------------------------------------------------------


class _Raw(str):
    """Preformatted JSON number token."""


def _num(x) -> object:
    """Extended-precision reals get 25 significant digits; doubles their shortest round-trip form."""
    kind = type(x).__name__
    if kind == "mpfr" or isinstance(x, float):
        if x != x:
            return "nan"
        if x in (math.inf, -math.inf):
            return "inf" if x > 0 else "-inf"
        if isinstance(x, float):
            return _Raw(repr(x))
        return _Raw(format(x, f".{DIGITS}g"))
    return x


def _cx(z) -> dict:
    if isinstance(z, BigComplex):
        return {"re": _num(z.re), "im": _num(z.im)}
    if type(z).__name__ == "mpc":
        return {"re": _num(z.real), "im": _num(z.imag)}
    z = complex(z)
    return {"re": _num(z.real), "im": _num(z.imag)}


def _dump(obj, indent: int = 0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, _Raw):
        return str(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + _dump(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, float) or type(obj).__name__ == "mpfr":
        return _dump(_num(obj), indent)
    return json.dumps(obj)


def _flatten(prefix: str, obj, row: dict) -> None:
    if isinstance(obj, dict):
        for key, value in obj.items():
            _flatten(f"{prefix}.{key}" if prefix else key, value, row)
    else:
        row[prefix] = str(obj) if isinstance(obj, _Raw) else obj


def _csv_rows(document: dict) -> list[dict]:
    """One row per record; list-valued sections become their own rows."""
    rows = []
    scalars: dict = {}

    def walk(path, obj):
        if isinstance(obj, list):
            for item in obj:
                row = {"section": path}
                _flatten("", item if isinstance(item, dict) else {"value": item}, row)
                rows.append(row)
        elif isinstance(obj, dict) and obj and all(isinstance(v, dict) and ("name" in v) for v in obj.values()):
            for item in obj.values():
                row = {"section": path}
                _flatten("", item, row)
                rows.append(row)
        elif isinstance(obj, dict):
            for key, value in obj.items():
                walk(f"{path}.{key}" if path else key, value)
        else:
            scalars[path] = str(obj) if isinstance(obj, _Raw) else obj

    walk("", document.get("result", {}))
    header_row = {"section": "summary"}
    header_row.update(scalars)
    return [header_row, *rows]


def _to_csv(document: dict) -> str:
    if "error" in document:
        rows = [{"section": "error", **document["error"]}]
    else:
        rows = _csv_rows(document)
    columns: list[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


# -- command bodies ---------------------------------------------------------


def _identity(report) -> dict:
    return {
        "name": report.name,
        "computed": _cx(report.computed),
        "target": _cx(report.target),
        "tail": _num(report.tail_estimate),
        "residual": _num(report.residual),
        "tolerance": _num(report.tolerance),
        "n_terms": report.n_terms_used,
        "pass": report.passed,
    }


def _zero_list(zs) -> list[dict]:
    return [
        {
            "index": zero.index,
            "re": _num(zero.location.re),
            "im": _num(zero.location.im),
            "multiplicity": zero.multiplicity,
            "residual": _num(zero.residual),
        }
        for zero in zs.zeros
    ]


def _certificate(cert) -> dict:
    return {
        "case": cert.case_tag.value,
        "j": cert.j,
        "C": _num(cert.C),
        "beta": cert.beta,
        "M": _num(cert.M),
    }


def _eval_result(result) -> dict:
    return {
        "value": _cx(result.value),
        "abs_error_estimate": _num(result.abs_error_estimate),
        "method": result.method.value,
        "terms_used": result.terms_used,
    }


def _radius(config: RunConfig, zs) -> float:
    return config.r if config.r is not None else mid_gap_radius(zs, config.r_max / 2)


def _zeros_section(zs) -> dict:
    return {"r_max": _num(zs.r_max), "certified_count": zs.certified_count, "zeros": _zero_list(zs)}


def _jensen_section(params, zs, cert, r, nodes, policy) -> dict:
    chain = jensen_chain_check(cert, zs, r)
    return {
        "r": _num(r),
        "formula": _identity(jensen_residual(params, zs, r, nodes, policy=policy)),
        "inequality": _identity(jensen_inequality_check(params, zs, r, nodes, policy=policy)),
        "chain": {"log_majorant": _num(cert.log_majorant(r)), "pass": chain.passed},
    }


def _asymptotics_section(params, zs) -> list[dict]:
    rows = []
    n = 1
    while True:
        batch = [asymptotic_zero_predict(params, n, branch, zs) for branch in (1, -1)]
        if all(float(abs(p.predicted)) > zs.r_max for p in batch):
            break
        for p in batch:
            row = {"n": p.n, "branch": "+" if p.branch > 0 else "-", "predicted": _cx(p.predicted)}
            if p.matched_zero is not None:
                row["matched_index"] = p.matched_zero.index
                row["gap"] = _num(p.gap)
                if n > 1:
                    row["gap_n_over_log_n"] = _num(p.gap * n / math.log(n))
            rows.append(row)
        n += 1
    return rows


def _identities_section(params, zs, cert, powers) -> dict:
    out: dict = {}
    if zs.zeros:
        out["power_sums"] = {f"p{p}": _identity(power_sum_identity(params, zs, p, cert)) for p in powers}
        count = sum(zero.multiplicity for zero in zs.zeros)
        out["zero_sums"] = {f"k{k}": _identity(zero_sum_residual(params, zs, k, cert=cert)) for k in range(1, min(3, count) + 1)}
    if sum(zero.multiplicity for zero in zs.zeros) >= 10:
        estimate = lambda_estimate(zs)
        out["lambda"] = {"value": _num(estimate.value), "n_zeros": estimate.n_zeros, "caveat": estimate.caveat}
    return out


def _execute(config: RunConfig, policy: PrecisionPolicy) -> dict:
    params = classify(config.alpha, config.gamma)
    if config.command == "eval":
        value = evaluate(params, config.z, policy)
        slope = derivative(params, config.z, policy)
        return {"class": params.kind.value, "value": _eval_result(value), "derivative": _eval_result(slope)}

    if config.command == "certify":
        cert = certify(params)
        check = coefficient_bound_check(cert, COEFFICIENT_CHECK_TERMS)
        return {
            "certificate": _certificate(cert),
            "coefficient_bound": {"m_max": check.m_max, "max_ratio": _num(check.max_ratio), "argmax": check.argmax, "pass": check.passed},
        }

    params.require_generic()
    zs = find_zeros(params, config.r_max, policy, workers=config.workers)
    if config.command == "zeros":
        return _zeros_section(zs)

    cert = certify(params)
    if config.command == "identities":
        powers = (config.power,) if config.power else (2, 3)
        return {"certified_count": zs.certified_count, **_identities_section(params, zs, cert, powers)}
    if config.command == "jensen":
        return _jensen_section(params, zs, cert, _radius(config, zs), config.nodes, policy)
    if config.command == "asymptotics":
        return {"predictions": _asymptotics_section(params, zs)}

    bound = verify_bound(cert, zs)
    check = coefficient_bound_check(cert, COEFFICIENT_CHECK_TERMS)
    evidence = conjecture_evidence(params, zs, cert)
    return {
        "certificate": _certificate(cert),
        "coefficient_bound": {"m_max": check.m_max, "max_ratio": _num(check.max_ratio), "pass": check.passed},
        "zeros": _zeros_section(zs),
        "bound": {
            "M": _num(bound.M),
            "min_slack": _num(bound.min_slack) if bound.min_slack is not None else None,
            "argmin": bound.argmin,
            "violations": list(bound.violations),
        },
        "identities": _identities_section(params, zs, cert, (2, 3)),
        "jensen": _jensen_section(params, zs, cert, _radius(config, zs), config.nodes, policy) if zs.zeros else {},
        "asymptotics": _asymptotics_section(params, zs),
        "conjecture": [
            {"n": row.n, "modulus_ratio": _num(row.modulus_ratio), "ratio": _cx(row.ratio)} for row in evidence.rows
        ],
    }


def _input_echo(config: RunConfig, policy: PrecisionPolicy) -> dict:
    # workers and output location are execution knobs, not inputs: leaving
    # them out keeps output byte-identical across thread counts
    echo = {"command": config.command, "alpha": _cx(config.alpha), "gamma": _cx(config.gamma)}
    if config.z is not None:
        echo["z"] = _cx(config.z)
    if config.command not in ("eval", "certify"):
        echo["r_max"] = _num(config.r_max)
    if config.command in ("jensen", "report"):
        echo["r"] = _num(config.r) if config.r is not None else None
        echo["nodes"] = config.nodes
    if config.command == "identities":
        echo["power"] = config.power
    echo["precision"] = {"base_decimal_digits": policy.base_decimal_digits, "slope": _num(policy.slope)}
    return echo


def run(config: RunConfig, policy: PrecisionPolicy | None = None) -> tuple[int, str]:
    """Execute a validated config; returns (exit code, serialized document)."""
    policy = policy or PrecisionPolicy.from_env()
    document: dict = {"tool": "kummerzero", "version": __version__, "input": _input_echo(config, policy)}
    code = EXIT_OK
    try:
        document["result"] = _execute(config, policy)
    except InternalCheckFailure as exc:
        code = EXIT_INTERNAL
        document["error"] = {"type": type(exc).__name__, "message": str(exc)}
    except KummerError as exc:
        code = EXIT_DOMAIN
        document["error"] = {"type": type(exc).__name__, "message": str(exc)}
    if config.output_format == "csv":
        return code, _to_csv(document)
    return code, _dump(document) + "\n"


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        config = parse_args(argv)
        policy = PrecisionPolicy.from_env()
    except (UsageError, ValueError) as exc:
        print(f"kummerzero: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(stream=sys.stderr, level=logging.INFO if config.verbose else logging.WARNING)
    code, text = run(config, policy)
    if config.output_path is not None:
        config.output_path.write_text(text)
    else:
        sys.stdout.write(text)
    if code:
        log.error("finished with exit code %d", code)
    return code


if __name__ == "__main__":
    sys.exit(main())
