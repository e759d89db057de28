"""Deterministic JSON and CSV rendering of command results.

Reals are written with 17 significant digits, enough to round-trip every
double, so identical inputs give byte-identical files.  Non-finite reals
become JSON ``null`` (CSV: empty cell).
"""

from __future__ import annotations

import csv
import io
import json
import math

from .errors import ArgumentError


def format_real(v: float) -> str:
    return "%.17g" % v


def _json(value, indent, level) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if value is None or value is True or value is False:
        return json.dumps(value)
    if isinstance(value, float):
        return format_real(value) if math.isfinite(value) else "null"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_json(v, indent, level + 1)}"
                 for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if all(v is None or isinstance(v, (int, float, bool)) for v in value):
            return "[" + ", ".join(_json(v, indent, level + 1) for v in value) + "]"
        return "[\n" + ",\n".join(pad + _json(v, indent, level + 1) for v in value) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(value).__name__}")


def to_json(result: dict) -> str:
    """Single JSON document, keys in insertion order, 2-space indent, trailing newline."""
    return _json(result, 2, 0) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_real(v) if math.isfinite(v) else ""
    if isinstance(v, (list, tuple)):
        return " ".join(_cell(x) for x in v)
    return str(v)


def csv_rows(result: dict) -> tuple[list, list]:
    """Flat (header, rows) table for a result, one layout per command."""
    cmd = result["command"]
    if cmd == "iterate":
        pts, steps = result["orbit"]["points"], result["orbit"]["step_dists"]
        rows = [[n, x, steps[n - 1] if n else None] for n, x in enumerate(pts)]
        return ["n", "x", "step_dist"], rows
    if cmd == "classify":
        header = ["class", "status", "witness_kind", "witness_x", "witness_y", "epsilon",
                  "d_before", "d_after", "certificates"]
        rows = []
        for name, v in result["classes"].items():
            w = v["witness"] or {}
            certs = ";".join(f"{_cell(c['epsilon'])}:{c['r']}:{_cell(c['delta'])}"
                             for c in v["certificates"])
            rows.append([name, v["status"], w.get("kind"), w.get("x"), w.get("y"), w.get("epsilon"),
                         w.get("d_before"), w.get("d_after"), certs])
        return header, rows
    if cmd == "probe":
        s, t = result["sigma_p"], result["theta_p"]
        members = result["sigma_mnp"]
        header = ["p", "sigma_p", "theta_p", "sigma_p_monotone", "theta_p_monotone",
                  "members_monotone", "squeeze"]
        rows = []
        tau = result["space"]["tau_eq"]
        for p in result["p"]:
            if p == 0:
                rows.append([p, s[p], t[p], None, None, None, None])
                continue
            mono = all(row[p] <= row[p - 1] + tau for row in members.values())
            rows.append([p, s[p], t[p], s[p] <= s[p - 1] + tau, t[p] <= t[p - 1] + tau, mono,
                         result["flags"]["squeeze_by_p"][p - 1]])
        return header, rows
    if cmd == "axioms":
        return ["check", "status", "value", "witness"], [
            [c["name"], c["status"], c["value"], c["witness"]] for c in result["checks"]]
    if cmd == "corpus":
        return ["name", "domain", "distance", "map", "s_claimed"], [
            [r["name"], r["domain"], r["distance"], r["map"], r["s_claimed"]]
            for r in result["instances"]]
    raise ArgumentError(f"no CSV layout for command {cmd!r}")


def to_csv(result: dict) -> str:
    header, rows = csv_rows(result)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def render(result: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return to_json(result)
    if fmt == "csv":
        return to_csv(result)
    raise ArgumentError(f"unknown report format {fmt!r}")


def emit_report(result: dict, fmt: str = "json", path=None) -> str:
    """Render ``result`` and write it to ``path`` (if given). Returns the text.

    Raises:
        OSError: when the file cannot be written.
    """
    text = render(result, fmt)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return text
