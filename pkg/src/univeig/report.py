"""JSON, CSV and plot-data serialization of inequality reports."""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from importlib import resources
from typing import Iterable

from .inequalities import CSV_COLUMNS, InequalityReport

__all__ = ["scalar_to_json", "scalar_to_text", "report_document", "dump_json", "dump_csv", "dump_plot_data", "load_schema"]

BOUND_THEOREMS = {"yang-bounds", "yang-simple", "eigenmap-bounds", "kohn-bounds", "reilly", "reilly-chain"}


def scalar_to_json(value):
    if value is None:
        return None
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars here")
    if isinstance(value, (int, Fraction)):
        return str(Fraction(value))
    value = float(value)
    return None if math.isnan(value) or math.isinf(value) else value


def scalar_to_text(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, Fraction)):
        return str(Fraction(value))
    return repr(float(value))


def report_document(scenario: str, version: str, reports: Iterable[InequalityReport]) -> dict:
    reports = list(reports)
    return {
        "scenario": scenario,
        "version": version,
        "satisfied": all(r.satisfied for r in reports),
        "reports": [
            {
                "theorem": r.theorem,
                "source": r.source,
                "tolerance": scalar_to_json(r.tolerance),
                "satisfied": r.satisfied,
                "metadata": r.metadata,
                "rows": [
                    {
                        "k": row.k,
                        "lhs": scalar_to_json(row.lhs),
                        "rhs": scalar_to_json(row.rhs),
                        "margin": scalar_to_json(row.margin),
                        "lower": scalar_to_json(row.lower),
                        "upper": scalar_to_json(row.upper),
                        "discriminant": scalar_to_json(row.discriminant),
                        "satisfied": bool(row.satisfied),
                    }
                    for row in r.rows
                ],
            }
            for r in reports
        ],
    }


def dump_json(document: dict) -> str:
    return json.dumps(document, indent=2, sort_keys=False) + "\n"


def dump_csv(reports: Iterable[InequalityReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        theorem = f"{r.theorem}[{r.source}]" if r.source else r.theorem
        for row in r.rows:
            writer.writerow(
                [
                    theorem,
                    row.k,
                    scalar_to_text(row.lhs),
                    scalar_to_text(row.rhs),
                    scalar_to_text(row.margin),
                    scalar_to_text(row.lower),
                    scalar_to_text(row.upper),
                    scalar_to_text(row.discriminant),
                    "true" if row.satisfied else "false",
                ]
            )
    return buf.getvalue()


def dump_plot_data(reports: Iterable[InequalityReport]) -> str:
    """Whitespace-separated numeric blocks, one per report.

    Gap inequalities give ``k margin``; bounds give ``k value bound``.
    Blocks are separated by a blank line and preceded by ``#`` headers.
    """
    out = []
    for r in reports:
        out.append(f"# theorem {r.theorem} {r.source}".rstrip())
        if r.theorem in BOUND_THEOREMS:
            out.append("# k value bound")
            out.extend(f"{row.k} {_num(row.lhs)} {_num(row.rhs)}" for row in r.rows)
        else:
            out.append("# k margin")
            out.extend(f"{row.k} {_num(row.margin)}" for row in r.rows)
        out.append("")
    return "\n".join(out)


def _num(value) -> str:
    if value is None:
        return "nan"
    return repr(float(value))


def load_schema() -> dict:
    with resources.files("univeig.schemas").joinpath("report.schema.json").open() as fh:
        return json.load(fh)
