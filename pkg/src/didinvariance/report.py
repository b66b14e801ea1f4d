"""JSON reports, plot CSVs and the quadruple/pair JSON formats."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import IO

import numpy as np

from . import __version__
from .distributions import DiscreteDistribution
from .errors import InputError
from .inference import TestResult
from .panel import CELLS, FourCells

__all__ = [
    "SCHEMA_VERSION",
    "ReportDocument",
    "build_report",
    "write_plot_csv",
    "read_quadruple",
    "quadruple_to_dict",
    "read_pair",
    "load_json",
]

SCHEMA_VERSION = 1

_NONFINITE = {"Infinity": math.inf, "-Infinity": -math.inf}


def _encode(value):
    if isinstance(value, float) and not math.isfinite(value):
        if math.isnan(value):
            return None
        return "Infinity" if value > 0 else "-Infinity"
    if isinstance(value, dict):
        return {k: _encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    return value


def _decode(value):
    if isinstance(value, str) and value in _NONFINITE:
        return _NONFINITE[value]
    if isinstance(value, dict):
        return {k: _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    return value


def _num(x):
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


@dataclass
class ReportDocument:
    """Everything ``didinvariance test`` writes, as one JSON object.

    Non-finite statistics are stored as the strings ``"Infinity"`` and
    ``"-Infinity"``; undefined values (excluded bins) as null.
    """

    tool_version: str
    command: list
    config: dict
    bins: list
    summary: dict
    correlation: dict = field(default_factory=dict)
    decomposition: dict | None = None
    cic: dict | None = None
    warnings: list = field(default_factory=list)
    schema_version: int = SCHEMA_VERSION

    def to_json(self) -> str:
        return json.dumps(_encode(asdict(self)), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ReportDocument":
        data = _decode(json.loads(text))
        if data.get("schema_version") != SCHEMA_VERSION:
            raise InputError(f"unsupported report schema_version {data.get('schema_version')!r}")
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in data.items() if k in names})


def _bin_flags(estimate: float, se: float, zero_se: bool) -> list[str]:
    flags = []
    if estimate < 0:
        flags.append("negative")
    if zero_se:
        flags.append("zero_se")
    return flags


def build_report(
    result: TestResult,
    command: list[str],
    decomposition: dict | None = None,
    cic: dict | None = None,
) -> ReportDocument:
    zero = set(result.zero_se_bins)
    bins = []
    for i, y in enumerate(np.asarray(result.support).tolist()):
        est = float(result.estimates[i])
        se = float(result.se[i]) if len(result.se) else None
        stud = _num(result.studentized[i]) if len(result.studentized) else None
        bins.append(
            {
                "support": y,
                "implied_pmf": est,
                "se": se,
                "studentized": stud,
                "flags": _bin_flags(est, se or 0.0, y in zero),
            }
        )
    summary = {
        "status": result.status,
        "error": result.error,
        "statistic": result.statistic,
        "argmin": result.argmin,
        "critical_value": _num(result.critical_value),
        "p_value": _num(result.p_value),
        "decision": result.decision,
        "alpha": result.config.alpha,
        "n_bins": len(bins),
        "studentization": "raw cluster-bootstrap covariance, replicates not recentered",
    }
    return ReportDocument(
        tool_version=__version__,
        command=list(command),
        config=asdict(result.config),
        bins=bins,
        summary=summary,
        correlation=dict(result.correlation),
        decomposition=decomposition,
        cic=cic,
        warnings=list(result.warnings),
    )


def write_plot_csv(result: TestResult, stream: IO[str]) -> None:
    """Columns ``support,implied_pmf,se,flag`` in ascending support order."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["support", "implied_pmf", "se", "flag"])
    zero = set(result.zero_se_bins)
    for i, y in enumerate(np.asarray(result.support).tolist()):
        est = float(result.estimates[i])
        se = float(result.se[i]) if len(result.se) else float("nan")
        writer.writerow([repr(y), repr(est), repr(se), ";".join(_bin_flags(est, se, y in zero))])


# -- quadruple and pair JSON --------------------------------------------------


def load_json(path) -> dict:
    try:
        with Path(path).open("r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("expected a JSON object")
    return data


def _masses(data: dict, key: str, n: int) -> np.ndarray:
    try:
        arr = np.asarray(data[key], dtype=float)
    except KeyError:
        raise InputError(f"missing {key!r}") from None
    except (TypeError, ValueError):
        raise InputError(f"{key!r} must be an array of numbers") from None
    if arr.ndim != 1 or arr.size != n:
        raise InputError(f"{key!r} must have one mass per support point ({n})")
    return arr


def _support(data: dict) -> np.ndarray:
    try:
        support = np.asarray(data["support"], dtype=float)
    except KeyError:
        raise InputError("missing 'support'") from None
    except (TypeError, ValueError):
        raise InputError("'support' must be an array of numbers") from None
    if support.ndim != 1 or support.size == 0:
        raise InputError("'support' must be a non-empty array")
    return support


def read_quadruple(data: dict) -> FourCells:
    """``{"support": [...], "cells": {"d0t0": [...], ...}}`` to :class:`FourCells`."""
    support = _support(data)
    cells = data.get("cells")
    if not isinstance(cells, dict):
        raise InputError("missing 'cells' object")
    dists = [
        DiscreteDistribution(support, _masses(cells, f"d{d}t{t}", support.size))
        for d, t in CELLS
    ]
    return FourCells.from_dists(*dists)


def quadruple_to_dict(cells: FourCells) -> dict:
    return {
        "support": cells.support.tolist(),
        "cells": {k: v.tolist() for k, v in cells.masses().items()},
    }


def read_pair(data: dict) -> tuple[DiscreteDistribution, DiscreteDistribution]:
    """``{"support": [...], "f1": [...], "f2": [...]}`` to two distributions."""
    support = _support(data)
    return (
        DiscreteDistribution(support, _masses(data, "f1", support.size)),
        DiscreteDistribution(support, _masses(data, "f2", support.size)),
    )
