"""Two-group, two-period panels and their four cell distributions."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterator, NamedTuple

import numpy as np

from .distributions import (
    Binning,
    DiscreteDistribution,
    align_supports,
    mean,
    weighted_pmf,
)
from .errors import InputError, ParseError, SchemaError, ValidationError

__all__ = [
    "CELLS",
    "ObservationRow",
    "PanelDataset",
    "FourCells",
    "parse_panel_csv",
    "read_panel_csv",
    "write_panel_csv",
    "cell_distributions",
]

REQUIRED_COLUMNS = ("cluster_id", "group", "period", "outcome")
CELLS = ((0, 0), (0, 1), (1, 0), (1, 1))


class ObservationRow(NamedTuple):
    cluster_id: str
    group: int
    period: int
    outcome: float
    weight: float = 1.0


@dataclass(frozen=True, eq=False)
class PanelDataset:
    """Observation rows of a 2x2 design, stored column-wise.

    ``group`` is the treatment indicator and ``period`` the time indicator,
    both coded 0/1. Every (group, period) cell must be non-empty and there
    must be at least two clusters, since inference resamples clusters.
    """

    cluster_id: np.ndarray
    group: np.ndarray
    period: np.ndarray
    outcome: np.ndarray
    weight: np.ndarray
    source: str | None = None
    binning: Binning | None = field(default=None)

    def __post_init__(self):
        n = len(self.outcome)
        cols = {
            "cluster_id": np.asarray(self.cluster_id, dtype=object).reshape(-1),
            "group": np.asarray(self.group).reshape(-1),
            "period": np.asarray(self.period).reshape(-1),
            "outcome": np.asarray(self.outcome, dtype=float).reshape(-1),
            "weight": np.asarray(self.weight, dtype=float).reshape(-1),
        }
        for name, col in cols.items():
            if col.size != n:
                raise InputError(f"column {name} has {col.size} entries, expected {n}")
        for name in ("group", "period"):
            col = cols[name]
            if not np.all((col == 0) | (col == 1)):
                raise ValidationError(f"{name} must be coded 0 or 1")
            cols[name] = col.astype(np.int8)
        if not np.all(np.isfinite(cols["outcome"])):
            raise ValidationError("outcomes must be finite")
        if not np.all(np.isfinite(cols["weight"])) or np.any(cols["weight"] <= 0):
            raise ValidationError("weights must be finite and strictly positive")
        for name, col in cols.items():
            col.setflags(write=False)
            object.__setattr__(self, name, col)
        for d, t in CELLS:
            if not np.any((cols["group"] == d) & (cols["period"] == t)):
                raise ValidationError(f"cell (group={d}, period={t}) is empty")
        if np.unique(cols["cluster_id"].astype(str)).size < 2:
            raise ValidationError("at least two distinct clusters are required")

    @classmethod
    def from_rows(cls, rows, source: str | None = None) -> "PanelDataset":
        rows = [ObservationRow(*r) for r in rows]
        if not rows:
            raise ValidationError("panel has no rows")
        cid, g, t, y, w = zip(*rows)
        return cls(
            np.array([str(c) for c in cid], dtype=object),
            np.array(g),
            np.array(t),
            np.array(y, dtype=float),
            np.array(w, dtype=float),
            source=source,
        )

    def __len__(self) -> int:
        return self.outcome.size

    def __eq__(self, other) -> bool:
        if not isinstance(other, PanelDataset):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, c), getattr(other, c))
            for c in ("cluster_id", "group", "period", "outcome", "weight")
        )

    __hash__ = None

    @property
    def rows(self) -> Iterator[ObservationRow]:
        for c, g, t, y, w in zip(
            self.cluster_id, self.group, self.period, self.outcome, self.weight
        ):
            yield ObservationRow(str(c), int(g), int(t), float(y), float(w))

    @property
    def n_clusters(self) -> int:
        return int(np.unique(self.cluster_id.astype(str)).size)

    def cell_mask(self, d: int, t: int) -> np.ndarray:
        return (self.group == d) & (self.period == t)

    def with_weights(self, weight) -> "PanelDataset":
        return PanelDataset(
            self.cluster_id, self.group, self.period, self.outcome, weight, self.source
        )

    def with_outcomes(self, outcome) -> "PanelDataset":
        return PanelDataset(
            self.cluster_id, self.group, self.period, outcome, self.weight, self.source
        )


@dataclass(frozen=True, eq=False)
class FourCells:
    """The four (group, period) distributions on a common support, plus cell means.

    ``dists[d][t]`` and ``means[d][t]`` index by group ``d`` and period ``t``.
    For observed data the (1, 1) cell holds treated outcomes, which only the
    falsification logic reads and never as untreated outcomes.
    """

    dists: tuple
    means: tuple

    def __post_init__(self):
        support = self.dists[0][0].support
        for d, t in CELLS:
            if not np.array_equal(self.dists[d][t].support, support):
                raise InputError("the four cell distributions must share one support")

    @classmethod
    def from_dists(cls, d00, d01, d10, d11, means=None) -> "FourCells":
        """Align four distributions; means default to the distributions' own means."""
        a00, a01, a10, a11 = align_supports([d00, d01, d10, d11])
        dists = ((a00, a01), (a10, a11))
        if means is None:
            means = tuple(tuple(mean(dists[d][t]) for t in (0, 1)) for d in (0, 1))
        return cls(dists, tuple(tuple(float(m) for m in row) for row in means))

    @property
    def support(self) -> np.ndarray:
        return self.dists[0][0].support

    def cell(self, d: int, t: int) -> DiscreteDistribution:
        return self.dists[d][t]

    def masses(self) -> dict[str, np.ndarray]:
        """Mass arrays keyed ``d0t0``, ``d0t1``, ``d1t0``, ``d1t1``."""
        return {f"d{d}t{t}": self.dists[d][t].masses for d, t in CELLS}


# -- CSV ----------------------------------------------------------------------


def _text_stream(stream) -> IO[str]:
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(bytes(stream).decode("utf-8-sig"), newline="")
    if isinstance(stream, io.TextIOBase):
        return stream
    return io.TextIOWrapper(stream, encoding="utf-8-sig", newline="")


def _parse_binary(values: list[str], name: str) -> np.ndarray:
    out = np.empty(len(values), dtype=np.int8)
    for i, v in enumerate(values):
        v = v.strip()
        if v == "0":
            out[i] = 0
        elif v == "1":
            out[i] = 1
        else:
            raise ParseError(f"{name} must be 0 or 1, got {v!r}", row=i + 2)
    return out


def _parse_float(values: list[str], name: str) -> np.ndarray:
    try:
        return np.array(values, dtype=float)
    except ValueError:
        pass
    for i, v in enumerate(values):
        try:
            float(v)
        except ValueError:
            raise ParseError(f"cannot parse {name} value {v!r}", row=i + 2) from None
    raise AssertionError("unreachable")


def parse_panel_csv(stream, source: str | None = None) -> PanelDataset:
    """Parse a panel CSV with header ``cluster_id,group,period,outcome[,weight]``.

    ``stream`` may be bytes, a binary file object or a text file object.
    Row numbers in errors count the header as row 1.

    Raises
    ------
    SchemaError
        A required column is missing.
    ParseError
        A cell cannot be parsed.
    ValidationError
        A (group, period) cell is empty or there are fewer than two clusters.
    """
    reader = csv.reader(_text_stream(stream))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise SchemaError("cluster_id") from None
    for col in REQUIRED_COLUMNS:
        if col not in header:
            raise SchemaError(col)
    index = {name: header.index(name) for name in (*REQUIRED_COLUMNS, "weight") if name in header}
    columns: dict[str, list[str]] = {name: [] for name in index}
    width = len(header)
    for lineno, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != width:
            raise ParseError(f"expected {width} fields, found {len(record)}", row=lineno)
        for name, j in index.items():
            columns[name].append(record[j])
    if not columns["outcome"]:
        raise ValidationError("panel has no rows")
    n = len(columns["outcome"])
    weight = _parse_float(columns["weight"], "weight") if "weight" in columns else np.ones(n)
    return PanelDataset(
        np.array([c.strip() for c in columns["cluster_id"]], dtype=object),
        _parse_binary(columns["group"], "group"),
        _parse_binary(columns["period"], "period"),
        _parse_float(columns["outcome"], "outcome"),
        weight,
        source=source,
    )


def read_panel_csv(path) -> PanelDataset:
    path = Path(path)
    with path.open("rb") as fh:
        return parse_panel_csv(fh, source=str(path))


def write_panel_csv(panel: PanelDataset, stream: IO[str]) -> None:
    """Write ``panel`` in the format read by :func:`parse_panel_csv`.

    Floats are written with ``repr`` so a round trip is exact.
    """
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["cluster_id", "group", "period", "outcome", "weight"])
    for c, g, t, y, w in zip(
        panel.cluster_id, panel.group.tolist(), panel.period.tolist(),
        panel.outcome.tolist(), panel.weight.tolist(),
    ):
        writer.writerow([c, g, t, repr(y), repr(w)])


# -- cells --------------------------------------------------------------------


def cell_distributions(panel: PanelDataset, binning: Binning | None = None) -> FourCells:
    """Weighted empirical PMFs of the four cells on their union support.

    Means are computed from the raw outcomes even when ``binning`` is given,
    so binning coarsens only the distributions.
    """
    labels = panel.outcome if binning is None else binning.labels(panel.outcome)
    dists = []
    means = []
    for d, t in CELLS:
        mask = panel.cell_mask(d, t)
        if not mask.any():
            raise ValidationError(f"cell (group={d}, period={t}) is empty")
        w = panel.weight[mask]
        dists.append(weighted_pmf(labels[mask], w))
        means.append(float(np.dot(panel.outcome[mask], w) / w.sum()))
    return FourCells.from_dists(*dists, means=((means[0], means[1]), (means[2], means[3])))
