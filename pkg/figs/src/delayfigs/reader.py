"""Readers for the two CSV schemas the delaylab CLI emits.

The column lists are the interface contract with the producer; they are
checked verbatim against file headers before any value is parsed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import csv

import numpy as np

from .exceptions import SchemaMismatchError

SWEEP_COLUMNS = [
    "experiment", "m", "n",
    "param1_name", "param1", "param2_name", "param2",
    "sample", "seed",
    "sigma_max", "sigma_min", "kappa_log10", "gen_det_log10",
    "bound_kappa_log10", "bound_det_log10",
    "embedding_guaranteed", "wall_time_ms",
]

REGION_COLUMNS = [
    "sigma_min", "weak_boundary", "small_gain_boundary", "expansive_boundary",
]

_NUMERIC = [
    "sigma_max", "sigma_min", "kappa_log10", "gen_det_log10",
    "bound_kappa_log10", "bound_det_log10", "embedding_guaranteed",
]


@dataclass(frozen=True)
class SweepRow:
    """One parsed sweep CSV row; aggregate rows carry 'mean'/'var' in sample."""

    m: int
    n: int
    param1_name: str
    param1: float | None
    param2_name: str
    param2: float | None
    sample: str
    values: dict = field(repr=False)

    @property
    def is_aggregate(self) -> bool:
        return self.sample in ("mean", "var")


@dataclass(frozen=True)
class SweepTable:
    """All rows of one sweep CSV, split by role."""

    experiment: str
    samples: list = field(repr=False)
    means: list = field(repr=False)
    variances: list = field(repr=False)

    def distinct(self, attr: str) -> list:
        return sorted({getattr(r, attr) for r in self.means})


def _float_or_none(text: str) -> float | None:
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        raise SchemaMismatchError(f"cannot parse number {text!r}") from None


def _parse_sweep_row(raw: list[str], line_no: int) -> tuple[str, SweepRow]:
    if len(raw) != len(SWEEP_COLUMNS):
        raise SchemaMismatchError(
            f"line {line_no}: expected {len(SWEEP_COLUMNS)} fields, "
            f"got {len(raw)}"
        )
    rec = dict(zip(SWEEP_COLUMNS, raw))
    try:
        m = int(rec["m"])
        n = int(rec["n"])
    except ValueError:
        raise SchemaMismatchError(f"line {line_no}: bad m/n") from None
    values = {c: _float_or_none(rec[c]) for c in _NUMERIC}
    row = SweepRow(
        m=m, n=n,
        param1_name=rec["param1_name"], param1=_float_or_none(rec["param1"]),
        param2_name=rec["param2_name"], param2=_float_or_none(rec["param2"]),
        sample=rec["sample"],
        values=values,
    )
    return rec["experiment"], row


def read_sweep_csv(path: str, expected_experiment: str | None = None) -> SweepTable:
    """Load a sweep CSV, enforcing the schema and the experiment tag.

    Raises SchemaMismatchError when the header deviates, a row is
    malformed, or the experiment column disagrees with
    ``expected_experiment``.
    """
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatchError(f"{path}: empty file") from None
        if header != SWEEP_COLUMNS:
            raise SchemaMismatchError(
                f"{path}: header does not match the sweep schema"
            )
        experiment = None
        samples, means, variances = [], [], []
        for line_no, raw in enumerate(reader, start=2):
            if not raw:
                continue
            exp, row = _parse_sweep_row(raw, line_no)
            if experiment is None:
                experiment = exp
            elif exp != experiment:
                raise SchemaMismatchError(
                    f"{path}: mixed experiments {experiment!r} and {exp!r}"
                )
            if row.sample == "mean":
                means.append(row)
            elif row.sample == "var":
                variances.append(row)
            else:
                samples.append(row)
    if experiment is None:
        raise SchemaMismatchError(f"{path}: no data rows")
    if expected_experiment is not None and experiment != expected_experiment:
        raise SchemaMismatchError(
            f"{path}: holds experiment {experiment!r}, "
            f"figure kind needs {expected_experiment!r}"
        )
    return SweepTable(experiment=experiment, samples=samples,
                      means=means, variances=variances)


@dataclass(frozen=True)
class RegionCurves:
    sigma_min: np.ndarray = field(repr=False)
    weak: np.ndarray = field(repr=False)
    small_gain: np.ndarray = field(repr=False)
    expansive: np.ndarray = field(repr=False)


def read_region_csv(path: str) -> RegionCurves:
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatchError(f"{path}: empty file") from None
        if header != REGION_COLUMNS:
            raise SchemaMismatchError(
                f"{path}: header does not match the region schema"
            )
        cols = {c: [] for c in REGION_COLUMNS}
        for line_no, raw in enumerate(reader, start=2):
            if not raw:
                continue
            if len(raw) != len(REGION_COLUMNS):
                raise SchemaMismatchError(
                    f"{path}: line {line_no} has {len(raw)} fields"
                )
            for c, v in zip(REGION_COLUMNS, raw):
                val = _float_or_none(v)
                if val is None:
                    raise SchemaMismatchError(
                        f"{path}: line {line_no} has an empty field"
                    )
                cols[c].append(val)
    if not cols["sigma_min"]:
        raise SchemaMismatchError(f"{path}: no data rows")
    return RegionCurves(
        sigma_min=np.array(cols["sigma_min"]),
        weak=np.array(cols["weak_boundary"]),
        small_gain=np.array(cols["small_gain_boundary"]),
        expansive=np.array(cols["expansive_boundary"]),
    )
