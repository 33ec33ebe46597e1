"""Reproducible parameter sweeps over delay-matrix families.

A sweep is a grid of cells (weight family x lag depth x target
parameters); each cell draws ``samples_per_cell`` weights with seeds
derived from the master seed by a splitmix-style mix of (cell index,
sample index), so any cell can be recomputed in isolation and the whole
run is byte-reproducible regardless of thread count.  Cells are
independent work units executed on a thread pool; results are gathered
in cell order before writing.

Output is one CSV (written atomically) with per-sample rows followed by
per-cell mean/variance rows, plus a JSON sidecar recording the exact
configuration and package version.  Only the wall_time_ms column varies
between identical runs.
"""

from __future__ import annotations

import enum
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, bounds, matcore
from .delaymat import DENSE_BUDGET, DelaySpec, WClass, build_delay_matrix
from .exceptions import InvalidParamsError, OutOfBudgetError
from .matio import atomic_write_text

_LN10 = math.log(10.0)

CSV_COLUMNS = [
    "experiment", "m", "n",
    "param1_name", "param1", "param2_name", "param2",
    "sample", "seed",
    "sigma_max", "sigma_min", "kappa_log10", "gen_det_log10",
    "bound_kappa_log10", "bound_det_log10",
    "embedding_guaranteed", "wall_time_ms",
]


class Experiment(enum.Enum):
    SCALAR_COND = "scalar-cond"
    SCALAR_DET = "scalar-det"
    HERM_GRID = "herm-grid"
    REGION = "region"
    GENERAL_COND = "general-cond"
    GENERAL_DET = "general-det"
    LAG_GROWTH = "lag-growth"
    WCLASS_SPECTRA = "wclass-spectra"


WCLASS_CODES = {"zero": 0, "identity": 1, "unitary": 2, "gaussian": 3}

REGION_COLUMNS = [
    "sigma_min", "weak_boundary", "small_gain_boundary", "expansive_boundary",
]


def _lin(a: float, b: float, count: int) -> list[float]:
    return [float(v) for v in np.linspace(a, b, count)]


def default_grids(experiment: Experiment) -> dict[str, list]:
    """Grid defaults reproducing the reference figures for each experiment.

    general-cond/general-det stop at n = 8 because the m = 35, n = 16
    corner would blow the dense budget; deeper lags need an explicit
    grid with smaller m.
    """
    if experiment in (Experiment.SCALAR_COND, Experiment.SCALAR_DET):
        return {"omega": _lin(0.0, 2.0, 81), "n": [4, 8, 16]}
    if experiment is Experiment.HERM_GRID:
        return {
            "lambda1": _lin(-2.0, 2.0, 41),
            "lambda2": _lin(-2.0, 2.0, 41),
            "n": [2, 8, 32],
        }
    if experiment is Experiment.REGION:
        return {"resolution": [201]}
    if experiment in (Experiment.GENERAL_COND, Experiment.GENERAL_DET):
        return {
            "m": list(range(1, 36)),
            "sigma_max": _lin(0.0, 1.0, 35),
            "n": [4, 8],
        }
    if experiment is Experiment.LAG_GROWTH:
        return {
            "m": [1, 2, 4, 8],
            "n": [1, 2, 4, 8],
            "sigma_max": _lin(0.0, 0.5, 100),
        }
    return {
        "class": ["zero", "identity", "unitary", "gaussian"],
        "sigma_target": [0.25, 0.5, 1.0],
        "m": [4],
        "n": [8],
    }


DEFAULT_SAMPLES = {
    Experiment.SCALAR_COND: 1,
    Experiment.SCALAR_DET: 1,
    Experiment.HERM_GRID: 1,
    Experiment.REGION: 1,
    Experiment.GENERAL_COND: 1,
    Experiment.GENERAL_DET: 1,
    Experiment.LAG_GROWTH: 100,
    Experiment.WCLASS_SPECTRA: 25,
}


@dataclass
class SweepConfig:
    """Everything that determines a sweep's output bytes (plus thread count)."""

    experiment: Experiment
    out_path: str
    seed: int = 0
    grids: dict = field(default_factory=dict)
    samples_per_cell: int | None = None
    threads: int = 0

    def __post_init__(self):
        self.experiment = Experiment(self.experiment)
        if not self.out_path:
            raise InvalidParamsError("out_path must be a non-empty path")
        self.seed = int(self.seed)
        if self.seed < 0:
            raise InvalidParamsError("seed must be >= 0")
        base = default_grids(self.experiment)
        grids = dict(self.grids or {})
        unknown = set(grids) - set(base)
        if unknown:
            raise InvalidParamsError(
                f"unknown grid keys for {self.experiment.value}: {sorted(unknown)}"
            )
        merged = {}
        for key, default in base.items():
            raw = grids.get(key, default)
            if not isinstance(raw, (list, tuple, np.ndarray)) or len(raw) == 0:
                raise InvalidParamsError(f"grid {key!r} must be a non-empty list")
            merged[key] = [v.item() if hasattr(v, "item") else v for v in raw]
        self.grids = merged
        if self.samples_per_cell is None:
            self.samples_per_cell = DEFAULT_SAMPLES[self.experiment]
        self.samples_per_cell = int(self.samples_per_cell)
        if self.samples_per_cell < 1:
            raise InvalidParamsError("samples_per_cell must be >= 1")
        self.threads = int(self.threads)

    def to_json_dict(self) -> dict:
        return {
            "experiment": self.experiment.value,
            "out_path": self.out_path,
            "seed": self.seed,
            "grids": self.grids,
            "samples_per_cell": self.samples_per_cell,
            "threads": self.threads,
            "columns": CSV_COLUMNS,
            "version": __version__,
        }


_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(master: int, cell_index: int, sample_index: int) -> int:
    """Per-(cell, sample) seed: two chained splitmix64 steps off the master.

    Stable under grid reordering only to the extent cell indices are;
    the cell enumeration order is part of each experiment's contract.
    """
    s = _splitmix(master + _GOLDEN * (cell_index + 1))
    return _splitmix(s + _GOLDEN * (sample_index + 1))


def random_weight_with_norm(m: int, sigma_target: float, seed: int) -> np.ndarray:
    """Seeded Gaussian weight rescaled so sigma_max equals the target.

    A zero target returns the zero matrix.  Rescaling is exact up to one
    floating multiply, so sigma_max(W) matches the target to ~1e-15
    relative.
    """
    if m < 1:
        raise InvalidParamsError("m must be positive")
    sigma_target = float(sigma_target)
    if not math.isfinite(sigma_target) or sigma_target < 0:
        raise InvalidParamsError("sigma_target must be finite and >= 0")
    if sigma_target == 0.0:
        return np.zeros((m, m))
    a = np.random.default_rng(seed).standard_normal((m, m))
    smax = float(matcore.singular_values(a)[0])
    return a * (sigma_target / smax)


def random_weight_class(m: int, class_name: str, sigma_target: float,
                        seed: int) -> np.ndarray:
    """Build a weight from one of the named generator classes.

    zero and identity ignore the target; unitary weights come from the
    sign-fixed QR factor of a seeded Gaussian (all singular values 1);
    gaussian weights are rescaled to the target norm.
    """
    if class_name not in WCLASS_CODES:
        raise InvalidParamsError(f"unknown weight class {class_name!r}")
    if class_name == "zero":
        return np.zeros((m, m))
    if class_name == "identity":
        return np.eye(m)
    if class_name == "unitary":
        a = np.random.default_rng(seed).standard_normal((m, m))
        q, r = np.linalg.qr(a)
        # Fix the gauge so the factor is unique and runs reproduce.
        q = q * np.sign(np.diag(r))
        return q
    return random_weight_with_norm(m, sigma_target, seed)


@dataclass(frozen=True)
class SweepCell:
    index: int
    m: int
    n: int
    param1_name: str
    param1: float | str
    param2_name: str
    param2: float | str
    make_spec: object = field(repr=False)  # callable seed -> DelaySpec


@dataclass(frozen=True)
class SweepRecord:
    """One measured sample: cell identity, seed, summary and bounds."""

    experiment: str
    m: int
    n: int
    param1_name: str
    param1: float | str
    param2_name: str
    param2: float | str
    sample: int | str
    seed: int | str
    sigma_max: float
    sigma_min: float
    kappa_log10: float
    gen_det_log10: float
    bound_kappa_log10: float
    bound_det_log10: float
    embedding_guaranteed: float
    wall_time_ms: float | str

    def to_row(self) -> list[str]:
        def num(v):
            if isinstance(v, str):
                return v
            if isinstance(v, (int, np.integer)):
                return str(int(v))
            return repr(float(v))

        return [
            self.experiment, str(self.m), str(self.n),
            self.param1_name, num(self.param1),
            self.param2_name, num(self.param2),
            num(self.sample), num(self.seed),
            num(self.sigma_max), num(self.sigma_min),
            num(self.kappa_log10), num(self.gen_det_log10),
            num(self.bound_kappa_log10), num(self.bound_det_log10),
            num(self.embedding_guaranteed), num(self.wall_time_ms),
        ]


def _spec_for_general(m: int, n: int, sigma_target: float, seed: int) -> DelaySpec:
    w = random_weight_with_norm(m, sigma_target, seed)
    cls = WClass.ZERO if sigma_target == 0.0 else WClass.GENERAL
    return DelaySpec(n=n, m=m, weight=w, w_class=cls)


def _build_cells(cfg: SweepConfig) -> list[SweepCell]:
    g = cfg.grids
    exp = cfg.experiment
    cells: list[SweepCell] = []

    def add(m, n, p1n, p1, p2n, p2, make_spec):
        cells.append(SweepCell(len(cells), int(m), int(n), p1n, p1, p2n, p2, make_spec))

    if exp in (Experiment.SCALAR_COND, Experiment.SCALAR_DET):
        for n in g["n"]:
            for omega in g["omega"]:
                add(1, n, "omega", float(omega), "", "",
                    lambda seed, o=omega, nn=n: DelaySpec.scalar(float(o), int(nn)))
    elif exp is Experiment.HERM_GRID:
        for n in g["n"]:
            for lam1 in g["lambda1"]:
                for lam2 in g["lambda2"]:
                    add(2, n, "lambda1", float(lam1), "lambda2", float(lam2),
                        lambda seed, a=lam1, b=lam2, nn=n: DelaySpec(
                            n=int(nn), m=2,
                            weight=np.diag([float(a), float(b)]),
                            w_class=WClass.HERMITIAN))
    elif exp in (Experiment.GENERAL_COND, Experiment.GENERAL_DET):
        for n in g["n"]:
            for m in g["m"]:
                for st in g["sigma_max"]:
                    add(m, n, "sigma_max_target", float(st), "", "",
                        lambda seed, mm=m, nn=n, t=st: _spec_for_general(
                            int(mm), int(nn), float(t), seed))
    elif exp is Experiment.LAG_GROWTH:
        for m in g["m"]:
            for n in g["n"]:
                for st in g["sigma_max"]:
                    add(m, n, "sigma_max_target", float(st), "", "",
                        lambda seed, mm=m, nn=n, t=st: _spec_for_general(
                            int(mm), int(nn), float(t), seed))
    elif exp is Experiment.WCLASS_SPECTRA:
        for cls in g["class"]:
            if cls not in WCLASS_CODES:
                raise InvalidParamsError(f"unknown weight class {cls!r}")
            targets = g["sigma_target"] if cls == "gaussian" else (
                [0.0] if cls == "zero" else [1.0])
            for st in targets:
                for m in g["m"]:
                    for n in g["n"]:
                        add(m, n, "class_code", float(WCLASS_CODES[cls]),
                            "sigma_target", float(st),
                            lambda seed, c=cls, mm=m, nn=n, t=st: _wclass_spec(
                                c, int(mm), int(nn), float(t), seed))
    else:
        raise InvalidParamsError(f"no cell builder for {exp.value}")
    return cells


_WCLASS_TAGS = {
    "zero": WClass.ZERO,
    "identity": WClass.HERMITIAN,
    "unitary": WClass.UNITARY,
}


def _wclass_spec(class_name: str, m: int, n: int, sigma_target: float,
                 seed: int) -> DelaySpec:
    w = random_weight_class(m, class_name, sigma_target, seed)
    if class_name == "gaussian":
        cls = WClass.ZERO if sigma_target == 0.0 else WClass.GENERAL
    else:
        cls = _WCLASS_TAGS[class_name]
    return DelaySpec(n=n, m=m, weight=w, w_class=cls)


def _measure_cell(cfg: SweepConfig, cell: SweepCell) -> list[SweepRecord]:
    records = []
    for sample in range(cfg.samples_per_cell):
        seed = derive_seed(cfg.seed, cell.index, sample)
        t0 = time.perf_counter()
        made = cell.make_spec(seed)
        if isinstance(made, DelaySpec):
            spec = made
        else:  # bare weight matrix from a class generator
            w = np.asarray(made)
            cls = WClass.ZERO if not np.any(w) else WClass.GENERAL
            spec = DelaySpec(n=cell.n, m=cell.m, weight=w, w_class=cls)
        summary = matcore.spectral_summary(build_delay_matrix(spec))
        report = bounds.bound_report(spec)
        wall = (time.perf_counter() - t0) * 1e3
        records.append(SweepRecord(
            experiment=cfg.experiment.value,
            m=cell.m, n=cell.n,
            param1_name=cell.param1_name, param1=cell.param1,
            param2_name=cell.param2_name, param2=cell.param2,
            sample=sample, seed=seed,
            sigma_max=summary.sigma_max,
            sigma_min=summary.sigma_min,
            kappa_log10=math.log10(summary.kappa) if summary.kappa > 0 else -math.inf,
            gen_det_log10=summary.gen_det_log / _LN10,
            bound_kappa_log10=(
                math.log10(report.kappa_bound)
                if math.isfinite(report.kappa_bound) else math.inf),
            bound_det_log10=(
                report.det_bound_log / _LN10
                if math.isfinite(report.det_bound_log) else math.inf),
            embedding_guaranteed=int(report.embedding.guaranteed),
            wall_time_ms=wall,
        ))
    return records


def _aggregate(cell_records: list[SweepRecord]) -> list[SweepRecord]:
    first = cell_records[0]
    cols = ["sigma_max", "sigma_min", "kappa_log10", "gen_det_log10",
            "bound_kappa_log10", "bound_det_log10", "embedding_guaranteed"]
    data = {c: np.array([float(getattr(r, c)) for r in cell_records]) for c in cols}
    out = []
    for stat in ("mean", "var"):
        with np.errstate(invalid="ignore"):
            vals = {
                c: float(np.mean(v)) if stat == "mean" else float(np.var(v))
                for c, v in data.items()
            }
        out.append(SweepRecord(
            experiment=first.experiment, m=first.m, n=first.n,
            param1_name=first.param1_name, param1=first.param1,
            param2_name=first.param2_name, param2=first.param2,
            sample=stat, seed="",
            wall_time_ms="",
            **vals,
        ))
    return out


def format_sweep_csv(records: list[SweepRecord],
                     aggregates: list[SweepRecord]) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for r in records:
        buf.write(",".join(r.to_row()) + "\n")
    for r in aggregates:
        buf.write(",".join(r.to_row()) + "\n")
    return buf.getvalue()


def region_curves(resolution: int = 201, out_path: str | None = None):
    """Boundary curves of the guaranteed-embedding region over sigma_min in [0, 2].

    Returns a dict of four arrays (sigma_min plus one boundary per
    condition).  The small-gain boundary is the sigma_max at which the
    threshold ratio crosses sigma_min^2, found by bisection; it caps at
    1 where the condition stops applying.
    """
    if resolution < 2:
        raise InvalidParamsError("resolution must be >= 2")
    smin = np.linspace(0.0, 2.0, int(resolution))
    weak = 0.5 * (1.0 + smin * smin)
    expansive = smin * smin - smin + 1.0
    small_gain = np.empty_like(smin)
    for i, s in enumerate(smin):
        small_gain[i] = _small_gain_boundary_at(float(s))
    curves = {
        "sigma_min": smin,
        "weak_boundary": weak,
        "small_gain_boundary": small_gain,
        "expansive_boundary": expansive,
    }
    if out_path is not None:
        lines = [",".join(REGION_COLUMNS)]
        for i in range(len(smin)):
            lines.append(",".join(
                repr(float(curves[c][i])) for c in REGION_COLUMNS))
        atomic_write_text(out_path, "\n".join(lines) + "\n")
    return curves


def _small_gain_boundary_at(smin: float) -> float:
    if smin >= 1.0:
        return 1.0
    target = smin * smin
    lo, hi = 0.0, 1.0
    # ratio(0) = -1 < target and ratio(1) = 1 >= target; ratio is
    # increasing on [0, 1], so plain bisection converges.
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if bounds.small_gain_ratio(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def run_sweep(cfg: SweepConfig) -> list[SweepRecord]:
    """Execute a sweep and write its CSV and JSON sidecar.

    Returns the per-sample records (aggregation rows are only in the
    file).  Raises OutOfBudgetError before any work if some cell would
    need a dense matrix beyond the m*n budget.
    """
    if cfg.experiment is Experiment.REGION:
        resolution = int(cfg.grids["resolution"][0])
        region_curves(resolution, out_path=cfg.out_path)
        _write_sidecar(cfg)
        return []
    cells = _build_cells(cfg)
    for cell in cells:
        if cell.m * cell.n > DENSE_BUDGET:
            raise OutOfBudgetError(
                f"cell {cell.index} (m={cell.m}, n={cell.n}) exceeds "
                f"m*n budget {DENSE_BUDGET}"
            )
    workers = cfg.threads if cfg.threads > 0 else (os.cpu_count() or 1)
    if workers == 1:
        per_cell = [_measure_cell(cfg, cell) for cell in cells]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_cell = list(pool.map(lambda c: _measure_cell(cfg, c), cells))
    records = [r for chunk in per_cell for r in chunk]
    aggregates = [r for chunk in per_cell for r in _aggregate(chunk)]
    atomic_write_text(cfg.out_path, format_sweep_csv(records, aggregates))
    _write_sidecar(cfg)
    return records


def _write_sidecar(cfg: SweepConfig) -> None:
    payload = json.dumps(cfg.to_json_dict(), indent=2, sort_keys=True) + "\n"
    atomic_write_text(cfg.out_path + ".meta.json", payload)
