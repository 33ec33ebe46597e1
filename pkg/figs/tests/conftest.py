"""Shared fixtures: real CSVs produced by the delaylab command line.

The rendering package treats those CSVs as its only interface, so the
fixtures shell out to the producer instead of importing it.
"""

import subprocess
import sys

import pytest

_KINDS = [
    "scalar-cond",
    "scalar-det",
    "herm-grid",
    "region",
    "general-cond",
    "general-det",
    "lag-growth",
    "wclass-spectra",
]


def _produce(args, cwd):
    proc = subprocess.run(
        [sys.executable, "-m", "delaylab.cli", *args],
        cwd=cwd, capture_output=True, text=True,
    )
    assert proc.returncode == 0, f"fixture CSV failed: {proc.stderr}"


@pytest.fixture(scope="session")
def all_kinds():
    return list(_KINDS)


@pytest.fixture(scope="session")
def csv_for(tmp_path_factory):
    """Map figure kind -> path of a small, seeded fixture CSV."""
    root = tmp_path_factory.mktemp("fixture_csvs")
    sweeps = {
        "scalar-cond": ["--grid", "omega=0.2,0.5,0.9,1.0,1.5",
                        "--grid", "n=4,8"],
        "scalar-det": ["--grid", "omega=0.2,0.5,0.9,1.0,1.5",
                       "--grid", "n=4,8"],
        "herm-grid": ["--grid", "lambda1=lin:-0.9:0.9:5",
                      "--grid", "lambda2=lin:-0.9:0.9:5",
                      "--grid", "n=2,4"],
        "general-cond": ["--grid", "sigma_max=lin:0.05:0.45:5",
                         "--grid", "m=2,4", "--grid", "n=2,4"],
        "general-det": ["--grid", "sigma_max=lin:0.1:0.9:5",
                        "--grid", "m=2,4", "--grid", "n=2,4"],
        "lag-growth": ["--grid", "m=2", "--grid", "n=2,4",
                       "--grid", "sigma_max=lin:0.2:0.8:4",
                       "--samples", "5"],
        "wclass-spectra": ["--grid", "m=3", "--grid", "n=3",
                           "--grid", "sigma_target=0.8",
                           "--samples", "6"],
    }
    paths = {}
    for kind, grid_args in sweeps.items():
        out = root / f"{kind}.csv"
        _produce(["sweep", "--experiment", kind, "--seed", "7",
                  "--out", str(out), *grid_args], root)
        paths[kind] = out
    region_out = root / "region.csv"
    _produce(["region", "--resolution", "101", "--out", str(region_out)],
             root)
    paths["region"] = region_out
    return paths
