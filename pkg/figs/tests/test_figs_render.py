"""Rendering behaviour over real producer CSVs."""

import csv
import json

import pytest

from delayfigs import (
    FigureJob,
    InvalidStyleError,
    SchemaMismatchError,
    read_region_csv,
    read_sweep_csv,
    render,
)


def _render(csv_path, kind, out_path, style=None):
    render(FigureJob(csv_path=str(csv_path), figure_kind=kind,
                     out_path=str(out_path), style=style))
    return out_path.read_bytes()


def _is_svg(blob: bytes) -> bool:
    return blob.startswith(b"<?xml") and b"</svg>" in blob


class TestAcceptance:
    def test_every_kind_renders_nonempty_svg(self, csv_for, all_kinds,
                                             tmp_path):
        for kind in all_kinds:
            out = tmp_path / f"{kind}.svg"
            blob = _render(csv_for[kind], kind, out)
            assert len(blob) > 1000, f"{kind}: suspiciously small SVG"
            assert _is_svg(blob), f"{kind}: output is not SVG"
            print(f"[ACCEPT] figs-render-{kind}: PASS "
                  f"({len(blob)} bytes)")

    def test_scalar_cond_one_bound_overlay_per_n(self, csv_for, tmp_path):
        with open(csv_for["scalar-cond"]) as fh:
            rows = list(csv.DictReader(fh))
        n_values = sorted({int(r["n"]) for r in rows})
        out = tmp_path / "overlay.svg"
        text = _render(csv_for["scalar-cond"], "scalar-cond", out).decode()
        total = text.count('id="bound-overlay-n')
        assert total == len(n_values)
        for n in n_values:
            assert text.count(f'id="bound-overlay-n{n}"') == 1
        print(f"[ACCEPT] figs-bound-overlays: PASS "
              f"(one per n over n={n_values})")


class TestDeterminism:
    @pytest.mark.parametrize("kind", ["scalar-cond", "herm-grid",
                                      "region", "lag-growth",
                                      "wclass-spectra"])
    def test_rerender_is_byte_identical(self, csv_for, tmp_path, kind):
        first = _render(csv_for[kind], kind, tmp_path / "a.svg")
        second = _render(csv_for[kind], kind, tmp_path / "b.svg")
        assert first == second

    def test_style_change_changes_bytes(self, csv_for, tmp_path):
        plain = _render(csv_for["scalar-cond"], "scalar-cond",
                        tmp_path / "p.svg")
        titled = _render(csv_for["scalar-cond"], "scalar-cond",
                         tmp_path / "t.svg", style={"title": "scalar"})
        assert plain != titled


class TestOutputs:
    def test_sidecar_records_job(self, csv_for, tmp_path):
        out = tmp_path / "fig.svg"
        _render(csv_for["region"], "region", out,
                style={"title": "admissible region"})
        sidecar = json.loads((tmp_path / "fig.svg.style.json").read_text())
        assert sidecar["figure_kind"] == "region"
        assert sidecar["csv_path"] == str(csv_for["region"])
        assert sidecar["style"] == {"title": "admissible region"}
        assert sidecar["svg_hashsalt"]

    def test_png_output(self, csv_for, tmp_path):
        out = tmp_path / "fig.png"
        render(FigureJob(csv_path=str(csv_for["scalar-det"]),
                         figure_kind="scalar-det", out_path=str(out)))
        blob = out.read_bytes()
        assert blob.startswith(b"\x89PNG")
        assert len(blob) > 1000

    def test_style_keys_apply(self, csv_for, tmp_path):
        out = tmp_path / "fig.svg"
        blob = _render(csv_for["herm-grid"], "herm-grid", out,
                       style={"cmap": "plasma",
                              "colorbar_label": "log10 kappa"})
        assert b"log10 kappa" in blob
        sidecar = json.loads((tmp_path / "fig.svg.style.json").read_text())
        assert sidecar["cmap"] == "plasma"


class TestValidation:
    def test_unknown_style_key_rejected(self, csv_for, tmp_path):
        with pytest.raises(InvalidStyleError):
            FigureJob(csv_path=str(csv_for["scalar-cond"]),
                      figure_kind="scalar-cond",
                      out_path=str(tmp_path / "x.svg"),
                      style={"glitter": True})

    def test_region_csv_rejected_by_sweep_kinds(self, csv_for, tmp_path):
        with pytest.raises(SchemaMismatchError):
            _render(csv_for["region"], "scalar-cond", tmp_path / "x.svg")

    def test_sweep_csv_rejected_by_region_kind(self, csv_for, tmp_path):
        with pytest.raises(SchemaMismatchError):
            _render(csv_for["scalar-cond"], "region", tmp_path / "x.svg")

    def test_experiment_kind_mismatch(self, csv_for, tmp_path):
        with pytest.raises(SchemaMismatchError):
            _render(csv_for["scalar-cond"], "herm-grid", tmp_path / "x.svg")

    def test_truncated_rows_rejected(self, csv_for, tmp_path):
        lines = csv_for["scalar-cond"].read_text().splitlines()
        bad = tmp_path / "bad.csv"
        bad.write_text("\n".join([lines[0], lines[1].rsplit(",", 2)[0]])
                       + "\n")
        with pytest.raises(SchemaMismatchError):
            read_sweep_csv(str(bad))

    def test_header_only_rejected(self, csv_for, tmp_path):
        bad = tmp_path / "empty.csv"
        bad.write_text(csv_for["scalar-cond"].read_text().splitlines()[0]
                       + "\n")
        with pytest.raises(SchemaMismatchError):
            read_sweep_csv(str(bad))

    def test_missing_file_is_os_error(self, tmp_path):
        with pytest.raises(OSError):
            _render(tmp_path / "nope.csv", "region", tmp_path / "x.svg")


class TestReader:
    def test_sweep_table_shape(self, csv_for):
        table = read_sweep_csv(str(csv_for["scalar-cond"]), "scalar-cond")
        assert table.experiment == "scalar-cond"
        assert table.distinct("n") == [4, 8]
        assert len(table.means) == len(table.variances) == 10
        assert all(r.sample == "mean" for r in table.means)
        row = table.means[0]
        assert row.param1_name == "omega"
        assert set(row.values) >= {"sigma_max", "sigma_min", "kappa_log10"}

    def test_region_curves_shape(self, csv_for):
        curves = read_region_csv(str(csv_for["region"]))
        assert len(curves.sigma_min) == 101
        assert (curves.sigma_min[1:] > curves.sigma_min[:-1]).all()
        assert (curves.weak >= 0.5).all()

    def test_lag_growth_has_samples_and_aggregates(self, csv_for):
        table = read_sweep_csv(str(csv_for["lag-growth"]), "lag-growth")
        assert len(table.samples) == 5 * len(table.means)
        assert all(not r.is_aggregate for r in table.samples)
        assert all(r.is_aggregate for r in table.means + table.variances)
