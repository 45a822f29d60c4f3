import json
import subprocess
import sys

import pytest

from cfisac_plots import PlotSpec, SchemaError, curve_data, read_rows, render_curves
from cfisac_plots.render import CSV_HEADER


def write_csv(path, rows):
    lines = [CSV_HEADER] + rows
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def small_csv(tmp_path):
    return write_csv(tmp_path / "r.csv", [
        "0,proposed,25,0,-50,1,5,true,1.0,3",
        "1,proposed,25,0,-52,1,5,true,1.0,4",
        "0,proposed,30,0,-49,1,5,true,1.0,3",
        "1,proposed,30,0,-45,1,5,true,1.0,4",
        "0,radar_only,25,0,-48,1,5,true,1.0,3",
        "1,radar_only,25,0,-50,1,5,true,1.0,4",
        "0,radar_only,30,0,-44,1,5,true,1.0,3",
        "1,radar_only,30,0,-46,1,5,false,1.0,4",
    ])


class TestCurveData:
    def test_two_point_polyline(self, small_csv):
        curves = curve_data(read_rows(small_csv), "P_dBm")
        assert curves["proposed"] == ([25.0, 30.0], [-51.0, -47.0])

    def test_converged_rows_only(self, small_csv):
        curves = curve_data(read_rows(small_csv), "P_dBm")
        # the non-converged radar_only row at 30 dBm is excluded
        assert curves["radar_only"][1][1] == -44.0

    def test_group_count(self, small_csv):
        curves = curve_data(read_rows(small_csv), "P_dBm")
        assert sorted(curves) == ["proposed", "radar_only"]


class TestRenderCurves:
    def test_writes_image_and_returns_data(self, small_csv, tmp_path):
        out = tmp_path / "fig.png"
        spec = PlotSpec(csv_path=small_csv, x_field="P_dBm", output_path=str(out))
        curves = render_curves(spec)
        assert out.exists() and out.stat().st_size > 0
        assert curves["proposed"][1] == [-51.0, -47.0]

    def test_rerender_byte_identical(self, small_csv, tmp_path):
        for ext in ("png", "svg"):
            a, b = tmp_path / f"a.{ext}", tmp_path / f"b.{ext}"
            render_curves(PlotSpec(csv_path=small_csv, x_field="P_dBm",
                                   output_path=str(a)))
            render_curves(PlotSpec(csv_path=small_csv, x_field="P_dBm",
                                   output_path=str(b)))
            assert a.read_bytes() == b.read_bytes(), ext

    def test_empty_csv_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(CSV_HEADER + "\n")
        with pytest.raises(SchemaError):
            render_curves(PlotSpec(csv_path=str(path), x_field="P_dBm",
                                   output_path=str(tmp_path / "x.png")))

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(SchemaError):
            read_rows(str(path))

    def test_bad_axis_rejected(self, small_csv, tmp_path):
        with pytest.raises(SchemaError):
            PlotSpec(csv_path=small_csv, x_field="bogus",
                     output_path=str(tmp_path / "x.png"))


class TestCli:
    def test_cli_roundtrip(self, small_csv, tmp_path, capsys):
        from cfisac_plots.cli import main
        out = tmp_path / "fig.svg"
        assert main(["--csv", small_csv, "--x", "P_dBm", "--out", str(out)]) == 0
        assert out.exists()

    def test_cli_empty_csv_nonzero_exit(self, tmp_path, capsys):
        from cfisac_plots.cli import main
        path = tmp_path / "empty.csv"
        path.write_text(CSV_HEADER + "\n")
        rc = main(["--csv", str(path), "--x", "P_dBm",
                   "--out", str(tmp_path / "x.png")])
        assert rc == 1


@pytest.mark.slow
class TestAgainstHarness:
    """Smoke test on a real desk-preset sweep, via the simulator's CLI only."""

    def test_plot_matches_summarize(self, tmp_path):
        csv_path = tmp_path / "sweep.csv"
        run = subprocess.run(
            [sys.executable, "-m", "cfisac.cli", "sweep-power",
             "--preset", "desk", "--drops", "2", "--seed", "11",
             "--values", "30", "35", "--schemes", "proposed", "radar_only",
             "--out", str(csv_path)],
            capture_output=True, text=True, timeout=1800)
        assert run.returncode == 0, run.stderr
        out = subprocess.run(
            [sys.executable, "-m", "cfisac.cli", "summarize",
             "--csv", str(csv_path), "--json"],
            capture_output=True, text=True, timeout=300)
        assert out.returncode == 0, out.stderr
        reference = {(r["scheme"], r["P_dBm"]): r["mean_radar_sinr_dB"]
                     for r in json.loads(out.stdout)
                     if r["converged_rows"] > 0}

        img1 = tmp_path / "fig1.png"
        curves = render_curves(PlotSpec(csv_path=str(csv_path),
                                        x_field="P_dBm", output_path=str(img1)))
        for scheme, (xs, ys) in curves.items():
            for x, y in zip(xs, ys):
                assert abs(y - reference[(scheme, x)]) <= 1e-9

        img2 = tmp_path / "fig2.png"
        render_curves(PlotSpec(csv_path=str(csv_path), x_field="P_dBm",
                               output_path=str(img2)))
        assert img1.read_bytes() == img2.read_bytes()
