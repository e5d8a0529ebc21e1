"""Unit tests for CSV, text and SVG artifact writers."""

import numpy as np
import pytest

from src.services.emitters import (
    SvgPlot,
    format_value,
    read_cloud,
    read_csv,
    write_csv,
    write_error_csv,
    write_text,
)
from src.services.errors import InputError, NumericError


@pytest.mark.unit
class TestFormatValue:
    """Tests for CSV cell formatting."""

    def test_floats_round_trip(self):
        """Test that 17 significant digits reproduce the float exactly."""
        for value in (0.1, 1 / 3, 2.0**-40, 123456.789e10):
            assert float(format_value(value)) == value

    def test_numpy_floats(self):
        """Test numpy scalars are formatted like floats."""
        assert format_value(np.float64(0.5)) == "0.5"

    def test_booleans_and_none(self):
        """Test lowercase booleans and empty cells for None."""
        assert format_value(True) == "true"
        assert format_value(False) == "false"
        assert format_value(None) == ""

    def test_explicit_digits(self):
        """Test a digit override."""
        assert format_value(1 / 3, digits=3) == "0.333"


@pytest.mark.unit
class TestCsv:
    """Tests for CSV writing and reading."""

    def test_metadata_header_and_rows(self, tmp_path):
        """Test the preamble, the header and the row cells."""
        path = write_csv(
            tmp_path / "out" / "table.csv",
            ["word", "value", "flag"],
            [["ab", 0.25, True], ["Ba", 1.5, False]],
            {"command": "ball", "seed": 3},
        )
        lines = path.read_text().splitlines()
        assert lines[:2] == ["# command=ball", "# seed=3"]
        metadata, header, rows = read_csv(path)
        assert metadata == {"command": "ball", "seed": "3"}
        assert header == ["word", "value", "flag"]
        assert rows == [["ab", "0.25", "true"], ["Ba", "1.5", "false"]]

    def test_header_required(self, tmp_path):
        """Test InputError for a file with metadata only."""
        path = tmp_path / "empty.csv"
        path.write_text("# command=ball\n")
        with pytest.raises(InputError):
            read_csv(path)

    def test_error_csv(self, tmp_path):
        """Test code, type, exit code and message columns."""
        path = write_error_csv(tmp_path, NumericError("window too small"))
        _, header, rows = read_csv(path)
        assert header == ["code", "error_type", "exit_code", "message"]
        assert rows == [["numeric-error", "NumericError", "3", "window too small"]]

    def test_text_report(self, tmp_path):
        """Test that reports start with the metadata block."""
        path = write_text(tmp_path / "report.txt", "body\n", {"command": "verify"})
        assert path.read_text() == "# command=verify\n\nbody\n"


@pytest.mark.unit
class TestReadCloud:
    """Tests for point-cloud files."""

    def test_flag_columns_give_a_product_cloud(self, tmp_path):
        """Test xi_* and xibar_* columns split into two factors."""
        path = write_csv(
            tmp_path / "cloud.csv",
            ["order_key", "xi_0", "xi_1", "xibar_0", "xibar_1"],
            [[0.0, 1.0, 0.0, 0.0, 1.0], [1.0, 0.6, 0.8, 0.8, 0.6]],
            {},
        )
        cloud = read_cloud(path)
        assert cloud.metric == "product-linf"
        assert cloud.size == 2
        assert np.allclose(cloud.factors[1][1], [0.8, 0.6])

    def test_plain_columns_give_one_factor(self, tmp_path):
        """Test files without xi columns."""
        path = tmp_path / "plain.csv"
        path.write_text("x,y,z\n1,0,0\n0,1,0\n0,0,1\n")
        cloud = read_cloud(path)
        assert cloud.metric == "projective"
        assert cloud.factors[0].shape == (3, 3)

    def test_bad_values(self, tmp_path):
        """Test InputError for non-numeric cells."""
        path = tmp_path / "bad.csv"
        path.write_text("x,y\n1,abc\n")
        with pytest.raises(InputError):
            read_cloud(path)


@pytest.mark.unit
class TestSvgPlot:
    """Tests for the SVG canvas."""

    def test_render_is_deterministic(self):
        """Test identical documents without a timestamp."""
        def build() -> str:
            plot = SvgPlot(title="Q <curve>")
            plot.polyline(np.array([[0.0, 0.0], [1.0, 2.0]]))
            plot.points(np.array([[0.5, 1.0]]))
            return plot.render({"command": "qcurve"}, include_timestamp=False)

        first = build()
        assert first == build()
        assert "command=qcurve" in first
        assert "Q &lt;curve&gt;" in first
        assert first.count("<circle") == 1
        assert first.count("<polyline") == 1
        assert "timestamp" not in first

    def test_timestamp_on_request(self):
        """Test the timestamp line when enabled."""
        plot = SvgPlot()
        plot.points(np.array([[0.0, 0.0]]))
        assert "timestamp=" in plot.render({}, include_timestamp=True)

    def test_save(self, tmp_path):
        """Test that save writes the rendered document."""
        plot = SvgPlot()
        plot.polyline(np.array([[0.0, 0.0], [1.0, 1.0]]))
        path = plot.save(tmp_path / "plots" / "line.svg", {"seed": 0})
        assert path.read_text().startswith('<?xml version="1.0"')
