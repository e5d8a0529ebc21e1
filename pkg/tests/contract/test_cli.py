"""Contract tests for the anosov-lab command line.

Cover exit codes, the error artifact, metadata headers and byte-identical
reruns.
"""

import numpy as np
import pytest

from src.main import main
from src.services import exponents
from src.services.emitters import read_csv, write_csv

METADATA_KEYS = {
    "command",
    "seed",
    "depth",
    "rep",
    "repbar",
    "gap_tolerance",
    "convergence_tolerance",
    "isospectral_tolerance",
    "input_hash",
}


def error_row(directory) -> dict[str, str]:
    """The single row of error.csv as a dict."""
    _, header, rows = read_csv(directory / "error.csv")
    return dict(zip(header, rows[0]))


@pytest.mark.contract
class TestExitCodes:
    """Tests of the exit-code mapping."""

    def test_ball_succeeds(self, tmp_path):
        """Test exit 0 and the ball of the free group."""
        assert main(["ball", "--presentation", "free-2", "--depth", "4", "--output", str(tmp_path)]) == 0
        metadata, header, rows = read_csv(tmp_path / "ball.csv")
        assert header == ["index", "word", "length", "parent"]
        assert len(rows) == 1 + 4 + 12 + 36 + 108
        assert metadata["command"] == "ball"
        assert not (tmp_path / "error.csv").exists()

    def test_depth_below_four(self, tmp_path):
        """Test exit 1 for an invalid depth."""
        assert main(["ball", "--presentation", "free-2", "--depth", "3", "--output", str(tmp_path)]) == 1
        assert error_row(tmp_path)["code"] == "invalid-input"

    def test_unknown_representation(self, tmp_path):
        """Test exit 1 for a name missing from the catalog."""
        assert main(["verify", "--rep", "no-such-rep", "--output", str(tmp_path)]) == 1
        row = error_row(tmp_path)
        assert row["code"] == "unknown-catalog-entry"
        assert row["exit_code"] == "1"

    def test_missing_representation_file(self, tmp_path):
        """Test exit 1 for a file reference that does not exist."""
        assert main(["verify", "--rep", str(tmp_path / "absent.rep"), "--output", str(tmp_path)]) == 1

    def test_isospectral_pair_is_refused(self, tmp_path):
        """Test exit 2 for the hyperbolic representation against its dual."""
        code = main(
            ["theoremB", "--rep", "triangle-334-vinberg(0)", "--repbar", "dual", "--depth", "6",
             "--output", str(tmp_path)]
        )
        assert code == 2
        row = error_row(tmp_path)
        assert row["code"] == "gap-isospectral"
        assert row["error_type"] == "GapIsospectralError"
        assert not (tmp_path / "theoremB.csv").exists()

    def test_sparse_cloud_is_a_numeric_failure(self, tmp_path):
        """Test exit 3 for a point cloud below the point minimum."""
        cloud = write_csv(
            tmp_path / "cloud.csv", ["x", "y"], ([float(x), 1.0] for x in np.linspace(0.0, 1.0, 20)), {}
        )
        out = tmp_path / "out"
        assert main(["hdim", "--cloud", str(cloud), "--output", str(out)]) == 3
        assert error_row(out)["code"] == "cloud-too-sparse"

    def test_linear_algebra_failure_is_a_numeric_failure(self, tmp_path, monkeypatch):
        """Test exit 3 and error.csv when the numerics raise outside the service errors."""

        def diverging(*args, **kwargs):
            raise np.linalg.LinAlgError("SVD did not converge")

        monkeypatch.setattr(exponents, "critical_exponent", diverging)
        code = main(["entropy", "--rep", "f2-schottky", "--depth", "5", "--output", str(tmp_path)])
        assert code == 3
        row = error_row(tmp_path)
        assert row["code"] == "numeric-error"
        assert row["exit_code"] == "3"
        assert not (tmp_path / "entropy.csv").exists()

    def test_missing_config_file(self, tmp_path):
        """Test exit 1 for an absent settings file."""
        code = main(
            ["ball", "--presentation", "free-2", "--config", str(tmp_path / "absent.yaml"), "--output", str(tmp_path)]
        )
        assert code == 1


@pytest.mark.contract
class TestArtifacts:
    """Tests of artifact formats."""

    def test_metadata_header(self, tmp_path):
        """Test that every CSV starts with the reproducibility keys."""
        assert main(["ball", "--rep", "f2-schottky", "--depth", "4", "--seed", "5", "--output", str(tmp_path)]) == 0
        metadata, header, _ = read_csv(tmp_path / "ball.csv")
        assert METADATA_KEYS <= set(metadata)
        assert metadata["seed"] == "5"
        assert metadata["rep"] == "f2-schottky(1.5)"
        assert len(metadata["input_hash"]) == 64
        assert header[:3] == ["index", "word", "length"]
        assert header[3:] == ["a_0", "a_1", "a_2", "lambda_0", "lambda_1", "lambda_2"]

    def test_reruns_are_byte_identical(self, tmp_path):
        """Test determinism of a seeded run."""
        args = ["limitset", "--rep", "f2-schottky", "--depth", "12", "--samples", "16", "--seed", "4"]
        assert main([*args, "--output", str(tmp_path / "first")]) == 0
        assert main([*args, "--output", str(tmp_path / "second")]) == 0
        for name in ("limitset.csv", "cones.csv"):
            assert (tmp_path / "first" / name).read_bytes() == (tmp_path / "second" / name).read_bytes()

    def test_entropy_prints_the_estimate(self, tmp_path, capsys):
        """Test the stdout line and the estimator table."""
        code = main(
            ["entropy", "--rep", "f2-schottky", "--depth", "6", "--method", "poincare-root",
             "--output", str(tmp_path)]
        )
        assert code == 0
        label, method, value = capsys.readouterr().out.strip().rsplit(" ", 2)
        assert method == "poincare-root"
        assert float(value) > 0
        _, header, rows = read_csv(tmp_path / "entropy.csv")
        assert header[:3] == ["functional", "method", "value"]
        assert rows[0][0] == label
        assert rows[0][1] == "poincare-root"

    def test_counting_window_option(self, tmp_path):
        """Test that --window t0,t1 sets the slope-fit window as fractions of t_max."""
        args = ["entropy", "--rep", "f2-schottky", "--depth", "10", "--method", "slope-fit"]
        assert main([*args, "--output", str(tmp_path / "default")]) == 0
        assert main([*args, "--window", "0.2,0.9", "--output", str(tmp_path / "wide")]) == 0

        def window(directory):
            _, header, rows = read_csv(directory / "entropy.csv")
            row = dict(zip(header, rows[0]))
            return float(row["window_start"]), float(row["window_stop"])

        default_start, default_stop = window(tmp_path / "default")
        wide_start, wide_stop = window(tmp_path / "wide")
        assert default_start / default_stop == pytest.approx(0.3 / 0.9)
        assert wide_start / wide_stop == pytest.approx(0.2 / 0.9)
        assert wide_stop == pytest.approx(default_stop)

    def test_intersection_of_a_representation_with_itself(self, tmp_path):
        """Test I(rho, rho) = 1 in intersection.csv."""
        code = main(
            ["intersection", "--rep", "f2-schottky", "--repbar", "f2-schottky", "--depth", "5",
             "--output", str(tmp_path)]
        )
        assert code == 0
        _, _, rows = read_csv(tmp_path / "intersection.csv")
        values = {row[0]: float(row[1]) for row in rows}
        assert values["I_tau(taubar)"] == 1.0
        assert values["beta_lower"] == 1.0
        assert values["beta_upper"] == 1.0
